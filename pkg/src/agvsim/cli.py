"""Command-line front end: ``agvsim run|calibrate|fuzzy-eval|plot-data|validate``."""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

import numpy as np

from .camera import calibrate_with_residuals, read_correspondences
from .errors import AgvsimError, ConfigError, DegenerateCalibration, InsufficientPoints
from .fuzzy import infer, load_rulebase, parse_rulebase, validate_rulebase
from .scenario import (Metrics, TrajectoryRecord, compute_metrics, format_table,
                       load_scenario, run_simulation)
from .scenario.model import validate_duration

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2
OUT_ENV = "AGVSIM_OUT"
DEFAULT_OUT = "agvsim_out"

PRECEDENCE = """\
Settings precedence: command-line flags (--seed, --dt, --duration) override
values in the scenario file, which override built-in defaults. The output
directory comes from --out, else the ${env} environment variable, else
./{default}.

Exit status: 0 run completed, 2 run completed but the vehicle failed the
course (collision or line crossing), 1 invalid input.
""".replace("{env}", OUT_ENV).replace("{default}", DEFAULT_OUT)


class _Abort(Exception):
    """Usage-level error reported as ``agvsim: <message>`` with exit status 1."""


# -- file output ------------------------------------------------------------------

def write_files_atomically(files: dict[Path, str]) -> None:
    """Publish several text files so that none appears partially written.

    Everything is first written to temporary files next to the targets; the
    renames happen only once all writes succeeded. On any error (including
    KeyboardInterrupt) the temporaries are removed.
    """
    pending: list[tuple[str, Path]] = []
    try:
        for target, text in files.items():
            target.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp",
                                       dir=target.parent)
            pending.append((tmp, target))
            with os.fdopen(fd, "w", newline="\n") as fh:
                fh.write(text)
                fh.flush()
                os.fsync(fh.fileno())
        for tmp, target in pending:
            os.replace(tmp, target)
    except BaseException:
        for tmp, _ in pending:
            try:
                os.unlink(tmp)
            except FileNotFoundError:
                pass
        raise


def _out_dir(arg: str | None) -> Path:
    return Path(arg or os.environ.get(OUT_ENV) or DEFAULT_OUT)


# -- run ----------------------------------------------------------------------------

def _g(v: float) -> str:
    return "nan" if math.isnan(v) else f"{v:.4g}"


def metrics_text(name: str, m: Metrics, termination: str) -> str:
    lines = [
        f'scenario = "{name}"',
        f'termination = "{termination}"',
        f"starting_time_s = {_g(m.starting_time)}",
        f"settling_angle_deg = {_g(m.settling_angle)}",
        f"settling_time_s = {_g(m.settling_time)}",
        f"settled = {str(m.settled).lower()}",
        f"max_cross_track_m = {_g(m.max_cross_track)}",
        f"line_cross = {m.line_cross}",
        f"collision = {m.collision}",
        f"track_lost = {m.track_lost}",
        f"duration_s = {_g(m.duration)}",
        "",
        "[table]",
        format_table([(name, m)]),
    ]
    return "\n".join(lines) + "\n"


def events_csv(tr: TrajectoryRecord) -> str:
    rows = ["t,event,x,y"]
    rows += [f"{t!r},{ev},{x!r},{y!r}" for t, ev, x, y in tr.event_log()]
    return "\n".join(rows) + "\n"


def run_one(ref: str, out_dir: Path, seed=None, dt=None, duration=None) -> tuple[int, str]:
    """Run one scenario, write its three files, return (exit status, report)."""
    try:
        s = load_scenario(ref).with_overrides(seed=seed, dt=dt, duration=duration)
        validate_duration(s)
    except ConfigError as exc:
        if exc.path is None:
            exc = type(exc)(exc.reason, ref)
        return EXIT_INVALID, f"agvsim: {exc}"
    tr = run_simulation(s)
    m = compute_metrics(tr, s)
    target = out_dir / s.name
    text = metrics_text(s.name, m, tr.termination)
    write_files_atomically({target / "trajectory.csv": tr.to_csv(),
                            target / "metrics.txt": text,
                            target / "events.csv": events_csv(tr)})
    status = EXIT_FAILED if m.failed else EXIT_OK
    return status, text + f"# written to {target}\n"


def _run_job(args):
    return run_one(*args)


def cmd_run(ns) -> int:
    for name, v in (("--dt", ns.dt), ("--duration", ns.duration)):
        if v is not None and not (math.isfinite(v) and v > 0):
            raise _Abort(f"{name} must be a positive number, got {v}")
    out = _out_dir(ns.out)
    jobs = [(ref, out, ns.seed, ns.dt, ns.duration) for ref in ns.scenario]
    if ns.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=ns.jobs) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]
    for status, report in results:
        stream = sys.stderr if status == EXIT_INVALID else sys.stdout
        print(report, end="" if report.endswith("\n") else "\n", file=stream)
    codes = {status for status, _ in results}
    if EXIT_INVALID in codes:
        return EXIT_INVALID
    return EXIT_FAILED if EXIT_FAILED in codes else EXIT_OK


# -- calibrate ------------------------------------------------------------------------

def cmd_calibrate(ns) -> int:
    path = ns.points
    if path == "bundled":
        path = resources.files("agvsim.data").joinpath("calibration_12pt.txt")
    cset = read_correspondences(path)
    try:
        res = calibrate_with_residuals(cset, ns.zg)
    except DegenerateCalibration as exc:
        raise _Abort(f"{path}: DegenerateCalibration: {exc} (rank {exc.rank})") from None
    except InsufficientPoints as exc:
        raise _Abort(f"{path}: InsufficientPoints: {exc}") from None
    m = res.model
    print(f"# {len(cset)} correspondences from {path}")
    for name in ("a11", "a12", "a13", "a14", "a21", "a22", "a23", "a24"):
        print(f"{name} = {getattr(m, name):.12g}")
    print("# residuals (observed - fitted), pixels")
    print("point,dx,dy")
    for i, (dx, dy) in enumerate(res.residuals, start=1):
        print(f"{i},{dx:.4g},{dy:.4g}")
    print(f"rms = {res.rms:.4g}")
    return EXIT_OK


# -- fuzzy-eval -------------------------------------------------------------------------

def cmd_fuzzy_eval(ns) -> int:
    ctrl = load_rulebase(ns.rulebase)
    values = dict(zip(("line_offset", "line_angle", "sonar_left", "sonar_center",
                       "sonar_right", "speed_ref"), ns.values))
    missing = [n for n in ctrl.input_names if n not in values]
    if missing:
        raise _Abort(f"rule base {ns.rulebase} needs inputs {missing}")
    res = infer(ctrl, {n: values[n] for n in ctrl.input_names})
    for name, v in zip(res.names, res.outputs):
        print(f"{name} = {v!r}")
    for name, flag in zip(res.names, res.no_rule_fired):
        print(f"no_rule_fired.{name} = {str(bool(flag)).lower()}")
    return EXIT_OK


# -- plot-data ----------------------------------------------------------------------------

def plot_tables(tr: TrajectoryRecord) -> dict[str, str]:
    """The three plot-ready CSV bodies derived from a trajectory."""
    x, y, ct = tr["x"], tr["y"], tr["cross_track"]
    tangent = tr["heading"] - tr["heading_error"]
    # foot of the perpendicular on the followed line (cross-track is + to the left)
    lx = x + ct * np.sin(tangent)
    ly = y - ct * np.cos(tangent)

    def table(header, *cols):
        body = [header] + [",".join(repr(float(v)) for v in row) for row in zip(*cols)]
        return "\n".join(body) + "\n"

    return {
        "path_xy.csv": table("x,y,line_x,line_y", x, y, lx, ly),
        "heading_error_t.csv": table("t,heading_error_deg", tr["t"], np.degrees(tr["heading_error"])),
        "wheel_speeds_t.csv": table("t,left_speed,right_speed", tr["t"], tr["left_speed"],
                                    tr["right_speed"]),
    }


def cmd_plot_data(ns) -> int:
    src = Path(ns.trajectory)
    try:
        text = src.read_text()
    except OSError as exc:
        raise _Abort(f"{src}: cannot read trajectory ({exc.strerror})") from None
    try:
        tr = TrajectoryRecord.from_csv(text)
    except ValueError as exc:
        raise _Abort(f"{src}: {exc}") from None
    out = Path(ns.out) if ns.out else src.parent
    write_files_atomically({out / name: body for name, body in plot_tables(tr).items()})
    print(f"# wrote path_xy.csv, heading_error_t.csv, wheel_speeds_t.csv to {out}")
    return EXIT_OK


# -- validate --------------------------------------------------------------------------------

def _is_rulebase(text: str) -> bool:
    return any(line.strip().startswith("[inputs") for line in text.splitlines())


def cmd_validate(ns) -> int:
    status = EXIT_OK
    for ref in ns.files:
        p = Path(ref)
        try:
            text = p.read_text() if p.exists() else None
            if text is not None and _is_rulebase(text):
                ctrl = parse_rulebase(text, p, check=False)
                diags = validate_rulebase(ctrl)
                for d in diags:
                    print(f"{p}:{d.line}: {d.level}: {d.message}" if d.line
                          else f"{p}: {d.level}: {d.message}")
                if any(d.level == "error" for d in diags):
                    status = EXIT_INVALID
                    continue
                print(f"{p}: ok (rule base, {len(ctrl.rules)} rules)")
            else:
                s = validate_duration(load_scenario(ref))
                print(f"{ref}: ok (scenario {s.name}, path {s.path.length:.4g} m, "
                      f"{len(s.obstacles)} obstacles)")
        except ConfigError as exc:
            print(f"agvsim: {exc}", file=sys.stderr)
            status = EXIT_INVALID
    return status


# -- entry point -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="agvsim", description=__doc__, epilog=PRECEDENCE,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run scenarios and write trajectory, metrics and events",
                       epilog=PRECEDENCE, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("scenario", nargs="+",
                   help="scenario file or bundled name (case1_straight, case2_curved, "
                        "case3_angular_noise, case4_extreme)")
    p.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./{DEFAULT_OUT}); "
                                 "each scenario writes to OUT/<name>/")
    p.add_argument("--seed", type=int, help="override the scenario's seed")
    p.add_argument("--dt", type=float, help="override the physics step [s], in (0, 0.05]")
    p.add_argument("--duration", type=float, help="override the run length [s], > 0")
    p.add_argument("--jobs", type=int, default=1, help="run up to N scenarios in parallel")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("calibrate", help="fit camera coefficients to correspondences")
    p.add_argument("points", help="correspondence file (xg yg zg xpi ypi per line), "
                                  "or 'bundled' for the shipped 12-point set")
    p.add_argument("--zg", type=float, default=0.0,
                   help="ground height used later for back-projection (default 0)")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("fuzzy-eval", help="evaluate a rule base once")
    p.add_argument("values", nargs=6, type=float,
                   metavar=("LINE_OFFSET", "LINE_ANGLE", "SONAR_LEFT", "SONAR_CENTER",
                            "SONAR_RIGHT", "SPEED_REF"))
    p.add_argument("--rulebase", default="default", help="rule-base file (default: shipped)")
    p.set_defaults(func=cmd_fuzzy_eval)

    p = sub.add_parser("plot-data", help="write plot-ready CSVs from a trajectory.csv")
    p.add_argument("trajectory")
    p.add_argument("--out", help="output directory (default: next to the trajectory)")
    p.set_defaults(func=cmd_plot_data)

    p = sub.add_parser("validate", help="lint scenario and rule-base files")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return ns.func(ns)
    except _Abort as exc:
        print(f"agvsim: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ConfigError, AgvsimError) as exc:
        print(f"agvsim: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
