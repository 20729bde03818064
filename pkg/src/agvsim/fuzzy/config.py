"""Reading rule-base files.

A rule base is a TOML document::

    rules = [                   # top-level key, so it must precede the tables
      "IF line_offset IS ZE THEN steer_bias IS ZE",
    ]

    [inference]                 # optional; only the Mamdani defaults are accepted
    resolution = 1001

    [inputs.line_offset]
    universe = [-1.0, 1.0]
    terms.NL = ["trapezoidal", -1.0, -1.0, -0.6, -0.25]
    terms.ZE = ["triangular", -0.25, 0.0, 0.25]

    [outputs.steer_bias]
    universe = [-1.0, 1.0]
    terms.ZE = ["triangular", -0.1, 0.0, 0.1]

    [mirror]                    # optional; enables symmetry checks
    swap = [["sonar_left", "sonar_right"]]
    negate = ["line_offset", "steer_bias"]

Inputs are read in file order, which fixes the order of crisp input vectors.
Rule grammar: ``IF v IS t [AND v IS t ...] THEN v IS t [, v IS t ...]``;
keywords are case-insensitive. Errors carry the file line number.
"""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path

from .._toml import TOMLDecodeError, error_line, loads
from ..errors import RuleBaseError
from .inference import FuzzyController, Mirror, Rule, validate_rulebase
from .sets import LinguisticVariable, MembershipFunction

_CLAUSE = re.compile(r"^\s*([A-Za-z_][\w]*)\s+IS\s+([A-Za-z_][\w]*)\s*$", re.IGNORECASE)
_RULE = re.compile(r"^\s*IF\s+(.+?)\s+THEN\s+(.+?)\s*$", re.IGNORECASE | re.DOTALL)
_ALLOWED = {"and": "min", "implication": "min", "aggregation": "max",
            "defuzzification": "centroid"}


def parse_rule(text: str, line: int | None = None, path=None) -> Rule:
    m = _RULE.match(text)
    if not m:
        raise RuleBaseError(f"rule must read 'IF ... THEN ...': {text!r}", path, line)
    ante_txt, cons_txt = m.groups()

    def clauses(part: str, sep: str) -> tuple[tuple[str, str], ...]:
        out = []
        for chunk in re.split(sep, part, flags=re.IGNORECASE):
            cm = _CLAUSE.match(chunk)
            if not cm:
                raise RuleBaseError(f"cannot parse clause {chunk.strip()!r} "
                                    "(expected 'variable IS term')", path, line)
            out.append((cm.group(1), cm.group(2)))
        return tuple(out)

    return Rule(clauses(ante_txt, r"\s+AND\s+"), clauses(cons_txt, r"\s*,\s*"), line)


def _line_of(text_lines: list[str], needle: str, start: int) -> tuple[int | None, int]:
    for i in range(start, len(text_lines)):
        if needle in text_lines[i]:
            return i + 1, i + 1
    return None, start


def _variables(section: dict, kind: str, path, text_lines) -> tuple[LinguisticVariable, ...]:
    out = []
    for name, spec in section.items():
        line, _ = _line_of(text_lines, f"{kind}.{name}", 0)
        if not isinstance(spec, dict) or "universe" not in spec or "terms" not in spec:
            raise RuleBaseError(f"{kind}.{name} needs 'universe' and 'terms'", path, line)
        terms = {}
        for label, raw in spec["terms"].items():
            if not isinstance(raw, list) or not raw or not isinstance(raw[0], str):
                raise RuleBaseError(f"{kind}.{name}.{label}: expected [shape, params...]",
                                    path, line)
            try:
                terms[label] = MembershipFunction(raw[0], tuple(raw[1:]))
            except (ValueError, TypeError) as exc:
                raise RuleBaseError(f"{kind}.{name}.{label}: {exc}", path, line) from None
        try:
            universe = tuple(spec["universe"])
            if len(universe) != 2:
                raise ValueError("universe must be [min, max]")
            out.append(LinguisticVariable(name, universe, terms))
        except (ValueError, TypeError) as exc:
            raise RuleBaseError(f"{kind}.{name}: {exc}", path, line) from None
    return tuple(out)


def parse_rulebase(text: str, path=None, check: bool = True) -> FuzzyController:
    try:
        doc = loads(text)
    except TOMLDecodeError as exc:
        raise RuleBaseError(str(exc), path, error_line(exc)) from None
    lines = text.splitlines()

    inference = doc.get("inference", {})
    for key, want in _ALLOWED.items():
        if key in inference and str(inference[key]).lower() != want:
            raise RuleBaseError(f"inference.{key} = {inference[key]!r} is not supported "
                                f"(only {want!r})", path, _line_of(lines, key, 0)[0])
    resolution = int(inference.get("resolution", 1001))
    if resolution < 3:
        raise RuleBaseError("inference.resolution must be at least 3", path)

    inputs = _variables(doc.get("inputs", {}), "inputs", path, lines)
    outputs = _variables(doc.get("outputs", {}), "outputs", path, lines)
    if not inputs or not outputs:
        raise RuleBaseError("rule base needs at least one input and one output", path)

    rules = []
    cursor = 0
    raw_rules = doc.get("rules", [])
    if not isinstance(raw_rules, list):
        raise RuleBaseError("'rules' must be a list of strings", path)
    for raw in raw_rules:
        if not isinstance(raw, str):
            raise RuleBaseError(f"rule {raw!r} is not a string", path)
        line, cursor = _line_of(lines, raw, cursor)
        rules.append(parse_rule(raw, line, path))

    mirror = None
    if "mirror" in doc:
        m = doc["mirror"]
        mirror = Mirror(tuple(tuple(p) for p in m.get("swap", [])), tuple(m.get("negate", [])))

    ctrl = FuzzyController(inputs, outputs, tuple(rules), mirror, resolution)
    if check:
        errors = [d for d in validate_rulebase(ctrl) if d.level == "error"]
        if errors:
            first = errors[0]
            more = f" (and {len(errors) - 1} more)" if len(errors) > 1 else ""
            raise RuleBaseError(first.message + more, path, first.line)
    return ctrl


def load_rulebase(path=None, check: bool = True) -> FuzzyController:
    """Load a rule base from ``path``; ``None`` or ``"default"`` gives the shipped one."""
    if path is None or str(path) == "default":
        text = resources.files("agvsim.data").joinpath("default_rulebase.toml").read_text()
        return parse_rulebase(text, "default_rulebase.toml", check)
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise RuleBaseError(f"cannot read rule base ({exc.strerror})", path) from None
    return parse_rulebase(text, path, check)


def default_controller() -> FuzzyController:
    return load_rulebase()
