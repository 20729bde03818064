"""Mamdani inference: min conjunction, min implication, max aggregation and
centroid defuzzification over a uniformly sampled output universe."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from ..errors import RuleBaseError
from .sets import LinguisticVariable, membership_grade

RESOLUTION = 1001


@dataclass(frozen=True)
class Rule:
    antecedent: tuple[tuple[str, str], ...]
    consequent: tuple[tuple[str, str], ...]
    line: int | None = field(default=None, compare=False)

    def __str__(self) -> str:
        ante = " AND ".join(f"{v} IS {t}" for v, t in self.antecedent)
        cons = ", ".join(f"{v} IS {t}" for v, t in self.consequent)
        return f"IF {ante} THEN {cons}"


@dataclass(frozen=True)
class Mirror:
    """Left/right reflection of the controller's variables.

    ``swap`` pairs variables that exchange roles (left sonar <-> right sonar);
    ``negate`` lists variables whose sign flips, their terms mapping onto the
    term with the reflected membership function.
    """

    swap: tuple[tuple[str, str], ...] = ()
    negate: tuple[str, ...] = ()

    def partner(self, var: str) -> str:
        for a, b in self.swap:
            if var == a:
                return b
            if var == b:
                return a
        return var


class InferenceResult(NamedTuple):
    outputs: tuple[float, ...]
    no_rule_fired: tuple[bool, ...]
    names: tuple[str, ...]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.outputs))


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "error" or "warning"
    kind: str   # "unknown-term", "coverage", "symmetry", "gap", "roster"
    message: str
    line: int | None = None

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{self.level}: {where}{self.message}"


@dataclass(frozen=True, eq=False)
class FuzzyController:
    inputs: tuple[LinguisticVariable, ...]
    outputs: tuple[LinguisticVariable, ...]
    rules: tuple[Rule, ...]
    mirror: Mirror | None = None
    resolution: int = RESOLUTION

    @property
    def input_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.inputs)

    @property
    def output_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.outputs)

    def variable(self, name: str) -> LinguisticVariable:
        for v in self.inputs + self.outputs:
            if v.name == name:
                return v
        raise KeyError(name)

    @cached_property
    def _compiled(self):
        return _compile(self)

    def infer(self, crisp_inputs) -> InferenceResult:
        return infer(self, crisp_inputs)


class _Compiled(NamedTuple):
    grade_slots: list[tuple[int, object]]   # (input index, mf) per flat slot
    rule_slots: np.ndarray                  # (n_rules, max_conj) indices into grade vector
    grids: list[np.ndarray]
    weights: list[np.ndarray]               # trapezoid weights per output grid
    clipped_terms: list[tuple[np.ndarray, np.ndarray]]  # per output: (rule idx, term grids)


def _compile(ctrl: FuzzyController) -> _Compiled:
    slots: list[tuple[int, object]] = []
    slot_of: dict[tuple[str, str], int] = {}
    for i, var in enumerate(ctrl.inputs):
        for label, mf in var.terms.items():
            slot_of[var.name, label] = len(slots)
            slots.append((i, mf))
    one = len(slots)  # extra slot holding grade 1 for padding
    width = max((len(r.antecedent) for r in ctrl.rules), default=1)
    rule_slots = np.full((len(ctrl.rules), width), one, dtype=np.intp)
    for r, rule in enumerate(ctrl.rules):
        for k, key in enumerate(rule.antecedent):
            if key not in slot_of:
                raise RuleBaseError(f"rule references unknown input term {key[0]} IS {key[1]}",
                                    line=rule.line)
            rule_slots[r, k] = slot_of[key]

    grids, weights, clipped = [], [], []
    out_index = {v.name: j for j, v in enumerate(ctrl.outputs)}
    per_output: list[list[tuple[int, str]]] = [[] for _ in ctrl.outputs]
    for r, rule in enumerate(ctrl.rules):
        for var, label in rule.consequent:
            if var not in out_index or label not in ctrl.outputs[out_index[var]].terms:
                raise RuleBaseError(f"rule references unknown output term {var} IS {label}",
                                    line=rule.line)
            per_output[out_index[var]].append((r, label))
    for j, var in enumerate(ctrl.outputs):
        grid = np.linspace(var.universe[0], var.universe[1], ctrl.resolution)
        w = np.full(grid.size, grid[1] - grid[0])
        w[0] = w[-1] = 0.5 * (grid[1] - grid[0])
        idx = np.array([r for r, _ in per_output[j]], dtype=np.intp)
        terms = np.array([membership_grade(var.terms[label], grid) for _, label in per_output[j]])
        grids.append(grid)
        weights.append(w)
        clipped.append((idx, terms.reshape(len(idx), grid.size)))
    return _Compiled(slots, rule_slots, grids, weights, clipped)


def _as_vector(ctrl: FuzzyController, crisp_inputs) -> list[float]:
    if isinstance(crisp_inputs, Mapping):
        missing = [n for n in ctrl.input_names if n not in crisp_inputs]
        if missing:
            raise KeyError(f"missing inputs: {missing}")
        values = [crisp_inputs[n] for n in ctrl.input_names]
    else:
        values = list(crisp_inputs)
        if len(values) != len(ctrl.inputs):
            raise ValueError(f"expected {len(ctrl.inputs)} inputs, got {len(values)}")
    values = [float(v) for v in values]
    if not all(np.isfinite(values)):
        raise ValueError("crisp inputs must be finite")
    return [var.clamp(u) for var, u in zip(ctrl.inputs, values)]


def rule_strengths(ctrl: FuzzyController, crisp_inputs) -> np.ndarray:
    """Firing strength of every rule (min over its conjunct grades)."""
    comp = ctrl._compiled
    u = _as_vector(ctrl, crisp_inputs)
    grades = np.empty(len(comp.grade_slots) + 1)
    for k, (i, mf) in enumerate(comp.grade_slots):
        grades[k] = membership_grade(mf, u[i])
    grades[-1] = 1.0
    return grades[comp.rule_slots].min(axis=1)


def infer(ctrl: FuzzyController, crisp_inputs: Sequence[float] | Mapping[str, float]) -> InferenceResult:
    """Map crisp inputs to crisp outputs.

    Inputs are clamped into their universes first. An output for which no rule
    fires (zero aggregate area) gets its universe midpoint and is flagged in
    ``no_rule_fired``.
    """
    comp = ctrl._compiled
    strength = rule_strengths(ctrl, crisp_inputs)
    outs, flags = [], []
    for var, grid, w, (idx, terms) in zip(ctrl.outputs, comp.grids, comp.weights,
                                          comp.clipped_terms):
        if idx.size:
            agg = np.minimum(strength[idx][:, None], terms).max(axis=0)
            area = float(w @ agg)
        else:
            area = 0.0
        if area > 0.0:
            outs.append(float((w * grid) @ agg) / area)
            flags.append(False)
        else:
            outs.append(0.5 * (var.universe[0] + var.universe[1]))
            flags.append(True)
    return InferenceResult(tuple(outs), tuple(flags), ctrl.output_names)


# -- validation ----------------------------------------------------------------

def _mirror_term(ctrl: FuzzyController, mirror: Mirror, var: str, label: str) -> tuple[str, str] | None:
    target = mirror.partner(var)
    try:
        target_var = ctrl.variable(target)
        mf = ctrl.variable(var).terms[label]
    except KeyError:
        return None
    if var in mirror.negate:
        want = mf.mirrored()
        for other, omf in target_var.terms.items():
            if omf == want:
                return target, other
        return None
    if label in target_var.terms and target_var.terms[label] == mf:
        return target, label
    return None


def mirror_rule(ctrl: FuzzyController, rule: Rule, mirror: Mirror | None = None) -> Rule | None:
    mirror = mirror or ctrl.mirror
    if mirror is None:
        return None
    parts = []
    for side in (rule.antecedent, rule.consequent):
        mapped = []
        for var, label in side:
            m = _mirror_term(ctrl, mirror, var, label)
            if m is None:
                return None
            mapped.append(m)
        parts.append(tuple(mapped))
    return Rule(parts[0], parts[1])


def _rule_key(rule: Rule):
    return frozenset(rule.antecedent), frozenset(rule.consequent)


def _coverage_grid(var: LinguisticVariable) -> np.ndarray:
    # term peaks plus the universe ends; gaps between peaks are caught separately
    peaks = {var.clamp(0.5 * (mf.corners[1] + mf.corners[2])) for mf in var.terms.values()}
    return np.array(sorted(peaks | set(var.universe)))


def validate_rulebase(ctrl: FuzzyController) -> list[Diagnostic]:
    """Lint a controller: unknown terms, uncovered outputs, asymmetric rules.

    Coverage is checked on the grid of every input term's peak plus the
    universe ends.
    """
    diags: list[Diagnostic] = []
    known = {(v.name, t) for v in ctrl.inputs for t in v.terms}
    known_out = {(v.name, t) for v in ctrl.outputs for t in v.terms}
    valid_rules = []
    for rule in ctrl.rules:
        ok = True
        for var, label in rule.antecedent:
            if (var, label) not in known:
                diags.append(Diagnostic("error", "unknown-term",
                                        f"unknown input term {var} IS {label}", rule.line))
                ok = False
        for var, label in rule.consequent:
            if (var, label) not in known_out:
                diags.append(Diagnostic("error", "unknown-term",
                                        f"unknown output term {var} IS {label}", rule.line))
                ok = False
        if not rule.antecedent or not rule.consequent:
            diags.append(Diagnostic("error", "empty-rule", "rule needs at least one "
                                    "condition and one conclusion", rule.line))
            ok = False
        if ok:
            valid_rules.append(rule)

    for var in ctrl.inputs + ctrl.outputs:
        for label, mf in var.terms.items():
            lo, hi = mf.support
            if lo < var.universe[0] - 1e-12 or hi > var.universe[1] + 1e-12:
                diags.append(Diagnostic("warning", "support",
                                        f"{var.name}.{label} extends outside the universe"))
    for var in ctrl.inputs:
        if var.gaps().size:
            diags.append(Diagnostic("warning", "gap",
                                    f"{var.name} has points covered by no term"))

    # coverage: every output needs some rule firing at every grid point
    grids = [_coverage_grid(v) for v in ctrl.inputs]
    shape = [g.size for g in grids]
    index = {v.name: i for i, v in enumerate(ctrl.inputs)}
    covered = {v.name: np.zeros(shape, dtype=bool) for v in ctrl.outputs}
    for rule in valid_rules:
        strength = np.ones(shape)
        for var, label in rule.antecedent:
            i = index[var]
            g = membership_grade(ctrl.inputs[i].terms[label], grids[i])
            bshape = [1] * len(shape)
            bshape[i] = shape[i]
            strength = np.minimum(strength, np.reshape(g, bshape))
        for var, _ in rule.consequent:
            covered[var] |= strength > 0.0
    for name, cov in covered.items():
        if not cov.all():
            diags.append(Diagnostic("error", "coverage",
                                    f"output {name} has no firing rule at "
                                    f"{int((~cov).sum())} of {cov.size} grid points"))

    if ctrl.mirror is not None:
        keys = {_rule_key(r) for r in valid_rules}
        for rule in valid_rules:
            m = mirror_rule(ctrl, rule)
            if m is None or _rule_key(m) not in keys:
                diags.append(Diagnostic("warning", "symmetry",
                                        f"no mirror-image rule for: {rule}", rule.line))
    return diags

