from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SHAPES = {"triangular": 3, "trapezoidal": 4}


@dataclass(frozen=True)
class MembershipFunction:
    """Piecewise-linear membership function.

    ``triangular(a, b, c)`` peaks at ``b``; ``trapezoidal(a, b, c, d)`` is 1 on
    ``[b, c]``. Equal adjacent parameters give vertical edges (shoulders).
    """

    shape: str
    params: tuple[float, ...]

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown membership shape {self.shape!r}")
        if len(self.params) != SHAPES[self.shape]:
            raise ValueError(f"{self.shape} takes {SHAPES[self.shape]} parameters, "
                             f"got {len(self.params)}")
        p = tuple(float(v) for v in self.params)
        if any(not np.isfinite(v) for v in p):
            raise ValueError("membership parameters must be finite")
        if any(p[i] > p[i + 1] for i in range(len(p) - 1)):
            raise ValueError(f"membership parameters must be non-decreasing: {p}")
        object.__setattr__(self, "params", p)

    @classmethod
    def triangular(cls, a, b, c) -> MembershipFunction:
        return cls("triangular", (a, b, c))

    @classmethod
    def trapezoidal(cls, a, b, c, d) -> MembershipFunction:
        return cls("trapezoidal", (a, b, c, d))

    @property
    def corners(self) -> tuple[float, float, float, float]:
        p = self.params
        return (p[0], p[1], p[1], p[2]) if self.shape == "triangular" else p

    @property
    def support(self) -> tuple[float, float]:
        return self.params[0], self.params[-1]

    def mirrored(self) -> MembershipFunction:
        """Reflection about zero."""
        return MembershipFunction(self.shape, tuple(-v for v in reversed(self.params)))

    def __call__(self, u):
        return membership_grade(self, u)


def membership_grade(mf: MembershipFunction, u):
    """Grade of ``u`` (scalar or array) in ``mf``; always within [0, 1]."""
    a, b, c, d = mf.corners
    if isinstance(u, (float, int)):
        return _grade_scalar(a, b, c, d, float(u))
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        rise = (u - a) / (b - a) if b > a else np.where(u >= a, 1.0, 0.0)
        fall = (d - u) / (d - c) if d > c else np.where(u <= d, 1.0, 0.0)
    g = np.clip(np.minimum(rise, fall), 0.0, 1.0)
    return float(g) if g.ndim == 0 else g


def _grade_scalar(a: float, b: float, c: float, d: float, u: float) -> float:
    # same arithmetic as the array path so both agree bit for bit
    if u < a or u > d:
        return 0.0
    rise = (u - a) / (b - a) if b > a else 1.0
    fall = (d - u) / (d - c) if d > c else 1.0
    return min(rise, fall, 1.0)


@dataclass(frozen=True)
class LinguisticVariable:
    name: str
    universe: tuple[float, float]
    terms: dict[str, MembershipFunction] = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = (float(v) for v in self.universe)
        if not lo < hi:
            raise ValueError(f"{self.name}: universe must satisfy min < max")
        object.__setattr__(self, "universe", (lo, hi))

    @property
    def labels(self) -> list[str]:
        return list(self.terms)

    def clamp(self, u: float) -> float:
        lo, hi = self.universe
        return min(max(u, lo), hi)

    def fuzzify(self, u: float) -> dict[str, float]:
        u = self.clamp(u)
        return {label: membership_grade(mf, u) for label, mf in self.terms.items()}

    def gaps(self, samples: int = 2001) -> np.ndarray:
        """Points of the universe where no term has a positive grade."""
        grid = np.linspace(*self.universe, samples)
        if not self.terms:
            return grid
        best = np.max([membership_grade(mf, grid) for mf in self.terms.values()], axis=0)
        return grid[best <= 0.0]
