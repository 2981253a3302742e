"""Existence / nonexistence lambda-intervals for a convex domain Omega with
B(r_in) inside Omega inside B(r_out).

A solution on a larger convex domain yields one on any smaller convex domain,
so unit-ball existence transfers from the circumscribed ball and unit-ball
nonexistence from the inscribed ball.  A problem posed on the ball of radius R
with parameter lam is the unit-ball problem with parameter lam R^2.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .branch import Branch, EndpointReport, Fold
from .nonlinearity import Nonlinearity

__all__ = [
    "Windows",
    "ExistenceReport",
    "scale_lambda",
    "unit_ball_windows",
    "bounds_from_radii",
    "normalize",
    "complement",
    "intersect",
    "subtract",
]

log = logging.getLogger(__name__)

Interval = tuple[float, float]


def scale_lambda(lam: float, R: float, inverse: bool = False) -> float:
    """Unit-ball parameter lam R^2 of the problem posed on the ball of radius R.

    ``inverse=True`` maps a unit-ball parameter back to radius R: lam / R^2.
    """
    if R <= 0:
        raise ValueError("radius must be positive")
    return lam / (R * R) if inverse else lam * R * R


# -- interval sets on (0, inf) -------------------------------------------------


def normalize(ivs) -> list[Interval]:
    """Sorted, merged, non-empty closed intervals."""
    out: list[list[float]] = []
    for lo, hi in sorted((float(a), float(b)) for a, b in ivs if a <= b):
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [tuple(iv) for iv in out]


def intersect(a, b) -> list[Interval]:
    out = []
    for lo1, hi1 in a:
        for lo2, hi2 in b:
            lo, hi = max(lo1, lo2), min(hi1, hi2)
            if lo < hi or (lo == hi and lo1 <= lo <= hi1 and lo2 <= lo <= hi2 and (lo1 == hi1 or lo2 == hi2)):
                out.append((lo, hi))
    return normalize(out)


def complement(ivs, lo: float = 0.0, hi: float = math.inf) -> list[Interval]:
    """(lo, hi) minus the union of ``ivs``; endpoints are shared, not excluded."""
    out, cur = [], lo
    for a, b in normalize(ivs):
        if a > cur:
            out.append((cur, a))
        cur = max(cur, b)
    if cur < hi:
        out.append((cur, hi))
    return out


def subtract(a, b) -> list[Interval]:
    return intersect(a, complement(b))


def _scale(ivs, c: float) -> list[Interval]:
    return [(lo * c, hi * c) for lo, hi in ivs]


def _measure_equal(a, b, rtol) -> bool:
    if len(a) != len(b):
        return False
    for (l1, h1), (l2, h2) in zip(a, b):
        for x, y in ((l1, l2), (h1, h2)):
            if math.isinf(x) or math.isinf(y):
                if x != y:
                    return False
            elif abs(x - y) > rtol * max(abs(x), abs(y), 1e-300):
                return False
    return True


# -- reports ---------------------------------------------------------------------


@dataclass(frozen=True)
class Windows:
    """Unit-ball lambda sets for the convex branch."""

    exists: list[Interval]
    none: list[Interval]
    regime: str = ""

    @property
    def unresolved(self) -> list[Interval]:
        return complement(self.exists + self.none)


@dataclass
class ExistenceReport:
    r_in: float
    r_out: float
    regime: str
    exists_on: list[Interval]
    none_on: list[Interval]
    unresolved: list[Interval]
    comparison_consistent: bool = True
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        def enc(ivs):
            return [[_enc(lo), _enc(hi)] for lo, hi in ivs]

        return {
            "r_in": self.r_in,
            "r_out": self.r_out,
            "regime": self.regime,
            "exists_on": enc(self.exists_on),
            "none_on": enc(self.none_on),
            "unresolved": enc(self.unresolved),
            "comparison_consistent": self.comparison_consistent,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def matches(self, other: "ExistenceReport", rtol: float = 1e-6) -> bool:
        return all(
            _measure_equal(x, y, rtol)
            for x, y in (
                (self.exists_on, other.exists_on),
                (self.none_on, other.none_on),
                (self.unresolved, other.unresolved),
            )
        )


def _enc(x: float):
    return None if math.isinf(x) else x


def unit_ball_windows(
    branch: Branch,
    endpoints: EndpointReport | None = None,
    folds: list[Fold] | None = None,
    regime: str = "",
) -> Windows:
    """Existence set = range of lam(a) along the branch, widened to the
    extrapolated end limits and the refined interior extrema."""
    lam = branch.lambdas
    if len(lam) == 0:
        return Windows([], [(0.0, math.inf)], regime)
    if branch.is_continuum():
        l1 = float(np.mean(lam))
        return Windows([(l1, l1)], complement([(l1, l1)]), regime)
    lo, hi = float(lam.min()), float(lam.max())
    if endpoints is not None:
        ends = [e.estimate for e in (endpoints.small, endpoints.large) if not math.isnan(e.estimate)]
        lo = min([lo] + ends)
        hi = max([hi] + ends)
    for fold in folds or []:
        lo, hi = min(lo, fold.lam), max(hi, fold.lam)
    exists = [(lo, hi)]
    return Windows(exists, complement(exists), regime)


def _check_f2(f: Nonlinearity, grid=None):
    s = np.concatenate([[0.0], np.logspace(-6, 2, 161)]) if grid is None else np.asarray(grid, dtype=float)
    vals = f.eval(s)
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"{f.spec}: not finite on the sample grid")
    if np.any(vals[s > 0] <= 0) or np.any(vals < 0):
        raise ValueError(f"{f.spec}: needs f >= 0 with f > 0 on (0, inf)")


def bounds_from_radii(f: Nonlinearity, N: int, r_in: float, r_out: float, windows: Windows) -> ExistenceReport:
    """Transfer unit-ball windows to a domain between balls of radii r_in <= r_out.

    Existence: lam r_out^2 in the unit existence set.  Nonexistence: lam r_in^2
    in the unit nonexistence set.  When the two transferred sets overlap (the
    unit existence set is not closed downward) the overlap is reported as
    unresolved and ``comparison_consistent`` is False.
    """
    if not (r_in > 0 and r_out > 0):
        raise ValueError("radii must be positive")
    if r_in > r_out:
        raise ValueError(f"inconsistent radii: r_in={r_in} > r_out={r_out}")
    _check_f2(f)
    ex = _scale(windows.exists, 1.0 / r_out**2)
    ne = _scale(windows.none, 1.0 / r_in**2)
    clash = [iv for iv in intersect(ex, ne) if iv[1] > iv[0]]
    notes = []
    if clash:
        notes.append("transferred existence and nonexistence sets overlap; overlap left unresolved")
        log.warning("%s N=%d: %s", f.spec, N, notes[-1])
        ex, ne = subtract(ex, clash), subtract(ne, clash)
    ex, ne = normalize(ex), normalize(ne)
    return ExistenceReport(
        float(r_in), float(r_out), windows.regime, ex, ne, complement(ex + ne), not clash, notes
    )
