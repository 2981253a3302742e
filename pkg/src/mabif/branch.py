"""Amplitude-parameterized solution branches a -> lam(a), solution counts, endpoint
limits and folds."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .nonlinearity import AsymptoticClass, LimitKind, Nonlinearity, reflect
from .radial import (
    DEFAULT_M,
    RadialProfile,
    _refine_amplitudes,
    amplitude_grid,
    lambda_of_amplitudes,
    profiles_at,
)

__all__ = [
    "BranchPoint",
    "Branch",
    "Fold",
    "EndpointEstimate",
    "EndpointReport",
    "TailError",
    "trace_branch",
    "count_solutions",
    "locate_solutions",
    "branch_endpoints",
    "detect_fold",
    "interior_extrema",
    "CONTINUUM",
]

log = logging.getLogger(__name__)

CONTINUUM = "continuum"
CONTINUUM_SPAN = 1e-8


class TailError(ValueError):
    """Not enough decades at a branch end to extrapolate."""


@dataclass
class BranchPoint:
    amplitude: float
    lam: float
    profile: RadialProfile | None = None
    mu1_lin: float | None = None
    morse: int | None = None
    dlambda_da: float | None = None


@dataclass(frozen=True)
class Fold:
    lam: float
    amplitude: float
    kind: str = "max"          # interior maximum or minimum of lam(a)


@dataclass
class Branch:
    """One-sign branch of sign ``nu``, points ordered by |a| ascending."""

    f: Nonlinearity
    N: int
    nu: int
    points: list[BranchPoint]
    gaps: list[float] = field(default_factory=list)
    M: int = DEFAULT_M

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([p.amplitude for p in self.points])

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p.lam for p in self.points])

    @property
    def sizes(self) -> np.ndarray:
        """|a|, the sup-norm of each profile."""
        return np.abs(self.amplitudes)

    @property
    def positive_f(self) -> Nonlinearity:
        """The nonlinearity whose positive branch this is."""
        return self.f if self.nu > 0 else reflect(self.f, self.N)

    def is_continuum(self) -> bool:
        lam = self.lambdas
        return len(lam) >= 2 and np.ptp(lam) <= CONTINUUM_SPAN * np.mean(lam)

    def to_csv(self, fold: Fold | None = None) -> str:
        """CSV with columns a,lambda,vmax,morse,mu1_lin,dlambda_da,fold.

        The refined fold, when given, is inserted in amplitude order with fold=1.
        """
        rows = [
            (p.amplitude, p.lam, abs(p.amplitude), p.morse, p.mu1_lin, p.dlambda_da, 0)
            for p in self.points
        ]
        if fold is not None:
            rows.append((fold.amplitude, fold.lam, abs(fold.amplitude), None, None, 0.0, 1))
            rows.sort(key=lambda row: abs(row[0]))
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["a", "lambda", "vmax", "morse", "mu1_lin", "dlambda_da", "fold"])
        for a, lam, vmax, morse, mu1, dl, fl in rows:
            wr.writerow([_num(a), _num(lam), _num(vmax), "" if morse is None else int(morse), _num(mu1), _num(dl), fl])
        return buf.getvalue()


def _num(x) -> str:
    return "" if x is None else repr(float(x))


def trace_branch(
    f: Nonlinearity,
    N: int,
    nu: int = 1,
    a_min: float = 1e-4,
    a_max: float = 1e4,
    points_per_decade: int = 200,
    M: int = DEFAULT_M,
    keep_profiles: bool = True,
    workers: int = 1,
) -> Branch:
    """lam(a) on a log-spaced amplitude grid; out-of-range points are recorded as gaps."""
    g = f if nu > 0 else reflect(f, N)
    amps = amplitude_grid(a_min, a_max, points_per_decade)
    lams = lambda_of_amplitudes(g, N, amps, M, workers=workers)
    ok = np.isfinite(lams)
    sign = 1.0 if nu > 0 else -1.0
    gaps = [sign * a for a in amps[~ok]]
    if gaps:
        log.info("%d of %d amplitudes have no lambda in range", len(gaps), len(amps))
    profiles = [None] * int(ok.sum())
    if keep_profiles and ok.any():
        profiles = []
        idx = np.flatnonzero(ok)
        for chunk in np.array_split(idx, max(1, len(idx) // 256)):
            profiles.extend(profiles_at(g, N, lams[chunk], amps[chunk], M))
        if nu < 0:
            profiles = [p.negated() for p in profiles]
    points = [BranchPoint(sign * a, float(l), prof) for a, l, prof in zip(amps[ok], lams[ok], profiles)]
    return Branch(f, N, 1 if nu > 0 else -1, points, gaps, M)


# -- counting ------------------------------------------------------------------


def _crossing_brackets(branch: Branch, lam: float):
    s = branch.lambdas - lam
    a = branch.sizes
    lo, hi, exact = [], [], []
    for k in range(len(s) - 1):
        if s[k] == 0:
            exact.append(a[k])
        elif s[k] * s[k + 1] < 0:
            # consecutive only if no gap was skipped between them
            if not any(a[k] < abs(x) < a[k + 1] for x in branch.gaps):
                lo.append(a[k])
                hi.append(a[k + 1])
    if len(s) and s[-1] == 0:
        exact.append(a[-1])
    return np.array(lo), np.array(hi), exact


def _warn_near_fold(branch: Branch, lam: float, rtol: float = 1e-6):
    for ext in interior_extrema(branch, refine=False):
        if abs(lam - ext.lam) <= rtol * ext.lam:
            warnings.warn(f"lambda={lam:g} is within {rtol:g} of a fold at {ext.lam:g}; count is unstable", stacklevel=3)


def locate_solutions(branch: Branch, lam: float, refine: bool = True) -> list[float]:
    """Amplitudes (signed) of the solutions at ``lam`` inside the branch window."""
    lo, hi, exact = _crossing_brackets(branch, lam)
    found = list(exact)
    if len(lo):
        if refine:
            found.extend(_refine_amplitudes(branch.positive_f, branch.N, lam, lo, hi, branch.M))
        else:
            found.extend(np.sqrt(lo * hi))
    sign = 1.0 if branch.nu > 0 else -1.0
    return sorted(sign * float(x) for x in found)


def count_solutions(branch: Branch, lam: float, refine: bool = True):
    """Number of one-sign solutions at ``lam``, or ``"continuum"`` on a vertical branch."""
    if branch.is_continuum():
        lam0 = float(np.mean(branch.lambdas))
        if abs(lam - lam0) <= CONTINUUM_SPAN * lam0:
            return CONTINUUM
        return 0
    _warn_near_fold(branch, lam)
    return len(locate_solutions(branch, lam, refine))


# -- endpoints -----------------------------------------------------------------


@dataclass(frozen=True)
class EndpointEstimate:
    end: str               # "small" (a -> 0) or "large" (a -> inf)
    expected: float        # lam_1 / f_0 or lam_1 / f_inf, with 0 and inf allowed
    estimate: float        # extrapolated limit (0 or inf when divergent)
    kind: str              # "Finite", "Zero" or "Infinite" for the limit of lam(a)
    slope: float           # tail log-log slope
    rel_error: float       # relative error for finite limits, 0 when the divergence kind matches

    @property
    def agrees(self) -> bool:
        return self.rel_error <= 1e-3


@dataclass(frozen=True)
class EndpointReport:
    small: EndpointEstimate
    large: EndpointEstimate

    def to_dict(self) -> dict:
        def enc(e: EndpointEstimate):
            d = dict(e.__dict__)
            for key in ("expected", "estimate", "rel_error"):
                d[key] = _json_num(d[key])
            return d

        return {"small": enc(self.small), "large": enc(self.large)}


def _json_num(x):
    if x is None or math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _expected(lam1: float, lim) -> float:
    if lim.kind is LimitKind.ZERO:
        return math.inf
    if lim.kind is LimitKind.INFINITE:
        return 0.0
    return lam1 / lim.value


def _tail(branch: Branch, end: str, decades: float):
    a, lam = branch.sizes, branch.lambdas
    if end == "small":
        sel = a <= a[0] * 10**decades * (1 + 1e-9)
    else:
        sel = a >= a[-1] / 10**decades * (1 - 1e-9)
    a, lam = a[sel], lam[sel]
    if len(a) < 5 or np.log10(a[-1] / a[0]) < 0.95 * decades:
        raise TailError(f"{end}-amplitude tail spans less than {decades:g} decade(s)")
    return a, lam


def _extrapolate(a, lam, end, slope_tol):
    x, y = np.log(a), np.log(lam)
    slope = float(np.polyfit(x, y, 1)[0])
    toward = -1.0 if end == "small" else 1.0
    rate = slope * toward             # >0: lam grows toward the limit
    if rate > slope_tol:
        return math.inf, "Infinite", slope
    if rate < -slope_tol:
        return 0.0, "Zero", slope
    # three geometrically spaced samples approaching the limit, then Aitken
    n = len(a)
    i = [n - 1, n // 2, 0] if end == "small" else [0, n // 2, n - 1]
    l0, l1, l2 = lam[i[0]], lam[i[1]], lam[i[2]]
    den = (l2 - l1) - (l1 - l0)
    if den == 0 or not np.isfinite(den) or (l2 - l1) * (l1 - l0) <= 0:
        return float(l2), "Finite", slope
    return float(l2 - (l2 - l1) ** 2 / den), "Finite", slope


def branch_endpoints(
    branch: Branch,
    cls: AsymptoticClass,
    lambda1: float,
    decades: float = 1.0,
    slope_tol: float = 0.05,
) -> EndpointReport:
    """Extrapolate lam(a) at both ends and compare with lam_1/f_0 and lam_1/f_inf."""
    out = []
    for end, lim in (("small", cls.f0), ("large", cls.finf)):
        a, lam = _tail(branch, end, decades)
        est, kind, slope = _extrapolate(a, lam, end, slope_tol)
        exp = _expected(lambda1, lim)
        if math.isfinite(exp) and exp > 0:
            err = abs(est - exp) / exp if kind == "Finite" else math.inf
        else:
            err = 0.0 if est == exp else math.inf
        out.append(EndpointEstimate(end, exp, est, kind, slope, err))
    return EndpointReport(*out)


# -- folds ---------------------------------------------------------------------


def _segments(branch: Branch):
    """Runs of consecutive samples not interrupted by a gap."""
    a = branch.sizes
    if len(a) == 0:
        return []
    gaps = np.sort(np.abs(branch.gaps))
    cut = [k + 1 for k in range(len(a) - 1) if np.any((gaps > a[k]) & (gaps < a[k + 1]))]
    return np.split(np.arange(len(a)), cut)


def _refine_extremum(g, N, M, a_lo, a_hi, sense, rounds=3, points=9):
    """Multisection in log a followed by a parabolic vertex through the best three samples."""
    lo, hi = math.log(a_lo), math.log(a_hi)
    for _ in range(rounds):
        x = np.linspace(lo, hi, points)
        lam = lambda_of_amplitudes(g, N, np.exp(x), M)
        if not np.all(np.isfinite(lam)):
            break
        k = int(np.argmax(sense * lam))
        k = min(max(k, 1), points - 2)
        lo, hi = x[k - 1], x[k + 1]
    x = np.array([lo, 0.5 * (lo + hi), hi])
    lam = lambda_of_amplitudes(g, N, np.exp(x), M)
    c2, c1, c0 = np.polyfit(x - x[1], lam, 2)
    if c2 * sense < 0:
        xs = -c1 / (2 * c2)
        if abs(xs) <= x[2] - x[1]:
            a_star = math.exp(x[1] + xs)
            lam_star = float(lambda_of_amplitudes(g, N, [a_star], M)[0])
            if np.isfinite(lam_star) and sense * lam_star >= np.max(sense * lam):
                return a_star, lam_star
    k = int(np.argmax(sense * lam))
    return math.exp(x[k]), float(lam[k])


def interior_extrema(branch: Branch, refine: bool = True) -> list[Fold]:
    """All interior local extrema of lam(a), refined around each discrete extremum."""
    if branch.is_continuum():
        return []
    lam, a = branch.lambdas, branch.sizes
    sign = 1.0 if branch.nu > 0 else -1.0
    out = []
    for seg in _segments(branch):
        for j in range(1, len(seg) - 1):
            k = seg[j]
            left, mid, right = lam[k - 1], lam[k], lam[k + 1]
            if mid > left and mid >= right:
                sense = 1.0
            elif mid < left and mid <= right:
                sense = -1.0
            else:
                continue
            if refine:
                a_star, l_star = _refine_extremum(branch.positive_f, branch.N, branch.M, a[k - 1], a[k + 1], sense)
            else:
                a_star, l_star = a[k], mid
            out.append(Fold(float(l_star), sign * float(a_star), "max" if sense > 0 else "min"))
    return out


def detect_fold(branch: Branch, refine: bool = True) -> Fold | None:
    """The largest interior maximum of lam(a): the existence threshold lam*."""
    maxima = [e for e in interior_extrema(branch, refine) if e.kind == "max"]
    if not maxima:
        return None
    return max(maxima, key=lambda e: e.lam)


def summary_json(branch: Branch, fold: Fold | None, counts: dict | None = None, endpoints=None) -> str:
    d = {
        "f": branch.f.spec,
        "N": branch.N,
        "nu": "+" if branch.nu > 0 else "-",
        "points": len(branch.points),
        "gaps": len(branch.gaps),
        "fold": None if fold is None else {"lambda": fold.lam, "a": fold.amplitude},
        "counts": counts or {},
        "endpoints": None if endpoints is None else endpoints.to_dict(),
    }
    return json.dumps(d, indent=2) + "\n"
