"""Nonlinearities f for the radial Monge-Ampere problem.

A :class:`Nonlinearity` bundles an evaluator for ``f`` and ``f'``.  Registered
families have analytic derivatives; user callables fall back to a central
finite difference with a declared step.  Derived nonlinearities (reflection,
truncations) are built from existing ones and are themselves immutable.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Nonlinearity",
    "LimitKind",
    "Limit",
    "AsymptoticClass",
    "SubhomogeneityReport",
    "UnknownFamilyError",
    "InconclusiveClassification",
    "make_nonlinearity",
    "from_callable",
    "parse_spec",
    "classify",
    "reflect",
    "truncate",
    "check_subhomogeneity",
    "FAMILIES",
]

ArrayFn = Callable[[np.ndarray], np.ndarray]


class UnknownFamilyError(ValueError):
    pass


class InconclusiveClassification(ValueError):
    """Raised when the log-log slope of f(s)/s^N neither settles nor trends."""

    def __init__(self, end: str, slopes: Sequence[float]):
        self.end = end
        self.slopes = tuple(float(s) for s in slopes)
        super().__init__(f"inconclusive limit at s -> {end}: half-window slopes {self.slopes}")


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    name: str
    params: tuple[float, ...]
    _f: ArrayFn = field(repr=False)
    _df: ArrayFn = field(repr=False)
    analytic: bool = True
    fd_step: float | None = None

    def __call__(self, s):
        return self.eval(s)

    def eval(self, s):
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            return self._f(np.asarray(s, dtype=float))

    def deriv(self, s):
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            return self._df(np.asarray(s, dtype=float))

    @property
    def spec(self) -> str:
        if not self.params:
            return self.name
        return self.name + ":" + ",".join(_fmt(p) for p in self.params)

    def satisfies_signum(self, N: int, grid=None) -> bool:
        """Sampled check of f(s) s^N > 0 for s != 0."""
        if grid is None:
            pos = np.logspace(-4, 2, 61)
            grid = np.concatenate([-pos[::-1], pos])
        s = np.asarray(grid, dtype=float)
        s = s[s != 0]
        return bool(np.all(self.eval(s) * s**N > 0))


def _fmt(p: float) -> str:
    return str(int(p)) if float(p).is_integer() else repr(float(p))


# -- power helpers ---------------------------------------------------------
#
# Integer exponents use the plain monomial, so power(N) has the parity of N:
# then power(N) satisfies f(s)s^N > 0 for every N and is fixed by reflect().
# Non-integer exponents use the odd extension |s|^(k-1) s.

def _pow(s, k: float):
    if float(k).is_integer():
        return s ** int(k)
    return np.sign(s) * np.abs(s) ** k


def _dpow(s, k: float):
    if float(k).is_integer():
        k = int(k)
        return k * s ** (k - 1) if k != 0 else np.zeros_like(s)
    return k * np.abs(s) ** (k - 1)


def _positive(name, values):
    for v in values:
        if not v > 0:
            raise ValueError(f"{name}: parameters must be positive, got {tuple(values)}")


def _power(k):
    _positive("power", [k])
    return (lambda s: _pow(s, k)), (lambda s: _dpow(s, k))


def _polynomial(*coeffs):
    if not coeffs:
        raise ValueError("polynomial: needs at least one coefficient")
    c = np.asarray(coeffs, dtype=float)
    dc = np.polynomial.polynomial.polyder(c) if len(c) > 1 else np.zeros(1)
    P = np.polynomial.polynomial.polyval
    return (lambda s: P(s, c)), (lambda s: P(s, dc) + 0.0 * s)


def _gelfand():
    return np.exp, np.exp


def _power_mix(k, m):
    _positive("power_mix", [k, m])

    def f(s):
        return _pow(s, k) * (1.0 + _pow(s, m))

    def df(s):
        return _dpow(s, k) * (1.0 + _pow(s, m)) + _pow(s, k) * _dpow(s, m)

    return f, df


def _power_decay(k):
    _positive("power_decay", [k])

    def f(s):
        return _pow(s, k) * np.exp(-s)

    def df(s):
        return (_dpow(s, k) - _pow(s, k)) * np.exp(-s)

    return f, df


def _rational(k):
    _positive("rational", [k])

    def f(s):
        return _pow(s, k) / (1.0 + s * s)

    def df(s):
        d = 1.0 + s * s
        return (_dpow(s, k) * d - 2.0 * s * _pow(s, k)) / (d * d)

    return f, df


FAMILIES: dict[str, tuple[Callable, int]] = {
    # name -> (factory, arity); arity -1 means variadic
    "power": (_power, 1),
    "polynomial": (_polynomial, -1),
    "gelfand": (_gelfand, 0),
    "power_mix": (_power_mix, 2),
    "power_decay": (_power_decay, 1),
    "rational": (_rational, 1),
}


def make_nonlinearity(name: str, *params: float) -> Nonlinearity:
    """Build a registered family, e.g. ``make_nonlinearity("power_mix", 2, 2)``."""
    if name not in FAMILIES:
        raise UnknownFamilyError(f"unknown nonlinearity family {name!r}; known: {sorted(FAMILIES)}")
    factory, arity = FAMILIES[name]
    if arity >= 0 and len(params) != arity:
        raise ValueError(f"{name} takes {arity} parameter(s), got {len(params)}")
    params = tuple(float(p) for p in params)
    f, df = factory(*params)
    return Nonlinearity(name, params, f, df)


def parse_spec(spec: str) -> Nonlinearity:
    """Parse the ``name:p1,p2,...`` registry grammar (``gelfand``, ``power:2``)."""
    name, _, rest = spec.strip().partition(":")
    params = []
    if rest.strip():
        try:
            params = [float(tok) for tok in rest.split(",")]
        except ValueError:
            raise ValueError(f"bad parameter list in nonlinearity spec {spec!r}") from None
    return make_nonlinearity(name.strip(), *params)


def from_callable(name: str, fn: ArrayFn, step: float = 1e-5) -> Nonlinearity:
    """Wrap a user function; f' is a central difference with the given step."""

    def df(s):
        return (fn(s + step) - fn(s - step)) / (2.0 * step)

    return Nonlinearity(name, (), fn, df, analytic=False, fd_step=step)


# -- asymptotic classification ---------------------------------------------


class LimitKind(enum.Enum):
    ZERO = "zero"
    FINITE = "finite"
    INFINITE = "infinite"


@dataclass(frozen=True)
class Limit:
    kind: LimitKind
    value: float | None = None

    def __post_init__(self):
        if self.kind is LimitKind.FINITE and not (self.value is not None and self.value > 0):
            raise ValueError("Finite limit needs c > 0")

    @property
    def as_float(self) -> float:
        if self.kind is LimitKind.ZERO:
            return 0.0
        if self.kind is LimitKind.INFINITE:
            return math.inf
        return float(self.value)

    def __str__(self):
        if self.kind is LimitKind.FINITE:
            return f"Finite({self.value:.6g})"
        return self.kind.name.capitalize()


@dataclass(frozen=True)
class AsymptoticClass:
    """Limits f0, finf with f0^N = lim_{s->0} f/s^N and finf^N = lim_{s->inf} f/s^N."""

    f0: Limit
    finf: Limit

    def label(self) -> str:
        return f"({self.f0}, {self.finf})"

    def to_dict(self) -> dict:
        return {
            "f0": {"kind": self.f0.kind.value, "value": self.f0.value},
            "finf": {"kind": self.finf.kind.value, "value": self.finf.value},
        }


def _log_ratio(f: Nonlinearity, s: np.ndarray, N: int) -> np.ndarray:
    fs = f.eval(s)
    out = np.full_like(s, np.nan)
    pos = fs > 0
    out[pos] = np.log(fs[pos]) - N * np.log(s[pos])
    out[fs == 0] = -np.inf
    out[np.isposinf(fs)] = np.inf
    if np.any(np.isnan(out)):
        raise InconclusiveClassification("probe", [np.nan])
    return out


def _classify_end(f, N, lo, hi, toward_zero, samples, slope_tol, end):
    s = np.logspace(np.log10(lo), np.log10(hi), samples)
    L = _log_ratio(f, s, N)
    x = np.log(s)
    if toward_zero:
        # orient so that the last sample is closest to the limit
        s, L, x = s[::-1], L[::-1], -x[::-1]
    if not np.all(np.isfinite(L)):
        tail = L[~np.isfinite(L)]
        if np.all(tail == np.inf):
            return Limit(LimitKind.INFINITE)
        if np.all(tail == -np.inf):
            return Limit(LimitKind.ZERO)
        raise InconclusiveClassification(end, [np.nan])
    half = samples // 2
    t1 = np.polyfit(x[: half + 1], L[: half + 1], 1)[0]
    t2 = np.polyfit(x[half:], L[half:], 1)[0]
    if abs(t1) < slope_tol and abs(t2) < slope_tol:
        return Limit(LimitKind.FINITE, float(np.exp(L[-1] / N)))
    if t1 > slope_tol and t2 > slope_tol:
        return Limit(LimitKind.INFINITE)
    if t1 < -slope_tol and t2 < -slope_tol:
        return Limit(LimitKind.ZERO)
    raise InconclusiveClassification(end, [t1, t2])


def classify(
    f: Nonlinearity,
    N: int,
    small: tuple[float, float] = (1e-6, 1e-3),
    large: tuple[float, float] = (1e3, 1e6),
    samples: int = 31,
    slope_tol: float = 0.05,
) -> AsymptoticClass:
    """Estimate (f0, finf) from log-log slopes of f(s)/s^N on the probe ranges.

    Finite limits are reported as the N-th root of lim f/s^N.  Raises
    :class:`InconclusiveClassification` when the two half-windows disagree.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    f0 = _classify_end(f, N, *small, toward_zero=True, samples=samples, slope_tol=slope_tol, end="0+")
    finf = _classify_end(f, N, *large, toward_zero=False, samples=samples, slope_tol=slope_tol, end="inf")
    return AsymptoticClass(f0, finf)


# -- derived nonlinearities -------------------------------------------------


def reflect(f: Nonlinearity, N: int) -> Nonlinearity:
    """Return g(s) = (-1)^N f(-s).

    The negative branch v < 0 of f is the negated positive branch of g.
    """
    sgn = -1.0 if N % 2 else 1.0

    def g(s):
        return sgn * f._f(-s)

    def dg(s):
        return -sgn * f._df(-s)

    return Nonlinearity(f"reflect{N}({f.spec})", f.params, g, dg, f.analytic, f.fd_step)


def truncate(f: Nonlinearity, n: int, N: int, mode: str = "small") -> Nonlinearity:
    """Piecewise truncation f^n used to approximate f by regular nonlinearities.

    ``mode="small"`` puts s^N / n^N on [-1/n, 1/n] (so f0 = 1/n); ``mode="large"``
    puts n^N s^N there (f0 = n).  Linear bridges on 1/n < |s| < 2/n join the
    core to f, which is kept unchanged for |s| >= 2/n.
    """
    if n < 1:
        raise ValueError("truncation index n must be >= 1")
    if mode not in ("small", "large"):
        raise ValueError("mode must be 'small' or 'large'")
    n = int(n)
    scale = float(n) ** (-N) if mode == "small" else float(n) ** N
    k1 = 1.0 / n
    k2 = 2.0 / n
    with np.errstate(over="ignore", invalid="ignore"):
        fp2 = float(f._f(np.asarray(k2)))
        fm2 = float(f._f(np.asarray(-k2)))
    core_p = scale * k1**N        # core value at +1/n
    core_m = scale * (-k1) ** N   # core value at -1/n
    # bridges written through their knot values so both ends match exactly
    slope_p = (fp2 - core_p) * n
    slope_m = (core_m - fm2) * n

    def _pieces(s, core, bridge_p, bridge_m, outer_fn):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        with np.errstate(over="ignore", invalid="ignore"):
            outer = outer_fn(np.where(a >= k2, s, k2))
        bridge = np.where(s > 0, bridge_p(s), bridge_m(s))
        return np.where(a <= k1, core(s), np.where(a < k2, bridge, outer))

    def g(s):
        return _pieces(
            s,
            lambda x: scale * x**N,
            lambda x: core_p + slope_p * (x - k1),
            lambda x: core_m + slope_m * (x + k1),
            f._f,
        )

    def dg(s):
        return _pieces(
            s,
            lambda x: scale * N * x ** (N - 1),
            lambda x: np.full_like(x, slope_p),
            lambda x: np.full_like(x, slope_m),
            f._df,
        )

    return Nonlinearity(f"truncate{N}[{mode},{n}]({f.spec})", f.params, g, dg, f.analytic, f.fd_step)


@dataclass(frozen=True)
class SubhomogeneityReport:
    holds: bool
    margin: float                 # min over grid of N f(s)/s - f'(s)
    first_violation: float | None
    n_points: int


def check_subhomogeneity(f: Nonlinearity, N: int, grid=None, rtol: float = 1e-10) -> SubhomogeneityReport:
    """Check the strict inequality f'(s) < N f(s)/s on a positive grid.

    Equality up to ``rtol`` relative to N f(s)/s counts as a violation.
    """
    s = np.logspace(-3, 2, 201) if grid is None else np.asarray(grid, dtype=float)
    if np.any(s <= 0):
        raise ValueError("subhomogeneity grid must be strictly positive")
    lhs = N * f.eval(s) / s
    d = f.deriv(s)
    if not (np.all(np.isfinite(lhs)) and np.all(np.isfinite(d))):
        bad = s[~(np.isfinite(lhs) & np.isfinite(d))][0]
        raise FloatingPointError(f"f or f' not finite at s={bad:g}")
    gap = lhs - d
    ok = gap > rtol * np.abs(lhs)
    first = None if ok.all() else float(s[np.argmin(ok)])
    return SubhomogeneityReport(bool(ok.all()), float(gap.min()), first, len(s))
