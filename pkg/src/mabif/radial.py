"""Radial solutions of ((-v')^N)' = lam^N N r^(N-1) f(v), v'(0) = v(1) = 0.

Positive solutions are integrated directly as an initial value problem from
r = 0 with v(0) = a.  Negative solutions are obtained from the positive branch
of ``reflect(f, N)``.  Internally the integrator marches (v, Q) with
Q = q / r^N, where q = (-v')^N; Q is smooth at the degenerate origin while q is
not, which is what keeps classical RK4 at fourth order there.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import cumulative_simpson

from .nonlinearity import Nonlinearity, reflect

__all__ = [
    "RadialProfile",
    "PicardResult",
    "BracketError",
    "BlowUpError",
    "ContinuumError",
    "signed_root",
    "apply_Tf",
    "shoot",
    "lambda_for_amplitude",
    "lambda_of_amplitudes",
    "solve_at_lambda",
    "picard",
    "amplitude_grid",
    "DEFAULT_M",
]

log = logging.getLogger(__name__)

DEFAULT_M = 4096
BLOWUP_CAP = 1e12
LAMBDA_RANGE = (1e-8, 1e8)


class BracketError(RuntimeError):
    pass


class BlowUpError(RuntimeError):
    pass


class ContinuumError(ValueError):
    """The requested lambda lies on a vertical (homogeneous) branch."""


def signed_root(x, N: int):
    """sign(x) |x|^(1/N), the inverse of the sign-consistent N-th power."""
    x = np.asarray(x, dtype=float)
    if N == 1:
        return x + 0.0
    if N == 2:
        return np.copysign(np.sqrt(np.abs(x)), x)
    return np.copysign(np.abs(x) ** (1.0 / N), x)


@dataclass(frozen=True, eq=False)
class RadialProfile:
    r: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    lam: float
    N: int
    nu: int = 1
    first_zero: float | None = None   # set when v vanished before r = 1 (profile truncated there)

    def __post_init__(self):
        for arr in (self.r, self.v, self.dv):
            arr.setflags(write=False)

    @property
    def amplitude(self) -> float:
        return float(self.v[0])

    @property
    def terminal(self) -> float:
        return float(self.v[-1])

    @property
    def M(self) -> int:
        return len(self.r) - 1

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.v)))

    def is_solution(self, tol: float = 1e-8) -> bool:
        return self.first_zero is None and abs(self.terminal) <= tol * max(1.0, abs(self.amplitude))

    def negated(self) -> "RadialProfile":
        return RadialProfile(self.r, -self.v, -self.dv, self.lam, self.N, -self.nu, self.first_zero)

    def metadata(self) -> dict:
        return {
            "N": self.N,
            "lambda": self.lam,
            "nu": "+" if self.nu > 0 else "-",
            "amplitude": self.amplitude,
            "terminal": self.terminal,
            "grid": self.M,
        }

    def to_csv(self, path) -> None:
        """Write ``r,v,dv`` rows plus a ``.json`` metadata sidecar."""
        path = Path(path)
        rows = np.column_stack([self.r, self.v, self.dv])
        with open(path, "w") as fh:
            fh.write("r,v,dv\n")
            np.savetxt(fh, rows, delimiter=",", fmt="%.17g")
        path.with_suffix(".json").write_text(json.dumps(self.metadata(), indent=2) + "\n")

    @classmethod
    def from_csv(cls, path) -> "RadialProfile":
        path = Path(path)
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        meta = json.loads(path.with_suffix(".json").read_text())
        nu = 1 if meta["nu"] == "+" else -1
        return cls(data[:, 0].copy(), data[:, 1].copy(), data[:, 2].copy(), float(meta["lambda"]), int(meta["N"]), nu)


# -- integral operator ---------------------------------------------------------


def _cumsimpson(y, x):
    return cumulative_simpson(y, x=x, initial=0.0)


def apply_Tf(f: Nonlinearity, v, N: int, r=None, lam: float = 1.0):
    """Evaluate lam * T_f v on the grid, returning (w, w').

    T_f v(r) = int_r^1 ( int_0^s N t^(N-1) f(v(t)) dt )^(1/N) ds with the
    signed root.  Both integrals use composite Simpson on the grid, so
    w(1) = 0 and w'(0) = 0 hold exactly.
    """
    if isinstance(v, RadialProfile):
        r, v = v.r, v.v
    v = np.asarray(v, dtype=float)
    if r is None:
        r = np.linspace(0.0, 1.0, len(v))
    inner = _cumsimpson(N * r ** (N - 1) * f.eval(v), r)
    g = lam * signed_root(inner, N)
    G = _cumsimpson(g, r)
    return G[-1] - G, -g


# -- shooting kernel -----------------------------------------------------------


@dataclass
class _Shot:
    v1: np.ndarray           # v(1)
    d1: np.ndarray           # v'(1)
    rz: np.ndarray           # first zero in (0, 1], nan if none
    dz: np.ndarray           # v' at the first zero
    blown: np.ndarray
    V: np.ndarray | None = None
    D: np.ndarray | None = None


def _hermite_root(v0, d0, v1, d1, h):
    """Zero in [0, 1] of the cubic Hermite interpolant (v0 > 0 >= v1)."""
    t = np.clip(v0 / (v0 - v1), 0.0, 1.0)
    for _ in range(6):
        t2, t3 = t * t, t * t * t
        H = (2 * t3 - 3 * t2 + 1) * v0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * v1 + (t3 - t2) * h * d1
        dH = (6 * t2 - 6 * t) * v0 + (3 * t2 - 4 * t + 1) * h * d0 + (-6 * t2 + 6 * t) * v1 + (3 * t2 - 2 * t) * h * d1
        dH = np.where(dH == 0, -1e-300, dH)
        t = np.clip(t - H / dH, 0.0, 1.0)
    t2 = t * t
    dH = (6 * t2 - 6 * t) * v0 + (3 * t2 - 4 * t + 1) * h * d0 + (-6 * t2 + 6 * t) * v1 + (3 * t2 - 2 * t) * h * d1
    return t, dH / h


def _march(f: Nonlinearity, N: int, lam, a, M: int, keep=False, stop_at_zero=False, cap=BLOWUP_CAP) -> _Shot:
    """RK4 for v' = -r Q^(1/N), Q' = N (lam^N f(v) - Q) / r with a series start on [0, h].

    Vectorized over lanes (lam[k], a[k]); all amplitudes must be positive.
    """
    lam = np.asarray(lam, dtype=float)
    a = np.asarray(a, dtype=float)
    K = lam.shape[0]
    if K == 1:
        return _march_scalar(f, N, float(lam[0]), float(a[0]), M, keep, stop_at_zero, cap)
    h = 1.0 / M
    lamN = lam**N
    ff = f._f
    with np.errstate(all="ignore"):
        fa = ff(a)
        fpa = f._df(a)
        c = lam * signed_root(fa, N)
        corr = np.where(fa != 0, c * c * fpa / np.where(fa != 0, fa, 1.0), 0.0)
        # v = a - c r^2/2 + c^2 f'(a) r^4 / (8 (N+2) f(a)) + O(r^6)
        v = a - 0.5 * c * h * h + corr * h**4 / (8 * (N + 2))
        Q = lamN * (fa - N * fpa * c * h * h / (2 * (N + 2)))

        if keep:
            V = np.empty((K, M + 1))
            D = np.empty((K, M + 1))
            V[:, 0] = a
            D[:, 0] = 0.0
            V[:, 1] = v
            D[:, 1] = -h * signed_root(Q, N)
        rz = np.full(K, np.nan)
        dz = np.full(K, np.nan)
        crossed = np.zeros(K, dtype=bool)
        blown = np.zeros(K, dtype=bool)
        # grid cannot resolve the drop: use the zero of the leading quadratic
        coarse = ~(c * h * h <= 0.5 * a)
        if coarse.any():
            rz[coarse] = np.sqrt(2.0 * a[coarse] / c[coarse])
            dz[coarse] = -c[coarse] * rz[coarse]
            crossed |= coarse
            v = np.where(coarse, -1.0, v)
            Q = np.where(coarse, 0.0, Q)
        d = -h * signed_root(Q, N)
        # zero reached inside the series step
        first = (v <= 0) & ~coarse
        if first.any():
            t, dd = _hermite_root(a[first], np.zeros(first.sum()), v[first], d[first], h)
            rz[first] = t * h
            dz[first] = dd
            crossed |= first

        NlamN = N * lamN
        hh = 0.5 * h
        for i in range(1, M):
            r = i * h
            rm = r + hh
            r1 = r + h
            k1v = -r * signed_root(Q, N)
            k1q = (NlamN * ff(v) - N * Q) / r
            v2 = v + hh * k1v
            q2 = Q + hh * k1q
            k2v = -rm * signed_root(q2, N)
            k2q = (NlamN * ff(v2) - N * q2) / rm
            v3 = v + hh * k2v
            q3 = Q + hh * k2q
            k3v = -rm * signed_root(q3, N)
            k3q = (NlamN * ff(v3) - N * q3) / rm
            v4 = v + h * k3v
            q4 = Q + h * k3q
            k4v = -r1 * signed_root(q4, N)
            k4q = (NlamN * ff(v4) - N * q4) / r1
            vn = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
            Q = Q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
            dn = -r1 * signed_root(Q, N)
            newly = (vn <= 0) & ~crossed
            if newly.any():
                t, dd = _hermite_root(v[newly], d[newly], vn[newly], dn[newly], h)
                rz[newly] = r + t * h
                dz[newly] = dd
                crossed |= newly
            v, d = vn, dn
            if keep:
                V[:, i + 1] = v
                D[:, i + 1] = d
            if i % 16 == 0:
                blown |= ~(np.abs(v) <= cap)
                if stop_at_zero and np.all(crossed | blown):
                    break
        blown |= ~(np.abs(v) <= cap)
    shot = _Shot(v, d, rz, dz, blown & ~crossed if stop_at_zero else blown)
    if keep:
        shot.V, shot.D = V, D
    return shot


def _march_scalar(f, N, lam, a, M, keep, stop_at_zero, cap) -> _Shot:
    """Single-lane version of ``_march`` on Python floats (same scheme, less overhead)."""
    h = 1.0 / M
    inv = 1.0 / N
    ff = f._f

    def root(x):
        return math.copysign(abs(x) ** inv, x)

    with np.errstate(all="ignore"):
        fa = float(ff(a))
        fpa = float(f._df(a))
        c = lam * root(fa)
        corr = c * c * fpa / fa if fa != 0 else 0.0
        lamN = lam**N
        v = a - 0.5 * c * h * h + corr * h**4 / (8 * (N + 2))
        Q = lamN * (fa - N * fpa * c * h * h / (2 * (N + 2)))
        if not (c * h * h <= 0.5 * a):
            rz = math.sqrt(2.0 * a / c)
            shot = _Shot(np.array([-1.0]), np.array([-c]), np.array([rz]), np.array([-c * rz]), np.array([False]))
            if keep:
                shot.V = np.full((1, M + 1), np.nan)
                shot.D = np.full((1, M + 1), np.nan)
                shot.V[0, 0], shot.D[0, 0] = a, 0.0
            return shot
        d = -h * root(Q)
        if keep:
            V = np.empty(M + 1)
            D = np.empty(M + 1)
            V[0], D[0], V[1], D[1] = a, 0.0, v, d
        rz = dz = math.nan
        if v <= 0:
            t, dd = _hermite_root(a, 0.0, v, d, h)
            rz, dz = float(t) * h, float(dd)
        NlamN = N * lamN
        hh = 0.5 * h
        h6 = h / 6.0
        blown = False
        for i in range(1, M):
            r = i * h
            rm = r + hh
            r1 = r + h
            k1v = -r * root(Q)
            k1q = (NlamN * ff(v) - N * Q) / r
            v2 = v + hh * k1v
            q2 = Q + hh * k1q
            k2v = -rm * root(q2)
            k2q = (NlamN * ff(v2) - N * q2) / rm
            v3 = v + hh * k2v
            q3 = Q + hh * k2q
            k3v = -rm * root(q3)
            k3q = (NlamN * ff(v3) - N * q3) / rm
            v4 = v + h * k3v
            q4 = Q + h * k3q
            k4v = -r1 * root(q4)
            k4q = (NlamN * ff(v4) - N * q4) / r1
            vn = float(v + h6 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v))
            Q = float(Q + h6 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q))
            dn = -r1 * root(Q) if math.isfinite(Q) else math.nan
            if vn <= 0 and math.isnan(rz):
                t, dd = _hermite_root(v, d, vn, dn, h)
                rz, dz = r + float(t) * h, float(dd)
                if stop_at_zero:
                    v, d = vn, dn
                    break
            if not (abs(vn) <= cap and math.isfinite(Q)):
                blown = True
                if keep:
                    V[i + 1 :] = math.nan
                    D[i + 1 :] = math.nan
                v, d = vn, math.nan
                break
            v, d = vn, dn
            if keep:
                V[i + 1] = v
                D[i + 1] = d
    if stop_at_zero and math.isfinite(rz):
        blown = False
    shot = _Shot(np.array([v]), np.array([d]), np.array([rz]), np.array([dz]), np.array([blown]))
    if keep:
        shot.V, shot.D = V[None, :], D[None, :]
    return shot


def _grid(M: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, M + 1)


def _profile_from_lane(shot: _Shot, k: int, lam: float, N: int, M: int) -> RadialProfile:
    r = _grid(M)
    v, d = shot.V[k].copy(), shot.D[k].copy()
    rz = shot.rz[k]
    if np.isfinite(rz) and rz < 1.0 - 1e-12:
        j = int(np.searchsorted(r, rz))          # first node beyond the zero
        r = np.append(r[:j], rz)
        v = np.append(v[:j], 0.0)
        d = np.append(d[:j], shot.dz[k])
        return RadialProfile(r, v, d, lam, N, 1, float(rz))
    return RadialProfile(r, v, d, lam, N, 1)


def shoot(f: Nonlinearity, N: int, lam: float, a: float, M: int = DEFAULT_M) -> RadialProfile:
    """Integrate the radial IVP from v(0) = a, v'(0) = 0 up to r = 1.

    The returned profile is not necessarily a solution: check ``terminal``.
    A sign change before r = 1 truncates the profile at the first zero and is
    recorded in ``first_zero``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if a == 0:
        z = np.zeros(M + 1)
        return RadialProfile(_grid(M), z, z.copy(), float(lam), N, 1)
    if a < 0:
        return shoot(reflect(f, N), N, lam, -a, M).negated()
    shot = _march(f, N, np.array([float(lam)]), np.array([float(a)]), M, keep=True)
    if shot.blown[0] and not np.isfinite(shot.rz[0]):
        raise BlowUpError(f"|v| exceeded {BLOWUP_CAP:g} before r=1 (lambda={lam:g}, a={a:g})")
    return _profile_from_lane(shot, 0, float(lam), N, M)


# -- lambda(a) -----------------------------------------------------------------


def _lambda_lanes(f, N, amps, lam0, M, rtol, maxiter, lam_range):
    """Safeguarded rescaling iteration for lam(a), vectorized over amplitudes.

    If the discrete solution at lam first vanishes at r_z, the continuous
    problem rescales exactly to lam r_z^2; without a zero, the tangent at r=1
    gives an upper estimate (concave profile).  Each lane keeps a bracket
    [lo, hi] and falls back to geometric bisection when a step leaves it.
    """
    K = len(amps)
    lam = np.full(K, float(lam0)) if np.ndim(lam0) == 0 else np.array(lam0, dtype=float)
    lo = np.zeros(K)
    hi = np.full(K, np.inf)
    out = np.full(K, np.nan)
    active = np.arange(K)
    lmin, lmax = lam_range
    for _ in range(maxiter):
        if active.size == 0:
            break
        la, aa = lam[active], amps[active]
        shot = _march(f, N, la, aa, M, stop_at_zero=True)
        hit = np.isfinite(shot.rz)
        prop = np.empty_like(la)
        # crossed before (or at) r = 1: rescale onto the zero
        prop[hit] = la[hit] * shot.rz[hit] ** 2
        hi[active[hit]] = np.minimum(hi[active[hit]], la[hit])
        miss = ~hit & ~shot.blown
        with np.errstate(divide="ignore", invalid="ignore"):
            ext = shot.v1[miss] / np.abs(shot.d1[miss])
        ext = np.where(np.isfinite(ext), ext, np.inf)
        prop[miss] = la[miss] * np.minimum((1.0 + ext) ** 2, 16.0)
        lo[active[miss]] = np.maximum(lo[active[miss]], la[miss])
        bad = shot.blown & ~hit
        prop[bad] = la[bad] / 4.0
        hi[active[bad]] = np.minimum(hi[active[bad]], la[bad])

        done = np.abs(prop - la) <= rtol * la
        l, u = lo[active], hi[active]
        outside = ~((prop > l) & (prop < u)) & ~done
        both = outside & (l > 0) & np.isfinite(u)
        prop[both] = np.sqrt(l[both] * u[both])
        prop[outside & (l <= 0)] = u[outside & (l <= 0)] / 4.0
        prop[outside & ~np.isfinite(u) & (l > 0)] = l[outside & ~np.isfinite(u) & (l > 0)] * 4.0

        # probe the range bound itself before giving up on a lane
        prop[~done & (prop > lmax) & (la < lmax)] = lmax
        prop[~done & (prop < lmin) & (la > lmin)] = lmin
        out[active[done]] = prop[done]
        lam[active] = prop
        failed = (prop < lmin) | (prop > lmax) | ~np.isfinite(prop)
        active = active[~done & ~failed]
    return out


def lambda_of_amplitudes(
    f: Nonlinearity,
    N: int,
    amps,
    M: int = DEFAULT_M,
    lam0=1.0,
    rtol: float = 1e-12,
    maxiter: int = 80,
    lam_range=LAMBDA_RANGE,
    workers: int = 1,
) -> np.ndarray:
    """lam(a) for positive amplitudes; NaN marks a lane with no bracket in range."""
    amps = np.atleast_1d(np.asarray(amps, dtype=float))
    if np.any(amps <= 0):
        raise ValueError("amplitudes must be positive; use reflect() for the negative branch")
    if workers <= 1 or len(amps) < 2 * workers:
        return _lambda_lanes(f, N, amps, lam0, M, rtol, maxiter, lam_range)
    chunks = np.array_split(np.arange(len(amps)), workers)
    lam0s = np.broadcast_to(np.asarray(lam0, dtype=float), amps.shape)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(
            lambda idx: _lambda_lanes(f, N, amps[idx], lam0s[idx], M, rtol, maxiter, lam_range), chunks
        )
    return np.concatenate(list(parts))


def lambda_for_amplitude(f: Nonlinearity, N: int, a: float, tol: float = 1e-12, M: int = DEFAULT_M, lam0=1.0) -> float:
    """The unique lam for which the solution with v(0) = a vanishes first at r = 1."""
    if a == 0:
        raise ValueError("amplitude must be nonzero")
    g = f if a > 0 else reflect(f, N)
    lam = lambda_of_amplitudes(g, N, [abs(a)], M, lam0=lam0, rtol=tol)[0]
    if not np.isfinite(lam):
        raise BracketError(f"no lambda in {LAMBDA_RANGE} for a={a:g} ({f.spec}, N={N})")
    return float(lam)


def profiles_at(f: Nonlinearity, N: int, lams, amps, M: int = DEFAULT_M) -> list[RadialProfile]:
    """Final profiles for converged (lam, a) pairs with a > 0."""
    lams = np.asarray(lams, dtype=float)
    amps = np.asarray(amps, dtype=float)
    if lams.size == 0:
        return []
    shot = _march(f, N, lams, amps, M, keep=True)
    return [_profile_from_lane(shot, k, float(lams[k]), N, M) for k in range(len(lams))]


def amplitude_grid(a_min: float, a_max: float, points_per_decade: int) -> np.ndarray:
    if not 0 < a_min < a_max:
        raise ValueError("need 0 < a_min < a_max")
    n = int(round(np.log10(a_max / a_min) * points_per_decade)) + 1
    return np.logspace(np.log10(a_min), np.log10(a_max), max(n, 2))


# -- fixed lambda --------------------------------------------------------------


def _defect(f, N, lam, amps, M):
    """v(1) at fixed lam; negative tangent extrapolation past an early zero."""
    shot = _march(f, N, np.full(len(amps), lam), amps, M, stop_at_zero=True)
    out = shot.v1.copy()
    hit = np.isfinite(shot.rz) & (shot.rz < 1.0)
    out[hit] = shot.dz[hit] * (1.0 - shot.rz[hit])
    return out


def _refine_amplitudes(f, N, lam, a_lo, a_hi, M, rtol=1e-13, maxiter=100):
    """Illinois regula falsi on the terminal defect, vectorized over brackets."""
    a_lo = np.array(a_lo, dtype=float)
    a_hi = np.array(a_hi, dtype=float)
    d_lo = _defect(f, N, lam, a_lo, M)
    d_hi = _defect(f, N, lam, a_hi, M)
    side = np.zeros(len(a_lo), dtype=int)
    for _ in range(maxiter):
        width = a_hi - a_lo
        if np.all(width <= rtol * a_hi):
            break
        with np.errstate(divide="ignore", invalid="ignore"):
            x = a_hi - d_hi * width / (d_hi - d_lo)
        ok = np.isfinite(x) & (x > a_lo) & (x < a_hi)
        x = np.where(ok, x, 0.5 * (a_lo + a_hi))
        dx = _defect(f, N, lam, x, M)
        same_lo = np.sign(dx) == np.sign(d_lo)
        # replace the endpoint with the same sign, halving the stale one (Illinois)
        a_lo = np.where(same_lo, x, a_lo)
        d_lo_new = np.where(same_lo, dx, d_lo)
        a_hi = np.where(same_lo, a_hi, x)
        d_hi_new = np.where(same_lo, d_hi, dx)
        d_hi_new = np.where(same_lo & (side == 1), 0.5 * d_hi_new, d_hi_new)
        d_lo_new = np.where(~same_lo & (side == -1), 0.5 * d_lo_new, d_lo_new)
        side = np.where(same_lo, 1, -1)
        d_lo, d_hi = d_lo_new, d_hi_new
        if np.all((dx == 0) | (a_hi - a_lo <= rtol * a_hi)):
            break
    pick_lo = np.abs(d_lo) < np.abs(d_hi)
    return np.where(pick_lo, a_lo, a_hi)


def solve_at_lambda(
    f: Nonlinearity,
    N: int,
    lam: float,
    nu: int = 1,
    a_range: tuple[float, float] = (1e-4, 1e4),
    points_per_decade: int = 200,
    M: int = DEFAULT_M,
    workers: int = 1,
) -> list[RadialProfile]:
    """All one-sign solutions of sign ``nu`` at ``lam`` within the amplitude window.

    Sign changes of lam(a) - lam on a log-spaced scan are refined by regula
    falsi on the terminal value at fixed lam.  Returns profiles ordered by |a|.
    """
    g = f if nu > 0 else reflect(f, N)
    amps = amplitude_grid(*a_range, points_per_decade)
    curve = lambda_of_amplitudes(g, N, amps, M, workers=workers)
    ok = np.isfinite(curve)
    if ok.sum() >= 2:
        c = curve[ok]
        if np.ptp(c) <= 1e-8 * np.mean(c):
            if abs(lam - np.mean(c)) <= 1e-8 * np.mean(c):
                raise ContinuumError(f"lambda={lam:g} lies on a vertical branch (every amplitude solves)")
            return []
    s = curve - lam
    idx = [k for k in range(len(amps) - 1) if ok[k] and ok[k + 1] and s[k] * s[k + 1] < 0]
    exact = [k for k in range(len(amps)) if ok[k] and s[k] == 0]
    sols = []
    if idx:
        roots = _refine_amplitudes(g, N, lam, amps[idx], amps[[k + 1 for k in idx]], M)
        sols.extend(profiles_at(g, N, np.full(len(roots), lam), roots, M))
    if exact:
        sols.extend(profiles_at(g, N, np.full(len(exact), lam), amps[exact], M))
    sols.sort(key=lambda p: p.amplitude)
    if nu < 0:
        sols = [p.negated() for p in sols]
    return sols


# -- Picard iteration ----------------------------------------------------------


@dataclass
class PicardResult:
    status: str                      # "converged" | "maxiter" | "diverged"
    profile: RadialProfile | None
    iterations: int
    diffs: list[float] = field(default_factory=list)
    norms: list[float] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def picard(
    f: Nonlinearity,
    N: int,
    lam: float,
    v0,
    tol: float = 1e-10,
    maxiter: int = 2000,
    M: int | None = None,
    cap: float = BLOWUP_CAP,
) -> PicardResult:
    """Fixed-point iteration v <- lam T_f v from a one-signed start.

    Converges when the sup-norm step falls below ``tol``; otherwise the result
    carries the iterate norms for diagnosis.
    """
    if isinstance(v0, RadialProfile):
        r, v = v0.r, np.array(v0.v, dtype=float)
    else:
        v = np.array(v0, dtype=float)
        r = np.linspace(0.0, 1.0, len(v)) if M is None else _grid(M)
    if np.any(v > 0) and np.any(v < 0):
        raise ValueError("Picard start must be one-signed")
    nu = -1 if np.any(v < 0) else 1
    diffs, norms = [], []
    dv = np.zeros_like(v)
    for it in range(1, maxiter + 1):
        w, dv = apply_Tf(f, v, N, r, lam)
        diff = float(np.max(np.abs(w - v)))
        norm = float(np.max(np.abs(w)))
        diffs.append(diff)
        norms.append(norm)
        v = w
        if not np.isfinite(norm) or norm > cap:
            return PicardResult("diverged", None, it, diffs, norms)
        if diff < tol:
            return PicardResult("converged", RadialProfile(r, v, dv, float(lam), N, nu), it, diffs, norms)
    return PicardResult("maxiter", RadialProfile(r, v, dv, float(lam), N, nu), maxiter, diffs, norms)
