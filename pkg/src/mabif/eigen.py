"""First eigenvalues: lam_1 of the N-homogeneous radial problem and mu_1(p) of the
weighted p-Laplacian problem

    -(|w'|^(p-2) w')' = mu^(p-1) (p-1) r^(p-2) |w|^(p-2) w,   w'(0) = w(1) = 0.

At p = N + 1 the two coincide.
"""

from __future__ import annotations

import csv
import functools
import io
import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .nonlinearity import make_nonlinearity
from .radial import DEFAULT_M, RadialProfile, lambda_for_amplitude, shoot

__all__ = [
    "EigenResult",
    "EigenStallError",
    "ScanResult",
    "lambda1_shoot",
    "lambda1",
    "mu1_inverse_iteration",
    "mu1_scan",
    "aux_operator",
]

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-5


class EigenStallError(RuntimeError):
    pass


@dataclass(frozen=True)
class EigenResult:
    value: float                  # lam_1 or mu_1(p)
    eigenfunction: RadialProfile  # sup-normalized, positive on (0, 1)
    method: str                   # "shooting" | "inverse_iteration"
    residual: float
    p: float
    iterations: int = 0
    tolerance: float = RESIDUAL_TOL

    @property
    def eta(self) -> float:
        return self.value ** (self.p - 1)


def _phi(x, p):
    return np.copysign(np.abs(x) ** (p - 1), x)


def _product_trapezoid_weights(r, alpha):
    """Weights (left, right) for int_{r_i}^{r_i+1} t^alpha g(t) dt with g linear."""
    a, b = r[:-1], r[1:]
    h = b - a
    m0 = (b ** (alpha + 1) - a ** (alpha + 1)) / (alpha + 1)
    m1 = (b ** (alpha + 2) - a ** (alpha + 2)) / (alpha + 2)
    return (b * m0 - m1) / h, (m1 - a * m0) / h


class _AuxOperator:
    """Unit-mu integral operator of the p-problem on a uniform grid."""

    def __init__(self, p: float, M: int):
        self.p = float(p)
        self.r = np.linspace(0.0, 1.0, M + 1)
        self.wl, self.wr = _product_trapezoid_weights(self.r, self.p - 2.0)

    def __call__(self, w):
        """Return (T w, (T w)')."""
        p, r = self.p, self.r
        g = _phi(w, p)
        inner = np.concatenate([[0.0], np.cumsum(self.wl * g[:-1] + self.wr * g[1:])])
        psi = _phi((p - 1.0) * inner, p / (p - 1.0))       # inverse power, exponent 1/(p-1)
        G = cumulative_simpson(psi, x=r, initial=0.0)
        return G[-1] - G, -psi

    def rayleigh(self, w, dw) -> float:
        p, r = self.p, self.r
        num = simpson(np.abs(dw) ** p, x=r)
        den = (p - 1.0) * np.sum(self.wl * np.abs(w[:-1]) ** p + self.wr * np.abs(w[1:]) ** p)
        return num / den


def aux_operator(p: float, M: int = DEFAULT_M):
    """The unit-mu operator T with (Tw)(r) = int_r^1 phi_{p'}((p-1) int_0^s t^(p-2) phi_p(w)) ds."""
    return _AuxOperator(p, M)


def mu1_inverse_iteration(
    p: float,
    M: int = DEFAULT_M,
    tol: float = 1e-10,
    maxiter: int = 1000,
    w0=None,
    seed: int | None = None,
) -> EigenResult:
    """Principal eigenpair of the p-problem by normalized iteration w <- Tw / |Tw|.

    The eigenvalue is read from the Rayleigh quotient eta = int|w'|^p /
    ((p-1) int r^(p-2)|w|^p) of the converged iterate; mu_1 = eta^(1/(p-1)).
    ``w0`` warm-starts the iteration; otherwise a random positive start drawn
    from ``seed`` (or the cap 1 - r^2 when ``seed`` is None).
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    T = _AuxOperator(p, M)
    r = T.r
    if w0 is not None:
        w = np.interp(r, np.linspace(0.0, 1.0, len(w0)), np.asarray(w0, dtype=float))
    elif seed is not None:
        rng = np.random.default_rng(seed)
        w = (1.0 - r) * (0.1 + rng.random(M + 1))
    else:
        w = 1.0 - r * r
    w = w / np.max(np.abs(w))
    if np.any(w[:-1] <= 0):
        raise ValueError("start must be positive on [0, 1)")
    for it in range(1, maxiter + 1):
        tw, dtw = T(w)
        scale = np.max(tw)
        wn, dwn = tw / scale, dtw / scale
        diff = np.max(np.abs(wn - w))
        w, dw = wn, dwn
        if diff < tol:
            break
    else:
        raise EigenStallError(f"inverse iteration for p={p:g} did not settle in {maxiter} steps (last step {diff:.3e})")
    eta = T.rayleigh(w, dw)
    mu = eta ** (1.0 / (p - 1.0))
    tw, _ = T(w)
    residual = float(np.max(np.abs(mu * tw - w)))
    prof = RadialProfile(r, w, dw, mu, p - 1, 1)
    return EigenResult(float(mu), prof, "inverse_iteration", residual, float(p), it)


def lambda1_shoot(N: int, tol: float = 1e-12, M: int = DEFAULT_M, a: float = 1.0) -> EigenResult:
    """lam_1 by shooting f(s) = s^N from v(0) = a.

    Homogeneity makes the answer independent of a.  The starting value comes
    from a coarse p = N + 1 inverse iteration, which already sits next to the
    first eigenvalue; the rescaling iteration then lands on the first zero.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    seed = mu1_inverse_iteration(N + 1, M=256, tol=1e-8).value
    f = make_nonlinearity("power", N)
    lam = lambda_for_amplitude(f, N, a, tol=tol, M=M, lam0=seed)
    if abs(lam / seed - 1.0) > 0.1:
        raise RuntimeError(f"shooting left the first-eigenvalue window (seed {seed:.6g}, got {lam:.6g})")
    prof = shoot(f, N, lam, a, M)
    fn = RadialProfile(prof.r, prof.v / a, prof.dv / a, lam, N, 1)
    return EigenResult(lam, fn, "shooting", abs(prof.terminal) / a, float(N + 1), 0)


@functools.lru_cache(maxsize=None)
def lambda1(N: int, M: int = DEFAULT_M) -> float:
    """Cached lam_1(N) by shooting."""
    return lambda1_shoot(N, M=M).value


@dataclass(frozen=True)
class ScanResult:
    p: np.ndarray
    mu1: np.ndarray
    eta1: np.ndarray
    residual: np.ndarray
    iterations: np.ndarray

    @property
    def max_jump(self) -> float:
        return float(np.max(np.abs(np.diff(self.mu1)))) if len(self.mu1) > 1 else 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["p", "mu1", "eta1", "residual", "iterations"])
        for row in zip(self.p, self.mu1, self.eta1, self.residual, self.iterations):
            wr.writerow([f"{row[0]:.12g}", repr(float(row[1])), repr(float(row[2])), f"{row[3]:.6e}", int(row[4])])
        return buf.getvalue()


def mu1_scan(p_from: float, p_to: float, step: float, M: int = DEFAULT_M, tol: float = 1e-10, warm: bool = True) -> ScanResult:
    """mu_1(p) on an equispaced p-grid, warm-starting from the previous eigenfunction."""
    if p_from < 2 or p_to < p_from or step <= 0:
        raise ValueError("need 2 <= p_from <= p_to and step > 0")
    n = int(round((p_to - p_from) / step))
    ps = np.linspace(p_from, p_from + n * step, n + 1)
    rows = []
    prev = None
    for p in ps:
        res = mu1_inverse_iteration(p, M=M, tol=tol, w0=prev)
        if warm:
            prev = res.eigenfunction.v
        rows.append((p, res.value, res.eta, res.residual, res.iterations))
    cols = [np.array(c) for c in zip(*rows)]
    return ScanResult(*cols)
