"""Linearized spectrum about a radial solution.

The linearization reads

    -(w phi')' - lam^N r^(N-1) f'(v) phi = (mu / N) phi,   w = (-v')^(N-1),
    phi'(0) = 0, phi(1) = 0,

and the Morse index is the number of negative mu.  It is discretized in flux
form on the profile grid: cell faces at the half nodes, a half cell at the
origin (where the flux vanishes), Dirichlet at r = 1.  The generalized problem
A phi = sigma D phi with diagonal D is symmetrized to a tridiagonal matrix.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.integrate import simpson

from .branch import Branch, detect_fold
from .nonlinearity import Nonlinearity, check_subhomogeneity, reflect
from .radial import RadialProfile

__all__ = [
    "SLSpectrum",
    "SweepReport",
    "assemble",
    "sturm_count",
    "linearized_eigs",
    "identity_residual",
    "branch_stability_sweep",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SLSpectrum:
    eigenvalues: np.ndarray     # ascending mu
    morse: int
    r: np.ndarray
    phi1: np.ndarray            # principal eigenfunction, sup-normalized, phi1(1) = 0
    scale: float                # lam^N max|f'(v)|, the size of the potential term

    @property
    def mu1(self) -> float:
        return float(self.eigenvalues[0])


def _half_node_weights(profile: RadialProfile, N: int) -> np.ndarray:
    """(-v')^(N-1) at the cell faces, with v' from the cubic Hermite interpolant."""
    r, v, d = profile.r, profile.v, profile.dv
    h = np.diff(r)
    dmid = 1.5 * np.diff(v) / h - 0.25 * (d[:-1] + d[1:])
    if N == 1:
        return np.ones_like(dmid)
    return np.maximum(-dmid, 0.0) ** (N - 1)


def _flux_terms(profile: RadialProfile, f: Nonlinearity, N: int):
    r, v = profile.r, profile.v
    M = len(r) - 1
    h = r[1] - r[0]
    if not np.allclose(np.diff(r), h, rtol=1e-9, atol=0):
        raise ValueError("linearization needs a uniform grid")
    wf = _half_node_weights(profile, N)                  # faces 1/2 .. M-1/2
    pot = profile.lam**N * r[:M] ** (N - 1) * f.deriv(v[:M])
    return wf, pot, h


def assemble(profile: RadialProfile, f: Nonlinearity, N: int):
    """Symmetric tridiagonal (diag, offdiag) for sigma = mu / N, plus the mass diagonal.

    ``profile`` must be a positive profile on a uniform grid; ``f`` the
    nonlinearity of that positive problem.
    """
    wf, pot, h = _flux_terms(profile, f, N)
    M = len(pot)
    mass = np.full(M, h)
    mass[0] = 0.5 * h
    stiff = np.empty(M)
    stiff[0] = wf[0] / h
    stiff[1:] = (wf[:-1] + wf[1:]) / h
    A_diag = stiff - mass * pot
    A_off = -wf[: M - 1] / h
    s = 1.0 / np.sqrt(mass)
    return A_diag * s * s, A_off * s[:-1] * s[1:], mass


def sturm_count(diag, off, x: float) -> int:
    """Number of eigenvalues of the symmetric tridiagonal matrix below ``x``."""
    count = 0
    q = 1.0
    tiny = 1e-300
    prev_b2 = 0.0
    for i in range(len(diag)):
        q = diag[i] - x - (prev_b2 / q if i else 0.0)
        if q == 0.0:
            q = -tiny
        if q < 0:
            count += 1
        if i < len(off):
            prev_b2 = off[i] * off[i]
    return count


def _positive_problem(profile: RadialProfile, f: Nonlinearity, N: int):
    if profile.nu < 0:
        return profile.negated(), reflect(f, N)
    return profile, f


def linearized_eigs(profile: RadialProfile, f: Nonlinearity, N: int, k: int = 1, tol: float = 1e-8) -> SLSpectrum:
    """The k smallest eigenvalues mu of the linearization, by Sturm bisection."""
    if not profile.is_solution(tol):
        raise ValueError("linearization needs a converged one-sign solution")
    if not f.analytic:
        raise ValueError("stability needs an analytic derivative; tabulated f is rejected")
    prof, g = _positive_problem(profile, f, N)
    diag, off, mass = assemble(prof, g, N)
    k = min(k, len(diag))
    sig, vec = eigh_tridiagonal(diag, off, select="i", select_range=(0, k - 1), lapack_driver="stebz")
    # Bisection on the assembled matrix is only accurate to eps * |T| ~ eps / h^2;
    # the Rayleigh quotient in gradient form recovers full precision.
    wf, pot, h = _flux_terms(prof, g, N)
    phis = np.vstack([vec / np.sqrt(mass)[:, None], np.zeros((1, k))])
    for j in range(k):
        ph = phis[:, j]
        den = np.sum(mass * ph[:-1] ** 2)
        sig[j] = (np.sum(wf * np.diff(ph) ** 2) / h - np.sum(mass * pot * ph[:-1] ** 2)) / den
    phi = phis[:, 0]
    phi = phi if phi[np.argmax(np.abs(phi))] > 0 else -phi
    phi = phi / np.max(np.abs(phi))
    morse = sturm_count(diag, off, 0.0)
    scale = profile.lam**N * float(np.max(np.abs(g.deriv(prof.v))))
    return SLSpectrum(N * sig, morse, prof.r.copy(), phi, scale)


def identity_residual(profile: RadialProfile, phi1, mu1: float, f: Nonlinearity, N: int) -> float:
    """Relative defect of  mu1 int phi v = N int lam^N r^(N-1) phi (N f(v) - f'(v) v).

    The scale is the same integral with absolute values, so the defect stays
    meaningful when both sides vanish (homogeneous f).
    """
    prof, g = _positive_problem(profile, f, N)
    r, v = prof.r, prof.v
    phi1 = np.asarray(phi1, dtype=float)
    fv, dfv = g.eval(v), g.deriv(v)
    wgt = N * prof.lam**N * r ** (N - 1) * phi1
    lhs = mu1 * simpson(phi1 * v, x=r)
    rhs = simpson(wgt * (N * fv - dfv * v), x=r)
    scale = simpson(np.abs(wgt) * (N * np.abs(fv) + np.abs(dfv * v)), x=r)
    return float(abs(lhs - rhs) / scale)


@dataclass
class SweepReport:
    branch: Branch
    subhomogeneous: bool
    degenerate: bool
    all_stable: bool
    monotone: bool
    implication_violations: list[float] = field(default_factory=list)   # amplitudes
    mu1_crossings: list[float] = field(default_factory=list)            # amplitudes where mu1 changes sign
    fold_amplitude: float | None = None
    fold_offset: float | None = None     # min |a_cross - a*| / |a*|
    residuals: np.ndarray | None = None

    @property
    def consistent(self) -> bool:
        """All cross-checks the regime calls for hold."""
        ok = not self.implication_violations
        if self.subhomogeneous:
            ok = ok and self.all_stable and self.monotone
        if self.fold_amplitude is not None:
            ok = ok and self.fold_offset is not None and self.fold_offset < 1e-2
        return ok


def _strictly_subhomogeneous_on(profile: RadialProfile, g: Nonlinearity, N: int) -> bool:
    v = profile.v[1:-1]
    return bool(np.all(N * g.eval(v) - g.deriv(v) * v > 0))


def branch_stability_sweep(branch: Branch, f: Nonlinearity | None = None, N: int | None = None, k: int = 1) -> SweepReport:
    """Annotate each branch point with mu1_lin, morse and dlambda/da, then cross-check.

    Expects every point to carry its profile.  In the subhomogeneous regime all
    mu1 should be positive and lam(a) strictly monotone; at a fold the sign
    change of mu1 should sit at the fold amplitude.
    """
    f = branch.f if f is None else f
    N = branch.N if N is None else N
    g = f if branch.nu > 0 else reflect(f, N)
    pts = branch.points
    if any(p.profile is None for p in pts):
        raise ValueError("branch was traced without profiles")
    a = branch.amplitudes
    lam = branch.lambdas
    dl = np.gradient(lam, a) if len(a) >= 2 else np.zeros_like(a)
    violations, residuals = [], []
    for p, d in zip(pts, dl):
        spec = linearized_eigs(p.profile, f, N, k)
        p.mu1_lin = spec.mu1
        p.morse = spec.morse
        p.dlambda_da = float(d)
        residuals.append(identity_residual(p.profile, spec.phi1, spec.mu1, f, N))
        pos, _ = _positive_problem(p.profile, f, N)
        if _strictly_subhomogeneous_on(pos, g, N) and np.all(spec.phi1[1:-1] > 0) and not spec.mu1 > 0:
            violations.append(p.amplitude)
    mu = np.array([p.mu1_lin for p in pts])
    sub = check_subhomogeneity(g, N).holds
    degenerate = branch.is_continuum()
    all_stable = bool(np.all(mu > 0))
    monotone = bool(len(dl) > 0 and (np.all(dl > 0) or np.all(dl < 0)))

    crossings = []
    for j in range(len(mu) - 1):
        if mu[j] == 0:
            crossings.append(float(a[j]))
        elif mu[j] * mu[j + 1] < 0:
            x0, x1 = math.log(abs(a[j])), math.log(abs(a[j + 1]))
            t = mu[j] / (mu[j] - mu[j + 1])
            crossings.append(math.copysign(math.exp(x0 + t * (x1 - x0)), a[j]))

    fold_a = fold_off = None
    if not degenerate:
        fold = detect_fold(branch)
        if fold is not None:
            fold_a = fold.amplitude
            if crossings:
                fold_off = min(abs(c - fold_a) / abs(fold_a) for c in crossings)
    if degenerate:
        log.info("branch is a vertical continuum; mu1 is expected to vanish along it")
    return SweepReport(
        branch, sub, degenerate, all_stable, monotone, violations, crossings, fold_a, fold_off, np.array(residuals)
    )
