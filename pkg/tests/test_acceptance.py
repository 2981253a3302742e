"""Acceptance suite: one test per criterion, reported as PASS/FAIL lines in the
terminal summary (see conftest.py)."""

import math
import time

import numpy as np
import pytest

from mabif import classify, make_nonlinearity, reflect, truncate
from mabif.branch import branch_endpoints, count_solutions, detect_fold, interior_extrema, trace_branch
from mabif.cli import run
from mabif.domain import ExistenceReport, bounds_from_radii, complement, intersect, unit_ball_windows
from mabif.eigen import lambda1_shoot, mu1_inverse_iteration, mu1_scan
from mabif.radial import lambda_of_amplitudes, shoot
from mabif.stability import branch_stability_sweep, linearized_eigs

from oracle_values import LAMBDA1, PI2_4

crit = pytest.mark.criterion


@crit(1)
def test_c01_analytic_eigenvalue(capsys):
    """eigen --N 1: shooting within 1e-8 and p=2 inverse iteration within 1e-3 of pi^2/4, under 1 s"""
    import json

    t0 = time.perf_counter()
    code = run(["eigen", "--N", "1", "--M", "4096"])
    elapsed = time.perf_counter() - t0
    assert code == 0
    d = json.loads(capsys.readouterr().out)
    assert d["inverse"]["p"] == 2
    assert abs(d["shoot"]["lambda1"] - PI2_4) < 1e-8
    assert abs(d["inverse"]["mu1"] - PI2_4) < 1e-3
    assert elapsed < 1.0, f"eigen took {elapsed:.2f} s"


@crit(2)
def test_c02_cross_method():
    """shooting lambda_1(N) matches mu_1(N+1) to 1e-3 relative for N = 1, 2, 3"""
    for N in (1, 2, 3):
        lam = lambda1_shoot(N).value
        mu = mu1_inverse_iteration(N + 1).value
        assert abs(lam - mu) / lam < 1e-3, (N, lam, mu)


@pytest.fixture(scope="module")
def scans():
    return mu1_scan(2, 5, 0.1), mu1_scan(2, 5, 0.05)


@crit(3)
def test_c03_eta_lower_bound(scans):
    """eta_1(p) >= 1/(p-1) at every p of the [2, 5] scan, step 0.1"""
    s = scans[0]
    assert len(s.p) == 31
    assert np.all(s.eta1 >= 1 / (s.p - 1))


@crit(4)
def test_c04_continuity(scans):
    """max successive jump of mu_1 shrinks by >= 1.8 when the p-step is halved"""
    coarse, fine = scans
    assert coarse.max_jump / fine.max_jump >= 1.8


@crit(5)
def test_c05_homogeneous_branch():
    """power(N), N = 1, 2: |lambda(a) - lambda_1| < 1e-6 on [1e-3, 1e3]; linearized mu_1 degenerate to 1e-5 scaled"""
    for N in (1, 2):
        f = make_nonlinearity("power", N)
        lam1 = lambda1_shoot(N)
        lams = lambda_of_amplitudes(f, N, np.logspace(-3, 3, 61))
        assert np.max(np.abs(lams - lam1.value)) < 1e-6
        spec = linearized_eigs(lam1.eigenfunction, f, N)
        assert abs(spec.mu1) < 1e-5 * spec.scale


@crit(6)
def test_c06_bifurcation_endpoint():
    """power_mix(N,2): lambda(1e-4) within 1e-3 of lambda_1; lambda decreases to 0 for a >= 1e2"""
    for N in (1, 2, 3):
        f = make_nonlinearity("power_mix", N, 2)
        b = trace_branch(f, N, 1, 1e-4, 1e4, 10, keep_profiles=False)
        assert b.amplitudes[0] == pytest.approx(1e-4, rel=1e-12)
        assert abs(b.lambdas[0] - LAMBDA1[N]) / LAMBDA1[N] < 1e-3
        tail = b.lambdas[b.sizes >= 1e2 * (1 - 1e-12)]
        assert len(tail) >= 20 and np.all(np.diff(tail) < 0)
        rep = branch_endpoints(b, classify(f, N), LAMBDA1[N])
        assert rep.large.kind == "Zero" and rep.large.estimate == 0.0


@crit(7)
def test_c07_sublinear_regime():
    """rational(N): lambda(1e4) > 10 lambda_1, small end within 1e-3 of lambda_1, counts 1 at 2 lambda_1 and 0 at 0.5 lambda_1"""
    for N in (1, 2, 3):
        f = make_nonlinearity("rational", N)
        b = trace_branch(f, N, 1, 1e-4, 1e4, 10, keep_profiles=False)
        # beyond the last point lambda(a) left the searchable range [1e-8, 1e8] from above
        assert np.max(b.lambdas) > 10 * LAMBDA1[N]
        assert np.all(np.diff(b.lambdas) > 0)
        rep = branch_endpoints(b, classify(f, N), LAMBDA1[N])
        assert rep.small.rel_error < 1e-3
        assert count_solutions(b, 2 * LAMBDA1[N]) == 1
        assert count_solutions(b, 0.5 * LAMBDA1[N]) == 0


@crit(8)
def test_c08_gelfand_fold(gelfand_n2_branch):
    """gelfand N=2: lambda* stable to 1e-4 under step halving; counts 2 / 0 at 0.5 / 1.5 lambda*; mu_1 flips within 1% of a*"""
    f = make_nonlinearity("gelfand")
    folds = [detect_fold(trace_branch(f, 2, 1, 1.0, 8.0, 40, M=M, keep_profiles=False)) for M in (2048, 4096)]
    assert abs(folds[0].lam - folds[1].lam) / folds[1].lam < 1e-4
    fold = detect_fold(gelfand_n2_branch)
    assert fold.lam == pytest.approx(folds[1].lam, rel=1e-10)
    assert count_solutions(gelfand_n2_branch, 0.5 * fold.lam) == 2
    assert count_solutions(gelfand_n2_branch, 1.5 * fold.lam) == 0
    rep = branch_stability_sweep(gelfand_n2_branch)
    assert len(rep.mu1_crossings) == 1
    assert abs(rep.mu1_crossings[0] - fold.amplitude) / fold.amplitude < 1e-2


@crit(9)
def test_c09_stability_regime(power_decay_n2_branch):
    """power_decay N=2: mu_1 > 0, Morse 0, dlambda/da > 0; identity residual < 1e-4 and shrinking >= 4x under grid halving"""
    b = power_decay_n2_branch
    rep = branch_stability_sweep(b)
    assert all(p.mu1_lin > 0 and p.morse == 0 for p in b.points)
    assert all(p.dlambda_da > 0 for p in b.points)
    assert np.all(rep.residuals < 1e-4)
    coarse = trace_branch(b.f, 2, 1, 1e-2, 20.0, 10, M=b.M // 2)
    np.testing.assert_array_equal(coarse.amplitudes, b.amplitudes)
    ratios = branch_stability_sweep(coarse).residuals / rep.residuals
    low = [(float(a), float(q)) for a, q in zip(b.amplitudes, ratios) if not q >= 4]
    assert not low, f"{len(low)}/{len(ratios)} points shrink by less than 4x: {low}"


@crit(10)
def test_c10_double_zero():
    """a = 0 gives sup-norm < 1e-12; a = 1e-8 at lambda_1/2 gives sup-norm < 1e-6"""
    for N in (1, 2, 3):
        f = make_nonlinearity("power_mix", N, 2)
        assert shoot(f, N, LAMBDA1[N] / 2, 0.0).sup_norm < 1e-12
        p = shoot(f, N, LAMBDA1[N] / 2, 1e-8)
        assert p.sup_norm < 1e-6


@crit(11)
def test_c11_reflection():
    """nu=- branch of gelfand equals the negated nu=+ branch of its reflection to 1e-8"""
    f = make_nonlinearity("gelfand")
    for N in (2, 4):
        neg = trace_branch(f, N, -1, 1e-2, 10.0, 10)
        pos = trace_branch(reflect(f, N), N, 1, 1e-2, 10.0, 10)
        assert len(neg.points) == len(pos.points) > 0
        np.testing.assert_array_equal(neg.amplitudes, -pos.amplitudes)
        np.testing.assert_allclose(neg.lambdas, pos.lambdas, rtol=1e-8, atol=0)
        for pn, pp in zip(neg.points, pos.points):
            assert np.max(np.abs(pn.profile.v + pp.profile.v)) <= 1e-8 * abs(pp.amplitude)


@crit(12)
def test_c12_domain_bounds():
    """r_in = r_out = R in {0.5, 2} reproduces unit windows scaled by 1/R^2 to 1e-6; sets disjoint for all tested radii"""
    cases = []
    for spec, N in ((("gelfand",), 2), (("power_decay", 2), 2), (("rational", 1), 1), (("power_mix", 1, 2), 1)):
        f = make_nonlinearity(*spec)
        b = trace_branch(f, N, 1, 1e-4, 1e3, 10, keep_profiles=False)
        ep = branch_endpoints(b, classify(f, N), LAMBDA1[N])
        w = unit_ball_windows(b, ep, interior_extrema(b))
        for R in (0.5, 2.0):
            rep = bounds_from_radii(f, N, R, R, w)
            c = 1 / R**2
            ex = [(lo * c, hi * c) for lo, hi in w.exists]
            ne = [(lo * c, hi * c) for lo, hi in w.none]
            want = ExistenceReport(R, R, w.regime, ex, ne, complement(ex + ne))
            assert rep.matches(want, rtol=1e-6), (spec, R)
        for r_in, r_out in ((0.5, 2.0), (0.8, 1.25), (1.0, 3.0), (0.3, 0.31)):
            cases.append(bounds_from_radii(f, N, r_in, r_out, w))
    for rep in cases:
        overlap = [iv for iv in intersect(rep.exists_on, rep.none_on) if iv[1] > iv[0]]
        assert not overlap
        if rep.exists_on and rep.none_on and math.isinf(rep.none_on[-1][1]):
            assert rep.none_on[-1][0] >= rep.exists_on[-1][1]


@crit(13)
def test_c13_truncation():
    """truncate continuous at all knots to 1e-12; branch deviation decreases for n = 10, 100, 1000"""
    for N in (1, 2, 3):
        for mode in ("small", "large"):
            for f in (make_nonlinearity("gelfand"), make_nonlinearity("power_decay", N)):
                for n in (10, 100, 1000):
                    t = truncate(f, n, N, mode)
                    for knot in (1 / n, 2 / n, -1 / n, -2 / n):
                        mid = t(knot)
                        for side in (np.nextafter(knot, -np.inf), np.nextafter(knot, np.inf)):
                            slope = abs(t.deriv(side)) * abs(knot) * 4e-16
                            assert abs(t(side) - mid) <= 1e-12 * max(abs(mid), 1e-300) + slope
    N = 2
    for spec, mode in ((("gelfand",), "small"), (("gelfand",), "large"), (("power_decay", N), "small")):
        f = make_nonlinearity(*spec)
        base = trace_branch(f, N, 1, 0.5, 5.0, 10, keep_profiles=False).lambdas
        dev = []
        for n in (10, 100, 1000):
            lam = trace_branch(truncate(f, n, N, mode), N, 1, 0.5, 5.0, 10, keep_profiles=False).lambdas
            dev.append(float(np.max(np.abs(lam - base) / base)))
        assert dev[0] > dev[1] > dev[2], (spec, mode, dev)
