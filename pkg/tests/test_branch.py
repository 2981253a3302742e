import math
import warnings

import numpy as np
import pytest

from mabif import classify, make_nonlinearity, reflect
from mabif.branch import (
    CONTINUUM,
    TailError,
    branch_endpoints,
    count_solutions,
    detect_fold,
    interior_extrema,
    locate_solutions,
    summary_json,
    trace_branch,
)

from oracle_values import (
    GELFAND_N1_A_STAR,
    GELFAND_N1_LAMBDA_STAR,
    GELFAND_N2_A_STAR,
    GELFAND_N2_LAMBDA_STAR,
    LAMBDA1,
)


@pytest.fixture(scope="module")
def gelfand_n1():
    return trace_branch(make_nonlinearity("gelfand"), 1, 1, 1e-2, 20.0, 40)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_power_branch_is_vertical(N):
    b = trace_branch(make_nonlinearity("power", N), N, 1, 1e-3, 1e3, 10, keep_profiles=False)
    assert np.max(np.abs(b.lambdas - LAMBDA1[N])) < 1e-6
    assert b.is_continuum()
    assert count_solutions(b, LAMBDA1[N]) == CONTINUUM
    assert count_solutions(b, 1.0) == 0
    assert detect_fold(b) is None


def test_branch_invariants(gelfand_n1):
    b = gelfand_n1
    assert np.all(np.diff(b.sizes) > 0)
    for p in b.points[::10]:
        prof = p.profile
        assert prof.amplitude == p.amplitude and prof.lam == p.lam
        assert prof.is_solution()
        assert np.all(prof.v[:-1] > 0) and np.all(np.diff(prof.v) < 0)


def test_gelfand_n1_fold_closed_form(gelfand_n1):
    fold = detect_fold(gelfand_n1)
    assert fold.lam == pytest.approx(GELFAND_N1_LAMBDA_STAR, rel=1e-10)
    assert fold.amplitude == pytest.approx(GELFAND_N1_A_STAR, rel=1e-6)
    assert [e.kind for e in interior_extrema(gelfand_n1)] == ["max"]


def test_gelfand_n1_counts(gelfand_n1):
    assert count_solutions(gelfand_n1, 0.5 * GELFAND_N1_LAMBDA_STAR) == 2
    assert count_solutions(gelfand_n1, 1.5 * GELFAND_N1_LAMBDA_STAR) == 0
    amps = locate_solutions(gelfand_n1, 0.5 * GELFAND_N1_LAMBDA_STAR)
    for a in amps:
        t = math.acosh(math.exp(a / 2))
        assert 2 * t * t / math.cosh(t) ** 2 == pytest.approx(0.5 * GELFAND_N1_LAMBDA_STAR, rel=1e-9)


def test_count_warns_at_fold(gelfand_n1):
    fold = detect_fold(gelfand_n1, refine=False)
    with pytest.warns(UserWarning):
        count_solutions(gelfand_n1, fold.lam)


def test_count_stable_under_density():
    f = make_nonlinearity("gelfand")
    lam = 0.5 * GELFAND_N2_LAMBDA_STAR
    c1 = count_solutions(trace_branch(f, 2, 1, 1e-2, 40.0, 20, keep_profiles=False), lam)
    c2 = count_solutions(trace_branch(f, 2, 1, 1e-2, 40.0, 40, keep_profiles=False), lam)
    assert c1 == c2 == 2


def test_gelfand_n2_fold_oracle():
    b = trace_branch(make_nonlinearity("gelfand"), 2, 1, 1.0, 8.0, 40, keep_profiles=False)
    fold = detect_fold(b)
    assert fold.lam == pytest.approx(GELFAND_N2_LAMBDA_STAR, rel=1e-8)
    assert fold.amplitude == pytest.approx(GELFAND_N2_A_STAR, rel=1e-4)


def test_power_mix_endpoints():
    N = 2
    f = make_nonlinearity("power_mix", N, 2)
    b = trace_branch(f, N, 1, 1e-4, 1e4, 10, keep_profiles=False)
    rep = branch_endpoints(b, classify(f, N), LAMBDA1[N])
    assert rep.small.agrees and rep.small.rel_error < 1e-6
    assert rep.large.kind == "Zero" and rep.large.expected == 0.0 and rep.large.agrees
    tail = b.lambdas[b.sizes >= 1e2]
    assert np.all(np.diff(tail) < 0)
    assert detect_fold(b) is None


def test_rational_endpoints():
    N = 2
    f = make_nonlinearity("rational", N)
    b = trace_branch(f, N, 1, 1e-4, 1e4, 10, keep_profiles=False)
    rep = branch_endpoints(b, classify(f, N), LAMBDA1[N])
    assert rep.small.rel_error < 1e-3
    assert rep.large.kind == "Infinite" and math.isinf(rep.large.expected) and rep.large.agrees
    assert detect_fold(b) is None
    d = rep.to_dict()
    assert d["large"]["expected"] == "inf"


def test_power_endpoints_exact():
    N = 2
    f = make_nonlinearity("power", N)
    b = trace_branch(f, N, 1, 1e-2, 1e2, 10, keep_profiles=False)
    rep = branch_endpoints(b, classify(f, N), LAMBDA1[N])
    assert rep.small.rel_error < 1e-9 and rep.large.rel_error < 1e-9


def test_short_tail_rejected():
    f = make_nonlinearity("rational", 2)
    b = trace_branch(f, 2, 1, 1.0, 3.0, 10, keep_profiles=False)
    with pytest.raises(TailError):
        branch_endpoints(b, classify(f, 2), LAMBDA1[2])


def test_gaps_recorded():
    b = trace_branch(make_nonlinearity("gelfand"), 1, 1, 1.0, 100.0, 5, keep_profiles=False)
    assert b.gaps and min(b.gaps) > 20
    assert len(b.points) + len(b.gaps) == 11


def test_negative_branch_matches_reflection():
    f = make_nonlinearity("power_mix", 3, 2)
    neg = trace_branch(f, 3, -1, 1e-2, 10.0, 10)
    pos = trace_branch(reflect(f, 3), 3, 1, 1e-2, 10.0, 10)
    np.testing.assert_array_equal(neg.amplitudes, -pos.amplitudes)
    np.testing.assert_allclose(neg.lambdas, pos.lambdas, rtol=1e-12)
    assert all(p.profile.nu == -1 for p in neg.points)


def test_csv_and_summary(gelfand_n1):
    fold = detect_fold(gelfand_n1)
    text = gelfand_n1.to_csv(fold)
    lines = text.splitlines()
    assert lines[0] == "a,lambda,vmax,morse,mu1_lin,dlambda_da,fold"
    flagged = [ln for ln in lines[1:] if ln.endswith(",1")]
    assert len(flagged) == 1 and float(flagged[0].split(",")[1]) == fold.lam
    s = summary_json(gelfand_n1, fold, {"0.5": 2})
    assert '"fold"' in s and '"counts"' in s
