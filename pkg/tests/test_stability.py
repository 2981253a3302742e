import numpy as np
import pytest
from scipy.linalg import eigh

from mabif import from_callable, make_nonlinearity, shoot
from mabif.branch import detect_fold, trace_branch
from mabif.eigen import lambda1_shoot
from mabif.radial import lambda_for_amplitude
from mabif.stability import (
    assemble,
    branch_stability_sweep,
    identity_residual,
    linearized_eigs,
    sturm_count,
)

from oracle_values import (
    GELFAND_N2_LAMBDA_A1,
    GELFAND_N2_MU1_A1,
    POWER_DECAY_N2_LAMBDA_A3,
    POWER_DECAY_N2_MU1_A3,
)


def _solution(spec_args, N, a, M=4096):
    f = make_nonlinearity(*spec_args)
    lam = lambda_for_amplitude(f, N, a, M=M)
    return f, shoot(f, N, lam, a, M)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_power_eigenfunction_degenerate(N):
    e = lambda1_shoot(N)
    f = make_nonlinearity("power", N)
    spec = linearized_eigs(e.eigenfunction, f, N)
    assert abs(spec.mu1) < 1e-5 * spec.scale
    assert identity_residual(e.eigenfunction, spec.phi1, spec.mu1, f, N) < 1e-6


def test_gelfand_mu1_against_oracle():
    f, prof = _solution(("gelfand",), 2, 1.0)
    assert prof.lam == pytest.approx(GELFAND_N2_LAMBDA_A1, rel=1e-10)
    spec = linearized_eigs(prof, f, 2)
    assert spec.mu1 == pytest.approx(GELFAND_N2_MU1_A1, rel=1e-5)
    assert spec.morse == 0 and np.all(spec.phi1[:-1] > 0) and spec.phi1[-1] == 0


def test_power_decay_mu1_against_oracle():
    f, prof = _solution(("power_decay", 2), 2, 3.0)
    assert prof.lam == pytest.approx(POWER_DECAY_N2_LAMBDA_A3, rel=1e-10)
    spec = linearized_eigs(prof, f, 2, k=3)
    assert spec.mu1 == pytest.approx(POWER_DECAY_N2_MU1_A3, rel=1e-5)
    assert np.all(np.diff(spec.eigenvalues) > 0)


@pytest.mark.parametrize("args,N,a", [(("gelfand",), 2, 1.0), (("gelfand",), 2, 6.0), (("power_decay", 3), 3, 2.0)])
def test_bisection_matches_dense(args, N, a):
    f, prof = _solution(args, N, a, M=128)
    diag, off, mass = assemble(prof, f, N)
    T = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    dense = eigh(T, eigvals_only=True)
    spec = linearized_eigs(prof, f, N, k=4)
    np.testing.assert_allclose(spec.eigenvalues, N * dense[:4], rtol=1e-8, atol=1e-8 * abs(dense[0]))
    assert spec.morse == sturm_count(diag, off, 0.0) == int(np.sum(dense < 0))


def test_upper_arm_has_morse_one():
    f, prof = _solution(("gelfand",), 2, 6.0)
    spec = linearized_eigs(prof, f, 2, k=2)
    assert spec.mu1 < 0 < spec.eigenvalues[1] and spec.morse == 1


def test_negative_profile_uses_reflection():
    f = make_nonlinearity("power_mix", 2, 2)
    lam = lambda_for_amplitude(f, 2, -0.5)
    neg = shoot(f, 2, lam, -0.5)
    pos_f = make_nonlinearity("power_mix", 2, 2)   # even N: reflection leaves f unchanged
    pos = shoot(pos_f, 2, lam, 0.5)
    assert linearized_eigs(neg, f, 2).mu1 == pytest.approx(linearized_eigs(pos, pos_f, 2).mu1, rel=1e-12)


def test_rejects_unconverged_and_tabulated():
    f = make_nonlinearity("gelfand")
    with pytest.raises(ValueError):
        linearized_eigs(shoot(f, 2, 0.5, 1.0), f, 2)
    g = from_callable("exp", np.exp)
    _, prof = _solution(("gelfand",), 2, 1.0)
    with pytest.raises(ValueError):
        linearized_eigs(prof, g, 2)


def test_power_decay_sweep(power_decay_n2_branch):
    rep = branch_stability_sweep(power_decay_n2_branch)
    assert rep.subhomogeneous and rep.all_stable and rep.monotone and rep.consistent
    assert all(p.morse == 0 and p.dlambda_da > 0 for p in power_decay_n2_branch.points)
    assert np.max(rep.residuals) < 1e-4
    assert not rep.implication_violations


def test_gelfand_sweep_crossing_at_fold(gelfand_n2_branch):
    rep = branch_stability_sweep(gelfand_n2_branch)
    fold = detect_fold(gelfand_n2_branch)
    assert len(rep.mu1_crossings) == 1
    assert abs(rep.mu1_crossings[0] - fold.amplitude) / fold.amplitude < 1e-2
    assert rep.consistent and not rep.subhomogeneous
    for p in gelfand_n2_branch.points:
        assert p.morse == (0 if p.mu1_lin > 0 else 1)


def test_power_sweep_degenerate():
    f = make_nonlinearity("power", 2)
    b = trace_branch(f, 2, 1, 1e-2, 1e2, 2)
    rep = branch_stability_sweep(b)
    assert rep.degenerate
    for p in b.points:
        spec = linearized_eigs(p.profile, f, 2)
        assert abs(p.mu1_lin) < 1e-5 * spec.scale


def test_identity_residual_is_second_order():
    f = make_nonlinearity("power_decay", 2)
    res = []
    for M in (1024, 2048, 4096):
        lam = lambda_for_amplitude(f, 2, 2.0, M=M)
        prof = shoot(f, 2, lam, 2.0, M)
        spec = linearized_eigs(prof, f, 2)
        res.append(identity_residual(prof, spec.phi1, spec.mu1, f, 2))
    orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    np.testing.assert_allclose(orders, 2.0, atol=0.02)
