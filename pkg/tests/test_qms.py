import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import quad_lyapunov_sqrt
from qdb.detailed_balance import kms_space_member
from qdb.errors import (
    MembershipFailed,
    NotCP,
    NotKmsSelfAdjoint,
    NotMinimal,
    NotPureHamiltonian,
    NotSelfAdjoint,
    TraceConditionViolated,
)
from qdb.kraus import KrausRep
from qdb.linalg import haar_unitary, opnorm
from qdb.qms import (
    fagnola_umanita_check,
    hamiltonian_part_detect,
    kms_complete_generator,
    lyapunov_residual,
    lyapunov_solve_sqrt,
    pointedness_witness,
    symmetrize_kraus,
)
from qdb.sampling import (
    cgauss,
    kraus_combination,
    random_cp,
    random_hamiltonian,
    random_kms_kraus,
    random_psd_contraction,
    random_sigma,
)
from qdb.state import DensityMatrix, Measure
from qdb.superop import (
    SuperOperator,
    commutator_map,
    decompose_HS,
    is_cp,
    is_qms_generator,
    sandwich,
    selfadjoint_residual,
)

S34 = DensityMatrix.from_spectrum([0.75, 0.25])


def herm(rng, n):
    A = cgauss(rng, (n, n))
    return A + A.conj().T


def test_lyapunov_examples():
    assert np.allclose(lyapunov_solve_sqrt(S34, np.zeros((2, 2))), 0)
    u = DensityMatrix.maximally_mixed(3)
    X = herm(np.random.default_rng(0), 3)
    assert np.allclose(lyapunov_solve_sqrt(u, X), X / (2 * np.sqrt(1 / 3)))
    X2 = np.array([[0, 1], [1, 0]], dtype=complex)
    K = lyapunov_solve_sqrt(S34, X2)
    assert K[0, 1] == pytest.approx(1 / (np.sqrt(0.75) + np.sqrt(0.25)))
    assert lyapunov_residual(S34, K, X2) < 1e-12
    with pytest.raises(NotSelfAdjoint):
        lyapunov_solve_sqrt(S34, np.array([[0, 1], [0, 0]]))


def test_lyapunov_matches_integral():
    rng = np.random.default_rng(1)
    s = random_sigma(3, rng)
    X = herm(rng, 3)
    assert np.abs(lyapunov_solve_sqrt(s, X) - quad_lyapunov_sqrt(s.matrix, X)).max() < 1e-8


def test_complete_zero_and_maximally_mixed():
    form = kms_complete_generator(SuperOperator.zero(2), S34)
    assert form.to_superop().norm() < 1e-14
    rng = np.random.default_rng(2)
    u = DensityMatrix.maximally_mixed(3)
    V = herm(rng, 3)
    V = V - np.trace(V) / 3 * np.eye(3)
    form = kms_complete_generator(SuperOperator.from_kraus([V]), u)
    assert np.allclose(form.K, 0, atol=1e-12)
    assert np.allclose(form.G, -0.5 * V @ V)


def _check_completed(Psi, s):
    form = kms_complete_generator(Psi, s)
    L = form.to_superop()
    n = s.n
    r = np.sqrt(s.eigenvalues)
    sh = s.power(0.5)
    assert opnorm(L(np.eye(n))) < 1e-12
    assert selfadjoint_residual(L, s, Measure.kms()) < 1e-9
    assert abs(np.trace(form.K)) < 1e-12
    assert lyapunov_residual(s, form.K, -1j * (sh @ form.H - form.H @ sh)) < 1e-12
    assert is_qms_generator(L, s)
    assert r.shape == (n,)
    return form, L


def test_complete_single_offdiagonal():
    V = np.array([[0, 1], [1 / np.sqrt(3), 0]], dtype=complex)
    assert kms_space_member(V, S34)[0]
    _check_completed(SuperOperator.from_kraus([V]), S34)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 4), st.integers(0, 10**6))
def test_completion_bijection_and_order(n, seed):
    rng = np.random.default_rng(seed)
    s = random_sigma(n, rng)
    ops = random_kms_kraus(s, rng, M=int(rng.integers(1, n * n)), traceless=True)
    Psi = SuperOperator.from_kraus(ops)
    form, L = _check_completed(Psi, s)
    perp = decompose_HS(L, s).perp
    assert opnorm(perp.matrix - Psi.matrix) < 1e-9
    assert opnorm(kms_complete_generator(perp, s).to_superop().matrix - L.matrix) < 1e-9
    T = random_psd_contraction(len(ops), rng, real=True, top=float(rng.uniform(0.5, 1.5)))
    Psi2 = kraus_combination(ops, T)
    L2 = kms_complete_generator(Psi2, s).to_superop()
    assert is_cp(Psi - Psi2)[0] == is_qms_generator(L - L2, s)


def test_complete_errors():
    rng = np.random.default_rng(3)
    s = random_sigma(3, rng)
    with pytest.raises(NotCP):
        kms_complete_generator(-SuperOperator.from_kraus(random_kms_kraus(s, rng, M=1)), s)
    with pytest.raises(NotKmsSelfAdjoint):
        kms_complete_generator(random_cp(3, rng), s)


def test_fu_check_members_give_identity():
    rng = np.random.default_rng(4)
    s = random_sigma(3, rng)
    V = random_kms_kraus(s, rng, M=3, traceless=True)
    form = kms_complete_generator(SuperOperator.from_kraus(V), s)
    rep = fagnola_umanita_check(form.G, KrausRep.of(V), s)
    assert rep.passed
    assert np.allclose(rep.U_tilde, np.eye(3), atol=1e-8)


def test_fu_check_mixed_family():
    rng = np.random.default_rng(5)
    s = random_sigma(3, rng)
    V = random_kms_kraus(s, rng, M=3, traceless=True)
    form = kms_complete_generator(SuperOperator.from_kraus(V), s)
    U0 = haar_unitary(3, rng)
    W = KrausRep.of([sum(U0[j, k] * V[k] for k in range(3)) for j in range(3)])
    rep = fagnola_umanita_check(form.G, W, s)
    assert rep.passed
    assert opnorm(rep.U_tilde - U0 @ U0.T) < 1e-8
    sym = symmetrize_kraus(W, rep.U_tilde, s)
    for X in sym.operators:
        assert kms_space_member(X, s)[1] < 1e-8
    assert opnorm(sym.to_superop().matrix - W.to_superop().matrix) < 1e-9


def test_fu_check_planted_violation():
    rng = np.random.default_rng(6)
    s = random_sigma(3, rng)
    form = kms_complete_generator(SuperOperator.from_kraus(random_kms_kraus(s, rng, M=2, traceless=True)), s)
    ops = list(form.kraus.operators)
    P = cgauss(rng, (3, 3))
    ops[1] = ops[1] + 0.3 * (P - np.trace(P) / 3 * np.eye(3))
    rep = fagnola_umanita_check(form.G, KrausRep.of(ops), s)
    assert not rep.passed and rep.witness is not None
    with pytest.raises(TraceConditionViolated):
        fagnola_umanita_check(form.G, KrausRep.of([np.eye(3)]), s)
    with pytest.raises(NotMinimal):
        fagnola_umanita_check(form.G, KrausRep.of([ops[0], ops[0]]), s)


def test_symmetrize_diagonal_phases():
    rng = np.random.default_rng(7)
    s = random_sigma(3, rng)
    V = random_kms_kraus(s, rng, M=2, traceless=True)
    th = np.array([0.7, -2.1])
    W = KrausRep.of([np.exp(1j * t / 2) * v for t, v in zip(th, V)])
    Ut = np.diag(np.exp(1j * th))
    rep = fagnola_umanita_check(np.zeros((3, 3)), W, s)
    assert np.allclose(rep.U_tilde, Ut, atol=1e-8)
    sym = symmetrize_kraus(W, Ut, s)
    for a, b in zip(sym.operators, V):
        assert np.allclose(a, b, atol=1e-8)
    same = symmetrize_kraus(KrausRep.of(V), np.eye(2), s)
    for a, b in zip(same.operators, V):
        assert np.allclose(a, b)


def test_symmetrize_wrong_unitary():
    rng = np.random.default_rng(8)
    s = random_sigma(3, rng)
    V = random_kms_kraus(s, rng, M=2, traceless=True)
    with pytest.raises(MembershipFailed):
        symmetrize_kraus(KrausRep.of(V), np.diag([1.0, -1.0]).astype(complex) * 1j, s)


def test_hamiltonian_detect():
    rng = np.random.default_rng(9)
    s = random_sigma(3, rng)
    H0 = herm(rng, 3)
    H = hamiltonian_part_detect(commutator_map(H0), s)
    shift = H0 - H
    assert np.allclose(shift, shift[0, 0] * np.eye(3), atol=1e-9)
    V = cgauss(rng, (3, 3))
    VV = V.conj().T @ V
    I = np.eye(3)
    lind = SuperOperator.from_kraus([V]) - 0.5 * (sandwich(VV, I) + sandwich(I, VV))
    with pytest.raises(NotPureHamiltonian):
        hamiltonian_part_detect(lind, s)


def test_plus_minus_generator_implies_hamiltonian():
    rng = np.random.default_rng(10)
    for _ in range(10):
        L = commutator_map(random_hamiltonian(3, rng))
        assert is_qms_generator(L) and is_qms_generator(-L)
        hamiltonian_part_detect(L)


def test_pointedness_examples():
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    from qdb.superop import is_selfadjoint_m
    ok, r = is_selfadjoint_m(commutator_map(X), S34, Measure.kms())
    assert not ok and r > 1e-6
    D = S34.from_eig(np.diag([0.3, -0.3]))
    assert opnorm(D @ S34.matrix - S34.matrix @ D) < 1e-14
    rng = np.random.default_rng(11)
    for m in (Measure.gns(), Measure.kms(), Measure.bkm()):
        w = pointedness_witness(m, random_sigma(3, rng), 100, rng)
        assert w["false_passes"] == 0 and w["min_residual"] > 1e-6
