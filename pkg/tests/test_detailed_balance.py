import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import selfadjoint_gap
from qdb.detailed_balance import (
    antiunitary_conjugate,
    b_matrix,
    delta_s_nonextremal_witness,
    delta_s_order_test,
    delta_s_structure,
    delta_s_unital_extremal,
    gns_universal_check,
    kms_extremal_decomposition,
    kms_rn_test,
    kms_space_basis,
    kms_space_member,
    kms_unital_extremal,
)
from qdb.errors import NotCP, NotDeltaSSelfAdjoint, NotDominated, NotHermitianMap, NotKmsSelfAdjoint, RealnessViolated
from qdb.kraus import KrausRep
from qdb.linalg import haar_unitary, opnorm
from qdb.sampling import (
    cgauss,
    kraus_combination,
    random_cp,
    random_gns_cp,
    random_hermitian_map,
    random_kms_cp,
    random_kms_kraus,
    random_psd_contraction,
    random_sigma,
    random_spectrum,
)
from qdb.state import DensityMatrix, Measure, modular_power
from qdb.superop import SuperOperator, char_mu, is_cp, is_selfadjoint_m, matrix_unit_basis

S34 = DensityMatrix.from_spectrum([0.75, 0.25])


def single(V):
    return SuperOperator.from_kraus([V])


def rebuild(dec, n):
    return sum((w * single(V) for w, V in dec), SuperOperator.zero(n))


def test_b_matrix_kms_formula():
    rng = np.random.default_rng(0)
    s = random_sigma(3, rng)
    Phi = random_cp(3, rng)
    B = b_matrix(Phi, s, Measure.kms()).B
    lam = s.eigenvalues
    r = np.sqrt(np.array([lam[j] for i in range(3) for j in range(3)]))
    assert np.allclose(B, r[:, None] * char_mu(Phi, s) * r[None, :])


def test_b_matrix_maximally_mixed():
    rng = np.random.default_rng(1)
    Phi = random_hermitian_map(3, rng)
    s = DensityMatrix.maximally_mixed(3)
    for m in (Measure.gns(), Measure.bkm()):
        assert np.allclose(b_matrix(Phi, s, m).B, char_mu(Phi, s) / 3)


def test_b_matrix_commutes_for_kms_selfadjoint():
    rng = np.random.default_rng(2)
    s = random_sigma(3, rng)
    b = b_matrix(random_kms_cp(s, rng), s, Measure.kms())
    assert opnorm(b.B - antiunitary_conjugate(b.B, 3)) < 1e-10
    assert b_matrix(random_hermitian_map(3, rng), s, Measure.kms()).commutation_residual > 1e-6
    with pytest.raises(NotHermitianMap):
        b_matrix(1j * SuperOperator.identity(3), s, Measure.kms())


def test_kms_member_examples():
    rng = np.random.default_rng(3)
    H = cgauss(rng, (3, 3))
    assert kms_space_member(H + H.conj().T, DensityMatrix.maximally_mixed(3))[0]
    assert not kms_space_member(np.array([[0, 1], [0, 0]]), S34)[0]
    basis = kms_space_basis(S34)
    assert basis.omega[1] == pytest.approx(np.log(3))
    assert np.allclose(basis.elements[0], matrix_unit_basis(S34).elements[0])


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 5), st.integers(0, 10**6))
def test_kms_basis_members_and_real_orthonormal(n, seed):
    rng = np.random.default_rng(seed)
    s = random_sigma(n, rng)
    G = kms_space_basis(s).elements
    for g in G:
        assert kms_space_member(g, s)[1] < 1e-10
    gram = np.einsum("aij,bij->ab", G.conj(), G).real / n
    assert np.allclose(gram, np.eye(n * n), atol=1e-10)
    c = rng.standard_normal(n * n)
    assert kms_space_member(np.einsum("a,aij->ij", c, G), s)[0]


def test_kms_sign_trick():
    rng = np.random.default_rng(4)
    s = random_sigma(3, rng)
    V = random_kms_kraus(s, rng, M=1)[0]
    W = 1j * V
    assert not kms_space_member(W, s)[0]
    assert np.allclose(modular_power(s, -0.5, W), -W.conj().T)
    assert kms_space_member(1j * W, s)[0]


def test_kms_decomposition_single_and_mixed():
    rng = np.random.default_rng(5)
    s = random_sigma(3, rng)
    V = random_kms_kraus(s, rng, M=1)[0]
    dec = kms_extremal_decomposition(single(V), s)
    assert len(dec) == 1
    w, W = dec[0]
    assert np.allclose(np.sqrt(w) * W, V) or np.allclose(np.sqrt(w) * W, -V)
    u = DensityMatrix.maximally_mixed(3)
    Phi = random_kms_cp(u, rng)
    dec = kms_extremal_decomposition(Phi, u)
    for _, W in dec:
        assert np.allclose(W, W.conj().T)
    assert opnorm(rebuild(dec, 3).matrix - Phi.matrix) < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.integers(0, 10**6))
def test_kms_decomposition_property(n, seed):
    rng = np.random.default_rng(seed)
    s = random_sigma(n, rng)
    Phi = random_kms_cp(s, rng)
    dec = kms_extremal_decomposition(Phi, s)
    assert len(dec) <= n * n
    assert all(w > 0 and kms_space_member(V, s)[1] < 1e-9 for w, V in dec)
    assert opnorm(rebuild(dec, n).matrix - Phi.matrix) < 1e-9


def test_kms_decomposition_errors():
    rng = np.random.default_rng(6)
    s = random_sigma(3, rng)
    with pytest.raises(NotCP):
        kms_extremal_decomposition(-random_kms_cp(s, rng), s)
    with pytest.raises(NotKmsSelfAdjoint):
        kms_extremal_decomposition(random_cp(3, rng), s)


def test_kms_rn_examples():
    rng = np.random.default_rng(7)
    s = random_sigma(3, rng)
    K = KrausRep.of(random_kms_kraus(s, rng, M=3))
    Phi = K.to_superop()
    assert np.allclose(kms_rn_test(K, 0.3 * Phi, s), 0.3 * np.eye(3), atol=1e-9)
    T0 = random_psd_contraction(3, rng, real=True)
    assert np.abs(kms_rn_test(K, kraus_combination(K.operators, T0), s) - T0).max() < 1e-8
    Tc = random_psd_contraction(3, rng)
    Psi = kraus_combination(K.operators, Tc)
    assert not is_selfadjoint_m(Psi, s, Measure.kms())[0]
    with pytest.raises(RealnessViolated):
        kms_rn_test(K, Psi, s)
    with pytest.raises(NotDominated):
        kms_rn_test(K, 2 * Phi, s)


def test_kms_unital_extremal_examples():
    rng = np.random.default_rng(8)
    u = DensityMatrix.maximally_mixed(3)
    Q = haar_unitary(3, rng)
    R = Q @ np.diag([1, -1, 1]) @ Q.conj().T  # self-adjoint unitary lies in the KMS space at sigma = 1/N
    assert kms_unital_extremal(KrausRep.of([R]), u)
    u2 = DensityMatrix.maximally_mixed(2)
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Z = np.diag([1.0, -1.0]).astype(complex)
    three = KrausRep.of([np.eye(2) / np.sqrt(3), X / np.sqrt(3), Z / np.sqrt(3)])
    assert not kms_unital_extremal(three, u2)
    planted = KrausRep.of([np.eye(2) / np.sqrt(2), Z / np.sqrt(2)])
    assert not kms_unital_extremal(planted, u2)


def test_delta_s_smscp_family():
    rng = np.random.default_rng(9)
    s = random_sigma(3, rng)
    lam = s.eigenvalues
    E = matrix_unit_basis(s).elements
    i, j = (0, 1) if lam[0] > lam[1] else (1, 0)
    V = 0.4 * E[i * 3 + j]
    mu = lam[i] / lam[j]
    Phi = np.sqrt(mu) * single(V) + (1 / np.sqrt(mu)) * SuperOperator(3, np.kron(V, V.conj()))
    canon = delta_s_structure(Phi, s, 0.0)
    fams = [f for f in canon.families if f]
    assert len(fams) == 1 and len(fams[0]) == 1
    assert opnorm(canon.to_superop().matrix - Phi.matrix) < 1e-9
    assert gns_universal_check(Phi, s)


def test_delta_s_mu1_family():
    rng = np.random.default_rng(10)
    s = random_sigma(3, rng)
    V = s.from_eig(np.diag(rng.standard_normal(3)))
    Phi = SuperOperator(3, np.kron(V, V.T))
    canon = delta_s_structure(Phi, s)
    nonempty = [(mu, f) for mu, f in zip(canon.mus, canon.families) if f]
    assert len(nonempty) == 1 and nonempty[0][0] == 1.0
    assert gns_universal_check(Phi, s)


def test_delta_s_rejects_kms_only():
    rng = np.random.default_rng(11)
    s = DensityMatrix.from_spectrum(random_spectrum(3, rng, minimally_degenerate=True), haar_unitary(3, rng))
    Phi = random_kms_cp(s, rng)
    with pytest.raises(NotDeltaSSelfAdjoint):
        delta_s_structure(Phi, s)
    assert not gns_universal_check(Phi, s)
    assert not is_selfadjoint_m(Phi, s, Measure.gns())[0]


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.integers(0, 10**6), st.booleans())
def test_delta_s_verdict_independent_of_s(n, seed, planted):
    rng = np.random.default_rng(seed)
    s = random_sigma(n, rng)
    Phi = random_gns_cp(s, rng) if planted else random_kms_cp(s, rng)
    verdicts = []
    for sv in (0.0, 0.3):
        try:
            canon = delta_s_structure(Phi, s, sv)
            assert opnorm(canon.to_superop().matrix - Phi.matrix) < 1e-9
            verdicts.append(True)
        except NotDeltaSSelfAdjoint:
            verdicts.append(False)
    assert verdicts[0] == verdicts[1]
    if planted:
        assert verdicts[0]


def test_delta_s_order_examples():
    rng = np.random.default_rng(12)
    s = random_sigma(3, rng)
    Phi = random_gns_cp(s, rng, per_block=2)
    canon = delta_s_structure(Phi, s)
    for T in delta_s_order_test(canon, 0.5 * Phi):
        if T.size:
            assert np.allclose(T, 0.5 * np.eye(len(T)), atol=1e-8)
    T0 = [random_psd_contraction(len(f), rng, real=(mu == 1.0)) if f else np.zeros((0, 0))
          for mu, f in zip(canon.mus, canon.families)]
    got = delta_s_order_test(canon, canon.to_superop(T0))
    for a, b in zip(got, T0):
        if a.size:
            assert np.abs(a - b).max() < 1e-8
    with pytest.raises((NotDominated, RealnessViolated)):
        delta_s_order_test(canon, random_kms_cp(s, rng) * 1e-3 + 0.5 * Phi)


def test_delta_s_extremal_examples():
    rng = np.random.default_rng(13)
    s = random_sigma(3, rng)
    Q = s.from_eig(np.diag([1.0, -1.0, 1.0]))
    canon = delta_s_structure(SuperOperator(3, np.kron(Q, Q.T)), s)
    assert delta_s_unital_extremal(canon)
    assert delta_s_nonextremal_witness(canon) is None
    u = DensityMatrix.maximally_mixed(2)
    Zs = [np.eye(2), np.diag([1.0, -1.0]), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]])]
    Phi = sum((0.25 * SuperOperator(2, np.kron(Z, Z.T)) for Z in Zs), SuperOperator.zero(2))
    canon = delta_s_structure(Phi, u)
    assert not delta_s_unital_extremal(canon)
    Psi = delta_s_nonextremal_witness(canon)
    assert opnorm(Psi(np.eye(2)) - np.eye(2)) < 1e-9
    assert is_cp(Phi - 0.5 * Psi)[0] and is_cp(Psi)[0]
    assert opnorm(Psi.matrix - Phi.matrix) > 1e-6


@pytest.mark.parametrize("m", [Measure.gns(), Measure.kms(), Measure.bkm(), Measure.ms(0.2)], ids=lambda m: m.name())
def test_gns_selfadjoint_brute_force(m):
    rng = np.random.default_rng(14)
    s = random_sigma(2, rng)
    assert selfadjoint_gap(random_gns_cp(s, rng), s.matrix, m.atoms, m.uniform) < 1e-9
