import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import choi_psd, quad_bkm_minverse, quad_transfer_entry, selfadjoint_gap
from qdb.detailed_balance import delta_s_structure, gns_universal_check
from qdb.errors import BadIndices, EqualIndices, NotCP, NotKmsSelfAdjoint, NotMinimallyDegenerate, StructureViolation
from qdb.even_bkm import (
    assemble_even,
    bkm_kernel,
    bkm_minverse,
    bkm_minverse_superop,
    bkm_transfer,
    even_decompose,
    even_extreme_cp,
    even_extreme_qms,
    evenly_selfadjoint_test,
    is_minimally_degenerate,
    psi_ij,
)
from qdb.linalg import haar_unitary, opnorm
from qdb.n2 import N2Params, n2_generator
from qdb.qms import kms_complete_generator
from qdb.sampling import (
    cgauss,
    lindblad_unital_channel,
    random_cp,
    random_gns_cp,
    random_kms_cp,
    random_kms_kraus,
    random_sigma,
    random_spectrum,
)
from qdb.state import DensityMatrix, Measure, apply_Mm
from qdb.superop import (
    SuperOperator,
    dagger,
    is_cp,
    is_hermitian_map,
    is_qms_generator,
    char_mu,
    is_selfadjoint_m,
    mm_superop,
    selfadjoint_residual,
)

S34 = DensityMatrix.from_spectrum([0.75, 0.25])
FAMILY = [Measure.kms(), Measure.ms(0.0), Measure.bkm()]


def md_sigma(n, rng):
    return DensityMatrix.from_spectrum(random_spectrum(n, rng, minimally_degenerate=True), haar_unitary(n, rng))


def test_psi_examples():
    rng = np.random.default_rng(0)
    s = md_sigma(3, rng)
    for i, j in ((0, 1), (1, 0), (0, 2), (2, 1)):
        P = psi_ij(s, i, j)
        assert opnorm(P(np.eye(3))) < 1e-14
        assert is_hermitian_map(P)
        assert evenly_selfadjoint_test(P, s, FAMILY)
        assert not is_selfadjoint_m(P, s, Measure.gns())[0]
    with pytest.raises(EqualIndices):
        psi_ij(s, 1, 1)


def test_psi_brute_force_even():
    s = DensityMatrix.from_spectrum([0.7, 0.3], haar_unitary(2, np.random.default_rng(1)))
    P = psi_ij(s, 0, 1)
    for m in FAMILY:
        assert selfadjoint_gap(P, s.matrix, m.atoms, m.uniform) < 1e-9
    g = Measure.gns()
    assert selfadjoint_gap(P, s.matrix, g.atoms, g.uniform) > 1e-3


def test_minimally_degenerate_examples():
    assert is_minimally_degenerate(S34)
    assert is_minimally_degenerate(DensityMatrix.from_spectrum([0.5, 0.3, 0.2]))
    assert not is_minimally_degenerate(DensityMatrix.from_spectrum([0.4, 0.4, 0.2]))
    # 0.4/0.2 = 0.2/0.1
    assert not is_minimally_degenerate(DensityMatrix.from_spectrum([0.4, 0.3, 0.2, 0.1]))


def test_evenly_selfadjoint_examples():
    rng = np.random.default_rng(2)
    s = md_sigma(3, rng)
    phi0 = random_gns_cp(s, rng)
    assert evenly_selfadjoint_test(phi0, s)
    T = rng.standard_normal((3, 3))
    np.fill_diagonal(T, 0)
    assert evenly_selfadjoint_test(assemble_even(phi0, T, s), s)
    K = random_kms_cp(s, rng)
    assert not is_selfadjoint_m(K, s, Measure.ms(0.0))[0]
    assert not evenly_selfadjoint_test(K, s)


def test_even_decompose_examples():
    rng = np.random.default_rng(3)
    s = md_sigma(3, rng)
    phi0 = random_gns_cp(s, rng)
    d = even_decompose(phi0, s)
    assert np.abs(d.T).max() < 1e-9
    Q = s.from_eig(np.diag([1.0, -1.0, 1.0]))
    unital = SuperOperator(3, np.kron(Q, Q.T))
    T = np.zeros((3, 3))
    T[0, 1] = 0.2
    d = even_decompose(assemble_even(unital, T, s), s)
    assert opnorm(d.phi0(np.eye(3)) - np.eye(3)) < 1e-9
    with pytest.raises(NotMinimallyDegenerate):
        even_decompose(phi0, DensityMatrix.from_spectrum([0.4, 0.4, 0.2]))
    with pytest.raises(StructureViolation) as exc:
        even_decompose(random_kms_cp(s, rng), s)
    assert exc.value.witness is not None


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.integers(0, 10**6))
def test_even_decompose_planted(n, seed):
    rng = np.random.default_rng(seed)
    s = md_sigma(n, rng)
    phi0 = random_gns_cp(s, rng)
    T = rng.standard_normal((n, n))
    np.fill_diagonal(T, 0)
    d = even_decompose(assemble_even(phi0, T, s), s)
    assert np.abs(d.T - T).max() < 1e-9
    assert opnorm(d.phi0.matrix - phi0.matrix) < 1e-9
    assert gns_universal_check(d.phi0, s)
    assert opnorm(d.assemble(s).matrix - assemble_even(phi0, T, s).matrix) < 1e-9


def test_even_extreme_cp():
    rng = np.random.default_rng(4)
    s = md_sigma(3, rng)
    W = even_extreme_cp(s, (0, 2), 0.7, 1.1)
    assert is_cp(W)[0] and choi_psd(W, 3)
    assert evenly_selfadjoint_test(W, s)
    assert not is_selfadjoint_m(W, s, Measure.gns())[0]
    avg = 0.5 * (W + even_extreme_cp(s, (0, 2), 0.7, 1.1 + np.pi))
    assert gns_universal_check(avg, s)
    delta_s_structure(avg, s)
    with pytest.raises(BadIndices):
        even_extreme_cp(s, (2, 0), 1.0, 0.0)
    with pytest.raises(BadIndices):
        even_extreme_cp(s, (0, 3), 1.0, 0.0)


def test_even_extreme_cp_is_on_the_boundary():
    rng = np.random.default_rng(5)
    s = md_sigma(3, rng)
    W = even_extreme_cp(s, (0, 1), 1.0, 0.3)
    # the coefficient block on {(0,1),(1,0)} is singular, so the map is a single Kraus term
    assert np.linalg.matrix_rank(char_mu(W, s), tol=1e-10) == 1


def test_even_extreme_qms():
    rng = np.random.default_rng(6)
    s = md_sigma(3, rng)
    L = even_extreme_qms(s, (1, 2), 0.6, -0.4)
    assert opnorm(L(np.eye(3))) < 1e-14
    assert is_qms_generator(L, s)
    assert evenly_selfadjoint_test(L, s)
    assert not is_selfadjoint_m(L, s, Measure.gns())[0]


@pytest.mark.parametrize("m", [Measure.bkm(), Measure.ms(0.2)], ids=lambda m: m.name())
def test_even_extreme_qms_matches_two_level_family(m):
    U = haar_unitary(2, np.random.default_rng(7))
    for a in (0.3, 1.0):
        for th in (0.0, 0.9):
            p = N2Params(0.7, m, a=a, zeta=a * np.sqrt(0.21) * np.exp(1j * th), x=a / 2, U=U)
            assert opnorm(n2_generator(p).matrix - even_extreme_qms(p.sigma, (0, 1), a, th).matrix) < 1e-12


def test_inclusion_witnesses():
    rng = np.random.default_rng(8)
    for _ in range(10):
        s = md_sigma(3, rng)
        W = random_gns_cp(s, rng) + 0.1 * even_extreme_cp(s, (0, 1), 1.0, float(rng.uniform(0, 6)))
        assert is_cp(W)[0] and evenly_selfadjoint_test(W, s) and not is_selfadjoint_m(W, s, Measure.gns())[0]
        K = random_kms_cp(s, rng)
        assert is_selfadjoint_m(K, s, Measure.kms())[0] and not evenly_selfadjoint_test(K, s)


def commuting_part(s, Phi, m):
    """Keep the entries of Phi (sigma eigenbasis) that connect equal kernel values, in both a map and its pairing."""
    n = s.n
    U = s.eigenvectors
    into = np.kron(U.conj().T, U.T)
    back = np.kron(U, U.conj())
    M = into @ Phi.matrix @ back
    d = s.mean_kernel(m).reshape(-1)
    p = np.array([j * n + i for i in range(n) for j in range(n)])
    same = np.abs(d[:, None] - d[None, :]) < 1e-12
    mask = same & same[np.ix_(p, p)]
    return SuperOperator(n, back @ (M * mask) @ into)


@pytest.mark.parametrize("m", [Measure.bkm(), Measure.ms(0.3), Measure.gns()], ids=lambda m: m.name())
def test_commuting_with_Mm_symmetrizes(m):
    rng = np.random.default_rng(9)
    s = random_sigma(3, rng)
    M = mm_superop(s, m)
    Phi = commuting_part(s, random_cp(3, rng), m)
    assert is_hermitian_map(Phi)
    assert opnorm((M @ Phi - Phi @ M).matrix) < 1e-10
    assert is_selfadjoint_m(0.5 * (Phi + dagger(Phi)), s, m)[0]


def test_bkm_kernel_examples():
    assert bkm_kernel(S34)[0, 1] == pytest.approx(0.951426, abs=1e-6)
    assert bkm_kernel(S34)[0, 1] == pytest.approx(quad_transfer_entry(0.75, 0.25), abs=1e-10)
    assert np.allclose(bkm_kernel(DensityMatrix.maximally_mixed(4)), 1)


def test_bkm_transfer_examples():
    rng = np.random.default_rng(10)
    u = DensityMatrix.maximally_mixed(3)
    Phi = random_kms_cp(u, rng)
    assert opnorm(bkm_transfer(Phi, u).matrix - Phi.matrix) < 1e-12
    s = random_sigma(3, rng)
    Psi = bkm_transfer(SuperOperator.identity(3), s)
    assert opnorm(Psi(np.eye(3)) - np.eye(3)) < 1e-12
    assert is_selfadjoint_m(Psi, s, Measure.bkm())[0] and is_cp(Psi)[0]
    with pytest.raises(NotCP):
        bkm_transfer(-Phi, u)
    with pytest.raises(NotKmsSelfAdjoint):
        bkm_transfer(random_cp(3, rng), s)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 4), st.integers(0, 10**6))
def test_bkm_transfer_property(n, seed):
    rng = np.random.default_rng(seed)
    s = random_sigma(n, rng)
    L = kms_complete_generator(SuperOperator.from_kraus(random_kms_kraus(s, rng, M=2, traceless=True)), s).to_superop()
    Phi = lindblad_unital_channel(L, 0.5)
    out = bkm_transfer(Phi, s)
    assert selfadjoint_residual(out, s, Measure.bkm()) < 1e-9
    assert opnorm(out(np.eye(n)) - np.eye(n)) < 1e-9
    assert is_cp(out)[0]


def test_bkm_minverse():
    rng = np.random.default_rng(11)
    s = random_sigma(3, rng)
    A = cgauss(rng, (3, 3))
    assert np.allclose(bkm_minverse(s, apply_Mm(s, Measure.bkm(), A)), A)
    assert np.abs(bkm_minverse(s, A) - quad_bkm_minverse(s.matrix, A)).max() < 1e-8
    u = DensityMatrix.maximally_mixed(4)
    B = cgauss(rng, (4, 4))
    assert np.allclose(bkm_minverse(u, B), 4 * B)
    for n in range(2, 7):
        S = DensityMatrix.from_spectrum(random_spectrum(n, rng, floor=0.005), haar_unitary(n, rng))
        assert is_cp(bkm_minverse_superop(S))[0]
        assert choi_psd(bkm_minverse_superop(S), n)


def test_bkm_multiplication_not_cp():
    s = DensityMatrix.from_spectrum([0.7, 0.2, 0.1])
    assert not is_cp(mm_superop(s, Measure.bkm()))[0]
