"""Evenly self-adjoint maps and generators, and the passage from KMS to BKM detailed balance.

Indices i, j below are 0-based positions in the eigenvalue list of sigma.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detailed_balance import gns_universal_check
from .errors import (
    BadIndices,
    EqualIndices,
    NotCP,
    NotKmsSelfAdjoint,
    NotMinimallyDegenerate,
    StructureViolation,
)
from .linalg import DEFAULT_TOL, Tolerances, is_psd, opnorm
from .state import DensityMatrix, Measure, apply_Mm_inverse
from .superop import (
    SuperOperator,
    char_mu,
    is_cp,
    is_selfadjoint_m,
    kernel_superop,
    matrix_unit_basis,
    reduced_characteristic,
    require_hermitian,
    sandwich,
)


def _units(sigma: DensityMatrix):
    n = sigma.n
    return matrix_unit_basis(sigma).elements.reshape(n, n, n, n)


def psi_ij(sigma: DensityMatrix, i: int, j: int) -> SuperOperator:
    """(E_ij A E_ij + E_ji A E_ji)/2 for i < j, and (E_ij A E_ij - E_ji A E_ji)/(2i) for i > j."""
    if i == j:
        raise EqualIndices("psi_ij needs i != j")
    E = _units(sigma)
    a = sandwich(E[i, j], E[i, j])
    b = sandwich(E[j, i], E[j, i])
    if i < j:
        return 0.5 * (a + b)
    return (a - b) * (1.0 / 2j)


def is_minimally_degenerate(sigma: DensityMatrix, gap: float = 1e-8) -> bool:
    lam = sigma.eigenvalues
    n = sigma.n
    r = np.sort([lam[i] / lam[j] for i in range(n) for j in range(n) if i != j])
    if len(r) < 2:
        return True
    return bool(np.all(np.diff(r) > gap * r[1:]))


def default_even_family():
    return [Measure.kms(), Measure(((0.0, 0.5), (1.0, 0.5)), 0.0, label="ms(0)"), Measure.bkm(), Measure.ms(0.3)]


def evenly_selfadjoint_residuals(Phi: SuperOperator, sigma: DensityMatrix, family=None, tol: Tolerances = DEFAULT_TOL):
    family = default_even_family() if family is None else family
    return {m.name(): is_selfadjoint_m(Phi, sigma, m, tol) for m in family}


def evenly_selfadjoint_test(Phi: SuperOperator, sigma: DensityMatrix, family=None, tol: Tolerances = DEFAULT_TOL) -> bool:
    require_hermitian(Phi, tol)
    return all(ok for ok, _ in evenly_selfadjoint_residuals(Phi, sigma, family, tol).values())


@dataclass(frozen=True)
class EvenDecomposition:
    phi0: SuperOperator
    T: np.ndarray

    def assemble(self, sigma: DensityMatrix) -> SuperOperator:
        return assemble_even(self.phi0, self.T, sigma)


def assemble_even(phi0: SuperOperator, T, sigma: DensityMatrix) -> SuperOperator:
    out = phi0
    n = sigma.n
    for i in range(n):
        for j in range(n):
            if i != j and T[i, j] != 0:
                out = out + T[i, j] * psi_ij(sigma, i, j)
    return out


def even_decompose(Phi: SuperOperator, sigma: DensityMatrix, generator: bool = False,
                   tol: Tolerances = DEFAULT_TOL) -> EvenDecomposition:
    """Phi = Phi0 + sum_{i != j} T_ij Psi_ij with Phi0 GNS self-adjoint."""
    if not is_minimally_degenerate(sigma):
        raise NotMinimallyDegenerate("spectral ratios of sigma are not distinct")
    require_hermitian(Phi, tol)
    n = sigma.n
    C = char_mu(Phi, sigma)
    scale = 1e-9 * (1.0 + opnorm(C))
    for a in range(n * n):
        ai, aj = divmod(a, n)
        for b in range(n * n):
            bi, bj = divmod(b, n)
            allowed = (ai == aj and bi == bj) or a == b or (ai == bj and aj == bi)
            if not allowed and abs(C[a, b]) > scale:
                raise StructureViolation("entry outside the even block pattern", witness=((ai, aj), (bi, bj)))
    T = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            w = C[i * n + j, j * n + i]
            T[i, j] = 2.0 * w.real
            T[j, i] = -2.0 * w.imag
    phi0 = Phi - assemble_even(SuperOperator.zero(n), T, sigma)
    if not gns_universal_check(phi0, sigma, tol=Tolerances(eq_abs=1e-9)):
        raise StructureViolation("remainder is not GNS self-adjoint")
    if generator:
        R = reduced_characteristic(phi0, sigma, tol)
        if not is_psd(0.5 * (R + R.conj().T), tol)[0]:
            raise StructureViolation("GNS part of the generator is not a generator")
    return EvenDecomposition(phi0, T)


def _check_alpha(alpha, n):
    a1, a2 = alpha
    if not (0 <= a1 < a2 < n):
        raise BadIndices(f"need 0 <= a1 < a2 < {n}, got {alpha}")
    return a1, a2


def even_extreme_cp(sigma: DensityMatrix, alpha, a: float, theta: float) -> SuperOperator:
    """a (l1 E_a'^. E_a + l2 E_a . E_a' + sqrt(l1 l2)(e^{i theta} E_a' . E_a' + e^{-i theta} E_a . E_a))."""
    a1, a2 = _check_alpha(alpha, sigma.n)
    E = _units(sigma)
    l1, l2 = sigma.eigenvalues[a1], sigma.eigenvalues[a2]
    Ea, Ep = E[a1, a2], E[a2, a1]
    g = np.sqrt(l1 * l2)
    return a * (l1 * sandwich(Ep, Ea) + l2 * sandwich(Ea, Ep)
                + g * np.exp(1j * theta) * sandwich(Ep, Ep) + g * np.exp(-1j * theta) * sandwich(Ea, Ea))


def even_extreme_qms(sigma: DensityMatrix, alpha, a: float, theta: float) -> SuperOperator:
    """even_extreme_cp plus the drift -(a sqrt(N)/2)(DA + AD), D = l1 E_(a2,a2) + l2 E_(a1,a1)."""
    a1, a2 = _check_alpha(alpha, sigma.n)
    n = sigma.n
    E = _units(sigma)
    l1, l2 = sigma.eigenvalues[a1], sigma.eigenvalues[a2]
    D = l1 * E[a2, a2] + l2 * E[a1, a1]
    I = np.eye(n)
    drift = (-a * np.sqrt(n) / 2.0) * (sandwich(D, I) + sandwich(I, D))
    return even_extreme_cp(sigma, alpha, a, theta) + drift


def bkm_kernel(sigma: DensityMatrix) -> np.ndarray:
    """k_ij = sqrt(l_i l_j) (ln l_i - ln l_j)/(l_i - l_j), the ratio of geometric to logarithmic mean."""
    return sigma.mean_kernel(Measure.kms()) / sigma.mean_kernel(Measure.bkm())


def bkm_transfer(Phi: SuperOperator, sigma: DensityMatrix, tol: Tolerances = DEFAULT_TOL) -> SuperOperator:
    ok, witness = is_cp(Phi, tol)
    if not ok:
        raise NotCP("input must be CP", witness=witness)
    ok, r = is_selfadjoint_m(Phi, sigma, Measure.kms(), tol)
    if not ok:
        raise NotKmsSelfAdjoint("input must be KMS self-adjoint", witness=r)
    return kernel_superop(sigma, bkm_kernel(sigma)) @ Phi


def bkm_minverse(sigma: DensityMatrix, A):
    return apply_Mm_inverse(sigma, Measure.bkm(), A)


def bkm_minverse_superop(sigma: DensityMatrix) -> SuperOperator:
    return kernel_superop(sigma, 1.0 / sigma.mean_kernel(Measure.bkm()))
