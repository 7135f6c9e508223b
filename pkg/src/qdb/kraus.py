"""Kraus representations: extraction, minimality, unitary freedom, Radon-Nikodym order and extremality."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotCP, NotDominated, NotEquivalent, NotMinimal, NotPSD, NotUnital
from .linalg import DEFAULT_TOL, Tolerances, hermitian_eig, lq, numerical_rank, opnorm
from .superop import CharacteristicMatrix, SuperOperator, char_mu, characteristic_matrix, is_cp, standard_basis


@dataclass(frozen=True)
class KrausRep:
    """Phi(A) = sum_j V_j^* A V_j."""

    operators: tuple
    minimal: bool = False

    def __post_init__(self):
        ops = tuple(np.array(V, dtype=complex) for V in self.operators)
        for V in ops:
            V.setflags(write=False)
        object.__setattr__(self, "operators", ops)

    @classmethod
    def of(cls, operators, tol: Tolerances = DEFAULT_TOL) -> "KrausRep":
        ops = list(operators)
        return cls(tuple(ops), bool(ops) and numerical_rank(ops, tol) == len(ops))

    @property
    def n(self) -> int:
        return self.operators[0].shape[0]

    def __len__(self):
        return len(self.operators)

    def to_superop(self) -> SuperOperator:
        return SuperOperator.from_kraus(self.operators)

    def coefficient_rows(self) -> np.ndarray:
        """S with V_j = sum_a S_ja F_a in the standard matrix-unit basis."""
        return np.array([V.reshape(-1) for V in self.operators]) / np.sqrt(self.n)

    def is_unital(self, tol: Tolerances = DEFAULT_TOL) -> bool:
        total = sum(V.conj().T @ V for V in self.operators)
        return opnorm(total - np.eye(self.n)) <= tol.eq_abs * (1.0 + opnorm(total))


def _fix_phase(V: np.ndarray) -> np.ndarray:
    flat = V.reshape(-1)
    k = int(np.argmax(np.abs(flat)))
    if abs(flat[k]) == 0:
        return V
    return V * (abs(flat[k]) / flat[k])


def kraus_from_characteristic(C: CharacteristicMatrix, tol: Tolerances = DEFAULT_TOL) -> KrausRep:
    w, U = hermitian_eig(np.asarray(C.C), tol)
    top = max(float(w[0]), 0.0) if len(w) else 0.0
    if len(w) and w[-1] < -tol.psd_rel * max(1.0, top):
        raise NotPSD("characteristic matrix has a negative eigenvalue", witness=float(w[-1]))
    keep = w > tol.rank_rel * max(top, np.finfo(float).tiny)
    basis = C.basis
    ops = [_fix_phase(np.sqrt(lam) * basis.combine(U[:, k].conj())) for k, lam in zip(np.flatnonzero(keep), w[keep])]
    return KrausRep(tuple(ops), True)


def kraus_of(Phi: SuperOperator, tol: Tolerances = DEFAULT_TOL) -> KrausRep:
    return kraus_from_characteristic(characteristic_matrix(Phi, standard_basis(Phi.n)), tol)


def minimalize(K: KrausRep, tol: Tolerances = DEFAULT_TOL) -> KrausRep:
    return kraus_of(K.to_superop(), tol)


def _require_minimal(K: KrausRep, tol: Tolerances):
    if numerical_rank(K.operators, tol) != len(K):
        raise NotMinimal("Kraus operators are linearly dependent")


def kraus_unitary_equivalence(K1: KrausRep, K2: KrausRep, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """U with W_j = sum_k U_jk V_k, where K1 = {V_k} and K2 = {W_j}."""
    _require_minimal(K1, tol)
    _require_minimal(K2, tol)
    if len(K1) != len(K2):
        raise NotEquivalent("different cardinalities")
    P1, P2 = K1.to_superop(), K2.to_superop()
    if opnorm(P1.matrix - P2.matrix) > 1e-8 * (1.0 + P1.norm()):
        raise NotEquivalent("representations define different maps")
    S1, S2 = K1.coefficient_rows(), K2.coefficient_rows()
    U = S2 @ np.linalg.pinv(S1)
    if opnorm(U @ S1 - S2) > 1e-8 * (1 + opnorm(S2)) or opnorm(U.conj().T @ U - np.eye(len(U))) > 1e-8:
        raise NotEquivalent("no unitary relates the two families")
    return U


def gram_schmidt_solve(S: np.ndarray, C_target: np.ndarray, scale: float = 1.0):
    """Hermitian T with C_target = scale * S^* T S, and the relative residual of that fit.

    S = L W is the Gram-Schmidt (LQ) factorization of the rows of S; the orthonormal
    rows W give R = W C W^*, and T = L^{-*} R L^{-1}.
    """
    L, W = lq(S)
    R = W @ (C_target / scale) @ W.conj().T
    Linv = np.linalg.inv(L)
    T = Linv.conj().T @ R @ Linv
    T = 0.5 * (T + T.conj().T)
    resid = opnorm(scale * S.conj().T @ T @ S - C_target) / (1.0 + opnorm(C_target))
    return T, resid


def check_dominance(T: np.ndarray, resid: float, fit_tol: float = 1e-8, spec_tol: float = 1e-8):
    if resid > fit_tol:
        raise NotDominated("map lies outside the span of the dominating Kraus family", witness=resid)
    ev = np.linalg.eigvalsh(T)
    if ev[0] < -spec_tol or ev[-1] > 1.0 + spec_tol:
        raise NotDominated("T leaves [0, 1]", witness=(float(ev[0]), float(ev[-1])))


def arveson_T(Phi_kraus: KrausRep, Psi: SuperOperator, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """The unique T, 0 <= T <= 1, with Psi(A) = sum_ij T_ij V_i^* A V_j."""
    _require_minimal(Phi_kraus, tol)
    ok, witness = is_cp(Psi, tol)
    if not ok:
        raise NotCP("dominated map must be CP", witness=witness)
    T, resid = gram_schmidt_solve(Phi_kraus.coefficient_rows(), char_mu(Psi))
    check_dominance(T, resid)
    return T


def choi_extremal_unital(K: KrausRep, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Extremality among unital CP maps: {V_i^* V_j} linearly independent."""
    _require_minimal(K, tol)
    if not K.is_unital(tol):
        raise NotUnital("Kraus family is not unital")
    prods = [Vi.conj().T @ Vj for Vi in K.operators for Vj in K.operators]
    return numerical_rank(prods, tol) == len(prods)
