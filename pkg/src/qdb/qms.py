"""Building and certifying quantum Markov semigroup generators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detailed_balance import kms_space_member
from .errors import (
    InternalInconsistency,
    MembershipFailed,
    NotCP,
    NotKmsSelfAdjoint,
    NotMinimal,
    NotPureHamiltonian,
    NotSelfAdjoint,
    PreconditionViolated,
    TakagiFailed,
    TraceConditionViolated,
    NotSymmetricUnitary,
)
from .kraus import KrausRep, kraus_of
from .linalg import DEFAULT_TOL, Tolerances, numerical_rank, opnorm, takagi_symmetric_unitary
from .state import DensityMatrix, Measure, modular_power
from .superop import (
    SuperOperator,
    commutator_map,
    decompose_HS,
    is_cp,
    is_hermitian_map,
    is_selfadjoint_m,
    reduced_characteristic,
    selfadjoint_residual,
)


@dataclass(frozen=True)
class LindbladForm:
    """L(A) = G^* A + A G + sum_j V_j^* A V_j."""

    G: np.ndarray
    kraus: KrausRep

    @property
    def H(self) -> np.ndarray:
        return 0.5 * (self.G + self.G.conj().T)

    @property
    def K(self) -> np.ndarray:
        return (self.G - self.G.conj().T) / 2j

    def to_superop(self) -> SuperOperator:
        return SuperOperator.from_lindblad(self.G, self.kraus.operators)


def lyapunov_solve_sqrt(sigma: DensityMatrix, X, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """The unique K with sigma^{1/2} K + K sigma^{1/2} = X."""
    X = np.asarray(X, dtype=complex)
    if opnorm(X - X.conj().T) > tol.eq_abs * (1.0 + opnorm(X)):
        raise NotSelfAdjoint("right-hand side must be self-adjoint")
    r = np.sqrt(sigma.eigenvalues)
    return sigma.from_eig(sigma.to_eig(X) / (r[:, None] + r[None, :]))


def lyapunov_residual(sigma: DensityMatrix, K, X) -> float:
    s = sigma.power(0.5)
    return opnorm(s @ K + K @ s - X)


def kms_complete_generator(Psi: SuperOperator, sigma: DensityMatrix, tol: Tolerances = DEFAULT_TOL) -> LindbladForm:
    """The KMS self-adjoint generator whose dissipative part is Psi.

    Psi is first projected onto the complement of {A -> XA + AY}, which amounts to
    re-centering its Kraus operators to trace zero. The drift is G = H + iK with
    H = -Psi(1)/2, forced by L(1) = 0, and K the Lyapunov solution that makes
    Delta^{-1/2} G = G^*.
    """
    ok, witness = is_cp(Psi, tol)
    if not ok:
        raise NotCP("dissipative part must be CP", witness=witness)
    ok, r = is_selfadjoint_m(Psi, sigma, Measure.kms(), tol)
    if not ok:
        raise NotKmsSelfAdjoint("dissipative part must be KMS self-adjoint", witness=r)
    n = sigma.n
    I = np.eye(n)
    perp = decompose_HS(Psi, sigma).perp
    ops = [V - np.trace(V) / n * I for V in kraus_of(perp, tol).operators] if perp.norm() > 0 else []
    kraus = KrausRep(tuple(ops), True)
    P = SuperOperator.from_kraus(ops) if ops else SuperOperator.zero(n)
    H = -0.5 * P(I)
    H = 0.5 * (H + H.conj().T)
    s = sigma.power(0.5)
    K = lyapunov_solve_sqrt(sigma, -1j * (s @ H - H @ s), tol)
    K = 0.5 * (K + K.conj().T)
    form = LindbladForm(H + 1j * K, kraus)
    L = form.to_superop()
    res = selfadjoint_residual(L, sigma, Measure.kms())
    if res > 1e-9:
        raise InternalInconsistency("completed generator is not KMS self-adjoint", witness=res)
    return form


@dataclass(frozen=True)
class FUReport:
    passed: bool
    U_tilde: np.ndarray | None
    drift_residual: float
    kraus_residual: float
    witness: int | None


def fagnola_umanita_check(G, W: KrausRep, sigma: DensityMatrix, tol: Tolerances = DEFAULT_TOL) -> FUReport:
    """Check Delta^{-1/2} G = G^* and Delta^{-1/2} W_j = sum_k U~_jk W_k^* with U~ unitary."""
    G = np.asarray(G, dtype=complex)
    ops = W.operators
    if numerical_rank(ops, tol) != len(ops):
        raise NotMinimal("Kraus family is linearly dependent")
    for j, V in enumerate(ops):
        if abs(np.trace(V)) > 1e-9 * (1.0 + opnorm(V)):
            raise TraceConditionViolated(f"Tr W_{j} != 0", witness=j)
    if abs(np.trace(G).imag) > 1e-9 * (1.0 + opnorm(G)):
        raise TraceConditionViolated("Tr G is not real")
    drift = opnorm(modular_power(sigma, -0.5, G) - G.conj().T) / (1.0 + opnorm(G))
    A = np.array([V.conj().T.reshape(-1) for V in ops]).T
    rhs = np.array([modular_power(sigma, -0.5, V).reshape(-1) for V in ops]).T
    coef, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    Ut = coef.T
    fit = np.linalg.norm(A @ coef - rhs, axis=0) / (1.0 + np.linalg.norm(rhs, axis=0))
    unit = opnorm(Ut.conj().T @ Ut - np.eye(len(ops)))
    witness = int(np.argmax(fit)) if fit.max(initial=0.0) > 1e-8 else None
    ok_ii = witness is None and unit <= 1e-8
    if witness is None and unit > 1e-8:
        witness = int(np.argmax(np.abs(Ut.conj().T @ Ut - np.eye(len(ops))).sum(axis=1)))
    passed = drift <= 1e-9 and ok_ii
    return FUReport(passed, Ut if ok_ii else None, drift, float(max(fit.max(initial=0.0), unit)), witness)


def symmetrize_kraus(W: KrausRep, U_tilde, sigma: DensityMatrix, tol: Tolerances = DEFAULT_TOL) -> KrausRep:
    """Mix W by a unitary U with conj(U) = U U~, which puts every operator in the KMS space."""
    try:
        A = takagi_symmetric_unitary(np.conj(U_tilde), tol)
    except NotSymmetricUnitary as exc:
        raise TakagiFailed(str(exc), witness=exc.witness) from exc
    U = A.T
    ops = [sum(U[j, k] * W.operators[k] for k in range(len(W))) for j in range(len(W))]
    for j, V in enumerate(ops):
        ok, r = kms_space_member(V, sigma, Tolerances(eq_abs=1e-8))
        if not ok:
            raise MembershipFailed(f"mixed operator {j} is not in the KMS space", witness=r)
    return KrausRep(tuple(ops), W.minimal)


def hamiltonian_part_detect(L: SuperOperator, sigma: DensityMatrix | None = None, tol: Tolerances = DEFAULT_TOL):
    """Self-adjoint trace-zero H with L = i[H, .], when the dissipative part vanishes."""
    n = L.n
    if not is_hermitian_map(L, tol) or opnorm(L(np.eye(n))) > tol.eq_abs * (1.0 + L.norm()):
        raise PreconditionViolated("need a Hermitian map annihilating the identity")
    R = reduced_characteristic(L, sigma, tol)
    if opnorm(R) > 1e-9 * (1.0 + L.norm()):
        raise NotPureHamiltonian("reduced characteristic matrix is nonzero", witness=opnorm(R))
    X = decompose_HS(L, sigma).X
    H = (X - X.conj().T) / 2j
    H = H - np.trace(H).real / n * np.eye(n)
    err = opnorm((L - commutator_map(H)).matrix)
    if err > 1e-9 * (1.0 + L.norm()):
        raise NotPureHamiltonian("commutator form does not reproduce the map", witness=err)
    return H


def pointedness_witness(m: Measure, sigma: DensityMatrix, trials: int, rng, tol: Tolerances = DEFAULT_TOL) -> dict:
    """Random Hamiltonian generators i[H, .] with [H, sigma] != 0 must fail m-self-adjointness."""
    n = sigma.n
    excluded = false_passes = 0
    residuals = []
    for _ in range(trials):
        H = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        H = 0.5 * (H + H.conj().T)
        if opnorm(H @ sigma.matrix - sigma.matrix @ H) < 1e-6 * opnorm(H):
            excluded += 1
            continue
        ok, r = is_selfadjoint_m(commutator_map(H), sigma, m, tol)
        residuals.append(r)
        false_passes += int(ok)
    return {
        "measure": m.name(),
        "trials": trials,
        "excluded": excluded,
        "false_passes": false_passes,
        "min_residual": float(min(residuals)) if residuals else float("nan"),
    }
