"""Superoperators on M_N, orthonormal bases of the Hilbert-Schmidt space, and characteristic matrices.

Conventions
-----------
* Matrices are vectorized row-major, so the superoperator of A -> F A G is kron(F, G^T).
* The inner product on M_N is <B, A> = Tr[B^* A]/N, so matrix units carry a sqrt(N).
* A basis index alpha = (i, j) is flattened row-major to i*N + j (0-based).
* A map is expanded as Phi(A) = sum_ab c_ab F_a^* A F_b; C = (c_ab) is its characteristic matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InternalInconsistency,
    NoUniqueState,
    NotFaithful,
    NotHermitianMap,
    PreconditionViolated,
    ValidationError,
)
from .linalg import DEFAULT_TOL, Tolerances, is_psd, opnorm
from .state import DensityMatrix, Measure


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------- indexing


def index_pairs(n: int):
    return [(i, j) for i in range(n) for j in range(n)]


def pairing(n: int) -> np.ndarray:
    """alpha' for alpha = (i, j) is (j, i)."""
    return np.array([j * n + i for i in range(n) for j in range(n)])


def diagonal_first(n: int) -> np.ndarray:
    """Row-major indices listed with (0,0), (1,1), ... first, then off-diagonal pairs row-major."""
    diag = [k * n + k for k in range(n)]
    off = [i * n + j for i in range(n) for j in range(n) if i != j]
    return np.array(diag + off)


# ---------------------------------------------------------------- bases


@dataclass(frozen=True)
class MatrixBasis:
    n: int
    elements: np.ndarray  # shape (N^2, N, N)
    kind: str
    pairing: np.ndarray | None

    @property
    def flat(self) -> np.ndarray:
        return self.elements.reshape(self.n**2, self.n**2)

    def coefficients(self, A) -> np.ndarray:
        """v with A = sum_a v_a F_a."""
        return self.flat.conj() @ np.asarray(A, dtype=complex).reshape(-1) / self.n

    def combine(self, v) -> np.ndarray:
        return (np.asarray(v) @ self.flat).reshape(self.n, self.n)

    def require_pairing(self) -> np.ndarray:
        if self.pairing is None:
            raise PreconditionViolated("basis has no declared pairing")
        return self.pairing


def _check_orthonormal(elements, n):
    F = elements.reshape(n * n, n * n)
    if opnorm(F.conj() @ F.T / n - np.eye(n * n)) > 1e-12 * n * n:
        raise ValidationError("basis is not orthonormal")


def matrix_unit_basis(sigma: DensityMatrix) -> MatrixBasis:
    n = sigma.n
    U = sigma.eigenvectors
    els = np.array([np.sqrt(n) * np.outer(U[:, i], U[:, j].conj()) for i, j in index_pairs(n)])
    return MatrixBasis(n, _frozen(els), "matrix_unit", pairing(n))


def standard_basis(n: int) -> MatrixBasis:
    return matrix_unit_basis(DensityMatrix.maximally_mixed(n))


def householder_v(n: int) -> np.ndarray:
    """Real orthogonal symmetric V with V e_1 = (1, ..., 1)/sqrt(n)."""
    v1 = np.full(n, 1.0 / np.sqrt(n))
    e1 = np.zeros(n)
    e1[0] = 1.0
    u = v1 - e1
    u = u / np.linalg.norm(u)
    return np.eye(n) - 2.0 * np.outer(u, u)


def unital_transform(n: int) -> np.ndarray:
    """U with F_a = sum_b U_ab E_b (row-major indices); acts as V on diagonal slots."""
    V = householder_v(n)
    U = np.eye(n * n)
    d = [k * n + k for k in range(n)]
    U[np.ix_(d, d)] = V
    return U


def unital_basis(sigma: DensityMatrix) -> MatrixBasis:
    E = matrix_unit_basis(sigma)
    n = sigma.n
    els = (unital_transform(n) @ E.flat).reshape(n * n, n, n)
    return MatrixBasis(n, _frozen(els), "unital", pairing(n))


def custom_basis(elements, pairing_map=None) -> MatrixBasis:
    els = np.asarray(elements, dtype=complex)
    n = els.shape[1]
    if els.shape != (n * n, n, n):
        raise DimensionMismatch("a basis needs N^2 elements of shape N x N")
    _check_orthonormal(els, n)
    if pairing_map is not None:
        pairing_map = np.asarray(pairing_map)
        for a, b in enumerate(pairing_map):
            if opnorm(els[a].conj().T - els[b]) > 1e-12 * n:
                raise ValidationError(f"declared pairing fails at index {a}")
    return MatrixBasis(n, _frozen(els), "custom", pairing_map)


def transition(source: MatrixBasis, target: MatrixBasis) -> np.ndarray:
    """U with target_a = sum_b U_ab source_b."""
    if source.n != target.n:
        raise DimensionMismatch("bases of different dimension")
    return target.flat @ source.flat.conj().T / source.n


# ---------------------------------------------------------------- superoperators


@dataclass(frozen=True)
class SuperOperator:
    n: int
    matrix: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=complex)
        if M.shape != (self.n**2, self.n**2):
            raise DimensionMismatch(f"superoperator for N={self.n} must be {self.n**2}x{self.n**2}")
        object.__setattr__(self, "matrix", _frozen(M))

    def __call__(self, A):
        A = np.asarray(A, dtype=complex)
        if A.shape != (self.n, self.n):
            raise DimensionMismatch(f"expected {self.n}x{self.n}, got {A.shape}")
        return (self.matrix @ A.reshape(-1)).reshape(self.n, self.n)

    apply = __call__

    def _same(self, other):
        if not isinstance(other, SuperOperator) or other.n != self.n:
            raise DimensionMismatch("superoperators of different dimension")

    def __add__(self, other):
        self._same(other)
        return SuperOperator(self.n, self.matrix + other.matrix)

    def __sub__(self, other):
        self._same(other)
        return SuperOperator(self.n, self.matrix - other.matrix)

    def __neg__(self):
        return SuperOperator(self.n, -self.matrix)

    def __mul__(self, c):
        return SuperOperator(self.n, complex(c) * self.matrix)

    __rmul__ = __mul__

    def __matmul__(self, other):
        """Composition: (Phi @ Psi)(A) = Phi(Psi(A))."""
        self._same(other)
        return SuperOperator(self.n, self.matrix @ other.matrix)

    def norm(self) -> float:
        return opnorm(self.matrix)

    def close_to(self, other, atol) -> bool:
        return opnorm(self.matrix - other.matrix) <= atol

    @classmethod
    def zero(cls, n):
        return cls(n, np.zeros((n * n, n * n)))

    @classmethod
    def identity(cls, n):
        return cls(n, np.eye(n * n))

    @classmethod
    def from_function(cls, f, n):
        cols = []
        for k in range(n * n):
            E = np.zeros(n * n, dtype=complex)
            E[k] = 1.0
            cols.append(np.asarray(f(E.reshape(n, n)), dtype=complex).reshape(-1))
        return cls(n, np.array(cols).T)

    @classmethod
    def from_kraus(cls, kraus, weights=None):
        """A -> sum_j w_j V_j^* A V_j."""
        kraus = [np.asarray(V, dtype=complex) for V in kraus]
        n = kraus[0].shape[0]
        weights = np.ones(len(kraus)) if weights is None else weights
        M = sum(w * np.kron(V.conj().T, V.T) for w, V in zip(weights, kraus))
        return cls(n, M)

    @classmethod
    def from_lindblad(cls, G, kraus):
        """A -> G^* A + A G + sum_j V_j^* A V_j."""
        G = np.asarray(G, dtype=complex)
        n = G.shape[0]
        L = sandwich(G.conj().T, np.eye(n)) + sandwich(np.eye(n), G)
        if len(kraus):
            L = L + SuperOperator.from_kraus(kraus)
        return L


def sandwich(F, G) -> SuperOperator:
    """#(F (x) G): X -> F X G."""
    F = np.asarray(F, dtype=complex)
    G = np.asarray(G, dtype=complex)
    if F.shape != G.shape or F.shape[0] != F.shape[1]:
        raise DimensionMismatch("sandwich factors must be square of equal size")
    return SuperOperator(F.shape[0], np.kron(F, G.T))


def commutator_map(H) -> SuperOperator:
    """A -> i[H, A]."""
    H = np.asarray(H, dtype=complex)
    n = H.shape[0]
    return 1j * (sandwich(H, np.eye(n)) - sandwich(np.eye(n), H))


def inner_hat(Phi: SuperOperator, Psi: SuperOperator) -> complex:
    """<Phi, Psi> on superoperators, normalized so that #(F (x) G) inherits the norm of M_N."""
    return complex(np.vdot(Phi.matrix, Psi.matrix)) / Phi.n**2


def dagger(Phi: SuperOperator) -> SuperOperator:
    """Adjoint with respect to Tr[B^* A]/N."""
    return SuperOperator(Phi.n, Phi.matrix.conj().T)


def kernel_superop(sigma: DensityMatrix, K) -> SuperOperator:
    """Entrywise multiplication by the N x N kernel K in the sigma eigenbasis."""
    U = sigma.eigenvectors
    d = np.asarray(K).reshape(-1)
    into = np.kron(U.conj().T, U.T)
    back = np.kron(U, U.conj())
    return SuperOperator(sigma.n, back @ (d[:, None] * into))


def mm_superop(sigma: DensityMatrix, m: Measure, inverse: bool = False) -> SuperOperator:
    K = sigma.mean_kernel(m)
    return kernel_superop(sigma, 1.0 / K if inverse else K)


def modular_superop(sigma: DensityMatrix, t: float) -> SuperOperator:
    """A -> sigma^t A sigma^-t."""
    lam = sigma.eigenvalues
    return sandwich(sigma.power(t), sigma.from_eig(np.diag(lam ** (-t))))


# ---------------------------------------------------------------- characteristic matrices


@dataclass(frozen=True)
class CharacteristicMatrix:
    C: np.ndarray
    basis: MatrixBasis

    def to_superop(self) -> SuperOperator:
        return from_characteristic(self.C, self.basis)


def _realign(M, n):
    # R[(i,k),(l,j)] = S[(i,j),(k,l)]
    return M.reshape(n, n, n, n).transpose(0, 2, 3, 1).reshape(n * n, n * n)


def _unrealign(R, n):
    return R.reshape(n, n, n, n).transpose(0, 3, 1, 2).reshape(n * n, n * n)


def _star_flat(basis: MatrixBasis):
    return np.array([F.conj().T.reshape(-1) for F in basis.elements])


def characteristic_matrix(Phi: SuperOperator, basis: MatrixBasis) -> CharacteristicMatrix:
    n = basis.n
    if Phi.n != n:
        raise DimensionMismatch("map and basis dimensions differ")
    # realigned map R = P C Q with columns of P = vec(F_a^*) and rows of Q = vec(F_b)
    R = _realign(Phi.matrix, n)
    C = _star_flat(basis).conj() @ R @ basis.flat.conj().T / n**2
    return CharacteristicMatrix(_frozen(C), basis)


def from_characteristic(C, basis: MatrixBasis) -> SuperOperator:
    n = basis.n
    R = _star_flat(basis).T @ np.asarray(C) @ basis.flat
    return SuperOperator(n, _unrealign(R, n))


def char_mu(Phi: SuperOperator, sigma: DensityMatrix | None = None) -> np.ndarray:
    """Characteristic matrix in the matrix-unit basis of sigma (standard basis when sigma is None)."""
    basis = standard_basis(Phi.n) if sigma is None else matrix_unit_basis(sigma)
    return np.array(characteristic_matrix(Phi, basis).C)


def change_basis(C: CharacteristicMatrix, target: MatrixBasis) -> CharacteristicMatrix:
    U = transition(C.basis, target)
    return CharacteristicMatrix(_frozen(U @ C.C @ U.conj().T), target)


def dagger_coefficients(C: CharacteristicMatrix) -> np.ndarray:
    """Coefficients of Phi^dagger in a paired basis: (c_dag)_{a,b} = conj(c_{a',b'})."""
    p = C.basis.require_pairing()
    return np.asarray(C.C)[np.ix_(p, p)].conj()


# ---------------------------------------------------------------- tests on maps


def hermitian_residual(Phi: SuperOperator) -> float:
    C = char_mu(Phi)
    return opnorm(C - C.conj().T)


def is_hermitian_map(Phi: SuperOperator, tol: Tolerances = DEFAULT_TOL) -> bool:
    C = char_mu(Phi)
    return opnorm(C - C.conj().T) <= tol.eq_abs * (1.0 + opnorm(C))


def require_hermitian(Phi: SuperOperator, tol: Tolerances = DEFAULT_TOL):
    if not is_hermitian_map(Phi, tol):
        raise NotHermitianMap("map is not Hermitian", witness=hermitian_residual(Phi))


def is_cp(Phi: SuperOperator, tol: Tolerances = DEFAULT_TOL):
    """(verdict, smallest eigenvalue of the characteristic matrix)."""
    C = char_mu(Phi)
    if opnorm(C - C.conj().T) > tol.eq_abs * (1.0 + opnorm(C)):
        return False, float("nan")
    return is_psd(C, tol)


def adjoint_m(Phi: SuperOperator, sigma: DensityMatrix, m: Measure, tol: Tolerances = DEFAULT_TOL,
              check_hermitian: bool = True) -> SuperOperator:
    """M_m^{-1} o Phi^dagger o M_m."""
    if check_hermitian:
        require_hermitian(Phi, tol)
    return mm_superop(sigma, m, inverse=True) @ dagger(Phi) @ mm_superop(sigma, m)


def selfadjoint_residual(Phi: SuperOperator, sigma: DensityMatrix, m: Measure) -> float:
    """||M_m Phi - Phi^dagger M_m|| relative to ||M_m Phi||."""
    M = mm_superop(sigma, m)
    left = M @ Phi
    ref = left.norm()
    if ref == 0.0:
        return 0.0
    return opnorm(left.matrix - (dagger(Phi) @ M).matrix) / ref


def b_matrix_array(C_mu: np.ndarray, sigma: DensityMatrix, m: Measure) -> np.ndarray:
    """b_ab = c_ab (lam_{a2}, lam_{b2})_m for C in the matrix-unit basis of sigma."""
    n = sigma.n
    second = np.array([j for _, j in index_pairs(n)])
    K = sigma.mean_kernel(m)
    return C_mu * K[np.ix_(second, second)]


def coefficient_residual(Phi: SuperOperator, sigma: DensityMatrix, m: Measure) -> float:
    """Relative defect of b_ab = conj(b_{a'b'}), the coefficient form of self-adjointness."""
    B = b_matrix_array(char_mu(Phi, sigma), sigma, m)
    p = pairing(sigma.n)
    ref = opnorm(B)
    if ref == 0.0:
        return 0.0
    return opnorm(B - B[np.ix_(p, p)].conj()) / ref


def is_selfadjoint_m(Phi: SuperOperator, sigma: DensityMatrix, m: Measure, tol: Tolerances = DEFAULT_TOL):
    """(verdict, residual). The operator route and the coefficient route must agree."""
    require_hermitian(Phi, tol)
    r_op = selfadjoint_residual(Phi, sigma, m)
    r_co = coefficient_residual(Phi, sigma, m)
    v_op = r_op <= tol.eq_abs
    v_co = r_co <= tol.eq_abs
    if v_op != v_co:
        # both residuals vanish together; a split verdict only happens right at the threshold
        if max(r_op, r_co) > 100 * tol.eq_abs and min(r_op, r_co) < tol.eq_abs / 100:
            raise InternalInconsistency("operator and coefficient routes disagree", witness=(r_op, r_co))
        v_op = v_co = max(r_op, r_co) <= tol.eq_abs
    return v_op, r_op


def one_coefficients(C_std: np.ndarray, n: int) -> np.ndarray:
    """Z with Phi(1) = Z from standard-basis coefficients: Z_kl = N sum_j c_{(j,k),(j,l)}."""
    C4 = C_std.reshape(n, n, n, n)
    return n * np.einsum("jkjl->kl", C4)


def unitality_class(Phi: SuperOperator, tol: Tolerances = DEFAULT_TOL) -> str:
    n = Phi.n
    I = np.eye(n)
    direct = Phi(I)
    coeff = one_coefficients(char_mu(Phi), n)
    scale = tol.eq_abs * (1.0 + Phi.norm())

    def classify(Z):
        if opnorm(Z - I) <= scale:
            return "unital"
        if opnorm(Z) <= scale:
            return "annihilates_one"
        return "neither"

    a, b = classify(direct), classify(coeff)
    if a != b:
        raise InternalInconsistency("unitality routes disagree", witness=(a, b))
    return a


def characteristic_in(Phi: SuperOperator, basis: MatrixBasis) -> np.ndarray:
    return np.array(characteristic_matrix(Phi, basis).C)


def reduced_characteristic(Phi: SuperOperator, sigma: DensityMatrix | None = None,
                           tol: Tolerances = DEFAULT_TOL, order: str = "row_major") -> np.ndarray:
    """Unital-basis characteristic matrix with the row and column of the identity element removed.

    ``order="diagonal_first"`` lists the remaining diagonal slots before the off-diagonal ones.
    """
    sigma = sigma or DensityMatrix.maximally_mixed(Phi.n)
    if not is_hermitian_map(Phi, tol):
        raise PreconditionViolated("map is not Hermitian")
    if opnorm(Phi(np.eye(Phi.n))) > tol.eq_abs * (1.0 + Phi.norm()):
        raise PreconditionViolated("map does not annihilate the identity")
    C = characteristic_in(Phi, unital_basis(sigma))
    idx = diagonal_first(Phi.n) if order == "diagonal_first" else np.arange(Phi.n**2)
    C = C[np.ix_(idx, idx)]
    return C[1:, 1:]


def is_qms_generator(L: SuperOperator, sigma: DensityMatrix | None = None, tol: Tolerances = DEFAULT_TOL) -> bool:
    if not is_hermitian_map(L, tol):
        return False
    if opnorm(L(np.eye(L.n))) > tol.eq_abs * (1.0 + L.norm()):
        return False
    R = reduced_characteristic(L, sigma, tol)
    return is_psd(0.5 * (R + R.conj().T), tol)[0]


@dataclass(frozen=True)
class HSDecomposition:
    X: np.ndarray
    Y: np.ndarray
    hs: SuperOperator
    perp: SuperOperator


def decompose_HS(Phi: SuperOperator, sigma: DensityMatrix | None = None) -> HSDecomposition:
    """Split Phi = (A -> XA + AY) + Phi_perp, with Tr X real."""
    n = Phi.n
    sigma = sigma or DensityMatrix.maximally_mixed(n)
    basis = unital_basis(sigma)
    C = characteristic_in(Phi, basis)
    F = basis.elements
    I = np.eye(n)
    X = 0.5 * C[0, 0] * I + sum(C[a, 0] * F[a].conj().T for a in range(1, n * n))
    Y = 0.5 * C[0, 0] * I + sum(C[0, b] * F[b] for b in range(1, n * n))
    eta = -1j * np.trace(X).imag / n
    X = X + eta * I
    Y = Y - eta * I
    hs = sandwich(X, I) + sandwich(I, Y)
    return HSDecomposition(X, Y, hs, Phi - hs)


def stationary_state(Phi: SuperOperator, tol: Tolerances = DEFAULT_TOL, degeneracy: float = 1e-8) -> DensityMatrix:
    """The unique faithful state fixed by the predual dynamics of a unital map or generator."""
    cls = unitality_class(Phi, tol)
    if cls == "unital":
        target = 1.0
    elif cls == "annihilates_one":
        target = 0.0
    else:
        raise PreconditionViolated("map is neither unital nor annihilates the identity")
    w, V = np.linalg.eig(dagger(Phi).matrix)
    hits = np.flatnonzero(np.abs(w - target) <= degeneracy * max(1.0, Phi.norm()))
    if len(hits) != 1:
        raise NoUniqueState(f"eigenvalue {target} has multiplicity {len(hits)}", witness=len(hits))
    rho = V[:, hits[0]].reshape(Phi.n, Phi.n)
    rho = rho / np.trace(rho)
    rho = 0.5 * (rho + rho.conj().T)
    lam = np.linalg.eigvalsh(rho)
    if lam[0] <= 0:
        raise NotFaithful("fixed point is not positive definite", witness=float(lam[0]))
    return DensityMatrix.from_matrix(rho / np.trace(rho).real)
