"""Dense complex linear algebra used by every other module."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotHermitian, NotSymmetricUnitary, ShapeMismatch


@dataclass(frozen=True)
class Tolerances:
    psd_rel: float = 1e-9
    rank_rel: float = 1e-10
    eq_abs: float = 1e-10

    def __post_init__(self):
        for name in ("psd_rel", "rank_rel", "eq_abs"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must lie in (0, 1), got {v}")


DEFAULT_TOL = Tolerances()


def opnorm(A) -> float:
    """Spectral norm."""
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def close(A, B, tol: Tolerances = DEFAULT_TOL, scale=None) -> bool:
    """Operator-norm equality with the scale-free threshold eq_abs * (1 + ||A||)."""
    A = np.asarray(A)
    B = np.asarray(B)
    ref = opnorm(A) if scale is None else scale
    return opnorm(A - B) <= tol.eq_abs * (1.0 + ref)


def as_square(A, name="matrix") -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ShapeMismatch(f"{name} has non-finite entries")
    return A


def check_hermitian(A, tol: Tolerances = DEFAULT_TOL, name="matrix") -> np.ndarray:
    A = as_square(A, name)
    if opnorm(A - A.conj().T) > tol.eq_abs * (1.0 + opnorm(A)):
        raise NotHermitian(f"{name} is not Hermitian", witness=opnorm(A - A.conj().T))
    return A


def phase_fix(v: np.ndarray, floor: float = 1e-12) -> np.ndarray:
    """Rotate v so its first entry of non-negligible magnitude is real positive."""
    mags = np.abs(v)
    if mags.max(initial=0.0) == 0.0:
        return v
    k = int(np.argmax(mags > floor * mags.max()))
    return v * (abs(v[k]) / v[k])


def hermitian_eig(A, tol: Tolerances = DEFAULT_TOL):
    """Eigenvalues in descending order with phase-fixed eigenvectors (columns).

    Exactly tied eigenvalues are ordered by the lexicographic order of their
    phase-fixed eigenvector entries, so repeated calls give identical output.
    """
    A = check_hermitian(A, tol)
    A = 0.5 * (A + A.conj().T)
    w, U = np.linalg.eigh(A)
    w = w[::-1]
    U = U[:, ::-1]
    U = np.column_stack([phase_fix(U[:, k]) for k in range(U.shape[1])]) if U.size else U
    gap = 1e-12 * max(1.0, float(np.max(np.abs(w), initial=0.0)))
    order = list(range(len(w)))
    start = 0
    while start < len(w):
        stop = start + 1
        while stop < len(w) and abs(w[stop] - w[start]) <= gap:
            stop += 1
        if stop - start > 1:
            block = order[start:stop]
            block.sort(key=lambda k: tuple(np.round(np.column_stack([-U[:, k].real, -U[:, k].imag]).ravel(), 12)))
            order[start:stop] = block
        start = stop
    return w[order], U[:, order]


def is_psd(A, tol: Tolerances = DEFAULT_TOL):
    """(verdict, smallest eigenvalue). PSD means min eig >= -psd_rel * max(1, max eig)."""
    A = check_hermitian(A, tol)
    if A.size == 0:
        return True, 0.0
    w = np.linalg.eigvalsh(0.5 * (A + A.conj().T))
    lo, hi = float(w[0]), float(w[-1])
    return lo >= -tol.psd_rel * max(1.0, hi), lo


def gram(vectors) -> np.ndarray:
    """Hilbert-Schmidt Gram matrix <V_i, V_j> = Tr[V_i^* V_j]."""
    X = stack_flat(vectors)
    return X.conj() @ X.T


def stack_flat(vectors) -> np.ndarray:
    vs = [np.asarray(v, dtype=complex) for v in vectors]
    if not vs:
        raise ShapeMismatch("empty family")
    shape = vs[0].shape
    for v in vs:
        if v.shape != shape:
            raise ShapeMismatch(f"shape {v.shape} differs from {shape}")
    return np.array([v.reshape(-1) for v in vs])


def _rank_from_singular(s, tol: Tolerances) -> int:
    if len(s) == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol.rank_rel * s[0]))


def numerical_rank(vectors, tol: Tolerances = DEFAULT_TOL) -> int:
    """Rank of the flattened family, thresholded on its own singular values (not the Gram matrix's)."""
    return _rank_from_singular(np.linalg.svd(stack_flat(vectors), compute_uv=False), tol)


def real_rank(matrices, tol: Tolerances = DEFAULT_TOL) -> int:
    """Rank over the reals: real and imaginary parts are stacked as separate coordinates."""
    X = stack_flat(matrices)
    R = np.hstack([X.real, X.imag])
    return _rank_from_singular(np.linalg.svd(R, compute_uv=False), tol)


def lq(S: np.ndarray):
    """S = L @ W with L lower triangular and W having orthonormal rows.

    This is Gram-Schmidt on the rows of S, done through a QR factorization of S^*.
    """
    Q, R = np.linalg.qr(S.conj().T)
    return R.conj().T, Q.conj().T


def takagi_symmetric_unitary(S, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Unitary A with S = A A^T for a symmetric unitary S.

    Re S and Im S are commuting real symmetric matrices, so one real orthogonal O
    diagonalizes both and S = O D O^T with unimodular D. The symmetric square root
    A = O D^{1/2} O^T is returned, which makes diagonal inputs map to diagonal outputs.
    """
    S = as_square(S, "S")
    n = S.shape[0]
    I = np.eye(n)
    if opnorm(S - S.T) > tol.eq_abs * (1 + opnorm(S)) or opnorm(S.conj().T @ S - I) > tol.eq_abs * n:
        raise NotSymmetricUnitary("input is not a symmetric unitary")
    X = 0.5 * (S + S.T).real
    Y = 0.5 * (S + S.T).imag
    wx, O = np.linalg.eigh(X)
    cols = []
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and abs(wx[stop] - wx[start]) <= 1e-9:
            stop += 1
        Ob = O[:, start:stop]
        _, P = np.linalg.eigh(Ob.T @ Y @ Ob)
        cols.append(Ob @ P)
        start = stop
    O = np.hstack(cols)
    d = np.diag(O.T @ S @ O)
    D = d / np.abs(d)
    A = (O * np.sqrt(D)) @ O.T
    if opnorm(S - A @ A.T) > 1e-8:
        raise NotSymmetricUnitary("simultaneous diagonalization failed", witness=opnorm(S - A @ A.T))
    return A


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))
