"""The faithful state sigma, probability measures m on [0, 1], and the kernels they induce.

All sigma-dependent operators act diagonally on matrix units in the sigma
eigenbasis, so they are implemented as entrywise multiplication there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NonPositiveInput, ValidationError
from .linalg import DEFAULT_TOL, Tolerances, as_square, hermitian_eig, is_psd, opnorm


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


def log_mean(x, y):
    """Logarithmic mean (x - y)/(ln x - ln y), continuous across x = y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t = np.log(x) - np.log(y)
    small = np.abs(t) < 1e-14
    safe_t = np.where(small, 1.0, t)
    # y * (e^t - 1)/t, with the removable singularity replaced by its series
    out = np.where(small, y * (1.0 + t / 2.0 + t * t / 6.0), y * np.expm1(t) / safe_t)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class Measure:
    atoms: tuple = ()
    uniform: float = 0.0
    label: str = field(default="", compare=False)

    def __post_init__(self):
        atoms = tuple((float(s), float(w)) for s, w in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "uniform", float(self.uniform))
        if self.uniform < 0:
            raise ValidationError("uniform weight must be non-negative")
        ss = [s for s, _ in atoms]
        if len(set(ss)) != len(ss):
            raise ValidationError("atoms must have distinct positions")
        for s, w in atoms:
            if not (0.0 <= s <= 1.0) or w <= 0:
                raise ValidationError(f"bad atom ({s}, {w})")
        total = sum(w for _, w in atoms) + self.uniform
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"total mass {total} != 1")

    @classmethod
    def delta(cls, s: float) -> "Measure":
        return cls(((s, 1.0),), 0.0, label=f"delta({s:g})")

    @classmethod
    def gns(cls) -> "Measure":
        return cls(((0.0, 1.0),), 0.0, label="gns")

    @classmethod
    def kms(cls) -> "Measure":
        return cls(((0.5, 1.0),), 0.0, label="kms")

    @classmethod
    def bkm(cls) -> "Measure":
        return cls((), 1.0, label="bkm")

    @classmethod
    def ms(cls, s: float) -> "Measure":
        """Symmetric pair (delta_s + delta_{1-s})/2."""
        if abs(s - 0.5) < 1e-15:
            return cls.kms()
        return cls(((s, 0.5), (1.0 - s, 0.5)), 0.0, label=f"ms({s:g})")

    def name(self) -> str:
        return self.label or repr((self.atoms, self.uniform))

    def reflect(self) -> "Measure":
        return Measure(tuple((1.0 - s, w) for s, w in self.atoms), self.uniform)

    def is_kms(self) -> bool:
        return self.uniform == 0.0 and len(self.atoms) == 1 and self.atoms[0][0] == 0.5

    def mean(self, x, y):
        """(x, y)_m, vectorized over broadcastable x and y."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.any(x <= 0) or np.any(y <= 0):
            raise NonPositiveInput("weighted mean needs positive arguments")
        out = np.zeros(np.broadcast(x, y).shape)
        for s, w in self.atoms:
            out = out + w * x**s * y ** (1.0 - s)
        if self.uniform:
            out = out + self.uniform * log_mean(x, y)
        return out if out.ndim else float(out)


def weighted_mean(x, y, m: Measure):
    return m.mean(x, y)


def is_even(m: Measure, atol: float = 1e-12) -> bool:
    pos = {round(s, 12): w for s, w in m.atoms}
    for s, w in m.atoms:
        partner = pos.get(round(1.0 - s, 12))
        if partner is None or abs(partner - w) > atol:
            return False
    return True


@dataclass(frozen=True)
class DensityMatrix:
    """Faithful state with its spectral data; eigenvectors are the columns of ``eigenvectors``."""

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_matrix(cls, sigma, tol: Tolerances = DEFAULT_TOL) -> "DensityMatrix":
        sigma = as_square(sigma, "sigma")
        w, U = hermitian_eig(sigma, tol)
        return cls._validated(0.5 * (sigma + sigma.conj().T), w, U)

    @classmethod
    def from_spectrum(cls, lam, U=None) -> "DensityMatrix":
        """Build sigma = U diag(lam) U^*, keeping the given eigenvalue order."""
        lam = np.asarray(lam, dtype=float)
        U = np.eye(len(lam), dtype=complex) if U is None else np.asarray(U, dtype=complex)
        return cls._validated((U * lam) @ U.conj().T, lam, U)

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityMatrix":
        return cls.from_spectrum(np.full(n, 1.0 / n))

    @classmethod
    def _validated(cls, sigma, lam, U):
        n = len(lam)
        if n < 2:
            raise ValidationError("dimension must be at least 2")
        if np.any(lam <= 0):
            raise ValidationError("sigma must be positive definite", witness=float(lam.min()))
        if abs(lam.sum() - 1.0) > 1e-12:
            raise ValidationError(f"trace {lam.sum()} != 1")
        if opnorm(U.conj().T @ U - np.eye(n)) > 1e-10:
            raise ValidationError("eigenvector matrix is not unitary")
        return cls(_frozen(sigma), _frozen(lam), _frozen(U))

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def to_eig(self, A):
        U = self.eigenvectors
        return U.conj().T @ A @ U

    def from_eig(self, A):
        U = self.eigenvectors
        return U @ A @ U.conj().T

    def mean_kernel(self, m: Measure) -> np.ndarray:
        lam = self.eigenvalues
        return m.mean(lam[:, None], lam[None, :])

    def power(self, t: float) -> np.ndarray:
        return self.from_eig(np.diag(self.eigenvalues**t))

    def omega(self) -> np.ndarray:
        """omega_(i,j) = ln lam_i - ln lam_j as an N x N array."""
        ll = np.log(self.eigenvalues)
        return ll[:, None] - ll[None, :]


def _check_dim(sigma: DensityMatrix, A):
    A = np.asarray(A, dtype=complex)
    if A.shape != (sigma.n, sigma.n):
        raise DimensionMismatch(f"expected {sigma.n}x{sigma.n}, got {A.shape}")
    return A


def apply_Mm(sigma: DensityMatrix, m: Measure, A):
    A = _check_dim(sigma, A)
    return sigma.from_eig(sigma.mean_kernel(m) * sigma.to_eig(A))


def apply_Mm_inverse(sigma: DensityMatrix, m: Measure, A):
    A = _check_dim(sigma, A)
    return sigma.from_eig(sigma.to_eig(A) / sigma.mean_kernel(m))


def modular_power(sigma: DensityMatrix, t: float, A):
    """sigma^t A sigma^-t."""
    A = _check_dim(sigma, A)
    lam = sigma.eigenvalues
    return sigma.from_eig((lam[:, None] / lam[None, :]) ** t * sigma.to_eig(A))


def inner_m(sigma: DensityMatrix, m: Measure, B, A) -> complex:
    """<B, A>_m = Tr[B^* M_m(A)]."""
    return complex(np.trace(np.asarray(B).conj().T @ apply_Mm(sigma, m, A)))


def lambda_kernel(sigma: DensityMatrix, m: Measure, inverted: bool) -> np.ndarray:
    K = sigma.mean_kernel(m)
    return 1.0 / K if inverted else K


def lambda_kernel_psd(sigma: DensityMatrix, m: Measure, inverted: bool, tol: Tolerances = DEFAULT_TOL) -> bool:
    """PSD status of the kernel (lam_i, lam_j)_m or its reciprocal.

    The kernel is the characteristic matrix of M_m (or its inverse) restricted to the
    diagonal-first block, so this is also the CP status of that map.
    """
    return is_psd(lambda_kernel(sigma, m, inverted).astype(complex), tol)[0]
