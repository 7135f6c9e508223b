"""Generators on 2x2 matrices that are self-adjoint for an even measure m.

Parameters follow the 4x4 characteristic matrix in the matrix-unit basis of sigma,
listed diagonal-first as (1,1), (2,2), (1,2), (2,1):

    [[-l2 a,  -x,       zc,       mu1 zc^],
     [-x,     -l1 a,   -mu2 zc,   -zc^   ],
     [ zc^,   -mu2 zc^, l1 a,      zeta  ],
     [ mu1 zc, -zc,     zeta^,     l2 a  ]]

with zc = sqrt(2) z and mu_j = (l1, l2)_m / l_j. The stored z is the one that appears
in the unital-basis matrix; zc is what sits in the matrix-unit basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParams, KmsExcluded, OutOfRegime
from .linalg import is_psd
from .state import DensityMatrix, Measure, is_even
from .superop import (
    CharacteristicMatrix,
    SuperOperator,
    decompose_HS,
    diagonal_first,
    from_characteristic,
    matrix_unit_basis,
    sandwich,
)

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class N2Params:
    lam1: float
    m: Measure
    a: float = 0.0
    z: complex = 0.0
    zeta: complex = 0.0
    x: float | None = None
    U: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if not (0.0 < self.lam1 < 1.0):
            raise InvalidParams("lam1 must lie in (0, 1)")
        if abs(self.lam1 - 0.5) < 1e-12:
            raise InvalidParams("degenerate sigma (lam1 = lam2) is not supported")
        if not is_even(self.m):
            raise InvalidParams("measure must be even")
        if not (0.0 <= self.a <= 1.0):
            raise InvalidParams("a must lie in [0, 1]")
        if self.x is None:
            object.__setattr__(self, "x", 1.0 - self.a / 2.0)
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "zeta", complex(self.zeta))

    @property
    def lam2(self) -> float:
        return 1.0 - self.lam1

    @property
    def sigma(self) -> DensityMatrix:
        return DensityMatrix.from_spectrum([self.lam1, self.lam2], self.U)

    @property
    def mu(self):
        g = self.m.mean(self.lam1, self.lam2)
        return g / self.lam1, g / self.lam2

    @property
    def nu(self):
        mu1, mu2 = self.mu
        return mu1 + 1.0, mu2 + 1.0

    def replace(self, **kw) -> "N2Params":
        d = dict(lam1=self.lam1, m=self.m, a=self.a, z=self.z, zeta=self.zeta, x=self.x, U=self.U)
        d.update(kw)
        return N2Params(**d)


def n2_characteristic_diagonal_first(p: N2Params) -> np.ndarray:
    l1, l2, a, x = p.lam1, p.lam2, p.a, p.x
    mu1, mu2 = p.mu
    zc = SQRT2 * p.z
    zb = np.conj(zc)
    return np.array([
        [-l2 * a, -x, zc, mu1 * zb],
        [-x, -l1 * a, -mu2 * zc, -zb],
        [zb, -mu2 * zb, l1 * a, p.zeta],
        [mu1 * zc, -zc, np.conj(p.zeta), l2 * a],
    ], dtype=complex)


def n2_characteristic(p: N2Params) -> CharacteristicMatrix:
    """Characteristic matrix in the (row-major) matrix-unit basis of sigma."""
    idx = diagonal_first(2)
    C = np.zeros((4, 4), dtype=complex)
    C[np.ix_(idx, idx)] = n2_characteristic_diagonal_first(p)
    return CharacteristicMatrix(C, matrix_unit_basis(p.sigma))


def n2_generator(p: N2Params) -> SuperOperator:
    c = n2_characteristic(p)
    return from_characteristic(c.C, c.basis)


def n2_reduced(p: N2Params) -> np.ndarray:
    nu1, nu2 = p.nu
    z, zb = p.z, np.conj(p.z)
    return np.array([
        [p.x - p.a / 2.0, nu2 * z, nu1 * zb],
        [nu2 * zb, p.lam1 * p.a, p.zeta],
        [nu1 * z, np.conj(p.zeta), p.lam2 * p.a],
    ], dtype=complex)


def n2_r0(p: N2Params, phi: float) -> float:
    """Largest |z| along direction e^{i phi} keeping the reduced matrix PSD."""
    a = p.a
    l1, l2 = p.lam1, p.lam2
    if not (0.0 < a < 1.0):
        raise OutOfRegime("need 0 < a < 1")
    if abs(p.zeta) >= a * np.sqrt(l1 * l2):
        raise OutOfRegime("need |zeta| < a sqrt(l1 l2)")
    nu1, nu2 = p.nu
    num = (p.x - a / 2.0) * (a * a * l1 * l2 - abs(p.zeta) ** 2)
    den = a * (l1 * nu1**2 + l2 * nu2**2) - 2.0 * nu1 * nu2 * (p.zeta * np.exp(2j * phi)).real
    if num < 0:
        raise OutOfRegime("x < a/2")
    return float(np.sqrt(num / den))


def n2_extreme_params(lam1: float, m: Measure, which: str, theta: float = 0.0, a: float | None = None,
                      r: float | None = None, phi: float = 0.0, U=None) -> N2Params:
    g = np.sqrt(lam1 * (1.0 - lam1))
    if which == "origin":
        return N2Params(lam1, m, a=0.0, x=0.0, U=U)
    if which == "pure_zeta":
        return N2Params(lam1, m, a=1.0, zeta=g * np.exp(1j * theta), U=U)
    if which == "boundary":
        if m.is_kms():
            raise KmsExcluded("the boundary family is not defined for the KMS measure")
        if a is None or r is None or not (0.0 < a < 1.0) or not (0.0 <= r < a):
            raise InvalidParams("boundary needs 0 < a < 1 and 0 <= r < a")
        p = N2Params(lam1, m, a=a, zeta=r * g * np.exp(1j * theta), U=U)
        return p.replace(z=n2_r0(p, phi) * np.exp(1j * phi))
    raise InvalidParams(f"unknown family {which!r}")


def n2_extreme_sample(lam1: float, m: Measure, which: str, **kw) -> SuperOperator:
    return n2_generator(n2_extreme_params(lam1, m, which, **kw))


def n2_G(p: N2Params):
    """(G, H, K) with L(A) = G^* A + A G + Phi(A), Phi the part of L orthogonal to A -> XA + AY."""
    l1, l2, a, x = p.lam1, p.lam2, p.a, p.x
    mu1, mu2 = p.mu
    z, zb = p.z, np.conj(p.z)
    H = np.array([
        [a / 4.0 * (l1 - 3.0 * l2) - x / 2.0, z / SQRT2 * (mu1 - mu2)],
        [zb / SQRT2 * (mu1 - mu2), a / 4.0 * (l2 - 3.0 * l1) - x / 2.0],
    ], dtype=complex)
    K = (2.0 - mu1 - mu2) / (SQRT2 * 1j) * np.array([[0.0, z], [-zb, 0.0]], dtype=complex)
    V = p.sigma.eigenvectors
    H = V @ H @ V.conj().T
    K = V @ K @ V.conj().T
    return H + 1j * K, H, K


def n2_dissipative(p: N2Params) -> SuperOperator:
    return decompose_HS(n2_generator(p), p.sigma).perp


def n2_assemble(p: N2Params) -> SuperOperator:
    G = n2_G(p)[0]
    I = np.eye(2)
    return sandwich(G.conj().T, I) + sandwich(I, G) + n2_dissipative(p)


def n2_extract_z(L: SuperOperator, sigma: DensityMatrix) -> complex:
    """Recover z from <u1, L(|u1><u1|) u2>, which equals 2 sqrt(2) z."""
    u1, u2 = sigma.eigenvectors[:, 0], sigma.eigenvectors[:, 1]
    return complex(u1.conj() @ L(np.outer(u1, u1.conj())) @ u2) / (2.0 * SQRT2)


def _param_vector(p: N2Params) -> np.ndarray:
    return np.array([p.x, p.a, p.z.real, p.z.imag, p.zeta.real, p.zeta.imag])


def _reduced_linear(p: N2Params, v) -> np.ndarray:
    """Reduced matrix for the real parameter vector v = (x, a, Re z, Im z, Re zeta, Im zeta); linear in v."""
    nu1, nu2 = p.nu
    x, a, zr, zi, wr, wi = v
    z = zr + 1j * zi
    w = wr + 1j * wi
    return np.array([
        [x - a / 2.0, nu2 * z, nu1 * np.conj(z)],
        [nu2 * np.conj(z), p.lam1 * a, w],
        [nu1 * z, np.conj(w), p.lam2 * a],
    ], dtype=complex)


def n2_face_dimension(p: N2Params, rank_tol: float = 1e-9) -> int:
    """Dimension of the smallest face of the generator cone containing p.

    A direction D stays in that face iff R(D) annihilates ker R(p); dimension 1 means p spans an extreme ray.
    """
    R = n2_reduced(p)
    w, Q = np.linalg.eigh(R)
    ker = Q[:, w <= rank_tol * max(1.0, w.max())]
    if ker.shape[1] == 0:
        return 6
    rows = []
    for k in range(6):
        e = np.zeros(6)
        e[k] = 1.0
        col = (_reduced_linear(p, e) @ ker).reshape(-1)
        rows.append(np.concatenate([col.real, col.imag]))
    A = np.array(rows).T
    s = np.linalg.svd(A, compute_uv=False)
    return int(6 - np.sum(s > 1e-10 * max(1.0, s.max())))


def n2_perturbation_test(p: N2Params, rng, trials: int = 64, eps: float = 1e-4) -> dict:
    """Random directions not parallel to p: both R(p) +/- eps R(D) should leave the PSD cone."""
    base = _param_vector(p)
    R0 = n2_reduced(p)
    kept = 0
    for _ in range(trials):
        d = rng.standard_normal(6)
        d -= (d @ base) / (base @ base) * base
        d /= np.linalg.norm(d)
        ok_plus = is_psd(R0 + eps * _reduced_linear(p, d))[0]
        ok_minus = is_psd(R0 - eps * _reduced_linear(p, d))[0]
        kept += int(ok_plus and ok_minus)
    return {"trials": trials, "two_sided_survivors": kept}


def n2_boundary_certificate(p: N2Params, rng=None) -> dict:
    rng = np.random.default_rng(0) if rng is None else rng
    R = n2_reduced(p)
    ok, lo = is_psd(R)
    face = n2_face_dimension(p)
    pert = n2_perturbation_test(p, rng)
    verdict = ok and face == 1 and pert["two_sided_survivors"] == 0
    return {
        "psd": bool(ok),
        "min_eig": float(lo),
        "rank": int(np.sum(np.linalg.eigvalsh(R) > 1e-9)),
        "face_dimension": face,
        "perturbation": pert,
        "verdict": "boundary-extremal (numerical)" if verdict else "not certified",
    }
