"""Random instances with known structure. Every generator takes an explicit numpy Generator."""

from __future__ import annotations

import numpy as np

from .detailed_balance import kms_space_basis, real_subspace_basis
from .linalg import haar_unitary
from .state import DensityMatrix, Measure, is_even
from .superop import (
    SuperOperator,
    adjoint_m,
    from_characteristic,
    index_pairs,
    matrix_unit_basis,
    standard_basis,
)


def cgauss(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_spectrum(n, rng, floor=0.03, minimally_degenerate=False):
    for _ in range(1000):
        d = rng.dirichlet(np.ones(n))
        lam = np.sort(floor + (1.0 - n * floor) * d)[::-1]
        lam = lam / lam.sum()
        if not minimally_degenerate or ratios_distinct(lam):
            return lam
    raise RuntimeError("could not draw a spectrum")


def ratios_distinct(lam, gap=1e-3):
    r = np.log([lam[i] / lam[j] for i in range(len(lam)) for j in range(len(lam)) if i != j])
    r = np.sort(r)
    return bool(np.all(np.diff(r) > gap))


def random_sigma(n, rng, rotate=True, **kw) -> DensityMatrix:
    lam = random_spectrum(n, rng, **kw)
    return DensityMatrix.from_spectrum(lam, haar_unitary(n, rng) if rotate else None)


def random_measure(rng, even=None) -> Measure:
    even = bool(rng.integers(2)) if even is None else even
    kind = int(rng.integers(3))
    if even:
        if kind == 0:
            return Measure.kms()
        if kind == 1:
            return Measure.bkm()
        s = float(rng.uniform(0, 0.45))
        u = float(rng.uniform(0, 0.5))
        return Measure(((s, (1 - u) / 2), (1 - s, (1 - u) / 2)), u)
    if kind == 0:
        return Measure.delta(float(rng.choice([0.0, 0.2, 0.8, 1.0])))
    s1, s2 = sorted(rng.uniform(0, 1, 2))
    w = rng.dirichlet(np.ones(3))
    return Measure(((float(s1), float(w[0])), (float(s2), float(w[1]))), float(w[2]))


def random_kraus(n, M, rng):
    return [cgauss(rng, (n, n)) for _ in range(M)]


def random_cp(n, rng, M=None) -> SuperOperator:
    M = int(rng.integers(1, n * n + 1)) if M is None else M
    return SuperOperator.from_kraus(random_kraus(n, M, rng))


def random_hermitian_map(n, rng) -> SuperOperator:
    C = cgauss(rng, (n * n, n * n))
    return from_characteristic(C + C.conj().T, standard_basis(n))


def random_kms_kraus(sigma: DensityMatrix, rng, M=None, traceless=False):
    n = sigma.n
    G = kms_space_basis(sigma).elements
    M = int(rng.integers(1, n * n + 1)) if M is None else M
    out = []
    for _ in range(M):
        V = np.tensordot(rng.standard_normal(n * n), G, axes=1)
        if traceless:
            V = V - np.trace(V) / n * np.eye(n)
        out.append(V)
    return out


def random_kms_cp(sigma: DensityMatrix, rng, rank=None) -> SuperOperator:
    """From a random real PSD matrix on the J-invariant real subspace, pulled back through the KMS weights."""
    n = sigma.n
    Q = real_subspace_basis(n)
    rank = int(rng.integers(1, n * n + 1)) if rank is None else rank
    X = rng.standard_normal((n * n, rank))
    B = Q @ (X @ X.T) @ Q.conj().T
    d = np.sqrt(sigma.eigenvalues[[j for _, j in index_pairs(n)]])
    C = B / d[:, None] / d[None, :]
    return from_characteristic(C, matrix_unit_basis(sigma))


def random_gns_cp(sigma: DensityMatrix, rng, per_block=None) -> SuperOperator:
    """Canonical delta_s form with random operators in each modular eigenspace."""
    n = sigma.n
    E = matrix_unit_basis(sigma).elements
    om = sigma.omega()
    L = SuperOperator.zero(n)
    thr = 1e-8 * (1 + np.abs(om).max())
    zero = [(i, j) for i in range(n) for j in range(n) if abs(om[i, j]) <= thr]
    k1 = int(rng.integers(1, 3)) if per_block is None else per_block
    for _ in range(k1):
        V = sum(rng.standard_normal() * E[i * n + j] for i, j in zero)
        V = 0.5 * (V + V.conj().T)
        L = L + SuperOperator(n, np.kron(V, V.T))
    seen = set()
    for i in range(n):
        for j in range(n):
            w = om[i, j]
            if w <= thr:
                continue
            key = round(w / thr)
            if key in seen:
                continue
            seen.add(key)
            J = [(a, b) for a in range(n) for b in range(n) if abs(om[a, b] - w) <= thr]
            mu = np.exp(w)
            for _ in range(int(rng.integers(0, 3)) if per_block is None else per_block):
                V = sum(complex(cgauss(rng, ())) * E[a * n + b] for a, b in J)
                L = L + np.sqrt(mu) * SuperOperator.from_kraus([V]) + (1 / np.sqrt(mu)) * SuperOperator(n, np.kron(V, V.conj()))
    return L


def _selfadjoint_orbit_sample(sigma: DensityMatrix, m: Measure, rng) -> np.ndarray:
    """Random Hermitian characteristic matrix (matrix-unit basis of sigma) of an m-self-adjoint map.

    The constraints c_ba = conj(c_ab) and c_ab k(a2, b2) = conj(c_a'b') k(a1, b1) only couple the
    index pairs in an orbit {(a,b), (b,a), (a',b'), (b',a')}, so each orbit is solved on its own.
    """
    n = sigma.n
    K = sigma.mean_kernel(m)
    pr = np.array([j * n + i for i in range(n) for j in range(n)])
    N2 = n * n
    C = np.zeros((N2, N2), dtype=complex)
    done = np.zeros((N2, N2), dtype=bool)
    for a in range(N2):
        for b in range(N2):
            if done[a, b]:
                continue
            orbit = sorted({(a, b), (b, a), (pr[a], pr[b]), (pr[b], pr[a])})
            pos = {p: k for k, p in enumerate(orbit)}
            d = len(orbit)
            rows = []
            for (x, y) in orbit:
                # z_{yx} - conj(z_{xy}) = 0 and z_{xy} k(x2,y2) - conj(z_{x'y'}) k(x1,y1) = 0, split into re/im
                for tgt, coef, src, scale in (((y, x), 1.0, (x, y), 1.0),
                                              ((x, y), K[x % n, y % n], (pr[x], pr[y]), K[x // n, y // n])):
                    re = np.zeros(2 * d)
                    im = np.zeros(2 * d)
                    i, j = pos[tgt], pos[src]
                    re[2 * i] += coef
                    im[2 * i + 1] += coef
                    re[2 * j] -= scale
                    im[2 * j + 1] += scale
                    rows.extend([re, im])
            A = np.array(rows)
            _, sv, Vt = np.linalg.svd(A)
            rank = int(np.sum(sv > 1e-12 * max(1.0, sv[0])))
            null = Vt[rank:]
            v = rng.standard_normal(len(null)) @ null if len(null) else np.zeros(2 * d)
            for (x, y), k in pos.items():
                C[x, y] = v[2 * k] + 1j * v[2 * k + 1]
                done[x, y] = True
    return C


def random_selfadjoint_map(sigma: DensityMatrix, m: Measure, rng) -> SuperOperator:
    """Hermitian and m-self-adjoint.

    For even m a random Hermitian map is averaged with its m-adjoint. For other m that average
    is no longer Hermitian, so the characteristic matrix is drawn from the solution space of the
    defining linear constraints instead.
    """
    n = sigma.n
    if is_even(m):
        Phi = random_hermitian_map(n, rng)
        return 0.5 * (Phi + adjoint_m(Phi, sigma, m))
    return from_characteristic(_selfadjoint_orbit_sample(sigma, m, rng), matrix_unit_basis(sigma))


def random_hamiltonian(n, rng):
    H = cgauss(rng, (n, n))
    return 0.5 * (H + H.conj().T)


def random_psd_contraction(M, rng, real=False, top=1.0):
    """Hermitian T with spectrum drawn uniformly from [0, top]."""
    U = np.linalg.qr(rng.standard_normal((M, M)))[0] if real else haar_unitary(M, rng)
    return (U * rng.uniform(0, top, M)) @ U.conj().T


def kraus_combination(kraus, T) -> SuperOperator:
    """A -> sum_ij T_ij V_i^* A V_j."""
    n = kraus[0].shape[0]
    M = sum(T[i, j] * np.kron(kraus[i].conj().T, kraus[j].T) for i in range(len(kraus)) for j in range(len(kraus)))
    return SuperOperator(n, M)


def lindblad_unital_channel(L: SuperOperator, t: float) -> SuperOperator:
    from scipy.linalg import expm

    return SuperOperator(L.n, expm(t * L.matrix))
