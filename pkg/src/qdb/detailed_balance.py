"""Self-adjoint CP maps: the B matrix criterion, the KMS space and its extremal decomposition,
and the canonical forms for the delta_s (GNS-type) inner products.

The antiunitary J used throughout acts on coefficient vectors by (Jv)_a = conj(v_{a'});
on matrices it reads B -> P conj(B) P with P the pairing permutation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InternalInconsistency,
    MembershipFailed,
    NotCP,
    NotDeltaSSelfAdjoint,
    NotDominated,
    NotKmsSelfAdjoint,
    NotUnital,
    PreconditionViolated,
    RealnessViolated,
)
from .kraus import KrausRep, arveson_T, check_dominance, gram_schmidt_solve, _require_minimal
from .linalg import DEFAULT_TOL, Tolerances, opnorm, real_rank
from .state import DensityMatrix, Measure, modular_power
from .superop import (
    SuperOperator,
    b_matrix_array,
    char_mu,
    index_pairs,
    is_cp,
    is_selfadjoint_m,
    matrix_unit_basis,
    pairing,
    require_hermitian,
)


@dataclass(frozen=True)
class BMatrix:
    B: np.ndarray
    sigma: DensityMatrix
    m: Measure
    commutation_residual: float


def antiunitary_conjugate(B: np.ndarray, n: int) -> np.ndarray:
    p = pairing(n)
    return B[np.ix_(p, p)].conj()


def b_matrix(Phi: SuperOperator, sigma: DensityMatrix, m: Measure, tol: Tolerances = DEFAULT_TOL) -> BMatrix:
    require_hermitian(Phi, tol)
    B = b_matrix_array(char_mu(Phi, sigma), sigma, m)
    ref = opnorm(B)
    res = opnorm(B - antiunitary_conjugate(B, sigma.n)) / ref if ref else 0.0
    return BMatrix(B, sigma, m, res)


# ---------------------------------------------------------------- the KMS space


def kms_space_residual(V, sigma: DensityMatrix) -> float:
    V = np.asarray(V, dtype=complex)
    return opnorm(modular_power(sigma, -0.5, V) - V.conj().T) / (1.0 + opnorm(V))


def kms_space_member(V, sigma: DensityMatrix, tol: Tolerances = DEFAULT_TOL):
    """(verdict, residual) for Delta^{-1/2} V = V^*."""
    r = kms_space_residual(V, sigma)
    return r <= tol.eq_abs, r


@dataclass(frozen=True)
class KmsSpaceBasis:
    elements: np.ndarray  # (N^2, N, N)
    omega: np.ndarray  # omega_a for a in row-major order


def kms_space_basis(sigma: DensityMatrix) -> KmsSpaceBasis:
    n = sigma.n
    E = matrix_unit_basis(sigma).elements
    om = sigma.omega().reshape(-1)
    els = []
    for a, (i, j) in enumerate(index_pairs(n)):
        w = om[a]
        Ea, Ep = E[a], E[j * n + i]
        if i == j:
            els.append(Ea)
            continue
        norm = np.sqrt(2.0 * np.cosh(w / 2.0))
        if i < j:
            els.append((np.exp(w / 4) * Ea - np.exp(-w / 4) * Ep) / (1j * norm))
        else:
            els.append((np.exp(w / 4) * Ea + np.exp(-w / 4) * Ep) / norm)
    return KmsSpaceBasis(np.array(els), om)


def real_subspace_basis(n: int, indices=None) -> np.ndarray:
    """Orthonormal columns spanning {v : v_a = conj(v_{a'})} over the reals (restricted to ``indices``).

    The set of indices must be closed under the pairing a -> a'. Columns are full-length vectors.
    """
    indices = range(n * n) if indices is None else indices
    idx = set(int(a) for a in indices)
    cols = []
    for a in sorted(idx):
        i, j = divmod(a, n)
        b = j * n + i
        if b not in idx:
            raise PreconditionViolated("index set not closed under pairing")
        e = np.zeros(n * n, dtype=complex)
        if a == b:
            e[a] = 1.0
            cols.append(e)
        elif a < b:
            e[a], e[b] = 1.0, 1.0
            cols.append(e / np.sqrt(2))
            f = np.zeros(n * n, dtype=complex)
            f[a], f[b] = 1j, -1j
            cols.append(f / np.sqrt(2))
    return np.array(cols).T


def _require_kms_sa(Phi, sigma, tol):
    ok, r = is_selfadjoint_m(Phi, sigma, Measure.kms(), tol)
    if not ok:
        raise NotKmsSelfAdjoint("map is not KMS self-adjoint", witness=r)


def kms_extremal_decomposition(Phi: SuperOperator, sigma: DensityMatrix, tol: Tolerances = DEFAULT_TOL):
    """[(w_r, V_r)] with Phi(A) = sum_r w_r V_r^* A V_r and every V_r in the KMS space."""
    ok, witness = is_cp(Phi, tol)
    if not ok:
        raise NotCP("map is not CP", witness=witness)
    _require_kms_sa(Phi, sigma, tol)
    n = sigma.n
    B = b_matrix_array(char_mu(Phi, sigma), sigma, Measure.kms())
    Q = real_subspace_basis(n)
    Breal = Q.conj().T @ B @ Q
    Breal = 0.5 * (Breal + Breal.conj().T).real
    w, X = np.linalg.eigh(Breal)
    order = np.argsort(-w, kind="stable")
    w, X = w[order], X[:, order]
    keep = w > tol.rank_rel * max(w[0], np.finfo(float).tiny)
    E = matrix_unit_basis(sigma).flat
    root2 = np.sqrt(sigma.eigenvalues[[j for _, j in index_pairs(n)]])
    out = []
    for wr, x in zip(w[keep], X[:, keep].T):
        k = int(np.argmax(np.abs(x)))
        x = x if x[k] > 0 else -x
        b = Q @ x
        V = ((b.conj() / root2) @ E).reshape(n, n)
        out.append((float(wr), V))
    return out


def _require_members(K: KrausRep, sigma, tol):
    for j, V in enumerate(K.operators):
        ok, r = kms_space_member(V, sigma, tol)
        if not ok:
            raise MembershipFailed(f"Kraus operator {j} is not in the KMS space", witness=r)


def kms_rn_test(Phi_kraus: KrausRep, Psi: SuperOperator, sigma: DensityMatrix, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Real T with Psi = sum T_ij V_i^* . V_j; dominance iff 0 <= T <= 1."""
    try:
        _require_members(Phi_kraus, sigma, tol)
    except MembershipFailed as exc:
        raise RealnessViolated(str(exc), witness=exc.witness) from exc
    T = arveson_T(Phi_kraus, Psi, tol)
    im = float(np.max(np.abs(T.imag), initial=0.0))
    if im > 1e-8:
        raise RealnessViolated("Radon-Nikodym matrix is not real", witness=im)
    return T.real


def kms_unital_extremal(Phi_kraus: KrausRep, sigma: DensityMatrix, tol: Tolerances = DEFAULT_TOL) -> bool:
    _require_minimal(Phi_kraus, tol)
    if not Phi_kraus.is_unital(tol):
        raise NotUnital("map is not unital")
    _require_members(Phi_kraus, sigma, tol)
    V = Phi_kraus.operators
    M = len(V)
    prods = [V[i].conj().T @ V[j] + V[j].conj().T @ V[i] for i in range(M) for j in range(i, M)]
    return real_rank(prods, tol) == len(prods)


# ---------------------------------------------------------------- delta_s canonical forms


@dataclass(frozen=True)
class CanonicalDeltaS:
    """Phi(A) = sum_{mu=1} V A V + sum_{mu>1} sum_k (mu^{1/2} V_k^* A V_k + mu^{-1/2} V_k A V_k^*)."""

    sigma: DensityMatrix
    mus: tuple
    families: tuple
    blocks: tuple  # row-major index sets J_mu carrying each family
    mu1_selfadjoint: bool
    pairing_note: str = field(default="a' = (j, i) for a = (i, j)")

    @property
    def n(self) -> int:
        return self.sigma.n

    def to_superop(self, T=None) -> SuperOperator:
        """Assemble the canonical form, optionally with per-family coefficient matrices T^(j)."""
        n = self.n
        L = SuperOperator.zero(n)
        for j, (mu, fam) in enumerate(zip(self.mus, self.families)):
            if not fam:
                continue
            Tj = np.eye(len(fam)) if T is None else np.asarray(T[j])
            for k, Vk in enumerate(fam):
                for l, Vl in enumerate(fam):
                    t = Tj[k, l]
                    if t == 0:
                        continue
                    if mu == 1.0:
                        L = L + t * SuperOperator(n, np.kron(Vk, Vl.T))
                    else:
                        L = L + t * (np.sqrt(mu) * SuperOperator(n, np.kron(Vk.conj().T, Vl.T))
                                     + SuperOperator(n, np.kron(Vl, Vk.conj())) * (1.0 / np.sqrt(mu)))
        return L

    def coefficient_rows(self, j: int) -> np.ndarray:
        E = matrix_unit_basis(self.sigma)
        return np.array([E.coefficients(V) for V in self.families[j]])

    def x_matrices(self):
        """Hermitian images of a real basis of the admissible coefficient tuples (B^(j)).

        For mu > 1 the tuple entry is a Hermitian M_j x M_j matrix; for mu = 1 it is real symmetric.
        """
        out = []
        for mu, fam in zip(self.mus, self.families):
            M = len(fam)

            def X(k, l):
                if mu == 1.0:
                    return fam[k] @ fam[l]
                return np.sqrt(mu) * fam[k].conj().T @ fam[l] + fam[l] @ fam[k].conj().T / np.sqrt(mu)

            for k in range(M):
                out.append(X(k, k))
                for l in range(k + 1, M):
                    out.append(X(k, l) + X(l, k))
                    if mu != 1.0:
                        out.append(1j * (X(k, l) - X(l, k)))
        return out

    def parameter_count(self) -> int:
        tot = 0
        for mu, fam in zip(self.mus, self.families):
            M = len(fam)
            tot += M * (M + 1) // 2 if mu == 1.0 else M * M
        return tot


def _cluster(values: np.ndarray):
    """Group equal values with gap threshold 1e-8 (1 + max |value|). Returns labels and centres."""
    thr = 1e-8 * (1.0 + float(np.max(np.abs(values), initial=0.0)))
    order = np.argsort(values, kind="stable")
    labels = np.empty(len(values), dtype=int)
    centres = []
    cur = -1
    prev = None
    for a in order:
        if prev is None or values[a] - prev > thr:
            cur += 1
            centres.append([])
        labels[a] = cur
        centres[cur].append(values[a])
        prev = values[a]
    return labels, np.array([np.mean(c) for c in centres])


def _delta_s_violation(Phi, sigma, s, tol):
    ok, r = is_selfadjoint_m(Phi, sigma, Measure.delta(s), tol)
    return ok, r


def delta_s_structure(Phi: SuperOperator, sigma: DensityMatrix, s: float = 0.0, s_alt: float | None = None,
                      tol: Tolerances = DEFAULT_TOL) -> CanonicalDeltaS:
    if abs(s - 0.5) < 1e-12:
        raise PreconditionViolated("s = 1/2 is the KMS case")
    require_hermitian(Phi, tol)
    ok, witness = is_cp(Phi, tol)
    if not ok:
        raise NotCP("map is not CP", witness=witness)
    n = sigma.n
    C = char_mu(Phi, sigma)
    om = sigma.omega().reshape(-1)
    labels, centres = _cluster(om)
    scale = tol.eq_abs * (1.0 + opnorm(C))
    cross = labels[:, None] != labels[None, :]
    if np.any(np.abs(C[cross]) > scale):
        a, b = np.unravel_index(np.argmax(np.where(cross, np.abs(C), 0.0)), C.shape)
        raise NotDeltaSSelfAdjoint("coefficients couple different modular eigenvalues",
                                   witness=(index_pairs(n)[a], index_pairs(n)[b]))
    ok_s, r_s = _delta_s_violation(Phi, sigma, s, tol)
    s_alt = (0.3 if s == 0.0 else 0.0) if s_alt is None else s_alt
    ok_alt, _ = _delta_s_violation(Phi, sigma, s_alt, tol)
    if ok_s != ok_alt:
        raise InternalInconsistency("delta_s verdict depends on s", witness=(s, s_alt))
    if not ok_s:
        B = b_matrix_array(C, sigma, Measure.delta(s))
        D = np.abs(B - antiunitary_conjugate(B, n))
        a, b = np.unravel_index(np.argmax(D), D.shape)
        raise NotDeltaSSelfAdjoint("map is not delta_s self-adjoint",
                                   witness=(index_pairs(n)[a], index_pairs(n)[b], r_s))

    E = matrix_unit_basis(sigma).flat
    thr = tol.rank_rel * max(1.0, opnorm(C))
    mus, fams, blocks = [], [], []
    for c, w in enumerate(centres):
        is_one = abs(w) <= 1e-8 * (1 + np.abs(om).max())
        if w < 0 and not is_one:
            continue  # folded into the partner with positive omega
        J = np.flatnonzero(labels == c)
        CJ = C[np.ix_(J, J)]
        fam = []
        if is_one:
            Q = real_subspace_basis(n, J)[J, :]
            Cr = Q.conj().T @ CJ @ Q
            Cr = 0.5 * (Cr + Cr.conj().T).real
            ev, X = np.linalg.eigh(Cr)
            for lamk, x in zip(ev[::-1], X[:, ::-1].T):
                if lamk <= thr:
                    continue
                k = int(np.argmax(np.abs(x)))
                x = x if x[k] > 0 else -x
                wv = Q @ x
                V = ((wv.conj() @ E[J]) * np.sqrt(lamk)).reshape(n, n)
                fam.append(0.5 * (V + V.conj().T))
            mu = 1.0
        else:
            mu = float(np.exp(w))
            ev, X = np.linalg.eigh(0.5 * (CJ + CJ.conj().T))
            for lamk, x in zip(ev[::-1], X[:, ::-1].T):
                if lamk <= thr:
                    continue
                k = int(np.argmax(np.abs(x)))
                x = x * (abs(x[k]) / x[k])
                V = ((x.conj() @ E[J]) * np.sqrt(lamk / np.sqrt(mu))).reshape(n, n)
                fam.append(V)
        if not fam:
            continue
        mus.append(mu)
        fams.append(tuple(fam))
        blocks.append(tuple(int(a) for a in J))
    order = np.argsort(mus, kind="stable")
    canon = CanonicalDeltaS(sigma, tuple(mus[k] for k in order), tuple(fams[k] for k in order),
                            tuple(blocks[k] for k in order), True)
    err = opnorm(canon.to_superop().matrix - Phi.matrix)
    if err > 1e-9 * (1.0 + Phi.norm()):
        raise InternalInconsistency("canonical form does not reproduce the map", witness=err)
    return canon


def delta_s_order_test(canon: CanonicalDeltaS, Psi: SuperOperator, sigma: DensityMatrix | None = None,
                       s: float = 0.0, tol: Tolerances = DEFAULT_TOL):
    """Per-family T^(j) with Psi written in the canonical form of ``canon``; dominance iff 0 <= T^(j) <= 1."""
    sigma = sigma or canon.sigma
    ok, witness = is_cp(Psi, tol)
    if not ok:
        raise NotCP("dominated map must be CP", witness=witness)
    C = char_mu(Psi, sigma)
    Ts = []
    for j, (mu, J) in enumerate(zip(canon.mus, canon.blocks)):
        if not canon.families[j]:
            Ts.append(np.zeros((0, 0)))
            continue
        S = canon.coefficient_rows(j)[:, list(J)]
        T, _ = gram_schmidt_solve(S, C[np.ix_(J, J)], scale=1.0 if mu == 1.0 else np.sqrt(mu))
        if mu == 1.0:
            im = float(np.max(np.abs(T.imag), initial=0.0))
            if im > 1e-8:
                raise RealnessViolated("mu = 1 block is not real", witness=im)
            T = T.real
        Ts.append(T)
    rebuilt = canon.to_superop(Ts)
    resid = opnorm(rebuilt.matrix - Psi.matrix) / (1.0 + Psi.norm())
    for T in Ts:
        if T.size:
            check_dominance(T, 0.0)
    if resid > 1e-8:
        raise NotDominated("map is not of canonical form over the dominating families", witness=resid)
    return Ts


def delta_s_unital_extremal(canon: CanonicalDeltaS, tol: Tolerances = DEFAULT_TOL) -> bool:
    Phi = canon.to_superop()
    if opnorm(Phi(np.eye(canon.n)) - np.eye(canon.n)) > tol.eq_abs * (1.0 + Phi.norm()):
        raise NotUnital("map is not unital")
    X = canon.x_matrices()
    return bool(X) and real_rank(X, tol) == canon.parameter_count()


def delta_s_nonextremal_witness(canon: CanonicalDeltaS, tol: Tolerances = DEFAULT_TOL):
    """A unital delta_s self-adjoint CP map Psi != Phi with Phi - Psi/2 CP, or None when Phi is extremal."""
    if delta_s_unital_extremal(canon, tol):
        return None
    X = canon.x_matrices()
    Z = np.array([x.reshape(-1) for x in X])
    R = np.hstack([Z.real, Z.imag])
    _, _, Vt = np.linalg.svd(R.T)
    coeffs = Vt[-1]
    Bs, pos = [], 0
    for mu, fam in zip(canon.mus, canon.families):
        M = len(fam)
        B = np.zeros((M, M), dtype=complex)
        for k in range(M):
            B[k, k] = coeffs[pos]
            pos += 1
            for l in range(k + 1, M):
                B[k, l] += coeffs[pos]
                B[l, k] += coeffs[pos]
                pos += 1
                if mu != 1.0:
                    B[k, l] += 1j * coeffs[pos]
                    B[l, k] -= 1j * coeffs[pos]
                    pos += 1
        Bs.append(B)
    t = 1.0 / max(opnorm(B) for B in Bs if B.size)
    Ts = [np.eye(len(B)) + t * B for B in Bs]
    return canon.to_superop(Ts)


def default_measure_family():
    return [Measure.delta(s) for s in (0.0, 0.25, 0.5, 0.75, 1.0)] + [Measure.bkm(), Measure.ms(0.2)]


def gns_universal_check(Phi: SuperOperator, sigma: DensityMatrix, sample_measures=None,
                        tol: Tolerances = DEFAULT_TOL) -> bool:
    if not is_selfadjoint_m(Phi, sigma, Measure.gns(), tol)[0]:
        return False
    family = default_measure_family() if sample_measures is None else sample_measures
    return all(is_selfadjoint_m(Phi, sigma, m, tol)[0] for m in family)
