"""Randomized certificate suites. Every suite is deterministic given its seed."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .detailed_balance import (
    delta_s_nonextremal_witness,
    delta_s_structure,
    delta_s_unital_extremal,
    kms_extremal_decomposition,
    kms_rn_test,
    kms_space_member,
)
from .errors import NotDeltaSSelfAdjoint, NotDominated
from .even_bkm import (
    assemble_even,
    bkm_transfer,
    even_decompose,
    even_extreme_cp,
    evenly_selfadjoint_test,
    psi_ij,
)
from .kraus import KrausRep, arveson_T, kraus_of
from .linalg import haar_unitary, opnorm
from .n2 import N2Params, n2_assemble, n2_dissipative, n2_G, n2_generator, n2_r0, n2_reduced
from .qms import kms_complete_generator, lyapunov_residual, pointedness_witness
from .sampling import (
    cgauss,
    kraus_combination,
    lindblad_unital_channel,
    random_cp,
    random_gns_cp,
    random_hermitian_map,
    random_kms_cp,
    random_kms_kraus,
    random_measure,
    random_psd_contraction,
    random_selfadjoint_map,
    random_sigma,
    random_spectrum,
)
from .state import DensityMatrix, Measure, lambda_kernel_psd
from .superop import (
    SuperOperator,
    coefficient_residual,
    is_cp,
    is_hermitian_map,
    is_qms_generator,
    is_selfadjoint_m,
    matrix_unit_basis,
    reduced_characteristic,
    selfadjoint_residual,
)

SUITES = ("core", "kms", "gns", "even", "bkm", "n2", "order", "pointed")


@dataclass
class Check:
    count: int = 0
    failures: int = 0
    max_residual: float = 0.0
    min_residual: float = float("inf")

    def record(self, ok: bool, residual: float = 0.0):
        self.count += 1
        self.failures += int(not ok)
        if np.isfinite(residual):
            self.max_residual = max(self.max_residual, float(residual))
            self.min_residual = min(self.min_residual, float(residual))

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.count > 0


@dataclass
class SuiteResult:
    name: str
    checks: dict = field(default_factory=dict)

    def __getitem__(self, key) -> Check:
        return self.checks.setdefault(key, Check())

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def to_json(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "checks": {k: {"passed": c.passed, "count": c.count, "failures": c.failures,
                           "max_residual": c.max_residual,
                           "min_residual": c.min_residual if np.isfinite(c.min_residual) else None}
                       for k, c in self.checks.items()},
        }


def choi_psd(Phi: SuperOperator, tol: float = 1e-9) -> bool:
    """Choi matrix sum_ij E_ij (x) Phi(E_ij), built entry by entry from the action of Phi."""
    n = Phi.n
    J = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            E = np.zeros((n, n), dtype=complex)
            E[i, j] = 1.0
            J[i * n:(i + 1) * n, j * n:(j + 1) * n] = Phi(E)
    ev = np.linalg.eigvalsh(0.5 * (J + J.conj().T))
    return bool(ev[0] >= -tol * max(1.0, abs(ev[-1])))


def _dim(rng, lo=2, hi=4):
    return int(rng.integers(lo, hi + 1))


# ---------------------------------------------------------------- suites


def suite_core(rng, trials: int) -> SuiteResult:
    r = SuiteResult("core")
    for t in range(trials):
        n = _dim(rng, 2, 5)
        Phi = random_cp(n, rng) if t % 2 == 0 else random_hermitian_map(n, rng)
        r["cp_matches_choi"].record(is_cp(Phi)[0] == choi_psd(Phi))
        if t % 2 == 0:
            K = kraus_of(Phi)
            err = opnorm(K.to_superop().matrix - Phi.matrix)
            r["kraus_roundtrip"].record(err < 1e-10, err)
        sigma = random_sigma(_dim(rng, 2, 4), rng)
        m = random_measure(rng)
        sa = random_selfadjoint_map(sigma, m, rng)
        ok1, res1 = is_selfadjoint_m(sa, sigma, m)
        r["selfadjoint_built_passes"].record(ok1 and coefficient_residual(sa, sigma, m) < 1e-9, res1)
        gen = random_hermitian_map(sigma.n, rng)
        ok2, _ = is_selfadjoint_m(gen, sigma, m)
        r["generic_fails"].record(not ok2)
        a = selfadjoint_residual(gen, sigma, m) > 1e-9
        b = coefficient_residual(gen, sigma, m) > 1e-9
        r["routes_agree"].record(a == b)
    return r


def suite_kms(rng, trials: int) -> SuiteResult:
    r = SuiteResult("kms")
    for _ in range(trials):
        n = _dim(rng, 2, 4)
        sigma = random_sigma(n, rng)
        Phi = random_kms_cp(sigma, rng)
        dec = kms_extremal_decomposition(Phi, sigma)
        rebuilt = sum((w * SuperOperator.from_kraus([V]) for w, V in dec), SuperOperator.zero(n))
        mem = max(kms_space_member(V, sigma)[1] for _, V in dec)
        err = opnorm(rebuilt.matrix - Phi.matrix)
        r["decomposition"].record(len(dec) <= n * n and mem < 1e-9 and err < 1e-9, max(mem, err))

        ops = random_kms_kraus(sigma, rng, M=int(rng.integers(1, n * n)), traceless=True)
        Psi1 = SuperOperator.from_kraus(ops)
        form = kms_complete_generator(Psi1, sigma)
        L1 = form.to_superop()
        I = np.eye(n)
        one = opnorm(L1(I))
        sa = selfadjoint_residual(L1, sigma, Measure.kms())
        trk = abs(np.trace(form.K))
        s = sigma.power(0.5)
        lyap = lyapunov_residual(sigma, form.K, -1j * (s @ form.H - form.H @ s))
        ok = one < 1e-12 and sa < 1e-9 and trk < 1e-12 and lyap < 1e-12 and is_qms_generator(L1, sigma)
        r["completion"].record(ok, max(one, sa, trk, lyap))

        T = random_psd_contraction(len(ops), rng, real=True, top=float(rng.uniform(0.5, 1.5)))
        Psi2 = kraus_combination(ops, T)
        L2 = kms_complete_generator(Psi2, sigma).to_superop()
        dominated = is_cp(Psi1 - Psi2)[0]
        r["order_transfer"].record(dominated == is_qms_generator(L1 - L2, sigma))
    return r


def suite_order(rng, trials: int) -> SuiteResult:
    r = SuiteResult("order")
    for t in range(trials):
        n = _dim(rng, 2, 4)
        M = int(rng.integers(1, n * n + 1))
        K = KrausRep.of([cgauss(rng, (n, n)) for _ in range(M)])
        T0 = random_psd_contraction(M, rng)
        T = arveson_T(K, kraus_combination(K.operators, T0))
        err = float(np.abs(T - T0).max())
        r["arveson_recovery"].record(err < 1e-8, err)

        T1 = random_psd_contraction(M, rng, top=float(rng.uniform(0.5, 1.5)))
        Psi = kraus_combination(K.operators, T1)
        try:
            arveson_T(K, Psi)
            verdict = True
        except NotDominated:
            verdict = False
        r["dominance_matches_direct"].record(verdict == is_cp(K.to_superop() - Psi)[0])

        sigma = random_sigma(n, rng)
        Mk = int(rng.integers(1, n * n + 1))
        Kk = KrausRep.of(random_kms_kraus(sigma, rng, M=Mk))
        Tk = random_psd_contraction(Mk, rng, real=True)
        Tr = kms_rn_test(Kk, kraus_combination(Kk.operators, Tk), sigma)
        errk = float(np.abs(Tr - Tk).max())
        r["kms_rn_recovery"].record(errk < 1e-8, errk)
    return r


def _unital_gns_instance(sigma: DensityMatrix, pairs, duplicate: bool, rng) -> SuperOperator:
    """Unital GNS self-adjoint CP map built from one operator per chosen modular block and a diagonal rest.

    With ``duplicate`` the diagonal part is split over two operators with equal squares, which
    plants a linear dependency among the extremality test matrices.
    """
    n = sigma.n
    lam = sigma.eigenvalues
    E = matrix_unit_basis(sigma).elements.reshape(n, n, n, n)
    Phi = SuperOperator.zero(n)
    diag = np.zeros(n)
    for i, j in pairs:
        mu = lam[i] / lam[j]
        t2 = float(rng.uniform(0.05, 0.2)) / (n * max(np.sqrt(mu), 1 / np.sqrt(mu)) * len(pairs))
        V = np.sqrt(t2) * E[i, j]
        Phi = Phi + np.sqrt(mu) * SuperOperator.from_kraus([V]) + (1 / np.sqrt(mu)) * SuperOperator(n, np.kron(V, V.conj()))
        diag[j] += np.sqrt(mu) * t2 * n
        diag[i] += t2 * n / np.sqrt(mu)
    U = sigma.eigenvectors
    w = np.sqrt(1.0 - diag) * rng.choice([-1.0, 1.0], n)
    W = (U * w) @ U.conj().T
    if duplicate:
        S = (U * np.where(np.arange(n) % 2 == 0, 1.0, -1.0)) @ U.conj().T
        W2 = W @ S
        Phi = Phi + 0.5 * SuperOperator(n, np.kron(W, W.T)) + 0.5 * SuperOperator(n, np.kron(W2, W2.T))
    else:
        Phi = Phi + SuperOperator(n, np.kron(W, W.T))
    return Phi


def suite_gns(rng, trials: int) -> SuiteResult:
    r = SuiteResult("gns")
    for t in range(trials):
        n = _dim(rng, 2, 4)
        sigma = random_sigma(n, rng)
        Phi = random_gns_cp(sigma, rng) if t % 2 == 0 else random_kms_cp(sigma, rng)
        verdicts = []
        for s in (0.0, 0.3):
            try:
                canon = delta_s_structure(Phi, sigma, s)
                err = opnorm(canon.to_superop().matrix - Phi.matrix)
                r["canonical_reconstruction"].record(err < 1e-9, err)
                verdicts.append(True)
            except NotDeltaSSelfAdjoint:
                verdicts.append(False)
        r["s_independence"].record(verdicts[0] == verdicts[1])
        r["planted_verdict"].record(verdicts[0] == (t % 2 == 0))
    for t in range(max(2, trials // 5)):
        n = 3
        lam = random_spectrum(n, rng, minimally_degenerate=True)
        sigma = DensityMatrix.from_spectrum(lam, haar_unitary(n, rng))
        pairs = [(0, 1), (0, 2)] if t % 2 else [(0, 1)]
        dup = t % 4 >= 2
        Phi = _unital_gns_instance(sigma, pairs, dup, rng)
        canon = delta_s_structure(Phi, sigma, 0.0)
        ext = delta_s_unital_extremal(canon)
        r["main6_flip"].record(ext == (not dup))
        if not ext:
            Psi = delta_s_nonextremal_witness(canon)
            ok = (opnorm(Psi(np.eye(n)) - np.eye(n)) < 1e-9 and is_cp(Phi - 0.5 * Psi)[0]
                  and opnorm(Psi.matrix - Phi.matrix) > 1e-6)
            r["nonextremal_witness"].record(ok)
    return r


def suite_even(rng, trials: int) -> SuiteResult:
    r = SuiteResult("even")
    for t in range(trials):
        n = _dim(rng, 2, 4)
        lam = random_spectrum(n, rng, minimally_degenerate=True)
        sigma = DensityMatrix.from_spectrum(lam, haar_unitary(n, rng))
        i, j = rng.choice(n, 2, replace=False)
        P = psi_ij(sigma, int(i), int(j))
        r["psi_even_not_gns"].record(evenly_selfadjoint_test(P, sigma)
                                     and not is_selfadjoint_m(P, sigma, Measure.gns())[0])
        phi0 = random_gns_cp(sigma, rng)
        T = rng.standard_normal((n, n))
        np.fill_diagonal(T, 0.0)
        d = even_decompose(assemble_even(phi0, T, sigma), sigma)
        err = max(float(np.abs(d.T - T).max()), opnorm(d.phi0.matrix - phi0.matrix))
        r["decompose_planted"].record(err < 1e-9, err)
        a1, a2 = sorted(rng.choice(n, 2, replace=False))
        W = even_extreme_cp(sigma, (int(a1), int(a2)), float(rng.uniform(0.1, 2)), float(rng.uniform(0, 2 * np.pi)))
        r["witness_even_not_gns"].record(is_cp(W)[0] and evenly_selfadjoint_test(W, sigma)
                                         and not is_selfadjoint_m(W, sigma, Measure.gns())[0])
        K = random_kms_cp(sigma, rng)
        r["witness_kms_not_even"].record(is_cp(K)[0] and is_selfadjoint_m(K, sigma, Measure.kms())[0]
                                         and not evenly_selfadjoint_test(K, sigma))
    return r


def suite_bkm(rng, trials: int) -> SuiteResult:
    r = SuiteResult("bkm")
    for _ in range(trials):
        n = _dim(rng, 2, 4)
        sigma = random_sigma(n, rng)
        ops = random_kms_kraus(sigma, rng, M=2, traceless=True)
        L = kms_complete_generator(SuperOperator.from_kraus(ops), sigma).to_superop()
        Phi = lindblad_unital_channel(L, float(rng.uniform(0.1, 1.0)))
        out = bkm_transfer(Phi, sigma)
        res = selfadjoint_residual(out, sigma, Measure.bkm())
        unital = opnorm(out(np.eye(n)) - np.eye(n))
        r["transfer"].record(res < 1e-9 and unital < 1e-9 and is_cp(out)[0], max(res, unital))
        n6 = _dim(rng, 2, 6)
        s6 = random_sigma(n6, rng, floor=0.005)
        ok = all(lambda_kernel_psd(s6, Measure.ms(s), inverted=True) for s in (0.0, 0.25, 0.4))
        r["inverse_kernel_psd"].record(ok)
    found = False
    for _ in range(50):
        s3 = random_sigma(3, rng)
        if not lambda_kernel_psd(s3, Measure.bkm(), inverted=False):
            found = True
            break
    r["bkm_not_cp_witness"].record(found)
    return r


def suite_n2(rng, trials: int) -> SuiteResult:
    r = SuiteResult("n2")
    measures = [Measure.bkm(), Measure.ms(0.2), Measure.ms(0.0), Measure.kms()]
    for t in range(trials):
        lam1 = float(rng.uniform(0.05, 0.95))
        if abs(lam1 - 0.5) < 1e-3:
            lam1 = 0.3
        m = measures[t % len(measures)]
        a = float(rng.uniform(0.02, 0.98))
        g = np.sqrt(lam1 * (1 - lam1))
        U = haar_unitary(2, rng) if t % 2 else None
        p = N2Params(lam1, m, a=a, zeta=float(rng.uniform(0, a)) * g * np.exp(1j * rng.uniform(0, 2 * np.pi)), U=U)
        phi = float(rng.uniform(0, 2 * np.pi))
        r0 = n2_r0(p, phi)
        p = p.replace(z=float(rng.uniform(0, 1)) * r0 * np.exp(1j * phi))
        L = n2_generator(p)
        err = float(np.abs(reduced_characteristic(L, p.sigma, order="diagonal_first") - n2_reduced(p)).max())
        r["reduced_matches_pipeline"].record(err < 1e-10, err)
        lo = float(np.linalg.eigvalsh(n2_reduced(p.replace(z=r0 * np.exp(1j * phi)))).min())
        hi = float(np.linalg.eigvalsh(n2_reduced(p.replace(z=1.01 * r0 * np.exp(1j * phi)))).min())
        r["r0_boundary"].record(-1e-9 <= lo <= 1e-7 and hi < -1e-9, abs(lo))
        A = n2_assemble(p)
        herm = is_hermitian_map(A)
        one = opnorm(A(np.eye(2)))
        sa = selfadjoint_residual(A, p.sigma, m)
        match = opnorm(A.matrix - L.matrix)
        r["assembled_certificates"].record(herm and one < 1e-9 and sa < 1e-9 and match < 1e-9
                                           and is_qms_generator(A, p.sigma), max(one, sa, match))
        if m.is_kms():
            form = kms_complete_generator(n2_dissipative(p), p.sigma)
            dk = opnorm(form.K - n2_G(p)[2])
            r["kms_K_agrees"].record(dk < 1e-9, dk)
    return r


def suite_pointed(rng, trials: int) -> SuiteResult:
    r = SuiteResult("pointed")
    for m in (Measure.gns(), Measure.kms(), Measure.bkm(), Measure.ms(0.3)):
        for _ in range(max(1, trials // 10)):
            sigma = random_sigma(_dim(rng, 2, 4), rng)
            w = pointedness_witness(m, sigma, 10, rng)
            r[f"no_false_pass[{m.name()}]"].record(w["false_passes"] == 0 and w["min_residual"] > 1e-6,
                                                   w["min_residual"])
    return r


_FUNCS = {
    "core": suite_core,
    "kms": suite_kms,
    "gns": suite_gns,
    "even": suite_even,
    "bkm": suite_bkm,
    "n2": suite_n2,
    "order": suite_order,
    "pointed": suite_pointed,
}

DEFAULT_TRIALS = {"core": 100, "kms": 50, "gns": 100, "even": 50, "bkm": 50, "n2": 100, "order": 50, "pointed": 100}


def run(suite: str = "all", seed: int = 0, trials: int | None = None):
    """Run one suite (or every suite) with per-suite generators spawned from ``seed``."""
    names = SUITES if suite == "all" else (suite,)
    if any(nm not in _FUNCS for nm in names):
        raise ValueError(f"unknown suite {suite!r}")
    children = np.random.SeedSequence(seed).spawn(len(SUITES))
    out = []
    for nm in names:
        rng = np.random.default_rng(children[SUITES.index(nm)])
        out.append(_FUNCS[nm](rng, DEFAULT_TRIALS[nm] if trials is None else trials))
    return out
