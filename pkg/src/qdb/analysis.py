"""Structured analysis of a single map: every verdict carries a residual or a witness."""

from __future__ import annotations

import numpy as np

from .detailed_balance import (
    delta_s_structure,
    delta_s_unital_extremal,
    kms_extremal_decomposition,
    kms_unital_extremal,
)
from .errors import QdbError
from .even_bkm import even_decompose, evenly_selfadjoint_residuals, is_minimally_degenerate
from .kraus import KrausRep, choi_extremal_unital, kraus_of
from .linalg import DEFAULT_TOL, Tolerances, is_psd, opnorm
from .state import DensityMatrix, Measure
from .superop import (
    SuperOperator,
    decompose_HS,
    hermitian_residual,
    is_cp,
    is_selfadjoint_m,
    reduced_characteristic,
    stationary_state,
    unitality_class,
)

DEFAULT_MEASURES = (Measure.gns(), Measure.kms(), Measure.bkm(), Measure.ms(0.3))


def _err(exc: QdbError) -> dict:
    out = {"error": type(exc).__name__, "message": str(exc)}
    if getattr(exc, "witness", None) is not None:
        w = exc.witness
        out["witness"] = w if isinstance(w, (int, float, str, tuple, list)) else repr(w)
    return out


def analyze(Phi: SuperOperator, sigma: DensityMatrix | None = None, measures=DEFAULT_MEASURES,
            tol: Tolerances = DEFAULT_TOL) -> dict:
    n = Phi.n
    sigma = sigma or DensityMatrix.maximally_mixed(n)
    I = np.eye(n)
    rep: dict = {"n": n, "sigma_spectrum": [float(v) for v in sigma.eigenvalues]}

    hres = hermitian_residual(Phi)
    herm = hres <= tol.eq_abs * (1.0 + Phi.norm())
    rep["hermitian"] = {"value": bool(herm), "residual": hres}

    cp, cp_w = is_cp(Phi, tol)
    rep["cp"] = {"value": bool(cp), "min_eig": float(cp_w) if np.isscalar(cp_w) else None}

    cls = unitality_class(Phi, tol)
    rep["unitality"] = {
        "class": cls,
        "unital_residual": opnorm(Phi(I) - I),
        "annihilation_residual": opnorm(Phi(I)),
    }

    if herm and cls == "annihilates_one":
        R = reduced_characteristic(Phi, sigma, tol)
        ok, lo = is_psd(R, tol)
        ev = np.linalg.eigvalsh(0.5 * (R + R.conj().T))
        rank = int(np.sum(ev > tol.rank_rel * max(1.0, abs(ev[-1])) + 1e-9))
        rep["qms"] = {"value": bool(ok), "min_eig": lo, "reduced_rank": rank,
                      "reduced_rank_deficient": bool(rank < n * n - 1)}
    else:
        rep["qms"] = {"value": False, "reason": "not Hermitian" if not herm else "does not annihilate 1"}

    if herm:
        sa = {}
        for m in measures:
            ok, r = is_selfadjoint_m(Phi, sigma, m, tol)
            sa[m.name()] = {"value": bool(ok), "residual": r}
        rep["selfadjoint"] = sa
        hs = decompose_HS(Phi, sigma)
        rep["hs_split"] = {"X": hs.X, "Y": hs.Y, "perp_norm": hs.perp.norm()}

    if cp:
        K = kraus_of(Phi, tol)
        rep["kraus"] = {"count": len(K), "operators": list(K.operators)}
        if cls == "unital":
            rep["choi_extremal_unital"] = {"value": choi_extremal_unital(K, tol)}

    kms_ok = herm and is_selfadjoint_m(Phi, sigma, Measure.kms(), tol)[0]
    gns_ok = herm and is_selfadjoint_m(Phi, sigma, Measure.gns(), tol)[0]

    if cp and kms_ok:
        try:
            dec = kms_extremal_decomposition(Phi, sigma, tol)
            rep["kms_decomposition"] = {"terms": len(dec), "weights": [w for w, _ in dec]}
            if cls == "unital":
                Kk = KrausRep.of([np.sqrt(w) * V for w, V in dec], tol)
                rep["kms_decomposition"]["unital_extremal"] = kms_unital_extremal(Kk, sigma, tol)
        except QdbError as exc:
            rep["kms_decomposition"] = _err(exc)

    if cp and gns_ok:
        try:
            canon = delta_s_structure(Phi, sigma, 0.0, 0.3)
            rep["delta_s_canonical"] = {
                "mus": list(canon.mus),
                "family_sizes": [len(f) for f in canon.families],
                "reconstruction_error": opnorm(canon.to_superop().matrix - Phi.matrix),
            }
            if cls == "unital":
                rep["delta_s_canonical"]["unital_extremal"] = delta_s_unital_extremal(canon, tol)
        except QdbError as exc:
            rep["delta_s_canonical"] = _err(exc)

    if herm and sigma.n >= 2 and is_minimally_degenerate(sigma):
        res = evenly_selfadjoint_residuals(Phi, sigma, tol=tol)
        even = all(ok for ok, _ in res.values())
        rep["even"] = {"value": even, "residuals": {k: r for k, (_, r) in res.items()}}
        if even:
            try:
                d = even_decompose(Phi, sigma, generator=(cls == "annihilates_one"), tol=tol)
                rep["even"]["T"] = d.T
            except QdbError as exc:
                rep["even"]["decomposition"] = _err(exc)

    if herm and cls in ("unital", "annihilates_one"):
        try:
            st = stationary_state(Phi, tol)
            rep["stationary_state"] = {"spectrum": [float(v) for v in st.eigenvalues], "matrix": st.matrix}
        except QdbError as exc:
            rep["stationary_state"] = _err(exc)
    return rep


def render_text(rep: dict, indent: int = 0) -> str:
    """Plain-text mirror of the JSON report; matrices are summarized by shape."""
    pad = "  " * indent
    lines = []
    for k, v in rep.items():
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.append(render_text(v, indent + 1))
        elif isinstance(v, np.ndarray):
            lines.append(f"{pad}{k}: <{v.shape[0]}x{v.shape[1] if v.ndim > 1 else 1} matrix>")
        elif isinstance(v, list) and v and isinstance(v[0], np.ndarray):
            lines.append(f"{pad}{k}: <{len(v)} matrices>")
        elif isinstance(v, float):
            lines.append(f"{pad}{k}: {v:.3e}")
        else:
            lines.append(f"{pad}{k}: {v}")
    return "\n".join(lines)
