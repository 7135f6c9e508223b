"""JSON encoding of matrices, states, measures and maps.

Complex entries are [re, im] pairs and matrices are lists of rows. Floats are written with
Python's shortest round-trip repr, so a dump/load cycle is bit-exact.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .state import DensityMatrix, Measure
from .superop import SuperOperator


def _reject_constant(name):
    raise ValueError(f"non-finite constant {name}")


def loads(text: str):
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def load(path):
    return loads(Path(path).read_text())


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=False)


def digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:16]


# ---------------------------------------------------------------- complex matrices


def complex_to_json(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def matrix_to_json(A) -> list:
    A = np.asarray(A)
    return [[complex_to_json(v) for v in row] for row in A]


def _scalar(v, where):
    if isinstance(v, bool):
        raise ValidationError(f"{where}: boolean is not a number")
    if isinstance(v, (int, float)):
        z = complex(v)
    elif isinstance(v, list) and len(v) == 2 and all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in v):
        z = complex(v[0], v[1])
    else:
        raise ValidationError(f"{where}: expected a number or [re, im]")
    if not np.isfinite(z.real) or not np.isfinite(z.imag):
        raise ValidationError(f"{where}: non-finite entry")
    return z


def matrix_from_json(obj, where="matrix", square=True) -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ValidationError(f"{where}: expected a non-empty list of rows")
    cols = len(obj[0])
    rows = []
    for i, r in enumerate(obj):
        if len(r) != cols:
            raise ValidationError(f"{where}[{i}]: ragged row")
        rows.append([_scalar(v, f"{where}[{i}][{j}]") for j, v in enumerate(r)])
    A = np.array(rows, dtype=complex)
    if square and A.shape[0] != A.shape[1]:
        raise ValidationError(f"{where}: matrix is not square")
    return A


# ---------------------------------------------------------------- measures and states


_ALIASES = {"gns": Measure.gns, "kms": Measure.kms, "bkm": Measure.bkm}


def measure_from_json(obj, where="measure") -> Measure:
    if isinstance(obj, str):
        key = obj.strip().lower()
        if key in _ALIASES:
            return _ALIASES[key]()
        if key.startswith("ms(") and key.endswith(")"):
            return Measure.ms(float(key[3:-1]))
        if key.startswith("delta(") and key.endswith(")"):
            return Measure.delta(float(key[6:-1]))
        raise ValidationError(f"{where}: unknown measure alias {obj!r}")
    if isinstance(obj, dict) and set(obj) == {"ms"}:
        return Measure.ms(float(obj["ms"]))
    if isinstance(obj, dict):
        try:
            atoms = tuple((float(a["s"]), float(a["w"])) for a in obj.get("atoms", []))
            return Measure(atoms, float(obj.get("uniform", 0.0)), label=str(obj.get("label", "")))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"{where}: atoms need 's' and 'w'") from exc
    raise ValidationError(f"{where}: expected an alias or an object")


def measure_to_json(m: Measure) -> dict:
    out = {"atoms": [{"s": s, "w": w} for s, w in m.atoms], "uniform": m.uniform}
    if m.label:
        out["label"] = m.label
    return out


def parse_measure_arg(text: str) -> Measure:
    """A CLI measure: alias, ms(s), delta(s), inline JSON, or a path to a JSON file."""
    t = text.strip()
    if t.startswith("{"):
        return measure_from_json(loads(t))
    p = Path(t)
    if p.suffix == ".json" and p.exists():
        return measure_from_json(load(p))
    return measure_from_json(t)


def sigma_from_json(obj, where="sigma") -> DensityMatrix:
    if isinstance(obj, dict):
        if "spectrum" in obj:
            lam = [float(v) for v in obj["spectrum"]]
            U = matrix_from_json(obj["eigenvectors"], f"{where}.eigenvectors") if "eigenvectors" in obj else None
            return DensityMatrix.from_spectrum(lam, U)
        if "matrix" in obj:
            return DensityMatrix.from_matrix(matrix_from_json(obj["matrix"], f"{where}.matrix"))
        raise ValidationError(f"{where}: expected 'matrix' or 'spectrum'")
    return DensityMatrix.from_matrix(matrix_from_json(obj, where))


def sigma_to_json(sigma: DensityMatrix) -> dict:
    return {
        "matrix": matrix_to_json(sigma.matrix),
        "spectrum": [float(v) for v in sigma.eigenvalues],
        "eigenvectors": matrix_to_json(sigma.eigenvectors),
    }


# ---------------------------------------------------------------- maps


def superop_from_json(obj, where="map") -> SuperOperator:
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object")
    if "matrix" in obj:
        M = matrix_from_json(obj["matrix"], f"{where}.matrix")
        n = int(round(np.sqrt(M.shape[0])))
        if n * n != M.shape[0] or ("n" in obj and int(obj["n"]) != n):
            raise ValidationError(f"{where}: matrix size is not N^2 x N^2 for the declared N")
        return SuperOperator(n, M)
    if "kraus" in obj:
        ops = [matrix_from_json(V, f"{where}.kraus[{k}]") for k, V in enumerate(obj["kraus"])]
        if not ops:
            raise ValidationError(f"{where}.kraus: empty list")
        return SuperOperator.from_kraus(ops)
    if "lindblad" in obj:
        lb = obj["lindblad"]
        G = matrix_from_json(lb["g"], f"{where}.lindblad.g")
        ops = [matrix_from_json(V, f"{where}.lindblad.kraus[{k}]") for k, V in enumerate(lb.get("kraus", []))]
        return SuperOperator.from_lindblad(G, ops)
    raise ValidationError(f"{where}: expected 'matrix', 'kraus' or 'lindblad'")


def superop_to_json(Phi: SuperOperator) -> dict:
    return {"n": Phi.n, "matrix": matrix_to_json(Phi.matrix)}


def lindblad_to_json(G, kraus) -> dict:
    return {"lindblad": {"g": matrix_to_json(G), "kraus": [matrix_to_json(V) for V in kraus]}}


def to_jsonable(obj):
    """Recursively convert numpy values and complex numbers for json.dumps."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return matrix_to_json(obj) if obj.ndim == 2 else [complex_to_json(v) for v in obj]
        return obj.tolist()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, complex):
        return complex_to_json(obj)
    return obj
