"""Command-line front end: analyze, sample, build, verify.

Exit codes: 0 success, 1 a verification or dominance check failed, 2 bad input, 3 other library error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .analysis import DEFAULT_MEASURES, analyze, render_text
from .errors import ParseError, QdbError, ValidationError
from .linalg import DEFAULT_TOL, Tolerances, haar_unitary
from .state import DensityMatrix

KINDS = ("kms-cp", "kms-generator", "delta-s-cp", "even-cp", "even-generator", "n2-extreme", "n2")


def _tolerances(args) -> Tolerances:
    val = args.tol if args.tol is not None else os.environ.get("QDB_DEFAULT_TOL")
    if val is None:
        return DEFAULT_TOL
    try:
        return Tolerances(DEFAULT_TOL.psd_rel, DEFAULT_TOL.rank_rel, float(val))
    except ValueError as exc:
        raise ValidationError(f"bad tolerance {val!r}") from exc


def _emit(obj, out: str | None):
    text = io.dumps(io.to_jsonable(obj)) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_sigma(path):
    return io.sigma_from_json(io.load(path)) if path else None


def _load_map_file(path):
    data = io.load(path)
    Phi = io.superop_from_json(data, where=str(path))
    sigma = io.sigma_from_json(data["sigma"]) if isinstance(data, dict) and "sigma" in data else None
    return Phi, sigma


def _pair(text: str):
    parts = [int(t) for t in text.split(",")]
    if len(parts) != 2:
        raise ValidationError("--alpha expects two comma-separated 1-based indices")
    return parts[0] - 1, parts[1] - 1


# ---------------------------------------------------------------- commands


def cmd_analyze(args) -> int:
    tol = _tolerances(args)
    Phi, sigma_in = _load_map_file(args.map)
    sigma = _load_sigma(args.sigma) or sigma_in
    measures = [io.parse_measure_arg(m) for m in args.measure] if args.measure else list(DEFAULT_MEASURES)
    rep = analyze(Phi, sigma, measures, tol)
    rep = {"input_digest": io.digest(io.load(args.map)), **rep}
    if args.json or args.output:
        _emit(rep, args.output)
    if not args.json:
        print(render_text(rep))
    return 0


def _random_sigma(n, rng, minimally_degenerate=False):
    from .sampling import random_spectrum

    return DensityMatrix.from_spectrum(random_spectrum(n, rng, minimally_degenerate=minimally_degenerate),
                                       haar_unitary(n, rng))


def cmd_sample(args) -> int:
    from . import sampling as smp
    from .even_bkm import even_extreme_cp, even_extreme_qms
    from .n2 import n2_extreme_params, n2_generator
    from .qms import kms_complete_generator
    from .superop import SuperOperator

    rng = np.random.default_rng(args.seed)
    kind = args.kind
    out: dict = {"kind": kind, "seed": args.seed}
    if kind in ("n2", "n2-extreme"):
        m = io.parse_measure_arg(args.measure or "bkm")
        p = n2_extreme_params(args.lambda1, m, args.family, theta=args.theta, a=args.a, r=args.r, phi=args.phi)
        Phi = n2_generator(p)
        sigma = p.sigma
        out["params"] = {"lambda1": p.lam1, "a": p.a, "x": p.x, "z": p.z, "zeta": p.zeta, "family": args.family}
        out["measure"] = io.measure_to_json(m)
    else:
        n = args.n
        if n < 2:
            raise ValidationError("--n must be at least 2")
        even = kind.startswith("even")
        sigma = _random_sigma(n, rng, minimally_degenerate=even)
        if kind == "kms-cp":
            Phi = smp.random_kms_cp(sigma, rng)
        elif kind == "kms-generator":
            form = kms_complete_generator(SuperOperator.from_kraus(smp.random_kms_kraus(sigma, rng, traceless=True)), sigma)
            Phi = form.to_superop()
            out.update(io.lindblad_to_json(form.G, form.kraus.operators))
        elif kind == "delta-s-cp":
            Phi = smp.random_gns_cp(sigma, rng)
        elif kind in ("even-cp", "even-generator"):
            a1, a2 = sorted(int(v) for v in rng.choice(n, 2, replace=False))
            a, theta = float(rng.uniform(0.2, 1.0)), float(rng.uniform(0, 2 * np.pi))
            if kind == "even-cp":
                Phi = even_extreme_cp(sigma, (a1, a2), a, theta) + smp.random_gns_cp(sigma, rng)
            else:
                Phi = even_extreme_qms(sigma, (a1, a2), a, theta)
            out["even_term"] = {"alpha": [a1 + 1, a2 + 1], "a": a, "theta": theta}
        else:
            raise ValidationError(f"unknown kind {kind!r}")
    out["sigma"] = io.sigma_to_json(sigma)
    out.update(io.superop_to_json(Phi))
    _emit(out, args.output)
    return 0


def cmd_build(args) -> int:
    from .even_bkm import bkm_transfer, even_extreme_cp, even_extreme_qms

    tol = _tolerances(args)
    what = args.what
    if what == "kms-generator":
        from .qms import kms_complete_generator

        Psi, s_in = _load_map_file(args.psi)
        sigma = _load_sigma(args.sigma) or s_in
        if sigma is None:
            raise ValidationError("kms-generator needs --sigma")
        form = kms_complete_generator(Psi, sigma, tol)
        out = io.lindblad_to_json(form.G, form.kraus.operators)
        out["sigma"] = io.sigma_to_json(sigma)
    elif what == "even-extreme":
        sigma = _load_sigma(args.sigma)
        if sigma is None:
            sigma = _random_sigma(args.n, np.random.default_rng(args.seed), minimally_degenerate=True)
        alpha = _pair(args.alpha)
        fn = even_extreme_qms if args.generator else even_extreme_cp
        out = io.superop_to_json(fn(sigma, alpha, args.a, args.theta))
        out["sigma"] = io.sigma_to_json(sigma)
    elif what == "bkm-transfer":
        Phi, s_in = _load_map_file(args.phi)
        sigma = _load_sigma(args.sigma) or s_in
        if sigma is None:
            raise ValidationError("bkm-transfer needs --sigma")
        out = io.superop_to_json(bkm_transfer(Phi, sigma, tol))
        out["sigma"] = io.sigma_to_json(sigma)
    else:
        raise ValidationError(f"unknown build target {what!r}")
    _emit(out, args.output)
    return 0


def cmd_verify(args) -> int:
    if args.suite == "dominate":
        return _dominate(args)
    from .verify import run

    results = run(args.suite, seed=args.seed, trials=args.trials)
    ok = all(r.passed for r in results)
    payload = {"seed": args.seed, "passed": ok, "suites": [r.to_json() for r in results]}
    if args.json or args.output:
        _emit(payload, args.output)
    if not args.json:
        for r in results:
            for name, c in r.checks.items():
                flag = "PASS" if c.passed else "FAIL"
                print(f"{flag} {r.name}.{name}: {c.count - c.failures}/{c.count} max_residual={c.max_residual:.3e}")
        print("ALL PASS" if ok else "FAILURES PRESENT")
    return 0 if ok else 1


def _dominate(args) -> int:
    from .errors import NotDominated
    from .kraus import arveson_T, kraus_of

    if not args.phi or not args.psi:
        raise ValidationError("verify dominate needs --phi and --psi")
    tol = _tolerances(args)
    Phi, _ = _load_map_file(args.phi)
    Psi, _ = _load_map_file(args.psi)
    try:
        T = arveson_T(kraus_of(Phi, tol), Psi, tol)
        rep = {"dominated": True, "T": T, "T_spectrum": np.linalg.eigvalsh(T)}
        code = 0
    except NotDominated as exc:
        rep = {"dominated": False, "reason": str(exc), "witness": exc.witness}
        code = 1
    _emit(rep, args.output)
    return code


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qdb", description="Detailed-balance structure of CP maps and QMS generators.")
    ap.add_argument("--tol", type=float, default=None, help="absolute equality threshold (overrides QDB_DEFAULT_TOL)")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="report on a map")
    a.add_argument("map")
    a.add_argument("--sigma")
    a.add_argument("--measure", action="append", help="alias, ms(s), delta(s), JSON, or file; repeatable")
    a.add_argument("--json", action="store_true")
    a.add_argument("-o", "--output")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sample", help="emit a random certified instance")
    s.add_argument("kind", choices=KINDS)
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--lambda1", type=float, default=0.75)
    s.add_argument("--measure")
    s.add_argument("--family", choices=("origin", "pure_zeta", "boundary"), default="boundary")
    s.add_argument("--a", type=float, default=0.5)
    s.add_argument("--r", type=float, default=0.2)
    s.add_argument("--theta", type=float, default=0.0)
    s.add_argument("--phi", type=float, default=0.0)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_sample)

    b = sub.add_parser("build", help="construct a map from inputs")
    b.add_argument("what", choices=("kms-generator", "even-extreme", "bkm-transfer"))
    b.add_argument("--psi")
    b.add_argument("--phi")
    b.add_argument("--sigma")
    b.add_argument("--alpha", default="1,2")
    b.add_argument("--a", type=float, default=1.0)
    b.add_argument("--theta", type=float, default=0.0)
    b.add_argument("--generator", action="store_true")
    b.add_argument("--n", type=int, default=3)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="run certificate suites, or a dominance query")
    v.add_argument("suite", choices=("all", "core", "kms", "gns", "even", "bkm", "n2", "order", "pointed", "dominate"))
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int, default=None)
    v.add_argument("--phi")
    v.add_argument("--psi")
    v.add_argument("--json", action="store_true")
    v.add_argument("-o", "--output")
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _tolerances(args)
        return args.func(args)
    except ParseError as exc:
        loc = f" at line {exc.line}, column {exc.column}" if exc.line is not None else ""
        print(f"ParseError: {exc}{loc}", file=sys.stderr)
        return 2
    except (ValidationError, FileNotFoundError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except QdbError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
