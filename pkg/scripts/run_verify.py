"""Run every certificate suite over several seeds and print a summary table."""

import argparse

from qdb.verify import SUITES, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--trials", type=int, default=None)
    args = ap.parse_args()
    failed = 0
    for seed in args.seeds:
        for res in run("all", seed=seed, trials=args.trials):
            worst = max((c.max_residual for c in res.checks.values()), default=0.0)
            flag = "PASS" if res.passed else "FAIL"
            failed += not res.passed
            print(f"seed={seed:<3} {res.name:<8} {flag}  checks={len(res.checks):<3} worst_residual={worst:.2e}")
    print(f"{failed} failing suite runs across {len(args.seeds)} seeds x {len(SUITES)} suites")
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
