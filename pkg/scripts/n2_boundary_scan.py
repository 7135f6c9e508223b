"""Scan the two-level boundary family: r0(phi) and the extremality certificate along a grid."""

import argparse

import numpy as np

from qdb.io import parse_measure_arg
from qdb.n2 import n2_boundary_certificate, n2_extreme_params


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lambda1", type=float, default=0.75)
    ap.add_argument("--measure", default="bkm")
    ap.add_argument("--a", type=float, default=0.5)
    ap.add_argument("--r", type=float, default=0.2)
    ap.add_argument("--theta", type=float, default=0.0)
    ap.add_argument("--points", type=int, default=12)
    args = ap.parse_args()
    m = parse_measure_arg(args.measure)
    rng = np.random.default_rng(0)
    print(f"{'phi':>7} {'|z|':>10} {'min_eig':>11} {'rank':>4} {'face':>4}  verdict")
    for phi in np.linspace(0.0, 2 * np.pi, args.points, endpoint=False):
        p = n2_extreme_params(args.lambda1, m, "boundary", theta=args.theta, a=args.a, r=args.r, phi=phi)
        c = n2_boundary_certificate(p, rng)
        print(f"{phi:7.3f} {abs(p.z):10.6f} {c['min_eig']:11.2e} {c['rank']:4d} {c['face_dimension']:4d}  {c['verdict']}")


if __name__ == "__main__":
    main()
