"""Fraction of random spectra for which the mean kernel (or its reciprocal) is PSD, per even measure."""

import argparse

import numpy as np

from qdb.io import parse_measure_arg
from qdb.sampling import random_spectrum
from qdb.state import DensityMatrix, lambda_kernel_psd


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--measures", nargs="+", default=["kms", "bkm", "ms(0)", "ms(0.25)", "ms(0.4)"])
    ap.add_argument("--dims", type=int, nargs="+", default=[2, 3, 4, 6])
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'measure':<10} {'N':>3} {'kernel PSD':>11} {'inverse PSD':>12}")
    for name in args.measures:
        m = parse_measure_arg(name)
        for n in args.dims:
            fwd = inv = 0
            for _ in range(args.samples):
                sigma = DensityMatrix.from_spectrum(random_spectrum(n, rng, floor=0.005))
                fwd += lambda_kernel_psd(sigma, m, inverted=False)
                inv += lambda_kernel_psd(sigma, m, inverted=True)
            print(f"{name:<10} {n:>3} {fwd / args.samples:>11.2%} {inv / args.samples:>12.2%}")


if __name__ == "__main__":
    main()
