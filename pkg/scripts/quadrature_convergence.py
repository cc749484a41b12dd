"""Convergence of the discrete seminorm of a Gaussian against its Fourier
closed form, for a few orders s."""
import argparse
import math

import numpy as np

from tensionlab.grid import GridFunction, constant_tails, make_grid
from tensionlab.kernel import kernel_matrix, seminorm


def exact(s):
    return (math.pi * 2 ** (s + 0.5) * math.gamma(s + 0.5)
            / (math.gamma(1 + 2 * s) * math.sin(math.pi * s)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--s", type=float, nargs="+", default=[0.1, 0.25, 0.5, 0.75, 0.9])
    ap.add_argument("--N", type=int, nargs="+", default=[128, 256, 512, 1024, 2048])
    args = ap.parse_args()
    for s in args.s:
        errs = []
        for N in args.N:
            g = make_grid(-8.0, 8.0, N)
            v = GridFunction(g, np.exp(-g.centers**2), constant_tails(0.0, 0.0))
            errs.append(abs(seminorm(v, kernel_matrix(g, s, True)) / exact(s) - 1))
        slope = -np.polyfit(np.log(args.N), np.log(errs), 1)[0]
        print(f"s={s:<5g} " + " ".join(f"{e:.2e}" for e in errs) + f"   slope {slope:.2f}")


if __name__ == "__main__":
    main()
