"""Effect of emulating clamped derivatives by pinned layers on the
free-discontinuity constants, mesh by mesh."""
import argparse

from tensionlab.potential import Potential
from tensionlab.tension import TensionProblem, hermite_reference, pin_layer_bias


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--N", type=int, nargs="+", default=[128, 256, 512, 1024])
    args = ap.parse_args()
    for k in args.k:
        print(f"k={k}  hermite reference {hermite_reference(k):.6f}")
        for N in args.N:
            b = pin_layer_bias(TensionProblem("fd_m_k", Potential("truncated-quadratic"), k), N)
            print(f"  N={N:<5d} pinned {b['pinned']:.6f}  free {b['unpinned']:.6f}  "
                  f"bias {b['relative_bias']:.2e}")


if __name__ == "__main__":
    main()
