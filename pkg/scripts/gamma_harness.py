"""Pinned-boundary eps sweeps: minimum energies against the tension, with
transition counts per eps."""
import argparse

from tensionlab.experiments import eps_sweep
from tensionlab.potential import Potential
from tensionlab.tension import TensionProblem, solve_profile


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", default="phase-integer",
                    choices=["phase-integer", "phase-fractional"])
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--s", type=float, default=0.0)
    ap.add_argument("--N", type=int, default=4096)
    ap.add_argument("--eps", type=float, nargs="+",
                    default=[0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125])
    args = ap.parse_args()
    if args.family == "phase-integer":
        target = solve_profile(TensionProblem("m_k_integer", Potential(), args.k)).value
    else:
        target = solve_profile(TensionProblem("m_ks", Potential(), args.k, args.s)).value
    rec = eps_sweep(args.family, args.k, args.s, Potential(), args.eps, N=args.N)
    print(f"tension {target:.6f}")
    print("eps         energy      rel.gap   recovery-start  transitions")
    for r, up in zip(rec.rows, rec.extras["recovery_energies"]):
        gap = (r.energy - target) / target
        print(f"{r.param:<11g} {r.energy:.6f}  {gap:+.2e}  {up:.6f}        "
              f"{r.inner},{r.outer_upper},{r.outer_lower}{'' if r.converged else '  (flagged)'}")


if __name__ == "__main__":
    main()
