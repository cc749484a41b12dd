"""Tabulate surface tensions over a grid of orders and write an atlas CSV.

    python3 scripts/tension_atlas.py --out atlas.csv
"""
import argparse
import time

from tensionlab.potential import Potential
from tensionlab.tension import (TensionProblem, atlas_csv, equipartition_reference,
                                hermite_reference, solve_profile)


def problems(quick: bool):
    quartic, trunc = Potential(), Potential("truncated-quadratic")
    sched = dict(T_max=40, N_max=1024) if quick else {}
    yield TensionProblem("m_k_integer", quartic, 1, **sched)
    yield TensionProblem("m_k_integer", quartic, 2, **sched)
    for s in (0.55, 0.65, 0.75, 0.9):
        yield TensionProblem("m_ks", quartic, 0, s, **sched)
    for s in (0.25, 0.5):
        yield TensionProblem("m_ks", quartic, 1, s, **sched)
    for k in (2, 3, 4):
        yield TensionProblem("fd_m_k", trunc, k)
    for s in (0.25, 0.5, 0.75):
        yield TensionProblem("fd_m_1s", trunc, 1, s)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="atlas.csv")
    ap.add_argument("--quick", action="store_true", help="shorter T/N schedules")
    args = ap.parse_args()
    results = []
    for p in problems(args.quick):
        t0 = time.perf_counter()
        r = solve_profile(p)
        ref = ""
        if p.kind == "fd_m_k":
            ref = f"  hermite {hermite_reference(p.k):.6f}"
        elif p.kind == "m_k_integer" and p.k == 1:
            ref = f"  equipartition {equipartition_reference(p.potential):.6f}"
        print(f"{p.kind:12s} k={p.k} s={p.s:<5g} value={r.value:.6f} T={r.T_final:g} "
              f"N={r.N_final} converged={r.converged} ({time.perf_counter() - t0:.1f}s){ref}")
        results.append(r)
    with open(args.out, "w", newline="") as fh:
        fh.write(atlas_csv(results))
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
