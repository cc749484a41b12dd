"""Both routes to the s = 1/2 constant: (2s-1) m_s extrapolated to s = 1/2,
and log-scaled s = 1/2 energies extrapolated in 1/|log eps|."""
import argparse
import json

from tensionlab.experiments import LOG_WINDOW, extrapolate, half_log_sweep, s_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N-log", type=int, default=4096)
    ap.add_argument("--json", help="write both records here")
    args = ap.parse_args()

    rec_s = s_sweep("to_half", 0)
    print("s       (2s-1) m_s")
    for r in rec_s.rows:
        print(f"{r.param:<7g} {r.energy:.6f}")
    lim, slope, res = extrapolate(rec_s)
    print(f"affine limit {lim:.4f}  slope {slope:.4f}  residual {res:.3f}")
    for w in (3, 2):
        print(f"  nearest {w} rows: {extrapolate(rec_s, window=w)[0]:.4f}")

    rec_l = half_log_sweep(N=args.N_log)
    print("\neps         log-scaled energy   transitions")
    for r in rec_l.rows:
        print(f"{r.param:<11g} {r.energy:.6f}            {r.inner},{r.outer_upper},{r.outer_lower}")
    print(f"all rows: {extrapolate(rec_l)[0]:.4f}   "
          f"nearest {LOG_WINDOW}: {extrapolate(rec_l, window=LOG_WINDOW)[0]:.4f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"s_route": rec_s.to_json_dict(), "log_route": rec_l.to_json_dict()},
                      fh, indent=1, sort_keys=True)


if __name__ == "__main__":
    main()
