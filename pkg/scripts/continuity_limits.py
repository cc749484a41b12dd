"""Continuity of the tensions at s -> 1 (BBM scaling) and s -> 0 (MS
scaling), and the corresponding pointwise limits of scaled seminorms."""
import argparse

from tensionlab.experiments import (extrapolate, pointwise_bbm_check, pointwise_ms_check,
                                    s_sweep)
from tensionlab.potential import Potential
from tensionlab.tension import equipartition_reference


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, default=1)
    args = ap.parse_args()
    m1 = equipartition_reference(Potential())
    for kind in ("bbm_left", "ms_right"):
        rec = s_sweep(kind, args.k)
        lim, slope, res = extrapolate(rec)
        print(f"{kind}: " + ", ".join(f"s={r.param:g}: {r.energy:.5f}" for r in rec.rows))
        print(f"  limit {lim:.5f} (m_1 = {m1:.5f}, rel {abs(lim - m1) / m1:.3f}), "
              f"residual {res:.3f}")
    print("pointwise (1-s)[tanh]^2:")
    for s, val, target in pointwise_bbm_check():
        print(f"  s={s:g}: {val:.5f} -> {target:.5f}")
    print("pointwise s[bump]^2:")
    for s, val, target in pointwise_ms_check():
        print(f"  s={s:g}: {val:.5f} -> {target:.5f}")


if __name__ == "__main__":
    main()
