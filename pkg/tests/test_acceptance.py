"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are repeated in
the terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""
import hashlib
import io
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from tensionlab.checks import GRADIENT_CASES, gradient_error
from tensionlab.cli import main
from tensionlab.energy import FunctionalSpec, scaling_identity_check
from tensionlab.experiments import (eps_sweep, extrapolate, pointwise_bbm_check,
                                    pointwise_ms_check, s_sweep)
from tensionlab.grid import GridFunction, constant_tails, make_grid
from tensionlab.kernel import kernel_matrix, scale_factor, seminorm
from tensionlab.potential import Potential
from tensionlab.tension import (TensionProblem, centered_tanh_distance, equipartition_reference,
                                fd_jump_energy, hermite_reference, solve_profile)

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script from elsewhere
    ACCEPTANCE_LINES = {}

QUARTIC = Potential()
TRUNC = Potential("truncated-quadratic")
M1 = 8.0 / 3.0


def report(n, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)
    assert ok, line


def rel(a, b):
    return abs(a - b) / abs(b)


def test_01_classical_tension():
    t0 = time.perf_counter()
    oracle = equipartition_reference(QUARTIC)
    res = solve_profile(TensionProblem("m_k_integer", QUARTIC, 1, T0=10, N0=1024, N_max=2048))
    dt = time.perf_counter() - t0
    dist = centered_tanh_distance(res.profile)
    ok = res.converged and rel(res.value, oracle) < 0.01 and dist < 0.02 and dt <= 60
    report(1, ok, f"m_1 = {res.value:.6f} vs {oracle:.6f} (rel {rel(res.value, oracle):.1e}), "
                  f"tanh distance {dist:.1e}, N={res.N_final}, {dt:.1f}s")


def test_02_free_discontinuity_constant():
    t0 = time.perf_counter()
    r2 = solve_profile(TensionProblem("fd_m_k", TRUNC, 2))
    r3 = solve_profile(TensionProblem("fd_m_k", TRUNC, 3))
    dt = time.perf_counter() - t0
    e2 = rel(r2.value, 4 * math.sqrt(6) / 3)
    e3 = rel(r3.value, hermite_reference(3))
    ok = r2.converged and r3.converged and e2 < 0.005 and e3 < 0.005 and dt <= 120
    report(2, ok, f"k=2 {r2.value:.6f} (rel {e2:.1e}), k=3 {r3.value:.6f} vs "
                  f"{hermite_reference(3):.6f} (rel {e3:.1e}), {dt:.1f}s")


def test_03_jump_homogeneity():
    deltas = (0.25, 1.0, 4.0)
    spreads = {}
    for label, kind, params, p in (("k=2", "fd_m_k", {"k": 2}, 1 / 2),
                                   ("k=3", "fd_m_k", {"k": 3}, 1 / 3),
                                   ("fd_m_1s s=0.5", "fd_m_1s", {"k": 1, "s": 0.5}, 2 / 3)):
        ratios = [fd_jump_energy(kind, params, d) / d**p for d in deltas]
        spreads[label] = (max(ratios) - min(ratios)) / np.mean(ratios)
    ok = all(v <= 0.02 for v in spreads.values())
    report(3, ok, "spread of E/delta^p: " + ", ".join(f"{k} {v:.1e}" for k, v in spreads.items()))


def test_04_half_exponent():
    t0 = time.perf_counter()
    res = solve_profile(TensionProblem("m_half", QUARTIC, 0, 0.5))
    dt = time.perf_counter() - t0
    s_lim = res.diagnostics["s_route"]["limit"]
    log_lim = res.diagnostics["log_route"]["limit"]
    agree = res.diagnostics["route_agreement"]
    ok = rel(s_lim, 8.0) <= 0.15 and agree <= 0.15 and dt <= 1200
    report(4, ok, f"s-route {s_lim:.4f} (rel {rel(s_lim, 8.0):.3f} to 8), log route "
                  f"{log_lim:.4f} (agreement {agree:.3f}), {dt:.0f}s")


def test_05_bbm_continuity():
    rec = s_sweep("bbm_left", 1)
    lim, _, _ = extrapolate(rec)
    s, val, target = pointwise_bbm_check()[-1]
    ok = rec.all_converged and rel(lim, M1) <= 0.10 and s == 0.99 and rel(val, 4 / 3) <= 0.05
    report(5, ok, f"extrapolated {lim:.4f} (rel {rel(lim, M1):.3f} to 8/3), pointwise "
                  f"{val:.4f} vs 4/3 (rel {rel(val, 4 / 3):.3f})")


def test_06_ms_continuity():
    rec = s_sweep("ms_right", 1)
    lim, _, _ = extrapolate(rec)
    s, val, target = pointwise_ms_check()[-1]
    ok = rec.all_converged and rel(lim, M1) <= 0.10 and s == 0.02 and rel(val, target) <= 0.05
    report(6, ok, f"extrapolated {lim:.4f} (rel {rel(lim, M1):.3f} to 8/3), pointwise "
                  f"{val:.5f} vs {target:.5f} (rel {rel(val, target):.3f})")


def test_07_scaling_identity():
    rng = np.random.default_rng(7)
    g = make_grid(0.0, 1.0, 256)
    worst = 0.0
    for k, s in ((0, 0.75), (1, 0.6)):
        for eps in (1.0, 0.25):
            spec = FunctionalSpec("phase-fractional", QUARTIC, k, s, eps, g)
            a, b = scaling_identity_check(spec, GridFunction(g, rng.uniform(-1.5, 1.5, 256)))
            worst = max(worst, abs(a - b) / abs(a))
    report(7, worst <= 1e-12, f"largest relative gap {worst:.1e}")


def test_08_gamma_harness():
    eps_list = (0.25, 0.125, 0.0625, 0.03125, 0.015625)
    rec = eps_sweep("phase-integer", 1, 0.0, QUARTIC, eps_list, N=4096)
    last = rec.rows[-1]
    counts = [(r.inner, r.outer_upper, r.outer_lower) for r in rec.rows]
    ok = (rec.all_converged and last.param == 1 / 64 and rel(last.energy, M1) <= 0.02
          and all(c == (1, 0, 0) for c in counts))
    report(8, ok, f"energy at eps=1/64 {last.energy:.6f} (rel {rel(last.energy, M1):.1e}), "
                  f"transition counts {sorted(set(counts))}")


def test_09_gradients():
    errs = {f"{c[0]}/{c[4]}": gradient_error(*c) for c in GRADIENT_CASES}
    worst = max(errs.values())
    report(9, worst <= 1e-6, f"worst relative gradient error {worst:.1e} over "
                             f"{len(errs)} family/domain cases")


def _gaussian_seminorm(s):
    return (math.pi * 2 ** (s + 0.5) * math.gamma(s + 0.5)
            / (math.gamma(1 + 2 * s) * math.sin(math.pi * s)))


def test_10_quadrature_convergence():
    Ns = (128, 256, 512, 1024)
    slopes = {}
    for s in (0.25, 0.75):
        errs = []
        for N in Ns:
            g = make_grid(-8.0, 8.0, N)
            v = GridFunction(g, np.exp(-g.centers**2), constant_tails(0.0, 0.0))
            errs.append(abs(seminorm(v, kernel_matrix(g, s, True)) / _gaussian_seminorm(s) - 1))
        slopes[s] = -np.polyfit(np.log(Ns), np.log(errs), 1)[0]
    ok = all(slopes[s] >= 2 - 2 * s for s in slopes)
    report(10, ok, ", ".join(f"s={s}: slope {v:.2f} (need {2 - 2 * s:.1f})"
                             for s, v in slopes.items()))


def test_11_interpolation_factor():
    r0 = scale_factor("alpha", 1e-3) / (1e-3 / 2)
    r1 = scale_factor("alpha", 1 - 1e-3) / 1e-3
    ok = abs(r0 - 1) <= 0.01 and abs(r1 - 1) <= 0.01
    report(11, ok, f"alpha/(s/2) at s=1e-3: {r0:.5f}, alpha/(1-s) at s=1-1e-3: {r1:.5f}")


def _digests(directory: Path) -> dict:
    return {p.relative_to(directory).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(directory.rglob("*")) if p.is_file()}


def test_12_determinism(tmp_path):
    runs = [
        ["tension", "--kind", "fd_m_k", "--k", "2"],
        ["tension", "--kind", "m_ks", "--k", "0", "--s", "0.75", "--T-max", "20",
         "--N-max", "512"],
        ["sweep-eps", "--family", "phase-integer", "--k", "1", "--eps-list",
         "0.25,0.125,0.0625", "--N", "512"],
        ["sweep-s", "--kind", "ms_right", "--k", "1", "--s-list", "0.2,0.1,0.05",
         "--T-max", "20", "--N-max", "512"],
        ["profile", "--family", "phase-fractional", "--k", "0", "--s", "0.75",
         "--eps", "0.5", "--N", "256"],
    ]
    trees = []
    for attempt in range(2):
        out = tmp_path / f"run{attempt}"
        for args in runs:
            code = main(args + ["--output-dir", str(out), "--no-cache"])
            assert code in (0, 2)
        assert main(["export", "--input", str(out), "--output", str(out / "export.csv")]) == 0
        trees.append(_digests(out))
    # a third pass reuses the cache and must reproduce the same bytes
    out = tmp_path / "run2"
    cache = ["--cache-dir", str(tmp_path / "cache")]
    for args in runs:
        main(args + ["--output-dir", str(out)] + cache)
    for args in runs:
        main(args + ["--output-dir", str(out)] + cache)
    main(["export", "--input", str(out), "--output", str(out / "export.csv")])
    trees.append(_digests(out))
    ok = trees[0] == trees[1] == trees[2] and len(trees[0]) > 10
    report(12, ok, f"{len(trees[0])} artifacts byte-identical across 2 fresh runs and a "
                   f"cached rerun")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
