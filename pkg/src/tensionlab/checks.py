"""Fast invariant suite behind the ``check`` command."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .energy import Functional, FunctionalSpec, scaling_identity_check
from .grid import NO_TAILS, GridFunction, ProfileGrid, constant_tails, make_grid
from .kernel import cell_kernel, kernel_matrix, scale_factor, seminorm
from .potential import Potential, validate
from .tension import hermite_reference

GRADIENT_CASES = (
    ("phase-fractional", "quartic", 0, 0.75, "full-line"),
    ("phase-fractional", "quartic", 1, 0.6, "bounded"),
    ("phase-integer", "quartic", 1, 0.0, "full-line"),
    ("phase-integer", "quartic", 2, 0.0, "bounded"),
    ("phase-half", "quartic", 0, 0.5, "bounded"),
    ("fd-integer", "truncated-quadratic", 2, 0.0, "bounded"),
    ("fd-fractional", "truncated-quadratic", 1, 0.4, "full-line"),
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def gradient_error(family, potential, k, s, mode, N=64, samples=20, seed=0, step=1e-5):
    """Relative sup-norm gap between analytic and central-difference
    gradients at ``samples`` random coordinates."""
    rng = np.random.default_rng(seed)
    grid = make_grid(0.0, 1.0, N)
    scaling = "log" if family == "phase-half" else "none"
    spec = FunctionalSpec(family, Potential(potential), k, s, 0.3, grid, mode, scaling)
    if mode == "full-line":
        tails = constant_tails(0.0, 1.0) if family.startswith("fd") else constant_tails(-1.0, 1.0)
    else:
        tails = NO_TAILS
    amp = 0.3 if family.startswith("fd") else 1.0
    x = amp * rng.uniform(-1.0, 1.0, N)
    F = Functional(spec, tails)
    g = F.value_and_gradient(x)[1]
    idx = rng.choice(N, size=samples, replace=False)
    fd = np.empty(samples)
    for j, i in enumerate(idx):
        e = np.zeros(N)
        e[i] = step
        fd[j] = (F.value(x + e) - F.value(x - e)) / (2.0 * step)
    return float(np.max(np.abs(fd - g[idx])) / max(np.max(np.abs(g[idx])), 1e-300))


def _scaling_gap(k, s, eps, N=256, seed=0):
    rng = np.random.default_rng(seed)
    grid = make_grid(0.0, 1.0, N)
    spec = FunctionalSpec("phase-fractional", Potential(), k, s, eps, grid)
    u = GridFunction(grid, rng.uniform(-1.5, 1.5, N))
    a, b = scaling_identity_check(spec, u)
    return abs(a - b) / abs(a)


def run_checks() -> list:
    out = []

    def add(name, ok, detail):
        out.append(CheckResult(name, bool(ok), detail))

    rep = validate(Potential())
    add("quartic potential hypotheses", rep.passed, str(rep.as_rows()))
    rep = validate(Potential("truncated-quadratic"))
    add("truncated quadratic flagged", rep.check("nonnegative").passed and not rep.passed,
        str(rep.as_rows()))

    z = np.linspace(-2.5, 2.5, 101)
    p = Potential()
    fd = (p(z + 1e-6) - p(z - 1e-6)) / 2e-6
    err = float(np.max(np.abs(fd - p.derivative(z)) / np.maximum(np.abs(fd), 1.0)))
    add("potential derivative", err < 1e-5, f"max rel err {err:.2e}")

    grid = make_grid(-1.0, 1.0, 64)
    for s in (0.25, 0.5, 0.75):
        K = kernel_matrix(grid, s, extended=True)
        M = K.K
        off = M[~np.eye(M.shape[0], dtype=bool)]
        ok = np.array_equal(M, M.T) and np.all(off > 0) and np.all(np.diff(K.kappa[1:]) < 0)
        add(f"kernel symmetric, positive, decreasing (s={s})", ok, "")
    for lam in (0.5, 2.0):
        g2 = ProfileGrid(grid.a * lam, grid.b * lam, grid.N)
        K1, K2 = kernel_matrix(grid, 0.75), kernel_matrix(g2, 0.75)
        rel = float(np.max(np.abs(K2.K - lam ** (1 - 1.5) * K1.K) / K2.K.max()))
        add(f"kernel scaling covariance (lambda={lam})", rel < 1e-12, f"{rel:.1e}")
    v = GridFunction(grid, np.tanh(3 * grid.centers), constant_tails(-1.0, 1.0))
    K = kernel_matrix(grid, 0.75, extended=True)
    a, b = seminorm(v, K), seminorm(v.reversed(), kernel_matrix(v.reversed().grid, 0.75, True))
    add("seminorm reflection invariance", abs(a - b) <= 1e-12 * a, f"{a:.12g} vs {b:.12g}")
    c1 = cell_kernel(0, 1, 2, 3, 0.75)
    c2 = cell_kernel(-3, -2, -1, 0, 0.75)
    add("cell kernel reflection", math.isclose(c1, c2, rel_tol=1e-13), f"{c1:.12g}")

    for case in GRADIENT_CASES:
        e = gradient_error(*case)
        add(f"gradient {case[0]} k={case[2]} s={case[3]} {case[4]}", e <= 1e-6, f"{e:.1e}")

    for k, s in ((0, 0.75), (1, 0.6)):
        for eps in (1.0, 0.25):
            gap = _scaling_gap(k, s, eps)
            add(f"scaling identity k={k} s={s} eps={eps}", gap <= 1e-12, f"{gap:.1e}")

    hr = hermite_reference(2)
    add("hermite reference k=2", math.isclose(hr, 4 * math.sqrt(6) / 3, rel_tol=1e-12), f"{hr:.12g}")
    r0 = scale_factor("alpha", 1e-3) / (1e-3 / 2)
    r1 = scale_factor("alpha", 1 - 1e-3) / 1e-3
    add("interpolation factor limits", abs(r0 - 1) < 0.01 and abs(r1 - 1) < 0.01,
        f"{r0:.5f}, {r1:.5f}")
    return out


def format_table(results) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check'.ljust(width)}  result  detail"]
    for r in results:
        lines.append(f"{r.name.ljust(width)}  {'PASS' if r.passed else 'FAIL':6}  {r.detail}")
    return "\n".join(lines)
