"""Deterministic minimization of the discrete energies.

Limited-memory BFGS with Armijo backtracking over the unpinned values. The
initial inverse-Hessian model is the inverse of a fixed SPD matrix: the
Hessian of the quadratic perturbation plus a model of the bulk curvature.
This makes the iteration count essentially independent of the mesh (the
perturbation alone has condition number growing like N^(2k+2s)).
"""
from __future__ import annotations

import csv
import math
import os
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.special import betainc

from .energy import Functional, FunctionalSpec
from .errors import DivergenceError, DomainError
from .grid import GridFunction, ProfileGrid, TailSpec


@dataclass(frozen=True)
class SolverOptions:
    max_iterations: int = 5000
    gradient_tolerance: float = 1e-8  # sup norm, multiplied by h
    memory: int = 10
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 60
    stall_tolerance: float = 2e-15  # relative energy change counted as stagnation
    stall_window: int = 5
    seed: int = 0

    def __post_init__(self):
        if not (self.max_iterations > 0 and self.memory > 0 and self.max_backtracks > 0
                and self.stall_window > 0):
            raise DomainError("iteration counts must be positive")
        for name in ("gradient_tolerance", "armijo", "backtrack", "stall_tolerance"):
            val = getattr(self, name)
            if not 0.0 < val < 1.0:
                raise DomainError(f"{name} must lie in (0, 1), got {val}")


@dataclass
class MinimizeResult:
    profile: GridFunction
    energy: float
    converged: bool
    reason: str
    iterations: int
    trace: list = field(default_factory=list)

    @property
    def grad_norm(self) -> float:
        return self.trace[-1][2] if self.trace else math.nan


class Preconditioner:
    """Factorized SPD model restricted to the free coordinates."""

    def __init__(self, functional: Functional):
        P = functional.model_hessian()
        N = functional.spec.grid.N
        free = np.ones(N, dtype=bool)
        if len(functional.spec.pins):
            free[list(functional.spec.pins.indices)] = False
        self.free = free
        idx = np.flatnonzero(free)
        if sp.issparse(P):
            Pf = P[idx][:, idx].tocsc()
            ridge = 1e-12 * float(np.abs(Pf.diagonal()).max() or 1.0)
            Pf = Pf + ridge * sp.identity(len(idx), format="csc")
            lu = spla.splu(Pf)
            self._solve = lu.solve
        else:
            Pf = np.ascontiguousarray(P[np.ix_(idx, idx)])
            ridge = 1e-12 * float(np.abs(np.diag(Pf)).max() or 1.0)
            Pf[np.diag_indices_from(Pf)] += ridge
            cf = scipy.linalg.cho_factor(Pf, check_finite=False)
            self._solve = lambda r: scipy.linalg.cho_solve(cf, r, check_finite=False)

    def apply(self, r: np.ndarray) -> np.ndarray:
        out = np.zeros_like(r)
        out[self.free] = self._solve(r[self.free])
        return out


def _two_loop(g, pairs, precond):
    q = g.copy()
    alphas = []
    for s_, y_, rho in reversed(pairs):
        a = rho * float(s_ @ q)
        alphas.append(a)
        q -= a * y_
    r = precond.apply(q)
    for (s_, y_, rho), a in zip(pairs, reversed(alphas)):
        b = rho * float(y_ @ r)
        r += (a - b) * s_
    return -r


def minimize(spec: FunctionalSpec, v0: GridFunction, opts: SolverOptions = SolverOptions(),
             functional: Functional | None = None,
             precond: Preconditioner | None = None) -> MinimizeResult:
    """Minimize ``energy(spec, .)`` from ``v0`` keeping pinned values fixed."""
    if v0.grid != spec.grid:
        raise DomainError("start does not live on the functional's grid")
    if not spec.pins.satisfied_by(v0.values):
        raise DomainError("start violates the pinned values")
    F = functional if functional is not None else Functional(spec, v0.tails)
    P = precond if precond is not None else Preconditioner(F)
    gtol = opts.gradient_tolerance * spec.grid.h
    x = np.array(v0.values, dtype=float)
    E, g = F.value_and_gradient(x)
    trace = [(0, E, float(np.max(np.abs(g))))]
    if not math.isfinite(E):
        raise DivergenceError("non-finite energy at the start", trace)
    pairs: deque = deque(maxlen=opts.memory)
    reason = "max_iterations"
    stalls = 0
    it = 0
    for it in range(1, opts.max_iterations + 1):
        if trace[-1][2] <= gtol:
            reason = "gtol"
            break
        d = _two_loop(g, pairs, P)
        slope = float(g @ d)
        if not slope < 0.0:
            pairs.clear()
            d = -P.apply(g)
            slope = float(g @ d)
        alpha = 1.0
        accepted = False
        for _ in range(opts.max_backtracks):
            xn = x + alpha * d
            En, gn = F.value_and_gradient(xn)
            if math.isfinite(En) and En <= E + opts.armijo * alpha * slope:
                accepted = True
                break
            alpha *= opts.backtrack
        if not accepted:
            if pairs:
                pairs.clear()
                continue
            # no decrease along the preconditioned gradient: round-off floor
            reason = "stalled"
            break
        s_ = xn - x
        y_ = gn - g
        sy = float(s_ @ y_)
        if sy > 1e-12 * math.sqrt(float(s_ @ s_) * float(y_ @ y_)):
            pairs.append((s_, y_, 1.0 / sy))
        change = abs(E - En) / max(abs(E), 1e-300)
        x, E, g = xn, En, gn
        trace.append((it, E, float(np.max(np.abs(g)))))
        stalls = stalls + 1 if change <= opts.stall_tolerance else 0
        if stalls >= opts.stall_window:
            reason = "ftol"
            break
    else:
        if trace[-1][2] <= gtol:
            reason = "gtol"
    if not math.isfinite(E):
        raise DivergenceError("non-finite energy during descent", trace)
    converged = reason in ("gtol", "ftol", "stalled")
    return MinimizeResult(v0.with_values(x), E, converged, reason, len(trace) - 1, trace)


def multi_start(spec: FunctionalSpec, starts, opts: SolverOptions = SolverOptions()):
    """Run ``minimize`` from every start; return (best, per-start results)."""
    starts = list(starts)
    if not starts:
        raise DomainError("multi_start needs at least one start")
    results = []
    cache = {}
    for v0 in starts:
        key = v0.tails
        if key not in cache:
            F = Functional(spec, v0.tails)
            cache[key] = (F, Preconditioner(F))
        F, P = cache[key]
        try:
            results.append(minimize(spec, v0, opts, F, P))
        except DivergenceError as exc:
            results.append(exc)
    ok = [r for r in results if isinstance(r, MinimizeResult)]
    if not ok:
        raise DivergenceError("every start diverged", [])
    pool = [r for r in ok if r.converged] or ok
    best = min(pool, key=lambda r: r.energy)
    return best, results


PROFILE_KINDS = ("tanh", "linear-ramp", "step", "hermite", "random-perturbed")


def _end_values(tails: TailSpec, params: dict):
    if tails.constant:
        return tails.c_L, tails.c_R
    return float(params.get("left", -1.0)), float(params.get("right", 1.0))


def init_profile(kind: str, grid: ProfileGrid, tails: TailSpec = TailSpec(),
                 params: dict | None = None) -> GridFunction:
    """Named starting profile sampled at cell centres.

    params: ``center`` (default grid midpoint), ``width`` (tanh scale, ramp
    length), ``k`` (hermite order), ``base``/``amplitude``/``seed``
    (random-perturbed), ``left``/``right`` (end values when there are no tails).
    """
    params = dict(params or {})
    if kind not in PROFILE_KINDS:
        raise DomainError(f"unknown profile kind {kind!r}; expected one of {PROFILE_KINDS}")
    x = grid.centers
    lo, hi = _end_values(tails, params)
    center = float(params.get("center", 0.5 * (grid.a + grid.b)))
    if kind == "tanh":
        width = float(params.get("width", 1.0))
        if width <= 0:
            raise DomainError("tanh width must be positive")
        shape = 0.5 * (1.0 + np.tanh((x - center) / width))
    elif kind == "linear-ramp":
        width = float(params.get("width", grid.length))
        if width <= 0:
            raise DomainError("ramp width must be positive")
        shape = np.clip((x - center) / width + 0.5, 0.0, 1.0)
    elif kind == "step":
        shape = (x >= center).astype(float)
    elif kind == "hermite":
        k = int(params.get("k", 2))
        if k < 1:
            raise DomainError("hermite order must be >= 1")
        a = float(params.get("start", grid.a))
        b = float(params.get("stop", grid.b))
        if not b > a:
            raise DomainError("hermite interval must be nondegenerate")
        shape = betainc(k, k, np.clip((x - a) / (b - a), 0.0, 1.0))
    else:
        base = params.get("base", "tanh")
        if base == "random-perturbed":
            raise DomainError("random-perturbed profiles need a deterministic base")
        sub = {key: v for key, v in params.items() if key not in ("base", "amplitude", "seed")}
        v = init_profile(base, grid, tails, sub)
        rng = np.random.default_rng(int(params.get("seed", 0)))
        amp = float(params.get("amplitude", 0.05))
        return v.with_values(v.values + amp * abs(hi - lo) * rng.standard_normal(grid.N))
    return GridFunction(grid, lo + (hi - lo) * shape, tails)


def write_trace_csv(trace, path) -> None:
    path = os.fspath(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "energy", "grad_norm"])
        for it, e, gn in trace:
            w.writerow([int(it), format(float(e), ".17g"), format(float(gn), ".17g")])
