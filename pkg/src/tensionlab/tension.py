"""Surface tensions and jump-energy constants from optimal-profile problems.

Phase kinds minimize  int W(v) + c [v^(k)]^2  over profiles on (-T, T) equal
to -1 / +1 outside; the tails enter analytically. T grows at fixed mesh
size (so the admissible class only enlarges), then the mesh is refined at
the final T.

Free-discontinuity kinds minimize  T + (perturbation)  over profiles equal
to 0 for t <= 0 and delta for t >= T, with a golden-section search in T.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate
from scipy.special import beta as beta_fn

from .energy import Functional, FunctionalSpec
from .errors import SpecError, UnsupportedOperation
from .grid import (NO_PINS, GridFunction, ProfileGrid, TailSpec, boundary_pins,
                   constant_tails, make_grid)
from .potential import Potential, validate
from .solver import MinimizeResult, Preconditioner, SolverOptions, init_profile, minimize

KINDS = ("m_ks", "m_k_integer", "m_bbm", "m_ms", "m_half", "fd_m_k", "fd_m_1s")
PHASE_KINDS = ("m_ks", "m_k_integer", "m_bbm", "m_ms")
FD_KINDS = ("fd_m_k", "fd_m_1s")
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TensionProblem:
    """One profile problem.

    ``k`` is the integer part of the order, except for ``m_bbm`` where it is
    the integer limit order: m_bbm computes the (1-s)-scaled constant of
    order k-1+s.
    """

    kind: str
    potential: Potential = field(default_factory=Potential)
    k: int = 1
    s: float = 0.0
    delta: float = 1.0
    T0: float = 5.0
    T_growth: float = 2.0
    T_max: float = 160.0
    N0: int = 256
    N_growth: int = 2
    N_max: int = 4096
    T_tol: float = 1e-3
    N_tol: float = 1e-3
    pin_layers: int | None = None  # fd_m_k; default k - 1
    restarts: int = 0
    seed: int = 0
    T_search_tol: float = 1e-5

    def __post_init__(self):
        k, s = self.k, self.s
        if self.kind not in KINDS:
            raise SpecError(f"unknown tension kind {self.kind!r}; expected one of {KINDS}")
        if int(k) != k or k < 0:
            raise SpecError("k must be a nonnegative integer")
        checks = {
            "m_ks": 0.0 < s < 1.0 and k + s > 0.5,
            "m_k_integer": s == 0.0 and k >= 1,
            "m_bbm": 0.0 < s < 1.0 and k >= 1 and k - 1 + s > 0.5,
            "m_ms": 0.0 < s < 1.0 and k >= 1,
            "m_half": k == 0 and s == 0.5,
            "fd_m_k": s == 0.0 and k >= 2,
            "fd_m_1s": k == 1 and 0.0 < s < 1.0,
        }
        if not checks[self.kind]:
            raise SpecError(f"order (k={k}, s={s}) is not admissible for {self.kind}")
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise SpecError("jump delta must be positive")
        if not (0 < self.T0 <= self.T_max and self.T_growth > 1):
            raise SpecError("T schedule must satisfy 0 < T0 <= T_max and growth > 1")
        if not (8 <= self.N0 <= self.N_max and self.N_growth >= 2):
            raise SpecError("N schedule must satisfy 8 <= N0 <= N_max and growth >= 2")
        if self.kind in PHASE_KINDS and not self.potential.is_double_well:
            raise SpecError("phase kinds need a double-well potential")
        if self.pin_layers is not None and self.pin_layers < 0:
            raise SpecError("pin_layers must be nonnegative")

    @property
    def layers(self) -> int:
        if self.kind == "fd_m_k":
            return self.k - 1 if self.pin_layers is None else self.pin_layers
        return self.pin_layers or 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["potential"] = self.potential.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TensionProblem":
        d = dict(d)
        d["potential"] = Potential.from_dict(d["potential"])
        return cls(**d)


@dataclass
class TensionResult:
    value: float
    T_final: float
    N_final: int
    profile: GridFunction
    history: list
    converged: bool
    problem: TensionProblem
    reason: str = ""
    diagnostics: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "value": self.value, "T_final": self.T_final, "N_final": self.N_final,
            "profile": self.profile.to_json_dict(),
            "history": [[float(T), int(N), float(v)] for T, N, v in self.history],
            "converged": self.converged, "problem": self.problem.to_dict(),
            "reason": self.reason, "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_json_dict(cls, d) -> "TensionResult":
        return cls(float(d["value"]), float(d["T_final"]), int(d["N_final"]),
                   GridFunction.from_json_dict(d["profile"]),
                   [(float(T), int(N), float(v)) for T, N, v in d["history"]],
                   bool(d["converged"]), TensionProblem.from_dict(d["problem"]),
                   d.get("reason", ""), d.get("diagnostics", {}))

    @classmethod
    def from_json(cls, text: str) -> "TensionResult":
        return cls.from_json_dict(json.loads(text))

    def atlas_row(self) -> list:
        p = self.problem
        return [p.kind, p.k, p.s, p.delta, self.value, self.T_final, self.N_final, self.converged]


ATLAS_HEADER = ["kind", "k", "s", "delta", "value", "T", "N", "converged"]


def _fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def atlas_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ATLAS_HEADER)
    for r in results:
        w.writerow([_fmt(x) for x in r.atlas_row()])
    return buf.getvalue()


def append_atlas(result: TensionResult, path) -> None:
    """Add a row to the atlas CSV; a row identical to an existing one is
    not repeated, so reruns leave the file unchanged."""
    path = os.fspath(path)
    row = atlas_csv([result]).splitlines()[1]
    if os.path.exists(path):
        with open(path, newline="") as fh:
            lines = fh.read().splitlines()
        if row in lines[1:]:
            return
        with open(path, "a", newline="") as fh:
            fh.write(row + "\n")
    else:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(ATLAS_HEADER) + "\n" + row + "\n")


# -- reference values ---------------------------------------------------------

def equipartition_reference(p: Potential) -> float:
    """2 int_{-1}^{1} sqrt(W(z)) dz."""
    if not p.is_double_well:
        raise UnsupportedOperation("equipartition needs a double-well potential")
    report = validate(p) if p.kind != "expression" else None
    if report is not None and not report.check("zero-set is {-1, 1}").passed:
        raise UnsupportedOperation("potential does not vanish exactly at -1 and 1")
    if p.kind == "expression" and (abs(p(-1.0)) > 1e-12 or abs(p(1.0)) > 1e-12):
        raise UnsupportedOperation("potential does not vanish at -1 and 1")
    val, _ = integrate.quad(lambda z: math.sqrt(max(p(z), 0.0)), -1.0, 1.0,
                            epsabs=1e-13, epsrel=1e-13, limit=200)
    return 2.0 * val


def hermite_coefficient(k: int) -> float:
    """c_k = int_0^1 |H_k^(k)|^2 for the clamped Hermite transition H_k."""
    if k < 1:
        raise SpecError("hermite order must be >= 1")
    base = Polynomial([1.0])
    for _ in range(k - 1):
        base = base * Polynomial([0.0, 1.0]) * Polynomial([1.0, -1.0])
    dk = base.deriv(k - 1) / beta_fn(k, k) if k > 1 else base / beta_fn(k, k)
    sq = (dk * dk).integ()
    return float(sq(1.0) - sq(0.0))


def hermite_reference(k: int, delta: float = 1.0) -> float:
    """min_T T + delta^2 c_k T^(1-2k) in closed form."""
    if delta <= 0:
        raise SpecError("jump delta must be positive")
    c = hermite_coefficient(k)
    return delta ** (1.0 / k) * (2.0 * k / (2.0 * k - 1.0)) * ((2.0 * k - 1.0) * c) ** (1.0 / (2.0 * k))


# -- phase kinds ----------------------------------------------------------------

def _phase_spec(problem: TensionProblem, grid: ProfileGrid) -> FunctionalSpec:
    kind, k, s = problem.kind, problem.k, problem.s
    if kind == "m_k_integer":
        return FunctionalSpec("phase-integer", problem.potential, k, 0.0, 1.0, grid, "full-line")
    if kind == "m_ks":
        return FunctionalSpec("phase-fractional", problem.potential, k, s, 1.0, grid, "full-line")
    if kind == "m_bbm":
        return FunctionalSpec("phase-fractional", problem.potential, k - 1, s, 1.0, grid,
                              "full-line", "bbm")
    return FunctionalSpec("phase-fractional", problem.potential, k, s, 1.0, grid,
                          "full-line", "ms")


def _phase_stage(problem, T, N, previous, opts):
    grid = make_grid(-T, T, N)
    tails = constant_tails(-1.0, 1.0)
    spec = _phase_spec(problem, grid)
    if previous is None:
        v0 = init_profile("tanh", grid, tails, {"center": 0.0})
    else:
        v0 = GridFunction(grid, previous.sample(grid.centers), tails)
    res = minimize(spec, v0, opts)
    start_energy = Functional(spec, tails).value(
        init_profile("tanh", grid, tails, {"center": 0.0}).values)
    return res, start_energy


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def _solve_phase(problem: TensionProblem, opts: SolverOptions) -> TensionResult:
    history = []
    flags = []
    T, N = problem.T0, problem.N0
    res, start_e = _phase_stage(problem, T, N, None, opts)
    history.append((T, N, res.energy))
    all_ok = res.converged
    upper = [start_e]
    T_stalled = False
    while True:
        T2, N2 = T * problem.T_growth, int(round(N * problem.T_growth))
        if T2 > problem.T_max or N2 > problem.N_max:
            break
        res2, start_e = _phase_stage(problem, T2, N2, res.profile, opts)
        upper.append(start_e)
        history.append((T2, N2, res2.energy))
        all_ok &= res2.converged
        change = _rel(res2.energy, res.energy)
        T, N, res = T2, N2, res2
        if change < problem.T_tol:
            T_stalled = True
            break
    if not T_stalled:
        flags.append("T schedule exhausted before the value stalled")
    N_stalled = False
    if N * problem.N_growth > problem.N_max:
        # no room to refine: compare against the next coarser mesh instead
        Nc = N // problem.N_growth
        resc, _ = _phase_stage(problem, T, Nc, res.profile, opts)
        history.append((T, Nc, resc.energy))
        all_ok &= resc.converged
        N_stalled = _rel(resc.energy, res.energy) < problem.N_tol
    while not N_stalled and N * problem.N_growth <= problem.N_max:
        N2 = N * problem.N_growth
        res2, start_e = _phase_stage(problem, T, N2, res.profile, opts)
        upper.append(start_e)
        history.append((T, N2, res2.energy))
        all_ok &= res2.converged
        change = _rel(res2.energy, res.energy)
        N, res = N2, res2
        if change < problem.N_tol:
            N_stalled = True
    if not N_stalled:
        flags.append("N schedule exhausted before the value stalled")
    if not all_ok:
        flags.append("an inner minimization did not converge")
    return TensionResult(res.energy, T, N, res.profile, history, not flags, problem,
                         "; ".join(flags) or "stalled",
                         {"start_energies": upper})


# -- free-discontinuity kinds ---------------------------------------------------

class _FDInner:
    """Inner problem min over profiles at fixed (T, N).

    At fixed N the discrete inner problem is exactly scale covariant: the
    minimizing values do not depend on T and the minimum scales like
    T^(-p), p = 2k - 1 (local) or 1 + 2s (fractional). The problem is
    solved once, at T = 1, and rescaled.
    """

    def __init__(self, problem: TensionProblem, N: int, layers: int, opts: SolverOptions):
        self.problem, self.N, self.layers, self.opts = problem, N, layers, opts
        p = problem
        self.power = 2 * p.k - 1 if p.kind == "fd_m_k" else 1.0 + 2.0 * p.s
        self._base = None

    def spec(self, T: float) -> FunctionalSpec:
        p = self.problem
        grid = make_grid(0.0, T, self.N)
        pins = boundary_pins(self.N, self.layers, 0.0, p.delta) if self.layers else NO_PINS
        trunc = Potential("truncated-quadratic")
        if p.kind == "fd_m_k":
            return FunctionalSpec("fd-integer", trunc, p.k, 0.0, 1.0, grid, "full-line", pins=pins)
        return FunctionalSpec("fd-fractional", trunc, 1, p.s, 1.0, grid, "full-line", pins=pins)

    def solve_direct(self, T: float) -> MinimizeResult:
        p = self.problem
        spec = self.spec(T)
        tails = constant_tails(0.0, p.delta)
        F = Functional(spec, tails, include_bulk=False)
        P = Preconditioner(F)
        v0 = init_profile("hermite", spec.grid, tails, {"k": max(p.k, 2)})
        v0 = v0.with_values(spec.pins.apply(v0.values))
        best = minimize(spec, v0, self.opts, F, P)
        rng = np.random.default_rng(p.seed)
        for _ in range(p.restarts):
            noise = 0.05 * p.delta * rng.standard_normal(self.N)
            vr = v0.with_values(spec.pins.apply(v0.values + noise))
            r = minimize(spec, vr, self.opts, F, P)
            if r.converged and r.energy < best.energy:
                best = r
        return best

    def solve(self, T: float) -> tuple[float, MinimizeResult]:
        if self._base is None:
            self._base = self.solve_direct(1.0)
        base = self._base
        grid = make_grid(0.0, T, self.N)
        res = MinimizeResult(GridFunction(grid, base.profile.values, base.profile.tails),
                             base.energy * T ** (-self.power), base.converged, base.reason,
                             base.iterations, base.trace)
        return T + res.energy, res


def _golden_section(f, lo, hi, tol):
    """Minimize a unimodal f on [lo, hi] (in log T)."""
    a, b = math.log(lo), math.log(hi)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(math.exp(c)), f(math.exp(d))
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(math.exp(d))
    x = math.exp(0.5 * (a + b))
    return x, f(x)


def _fd_guess(problem: TensionProblem) -> float:
    if problem.kind == "fd_m_k":
        k = problem.k
        return ((2 * k - 1) * hermite_coefficient(k) * problem.delta**2) ** (1.0 / (2 * k))
    return problem.delta ** (1.0 / (1.0 + problem.s)) * 2.0


def _fd_search(problem, N, layers, opts):
    inner = _FDInner(problem, N, layers, opts)
    f = lambda T: inner.solve(T)[0]  # noqa: E731
    lo, hi = _fd_guess(problem) / 4.0, _fd_guess(problem) * 4.0
    bracket_ok = True
    for _ in range(20):
        mid = math.sqrt(lo * hi)
        flo, fmid, fhi = f(lo), f(mid), f(hi)
        if fmid <= flo and fmid <= fhi:
            break
        if flo < fmid:
            lo, hi = lo / 4.0, mid
        else:
            lo, hi = mid, hi * 4.0
    else:
        bracket_ok = False
    T, val = _golden_section(f, lo, hi, problem.T_search_tol)
    res = inner.solve(T)[1]
    return T, val, res, bracket_ok


def _solve_fd(problem: TensionProblem, opts: SolverOptions) -> TensionResult:
    history = []
    flags = []
    N = problem.N0
    T, val, res, ok = _fd_search(problem, N, problem.layers, opts)
    history.append((T, N, val))
    conv = res.converged and ok
    stalled = False
    while N * problem.N_growth <= problem.N_max:
        N *= problem.N_growth
        T2, val2, res2, ok2 = _fd_search(problem, N, problem.layers, opts)
        history.append((T2, N, val2))
        conv &= res2.converged and ok2
        change = _rel(val2, val)
        T, val, res = T2, val2, res2
        if change < problem.N_tol:
            stalled = True
            break
    if not stalled:
        flags.append("N schedule exhausted before the value stalled")
    if not conv:
        flags.append("inner solve or bracket check failed")
    diag = {}
    if problem.kind == "fd_m_k":
        diag["hermite_reference"] = hermite_reference(problem.k, problem.delta)
    return TensionResult(val, T, N, res.profile, history, not flags, problem,
                         "; ".join(flags) or "stalled", diag)


def pin_layer_bias(problem: TensionProblem, N: int | None = None,
                   opts: SolverOptions = SolverOptions()) -> dict:
    """Compare the pinned-layer value with the unpinned full-line value at
    one mesh (the bias of emulating clamped derivatives by pinning)."""
    if problem.kind != "fd_m_k":
        raise SpecError("pin-layer bias is defined for fd_m_k")
    N = N or problem.N0
    pinned = _fd_search(problem, N, problem.layers, opts)[1]
    free = _fd_search(problem, N, 0, opts)[1]
    return {"N": N, "pinned": pinned, "unpinned": free, "relative_bias": _rel(pinned, free)}


def solve_profile(problem: TensionProblem, opts: SolverOptions = SolverOptions()) -> TensionResult:
    if problem.kind in PHASE_KINDS:
        return _solve_phase(problem, opts)
    if problem.kind in FD_KINDS:
        return _solve_fd(problem, opts)
    from .experiments import m_half_estimate
    return m_half_estimate(problem, opts)


def fd_jump_energy(kind: str, params: dict, delta: float,
                   opts: SolverOptions = SolverOptions()) -> float:
    """Jump-energy constant for a jump of size ``delta``."""
    if kind not in FD_KINDS:
        raise SpecError(f"fd_jump_energy takes one of {FD_KINDS}")
    problem = TensionProblem(kind=kind, delta=delta, **params)
    return solve_profile(problem, opts).value


def jump_exponent(problem: TensionProblem) -> float:
    if problem.kind == "fd_m_k":
        return 1.0 / problem.k
    if problem.kind == "fd_m_1s":
        return 1.0 / (1.0 + problem.s)
    raise SpecError("jump exponents are defined for fd kinds")


def centered_tanh_distance(profile: GridFunction) -> float:
    """Sup distance between a profile and tanh shifted to the profile's zero."""
    x, v = profile.x, profile.values
    i = int(np.searchsorted(v, 0.0))
    i = min(max(i, 1), len(v) - 1)
    x0 = x[i - 1] + (x[i] - x[i - 1]) * (0.0 - v[i - 1]) / (v[i] - v[i - 1])
    return float(np.max(np.abs(v - np.tanh(x - x0))))
