"""Sharp-interface verification harness and critical-exponent studies.

* ``eps_sweep``: pinned-boundary minima of the eps-explicit energy on an
  interval, with transition counts per eps.
* ``s_sweep``: tensions along s approaching 1/2, 1 or 0, fed to
  ``extrapolate`` (affine least squares in the gap to the target).
* ``pointwise_bbm_check`` / ``pointwise_ms_check``: the s -> 1 and s -> 0
  limits of scaled seminorms of a fixed function.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .energy import Functional, FunctionalSpec
from .errors import DomainError, InsufficientDataError, SpecError, UnsupportedOperation
from .grid import GridFunction, TailSpec, boundary_pins, constant_tails, make_grid
from .kernel import kernel_matrix, seminorm
from .potential import Potential
from .solver import SolverOptions, init_profile, multi_start
from .tension import TensionProblem, TensionResult, solve_profile

SWEEP_HEADER = ["param", "energy", "inner_transitions", "outer_upper", "outer_lower",
                "converged"]
GAPS = ("half", "bbm", "ms", "eps", "log-eps")
S_DEFAULTS = {
    "to_half": (0.75, 0.7, 0.65, 0.6, 0.55),
    "bbm_left": (0.8, 0.9, 0.95, 0.99),
    "ms_right": (0.2, 0.1, 0.05, 0.02),
}
S_GAPS = {"to_half": "half", "bbm_left": "bbm", "ms_right": "ms"}
HALF_EPS = tuple(2.0 ** -j for j in range(4, 11))
LOG_WINDOW = 3


@dataclass
class SweepRow:
    param: float
    energy: float
    inner: int
    outer_upper: int
    outer_lower: int
    converged: bool
    checksum: str = ""


@dataclass
class SweepRecord:
    kind: str  # "eps" or "s"
    family: str
    gap: str
    fixed: dict
    rows: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("eps", "s"):
            raise DomainError(f"unknown sweep kind {self.kind!r}")
        if self.gap not in GAPS:
            raise DomainError(f"unknown gap {self.gap!r}")

    def check_monotone(self):
        p = [r.param for r in self.rows]
        d = np.diff(p)
        if len(p) > 1 and not (np.all(d > 0) or np.all(d < 0)):
            raise DomainError("sweep parameters must be strictly monotone")

    def gap_of(self, param: float) -> float:
        if self.gap == "half":
            return 2.0 * param - 1.0
        if self.gap == "bbm":
            return 1.0 - param
        if self.gap == "ms":
            return param
        if self.gap == "eps":
            return param
        return 1.0 / abs(math.log(param))

    @property
    def all_converged(self) -> bool:
        return all(r.converged for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for r in self.rows:
            w.writerow([format(float(r.param), ".17g"), format(float(r.energy), ".17g"),
                        r.inner, r.outer_upper, r.outer_lower,
                        "true" if r.converged else "false"])
        return buf.getvalue()

    def plot_data(self) -> str:
        """Two columns: gap to the target, energy."""
        lines = ["# gap energy"]
        for r in self.rows:
            lines.append(f"{format(self.gap_of(r.param), '.17g')} {format(r.energy, '.17g')}")
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "family": self.family, "gap": self.gap, "fixed": self.fixed,
                "rows": [vars(r) for r in self.rows], "extras": self.extras}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_json_dict(cls, d) -> "SweepRecord":
        return cls(d["kind"], d["family"], d["gap"], d["fixed"],
                   [SweepRow(**r) for r in d["rows"]], d.get("extras", {}))

    @classmethod
    def from_json(cls, text: str) -> "SweepRecord":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class TransitionConfig:
    eta: float = 0.25
    r: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.eta < 0.5:
            raise DomainError("eta must lie in (0, 1/2)")
        if not self.r > 0.0:
            raise DomainError("outer threshold r must be positive")


def _crossings(values, low_below: float, high_above: float) -> int:
    """Completed crossings between {v < low_below} and {v > high_above}."""
    state = 0
    count = 0
    for v in values:
        if v < low_below:
            new = -1
        elif v > high_above:
            new = 1
        else:
            continue
        if state and new != state:
            count += 1
        state = new
    return count


def count_transitions(v: GridFunction, cfg: TransitionConfig = TransitionConfig()):
    """(inner, outer_upper, outer_lower) transition counts along the samples
    (constant tails included at the ends)."""
    vals = np.asarray(v.values)
    if v.tails.constant:
        vals = np.concatenate([[v.tails.c_L], vals, [v.tails.c_R]])
    eta, r = cfg.eta, cfg.r
    inner = _crossings(vals, -1.0 + eta, 1.0 - eta)
    upper = _crossings(vals, 1.0 + r, 1.0 + 2.0 * r)
    lower = _crossings(vals, -1.0 - 2.0 * r, -1.0 - r)
    return inner, upper, lower


def checksum(v: GridFunction) -> str:
    return hashlib.sha256(np.ascontiguousarray(v.values, dtype="<f8").tobytes()).hexdigest()[:16]


def _default_scaling(family):
    return "log" if family == "phase-half" else "none"


def eps_sweep(family: str, k: int, s: float, potential: Potential = Potential(),
              eps_list=(0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125),
              N: int = 1024, interval=(0.0, 1.0), pin_fraction: float = 0.1,
              scaling: str | None = None, cfg: TransitionConfig = TransitionConfig(),
              opts: SolverOptions = SolverOptions(), random_starts: int = 1) -> SweepRecord:
    """Pinned-boundary minima of the eps-explicit energy on ``interval``.

    Both end layers (``pin_fraction`` of the cells each) are clamped to -1
    and +1, which forces one interface.
    """
    if not family.startswith("phase"):
        raise UnsupportedOperation("eps sweeps are implemented for the phase families")
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) > 1 and not np.all(np.diff(eps_list) < 0):
        raise DomainError("eps list must be strictly decreasing")
    scaling = _default_scaling(family) if scaling is None else scaling
    grid = make_grid(interval[0], interval[1], N)
    width = max(1, int(round(pin_fraction * N)))
    pins = boundary_pins(N, width, -1.0, 1.0)
    mid = 0.5 * (grid.a + grid.b)
    rec = SweepRecord("eps", family, "log-eps" if family == "phase-half" else "eps",
                      {"k": k, "s": s, "N": N, "interval": list(interval),
                       "pin_fraction": pin_fraction, "potential": potential.to_dict(),
                       "scaling": scaling})
    bounds = []
    for eps in eps_list:
        spec = FunctionalSpec(family, potential, k, s, eps, grid, "bounded", scaling, pins)
        tails = TailSpec()
        recovery = init_profile("tanh", grid, tails, {"center": mid, "width": eps})
        starts = [recovery,
                  init_profile("linear-ramp", grid, tails,
                               {"center": mid, "width": grid.length * (1 - 2 * pin_fraction)})]
        for j in range(random_starts):
            starts.append(init_profile("random-perturbed", grid, tails,
                                       {"center": mid, "width": eps, "seed": opts.seed + j,
                                        "amplitude": 0.02}))
        starts = [st.with_values(pins.apply(st.values)) for st in starts]
        best, _ = multi_start(spec, starts, opts)
        bounds.append(Functional(spec, tails).value(starts[0].values))
        inner, up, lo = count_transitions(best.profile, cfg)
        rec.rows.append(SweepRow(eps, best.energy, inner, up, lo, best.converged,
                                 checksum(best.profile)))
    rec.extras["recovery_energies"] = bounds
    return rec


def _s_problem(kind: str, k: int, s: float, potential: Potential, overrides: dict):
    if kind == "to_half":
        return TensionProblem("m_ks", potential, 0, s, **overrides)
    if kind == "bbm_left":
        return TensionProblem("m_bbm", potential, k, s, **overrides)
    if kind == "ms_right":
        return TensionProblem("m_ms", potential, k, s, **overrides)
    raise SpecError(f"unknown s-sweep kind {kind!r}")


def s_problems(kind: str, k: int = 1, s_list=None, potential: Potential = Potential(),
               **overrides) -> list:
    """The TensionProblems an s-sweep solves, in row order."""
    if kind not in S_DEFAULTS:
        raise SpecError(f"unknown s-sweep kind {kind!r}; expected one of {tuple(S_DEFAULTS)}")
    s_list = S_DEFAULTS[kind] if s_list is None else tuple(float(s) for s in s_list)
    return [_s_problem(kind, k, s, potential, overrides) for s in s_list]


def record_from_results(kind: str, results, cfg: TransitionConfig = TransitionConfig()) -> SweepRecord:
    """Assemble an s-sweep record from solved TensionResults."""
    results = list(results)
    if not results:
        raise InsufficientDataError("an s-sweep needs at least one row")
    p0 = results[0].problem
    fixed = {"k": p0.k, "potential": p0.potential.to_dict()}
    rec = SweepRecord("s", kind, S_GAPS[kind], fixed)
    for res in results:
        s = res.problem.s
        val = (2.0 * s - 1.0) * res.value if kind == "to_half" else res.value
        inner, up, lo = count_transitions(res.profile, cfg)
        rec.rows.append(SweepRow(s, val, inner, up, lo, res.converged, checksum(res.profile)))
    rec.check_monotone()
    return rec


def s_sweep(kind: str, k: int = 1, s_list=None, potential: Potential = Potential(),
            opts: SolverOptions = SolverOptions(), cfg: TransitionConfig = TransitionConfig(),
            results: list | None = None, **overrides) -> SweepRecord:
    """Tensions along an s list; rows hold (2s-1) m_s for to_half, the
    (1-s)- or s/2-scaled constants otherwise. Pass a list as ``results`` to
    collect the TensionResults."""
    problems = s_problems(kind, k, s_list, potential, **overrides)
    solved = [solve_profile(p, opts) for p in problems]
    if results is not None:
        results.extend(solved)
    return record_from_results(kind, solved, cfg)


def extrapolate(record: SweepRecord, min_rows: int = 3, window: int | None = None):
    """Least-squares fit value = limit + slope * gap over converged rows.

    ``window`` restricts the fit to that many rows nearest the target (a
    Richardson-style step for slowly converging sweeps). Returns
    (limit, slope, residual) with residual the largest relative deviation
    of the fit from the data.
    """
    rows = [r for r in record.rows if r.converged]
    if window is not None:
        if window < 2:
            raise DomainError("an affine fit needs a window of at least 2 rows")
        rows = sorted(rows, key=lambda r: abs(record.gap_of(r.param)))[:window]
        min_rows = min(min_rows, window)
    if len(rows) < min_rows:
        raise InsufficientDataError(f"extrapolation needs {min_rows} converged rows, got {len(rows)}")
    g = np.array([record.gap_of(r.param) for r in rows])
    y = np.array([r.energy for r in rows])
    A = np.column_stack([np.ones_like(g), g])
    (limit, slope), *_ = np.linalg.lstsq(A, y, rcond=None)
    fit = limit + slope * g
    scale = np.maximum(np.abs(y), 1e-300)
    residual = float(np.max(np.abs(fit - y) / scale))
    return float(limit), float(slope), residual


def half_log_sweep(eps_list=HALF_EPS, N: int = 4096, opts: SolverOptions = SolverOptions(),
                   potential: Potential = Potential()) -> SweepRecord:
    """Logarithmically scaled s = 1/2 energies on (0, 1)."""
    return eps_sweep("phase-half", 0, 0.5, potential, eps_list, N=N, opts=opts,
                     random_starts=0)


def m_half_estimate(problem: TensionProblem, opts: SolverOptions = SolverOptions(),
                    eps_list=HALF_EPS, N_log: int = 4096) -> TensionResult:
    """Both routes to the s = 1/2 constant; the value is the s-route limit."""
    overrides = {key: getattr(problem, key) for key in
                 ("T0", "T_growth", "T_max", "N0", "N_growth", "N_max", "T_tol", "N_tol")}
    results: list = []
    rec_s = s_sweep("to_half", 0, None, problem.potential, opts, results=results, **overrides)
    lim_s, slope_s, res_s = extrapolate(rec_s)
    rec_log = half_log_sweep(eps_list, N_log, opts, problem.potential)
    lim_l, slope_l, res_l = extrapolate(rec_log, window=LOG_WINDOW)
    lim_all = extrapolate(rec_log)[0]
    last = results[-1]
    diag = {
        "s_route": {"limit": lim_s, "slope": slope_s, "residual": res_s,
                    "rows": [[r.param, r.energy] for r in rec_s.rows]},
        "log_route": {"limit": lim_l, "slope": slope_l, "residual": res_l,
                      "window": LOG_WINDOW, "limit_all_rows": lim_all,
                      "rows": [[r.param, r.energy] for r in rec_log.rows]},
        "route_agreement": abs(lim_s - lim_l) / abs(lim_s),
    }
    converged = rec_s.all_converged and rec_log.all_converged
    history = [(r.T_final, r.N_final, r.value) for r in results]
    return TensionResult(lim_s, last.T_final, last.N_final, last.profile, history, converged,
                         problem, "extrapolated", diag)


# -- pointwise limits ---------------------------------------------------------

def _scaled_seminorm(v: GridFunction, s: float) -> float:
    K = kernel_matrix(v.grid, s, extended=v.tails.constant)
    return seminorm(v, K)


def _dirichlet(v: GridFunction, derivative) -> float:
    if derivative is not None:
        f = lambda x: derivative(x) ** 2  # noqa: E731
        return integrate.quad(f, v.grid.a, v.grid.b, limit=400, epsabs=1e-13)[0]
    h = v.grid.h
    vals = v.padded(1) if v.tails.constant else v.values
    return float(np.sum(np.diff(vals) ** 2) / h)


def pointwise_bbm_check(v: GridFunction | None = None, s_list=(0.9, 0.95, 0.99),
                        derivative=None):
    """Rows (s, (1-s) [v]_s^2, int |v'|^2); tanh on (-20, 20) by default."""
    if v is None:
        g = make_grid(-20.0, 20.0, 2048)
        v = GridFunction(g, np.tanh(g.centers), constant_tails(-1.0, 1.0))
        derivative = lambda x: 1.0 / np.cosh(x) ** 2  # noqa: E731
    target = _dirichlet(v, derivative)
    return [(float(s), (1.0 - s) * _scaled_seminorm(v, s), target) for s in s_list]


def bump(x, center=0.0, radius=1.0):
    """exp(-1 / (1 - r^2)) on |r| < 1, r = (x - center) / radius."""
    r = (np.asarray(x, dtype=float) - center) / radius
    inside = np.abs(r) < 1.0
    out = np.zeros_like(r)
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


def pointwise_ms_check(v: GridFunction | None = None, s_list=(0.1, 0.05, 0.02),
                       function=None):
    """Rows (s, s [v]_s^2, 2 int |v|^2) for a zero-tailed v; a bump on
    (-2, 2) by default. The core-tail terms carry the mass that survives."""
    if v is None:
        g = make_grid(-2.0, 2.0, 1024)
        v = GridFunction(g, bump(g.centers), constant_tails(0.0, 0.0))
        function = bump
    if not (v.tails.constant and v.tails.c_L == 0.0 and v.tails.c_R == 0.0):
        raise DomainError("the MS check needs zero tails")
    if function is not None:
        mass = integrate.quad(lambda x: float(function(x)) ** 2, v.grid.a, v.grid.b,
                              limit=400, epsabs=1e-14, points=[0.0])[0]
    else:
        mass = float(np.sum(v.values ** 2) * v.grid.h)
    return [(float(s), s * _scaled_seminorm(v, s), 2.0 * mass) for s in s_list]
