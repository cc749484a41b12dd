"""Command-line entry point.

    tensionlab tension   --kind fd_m_k --k 2
    tensionlab sweep-s   --kind to_half
    tensionlab sweep-eps --family phase-integer --k 1
    tensionlab profile   --family phase-fractional --k 0 --s 0.75
    tensionlab check
    tensionlab export    --input out/tension-fd_m_k-k2-s0-delta1.json

Every flag mirrors a key of the JSON config accepted by ``--config``;
flags override the file. Exit status: 0 converged, 2 flagged as not
converged, 1 error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .cache import Cache, cache_key, resolve_dir
from .checks import format_table, run_checks
from .config import COMMANDS, RunConfig, config_from_dict
from .energy import Functional, FunctionalSpec
from .errors import ConfigError, TensionLabError
from .experiments import (SweepRecord, SweepRow, eps_sweep, extrapolate, record_from_results,
                          s_problems)
from .export import export_csv, write_text
from .grid import NO_PINS, GridFunction, TailSpec, boundary_pins, constant_tails, make_grid
from .potential import Potential
from .solver import SolverOptions, init_profile, multi_start, write_trace_csv
from .tension import TensionProblem, TensionResult, append_atlas, solve_profile

EXIT_OK, EXIT_ERROR, EXIT_FLAGGED = 0, 1, 2
DEFAULT_EPS = (0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125)


def _potential(cfg: RunConfig) -> Potential:
    return Potential(cfg.potential, cfg.potential_scale, cfg.expression)


def _solver_options(cfg: RunConfig) -> SolverOptions:
    return SolverOptions(max_iterations=cfg.max_iterations, seed=cfg.seed)


def _problem(cfg: RunConfig, kind=None, s=None) -> TensionProblem:
    kind = kind or cfg.kind
    k = cfg.k
    s = cfg.s if s is None else s
    if kind == "m_half":
        k, s = 0, 0.5
    return TensionProblem(kind, _potential(cfg), k, s, cfg.delta, cfg.T0, cfg.T_growth,
                          cfg.T_max, cfg.N0, cfg.N_growth, cfg.N_max, cfg.T_tol, cfg.N_tol,
                          cfg.pin_layers, cfg.restarts, cfg.seed)


def _fmt_num(x) -> str:
    return format(float(x), "g").replace(".", "p").replace("-", "m")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


class Runner:
    def __init__(self, cfg: RunConfig, stdout=None):
        self.cfg = cfg
        self.out = Path(cfg.output_dir)
        self.cache = Cache(resolve_dir(cfg.cache_dir)) if cfg.use_cache else None
        self.stdout = stdout or sys.stdout
        self.hits = 0
        self.misses = 0

    def cached(self, key_payload: dict, compute):
        """JSON payload for ``key_payload``; computed and stored on a miss.
        Fresh payloads go through a JSON round trip so hits and misses yield
        identical objects."""
        if self.cache is not None:
            key = cache_key(key_payload)
            hit = self.cache.lookup(key)
            if hit is not None:
                self.hits += 1
                return hit
        self.misses += 1
        payload = json.loads(json.dumps(compute()))
        if self.cache is not None:
            self.cache.store(key, payload)
        return payload

    def tension_result(self, problem: TensionProblem) -> TensionResult:
        key = {"op": "tension", "problem": problem.to_dict(),
               "max_iterations": self.cfg.max_iterations}
        payload = self.cached(key, lambda: solve_profile(problem, _solver_options(self.cfg))
                              .to_json_dict())
        return TensionResult.from_json_dict(payload)

    # -- commands --------------------------------------------------------------
    def tension(self) -> int:
        problem = _problem(self.cfg)
        res = self.tension_result(problem)
        tag = f"tension-{problem.kind}-k{problem.k}-s{_fmt_num(problem.s)}-delta{_fmt_num(problem.delta)}"
        write_text(self.out / f"{tag}.json", res.to_json() + "\n")
        write_text(self.out / f"{tag}-profile.csv", res.profile.to_csv())
        append_atlas(res, self.out / "atlas.csv")
        summary = {"kind": problem.kind, "k": problem.k, "s": problem.s, "delta": problem.delta,
                   "value": res.value, "converged": res.converged, "T_final": res.T_final,
                   "N_final": res.N_final, "reason": res.reason}
        if res.diagnostics.get("route_agreement") is not None:
            summary["log_route_limit"] = res.diagnostics["log_route"]["limit"]
        self.stdout.write(_dump(summary))
        return EXIT_OK if res.converged else EXIT_FLAGGED

    def sweep_s(self) -> int:
        cfg = self.cfg
        overrides = {key: getattr(cfg, key) for key in
                     ("T0", "T_growth", "T_max", "N0", "N_growth", "N_max", "T_tol", "N_tol")}
        problems = s_problems(cfg.kind, cfg.k, cfg.s_list, _potential(cfg), **overrides)
        results = [self.tension_result(p) for p in problems]
        rec = record_from_results(cfg.kind, results)
        return self._write_sweep(rec, f"sweep-s-{cfg.kind}")

    def sweep_eps(self) -> int:
        cfg = self.cfg
        eps_list = tuple(cfg.eps_list or DEFAULT_EPS)
        rec = None
        bounds = []
        for eps in eps_list:
            key = {"op": "eps-row", "family": cfg.family, "k": cfg.k, "s": cfg.s, "eps": eps,
                   "N": cfg.N, "pin_fraction": cfg.pin_fraction, "scaling": cfg.scaling,
                   "potential": _potential(cfg).to_dict(), "seed": cfg.seed,
                   "max_iterations": cfg.max_iterations}
            payload = self.cached(key, lambda e=eps: eps_sweep(
                cfg.family, cfg.k, cfg.s, _potential(cfg), (e,), N=cfg.N,
                pin_fraction=cfg.pin_fraction, scaling=cfg.scaling,
                opts=_solver_options(cfg)).to_json_dict())
            row_rec = SweepRecord.from_json_dict(payload)
            if rec is None:
                rec = SweepRecord("eps", row_rec.family, row_rec.gap, row_rec.fixed)
            rec.rows.extend(row_rec.rows)
            bounds.extend(row_rec.extras.get("recovery_energies", []))
        rec.extras["recovery_energies"] = bounds
        rec.check_monotone()
        return self._write_sweep(rec, f"sweep-eps-{cfg.family}-k{cfg.k}-s{_fmt_num(cfg.s)}")

    def _write_sweep(self, rec: SweepRecord, tag: str) -> int:
        write_text(self.out / f"{tag}.csv", rec.to_csv())
        write_text(self.out / f"{tag}.json", rec.to_json() + "\n")
        write_text(self.out / f"{tag}.dat", rec.plot_data())
        summary = {"rows": len(rec.rows), "converged": rec.all_converged}
        try:
            limit, slope, residual = extrapolate(rec)
            summary.update(limit=limit, slope=slope, residual=residual)
        except TensionLabError:
            pass
        write_text(self.out / f"{tag}-fit.json", _dump(summary))
        self.stdout.write(_dump(summary))
        return EXIT_OK if rec.all_converged else EXIT_FLAGGED

    def profile(self) -> int:
        cfg = self.cfg
        fam = cfg.family

        def compute():
            pot = _potential(cfg)
            if fam.startswith("fd"):
                pot = Potential("truncated-quadratic")
                grid = make_grid(0.0, cfg.T, cfg.N)
                tails, mode, pins = constant_tails(0.0, cfg.delta), "full-line", NO_PINS
            elif fam == "phase-half":
                grid = make_grid(-cfg.T, cfg.T, cfg.N)
                width = max(1, round(cfg.pin_fraction * cfg.N))
                tails, mode = TailSpec(), "bounded"
                pins = boundary_pins(cfg.N, width, -1.0, 1.0)
            else:
                grid = make_grid(-cfg.T, cfg.T, cfg.N)
                tails, mode, pins = constant_tails(-1.0, 1.0), "full-line", NO_PINS
            k = cfg.k
            s = 0.5 if fam == "phase-half" else cfg.s
            if fam == "phase-half":
                k = 0
            scaling = cfg.scaling or ("log" if fam == "phase-half" else "none")
            spec = FunctionalSpec(fam, pot, k, s, cfg.eps, grid, mode, scaling, pins)
            if fam.startswith("fd"):
                starts = [init_profile("hermite", grid, tails, {"k": max(k, 2)})]
                starts += [init_profile("random-perturbed", grid, tails,
                                        {"base": "hermite", "k": max(k, 2),
                                         "seed": cfg.seed + j})
                           for j in range(cfg.restarts)]
            else:
                starts = [init_profile("tanh", grid, tails, {"center": 0.0, "width": cfg.eps})]
            starts = [v.with_values(pins.apply(v.values)) for v in starts]
            best, _ = multi_start(spec, starts, _solver_options(cfg))
            start_energy = Functional(spec, tails).value(starts[0].values)
            return {"spec": spec.to_dict(), "energy": best.energy, "converged": best.converged,
                    "reason": best.reason, "iterations": best.iterations,
                    "start_energy": start_energy,
                    "trace": [[int(i), float(e), float(g)] for i, e, g in best.trace],
                    "profile": best.profile.to_json_dict()}

        key = {"op": "profile", **cfg.canonical()}
        for drop in ("input", "output", "command"):
            key.pop(drop)
        payload = self.cached(key, compute)
        tag = f"profile-{fam}-k{cfg.k}-s{_fmt_num(cfg.s)}-eps{_fmt_num(cfg.eps)}"
        prof = GridFunction.from_json_dict(payload["profile"])
        write_text(self.out / f"{tag}.json", _dump(payload))
        write_text(self.out / f"{tag}.csv", prof.to_csv())
        self.out.mkdir(parents=True, exist_ok=True)
        write_trace_csv(payload["trace"], self.out / f"{tag}-trace.csv")
        self.stdout.write(_dump({k: payload[k] for k in ("energy", "converged", "reason",
                                                         "iterations")}))
        return EXIT_OK if payload["converged"] else EXIT_FLAGGED

    def check(self) -> int:
        results = run_checks()
        self.stdout.write(format_table(results) + "\n")
        return EXIT_OK if all(r.passed for r in results) else EXIT_ERROR

    def export(self) -> int:
        src = Path(self.cfg.input)
        if src.is_dir():
            files = sorted(src.glob("tension-*.json"))
        else:
            files = [src]
        items = []
        for f in files:
            try:
                data = json.loads(f.read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read result {f}: {exc}") from None
            if "problem" in data:
                items.append(TensionResult.from_json_dict(data))
            elif "rows" in data:
                items.append(SweepRecord.from_json_dict(data))
        target = Path(self.cfg.output) if self.cfg.output else self.out / "export.csv"
        export_csv(items, target)
        self.stdout.write(f"{target}\n")
        return EXIT_OK

    def run(self) -> int:
        dispatch = {"tension": self.tension, "sweep-s": self.sweep_s,
                    "sweep-eps": self.sweep_eps, "profile": self.profile,
                    "check": self.check, "export": self.export}
        try:
            from threadpoolctl import threadpool_limits
        except ImportError:  # pragma: no cover
            return dispatch[self.cfg.command]()
        with threadpool_limits(limits=self.cfg.threads):
            return dispatch[self.cfg.command]()


def run(cfg: RunConfig, stdout=None) -> int:
    runner = Runner(cfg, stdout)
    try:
        code = runner.run()
    except (TensionLabError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if runner.cache is not None and runner.hits + runner.misses:
        print(f"cache: {runner.hits} hits, {runner.misses} misses", file=sys.stderr)
    return code


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


FLAGS = (
    ("kind", str), ("family", str), ("k", int), ("s", float), ("delta", float),
    ("eps", float), ("eps_list", _float_list), ("s_list", _float_list), ("potential", str),
    ("potential_scale", float), ("expression", str), ("scaling", str), ("N", int),
    ("T", float), ("T0", float), ("T_growth", float), ("T_max", float), ("N0", int),
    ("N_growth", int), ("N_max", int), ("T_tol", float), ("N_tol", float),
    ("pin_layers", int), ("restarts", int), ("pin_fraction", float), ("output_dir", str),
    ("cache_dir", str), ("threads", int), ("seed", int), ("input", str), ("output", str),
    ("max_iterations", int),
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tensionlab", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file; flags override its keys")
        sp.add_argument("--no-cache", dest="use_cache", action="store_false", default=None)
        for key, typ in FLAGS:
            flag = "--" + key.replace("_", "-")
            sp.add_argument(flag, dest=key, type=typ, default=None)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data = {}
    if args.config:
        path = Path(args.config)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: JSON parse error at line {exc.lineno}, "
                              f"column {exc.colno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        if data.get("command", args.command) != args.command:
            raise ConfigError(f"command: config says {data['command']!r}, "
                              f"command line says {args.command!r}")
    data["command"] = args.command
    for key, _ in FLAGS:
        val = getattr(args, key)
        if val is not None:
            data[key] = val
    if args.use_cache is not None:
        data["use_cache"] = args.use_cache
    return config_from_dict(data)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 is reserved for non-convergence
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
