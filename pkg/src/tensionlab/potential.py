"""Nonlinear potentials W: the quartic double well, the truncated quadratic,
and a user-supplied smooth expression in the variable ``z``."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, UnsupportedOperation

KINDS = ("quartic", "truncated-quadratic", "expression")

SCAN_LIMIT = 10.0
SCAN_STEP = 1e-3


@lru_cache(maxsize=32)
def _compile_expression(expr: str):
    import sympy

    z = sympy.Symbol("z", real=True)
    try:
        parsed = sympy.sympify(expr, locals={"z": z})
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise DomainError(f"cannot parse potential expression {expr!r}: {exc}") from None
    extra = parsed.free_symbols - {z}
    if extra:
        raise DomainError(f"potential expression may only use 'z', found {sorted(map(str, extra))}")
    d1 = sympy.diff(parsed, z)
    d2 = sympy.diff(d1, z)
    mods = ["numpy"]
    return (
        sympy.lambdify(z, parsed, mods),
        sympy.lambdify(z, d1, mods),
        sympy.lambdify(z, d2, mods),
    )


def _as_checked(z):
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("potential evaluated at a non-finite point")
    return arr


def _broadcast(fn, arr):
    out = fn(arr)
    return np.broadcast_to(np.asarray(out, dtype=float), arr.shape).copy()


def _unwrap(arr, original):
    return float(arr) if np.ndim(original) == 0 else arr


@dataclass(frozen=True)
class Potential:
    """W(z) = scale * base(z).

    ``quartic`` has base (1 - z^2)^2, ``truncated-quadratic`` has base
    min(z^2, 1), and ``expression`` evaluates ``expression`` with sympy.
    """

    kind: str = "quartic"
    scale: float = 1.0
    expression: str | None = field(default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown potential kind {self.kind!r}; expected one of {KINDS}")
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise DomainError("potential scale must be positive and finite")
        if (self.kind == "expression") != (self.expression is not None):
            raise DomainError("an expression is required exactly for kind='expression'")
        if self.kind == "expression":
            _compile_expression(self.expression)

    @property
    def is_double_well(self) -> bool:
        return self.kind != "truncated-quadratic"

    def __call__(self, z):
        arr = _as_checked(z)
        if self.kind == "quartic":
            out = (1.0 - arr * arr) ** 2
        elif self.kind == "truncated-quadratic":
            out = np.minimum(arr * arr, 1.0)
        else:
            out = _broadcast(_compile_expression(self.expression)[0], arr)
        return _unwrap(self.scale * out, z)

    def derivative(self, z):
        """W'(z). On the truncated quadratic the kink |z| = 1 takes the
        plateau value 0."""
        arr = _as_checked(z)
        if self.kind == "quartic":
            out = -4.0 * arr * (1.0 - arr * arr)
        elif self.kind == "truncated-quadratic":
            out = np.where(np.abs(arr) < 1.0, 2.0 * arr, 0.0)
        else:
            out = _broadcast(_compile_expression(self.expression)[1], arr)
        return _unwrap(self.scale * out, z)

    def second_derivative(self, z):
        arr = _as_checked(z)
        if self.kind == "quartic":
            out = -4.0 + 12.0 * arr * arr
        elif self.kind == "truncated-quadratic":
            out = np.where(np.abs(arr) < 1.0, 2.0, 0.0)
        else:
            out = _broadcast(_compile_expression(self.expression)[2], arr)
        return _unwrap(self.scale * out, z)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "scale": self.scale}
        if self.expression is not None:
            d["expression"] = self.expression
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Potential":
        return cls(kind=d["kind"], scale=float(d.get("scale", 1.0)), expression=d.get("expression"))


def well_curvature(p: Potential) -> tuple[float, float]:
    """(W''(-1), W''(1)) for double-well kinds."""
    if not p.is_double_well:
        raise UnsupportedOperation("well curvature is defined only for double-well potentials")
    left, right = float(p.second_derivative(-1.0)), float(p.second_derivative(1.0))
    return left, right


@dataclass
class HypothesisCheck:
    name: str
    passed: bool
    witness: dict


@dataclass
class ValidationReport:
    potential: Potential
    checks: list[HypothesisCheck]
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> HypothesisCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_rows(self) -> list[tuple[str, bool]]:
        return [(c.name, c.passed) for c in self.checks]


def validate(p: Potential, z_max: float = SCAN_LIMIT, step: float = SCAN_STEP) -> ValidationReport:
    """Scan-based check of nonnegativity, well location, well curvature and
    positivity at infinity. Failures are reported, never raised."""
    n = int(round(2 * z_max / step)) + 1
    z = np.linspace(-z_max, z_max, n)
    w = np.asarray(p(z))
    checks = []
    notes = []

    i_min = int(np.argmin(w))
    checks.append(HypothesisCheck("nonnegative", bool(w[i_min] >= 0.0),
                                  {"min_value": float(w[i_min]), "at": float(z[i_min])}))

    at_wells = [float(p(-1.0)), float(p(1.0))]
    off = np.abs(np.abs(z) - 1.0) > 0.5 * step
    j = int(np.argmin(np.where(off, w, np.inf)))
    wells_ok = max(abs(v) for v in at_wells) <= 1e-12 and w[j] > 0.0
    checks.append(HypothesisCheck("zero-set is {-1, 1}", bool(wells_ok),
                                  {"W(-1)": at_wells[0], "W(1)": at_wells[1],
                                   "min_off_wells": float(w[j]), "at": float(z[j])}))

    hq = step
    curv = [(float(p(c + hq)) - 2 * float(p(c)) + float(p(c - hq))) / hq**2 for c in (-1.0, 1.0)]
    checks.append(HypothesisCheck("positive well curvature", bool(min(curv) > 0.0),
                                  {"left": curv[0], "right": curv[1]}))

    far = np.abs(z) >= 2.0
    k = int(np.argmin(np.where(far, w, np.inf)))
    checks.append(HypothesisCheck("positive at infinity", bool(w[k] > 0.0),
                                  {"min_value": float(w[k]), "at": float(z[k]), "z_max": z_max}))

    if not p.is_double_well:
        notes.append("free-discontinuity potential: wells are not at +-1")
    if p.kind == "expression":
        msg = "finite scan on [-%g, %g]; not a proof of the growth condition" % (z_max, z_max)
        notes.append(msg)
        warnings.warn(msg, stacklevel=2)
    return ValidationReport(p, checks, notes)
