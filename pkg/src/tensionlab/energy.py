"""Discrete energies of every family, with exact gradients.

Families (v the unknown on the grid, w = D^k v its k-th difference field):

* ``phase-fractional``  (1/eps) h sum W(v) + eps^(2(k+s)-1) c [w]^2_s
* ``phase-integer``     (1/eps) h sum W(v) + eps^(2k-1) h sum w^2
* ``phase-half``        (1/(eps |log eps|)) h sum W(v) + (1/|log eps|) [v]^2_(1/2)
* ``fd-integer``        h sum min(u'^2, 1/eps) + eps^(2k-1) h sum (u^(k))^2
* ``fd-fractional``     h sum min(u'^2, 1/eps) + eps^(2s+1) c [u']^2_s

where c is the scaling factor of the nonlocal term. In ``full-line`` mode
the candidate carries constant tails and every difference stencil that
reaches into them is kept; the nonlocal term then includes the analytic
tail interactions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from . import kernel as kern
from .errors import DomainError, SpecError
from .grid import (NO_PINS, GridFunction, PinMask, ProfileGrid, TailSpec, blowup,
                   derivative_grid, difference_matrix, difference_offset)
from .potential import Potential

FAMILIES = ("phase-fractional", "phase-integer", "phase-half", "fd-integer", "fd-fractional")
DOMAIN_MODES = ("bounded", "full-line")


@dataclass(frozen=True)
class FunctionalSpec:
    family: str
    potential: Potential
    k: int
    s: float
    eps: float
    grid: ProfileGrid
    domain_mode: str = "bounded"
    scaling: str = "none"
    pins: PinMask = NO_PINS

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise SpecError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.domain_mode not in DOMAIN_MODES:
            raise SpecError(f"unknown domain mode {self.domain_mode!r}")
        if self.scaling not in kern.SCALINGS:
            raise SpecError(f"unknown scaling {self.scaling!r}")
        if not (math.isfinite(self.eps) and self.eps > 0):
            raise SpecError("eps must be positive and finite")
        k, s = int(self.k), float(self.s)
        if k != self.k or k < 0:
            raise SpecError("derivative order k must be a nonnegative integer")
        fam = self.family
        if fam == "phase-fractional":
            if not 0.0 < s < 1.0:
                raise SpecError("phase-fractional needs s in (0, 1)")
            if k + s <= 0.5:
                raise SpecError("phase-fractional needs k + s > 1/2")
            if self.scaling == "log":
                raise SpecError("logarithmic scaling belongs to the phase-half family")
        elif fam == "phase-integer":
            if s != 0.0 or k < 1:
                raise SpecError("phase-integer needs s = 0 and k >= 1")
        elif fam == "phase-half":
            if k != 0 or s != 0.5 or self.scaling != "log":
                raise SpecError("phase-half needs k = 0, s = 1/2 and log scaling")
            if not self.eps < 1.0:
                raise SpecError("phase-half needs eps < 1")
        elif fam == "fd-integer":
            if k < 2 or s != 0.0:
                raise SpecError("fd-integer needs k >= 2 and s = 0")
            if self.potential.kind != "truncated-quadratic":
                raise SpecError("fd-integer uses the truncated-quadratic potential")
        elif fam == "fd-fractional":
            if k != 1 or not 0.0 < s < 1.0:
                raise SpecError("fd-fractional needs k = 1 and s in (0, 1)")
            if self.potential.kind != "truncated-quadratic":
                raise SpecError("fd-fractional uses the truncated-quadratic potential")
        if fam in ("phase-integer", "fd-integer") and self.scaling != "none":
            raise SpecError(f"{fam} takes no scaling of the perturbation")
        self.pins.check(self.grid.N)

    @property
    def full_line(self) -> bool:
        return self.domain_mode == "full-line"

    @property
    def is_phase(self) -> bool:
        return self.family.startswith("phase")

    @property
    def uses_kernel(self) -> bool:
        return self.family in ("phase-fractional", "phase-half", "fd-fractional")

    def with_grid(self, grid: ProfileGrid, pins: PinMask | None = None) -> "FunctionalSpec":
        return replace(self, grid=grid, pins=NO_PINS if pins is None else pins)

    def to_dict(self) -> dict:
        return {"family": self.family, "potential": self.potential.to_dict(), "k": self.k,
                "s": self.s, "eps": self.eps, "grid": self.grid.to_dict(),
                "domain_mode": self.domain_mode, "scaling": self.scaling,
                "pins": self.pins.to_dict()}


def _truncated_square(t, cap):
    """min(t^2, cap) and its tie-broken derivative (0 on the plateau)."""
    t2 = t * t
    inside = t2 < cap
    return np.where(inside, t2, cap), np.where(inside, 2.0 * t, 0.0)


@dataclass(eq=False)
class Functional:
    """A FunctionalSpec compiled for a given tail specification.

    ``include_bulk=False`` keeps only the perturbation term (the inner
    problem of the free-discontinuity profile constants).
    """

    spec: FunctionalSpec
    tails: TailSpec
    include_bulk: bool = True
    bulk_weight: float = field(init=False)
    pert_weight: float = field(init=False)
    D: sp.csr_matrix = field(init=False, repr=False)
    offset: np.ndarray = field(init=False, repr=False)
    D1: sp.csr_matrix | None = field(init=False, default=None, repr=False)
    offset1: np.ndarray | None = field(init=False, default=None, repr=False)
    K: kern.KernelMatrix | None = field(init=False, default=None, repr=False)
    wtails: TailSpec = field(init=False, repr=False)

    def __post_init__(self):
        spec = self.spec
        if spec.full_line != self.tails.constant:
            raise DomainError("full-line mode needs constant tails, bounded mode needs none")
        g, k, s, eps = spec.grid, int(spec.k), float(spec.s), float(spec.eps)
        N, h = g.N, g.h
        fam = spec.family
        if N <= 2 * max(k, 1):
            raise DomainError(f"{N} cells cannot carry a derivative of order {k}")
        c = self.tails.constant
        if fam == "phase-half":
            lg = abs(math.log(eps))
            self.bulk_weight = 1.0 / (eps * lg)
            self.pert_weight = 1.0 / lg
        elif fam == "phase-fractional":
            self.bulk_weight = 1.0 / eps
            self.pert_weight = eps ** (2 * (k + s) - 1) * kern.scale_factor(spec.scaling, s, eps)
        elif fam == "phase-integer":
            self.bulk_weight = 1.0 / eps
            self.pert_weight = eps ** (2 * k - 1)
        elif fam == "fd-integer":
            self.bulk_weight = 1.0
            self.pert_weight = eps ** (2 * k - 1)
        else:
            self.bulk_weight = 1.0
            self.pert_weight = eps ** (2 * s + 1) * kern.scale_factor(spec.scaling, s, eps)
        self.D = (difference_matrix(N, k, c) / h**k).tocsr() if k else sp.identity(N, format="csr")
        self.offset = difference_offset(N, k, self.tails) / h**k if k else np.zeros(N)
        if k and c:
            self.wtails = TailSpec("constant", 0.0, 0.0)
        else:
            self.wtails = self.tails
        if fam.startswith("fd"):
            self.D1 = (difference_matrix(N, 1, c) / h).tocsr()
            self.offset1 = difference_offset(N, 1, self.tails) / h
        if spec.uses_kernel:
            wgrid = derivative_grid(g, k, self.tails)
            self.K = kern.kernel_matrix(wgrid, 0.5 if fam == "phase-half" else s, extended=c)

    # -- pieces -----------------------------------------------------------
    def derivative_field(self, values) -> np.ndarray:
        return self.D @ values + self.offset

    def bulk(self, values):
        spec = self.spec
        h = spec.grid.h
        if not self.include_bulk:
            return 0.0, np.zeros_like(values)
        if spec.is_phase:
            W = spec.potential(values)
            dW = spec.potential.derivative(values)
            return self.bulk_weight * h * float(np.sum(W)), self.bulk_weight * h * dW
        t = self.D1 @ values + self.offset1
        m, dm = _truncated_square(t, 1.0 / spec.eps)
        return h * float(np.sum(m)), h * (self.D1.T @ dm)

    def perturbation(self, values):
        w = self.derivative_field(values)
        if self.K is None:
            hw = self.spec.grid.h
            e = hw * float(w @ w)
            gw = 2.0 * hw * w
        else:
            e, gw = kern.seminorm_and_gradient(w, self.wtails, self.K)
        return self.pert_weight * e, self.pert_weight * (self.D.T @ gw)

    def value_and_gradient(self, values) -> tuple[float, np.ndarray]:
        values = np.asarray(values, dtype=float)
        eb, gb = self.bulk(values)
        ep, gp = self.perturbation(values)
        grad = np.asarray(gb + gp, dtype=float)
        if len(self.spec.pins):
            grad[list(self.spec.pins.indices)] = 0.0
        return eb + ep, grad

    def value(self, values) -> float:
        return self.value_and_gradient(values)[0]

    # -- preconditioning ----------------------------------------------------
    def quadratic_hessian(self):
        """Hessian of the quadratic perturbation term (dense for kernel
        families, sparse otherwise)."""
        if self.K is None:
            hw = self.spec.grid.h
            return (2.0 * hw * self.pert_weight) * (self.D.T @ self.D).tocsc()
        H = kern.seminorm_hessian(self.K) * self.pert_weight
        D = self.D
        if self.spec.k == 0:
            return H
        return np.asarray(D.T @ (D.T @ H).T)

    def bulk_model_hessian(self):
        """A positive model of the bulk Hessian: the well curvature for phase
        families, the inner quadratic branch for fd families."""
        spec = self.spec
        h = spec.grid.h
        if not self.include_bulk:
            return sp.csc_matrix((spec.grid.N, spec.grid.N))
        if spec.is_phase:
            if spec.potential.is_double_well:
                curv = max(float(spec.potential.second_derivative(1.0)),
                           float(spec.potential.second_derivative(-1.0)))
            else:
                curv = 2.0 * spec.potential.scale
            return sp.identity(spec.grid.N, format="csc") * (self.bulk_weight * h * curv)
        return (2.0 * h) * (self.D1.T @ self.D1).tocsc()

    def model_hessian(self):
        Q = self.quadratic_hessian()
        B = self.bulk_model_hessian()
        if sp.issparse(Q):
            return (Q + B).tocsc()
        return Q + B.toarray()


def compile_functional(spec: FunctionalSpec, tails: TailSpec) -> Functional:
    return Functional(spec, tails)


def _check_compatible(spec: FunctionalSpec, v: GridFunction):
    if v.grid != spec.grid:
        raise DomainError("grid function does not live on the functional's grid")


def energy(spec: FunctionalSpec, v: GridFunction) -> float:
    _check_compatible(spec, v)
    return Functional(spec, v.tails).value(v.values)


def gradient(spec: FunctionalSpec, v: GridFunction) -> GridFunction:
    """Exact gradient with respect to the grid values; pinned entries are 0."""
    _check_compatible(spec, v)
    g = Functional(spec, v.tails).value_and_gradient(v.values)[1]
    return GridFunction(spec.grid, g, TailSpec())


def scaling_identity_check(spec: FunctionalSpec, u: GridFunction) -> tuple[float, float]:
    """Energy of u under F_eps on I and of its blow-up under F_1 on I/eps."""
    if spec.family != "phase-fractional" or spec.full_line:
        raise SpecError("the scaling identity is checked on bounded phase-fractional energies")
    if not 0.0 < spec.eps <= 1.0:
        raise DomainError("eps must lie in (0, 1]")
    left = energy(spec, u)
    if spec.eps == 1.0:
        return left, left
    v = blowup(u, spec.eps)
    spec1 = replace(spec, eps=1.0, grid=v.grid)
    return left, energy(spec1, v)
