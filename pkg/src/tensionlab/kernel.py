"""Quadrature of the Gagliardo double integral

    [w]^2 = int int |w(x) - w(y)|^2 / |x - y|^(1 + 2s) dx dy

over ordered pairs, for cell-centred fields on a uniform grid.

Cells at index distance >= 2 interact through the exact cell-pair integral
of the kernel. Touching cells, and the omitted self-cell term, use the
first-order weight  int int |x - y|^(1 - 2s) dx dy / (x_i - x_j)^2, which is
finite for every s < 1 (the exact touching integral diverges once s >= 1/2)
and exact on affine fields. Constant tails start one ghost cell beyond the
grid and enter through closed-form one-dimensional integrals.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.special

from .errors import DomainError, InfiniteEnergyError
from .grid import GridFunction, ProfileGrid

HALF_TOL = 1e-9
SERIES_FROM = 16
SERIES_TERMS = 10


def _check_order(s: float):
    if not (0.0 < s < 1.0):
        raise DomainError(f"fractional order s must lie in (0, 1), got {s}")


def _is_half(s: float) -> bool:
    return abs(2.0 * s - 1.0) < HALF_TOL


def _second_antiderivative(t, s):
    """G with G'' = t^(-1-2s), up to an affine term (which cancels in every
    four-point combination used here)."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if _is_half(s):
            return -np.log(t)
        q = 1.0 - 2.0 * s
        return np.expm1(q * np.log(t)) / (q * (q - 1.0))


def cell_kernel(a1, b1, a2, b2, s):
    """int_{a1}^{b1} int_{a2}^{b2} (y - x)^(-1-2s) dy dx for b1 <= a2.

    Returns ``inf`` for touching cells when s >= 1/2.
    """
    _check_order(s)
    if not (a1 < b1 and a2 < b2):
        raise DomainError("cells must have positive length")
    if b1 > a2:
        raise DomainError("cells overlap; expected b1 <= a2")
    G = lambda t: _second_antiderivative(t, s)  # noqa: E731
    if b1 == a2 and s >= 0.5:
        return math.inf
    val = G(a2 - b1) - G(a2 - a1) - G(b2 - b1) + G(b2 - a1)
    return float(val)


def _exact_unit_offsets(m: np.ndarray, s: float) -> np.ndarray:
    """Exact kernel integral between unit cells [0,1] and [m, m+1], m >= 2."""
    m = np.asarray(m, dtype=float)
    out = np.empty_like(m)
    near = m < SERIES_FROM
    if np.any(near):
        mn = m[near]
        G = lambda t: _second_antiderivative(t, s)  # noqa: E731
        out[near] = G(mn - 1.0) - 2.0 * G(mn) + G(mn + 1.0)
    if np.any(~near):
        # second difference of t^q / (q (q - 1)) as a series in 1/m^2
        q = 1.0 - 2.0 * s
        mf = m[~near]
        inv2 = 1.0 / (mf * mf)
        total = np.zeros_like(mf)
        power = np.ones_like(mf)
        for j in range(SERIES_TERMS):
            n = 2 * j + 2
            c = 2.0 / math.factorial(n)
            for r in range(2, n):
                c *= q - r
            total += c * power
            power = power * inv2
        out[~near] = mf ** (q - 2.0) * total
    return out


def _moment_antiderivative(t, s):
    """F with F'' = t^(1-2s), F(0) = 0."""
    p = 1.0 - 2.0 * s
    return np.asarray(t, dtype=float) ** (p + 2.0) / ((p + 1.0) * (p + 2.0))


def _series_coefficient(P: float, j: int) -> float:
    # coefficient of m^(P-2-2j) in the second difference of t^P / (P (P - 1))
    n = 2 * j + 2
    c = 2.0 / math.factorial(n)
    for r in range(2, n):
        c *= P - r
    return c


def linear_defect(s: float) -> float:
    """Sum over offsets m >= 2 of the energy an affine field loses when the
    exact cell-pair weight replaces the first-order one:
    sum_m [Delta^2 F(m) - m^2 * exact(m)], F'' = t^(1-2s)."""
    P = 3.0 - 2.0 * s
    q = 1.0 - 2.0 * s
    m = np.arange(2, SERIES_FROM, dtype=float)
    F = lambda t: _moment_antiderivative(t, s)  # noqa: E731
    total = float(np.sum(F(m + 1.0) - 2.0 * F(m) + F(m - 1.0) - m * m * _exact_unit_offsets(m, s)))
    for j in range(1, SERIES_TERMS):
        total += (_series_coefficient(P, j) - _series_coefficient(q, j)) * float(
            scipy.special.zeta(2 * j - 1 + 2 * s, SERIES_FROM))
    return total


def touching_weight(s: float) -> float:
    """Unit weight of a touching pair.

    First-order weight of the pair plus half the self-cell moment, plus the
    affine defect of all farther pairs; clamped from below by the weight at
    offset 2 so the weights stay positive and decreasing.
    """
    F = lambda t: _moment_antiderivative(t, s)  # noqa: E731
    raw = float(F(2.0) - F(1.0)) + linear_defect(s)
    return max(raw, float(_exact_unit_offsets(np.array([2.0]), s)[0]))


_TOUCHING = {}


def _touching_weight_cached(s: float) -> float:
    if s not in _TOUCHING:
        _TOUCHING[s] = touching_weight(s)
    return _TOUCHING[s]


def unit_weights(n: int, s: float) -> np.ndarray:
    """Toeplitz symbol of the pair weights for unit cells: entry m is the
    weight between cells at index distance m (entry 0 is zero)."""
    _check_order(s)
    kappa = np.zeros(n)
    if n > 1:
        kappa[1] = _touching_weight_cached(float(s))
    if n > 2:
        kappa[2:] = _exact_unit_offsets(np.arange(2, n), s)
    return kappa


def unit_tail_coefficients(dist: np.ndarray, s: float) -> np.ndarray:
    """int_{i}^{i+1} int_{-inf}^{0} (x - y)^(-1-2s) dy dx for integer i >= 1."""
    i = np.asarray(dist, dtype=float)
    if np.any(i < 1):
        raise DomainError("tail coefficients need a gap of at least one cell")
    if _is_half(s):
        return np.log1p(1.0 / i) / (2.0 * s)
    q = 1.0 - 2.0 * s
    return i**q * np.expm1(q * np.log1p(1.0 / i)) / (q * 2.0 * s)


def tail_tail_constant(s: float, ell: float) -> float:
    """int_{x<0} int_{y>ell} (y - x)^(-1-2s) dy dx; infinite for s <= 1/2."""
    if ell <= 0:
        raise DomainError("tail separation must be positive")
    if s <= 0.5 or _is_half(s):
        return math.inf
    return ell ** (1.0 - 2.0 * s) / (2.0 * s * (2.0 * s - 1.0))


@dataclass(eq=False)
class KernelMatrix:
    """Pair weights for a field on ``grid``.

    With ``extended`` the unknown vector is bracketed by one ghost cell per
    side (holding the tail values) and the far tails contribute through
    ``tail_left``/``tail_right`` and the constant ``tail_tail``.
    """

    grid: ProfileGrid
    s: float
    extended: bool
    kappa: np.ndarray
    tail_left: np.ndarray
    tail_right: np.ndarray
    tail_tail: float
    _dense: np.ndarray | None = field(default=None, repr=False)
    _row_sums: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.grid.N + (2 if self.extended else 0)

    @property
    def weight_scale(self) -> float:
        return self.grid.h ** (1.0 - 2.0 * self.s)

    @property
    def K(self) -> np.ndarray:
        if self._dense is None:
            self._dense = scipy.linalg.toeplitz(self.kappa) * self.weight_scale
        return self._dense

    @property
    def row_sums(self) -> np.ndarray:
        if self._row_sums is None:
            self._row_sums = self.K.sum(axis=1)
        return self._row_sums

    def core_slice(self) -> slice:
        return slice(1, self.size - 1) if self.extended else slice(0, self.size)


def _cache_key(grid: ProfileGrid, s: float, extended: bool) -> str:
    blob = json.dumps({"grid": grid.to_dict(), "s": float(s), "extended": bool(extended),
                       "v": 1}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def kernel_matrix(grid: ProfileGrid, s: float, extended: bool = False,
                  cache_dir: str | os.PathLike | None = None) -> KernelMatrix:
    """Assemble the pair weights (and tail data when ``extended``)."""
    _check_order(s)
    n = grid.N + (2 if extended else 0)
    path = None
    if cache_dir is not None:
        path = Path(cache_dir) / f"kernel-{_cache_key(grid, s, extended)}.npz"
        if path.exists():
            try:
                with np.load(path) as z:
                    return KernelMatrix(grid, s, extended, z["kappa"], z["tl"], z["tr"],
                                        float(z["tt"]))
            except (OSError, ValueError, KeyError):
                pass
    kappa = unit_weights(n, s)
    scale = grid.h ** (1.0 - 2.0 * s)
    if extended:
        idx = np.arange(n)
        tl = np.zeros(n)
        tr = np.zeros(n)
        tl[1:] = unit_tail_coefficients(idx[1:], s) * scale
        tr[:-1] = unit_tail_coefficients((n - 1 - idx)[:-1], s) * scale
        tt = tail_tail_constant(s, n * grid.h)
    else:
        tl = tr = np.zeros(n)
        tt = 0.0
    km = KernelMatrix(grid, s, extended, kappa, tl, tr, tt)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp.npz")
        np.savez(tmp, kappa=kappa, tl=tl, tr=tr, tt=np.array(tt))
        os.replace(tmp, path)
    return km


def _extended_vector(values, tails, K: KernelMatrix):
    if K.extended:
        if not tails.constant:
            raise DomainError("kernel carries tail data but the field has no constant tails")
        return np.concatenate([[tails.c_L], values, [tails.c_R]])
    if tails.constant:
        raise DomainError("field has constant tails but the kernel was built without them")
    return np.asarray(values, dtype=float)


def seminorm_and_gradient(values, tails, K: KernelMatrix) -> tuple[float, np.ndarray]:
    """Discrete [w]^2 and its gradient with respect to the grid values."""
    u = _extended_vector(values, tails, K)
    d = u - u[0]
    Ld = K.row_sums * d - K.K @ d
    energy = 2.0 * float(d @ Ld)
    grad = 4.0 * Ld
    if K.extended:
        dl = u - tails.c_L
        dr = u - tails.c_R
        energy += 2.0 * float(np.sum(dl * dl * K.tail_left) + np.sum(dr * dr * K.tail_right))
        grad += 4.0 * (dl * K.tail_left + dr * K.tail_right)
        jump = tails.c_R - tails.c_L
        if jump != 0.0:
            if not math.isfinite(K.tail_tail):
                raise InfiniteEnergyError(
                    f"distinct tail values have infinite H^s energy for s = {K.s} <= 1/2")
            energy += 2.0 * jump * jump * K.tail_tail
    return energy, grad[K.core_slice()]


def seminorm(w: GridFunction, K: KernelMatrix) -> float:
    if w.grid != K.grid:
        raise DomainError("field grid does not match the kernel grid")
    return seminorm_and_gradient(w.values, w.tails, K)[0]


def seminorm_hessian(K: KernelMatrix) -> np.ndarray:
    """Hessian of the (quadratic) seminorm with respect to the grid values."""
    H = 4.0 * (np.diag(K.row_sums) - K.K)
    if K.extended:
        H += 4.0 * np.diag(K.tail_left + K.tail_right)
    c = K.core_slice()
    return np.ascontiguousarray(H[c, c])


SCALINGS = ("none", "bbm", "ms", "alpha", "log")


def scale_factor(variant: str, s: float, eps: float = 0.5) -> float:
    """Multiplicative normalisation of the nonlocal term."""
    if variant not in SCALINGS:
        raise DomainError(f"unknown scaling variant {variant!r}")
    if variant == "none":
        return 1.0
    if variant == "log":
        if not (0.0 < eps < 1.0):
            raise DomainError("logarithmic scaling needs eps in (0, 1)")
        return 1.0 / abs(math.log(eps))
    _check_order(s)
    if variant == "bbm":
        return 1.0 - s
    if variant == "ms":
        return 0.5 * s
    return s * (1.0 - s) * 2.0 ** (s - 1.0)
