"""Uniform cell-centred grids, grid functions with constant tails, and
forward-difference derivative fields."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from math import comb

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, GridTooCoarseError

MIN_CELLS = 8


@dataclass(frozen=True)
class ProfileGrid:
    a: float
    b: float
    N: int

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or not self.b > self.a:
            raise DomainError(f"grid needs finite a < b, got ({self.a}, {self.b})")
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"cell count must be a positive integer, got {self.N}")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.N

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def centers(self) -> np.ndarray:
        return self.a + (np.arange(self.N) + 0.5) * self.h

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "N": self.N}

    @classmethod
    def from_dict(cls, d) -> "ProfileGrid":
        return cls(float(d["a"]), float(d["b"]), int(d["N"]))


def make_grid(a: float, b: float, N: int) -> ProfileGrid:
    if N < MIN_CELLS:
        raise DomainError(f"a grid needs at least {MIN_CELLS} cells, got {N}")
    return ProfileGrid(float(a), float(b), int(N))


@dataclass(frozen=True)
class TailSpec:
    """``none`` for bounded-domain energies, ``constant`` for functions
    equal to c_L left of the grid and c_R right of it."""

    mode: str = "none"
    c_L: float = 0.0
    c_R: float = 0.0

    def __post_init__(self):
        if self.mode not in ("none", "constant"):
            raise DomainError(f"unknown tail mode {self.mode!r}")
        if not (np.isfinite(self.c_L) and np.isfinite(self.c_R)):
            raise DomainError("tail values must be finite")

    @property
    def constant(self) -> bool:
        return self.mode == "constant"

    def reversed(self) -> "TailSpec":
        return TailSpec(self.mode, self.c_R, self.c_L)

    def to_dict(self) -> dict:
        return {"mode": self.mode, "c_L": self.c_L, "c_R": self.c_R}

    @classmethod
    def from_dict(cls, d) -> "TailSpec":
        return cls(d["mode"], float(d["c_L"]), float(d["c_R"]))


NO_TAILS = TailSpec()


def constant_tails(c_L: float, c_R: float) -> TailSpec:
    return TailSpec("constant", float(c_L), float(c_R))


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: ProfileGrid
    values: np.ndarray
    tails: TailSpec = NO_TAILS

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.grid.N,):
            raise DomainError(f"expected {self.grid.N} values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("grid function values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __eq__(self, other):
        return (isinstance(other, GridFunction) and self.grid == other.grid
                and self.tails == other.tails and np.array_equal(self.values, other.values))

    @property
    def x(self) -> np.ndarray:
        return self.grid.centers

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values, self.tails)

    def reversed(self) -> "GridFunction":
        g = self.grid
        return GridFunction(ProfileGrid(-g.b, -g.a, g.N), self.values[::-1], self.tails.reversed())

    def padded(self, width: int) -> np.ndarray:
        """Values with ``width`` ghost cells per side holding the tail constants."""
        if not self.tails.constant:
            raise DomainError("padding needs constant tails")
        return np.concatenate([np.full(width, self.tails.c_L), self.values,
                               np.full(width, self.tails.c_R)])

    def sample(self, x) -> np.ndarray:
        """Piecewise-linear interpolation through the cell centres; constant
        tails (or edge values) outside."""
        xs = self.grid.centers
        left = self.tails.c_L if self.tails.constant else self.values[0]
        right = self.tails.c_R if self.tails.constant else self.values[-1]
        if self.tails.constant:
            h = self.grid.h
            xs = np.concatenate([[xs[0] - h], xs, [xs[-1] + h]])
            vals = np.concatenate([[left], self.values, [right]])
        else:
            vals = self.values
        return np.interp(x, xs, vals, left=left, right=right)

    def to_json_dict(self) -> dict:
        return {"grid": self.grid.to_dict(), "values": [float(v) for v in self.values],
                "tails": self.tails.to_dict()}

    @classmethod
    def from_json_dict(cls, d) -> "GridFunction":
        return cls(ProfileGrid.from_dict(d["grid"]), np.array(d["values"], dtype=float),
                   TailSpec.from_dict(d["tails"]))

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "GridFunction":
        return cls.from_json_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "value"])
        for x, v in zip(self.x, self.values):
            w.writerow([format(float(x), ".17g"), format(float(v), ".17g")])
        return buf.getvalue()


@dataclass(frozen=True)
class PinMask:
    indices: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        vals = tuple(float(v) for v in self.values)
        if len(idx) != len(vals):
            raise DomainError("pin indices and values differ in length")
        if len(set(idx)) != len(idx):
            raise DomainError("duplicate pin index")
        if not all(np.isfinite(vals)):
            raise DomainError("pinned values must be finite")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)

    def check(self, N: int):
        if any(i < 0 or i >= N for i in self.indices):
            raise DomainError(f"pin index outside [0, {N})")

    def mask(self, N: int) -> np.ndarray:
        self.check(N)
        m = np.zeros(N, dtype=bool)
        m[list(self.indices)] = True
        return m

    def apply(self, values: np.ndarray) -> np.ndarray:
        out = np.array(values, dtype=float)
        if self.indices:
            out[list(self.indices)] = self.values
        return out

    def satisfied_by(self, values) -> bool:
        if not self.indices:
            return True
        return bool(np.all(np.asarray(values)[list(self.indices)] == np.asarray(self.values)))

    def __len__(self):
        return len(self.indices)

    def to_dict(self) -> dict:
        return {"indices": list(self.indices), "values": list(self.values)}


NO_PINS = PinMask()


def boundary_pins(N: int, width: int, left: float, right: float) -> PinMask:
    """Clamp ``width`` cells at each end to the given values."""
    if width <= 0:
        return NO_PINS
    if 2 * width >= N:
        raise DomainError("pinned layers cover the whole grid")
    idx = list(range(width)) + list(range(N - width, N))
    return PinMask(idx, [left] * width + [right] * width)


def derivative_grid(grid: ProfileGrid, k: int, tails: TailSpec) -> ProfileGrid:
    if k == 0:
        return grid
    h = grid.h
    if tails.constant:
        return ProfileGrid(grid.a - 0.5 * k * h, grid.b + 0.5 * k * h, grid.N + k)
    return ProfileGrid(grid.a + 0.5 * k * h, grid.b - 0.5 * k * h, grid.N - k)


def difference_matrix(N: int, k: int, tails_constant: bool) -> sp.csr_matrix:
    """k-th forward difference (unscaled) acting on the values.

    With constant tails the stencil runs over k ghost cells per side and the
    result has N + k rows; the tail contribution is returned separately by
    :func:`difference_offset`. Without tails the result has N - k rows.
    """
    coeffs = [(-1) ** (k - j) * comb(k, j) for j in range(k + 1)]
    if tails_constant:
        rows = N + k
        full = sp.diags(coeffs, offsets=list(range(k + 1)), shape=(rows, N + 2 * k), format="csr")
        return full[:, k:k + N].tocsr()
    return sp.diags(coeffs, offsets=list(range(k + 1)), shape=(N - k, N), format="csr")


def difference_offset(N: int, k: int, tails: TailSpec) -> np.ndarray:
    if not tails.constant:
        return np.zeros(max(N - k, 0))
    pad = np.concatenate([np.full(k, tails.c_L), np.zeros(N), np.full(k, tails.c_R)])
    return np.diff(pad, n=k)


def derivative(v: GridFunction, k: int) -> GridFunction:
    """k-th derivative field by repeated forward differencing.

    The field of order k lives on the grid shifted by k*h/2. With constant
    tails every stencil touching the tails is kept (N + k cells, zero tails
    beyond), so no part of a transition into the tail is dropped.
    """
    if k < 0 or int(k) != k:
        raise DomainError("derivative order must be a nonnegative integer")
    if k == 0:
        return v
    N = v.grid.N
    if N <= 2 * k:
        raise GridTooCoarseError(f"{N} cells cannot carry a derivative of order {k}")
    h = v.grid.h
    if v.tails.constant:
        w = np.diff(v.padded(k), n=k) / h**k
        tails = constant_tails(0.0, 0.0)
    else:
        w = np.diff(v.values, n=k) / h**k
        tails = NO_TAILS
    return GridFunction(derivative_grid(v.grid, k, v.tails), w, tails)


def blowup(u: GridFunction, eps: float) -> GridFunction:
    """v(t) = u(eps t): same values on the grid divided by eps."""
    if not (np.isfinite(eps) and eps > 0):
        raise DomainError("blow-up factor must be positive")
    g = u.grid
    return GridFunction(ProfileGrid(g.a / eps, g.b / eps, g.N), u.values, u.tails)
