import numpy as np
import pytest
from hypothesis import given, strategies as st

from tensionlab.errors import DomainError, GridTooCoarseError
from tensionlab.grid import (GridFunction, PinMask, ProfileGrid, blowup, boundary_pins,
                             constant_tails, derivative, make_grid)


def test_make_grid_examples():
    g = ProfileGrid(-1.0, 1.0, 4)
    np.testing.assert_allclose(g.centers, [-0.75, -0.25, 0.25, 0.75])
    assert g.h == 0.5
    assert make_grid(0, 1, 8).h == 0.125
    with pytest.raises(DomainError):
        make_grid(1, 0, 8)
    with pytest.raises(DomainError):
        make_grid(0, 1, 4)


def test_derivative_of_affine_and_quadratic():
    g = make_grid(0, 1, 16)
    x = g.centers
    w1 = derivative(GridFunction(g, x), 1)
    np.testing.assert_allclose(w1.values, 1.0)
    w2 = derivative(GridFunction(g, x**2), 2)
    np.testing.assert_allclose(w2.values, 2.0)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_constant_with_matching_tails_has_zero_derivative(k):
    g = make_grid(0, 1, 16)
    v = GridFunction(g, np.full(16, 5.0), constant_tails(5.0, 5.0))
    w = derivative(v, k)
    assert w.grid.N == 16 + k
    np.testing.assert_array_equal(w.values, 0.0)
    assert (w.tails.c_L, w.tails.c_R) == (0.0, 0.0)


def test_derivative_too_coarse():
    g = make_grid(0, 1, 8)
    with pytest.raises(GridTooCoarseError):
        derivative(GridFunction(g, g.centers), 4)


def test_blowup():
    g = make_grid(0, 1, 8)
    u = GridFunction(g, g.centers**2)
    v = blowup(u, 0.5)
    assert (v.grid.a, v.grid.b) == (0.0, 2.0)
    np.testing.assert_array_equal(v.values, u.values)
    assert blowup(u, 1.0) == u
    with pytest.raises(DomainError):
        blowup(u, 0.0)


def test_pins():
    pins = boundary_pins(10, 2, -1.0, 1.0)
    vals = pins.apply(np.zeros(10))
    assert list(vals[:2]) == [-1.0, -1.0] and list(vals[-2:]) == [1.0, 1.0]
    assert pins.satisfied_by(vals)
    with pytest.raises(DomainError):
        boundary_pins(4, 2, 0, 1)
    with pytest.raises(DomainError):
        PinMask((1, 1), (0.0, 0.0))


def test_json_round_trip():
    g = make_grid(-2, 3, 12)
    v = GridFunction(g, np.sin(g.centers), constant_tails(-1, 2))
    assert GridFunction.from_json(v.to_json()) == v


def test_csv_format():
    g = make_grid(0, 1, 8)
    text = GridFunction(g, g.centers).to_csv()
    lines = text.split("\n")
    assert lines[0] == "x,value"
    assert "\r" not in text
    assert len(lines) == 10 and lines[-1] == ""


@given(st.integers(8, 64), st.floats(0.1, 10))
def test_blowup_preserves_cell_count_and_scales_h(N, eps):
    g = make_grid(0, 1, N)
    v = blowup(GridFunction(g, np.zeros(N)), eps)
    assert v.grid.N == N
    assert v.grid.h == pytest.approx(g.h / eps)


@given(st.integers(8, 40), st.integers(1, 3))
def test_derivative_shape(N, k):
    g = make_grid(0, 1, N)
    v = GridFunction(g, np.arange(N, dtype=float))
    assert derivative(v, k).grid.N == N - k
    vt = GridFunction(g, np.arange(N, dtype=float), constant_tails(0, 1))
    assert derivative(vt, k).grid.N == N + k


@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=8, max_size=30))
def test_reverse_twice_is_identity(values):
    g = make_grid(-1, 2, len(values))
    v = GridFunction(g, values, constant_tails(-1, 1))
    assert v.reversed().reversed() == v
