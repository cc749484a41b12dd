import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from tensionlab.errors import DomainError, InfiniteEnergyError
from tensionlab.grid import GridFunction, ProfileGrid, constant_tails, make_grid
from tensionlab.kernel import (cell_kernel, kernel_matrix, scale_factor, seminorm,
                               seminorm_and_gradient, seminorm_hessian, tail_tail_constant,
                               unit_weights)


def gaussian_seminorm(s):
    """Ordered-pairs seminorm of exp(-x^2) on the line, via Plancherel:
    int |xi|^(2s) |w^|^2 dxi / (Gamma(1+2s) sin(pi s))."""
    return (math.pi * 2 ** (s + 0.5) * math.gamma(s + 0.5)
            / (math.gamma(1 + 2 * s) * math.sin(math.pi * s)))


def gaussian_field(N, L=8.0):
    g = make_grid(-L, L, N)
    return GridFunction(g, np.exp(-g.centers**2), constant_tails(0.0, 0.0))


def test_fourier_oracle_against_direct_quadrature():
    s = 0.4
    # int |w(x+h) - w(x)|^2 dx for the gaussian, in closed form
    inner = lambda h: 2 * math.sqrt(math.pi / 2) * (1 - math.exp(-h * h / 2))  # noqa: E731
    direct = 2 * integrate.quad(lambda h: inner(h) / h ** (1 + 2 * s), 0, np.inf, limit=200)[0]
    assert direct == pytest.approx(gaussian_seminorm(s), rel=1e-9)


def test_cell_kernel_examples():
    assert cell_kernel(0, 1, 2, 3, 0.75) == pytest.approx(0.21751, abs=1e-5)
    assert cell_kernel(0, 1, 1, 2, 0.25) == pytest.approx(2.34315, abs=1e-5)
    assert cell_kernel(0, 1, 1, 2, 0.5) == math.inf


def test_cell_kernel_against_quadrature():
    s = 0.75
    ref = integrate.dblquad(lambda y, x: (y - x) ** (-1 - 2 * s), 0, 1, 2, 3, epsabs=1e-12)[0]
    assert cell_kernel(0, 1, 2, 3, s) == pytest.approx(ref, rel=1e-9)


def test_cell_kernel_errors():
    with pytest.raises(DomainError):
        cell_kernel(0, 2, 1, 3, 0.5)
    with pytest.raises(DomainError):
        cell_kernel(0, 1, 2, 3, 1.0)


def test_tail_tail_constant():
    G = tail_tail_constant(0.75, 2.0)
    assert G == pytest.approx(2 ** -0.5 / 0.75, rel=1e-14)
    assert 4 * G == pytest.approx(3.77124, abs=1e-5)
    s = 0.75
    ref = integrate.quad(lambda u: (u - 2.0) * u ** (-1 - 2 * s), 2.0, np.inf)[0]
    assert G == pytest.approx(ref, rel=1e-9)
    assert tail_tail_constant(0.5, 1.0) == math.inf


def test_distinct_tails_infinite_for_small_s():
    g = make_grid(-1, 1, 16)
    v = GridFunction(g, np.tanh(g.centers), constant_tails(-1, 1))
    with pytest.raises(InfiniteEnergyError):
        seminorm(v, kernel_matrix(g, 0.4, extended=True))


def test_seminorm_sums_over_ordered_pairs(rng):
    g = make_grid(0, 1, 12)
    K = kernel_matrix(g, 0.6)
    x = rng.standard_normal(12)
    pairs = sum(K.K[i, j] * (x[i] - x[j]) ** 2 for i in range(12) for j in range(12) if i != j)
    assert seminorm(GridFunction(g, x), K) == pytest.approx(pairs, rel=1e-12)


def test_constant_field_has_zero_seminorm():
    g = make_grid(0, 1, 32)
    v = GridFunction(g, np.full(32, 0.3), constant_tails(0.3, 0.3))
    assert seminorm(v, kernel_matrix(g, 0.6, extended=True)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("s", [0.25, 0.75])
def test_quadrature_matches_fourier_oracle(s):
    v = gaussian_field(1024)
    val = seminorm(v, kernel_matrix(v.grid, s, extended=True))
    assert val == pytest.approx(gaussian_seminorm(s), rel=1e-3)


@pytest.mark.parametrize("s", [0.25, 0.75])
def test_convergence_slope(s):
    Ns = [128, 256, 512, 1024]
    errs = []
    for N in Ns:
        v = gaussian_field(N)
        errs.append(abs(seminorm(v, kernel_matrix(v.grid, s, True)) / gaussian_seminorm(s) - 1))
    slope = -np.polyfit(np.log(Ns), np.log(errs), 1)[0]
    assert slope >= 2 - 2 * s


def test_bbm_example():
    g = make_grid(-20, 20, 2048)
    v = GridFunction(g, np.tanh(g.centers), constant_tails(-1, 1))
    s = 0.99
    val = (1 - s) * seminorm(v, kernel_matrix(g, s, True))
    assert val == pytest.approx(4 / 3, rel=0.05)


def test_weights_positive_decreasing():
    for s in (0.1, 0.3, 0.5, 0.7, 0.9):
        w = unit_weights(64, s)
        assert np.all(w[1:] > 0)
        # the touching weight is clamped at the next one for small s
        assert np.all(np.diff(w[1:]) <= 0)
        assert np.all(np.diff(w[2:]) < 0)


def test_kernel_cache_round_trip(tmp_path):
    g = make_grid(0, 1, 32)
    a = kernel_matrix(g, 0.6, True, cache_dir=tmp_path)
    b = kernel_matrix(g, 0.6, True, cache_dir=tmp_path)
    assert len(list(tmp_path.glob("kernel-*.npz"))) == 1
    np.testing.assert_array_equal(a.K, b.K)


def test_scale_factor_examples():
    assert scale_factor("alpha", 0.5) == pytest.approx(1 / (4 * math.sqrt(2)))
    assert scale_factor("bbm", 0.9) == pytest.approx(0.1)
    assert scale_factor("ms", 0.4) == pytest.approx(0.2)
    assert scale_factor("log", 0.5, eps=math.exp(-2)) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        scale_factor("alpha", 1.0)
    with pytest.raises(DomainError):
        scale_factor("log", 0.5, eps=1.0)


def test_alpha_limits():
    assert scale_factor("alpha", 1e-3) / (1e-3 / 2) == pytest.approx(1, rel=0.01)
    assert scale_factor("alpha", 1 - 1e-3) / 1e-3 == pytest.approx(1, rel=0.01)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.1, 5.0))
def test_scaling_covariance(s, lam):
    g = make_grid(-1, 1, 24)
    g2 = ProfileGrid(-lam, lam, 24)
    K1, K2 = kernel_matrix(g, s), kernel_matrix(g2, s)
    np.testing.assert_allclose(K2.K, lam ** (1 - 2 * s) * K1.K, rtol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.95), st.integers(0, 2**31 - 1))
def test_gradient_and_hessian_consistent(s, seed):
    rng = np.random.default_rng(seed)
    g = make_grid(0, 1, 20)
    tails = constant_tails(0.0, 0.0)
    K = kernel_matrix(g, s, True)
    x = rng.standard_normal(20)
    e, grad = seminorm_and_gradient(x, tails, K)
    H = seminorm_hessian(K)
    # quadratic form with zero tails: E = x.H.x/2 and grad = H.x
    np.testing.assert_allclose(grad, H @ x, rtol=1e-10, atol=1e-10)
    assert e == pytest.approx(0.5 * x @ H @ x, rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.95), st.integers(0, 2**31 - 1), st.floats(-3, 3))
def test_seminorm_nonnegative_and_shift_invariant(s, seed, c):
    rng = np.random.default_rng(seed)
    g = make_grid(0, 1, 16)
    K = kernel_matrix(g, s)
    x = rng.standard_normal(16)
    a = seminorm(GridFunction(g, x), K)
    b = seminorm(GridFunction(g, x + c), K)
    assert a >= 0
    assert b == pytest.approx(a, rel=1e-9, abs=1e-12)
