import cmath
import math

import numpy as np
import pytest

from chowlalab import (KernelEvaluation, dirichlet_kernel, exp_sum_on_grid,
                       kernel_l1, kernel_values, lambda_exp_sum,
                       lebesgue_reference, liouville, sup_estimate)


def direct_kernel(order, alpha):
    return 1.0 + 2.0 * sum(math.cos(h * alpha) for h in range(1, order + 1))


def test_kernel_at_zero_and_near_singularities():
    assert dirichlet_kernel(2, 0.0) == 5.0
    assert dirichlet_kernel(7, 2 * math.pi) == pytest.approx(15.0, abs=1e-9)
    # removable singularity handled just off the axis too
    assert dirichlet_kernel(4, 1e-12) == pytest.approx(9.0, abs=1e-9)


def test_kernel_root_of_unity_value():
    # D_3(2*pi/7) sums all seven 7th roots of unity, hence exactly 0.
    assert dirichlet_kernel(3, 2 * math.pi / 7) == pytest.approx(0.0, abs=1e-12)


def test_kernel_matches_direct_sum():
    rng = np.random.default_rng(41)
    for _ in range(1000):
        order = int(rng.integers(1, 1001))
        alpha = float(rng.uniform(-math.pi, math.pi))
        closed = dirichlet_kernel(order, alpha)
        assert abs(closed - direct_kernel(order, alpha)) <= 1e-9 * (2 * order + 1)


def test_kernel_even_and_periodic():
    rng = np.random.default_rng(2)
    for _ in range(200):
        order = int(rng.integers(1, 64))
        alpha = float(rng.uniform(-math.pi, math.pi))
        assert dirichlet_kernel(order, -alpha) == pytest.approx(
            dirichlet_kernel(order, alpha), abs=1e-9 * (2 * order + 1))
        assert dirichlet_kernel(order, alpha + 2 * math.pi) == pytest.approx(
            dirichlet_kernel(order, alpha), abs=1e-9 * (2 * order + 1))


def test_kernel_values_vector_matches_scalar():
    alphas = np.linspace(-math.pi, math.pi, 257)
    vec = kernel_values(6, alphas)
    for a, v in zip(alphas, vec):
        assert v == pytest.approx(dirichlet_kernel(6, float(a)), abs=1e-10)
    with pytest.raises(ValueError):
        kernel_values(0, alphas)


def test_kernel_grid_mean_is_one_past_nyquist():
    # mean of D_H over N > 2H equispaced points picks out the constant term
    for order, n in [(1, 4), (5, 12), (17, 64), (8, 2 * 8 + 2)]:
        pts = -math.pi + 2 * math.pi * np.arange(1, n + 1) / n
        assert kernel_values(order, pts).mean() == pytest.approx(1.0, abs=1e-6)


def test_kernel_evaluation_record():
    ev = KernelEvaluation.compute(3, 0.5)
    assert ev.order == 3 and ev.alpha == 0.5
    assert ev.value == pytest.approx(dirichlet_kernel(3, 0.5))


def test_lambda_exp_sum_known_values(sieve_1m):
    assert lambda_exp_sum(0.7, 0, sieve_1m) == 0
    # X=1: only n = +-1 contribute, each lambda 1: 2cos(alpha)
    assert lambda_exp_sum(0.5, 1, sieve_1m) == pytest.approx(2 * math.cos(0.5))
    # alpha=0: S = 2 * L(X)
    assert lambda_exp_sum(0.0, 100, sieve_1m) == pytest.approx(
        2 * sieve_1m.lambda_partial_sum(100))


def test_lambda_exp_sum_matches_two_sided_oracle(sieve_1m):
    for X, alpha in [(10, 0.7), (100, 2.1), (173, -1.3), (50, 3.1)]:
        got = lambda_exp_sum(alpha, X, sieve_1m)
        naive = sum(liouville(n, sieve_1m) * cmath.exp(1j * n * alpha)
                    for n in range(-X, X + 1))
        assert abs(got - naive) <= 1e-9 * X
        assert abs(naive.imag) <= 1e-9 * X  # even extension kills the imag part
        assert got.imag == 0.0


def test_exp_sum_on_grid_matches_pointwise(sieve_1m):
    alphas = np.linspace(-math.pi, math.pi, 41)
    grid = exp_sum_on_grid(alphas, 120, sieve_1m)
    for a, v in zip(alphas, grid):
        assert v == pytest.approx(lambda_exp_sum(float(a), 120, sieve_1m).real,
                                  abs=1e-9)


def test_sup_estimate_matches_naive_scan(sieve_1m):
    X, grid = 100, 64
    alpha_star, value = sup_estimate(X, grid, sieve_1m)
    lam = [liouville(n, sieve_1m) for n in range(1, X + 1)]
    mags = []
    for k in range(grid):
        a = 2 * math.pi * k / grid
        mags.append(abs(sum(l * cmath.exp(1j * n * a)
                            for n, l in enumerate(lam, start=1))))
    best = max(range(grid), key=lambda k: (mags[k], -k))
    assert value == pytest.approx(mags[best], abs=1e-9)
    assert alpha_star == pytest.approx(2 * math.pi * best / grid, abs=1e-12)


def test_sup_estimate_dominates_summatory(sieve_1m):
    # alpha = 0 is on every grid, so the sup is at least |L(X)|
    for X in (50, 500, 5000):
        _, value = sup_estimate(X, 8 * X, sieve_1m)
        assert value >= abs(sieve_1m.lambda_partial_sum(X)) - 1e-9


def test_kernel_l1_growth_and_reference():
    values = [kernel_l1(order, 4096) for order in (1, 2, 4, 8, 16, 32)]
    assert all(b > a for a, b in zip(values, values[1:]))
    # H=1 has closed form (1/2pi) integral |1+2cos a| = 1/3 + 2*sqrt(3)/pi
    assert values[0] == pytest.approx(1 / 3 + 2 * math.sqrt(3) / math.pi,
                                      abs=1e-4)
    # the Lebesgue-constant rate is the right scale at moderate order
    for order, got in zip((8, 16, 32), values[3:]):
        assert 0.5 * lebesgue_reference(order) < got < 2 * lebesgue_reference(order)


def test_kernel_l1_needs_resolving_grid():
    with pytest.raises(ValueError):
        kernel_l1(10, 4 * (2 * 10 + 1) - 1)


def test_argument_validation(sieve_1m):
    with pytest.raises(ValueError):
        dirichlet_kernel(0, 0.3)
    with pytest.raises(ValueError):
        lambda_exp_sum(0.1, -1, sieve_1m)
    with pytest.raises(ValueError):
        sup_estimate(0, 8, sieve_1m)
    with pytest.raises(ValueError):
        sup_estimate(10, 0, sieve_1m)
