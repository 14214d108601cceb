import itertools
import math
from fractions import Fraction

import pytest

from chowlalab import (AT_MOST, CorrelationSpec, EnsembleSpec, IntervalSpec,
                       QuadratureGrid, bound_reference, chowla_sum,
                       correlation_sum, enumerate_tuples, frequency_bound,
                       integral_quadrature, power_sum_product, vandermonde_det,
                       verify_identity)
from chowlalab.errors import BudgetError, EvaluationOverflowError


def cofactor_det(matrix):
    """Independent determinant oracle: recursive cofactor expansion over
    exact Fractions."""
    n = len(matrix)
    if n == 1:
        return matrix[0][0]
    total = Fraction(0)
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in matrix[1:]]
        total += (-1) ** j * matrix[0][j] * cofactor_det(minor)
    return total


def test_spec_validation():
    CorrelationSpec(d=1, m=(2, 2), H=1)  # repeats are fine
    with pytest.raises(ValueError):
        CorrelationSpec(d=-1, m=(1,), H=1)
    with pytest.raises(ValueError):
        CorrelationSpec(d=1, m=(1, 2, 3), H=1)  # L > d+1
    with pytest.raises(ValueError):
        CorrelationSpec(d=2, m=(0, 1), H=1)
    with pytest.raises(ValueError):
        CorrelationSpec(d=1, m=(1,), H=0)


@pytest.mark.parametrize("d,m,H,expected", [
    (1, (2,), 1, (7,)),
    (2, (3,), 2, (80,)),
    (0, (1,), 1, (2,)),
])
def test_frequency_bound_formula(d, m, H, expected):
    assert frequency_bound(CorrelationSpec(d=d, m=m, H=H)) == expected


def test_frequency_bound_overflow():
    with pytest.raises(EvaluationOverflowError):
        frequency_bound(CorrelationSpec(d=8, m=(2**8,), H=2**10))


def test_quadrature_grid_sizing():
    spec = CorrelationSpec(d=1, m=(2,), H=1)
    grid = QuadratureGrid.for_spec(spec)
    assert grid.sizes == (16,)  # 2*7+2
    assert grid.node_count == 16
    pts = grid.axis_points(0)
    assert pts[-1] == pytest.approx(math.pi)
    assert len(pts) == 16
    # minimal Nyquist condition N >= 2F+1 holds with slack
    assert all(n >= 2 * f + 1 for n, f in
               zip(grid.sizes, frequency_bound(spec)))


def test_correlation_sum_examples(sieve_1m):
    assert correlation_sum(CorrelationSpec(d=1, m=(2,), H=1), sieve_1m) == 0
    # d=0, H=2, m=(1): sum over constants c of lambda(c), |c| <= 2
    assert correlation_sum(CorrelationSpec(d=0, m=(1,), H=2), sieve_1m) == 0
    assert correlation_sum(CorrelationSpec(d=0, m=(1,), H=1), sieve_1m) == 2


def test_correlation_sum_is_chowla_over_singleton_interval(sieve_1m):
    # the left side is a sum over the at_most ensemble of products of
    # lambda(f(m_i)); cross-check against direct enumeration
    spec = CorrelationSpec(d=2, m=(2, 3), H=1)
    ens = EnsembleSpec((2,), 1, AT_MOST)
    brute = 0
    for (f,) in enumerate_tuples(ens):
        term = 1
        for mi in spec.m:
            from chowlalab import liouville, evaluate
            term *= liouville(evaluate(f, mi), sieve_1m)
        brute += term
    assert correlation_sum(spec, sieve_1m) == brute


def test_correlation_sum_bounded(sieve_1m):
    for d, m, H in [(1, (1,), 2), (2, (2, 3), 1), (1, (3, 3), 2)]:
        spec = CorrelationSpec(d=d, m=m, H=H)
        assert abs(correlation_sum(spec, sieve_1m)) <= (2 * H + 1) ** (d + 1)


def test_identity_examples(sieve_1m):
    rep = verify_identity(CorrelationSpec(d=1, m=(2,), H=1), sieve_1m)
    assert rep.passed and rep.lhs == 0
    # repeated points still satisfy the identity
    rep = verify_identity(CorrelationSpec(d=1, m=(2, 2), H=1), sieve_1m)
    assert rep.passed
    rep = verify_identity(CorrelationSpec(d=2, m=(2, 3), H=2), sieve_1m)
    assert rep.passed and rep.abs_err <= 1e-6


def test_identity_tolerance_semantics(sieve_1m):
    rep = verify_identity(CorrelationSpec(d=1, m=(1, 2), H=2), sieve_1m, tol=0.0)
    # float quadrature never lands exactly on the integer
    assert rep.abs_err > 0 and not rep.passed


def test_quadrature_exactness_grid_doubling(sieve_1m):
    spec = CorrelationSpec(d=1, m=(1, 2), H=2)
    base = QuadratureGrid.for_spec(spec)
    doubled = QuadratureGrid(tuple(2 * n for n in base.sizes))
    a = integral_quadrature(spec, sieve_1m, grid=base)
    b = integral_quadrature(spec, sieve_1m, grid=doubled)
    assert abs(a - b) <= 1e-9 * (2 * spec.H + 1) ** (spec.d + 1)


def test_quadrature_budget_refusal(sieve_1m):
    spec = CorrelationSpec(d=2, m=(3, 3), H=2)
    nodes = QuadratureGrid.for_spec(spec).node_count
    with pytest.raises(BudgetError, match=str(nodes)):
        integral_quadrature(spec, sieve_1m, node_budget=nodes - 1)
    # force pushes through
    val = integral_quadrature(spec, sieve_1m, node_budget=nodes - 1, force=True)
    assert isinstance(val, float)


def test_correlation_budget_refusal(sieve_1m):
    with pytest.raises(BudgetError):
        correlation_sum(CorrelationSpec(d=2, m=(1,), H=2), sieve_1m,
                        tuple_budget=10)


def test_vandermonde_examples_and_oracle():
    assert vandermonde_det((1, 2, 3)) == 2
    assert vandermonde_det((1, 2)) == 1
    assert vandermonde_det((2, 5, 7, 11)) == 6480
    assert vandermonde_det((5,)) == 1
    for m in itertools.combinations(range(1, 11), 3):
        matrix = [[Fraction(mi**j) for j in range(len(m))] for mi in m]
        assert vandermonde_det(m) == cofactor_det(matrix)
    for m in [(1, 3, 6, 10), (2, 4, 8, 9)]:
        matrix = [[Fraction(mi**j) for j in range(4)] for mi in m]
        assert vandermonde_det(m) == cofactor_det(matrix)


def test_vandermonde_rejects_repeats():
    with pytest.raises(ValueError):
        vandermonde_det((2, 3, 2))


def test_power_sum_product():
    assert power_sum_product((1, 2, 3)) == 3 * 6 * 14  # j = 0, 1, 2
    assert power_sum_product((7,)) == 1  # only the j=0 factor, which is L=1
    for m in [(2, 5), (1, 4, 9), (3, 3)]:
        expected = math.prod(sum(v**j for v in m) for j in range(len(m)))
        assert power_sum_product(m) == expected


def test_bound_reference_values():
    # L=1 reduces to m^d * H^(d+1)
    assert bound_reference(CorrelationSpec(d=2, m=(3,), H=2)) == 9 * 8
    assert bound_reference(CorrelationSpec(d=2, m=(1, 2), H=2)) == 32.0
    with pytest.raises(ValueError):
        bound_reference(CorrelationSpec(d=2, m=(2, 2), H=2))


def test_bound_reference_scale_sanity(sieve_1m):
    # |integral| / bound stays modest on small distinct-point specs
    for d, m, H in [(1, (1, 2), 2), (2, (1, 2), 2), (2, (2, 3), 1)]:
        spec = CorrelationSpec(d=d, m=m, H=H)
        ratio = abs(integral_quadrature(spec, sieve_1m)) / bound_reference(spec)
        assert ratio < 50
