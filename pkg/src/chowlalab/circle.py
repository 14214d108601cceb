"""Exact identity between ensemble correlation sums and kernel integrals.

For degree bound d, height H, and positive integer points m_1..m_L,

  sum_{deg f <= d, ||f|| <= H}  prod_i lambda(f(m_i))
      = (2pi)^{-L} integral over (-pi, pi]^L of
        prod_i conj(S(alpha_i, (d+1) m_i^d H)) *
        prod_{j=0..d} D_H(sum_i m_i^j alpha_i)  d(alpha)

with S the two-sided Liouville exponential sum and D_H the Dirichlet
kernel.  Both sides are computed independently here: the left by exact
integer enumeration, the right by product-grid quadrature sized past the
integrand's Nyquist rate, where the grid average equals the integral
EXACTLY (up to float rounding) because the integrand is a trigonometric
polynomial of bounded per-axis frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensembles import AT_MOST, coefficient_block
from .errors import BudgetError, EvaluationOverflowError
from .expsums import exp_sum_on_grid, kernel_values
from .sieve import FactorSieve, liouville_bulk

DEFAULT_NODE_BUDGET = 10**8
DEFAULT_TUPLE_BUDGET = 10**8

_ROW_BLOCK = 1 << 13


@dataclass(frozen=True)
class CorrelationSpec:
    """Degree bound d, evaluation points m (length L <= d+1), height H.

    Repeated points are legal: the identity does not need distinctness,
    only the Vandermonde-based bound does.
    """

    d: int
    m: tuple[int, ...]
    H: int

    def __post_init__(self):
        object.__setattr__(self, "m", tuple(int(v) for v in self.m))
        if self.d < 0:
            raise ValueError("degree bound must be non-negative")
        if not 1 <= len(self.m) <= self.d + 1:
            raise ValueError(f"order L={len(self.m)} outside 1..d+1={self.d + 1}")
        if any(v < 1 for v in self.m):
            raise ValueError("evaluation points must be positive integers")
        if self.H < 1:
            raise ValueError("height must be a positive integer")

    @property
    def L(self) -> int:
        return len(self.m)

    def describe(self) -> str:
        return f"d={self.d} m={','.join(map(str, self.m))} H={self.H}"


@dataclass(frozen=True)
class QuadratureGrid:
    """Per-axis sizes of an equispaced grid on (-pi, pi]^L.

    Sized past each axis frequency bound, the grid average of the identity
    integrand equals its integral exactly.
    """

    sizes: tuple[int, ...]

    @classmethod
    def for_spec(cls, spec: CorrelationSpec) -> "QuadratureGrid":
        # 2F+2 rather than the minimal 2F+1: even sizes, one row of slack.
        return cls(tuple(2 * f + 2 for f in frequency_bound(spec)))

    @property
    def node_count(self) -> int:
        return math.prod(self.sizes)

    def axis_points(self, i: int) -> np.ndarray:
        n = self.sizes[i]
        k = np.arange(1, n + 1, dtype=np.float64)
        return -math.pi + 2.0 * math.pi * k / n


def frequency_bound(spec: CorrelationSpec) -> tuple[int, ...]:
    """Certified per-axis frequency content of the identity integrand.

    Axis i carries (d+1) m_i^d H from its exponential-sum factor plus
    H * sum_{j<=d} m_i^j from the d+1 kernels.
    """
    out = []
    for mi in spec.m:
        f = (spec.d + 1) * mi**spec.d * spec.H + spec.H * sum(
            mi**j for j in range(spec.d + 1))
        if f > 2**62:
            raise EvaluationOverflowError(f"frequency bound {f} exceeds 2**62")
        out.append(f)
    return tuple(out)


def correlation_sum(spec: CorrelationSpec, sieve: FactorSieve,
                    tuple_budget: int = DEFAULT_TUPLE_BUDGET) -> int:
    """Left side: exact integer sum of prod_i lambda(f(m_i)) over all
    integer f with deg f <= d and coefficient height <= H."""
    count = (2 * spec.H + 1) ** (spec.d + 1)
    if count > tuple_budget:
        raise BudgetError(f"{count} polynomials exceed tuple budget {tuple_budget}")
    powers = np.array([[mi**j for mi in spec.m] for j in range(spec.d + 1)],
                      dtype=np.int64)
    peak = max((spec.d + 1) * spec.H * mi**spec.d for mi in spec.m)
    if peak > 2**62:
        raise EvaluationOverflowError(f"|f(m_i)| can reach {peak} > 2**62")
    total = 0
    for lo in range(0, count, _ROW_BLOCK):
        hi = min(lo + _ROW_BLOCK, count)
        coeffs = coefficient_block(spec.d, spec.H, AT_MOST, lo, hi)
        lam = liouville_bulk(coeffs @ powers, sieve, allow_fallback=True)
        total += int(np.multiply.reduce(lam, axis=1).sum(dtype=np.int64))
    return total


def integral_quadrature(spec: CorrelationSpec, sieve: FactorSieve,
                        grid: QuadratureGrid | None = None,
                        node_budget: int = DEFAULT_NODE_BUDGET,
                        force: bool = False) -> float:
    """Right side: product-grid average of the identity integrand.

    The integrand is real (S is real by the even extension of lambda, the
    kernel is real), so the result carries no imaginary part to report.
    Per-axis S values are computed once; kernels are evaluated per node.
    Outer-axis slices are accumulated in fixed index order, making the
    value independent of any sharding of the outer loop.
    """
    if grid is None:
        grid = QuadratureGrid.for_spec(spec)
    if len(grid.sizes) != spec.L:
        raise ValueError("grid dimension does not match spec order")
    nodes = grid.node_count
    if nodes > node_budget and not force:
        raise BudgetError(
            f"grid has {nodes} nodes, over budget {node_budget}; force to override")
    axes = [grid.axis_points(i) for i in range(spec.L)]
    s_limits = [(spec.d + 1) * mi**spec.d * spec.H for mi in spec.m]
    s_vals = [exp_sum_on_grid(axes[i], s_limits[i], sieve) for i in range(spec.L)]

    if spec.L == 1:
        block = s_vals[0].copy()
        for j in range(spec.d + 1):
            block *= kernel_values(spec.H, float(spec.m[0] ** j) * axes[0])
        slices = block
    else:
        # Precompute everything that does not involve axis 0: the product of
        # inner S factors and, per kernel j, the inner part of its argument.
        inner_shape = grid.sizes[1:]
        inner_s = np.ones(inner_shape, dtype=np.float64)
        for i in range(1, spec.L):
            shape = [1] * (spec.L - 1)
            shape[i - 1] = grid.sizes[i]
            inner_s = inner_s * s_vals[i].reshape(shape)
        inner_args = []
        for j in range(spec.d + 1):
            arg = np.zeros(inner_shape, dtype=np.float64)
            for i in range(1, spec.L):
                shape = [1] * (spec.L - 1)
                shape[i - 1] = grid.sizes[i]
                arg = arg + float(spec.m[i] ** j) * axes[i].reshape(shape)
            inner_args.append(arg)
        slices = np.empty(grid.sizes[0], dtype=np.float64)
        for k in range(grid.sizes[0]):
            acc = inner_s.copy()
            for j in range(spec.d + 1):
                acc *= kernel_values(spec.H,
                                     float(spec.m[0] ** j) * axes[0][k] + inner_args[j])
            slices[k] = s_vals[0][k] * acc.sum()
    return float(np.sum(slices) / nodes)


@dataclass
class IdentityReport:
    spec: CorrelationSpec
    lhs: int
    rhs: float
    abs_err: float
    tol: float
    passed: bool
    nodes: int

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.describe(),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "abs_err": self.abs_err,
            "tol": self.tol,
            "pass": self.passed,
            "nodes": self.nodes,
        }


def verify_identity(spec: CorrelationSpec, sieve: FactorSieve, tol: float = 1e-6,
                    node_budget: int = DEFAULT_NODE_BUDGET,
                    tuple_budget: int = DEFAULT_TUPLE_BUDGET,
                    force: bool = False) -> IdentityReport:
    """Compute both sides independently and compare to tolerance.

    The identity is exact, so with the Nyquist-sized default grid a failure
    means a bug, not noise.
    """
    grid = QuadratureGrid.for_spec(spec)
    lhs = correlation_sum(spec, sieve, tuple_budget=tuple_budget)
    rhs = integral_quadrature(spec, sieve, grid=grid,
                              node_budget=node_budget, force=force)
    err = abs(lhs - rhs)
    return IdentityReport(spec=spec, lhs=lhs, rhs=rhs, abs_err=err, tol=tol,
                          passed=err <= tol, nodes=grid.node_count)


def vandermonde_det(m: tuple[int, ...] | list[int]) -> int:
    """det of the L x L power matrix (m_i^j): product of (m_j - m_i), i<j.

    Exact big-integer arithmetic; repeated entries are a domain error since
    every use here divides by this determinant.
    """
    pts = [int(v) for v in m]
    if len(set(pts)) != len(pts):
        raise ValueError(f"evaluation points must be pairwise distinct, got {pts}")
    det = 1
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            det *= pts[j] - pts[i]
    return det


def power_sum_product(m: tuple[int, ...] | list[int]) -> int:
    """prod_{j=0}^{L-1} M_j with M_j = sum_i m_i^j (exact)."""
    pts = [int(v) for v in m]
    if not pts:
        raise ValueError("need at least one point")
    return math.prod(sum(v**j for v in pts) for j in range(len(pts)))


def bound_reference(spec: CorrelationSpec) -> float:
    """Reference majorant shape for |integral|:

        (prod m_i)^{(L-1)(L-2)/2 + d} * H^{d+1} / prod_{i<j} |m_i - m_j|

    Log factors and the implied constant are omitted, so this is only a
    diagnostic scale, never a pass/fail criterion.
    """
    denom = abs(vandermonde_det(spec.m))
    expo = (spec.L - 1) * (spec.L - 2) // 2 + spec.d
    num = math.prod(spec.m) ** expo * spec.H ** (spec.d + 1)
    return num / denom
