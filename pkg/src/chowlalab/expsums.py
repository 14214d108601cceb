"""Dirichlet kernels and Liouville-twisted exponential sums.

D_H(a) = sum_{|h| <= H} e^{iha} = sin((2H+1)a/2) / sin(a/2)

S(a, X) = sum_{|n| <= X} lambda(n) e^{ina} = 2 sum_{n=1}^{X} lambda(n) cos(na)

The second identity holds because lambda(-n) = lambda(n) and lambda(0) = 0,
so S is real-valued and even in a.  Near the removable singularities of D_H
(where sin(a/2) vanishes) the closed form is replaced by the direct cosine
sum, which costs O(H) but is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sieve import FactorSieve, liouville_bulk

#: |sin(a/2)| at or below this switches the kernel to direct summation.
SIN_HALF_THRESHOLD = 1e-8


@dataclass(frozen=True)
class KernelEvaluation:
    """One kernel evaluation with the inputs that produced it."""

    order: int
    alpha: float
    value: float

    @classmethod
    def compute(cls, order: int, alpha: float) -> "KernelEvaluation":
        return cls(order, float(alpha), dirichlet_kernel(order, alpha))


def dirichlet_kernel(order: int, alpha: float) -> float:
    """D_H(alpha) for H = order >= 1.

    Closed sine-ratio form away from the singular set, direct cosine sum
    1 + 2 sum_{h<=H} cos(h*alpha) when |sin(alpha/2)| <= 1e-8.
    """
    if order < 1:
        raise ValueError("kernel order must be a positive integer")
    s = math.sin(alpha / 2.0)
    if abs(s) <= SIN_HALF_THRESHOLD:
        h = np.arange(1, order + 1)
        return float(1.0 + 2.0 * np.cos(h * alpha).sum())
    return math.sin((2 * order + 1) * alpha / 2.0) / s


def kernel_values(order: int, alphas: np.ndarray) -> np.ndarray:
    """Vectorized D_H over an array of angles, same singularity handling."""
    if order < 1:
        raise ValueError("kernel order must be a positive integer")
    a = np.asarray(alphas, dtype=np.float64)
    s = np.sin(a / 2.0)
    near = np.abs(s) <= SIN_HALF_THRESHOLD
    safe = np.where(near, 1.0, s)
    out = np.sin((2 * order + 1) * a / 2.0) / safe
    if near.any():
        h = np.arange(1, order + 1, dtype=np.float64)
        sub = a[near]
        out[near] = 1.0 + 2.0 * np.cos(np.outer(sub, h)).sum(axis=1)
    return out


def lambda_exp_sum(alpha: float, X: int, sieve: FactorSieve) -> complex:
    """S(alpha, X) = sum_{|n| <= X} lambda(n) e^{in*alpha}.

    Computed as 2 sum_{n=1}^{X} lambda(n) cos(n*alpha); the symmetric terms
    pair up because lambda is even and lambda(0) = 0, so the imaginary part
    is identically zero.  Returned as complex for interface uniformity.
    """
    if X < 0:
        raise ValueError("X must be a non-negative integer")
    if X == 0:
        return complex(0.0)
    lam = _lambda_table(X, sieve)
    n = np.arange(1, X + 1, dtype=np.float64)
    return complex(2.0 * float(np.dot(lam, np.cos(n * alpha))))


def exp_sum_on_grid(alphas: np.ndarray, X: int, sieve: FactorSieve) -> np.ndarray:
    """S(alpha, X) for every grid angle at once (real-valued, see above).

    Chunked matrix product lambda . cos(outer(n, alphas)); memory stays
    below ~32 MB regardless of X and grid size.
    """
    a = np.asarray(alphas, dtype=np.float64)
    if X == 0:
        return np.zeros_like(a)
    lam = _lambda_table(X, sieve)
    n = np.arange(1, X + 1, dtype=np.float64)
    out = np.empty(a.size, dtype=np.float64)
    step = max(1, (1 << 22) // max(X, 1))
    for lo in range(0, a.size, step):
        hi = min(lo + step, a.size)
        out[lo:hi] = 2.0 * (np.cos(np.outer(a[lo:hi], n)) @ lam)
    return out.reshape(a.shape)


def sup_estimate(X: int, grid_points: int, sieve: FactorSieve) -> tuple[float, float]:
    """Max of |sum_{n=1}^{X} lambda(n) e^{in*alpha}| over the uniform grid
    alpha = 2*pi*k/grid_points, k = 0..grid_points-1.

    Returns (alpha_star, value); ties break to the smallest k.  The one-sided
    sum at every grid point is one FFT of the lambda sequence folded into
    grid_points residue bins, so dense grids are cheap.
    """
    if X < 1:
        raise ValueError("X must be a positive integer")
    if grid_points < 1:
        raise ValueError("grid_points must be a positive integer")
    lam = _lambda_table(X, sieve)
    bins = np.bincount(np.arange(1, X + 1) % grid_points,
                       weights=lam, minlength=grid_points)
    # FFT convention: fft(b)[k] = sum_r b_r e^{-2*pi*i*r*k/G}; conjugate
    # turns the sign to match e^{+in*alpha}.
    spectrum = np.conj(np.fft.fft(bins))
    mags = np.abs(spectrum)
    k_star = int(np.argmax(mags))
    return 2.0 * math.pi * k_star / grid_points, float(mags[k_star])


def kernel_l1(order: int, grid_points: int) -> float:
    """Riemann estimate of (1/2pi) * integral of |D_H| over (-pi, pi].

    Grows like (4/pi^2) log H, the Lebesgue-constant rate; the grid must
    resolve the kernel's oscillation, hence the 4*(2H+1) floor.
    """
    if grid_points < 4 * (2 * order + 1):
        raise ValueError(
            f"grid_points must be at least {4 * (2 * order + 1)} for order {order}")
    k = np.arange(grid_points, dtype=np.float64)
    a = -math.pi + 2.0 * math.pi * (k + 1.0) / grid_points
    return float(np.abs(kernel_values(order, a)).mean())


def lebesgue_reference(order: int) -> float:
    """Classical comparison curve (4/pi^2) log H + 1 for kernel_l1."""
    if order < 1:
        raise ValueError("kernel order must be a positive integer")
    return 4.0 / math.pi**2 * math.log(order) + 1.0


def _lambda_table(X: int, sieve: FactorSieve) -> np.ndarray:
    lam = liouville_bulk(np.arange(1, X + 1, dtype=np.int64), sieve,
                         allow_fallback=True)
    return lam.astype(np.float64)
