"""Integer polynomial tuples drawn from height-bounded boxes.

A slot of degree d and height H ranges over polynomials
f(t) = c0 + c1*t + ... + cd*t^d with every |cj| <= H.  In ``exact`` mode the
leading coefficient skips 0 (so deg f == d); in ``at_most`` mode it may be 0.
Tuples of several slots are enumerated lexicographically by coefficient
vector, first slot slowest, constant coefficient most significant within a
slot, and individual coordinates ascending.  Every enumeration and sampling
helper addresses tuples by a single flat index, so shards of the index space
can be produced independently and in parallel without changing the order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EvaluationOverflowError

EXACT = "exact"
AT_MOST = "at_most"

_INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial stored constant-first: coeffs[j] multiplies t**j."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("a polynomial needs at least one coefficient")
        if not all(isinstance(c, int) for c in self.coeffs):
            raise ValueError("coefficients must be ints")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def height(self) -> int:
        return max(abs(c) for c in self.coeffs)

    def __call__(self, n: int) -> int:
        return evaluate(self, n)

    def __str__(self) -> str:
        terms = [f"{c}*t^{j}" if j else str(c) for j, c in enumerate(self.coeffs)]
        return " + ".join(terms)


@dataclass(frozen=True)
class EnsembleSpec:
    """A tuple of polynomial slots sharing one height bound.

    degrees[i] is the degree of slot i, height the common coefficient bound,
    degree_mode either ``exact`` or ``at_most``.  ``sample_count`` switches
    from full enumeration to Monte Carlo with the given draw count; ``seed``
    feeds the per-index generators so samples are reproducible and
    independent of how the index range is sharded.
    """

    degrees: tuple[int, ...]
    height: int
    degree_mode: str = EXACT
    sample_count: int | None = None
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.degrees, int):
            object.__setattr__(self, "degrees", (self.degrees,))
        else:
            object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        if not self.degrees:
            raise ValueError("need at least one slot")
        if any(d < 0 for d in self.degrees):
            raise ValueError("degrees must be non-negative")
        if self.height < 1:
            raise ValueError("height must be a positive integer")
        if self.degree_mode not in (EXACT, AT_MOST):
            raise ValueError(f"unknown degree_mode {self.degree_mode!r}")
        if self.sample_count is not None and self.sample_count < 1:
            raise ValueError("sample_count must be positive when given")

    @property
    def slots(self) -> int:
        return len(self.degrees)

    @property
    def total_dimension(self) -> int:
        """Number of free coefficients across all slots."""
        return sum(d + 1 for d in self.degrees)

    def slot_size(self, i: int) -> int:
        return _slot_size(self.degrees[i], self.height, self.degree_mode)

    def describe(self) -> str:
        mode = "mc" if self.sample_count else "full"
        return (f"degrees={','.join(map(str, self.degrees))}"
                f" height={self.height} {self.degree_mode} {mode}")


def ensemble_size(spec: EnsembleSpec) -> int:
    """Number of distinct tuples: prod over slots of 2H(2H+1)^d in exact
    mode, (2H+1)^(d+1) in at_most mode."""
    return math.prod(spec.slot_size(i) for i in range(spec.slots))


def evaluate(f: IntPolynomial, n: int) -> int:
    """Horner evaluation in exact integer arithmetic.

    Raises EvaluationOverflowError if the value leaves the signed 64-bit
    range; vectorized callers rely on that certainty to use int64 freely.
    """
    acc = 0
    for c in reversed(f.coeffs):
        acc = acc * n + c
    if not -_INT64_MAX <= acc <= _INT64_MAX:
        raise EvaluationOverflowError(
            f"|f({n})| = {abs(acc)} exceeds the signed 64-bit budget")
    return acc


def enumerate_tuples(spec: EnsembleSpec, start: int = 0, stop: int | None = None):
    """Yield (IntPolynomial, ...) tuples for flat indices start..stop-1.

    The order is exactly itertools.product over slots of per-slot
    lexicographic coefficient streams; unranking keeps arbitrary shards
    consistent with that order.
    """
    total = ensemble_size(spec)
    if stop is None:
        stop = total
    if not 0 <= start <= stop <= total:
        raise ValueError(f"invalid index range [{start}, {stop}) of {total}")
    sizes = [spec.slot_size(i) for i in range(spec.slots)]
    for index in range(start, stop):
        yield _unrank(spec, sizes, index)


def sample_tuples(spec: EnsembleSpec, start: int = 0, stop: int | None = None):
    """Yield Monte Carlo draws for sample indices start..stop-1.

    Draw j uses its own PCG64 stream seeded by (spec.seed, j), so any
    sharding of 0..sample_count-1 reproduces the identical multiset.
    """
    if spec.sample_count is None:
        raise ValueError("spec has no sample_count; use enumerate_tuples")
    if stop is None:
        stop = spec.sample_count
    if not 0 <= start <= stop <= spec.sample_count:
        raise ValueError(f"invalid sample range [{start}, {stop})")
    for index in range(start, stop):
        rng = _index_rng(spec.seed, index)
        yield tuple(
            IntPolynomial(_draw_coeffs(rng, d, spec.height, spec.degree_mode))
            for d in spec.degrees)


def sample_coefficient_blocks(spec: EnsembleSpec, start: int,
                              stop: int) -> list[np.ndarray]:
    """Per-slot int64 coefficient matrices for sample indices start..stop-1.

    Row r of block i holds the coefficients of slot i in draw start+r,
    matching sample_tuples exactly (same per-index generators, same draw
    order), so vectorized consumers and the generator agree bit for bit.
    """
    if spec.sample_count is None:
        raise ValueError("spec has no sample_count")
    if not 0 <= start <= stop <= spec.sample_count:
        raise ValueError(f"invalid sample range [{start}, {stop})")
    blocks = [np.empty((stop - start, d + 1), dtype=np.int64) for d in spec.degrees]
    for r, index in enumerate(range(start, stop)):
        rng = _index_rng(spec.seed, index)
        for i, d in enumerate(spec.degrees):
            blocks[i][r] = _draw_coeffs(rng, d, spec.height, spec.degree_mode)
    return blocks


def shard_ranges(total: int, shards: int) -> list[tuple[int, int]]:
    """Split 0..total-1 into ``shards`` contiguous near-equal ranges."""
    if shards < 1:
        raise ValueError("need at least one shard")
    bounds = [(i * total) // shards for i in range(shards + 1)]
    return [(bounds[i], bounds[i + 1]) for i in range(shards)]


def coefficient_block(degree: int, height: int, mode: str,
                      start: int, stop: int) -> np.ndarray:
    """Rows start..stop-1 of one slot's lexicographic coefficient matrix.

    Vectorized mixed-radix unranking; returns an int64 array of shape
    (stop-start, degree+1) whose column j holds coefficient c_j.
    """
    size = _slot_size(degree, height, mode)
    if not 0 <= start <= stop <= size:
        raise ValueError(f"invalid row range [{start}, {stop}) of {size}")
    idx = np.arange(start, stop, dtype=np.int64)
    cols: list[np.ndarray] = [np.empty(0)] * (degree + 1)
    # c0 is the most significant digit, so peel digits off from c_d upward.
    for j in range(degree, -1, -1):
        if j == degree and mode == EXACT:
            idx, digit = np.divmod(idx, 2 * height)
            cols[j] = np.where(digit < height, digit - height, digit - height + 1)
        else:
            idx, digit = np.divmod(idx, 2 * height + 1)
            cols[j] = digit - height
    return np.stack(cols, axis=1)


def _slot_size(degree: int, height: int, mode: str) -> int:
    if mode == EXACT:
        return 2 * height * (2 * height + 1) ** degree
    return (2 * height + 1) ** (degree + 1)


def _slot_values(degree: int, height: int, mode: str) -> list[range | list[int]]:
    """Per-coordinate value streams, constant coefficient first."""
    full = range(-height, height + 1)
    lead = [v for v in full if v != 0] if mode == EXACT else full
    vals: list[range | list[int]] = [full] * degree
    vals.append(lead)
    return vals


def _unrank(spec: EnsembleSpec, sizes: list[int], index: int):
    polys = []
    for i in range(spec.slots - 1, -1, -1):
        index, slot_index = divmod(index, sizes[i])
        polys.append(_unrank_slot(spec.degrees[i], spec.height,
                                  spec.degree_mode, slot_index))
    polys.reverse()
    return tuple(polys)


def _unrank_slot(degree: int, height: int, mode: str, slot_index: int) -> IntPolynomial:
    values = _slot_values(degree, height, mode)
    coeffs = [0] * (degree + 1)
    for j in range(degree, -1, -1):
        slot_index, digit = divmod(slot_index, len(values[j]))
        coeffs[j] = values[j][digit]
    return IntPolynomial(tuple(coeffs))


def _index_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(index,))))


def _draw_coeffs(rng: np.random.Generator, degree: int, height: int,
                 mode: str) -> tuple[int, ...]:
    coeffs = [int(c) for c in rng.integers(-height, height + 1, size=degree + 1)]
    if mode == EXACT:
        while coeffs[degree] == 0:
            coeffs[degree] = int(rng.integers(-height, height + 1))
    return tuple(coeffs)
