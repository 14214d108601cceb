"""Chowla sums over polynomial ensembles and their moment statistics.

The central object is C_f(x) = sum_{x <= n <= 2x} prod_i lambda(f_i(n)),
an exact integer, and its normalization S_f(x) = |C_f(x)| / sqrt(x).
Ensemble power sums of C_f^k are accumulated in exact integer arithmetic
through a value histogram (C_f is bounded by the interval length, so the
histogram is tiny), with the x^{k/2} division applied once at report time.
That makes every full-enumeration statistic bit-identical no matter how
the ensemble is sharded across workers.

Reported against the empirical moments are the Gaussian predictions
C_k * 2^D * H^D / count with C_k = (k-1)!! for even k and 0 for odd k,
and for bounded weights b_n the weighted second-moment prediction
(1/x) (sum |b_n|^2) * 2^D * H^D / count.  In the proven regime these hold
for x <= (log H)^delta, far beyond desk scale, so ratios are diagnostics
rather than assertions; the exact finite-population inequalities
(Chebyshev exceedance, Cauchy-Schwarz probe) are certified exactly.
"""

from __future__ import annotations

import math
import multiprocessing
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .ensembles import (EnsembleSpec, IntPolynomial, coefficient_block,
                        ensemble_size, enumerate_tuples, evaluate,
                        sample_coefficient_blocks, sample_tuples, shard_ranges)
from .errors import BudgetError, EvaluationOverflowError, WeightFileError
from .sieve import FactorSieve, liouville, liouville_bulk

DEFAULT_TUPLE_BUDGET = 10**8

WEIGHT_ALL_ONES = "all_ones"
WEIGHT_PRIME = "prime_indicator"
WEIGHT_FILE = "file"

#: Weight magnitudes may exceed 1 by at most this (decimal-string slack).
_MAGNITUDE_SLACK = Fraction(1, 10**12)

_BLOCK_ENTRIES = 1 << 22
_MATRIX_BYTE_CAP = 1 << 28


@dataclass(frozen=True)
class IntervalSpec:
    """The dyadic summation window x <= n <= 2x.

    Integer endpoints are ceil(x) and floor(2x), both included; the real x
    itself is kept for the sqrt(x) normalization.
    """

    x: float

    def __post_init__(self):
        if not math.isfinite(self.x) or self.x < 2:
            raise ValueError("x must be a finite real >= 2")
        if self.lo > self.hi:
            raise ValueError(f"empty interval for x={self.x}")

    @property
    def lo(self) -> int:
        return math.ceil(self.x)

    @property
    def hi(self) -> int:
        return math.floor(2 * self.x)

    @property
    def length(self) -> int:
        return self.hi - self.lo + 1

    def values(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1, dtype=np.int64)

    def describe(self) -> str:
        return f"x={self.x:g} n in [{self.lo},{self.hi}]"


@dataclass(frozen=True)
class WeightSpec:
    """Weight sequence b_n on the interval: all ones, the prime indicator,
    or a file of complex decimals with |b_n| <= 1."""

    kind: str
    path: str | None = None

    def __post_init__(self):
        if self.kind not in (WEIGHT_ALL_ONES, WEIGHT_PRIME, WEIGHT_FILE):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if (self.kind == WEIGHT_FILE) != (self.path is not None):
            raise ValueError("file weights need a path; others must not have one")

    def describe(self) -> str:
        return f"file:{self.path}" if self.kind == WEIGHT_FILE else self.kind


class _ResolvedWeights:
    """Weights materialized on a concrete interval.

    Indicator kinds keep a boolean column mask (the engine then works over
    the surviving columns with exact integers); file weights keep exact
    Fraction pairs per n.
    """

    def __init__(self, kind: str, indicator: np.ndarray | None,
                 re: list[Fraction] | None, im: list[Fraction] | None):
        self.kind = kind
        self.indicator = indicator
        self.re = re
        self.im = im

    @property
    def sum_abs_sq(self) -> Fraction | int:
        if self.indicator is not None:
            return int(self.indicator.sum())
        assert self.re is not None and self.im is not None
        return sum((r * r + i * i for r, i in zip(self.re, self.im)),
                   start=Fraction(0))


def resolve_weights(weights: WeightSpec, interval: IntervalSpec,
                    sieve: FactorSieve) -> _ResolvedWeights:
    T = interval.length
    if weights.kind == WEIGHT_ALL_ONES:
        return _ResolvedWeights(weights.kind, np.ones(T, dtype=bool), None, None)
    if weights.kind == WEIGHT_PRIME:
        if interval.hi <= sieve.limit:
            ns = interval.values()
            mask = sieve.spf[interval.lo:interval.hi + 1].astype(np.int64) == ns
        else:
            mask = np.array([sieve.is_prime(n)
                             for n in range(interval.lo, interval.hi + 1)])
        return _ResolvedWeights(weights.kind, mask, None, None)
    re, im = load_weight_file(weights.path, interval)
    return _ResolvedWeights(weights.kind, None, re, im)


def load_weight_file(path: str, interval: IntervalSpec
                     ) -> tuple[list[Fraction], list[Fraction]]:
    """Parse "n,re,im" records into exact per-n Fractions.

    Unlisted n in the interval default to 0; records outside the interval
    are ignored.  Any |b_n| > 1 + 1e-12 rejects the whole file, naming n.
    """
    re = [Fraction(0)] * interval.length
    im = [Fraction(0)] * interval.length
    seen: set[int] = set()
    cap = (1 + _MAGNITUDE_SLACK) ** 2
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            parts = text.split(",")
            if len(parts) != 3:
                raise WeightFileError(
                    f"{path}:{lineno}: expected 'n,re,im', got {text!r}")
            try:
                n = int(parts[0])
                br = Fraction(parts[1])
                bi = Fraction(parts[2])
            except (ValueError, ZeroDivisionError) as exc:
                raise WeightFileError(f"{path}:{lineno}: {exc}") from exc
            if n in seen:
                raise WeightFileError(f"{path}:{lineno}: duplicate record for n={n}")
            seen.add(n)
            if br * br + bi * bi > cap:
                raise WeightFileError(
                    f"{path}:{lineno}: |b_{n}| > 1 violates the magnitude bound")
            if interval.lo <= n <= interval.hi:
                re[n - interval.lo] = br
                im[n - interval.lo] = bi
    return re, im


def chowla_sum(f_tuple, interval: IntervalSpec, sieve: FactorSieve) -> int:
    """C(x) = sum_{x <= n <= 2x} prod_i lambda(f_i(n)), exact."""
    polys = _as_tuple(f_tuple)
    total = 0
    for n in range(interval.lo, interval.hi + 1):
        term = 1
        for f in polys:
            term *= liouville(evaluate(f, n), sieve)
            if term == 0:
                break
        total += term
    return total


def weighted_chowla_sum(f_tuple, interval: IntervalSpec, weights: WeightSpec,
                        sieve: FactorSieve):
    """sum_n b_n prod_i lambda(f_i(n)).

    Exact integer for indicator weights; for file weights the accumulation
    is exact rational and the result is returned as a complex number.
    """
    polys = _as_tuple(f_tuple)
    resolved = resolve_weights(weights, interval, sieve)
    if resolved.indicator is not None:
        total = 0
        for offset in np.flatnonzero(resolved.indicator):
            n = interval.lo + int(offset)
            term = 1
            for f in polys:
                term *= liouville(evaluate(f, n), sieve)
                if term == 0:
                    break
            total += term
        return total
    acc_re, acc_im = Fraction(0), Fraction(0)
    for idx, n in enumerate(range(interval.lo, interval.hi + 1)):
        br, bi = resolved.re[idx], resolved.im[idx]
        if br == 0 and bi == 0:
            continue
        term = 1
        for f in polys:
            term *= liouville(evaluate(f, n), sieve)
            if term == 0:
                break
        if term:
            acc_re += br * term
            acc_im += bi * term
    return complex(float(acc_re), float(acc_im))


def normalized_statistic(f_tuple, interval: IntervalSpec,
                         sieve: FactorSieve) -> float:
    """S(x) = |C(x)| / sqrt(x), with the real x under the root."""
    return abs(chowla_sum(f_tuple, interval, sieve)) / math.sqrt(interval.x)


def gaussian_moment(k: int) -> int:
    """k-th moment of a standard Gaussian: 0 for odd k, (k-1)!! for even k."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    if k % 2:
        return 0
    return math.prod(range(1, k, 2))


def gaussian_moment_lower_bound_check(m: int) -> bool:
    """Exact big-integer check of (2m-1)!! * 2^m > m^m.

    Equivalent to the 2m-th Gaussian moment exceeding (m/2)^m, the growth
    that makes the moment method beat any fixed exponential scale.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    return math.prod(range(1, 2 * m, 2)) * 2**m > m**m


@dataclass
class MomentRow:
    k: int
    raw_sum: object
    empirical: object
    predicted: float | None
    ratio: float | None
    stderr: float | None
    outside_theorem_range: bool

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "raw_sum": _jsonable(self.raw_sum),
            "empirical": _jsonable(self.empirical),
            "predicted": self.predicted,
            "ratio": self.ratio,
            "stderr": self.stderr,
            "outside_theorem_range": self.outside_theorem_range,
        }


@dataclass
class MomentReport:
    spec: EnsembleSpec
    interval: IntervalSpec
    weights: WeightSpec
    population: int
    count: int
    rows: list[MomentRow]
    elapsed_ms: int

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.describe(),
            "interval": self.interval.describe(),
            "weights": self.weights.describe(),
            "population": self.population,
            "count": self.count,
            "rows": [row.to_dict() for row in self.rows],
            "elapsed_ms": self.elapsed_ms,
        }

    def to_csv_rows(self) -> list[dict]:
        out = []
        for row in self.rows:
            out.append({
                "spec": self.spec.describe(),
                "interval": self.interval.describe(),
                "k": row.k,
                "raw_sum": _csv_cell(row.raw_sum),
                "empirical": _csv_cell(row.empirical),
                "predicted": row.predicted,
                "ratio": row.ratio,
                "stderr": row.stderr,
                "count": self.count,
                "elapsed_ms": self.elapsed_ms,
            })
        return out


def moment_report(spec: EnsembleSpec, interval: IntervalSpec,
                  weights: WeightSpec, k_max: int, sieve: FactorSieve,
                  workers: int = 1,
                  tuple_budget: int = DEFAULT_TUPLE_BUDGET) -> MomentReport:
    """Ensemble power sums of (C/sqrt(x))^k for k = 1..k_max, with the
    Gaussian (or weighted) main-term predictions alongside.

    Full enumeration accumulates exact integers (or exact rationals for
    file weights); Monte Carlo runs draw sample_count tuples with per-index
    seeding and report sample standard errors.  Either way the result is
    independent of the worker count.
    """
    if k_max < 1:
        raise ValueError("k_max must be a positive integer")
    t0 = time.perf_counter()
    resolved = resolve_weights(weights, interval, sieve)
    population = ensemble_size(spec)
    if resolved.indicator is not None:
        nvals = interval.values()[resolved.indicator]
        hist, offset, count = _ensemble_histogram(spec, nvals, sieve,
                                                  workers, tuple_budget)
        power = {k: _power_sum(hist, offset, k) for k in range(1, 2 * k_max + 1)}
        rows = []
        for k in range(1, k_max + 1):
            raw = power[k]
            empirical = raw / count / interval.x ** (k / 2)
            stderr = None
            if spec.sample_count is not None:
                stderr = _sample_stderr(power[k], power[2 * k], count,
                                        interval.x, k)
            rows.append(_finish_row(spec, interval, resolved, k, raw,
                                    empirical, stderr, population))
    else:
        rows = _file_weight_rows(spec, interval, resolved, k_max, sieve,
                                 tuple_budget, population)
        count = spec.sample_count or population
    elapsed = int((time.perf_counter() - t0) * 1000)
    return MomentReport(spec=spec, interval=interval, weights=weights,
                        population=population, count=count, rows=rows,
                        elapsed_ms=elapsed)


@dataclass
class ExceedanceReport:
    spec: EnsembleSpec
    interval: IntervalSpec
    y: float
    count: int
    population: int
    proportion: float
    second_moment_sum: float
    chebyshev_bound: float
    certified: bool
    elapsed_ms: int

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.describe(),
            "interval": self.interval.describe(),
            "y": self.y,
            "count": self.count,
            "population": self.population,
            "proportion": self.proportion,
            "second_moment_sum": self.second_moment_sum,
            "chebyshev_bound": self.chebyshev_bound,
            "certified": self.certified,
            "elapsed_ms": self.elapsed_ms,
        }


def exceedance_report(spec: EnsembleSpec, interval: IntervalSpec, y: float,
                      sieve: FactorSieve, workers: int = 1,
                      tuple_budget: int = DEFAULT_TUPLE_BUDGET
                      ) -> ExceedanceReport:
    """Count how many tuples have S = |C|/sqrt(x) strictly above y, against
    the finite-population Chebyshev bound (sum of S^2) / y^2.

    count * y^2 <= sum S^2 holds exactly (rational arithmetic), and the
    report carries that certification; it requires full enumeration.
    """
    if y <= 0:
        raise ValueError("y must be positive")
    if spec.sample_count is not None:
        raise ValueError("exceedance needs full enumeration, not sampling")
    t0 = time.perf_counter()
    hist, offset, count_eval = _ensemble_histogram(
        spec, interval.values(), sieve, workers, tuple_budget)
    sum_sq = _power_sum(hist, offset, 2)
    x = Fraction(interval.x)
    threshold = Fraction(y) ** 2 * x
    exceed = _count_above(hist, offset, threshold)
    certified = Fraction(exceed) * Fraction(y) ** 2 <= Fraction(sum_sq) / x
    elapsed = int((time.perf_counter() - t0) * 1000)
    return ExceedanceReport(
        spec=spec, interval=interval, y=y, count=exceed,
        population=count_eval, proportion=exceed / count_eval,
        second_moment_sum=float(Fraction(sum_sq) / x),
        chebyshev_bound=float(Fraction(sum_sq) / x / Fraction(y) ** 2),
        certified=bool(certified), elapsed_ms=elapsed)


@dataclass
class ProbeReport:
    spec: EnsembleSpec
    interval: IntervalSpec
    y: float
    m: int
    empirical_2m: float
    empirical_4m: float
    probe: float
    proportion: float
    count: int
    population: int
    certified: bool
    threshold_value: float | None
    threshold_ok: bool | None
    note: str
    elapsed_ms: int

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.describe(),
            "interval": self.interval.describe(),
            "y": self.y,
            "m": self.m,
            "empirical_2m": self.empirical_2m,
            "empirical_4m": self.empirical_4m,
            "probe": self.probe,
            "proportion": self.proportion,
            "count": self.count,
            "population": self.population,
            "certified": self.certified,
            "threshold_value": self.threshold_value,
            "threshold_ok": self.threshold_ok,
            "note": self.note,
            "elapsed_ms": self.elapsed_ms,
        }


def lower_bound_probe(spec: EnsembleSpec, interval: IntervalSpec, y: float,
                      m: int, sieve: FactorSieve, workers: int = 1,
                      tuple_budget: int = DEFAULT_TUPLE_BUDGET) -> ProbeReport:
    """Cauchy-Schwarz lower bound on the proportion of tuples with S > y:

        P(S > y) >= (E[S^2m] - y^2m)^2 / E[S^4m]

    whenever E[S^2m] > y^2m.  Over the full finite ensemble this inequality
    is exact, so the report certifies proportion >= probe in rational
    arithmetic.  For max degree >= 3 the report also states whether y is
    below the threshold ((d-2)/8)^((d-2)/(2(d+1))) under which the moment
    growth keeps the probe positive.
    """
    if y < 0:
        raise ValueError("y must be non-negative")
    if m < 1:
        raise ValueError("m must be a positive integer")
    if spec.sample_count is not None:
        raise ValueError("the probe needs full enumeration, not sampling")
    t0 = time.perf_counter()
    hist, offset, population = _ensemble_histogram(
        spec, interval.values(), sieve, workers, tuple_budget)
    x = Fraction(interval.x)
    e2m = Fraction(_power_sum(hist, offset, 2 * m), population) / x**m
    e4m = Fraction(_power_sum(hist, offset, 4 * m), population) / x**(2 * m)
    y_pow = Fraction(y) ** (2 * m)
    numerator = e2m - y_pow
    if numerator > 0 and e4m > 0:
        probe_exact = numerator * numerator / e4m
    else:
        probe_exact = Fraction(0)
    exceed = _count_above(hist, offset, Fraction(y) ** 2 * x)
    proportion_exact = Fraction(exceed, population)
    certified = numerator <= 0 or proportion_exact >= probe_exact
    d = max(spec.degrees)
    if d >= 3:
        threshold = ((d - 2) / 8) ** ((d - 2) / (2 * (d + 1)))
        threshold_ok = y <= threshold
        note = ""
    else:
        threshold = None
        threshold_ok = None
        note = ("threshold check skipped: the positive-proportion corollary "
                "requires degree >= 3")
    elapsed = int((time.perf_counter() - t0) * 1000)
    return ProbeReport(
        spec=spec, interval=interval, y=y, m=m,
        empirical_2m=float(e2m), empirical_4m=float(e4m),
        probe=float(probe_exact), proportion=float(proportion_exact),
        count=exceed, population=population, certified=bool(certified),
        threshold_value=threshold, threshold_ok=threshold_ok, note=note,
        elapsed_ms=elapsed)


# ----------------------------------------------------------------------
# Histogram engine.  C values live in [-T, T] for T interval columns, so a
# single integer histogram captures the whole ensemble distribution; power
# sums, exceedance counts, and probe moments all read off it exactly.

_WORK: dict = {}


def _ensemble_histogram(spec: EnsembleSpec, nvals: np.ndarray,
                        sieve: FactorSieve, workers: int,
                        tuple_budget: int) -> tuple[np.ndarray, int, int]:
    """Histogram of C values over the ensemble; returns (hist, offset, count)."""
    T = int(nvals.size)
    if spec.sample_count is None:
        count = ensemble_size(spec)
        if count > tuple_budget:
            raise BudgetError(
                f"full enumeration of {count} tuples exceeds budget {tuple_budget}")
    else:
        count = spec.sample_count
    if T == 0:
        hist = np.zeros(1, dtype=np.int64)
        hist[0] = count
        return hist, 0, count
    _check_value_budget(spec, nvals)
    mats = None
    if spec.sample_count is None and spec.slots > 1:
        mats = [_lambda_matrix_full(spec, i, nvals, sieve)
                for i in range(1, spec.slots)]
        if sum(m.nbytes for m in mats) > _MATRIX_BYTE_CAP:
            raise BudgetError("inner slot lambda matrices exceed the memory cap")
    if spec.sample_count is None:
        total_rows = spec.slot_size(0)
        shard_fn = _full_hist_shard
    else:
        total_rows = spec.sample_count
        shard_fn = _mc_hist_shard
    shards = shard_ranges(total_rows, max(1, workers))
    _WORK.update(spec=spec, nvals=nvals, sieve=sieve, mats=mats, T=T)
    try:
        parts = _run_shards(shard_fn, shards, workers)
    finally:
        _WORK.clear()
    hist = np.zeros(2 * T + 1, dtype=np.int64)
    for part in parts:
        hist += part
    return hist, T, count


def _run_shards(fn, shards, workers):
    if workers <= 1 or len(shards) <= 1:
        return [fn(s) for s in shards]
    try:
        ctx = multiprocessing.get_context("fork")
    except ValueError:
        return [fn(s) for s in shards]
    with ctx.Pool(processes=min(workers, len(shards))) as pool:
        return pool.map(fn, shards)


def _full_hist_shard(row_range: tuple[int, int]) -> np.ndarray:
    spec: EnsembleSpec = _WORK["spec"]
    nvals, sieve, mats, T = (_WORK["nvals"], _WORK["sieve"],
                             _WORK["mats"], _WORK["T"])
    lo, hi = row_range
    hist = np.zeros(2 * T + 1, dtype=np.int64)
    if lo >= hi:
        return hist
    inner = mats[-1].shape[0] if mats else 1
    block = max(1, _BLOCK_ENTRIES // max(T * inner, 1))
    powers = _power_matrix(spec.degrees[0], nvals)
    for start in range(lo, hi, block):
        stop = min(start + block, hi)
        coeffs = coefficient_block(spec.degrees[0], spec.height,
                                   spec.degree_mode, start, stop)
        lam0 = liouville_bulk(coeffs @ powers, sieve, allow_fallback=True)
        if not mats:
            vals = lam0.sum(axis=1, dtype=np.int64)
            hist += np.bincount(vals + T, minlength=2 * T + 1)
        else:
            _hist_recurse(hist, lam0, mats, 0, T)
    return hist


def _hist_recurse(hist: np.ndarray, prefix: np.ndarray,
                  mats: list[np.ndarray], level: int, T: int) -> None:
    if level == len(mats) - 1:
        vals = prefix.astype(np.int64) @ mats[-1].astype(np.int64).T
        hist += np.bincount(vals.ravel() + T, minlength=2 * T + 1)
        return
    for row in mats[level]:
        _hist_recurse(hist, prefix * row, mats, level + 1, T)


def _mc_hist_shard(idx_range: tuple[int, int]) -> np.ndarray:
    spec: EnsembleSpec = _WORK["spec"]
    nvals, sieve, T = _WORK["nvals"], _WORK["sieve"], _WORK["T"]
    lo, hi = idx_range
    hist = np.zeros(2 * T + 1, dtype=np.int64)
    if lo >= hi:
        return hist
    powers = [_power_matrix(d, nvals) for d in spec.degrees]
    block = max(1, _BLOCK_ENTRIES // max(T, 1))
    for start in range(lo, hi, block):
        stop = min(start + block, hi)
        blocks = sample_coefficient_blocks(spec, start, stop)
        prod = np.ones((stop - start, T), dtype=np.int8)
        for i in range(spec.slots):
            prod *= liouville_bulk(blocks[i] @ powers[i], sieve,
                                   allow_fallback=True)
        vals = prod.sum(axis=1, dtype=np.int64)
        hist += np.bincount(vals + T, minlength=2 * T + 1)
    return hist


def _lambda_matrix_full(spec: EnsembleSpec, slot: int, nvals: np.ndarray,
                        sieve: FactorSieve) -> np.ndarray:
    rows = spec.slot_size(slot)
    powers = _power_matrix(spec.degrees[slot], nvals)
    out = np.empty((rows, nvals.size), dtype=np.int8)
    block = max(1, _BLOCK_ENTRIES // max(int(nvals.size), 1))
    for start in range(0, rows, block):
        stop = min(start + block, rows)
        coeffs = coefficient_block(spec.degrees[slot], spec.height,
                                   spec.degree_mode, start, stop)
        out[start:stop] = liouville_bulk(coeffs @ powers, sieve,
                                         allow_fallback=True)
    return out


def _power_matrix(degree: int, nvals: np.ndarray) -> np.ndarray:
    """Rows n^j for j = 0..degree, int64; caller pre-checks the 63-bit budget."""
    out = np.empty((degree + 1, nvals.size), dtype=np.int64)
    out[0] = 1
    for j in range(1, degree + 1):
        out[j] = out[j - 1] * nvals
    return out


def _check_value_budget(spec: EnsembleSpec, nvals: np.ndarray) -> None:
    peak = int(np.abs(nvals).max(initial=0))
    for d in spec.degrees:
        bound = spec.height * sum(peak**j for j in range(d + 1))
        if bound > 2**63 - 1:
            raise EvaluationOverflowError(
                f"|f(n)| can reach {bound}, past the signed 64-bit budget")


def _power_sum(hist: np.ndarray, offset: int, k: int) -> int:
    """sum over the ensemble of C^k, exact (big ints via the histogram)."""
    total = 0
    for i in np.flatnonzero(hist):
        total += int(hist[i]) * (int(i) - offset) ** k
    return total


def _count_above(hist: np.ndarray, offset: int, threshold_sq: Fraction) -> int:
    """#{tuples : C^2 > x * y^2}, i.e. S > y, compared in exact rationals."""
    total = 0
    for i in np.flatnonzero(hist):
        v = int(i) - offset
        if v * v > threshold_sq:
            total += int(hist[i])
    return total


def _sample_stderr(p1: int, p2: int, n: int, x: float, k: int) -> float:
    """Standard error of the sample mean of t = C^k / x^{k/2}."""
    if n < 2:
        return float("nan")
    var_num = Fraction(p2) - Fraction(p1) ** 2 / n
    var = var_num / Fraction(x) ** k / (n - 1)
    return math.sqrt(max(float(var), 0.0) / n)


def _finish_row(spec: EnsembleSpec, interval: IntervalSpec,
                resolved: _ResolvedWeights, k: int, raw, empirical,
                stderr: float | None, population: int) -> MomentRow:
    D = spec.total_dimension
    H = spec.height
    scale = 2**D * H**D
    if resolved.kind == WEIGHT_ALL_ONES:
        predicted = float(Fraction(gaussian_moment(k) * scale, population))
        outside = k > max(spec.degrees) + 1
    else:
        if k == 1:
            predicted = 0.0
        elif k == 2:
            predicted = float(Fraction(resolved.sum_abs_sq) * scale
                              / (Fraction(interval.x) * population))
        else:
            predicted = None
        outside = k > 2
    if predicted:
        mag = abs(empirical) if isinstance(empirical, complex) else empirical
        ratio = mag / predicted
    else:
        ratio = None
    return MomentRow(k=k, raw_sum=raw, empirical=empirical,
                     predicted=predicted, ratio=ratio, stderr=stderr,
                     outside_theorem_range=outside)


# ----------------------------------------------------------------------
# File-weight path: exact complex-rational accumulation, tuple by tuple.

def _file_weight_rows(spec: EnsembleSpec, interval: IntervalSpec,
                      resolved: _ResolvedWeights, k_max: int,
                      sieve: FactorSieve, tuple_budget: int,
                      population: int) -> list[MomentRow]:
    sampled = spec.sample_count is not None
    count = spec.sample_count if sampled else population
    if count > tuple_budget:
        raise BudgetError(f"{count} tuples exceed budget {tuple_budget}")
    nvals = interval.values()
    _check_value_budget(spec, nvals)
    powers = [_power_matrix(d, nvals) for d in spec.degrees]
    nz = [i for i in range(interval.length)
          if resolved.re[i] != 0 or resolved.im[i] != 0]
    sums = [(Fraction(0), Fraction(0)) for _ in range(k_max)]
    abs_sq = [Fraction(0) for _ in range(k_max)] if sampled else None
    stream = sample_tuples(spec) if sampled else enumerate_tuples(spec)
    for polys in stream:
        prod = np.ones(interval.length, dtype=np.int8)
        for i, f in enumerate(polys):
            coeffs = np.array([f.coeffs], dtype=np.int64)
            prod *= liouville_bulk(coeffs @ powers[i], sieve,
                                   allow_fallback=True)[0]
        w_re, w_im = Fraction(0), Fraction(0)
        for idx in nz:
            t = int(prod[idx])
            if t:
                w_re += resolved.re[idx] * t
                w_im += resolved.im[idx] * t
        p_re, p_im = Fraction(1), Fraction(0)
        for k in range(k_max):
            p_re, p_im = p_re * w_re - p_im * w_im, p_re * w_im + p_im * w_re
            sums[k] = (sums[k][0] + p_re, sums[k][1] + p_im)
            if sampled:
                abs_sq[k] += p_re * p_re + p_im * p_im
    rows = []
    x = Fraction(interval.x)
    for k in range(1, k_max + 1):
        s_re, s_im = sums[k - 1]
        raw = complex(float(s_re), float(s_im))
        if k % 2 == 0:
            denom = count * x ** (k // 2)
            emp = complex(float(s_re / denom), float(s_im / denom))
        else:
            scale = count * interval.x ** (k / 2)
            emp = complex(float(s_re) / scale, float(s_im) / scale)
        stderr = None
        if sampled and count >= 2:
            mean_sq = (s_re * s_re + s_im * s_im) / count**2
            var = (abs_sq[k - 1] / count - mean_sq) / x**k
            var = var * count / (count - 1)
            stderr = math.sqrt(max(float(var), 0.0) / count)
        rows.append(_finish_row(spec, interval, resolved, k, raw, emp,
                                stderr, population))
    return rows


def _as_tuple(f_tuple) -> tuple[IntPolynomial, ...]:
    if isinstance(f_tuple, IntPolynomial):
        return (f_tuple,)
    return tuple(f_tuple)


def _jsonable(value):
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


def _csv_cell(value):
    if isinstance(value, complex):
        return f"{value.real:g}{value.imag:+g}j"
    return value


__all__ = [
    "IntervalSpec", "WeightSpec", "MomentRow", "MomentReport",
    "ExceedanceReport", "ProbeReport", "WEIGHT_ALL_ONES", "WEIGHT_PRIME",
    "WEIGHT_FILE", "chowla_sum", "weighted_chowla_sum",
    "normalized_statistic", "gaussian_moment",
    "gaussian_moment_lower_bound_check", "moment_report",
    "exceedance_report", "lower_bound_probe", "resolve_weights",
    "load_weight_file",
]
