"""Smallest-prime-factor sieve with exact Liouville and Moebius queries.

A single uint32 table spf[n] (least prime divisor of n, for 2 <= n <= limit)
serves lambda(n) = (-1)^Omega(n), mu(n), and full factorizations: repeated
division by spf[n] walks the prime factorization in O(log n) steps.

Values above the table fall back to deterministic factorization
(Miller-Rabin with a fixed witness set, then Brent's cycle method with
systematic parameter escalation), certified for every n <= 2**62.

lambda is extended to all integers by lambda(0) = 0 and
lambda(-n) = lambda(n); mu likewise uses mu(-n) = mu(n).
"""

from __future__ import annotations

import math
import os

import numpy as np

from .errors import BudgetError, CacheFormatError, RangeLimitError

# Deterministic Miller-Rabin with these witnesses is a primality proof for
# every n < 3317044064679887385961981, which covers the whole fallback window.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_TRIAL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47,
                 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101)

#: Largest n whose factorization (hence lambda/mu) is certified without a table.
FALLBACK_LIMIT = 2**62

#: spf entries are uint32, so tables cannot index past this.
MAX_SIEVE_LIMIT = 2**32 - 1

CACHE_MAGIC = b"LIOUSPF1"


class FactorSieve:
    """Smallest-prime-factor table for 2..limit.

    ``spf[n]`` is the least prime dividing n (``spf[p] == p`` exactly when p
    is prime); indices 0 and 1 hold the conventional placeholders 0 and 1.
    Queries never mutate the table, so one instance is safe to share across
    threads and fork()ed workers.
    """

    def __init__(self, limit: int, spf: np.ndarray):
        if limit < 2:
            raise ValueError("sieve limit must be at least 2")
        if spf.shape != (limit + 1,):
            raise ValueError("spf table size does not match limit")
        self.limit = int(limit)
        self.spf = spf
        self._lambda_cumsum: np.ndarray | None = None

    def __repr__(self) -> str:
        return f"FactorSieve(limit={self.limit})"

    def is_prime(self, n: int) -> bool:
        if n < 2:
            return False
        if n <= self.limit:
            return int(self.spf[n]) == n
        if n > FALLBACK_LIMIT:
            raise RangeLimitError(f"{n} exceeds the certified range 2**62")
        return _is_prime_u64(n)

    def primes_between(self, lo: int, hi: int) -> np.ndarray:
        """All primes p with lo <= p <= hi, as int64. Requires hi <= limit."""
        if hi > self.limit:
            raise RangeLimitError(f"prime scan to {hi} exceeds table limit {self.limit}")
        lo = max(lo, 2)
        if lo > hi:
            return np.empty(0, dtype=np.int64)
        ns = np.arange(lo, hi + 1, dtype=np.int64)
        return ns[self.spf[lo:hi + 1] == ns]

    def lambda_partial_sum(self, t: int) -> int:
        """Summatory Liouville L(t) = sum_{n <= t} lambda(n), exact int.

        The cumulative table is built lazily on first use and grows
        monotonically, so repeated queries are O(1).
        """
        if t < 1:
            return 0
        if t > self.limit:
            raise RangeLimitError(f"partial sum to {t} exceeds table limit {self.limit}")
        if self._lambda_cumsum is None or self._lambda_cumsum.size <= t:
            lam = liouville_bulk(np.arange(1, t + 1, dtype=np.int64), self)
            self._lambda_cumsum = np.concatenate(
                [np.zeros(1, dtype=np.int64), np.cumsum(lam, dtype=np.int64)])
        return int(self._lambda_cumsum[t])


def build_sieve(limit: int) -> FactorSieve:
    """Sieve smallest prime factors for 2..limit.

    Classic vectorized pattern: for each prime p <= sqrt(limit), stamp p on
    every untouched multiple of p from p*p on; whatever is still untouched
    afterwards is prime and gets itself. About 4.3 bytes per integer.
    """
    if limit < 2:
        raise ValueError("sieve limit must be at least 2")
    if limit > MAX_SIEVE_LIMIT:
        raise RangeLimitError(f"limit {limit} exceeds uint32 table capacity {MAX_SIEVE_LIMIT}")
    try:
        spf = np.zeros(limit + 1, dtype=np.uint32)
    except MemoryError as exc:
        raise BudgetError(
            f"cannot allocate spf table of {4 * (limit + 1)} bytes for limit {limit}"
        ) from exc
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            block = spf[p * p::p]
            block[block == 0] = p
    untouched = np.flatnonzero(spf[2:] == 0).astype(np.uint32) + 2
    spf[untouched] = untouched
    spf[1] = 1
    return FactorSieve(limit, spf)


def liouville(n: int, sieve: FactorSieve) -> int:
    """lambda(n) = (-1)^Omega(n) with lambda(0) = 0 and lambda(-n) = lambda(n)."""
    m = abs(n)
    if m == 0:
        return 0
    if m <= sieve.limit:
        spf = sieve.spf
        sign = 1
        while m > 1:
            m //= int(spf[m])
            sign = -sign
        return sign
    if m > FALLBACK_LIMIT:
        raise RangeLimitError(f"|{n}| exceeds the certified range 2**62")
    return -1 if len(factor(m)) % 2 else 1


def mobius(n: int, sieve: FactorSieve) -> int:
    """mu(n): 0 on a squared factor, else (-1)^(number of prime factors)."""
    m = abs(n)
    if m == 0:
        return 0
    if m <= sieve.limit:
        spf = sieve.spf
        sign = 1
        while m > 1:
            p = int(spf[m])
            m //= p
            if m % p == 0:
                return 0
            sign = -sign
        return sign
    if m > FALLBACK_LIMIT:
        raise RangeLimitError(f"|{n}| exceeds the certified range 2**62")
    primes = factor(m)
    if len(set(primes)) != len(primes):
        return 0
    return -1 if len(primes) % 2 else 1


def factor(n: int) -> list[int]:
    """Prime factorization of n with multiplicity, ascending.

    Deterministic for all 2 <= n <= 2**62: trial division by small primes,
    Miller-Rabin certification, and Brent-cycle splitting whose polynomial
    increment is escalated systematically until a factor appears.
    """
    if n < 2 or n > FALLBACK_LIMIT:
        raise RangeLimitError(f"factor() certified only for 2 <= n <= 2**62, got {n}")
    out: list[int] = []
    for p in _TRIAL_PRIMES:
        while n % p == 0:
            out.append(p)
            n //= p
    if n == 1:
        return out
    stack = [n]
    while stack:
        m = stack.pop()
        if _is_prime_u64(m):
            out.append(m)
            continue
        d = m
        c = 1
        while d == m or d == 1:
            d = _brent_rho(m, c)
            c += 1
        stack.append(d)
        stack.append(m // d)
    out.sort()
    return out


def liouville_via_inversion(n: int, sieve: FactorSieve) -> int:
    """lambda(n) recomputed as sum_{d*d | n} mu(n / d**2).

    Independent of the factor-counting route; used as a cross-check.
    """
    m = abs(n)
    if m == 0:
        return 0
    if m > sieve.limit:
        raise RangeLimitError(f"inversion needs mu up to {m} > table limit {sieve.limit}")
    total = 0
    d = 1
    while d * d <= m:
        if m % (d * d) == 0:
            total += mobius(m // (d * d), sieve)
        d += 1
    return total


def liouville_bulk(values, sieve: FactorSieve, allow_fallback: bool = False) -> np.ndarray:
    """Vectorized lambda over an integer array; returns int8 of the same shape.

    Works by repeatedly gathering spf for every still-composite entry and
    dividing it out, flipping signs as it goes; the active set shrinks by one
    prime factor per pass, so the loop runs ~average-Omega times regardless
    of array size.  Entries above the table limit raise unless
    ``allow_fallback`` routes them through scalar factorization.
    """
    arr = np.asarray(values, dtype=np.int64)
    v = np.abs(arr).ravel()
    if v.size and int(v.min()) < 0:
        raise RangeLimitError("value -2**63 cannot be normalized")
    out = np.ones(v.size, dtype=np.int8)
    out[v == 0] = 0
    big = np.flatnonzero(v > sieve.limit)
    if big.size:
        if not allow_fallback:
            raise RangeLimitError(
                f"{big.size} values exceed table limit {sieve.limit} (fallback disabled)")
        for i in big:
            out[i] = liouville(int(v[i]), sieve)
        v = v.copy()
        v[big] = 1
    idx = np.flatnonzero(v > 1)
    work = v[idx]
    spf = sieve.spf
    while idx.size:
        work //= spf[work].astype(np.int64)
        out[idx] = -out[idx]
        alive = work > 1
        idx = idx[alive]
        work = work[alive]
    return out.reshape(arr.shape)


def save_sieve_cache(sieve: FactorSieve, path: str) -> int:
    """Write the table: 8-byte magic, little-endian uint64 limit, then the
    spf entries for n = 2..limit as little-endian uint32. Returns byte count.
    """
    payload = np.ascontiguousarray(sieve.spf[2:], dtype="<u4")
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(int(sieve.limit).to_bytes(8, "little"))
        payload.tofile(fh)
    return 16 + payload.nbytes


def load_sieve_cache(path: str) -> FactorSieve:
    """Load a table written by save_sieve_cache, validating magic and size."""
    size = os.path.getsize(path)
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != CACHE_MAGIC:
            raise CacheFormatError(f"{path}: bad magic {magic!r}, expected {CACHE_MAGIC!r}")
        raw_limit = fh.read(8)
        if len(raw_limit) != 8:
            raise CacheFormatError(f"{path}: truncated header")
        limit = int.from_bytes(raw_limit, "little")
        if limit < 2 or limit > MAX_SIEVE_LIMIT:
            raise CacheFormatError(f"{path}: implausible limit {limit}")
        expected = 16 + 4 * (limit - 1)
        if size != expected:
            raise CacheFormatError(f"{path}: size {size} != {expected} for limit {limit}")
        body = np.fromfile(fh, dtype="<u4", count=limit - 1)
    spf = np.empty(limit + 1, dtype=np.uint32)
    spf[0] = 0
    spf[1] = 1
    spf[2:] = body
    return FactorSieve(limit, spf)


def _is_prime_u64(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent_rho(n: int, c: int) -> int:
    """One Brent cycle attempt on odd composite n with increment c.

    Returns a divisor of n, possibly trivial (1 or n) on a failed attempt;
    callers escalate c until the divisor is proper.
    """
    y, r, q = 2, 1, 1
    g, x, ys = 1, 0, 0
    batch = 128
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(batch, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = math.gcd(q, n)
            k += batch
        r *= 2
    if g == n:
        g = 1
        while g == 1:
            ys = (ys * ys + c) % n
            g = math.gcd(abs(x - ys), n)
    return g
