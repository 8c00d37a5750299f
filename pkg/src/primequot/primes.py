"""Segmented prime sieve, indexed prime access, and the quotient map.

Indexing convention throughout the package: ``prime(0) == 2``, i.e. index n
names the (n+1)-th prime.  The quotient map is ``q(n) = prime(n) // n`` and
the remainder ``r(n) = prime(n) % n``, both defined for ``n >= 1`` only.
"""

from __future__ import annotations

import math
import struct

import numpy as np

from . import _kernels, intervals
from .errors import DomainError, RangeExhaustedError
from .report import FAIL, INCONCLUSIVE, PASS, VerificationReport, timer

DEFAULT_SEGMENT = 1 << 23

_CACHE_MAGIC = b"PQPT"
_CACHE_VERSION = 1


def _base_primes(limit: int) -> np.ndarray:
    """Plain sieve of the primes up to isqrt(limit), for segment marking."""
    top = math.isqrt(limit)
    if top < 2:
        return np.empty(0, dtype=np.int64)
    flags = np.ones(top + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(top) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return np.flatnonzero(flags).astype(np.int64)


def iter_prime_segments(limit: int, segment_size: int = DEFAULT_SEGMENT):
    """Yield consecutive numpy arrays of primes covering [2, limit].

    Memory stays O(segment + sqrt(limit)) no matter how large the limit is.
    """
    if limit < 2:
        raise DomainError(f"sieve limit must be >= 2, got {limit}")
    base = _base_primes(limit)
    lo = 2
    while lo <= limit:
        hi = min(lo + segment_size, limit + 1)
        flags = np.ones(hi - lo, dtype=bool)
        _kernels.mark_composites(flags, lo, base)
        primes = np.flatnonzero(flags).astype(np.int64)
        primes += lo
        if len(primes):
            yield primes
        lo = hi


class PrimeTable:
    """Immutable, index-addressable store of all primes up to a limit."""

    def __init__(self, primes: np.ndarray, limit: int):
        self._primes = np.ascontiguousarray(primes, dtype=np.int64)
        self._primes.setflags(write=False)
        self.limit = int(limit)

    @property
    def count(self) -> int:
        return len(self._primes)

    def prime(self, n: int) -> int:
        """The prime with index n (prime(0) == 2, prime(1) == 3)."""
        if not 0 <= n < self.count:
            raise RangeExhaustedError(
                f"prime index {n} out of range: sieve limit {self.limit} "
                f"holds {self.count} primes", limit=self.limit)
        return int(self._primes[n])

    def primes(self, lo: int = 0, hi: int | None = None) -> np.ndarray:
        hi = self.count if hi is None else hi
        if not (0 <= lo <= hi <= self.count):
            raise RangeExhaustedError(
                f"prime index range [{lo}, {hi}) exceeds table of size "
                f"{self.count}", limit=self.limit)
        return self._primes[lo:hi]

    def quotient(self, n: int) -> int:
        """floor(prime(n) / n); rejects n = 0 (no division by zero)."""
        if n < 1:
            raise DomainError("quotient map is defined for n >= 1 only")
        return self.prime(n) // n

    def remainder(self, n: int) -> int:
        if n < 1:
            raise DomainError("remainder map is defined for n >= 1 only")
        return self.prime(n) % n

    def quotients(self, lo: int, hi: int) -> np.ndarray:
        """Vector of quotient values for indices [lo, hi)."""
        if lo < 1:
            raise DomainError("quotient map is defined for n >= 1 only")
        return self.primes(lo, hi) // np.arange(lo, hi, dtype=np.int64)

    # -- binary cache ------------------------------------------------------

    def save(self, path):
        """Write a compact cache: header plus delta-encoded primes."""
        deltas = np.diff(self._primes)
        if len(deltas) and int(deltas.max()) >= 2**32:
            raise ValueError("prime gap does not fit the cache encoding")
        with open(path, "wb") as fh:
            fh.write(struct.pack("<4sIQQ", _CACHE_MAGIC, _CACHE_VERSION,
                                 self.limit, self.count))
            if self.count:
                fh.write(struct.pack("<Q", int(self._primes[0])))
                deltas.astype(np.uint32).tofile(fh)

    @classmethod
    def load(cls, path) -> "PrimeTable":
        with open(path, "rb") as fh:
            head = fh.read(struct.calcsize("<4sIQQ"))
            magic, version, limit, count = struct.unpack("<4sIQQ", head)
            if magic != _CACHE_MAGIC:
                raise ValueError(f"not a prime table cache: {path}")
            if version != _CACHE_VERSION:
                raise ValueError(f"unsupported cache version {version}")
            if count == 0:
                return cls(np.empty(0, dtype=np.int64), limit)
            (first,) = struct.unpack("<Q", fh.read(8))
            deltas = np.fromfile(fh, dtype=np.uint32, count=count - 1)
        if len(deltas) != count - 1:
            raise ValueError(f"truncated prime table cache: {path}")
        primes = np.empty(count, dtype=np.int64)
        primes[0] = first
        np.cumsum(deltas, out=primes[1:])
        primes[1:] += first
        return cls(primes, limit)


def sieve_upto(limit: int, segment_size: int = DEFAULT_SEGMENT) -> PrimeTable:
    """All primes <= limit as an indexed table."""
    chunks = list(iter_prime_segments(limit, segment_size))
    primes = np.concatenate(chunks) if chunks else np.empty(0, np.int64)
    return PrimeTable(primes, limit)


def nth_prime(table: PrimeTable, n: int) -> int:
    return table.prime(n)


def prime_quotient(table: PrimeTable, n: int) -> int:
    return table.quotient(n)


def prime_remainder(table: PrimeTable, n: int) -> int:
    return table.remainder(n)


def prime_index_upper_estimate(m: int) -> int:
    """A safe sieve limit guaranteed to contain the prime with index m.

    Uses the classical n(ln n + ln ln n) upper bound (valid from n = 6 in
    1-based counting) with slack for small m.
    """
    n = m + 1  # 1-based rank
    if n < 6:
        return 16
    x = float(n)
    return int(x * (math.log(x) + math.log(math.log(x))) * 1.01) + 16


# -- analytic estimates -----------------------------------------------------

LOWER_CONST = intervals.LOWER_CONST
UPPER_CONST = intervals.UPPER_CONST
LOWER_MIN_M = intervals.LOWER_MIN_M
UPPER_MIN_M = intervals.UPPER_MIN_M


class RosserBounds:
    """Exact scaled-integer constants of the two prime-size estimates."""

    lower_const = LOWER_CONST
    upper_const = UPPER_CONST
    lower_min_m = LOWER_MIN_M
    upper_min_m = UPPER_MIN_M


def rosser_lower(m: int, prec: int = 80) -> intervals.Enclosure:
    """Certified enclosure of m log m + m log log m - 1.0072629 m (m >= 2)."""
    if m < LOWER_MIN_M:
        raise DomainError(f"lower estimate needs m >= {LOWER_MIN_M}")
    return intervals.bound_enclosure(m, LOWER_CONST, prec)


def rosser_upper(m: int, prec: int = 80) -> intervals.Enclosure:
    """Certified enclosure of m log m + m log log m - 0.9385 m (m >= 7022)."""
    if m < UPPER_MIN_M:
        raise DomainError(f"upper estimate needs m >= {UPPER_MIN_M}")
    return intervals.bound_enclosure(m, UPPER_CONST, prec)


def _certify_block(ms, ps, const, direction):
    """Fast-path certification of a block; returns (ok, escalations).

    direction "le": claim expr(m) <= p;  "ge": claim expr(m) >= p.
    Escalations is a list of (m, p, verdict) where verdict is True/False/None
    after rigorous re-checking.
    """
    if direction == "le":
        good, bad = intervals.bulk_certify_le(ms, const, ps)
        decide = intervals.decide_le
    else:
        good, bad = intervals.bulk_certify_ge(ms, const, ps)
        decide = intervals.decide_ge
    escalations = []
    unresolved = ~good
    for idx in np.flatnonzero(unresolved):
        m, p = int(ms[idx]), int(ps[idx])
        escalations.append((m, p, decide(m, const, p)))
    return escalations


def _bounds_report(blocks, ranges, oracle="prime-table", runtime_ms=0):
    """Fold per-block escalation lists into a single report."""
    checked = 0
    escalated = 0
    witness = None
    result = PASS
    for count, escalations in blocks:
        checked += count
        escalated += len(escalations)
        for m, p, verdict in escalations:
            if verdict is False and result != FAIL:
                result = FAIL
                witness = {"m": m, "p": p}
            elif verdict is None and result == PASS:
                result = INCONCLUSIVE
                witness = None
                # keep the first undecided point in the details
    return VerificationReport(
        check="estimates", anchor="prime-size-bounds", oracle=oracle,
        ranges=ranges, result=result, witness=witness,
        runtime_ms=runtime_ms,
        details={"checked": checked, "escalated": escalated})


def check_estimates(table: PrimeTable, m_lo: int = LOWER_MIN_M,
                    m_hi: int | None = None) -> VerificationReport:
    """Certify lower (m >= 2) and upper (m >= 7022) estimates over a table.

    Verifies rosser_lower(m) <= prime(m) and, where applicable,
    prime(m) <= rosser_upper(m), for every index in [m_lo, m_hi].
    """
    if m_hi is None:
        m_hi = table.count - 1
    if m_hi >= table.count:
        raise RangeExhaustedError(
            f"m_hi {m_hi} exceeds table of size {table.count}",
            limit=table.limit)
    with timer() as t:
        blocks = []
        lo = max(m_lo, LOWER_MIN_M)
        if lo <= m_hi:
            ms = np.arange(lo, m_hi + 1, dtype=np.int64)
            ps = table.primes(lo, m_hi + 1)
            blocks.append((len(ms), _certify_block(ms, ps, LOWER_CONST, "le")))
        up = max(m_lo, UPPER_MIN_M)
        if up <= m_hi:
            ms = np.arange(up, m_hi + 1, dtype=np.int64)
            ps = table.primes(up, m_hi + 1)
            blocks.append((len(ms), _certify_block(ms, ps, UPPER_CONST, "ge")))
    return _bounds_report(
        blocks, ranges={"m_lo": m_lo, "m_hi": m_hi}, runtime_ms=t.ms)


def check_estimates_streaming(m_hi: int, m_lo: int = LOWER_MIN_M,
                              segment_size: int = DEFAULT_SEGMENT,
                              ) -> VerificationReport:
    """Same certification as check_estimates, without storing the primes.

    Sieves just far enough to reach index m_hi and checks block by block;
    suitable for ranges far beyond what fits in memory as a table.
    """
    limit = prime_index_upper_estimate(m_hi)
    blocks = []
    with timer() as t:
        offset = 0
        for primes in iter_prime_segments(limit, segment_size):
            idx = np.arange(offset, offset + len(primes), dtype=np.int64)
            offset += len(primes)
            sel = (idx >= max(m_lo, LOWER_MIN_M)) & (idx <= m_hi)
            if sel.any():
                ms, ps = idx[sel], primes[sel]
                blocks.append(
                    (len(ms), _certify_block(ms, ps, LOWER_CONST, "le")))
            sel = (idx >= max(m_lo, UPPER_MIN_M)) & (idx <= m_hi)
            if sel.any():
                ms, ps = idx[sel], primes[sel]
                blocks.append(
                    (len(ms), _certify_block(ms, ps, UPPER_CONST, "ge")))
            if offset > m_hi:
                break
        if offset <= m_hi:
            raise RangeExhaustedError(
                f"sieve to {limit} produced only {offset} primes, "
                f"need index {m_hi}", limit=limit)
    return _bounds_report(
        blocks, ranges={"m_lo": m_lo, "m_hi": m_hi},
        oracle="prime-stream", runtime_ms=t.ms)


# -- streaming quotient scans ------------------------------------------------

def quotient_crossings(limit: int, segment_size: int = DEFAULT_SEGMENT):
    """First index reaching each quotient level, by one streaming pass.

    Returns (crossings, count) where crossings[v] is the least n >= 1 with
    prime(n)//n >= v, for every level v reached below the sieve limit.
    """
    crossings: dict[int, int] = {}
    level = 0
    offset = 0
    for primes in iter_prime_segments(limit, segment_size):
        idx = np.arange(offset, offset + len(primes), dtype=np.int64)
        offset += len(primes)
        if idx[0] == 0:
            primes, idx = primes[1:], idx[1:]  # quotient undefined at n = 0
            if not len(idx):
                continue
        q = primes // idx
        top = int(q.max())
        while level < top:
            level += 1
            first = int(idx[np.argmax(q >= level)])
            crossings.setdefault(level, first)
    return crossings, offset


def primes_at_indices(limit: int, indices,
                      segment_size: int = DEFAULT_SEGMENT) -> dict[int, int]:
    """Fetch prime(i) for a sparse set of indices in one streaming pass."""
    wanted = sorted(set(int(i) for i in indices))
    out: dict[int, int] = {}
    offset = 0
    for primes in iter_prime_segments(limit, segment_size):
        hi = offset + len(primes)
        while wanted and wanted[0] < hi:
            i = wanted.pop(0)
            out[i] = int(primes[i - offset])
        if not wanted:
            break
        offset = hi
    if wanted:
        raise RangeExhaustedError(
            f"index {wanted[0]} beyond sieve limit {limit}", limit=limit)
    return out
