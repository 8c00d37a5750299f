"""Discrete unbounded maps, their pseudo-inverses, and class membership.

The central notion is the pseudo-inverse of an unbounded f: ℕ → ℕ,

    inv(n) = least m such that f(m+1) > n,

and the two-parameter property family: f is k-almost increasing when
f(y) - f(x) >= -k for all x <= y, and its pseudo-inverse has at least
(1/d)-linear difference from n0 when inv(n+1) - inv(n) > n/d for n >= n0.
Functions with both properties form the class checked by class_check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, intervals
from .errors import DomainError, RangeExhaustedError, SearchExhaustedError
from .report import FAIL, PASS, VerificationReport, merge, timer

DEFAULT_SEARCH_LIMIT = 1 << 22
_CHUNK = 1 << 20


class FunctionOracle:
    """A total map on {n >= n_start}, possibly backed by a finite table.

    Subclasses provide _eval and, where it matters, a vectorized
    eval_range.  Oracles are immutable and safe to share.
    """

    kind = "oracle"
    n_start = 0
    max_arg: int | None = None  # last evaluable argument; None = unlimited

    def __call__(self, n: int) -> int:
        if n < self.n_start:
            raise DomainError(
                f"{self.kind}: argument {n} below domain start {self.n_start}")
        if self.max_arg is not None and n > self.max_arg:
            raise RangeExhaustedError(
                f"{self.kind}: argument {n} beyond last tabulated argument "
                f"{self.max_arg}", limit=self.max_arg)
        return self._eval(n)

    def _eval(self, n: int) -> int:
        raise NotImplementedError

    def eval_range(self, lo: int, hi: int) -> np.ndarray:
        """Values for arguments [lo, hi); bounds validated like __call__."""
        if hi <= lo:
            return np.empty(0, dtype=np.int64)
        self(lo)
        self(hi - 1)
        return np.array([self._eval(i) for i in range(lo, hi)],
                        dtype=np.int64)

    def default_search_limit(self, n: int) -> int | None:
        """A-priori witness bound for pseudo-inverse at n, if one is known."""
        return self.max_arg

    def exact_inverse(self, n: int) -> int | None:
        """Closed-form pseudo-inverse at n, when the oracle has one.

        Any returned value is re-checked against the defining
        inequalities by the caller; returning None falls back to the
        forward scan.
        """
        return None

    def __repr__(self):
        return f"<{type(self).__name__} {self.kind}>"


class PrimeQuotientOracle(FunctionOracle):
    """n -> floor(prime(n) / n) over a sieved table."""

    n_start = 1

    def __init__(self, table):
        self.table = table
        self.max_arg = table.count - 1
        self.kind = "prime"

    def _eval(self, n):
        return self.table.quotient(n)

    def eval_range(self, lo, hi):
        if hi <= lo:
            return np.empty(0, dtype=np.int64)
        if lo < self.n_start:
            raise DomainError("prime quotient starts at n = 1")
        if hi - 1 > self.max_arg:
            raise RangeExhaustedError(
                f"prime quotient tabulated up to {self.max_arg}",
                limit=self.max_arg)
        return self.table.quotients(lo, hi)

    def default_search_limit(self, n):
        # the analytic lower estimate yields a sufficient witness bound,
        # capped by what the sieve actually holds
        return min(self.max_arg, prime_quotient_search_hint(n))


class SqrtLikeOracle(FunctionOracle):
    """f(x) = isqrt(2x // d): a strictly slower-growing monotone member."""

    n_start = 0

    def __init__(self, d: int):
        if d < 1:
            raise DomainError("d must be a positive integer")
        self.d = int(d)
        self.kind = f"sqrt-like:{d}"

    def _eval(self, n):
        return math.isqrt(2 * n // self.d)

    def eval_range(self, lo, hi):
        if hi <= lo:
            return np.empty(0, dtype=np.int64)
        if lo < 0:
            raise DomainError("sqrt-like oracle starts at 0")
        v = 2 * np.arange(lo, hi, dtype=np.int64) // self.d
        r = np.sqrt(v.astype(np.float64)).astype(np.int64)
        r = np.where((r + 1) ** 2 <= v, r + 1, r)  # exact isqrt corrections
        r = np.where(r**2 > v, r - 1, r)
        return r

    def default_search_limit(self, n):
        # f(x) > n as soon as 2x/d reaches (n+1)^2
        return self.d * (n + 1) ** 2 + self.d + 2

    def exact_inverse(self, n):
        # least j with isqrt(2j // d) > n is ceil(d*(n+1)^2 / 2)
        return (self.d * (n + 1) ** 2 + 1) // 2 - 1


class TableOracle(FunctionOracle):
    """Finite, explicitly tabulated oracle; loud beyond its last argument."""

    def __init__(self, values, n_start: int = 0):
        vals = np.asarray(list(values), dtype=np.int64)
        if len(vals) == 0:
            raise DomainError("table oracle needs at least one value")
        if (vals < 0).any():
            raise DomainError("table oracle values must be naturals")
        self._values = vals
        self.n_start = int(n_start)
        self.max_arg = self.n_start + len(vals) - 1
        self.kind = "table"

    def _eval(self, n):
        return int(self._values[n - self.n_start])

    def eval_range(self, lo, hi):
        if hi <= lo:
            return np.empty(0, dtype=np.int64)
        self(lo)
        self(hi - 1)
        return self._values[lo - self.n_start:hi - self.n_start]


class OverrideOracle(FunctionOracle):
    """Wrap an oracle with point overrides; used for fault injection."""

    def __init__(self, base: FunctionOracle, overrides: dict[int, int]):
        self.base = base
        self.overrides = dict(overrides)
        self.n_start = base.n_start
        self.max_arg = base.max_arg
        self.kind = base.kind + "+mutant"

    def _eval(self, n):
        if n in self.overrides:
            return self.overrides[n]
        return self.base._eval(n)

    def eval_range(self, lo, hi):
        vals = np.array(self.base.eval_range(lo, hi))
        for n, v in self.overrides.items():
            if lo <= n < hi:
                vals[n - lo] = v
        return vals

    def default_search_limit(self, n):
        return self.base.default_search_limit(n)


def make_sqrt_like(d: int) -> SqrtLikeOracle:
    return SqrtLikeOracle(d)


def make_table_oracle(values, n_start: int = 0) -> TableOracle:
    return TableOracle(values, n_start=n_start)


def load_table_oracle(path, n_start: int = 0) -> TableOracle:
    """Read a one-value-per-line text file into a table oracle."""
    with open(path) as fh:
        values = [int(line) for line in fh if line.strip()]
    return TableOracle(values, n_start=n_start)


@dataclass(frozen=True)
class ClassParams:
    """The triple (k, d, n0) with its derived constants.

    Derived values are recomputed on access so they can never go stale:
    c = 5d, n1 = 2 + 5d + n0^2, and the domain threshold x0 is the
    pseudo-inverse of 2 + 4d + n0^2 + k for a concrete oracle.
    """

    k: int
    d: int
    n0: int

    def __post_init__(self):
        if self.k < 0 or self.n0 < 0:
            raise DomainError("k and n0 must be nonnegative")
        if self.d < 1:
            raise DomainError("d must be a positive integer")

    @property
    def c(self) -> int:
        return 5 * self.d

    @property
    def n1(self) -> int:
        return 2 + 5 * self.d + self.n0**2

    @property
    def x0_level(self) -> int:
        return 2 + 4 * self.d + self.n0**2 + self.k

    def x0(self, f: FunctionOracle, search_limit: int | None = None) -> int:
        return pseudo_inverse(f, self.x0_level, search_limit)

    def as_dict(self):
        return {"k": self.k, "d": self.d, "n0": self.n0}

    def label(self):
        return f"({self.k},{self.d},{self.n0})"


def prime_quotient_search_hint(n: int) -> int:
    """An index m certified (via the lower prime-size estimate) to have
    quotient value > n, usable as an a-priori pseudo-inverse search bound."""
    goal = n + 1  # want prime(m)/m >= n+1, hence quotient > n
    g = goal + float(intervals.LOWER_CONST)
    x = math.exp(min(g, 42.0))  # seed; cap keeps exp() finite
    for _ in range(8):
        x = math.exp(min(g, 42.0) - math.log(math.log(x)))
    m = int(x) + 2
    while intervals.decide_ge(m, intervals.LOWER_CONST, goal * m) is not True:
        m = m + m // 64 + 1
    return m


def _first_exceeding(f: FunctionOracle, level: int, start: int,
                     limit: int) -> int | None:
    """Least j in [start, limit] with f(j) > level, or None."""
    j = start
    step = 1 << 12  # grow toward _CHUNK so small targets stay cheap
    while j <= limit:
        hi = min(j + step, limit + 1)
        vals = f.eval_range(j, hi)
        hits = vals > level
        if hits.any():
            return j + int(np.argmax(hits))
        j = hi
        step = min(step * 8, _CHUNK)
    return None


def pseudo_inverse(f: FunctionOracle, n: int,
                   search_limit: int | None = None) -> int:
    """Least m with f(m+1) > n.

    Every value j in [n_start, m] then satisfies f(j) <= n, which the
    forward scan guarantees by construction; the defining inequality is
    re-asserted on the returned value.  Raises SearchExhaustedError when no
    witness exists below the search limit.
    """
    limit = search_limit if search_limit is not None \
        else f.default_search_limit(n)
    if limit is None:
        limit = DEFAULT_SEARCH_LIMIT
    if f.max_arg is not None:
        limit = min(limit, f.max_arg)
    m = f.exact_inverse(n)
    if m is not None:
        if m + 1 > limit:
            raise SearchExhaustedError(
                f"{f.kind}: no m <= {limit} with f(m+1) > {n}",
                limit=limit, at=n)
        # re-check the defining inequalities instead of trusting the
        # closed form blindly
        assert f(m + 1) > n and (m < max(f.n_start, 1) or f(m) <= n)
        return m
    j = _first_exceeding(f, n, max(f.n_start, 1), limit)
    if j is None:
        raise SearchExhaustedError(
            f"{f.kind}: no m <= {limit} with f(m+1) > {n}",
            limit=limit, at=n)
    m = j - 1
    assert f(m + 1) > n
    return m


def inverse_sequence(f: FunctionOracle, n_lo: int, n_hi: int,
                     search_limit: int | None = None) -> np.ndarray:
    """Vector of pseudo-inverses for all levels n_lo..n_hi (inclusive).

    One forward pass over the oracle: the running prefix maximum of f is
    monotone, so every level's first crossing falls out of a searchsorted.
    """
    limit = search_limit if search_limit is not None \
        else f.default_search_limit(n_hi)
    if limit is None:
        limit = DEFAULT_SEARCH_LIMIT
    if f.max_arg is not None:
        limit = min(limit, f.max_arg)
    out = np.empty(n_hi - n_lo + 1, dtype=np.int64)
    level = n_lo  # next level still to resolve
    running = -1
    j = max(f.n_start, 1)  # the defining scan evaluates f(m+1), m >= 0
    while j <= limit and level <= n_hi:
        hi = min(j + _CHUNK, limit + 1)
        vals = f.eval_range(j, hi)
        pm = np.maximum.accumulate(vals)
        np.maximum(pm, running, out=pm)
        top = int(pm[-1])
        while level <= n_hi and level < top:
            # first index with prefix max > level
            pos = int(np.searchsorted(pm, level, side="right"))
            out[level - n_lo] = j + pos - 1
            level += 1
        running = top
        j = hi
    if level <= n_hi:
        raise SearchExhaustedError(
            f"{f.kind}: inverse of {level} not found below {limit}",
            limit=limit, at=level)
    return out


def check_k_almost_increasing(f: FunctionOracle, k: int,
                              range_end: int) -> VerificationReport:
    """Verify f(y) - f(x) >= -k on n_start <= x <= y <= range_end.

    Linear-time via the suffix-minimum kernel; the report always carries
    the worst (x, y) pair.
    """
    with timer() as t:
        vals = f.eval_range(f.n_start, range_end + 1)
        drop, i, j = _kernels.max_drop(vals)
        x, y = f.n_start + i, f.n_start + j
        worst = {"x": x, "y": y, "f_x": int(vals[i]), "f_y": int(vals[j]),
                 "drop": drop}
    return VerificationReport(
        check="almost-increasing", anchor="bounded-descent", oracle=f.kind,
        params={"k": k},
        ranges={"x_lo": f.n_start, "x_hi": range_end},
        result=PASS if drop <= k else FAIL,
        witness=None if drop <= k else worst,
        runtime_ms=t.ms, details={"worst": worst})


def check_linear_difference(f: FunctionOracle, d: int, n0: int, n_max: int,
                            search_limit: int | None = None,
                            ) -> VerificationReport:
    """Verify inv(n+1) - inv(n) > n/d for n0 <= n < n_max.

    The comparison is exact: d * (inv(n+1) - inv(n)) > n in integers.
    """
    with timer() as t:
        try:
            invs = inverse_sequence(f, n0, n_max, search_limit)
        except SearchExhaustedError as e:
            return VerificationReport(
                check="linear-difference", anchor="inverse-gap",
                oracle=f.kind, params={"d": d, "n0": n0},
                ranges={"n_lo": n0, "n_hi": n_max},
                result="inconclusive", runtime_ms=0,
                details={"unresolved_n": e.at, "search_limit": e.limit})
        ns = np.arange(n0, n_max, dtype=np.int64)
        ok = d * np.diff(invs) > ns
        good = bool(ok.all())
        witness = None
        if not good:
            i = int(np.argmin(ok))
            witness = {"n": int(ns[i]), "inv_n": int(invs[i]),
                       "inv_n1": int(invs[i + 1]), "d": d}
    return VerificationReport(
        check="linear-difference", anchor="inverse-gap", oracle=f.kind,
        params={"d": d, "n0": n0}, ranges={"n_lo": n0, "n_hi": n_max},
        result=PASS if good else FAIL, witness=witness, runtime_ms=t.ms,
        details={"inv_first": int(invs[0]), "inv_last": int(invs[-1])})


def class_check(f: FunctionOracle, params: ClassParams, range_end: int,
                n_max: int, search_limit: int | None = None,
                ) -> VerificationReport:
    """Empirical class membership: both defining conditions on finite ranges.

    A pass asserts membership over the checked ranges only, which the
    report says explicitly; it is evidence, not a proof.
    """
    with timer() as t:
        parts = [
            check_k_almost_increasing(f, params.k, range_end),
            check_linear_difference(f, params.d, params.n0, n_max,
                                    search_limit),
        ]
    rep = merge("class-check", "class-membership", f.kind, parts,
                params=params.as_dict(),
                ranges={"range_end": range_end, "n_max": n_max})
    rep.runtime_ms = t.ms
    rep.details["scope"] = ("empirical membership over the checked ranges "
                            "only; not a proof beyond them")
    return rep
