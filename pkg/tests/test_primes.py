import numpy as np
import pytest

from primequot.errors import DomainError, RangeExhaustedError
from primequot.intervals import LOWER_CONST, UPPER_CONST
from primequot.primes import (PrimeTable, check_estimates, iter_prime_segments,
                              nth_prime, prime_quotient, prime_remainder,
                              primes_at_indices, quotient_crossings,
                              rosser_lower, rosser_upper, sieve_upto)


def trial_division_primes(limit):
    out = []
    for n in range(2, limit + 1):
        if all(n % p for p in out if p * p <= n):
            out.append(n)
    return out


def test_sieve_small_cases():
    t = sieve_upto(10)
    assert list(t.primes()) == [2, 3, 5, 7]
    assert t.count == 4
    t = sieve_upto(2)
    assert list(t.primes()) == [2]


def test_sieve_rejects_tiny_limit():
    with pytest.raises(DomainError):
        sieve_upto(1)


def test_sieve_matches_trial_division():
    t = sieve_upto(10 ** 5)
    assert list(t.primes()) == trial_division_primes(10 ** 5)


def test_sieve_millionth_count(table):
    import sympy  # independent prime-counting oracle
    t = sieve_upto(10 ** 6)
    assert t.count == 78498 == sympy.primepi(10 ** 6)


def test_segments_concatenate_to_table(table):
    parts = list(iter_prime_segments(3_000_000, segment_size=1 << 16))
    assert np.array_equal(np.concatenate(parts), table.primes())


def test_nth_prime(table):
    assert nth_prime(table, 0) == 2
    assert nth_prime(table, 4) == 11
    with pytest.raises(RangeExhaustedError):
        nth_prime(table, table.count)


def test_quotient_and_remainder(table):
    assert prime_quotient(table, 1) == 3
    assert prime_remainder(table, 1) == 0
    assert prime_quotient(table, 4) == 2
    assert prime_remainder(table, 4) == 3
    assert prime_quotient(table, 7012) == 10
    for bad in (prime_quotient, prime_remainder):
        with pytest.raises(DomainError):
            bad(table, 0)


def test_division_identity_exhaustive(table):
    n = np.arange(1, table.count, dtype=np.int64)
    p = table.primes(1)
    q = table.quotients(1, table.count)
    assert np.array_equal(n * q + (p % n), p)


def test_cache_round_trip(table, tmp_path):
    path = tmp_path / "primes.bin"
    table.save(path)
    loaded = PrimeTable.load(path)
    assert loaded.limit == table.limit
    assert np.array_equal(loaded.primes(), table.primes())


def test_rosser_enclosures_small(table):
    # m=2: lower-bound expression is far below p_2 = 5
    enc = rosser_lower(2)
    assert enc.hi < 5
    with pytest.raises(DomainError):
        rosser_lower(1)
    with pytest.raises(DomainError):
        rosser_upper(7021)


def test_estimates_lower_only_range_passes(table):
    rep = check_estimates(table, 2, 7000)
    assert rep.passed
    assert rep.details["checked"] == 6999


def test_estimates_upper_violation_at_threshold(table):
    # p_7022 = 70921 exceeds the upper expression (~70918.6): the claimed
    # validity threshold is not where the bound actually starts holding.
    rep = check_estimates(table, 7022, 7022)
    assert rep.result == "fail"
    assert rep.witness == {"m": 7022, "p": 70921}
    enc = rosser_upper(7022)
    assert enc.hi < 70919  # below even the 1-based reading of p_7022


def test_estimates_clean_beyond_violation_band(table):
    # violations stop at m = 8617 under 0-based indexing
    rep = check_estimates(table, 8618, 30000)
    assert rep.passed
    assert rep.details["checked"] == 2 * (30000 - 8618 + 1)


def test_constants_exact():
    from fractions import Fraction
    assert LOWER_CONST == Fraction(10072629, 10 ** 7)
    assert UPPER_CONST == Fraction(9385, 10 ** 4)


def test_quotient_crossings_match_table(table):
    crossings, count = quotient_crossings(3_000_000)
    assert count == table.count
    q = table.quotients(1, table.count)
    for level, first in crossings.items():
        assert q[first - 1] >= level
        assert (q[:first - 1] < level).all()


def test_primes_at_indices(table):
    got = primes_at_indices(3_000_000, [0, 4, 7012, 100000])
    assert got[0] == 2 and got[4] == 11
    assert got[7012] == table.prime(7012)
    with pytest.raises(RangeExhaustedError):
        primes_at_indices(100, [1000])
