import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from primequot._kernels import max_drop, pykernels
from primequot.errors import (DomainError, RangeExhaustedError,
                              SearchExhaustedError)
from primequot.oracles import (ClassParams, OverrideOracle, class_check,
                               check_k_almost_increasing,
                               check_linear_difference, inverse_sequence,
                               make_sqrt_like, make_table_oracle,
                               pseudo_inverse)


def test_sqrt_like_values(sqrt1):
    assert sqrt1(8) == 4
    assert sqrt1(7) == 3
    assert pseudo_inverse(sqrt1, 7) == 31


def test_sqrt_like_inverse_closed_form(sqrt1):
    # for d=1: inv(n) = ceil((n+1)^2 / 2) - 1
    for n in range(0, 1000):
        assert pseudo_inverse(sqrt1, n) == -((n + 1) ** 2 // -2) - 1


def test_sqrt_like_inverse_matches_forward_scan():
    # the closed form must agree with a plain forward scan
    from primequot.oracles import _first_exceeding
    for d in (1, 2, 3):
        f = make_sqrt_like(d)
        for n in range(0, 120):
            j = _first_exceeding(f, n, 1, f.default_search_limit(n))
            assert pseudo_inverse(f, n) == j - 1


def test_sqrt_like_range_matches_scalar():
    for d in (1, 2, 3, 7):
        f = make_sqrt_like(d)
        got = f.eval_range(0, 5000)
        assert np.array_equal(got, [f(x) for x in range(5000)])
        assert np.array_equal(got, [math.isqrt(2 * x // d)
                                    for x in range(5000)])


def test_prime_pseudo_inverse(prime_oracle):
    assert pseudo_inverse(prime_oracle, 2) == 0  # f(1) = 3 > 2
    assert pseudo_inverse(prime_oracle, 11) >= 7022


def test_pseudo_inverse_contract(sqrt1, prime_oracle):
    for f, levels in ((sqrt1, range(0, 60)), (prime_oracle, range(2, 12))):
        for n in levels:
            m = pseudo_inverse(f, n)
            assert f(m + 1) > n
            lo = max(f.n_start, 1)
            if m >= lo:
                assert (f.eval_range(lo, m + 1) <= n).all()


def test_inverse_sequence_matches_pointwise(sqrt1):
    seq = inverse_sequence(sqrt1, 3, 40)
    assert [int(v) for v in seq] == [pseudo_inverse(sqrt1, n)
                                     for n in range(3, 41)]


def test_table_oracle_fails_loudly_beyond_range():
    f = make_table_oracle([0, 1, 1, 2])
    assert f(3) == 2
    with pytest.raises(RangeExhaustedError):
        f(4)
    with pytest.raises(SearchExhaustedError):
        pseudo_inverse(f, 5)


def test_override_oracle(prime_oracle):
    bad = OverrideOracle(prime_oracle, {10: 99})
    assert bad(10) == 99
    assert bad(11) == prime_oracle(11)
    assert bad.kind.endswith("+mutant")
    seg = bad.eval_range(8, 12)
    assert seg[2] == 99


def test_almost_increasing_checks(prime_oracle, sqrt1):
    assert check_k_almost_increasing(prime_oracle, 1, 2 * 10 ** 5).passed
    rep = check_k_almost_increasing(prime_oracle, 0, 100)
    assert rep.result == "fail"
    w = rep.witness
    assert prime_oracle(w["y"]) - prime_oracle(w["x"]) < 0
    assert check_k_almost_increasing(sqrt1, 0, 10 ** 4).passed


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 50), min_size=2, max_size=300))
def test_max_drop_matches_naive(values):
    arr = np.asarray(values, dtype=np.int64)
    drop, i, j = max_drop(arr)
    naive = max(arr[a] - arr[b]
                for a in range(len(arr)) for b in range(a, len(arr)))
    assert drop == naive
    assert i <= j and arr[i] - arr[j] == drop


def test_kernel_backends_agree():
    rng = np.random.default_rng(7)
    arr = rng.integers(0, 100, size=2000, dtype=np.int64)
    assert max_drop(arr) == pykernels.max_drop(arr)


def test_linear_difference_checks(prime_oracle, sqrt1):
    assert check_linear_difference(prime_oracle, 1, 11, 12).passed
    assert check_linear_difference(sqrt1, 1, 1, 10 ** 4).passed
    flat = make_table_oracle([5] * 2000)
    rep = check_linear_difference(flat, 1, 1, 10)
    assert not rep.passed  # constant functions have no pseudo-inverse


def test_class_membership(prime_oracle, sqrt1):
    assert class_check(prime_oracle, ClassParams(1, 1, 11),
                       2 * 10 ** 5, 12).passed
    assert class_check(sqrt1, ClassParams(0, 1, 1), 10 ** 4, 10 ** 3).passed
    f2 = make_sqrt_like(2)
    assert class_check(f2, ClassParams(0, 2, 1), 10 ** 4, 10 ** 3).passed


def test_class_membership_n0_zero_sqrt_like(sqrt1):
    # inv(1) = 1 and inv(0) = 0 give gap 1 > 0/1, so even n0 = 0 passes
    # for the d=1 synthetic member.
    assert class_check(sqrt1, ClassParams(0, 1, 0), 10 ** 3, 100).passed


def test_class_params_derived():
    p = ClassParams(0, 1, 1)
    assert (p.c, p.n1, p.x0_level) == (5, 8, 7)
    assert p.x0(make_sqrt_like(1)) == 31
    p = ClassParams(1, 1, 11)
    assert (p.c, p.n1, p.x0_level) == (5, 128, 128)
    with pytest.raises(DomainError):
        ClassParams(0, 0, 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 200))
def test_pseudo_inverse_definition_property(d, n):
    f = make_sqrt_like(d)
    m = pseudo_inverse(f, n)
    assert f(m + 1) > n and (m == 0 or f(m) <= n)
