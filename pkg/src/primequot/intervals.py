"""Certified comparison of m*log(m) + m*log(log(m)) - C*m against integers.

Two routes share the work:

* a vectorized float64 path whose results are padded by a generous error
  budget (libm log is documented well under 2 ulp; we allow 8), used to
  decide the overwhelming majority of indices quickly;
* a rigorous mpmath interval fallback for anything the float path cannot
  separate.  An interval that still straddles after escalation is reported
  as undecided, never as a pass.

The two bound constants are held as exact scaled integers and only ever
enter computations through outward-rounded enclosures.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

LOWER_CONST = Fraction(10072629, 10**7)
UPPER_CONST = Fraction(9385, 10**4)
LOWER_MIN_M = 2
UPPER_MIN_M = 7022

# multiplier over the documented <2 ulp libm accuracy of log()
_ULP_PAD = 8


def _mpf_to_fraction(x) -> Fraction:
    sign, man, exp, _ = mpmath.mpf(x)._mpf_
    if man == 0:
        return Fraction(0)
    v = Fraction(man, 1) * Fraction(2) ** exp
    return -v if sign else v


@dataclass(frozen=True)
class Enclosure:
    """Exact rational interval guaranteed to contain a real value."""

    lo: Fraction
    hi: Fraction

    def certainly_le(self, n) -> bool:
        return self.hi <= n

    def certainly_ge(self, n) -> bool:
        return self.lo >= n

    def straddles(self, n) -> bool:
        return self.lo < n < self.hi


def _expr_interval(m: int, const: Fraction, prec: int):
    iv = mpmath.iv
    old = iv.prec
    iv.prec = prec
    try:
        mm = iv.mpf(m)
        c = iv.mpf(const.numerator) / iv.mpf(const.denominator)
        val = mm * (iv.log(mm) + iv.log(iv.log(mm)) - c)
    finally:
        iv.prec = old
    return val


def bound_enclosure(m: int, const: Fraction, prec: int = 80) -> Enclosure:
    """Rigorous enclosure of m*log m + m*log log m - const*m."""
    if m < 2:
        raise ValueError("need m >= 2 so that log(log(m)) is defined")
    val = _expr_interval(m, const, prec)
    return Enclosure(_mpf_to_fraction(val.a), _mpf_to_fraction(val.b))


def decide_le(m: int, const: Fraction, n: int, max_prec: int = 320):
    """Is m*(log m + log log m - const) <= n?  True/False/None (undecided)."""
    prec = 80
    while prec <= max_prec:
        e = bound_enclosure(m, const, prec)
        if e.certainly_le(n):
            return True
        if e.lo > n:
            return False
        prec *= 2
    return None


def decide_ge(m: int, const: Fraction, n: int, max_prec: int = 320):
    prec = 80
    while prec <= max_prec:
        e = bound_enclosure(m, const, prec)
        if e.certainly_ge(n):
            return True
        if e.hi < n:
            return False
        prec *= 2
    return None


def bulk_expr_bounds(ms: np.ndarray, const: Fraction):
    """Vectorized padded enclosure of the bound expression for many m.

    Returns float64 arrays (lo, hi).  ms must be exactly representable in
    float64 (always true below 2**53).
    """
    x = ms.astype(np.float64)
    lg = np.log(x)
    llg = np.log(lg)
    c = float(const)
    s = lg + llg - c
    # per-element error: 8 ulp on each log, the Fraction->float rounding of
    # the constant, 1 ulp per addition step, all scaled by x at the end
    s_err = (_ULP_PAD * (np.spacing(np.abs(lg)) + np.spacing(np.abs(llg)))
             + 2 * np.spacing(np.abs(s)) + np.spacing(np.abs(c)))
    expr = x * s
    err = x * s_err + 2 * np.spacing(np.abs(expr))
    return expr - err, expr + err


def bulk_certify_le(ms: np.ndarray, const: Fraction, ns: np.ndarray):
    """Per-element certification of expr(m) <= n.

    Returns (decided_true, decided_false) boolean masks from the fast path;
    elements decided by neither mask need scalar escalation.
    """
    lo, hi = bulk_expr_bounds(ms, const)
    nf = ns.astype(np.float64)  # exact below 2**53
    return hi <= nf, lo > nf


def bulk_certify_ge(ms: np.ndarray, const: Fraction, ns: np.ndarray):
    lo, hi = bulk_expr_bounds(ms, const)
    nf = ns.astype(np.float64)
    return lo >= nf, hi < nf
