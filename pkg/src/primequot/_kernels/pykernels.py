"""Pure numpy fallback for the hot kernels.

Same signatures as the compiled module; selected at import time when the
extension is unavailable.
"""

import numpy as np


def mark_composites(flags, lo, base_primes):
    """Clear composite positions in ``flags`` covering [lo, lo+len(flags)).

    ``flags[i]`` stands for the integer ``lo + i`` and must start true.
    ``base_primes`` must contain every prime up to sqrt(lo + len(flags)).
    """
    hi = lo + len(flags)
    for p in base_primes:
        p = int(p)
        if p * p >= hi:
            break
        start = p * p
        if start < lo:
            start = ((lo + p - 1) // p) * p
        flags[start - lo::p] = False


def max_drop(values):
    """Worst pair (i <= j) maximizing values[i] - values[j].

    Returns ``(drop, i, j)``.  A sequence is k-almost increasing on the
    window exactly when the returned drop is <= k.
    """
    values = np.asarray(values)
    suffix_min = np.minimum.accumulate(values[::-1])[::-1]
    drops = values - suffix_min
    i = int(np.argmax(drops))
    j = i + int(np.argmin(values[i:]))
    return int(drops[i]), i, j
