"""Structured pass/fail evidence produced by every verification run."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"


@dataclass
class VerificationReport:
    """Outcome of one check over explicit ranges.

    A ``fail`` result always carries a witness that can be re-checked in
    isolation; ``inconclusive`` only arises from interval-arithmetic
    indecision or search exhaustion and is never silently upgraded.
    """

    check: str
    anchor: str
    oracle: str
    params: dict = field(default_factory=dict)
    ranges: dict = field(default_factory=dict)
    result: str = PASS
    witness: dict | None = None
    seed: int | None = None
    runtime_ms: int = 0
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.result not in (PASS, FAIL, INCONCLUSIVE):
            raise ValueError(f"bad result {self.result!r}")
        if self.result == FAIL and self.witness is None:
            raise ValueError("fail reports must carry a witness")

    @property
    def passed(self):
        return self.result == PASS

    def to_dict(self, timing=True):
        d = {
            "check": self.check,
            "anchor": self.anchor,
            "oracle": self.oracle,
            "params": self.params,
            "ranges": self.ranges,
            "result": self.result,
            "seed": self.seed,
            "runtime_ms": self.runtime_ms if timing else 0,
        }
        if self.witness is not None:
            d["witness"] = self.witness
        if self.details:
            d["details"] = self.details
        return d

    def to_json(self, timing=True):
        return json.dumps(self.to_dict(timing=timing), sort_keys=True)


def merge(check, anchor, oracle, parts, **kw):
    """Combine sub-reports: fail dominates, then inconclusive, then pass."""
    result = PASS
    witness = None
    for part in parts:
        if part.result == FAIL and result != FAIL:
            result, witness = FAIL, part.witness
        elif part.result == INCONCLUSIVE and result == PASS:
            result = INCONCLUSIVE
    # nested timings are dropped so serialized reports stay reproducible
    details = {"parts": [p.to_dict(timing=False) for p in parts]}
    return VerificationReport(check=check, anchor=anchor, oracle=oracle,
                              result=result, witness=witness,
                              details=details, **kw)


class timer:
    """Context manager measuring wall time in milliseconds."""

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = int((time.perf_counter() - self.t0) * 1000)
        return False
