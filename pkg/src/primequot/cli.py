"""Command-line entry point: sieving, class checks, verification runs,
formula emission, and formula evaluation, all as reproducible JSON reports.

Exit codes: 0 pass, 1 fail, 2 inconclusive, 64 usage error.  Identical
configuration and seed produce byte-identical JSON (timings are zeroed in
the serialized output).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import definability, verify
from .errors import ParseError, PrimequotError
from .formulas import (Evaluator, apply_hint_specs, collect_hint_specs,
                       parse_formula, to_text)
from .oracles import (ClassParams, PrimeQuotientOracle, class_check,
                      load_table_oracle, make_sqrt_like, pseudo_inverse)
from .primes import PrimeTable, check_estimates_streaming, sieve_upto
from .report import FAIL, INCONCLUSIVE, PASS

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 64

PROFILES = {
    "test": {"sieve_limit": 10 ** 6},
    "desk": {"sieve_limit": 3 * 10 ** 7},
    "large": {"sieve_limit": 10 ** 9},
}


class _Parser(argparse.ArgumentParser):
    """argparse with the conventional 64 exit code for usage errors."""

    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _usage_fail(msg: str):
    print(f"primequot: error: {msg}", file=sys.stderr)
    raise SystemExit(EXIT_USAGE)


def _parse_params(text: str) -> ClassParams:
    try:
        k, d, n0 = (int(p) for p in text.split(","))
        return ClassParams(k, d, n0)
    except (ValueError, PrimequotError) as e:
        _usage_fail(f"bad --params {text!r}: {e}")


def _parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split("..")
        lo, hi = int(lo), int(hi)
        if lo > hi:
            raise ValueError("empty range")
        return lo, hi
    except ValueError as e:
        _usage_fail(f"bad --range {text!r} (want A..B): {e}")


def _parse_assign(text: str) -> dict[str, int]:
    try:
        out = {}
        for pair in text.split(","):
            name, val = pair.split("=")
            out[name.strip()] = int(val)
        return out
    except ValueError as e:
        _usage_fail(f"bad --assign {text!r} (want x=1,y=2): {e}")


def _sieve_limit(args) -> int:
    if getattr(args, "sieve_limit", None):
        return args.sieve_limit
    env = os.environ.get("PRIMEQUOT_SIEVE_LIMIT")
    if env:
        return int(env)
    profile = (getattr(args, "profile", None)
               or os.environ.get("PRIMEQUOT_PROFILE", "desk"))
    if profile not in PROFILES:
        _usage_fail(f"unknown profile {profile!r}")
    return PROFILES[profile]["sieve_limit"]


def _make_oracle(selector: str, args, cache=None):
    """Build (oracle, table-or-None) from a selector string."""
    if selector == "prime":
        limit = _sieve_limit(args)
        if cache and os.path.exists(cache):
            table = PrimeTable.load(cache)
        else:
            table = sieve_upto(limit)
            if cache:
                table.save(cache)
        return PrimeQuotientOracle(table), table
    if selector.startswith("sqrt-like:"):
        return make_sqrt_like(int(selector.split(":", 1)[1])), None
    if selector.startswith("table:"):
        return load_table_oracle(selector.split(":", 1)[1]), None
    _usage_fail(f"unknown oracle {selector!r} "
                "(want prime | sqrt-like:d | table:path)")


def _config_echo(args) -> dict:
    skip = {"func", "out"}
    return {k: v for k, v in sorted(vars(args).items())
            if k not in skip and v is not None}


def _emit_report(report, args) -> int:
    doc = report.to_dict(timing=False)
    doc["config"] = _config_echo(args)
    text = json.dumps(doc, sort_keys=True, indent=2)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return {PASS: EXIT_PASS, FAIL: EXIT_FAIL,
            INCONCLUSIVE: EXIT_INCONCLUSIVE}[report.result]


# -- subcommands -----------------------------------------------------------------

def _cmd_sieve(args) -> int:
    if args.limit < 2:
        _usage_fail("--limit must be at least 2")
    table = sieve_upto(args.limit)
    if args.cache:
        table.save(args.cache)
    print(json.dumps({"limit": args.limit, "count": table.count,
                      "last_prime": table.prime(table.count - 1),
                      "cache": args.cache}, sort_keys=True))
    return EXIT_PASS


def _cmd_check_class(args) -> int:
    params = _parse_params(args.params)
    f, table = _make_oracle(args.oracle, args, cache=args.cache)
    hi = _parse_range(args.range)[1] if args.range else (
        f.max_arg if table is not None else 10 ** 4)
    n_max = args.nmax
    if n_max is None:
        # deepest level whose inverse the oracle can resolve
        if table is not None:
            n_max = int(table.quotients(1, table.count).max()) - 1
        else:
            n_max = 10 ** 4
    rep = class_check(f, params, hi, n_max=n_max,
                      search_limit=args.search_limit)
    return _emit_report(rep, args)


def _cmd_verify(args) -> int:
    check = args.check
    if check == "max-quotient":
        _, table = _make_oracle("prime", args, cache=args.cache)
        rep = verify.verify_max_quotient(table)
    elif check == "drop-bound":
        f, _ = _make_oracle(args.oracle, args, cache=args.cache)
        lo, hi = _parse_range(args.range) if args.range else (1, 2 * 10 ** 5)
        rep = verify.verify_drop_bound(f, hi, tail_bound=args.tail_bound,
                                       k=_parse_params(args.params).k
                                       if args.params else 1)
    elif check == "inverse-gaps":
        if args.stream:
            rep = verify.verify_inverse_gaps_streaming(_sieve_limit(args))
        else:
            _, table = _make_oracle("prime", args, cache=args.cache)
            rep = verify.verify_inverse_gaps(table, n_max=args.nmax)
    elif check == "size-estimates":
        lo, hi = _parse_range(args.range) if args.range \
            else (2, 5 * 10 ** 7)
        rep = check_estimates_streaming(hi, m_lo=lo)
    elif check == "gap-lemma":
        params = _parse_params(args.params)
        f, _ = _make_oracle(args.oracle, args, cache=args.cache)
        rep = verify.verify_inverse_gap_lemma(
            f, params, args.nmax or 10 ** 3,
            search_limit=args.search_limit)
    elif check == "window-variation":
        params = _parse_params(args.params)
        f, _ = _make_oracle(args.oracle, args, cache=args.cache)
        lo, hi = _parse_range(args.range) if args.range else (1, 10 ** 4)
        rep = verify.verify_window_variation(f, params, lo, hi,
                                             seed=args.seed)
    elif check == "extraction":
        params = _parse_params(args.params)
        f, _ = _make_oracle(args.oracle, args, cache=args.cache)
        lo, hi = _parse_range(args.range) if args.range else (1, 10 ** 4)
        x0 = _reachable_x0(f, params, args.search_limit)
        rep = verify.verify_extraction_ingredients(f, params, lo, hi, x0=x0)
    elif check == "relation":
        params = _parse_params(args.params)
        f, _ = _make_oracle(args.oracle, args, cache=args.cache)
        rel, truth, default_range = _relation_setup(args.relation, f, params,
                                                    args.search_limit)
        lo, hi = (_parse_range(args.range) if args.range
                  else default_range)
        if len(rel.inputs) == 1:
            samples = [{rel.inputs[0]: v} for v in range(lo, hi + 1)]
        else:
            samples = [{rel.inputs[0]: a, rel.inputs[1]: b}
                       for a in range(lo, hi + 1)
                       for b in range(lo, hi + 1)]
        rep = verify.verify_defined_relation(
            rel, f, samples, truth, seed=args.seed,
            search_limit=args.search_limit)
    else:
        _usage_fail(f"unknown check id {check!r}")
    return _emit_report(rep, args)


def _reachable_x0(f, params: ClassParams, search_limit):
    try:
        return params.x0(f, search_limit)
    except PrimequotError:
        return None


def _relation_setup(name: str, f, params: ClassParams, search_limit):
    x0 = _reachable_x0(f, params, search_limit)
    if name == "ftilde":
        rel = definability.define_f_tilde(params, x0)
        lo = (x0 or 0) + 1
        return rel, (lambda a: f(a["x"])), (lo, lo + 99)
    if name == "csquare":
        rel = definability.define_c_n_squared(params, x0)
        return rel, (lambda a: params.c * a["n"] ** 2), \
            (params.n1, params.n1 + 50)
    if name == "mult":
        rel = definability.define_multiplication(params, x0)
        return rel, (lambda a: a["a"] * a["b"]), (0, 10)
    _usage_fail(f"unknown relation {name!r} (want ftilde | csquare | mult)")


def _cmd_emit_formula(args) -> int:
    params = _parse_params(args.params)
    if args.oracle:
        f, _ = _make_oracle(args.oracle, args)
    else:
        f = make_sqrt_like(params.d)
    x0 = args.x0 if args.x0 is not None \
        else _reachable_x0(f, params, args.search_limit)
    rel = definability.emit(args.relation, params, x0)
    if args.json:
        doc = {"relation": rel.name, "inputs": list(rel.inputs),
               "output": rel.output, "domain": rel.domain_desc,
               "params": params.as_dict(),
               "text": to_text(rel.formula),
               "hints": collect_hint_specs(rel.formula),
               "metrics": rel.size_metrics()}
        print(json.dumps(doc, sort_keys=True, indent=2))
    else:
        print(to_text(rel.formula))
        print(f"# relation {rel.name}({', '.join(rel.inputs)}; "
              f"{rel.output}) on {rel.domain_desc}", file=sys.stderr)
    return EXIT_PASS


def _cmd_eval(args) -> int:
    with open(args.formula) as fh:
        raw = fh.read()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError:
        doc = None
    try:
        if isinstance(doc, dict) and "text" in doc:
            phi = apply_hint_specs(parse_formula(doc["text"]),
                                   doc.get("hints", {}))
        else:
            phi = parse_formula(raw)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_USAGE
    f, _ = _make_oracle(args.oracle, args)
    assignment = _parse_assign(args.assign) if args.assign else {}
    ev = Evaluator(f, search_limit=args.search_limit,
                   record_witnesses=True)
    try:
        value = ev.eval_formula(phi, assignment)
    except PrimequotError as e:
        print(json.dumps({"error": str(e)}, sort_keys=True))
        return EXIT_INCONCLUSIVE
    print(json.dumps({"value": value, "assignment": assignment,
                      "witnesses": [{"var": v, "value": w}
                                    for v, w in ev.witnesses]},
                     sort_keys=True))
    return EXIT_PASS if value else EXIT_FAIL


# -- wiring ----------------------------------------------------------------------

def _add_common(sp):
    sp.add_argument("--profile", choices=sorted(PROFILES))
    sp.add_argument("--sieve-limit", type=int, dest="sieve_limit")
    sp.add_argument("--cache")
    sp.add_argument("--search-limit", type=int, dest="search_limit")
    sp.add_argument("--seed", type=int, default=2026)
    sp.add_argument("--out")
    sp.add_argument("--jobs", type=int, default=1,
                    help="worker cap (checks here run serially)")


def build_parser() -> _Parser:
    ap = _Parser(prog="primequot",
                 description="prime-quotient verification toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sieve", parents=[], help="build a prime table")
    sp.add_argument("--limit", type=int, required=True)
    sp.add_argument("--cache")
    sp.set_defaults(func=_cmd_sieve)

    sp = sub.add_parser("check-class", help="membership in C(k,d,n0)")
    sp.add_argument("--oracle", required=True)
    sp.add_argument("--params", required=True)
    sp.add_argument("--range")
    sp.add_argument("--nmax", type=int)
    _add_common(sp)
    sp.set_defaults(func=_cmd_check_class)

    sp = sub.add_parser("verify", help="run a named verification check")
    sp.add_argument("check", choices=["max-quotient", "drop-bound",
                                      "inverse-gaps", "size-estimates",
                                      "gap-lemma", "window-variation",
                                      "extraction", "relation"])
    sp.add_argument("--oracle", default="prime")
    sp.add_argument("--params")
    sp.add_argument("--range")
    sp.add_argument("--nmax", type=int)
    sp.add_argument("--tail-bound", type=int, dest="tail_bound")
    sp.add_argument("--stream", action="store_true")
    sp.add_argument("--relation", choices=["ftilde", "csquare", "mult"])
    _add_common(sp)
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("emit-formula", help="print a defined relation")
    sp.add_argument("relation", choices=["ftilde", "csquare", "mult"])
    sp.add_argument("--params", required=True)
    sp.add_argument("--oracle")
    sp.add_argument("--x0", type=int)
    sp.add_argument("--json", action="store_true",
                    help="full envelope including witness hints")
    _add_common(sp)
    sp.set_defaults(func=_cmd_emit_formula)

    sp = sub.add_parser("eval", help="evaluate a formula file")
    sp.add_argument("--formula", required=True)
    sp.add_argument("--assign")
    sp.add_argument("--oracle", required=True)
    _add_common(sp)
    sp.set_defaults(func=_cmd_eval)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PrimequotError as e:
        print(f"primequot: {e}", file=sys.stderr)
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
