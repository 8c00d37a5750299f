"""Explicit existential definitions over {+, 1, F} with sound witness hints.

Three relations are emitted for a parameter triple (k, d, n0):

* quotient extraction R(x, y): y = f(x) for x above the threshold x0,
  recovered from x*f(x) by a restricted congruence modulo x+1;
* scaled square Q(n, y): y = 5d*n^2 for n >= n1 = 2 + 5d + n0^2, recovered
  from the congruence of (x+n)f(x+n) - xf(x) modulo x+n at a witness x
  with f(x) = 5dn;
* product M(a, b, z): z = a*b on all of N^2, obtained by shifting both
  factors into Q's domain and polarizing: with A = a+n1, B = b+n1 and
  c = 5d,  c(A+B)^2 = cA^2 + cB^2 + 2c*ab + 2c*n1*a + 2c*n1*b + 2c*n1^2.

Every constant multiple is unrolled into repeated sums: the formulas
contain nothing beyond +, 1, and F.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DomainError
from .formulas import (And, Eq, Exists, FApp, Formula, FunctionalFInverse,
                       One, Or, SearchTo, SquareValue, Sum, Term, Unbounded,
                       Var, WitnessHint, conj, disj, free_vars, le, lt,
                       node_count, numeral, substitute, times, to_text)
from .formulas import _hint_terms
from .oracles import ClassParams, FunctionOracle, pseudo_inverse

_ALLOWED_NODES = (Var, One, Sum, FApp, Eq, And, Or, Exists)
_ALLOWED_HINTS = (SearchTo, FunctionalFInverse, SquareValue, Unbounded)


@dataclass
class DefinedRelation:
    """A named relation given by a formula, with its domain constraint.

    The formula's free variables are exactly inputs + (output,); on the
    stated domain the relation is functional in its output, which the
    verifier checks empirically.
    """

    name: str
    inputs: tuple[str, ...]
    output: str
    formula: Formula
    params: ClassParams
    domain_desc: str
    domain_threshold: int | None = None  # None: threshold out of reach
    threshold_var: str | None = None
    note: str = ""

    def __post_init__(self):
        expected = set(self.inputs) | {self.output}
        got = set(free_vars(self.formula))
        if got != expected:
            raise ValueError(
                f"{self.name}: free variables {sorted(got)} do not match "
                f"declared roles {sorted(expected)}")
        lint_vocabulary(self.formula)

    def domain_check(self, assignment) -> bool | None:
        """True/False when the domain gate is decidable, None when the
        threshold is out of computational reach."""
        if self.threshold_var is None:
            return True
        if self.domain_threshold is None:
            return None
        return assignment[self.threshold_var] > self.domain_threshold

    def size_metrics(self):
        eqs = quants = 0
        stack = [self.formula]
        while stack:
            node = stack.pop()
            if isinstance(node, Eq):
                eqs += 1
            elif isinstance(node, (And, Or)):
                stack.extend((node.left, node.right))
            elif isinstance(node, Exists):
                quants += 1
                stack.append(node.body)
        return {"nodes": node_count(self.formula), "equalities": eqs,
                "quantifiers": quants}


def lint_vocabulary(node):
    """Reject any AST node outside the {+, 1, F} vocabulary."""
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, (Var, One)):
            continue
        if isinstance(n, (Sum, Eq, And, Or)):
            stack.append(n.left)
            stack.append(n.right)
        elif isinstance(n, FApp):
            stack.append(n.arg)
        elif isinstance(n, Exists):
            if not isinstance(n.hint, _ALLOWED_HINTS):
                raise TypeError(f"unknown hint kind: {n.hint!r}")
            stack.extend(_hint_terms(n.hint))
            stack.append(n.body)
        else:
            raise TypeError(f"node outside the formula vocabulary: {n!r}")


def restricted_congruence(a: Term, b: Term, m: Term, c: int) -> Formula:
    """|a - b| is one of 0, m, 2m, ..., c*m, without multiplication.

    Quantifier-free: the disjunction of the 2(c+1) equalities
    a = b + h*m and b = a + h*m for h = 0..c, multiples unrolled.
    """
    if c < 0:
        raise DomainError("congruence width c must be nonnegative")
    branches = []
    for h in range(c + 1):
        if h == 0:
            branches.append(Or(Eq(a, b), Eq(b, a)))
        else:
            hm = times(h, m)
            branches.append(Or(Eq(a, Sum(b, hm)), Eq(b, Sum(a, hm))))
    return disj(branches)


def _above_threshold(x: Term, threshold: int, var: str) -> Formula:
    # x > threshold; thresholds can be 0, for which there is no numeral
    if threshold == 0:
        return Exists(var, SearchTo(x), Eq(Sum(Var(var), One()), x))
    return lt(numeral(threshold), x, var)


def _extraction_body(params: ClassParams, x0: int | None, x: Term, y: Term,
                     tag: str) -> Formula:
    """The matrix asserting y = f(x): domain gate, y <= x, and the
    restricted congruence of y + xf(x) against (x+1)f(x+1) modulo x+1."""
    parts = []
    if x0 is not None:
        parts.append(_above_threshold(x, x0, f"g{tag}"))
    parts.append(le(y, x, f"u{tag}"))
    succ = Sum(x, One())
    parts.append(restricted_congruence(Sum(y, FApp(x)), FApp(succ), succ,
                                       params.k + params.d))
    return conj(parts)


def define_f_tilde(params: ClassParams, x0: int | None) -> DefinedRelation:
    """R(x, y) holding iff y = f(x), valid for x > x0.

    Pass the concrete x0 = inv(2 + 4d + n0^2 + k) when it is computable;
    pass None to emit the relation without the gate, flagging the domain
    threshold as out of reach (the evaluator then cannot certify the gate).
    """
    return DefinedRelation(
        name="ftilde",
        inputs=("x",), output="y",
        formula=_extraction_body(params, x0, Var("x"), Var("y"), ""),
        params=params,
        domain_desc=(f"x > {x0}" if x0 is not None
                     else f"x > inv({params.x0_level}) (threshold "
                          "unreachable for this oracle)"),
        domain_threshold=x0, threshold_var="x",
        note="recovers f from x*f(x) via a width-(k+d) congruence mod x+1")


def define_c_n_squared(params: ClassParams, x0: int | None) -> DefinedRelation:
    """Q(n, y) holding iff y = 5d*n^2, valid for n >= n1 = 2 + 5d + n0^2.

    Structure: exists x with f(x) = 5d*n (asserted through the extraction
    matrix, witness resolved by inverse bracketing), the restricted
    congruence of y + xf(x) against (x+n)f(x+n) modulo x+n, and y < x+n
    to pin uniqueness (the witness satisfies x + n > 5d*n^2 on the domain).
    """
    c = params.c
    n, y, x = Var("n"), Var("y"), Var("x")
    target = times(c, n)  # 5d*n as a sum of 5d copies of n
    shifted = Sum(x, n)
    body = conj([
        _extraction_body(params, x0, x, target, "q"),
        restricted_congruence(Sum(y, FApp(x)), FApp(shifted), shifted,
                              params.k + params.d),
        lt(y, shifted, "vq"),
    ])
    return DefinedRelation(
        name="csquare",
        inputs=("n",), output="y",
        formula=Exists("x", FunctionalFInverse(target, params.k), body),
        params=params,
        domain_desc=f"n >= {params.n1}",
        domain_threshold=params.n1 - 1, threshold_var="n",
        note="defines n -> 5d*n^2 from the congruence mod x+n at a "
             "witness with f(x) = 5d*n")


def define_multiplication(params: ClassParams,
                          x0: int | None) -> DefinedRelation:
    """M(a, b, z) holding iff z = a*b, total on N^2.

    Both factors are shifted by n1 into Q's domain; the polarization
    identity on squares then pins 2c*z linearly:

        qs = qa + qb + 2c*z + 2c*n1*a + 2c*n1*b + 2c*n1^2

    where qa = c*(a+n1)^2, qb = c*(b+n1)^2, qs = c*(a+b+2*n1)^2 are the
    outputs of Q at the shifted arguments.
    """
    c, n1 = params.c, params.n1
    a, b, z = Var("a"), Var("b"), Var("z")
    big_a = Sum(a, numeral(n1))
    big_b = Sum(b, numeral(n1))
    big_s = Sum(Sum(a, b), numeral(2 * n1))
    square = define_c_n_squared(params, x0)

    def q_at(arg: Term, out: str) -> Formula:
        return substitute(square.formula, {"n": arg, "y": Var(out)})

    balance = Eq(
        Var("qs"),
        Sum(Sum(Sum(Sum(Sum(Var("qa"), Var("qb")),
                        times(2 * c, z)),
                    times(2 * c * n1, a)),
                times(2 * c * n1, b)),
            numeral(2 * c * n1 * n1)))
    body = conj([
        q_at(big_a, "qa"),
        q_at(big_b, "qb"),
        q_at(big_s, "qs"),
        balance,
    ])
    formula = Exists(
        "qa", SquareValue(c, big_a),
        Exists("qb", SquareValue(c, big_b),
               Exists("qs", SquareValue(c, big_s), body)))
    return DefinedRelation(
        name="mult",
        inputs=("a", "b"), output="z",
        formula=formula,
        params=params,
        domain_desc="all of N^2",
        note="shift by n1 + polarization of the square relation")


def witness_bracket(f: FunctionOracle, params: ClassParams, target: int,
                    search_limit: int | None = None) -> tuple[int, int]:
    """Half-open interval (low, high] containing every x with f(x) = target.

    low = inv(target - 1): anything at or below has f <= target - 1 along
    the defining scan.  high = inv(target + k): any x with f(x) = target
    has max_{y<=x} f(y) <= target + k by bounded descent, so x <= high.
    Requires target >= n0 + 1 so the level set is nonempty.
    """
    if target < params.n0 + 1:
        raise DomainError(
            f"witness bracket needs target >= n0+1 = {params.n0 + 1}")
    low = pseudo_inverse(f, target - 1, search_limit)
    high = pseudo_inverse(f, target + params.k, search_limit)
    return low, high


def emit(kind: str, params: ClassParams, x0: int | None) -> DefinedRelation:
    """Dispatch by relation name: ftilde | csquare | mult."""
    builders = {"ftilde": define_f_tilde, "csquare": define_c_n_squared,
                "mult": define_multiplication}
    try:
        return builders[kind](params, x0)
    except KeyError:
        raise DomainError(f"unknown relation kind {kind!r}") from None
