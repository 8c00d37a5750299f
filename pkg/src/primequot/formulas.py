"""AST, text format, and evaluator for existential formulas over {+, 1, F}.

F is interpreted relative to a chosen oracle f as x -> x*f(x).  The formula
language is purely positive-existential: equalities, conjunction,
disjunction, and hinted existential quantifiers.  Comparisons are sugar:
a <= b becomes exists u (a + u = b), and a < b becomes exists u (a+u+1 = b).

Grammar (whitespace insignificant, identifiers [a-z][a-z0-9_]*):

    term    := "1" | ident | "(" term "+" term ")" | "F" "(" term ")"
    formula := "(" term "=" term ")" | "(" formula "&" formula ")"
             | "(" formula "|" formula ")"
             | "exists" ident ["<=" term] "." formula

Witness hints richer than the textual "<= bound" form (inverse-bracket and
squared-value resolution) have no surface syntax; they travel in the JSON
envelope next to the text (see hint_spec / apply_hint_specs).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import (DomainError, EvaluationError, ParseError,
                     RangeExhaustedError, SearchExhaustedError,
                     UnboundedHintError)
from .oracles import FunctionOracle, pseudo_inverse


# -- AST ---------------------------------------------------------------------

class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class One(Term):
    pass


@dataclass(frozen=True)
class Sum(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class FApp(Term):
    arg: Term


class WitnessHint:
    __slots__ = ()


@dataclass(frozen=True)
class SearchTo(WitnessHint):
    """Exhaust witnesses in [0, bound]; bound is a term over outer variables."""
    bound: Term


@dataclass(frozen=True)
class FunctionalFInverse(WitnessHint):
    """Witness satisfies f(witness) = value of target.

    Candidates are the pseudo-inverse bracket (inv(t-1), inv(t+slack)]:
    any x with f(x) = t lies there because x > inv(t-1) by definition of
    the pseudo-inverse and x <= inv(t+slack) by bounded descent (slack = k).
    """
    target: Term
    slack: int


@dataclass(frozen=True)
class SquareValue(WitnessHint):
    """Witness is pinned to coeff * eval(base)^2.

    Sound only for quantifiers whose body is a relation already verified to
    be functional with that value (the square relation emitted by the
    definability layer); the body is still evaluated, so a wrong pin can
    only turn true into false, never false into true for functional bodies.
    """
    coeff: int
    base: Term


@dataclass(frozen=True)
class Unbounded(WitnessHint):
    """No usable bound; the evaluator refuses rather than guessing."""


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    hint: WitnessHint
    body: Formula


# -- constructors ------------------------------------------------------------

def numeral(k: int) -> Term:
    """k as a left-leaning sum of k ones; the vocabulary has no zero."""
    if k < 1:
        raise DomainError("numerals exist for k >= 1 only")
    t: Term = One()
    for _ in range(k - 1):
        t = Sum(t, One())
    return t


def times(c: int, t: Term) -> Term:
    """c*t as a left-leaning sum of c copies of t (c is a fixed constant)."""
    if c < 1:
        raise DomainError("unrolled multiple needs c >= 1")
    out = t
    for _ in range(c - 1):
        out = Sum(out, t)
    return out


def conj(parts) -> Formula:
    parts = list(parts)
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts) -> Formula:
    parts = list(parts)
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def le(a: Term, b: Term, var: str) -> Formula:
    """a <= b, desugared to exists var (a + var = b)."""
    return Exists(var, SearchTo(b), Eq(Sum(a, Var(var)), b))


def lt(a: Term, b: Term, var: str) -> Formula:
    """a < b, desugared to exists var (a + var + 1 = b)."""
    return Exists(var, SearchTo(b), Eq(Sum(Sum(a, Var(var)), One()), b))


def gt(a: Term, b: Term, var: str) -> Formula:
    return lt(b, a, var)


# -- variables and substitution ----------------------------------------------

def _hint_terms(hint: WitnessHint):
    if isinstance(hint, SearchTo):
        return (hint.bound,)
    if isinstance(hint, FunctionalFInverse):
        return (hint.target,)
    if isinstance(hint, SquareValue):
        return (hint.base,)
    return ()


def _children(node):
    if isinstance(node, (Sum, Eq, And, Or)):
        return (node.left, node.right)
    if isinstance(node, FApp):
        return (node.arg,)
    if isinstance(node, Exists):
        return _hint_terms(node.hint) + (node.body,)
    if isinstance(node, (Var, One)):
        return ()
    raise TypeError(f"not an AST node: {node!r}")


def free_vars(node) -> frozenset[str]:
    # iterative post-order: unrolled numerals make ASTs arbitrarily deep,
    # so no walker in this module may recurse along the tree
    memo: dict[int, frozenset[str]] = {}
    stack = [(node, False)]
    while stack:
        n, ready = stack.pop()
        if id(n) in memo:
            continue
        if isinstance(n, Var):
            memo[id(n)] = frozenset((n.name,))
        elif isinstance(n, One):
            memo[id(n)] = frozenset()
        elif not ready:
            stack.append((n, True))
            stack.extend((c, False) for c in _children(n))
        else:
            parts = [memo[id(c)] for c in _children(n)]
            if isinstance(n, Exists):
                # hint terms live in the enclosing scope: the bound
                # variable is not visible to them
                parts[-1] = parts[-1] - {n.var}
            memo[id(n)] = frozenset().union(*parts) if parts \
                else frozenset()
    return memo[id(node)]


def all_var_names(node) -> set[str]:
    """Every variable name occurring anywhere, bound or free."""
    out: set[str] = set()
    stack = [node]
    seen: set[int] = set()
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        if isinstance(n, Var):
            out.add(n.name)
        elif isinstance(n, Exists):
            out.add(n.var)
        stack.extend(_children(n))
    return out


def fresh_name(base: str, avoid) -> str:
    if base not in avoid:
        return base
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


def _subst_hint(hint, mapping):
    if isinstance(hint, SearchTo):
        return SearchTo(substitute(hint.bound, mapping))
    if isinstance(hint, FunctionalFInverse):
        return FunctionalFInverse(substitute(hint.target, mapping),
                                  hint.slack)
    if isinstance(hint, SquareValue):
        return SquareValue(hint.coeff, substitute(hint.base, mapping))
    return hint


def _substitute_term(t: Term, mapping: dict[str, Term]) -> Term:
    # iterative rebuild: term spines (unrolled numerals) can be very deep
    memo: dict[int, Term] = {}
    stack = [(t, False)]
    while stack:
        n, ready = stack.pop()
        if id(n) in memo:
            continue
        if isinstance(n, Var):
            memo[id(n)] = mapping.get(n.name, n)
        elif isinstance(n, One):
            memo[id(n)] = n
        elif not ready:
            stack.append((n, True))
            stack.extend((c, False) for c in _children(n))
        elif isinstance(n, Sum):
            memo[id(n)] = Sum(memo[id(n.left)], memo[id(n.right)])
        else:
            memo[id(n)] = FApp(memo[id(n.arg)])
    return memo[id(t)]


def substitute(node, mapping: dict[str, Term]):
    """Capture-avoiding substitution of terms for free variables."""
    if not mapping:
        return node
    if isinstance(node, (Var, One, Sum, FApp)):
        return _substitute_term(node, mapping)
    if isinstance(node, Eq):
        return Eq(_substitute_term(node.left, mapping),
                  _substitute_term(node.right, mapping))
    if isinstance(node, (And, Or)):
        return type(node)(substitute(node.left, mapping),
                          substitute(node.right, mapping))
    if isinstance(node, Exists):
        hint = _subst_hint(node.hint, mapping)
        inner = {k: v for k, v in mapping.items() if k != node.var}
        incoming = set().union(*[free_vars(v) for v in inner.values()]) \
            if inner else set()
        var = node.var
        body = node.body
        if var in incoming:
            var = fresh_name(var, incoming | free_vars(body))
            body = substitute(body, {node.var: Var(var)})
        return Exists(var, hint, substitute(body, inner))
    raise TypeError(f"not an AST node: {node!r}")


def node_count(node) -> int:
    total = 0
    stack = [node]
    while stack:
        n = stack.pop()
        total += 1
        stack.extend(_children(n))
    return total


# -- evaluation ---------------------------------------------------------------

class Evaluator:
    """Evaluates terms and formulas over <N, +, 1, x -> x*f(x)>.

    Exists nodes are resolved through their witness hints; an Unbounded
    hint is refused.  Results of closed sub-evaluations of quantifiers are
    memoized per (node, relevant assignment) because the definability
    layer instantiates the same relation at many points.
    """

    def __init__(self, oracle: FunctionOracle, search_limit: int | None = None,
                 record_witnesses: bool = False):
        self.oracle = oracle
        self.search_limit = search_limit
        self.record = record_witnesses
        self.witnesses: list[tuple[str, int]] = []
        self._free: dict[int, tuple] = {}   # id -> (node, names)
        self._cache: dict[tuple, bool] = {}
        self._inv_cache: dict[int, int] = {}

    # terms

    def eval_term(self, t: Term, a: dict[str, int], path=()) -> int:
        if isinstance(t, Var):
            try:
                return a[t.name]
            except KeyError:
                raise EvaluationError(
                    f"unassigned variable {t.name!r}", path) from None
        if isinstance(t, One):
            return 1
        if isinstance(t, Sum):
            # walk the addition spine iteratively: unrolled numerals can
            # be far deeper than the interpreter stack allows
            total = 0
            spine = [t.right, t.left]
            while spine:
                n = spine.pop()
                if isinstance(n, Sum):
                    spine.append(n.right)
                    spine.append(n.left)
                else:
                    total += self.eval_term(n, a, path)
            return total
        if isinstance(t, FApp):
            v = self.eval_term(t.arg, a, path)
            try:
                w = self.oracle(v)
            except (DomainError, RangeExhaustedError) as e:
                raise EvaluationError(
                    f"F-argument {v} not evaluable by {self.oracle.kind}: "
                    f"{e}", path) from e
            return v * w
        raise TypeError(f"not a term: {t!r}")

    # formulas

    def eval_formula(self, phi: Formula, a: dict[str, int], path=()) -> bool:
        if isinstance(phi, Eq):
            return (self.eval_term(phi.left, a, path)
                    == self.eval_term(phi.right, a, path))
        if isinstance(phi, And):
            return (self.eval_formula(phi.left, a, path + ("and-l",))
                    and self.eval_formula(phi.right, a, path + ("and-r",)))
        if isinstance(phi, Or):
            return (self.eval_formula(phi.left, a, path + ("or-l",))
                    or self.eval_formula(phi.right, a, path + ("or-r",)))
        if isinstance(phi, Exists):
            return self._eval_exists(phi, a, path)
        raise TypeError(f"not a formula: {phi!r}")

    def _freevars_of(self, node):
        key = id(node)
        hit = self._free.get(key)
        if hit is None:
            hit = (node, tuple(sorted(free_vars(node))))
            self._free[key] = hit
        return hit[1]

    def _eval_exists(self, phi: Exists, a, path) -> bool:
        cache_key = None
        if not self.record:
            names = self._freevars_of(phi)
            cache_key = (id(phi), tuple(a[n] for n in names))
            hit = self._cache.get(cache_key)
            if hit is not None:
                return hit
        result = False
        qpath = path + (f"exists {phi.var}",)
        solved = self._solve_search_eq(phi, a, qpath)
        if solved is not None:
            witnesses = solved
        else:
            witnesses = self._candidates(phi, a, qpath)
        for w in witnesses:
            inner = dict(a)
            inner[phi.var] = w
            if self.eval_formula(phi.body, inner, qpath):
                if self.record:
                    self.witnesses.append((phi.var, w))
                result = True
                break
        if cache_key is not None:
            self._cache[cache_key] = result
        return result

    def _solve_search_eq(self, phi: Exists, a, path):
        """Closed-form witness set for the frequent shape
        exists u <= B . (s = t) with both sides linear in u.

        Equivalent to scanning 0..B but O(|body|); returns None when the
        shape does not apply, otherwise the (possibly empty) witness list.
        """
        if not isinstance(phi.hint, SearchTo) or not isinstance(phi.body, Eq):
            return None
        left = self.linear_parts(phi.body.left, phi.var, a, path)
        right = self.linear_parts(phi.body.right, phi.var, a, path)
        if left is None or right is None:
            return None
        (kl, cl), (kr, cr) = left, right
        bound = self.eval_term(phi.hint.bound, a, path)
        if kl == kr:
            return [0] if cl == cr and bound >= 0 else []
        num, den = cr - cl, kl - kr
        if num % den == 0 and 0 <= num // den <= bound:
            return [num // den]
        return []

    def linear_parts(self, t: Term, var: str, a, path=()):
        """Write t as coeff*var + const under assignment a, or None when
        var occurs under F (the term is then not linear in var)."""
        if isinstance(t, Var):
            return (1, 0) if t.name == var else (0, self.eval_term(t, a, path))
        if isinstance(t, One):
            return (0, 1)
        if isinstance(t, Sum):
            coeff = const = 0
            spine = [t.right, t.left]
            while spine:
                n = spine.pop()
                if isinstance(n, Sum):
                    spine.append(n.right)
                    spine.append(n.left)
                    continue
                part = self.linear_parts(n, var, a, path)
                if part is None:
                    return None
                coeff += part[0]
                const += part[1]
            return (coeff, const)
        if isinstance(t, FApp):
            if var in self._freevars_of(t):
                return None
            return (0, self.eval_term(t, a, path))
        raise TypeError(f"not a term: {t!r}")

    def _inverse(self, n: int) -> int:
        hit = self._inv_cache.get(n)
        if hit is None:
            hit = pseudo_inverse(self.oracle, n, self.search_limit)
            self._inv_cache[n] = hit
        return hit

    def _candidates(self, phi: Exists, a, path):
        hint = phi.hint
        if isinstance(hint, SearchTo):
            return range(self.eval_term(hint.bound, a, path) + 1)
        if isinstance(hint, FunctionalFInverse):
            t = self.eval_term(hint.target, a, path)
            if t < 1:
                raise EvaluationError(
                    f"inverse-bracket hint needs target >= 1, got {t}", path)
            low = self._inverse(t - 1)
            high = self._inverse(t + hint.slack)
            return range(low + 1, high + 1)
        if isinstance(hint, SquareValue):
            base = self.eval_term(hint.base, a, path)
            return (hint.coeff * base * base,)
        raise UnboundedHintError(
            f"existential {phi.var!r} carries no usable witness hint", path)


def eval_term(t: Term, a: dict[str, int], f: FunctionOracle) -> int:
    return Evaluator(f).eval_term(t, a)


def eval_formula(phi: Formula, a: dict[str, int], f: FunctionOracle,
                 search_limit: int | None = None) -> bool:
    return Evaluator(f, search_limit=search_limit).eval_formula(phi, a)


# -- text format ---------------------------------------------------------------

_INFIX = {Sum: " + ", Eq: " = ", And: " & ", Or: " | "}


def to_text(node) -> str:
    # iterative token emission: str entries on the stack are literal
    # output, AST entries are expanded in place
    out: list[str] = []
    stack: list = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, str):
            out.append(n)
        elif isinstance(n, One):
            out.append("1")
        elif isinstance(n, Var):
            out.append(n.name)
        elif isinstance(n, FApp):
            stack.extend((")", n.arg, "F("))
        elif type(n) in _INFIX:
            stack.extend((")", n.right, _INFIX[type(n)], n.left, "("))
        elif isinstance(n, Exists):
            if isinstance(n.hint, SearchTo):
                stack.extend((n.body, " . ", n.hint.bound,
                              f"exists {n.var} <= "))
            else:
                stack.extend((n.body, f"exists {n.var} . "))
        else:
            raise TypeError(f"not an AST node: {n!r}")
    return "".join(out)


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<le><=)
  | (?P<one>1)
  | (?P<fsym>F)
  | (?P<ident>[a-z][a-z0-9_]*)
  | (?P<lpar>\() | (?P<rpar>\)) | (?P<plus>\+) | (?P<eq>=)
  | (?P<amp>&) | (?P<pipe>\|) | (?P<dot>\.)
""", re.VERBOSE)


def _tokenize(text):
    tokens = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", line, col)
        kind = m.lastgroup
        val = m.group()
        if kind != "ws":
            if kind == "ident" and val == "exists":
                kind = "exists"
            tokens.append((kind, val, line, col))
        for ch in val:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i = m.end()
    tokens.append(("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def error(self, expected):
        kind, val, line, col = self.peek()
        got = val if val else "end of input"
        raise ParseError(f"expected {' or '.join(sorted(expected))}, "
                         f"got {got!r}", line, col, expected)

    def expect(self, kind):
        tok = self.peek()
        if tok[0] != kind:
            self.error({kind})
        self.i += 1
        return tok

    def term(self) -> Term:
        # iterative shift/reduce: paren nesting in unrolled numerals can
        # be far deeper than the interpreter stack allows.  Context stack
        # entries: "fapp" (inside F(...)), "sum" (inside "(", before "+"),
        # ("sum_r", left) (after "+", waiting for the right operand).
        ctx: list = []
        while True:
            kind, val, _, _ = self.peek()
            if kind == "one":
                self.i += 1
                result: Term = One()
            elif kind == "ident":
                self.i += 1
                result = Var(val)
            elif kind == "fsym":
                self.i += 1
                self.expect("lpar")
                ctx.append("fapp")
                continue
            elif kind == "lpar":
                self.i += 1
                ctx.append("sum")
                continue
            else:
                self.error({"one", "ident", "fsym", "lpar"})
            while ctx:
                top = ctx[-1]
                if top == "fapp":
                    self.expect("rpar")
                    result = FApp(result)
                    ctx.pop()
                elif top == "sum":
                    self.expect("plus")
                    ctx[-1] = ("sum_r", result)
                    break
                else:
                    self.expect("rpar")
                    result = Sum(top[1], result)
                    ctx.pop()
            else:
                return result

    def formula(self) -> Formula:
        kind, val, line, col = self.peek()
        if kind == "exists":
            self.i += 1
            _, name, _, _ = self.expect("ident")
            hint: WitnessHint = Unbounded()
            if self.peek()[0] == "le":
                self.i += 1
                hint = SearchTo(self.term())
            self.expect("dot")
            return Exists(name, hint, self.formula())
        if kind == "lpar":
            # the equality reading is tried first: it is iterative, so a
            # deep run of term parentheses never recurses through here
            save = self.i
            self.i += 1
            try:
                left_t = self.term()
                self.expect("eq")
                right_t = self.term()
                self.expect("rpar")
                return Eq(left_t, right_t)
            except ParseError as term_err:
                self.i = save
                self.i += 1
                try:
                    left_f = self.formula()
                    op = self.peek()
                    if op[0] not in ("amp", "pipe"):
                        self.error({"amp", "pipe"})
                    self.i += 1
                    right_f = self.formula()
                    self.expect("rpar")
                    return (And if op[0] == "amp" else Or)(left_f, right_f)
                except ParseError as formula_err:
                    # report whichever attempt got further
                    raise (formula_err
                           if (formula_err.line, formula_err.column)
                           >= (term_err.line, term_err.column)
                           else term_err) from None
        self.error({"lpar", "exists"})


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    try:
        phi = p.formula()
        p.expect("eof")
        return phi
    except ParseError as err:
        # convenience: a bare top-level equality `t = t` without the
        # outer parentheses the grammar asks for
        p = _Parser(text)
        try:
            left = p.term()
            p.expect("eq")
            right = p.term()
            p.expect("eof")
            return Eq(left, right)
        except ParseError as bare_err:
            best = err if (err.line, err.column) >= (bare_err.line,
                                                     bare_err.column) \
                else bare_err
            raise best from None


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.term()
    p.expect("eof")
    return t


def parse(text: str):
    """Parse a formula, falling back to a bare term."""
    try:
        return parse_formula(text)
    except ParseError as fe:
        try:
            return parse_term(text)
        except ParseError:
            raise fe from None


# -- hint envelopes ------------------------------------------------------------

def hint_spec(hint: WitnessHint):
    if isinstance(hint, SearchTo):
        return {"kind": "search", "bound": to_text(hint.bound)}
    if isinstance(hint, FunctionalFInverse):
        return {"kind": "inverse-bracket", "target": to_text(hint.target),
                "slack": hint.slack}
    if isinstance(hint, SquareValue):
        return {"kind": "square", "coeff": hint.coeff,
                "base": to_text(hint.base)}
    return {"kind": "unbounded"}


def _hint_from_spec(spec) -> WitnessHint:
    kind = spec["kind"]
    if kind == "search":
        return SearchTo(parse_term(spec["bound"]))
    if kind == "inverse-bracket":
        return FunctionalFInverse(parse_term(spec["target"]), spec["slack"])
    if kind == "square":
        return SquareValue(spec["coeff"], parse_term(spec["base"]))
    return Unbounded()


def collect_hint_specs(phi) -> dict[str, dict]:
    """Map quantifier paths (dot-joined child indices) to hint specs."""
    out = {}

    def walk(node, path):
        if isinstance(node, (And, Or)):
            walk(node.left, path + (0,))
            walk(node.right, path + (1,))
        elif isinstance(node, Exists):
            out[".".join(map(str, path))] = hint_spec(node.hint)
            walk(node.body, path + (0,))

    walk(phi, ())
    return out


def apply_hint_specs(phi, specs: dict[str, dict]):
    """Rebuild a formula with hints restored from an envelope mapping."""

    def walk(node, path):
        if isinstance(node, (And, Or)):
            return type(node)(walk(node.left, path + (0,)),
                              walk(node.right, path + (1,)))
        if isinstance(node, Exists):
            key = ".".join(map(str, path))
            hint = _hint_from_spec(specs[key]) if key in specs else node.hint
            return Exists(node.var, hint, walk(node.body, path + (0,)))
        return node

    return walk(phi, ())
