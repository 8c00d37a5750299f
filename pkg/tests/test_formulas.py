import random

import pytest

from primequot.definability import restricted_congruence
from primequot.errors import (DomainError, EvaluationError, ParseError,
                              UnboundedHintError)
from primequot.formulas import (And, Eq, Evaluator, Exists, FApp, Formula,
                                FunctionalFInverse, One, Or, SearchTo,
                                SquareValue, Sum, Unbounded, Var,
                                apply_hint_specs, collect_hint_specs, conj,
                                eval_formula, eval_term, free_vars, le, lt,
                                numeral, parse, parse_formula, parse_term,
                                substitute, times, to_text)
from primequot.oracles import make_sqrt_like


# -- term evaluation -------------------------------------------------------------

def test_eval_term_basics(prime_oracle, sqrt1):
    assert eval_term(Sum(One(), One()), {}, sqrt1) == 2
    assert eval_term(FApp(Var("x")), {"x": 4}, prime_oracle) == 8  # 11 - 3
    assert eval_term(FApp(Var("x")), {"x": 8}, sqrt1) == 32


def test_eval_term_domain_error(prime_oracle):
    with pytest.raises(EvaluationError) as e:
        eval_term(FApp(Var("x")), {"x": 0}, prime_oracle)
    assert "0" in str(e.value)


def test_numerals():
    assert eval_term(numeral(7), {}, make_sqrt_like(1)) == 7
    assert to_text(numeral(3)) == "((1 + 1) + 1)"
    with pytest.raises(DomainError):
        numeral(0)
    t = times(3, Var("n"))
    assert eval_term(t, {"n": 5}, make_sqrt_like(1)) == 15


# -- formula evaluation ----------------------------------------------------------

def test_commutativity_instances(sqrt1):
    phi = Eq(Sum(Var("x"), One()), Sum(One(), Var("x")))
    for x in range(20):
        assert eval_formula(phi, {"x": x}, sqrt1)


def test_restricted_congruence_values(sqrt1):
    phi = restricted_congruence(numeral(7), numeral(1), numeral(3), 2)
    assert eval_formula(phi, {}, sqrt1)  # 7 = 1 + 3 + 3
    phi = restricted_congruence(numeral(1), numeral(7), numeral(3), 1)
    assert not eval_formula(phi, {}, sqrt1)


def test_comparison_desugaring(sqrt1):
    assert eval_formula(le(Var("y"), Var("x"), "u"), {"x": 5, "y": 5}, sqrt1)
    assert not eval_formula(lt(Var("y"), Var("x"), "u"),
                            {"x": 5, "y": 5}, sqrt1)
    assert eval_formula(lt(Var("y"), Var("x"), "u"), {"x": 5, "y": 4}, sqrt1)


def test_unbounded_hint_refused(sqrt1):
    phi = Exists("u", Unbounded(), Eq(Var("u"), Var("u")))
    with pytest.raises(UnboundedHintError):
        eval_formula(phi, {}, sqrt1)


def test_functional_inverse_hint_matches_search(sqrt1):
    # exists x with f(x) = t, via inverse bracketing vs. plain search
    target = numeral(9)
    hinted = Exists("x", FunctionalFInverse(target, 0),
                    Eq(FApp(Var("x")), times(9, Var("x"))))
    assert eval_formula(hinted, {}, sqrt1)


def test_square_value_hint(sqrt1):
    phi = Exists("q", SquareValue(5, Var("n")),
                 Eq(Var("q"), times(5, times(8, Var("n")))))
    # q = 5n^2 equals 40n only at n = 8
    assert eval_formula(phi, {"n": 8}, sqrt1)
    assert not eval_formula(phi, {"n": 9}, sqrt1)


# -- parse / print ---------------------------------------------------------------

def test_parse_lemma_style_disjunct():
    phi = parse_formula("(y + F(x)) = (F((x + 1)) + ((x + 1) + (x + 1)))")
    assert isinstance(phi, Eq)
    assert to_text(phi) == "((y + F(x)) = (F((x + 1)) + ((x + 1) + (x + 1))))"


def test_parse_exists_sugar(sqrt1):
    phi = parse_formula("exists u . ((y + u) = x)")
    assert isinstance(phi.hint, Unbounded)
    phi = parse_formula("exists u <= x . ((y + u) = x)")
    assert eval_formula(phi, {"x": 5, "y": 3}, sqrt1)
    assert not eval_formula(phi, {"x": 3, "y": 5}, sqrt1)


def test_parse_error_location():
    with pytest.raises(ParseError) as e:
        parse_formula("(x + ) = y")
    assert e.value.line == 1 and e.value.column == 6
    assert e.value.expected


def test_parse_rejects_garbage():
    for bad in ("", "x +", "exists . x = x", "(x = y) &", "F(x"):
        with pytest.raises(ParseError):
            parse(bad)


# -- random AST round-trips ------------------------------------------------------

def random_term(rng, names, depth):
    if depth == 0:
        return rng.choice([One()] + [Var(n) for n in names])
    kind = rng.randrange(4)
    if kind == 0:
        return One()
    if kind == 1:
        return Var(rng.choice(names))
    if kind == 2:
        return Sum(random_term(rng, names, depth - 1),
                   random_term(rng, names, depth - 1))
    return FApp(random_term(rng, names, depth - 1))


def random_formula(rng, names, depth):
    if depth == 0 or rng.random() < 0.3:
        return Eq(random_term(rng, names, 2), random_term(rng, names, 2))
    kind = rng.randrange(3)
    if kind == 0:
        return And(random_formula(rng, names, depth - 1),
                   random_formula(rng, names, depth - 1))
    if kind == 1:
        return Or(random_formula(rng, names, depth - 1),
                  random_formula(rng, names, depth - 1))
    var = rng.choice(["u", "v", "w"])
    hint = (SearchTo(random_term(rng, names, 1)) if rng.random() < 0.7
            else Unbounded())
    return Exists(var, hint, random_formula(rng, names + [var], depth - 1))


def test_round_trip_1000_random_asts():
    rng = random.Random(20260826)
    for _ in range(1000):
        phi = random_formula(rng, ["x", "y"], 4)
        assert parse_formula(to_text(phi)) == phi


def test_round_trip_terms():
    rng = random.Random(5)
    for _ in range(300):
        t = random_term(rng, ["x", "y", "z"], 4)
        assert parse_term(to_text(t)) == t


# -- semantics properties --------------------------------------------------------

def naive_eval(phi, a, f, bound_cap=None):
    """Reference evaluator: direct recursion, exhaustive quantifier scan."""
    ev = Evaluator(f)
    if isinstance(phi, Eq):
        return (ev.eval_term(phi.left, a) == ev.eval_term(phi.right, a))
    if isinstance(phi, And):
        return naive_eval(phi.left, a, f) and naive_eval(phi.right, a, f)
    if isinstance(phi, Or):
        return naive_eval(phi.left, a, f) or naive_eval(phi.right, a, f)
    if isinstance(phi, Exists):
        bound = ev.eval_term(phi.hint.bound, a)
        return any(naive_eval(phi.body, {**a, phi.var: w}, f)
                   for w in range(bound + 1))
    raise TypeError


def only_search_hints(phi):
    if isinstance(phi, (And, Or)):
        return only_search_hints(phi.left) and only_search_hints(phi.right)
    if isinstance(phi, Exists):
        return isinstance(phi.hint, SearchTo) and only_search_hints(phi.body)
    return True


def test_hinted_evaluation_equals_exhaustive_200(sqrt1):
    rng = random.Random(99)
    checked = 0
    while checked < 200:
        phi = random_formula(rng, ["x", "y"], 3)
        if not only_search_hints(phi):
            continue
        a = {"x": rng.randrange(8), "y": rng.randrange(8)}
        try:
            fast = eval_formula(phi, a, sqrt1)
            slow = naive_eval(phi, a, sqrt1)
        except EvaluationError:
            continue
        assert fast == slow
        checked += 1


def test_compositional_semantics(sqrt1):
    rng = random.Random(123)
    for _ in range(100):
        l = random_formula(rng, ["x"], 2)
        r = random_formula(rng, ["x"], 2)
        if not (only_search_hints(l) and only_search_hints(r)):
            continue
        a = {"x": rng.randrange(6)}
        try:
            vl, vr = eval_formula(l, a, sqrt1), eval_formula(r, a, sqrt1)
            assert eval_formula(And(l, r), a, sqrt1) == (vl and vr)
            assert eval_formula(Or(l, r), a, sqrt1) == (vl or vr)
        except EvaluationError:
            continue


def test_substitution_lemma(sqrt1):
    rng = random.Random(321)
    checked = 0
    while checked < 100:
        phi = random_formula(rng, ["x", "y"], 3)
        if not only_search_hints(phi):
            continue
        t = random_term(rng, ["y"], 2)
        a = {"x": rng.randrange(6), "y": rng.randrange(6)}
        try:
            tv = Evaluator(sqrt1).eval_term(t, a)
            lhs = eval_formula(substitute(phi, {"x": t}), a, sqrt1)
            rhs = eval_formula(phi, {**a, "x": tv}, sqrt1)
        except EvaluationError:
            continue
        assert lhs == rhs
        checked += 1


def test_capture_avoiding_substitution(sqrt1):
    phi = parse_formula("exists u <= x . (((u + 1) + u) = x)")
    out = substitute(phi, {"x": Sum(Var("u"), One())})
    # the bound u must be renamed, not capture the free u we substituted in
    assert "u1" in to_text(out)
    assert free_vars(out) == {"u"}


def test_memoized_and_recording_agree(sqrt1):
    rng = random.Random(777)
    for _ in range(50):
        phi = random_formula(rng, ["x"], 3)
        if not only_search_hints(phi):
            continue
        a = {"x": rng.randrange(6)}
        try:
            plain = Evaluator(sqrt1).eval_formula(phi, a)
            rec = Evaluator(sqrt1, record_witnesses=True).eval_formula(phi, a)
        except EvaluationError:
            continue
        assert plain == rec


def test_hint_envelope_round_trip(sqrt1):
    phi = Exists("x", FunctionalFInverse(times(5, Var("n")), 2),
                 Exists("q", SquareValue(5, Var("n")),
                        Eq(Var("q"), Var("q"))))
    specs = collect_hint_specs(phi)
    stripped = parse_formula(to_text(phi))
    assert apply_hint_specs(stripped, specs) == phi
