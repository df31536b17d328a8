import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridsat.boolean_clones import AND, AND_NOT, ID, IMPLIES, NOT, ONE, OR, ZERO, BoolFun, CloneId
from hybridsat.formula import (
    FALSE,
    TRUE,
    Apply,
    At,
    Atom,
    AtomKind,
    Atomic,
    Box,
    Dia,
    Down,
    FormulaError,
    Op,
    ParseError,
    display,
    free_vars,
    functions_used,
    operators_used,
    parse,
    prop,
    random_formula,
    rewrite_over_base,
    to_chain,
    to_simple_form,
    unparse,
    var,
)
from hybridsat.kripke import FrameClass, sat_bounded
from hybridsat.reductions import OrdInstance, gen_ord

from oracle_util import pointwise_equal

ALL_FUNS = [AND, OR, NOT, IMPLIES, ZERO, ONE, BoolFun.from_bits("01101001", 3)]
N_FUNS = [NOT, ID, ZERO, ONE, BoolFun(2, 0b0101), BoolFun(2, 0b1111)]


def rand(seed, depth=4, funs=ALL_FUNS, ops=tuple(Op)):
    return random_formula(random.Random(seed), depth, funs, ops)


# -- parsing ------------------------------------------------------------------


def test_parse_examples():
    assert parse("down x . x") == Down("x", var("x"))
    s = Atom(AtomKind.NOM, "s")
    assert parse("@s dia dia 1") == At(s, Dia(Dia(TRUE)))
    assert parse("f#0001/2(p, box 0)") == Apply(AND, (prop("p"), Box(FALSE)))


def test_unicode_aliases():
    assert parse("◇□↓x.@x ¬x") == parse("dia box down x . at x not x")


def test_bound_names_are_state_variables():
    f = parse("down x . dia x")
    assert f.body.body == var("x")
    assert parse("dia x") == Dia(prop("x"))


@pytest.mark.parametrize(
    "text",
    ["down x . (", "at p", "f#0001/2(p)", "not(p, q)", "down _k3 . p", "dia", "p q"],
)
def test_parse_errors(text):
    with pytest.raises(FormulaError):
        parse(text)


def test_parse_error_has_position():
    with pytest.raises(ParseError) as e:
        parse("dia (p & )")
    assert "position" in str(e.value)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**9))
def test_round_trip(seed):
    f = rand(seed, depth=5)
    assert parse(unparse(f)) == f
    assert parse(unparse(parse(unparse(f)))) == f


def test_round_trip_corpus():
    for seed in range(10_000):
        f = rand(seed, depth=4)
        assert parse(unparse(f)) == f


def test_display_is_parseable():
    for seed in range(500):
        f = rand(seed, depth=4, funs=[AND, OR, NOT, IMPLIES, ZERO, ONE])
        assert parse(display(f)) == f


# -- structural queries -------------------------------------------------------


def test_operators_and_functions():
    f = parse("down x . x")
    assert operators_used(f) == {Op.DOWN} and functions_used(f) == set()
    g = gen_ord(OrdInstance.line(["v1", "v2", "v3"], "v1", "v3"))
    assert operators_used(g) == {Op.DOWN, Op.DIA, Op.BOX, Op.AT}
    assert functions_used(g) == {ZERO}
    h = parse("@s dia dia 1")
    assert operators_used(h) == {Op.AT, Op.DIA} and functions_used(h) == {ONE}


def test_free_vars():
    assert free_vars(parse("down x . at x:y x")) == {"y"}


# -- simple form --------------------------------------------------------------


@pytest.mark.parametrize(
    "src, want",
    [
        ("down x . not not x", "down x . x"),
        ("not dia down x . not x", "box down x . x"),
        ("dia not box p", "dia dia not p"),
        ("not at i box 1", "at i dia 0"),
    ],
)
def test_simple_form_examples(src, want):
    assert to_simple_form(parse(src)) == parse(want)


def test_simple_form_rejects_binary():
    with pytest.raises(FormulaError):
        to_simple_form(parse("p & q"))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_simple_form_pointwise(seed):
    f = rand(seed, depth=5, funs=N_FUNS)
    g = to_simple_form(f)
    chain = to_chain(g)
    assert g == chain.formula()
    for n in (1, 2):
        assert pointwise_equal(f, g, n)


def test_simple_form_pointwise_three_states():
    for seed in range(15):
        f = rand(seed, depth=4, funs=N_FUNS)
        assert pointwise_equal(f, to_simple_form(f), 3)


# -- rewriting over a base ----------------------------------------------------


def test_rewrite_examples():
    p, q = prop("p"), prop("q")
    out = rewrite_over_base(parse("not p"), {AND_NOT})
    assert functions_used(out) <= {AND_NOT}
    assert out.fun == AND_NOT and isinstance(out.args[0], Down) and out.args[1] == p
    assert rewrite_over_base(parse("p & q"), {AND}) == Apply(AND, (p, q))
    out = rewrite_over_base(parse("p | q"), {AND, NOT})
    assert functions_used(out) <= {AND, NOT}
    assert pointwise_equal(out, parse("p | q"), 2)


def test_rewrite_at_mode_uses_at():
    out = rewrite_over_base(parse("not p"), {AND_NOT}, "atXx")
    assert isinstance(out.args[0], At)


def test_rewrite_inexpressible():
    with pytest.raises(FormulaError):
        rewrite_over_base(parse("not p"), {AND, OR})


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from([CloneId.S1, CloneId.D, CloneId.BF]))
def test_rewrite_keeps_meaning(seed, clone):
    f = rand(seed, depth=3, funs=[AND, OR, NOT, ONE, ZERO])
    g = rewrite_over_base(f, clone.base)
    assert functions_used(g) <= clone.base
    assert pointwise_equal(f, g, 2)


def test_rewrite_equisatisfiable_small():
    for seed in range(20):
        f = rand(seed, depth=3, funs=[AND, OR, NOT, ONE])
        g = rewrite_over_base(f, {AND_NOT})
        for F in FrameClass:
            assert (sat_bounded(f, F, 2) is None) == (sat_bounded(g, F, 2) is None)
