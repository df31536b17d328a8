import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridsat.boolean_clones import (
    CONTAINS_TRACKED,
    AND,
    AND_NOT,
    ID,
    IMPLIES,
    NOT,
    ONE,
    OR,
    XOR,
    ZERO,
    BoolFun,
    CloneError,
    CloneId,
    Prop,
    all_functions,
    classify,
    clone_contains,
    closure_slice,
    constant,
    essential_variables,
    eval_fun,
    express,
    generates_bf_with_true,
    has_property,
    parse_fun,
    term_table,
)

C = CloneId

# Hand-derived from the defining properties, one row per named base.
EXPECTED_SUBSETS = {
    C.BF: {C.BF},
    C.R1: {C.BF, C.R1},
    C.M: {C.BF, C.M},
    C.S1: {C.BF, C.S1},
    C.S11: {C.BF, C.M, C.S1, C.S11},
    C.D: {C.BF, C.D},
    C.V: {C.BF, C.M, C.V},
    C.E: {C.BF, C.M, C.E},
    C.E0: {C.BF, C.M, C.E, C.E0, C.S1, C.S11},
    C.N: {C.BF, C.N, C.L},
    C.N2: {C.BF, C.N, C.N2, C.D, C.L},
    C.I: {C.BF, C.M, C.V, C.E, C.N, C.I, C.L},
    C.I0: {C.BF, C.M, C.S1, C.S11, C.V, C.E, C.E0, C.N, C.I, C.I0, C.L},
    C.I1: {C.BF, C.R1, C.M, C.V, C.E, C.N, C.I, C.I1, C.L},
    C.I2: set(CloneId),
    C.L: {C.BF, C.L},
}
EXPECTED_BF_WITH_TRUE = {C.BF, C.S1, C.D}


funs = st.integers(0, 3).flatmap(lambda a: st.integers(0, (1 << (1 << a)) - 1).map(lambda t: BoolFun(a, t)))


def test_bit_order_is_msb_first():
    # index 2 = args (1, 0)
    assert eval_fun(AND_NOT, (1, 0)) == 1
    assert eval_fun(AND_NOT, (0, 1)) == 0
    assert AND.bits() == "0001"
    assert IMPLIES.bits() == "1101"


def test_bad_table_rejected():
    with pytest.raises(CloneError):
        BoolFun(1, 4)
    with pytest.raises(CloneError):
        BoolFun.from_bits("010")


@pytest.mark.parametrize(
    "text, fun",
    [("and", AND), ("not", NOT), ("f#0001/2", AND), ("f#10", NOT), ("1", ONE), ("f#0/0", ZERO)],
)
def test_parse_fun(text, fun):
    assert parse_fun(text) == fun


def test_parse_fun_errors():
    for bad in ("nand", "f#012/2", "f#01/x", "f#0001/1"):
        with pytest.raises(CloneError):
            parse_fun(bad)


def test_properties_spot_values():
    assert has_property(OR, Prop.ONE_REPRODUCING)
    assert not has_property(NOT, Prop.MONOTONE)
    assert has_property(AND_NOT, Prop.ONE_SEPARATING)
    assert not has_property(OR, Prop.ONE_SEPARATING)
    assert has_property(NOT, Prop.SELF_DUAL)
    assert has_property(XOR, Prop.AFFINE) and not has_property(AND, Prop.AFFINE)
    assert has_property(constant(1, 2), Prop.DISJUNCTION_SHAPED)
    assert has_property(ID, Prop.IDENTITY_OR_CONSTANT)
    assert not has_property(NOT, Prop.IDENTITY_OR_CONSTANT)
    assert essential_variables(BoolFun.from_callable(3, lambda x, y, z: y)) == [1]


@pytest.mark.parametrize("clone", list(CloneId))
def test_named_base_profiles(clone):
    r = classify(clone.base)
    assert set(r.subset_of) == EXPECTED_SUBSETS[clone]
    assert r.bf_with_true == (clone in EXPECTED_BF_WITH_TRUE)


@pytest.mark.parametrize("clone", CONTAINS_TRACKED)
def test_base_generates_its_own_clone(clone):
    assert clone in classify(clone.base).contains
    # the bottom clone [id] reaches none of them
    assert clone not in classify({ID}).contains


def test_contains_flags():
    assert classify({AND, NOT}).contains_s1
    assert classify({AND, ZERO}).contains_e0
    assert classify({NOT}).contains_n2
    assert not classify({NOT}).contains_d
    assert not classify({OR, IMPLIES}).bf_with_true


def test_closure_sizes():
    assert len(closure_slice({AND, NOT}, 2)) == 2 + 4 + 16
    assert closure_slice({ID}, 2) == frozenset({ID, BoolFun(2, 0b1100), BoolFun(2, 0b1010)})
    # [∨, 0, 1] at arity 2: 0, 1, x, y, x∨y
    assert len([f for f in closure_slice({OR, ZERO, ONE}, 2) if f.arity == 2]) == 5


@settings(max_examples=200, deadline=None)
@given(f=funs)
def test_express_witness_is_correct(f):
    term = express(f, {AND, NOT, ONE})
    assert term is not None
    if f.arity:
        assert term_table(term, f.arity) == f.table


@settings(max_examples=200, deadline=None)
@given(f=funs, g=funs)
def test_subset_is_pointwise(f, g):
    r = classify({f, g})
    for c in CloneId:
        assert r.subset(c) == (c.contains_function(f) and c.contains_function(g))


@settings(max_examples=100, deadline=None)
@given(a=st.sampled_from(all_functions(2)), b=st.sampled_from(all_functions(2)))
def test_bf_with_true_criterion(a, b):
    base = {a, b}
    assert classify(base).bf_with_true == generates_bf_with_true(base)


def test_bf_with_true_exhaustive_pairs():
    fs = all_functions(2)
    bases = [{f} for f in fs] + [set(p) for p in itertools.combinations(fs, 2)]
    assert len(bases) == 136
    assert all(classify(b).bf_with_true == generates_bf_with_true(b) for b in bases)


@settings(max_examples=40, deadline=None)
@given(a=st.sampled_from(all_functions(2)), b=st.sampled_from(all_functions(1) + all_functions(0)))
def test_contains_agrees_with_full_closure(a, b):
    base = {a, b}
    full = closure_slice(base, 3)
    for c in CONTAINS_TRACKED:
        assert clone_contains(base, c) == all(g in full for g in c.base)
