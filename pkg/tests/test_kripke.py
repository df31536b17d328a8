import itertools
import json
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridsat.boolean_clones import AND, NOT, ONE, OR, ZERO
from hybridsat.formula import Op, free_vars, nominals, parse, propositions, random_formula
from hybridsat.kripke import (
    FrameClass,
    KripkeModel,
    ModelError,
    check,
    enumerate_models,
    frame_satisfies,
    relation_count,
    sat_bounded,
    sat_in_frames,
    singleton_model,
)

ALL, TRANS, TOTAL, ER = FrameClass.ALL, FrameClass.TRANS, FrameClass.TOTAL, FrameClass.ER

K1 = KripkeModel.from_json({"states": ["w1", "w2"], "rel": [["w1", "w2"]], "labels": {"p:p": ["w2"]}})
# the QBF witness shape: s sees a state with a successor and a dead end
K2 = KripkeModel.from_json(
    {"states": ["s", "a", "b"], "rel": [["s", "a"], ["s", "b"], ["a", "b"]], "labels": {"n:s": ["s"]}}
)


def test_check_basics():
    assert check(K1, {}, "w1", parse("dia p"))
    assert not check(K1, {}, "w1", parse("box 0"))
    assert check(K1, {}, "w2", parse("box 0"))
    assert check(K1, {}, "w1", parse("down x . dia down y . at x box y"))
    assert not check(K1, {}, "w1", parse("down x . dia x"))


def test_check_variables_and_nominals():
    assert check(K2, {"y": "b"}, "a", parse("dia x:y"))
    assert check(K2, {}, "b", parse("at s dia dia 1"))
    assert check(K2, {}, "a", parse("at s dia box 0"))
    with pytest.raises(ModelError):
        check(K2, {}, "s", parse("x:y"))
    with pytest.raises(ModelError):
        check(K2, {}, "s", parse("at j 1"))


def test_qbf_example_holds_in_k2():
    from hybridsat.reductions import QBF_EXAMPLE, gen_qbf

    assert QBF_EXAMPLE.truth()
    f = gen_qbf(QBF_EXAMPLE)
    assert check(K2, {}, "s", f)


def test_json_round_trip():
    for K in (K1, K2, singleton_model(parse("p & at i q"))):
        assert KripkeModel.from_json(json.dumps(K.to_json())) == K


@pytest.mark.parametrize(
    "data",
    [
        {"rel": []},
        {"states": [0], "rel": [[0, 1]]},
        {"states": [0, 0]},
        {"states": [0, 1], "labels": {"n:i": [0, 1]}},
        {"states": [0], "labels": {"q:i": [0]}},
    ],
)
def test_bad_models(data):
    with pytest.raises(ModelError):
        KripkeModel.from_json(data)


def test_frame_classes():
    refl = KripkeModel((0,), frozenset({(0, 0)}))
    assert all(frame_satisfies(refl, F) for F in FrameClass)
    assert frame_satisfies(K1, TRANS) and not frame_satisfies(K1, TOTAL)
    assert frame_satisfies(K2, TRANS) and not frame_satisfies(K2, TOTAL)
    chain = KripkeModel((0, 1, 2), frozenset({(0, 1), (1, 2)}))
    assert not frame_satisfies(chain, TRANS)
    sym = KripkeModel((0, 1), frozenset({(0, 1), (1, 0)}))
    assert frame_satisfies(sym, TOTAL) and not frame_satisfies(sym, ER) and not frame_satisfies(sym, TRANS)


@pytest.mark.parametrize(
    "n, F, count",
    [(2, ALL, 16), (2, TRANS, 13), (2, TOTAL, 9), (2, ER, 2), (3, ALL, 512), (3, TRANS, 171), (3, TOTAL, 343), (3, ER, 5), (4, ER, 15)],
)
def test_relation_counts(n, F, count):
    assert relation_count(n, F) == count


def test_enumerate_models():
    ms = list(enumerate_models(["p"], ["i"], 2, TOTAL))
    assert len(ms) == 9 * 4 * 2
    assert all(frame_satisfies(K, TOTAL) for K in ms)
    assert len({json.dumps(K.to_json(), sort_keys=True) for K in ms}) == len(ms)


@pytest.mark.parametrize(
    "text, F, sat",
    [
        ("down x . not x", ALL, False),
        ("down x . dia not x", TOTAL, True),
        ("down x . dia not x", ER, True),
        ("down x . box not x", ER, False),
        ("box 0", ALL, True),
        ("box 0", TRANS, True),
        ("box 0", TOTAL, False),
        ("box 0", ER, False),
        ("down x . dia dia not x", TRANS, True),
        ("down x . dia x & down x . box not x", ER, False),
    ],
)
def test_spot_cases(text, F, sat):
    assert (sat_bounded(parse(text), F, 3) is not None) == sat


def test_witness_is_checked_and_in_class():
    w = sat_bounded(parse("down x . dia (not x & dia x) & p"), ER, 3)
    assert w is not None and len(w.model.states) == 2
    assert check(w.model, w.assignment, w.state, parse("down x . dia (not x & dia x) & p"))
    assert frame_satisfies(w.model, ER)
    json.dumps(w.to_json())


def test_free_variable_assignment_in_witness():
    f = parse("dia x:y & not x:y")
    w = sat_bounded(f, ALL, 2)
    assert w is not None and "y" in w.assignment
    assert check(w.model, w.assignment, w.state, f)


def test_bound_must_be_positive():
    with pytest.raises(ModelError):
        sat_bounded(parse("p"), ALL, 0)


def test_sat_in_frames_filters_class():
    line = np.array([[0, 1], [0, 0]], dtype=bool)
    f = parse("box 0")
    assert sat_in_frames(f, TOTAL, [line]) is None
    assert sat_in_frames(parse("dia box 0"), ALL, [line]) is not None


def _brute(f, F, n):
    fv = sorted(free_vars(f))
    for K in enumerate_models(propositions(f), nominals(f), n, F):
        for vals in itertools.product(K.states, repeat=len(fv)):
            g = dict(zip(fv, vals))
            if any(check(K, g, w, f) for w in K.states):
                return True
    return False


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from(list(FrameClass)))
def test_batch_oracle_matches_reference_checker(seed, F):
    f = random_formula(random.Random(seed), 4, [AND, OR, NOT, ZERO, ONE], tuple(Op), props=("p",), noms=("i",))
    for n in (1, 2):
        assert (sat_bounded(f, F, n, n) is not None) == _brute(f, F, n)
