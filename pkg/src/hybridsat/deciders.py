"""Routing formulas to a decision procedure by frame class, operators and clone.

Every procedure returns a :class:`Verdict`.  ``complete`` says whether the
procedure is a decision procedure for the formula's fragment; an incomplete
verdict never answers "unsat".
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

from .boolean_clones import NOT, CloneId, CloneReport, Prop, classify, constant, essential_variables, has_property, is_constant
from .formula import (
    Apply,
    At,
    AtomKind,
    Atomic,
    Box,
    Chain,
    Dia,
    Down,
    Formula,
    Literal,
    Op,
    free_vars,
    functions_used,
    nominals,
    operators_used,
    to_chain,
)
from .kripke import FrameClass, KripkeModel, Witness, check, frame_satisfies, sat_bounded, sat_in_frames, singleton_model
from .nchain import LiteralCase, Undefined, candidate_frames, decide_chain, literal_case, rename_chain, triangle, _Fresh


class Answer(enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"

    def __str__(self) -> str:
        return self.value


class PreconditionError(ValueError):
    """The formula is outside the fragment a procedure handles."""


@dataclass(frozen=True)
class Verdict:
    answer: Answer
    procedure: str
    label: str
    complete: bool
    witness: Witness | None = None

    def __post_init__(self):
        if self.complete and self.answer is Answer.UNKNOWN:
            raise ValueError("a complete procedure must answer sat or unsat")
        if not self.complete and self.answer is Answer.UNSAT:
            raise ValueError("an incomplete procedure cannot refute")
        if self.witness is not None and self.answer is not Answer.SAT:
            raise ValueError("witness given for a non-sat answer")

    def to_json(self) -> dict:
        return {
            "answer": self.answer.value,
            "procedure": self.procedure,
            "label": self.label,
            "complete": self.complete,
            "witness": self.witness.to_json() if self.witness else None,
        }


# -- complexity labels -------------------------------------------------------

TRIVIAL = "trivial"
ALMOST_TRIVIAL = "almost-trivial"
AC0 = "AC0"
AC0_2 = "AC0[2]-complete"
NC1 = "NC1-complete"
L_COMPLETE = "L-complete"
L_HARD = "L-hard (upper open)"
NL_HARD = "NL-hard (upper open)"
CONP_HARD = "coNP-hard (upper open)"
PSPACE_HARD = "PSPACE-hard (upper open)"
NEXP = "NEXP-complete (bounded oracle only)"
CORE = "coRE-complete (bounded oracle only)"
OPEN_L = "open (clone L)"
OPEN = "open"
UNCLASSIFIED = "unclassified"


def complexity_lookup(ops, report: CloneReport, F: FrameClass) -> str:
    """The tightest known bound for SAT over ``F`` with operators ``ops`` and the reported clone."""
    ops = frozenset(ops)
    box, at, down = Op.BOX in ops, Op.AT in ops, Op.DOWN in ops
    full = ops >= {Op.DIA, Op.BOX, Op.DOWN, Op.AT}
    cyclic = F in (FrameClass.TOTAL, FrameClass.ER)
    if report.subset(CloneId.R1):
        return TRIVIAL
    if report.bf_with_true:
        if not ({Op.DIA, Op.DOWN} <= ops):
            return UNCLASSIFIED
        if F in (FrameClass.ALL, FrameClass.TOTAL):
            return CORE
        if F is FrameClass.TRANS:
            return CORE if at else NEXP
        return NEXP
    if report.subset(CloneId.I):
        if cyclic or not box:
            return ALMOST_TRIVIAL
        if full:
            return L_COMPLETE
        # □ without @ over all or transitive frames
        return AC0
    if report.subset(CloneId.N):
        if at and down:
            return L_COMPLETE
        if down:
            return AC0_2
        return UNCLASSIFIED
    if report.subset(CloneId.L):
        return OPEN_L
    if report.subset(CloneId.V) or report.subset(CloneId.E):
        if cyclic or not box:
            return AC0
        if report.subset(CloneId.V):
            if F is FrameClass.ALL:
                return L_COMPLETE if full else OPEN
            return L_HARD if full else OPEN
        if F is FrameClass.ALL:
            return CONP_HARD
        return NL_HARD if full else OPEN
    if report.subset(CloneId.M):
        if cyclic or not box:
            return NC1
        if F is FrameClass.ALL:
            return PSPACE_HARD
        return PSPACE_HARD if full else OPEN
    return UNCLASSIFIED


# -- helpers -----------------------------------------------------------------


def _singleton_witness(f: Formula, label_all: bool = True) -> Witness:
    K = singleton_model(f, label_all=label_all)
    g = {x: 0 for x in free_vars(f)}
    return Witness(K, g, 0)


def _verified(w: Witness | None, f: Formula, F: FrameClass) -> Witness | None:
    if w is None:
        return None
    if not frame_satisfies(w.model, F) or not check(w.model, w.assignment, w.state, f):
        raise AssertionError("witness does not satisfy the formula")
    return w


def _require(cond: bool, what: str) -> None:
    if not cond:
        raise PreconditionError(what)


@lru_cache(maxsize=4096)
def _label(ops: frozenset, funs: frozenset, F: FrameClass) -> str:
    return complexity_lookup(ops, classify(funs), F)


def _fun_in(f: Formula, clone: CloneId) -> bool:
    return all(clone.contains_function(g) for g in functions_used(f))


# -- procedures --------------------------------------------------------------


def decide_r1(f: Formula, F: FrameClass = FrameClass.ALL) -> Verdict:
    """Every formula over 1-reproducing connectives holds in the reflexive singleton."""
    _require(_fun_in(f, CloneId.R1), "connectives are not all 1-reproducing")
    w = _verified(_singleton_witness(f), f, F)
    return Verdict(Answer.SAT, "decide_r1", TRIVIAL, True, w)


def final_symbol(f: Formula) -> Formula:
    """Follow the only relevant argument of identity/constant connectives down to the leaf."""
    g = f
    while True:
        if isinstance(g, Atomic):
            return g
        if isinstance(g, Apply):
            if is_constant(g.fun):
                return g if g.fun.arity == 0 else Apply(constant(g.fun.table & 1), ())
            ess = essential_variables(g.fun)
            if len(ess) != 1 or not has_property(g.fun, Prop.MONOTONE):
                raise PreconditionError(f"{g.fun} is not an identity or a constant")
            g = g.args[ess[0]]
        elif isinstance(g, (Dia, Box, Down, At)):
            g = g.body
        else:
            raise TypeError(g)


def decide_final_symbol(f: Formula, F: FrameClass) -> Verdict:
    """Identity/constant connectives: satisfiable iff the final symbol is not 0.

    Applies over total and equivalence frames, and over the other two classes
    when □ does not occur.
    """
    _require(_fun_in(f, CloneId.I), "connectives are not identities or constants")
    _require(F in (FrameClass.TOTAL, FrameClass.ER) or Op.BOX not in operators_used(f), "□ over a non-total class")
    last = final_symbol(f)
    label = complexity_lookup(operators_used(f), classify(functions_used(f)), F)
    if isinstance(last, Apply) and last.fun.table == 0:
        return Verdict(Answer.UNSAT, "decide_final_symbol", label, True)
    w = _verified(_singleton_witness(f), f, F)
    return Verdict(Answer.SAT, "decide_final_symbol", label, True, w)


def decide_singleton(f: Formula, F: FrameClass) -> Verdict:
    """Monotone connectives: satisfiable iff true in the all-true reflexive singleton."""
    _require(_fun_in(f, CloneId.M), "connectives are not monotone")
    _require(F in (FrameClass.TOTAL, FrameClass.ER) or Op.BOX not in operators_used(f), "□ over a non-total class")
    w = _singleton_witness(f)
    label = complexity_lookup(operators_used(f), classify(functions_used(f)), F)
    if check(w.model, w.assignment, w.state, f):
        return Verdict(Answer.SAT, "decide_singleton", label, True, w)
    return Verdict(Answer.UNSAT, "decide_singleton", label, True)


def v_projections(f: Formula) -> list[Formula]:
    """``f[a_i]`` for every atom occurrence a_i, in left-to-right order.

    A disjunction keeps only the branch holding the occurrence; unary
    operators are kept.  Arguments a disjunction ignores hold no occurrence.
    """
    if isinstance(f, Atomic):
        return [f]
    if isinstance(f, Apply):
        if is_constant(f.fun):
            return [Apply(constant(f.fun.table & 1), ())]
        _require(has_property(f.fun, Prop.DISJUNCTION_SHAPED), f"{f.fun} is not a disjunction")
        out = []
        for i in essential_variables(f.fun):
            out += v_projections(f.args[i])
        return out
    if isinstance(f, Down):
        return [Down(f.var, b) for b in v_projections(f.body)]
    if isinstance(f, At):
        return [At(f.target, b) for b in v_projections(f.body)]
    if isinstance(f, Dia):
        return [Dia(b) for b in v_projections(f.body)]
    if isinstance(f, Box):
        return [Box(b) for b in v_projections(f.body)]
    raise TypeError(f)


def decide_v_split(f: Formula, F: FrameClass = FrameClass.ALL) -> Verdict:
    """Disjunctions over arbitrary frames: satisfiable iff some atom projection is."""
    _require(_fun_in(f, CloneId.V), "connectives are not disjunctions or constants")
    _require(F is FrameClass.ALL, "atom splitting is for arbitrary frames")
    label = complexity_lookup(operators_used(f), classify(functions_used(f)), F)
    for proj in v_projections(f):
        v = decide_n(proj, F)
        if v.answer is Answer.SAT:
            w = v.witness
            if w is not None:
                # nominals of other disjuncts need some label; any will do
                K = w.model
                noms = {**{i: w.state for i in nominals(f)}, **K.noms}
                K = KripkeModel(K.states, K.rel, K.props, noms)
                w = _verified(Witness(K, {x: w.assignment.get(x, w.state) for x in free_vars(f)}, w.state), f, F)
            return Verdict(Answer.SAT, "decide_v_split", label, True, w)
    return Verdict(Answer.UNSAT, "decide_v_split", label, True)


@dataclass(frozen=True)
class ModalitySequence:
    """Retained modal operators with their positions in the prefix, plus the terminal."""

    entries: tuple[tuple[int, Op], ...]
    terminal: Literal

    def __str__(self) -> str:
        return "".join("◇" if op is Op.DIA else "□" for _, op in self.entries) + str(self.terminal)

    @property
    def positions(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.entries)


def triangle_transform(psi: Formula | Chain) -> ModalitySequence | None:
    """The (·)△ sequence of a simple-form formula, or None where it is undefined.

    Variables are renamed apart first; prefix positions still refer to the
    original formula since renaming keeps the prefix length.
    """
    chain = psi if isinstance(psi, Chain) else to_chain(psi)
    chain = rename_chain(chain, _Fresh())
    try:
        entries = triangle(chain.prefix)
    except Undefined:
        return None
    return ModalitySequence(entries, chain.literal)


def find_witness(f: Formula, F: FrameClass, moves: int, anchors: int) -> Witness | None:
    """A model for a formula already known to be satisfiable, or None if none was found."""
    small = 4 if F is FrameClass.ER else 3
    w = sat_bounded(f, F, small)
    if w is None:
        w = sat_in_frames(f, F, candidate_frames(moves, anchors))
    return _verified(w, f, F)


def decide_n(f: Formula | Chain, F: FrameClass, witness: bool = True) -> Verdict:
    """Negation-only connectives over any of the four frame classes."""
    if isinstance(f, Chain):
        chain = f
        lit = chain.literal
        funs = {NOT} if lit.negated else set()
        if lit.atom is None:
            funs.add(constant(lit.value))
        label = _label(frozenset(p.op for p in chain.prefix), frozenset(funs), F)
    else:
        _require(_fun_in(f, CloneId.N), "a connective depends on more than one argument")
        chain = to_chain(f)
        label = _label(operators_used(f), functions_used(f), F)
    sat = decide_chain(chain, F)
    if not sat:
        return Verdict(Answer.UNSAT, "decide_n", label, True)
    w = None
    if witness:
        if isinstance(f, Chain):
            f = chain.formula()
        case = literal_case(chain.literal)
        if case is LiteralCase.TRUE or case is LiteralCase.POSITIVE:
            negated_prop = chain.literal.negated and chain.literal.atom.kind is AtomKind.PROP
            w = _verified(_singleton_witness(f, label_all=not negated_prop), f, F)
        else:
            moves = sum(1 for p in chain.prefix if p.op in (Op.DIA, Op.BOX))
            anchors = 1 + len({p.arg for p in chain.prefix if p.op is Op.AT})
            w = find_witness(f, F, moves, anchors)
    return Verdict(Answer.SAT, "decide_n", label, True, w)


def decide_oracle(f: Formula, F: FrameClass, bound: int, label: str) -> Verdict:
    w = sat_bounded(f, F, bound)
    if w is None:
        return Verdict(Answer.UNKNOWN, "oracle", label, False)
    return Verdict(Answer.SAT, "oracle", label, False, w)


def route(ops, report: CloneReport, F: FrameClass) -> str:
    """Name of the procedure :func:`dispatch` would use."""
    cyclic_or_no_box = F in (FrameClass.TOTAL, FrameClass.ER) or Op.BOX not in ops
    if report.subset(CloneId.R1):
        return "decide_r1"
    if report.subset(CloneId.I) and cyclic_or_no_box:
        return "decide_final_symbol"
    if report.subset(CloneId.N):
        return "decide_n"
    if report.subset(CloneId.M) and cyclic_or_no_box:
        return "decide_singleton"
    if report.subset(CloneId.V) and F is FrameClass.ALL:
        return "decide_v_split"
    return "oracle"


def dispatch(f: Formula, F: FrameClass, bound: int = 3) -> Verdict:
    ops = operators_used(f)
    report = classify(functions_used(f))
    label = complexity_lookup(ops, report, F)
    proc = route(ops, report, F)
    if proc == "decide_r1":
        v = decide_r1(f, F)
        return Verdict(v.answer, v.procedure, label, True, v.witness)
    if proc == "decide_final_symbol":
        return decide_final_symbol(f, F)
    if proc == "decide_n":
        return decide_n(f, F)
    if proc == "decide_singleton":
        return decide_singleton(f, F)
    if proc == "decide_v_split":
        return decide_v_split(f, F)
    return decide_oracle(f, F, bound, label)
