"""Satisfiability of simple-form N-formulae (operator prefix plus literal).

Every state a chain formula talks about is reached from an *anchor* (the
evaluation state, a nominal or a free state variable) by a sequence of modal
moves.  A move is identified by its position in the prefix, so such a path
is a tuple of positions; two paths that are equal denote the same state in
every model.  Satisfiability of ``… ¬x`` then depends on whether the path to
the final state and the path to the state bound to ``x`` can be kept apart.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from .formula import Atom, AtomKind, Chain, Literal, Op, Prefix
from .kripke import FrameClass

ROOT = Atom(AtomKind.VAR, "")  # the evaluation state


@dataclass(frozen=True)
class Path:
    anchor: Atom
    moves: tuple[int, ...] = ()

    def extend(self, pos: int) -> "Path":
        return Path(self.anchor, self.moves + (pos,))


@dataclass(frozen=True)
class Run:
    """Result of walking the prefix of a chain."""

    ops: dict  # position -> Op.DIA / Op.BOX
    sources: tuple  # (position, source path) for every modal move, in order
    bindings: dict  # variable -> path of the state it is bound to
    final: Path


def positions(prefix: tuple[Prefix, ...]) -> list[int]:
    return list(range(1, len(prefix) + 1))


def walk(prefix: tuple[Prefix, ...]) -> Run:
    """Follow the prefix left to right, tracking the current state as a path.

    Positions are 1-based indices into the prefix (binders count).
    """
    cur = Path(ROOT)
    ops: dict[int, Op] = {}
    sources = []
    bindings: dict[str, Path] = {}
    for pos, p in enumerate(prefix, start=1):
        if p.op in (Op.DIA, Op.BOX):
            ops[pos] = p.op
            sources.append((pos, cur))
            cur = cur.extend(pos)
        elif p.op is Op.DOWN:
            bindings[p.arg] = cur
        else:
            t = p.arg
            if t.kind is AtomKind.VAR and t.name in bindings:
                cur = bindings[t.name]
            else:
                cur = Path(t)
    return Run(ops, tuple(sources), bindings, cur)


def target_path(run: Run, atom: Atom) -> Path:
    if atom.kind is AtomKind.VAR and atom.name in run.bindings:
        return run.bindings[atom.name]
    return Path(atom)


# -- the (·)△ transform, literally ------------------------------------------


class Undefined(Exception):
    """The transform is undefined: some @t has no matching ↓t to delete back to."""


def triangle(prefix: tuple[Prefix, ...], strict: bool = True) -> tuple[tuple[int, Op], ...]:
    """Retained modal operators ``((position, op), ...)`` of the transform.

    Reading right to left, each ``@x`` whose suffix is @-free is deleted together
    with everything back to its ``↓x``.  Remaining binders are dropped.  An @
    to a nominal or an unbound variable makes the transform undefined (raises
    :class:`Undefined`) when ``strict``; otherwise the scan stops there and
    only the part after it is kept (the path is then anchored at that target).
    """
    items = list(enumerate(prefix, start=1))
    while True:
        last_at = max((k for k, (_, p) in enumerate(items) if p.op is Op.AT), default=None)
        if last_at is None:
            break
        t = items[last_at][1].arg
        start = None
        if t.kind is AtomKind.VAR:
            start = max(
                (k for k, (_, p) in enumerate(items[:last_at]) if p.op is Op.DOWN and p.arg == t.name),
                default=None,
            )
        if start is None:
            if strict:
                raise Undefined(f"no binder for @{t.name}")
            items = items[last_at + 1 :]
            break
        del items[start : last_at + 1]
    return tuple((pos, p.op) for pos, p in items if p.op in (Op.DIA, Op.BOX))


# -- spypoint elimination ----------------------------------------------------


def eliminate_anchors(chain: Chain, fresh) -> Chain:
    """Bind every nominal and free variable below a new root ``r``.

    ``↓r.◇↓x1.@r ⋯ ◇↓y1.@r ⋯ ◇ φ[i/y]``.  A model of φ yields a model of the
    result by adding one state ``r`` with an edge to every state; this keeps
    the frame total, transitive, or arbitrary, but not an equivalence.
    """
    bound: set[str] = set()
    free: list[str] = []
    noms: list[str] = []

    def note(a: Atom):
        if a.kind is AtomKind.VAR and a.name not in bound and a.name not in free:
            free.append(a.name)
        elif a.kind is AtomKind.NOM and a.name not in noms:
            noms.append(a.name)

    for p in chain.prefix:
        if p.op is Op.DOWN:
            bound.add(p.arg)
        elif p.op is Op.AT:
            note(p.arg)
    if chain.literal.atom is not None and chain.literal.atom.kind is not AtomKind.PROP:
        note(chain.literal.atom)
    if not free and not noms:
        return chain
    r = fresh()
    rename = {i: fresh() for i in noms}
    head = [Prefix(Op.DOWN, r)]
    for x in free:
        head += [Prefix(Op.DIA), Prefix(Op.DOWN, x), Prefix(Op.AT, Atom(AtomKind.VAR, r))]
    for i in noms:
        head += [Prefix(Op.DIA), Prefix(Op.DOWN, rename[i]), Prefix(Op.AT, Atom(AtomKind.VAR, r))]
    head.append(Prefix(Op.DIA))

    def sub(a: Atom) -> Atom:
        if a.kind is AtomKind.NOM:
            return Atom(AtomKind.VAR, rename[a.name])
        return a

    body = [Prefix(Op.AT, sub(p.arg)) if p.op is Op.AT else p for p in chain.prefix]
    lit = chain.literal
    if lit.atom is not None and lit.atom.kind is AtomKind.NOM:
        lit = Literal(sub(lit.atom), lit.value, lit.negated)
    return Chain(tuple(head + body), lit)


def rename_chain(chain: Chain, fresh) -> Chain:
    """Bound renaming: every variable bound at most once, never also free."""
    env: dict[str, str] = {}
    seen: set[str] = set()
    free: set[str] = set()
    out = []
    for p in chain.prefix:
        if p.op is Op.AT and p.arg.kind is AtomKind.VAR and p.arg.name not in env:
            free.add(p.arg.name)
    lit_atom = chain.literal.atom
    # a free occurrence in the literal is only free if no binder precedes it
    binders = {p.arg for p in chain.prefix if p.op is Op.DOWN}
    if lit_atom is not None and lit_atom.kind is AtomKind.VAR and lit_atom.name not in binders:
        free.add(lit_atom.name)
    for p in chain.prefix:
        if p.op is Op.DOWN:
            name = p.arg
            if name in seen or name in free:
                name = fresh()
            seen.add(name)
            env[p.arg] = name
            out.append(Prefix(Op.DOWN, name))
        elif p.op is Op.AT and p.arg.kind is AtomKind.VAR and p.arg.name in env:
            out.append(Prefix(Op.AT, Atom(AtomKind.VAR, env[p.arg.name])))
        else:
            out.append(p)
    lit = chain.literal
    if lit.atom is not None and lit.atom.kind is AtomKind.VAR and lit.atom.name in env:
        lit = Literal(Atom(AtomKind.VAR, env[lit.atom.name]), lit.value, lit.negated)
    return Chain(tuple(out), lit)


class _Fresh:
    def __init__(self):
        self.n = 0

    def __call__(self) -> str:
        self.n += 1
        return f"_k{self.n}"


# -- pair conditions ---------------------------------------------------------


def common_prefix(a: tuple, b: tuple) -> int:
    k = 0
    while k < len(a) and k < len(b) and a[k] == b[k]:
        k += 1
    return k


def _good_pair(oa: Op, ta: int, ob: Op, tb: int) -> bool:
    # two moves from one state can land apart iff both are ◇, or the ◇ is made after the □
    if oa is Op.DIA and ob is Op.DIA:
        return True
    if oa is Op.DIA and ob is Op.BOX:
        return tb < ta
    if oa is Op.BOX and ob is Op.DIA:
        return ta < tb
    return False


def separable_total(a: tuple, b: tuple, ops: dict) -> bool:
    """Conditions (1)-(4): the endpoints of two root paths can differ in a total model."""
    if len(a) != len(b):
        return True
    k = common_prefix(a, b)
    return any(_good_pair(ops[p], p, ops[q], q) for p, q in zip(a[k:], b[k:]))


def separable_er(a: Path, b: Path, ops: dict) -> bool:
    """Endpoints of two anchored paths can differ in an equivalence frame.

    Different anchors can sit in different classes.  Within one class only the
    last move of each path matters; a path without moves is its anchor, which
    behaves like a □ made before everything else.
    """
    if a.anchor != b.anchor:
        return True
    if a.moves == b.moves:
        return False
    ta, tb = (a.moves[-1] if a.moves else 0), (b.moves[-1] if b.moves else 0)
    oa = ops[ta] if ta else Op.BOX
    ob = ops[tb] if tb else Op.BOX
    return _good_pair(oa, ta, ob, tb)


# -- decision ----------------------------------------------------------------


class LiteralCase(enum.Enum):
    TRUE = "1"
    FALSE = "0"
    POSITIVE = "positive"
    NEGATED_STATE = "negated-state"


def literal_case(lit: Literal) -> LiteralCase:
    if lit.atom is None:
        return LiteralCase.TRUE if lit.value else LiteralCase.FALSE
    if lit.negated and lit.atom.kind is not AtomKind.PROP:
        return LiteralCase.NEGATED_STATE
    return LiteralCase.POSITIVE


def _below(a: Path, b: Path) -> bool:
    """``b`` is reached from ``a`` by at least one move, in every model."""
    return a.anchor == b.anchor and len(b.moves) > len(a.moves) and b.moves[: len(a.moves)] == a.moves


def _first_move_from(run: Run, node: Path, after: int):
    for pos, src in run.sources:
        if pos > after and src == node:
            return run.ops[pos]
    return None


def dead_end_possible(run: Run, trans: bool = False) -> bool:
    """Some □ can be evaluated at a state without successors.

    The source of that □ must be kept apart from the source of every ◇
    evaluated before it (those states need a successor).  Over transitive
    frames a dead end below the source of an earlier □ is also a choice for
    that □; this is harmless only when the next move from the state it picks
    is again a □.
    """
    for k, (pos, src) in enumerate(run.sources):
        if run.ops[pos] is not Op.BOX:
            continue
        ok = True
        for pos2, src2 in run.sources[:k]:
            if run.ops[pos2] is Op.DIA and not _apart_for_dead_end(src, src2, run.ops, trans):
                ok = False
                break
            if trans and run.ops[pos2] is Op.BOX and _below(src2, src):
                if _first_move_from(run, src2.extend(pos2), pos2) is Op.DIA:
                    ok = False
                    break
        if ok:
            return True
    return False


def trans_reachable(a: Path, b: Path, ops: dict) -> bool:
    """Over transitive frames the later of the two last moves may reach the other endpoint.

    If that move is a □ from a state the other endpoint lies strictly below,
    the □ can pick the other endpoint itself.
    """
    ta = a.moves[-1] if a.moves else 0
    tb = b.moves[-1] if b.moves else 0
    late, other = (a, b) if ta > tb else (b, a)
    if not late.moves or ops[late.moves[-1]] is not Op.BOX:
        return False
    return _below(Path(late.anchor, late.moves[:-1]), other)


def _apart_for_dead_end(a: Path, b: Path, ops: dict, trans: bool) -> bool:
    # a: source of the candidate □ (later), b: source of an earlier ◇
    if a.anchor != b.anchor:
        return True
    return separable_total(a.moves, b.moves, ops)


def decide_chain(chain: Chain, F: FrameClass) -> bool:
    case = literal_case(chain.literal)
    if case in (LiteralCase.TRUE, LiteralCase.POSITIVE):
        return True
    fresh = _Fresh()
    chain = rename_chain(chain, fresh)
    if F is FrameClass.ER:
        if case is LiteralCase.FALSE:
            return False
        run = walk(chain.prefix)
        return separable_er(run.final, target_path(run, chain.literal.atom), run.ops)
    chain = eliminate_anchors(chain, fresh)
    run = walk(chain.prefix)
    if case is LiteralCase.FALSE:
        total_ok = False
    else:
        tgt = target_path(run, chain.literal.atom)
        total_ok = separable_total(run.final.moves, tgt.moves, run.ops)
        if total_ok and F is FrameClass.TRANS and trans_reachable(run.final, tgt, run.ops):
            total_ok = False
    if total_ok or F is FrameClass.TOTAL:
        return total_ok
    return dead_end_possible(run, trans=F is FrameClass.TRANS)


# -- witness frames ----------------------------------------------------------


def _frame(n: int, edges) -> np.ndarray:
    r = np.zeros((n, n), dtype=bool)
    for a, b in edges:
        r[a, b] = True
    return r


def _closure(r: np.ndarray) -> np.ndarray:
    c = r.copy()
    for k in range(len(c)):
        c |= c[:, k : k + 1] & c[k : k + 1, :]
    return c


def _line(start: int, length: int, attach: int | None):
    # states start .. start+length-1 in a row, hanging below ``attach``
    edges = []
    prev = attach
    for s in range(start, start + length):
        if prev is not None:
            edges.append((prev, s))
        prev = s
    return edges, prev


def candidate_frames(moves: int, anchors: int = 1):
    """Frames shaped like the models built in the satisfiability arguments.

    Chains and two chains sharing a prefix, each end either a dead end or a
    self-loop, their transitive closures, disjoint unions for separate
    anchors, and equivalence frames with up to ``anchors + 2`` classes of two.
    """
    top = moves + 1
    seen: set[bytes] = set()

    def emit(r):
        for v in (r, _closure(r)):
            key = bytes([len(v)]) + np.packbits(v).tobytes()
            if key not in seen:
                seen.add(key)
                yield v

    for n in range(1, top + 1):
        edges, last = _line(0, n, None)
        for loop in (False, True):
            yield from emit(_frame(n, edges + ([(last, last)] if loop else [])))
    for a in range(1, top + 1):
        for b in range(1, top + 1):
            for c in range(b, top + 1):
                stem, root = _line(0, a, None)
                e1, l1 = _line(a, b, root)
                e2, l2 = _line(a + b, c, root)
                n = a + b + c
                for loops in itertools.product((False, True), repeat=2):
                    extra = [(l, l) for l, on in zip((l1, l2), loops) if on]
                    yield from emit(_frame(n, stem + e1 + e2 + extra))
    if anchors > 1:
        for a in range(1, top + 1):
            for b in range(1, top + 1):
                e1, l1 = _line(0, a, None)
                e2, l2 = _line(a, b, None)
                for loops in itertools.product((False, True), repeat=2):
                    extra = [(l, l) for l, on in zip((l1, l2), loops) if on]
                    yield from emit(_frame(a + b, e1 + e2 + extra))
    for k in range(1, anchors + 3):
        for sizes in itertools.product((1, 2), repeat=k):
            n = sum(sizes)
            r = np.zeros((n, n), dtype=bool)
            s = 0
            for z in sizes:
                r[s : s + z, s : s + z] = True
                s += z
            yield from emit(r)
