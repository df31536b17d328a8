"""Exhaustive corpus of simple-form N-formulae and a trie-shared bounded oracle.

A corpus formula is a word over the prefix letters (◇, □, ↓x, ↓y, @x, @y, @i)
followed by a literal.  The oracle evaluates every suffix once: the value of
``P w`` is computed from the value of ``w``, so the whole corpus costs one
array operation per trie node.
"""

from __future__ import annotations

import itertools
from typing import Iterator

import numpy as np

from .formula import Atom, AtomKind, Chain, Literal, Op, Prefix
from .kripke import FrameClass, VarSpace, _pack, relations

LETTERS = ("dia", "box", "down x", "down y", "at x", "at y", "at i")
LITERALS = ("x", "-x", "i", "-i", "0", "1")
CLASSES = (FrameClass.ALL, FrameClass.TRANS, FrameClass.TOTAL, FrameClass.ER)

_VX = Atom(AtomKind.VAR, "x")
_VY = Atom(AtomKind.VAR, "y")
_NI = Atom(AtomKind.NOM, "i")

_PREFIX = {
    "dia": Prefix(Op.DIA),
    "box": Prefix(Op.BOX),
    "down x": Prefix(Op.DOWN, "x"),
    "down y": Prefix(Op.DOWN, "y"),
    "at x": Prefix(Op.AT, _VX),
    "at y": Prefix(Op.AT, _VY),
    "at i": Prefix(Op.AT, _NI),
}

_LITERAL = {
    "x": Literal(_VX),
    "-x": Literal(_VX, negated=True),
    "i": Literal(_NI),
    "-i": Literal(_NI, negated=True),
    "0": Literal(None, 0),
    "1": Literal(None, 1),
}


def to_chain(letters: tuple[str, ...], literal: str) -> Chain:
    return Chain(tuple(_PREFIX[a] for a in letters), _LITERAL[literal])


def iter_corpus(max_ops: int) -> Iterator[tuple[tuple[str, ...], str]]:
    for k in range(max_ops + 1):
        for letters in itertools.product(LETTERS, repeat=k):
            for lit in LITERALS:
                yield letters, lit


def corpus_size(max_ops: int) -> int:
    return len(LITERALS) * sum(len(LETTERS) ** k for k in range(max_ops + 1))


def _frame_mask(rel: np.ndarray, F: FrameClass) -> np.ndarray:
    if F is FrameClass.ALL:
        return np.ones(len(rel), dtype=bool)
    if F is FrameClass.TOTAL:
        return rel.any(axis=2).all(axis=1)
    r = rel.astype(np.uint8)
    trans = ~((np.matmul(r, r) > 0) & ~rel).any(axis=(1, 2))
    if F is FrameClass.TRANS:
        return trans
    n = rel.shape[1]
    refl = rel[:, np.arange(n), np.arange(n)].all(axis=1)
    sym = (rel == np.transpose(rel, (0, 2, 1))).all(axis=(1, 2))
    return trans & refl & sym


class TrieOracle:
    """Bounded oracle for the whole corpus at a fixed state count.

    ``run`` returns, per corpus entry, a bitmask over ``classes`` (bit c set
    when some model with exactly ``n`` states in ``classes[c]`` satisfies it).
    """

    def __init__(self, n: int, classes=CLASSES, source: FrameClass = FrameClass.ALL):
        self.n = n
        self.classes = tuple(classes)
        rel = relations(n, source)
        R = len(rel)
        # model index = relation * n + position of nominal i
        self.count = R * n
        rel_m = np.repeat(rel, n, axis=0)
        nom = np.tile(np.eye(n, dtype=bool), (R, 1))
        self.rel = _pack(np.moveaxis(rel_m, 0, -1))
        self.nom = _pack(np.moveaxis(nom, 0, -1))
        self.W = self.rel.shape[-1]
        self.masks = [_pack(np.repeat(_frame_mask(rel, F), n)) for F in self.classes]
        self.space = VarSpace(n, ["x", "y"])
        G = self.space.size
        self.G = G
        st = np.arange(n)
        ones = np.uint64(0xFFFFFFFFFFFFFFFF)
        shape = (n, G, self.W)
        eq = {v: np.where(self.space.digits[v][None, :] == st[:, None], ones, np.uint64(0)) for v in "xy"}
        vx = np.broadcast_to(eq["x"][:, :, None], shape).copy()
        vi = np.broadcast_to(self.nom[:, None, :], shape).copy()
        self.literal_values = {
            "x": vx,
            "-x": ~vx,
            "i": vi,
            "-i": ~vi,
            "0": np.zeros(shape, np.uint64),
            "1": np.full(shape, ones),
        }
        self.st_col = st[:, None]
        self.g_range = np.arange(G)

    def apply(self, letter: str, val: np.ndarray) -> np.ndarray:
        if letter == "dia":
            return np.bitwise_or.reduce(self.rel[:, :, None, :] & val[None], axis=1)
        if letter == "box":
            return ~np.bitwise_or.reduce(self.rel[:, :, None, :] & ~val[None], axis=1)
        if letter == "down x":
            return val[self.st_col, self.space.down_index["x"]]
        if letter == "down y":
            return val[self.st_col, self.space.down_index["y"]]
        if letter == "at x":
            return np.broadcast_to(val[self.space.digits["x"], self.g_range][None], val.shape)
        if letter == "at y":
            return np.broadcast_to(val[self.space.digits["y"], self.g_range][None], val.shape)
        if letter == "at i":
            return np.broadcast_to(np.bitwise_or.reduce(self.nom[:, None, :] & val, axis=0)[None], val.shape)
        raise ValueError(letter)

    def flags(self, val: np.ndarray) -> int:
        anywhere = np.bitwise_or.reduce(val.reshape(-1, self.W), axis=0)
        out = 0
        for c, m in enumerate(self.masks):
            if (anywhere & m).any():
                out |= 1 << c
        return out

    def run(self, max_ops: int) -> dict[tuple[tuple[str, ...], str], int]:
        out: dict = {}
        for lit in LITERALS:
            self._walk((), lit, self.literal_values[lit], max_ops, out)
        return out

    def _walk(self, suffix, lit, val, budget, out):
        out[(suffix, lit)] = self.flags(val)
        if budget == 0:
            return
        for a in LETTERS:
            self._walk((a,) + suffix, lit, self.apply(a, val), budget - 1, out)
