"""Kripke models, the satisfaction relation, frame classes and the bounded oracle.

The oracle enumerates every model with up to ``k`` states and evaluates a
formula on all of them at once.  Models are packed into the bits of uint64
words, so one bitwise operation evaluates a subformula on 64 models; the
state and assignment dimensions are ordinary array axes.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Hashable, Iterable, Iterator, Mapping

import numpy as np

from .boolean_clones import eval_fun, index_to_args
from .formula import (
    Apply,
    At,
    Atom,
    AtomKind,
    Atomic,
    Box,
    Dia,
    Down,
    Formula,
    free_vars,
    nominals,
    propositions,
    subformulas,
)

State = Hashable


class ModelError(ValueError):
    pass


class FrameClass(enum.Enum):
    ALL = "all"
    TRANS = "trans"
    TOTAL = "total"
    ER = "er"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "FrameClass":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ModelError(f"unknown frame class {text!r}") from None


@dataclass(frozen=True)
class KripkeModel:
    states: tuple
    rel: frozenset
    props: Mapping[str, frozenset] = field(default_factory=dict)
    noms: Mapping[str, State] = field(default_factory=dict)

    def __post_init__(self):
        st = set(self.states)
        if len(st) != len(self.states):
            raise ModelError("duplicate state names")
        for a, b in self.rel:
            if a not in st or b not in st:
                raise ModelError(f"edge ({a}, {b}) leaves the state set")
        for p, ext in self.props.items():
            if not set(ext) <= st:
                raise ModelError(f"label of {p} leaves the state set")
        for i, s in self.noms.items():
            if s not in st:
                raise ModelError(f"nominal {i} names unknown state {s}")

    def successors(self, w: State) -> list:
        return [b for (a, b) in sorted(self.rel, key=repr) if a == w]

    def to_json(self) -> dict:
        labels = {f"p:{p}": sorted(ext, key=repr) for p, ext in sorted(self.props.items())}
        labels.update({f"n:{i}": [s] for i, s in sorted(self.noms.items())})
        return {
            "states": list(self.states),
            "rel": sorted([list(e) for e in self.rel], key=repr),
            "labels": labels,
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "KripkeModel":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            states = tuple(data["states"])
            rel = frozenset(tuple(e) for e in data.get("rel", []))
            if any(len(e) != 2 for e in rel):
                raise ModelError("edges must be pairs")
            props: dict[str, frozenset] = {}
            noms: dict[str, State] = {}
            for key, ext in data.get("labels", {}).items():
                kind, _, name = key.partition(":")
                if not name:
                    kind, name = "p", key
                if kind == "p":
                    props[name] = frozenset(ext)
                elif kind == "n":
                    if len(ext) != 1:
                        raise ModelError(f"nominal {name} must label exactly one state")
                    noms[name] = ext[0]
                else:
                    raise ModelError(f"bad label key {key!r}")
        except (KeyError, TypeError) as e:
            raise ModelError(f"malformed model: {e}") from None
        return cls(states, rel, props, noms)


Assignment = Mapping[str, State]


def singleton_model(f: Formula | None = None, label_all: bool = True, state: State = 0) -> KripkeModel:
    """The reflexive one-state model, all atoms of ``f`` true there."""
    props = {p: frozenset({state}) if label_all else frozenset() for p in (propositions(f) if f else [])}
    noms = {i: state for i in (nominals(f) if f else [])}
    return KripkeModel((state,), frozenset({(state, state)}), props, noms)


# -- satisfaction ------------------------------------------------------------


def check(K: KripkeModel, g: Assignment, w: State, f: Formula) -> bool:
    if w not in K.states:
        raise ModelError(f"unknown state {w!r}")
    succ: dict = {s: [] for s in K.states}
    for a, b in K.rel:
        succ[a].append(b)

    def locate(t: Atom, env) -> State:
        if t.kind is AtomKind.NOM:
            if t.name not in K.noms:
                raise ModelError(f"unlabeled nominal {t.name}")
            return K.noms[t.name]
        if t.name not in env:
            raise ModelError(f"unbound state variable {t.name}")
        return env[t.name]

    def ev(h: Formula, w, env) -> bool:
        if isinstance(h, Atomic):
            a = h.atom
            if a.kind is AtomKind.PROP:
                return w in K.props.get(a.name, ())
            return locate(a, env) == w
        if isinstance(h, Apply):
            return bool(eval_fun(h.fun, [ev(x, w, env) for x in h.args]))
        if isinstance(h, Dia):
            return any(ev(h.body, v, env) for v in succ[w])
        if isinstance(h, Box):
            return all(ev(h.body, v, env) for v in succ[w])
        if isinstance(h, Down):
            return ev(h.body, w, {**env, h.var: w})
        if isinstance(h, At):
            return ev(h.body, locate(h.target, env), env)
        raise TypeError(h)

    return ev(f, w, dict(g))


def frame_satisfies(K: KripkeModel, F: FrameClass) -> bool:
    rel = K.rel
    if F is FrameClass.ALL:
        return True
    if F is FrameClass.TOTAL:
        return all(any(a == w for a, _ in rel) for w in K.states)
    trans = all((a, d) in rel for a, b in rel for c, d in rel if b == c)
    if F is FrameClass.TRANS:
        return trans
    refl = all((w, w) in rel for w in K.states)
    sym = all((b, a) in rel for a, b in rel)
    return refl and sym and trans


# -- relation enumeration ----------------------------------------------------


def set_partitions(n: int) -> Iterator[list[int]]:
    """Restricted growth strings: block index per element, in lexicographic order."""
    if n == 0:
        yield []
        return

    def rec(prefix: list[int], m: int):
        if len(prefix) == n:
            yield list(prefix)
            return
        for b in range(m + 1):
            prefix.append(b)
            yield from rec(prefix, max(m, b + 1))
            prefix.pop()

    yield from rec([0], 1)


def _codes_to_rel(codes: np.ndarray, n: int) -> np.ndarray:
    # bit a*n+b of the code is the edge a -> b
    bits = (codes[:, None] >> np.arange(n * n, dtype=np.int64)[None, :]) & 1
    return bits.reshape(-1, n, n).astype(bool)


def _filter(rel: np.ndarray, F: FrameClass) -> np.ndarray:
    if F is FrameClass.TOTAL:
        return rel[rel.any(axis=2).all(axis=1)]
    if F is FrameClass.TRANS:
        r = rel.astype(np.uint8)
        two = np.matmul(r, r) > 0
        return rel[~(two & ~rel).any(axis=(1, 2))]
    if F is FrameClass.ER:
        n = rel.shape[1]
        r = rel.astype(np.uint8)
        ok = ~((np.matmul(r, r) > 0) & ~rel).any(axis=(1, 2))
        ok &= rel[:, np.arange(n), np.arange(n)].all(axis=1)
        ok &= (rel == np.transpose(rel, (0, 2, 1))).all(axis=(1, 2))
        return rel[ok]
    return rel


def relation_chunks(n: int, F: FrameClass, chunk: int = 1 << 16) -> Iterator[np.ndarray]:
    """Relations on ``range(n)`` in the class, as bool arrays (R, n, n), in a fixed order."""
    if F is FrameClass.ER:
        parts = list(set_partitions(n))
        out = np.zeros((len(parts), n, n), dtype=bool)
        for k, p in enumerate(parts):
            pa = np.asarray(p)
            out[k] = pa[:, None] == pa[None, :]
        yield out
        return
    total = 1 << (n * n)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(total, start + chunk), dtype=np.int64)
        rel = _filter(_codes_to_rel(codes, n), F)
        if len(rel):
            yield rel


@lru_cache(maxsize=32)
def relations(n: int, F: FrameClass) -> np.ndarray:
    return np.concatenate(list(relation_chunks(n, F)))


def relation_count(n: int, F: FrameClass) -> int:
    return sum(len(c) for c in relation_chunks(n, F))


def enumerate_models(
    props: Iterable[str], noms: Iterable[str], n: int, F: FrameClass
) -> Iterator[KripkeModel]:
    """All models on states ``0..n-1`` in the frame class, over the given atoms."""
    if n < 1:
        raise ModelError("need at least one state")
    props, noms = sorted(props), sorted(noms)
    states = tuple(range(n))
    subsets = [frozenset(s for s in states if mask >> s & 1) for mask in range(1 << n)]
    for chunk in relation_chunks(n, F):
        for r in chunk:
            rel = frozenset((a, b) for a in states for b in states if r[a, b])
            for plab in itertools.product(subsets, repeat=len(props)):
                for nlab in itertools.product(states, repeat=len(noms)):
                    yield KripkeModel(states, rel, dict(zip(props, plab)), dict(zip(noms, nlab)))


# -- bit-packed batch evaluation ---------------------------------------------


def _pack(bits: np.ndarray) -> np.ndarray:
    """Pack a bool array (..., M) along the last axis into uint64 words."""
    m = bits.shape[-1]
    pad = (-m) % 64
    if pad:
        bits = np.concatenate([bits, np.zeros(bits.shape[:-1] + (pad,), dtype=bool)], axis=-1)
    packed = np.ascontiguousarray(np.packbits(bits, axis=-1, bitorder="little"))
    return packed.view(np.uint64) if packed.shape[-1] else packed.astype(np.uint64)


def _first_bit(words: np.ndarray) -> int | None:
    nz = np.flatnonzero(words)
    if not len(nz):
        return None
    k = int(nz[0])
    w = int(words[k])
    return k * 64 + ((w & -w).bit_length() - 1)


_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)


class VarSpace:
    """Mixed-radix index over assignments of ``vars`` to ``range(n)``."""

    def __init__(self, n: int, vars: Iterable[str]):
        self.n = n
        self.vars = list(dict.fromkeys(vars))
        self.pos = {x: k for k, x in enumerate(self.vars)}
        self.size = n ** len(self.vars)
        g = np.arange(self.size)
        self.digits = {
            x: (g // n ** (len(self.vars) - 1 - k)) % n for x, k in self.pos.items()
        }
        # down_index[x][w, g] is g with x's digit set to w
        self.down_index = {}
        for x, k in self.pos.items():
            place = n ** (len(self.vars) - 1 - k)
            base = g - self.digits[x] * place
            self.down_index[x] = base[None, :] + np.arange(n)[:, None] * place

    def assignment(self, g: int) -> dict[str, int]:
        return {x: int(self.digits[x][g]) for x in self.vars}


class ModelBatch:
    """A block of models on ``range(n)``: relation, proposition and nominal bitmasks.

    Every mask is packed over the model axis: ``rel[w, v]`` has bit m set iff
    model m has the edge w -> v.
    """

    def __init__(self, rel: np.ndarray, props: Mapping[str, np.ndarray], noms: Mapping[str, np.ndarray]):
        self.count = rel.shape[0]
        self.n = rel.shape[1]
        self.rel = _pack(np.moveaxis(rel, 0, -1))  # (n, n, W)
        self.props = {p: _pack(np.moveaxis(ext, 0, -1)) for p, ext in props.items()}  # (n, W)
        self.noms = {i: _pack(np.moveaxis(loc, 0, -1)) for i, loc in noms.items()}  # (n, W)
        self.words = self.rel.shape[-1]
        self.valid = _pack(np.ones(self.count, dtype=bool))

    def evaluate(self, f: Formula, space: VarSpace, memo: dict | None = None) -> np.ndarray:
        """Truth of f as a (n, G, W) uint64 array over states, assignments, models."""
        n, G, W = self.n, space.size, self.words
        memo = {} if memo is None else memo

        def full(x: np.ndarray) -> np.ndarray:
            return np.broadcast_to(x, (n, G, W))

        def ev(h: Formula) -> np.ndarray:
            hit = memo.get(h)
            if hit is not None:
                return hit
            if isinstance(h, Atomic):
                a = h.atom
                if a.kind is AtomKind.PROP:
                    ext = self.props.get(a.name)
                    r = full(np.zeros((1, 1, W), np.uint64) if ext is None else ext[:, None, :])
                elif a.kind is AtomKind.NOM:
                    r = full(self.noms[a.name][:, None, :])
                else:
                    eq = space.digits[a.name][None, :] == np.arange(n)[:, None]
                    r = full(np.where(eq, _ONES, np.uint64(0))[:, :, None])
            elif isinstance(h, Apply):
                args = [ev(x) for x in h.args]
                r = self._apply(h.fun, args, (n, G, W))
            elif isinstance(h, Dia):
                r = self._dia(ev(h.body))
            elif isinstance(h, Box):
                r = ~self._dia(~ev(h.body))
            elif isinstance(h, Down):
                body = ev(h.body)
                r = body[np.arange(n)[:, None], space.down_index[h.var]]
            elif isinstance(h, At):
                body = ev(h.body)
                t = h.target
                if t.kind is AtomKind.NOM:
                    loc = self.noms[t.name]
                    r = full(np.bitwise_or.reduce(loc[:, None, :] & body, axis=0)[None])
                else:
                    r = full(body[space.digits[t.name], np.arange(G)][None])
            else:
                raise TypeError(h)
            memo[h] = r
            return r

        return ev(f)

    def _dia(self, body: np.ndarray) -> np.ndarray:
        return np.bitwise_or.reduce(self.rel[:, :, None, :] & body[None, :, :, :], axis=1)

    @staticmethod
    def _apply(fun, args, shape) -> np.ndarray:
        if fun.arity == 0:
            return np.broadcast_to(_ONES if fun.table else np.uint64(0), shape)
        out = np.zeros(shape, np.uint64)
        for k in range(fun.size):
            if not (fun.table >> k) & 1:
                continue
            term = np.full(shape, _ONES)
            for a, bit in zip(args, index_to_args(k, fun.arity)):
                term &= a if bit else ~a
            out |= term
        return out


def _label_grid(n: int, props: list[str], noms: list[str]):
    """All labelings as arrays: prop extents (L, n) bool each, nominal positions (L, n) one-hot."""
    radices = [1 << n] * len(props) + [n] * len(noms)
    L = int(np.prod(radices, dtype=np.int64)) if radices else 1
    idx = np.arange(L, dtype=np.int64)
    digits = []
    for r in reversed(radices):
        digits.append(idx % r)
        idx = idx // r
    digits.reverse()
    st = np.arange(n)
    pext = {p: ((digits[k][:, None] >> st[None, :]) & 1).astype(bool) for k, p in enumerate(props)}
    nloc = {i: digits[len(props) + k][:, None] == st[None, :] for k, i in enumerate(noms)}
    return L, pext, nloc


def iter_batches(
    n: int, F: FrameClass, props: list[str], noms: list[str], target: int = 1 << 17
) -> Iterator[tuple[ModelBatch, np.ndarray, dict, dict]]:
    """Yield batches covering every (relation, labeling) model with n states.

    Model m of a batch is relation ``m // L`` of the chunk with labeling ``m % L``.
    """
    L, pext, nloc = _label_grid(n, props, noms)
    per = max(1, target // L)
    for rels in relation_chunks(n, F):
        for s in range(0, len(rels), per):
            r = rels[s : s + per]
            R = len(r)
            rel = np.repeat(r, L, axis=0)
            pb = {p: np.tile(e, (R, 1)) for p, e in pext.items()}
            nb = {i: np.tile(e, (R, 1)) for i, e in nloc.items()}
            yield ModelBatch(rel, pb, nb), rel, pb, nb


def _model_from_arrays(rel: np.ndarray, pb: dict, nb: dict, m: int, names: Mapping[str, str] | None = None) -> KripkeModel:
    n = rel.shape[1]
    states = tuple(range(n))
    edges = frozenset((a, b) for a in states for b in states if rel[m, a, b])
    props = {p: frozenset(int(s) for s in np.flatnonzero(e[m])) for p, e in pb.items()}
    noms = {i: int(np.flatnonzero(e[m])[0]) for i, e in nb.items()}
    return KripkeModel(states, edges, props, noms)


@dataclass(frozen=True)
class Witness:
    model: KripkeModel
    assignment: dict
    state: State

    def to_json(self) -> dict:
        return {"model": self.model.to_json(), "assignment": dict(self.assignment), "state": self.state}


def _names(f: Formula) -> tuple[list[str], list[str]]:
    fv = sorted(free_vars(f))
    return fv, fv + sorted({g.var for g in subformulas(f) if isinstance(g, Down)} - set(fv))


def _search(f: Formula, F: FrameClass, n: int, batches) -> Witness | None:
    fv, names = _names(f)
    space = VarSpace(n, names)
    free_mask = np.ones(space.size, dtype=bool)
    for x in names[len(fv):]:
        free_mask &= space.digits[x] == 0
    for batch, rel, pb, nb in batches:
        val = batch.evaluate(f, space)
        hit = np.bitwise_or.reduce(val[:, free_mask, :].reshape(-1, batch.words), axis=0) & batch.valid
        m = _first_bit(hit)
        if m is None:
            continue
        K = _model_from_arrays(rel, pb, nb, m)
        word, bit = divmod(m, 64)
        cell = (val[:, :, word] >> np.uint64(bit)) & np.uint64(1)
        cell[:, ~free_mask] = 0
        w, gi = (int(v[0]) for v in np.nonzero(cell))
        g = {x: v for x, v in space.assignment(gi).items() if x in fv}
        if not check(K, g, w, f) or not frame_satisfies(K, F):
            raise AssertionError("oracle produced an invalid witness")
        return Witness(K, g, w)
    return None


def sat_bounded(f: Formula, F: FrameClass, max_states: int, min_states: int = 1) -> Witness | None:
    """First witness with at most ``max_states`` states, or None (which is not "unsat")."""
    if max_states < 1:
        raise ModelError("bound must be at least 1")
    props, noms = propositions(f), nominals(f)
    for n in range(max(1, min_states), max_states + 1):
        w = _search(f, F, n, iter_batches(n, F, props, noms))
        if w is not None:
            return w
    return None


def sat_in_frames(f: Formula, F: FrameClass, frames: Iterable[np.ndarray]) -> Witness | None:
    """Search only the given frames (boolean adjacency matrices), under every labeling.

    Frames outside ``F`` are skipped.
    """
    props, noms = propositions(f), nominals(f)
    by_size: dict[int, list[np.ndarray]] = {}
    for r in frames:
        r = np.asarray(r, dtype=bool)
        by_size.setdefault(r.shape[0], []).append(r)
    for n in sorted(by_size):
        rels = _filter(np.stack(by_size[n]), F)
        if not len(rels):
            continue
        L, pext, nloc = _label_grid(n, props, noms)
        per = max(1, (1 << 15) // L)

        def batches():
            for s in range(0, len(rels), per):
                r = rels[s : s + per]
                R = len(r)
                rel = np.repeat(r, L, axis=0)
                pb = {p: np.tile(e, (R, 1)) for p, e in pext.items()}
                nb = {i: np.tile(e, (R, 1)) for i, e in nloc.items()}
                yield ModelBatch(rel, pb, nb), rel, pb, nb

        w = _search(f, F, n, batches())
        if w is not None:
            return w
    return None
