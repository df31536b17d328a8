"""Boolean functions as truth tables, Post-lattice membership and clone closure.

A :class:`BoolFun` stores its truth table as an integer bitmask: bit ``k`` is
the value on the argument tuple whose bits spell ``k`` (first argument is the
most significant bit).  The textual form ``f#<bits>/<arity>`` lists the bits
in index order, so ``f#0001/2`` is conjunction.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Union

import numpy as np


class CloneError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class BoolFun:
    arity: int
    table: int
    name: str | None = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        if self.arity < 0:
            raise CloneError("arity must be non-negative")
        if not 0 <= self.table < (1 << (1 << self.arity)):
            raise CloneError(f"table {self.table} does not fit arity {self.arity}")

    @property
    def size(self) -> int:
        return 1 << self.arity

    def bits(self) -> str:
        return "".join(str((self.table >> k) & 1) for k in range(self.size))

    def __call__(self, *args: int) -> int:
        return eval_fun(self, args)

    def __str__(self) -> str:
        return self.name or f"f#{self.bits()}/{self.arity}"

    def __repr__(self) -> str:
        return f"BoolFun({self})"

    @classmethod
    def from_bits(cls, bits: str, arity: int | None = None, name: str | None = None) -> "BoolFun":
        if arity is None:
            arity = max(len(bits) - 1, 0).bit_length()
        if len(bits) != 1 << arity or set(bits) - {"0", "1"}:
            raise CloneError(f"bad truth table {bits!r} for arity {arity}")
        table = sum(1 << k for k, b in enumerate(bits) if b == "1")
        return cls(arity, table, name)

    @classmethod
    def from_callable(cls, arity: int, fn, name: str | None = None) -> "BoolFun":
        table = 0
        for k in range(1 << arity):
            if fn(*index_to_args(k, arity)):
                table |= 1 << k
        return cls(arity, table, name)


def index_to_args(k: int, arity: int) -> tuple[int, ...]:
    return tuple((k >> (arity - 1 - i)) & 1 for i in range(arity))


def args_to_index(args: Iterable[int]) -> int:
    k = 0
    for a in args:
        k = (k << 1) | (1 if a else 0)
    return k


def eval_fun(f: BoolFun, args) -> int:
    args = tuple(args)
    if len(args) != f.arity:
        raise CloneError(f"{f} expects {f.arity} arguments, got {len(args)}")
    return (f.table >> args_to_index(args)) & 1


ZERO = BoolFun(0, 0, "0")
ONE = BoolFun(0, 1, "1")
ID = BoolFun(1, 0b10, "id")
NOT = BoolFun(1, 0b01, "not")
AND = BoolFun(2, 0b1000, "and")
OR = BoolFun(2, 0b1110, "or")
XOR = BoolFun(2, 0b0110, "xor")
IMPLIES = BoolFun(2, 0b1011, "impl")
# x and not y: the S1 base
AND_NOT = BoolFun.from_callable(2, lambda x, y: x and not y)
# x and (y or z): with 0, the S11 base
AND_OR = BoolFun.from_callable(3, lambda x, y, z: x and (y or z))
# (x and not y) or (x and not z) or (not y and not z): the D base
DUAL_MAJ = BoolFun.from_callable(
    3, lambda x, y, z: (x and not y) or (x and not z) or (not y and not z)
)

ALIASES: dict[str, BoolFun] = {
    "and": AND,
    "or": OR,
    "not": NOT,
    "xor": XOR,
    "impl": IMPLIES,
    "0": ZERO,
    "1": ONE,
    "id": ID,
}


def parse_fun(text: str) -> BoolFun:
    """Parse a connective name or a ``f#bits/arity`` literal."""
    text = text.strip()
    if text in ALIASES:
        return ALIASES[text]
    if text.startswith("f#"):
        body = text[2:]
        if "/" in body:
            bits, _, ar = body.partition("/")
            if not ar.isdigit():
                raise CloneError(f"bad arity in {text!r}")
            return canonical(BoolFun.from_bits(bits, int(ar)))
        return canonical(BoolFun.from_bits(body))
    raise CloneError(f"unknown connective {text!r}")


def canonical(f: BoolFun) -> BoolFun:
    """Return the aliased instance for ``f`` if one exists (so names print nicely)."""
    for g in ALIASES.values():
        if g == f:
            return g
    return f


def constant(value: int, arity: int = 0) -> BoolFun:
    return BoolFun(arity, ((1 << (1 << arity)) - 1) if value else 0)


def projection(i: int, arity: int) -> BoolFun:
    return BoolFun.from_callable(arity, lambda *a: a[i])


# -- properties --------------------------------------------------------------


class Prop(enum.Enum):
    ZERO_REPRODUCING = "0-reproducing"
    ONE_REPRODUCING = "1-reproducing"
    MONOTONE = "monotone"
    ZERO_SEPARATING = "0-separating"
    ONE_SEPARATING = "1-separating"
    SELF_DUAL = "self-dual"
    AFFINE = "affine"
    AT_MOST_ONE_VARIABLE = "depends-on-<=1-variable"
    DISJUNCTION_SHAPED = "disjunction-shaped"
    CONJUNCTION_SHAPED = "conjunction-shaped"
    IDENTITY_OR_CONSTANT = "identity-or-constant"


def _lift(f: BoolFun) -> BoolFun:
    # a nullary constant behaves like the unary constant for every property
    if f.arity == 0:
        return constant(f.table, 1)
    return f


def _value(f: BoolFun, k: int) -> int:
    return (f.table >> k) & 1


def essential_variables(f: BoolFun) -> list[int]:
    out = []
    for i in range(f.arity):
        bit = 1 << (f.arity - 1 - i)
        if any(_value(f, k) != _value(f, k | bit) for k in range(f.size) if not k & bit):
            out.append(i)
    return out


def is_constant(f: BoolFun) -> bool:
    return f.table == 0 or f.table == (1 << f.size) - 1


def has_property(f: BoolFun, prop: Prop) -> bool:
    f = _lift(f)
    n, size = f.arity, f.size
    full = size - 1
    if prop is Prop.ZERO_REPRODUCING:
        return _value(f, 0) == 0
    if prop is Prop.ONE_REPRODUCING:
        return _value(f, full) == 1
    if prop is Prop.MONOTONE:
        for k in range(size):
            for i in range(n):
                bit = 1 << i
                if not k & bit and _value(f, k) > _value(f, k | bit):
                    return False
        return True
    if prop in (Prop.ZERO_SEPARATING, Prop.ONE_SEPARATING):
        t = 1 if prop is Prop.ONE_SEPARATING else 0
        for i in range(n):
            bit = 1 << (n - 1 - i)
            if all(bool(k & bit) == bool(t) for k in range(size) if _value(f, k) == t):
                return True
        return False
    if prop is Prop.SELF_DUAL:
        return all(_value(f, k) != _value(f, full ^ k) for k in range(size))
    if prop is Prop.AFFINE:
        c = _value(f, 0)
        return all(
            _value(f, a ^ b) ^ c == (_value(f, a) ^ c) ^ (_value(f, b) ^ c)
            for a in range(size)
            for b in range(size)
        )
    if prop is Prop.AT_MOST_ONE_VARIABLE:
        return len(essential_variables(f)) <= 1
    if prop is Prop.DISJUNCTION_SHAPED:
        if is_constant(f):
            return True
        ess = essential_variables(f)
        mask = sum(1 << (n - 1 - i) for i in ess)
        return all(_value(f, k) == (1 if k & mask else 0) for k in range(size))
    if prop is Prop.CONJUNCTION_SHAPED:
        if is_constant(f):
            return True
        ess = essential_variables(f)
        mask = sum(1 << (n - 1 - i) for i in ess)
        return all(_value(f, k) == (1 if k & mask == mask else 0) for k in range(size))
    if prop is Prop.IDENTITY_OR_CONSTANT:
        if is_constant(f):
            return True
        ess = essential_variables(f)
        if len(ess) != 1:
            return False
        bit = 1 << (n - 1 - ess[0])
        return all(_value(f, k) == (1 if k & bit else 0) for k in range(size))
    raise CloneError(f"unknown property {prop}")


# -- named clones ------------------------------------------------------------


class CloneId(enum.Enum):
    BF = "BF"
    R1 = "R1"
    M = "M"
    S1 = "S1"
    S11 = "S11"
    D = "D"
    V = "V"
    E = "E"
    E0 = "E0"
    N = "N"
    N2 = "N2"
    I = "I"  # noqa: E741
    I0 = "I0"
    I1 = "I1"
    I2 = "I2"
    L = "L"

    def __str__(self) -> str:
        return self.value

    @property
    def base(self) -> frozenset[BoolFun]:
        return BASES[self]

    def contains_function(self, f: BoolFun) -> bool:
        """Property-based membership of a single function in this clone."""
        return all(has_property(f, p) for p in _PROFILE[self])


BASES: dict[CloneId, frozenset[BoolFun]] = {
    CloneId.BF: frozenset({AND, NOT}),
    CloneId.R1: frozenset({OR, IMPLIES}),
    CloneId.M: frozenset({OR, AND, ZERO, ONE}),
    CloneId.S1: frozenset({AND_NOT}),
    CloneId.S11: frozenset({AND_OR, ZERO}),
    CloneId.D: frozenset({DUAL_MAJ}),
    CloneId.V: frozenset({OR, ZERO, ONE}),
    CloneId.E: frozenset({AND, ZERO, ONE}),
    CloneId.E0: frozenset({AND, ZERO}),
    CloneId.N: frozenset({NOT, ZERO, ONE}),
    CloneId.N2: frozenset({NOT}),
    CloneId.I: frozenset({ID, ZERO, ONE}),
    CloneId.I0: frozenset({ID, ZERO}),
    CloneId.I1: frozenset({ID, ONE}),
    CloneId.I2: frozenset({ID}),
    # no listed base; the standard one for the affine functions
    CloneId.L: frozenset({XOR, ONE}),
}

_P = Prop
_PROFILE: dict[CloneId, tuple[Prop, ...]] = {
    CloneId.BF: (),
    CloneId.R1: (_P.ONE_REPRODUCING,),
    CloneId.M: (_P.MONOTONE,),
    CloneId.S1: (_P.ONE_SEPARATING,),
    CloneId.S11: (_P.ONE_SEPARATING, _P.MONOTONE),
    CloneId.D: (_P.SELF_DUAL,),
    CloneId.V: (_P.DISJUNCTION_SHAPED,),
    CloneId.E: (_P.CONJUNCTION_SHAPED,),
    CloneId.E0: (_P.CONJUNCTION_SHAPED, _P.ZERO_REPRODUCING),
    CloneId.N: (_P.AT_MOST_ONE_VARIABLE,),
    CloneId.N2: (_P.AT_MOST_ONE_VARIABLE, _P.SELF_DUAL),
    CloneId.I: (_P.IDENTITY_OR_CONSTANT,),
    CloneId.I0: (_P.IDENTITY_OR_CONSTANT, _P.ZERO_REPRODUCING),
    CloneId.I1: (_P.IDENTITY_OR_CONSTANT, _P.ONE_REPRODUCING),
    CloneId.I2: (_P.IDENTITY_OR_CONSTANT, _P.ZERO_REPRODUCING, _P.ONE_REPRODUCING),
    CloneId.L: (_P.AFFINE,),
}


# -- closure -----------------------------------------------------------------

# A witness term is either ("var", i) or (BoolFun, (term, ...)).
Term = Union[tuple[str, int], tuple[BoolFun, tuple]]


def _compose(f: BoolFun, cols: list[np.ndarray], width: int) -> np.ndarray:
    """Vectorised f(g1, ..., gn) on tables stored as ints of ``width`` bits."""
    mask = (1 << width) - 1
    dtype = cols[0].dtype if cols else np.int64
    if f.arity == 0:
        return np.array([mask if f.table else 0], dtype=np.int64)
    out = np.zeros_like(cols[0])
    for k in range(f.size):
        if not (f.table >> k) & 1:
            continue
        term = np.full_like(cols[0], mask)
        for i, a in enumerate(index_to_args(k, f.arity)):
            term &= cols[i] if a else (~cols[i] & mask)
        out |= term
    return out.astype(dtype)


@lru_cache(maxsize=256)
def _slice(base: frozenset[BoolFun], arity: int) -> dict[int, Term]:
    """All tables of the given arity in [base], each with a composition witness."""
    known: dict[int, Term] = {}
    for known in _rounds(base, arity):
        pass
    return known


def _rounds(base: frozenset[BoolFun], arity: int) -> Iterator[dict[int, Term]]:
    """Semi-naive closure at one arity; yields the growing table map after each round."""
    width = 1 << arity
    full = 1 << width
    known: dict[int, Term] = {}
    for i in range(arity):
        known.setdefault(projection(i, arity).table, ("var", i))
    funs = sorted(base, key=lambda f: (f.arity, f.table))
    new = list(known)
    first = True
    while new or first:
        old = [t for t in known if t not in set(new)]
        found: dict[int, Term] = {}
        for f in funs:
            if f.arity == 0:
                if first:
                    tab = (full - 1) if f.table else 0
                    if tab not in known and tab not in found:
                        found[tab] = (f, ())
                continue
            allk = list(known)
            # semi-naive: at least one argument drawn from the previous round's new tables
            for pos in range(f.arity):
                pools = [old] * pos + [new] + [allk] * (f.arity - pos - 1)
                if any(not p for p in pools):
                    continue
                grids = np.meshgrid(*[np.asarray(p, dtype=np.int64) for p in pools], indexing="ij")
                cols = [g.ravel() for g in grids]
                res = _compose(f, cols, width)
                uniq, idx = np.unique(res, return_index=True)
                for tab, j in zip(uniq.tolist(), idx.tolist()):
                    if tab in known or tab in found:
                        continue
                    args = tuple(known[int(c[j])] for c in cols)
                    found[tab] = (f, args)
        first = False
        known.update(found)
        new = list(found)
        yield known
        if len(known) == full:
            break


def _constants_slice(base: frozenset[BoolFun]) -> dict[int, Term]:
    # a constant is in [B] as a nullary function iff its unary version is
    unary = _slice(base, 1)
    out: dict[int, Term] = {}
    for c in (0, 1):
        tab = 0b11 if c else 0
        if tab in unary:
            out[c] = unary[tab]
    return out


def closure_slice(base: Iterable[BoolFun], max_arity: int) -> frozenset[BoolFun]:
    """Every function of arity <= max_arity in the clone generated by ``base``."""
    base = frozenset(base)
    out = set()
    for c in _constants_slice(base):
        out.add(BoolFun(0, c))
    for a in range(1, max_arity + 1):
        out.update(BoolFun(a, t) for t in _slice(base, a))
    return frozenset(out)


def in_closure(f: BoolFun, base: Iterable[BoolFun]) -> bool:
    base = frozenset(base)
    if f.arity == 0:
        return f.table in _constants_slice(base)
    return f.table in _slice(base, f.arity)


def express(f: BoolFun, base: Iterable[BoolFun]) -> Term | None:
    """Composition witness for ``f`` over ``base`` (projections ``("var", i)``), or None.

    For nullary ``f`` the witness is a unary term whose variable is irrelevant.
    """
    base = frozenset(base)
    if f.arity == 0:
        return _constants_slice(base).get(f.table)
    return _slice(base, f.arity).get(f.table)


def eval_term(term: Term, args) -> int:
    head, rest = term
    if head == "var":
        return args[rest]
    return eval_fun(head, [eval_term(t, args) for t in rest])


def term_table(term: Term, arity: int) -> int:
    return sum(eval_term(term, index_to_args(k, arity)) << k for k in range(1 << arity))


def term_str(term: Term, names=None) -> str:
    head, rest = term
    if head == "var":
        return names[rest] if names else f"x{rest}"
    if not rest:
        return str(head)
    return f"{head}({', '.join(term_str(t, names) for t in rest)})"


# -- classification ----------------------------------------------------------

SUBSET_TRACKED = tuple(CloneId)
CONTAINS_TRACKED = (CloneId.S1, CloneId.S11, CloneId.D, CloneId.E0, CloneId.N2, CloneId.I0)


@dataclass(frozen=True)
class CloneReport:
    subset_of: frozenset[CloneId]
    contains: frozenset[CloneId]
    bf_with_true: bool

    def subset(self, clone: CloneId) -> bool:
        return clone in self.subset_of

    def contains_clone(self, clone: CloneId) -> bool:
        return clone in self.contains

    @property
    def contains_s1(self) -> bool:
        return CloneId.S1 in self.contains

    @property
    def contains_s11(self) -> bool:
        return CloneId.S11 in self.contains

    @property
    def contains_d(self) -> bool:
        return CloneId.D in self.contains

    @property
    def contains_e0(self) -> bool:
        return CloneId.E0 in self.contains

    @property
    def contains_n2(self) -> bool:
        return CloneId.N2 in self.contains

    @property
    def contains_i0(self) -> bool:
        return CloneId.I0 in self.contains

    def to_json(self) -> dict:
        return {
            "subsetOf": sorted(c.value for c in self.subset_of),
            "contains": sorted(c.value for c in self.contains),
            "bfWithTrue": self.bf_with_true,
        }


# Post's maximal clones: a property shared by all of B is shared by all of [B]
_MAXIMAL = (Prop.ZERO_REPRODUCING, Prop.ONE_REPRODUCING, Prop.MONOTONE, Prop.SELF_DUAL, Prop.AFFINE)


def _reaches(base: frozenset[BoolFun], g: BoolFun) -> bool:
    """``g`` lies in [base]; stops as soon as it appears."""
    shared = [p for p in _MAXIMAL if all(has_property(f, p) for f in base)]
    if not shared:
        return True  # outside every maximal clone, so [base] is BF
    if any(not has_property(g, p) for p in shared):
        return False
    if g.arity == 0:
        return g.table in _constants_slice(base)
    return any(g.table in known for known in _rounds(base, g.arity))


def clone_contains(base: Iterable[BoolFun], clone: CloneId) -> bool:
    """[base] contains ``clone``, decided on the arity-3 slice."""
    base = frozenset(base)
    return all(_reaches(base, g) for g in clone.base)


@lru_cache(maxsize=1024)
def _classify(base: frozenset[BoolFun]) -> CloneReport:
    subset = frozenset(c for c in SUBSET_TRACKED if all(c.contains_function(f) for f in base))
    contains = frozenset(c for c in CONTAINS_TRACKED if clone_contains(base, c))
    bf = CloneId.S1 in contains or CloneId.D in contains
    return CloneReport(subset, contains, bf)


def classify(base: Iterable[BoolFun]) -> CloneReport:
    return _classify(frozenset(base))


def all_functions(arity: int) -> list[BoolFun]:
    return [BoolFun(arity, t) for t in range(1 << (1 << arity))]


def generates_bf_with_true(base: Iterable[BoolFun]) -> bool:
    """Direct check that [base + {1}] is all of BF, via the binary slice."""
    s = closure_slice(frozenset(base) | {ONE}, 2)
    return all(f in s for f in all_functions(2))


