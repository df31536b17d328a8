"""Hybrid formulae: AST, parser, printers, simple form and connective rewriting.

Concrete syntax (keywords, with Unicode aliases)::

    dia φ | ◇φ        box φ | □φ        down x . φ | ↓x.φ      at t φ | @t φ
    not φ | ¬φ        φ & ψ | φ ∧ ψ     φ | ψ | φ ∨ ψ          φ -> ψ | φ → ψ
    and(φ, ψ)         f#0110/2(φ, ψ)    0  1

Atoms may carry a kind prefix: ``p:`` proposition, ``n:`` nominal, ``x:``
state variable.  A bare identifier is a state variable when a binder for it
is in scope; otherwise it is a proposition, or a nominal right after ``@``.
"""

from __future__ import annotations

import enum
import random
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

from .boolean_clones import (
    ALIASES,
    AND,
    ID,
    IMPLIES,
    NOT,
    ONE,
    OR,
    ZERO,
    BoolFun,
    CloneError,
    essential_variables,
    express,
    index_to_args,
    parse_fun,
)

RESERVED_PREFIX = "_k"


class FormulaError(ValueError):
    pass


class ParseError(FormulaError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class AtomKind(enum.Enum):
    PROP = "p"
    NOM = "n"
    VAR = "x"


class Op(enum.Enum):
    DIA = "dia"
    BOX = "box"
    DOWN = "down"
    AT = "at"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Atom:
    kind: AtomKind
    name: str

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.name}"


@dataclass(frozen=True)
class Atomic:
    atom: Atom


@dataclass(frozen=True)
class Apply:
    fun: BoolFun
    args: tuple = ()

    def __post_init__(self):
        if len(self.args) != self.fun.arity:
            raise FormulaError(f"{self.fun} expects {self.fun.arity} arguments, got {len(self.args)}")


@dataclass(frozen=True)
class Dia:
    body: "Formula"


@dataclass(frozen=True)
class Box:
    body: "Formula"


@dataclass(frozen=True)
class Down:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class At:
    target: Atom
    body: "Formula"

    def __post_init__(self):
        if self.target.kind is AtomKind.PROP:
            raise FormulaError(f"@ cannot target proposition {self.target.name}")


Formula = Union[Atomic, Apply, Dia, Box, Down, At]


# -- constructors ------------------------------------------------------------

TRUE = Apply(ONE)
FALSE = Apply(ZERO)


def prop(name: str) -> Atomic:
    return Atomic(Atom(AtomKind.PROP, name))


def nom(name: str) -> Atomic:
    return Atomic(Atom(AtomKind.NOM, name))


def var(name: str) -> Atomic:
    return Atomic(Atom(AtomKind.VAR, name))


def neg(f: Formula) -> Apply:
    return Apply(NOT, (f,))


def conj(*fs: Formula) -> Formula:
    """Left-associated conjunction (``TRUE`` when empty)."""
    if not fs:
        return TRUE
    out = fs[0]
    for f in fs[1:]:
        out = Apply(AND, (out, f))
    return out


def disj(*fs: Formula) -> Formula:
    if not fs:
        return FALSE
    out = fs[0]
    for f in fs[1:]:
        out = Apply(OR, (out, f))
    return out


def at(target: Atom | str, body: Formula) -> At:
    if isinstance(target, str):
        target = Atom(AtomKind.VAR, target)
    return At(target, body)


def at_nom(name: str, body: Formula) -> At:
    return At(Atom(AtomKind.NOM, name), body)


# -- traversal ---------------------------------------------------------------


def children(f: Formula) -> tuple:
    if isinstance(f, Atomic):
        return ()
    if isinstance(f, Apply):
        return f.args
    return (f.body,)


def subformulas(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(children(g)))


def size(f: Formula) -> int:
    """Number of symbols: atoms, constants, connectives and operators."""
    return sum(1 for _ in subformulas(f))


def depth(f: Formula) -> int:
    ch = children(f)
    return 1 + max((depth(c) for c in ch), default=0)


def operators_used(f: Formula) -> frozenset[Op]:
    out = set()
    for g in subformulas(f):
        if isinstance(g, Dia):
            out.add(Op.DIA)
        elif isinstance(g, Box):
            out.add(Op.BOX)
        elif isinstance(g, Down):
            out.add(Op.DOWN)
        elif isinstance(g, At):
            out.add(Op.AT)
    return frozenset(out)


def functions_used(f: Formula) -> frozenset[BoolFun]:
    return frozenset(g.fun for g in subformulas(f) if isinstance(g, Apply))


def atoms(f: Formula) -> frozenset[Atom]:
    """Every atom occurring in f (bound variables included), plus @-targets."""
    out = set()
    for g in subformulas(f):
        if isinstance(g, Atomic):
            out.add(g.atom)
        elif isinstance(g, At):
            out.add(g.target)
    return frozenset(out)


def propositions(f: Formula) -> list[str]:
    return sorted(a.name for a in atoms(f) if a.kind is AtomKind.PROP)


def nominals(f: Formula) -> list[str]:
    return sorted(a.name for a in atoms(f) if a.kind is AtomKind.NOM)


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Atomic):
        return frozenset({f.atom.name}) if f.atom.kind is AtomKind.VAR else frozenset()
    if isinstance(f, Apply):
        out: frozenset[str] = frozenset()
        for a in f.args:
            out |= free_vars(a)
        return out
    if isinstance(f, Down):
        return free_vars(f.body) - {f.var}
    if isinstance(f, At):
        t = {f.target.name} if f.target.kind is AtomKind.VAR else set()
        return free_vars(f.body) | t
    return free_vars(f.body)


def bound_vars(f: Formula) -> frozenset[str]:
    return frozenset(g.var for g in subformulas(f) if isinstance(g, Down))


def all_names(f: Formula) -> frozenset[str]:
    return frozenset(a.name for a in atoms(f)) | bound_vars(f)


def rebuild(f: Formula, body_map) -> Formula:
    """Apply ``body_map`` to every immediate subformula."""
    if isinstance(f, Atomic):
        return f
    if isinstance(f, Apply):
        return Apply(f.fun, tuple(body_map(a) for a in f.args))
    if isinstance(f, Down):
        return Down(f.var, body_map(f.body))
    if isinstance(f, At):
        return At(f.target, body_map(f.body))
    return type(f)(body_map(f.body))


class FreshNames:
    """Generator of reserved names ``_k<n>`` not clashing with ``taken``."""

    def __init__(self, taken: Iterable[str] = ()):
        self.n = 0
        for name in taken:
            if name.startswith(RESERVED_PREFIX) and name[2:].isdigit():
                self.n = max(self.n, int(name[2:]) + 1)

    def __call__(self) -> str:
        name = f"{RESERVED_PREFIX}{self.n}"
        self.n += 1
        return name


def substitute(f: Formula, old: Atom, new: Atom) -> Formula:
    """Replace free occurrences of ``old`` (as atom or @-target) by ``new``."""

    def go(g: Formula) -> Formula:
        if isinstance(g, Atomic):
            return Atomic(new) if g.atom == old else g
        if isinstance(g, Down) and old.kind is AtomKind.VAR and g.var == old.name:
            return g
        if isinstance(g, At):
            return At(new if g.target == old else g.target, go(g.body))
        return rebuild(g, go)

    return go(f)


def rename_bound(f: Formula, fresh: FreshNames | None = None) -> Formula:
    """Rename binders so that each is bound once and no bound name is also free."""
    fresh = fresh or FreshNames(all_names(f))
    seen: set[str] = set(free_vars(f))

    def go(g: Formula, env: dict[str, str]) -> Formula:
        if isinstance(g, Atomic):
            a = g.atom
            if a.kind is AtomKind.VAR and a.name in env:
                return var(env[a.name])
            return g
        if isinstance(g, At):
            t = g.target
            if t.kind is AtomKind.VAR and t.name in env:
                t = Atom(AtomKind.VAR, env[t.name])
            return At(t, go(g.body, env))
        if isinstance(g, Down):
            name = g.var
            if name in seen:
                name = fresh()
            seen.add(name)
            return Down(name, go(g.body, {**env, g.var: name}))
        return rebuild(g, lambda h: go(h, env))

    return go(f, {})


# -- lexer -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<tt>f\#[01]+(?:/\d+)?)
  | (?P<atom>[pnx]:[A-Za-z_][A-Za-z0-9_']*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<const>[01](?![0-9]))
  | (?P<arrow>->|→)
  | (?P<sym>[()\.,&|∧∨¬~!◇□↓@])
    """,
    re.VERBOSE,
)

_SYMBOL_ALIASES = {
    "◇": "dia",
    "□": "box",
    "↓": "down",
    "@": "at",
    "¬": "not",
    "~": "not",
    "!": "not",
    "∧": "&",
    "∨": "|",
    "→": "->",
}

KEYWORDS = {"dia", "box", "down", "at"}
_INFIX_WORDS = {"and": "&", "or": "|", "impl": "->"}
_RESERVED = KEYWORDS | set(ALIASES)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tok = m.group()
        if kind != "ws":
            if kind in ("sym", "arrow"):
                tok = _SYMBOL_ALIASES.get(tok, tok)
                kind = "word" if tok in KEYWORDS or tok == "not" else "sym"
            elif kind == "ident":
                kind = "word" if tok in _RESERVED else "ident"
            out.append(Token(kind, tok, pos))
        pos = m.end()
    out.append(Token("eof", "", len(text)))
    return out


# -- parser ------------------------------------------------------------------

_BINARY = {"&": AND, "|": OR, "->": IMPLIES}


class _Parser:
    def __init__(self, text: str, allow_reserved: bool = False):
        self.toks = tokenize(text)
        self.i = 0
        self.allow_reserved = allow_reserved

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if self.tok.text != text:
            raise ParseError(f"expected {text!r}, found {self.tok.text or 'end of input'!r}", self.tok.pos)
        return self.advance()

    def infix_op(self) -> str | None:
        t = self.tok
        if t.kind == "sym" and t.text in _BINARY:
            return t.text
        if t.kind == "word" and t.text in _INFIX_WORDS and self.toks[self.i + 1].text != "(":
            return _INFIX_WORDS[t.text]
        return None

    def parse(self) -> Formula:
        f = self.implication(frozenset())
        if self.tok.kind != "eof":
            raise ParseError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return f

    def implication(self, scope) -> Formula:
        left = self.disjunction(scope)
        if self.infix_op() == "->":
            self.advance()
            right = self.implication(scope)
            return Apply(IMPLIES, (left, right))
        return left

    def disjunction(self, scope) -> Formula:
        left = self.conjunction(scope)
        while self.infix_op() == "|":
            self.advance()
            left = Apply(OR, (left, self.conjunction(scope)))
        return left

    def conjunction(self, scope) -> Formula:
        left = self.unary(scope)
        while self.infix_op() == "&":
            self.advance()
            left = Apply(AND, (left, self.unary(scope)))
        return left

    def unary(self, scope) -> Formula:
        t = self.tok
        if t.kind == "word":
            if t.text == "dia":
                self.advance()
                return Dia(self.unary(scope))
            if t.text == "box":
                self.advance()
                return Box(self.unary(scope))
            if t.text == "at":
                self.advance()
                target = self.target(scope)
                return At(target, self.unary(scope))
            if t.text == "down":
                self.advance()
                name = self.ident()
                self.expect(".")
                return Down(name, self.implication(scope | {name}))
            if t.text in ALIASES:
                return self.application(parse_fun(t.text), scope)
        if t.kind == "tt":
            self.advance()
            try:
                fun = parse_fun(t.text)
            except CloneError as e:
                raise ParseError(str(e), t.pos) from None
            return self.finish_application(fun, t, scope)
        if t.kind == "const":
            self.advance()
            return TRUE if t.text == "1" else FALSE
        if t.kind == "atom":
            self.advance()
            kind, name = t.text.split(":", 1)
            self.check_name(name, t.pos)
            return Atomic(Atom(AtomKind(kind), name))
        if t.kind == "ident":
            self.advance()
            self.check_name(t.text, t.pos)
            kind = AtomKind.VAR if t.text in scope else AtomKind.PROP
            return Atomic(Atom(kind, t.text))
        if t.text == "(":
            self.advance()
            f = self.implication(scope)
            self.expect(")")
            return f
        raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.pos)

    def application(self, fun: BoolFun, scope) -> Formula:
        t = self.advance()
        return self.finish_application(fun, t, scope)

    def finish_application(self, fun: BoolFun, t: Token, scope) -> Formula:
        if self.tok.text == "(":
            self.advance()
            args = []
            if self.tok.text != ")":
                args.append(self.implication(scope))
                while self.tok.text == ",":
                    self.advance()
                    args.append(self.implication(scope))
            self.expect(")")
        elif fun.arity == 1:
            args = [self.unary(scope)]
        elif fun.arity == 0:
            args = []
        else:
            raise ParseError(f"{t.text} needs a parenthesised argument list", self.tok.pos)
        if len(args) != fun.arity:
            raise ParseError(f"{t.text} expects {fun.arity} arguments, got {len(args)}", t.pos)
        return Apply(fun, tuple(args))

    def target(self, scope) -> Atom:
        t = self.advance()
        if t.kind == "atom":
            kind, name = t.text.split(":", 1)
            if kind == "p":
                raise ParseError("@ cannot target a proposition", t.pos)
            self.check_name(name, t.pos)
            return Atom(AtomKind(kind), name)
        if t.kind == "ident":
            self.check_name(t.text, t.pos)
            return Atom(AtomKind.VAR if t.text in scope else AtomKind.NOM, t.text)
        raise ParseError(f"expected a nominal or variable after @, found {t.text!r}", t.pos)

    def ident(self) -> str:
        t = self.advance()
        if t.kind != "ident":
            raise ParseError(f"expected a variable name, found {t.text!r}", t.pos)
        self.check_name(t.text, t.pos)
        return t.text

    def check_name(self, name: str, pos: int) -> None:
        if name.startswith(RESERVED_PREFIX) and not self.allow_reserved:
            raise ParseError(f"names starting with {RESERVED_PREFIX!r} are reserved", pos)


def parse(text: str, allow_reserved: bool = False) -> Formula:
    """Parse concrete syntax.  User input may not use the reserved ``_k`` names;
    pass ``allow_reserved`` to read back formulae produced by the library."""
    return _Parser(text, allow_reserved).parse()


# -- printers ----------------------------------------------------------------


def _name_ok(name: str) -> bool:
    return name not in _RESERVED


def unparse(f: Formula) -> str:
    """Canonical keyword syntax; ``parse(unparse(f), allow_reserved=True) == f``."""

    def atom(a: Atom, scope, target: bool) -> str:
        bare = _name_ok(a.name)
        if a.kind is AtomKind.VAR:
            return a.name if bare and a.name in scope else f"x:{a.name}"
        if a.kind is AtomKind.NOM:
            return a.name if bare and target and a.name not in scope else f"n:{a.name}"
        return a.name if bare and a.name not in scope else f"p:{a.name}"

    def go(g: Formula, scope) -> str:
        if isinstance(g, Atomic):
            return atom(g.atom, scope, False)
        if isinstance(g, Apply):
            if g.fun.arity == 0:
                return "1" if g.fun.table else "0"
            name = str(g.fun)
            if g.fun.arity == 1 and g.fun.name:
                return f"{name} {go(g.args[0], scope)}"
            return f"{name}({', '.join(go(a, scope) for a in g.args)})"
        if isinstance(g, Dia):
            return f"dia {go(g.body, scope)}"
        if isinstance(g, Box):
            return f"box {go(g.body, scope)}"
        if isinstance(g, Down):
            if not _name_ok(g.var):
                raise FormulaError(f"cannot print binder named after keyword {g.var!r}")
            return f"down {g.var} . {go(g.body, scope | {g.var})}"
        if isinstance(g, At):
            return f"at {atom(g.target, scope, True)} {go(g.body, scope)}"
        raise TypeError(g)

    return go(f, frozenset())


_INFIX_SYM = {AND: ("∧", 2), OR: ("∨", 1), IMPLIES: ("→", 0)}
_PREC_ATOM = 10


def _ends_open(g: Formula) -> bool:
    # a trailing ↓ body extends right, so such a formula cannot be a left operand
    if isinstance(g, Down):
        return True
    if isinstance(g, (Dia, Box, At)):
        return _ends_open(g.body)
    if isinstance(g, Apply) and g.args:
        if g.fun in _INFIX_SYM or g.fun == NOT:
            return _ends_open(g.args[-1])
    return False


def display(f: Formula) -> str:
    """Compact Unicode infix rendering (reparseable, names printed bare when possible)."""

    def atom(a: Atom, scope, target: bool) -> str:
        bare = _name_ok(a.name)
        if a.kind is AtomKind.VAR:
            return a.name if bare and a.name in scope else f"x:{a.name}"
        if a.kind is AtomKind.NOM:
            return a.name if bare and target and a.name not in scope else f"n:{a.name}"
        return a.name if bare and a.name not in scope else f"p:{a.name}"

    def go(g: Formula, scope) -> tuple[str, int]:
        if isinstance(g, Atomic):
            return atom(g.atom, scope, False), _PREC_ATOM
        if isinstance(g, Apply):
            if g.fun.arity == 0:
                return ("1" if g.fun.table else "0"), _PREC_ATOM
            if g.fun == NOT:
                return "¬" + wrap(g.args[0], scope, 3), 3
            if g.fun in _INFIX_SYM:
                sym, prec = _INFIX_SYM[g.fun]
                left, right = g.args
                right_assoc = g.fun == IMPLIES
                ls = wrap(left, scope, prec + (1 if right_assoc else 0), left_side=True)
                rs = wrap(right, scope, prec + (0 if right_assoc else 1))
                return f"{ls} {sym} {rs}", prec
            return f"{g.fun}({', '.join(go(a, scope)[0] for a in g.args)})", _PREC_ATOM
        if isinstance(g, Dia):
            return "◇" + wrap(g.body, scope, 3), 3
        if isinstance(g, Box):
            return "□" + wrap(g.body, scope, 3), 3
        if isinstance(g, At):
            body = wrap(g.body, scope, 3)
            sep = " " if body[0].isalnum() or body[0] == "_" else ""
            return f"@{atom(g.target, scope, True)}{sep}{body}", 3
        if isinstance(g, Down):
            s, _ = go(g.body, scope | {g.var})
            return f"↓{g.var}.{s}", 3
        raise TypeError(g)

    def wrap(g: Formula, scope, need: int, left_side: bool = False) -> str:
        s, prec = go(g, scope)
        if prec < need or (left_side and _ends_open(g)):
            return f"({s})"
        return s

    return go(f, frozenset())[0]


def unicode_to_ascii(text: str) -> str:
    for sym, word in _SYMBOL_ALIASES.items():
        text = text.replace(sym, f" {word} ")
    return text


# -- simple form -------------------------------------------------------------


@dataclass(frozen=True)
class Prefix:
    op: Op
    arg: Atom | str | None = None  # variable name for DOWN, target atom for AT

    def wrap(self, body: Formula) -> Formula:
        if self.op is Op.DIA:
            return Dia(body)
        if self.op is Op.BOX:
            return Box(body)
        if self.op is Op.DOWN:
            return Down(self.arg, body)
        return At(self.arg, body)

    def __str__(self) -> str:
        if self.op is Op.DIA:
            return "◇"
        if self.op is Op.BOX:
            return "□"
        if self.op is Op.DOWN:
            return f"↓{self.arg}."
        return f"@{self.arg.name}"


@dataclass(frozen=True)
class Literal:
    """Terminal of a simple-form chain: an atom or a constant, possibly negated."""

    atom: Atom | None
    value: int = 1  # constant value when atom is None
    negated: bool = False

    def formula(self) -> Formula:
        if self.atom is None:
            return TRUE if self.value else FALSE
        base = Atomic(self.atom)
        return neg(base) if self.negated else base

    def __str__(self) -> str:
        if self.atom is None:
            return str(self.value)
        return ("¬" if self.negated else "") + self.atom.name


@dataclass(frozen=True)
class Chain:
    prefix: tuple[Prefix, ...]
    literal: Literal

    def formula(self) -> Formula:
        f = self.literal.formula()
        for p in reversed(self.prefix):
            f = p.wrap(f)
        return f

    def __str__(self) -> str:
        return "".join(str(p) for p in self.prefix) + str(self.literal)


def in_n_fragment(f: Formula) -> bool:
    return all(len(essential_variables(g)) <= 1 for g in functions_used(f))


def to_chain(f: Formula) -> Chain:
    """Simple form of an N-fragment formula as an operator prefix plus a literal."""
    prefix: list[Prefix] = []
    negated = False
    g = f
    while True:
        if isinstance(g, Atomic):
            return Chain(tuple(prefix), Literal(g.atom, negated=negated))
        if isinstance(g, Apply):
            ess = essential_variables(g.fun)
            if len(ess) > 1:
                raise FormulaError(f"{g.fun} depends on more than one argument")
            if not ess:
                # constant function: the value is fixed whatever the arguments
                value = g.fun.table & 1
                return Chain(tuple(prefix), Literal(None, value ^ negated))
            i = ess[0]
            k_true = next(k for k in range(g.fun.size) if index_to_args(k, g.fun.arity)[i] == 1)
            if not (g.fun.table >> k_true) & 1:
                negated = not negated
            g = g.args[i]
        elif isinstance(g, Dia):
            prefix.append(Prefix(Op.BOX if negated else Op.DIA))
            g = g.body
        elif isinstance(g, Box):
            prefix.append(Prefix(Op.DIA if negated else Op.BOX))
            g = g.body
        elif isinstance(g, Down):
            prefix.append(Prefix(Op.DOWN, g.var))
            g = g.body
        elif isinstance(g, At):
            prefix.append(Prefix(Op.AT, g.target))
            g = g.body
        else:
            raise TypeError(g)


def to_simple_form(f: Formula) -> Formula:
    return to_chain(f).formula()


# -- rewriting over a base ---------------------------------------------------


class ReplaceOne(enum.Enum):
    DOWN_XX = "downXx"
    AT_XX = "atXx"


def rewrite_over_base(
    f: Formula, base: Iterable[BoolFun], one_replacement: ReplaceOne | str = ReplaceOne.DOWN_XX
) -> Formula:
    """Re-express every connective over ``base``, eliminating constant 1 if needed.

    Each 1 that ``base`` cannot produce is replaced by ``↓z.z`` or ``@z z`` for a
    fresh state variable ``z``; both are valid, so the result is equivalent.
    """
    base = frozenset(base)
    mode = ReplaceOne(one_replacement)
    fresh = FreshNames(all_names(f))
    ext = base | {ONE}

    def true_formula() -> Formula:
        if ONE in base:
            return TRUE
        z = fresh()
        return Down(z, var(z)) if mode is ReplaceOne.DOWN_XX else At(Atom(AtomKind.VAR, z), var(z))

    def instantiate(term, args: list[Formula]) -> Formula:
        head, rest = term
        if head == "var":
            return args[rest]
        if head == ONE and ONE not in base:
            return true_formula()
        return Apply(head, tuple(instantiate(t, args) for t in rest))

    def go(g: Formula) -> Formula:
        if isinstance(g, Apply):
            args = [go(a) for a in g.args]
            if g.fun in base:
                return Apply(g.fun, tuple(args))
            term = express(g.fun, ext)
            if term is None:
                raise FormulaError(f"{g.fun} is not expressible over the given base")
            if g.fun.arity == 0:
                # unary witness, its argument is irrelevant
                return instantiate(term, [true_formula()])
            return instantiate(term, args)
        return rebuild(g, go)

    return go(f)


# -- random generation -------------------------------------------------------


def random_formula(
    rng: random.Random,
    depth: int,
    funs: Iterable[BoolFun],
    ops: Iterable[Op] = tuple(Op),
    props: Iterable[str] = ("p", "q"),
    noms: Iterable[str] = ("i",),
    vars: Iterable[str] = ("x", "y"),
    leaf_prob: float = 0.3,
) -> Formula:
    """Random closed formula (no free state variables)."""
    funs = sorted(funs, key=lambda f: (f.arity, f.table))
    ops = list(ops)
    props, noms, vars = list(props), list(noms), list(vars)
    consts = [f for f in funs if f.arity == 0]
    inner = [f for f in funs if f.arity > 0]

    def leaf(bound: list[str]) -> Formula:
        choices: list[Formula] = [prop(p) for p in props] + [nom(i) for i in noms]
        choices += [var(x) for x in bound] + [Apply(c) for c in consts]
        return rng.choice(choices)

    def go(d: int, bound: list[str]) -> Formula:
        if d <= 0 or rng.random() < leaf_prob or not (inner or ops):
            return leaf(bound)
        n_ops = len(ops)
        pick = rng.randrange(n_ops + len(inner))
        if pick < n_ops:
            op = ops[pick]
            if op is Op.DIA:
                return Dia(go(d - 1, bound))
            if op is Op.BOX:
                return Box(go(d - 1, bound))
            if op is Op.DOWN:
                x = rng.choice(vars)
                return Down(x, go(d - 1, bound + [x]))
            targets = [Atom(AtomKind.NOM, i) for i in noms] + [Atom(AtomKind.VAR, x) for x in bound]
            if not targets:
                return Dia(go(d - 1, bound)) if Op.DIA in ops else go(d - 1, bound)
            return At(rng.choice(targets), go(d - 1, bound))
        fun = inner[pick - n_ops]
        return Apply(fun, tuple(go(d - 1, bound) for _ in range(fun.arity)))

    return go(depth, [])
