"""Hard-instance generators: source problems encoded as hybrid formulas.

Each generator comes with a direct solver for its source problem, so every
generated formula carries a ground-truth label.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from .boolean_clones import AND, NOT, ONE, OR, ZERO
from .formula import (
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
    Formula,
    FreshNames,
    all_names,
    conj,
    disj,
    free_vars,
    functions_used,
    neg,
    nominals,
    subformulas,
    var,
)
from .kripke import FrameClass


class InstanceError(ValueError):
    """Malformed source instance."""


def _v(name: str) -> Atom:
    return Atom(AtomKind.VAR, name)


def _downs(names, body: Formula) -> Formula:
    for x in reversed(list(names)):
        body = Down(x, body)
    return body


# -- ORD ---------------------------------------------------------------------


@dataclass(frozen=True)
class OrdInstance:
    vertices: tuple[str, ...]
    succ: tuple[tuple[str, str], ...]
    s: str
    t: str

    def __post_init__(self):
        vs = list(self.vertices)
        if len(set(vs)) != len(vs) or not vs:
            raise InstanceError("vertices must be distinct and nonempty")
        if self.s not in vs or self.t not in vs:
            raise InstanceError("s and t must be vertices")
        nxt = {}
        has_pred = set()
        for a, b in self.succ:
            if a not in vs or b not in vs or a in nxt or b in has_pred or a == b:
                raise InstanceError(f"successor pair {a}->{b} breaks the line shape")
            nxt[a] = b
            has_pred.add(b)
        if len(self.succ) != len(vs) - 1:
            raise InstanceError("successor relation must cover all vertices in one line")
        start = [v for v in vs if v not in has_pred]
        seen = [start[0]]
        while seen[-1] in nxt:
            seen.append(nxt[seen[-1]])
        if len(seen) != len(vs):
            raise InstanceError("successor relation is not a single path")

    @classmethod
    def line(cls, vertices, s: str, t: str) -> "OrdInstance":
        vs = tuple(vertices)
        return cls(vs, tuple(zip(vs, vs[1:])), s, t)

    def order(self) -> list[str]:
        nxt = dict(self.succ)
        cur = next(v for v in self.vertices if v not in nxt.values())
        out = [cur]
        while cur in nxt:
            cur = nxt[cur]
            out.append(cur)
        return out

    def truth(self) -> bool:
        """s ≤ t in the order induced by the successor relation."""
        o = self.order()
        return o.index(self.s) <= o.index(self.t)


def _alpha(inst: OrdInstance) -> list[tuple[str, str]]:
    # @v_k ↓v_l for every successor pair except those into s, so s keeps its state
    return [(a, b) for a, b in inst.succ if b != inst.s]


def _copy_steps(inst: OrdInstance, body: Formula) -> Formula:
    steps = _alpha(inst) * len(inst.vertices)
    for a, b in reversed(steps):
        body = At(_v(a), Down(b, body))
    return body


def gen_ord(inst: OrdInstance) -> Formula:
    """``↓v1.⋯↓vn.◇↓s. αⁿ @t □0``: satisfiable iff s ≤ t (arbitrary or transitive frames)."""
    tail = _copy_steps(inst, At(_v(inst.t), Box(FALSE)))
    return _downs(inst.vertices, Dia(Down(inst.s, tail)))


def gen_ord_neg(inst: OrdInstance) -> Formula:
    """``↓v1.◇↓v2.⋯◇↓vn. αⁿ @s ¬t``: satisfiable iff not s ≤ t, over every frame class."""
    body = _copy_steps(inst, At(_v(inst.s), neg(var(inst.t))))
    vs = list(inst.vertices)
    for x in reversed(vs[1:]):
        body = Dia(Down(x, body))
    return Down(vs[0], body)


# -- QBF ---------------------------------------------------------------------


@dataclass(frozen=True)
class QbfInstance:
    """Prenex CNF: ``prefix`` of (quantifier "E"/"A", variable) and DIMACS-style clauses."""

    prefix: tuple[tuple[str, int], ...]
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        vars_ = [v for _, v in self.prefix]
        if len(set(vars_)) != len(vars_):
            raise InstanceError("variable quantified twice")
        if any(q not in ("E", "A") for q, _ in self.prefix):
            raise InstanceError("quantifiers are E or A")
        for c in self.clauses:
            for lit in c:
                if lit == 0 or abs(lit) not in vars_:
                    raise InstanceError(f"literal {lit} is not over a quantified variable")

    def normalized(self) -> "QbfInstance":
        """Strictly alternating, starting with ∃, by inserting unused variables."""
        used = {v for _, v in self.prefix}
        fresh = itertools.count(max(used, default=0) + 1)
        out: list[tuple[str, int]] = []
        want = "E"
        for q, v in self.prefix:
            if q != want:
                out.append((want, next(fresh)))
                want = q
            out.append((q, v))
            want = "A" if q == "E" else "E"
        return QbfInstance(tuple(out), self.clauses)

    def truth(self) -> bool:
        def go(k: int, val: dict) -> bool:
            if k == len(self.prefix):
                return all(any(val[abs(l)] == (l > 0) for l in c) for c in self.clauses)
            q, v = self.prefix[k]
            branches = (go(k + 1, {**val, v: b}) for b in (False, True))
            return any(branches) if q == "E" else all(branches)

        return go(0, {})


def parse_qdimacs(text: str) -> QbfInstance:
    prefix: list[tuple[str, int]] = []
    clauses: list[tuple[int, ...]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith(("c", "p")):
            continue
        nums = line.split()
        if nums[0] in ("e", "a"):
            q = nums[0].upper()
            try:
                vs = [int(x) for x in nums[1:]]
            except ValueError as e:
                raise InstanceError(f"bad quantifier line: {line}") from e
            if vs[-1:] != [0]:
                raise InstanceError(f"quantifier line must end in 0: {line}")
            prefix += [(q, v) for v in vs[:-1]]
            continue
        try:
            lits = [int(x) for x in nums]
        except ValueError as e:
            raise InstanceError(f"bad clause line: {line}") from e
        if lits[-1:] != [0]:
            raise InstanceError(f"clause must end in 0: {line}")
        clauses.append(tuple(lits[:-1]))
    return QbfInstance(tuple(prefix), tuple(clauses))


QBF_EXAMPLE = QbfInstance(
    (("E", 1), ("A", 2), ("E", 3), ("A", 4)),
    ((1, -2), (-1, 2, 3, -4)),
)


def gen_qbf(inst: QbfInstance, s: str = "s") -> Formula:
    """``(@s◇◇1) ∧ (@s◇□0) ∧ @s◇↓x1.@s□↓x2.⋯ r(ψ)`` over {∧, ∨, 0, 1}."""
    inst = inst.normalized()
    S = Atom(AtomKind.NOM, s)

    def lit(l: int) -> Formula:
        x = _v(f"x{abs(l)}")
        return At(x, Dia(TRUE)) if l > 0 else At(x, Box(FALSE))

    matrix = conj(*[disj(*[lit(l) for l in c]) if c else FALSE for c in inst.clauses]) if inst.clauses else TRUE
    body = matrix
    for q, v in reversed(inst.prefix):
        step = Dia if q == "E" else Box
        body = At(S, step(Down(f"x{v}", body)))
    return conj(At(S, Dia(Dia(TRUE))), At(S, Dia(Box(FALSE))), body)


# -- unreachability in acyclic graphs ----------------------------------------


@dataclass(frozen=True)
class DagInstance:
    n: int
    edges: tuple[tuple[int, int], ...]
    s: int
    t: int

    def __post_init__(self):
        if self.n < 1 or not (1 <= self.s <= self.n and 1 <= self.t <= self.n):
            raise InstanceError("vertices are 1..n and s, t among them")
        for a, b in self.edges:
            if not (1 <= a <= self.n and 1 <= b <= self.n):
                raise InstanceError(f"edge {a}->{b} out of range")
        if self._has_cycle():
            raise InstanceError("graph has a cycle")

    def _succ(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {v: [] for v in range(1, self.n + 1)}
        for a, b in self.edges:
            out[a].append(b)
        return out

    def _has_cycle(self) -> bool:
        succ = self._succ()
        state = dict.fromkeys(succ, 0)

        def dfs(v: int) -> bool:
            state[v] = 1
            for u in succ[v]:
                if state[u] == 1 or (state[u] == 0 and dfs(u)):
                    return True
            state[v] = 2
            return False

        return any(state[v] == 0 and dfs(v) for v in succ)

    def reachable(self) -> bool:
        succ = self._succ()
        stack, seen = [self.s], {self.s}
        while stack:
            v = stack.pop()
            if v == self.t:
                return True
            for u in succ[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return False

    def truth(self) -> bool:
        """No path from s to t."""
        return not self.reachable()


def parse_dag(text: str) -> DagInstance:
    """First line ``n s t``, then one ``a b`` edge per line."""
    rows = [l.split() for l in text.splitlines() if l.strip() and not l.lstrip().startswith("#")]
    try:
        n, s, t = (int(x) for x in rows[0])
        edges = tuple((int(a), int(b)) for a, b in rows[1:])
    except (ValueError, IndexError) as e:
        raise InstanceError("expected 'n s t' then 'a b' lines") from e
    return DagInstance(n, edges, s, t)


def gen_unreach(inst: DagInstance) -> Formula:
    """``(◇ⁿ1 ∧ □ⁿ⁺¹0) ∧ ↓r.@r◇↓x1.⋯@r◇↓xn.(⋀ @xi◇xj ∧ @xt◇xs)`` over {∧, 0, 1}."""
    n = inst.n
    phi1 = TRUE
    for _ in range(n):
        phi1 = Dia(phi1)
    bound = FALSE
    for _ in range(n + 1):
        bound = Box(bound)
    phi1 = conj(phi1, bound)
    x = lambda i: f"x{i}"  # noqa: E731
    checks = [At(_v(x(a)), Dia(var(x(b)))) for a, b in inst.edges]
    checks.append(At(_v(x(inst.t)), Dia(var(x(inst.s)))))
    body = conj(*checks)
    for i in reversed(range(1, n + 1)):
        body = At(_v("r"), Dia(Down(x(i), body)))
    return conj(phi1, Down("r", body))


# -- PARITY ------------------------------------------------------------------


def gen_parity(bits: str) -> Formula:
    """``↓x. b1⋯bn x`` with a negation for every 1: satisfiable iff the number of ones is even."""
    if any(b not in "01" for b in bits):
        raise InstanceError("parity input is a 0/1 string")
    body: Formula = var("x")
    for b in reversed(bits):
        if b == "1":
            body = neg(body)
    return Down("x", body)


def parity_truth(bits: str) -> bool:
    return bits.count("1") % 2 == 0


# -- totalization ------------------------------------------------------------


_TOTALIZE_FUNS = frozenset({AND, OR, NOT, ZERO, ONE})


def relativize(f: Formula, p: str) -> Formula:
    """The map (·)ʳ: ◇ψ ↦ ◇(p ∧ ψ), @tψ ↦ @t(p ∧ ψ), □ψ ↦ □(¬p ∨ ψ).

    Homomorphic elsewhere.  Successors outside p are the padding states that
    make the frame total; □ must ignore them like ◇ does.
    """
    P = Atomic(Atom(AtomKind.PROP, p))

    def go(g: Formula) -> Formula:
        if isinstance(g, Atomic):
            return g
        if isinstance(g, Apply):
            return Apply(g.fun, tuple(go(a) for a in g.args))
        if isinstance(g, Dia):
            return Dia(conj(P, go(g.body)))
        if isinstance(g, Box):
            return Box(disj(neg(P), go(g.body)))
        if isinstance(g, Down):
            return Down(g.var, go(g.body))
        if isinstance(g, At):
            return At(g.target, conj(P, go(g.body)))
        raise TypeError(g)

    return go(f)


def totalize(f: Formula, p: str | None = None) -> Formula:
    """Reduce satisfiability over all frames to satisfiability over total frames.

    Returns ``p ∧ G ∧ relativize(f, p)`` for a fresh proposition p.  When @
    occurs, G says ``@t p`` for every nominal and free variable t, otherwise
    it is empty.  Without the guard a negated jump such as ¬@i i would be
    satisfied by naming a padding state.
    """
    for g in functions_used(f):
        if g not in _TOTALIZE_FUNS:
            raise InstanceError(f"totalization expects ∧, ∨, ¬; found {g}")
    if p is None:
        p = FreshNames(all_names(f))()
    P = Atomic(Atom(AtomKind.PROP, p))
    guard = [P]
    if any(isinstance(g, At) for g in subformulas(f)):
        guard += [At(Atom(AtomKind.NOM, i), P) for i in nominals(f)]
        guard += [At(Atom(AtomKind.VAR, x), P) for x in sorted(free_vars(f))]
    return conj(*guard, relativize(f, p))


# -- sidecars ----------------------------------------------------------------


@dataclass(frozen=True)
class Generated:
    kind: str
    formula: Formula
    label: bool  # satisfiable over every class in ``frames``
    frames: tuple[FrameClass, ...]
    info: dict = field(default_factory=dict)

    def sidecar(self) -> dict:
        return {
            "kind": self.kind,
            "label": "sat" if self.label else "unsat",
            "frames": [F.value for F in self.frames],
            **self.info,
        }

    def sidecar_json(self) -> str:
        return json.dumps(self.sidecar(), sort_keys=True)


ALL_CLASSES = (FrameClass.ALL, FrameClass.TRANS, FrameClass.TOTAL, FrameClass.ER)


def generate(kind: str, text: str) -> Generated:
    """Parse a textual instance of ``kind`` and encode it."""
    text = text.strip()
    if kind in ("ord", "ordneg"):
        inst = parse_ord(text)
        if kind == "ord":
            return Generated(kind, gen_ord(inst), inst.truth(), (FrameClass.ALL, FrameClass.TRANS))
        return Generated(kind, gen_ord_neg(inst), not inst.truth(), ALL_CLASSES)
    if kind == "qbf":
        inst = parse_qdimacs(text)
        return Generated(kind, gen_qbf(inst), inst.truth(), (FrameClass.TRANS,))
    if kind == "unreach":
        inst = parse_dag(text)
        return Generated(kind, gen_unreach(inst), inst.truth(), (FrameClass.TRANS,))
    if kind == "parity":
        return Generated(kind, gen_parity(text), parity_truth(text), ALL_CLASSES)
    raise InstanceError(f"unknown generator {kind!r}")


def parse_ord(text: str) -> OrdInstance:
    """JSON ``{"vertices", "succ", "s", "t"}``, or ``v1 v2 ... vn ; s t`` for a line in list order."""
    if text.startswith("{"):
        try:
            d = json.loads(text)
            return OrdInstance(tuple(d["vertices"]), tuple(tuple(e) for e in d["succ"]), d["s"], d["t"])
        except (KeyError, TypeError, json.JSONDecodeError) as e:
            raise InstanceError(f"bad ORD instance: {e}") from e
    if ";" not in text:
        raise InstanceError("expected 'v1 v2 ... ; s t'")
    left, right = text.split(";", 1)
    vs, st = left.split(), right.split()
    if len(st) != 2:
        raise InstanceError("expected exactly two vertices after ';'")
    return OrdInstance.line(vs, st[0], st[1])
