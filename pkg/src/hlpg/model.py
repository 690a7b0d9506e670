"""Symmetric nets, high-level Petri games, the ``.hlpg`` text format and the
expansion into P/T Petri games."""
from __future__ import annotations

import itertools
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

SYSTEM = "sys"
ENVIRONMENT = "env"

DEFAULT_EXPANSION_CAP = 10**6


class ModelError(Exception):
    """Semantic error in a game description."""


class ParseError(ModelError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class CapExceeded(Exception):
    """A configurable size cap was exceeded (expansion, group, arena...)."""


# ---------------------------------------------------------------------------
# Colors and terms


@dataclass(frozen=True)
class ColorClass:
    id: str
    colors: tuple[str, ...]
    ordered: bool = False
    # static subclasses as contiguous blocks of ``colors``
    subclasses: tuple[tuple[str, ...], ...] = ()

    def __post_init__(self):
        if not self.subclasses:
            object.__setattr__(self, "subclasses", (self.colors,))
        if len(set(self.colors)) != len(self.colors):
            raise ModelError(f"class {self.id}: duplicate colors")
        if tuple(itertools.chain.from_iterable(self.subclasses)) != self.colors:
            raise ModelError(f"class {self.id}: static subclasses must partition the colors")
        if any(not block for block in self.subclasses):
            raise ModelError(f"class {self.id}: empty static subclass")

    def __len__(self) -> int:
        return len(self.colors)

    def index(self, color: str) -> int:
        return self.colors.index(color)

    def succ(self, color: str) -> str:
        i = self.colors.index(color)
        return self.colors[(i + 1) % len(self.colors)]

    def subclass_of(self, color: str) -> int:
        """0-based index of the static subclass containing ``color``."""
        for q, block in enumerate(self.subclasses):
            if color in block:
                return q
        raise KeyError(color)


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Succ:
    arg: "Term"

    def __str__(self) -> str:
        return f"succ({self.arg})"


@dataclass(frozen=True)
class All:
    """Broadcast term: every color of a class (the symmetric ``C.all`` function)."""

    cls: str

    def __str__(self) -> str:
        return f"all({self.cls})"


Term = Var | Succ | All


def term_var(term: Term) -> str | None:
    while isinstance(term, Succ):
        term = term.arg
    return term.name if isinstance(term, Var) else None


def succ_depth(term: Term) -> int:
    depth = 0
    while isinstance(term, Succ):
        term = term.arg
        depth += 1
    return depth


@dataclass(frozen=True)
class Literal:
    """``x = y``, ``x != y`` or ``x in C[q]`` (q is 1-based in the text format)."""

    op: str  # "eq" | "neq" | "in"
    left: str
    right: str | None = None
    cls: str | None = None
    subclass: int | None = None  # 0-based

    def __str__(self) -> str:
        if self.op == "eq":
            return f"{self.left} = {self.right}"
        if self.op == "neq":
            return f"{self.left} != {self.right}"
        return f"{self.left} in {self.cls}[{self.subclass + 1}]"


@dataclass(frozen=True)
class Place:
    id: str
    kind: str
    bad: bool
    type: tuple[str, ...]

    @property
    def is_env(self) -> bool:
        return self.kind == ENVIRONMENT


@dataclass(frozen=True)
class Transition:
    id: str
    variables: tuple[tuple[str, str], ...]
    guard: tuple[Literal, ...] = ()

    def var_class(self, name: str) -> str:
        for v, c in self.variables:
            if v == name:
                return c
        raise KeyError(name)


ArcExpr = tuple[tuple[Term, ...], ...]


@dataclass(frozen=True)
class SymmetricGame:
    name: str
    classes: tuple[ColorClass, ...]
    places: tuple[Place, ...]
    transitions: tuple[Transition, ...]
    # keys: (place, transition) for input arcs, (transition, place) for output arcs
    arcs: Mapping[tuple[str, str], ArcExpr]
    initial: tuple[tuple[str, tuple[str, ...]], ...]

    _class_map: dict = field(default=None, init=False, repr=False, compare=False, hash=False)
    _place_map: dict = field(default=None, init=False, repr=False, compare=False, hash=False)
    _trans_map: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_class_map", {c.id: c for c in self.classes})
        object.__setattr__(self, "_place_map", {p.id: p for p in self.places})
        object.__setattr__(self, "_trans_map", {t.id: t for t in self.transitions})
        validate(self)

    def color_class(self, cid: str) -> ColorClass:
        return self._class_map[cid]

    def place(self, pid: str) -> Place:
        return self._place_map[pid]

    def transition(self, tid: str) -> Transition:
        return self._trans_map[tid]

    def inputs(self, tid: str) -> list[tuple[str, ArcExpr]]:
        return [(p.id, self.arcs[(p.id, tid)]) for p in self.places if (p.id, tid) in self.arcs]

    def outputs(self, tid: str) -> list[tuple[str, ArcExpr]]:
        return [(p.id, self.arcs[(tid, p.id)]) for p in self.places if (tid, p.id) in self.arcs]

    def colors_of_type(self, typ: Sequence[str]) -> list[tuple[str, ...]]:
        return list(itertools.product(*(self.color_class(c).colors for c in typ)))

    def modes(self, t: Transition) -> Iterator[dict[str, str]]:
        """All of Val(t) (guard not applied), in signature-product order."""
        names = [v for v, _ in t.variables]
        for combo in itertools.product(*(self.color_class(c).colors for _, c in t.variables)):
            yield dict(zip(names, combo))



def validate(game: SymmetricGame) -> None:
    ids = [c.id for c in game.classes]
    if len(set(ids)) != len(ids):
        raise ModelError("duplicate class identifier")
    names = [p.id for p in game.places] + [t.id for t in game.transitions]
    if len(set(names)) != len(names):
        raise ModelError("duplicate place/transition identifier")
    classes = {c.id: c for c in game.classes}
    for p in game.places:
        if p.kind not in (SYSTEM, ENVIRONMENT):
            raise ModelError(f"place {p.id}: kind must be sys or env")
        if p.bad and p.kind != SYSTEM:
            raise ModelError(f"place {p.id}: bad flag on environment place")
        for c in p.type:
            if c not in classes:
                raise ModelError(f"place {p.id}: unknown class {c}")
    for t in game.transitions:
        seen = set()
        for v, c in t.variables:
            if c not in classes:
                raise ModelError(f"transition {t.id}: unknown class {c}")
            if v in seen:
                raise ModelError(f"transition {t.id}: duplicate variable {v}")
            seen.add(v)
        for lit in t.guard:
            for v in (lit.left, lit.right):
                if v is not None and v not in seen:
                    raise ModelError(f"transition {t.id}: unbound variable {v} in guard")
            if lit.op in ("eq", "neq") and t.var_class(lit.left) != t.var_class(lit.right):
                raise ModelError(f"transition {t.id}: guard compares variables of different classes")
            if lit.op == "in":
                if lit.cls != t.var_class(lit.left):
                    raise ModelError(f"transition {t.id}: membership in foreign class {lit.cls}")
                if not 0 <= lit.subclass < len(classes[lit.cls].subclasses):
                    raise ModelError(f"transition {t.id}: unknown static subclass {lit.cls}[{lit.subclass + 1}]")
    places = {p.id: p for p in game.places}
    trans = {t.id: t for t in game.transitions}
    for (src, dst), expr in game.arcs.items():
        if src in places and dst in trans:
            p, t = places[src], trans[dst]
        elif src in trans and dst in places:
            p, t = places[dst], trans[src]
        else:
            raise ModelError(f"arc {src} -> {dst}: must connect a place and a transition")
        for tup in expr:
            if len(tup) != len(p.type):
                raise ModelError(f"arc {src} -> {dst}: arity mismatch with type of {p.id}")
            for term, cid in zip(tup, p.type):
                var = term_var(term)
                if isinstance(term, All) or (isinstance(term, Succ) and var is None):
                    inner = term
                    while isinstance(inner, Succ):
                        inner = inner.arg
                    if inner.cls not in classes:
                        raise ModelError(f"arc {src} -> {dst}: unknown class {inner.cls}")
                    if isinstance(term, Succ):
                        raise ModelError(f"arc {src} -> {dst}: succ applied to all()")
                    if inner.cls != cid:
                        raise ModelError(f"arc {src} -> {dst}: class mismatch at {term}")
                    continue
                if var is None or var not in dict(t.variables):
                    raise ModelError(f"arc {src} -> {dst}: unbound variable {var}")
                vcls = t.var_class(var)
                if vcls != cid:
                    raise ModelError(f"arc {src} -> {dst}: class mismatch at {term}")
                if isinstance(term, Succ) and not classes[vcls].ordered:
                    raise ModelError(f"arc {src} -> {dst}: succ on unordered class {vcls}")
    for pid, colors in game.initial:
        if pid not in places:
            raise ModelError(f"initial marking: unknown place {pid}")
        typ = places[pid].type
        if len(colors) != len(typ):
            raise ModelError(f"initial marking: arity mismatch on {pid}")
        for c, cid in zip(colors, typ):
            if c not in classes[cid].colors:
                raise ModelError(f"initial marking: {c} is not a color of {cid}")


# ---------------------------------------------------------------------------
# Mode evaluation


def eval_term(game: SymmetricGame, trans: Transition, term: Term, mode: Mapping[str, str]) -> list[str]:
    if isinstance(term, All):
        return list(game.color_class(term.cls).colors)
    if isinstance(term, Var):
        return [mode[term.name]]
    cls = game.color_class(trans.var_class(term_var(term)))
    return [cls.succ(c) for c in eval_term(game, trans, term.arg, mode)]


def eval_arc(game: SymmetricGame, trans: Transition, expr: ArcExpr, mode: Mapping[str, str]) -> Counter:
    """Multiset of color tuples produced by an arc expression under ``mode``."""
    out: Counter = Counter()
    for tup in expr:
        for combo in itertools.product(*(eval_term(game, trans, term, mode) for term in tup)):
            out[combo] += 1
    return out


def eval_mode(game: SymmetricGame, t: str, mode: Mapping[str, str], side: tuple[str, str]) -> Counter:
    """v(p,t) or v(t,p) as a multiset over ty(p); ``side`` is the arc key."""
    expr = game.arcs.get(side)
    if expr is None:
        return Counter()
    return eval_arc(game, game.transition(t), expr, mode)


def eval_guard(game: SymmetricGame, t: str | Transition, mode: Mapping[str, str]) -> bool:
    trans = game.transition(t) if isinstance(t, str) else t
    for lit in trans.guard:
        if lit.op == "eq" and mode[lit.left] != mode[lit.right]:
            return False
        if lit.op == "neq" and mode[lit.left] == mode[lit.right]:
            return False
        if lit.op == "in" and game.color_class(lit.cls).subclass_of(mode[lit.left]) != lit.subclass:
            return False
    return True


# ---------------------------------------------------------------------------
# P/T games


def place_name(pid: str, colors: Sequence[str]) -> str:
    if not colors:
        return pid
    if len(colors) == 1:
        return f"{pid}.{colors[0]}"
    return f"{pid}.({','.join(colors)})"


def transition_name(tid: str, values: Sequence[str]) -> str:
    return place_name(tid, values)


@dataclass
class PTGame:
    """Expanded P/T Petri game with integer-indexed places and transitions.

    ``place_key[i] = (p, colors)`` and ``trans_key[j] = (t, mode_values)``
    record the high-level origin of every node.
    """

    source: SymmetricGame | None
    place_names: list[str]
    place_key: list[tuple[str, tuple[str, ...]]]
    env: list[bool]
    bad: list[bool]
    trans_names: list[str]
    trans_key: list[tuple[str, tuple[str, ...]]]
    pre: list[dict[int, int]]
    post: list[dict[int, int]]
    initial: dict[int, int]
    place_index: dict = field(default_factory=dict)
    trans_index: dict = field(default_factory=dict)
    postset: list[tuple[int, ...]] = field(default_factory=list)

    def __post_init__(self):
        self.place_index = {n: i for i, n in enumerate(self.place_names)}
        self.trans_index = {n: i for i, n in enumerate(self.trans_names)}
        posts: list[list[int]] = [[] for _ in self.place_names]
        for j, pre in enumerate(self.pre):
            for p in pre:
                posts[p].append(j)
        self.postset = [tuple(sorted(ts, key=lambda j: self.trans_names[j])) for ts in posts]
        self.pre_places = [tuple(sorted(pre)) for pre in self.pre]
        self.env_transition = [any(self.env[p] for p in pre) for pre in self.pre]

    @property
    def n_places(self) -> int:
        return len(self.place_names)

    @property
    def n_transitions(self) -> int:
        return len(self.trans_names)

    def marking(self, names: Iterable[str]) -> dict[int, int]:
        m: Counter = Counter()
        for n in names:
            m[self.place_index[n]] += 1
        return dict(m)

    def marking_names(self, m: Mapping[int, int]) -> list[str]:
        out = []
        for p, k in sorted(m.items(), key=lambda kv: self.place_names[kv[0]]):
            out.extend([self.place_names[p]] * k)
        return out


def expand(game: SymmetricGame, cap: int = DEFAULT_EXPANSION_CAP) -> PTGame:
    place_names, place_key, env, bad = [], [], [], []
    pindex: dict[tuple[str, tuple[str, ...]], int] = {}
    for p in game.places:
        for colors in game.colors_of_type(p.type):
            pindex[(p.id, colors)] = len(place_names)
            place_names.append(place_name(p.id, colors))
            place_key.append((p.id, colors))
            env.append(p.is_env)
            bad.append(p.bad)
    trans_names, trans_key, pre, post = [], [], [], []
    for t in game.transitions:
        ins, outs = game.inputs(t.id), game.outputs(t.id)
        for mode in game.modes(t):
            if not eval_guard(game, t, mode):
                continue
            if len(trans_names) >= cap:
                raise CapExceeded(f"expansion exceeds {cap} P/T transitions")
            values = tuple(mode[v] for v, _ in t.variables)
            trans_names.append(transition_name(t.id, values))
            trans_key.append((t.id, values))
            pre.append(_flow(pindex, ins, game, t, mode))
            post.append(_flow(pindex, outs, game, t, mode))
    initial: Counter = Counter()
    for pid, colors in game.initial:
        initial[pindex[(pid, tuple(colors))]] += 1
    return PTGame(game, place_names, place_key, env, bad, trans_names, trans_key, pre, post, dict(initial))


def _flow(pindex, arcs, game, trans, mode) -> dict[int, int]:
    flow: Counter = Counter()
    for pid, expr in arcs:
        for colors, k in eval_arc(game, trans, expr, mode).items():
            flow[pindex[(pid, colors)]] += k
    return dict(flow)


def pt_enabled(pt: PTGame, m: Mapping[int, int], t: int) -> bool:
    return all(m.get(p, 0) >= k for p, k in pt.pre[t].items())


def pt_fire(pt: PTGame, m: Mapping[int, int], t: int) -> dict[int, int]:
    if not pt_enabled(pt, m, t):
        raise ValueError(f"transition {pt.trans_names[t]} is not enabled")
    out = dict(m)
    for p, k in pt.pre[t].items():
        out[p] -= k
        if not out[p]:
            del out[p]
    for p, k in pt.post[t].items():
        out[p] = out.get(p, 0) + k
    return out


# ---------------------------------------------------------------------------
# .hlpg text format

_TOKEN = re.compile(r"\s*(?:(#.*)|(->|!=|[{}()|:=&\[\],])|([A-Za-z0-9_][A-Za-z0-9_']*))")


class _Tokens:
    def __init__(self, text: str, lineno: int):
        self.items: list[tuple[str, int]] = []
        self.lineno = lineno
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                if text[pos:].strip() == "":
                    break
                raise ParseError(f"unexpected character {text[pos]!r}", lineno, pos + 1)
            if m.group(1):
                break
            tok = m.group(2) or m.group(3)
            if tok is None:
                break
            self.items.append((tok, m.start(2) if m.group(2) else m.start(3)))
            pos = m.end()
        self.i = 0
        self.length = len(text)

    def peek(self) -> str | None:
        return self.items[self.i][0] if self.i < len(self.items) else None

    def col(self) -> int:
        return (self.items[self.i][1] if self.i < len(self.items) else self.length) + 1

    def next(self, what: str = "token") -> str:
        if self.i >= len(self.items):
            raise ParseError(f"expected {what}, found end of line", self.lineno, self.col())
        tok = self.items[self.i][0]
        self.i += 1
        return tok

    def expect(self, tok: str) -> None:
        col = self.col()
        got = self.next(repr(tok))
        if got != tok:
            raise ParseError(f"expected {tok!r}, found {got!r}", self.lineno, col)

    def ident(self, what: str = "identifier") -> str:
        col = self.col()
        tok = self.next(what)
        if not re.match(r"[A-Za-z_0-9]", tok):
            raise ParseError(f"expected {what}, found {tok!r}", self.lineno, col)
        return tok

    def accept(self, tok: str) -> bool:
        if self.peek() == tok:
            self.i += 1
            return True
        return False

    def done(self) -> None:
        if self.i < len(self.items):
            raise ParseError(f"unexpected {self.peek()!r}", self.lineno, self.col())


def _parse_term(toks: _Tokens) -> Term:
    name = toks.ident("term")
    if name in ("succ", "all") and toks.peek() == "(":
        toks.expect("(")
        if name == "all":
            cls = toks.ident("class")
            toks.expect(")")
            return All(cls)
        inner = _parse_term(toks)
        toks.expect(")")
        return Succ(inner)
    return Var(name)


def _parse_tuple_set(toks: _Tokens, item) -> list[tuple]:
    toks.expect("{")
    out = []
    while not toks.accept("}"):
        toks.expect("(")
        tup = []
        while not toks.accept(")"):
            tup.append(item(toks))
            toks.accept(",")
        out.append(tuple(tup))
        toks.accept(",")
    return out


def parse_game(text: str) -> SymmetricGame:
    name = "game"
    classes: list[ColorClass] = []
    places: list[Place] = []
    transitions: list[Transition] = []
    arcs: dict[tuple[str, str], ArcExpr] = {}
    initial: list[tuple[str, tuple[str, ...]]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        toks = _Tokens(line, lineno)
        kw = toks.peek()
        if kw is None:
            continue
        col = toks.col()
        toks.next()
        if kw == "game":
            name = toks.ident("game name")
        elif kw == "class":
            cid = toks.ident("class name")
            ordered = toks.accept("ordered")
            toks.expect("=")
            toks.expect("{")
            blocks: list[list[str]] = [[]]
            while not toks.accept("}"):
                if toks.accept("|"):
                    blocks.append([])
                else:
                    blocks[-1].append(toks.ident("color"))
            colors = tuple(itertools.chain.from_iterable(blocks))
            try:
                classes.append(ColorClass(cid, colors, ordered, tuple(tuple(b) for b in blocks)))
            except ModelError as exc:
                raise ParseError(str(exc), lineno, col) from None
        elif kw == "place":
            pid = toks.ident("place name")
            kcol = toks.col()
            kind = toks.next("sys|env")
            if kind not in (SYSTEM, ENVIRONMENT):
                raise ParseError(f"expected sys or env, found {kind!r}", lineno, kcol)
            bad = toks.accept("bad")
            toks.expect(":")
            toks.expect("(")
            typ = []
            while not toks.accept(")"):
                typ.append(toks.ident("class"))
            if toks.accept("init"):
                for colors in _parse_tuple_set(toks, lambda t: t.ident("color")):
                    initial.append((pid, colors))
            places.append(Place(pid, kind, bad, tuple(typ)))
        elif kw == "trans":
            tid = toks.ident("transition name")
            toks.expect("vars")
            toks.expect("(")
            variables = []
            while not toks.accept(")"):
                v = toks.ident("variable")
                toks.expect(":")
                variables.append((v, toks.ident("class")))
            guard = []
            if toks.accept("guard"):
                while True:
                    left = toks.ident("variable")
                    lcol = toks.col()
                    op = toks.next("operator")
                    if op == "=":
                        guard.append(Literal("eq", left, toks.ident("variable")))
                    elif op == "!=":
                        guard.append(Literal("neq", left, toks.ident("variable")))
                    elif op == "in":
                        cls = toks.ident("class")
                        toks.expect("[")
                        q = int(toks.ident("subclass index"))
                        toks.expect("]")
                        guard.append(Literal("in", left, cls=cls, subclass=q - 1))
                    else:
                        raise ParseError(f"unknown guard operator {op!r}", lineno, lcol)
                    if not toks.accept("&"):
                        break
            transitions.append(Transition(tid, tuple(variables), tuple(guard)))
        elif kw == "arc":
            src = toks.ident("arc source")
            toks.expect("->")
            dst = toks.ident("arc target")
            toks.expect(":")
            expr = _parse_tuple_set(toks, _parse_term)
            key = (src, dst)
            arcs[key] = arcs.get(key, ()) + tuple(expr)
        else:
            raise ParseError(f"unknown keyword {kw!r}", lineno, col)
        toks.done()
    return SymmetricGame(name, tuple(classes), tuple(places), tuple(transitions), arcs, tuple(initial))


def print_game(game: SymmetricGame) -> str:
    lines = [f"game {game.name}"]
    for c in game.classes:
        body = " | ".join(" ".join(block) for block in c.subclasses)
        lines.append(f"class {c.id}{' ordered' if c.ordered else ''} = {{ {body} }}")
    init: dict[str, list] = {}
    for pid, colors in game.initial:
        init.setdefault(pid, []).append(colors)
    for p in game.places:
        line = f"place {p.id} {p.kind}{' bad' if p.bad else ''} : ( {' '.join(p.type)} )"
        if p.id in init:
            line += " init { " + " ".join("( " + " ".join(cs) + " )" for cs in init[p.id]) + " }"
        lines.append(line)
    for t in game.transitions:
        line = f"trans {t.id} vars ( {' '.join(f'{v}:{c}' for v, c in t.variables)} )"
        if t.guard:
            line += " guard " + " & ".join(str(lit) for lit in t.guard)
        lines.append(line)
    for (src, dst), expr in game.arcs.items():
        body = " ".join("( " + " ".join(str(term) for term in tup) + " )" for tup in expr)
        lines.append(f"arc {src} -> {dst} : {{ {body} }}")
    return "\n".join(lines) + "\n"


def to_dot(pt: PTGame) -> str:
    """Expanded game as DOT: system places gray, bad places double-bordered."""
    lines = ["digraph game {"]
    for i, name in enumerate(pt.place_names):
        attrs = ["shape=circle", f'label="{name}"']
        if not pt.env[i]:
            attrs += ["style=filled", "fillcolor=gray"]
        if pt.bad[i]:
            attrs.append("peripheries=2")
        if i in pt.initial:
            attrs.append("penwidth=2")
        lines.append(f"  p{i} [{', '.join(attrs)}];")
    for j, name in enumerate(pt.trans_names):
        lines.append(f'  t{j} [shape=box, label="{name}"];')
        lines += [f"  p{p} -> t{j};" for p in sorted(pt.pre[j])]
        lines += [f"  t{j} -> p{p};" for p in sorted(pt.post[j])]
    lines.append("}")
    return "\n".join(lines) + "\n"
