"""Symmetry groups of symmetric nets and their action on colors, P/T nodes,
markings and decision sets."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

from .model import CapExceeded, ModelError, PTGame, SymmetricGame, place_name, transition_name

DEFAULT_GROUP_CAP = 10**5


@dataclass(frozen=True)
class Symmetry:
    """One permutation per basic class, stored as image indices.

    ``perms[i][a] = b`` maps the a-th color of class i to its b-th color.
    """

    classes: tuple[str, ...]
    perms: tuple[tuple[int, ...], ...]

    def is_identity(self) -> bool:
        return all(p == tuple(range(len(p))) for p in self.perms)

    def color(self, game: SymmetricGame, cls: str, c: str) -> str:
        cc = game.color_class(cls)
        return cc.colors[self.perms[self.classes.index(cls)][cc.index(c)]]

    def colors(self, game: SymmetricGame, types, colors) -> tuple[str, ...]:
        return tuple(self.color(game, cid, c) for cid, c in zip(types, colors))

    def mode(self, game: SymmetricGame, tid: str, mode: Mapping[str, str]) -> dict[str, str]:
        t = game.transition(tid)
        return {v: self.color(game, cls, mode[v]) for v, cls in t.variables}

    def cycles(self, game: SymmetricGame) -> str:
        parts = []
        for cid, perm in zip(self.classes, self.perms):
            colors = game.color_class(cid).colors
            seen = set()
            for start in range(len(perm)):
                if start in seen or perm[start] == start:
                    seen.add(start)
                    continue
                cyc, i = [], start
                while i not in seen:
                    seen.add(i)
                    cyc.append(colors[i])
                    i = perm[i]
                parts.append("(" + " ".join(cyc) + ")")
        return "".join(parts) or "()"


def identity(game: SymmetricGame) -> Symmetry:
    return Symmetry(tuple(c.id for c in game.classes), tuple(tuple(range(len(c))) for c in game.classes))


def compose(s2: Symmetry, s1: Symmetry) -> Symmetry:
    """``s2 ∘ s1``: apply s1 first."""
    return Symmetry(s1.classes, tuple(tuple(p2[p1[a]] for a in range(len(p1))) for p2, p1 in zip(s2.perms, s1.perms)))


def inverse(s: Symmetry) -> Symmetry:
    inv = []
    for p in s.perms:
        q = [0] * len(p)
        for a, b in enumerate(p):
            q[b] = a
        inv.append(tuple(q))
    return Symmetry(s.classes, tuple(inv))


def class_components(cls) -> list[tuple[int, ...]]:
    """All admissible permutations of one class, in enumeration order."""
    n = len(cls.colors)
    if cls.ordered:
        if len(cls.subclasses) > 1:
            return [tuple(range(n))]
        return [tuple((a + r) % n for a in range(n)) for r in range(n)]
    blocks, offset = [], 0
    for block in cls.subclasses:
        idx = list(range(offset, offset + len(block)))
        blocks.append([tuple(p) for p in itertools.permutations(idx)])
        offset += len(block)
    return [tuple(itertools.chain.from_iterable(combo)) for combo in itertools.product(*blocks)]


def group_size(game: SymmetricGame) -> int:
    size = 1
    for cls in game.classes:
        if cls.ordered:
            size *= 1 if len(cls.subclasses) > 1 else len(cls.colors)
        else:
            for block in cls.subclasses:
                for k in range(2, len(block) + 1):
                    size *= k
    return size


def enumerate_symmetries(game: SymmetricGame, cap: int = DEFAULT_GROUP_CAP) -> list[Symmetry]:
    if group_size(game) > cap:
        raise CapExceeded(f"symmetry group of size {group_size(game)} exceeds cap {cap}")
    ids = tuple(c.id for c in game.classes)
    per_class = [class_components(c) for c in game.classes]
    return [Symmetry(ids, combo) for combo in itertools.product(*per_class)]


class PTAction:
    """A symmetry compiled to index permutations of an expanded game."""

    def __init__(self, pt: PTGame, s: Symmetry):
        game = pt.source
        self.symmetry = s
        types = {p.id: p.type for p in game.places}
        self.places = [pt.place_index[place_name(pid, s.colors(game, types[pid], cols))]
                       for pid, cols in pt.place_key]
        sig = {t.id: [c for _, c in t.variables] for t in game.transitions}
        self.transitions = [pt.trans_index[transition_name(tid, s.colors(game, sig[tid], vals))]
                            for tid, vals in pt.trans_key]

    def place(self, p: int) -> int:
        return self.places[p]

    def transition(self, t: int) -> int:
        return self.transitions[t]

    def marking(self, m: Mapping[int, int]) -> dict[int, int]:
        return {self.places[p]: k for p, k in m.items()}

    def decision_set(self, d):
        tr = self.transitions
        pl = self.places
        out = [(pl[p], None if k is None else frozenset(tr[t] for t in k)) for p, k in d]
        out.sort(key=_first)
        return tuple(out)


def _first(entry):
    return entry[0]


def actions(pt: PTGame, syms: list[Symmetry]) -> list[PTAction]:
    return [PTAction(pt, s) for s in syms]


def check_initial_symmetric(game: SymmetricGame, syms: list[Symmetry]) -> None:
    types = {p.id: p.type for p in game.places}
    initial = sorted(game.initial)
    for s in syms:
        image = sorted((pid, s.colors(game, types[pid], cols)) for pid, cols in game.initial)
        if image != initial:
            raise ModelError(f"initial marking is not symmetric under {s.cycles(game)}")
