"""Petri-game strategies from solved Büchi games.

The solved arena is unrolled into a tree that follows the player-0 choices
and keeps every player-1 move.  Each tree node carries the concrete cuts it
stands for: a cut is a reachable marking of the strategy with its decision
set, related to the node's representative by a symmetry.  Replaying the tree
produces a labeled net; repeated situations on a path are folded back so the
net stays finite.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from . import decision as dec
from .game import LOOP, BuchiGame, Solution
from .model import CapExceeded, ModelError, PTGame
from .symmetry import actions, enumerate_symmetries

DEFAULT_TREE_CAP = 10**5
DEFAULT_MARKING_CAP = 10**6


class TranslationError(ModelError):
    """An internal invariant of the strategy construction failed."""


@dataclass
class TreeNode:
    node: int                       # arena node
    parent: int | None
    depth: int
    # one entry per cut: (decision set, parent cut index, concrete move)
    # where the move is None for a commitment choice and a transition index otherwise
    cuts: list[tuple] = field(default_factory=list)
    children: list[int] = field(default_factory=list)
    fold: int | None = None         # ancestor this branch is folded into


@dataclass
class StrategyTree:
    arena: BuchiGame
    nodes: list[TreeNode]

    def branch_count(self, i: int) -> int:
        return len(self.nodes[i].children)


@dataclass
class PGStrategy:
    pt: PTGame
    places: list[int]                          # place id -> P/T place
    transitions: list[tuple[int, tuple, tuple]]  # (P/T transition, preset, postset)
    initial: tuple[int, ...]

    def postset(self, q: int) -> list[int]:
        return [i for i, (_, pre, _) in enumerate(self.transitions) if q in pre]


# ---------------------------------------------------------------------------
# Unrolling


class _Matcher:
    """Finds a symmetry mapping an arena node's concrete payload onto a
    given decision set."""

    def __init__(self, bg: BuchiGame):
        self.bg = bg
        if bg.mode == "explicit":
            self.acts = None
        else:
            self.acts = actions(bg.pt, enumerate_symmetries(bg.pt.source))
        self._images: dict[int, dict] = {}

    def images(self, v: int) -> dict:
        img = self._images.get(v)
        if img is None:
            d = self.bg.concrete[v]
            img = {}
            if self.acts is None:
                img[d] = None
            else:
                for a in self.acts:
                    img.setdefault(a.decision_set(d), a)
            self._images[v] = img
        return img

    def symmetry(self, v: int, d):
        img = self.images(v)
        if d not in img:
            raise TranslationError("cut does not match the decision set of its tree node")
        return img[d]


def _map_d(a, d):
    return d if a is None else a.decision_set(d)


def _map_t(a, t):
    return t if a is None else a.transition(t)


def unroll(bg: BuchiGame, sol: Solution, cap: int = DEFAULT_TREE_CAP) -> StrategyTree:
    if not sol.realizable:
        raise ValueError("no winning strategy to unroll")
    pt = bg.pt
    match = _Matcher(bg)
    root = TreeNode(bg.initial, None, 0, [(bg.concrete[bg.initial], None, None)])
    nodes = [root]
    queue = deque([0])
    while queue:
        i = queue.popleft()
        tn = nodes[i]
        v = tn.node
        if _folds(nodes, i):
            continue
        labels = bg.labels[v]
        if labels == [LOOP]:
            continue
        if len(nodes) > cap:
            raise CapExceeded(f"strategy tree exceeds {cap} nodes")
        if bg.player1(v):
            targets = {}
            for w in bg.succ[v]:
                for img in match.images(w):
                    targets.setdefault(img, w)
            grouped: dict[int, list] = {w: [] for w in bg.succ[v]}
            for ci, (d, _, _) in enumerate(tn.cuts):
                for t in dec.enabled(pt, d):
                    d2 = dec.fire(pt, d, t)
                    w = targets.get(d2)
                    if w is None:
                        raise TranslationError("environment move leaves the arena")
                    grouped[w].append((d2, ci, t))
            for w in bg.succ[v]:
                if grouped[w]:
                    _child(nodes, queue, i, w, grouped[w])
            continue
        pos = sol.strategy.get(v)
        if pos is None:
            raise TranslationError("player-0 node without a strategy choice")
        w = bg.succ[v][pos]
        label = labels[pos]
        cuts = []
        for ci, (d, _, _) in enumerate(tn.cuts):
            a = match.symmetry(v, d)
            if label[0] == "top":
                cuts.append((_map_d(a, label[1]), ci, None))
            else:
                t = _map_t(a, label[1])
                cuts.append((dec.fire(pt, d, t), ci, t))
        _child(nodes, queue, i, w, cuts)
    return StrategyTree(bg, nodes)


def _child(nodes, queue, i, w, cuts):
    j = len(nodes)
    nodes.append(TreeNode(w, i, nodes[i].depth + 1, cuts))
    nodes[i].children.append(j)
    queue.append(j)


def _folds(nodes: list[TreeNode], i: int) -> bool:
    """Fold node i into the nearest ancestor with the same arena node whose
    cuts, followed along their lineage, carry the same decision sets."""
    tn = nodes[i]
    lineage = list(range(len(tn.cuts)))
    cur = i
    while nodes[cur].parent is not None:
        lineage = [nodes[cur].cuts[c][1] for c in lineage]
        cur = nodes[cur].parent
        anc = nodes[cur]
        if anc.node == tn.node and all(anc.cuts[c][0] == tn.cuts[k][0] for k, c in enumerate(lineage)):
            tn.fold = cur
            return True
    return False


# ---------------------------------------------------------------------------
# Translation


class _UnionFind:
    def __init__(self):
        self.parent: list[int] = []

    def add(self) -> int:
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, keep: int, drop: int) -> bool:
        a, b = self.find(keep), self.find(drop)
        if a == b:
            return False
        if b < a:
            a, b = b, a
        self.parent[b] = a
        return True


def translate(tree: StrategyTree, pt: PTGame) -> PGStrategy:
    labels: list[int] = []
    uf = _UnionFind()

    def new_place(p: int) -> int:
        labels.append(p)
        return uf.add()

    trans: dict[tuple, tuple] = {}
    order: list[tuple] = []
    init = [new_place(p) for p, _ in tree.nodes[0].cuts[0][0]]
    cut_places: list[list[tuple]] = [[] for _ in tree.nodes]
    cut_places[0] = [tuple(init)]
    for i, tn in enumerate(tree.nodes):
        if i == 0:
            continue
        parent_cuts = cut_places[tn.parent]
        mine = []
        for d, ci, t in tn.cuts:
            places = parent_cuts[ci]
            if t is not None:
                pre = tuple(sorted(q for q in places if labels[q] in pt.pre[t]))
                if len(pre) != len(pt.pre[t]):
                    raise TranslationError(f"cut does not enable {pt.trans_names[t]}")
                key = (t, pre)
                if key not in trans:
                    trans[key] = tuple(new_place(p) for p in sorted(pt.post[t]))
                    order.append(key)
                places = tuple(sorted(set(places) - set(pre) | set(trans[key])))
            if sorted(labels[q] for q in places) != [p for p, _ in d]:
                raise TranslationError("cut labels disagree with the tree node")
            mine.append(places)
        cut_places[i] = mine
    # fold-backs: identify the places of every cut with those of its lineage ancestor
    for i, tn in enumerate(tree.nodes):
        if tn.fold is None:
            continue
        lineage = list(range(len(tn.cuts)))
        cur = i
        while cur != tn.fold:
            lineage = [tree.nodes[cur].cuts[c][1] for c in lineage]
            cur = tree.nodes[cur].parent
        for k, c in enumerate(lineage):
            old = {labels[q]: q for q in cut_places[cur][c]}
            for q in cut_places[i][k]:
                uf.union(old[labels[q]], q)
    return _finalize(pt, labels, uf, order, trans, init)


def _finalize(pt, labels, uf, order, trans, init) -> PGStrategy:
    # merging places can make transitions coincide; merge those and their outputs too
    changed = True
    while changed:
        changed = False
        seen: dict[tuple, tuple] = {}
        for t, pre in order:
            key = (t, tuple(sorted({uf.find(q) for q in pre})))
            post = trans[(t, pre)]
            if key in seen:
                for a, b in zip(seen[key], post):
                    changed |= uf.union(a, b)
            else:
                seen[key] = post
    renum: dict[int, int] = {}
    places: list[int] = []

    def pid(q: int) -> int:
        r = uf.find(q)
        if r not in renum:
            renum[r] = len(places)
            places.append(labels[r])
        return renum[r]

    initial = tuple(pid(q) for q in init)
    out, seen_t = [], set()
    for t, pre in order:
        fpre = tuple(sorted(pid(q) for q in pre))
        if (t, fpre) in seen_t:
            continue
        seen_t.add((t, fpre))
        out.append((t, fpre, tuple(sorted(pid(q) for q in trans[(t, pre)]))))
    return PGStrategy(pt, places, out, initial)


def synthesize(bg: BuchiGame, sol: Solution, cap: int = DEFAULT_TREE_CAP) -> PGStrategy:
    return translate(unroll(bg, sol, cap), bg.pt)


def from_pt(pt: PTGame) -> PGStrategy:
    """The whole expanded game read as a (usually invalid) strategy."""
    init = tuple(sorted(p for p in pt.initial))
    trans = [(t, tuple(sorted(pt.pre[t])), tuple(sorted(pt.post[t]))) for t in range(len(pt.trans_names))]
    return PGStrategy(pt, list(range(len(pt.place_names))), trans, init)


# ---------------------------------------------------------------------------
# Validation


@dataclass
class Violation:
    check: str
    marking: tuple[str, ...]
    detail: str


@dataclass
class ValidationReport:
    markings: int
    violations: list[Violation]

    CHECKS = ("justified_refusal", "determinism", "deadlock_freedom", "winning")

    @property
    def ok(self) -> bool:
        return not self.violations

    def passed(self, check: str) -> bool:
        return not any(v.check == check for v in self.violations)

    def summary(self) -> dict[str, bool]:
        return {c: self.passed(c) for c in self.CHECKS}


def validate_strategy(s: PGStrategy, pt: PTGame, cap: int = DEFAULT_MARKING_CAP) -> ValidationReport:
    by_pre: dict[int, list[int]] = {}
    by_key: set[tuple] = set()
    for i, (t, pre, _) in enumerate(s.transitions):
        by_key.add((t, pre))
        for q in pre:
            by_pre.setdefault(q, []).append(i)
    offered = {q: {s.transitions[i][0] for i in ts} for q, ts in by_pre.items()}
    violations: list[Violation] = []

    def names(m) -> tuple[str, ...]:
        return tuple(sorted(pt.place_names[s.places[q]] for q in m))

    def report(check, m, detail):
        violations.append(Violation(check, names(m), detail))

    start = frozenset(s.initial)
    seen = {start}
    queue = deque([start])
    while queue:
        m = queue.popleft()
        lam: dict[int, int] = {}
        for q in m:
            if s.places[q] in lam:
                report("winning", m, f"two tokens on {pt.place_names[s.places[q]]}")
            lam[s.places[q]] = q
        if any(pt.bad[s.places[q]] for q in m):
            report("winning", m, "bad place reached")
        cand = {i for q in m for i in by_pre.get(q, ())}
        enabled = sorted(i for i in cand if all(q in m for q in s.transitions[i][1]))
        owners: dict[int, int] = {}
        for i in enabled:
            for q in s.transitions[i][1]:
                if pt.env[s.places[q]]:
                    continue
                if q in owners and owners[q] != i:
                    a, b = s.transitions[owners[q]][0], s.transitions[i][0]
                    report("determinism", m, f"{pt.trans_names[a]} and {pt.trans_names[b]} share "
                                             f"{pt.place_names[s.places[q]]}")
                owners.setdefault(q, i)
        game_enabled = dec.marking_enabled(pt, tuple((p, None) for p in sorted(lam)))
        for t in game_enabled:
            pre = tuple(sorted(lam[p] for p in pt.pre[t]))
            if (t, pre) in by_key:
                continue
            if not any(not pt.env[s.places[q]] and t not in offered.get(q, ()) for q in pre):
                report("justified_refusal", m, f"{pt.trans_names[t]} is refused without a system place ruling it out")
        if game_enabled and not enabled:
            report("deadlock_freedom", m, "the game can continue but the strategy cannot")
        for i in enabled:
            _, pre, post = s.transitions[i]
            m2 = (m - set(pre)) | set(post)
            if len(m2) != len(m) - len(pre) + len(post):
                report("winning", m, f"firing {pt.trans_names[s.transitions[i][0]]} makes the strategy unsafe")
            m2 = frozenset(m2)
            if m2 not in seen:
                if len(seen) >= cap:
                    raise CapExceeded(f"strategy has more than {cap} reachable markings")
                seen.add(m2)
                queue.append(m2)
    return ValidationReport(len(seen), violations)


def causally_before(s: PGStrategy, first: str, second: str) -> bool:
    """Whether some transition labeled ``first*`` causally precedes one labeled ``second*``.

    Labels are compared by their transition name up to the color suffix.
    """
    names = s.pt.trans_names

    def base(t: int) -> str:
        return names[t].split(".", 1)[0]

    consumers: dict[int, list[int]] = {}
    for i, (_, pre, _) in enumerate(s.transitions):
        for q in pre:
            consumers.setdefault(q, []).append(i)
    for i, (t, _, _) in enumerate(s.transitions):
        if base(t) != first:
            continue
        stack, seen = [i], {i}
        while stack:
            j = stack.pop()
            for q in s.transitions[j][2]:
                for k in consumers.get(q, ()):
                    if k in seen:
                        continue
                    if base(s.transitions[k][0]) == second:
                        return True
                    seen.add(k)
                    stack.append(k)
    return False


# ---------------------------------------------------------------------------
# Export


def to_text(s: PGStrategy) -> str:
    pn, tn = s.pt.place_names, s.pt.trans_names
    lines = [f"places {len(s.places)}"]
    lines += [f"p{q} {pn[p]}" for q, p in enumerate(s.places)]
    lines.append(f"transitions {len(s.transitions)}")
    for i, (t, pre, post) in enumerate(s.transitions):
        lines.append(f"t{i} {tn[t]} : {' '.join(f'p{q}' for q in pre)} -> {' '.join(f'p{q}' for q in post)}")
    lines.append("initial " + " ".join(f"p{q}" for q in s.initial))
    return "\n".join(lines) + "\n"


def to_dot(s: PGStrategy) -> str:
    pn, tn = s.pt.place_names, s.pt.trans_names
    init = set(s.initial)
    lines = ["digraph strategy {"]
    for q, p in enumerate(s.places):
        attrs = ["shape=circle", f'label="{pn[p]}"']
        if not s.pt.env[p]:
            attrs += ["style=filled", "fillcolor=gray"]
        if s.pt.bad[p]:
            attrs.append("peripheries=2")
        if q in init:
            attrs.append("penwidth=2")
        lines.append(f"  p{q} [{', '.join(attrs)}];")
    for i, (t, pre, post) in enumerate(s.transitions):
        lines.append(f'  t{i} [shape=box, label="{tn[t]}"];')
        lines += [f"  p{q} -> t{i};" for q in pre]
        lines += [f"  t{i} -> p{q};" for q in post]
    lines.append("}")
    return "\n".join(lines) + "\n"
