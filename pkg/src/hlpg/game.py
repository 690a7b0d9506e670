"""Two-player Büchi games over decision sets or canonical representations,
and a classical Büchi solver."""
from __future__ import annotations

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from . import canon
from . import decision as dec
from .decision import PropertyFlags
from .model import CapExceeded, PTGame, SymmetricGame, expand
from .symmetry import actions, check_initial_symmetric, enumerate_symmetries

DEFAULT_NODE_CAP = 10**7
APPROACHES = ("explicit", "membership", "canonical")

LOOP = ("loop",)


@dataclass
class BuchiGame:
    mode: str
    pt: PTGame
    nodes: list = field(default_factory=list)
    flags: list[PropertyFlags] = field(default_factory=list)
    succ: list[list[int]] = field(default_factory=list)
    labels: list[list[tuple]] = field(default_factory=list)
    initial: int = 0
    symmetries: int = 1
    coloring: canon.Coloring | None = None
    # concrete representative of every node (the payload itself unless canonical)
    concrete: list = field(default_factory=list)

    def player1(self, v: int) -> bool:
        return self.flags[v].env_dependent

    def accepting(self, v: int) -> bool:
        return self.flags[v].accepting

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return sum(len(s) for s in self.succ)

    @property
    def n_accepting(self) -> int:
        return sum(1 for f in self.flags if f.accepting)

    def stats(self) -> dict:
        return {"approach": self.mode, "nodes": self.n_nodes, "edges": self.n_edges,
                "accepting": self.n_accepting, "symmetries": self.symmetries}


@dataclass
class Solution:
    realizable: bool
    winning: set[int]
    strategy: dict[int, int]  # player-0 node -> chosen edge position in succ[v]


# ---------------------------------------------------------------------------
# Builders


def _explore(bg: BuchiGame, root, key: Callable, expand_node: Callable, cap: int, parallel: int = 1) -> BuchiGame:
    """BFS shared by all builders.

    ``key(payload)`` returns ``(lookup_key, payload_to_store)``;
    ``expand_node(payload)`` returns ``(flags, [(label, payload), ...])``.
    """
    index: dict = {}

    def intern(payload) -> int:
        k, stored = key(payload)
        v = index.get(k)
        if v is None:
            v = len(bg.nodes)
            if v >= cap:
                raise CapExceeded(f"arena exceeds node cap {cap}")
            index[k] = v
            bg.nodes.append(stored)
            bg.flags.append(None)
            bg.succ.append([])
            bg.labels.append([])
            frontier.append(v)
        return v

    frontier: deque = deque()
    bg.initial = intern(root)
    pool = ThreadPoolExecutor(parallel) if parallel > 1 else None
    try:
        while frontier:
            batch = [frontier.popleft()] if pool is None else [frontier.popleft() for _ in range(len(frontier))]
            if pool is None:
                results = [expand_node(bg.nodes[v]) for v in batch]
            else:
                results = list(pool.map(lambda v: expand_node(bg.nodes[v]), batch))
            for v, (flags, moves) in zip(batch, results):
                bg.flags[v] = flags
                if flags.closed or not moves:
                    bg.succ[v] = [v]
                    bg.labels[v] = [LOOP]
                    continue
                seen = set()
                for label, payload in moves:
                    w = intern(payload)
                    if w not in seen:
                        seen.add(w)
                        bg.succ[v].append(w)
                        bg.labels[v].append(label)
    finally:
        if pool is not None:
            pool.shutdown()
    return bg


def _guard_top(pt: PTGame, d, cap: int, group: int) -> None:
    """Fail before enumerating a resolution set that alone overflows the cap.

    The resolutions are distinct reachable nodes, so they fall into at least
    ``count / group`` orbits.
    """
    count = dec.count_top_successors(pt, d)
    if -(-count // group) >= cap:
        raise CapExceeded(f"a TOP node has {count} resolutions; arena exceeds node cap {cap}")


def _explicit_moves(pt: PTGame, d, cap: int = DEFAULT_NODE_CAP, group: int = 1):
    flags = dec.classify(pt, d)
    if flags.closed:
        return flags, []
    if dec.has_top(d):
        _guard_top(pt, d, cap, group)
        return flags, [(("top", d2), d2) for d2 in dec.top_successors(pt, d)]
    en = dec.enabled(pt, d)
    if not flags.env_dependent:
        en = [t for t in en if dec.system_only(pt, t)]
    return flags, [(("fire", t), dec.fire(pt, d, t)) for t in en]


def _prepare(game_or_pt):
    pt = game_or_pt if isinstance(game_or_pt, PTGame) else expand(game_or_pt)
    return pt


def build_explicit(game: SymmetricGame | PTGame, cap: int = DEFAULT_NODE_CAP, parallel: int = 1) -> BuchiGame:
    pt = _prepare(game)
    bg = BuchiGame("explicit", pt)
    _explore(bg, dec.initial_decision_set(pt), lambda d: (d, d), lambda d: _explicit_moves(pt, d, cap), cap, parallel)
    bg.concrete = bg.nodes
    return bg


def build_membership(game: SymmetricGame | PTGame, cap: int = DEFAULT_NODE_CAP, parallel: int = 1) -> BuchiGame:
    pt = _prepare(game)
    syms = enumerate_symmetries(pt.source)
    check_initial_symmetric(pt.source, syms)
    acts = [a for a in actions(pt, syms) if not a.symmetry.is_identity()]
    bg = BuchiGame("membership", pt, symmetries=len(syms))
    stored: dict = {}

    def key(d):
        if d in stored:
            return d, d
        for a in acts:
            img = a.decision_set(d)
            if img in stored:
                return img, img
        stored[d] = True
        return d, d

    _explore(bg, dec.initial_decision_set(pt), key, lambda d: _explicit_moves(pt, d, cap, len(syms)), cap, parallel)
    bg.concrete = bg.nodes
    return bg


def _canonical_moves(col: canon.Coloring, r, cap: int = DEFAULT_NODE_CAP):
    pt = col.pt
    d = canon.instantiate(col, r)
    flags = dec.classify(pt, d)
    if flags.closed:
        return flags, []
    moves = []
    if dec.has_top(d):
        _guard_top(pt, d, cap, len(col.group()) + 1)
        return flags, [(("top", d2), r2) for d2, r2 in canon.top_successor_reps(col, d)]
    for sm, t in canon.symbolic_enabled(col, r, d):
        if flags.env_dependent or dec.system_only(pt, t):
            moves.append((("fire", t, sm), canon.canonicalize(col, dec.fire(pt, d, t))))
    return flags, moves


def build_canonical(game: SymmetricGame | PTGame, cap: int = DEFAULT_NODE_CAP, parallel: int = 1) -> BuchiGame:
    pt = _prepare(game)
    syms = enumerate_symmetries(pt.source)
    check_initial_symmetric(pt.source, syms)
    col = canon.Coloring(pt)
    bg = BuchiGame("canonical", pt, symmetries=len(syms), coloring=col)
    root = canon.canonicalize(col, dec.initial_decision_set(pt))
    _explore(bg, root, lambda r: (canon.rep_key(r), r),
             lambda r: _canonical_moves(col, r, cap), cap, parallel)
    bg.concrete = [canon.instantiate(col, r) for r in bg.nodes]
    return bg


BUILDERS = {"explicit": build_explicit, "membership": build_membership, "canonical": build_canonical}


def build(approach: str, game, cap: int = DEFAULT_NODE_CAP, parallel: int = 1) -> BuchiGame:
    return BUILDERS[approach](game, cap, parallel)


# ---------------------------------------------------------------------------
# Solving


def _predecessors(bg: BuchiGame) -> list[list[int]]:
    pred: list[list[int]] = [[] for _ in bg.nodes]
    for v, ws in enumerate(bg.succ):
        for w in ws:
            pred[w].append(v)
    return pred


def _attractor(bg: BuchiGame, pred, region: set[int], target: set[int], player: int):
    """Attractor of ``target`` for ``player`` inside ``region``; returns the
    set and, for ``player`` 0, a move map towards the target."""
    attr = set(target)
    move: dict[int, int] = {}
    count = {}
    for v in region:
        count[v] = sum(1 for w in bg.succ[v] if w in region)
    queue = deque(attr)
    while queue:
        w = queue.popleft()
        for v in pred[w]:
            if v not in region or v in attr:
                continue
            owner = 1 if bg.player1(v) else 0
            if owner == player:
                attr.add(v)
                if player == 0:
                    move[v] = w
                queue.append(v)
            else:
                count[v] -= 1
                if count[v] == 0:
                    attr.add(v)
                    queue.append(v)
    return attr, move


def solve_buchi(bg: BuchiGame) -> Solution:
    pred = _predecessors(bg)
    region = set(range(bg.n_nodes))
    while True:
        accept = {v for v in region if bg.accepting(v)}
        reach, move = _attractor(bg, pred, region, accept, 0)
        trap = region - reach
        if not trap:
            break
        lost, _ = _attractor(bg, pred, region, trap, 1)
        region -= lost
    strategy: dict[int, int] = {}
    for v in sorted(region):
        if bg.player1(v):
            continue
        if v in move:
            target = move[v]
        else:
            target = next(w for w in bg.succ[v] if w in region)
        strategy[v] = bg.succ[v].index(target)
    return Solution(bg.initial in region, region, strategy)


# ---------------------------------------------------------------------------
# Export


def to_dot(bg: BuchiGame, describe: Callable[[int], str] | None = None) -> str:
    lines = ["digraph arena {", "  node [shape=circle];"]
    for v in range(bg.n_nodes):
        attrs = []
        if not bg.player1(v):
            attrs += ["style=filled", "fillcolor=gray"]
        if bg.accepting(v):
            attrs.append("shape=doublecircle")
        label = describe(v) if describe else str(v)
        attrs.append('label="' + label.replace('"', "'").replace("\n", "\\n") + '"')
        lines.append(f"  n{v} [{', '.join(attrs)}];")
    for v, ws in enumerate(bg.succ):
        for w in ws:
            lines.append(f"  n{v} -> n{w};")
    lines.append(f"  init -> n{bg.initial};")
    lines.append('  init [shape=point];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def describe_node(bg: BuchiGame, v: int) -> str:
    if bg.mode == "canonical":
        return canon.render(bg.coloring, bg.nodes[v])
    return dec.render(bg.pt, bg.nodes[v])
