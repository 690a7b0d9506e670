"""Dynamic representations of symbolic decision sets and their canonical form.

A representation splits every basic class into named dynamic subclasses
(``blocks``) with a static subclass and a cardinality each, and describes a
decision set by *pattern entries*: every color is replaced by
``(class, block, k)`` where ``k`` numbers the distinct elements of that block
in order of first use within the entry.  Colors occurring only inside a
commitment get fresh indices, numbered per transition.

A block is only ever formed from colors that every permutation of the block
leaves the decision set invariant under, so a pattern entry stands for all
its injective instantiations and a representation denotes exactly one
decision set per valid assignment.

All operations work on a concrete representative obtained with the
canonical assignment (blocks take consecutive colors), so the symbolic
relations coincide with the explicit ones by construction.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

from . import decision as dec
from .decision import DecisionSet, PropertyFlags
from .model import ModelError, PTGame

DIAMOND = -1

# Pattern element: (class index, block index, element index k >= 1)
Elem = tuple[int, int, int]
TransPattern = tuple[str, tuple[Elem, ...]]
Entry = tuple[str, tuple[Elem, ...], tuple[TransPattern, ...] | None]


@dataclass(frozen=True)
class DynamicRepresentation:
    """``blocks[i]`` lists ``(static subclass, cardinality)`` of class i's
    dynamic subclasses; ``entries`` is the sorted pattern image of D."""

    blocks: tuple[tuple[tuple[int, int], ...], ...]
    entries: tuple[Entry, ...]
    canonical: bool = False

    def n_blocks(self, ci: int) -> int:
        return len(self.blocks[ci])


@dataclass(frozen=True)
class SymbolicMode:
    """Instance of a transition: ``(block, k)`` for every signature variable."""

    transition: str
    instance: tuple[tuple[int, int], ...]


class Coloring:
    """Index bookkeeping linking an expanded game to its color classes."""

    def __init__(self, pt: PTGame):
        game = pt.source
        self.pt = pt
        self.game = game
        self.classes = list(game.classes)
        self.class_index = {c.id: i for i, c in enumerate(self.classes)}
        ptype = {p.id: p.type for p in game.places}
        tsig = {t.id: tuple(c for _, c in t.variables) for t in game.transitions}
        self.tsig = {tid: tuple(self.class_index[c] for c in sig) for tid, sig in tsig.items()}
        self.place_colors: list[tuple[str, tuple[tuple[int, int], ...]]] = []
        self.place_lookup: dict = {}
        for idx, (pid, cols) in enumerate(pt.place_key):
            key = tuple((self.class_index[cid], self.classes[self.class_index[cid]].index(c))
                        for cid, c in zip(ptype[pid], cols))
            self.place_colors.append((pid, key))
            self.place_lookup[(pid, tuple(c for _, c in key))] = idx
        self.trans_colors: list[tuple[str, tuple[tuple[int, int], ...]]] = []
        self.trans_lookup: dict = {}
        for idx, (tid, vals) in enumerate(pt.trans_key):
            key = tuple((self.class_index[cid], self.classes[self.class_index[cid]].index(c))
                        for cid, c in zip(tsig[tid], vals))
            self.trans_colors.append((tid, key))
            self.trans_lookup[(tid, tuple(c for _, c in key))] = idx
        self.static_of = [[cls.subclass_of(c) for c in cls.colors] for cls in self.classes]
        self._transpositions: dict = {}
        self._group = None

    def size(self, ci: int) -> int:
        return len(self.classes[ci].colors)

    def transposition(self, ci: int, a: int, b: int):
        key = (ci, a, b)
        cached = self._transpositions.get(key)
        if cached is None:
            def swap(cols):
                return tuple(b if (c == ci and x == a) else a if (c == ci and x == b) else x for c, x in cols)
            places = [self.place_lookup[(pid, swap(cols))] for pid, cols in self.place_colors]
            trans = [self.trans_lookup[(tid, swap(cols))] for tid, cols in self.trans_colors]
            cached = (places, trans, {})
            self._transpositions[key] = cached
        return cached

    def group(self):
        """The symmetry group compiled to place/transition maps (identity excluded)."""
        if self._group is None:
            from .symmetry import enumerate_symmetries
            self._group = [self.permutation(s.perms) for s in enumerate_symmetries(self.game)
                           if not s.is_identity()]
        return self._group

    def stabilizer(self, d: DecisionSet):
        return [m for m in self.group() if _apply(d, *m) == d]

    def permutation(self, perms: list[list[int]]):
        """Compile per-class color permutations to place/transition maps."""
        def image(cols):
            return tuple(perms[c][x] for c, x in cols)
        places = [self.place_lookup[(pid, image(cols))] for pid, cols in self.place_colors]
        trans = [self.trans_lookup[(tid, image(cols))] for tid, cols in self.trans_colors]
        return places, trans, {}


def _apply(d: DecisionSet, places, trans, memo=None) -> DecisionSet:
    """Image of ``d``; ``memo`` caches commitment images, which recur a lot."""
    if memo is None:
        memo = {}
    out = []
    for p, k in d:
        if k is None:
            out.append((places[p], None))
            continue
        img = memo.get(k)
        if img is None:
            img = memo[k] = frozenset(trans[t] for t in k)
        out.append((places[p], img))
    out.sort(key=_first)
    return tuple(out)


def _first(e):
    return e[0]


# ---------------------------------------------------------------------------
# Assignments and pattern images


def canonical_assignment(col: Coloring, blocks) -> list[list[int]]:
    """Color -> block index per class, blocks taking consecutive colors."""
    alpha = []
    for ci, bl in enumerate(blocks):
        row = []
        for j, (_, card) in enumerate(bl):
            row.extend([j] * card)
        if len(row) != col.size(ci):
            raise ModelError(f"cardinalities of class {col.classes[ci].id} do not sum to its size")
        alpha.append(row)
    return alpha


def block_colors(blocks, ci: int, j: int) -> list[int]:
    start = sum(card for _, card in blocks[ci][:j])
    return list(range(start, start + blocks[ci][j][1]))


def check_assignment(col: Coloring, blocks, alpha) -> None:
    for ci, bl in enumerate(blocks):
        row = alpha[ci]
        if len(row) != col.size(ci):
            raise ModelError("assignment does not cover every color")
        for j, (q, card) in enumerate(bl):
            members = [c for c, b in enumerate(row) if b == j]
            if len(members) != card:
                raise ModelError("assignment does not respect cardinalities")
            if any(col.static_of[ci][c] != q for c in members):
                raise ModelError("assignment does not respect static subclasses")
        if col.classes[ci].ordered:
            n = col.size(ci)
            for c in range(n):
                if row[(c + 1) % n] not in (row[c], (row[c] + 1) % len(bl)):
                    raise ModelError("assignment breaks the successor order")


def _pattern_entry(col: Coloring, alpha, p: int, k) -> Entry:
    pid, pcols = col.place_colors[p]
    counter: dict = {}
    bound: dict = {}
    elems = []
    for ci, c in pcols:
        key = (ci, c)
        if key not in bound:
            b = (ci, alpha[ci][c])
            counter[b] = counter.get(b, 0) + 1
            bound[key] = counter[b]
        elems.append((ci, alpha[ci][c], bound[key]))
    if k is None:
        return (pid, tuple(elems), None)
    pats = set()
    for t in k:
        tid, tcols = col.trans_colors[t]
        local = dict(counter)
        fresh: dict = {}
        telems = []
        for ci, c in tcols:
            key = (ci, c)
            if key in bound:
                telems.append((ci, alpha[ci][c], bound[key]))
                continue
            if key not in fresh:
                b = (ci, alpha[ci][c])
                local[b] = local.get(b, 0) + 1
                fresh[key] = local[b]
            telems.append((ci, alpha[ci][c], fresh[key]))
        pats.add((tid, tuple(telems)))
    return (pid, tuple(elems), tuple(sorted(pats)))


def abstract(col: Coloring, d: DecisionSet, blocks, alpha) -> DynamicRepresentation:
    entries = sorted({_pattern_entry(col, alpha, p, k) for p, k in d}, key=entry_key)
    return DynamicRepresentation(tuple(tuple(b) for b in blocks), tuple(entries))


def entry_key(e: Entry):
    pid, elems, comm = e
    if comm is None:
        return (pid, elems, 0, ())
    if not comm:
        return (pid, elems, 1, ())
    return (pid, elems, 2, comm)


def instantiate(col: Coloring, r: DynamicRepresentation, alpha=None) -> DecisionSet:
    """The decision set ``alpha^-1(D̂)``; canonical assignment by default."""
    if alpha is None:
        alpha = canonical_assignment(col, r.blocks)
    else:
        check_assignment(col, r.blocks, alpha)
    members: dict = {}
    for ci, row in enumerate(alpha):
        for c, j in enumerate(row):
            members.setdefault((ci, j), []).append(c)
    out = []
    for pid, elems, comm in r.entries:
        for binding in _bindings(elems, members, {}):
            cols = tuple(binding[(ci, j, k)] for ci, j, k in elems)
            p = col.place_lookup.get((pid, cols))
            if p is None:
                raise ModelError(f"pattern entry on {pid} does not denote a place")
            if comm is None:
                out.append((p, None))
                continue
            used = _used(binding)
            ks = set()
            for tid, telems in comm:
                fresh = [e for e in dict.fromkeys(telems) if e not in binding]
                for fb in _bindings(fresh, members, used):
                    full = {**binding, **fb}
                    t = col.trans_lookup.get((tid, tuple(full[e] for e in telems)))
                    if t is not None:
                        ks.add(t)
            out.append((p, frozenset(ks)))
    out.sort(key=_first)
    return tuple(out)


def _used(binding) -> dict:
    used: dict = {}
    for (ci, j, _), c in binding.items():
        used.setdefault((ci, j), set()).add(c)
    return used


def _bindings(elems, members, used):
    """Injective maps from pattern elements to colors of their blocks."""
    order = list(dict.fromkeys(elems))
    if not order:
        yield {}
        return
    pools = []
    by_block: dict = {}
    for e in order:
        by_block.setdefault((e[0], e[1]), []).append(e)
    groups = list(by_block.items())
    for (ci, j), es in groups:
        avail = [c for c in members.get((ci, j), []) if c not in used.get((ci, j), ())]
        pools.append(list(itertools.permutations(avail, len(es))))
    for combo in itertools.product(*pools):
        b = {}
        for ((_, es), cols) in zip(groups, combo):
            for e, c in zip(es, cols):
                b[e] = c
        yield b


# ---------------------------------------------------------------------------
# Representation, contexts, minimization and ordering


def represent(col: Coloring, d: DecisionSet):
    """One cardinality-1 subclass per color; returns ``(rep, alpha)``."""
    blocks = [tuple((col.static_of[ci][c], 1) for c in range(col.size(ci))) for ci in range(len(col.classes))]
    alpha = [list(range(col.size(ci))) for ci in range(len(col.classes))]
    return abstract(col, d, blocks, alpha), alpha


def context(r: DynamicRepresentation, ci: int, j: int) -> set:
    """Punctured entries: one occurrence of block ``j`` replaced by a diamond."""
    out = set()
    for pid, elems, comm in r.entries:
        for pos, (c, b, k) in enumerate(elems):
            if (c, b) == (ci, j):
                punct = elems[:pos] + ((ci, DIAMOND, k),) + elems[pos + 1:]
                out.add((pid, punct, comm))
        for ti, (tid, telems) in enumerate(comm or ()):
            for pos, (c, b, k) in enumerate(telems):
                if (c, b) == (ci, j):
                    pt = (tid, telems[:pos] + ((ci, DIAMOND, k),) + telems[pos + 1:])
                    out.add((pid, elems, comm[:ti] + (pt,) + comm[ti + 1:]))
    return out


def _invariant_blocks(col: Coloring, d: DecisionSet) -> list[list[tuple[int, list[int]]]]:
    """Coarsest blocks whose permutations fix ``d``, per class in color order."""
    result = []
    for ci, cls in enumerate(col.classes):
        n = col.size(ci)
        if cls.ordered:
            result.append([(col.static_of[ci][c], [c]) for c in range(n)])
            continue
        groups: list[tuple[int, list[int]]] = []
        for c in range(n):
            q = col.static_of[ci][c]
            for gq, members in groups:
                if gq != q:
                    continue
                if _apply(d, *col.transposition(ci, members[0], c)) == d:
                    members.append(c)
                    break
            else:
                groups.append((q, [c]))
        groups.sort(key=lambda g: (g[0], g[1][0]))
        result.append(groups)
    return result


def _blocks_from_partition(col: Coloring, partition):
    blocks, alpha = [], []
    for ci, groups in enumerate(partition):
        row = [0] * col.size(ci)
        for j, (_, members) in enumerate(groups):
            for c in members:
                row[c] = j
        blocks.append(tuple((q, len(m)) for q, m in groups))
        alpha.append(row)
    return blocks, alpha


def minimize_decision_set(col: Coloring, d: DecisionSet) -> DynamicRepresentation:
    blocks, alpha = _blocks_from_partition(col, _invariant_blocks(col, d))
    return abstract(col, d, blocks, alpha)


def minimize(col: Coloring, r: DynamicRepresentation) -> DynamicRepresentation:
    """Merge dynamic subclasses until no two can be merged without loss."""
    return minimize_decision_set(col, instantiate(col, r))


def is_minimal(col: Coloring, r: DynamicRepresentation) -> bool:
    m = minimize(col, r)
    return [len(b) for b in m.blocks] == [len(b) for b in r.blocks]


def _relabelings(col: Coloring, r: DynamicRepresentation, inv=None):
    """Admissible renamings of dynamic subclasses, identity first.

    With ``inv`` (from :func:`block_invariants`) only the renamings that
    list blocks by ascending invariant are produced; every other renaming
    has a larger serial key.
    """
    per_class = []
    for ci, bl in enumerate(r.blocks):
        cls = col.classes[ci]
        m = len(bl)
        if cls.ordered:
            if len(cls.subclasses) > 1:
                per_class.append([tuple(range(m))])
                continue
            rots = [tuple((j + s) % m for j in range(m)) for s in range(m)]
            if inv is not None:
                def seq(rho, row=inv[ci]):
                    out = [None] * m
                    for j, x in enumerate(row):
                        out[rho[j]] = x
                    return out
                best = min(seq(rho) for rho in rots)
                rots = [rho for rho in rots if seq(rho) == best]
            per_class.append(rots)
            continue
        groups: dict = {}
        for j, (q, _) in enumerate(bl):
            groups.setdefault(q, []).append(j)
        options = []
        for q in sorted(groups):
            idx = groups[q]
            if inv is None:
                options.append([(idx, p) for p in itertools.permutations(idx)])
                continue
            # blocks sorted by invariant take the slots in order; ties permute
            ranked = sorted(idx, key=lambda j: inv[ci][j])
            runs, start = [], 0
            for pos in range(1, len(ranked) + 1):
                if pos == len(ranked) or inv[ci][ranked[pos]] != inv[ci][ranked[start]]:
                    runs.append(ranked[start:pos])
                    start = pos
            choices = []
            for combo in itertools.product(*[itertools.permutations(members) for members in runs]):
                olds = [j for perm in combo for j in perm]
                choices.append((olds, idx))
            options.append(choices)
        maps = []
        for combo in itertools.product(*options):
            rho = list(range(m))
            for olds, news in combo:
                for old, new in zip(olds, news):
                    rho[old] = new
            maps.append(tuple(rho))
        per_class.append(maps)
    return itertools.product(*per_class)


def relabel(r: DynamicRepresentation, rho) -> DynamicRepresentation:
    """Rename block j of class i to ``rho[i][j]``; cardinalities move along."""
    def el(e):
        ci, j, k = e
        return (ci, rho[ci][j], k) if j != DIAMOND else e

    def ent(e):
        pid, elems, comm = e
        elems = tuple(el(x) for x in elems)
        if comm is None:
            return (pid, elems, None)
        return (pid, elems, tuple(sorted((tid, tuple(el(x) for x in te)) for tid, te in comm)))

    blocks = []
    for ci, bl in enumerate(r.blocks):
        new = [None] * len(bl)
        for j, b in enumerate(bl):
            new[rho[ci][j]] = b
        blocks.append(tuple(new))
    return DynamicRepresentation(tuple(blocks), tuple(sorted((ent(e) for e in r.entries), key=entry_key)), r.canonical)


def _row_key(item):
    pid, elems, comm = item
    rank = 0 if comm is None else 1 if not comm else 2
    return (rank, pid, elems, comm or ())


def block_invariants(r: DynamicRepresentation):
    """Per block a value that does not depend on how blocks are named: its
    contexts with block names replaced by (static subclass, cardinality),
    followed by its cardinality."""
    rows: dict = {}
    blocks = r.blocks

    def el(e):
        c, b, k = e
        q, card = blocks[c][b]
        return (c, q, card, k)

    for pid, elems, comm in r.entries:
        rank = 0 if comm is None else 1 if not comm else 2
        ee = tuple(el(x) for x in elems)
        ec = [(tid, tuple(el(x) for x in te)) for tid, te in comm or ()]
        sc = tuple(sorted(ec))
        for pos, (c, b, k) in enumerate(elems):
            rows.setdefault((c, b), set()).add((rank, pid, ee[:pos] + ((c, -1, 0, k),) + ee[pos + 1:], sc))
        for ti, (tid, te) in enumerate(comm or ()):
            for pos, (c, b, k) in enumerate(te):
                punct = (tid, ec[ti][1][:pos] + ((c, -1, 0, k),) + ec[ti][1][pos + 1:])
                rows.setdefault((c, b), set()).add(
                    (rank, pid, ee, tuple(sorted(ec[:ti] + [punct] + ec[ti + 1:]))))
    return tuple(tuple((tuple(sorted(rows.get((ci, j), ()))), card) for j, (_, card) in enumerate(bl))
                 for ci, bl in enumerate(blocks))


def serial_key(r: DynamicRepresentation, invariants: bool = True):
    """Total order used to pick the canonical representation.

    Name-independent block invariants come first, then subclass rows (their
    sorted contexts), cardinalities and entries.  Commitments order as
    TOP < empty < transition sets, so a subclass that only holds undecided
    players sorts before one that also holds decisions.
    """
    shape = tuple(tuple(q for q, _ in bl) for bl in r.blocks)
    rows = tuple(tuple(tuple(sorted((_row_key(x) for x in context(r, ci, j))))
                       for j in range(len(bl))) for ci, bl in enumerate(r.blocks))
    cards = tuple(tuple(c for _, c in bl) for bl in r.blocks)
    inv = block_invariants(r) if invariants else ()
    return (shape, inv, rows, cards, tuple(entry_key(e) for e in r.entries))


def encode(value) -> bytes:
    """Order-preserving, prefix-free byte encoding of nested tuples."""
    out = bytearray()
    _enc(value, out)
    return bytes(out)


def _enc(v, out: bytearray) -> None:
    if isinstance(v, tuple):
        out.append(5)
        for x in v:
            _enc(x, out)
        out.append(1)
    elif isinstance(v, bool) or v is None:
        raise TypeError("unsupported value in serialization")
    elif isinstance(v, int):
        out.append(3)
        out += (v + 2**31).to_bytes(4, "big")
    elif isinstance(v, str):
        out.append(4)
        out += v.encode()
        out.append(0)
    else:
        raise TypeError(type(v))


def canonical_serialization(r: DynamicRepresentation) -> bytes:
    return encode(serial_key(r))


def rep_key(r: DynamicRepresentation):
    """Hashable structural identity; cheaper than the byte serialization."""
    return (r.blocks, r.entries)


def _movable(col: Coloring, r: DynamicRepresentation) -> bool:
    """Whether any renaming besides the identity is admissible."""
    for ci, bl in enumerate(r.blocks):
        cls = col.classes[ci]
        if cls.ordered:
            if len(cls.subclasses) == 1 and len(bl) > 1:
                return True
        elif len({q for q, _ in bl}) < len(bl):
            return True
    return False


def order(col: Coloring, r: DynamicRepresentation) -> DynamicRepresentation:
    if not _movable(col, r):
        return DynamicRepresentation(r.blocks, r.entries, True)
    options = list(_relabelings(col, r, block_invariants(r)))
    if len(options) == 1:
        rho = options[0]
        if all(x == tuple(range(len(x))) for x in rho):
            return DynamicRepresentation(r.blocks, r.entries, True)
        c = relabel(r, rho)
        return DynamicRepresentation(c.blocks, c.entries, True)
    # every option lists blocks by ascending invariant, so the invariant
    # part of the serial key is shared and can be left out here
    best, best_key = None, None
    for rho in options:
        cand = relabel(r, rho)
        key = serial_key(cand, invariants=False)
        if best_key is None or key < best_key:
            best, best_key = cand, key
    return DynamicRepresentation(best.blocks, best.entries, True)


def canonicalize(col: Coloring, d: DecisionSet) -> DynamicRepresentation:
    return order(col, minimize_decision_set(col, d))


def canonicalize_rep(col: Coloring, r: DynamicRepresentation) -> DynamicRepresentation:
    return order(col, minimize(col, r))


# ---------------------------------------------------------------------------
# Symbolic modes, splitting, firing and TOP-resolution


def symbolic_modes(col: Coloring, r: DynamicRepresentation, tid: str) -> list[SymbolicMode]:
    sig = col.tsig[tid]
    out = []

    def rec(pos, acc, used):
        if pos == len(sig):
            out.append(SymbolicMode(tid, tuple(acc)))
            return
        ci = sig[pos]
        for j, (_, card) in enumerate(r.blocks[ci]):
            top = used.get((ci, j), 0)
            for k in range(1, min(top + 1, card) + 1):
                used2 = dict(used)
                used2[(ci, j)] = max(top, k)
                rec(pos + 1, acc + [(j, k)], used2)

    rec(0, [], {})
    return out


def mode_instances(col: Coloring, r: DynamicRepresentation, sm: SymbolicMode, alpha=None) -> list[tuple[int, ...]]:
    """Concrete color-index tuples of ``sm`` under an assignment."""
    if alpha is None:
        alpha = canonical_assignment(col, r.blocks)
    sig = col.tsig[sm.transition]
    members: dict = {}
    for ci, row in enumerate(alpha):
        for c, j in enumerate(row):
            members.setdefault((ci, j), []).append(c)
    elems = [(ci, j, k) for ci, (j, k) in zip(sig, sm.instance)]
    return [tuple(b[e] for e in elems) for b in _bindings(elems, members, {})]


def mode_of(col: Coloring, alpha, t: int) -> SymbolicMode:
    tid, tcols = col.trans_colors[t]
    seen: dict = {}
    count: dict = {}
    inst = []
    for ci, c in tcols:
        j = alpha[ci][c]
        if (ci, c) not in seen:
            count[(ci, j)] = count.get((ci, j), 0) + 1
            seen[(ci, c)] = count[(ci, j)]
        inst.append((j, seen[(ci, c)]))
    return SymbolicMode(tid, tuple(inst))


def representative_transition(col: Coloring, r: DynamicRepresentation, sm: SymbolicMode) -> int | None:
    """The concrete transition of ``sm`` whose k-th elements are the first colors of each block."""
    sig = col.tsig[sm.transition]
    cols = tuple(block_colors(r.blocks, ci, j)[k - 1] for ci, (j, k) in zip(sig, sm.instance))
    return col.trans_lookup.get((sm.transition, cols))


def _split_partition(col: Coloring, r: DynamicRepresentation, counts):
    """Blocks after isolating ``counts[(ci, j)]`` leading elements of each block."""
    partition, h = [], {}
    for ci, bl in enumerate(r.blocks):
        groups = []
        for j, (q, card) in enumerate(bl):
            colors = block_colors(r.blocks, ci, j)
            n = card if col.classes[ci].ordered else counts.get((ci, j), 0)
            for c in colors[:n]:
                h[(ci, len(groups))] = (ci, j)
                groups.append((q, [c]))
            if colors[n:]:
                h[(ci, len(groups))] = (ci, j)
                groups.append((q, colors[n:]))
        partition.append(groups)
    return partition, h


def split(col: Coloring, r: DynamicRepresentation, sm: SymbolicMode):
    counts: dict = {}
    for ci, (j, k) in zip(col.tsig[sm.transition], sm.instance):
        counts[(ci, j)] = max(counts.get((ci, j), 0), k)
    return _split_with(col, r, counts)


def split_full(col: Coloring, r: DynamicRepresentation):
    counts = {(ci, j): card for ci, bl in enumerate(r.blocks) for j, (_, card) in enumerate(bl)}
    return _split_with(col, r, counts)


def _split_with(col, r, counts):
    d = instantiate(col, r)
    partition, h = _split_partition(col, r, counts)
    blocks, alpha = _blocks_from_partition(col, partition)
    return abstract(col, d, blocks, alpha), h


def symbolic_fire(col: Coloring, r: DynamicRepresentation, sm: SymbolicMode) -> DynamicRepresentation:
    d = instantiate(col, r)
    t = representative_transition(col, r, sm)
    if t is None or t not in dec.enabled(col.pt, d):
        raise ModelError(f"symbolic instance of {sm.transition} is not enabled")
    return canonicalize(col, dec.fire(col.pt, d, t))


def symbolic_enabled(col: Coloring, r: DynamicRepresentation, d: DecisionSet | None = None) -> list[tuple[SymbolicMode, int]]:
    """Enabled symbolic instances with their representative transitions."""
    if d is None:
        d = instantiate(col, r)
    alpha = canonical_assignment(col, r.blocks)
    seen = {}
    for t in dec.enabled(col.pt, d):
        sm = mode_of(col, alpha, t)
        if sm not in seen:
            seen[sm] = representative_transition(col, r, sm)
    return sorted(seen.items(), key=lambda kv: (kv[0].transition, kv[0].instance))


def top_successor_reps(col: Coloring, d: DecisionSet) -> list[tuple[DecisionSet, DynamicRepresentation]]:
    """Distinct canonical TOP-successors of ``d`` with one concrete witness each.

    Resolutions that a symmetry fixing ``d`` maps onto each other have the
    same canonical form, so only one per such class is canonicalized.
    """
    stab = col.stabilizer(d)
    seen_class: set = set()
    out: dict = {}
    for d2 in dec.iter_top_successors(col.pt, d):
        if stab:
            cls = frozenset([d2] + [_apply(d2, *m) for m in stab])
            if cls in seen_class:
                continue
            seen_class.add(cls)
        c = canonicalize(col, d2)
        out.setdefault(rep_key(c), (d2, c))
    return list(out.values())


def symbolic_top_successors(col: Coloring, r: DynamicRepresentation) -> list[DynamicRepresentation]:
    return [c for _, c in top_successor_reps(col, instantiate(col, r))]


def classify_rep(col: Coloring, r: DynamicRepresentation) -> PropertyFlags:
    flags, _, _ = classify_rep_detail(col, r)
    return flags


def classify_rep_detail(col: Coloring, r: DynamicRepresentation):
    """Flags plus the two nondeterminism causes.

    ``ndet1``: two different symbolic instances share a system place;
    ``ndet2``: two concrete instances of one symbolic instance do.
    """
    pt = col.pt
    d = instantiate(col, r)
    base = dec.classify(pt, d)
    alpha = canonical_assignment(col, r.blocks)
    en = dec.enabled(pt, d)
    ndet1 = ndet2 = False
    for a, b in itertools.combinations(en, 2):
        shared = set(pt.pre_places[a]) & set(pt.pre_places[b])
        if any(not pt.env[p] for p in shared):
            if mode_of(col, alpha, a) == mode_of(col, alpha, b):
                ndet2 = True
            else:
                ndet1 = True
    return base, ndet1, ndet2


def r_all(col: Coloring, r: DynamicRepresentation) -> DynamicRepresentation:
    """Same subclasses, every player committed to its whole postset."""
    pt = col.pt
    d = instantiate(col, r)
    full = tuple((p, frozenset(pt.postset[p])) for p, _ in d)
    blocks = r.blocks
    return abstract(col, full, blocks, canonical_assignment(col, blocks))


# ---------------------------------------------------------------------------
# Rendering


def subclass_name(col: Coloring, ci: int, j: int) -> str:
    return f"Z{ci + 1}^{j + 1}" if j != DIAMOND else "<>"


def _elem_name(col: Coloring, r, e: Elem) -> str:
    ci, j, k = e
    if j == DIAMOND:
        return "<>"
    name = subclass_name(col, ci, j)
    if r.blocks[ci][j][1] > 1 or k > 1:
        name += f"#{k}"
    return name


def _node(col: Coloring, r, pid: str, elems) -> str:
    names = [_elem_name(col, r, e) for e in elems]
    if not names:
        return pid
    if len(names) == 1:
        return f"{pid}.{names[0]}"
    return f"{pid}.({','.join(names)})"


def render_entry(col: Coloring, r, e) -> str:
    pid, elems, comm = e
    if comm is None:
        return f"({_node(col, r, pid, elems)}, TOP)"
    return f"({_node(col, r, pid, elems)}, {{{','.join(_node(col, r, t, te) for t, te in comm)}}})"


def render(col: Coloring, r: DynamicRepresentation) -> str:
    cards = " ".join(f"|{subclass_name(col, ci, j)}|={card}" for ci, bl in enumerate(r.blocks)
                     for j, (_, card) in enumerate(bl))
    stat = " ".join(f"{subclass_name(col, ci, j)}->{col.classes[ci].id}[{q + 1}]" for ci, bl in enumerate(r.blocks)
                    for j, (q, _) in enumerate(bl))
    lines = [cards, stat]
    lines += [render_entry(col, r, e) for e in sorted(r.entries, key=lambda e: render_entry(col, r, e))]
    return "\n".join(lines)


@dataclass
class Interner:
    """Associative index of canonical representations keyed by their structure."""

    index: dict = field(default_factory=dict)
    items: list = field(default_factory=list)

    def get_or_insert(self, r: DynamicRepresentation) -> tuple[int, bool]:
        key = rep_key(r)
        found = self.index.get(key)
        if found is not None:
            return found, False
        self.index[key] = len(self.items)
        self.items.append(r)
        return len(self.items) - 1, True


def orbit(col: Coloring, d: DecisionSet, perms: Iterable) -> set:
    return {_apply(d, *col.permutation(p)) for p in perms}
