import functools
import itertools
import re

import pytest
from hypothesis import settings

from hlpg import canon
from hlpg import decision as dec
from hlpg import expand, gen_cm, gen_cs, gen_dw
from hlpg.game import build_canonical, build_explicit, build_membership

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@functools.lru_cache(maxsize=None)
def game(family: str, *params):
    return {"cs": gen_cs, "dw": gen_dw, "cm": gen_cm}[family](*params)


@functools.lru_cache(maxsize=None)
def pt(family: str, *params):
    return expand(game(family, *params))


@functools.lru_cache(maxsize=None)
def arena(approach: str, family: str, *params):
    build = {"explicit": build_explicit, "membership": build_membership, "canonical": build_canonical}[approach]
    return build(pt(family, *params))


# ---------------------------------------------------------------------------
# Oracles that act on names only, so they share no code with the symmetry module


def color_maps(g):
    """Every admissible color renaming of a game as a plain dict, built from
    the class declarations."""
    per_class = []
    for cls in g.classes:
        colors = list(cls.colors)
        n = len(colors)
        if cls.ordered:
            if len(cls.subclasses) > 1:
                per_class.append([{c: c for c in colors}])
            else:
                per_class.append([{colors[i]: colors[(i + r) % n] for i in range(n)} for r in range(n)])
            continue
        maps = [{}]
        for block in cls.subclasses:
            maps = [dict(m, **dict(zip(block, p))) for m in maps for p in itertools.permutations(block)]
        per_class.append(maps)
    out = []
    for combo in itertools.product(*per_class):
        m = {}
        for part in combo:
            m.update(part)
        out.append(m)
    return out


_NAME = re.compile(r"^([^.]+)(?:\.(.*))?$")


def rename(name: str, cmap: dict) -> str:
    base, colors = _NAME.match(name).groups()
    if colors is None:
        return name
    if colors.startswith("("):
        return f"{base}.(" + ",".join(cmap[c] for c in colors[1:-1].split(",")) + ")"
    return f"{base}.{cmap[colors]}"


def rename_decision_set(p, d, cmap):
    entries = []
    for q, k in d:
        place = p.place_index[rename(p.place_names[q], cmap)]
        if k is None:
            entries.append((place, None))
        else:
            entries.append((place, frozenset(p.trans_index[rename(p.trans_names[t], cmap)] for t in k)))
    return dec.make(entries)


def orbit_key(p, d, cmaps):
    """Smallest rendering over the orbit: equal iff two decision sets are symmetric."""
    return min(dec.render(p, rename_decision_set(p, d, m)) for m in cmaps)


def reachable(p, limit=None):
    """Plain BFS over decision sets, independent of the arena builders."""
    start = dec.initial_decision_set(p)
    seen, order = {start}, [start]
    i = 0
    while i < len(order):
        d = order[i]
        i += 1
        nxt = dec.top_successors(p, d) if dec.has_top(d) else [dec.fire(p, d, t) for t in dec.enabled(p, d)]
        for d2 in nxt:
            if d2 not in seen:
                seen.add(d2)
                order.append(d2)
                if limit and len(order) >= limit:
                    return order
    return order


def isomorphic(bm, bc):
    """Membership arena onto canonical arena via canonicalize: bijective, flag and edge preserving."""
    col = bc.coloring
    index = {canon.rep_key(r): v for v, r in enumerate(bc.nodes)}
    f = [index[canon.rep_key(canon.canonicalize(col, d))] for d in bm.nodes]
    if sorted(f) != list(range(bc.n_nodes)) or f[bm.initial] != bc.initial:
        return False
    for v in range(bm.n_nodes):
        if bm.flags[v] != bc.flags[f[v]]:
            return False
        if sorted(f[w] for w in bm.succ[v]) != sorted(bc.succ[f[v]]):
            return False
    return True


# ---------------------------------------------------------------------------
# Acceptance report: one line per criterion at the end of the run

CRITERIA: dict[int, list[tuple[bool, str]]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    CRITERIA.setdefault(criterion, []).append((ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        parts = CRITERIA[n]
        status = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status}  " + "; ".join(d for _, d in parts))


@pytest.fixture
def cs3():
    return pt("cs", 3)
