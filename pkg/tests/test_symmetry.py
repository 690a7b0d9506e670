import itertools
import random

import pytest

from hlpg import decision as dec
from hlpg.model import CapExceeded, ModelError, parse_game, pt_enabled, pt_fire
from hlpg.symmetry import (
    PTAction, compose, enumerate_symmetries, group_size, identity, inverse,
)

from conftest import color_maps, game, pt, reachable, rename, rename_decision_set


@pytest.mark.parametrize("family, params, size", [
    ("cs", (1,), 1), ("cs", (2,), 2), ("cs", (3,), 6),
    ("dw", (1,), 1), ("dw", (3,), 3), ("dw", (4,), 4),
    ("cm", (2, 1), 2), ("cm", (2, 3), 12), ("cm", (3, 2), 12), ("cm", (4, 3), 144),
])
def test_group_sizes(family, params, size):
    syms = enumerate_symmetries(game(family, *params))
    assert len(syms) == size == group_size(game(family, *params))
    assert len(set(syms)) == size
    assert syms[0].is_identity()


def test_singleton_class_has_trivial_group():
    g = parse_game("game g\nclass E = { dot }\nplace P env : ( E ) init { ( dot ) }\n")
    assert len(enumerate_symmetries(g)) == 1


def test_static_subclasses_are_respected():
    g = parse_game("game g\nclass C = { a b | c d e }\nclass K ordered = { x y | z }\n")
    syms = enumerate_symmetries(g)
    assert len(syms) == 2 * 6
    for s in syms:
        assert set(s.perms[0][:2]) == {0, 1}
        assert s.perms[1] == (0, 1, 2)


def test_group_matches_independent_enumeration():
    for g in (game("cs", 3), game("dw", 4), game("cm", 2, 3)):
        got = sorted(tuple(sorted((c, s.color(g, cls.id, c)) for cls in g.classes for c in cls.colors))
                     for s in enumerate_symmetries(g))
        want = sorted(tuple(sorted(m.items())) for m in color_maps(g))
        assert got == want


def test_group_axioms():
    g = game("cm", 3, 2)
    syms = enumerate_symmetries(g)
    members = set(syms)
    assert identity(g) in members
    for a, b in itertools.product(syms, repeat=2):
        assert compose(a, b) in members
    for a in syms:
        assert compose(a, inverse(a)) == identity(g)


def test_group_cap():
    with pytest.raises(CapExceeded):
        enumerate_symmetries(game("cm", 4, 3), cap=100)


def test_apply_to_place_and_decision_set(cs3):
    syms = enumerate_symmetries(cs3.source)
    swap = next(s for s in syms if s.cycles(cs3.source) == "(c1 c2)")
    act = PTAction(cs3, swap)
    assert cs3.place_names[act.place(cs3.place_index["A.(c1,c3)"])] == "A.(c2,c3)"
    d = dec.parse(cs3, "{(R.c1, {h.c1}), (Sys.c1, TOP), (Sys.c2, TOP), (Sys.c3, TOP)}")
    assert dec.render(cs3, act.decision_set(d)) == "{(R.c2, {h.c2}), (Sys.c1, TOP), (Sys.c2, TOP), (Sys.c3, TOP)}"


def test_composition_on_random_decision_sets():
    p = pt("cs", 3)
    rng = random.Random(7)
    syms = enumerate_symmetries(p.source)
    acts = {s: PTAction(p, s) for s in syms}
    states = reachable(p, limit=3000)
    for _ in range(100):
        d = rng.choice(states)
        s1, s2 = rng.choice(syms), rng.choice(syms)
        assert acts[s2].decision_set(acts[s1].decision_set(d)) == acts[compose(s2, s1)].decision_set(d)


def test_action_agrees_with_renaming():
    p = pt("cm", 2, 2)
    g = p.source
    for s in enumerate_symmetries(g):
        cmap = {c: s.color(g, cls.id, c) for cls in g.classes for c in cls.colors}
        act = PTAction(p, s)
        for i, name in enumerate(p.place_names):
            assert p.place_names[act.place(i)] == rename(name, cmap)
        for d in reachable(p, limit=300):
            assert act.decision_set(d) == rename_decision_set(p, d, cmap)


@pytest.mark.parametrize("family, params", [("cs", (3,)), ("cm", (2, 1))])
def test_flow_equivariance(family, params):
    p = pt(family, *params)
    for s in enumerate_symmetries(p.source):
        act = PTAction(p, s)
        for t in range(p.n_transitions):
            st = act.transition(t)
            assert p.pre[st] == {act.place(q): k for q, k in p.pre[t].items()}
            assert p.post[st] == {act.place(q): k for q, k in p.post[t].items()}


def test_firing_equivariance():
    p = pt("cs", 2)
    acts = [PTAction(p, s) for s in enumerate_symmetries(p.source)]
    todo, seen = [dict(p.initial)], set()
    while todo:
        m = todo.pop()
        key = frozenset(m.items())
        if key in seen:
            continue
        seen.add(key)
        for t in range(p.n_transitions):
            if not pt_enabled(p, m, t):
                continue
            m2 = pt_fire(p, m, t)
            for a in acts:
                assert pt_enabled(p, a.marking(m), a.transition(t))
                assert pt_fire(p, a.marking(m), a.transition(t)) == a.marking(m2)
            todo.append(m2)


def test_cycle_notation():
    g = game("cs", 3)
    assert [s.cycles(g) for s in enumerate_symmetries(g)] == [
        "()", "(c2 c3)", "(c1 c2)", "(c1 c2 c3)", "(c1 c3 c2)", "(c1 c3)"]


def test_asymmetric_initial_marking_is_rejected():
    from hlpg.game import build_canonical
    g = parse_game("game g\nclass C = { a b }\nplace P sys : ( C ) init { ( a ) }\n")
    with pytest.raises(ModelError, match="not symmetric"):
        build_canonical(g)
