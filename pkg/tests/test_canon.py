import itertools
import random

import pytest
from hypothesis import given, strategies as st

from hlpg import canon
from hlpg import decision as dec
from hlpg.model import ModelError
from hlpg.symmetry import actions, enumerate_symmetries

from conftest import color_maps, orbit_key, pt, reachable

EX5 = "{(R.c1, {h.c1}), (Sys.c1, TOP), (Sys.c2, TOP), (Sys.c3, TOP)}"


@pytest.fixture(scope="module")
def col3():
    return canon.Coloring(pt("cs", 3))


def lines(col, r):
    return canon.render(col, r).splitlines()


def test_represent_singletons(col3):
    d = dec.parse(col3.pt, EX5)
    r, alpha = canon.represent(col3, d)
    assert lines(col3, r) == [
        "|Z1^1|=1 |Z1^2|=1 |Z1^3|=1 |Z2^1|=1",
        "Z1^1->C1[1] Z1^2->C1[1] Z1^3->C1[1] Z2^1->C2[1]",
        "(R.Z1^1, {h.Z1^1})", "(Sys.Z1^1, TOP)", "(Sys.Z1^2, TOP)", "(Sys.Z1^3, TOP)"]
    assert canon.instantiate(col3, r, alpha) == d


def test_represent_empty(col3):
    r, _ = canon.represent(col3, ())
    assert r.entries == () and [len(b) for b in r.blocks] == [3, 1]


def test_contexts(col3):
    r, _ = canon.represent(col3, dec.parse(col3.pt, EX5))
    d_ = canon.DIAMOND
    assert canon.context(r, 0, 0) == {
        ("Sys", ((0, d_, 1),), None),
        ("R", ((0, d_, 1),), (("h", ((0, 0, 1),)),)),
        ("R", ((0, 0, 1),), (("h", ((0, d_, 1),)),)),
    }
    assert canon.context(r, 0, 1) == {("Sys", ((0, d_, 1),), None)} == canon.context(r, 0, 2)
    assert canon.context(r, 1, 0) == set()


def test_minimize_merges_undecided_players(col3):
    r, _ = canon.represent(col3, dec.parse(col3.pt, EX5))
    m = canon.minimize(col3, r)
    assert lines(col3, m) == [
        "|Z1^1|=1 |Z1^2|=2 |Z2^1|=1",
        "Z1^1->C1[1] Z1^2->C1[1] Z2^1->C2[1]",
        "(R.Z1^1, {h.Z1^1})", "(Sys.Z1^1, TOP)", "(Sys.Z1^2#1, TOP)"]
    assert canon.minimize(col3, m) == m
    assert canon.is_minimal(col3, m) and not canon.is_minimal(col3, r)


def test_order_swaps_to_the_smaller_form(col3):
    m = canon.minimize(col3, canon.represent(col3, dec.parse(col3.pt, EX5))[0])
    c = canon.order(col3, m)
    assert c.canonical
    assert lines(col3, c) == [
        "|Z1^1|=2 |Z1^2|=1 |Z2^1|=1",
        "Z1^1->C1[1] Z1^2->C1[1] Z2^1->C2[1]",
        "(R.Z1^2, {h.Z1^2})", "(Sys.Z1^1#1, TOP)", "(Sys.Z1^2, TOP)"]
    assert canon.canonical_serialization(c) < canon.canonical_serialization(m)
    assert canon.order(col3, c) == c


def test_serialization_is_injective_on_names(col3):
    m = canon.minimize(col3, canon.represent(col3, dec.parse(col3.pt, EX5))[0])
    swapped = canon.relabel(m, ((1, 0), (0,)))
    assert swapped != m
    assert canon.canonical_serialization(swapped) != canon.canonical_serialization(m)
    assert canon.canonical_serialization(m) == canon.canonical_serialization(
        canon.DynamicRepresentation(m.blocks, m.entries))


def test_single_block_is_already_ordered(col3):
    r = canon.minimize_decision_set(col3, dec.initial_decision_set(col3.pt))
    assert canon.order(col3, r).entries == r.entries
    assert lines(col3, r) == [
        "|Z1^1|=3 |Z2^1|=1", "Z1^1->C1[1] Z2^1->C2[1]",
        "(Env.Z2^1, {d.Z1^1#1})", "(Sys.Z1^1#1, TOP)"]


def _post_inf(col, c):
    return dec.parse(col.pt, EX5.replace("c1}", f"{c}}}").replace("R.c1", f"R.{c}"))


def test_symmetric_nodes_share_a_canonical_form(col3):
    reps = {canon.rep_key(canon.canonicalize(col3, _post_inf(col3, c))) for c in ("c1", "c2", "c3")}
    assert len(reps) == 1


def valid_assignments(col, r):
    """Brute force over all color -> block maps."""
    rows = []
    for ci, bl in enumerate(r.blocks):
        opts = []
        for row in itertools.product(range(len(bl)), repeat=col.size(ci)):
            alpha = [list(x) for x in ([0] * col.size(i) for i in range(len(r.blocks)))]
            alpha[ci] = list(row)
            try:
                canon.check_assignment(col, [r.blocks[i] if i == ci else ((0, col.size(i)),)
                                             for i in range(len(r.blocks))],
                                       [row if i == ci else [0] * col.size(i) for i in range(len(r.blocks))])
            except ModelError:
                continue
            opts.append(list(row))
        rows.append(opts)
    return [list(combo) for combo in itertools.product(*rows)]


def test_all_assignments_give_the_orbit(col3):
    r = canon.canonicalize(col3, _post_inf(col3, "c1"))
    got = {canon.instantiate(col3, r, a) for a in valid_assignments(col3, r)}
    assert got == {_post_inf(col3, c) for c in ("c1", "c2", "c3")}


def test_invalid_assignment_rejected(col3):
    r = canon.canonicalize(col3, _post_inf(col3, "c1"))
    with pytest.raises(ModelError):
        canon.instantiate(col3, r, [[0, 0, 0], [0]])


@pytest.mark.parametrize("family, params, sample", [("cs", (2,), None), ("cm", (2, 1), None), ("dw", (3,), None),
                                                   ("cs", (3,), 150)])
def test_instantiation_is_exactly_the_orbit(family, params, sample):
    p = pt(family, *params)
    col = canon.Coloring(p)
    cmaps = color_maps(p.source)
    states = reachable(p, limit=4000)
    if sample:
        states = random.Random(3).sample(states, sample)
    for d in states:
        r = canon.canonicalize(col, d)
        inst = {canon.instantiate(col, r, a) for a in valid_assignments(col, r)}
        assert {orbit_key(p, x, cmaps) for x in inst} == {orbit_key(p, d, cmaps)}
        assert d in inst


@pytest.mark.parametrize("family, params", [("cs", (2,)), ("cm", (2, 1)), ("cm", (2, 2)), ("dw", (3,))])
def test_canonical_form_is_a_complete_orbit_invariant(family, params):
    p = pt(family, *params)
    col = canon.Coloring(p)
    cmaps = color_maps(p.source)
    by_rep, by_orbit = {}, {}
    for d in reachable(p, limit=6000):
        k = canon.rep_key(canon.canonicalize(col, d))
        o = orbit_key(p, d, cmaps)
        assert by_rep.setdefault(k, o) == o
        assert by_orbit.setdefault(o, k) == k


def test_minimal_reps_have_distinct_contexts():
    p = pt("cs", 3)
    col = canon.Coloring(p)
    states = random.Random(11).sample(reachable(p, limit=20000), 200)
    for d in states:
        m = canon.minimize(col, canon.represent(col, d)[0])
        for ci, bl in enumerate(m.blocks):
            if col.classes[ci].ordered:
                continue
            for a, b in itertools.combinations(range(len(bl)), 2):
                if bl[a][0] != bl[b][0]:
                    continue
                ca, cb = canon.context(m, ci, a), canon.context(m, ci, b)
                renamed = {_swap(x, ci, a, b) for x in cb}
                assert ca != renamed


def _swap(entry, ci, a, b):
    def el(e):
        c, j, k = e
        if c == ci and j in (a, b):
            return (c, a if j == b else b, k)
        return e
    pid, elems, comm = entry
    comm = None if comm is None else tuple(sorted((t, tuple(el(x) for x in te)) for t, te in comm))
    return (pid, tuple(el(x) for x in elems), comm)


# orbit invariance as a property over random reachable states and symmetries
CM22 = pt("cm", 2, 2)
CM22_STATES = reachable(CM22, limit=3000)
CM22_ACTS = actions(CM22, enumerate_symmetries(CM22.source))
CM22_COL = canon.Coloring(CM22)


@given(st.integers(0, len(CM22_STATES) - 1), st.integers(0, len(CM22_ACTS) - 1))
def test_orbit_invariance(i, j):
    d = CM22_STATES[i]
    assert canon.canonicalize(CM22_COL, CM22_ACTS[j].decision_set(d)) == canon.canonicalize(CM22_COL, d)


@given(st.integers(0, len(CM22_STATES) - 1), st.permutations([0, 1]), st.permutations([0, 1]))
def test_represent_then_canonicalize_is_stable(i, pm, po):
    d = CM22_STATES[i]
    r, _ = canon.represent(CM22_COL, d)
    assert canon.canonicalize_rep(CM22_COL, r) == canon.canonicalize(CM22_COL, d)
    c = canon.canonicalize(CM22_COL, d)
    assert canon.canonicalize_rep(CM22_COL, c) == c


def test_symbolic_modes_partition():
    p = pt("cm", 3, 1)
    col = canon.Coloring(p)
    # a state where one machine is singled out: blocks of sizes (2, 1) or (1, 2) on M
    d = next(d for d in reachable(p) if any(p.place_names[q].startswith("Known") for q, _ in d))
    r = canon.canonicalize(col, d)
    cards = [c for _, c in r.blocks[0]]
    assert sorted(cards) == [1, 2]
    modes = canon.symbolic_modes(col, r, "kill")
    assert sorted(sm.instance for sm in modes) == [((0, 1),), ((1, 1),)]
    covered = [x for sm in modes for x in canon.mode_instances(col, r, sm)]
    assert sorted(covered) == [(0,), (1,), (2,)]


def test_symbolic_modes_of_a_cover_all_concrete_modes(col3):
    d0 = dec.initial_decision_set(col3.pt)
    for d in dec.top_successors(col3.pt, d0)[:: 4099]:
        r = canon.canonicalize(col3, d)
        covered = [x for sm in canon.symbolic_modes(col3, r, "a") for x in canon.mode_instances(col3, r, sm)]
        assert len(covered) == len(set(covered)) == 9


def test_parameterless_transition_has_one_mode():
    from hlpg.model import expand, parse_game
    p = expand(parse_game("game g\nclass C = { a b }\nplace P sys : ( C ) init { ( a ) ( b ) }\n"
                          "place Q sys : ( C )\ntrans t vars ( )\n"))
    col = canon.Coloring(p)
    r = canon.canonicalize(col, dec.initial_decision_set(p))
    assert canon.symbolic_modes(col, r, "t") == [canon.SymbolicMode("t", ())]


def test_split_leaves_untouched_blocks(col3):
    r = canon.canonicalize(col3, _post_inf(col3, "c1"))
    s, h = canon.split(col3, r, canon.SymbolicMode("h", ((1, 1),)))
    assert [c for _, c in s.blocks[0]] == [2, 1]
    s, h = canon.split_full(col3, r)
    assert [c for _, c in s.blocks[0]] == [1, 1, 1]
    assert h[(0, 0)] == h[(0, 1)] == (0, 0) and h[(0, 2)] == (0, 1)
    s, _ = canon.split(col3, r, canon.SymbolicMode("h", ((1, 1),)))
    assert canon.instantiate(col3, s) == canon.instantiate(col3, r)


def test_symbolic_fire_after_informing_c1(col3):
    d = dec.parse(col3.pt, "{(I.c2, {inf.c2}), (Sys.c1, {inf.c1,inf.c2,inf.c3}), "
                           "(Sys.c2, {inf.c1,inf.c2,inf.c3}), (Sys.c3, {inf.c1,inf.c2,inf.c3})}")
    r = canon.canonicalize(col3, d)
    (sm, _), = canon.symbolic_enabled(col3, r)
    assert sm.transition == "inf"
    assert canon.symbolic_fire(col3, r, sm) == canon.canonicalize(col3, _post_inf(col3, "c1"))
    with pytest.raises(ModelError):
        canon.symbolic_fire(col3, r, canon.SymbolicMode("h", ((0, 1),)))


def test_top_successors_of_decided_rep_are_empty(col3):
    r = canon.canonicalize(col3, dec.parse(col3.pt, "{(H.c1, {})}"))
    assert canon.symbolic_top_successors(col3, r) == []


def test_top_successors_include_the_connecting_choice(col3):
    r = canon.canonicalize(col3, _post_inf(col3, "c1"))
    target = dec.parse(col3.pt, "{(R.c1, {h.c1}), (Sys.c1, {a.(c1,c1)}), (Sys.c2, {a.(c2,c1)}), "
                                "(Sys.c3, {a.(c3,c1)})}")
    succ = canon.symbolic_top_successors(col3, r)
    assert canon.canonicalize(col3, target) in succ
    assert len(succ) <= len(dec.top_successors(col3.pt, _post_inf(col3, "c1")))


def _symbolic_successors(col, r):
    if any(comm is None for _, _, comm in r.entries):
        return {canon.rep_key(x) for x in canon.symbolic_top_successors(col, r)}
    return {canon.rep_key(canon.symbolic_fire(col, r, sm)) for sm, _ in canon.symbolic_enabled(col, r)}


@pytest.mark.parametrize("family, params", [("cs", (2,)), ("cm", (2, 1))])
def test_successor_correspondence(family, params):
    """Explicit successors quotiented by the group equal the symbolic ones."""
    p = pt(family, *params)
    col = canon.Coloring(p)
    for d in reachable(p):
        r = canon.canonicalize(col, d)
        nxt = dec.top_successors(p, d) if dec.has_top(d) else [dec.fire(p, d, t) for t in dec.enabled(p, d)]
        assert {canon.rep_key(canon.canonicalize(col, x)) for x in nxt} == _symbolic_successors(col, r)
        assert canon.classify_rep(col, r) == dec.classify(p, d)


def test_r_all_commits_everything(col3):
    r = canon.canonicalize(col3, _post_inf(col3, "c1"))
    full = canon.instantiate(col3, canon.r_all(col3, r))
    assert all(k == frozenset(col3.pt.postset[q]) for q, k in full)


def test_ordered_class_keeps_singleton_blocks():
    p = pt("dw", 3)
    col = canon.Coloring(p)
    for d in reachable(p):
        r = canon.canonicalize(col, d)
        assert all(card == 1 for _, card in r.blocks[0])


def test_interner():
    col = canon.Coloring(pt("cs", 2))
    it = canon.Interner()
    a = canon.canonicalize(col, dec.initial_decision_set(col.pt))
    assert it.get_or_insert(a) == (0, True)
    assert it.get_or_insert(canon.DynamicRepresentation(a.blocks, a.entries, True)) == (0, False)
