"""Explicit decision sets: markings whose system tokens carry commitment sets.

A decision set is a tuple of ``(place, commitment)`` entries sorted by place
index, where ``commitment`` is ``TOP`` (``None``) or a frozenset of P/T
transition indices taken from the postset of the place.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .model import ModelError, PTGame

TOP = None

Commitment = frozenset | None
DecisionSet = tuple[tuple[int, Commitment], ...]


class ClassViolation(ModelError):
    """The game leaves the supported class (two environment tokens, unsafe marking)."""


@dataclass(frozen=True)
class PropertyFlags:
    env_dependent: bool = False
    contains_bad: bool = False
    deadlock: bool = False
    terminating: bool = False
    nondeterministic: bool = False

    @property
    def closed(self) -> bool:
        """Nodes that only get a self-loop in the game arena."""
        return self.contains_bad or self.deadlock or self.terminating or self.nondeterministic

    @property
    def accepting(self) -> bool:
        return (self.terminating or self.env_dependent) and not (
            self.deadlock or self.nondeterministic or self.contains_bad)


def _key(entry):
    return entry[0]


def make(entries) -> DecisionSet:
    return tuple(sorted(((p, None if k is None else frozenset(k)) for p, k in entries), key=_key))


def marking(d: DecisionSet) -> dict[int, int]:
    return {p: 1 for p, _ in d}


def check_invariants(pt: PTGame, d: DecisionSet) -> None:
    places = [p for p, _ in d]
    if len(set(places)) != len(places):
        raise ClassViolation("unsafe marking: two tokens on " + pt.place_names[_dup(places)])
    if sum(1 for p in places if pt.env[p]) > 1:
        raise ClassViolation("more than one environment token")
    for p, k in d:
        if k is not None and not k <= set(pt.postset[p]):
            raise ModelError(f"commitment of {pt.place_names[p]} leaves its postset")


def _dup(items):
    seen = set()
    for x in items:
        if x in seen:
            return x
        seen.add(x)


def initial_decision_set(pt: PTGame) -> DecisionSet:
    entries = []
    for p, k in pt.initial.items():
        if k > 1:
            raise ClassViolation("unsafe initial marking on " + pt.place_names[p])
        entries.append((p, frozenset(pt.postset[p]) if pt.env[p] else TOP))
    d = make(entries)
    check_invariants(pt, d)
    return d


def has_top(d: DecisionSet) -> bool:
    return any(k is None for _, k in d)


def commitment_choices(pt: PTGame, p: int) -> list[frozenset]:
    """All subsets of post(p), bitmask ascending over the postset sorted by id."""
    post = pt.postset[p]
    return [frozenset(post[i] for i in range(len(post)) if mask >> i & 1) for mask in range(1 << len(post))]


def count_top_successors(pt: PTGame, d: DecisionSet) -> int:
    tops = [p for p, k in d if k is None]
    if not tops:
        return 0
    return 1 << sum(len(pt.postset[p]) for p in tops)


def iter_top_successors(pt: PTGame, d: DecisionSet):
    tops = [i for i, (_, k) in enumerate(d) if k is None]
    if not tops:
        return
    choices = [commitment_choices(pt, d[i][0]) for i in tops]
    base = list(d)
    for combo in itertools.product(*choices):
        for i, k in zip(tops, combo):
            base[i] = (d[i][0], k)
        yield tuple(base)


def top_successors(pt: PTGame, d: DecisionSet) -> list[DecisionSet]:
    return list(iter_top_successors(pt, d))


def enabled(pt: PTGame, d: DecisionSet) -> list[int]:
    """Transitions allowed by every token in their preset (sorted by index)."""
    if has_top(d):
        return []
    count: dict[int, int] = {}
    for _, k in d:
        for t in k:
            count[t] = count.get(t, 0) + 1
    pre = pt.pre_places
    return sorted(t for t, c in count.items() if c == len(pre[t]))


def marking_enabled(pt: PTGame, d: DecisionSet) -> list[int]:
    """Transitions enabled in the underlying marking M(D)."""
    present = {p for p, _ in d}
    out = set()
    for p in present:
        for t in pt.postset[p]:
            if all(q in present for q in pt.pre_places[t]) and all(w <= 1 for w in pt.pre[t].values()):
                out.add(t)
    return sorted(out)


def fire(pt: PTGame, d: DecisionSet, t: int) -> DecisionSet:
    if t not in enabled(pt, d):
        raise ModelError(f"transition {pt.trans_names[t]} is not enabled")
    pre = pt.pre[t]
    entries = [(p, k) for p, k in d if p not in pre]
    for p, w in pt.post[t].items():
        entries.extend([(p, frozenset(pt.postset[p]) if pt.env[p] else TOP)] * w)
    out = make(entries)
    check_invariants(pt, out)
    return out


def system_only(pt: PTGame, t: int) -> bool:
    return not pt.env_transition[t]


def classify(pt: PTGame, d: DecisionSet) -> PropertyFlags:
    top = has_top(d)
    en = enabled(pt, d)
    bad = any(pt.bad[p] for p, _ in d)
    term = not marking_enabled(pt, d)
    env_dep = not top and all(pt.env_transition[t] for t in en)
    dead = not top and not term and not en
    ndet = False
    if len(en) > 1:
        owners: dict[int, int] = {}
        for t in en:
            for p in pt.pre_places[t]:
                if not pt.env[p]:
                    if p in owners:
                        ndet = True
                        break
                    owners[p] = t
            if ndet:
                break
    return PropertyFlags(env_dep, bad, dead, term, ndet)


def render(pt: PTGame, d: DecisionSet) -> str:
    names = pt.place_names
    tnames = pt.trans_names
    parts = []
    for p, k in sorted(d, key=lambda e: names[e[0]]):
        if k is None:
            parts.append(f"({names[p]}, TOP)")
        else:
            parts.append(f"({names[p]}, {{{','.join(sorted(tnames[t] for t in k))}}})")
    return "{" + ", ".join(parts) + "}"


def parse(pt: PTGame, text: str) -> DecisionSet:
    """Inverse of :func:`render`; handy for writing fixtures."""
    body = text.strip()
    if body.startswith("{") and body.endswith("}"):
        body = body[1:-1]
    entries = []
    i = 0
    while i < len(body):
        if body[i] != "(":
            i += 1
            continue
        depth, j = 0, i
        while True:
            if body[j] == "(":
                depth += 1
            elif body[j] == ")":
                depth -= 1
                if depth == 0:
                    break
            j += 1
        inner = body[i + 1:j]
        place, _, rest = _split_top(inner)
        rest = rest.strip()
        if rest == "TOP":
            entries.append((pt.place_index[place.strip()], TOP))
        else:
            names = [n for n in _split_names(rest.strip()[1:-1]) if n]
            entries.append((pt.place_index[place.strip()], frozenset(pt.trans_index[n] for n in names)))
        i = j + 1
    return make(entries)


def _split_top(s: str):
    depth = 0
    for i, ch in enumerate(s):
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        elif ch == "," and depth == 0:
            return s[:i], ",", s[i + 1:]
    raise ValueError(s)


def _split_names(s: str) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            out.append(cur.strip())
            cur = ""
        else:
            cur += ch
    out.append(cur.strip())
    return out
