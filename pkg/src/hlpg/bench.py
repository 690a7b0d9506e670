"""Benchmark families as ``.hlpg`` sources.

Every generator emits text and parses it back, so the format and the
generators cannot drift apart.
"""
from __future__ import annotations

from dataclasses import dataclass

from .model import SymmetricGame, parse_game

FAMILIES = ("cs", "dw", "cm")


@dataclass(frozen=True)
class BenchSpec:
    family: str
    params: tuple[int, ...]

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        expected = 2 if self.family == "cm" else 1
        if len(self.params) != expected or any(p < 1 for p in self.params):
            raise ValueError(f"{self.family} expects {expected} parameter(s) >= 1")

    @property
    def name(self) -> str:
        return f"{self.family.upper()}({','.join(map(str, self.params))})"

    def source(self) -> str:
        return SOURCES[self.family](*self.params)

    def game(self) -> SymmetricGame:
        return parse_game(self.source())


def _colors(prefix: str, n: int) -> list[str]:
    return [f"{prefix}{i + 1}" for i in range(n)]


def _tuples(colors: list[str]) -> str:
    return " ".join(f"( {c} )" for c in colors)


def cs_source(n: int) -> str:
    """Client/server: the environment picks a host, computers must connect to it."""
    cs = _colors("c", n)
    return f"""# client/server with {n} computers
game CS{n}
class C1 = {{ {' '.join(cs)} }}
class C2 = {{ dot }}
place Env env : ( C2 ) init {{ ( dot ) }}
place Sys sys : ( C1 ) init {{ {_tuples(cs)} }}
place I env : ( C1 )
place R env : ( C1 )
place A sys : ( C1 C1 )
place B sys bad : ( C1 C1 )
place H env : ( C1 )
trans d vars ( x:C1 )
trans inf vars ( x:C1 )
trans a vars ( y:C1 x:C1 )
trans b vars ( y:C1 x:C1 )
trans h vars ( x:C1 )
arc Env -> d : {{ ( all(C2) ) }}
arc d -> I : {{ ( x ) }}
arc I -> inf : {{ ( x ) }}
arc Sys -> inf : {{ ( all(C1) ) }}
arc inf -> Sys : {{ ( all(C1) ) }}
arc inf -> R : {{ ( x ) }}
arc Sys -> a : {{ ( y ) }}
arc a -> A : {{ ( y x ) }}
arc A -> b : {{ ( y x ) }}
arc b -> B : {{ ( y x ) }}
arc R -> h : {{ ( x ) }}
arc A -> h : {{ ( all(C1) x ) }}
arc h -> H : {{ ( x ) }}
"""


def dw_source(n: int) -> str:
    """Document workflow: a document travels once around a ring of clerks.

    The environment picks the clerk who receives it first.  Every clerk
    either endorses or rejects; a rejection is bad.
    """
    ks = _colors("k", n)
    return f"""# document workflow with {n} clerks
game DW{n}
class K ordered = {{ {' '.join(ks)} }}
class E = {{ dot }}
place Env env : ( E ) init {{ ( dot ) }}
place Doc env : ( K )
place Idle sys : ( K ) init {{ {_tuples(ks)} }}
place Done sys : ( K )
place Rej sys bad : ( K )
trans start vars ( x:K )
trans endorse vars ( x:K )
trans reject vars ( x:K )
arc Env -> start : {{ ( all(E) ) }}
arc start -> Doc : {{ ( x ) }}
arc Doc -> endorse : {{ ( x ) }}
arc Idle -> endorse : {{ ( x ) }}
arc endorse -> Done : {{ ( x ) }}
arc endorse -> Doc : {{ ( succ(x) ) }}
arc Doc -> reject : {{ ( x ) }}
arc Idle -> reject : {{ ( x ) }}
arc reject -> Rej : {{ ( x ) }}
arc reject -> Doc : {{ ( succ(x) ) }}
"""


def cm_source(m: int, o: int) -> str:
    """Concurrent machines: the environment destroys one machine, every order
    needs a machine of its own that is still intact."""
    ms, os_ = _colors("m", m), _colors("o", o)
    return f"""# concurrent machines: {m} machines, {o} orders
game CM{m}x{o}
class M = {{ {' '.join(ms)} }}
class O = {{ {' '.join(os_)} }}
class E = {{ dot }}
place Env env : ( E ) init {{ ( dot ) }}
place Down env : ( M )
place Known env : ( M )
place Ord sys : ( O ) init {{ {_tuples(os_)} }}
place Job sys : ( O M )
place Err sys bad : ( O )
trans kill vars ( x:M )
trans inf vars ( x:M )
trans assign vars ( p:O x:M )
trans clash vars ( p:O q:O x:M ) guard p != q
trans broken vars ( p:O x:M )
trans lost vars ( p:O x:M )
arc Env -> kill : {{ ( all(E) ) }}
arc kill -> Down : {{ ( x ) }}
arc Down -> inf : {{ ( x ) }}
arc Ord -> inf : {{ ( all(O) ) }}
arc inf -> Ord : {{ ( all(O) ) }}
arc inf -> Known : {{ ( x ) }}
arc Ord -> assign : {{ ( p ) }}
arc assign -> Job : {{ ( p x ) }}
arc Job -> clash : {{ ( p x ) ( q x ) }}
arc clash -> Err : {{ ( p ) ( q ) }}
arc Job -> broken : {{ ( p x ) }}
arc Known -> broken : {{ ( x ) }}
arc broken -> Err : {{ ( p ) }}
arc broken -> Known : {{ ( x ) }}
arc Job -> lost : {{ ( p x ) }}
arc Down -> lost : {{ ( x ) }}
arc lost -> Err : {{ ( p ) }}
arc lost -> Down : {{ ( x ) }}
"""


SOURCES = {"cs": cs_source, "dw": dw_source, "cm": cm_source}


def gen_cs(n: int) -> SymmetricGame:
    return BenchSpec("cs", (n,)).game()


def gen_dw(n: int) -> SymmetricGame:
    return BenchSpec("dw", (n,)).game()


def gen_cm(m: int, o: int) -> SymmetricGame:
    return BenchSpec("cm", (m, o)).game()
