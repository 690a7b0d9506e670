"""Realizability of high-level Petri games via canonical representations of
symbolic decision sets."""

from .model import CapExceeded, ModelError, ParseError, expand, parse_game, print_game
from .bench import gen_cm, gen_cs, gen_dw
from .game import build_canonical, build_explicit, build_membership, solve_buchi

__all__ = [
    "CapExceeded", "ModelError", "ParseError", "expand", "parse_game", "print_game",
    "gen_cm", "gen_cs", "gen_dw",
    "build_canonical", "build_explicit", "build_membership", "solve_buchi",
]
