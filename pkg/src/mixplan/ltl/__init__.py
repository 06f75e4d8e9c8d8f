from .ast import (
    Always,
    And,
    Atom,
    Eventually,
    Formula,
    Implies,
    Next,
    Not,
    Or,
    Top,
    Until,
    atoms,
    is_sc_ltl,
    normalize,
    to_text,
)
from .buchi import Clause, Guard, Label, Nba, dist, dump_nba
from .parse import parse
from .translate import translate

__all__ = [
    "Always",
    "And",
    "Atom",
    "Clause",
    "Eventually",
    "Formula",
    "Guard",
    "Implies",
    "Label",
    "Nba",
    "Next",
    "Not",
    "Or",
    "Top",
    "Until",
    "atoms",
    "dist",
    "dump_nba",
    "is_sc_ltl",
    "normalize",
    "parse",
    "to_text",
    "translate",
]
