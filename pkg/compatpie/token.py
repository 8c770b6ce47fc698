import math
from enum import Enum
from typing import Callable, Final


class TokenType(Enum):
    ILLEGAL = "ILLEGAL"
    EOF = "EOF"

    # Identifiers + literals
    IDENT = "IDENT"
    NUMBER = "NUMBER"

    # Operators
    PLUS = "+"
    MINUS = "-"
    ASTERISK = "*"
    SLASH = "/"
    CARET = "^"

    # Delimiters
    COMMA = ","
    LPAREN = "("
    RPAREN = ")"


CONSTANTS: Final[dict[str, float]] = {
    "inf": math.inf,
    "e": math.e,
    "pi": math.pi,
}

FUNCTIONS: Final[dict[str, Callable[[float], float]]] = {
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
}


class Token:
    def __init__(self, token_type: TokenType, literal: str, position: int = 0):
        self.type = token_type
        self.literal = literal
        self.position = position

    def __str__(self):
        return f"Token {{ Type:{self.type}, Literal:{self.literal} }}"
