from dataclasses import dataclass

from posetnn.types import Location


@dataclass(frozen=True)
class Token:
    text: str
    start: Location
    end: Location

    def __repr__(self) -> str:
        return f"t.{type(self).__name__}({self.text!r})"


# --- Literals ---


class Integer(Token):
    pass


# --- Names ---


class Name(Token):
    pass


# --- Symbols ---


class Semicolon(Token):
    pass


class Comma(Token):
    pass


class LessThan(Token):
    pass


class GreaterThan(Token):
    pass


class Plus(Token):
    pass


class Minus(Token):
    pass


class Star(Token):
    pass


class Slash(Token):
    pass


class Caret(Token):
    pass


# --- Other ---


class LineComment(Token):
    pass


class Whitespace(Token):
    pass


class Unknown(Token):
    pass
