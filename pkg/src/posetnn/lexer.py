from typing import Iterator, Optional, Type

import posetnn.tokens as t

_PUNCTUATION: dict[str, Type[t.Token]] = {
    ";": t.Semicolon,
    ",": t.Comma,
    "<": t.LessThan,
    ">": t.GreaterThan,
    "+": t.Plus,
    "-": t.Minus,
    "*": t.Star,
    "/": t.Slash,
    "^": t.Caret,
}


def _is_whitespace(c: Optional[str]) -> bool:
    return c in (" ", "\n", "\t", "\r")


def _is_name_start(c: Optional[str]) -> bool:
    if c is None:
        return False
    return c.isalpha() or c == "_"


def _is_name_continue(c: Optional[str]) -> bool:
    if c is None:
        return False
    return c.isalnum() or c == "_"


def _is_digit(c: Optional[str]) -> bool:
    if c is None:
        return False
    return "0" <= c <= "9"


class _Tokenizer:
    def __init__(self, string: str):
        self._string = string
        self._cursor = 0
        self._lineno = 0
        self._column = 0

    def _peek(self) -> Optional[str]:
        if self._cursor >= len(self._string):
            return None
        return self._string[self._cursor]

    def _bump(self) -> str:
        assert self._cursor < len(self._string)
        char = self._string[self._cursor]
        self._cursor += 1
        if char == "\n":
            self._lineno += 1
            self._column = 0
        else:
            self._column += 1
        return char

    def _next_class(self) -> Type[t.Token]:
        curr = self._bump()

        if _is_whitespace(curr):
            while _is_whitespace(self._peek()):
                self._bump()
            return t.Whitespace

        if curr == "#":
            # Consume everything up to the end of the line.
            while self._peek() not in ("\n", None):
                self._bump()
            return t.LineComment

        if _is_digit(curr):
            while _is_digit(self._peek()):
                self._bump()
            return t.Integer

        if _is_name_start(curr):
            while _is_name_continue(self._peek()):
                self._bump()
            return t.Name

        return _PUNCTUATION.get(curr, t.Unknown)

    def next_token(self) -> t.Token:
        start = t.Location(
            offset=self._cursor, lineno=self._lineno, column=self._column
        )

        token_class = self._next_class()

        end = t.Location(
            offset=self._cursor, lineno=self._lineno, column=self._column
        )

        return token_class(
            text=self._string[start.offset : end.offset], start=start, end=end
        )

    def is_eof(self) -> bool:
        return self._cursor >= len(self._string)


def tokenize(string: str) -> Iterator[t.Token]:
    tokenizer = _Tokenizer(string)

    while not tokenizer.is_eof():
        yield tokenizer.next_token()
