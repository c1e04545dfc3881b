from fractions import Fraction
from typing import Any, Callable, Iterable

import lalr

import posetnn.nodes as n
import posetnn.tokens as t
from posetnn.errors import ParseError
from posetnn.types import NEG_INF

Rule = tuple[type, tuple[type, ...], Callable[..., n.Node]]


def _integer(token: t.Integer) -> n.Integer:
    return n.Integer(start=token.start, end=token.end, value=int(token.text))


def _describe(symbol: Any) -> str:
    return getattr(symbol, "__name__", repr(symbol))


def _or_list(values: Iterable[str]) -> str:
    names = sorted(values)
    if len(names) > 1:
        return ", ".join(names[:-1]) + " or " + names[-1]
    return names[0]


def _token_symbol(token: t.Token) -> type[t.Token]:
    return type(token)


def _token_value(token: t.Token) -> t.Token:
    return token


def _filter_tokens(tokens: Iterable[t.Token]) -> Iterable[t.Token]:
    for token in tokens:
        if isinstance(token, t.LineComment):
            continue

        if isinstance(token, t.Whitespace):
            continue

        if isinstance(token, t.Unknown):
            raise ParseError(
                f"unexpected character {token.text!r} "
                f"at line {token.start.lineno + 1}, "
                f"column {token.start.column + 1}"
            )

        yield token


class _Parser:
    def __init__(self, rules: list[Rule], *, target: type[n.Node]) -> None:
        self._actions: dict[lalr.Production, Callable[..., n.Node]] = {}
        for name, symbols, callback in rules:
            self._actions[lalr.Production(name, symbols)] = callback
        self._target = target
        grammar = lalr.Grammar(list(self._actions), precedence_sets=[])
        self._parse_table = lalr.ParseTable(grammar, target)

    def _action(
        self, production: lalr.Production, *values: t.Token | n.Node
    ) -> n.Node:
        return self._actions[production](*values)

    def parse(self, tokens: Iterable[t.Token]) -> n.Node:
        try:
            result = lalr.parse(
                self._parse_table,
                _filter_tokens(tokens),
                action=self._action,
                token_symbol=_token_symbol,
                token_value=_token_value,
            )
        except lalr.exceptions.ParseError as exc:
            lookahead_token = exc.lookahead_token
            expected = _or_list(
                _describe(symbol) for symbol in exc.expected_symbols
            )
            if lookahead_token is None:
                raise ParseError(
                    f"expected {expected} before end of input"
                ) from exc
            raise ParseError(
                f"expected {expected} before {lookahead_token.text!r} "
                f"at line {lookahead_token.start.lineno + 1}, "
                f"column {lookahead_token.start.column + 1}"
            ) from exc

        assert isinstance(result, self._target)
        return result


# === Poset literals ===========================================================


def _reduce_literal(size: t.Integer, semicolon: t.Semicolon) -> n.PosetLiteral:
    return n.PosetLiteral(
        start=size.start, end=semicolon.end, size=_integer(size), relations=()
    )


def _reduce_literal_with_relations(
    size: t.Integer, semicolon: t.Semicolon, relations: n.RelationList
) -> n.PosetLiteral:
    return n.PosetLiteral(
        start=size.start,
        end=relations.end,
        size=_integer(size),
        relations=relations.relations,
    )


def _reduce_first_relation(relation: n.Relation) -> n.RelationList:
    return n.RelationList(
        start=relation.start, end=relation.end, relations=(relation,)
    )


def _reduce_next_relation(
    prev: n.RelationList, comma: t.Comma, relation: n.Relation
) -> n.RelationList:
    return n.RelationList(
        start=prev.start,
        end=relation.end,
        relations=prev.relations + (relation,),
    )


def _reduce_less_than(
    lower: t.Integer, op: t.LessThan, upper: t.Integer
) -> n.Relation:
    return n.Relation(
        start=lower.start,
        end=upper.end,
        lower=_integer(lower),
        upper=_integer(upper),
    )


def _reduce_greater_than(
    upper: t.Integer, op: t.GreaterThan, lower: t.Integer
) -> n.Relation:
    return n.Relation(
        start=upper.start,
        end=lower.end,
        lower=_integer(lower),
        upper=_integer(upper),
    )


_poset_parser = _Parser(
    [
        (n.PosetLiteral, (t.Integer, t.Semicolon), _reduce_literal),
        (
            n.PosetLiteral,
            (t.Integer, t.Semicolon, n.RelationList),
            _reduce_literal_with_relations,
        ),
        (n.RelationList, (n.Relation,), _reduce_first_relation),
        (
            n.RelationList,
            (n.RelationList, t.Comma, n.Relation),
            _reduce_next_relation,
        ),
        (n.Relation, (t.Integer, t.LessThan, t.Integer), _reduce_less_than),
        (
            n.Relation,
            (t.Integer, t.GreaterThan, t.Integer),
            _reduce_greater_than,
        ),
    ],
    target=n.PosetLiteral,
)


def parse(tokens: Iterable[t.Token]) -> n.PosetLiteral:
    literal = _poset_parser.parse(tokens)
    assert isinstance(literal, n.PosetLiteral)
    return literal


# === Polynomial literals ======================================================


def _reduce_integer_number(value: t.Integer) -> n.Number:
    return n.Number(
        start=value.start, end=value.end, value=Fraction(int(value.text))
    )


def _reduce_negative_number(sign: t.Minus, value: t.Integer) -> n.Number:
    return n.Number(
        start=sign.start, end=value.end, value=-Fraction(int(value.text))
    )


def _reduce_fraction_number(
    numerator: t.Integer, slash: t.Slash, denominator: t.Integer
) -> n.Number:
    if int(denominator.text) == 0:
        raise ParseError(f"zero denominator at column {slash.end.column}")
    return n.Number(
        start=numerator.start,
        end=denominator.end,
        value=Fraction(int(numerator.text), int(denominator.text)),
    )


def _reduce_negative_fraction_number(
    sign: t.Minus,
    numerator: t.Integer,
    slash: t.Slash,
    denominator: t.Integer,
) -> n.Number:
    number = _reduce_fraction_number(numerator, slash, denominator)
    assert number.value is not NEG_INF
    return n.Number(start=sign.start, end=number.end, value=-number.value)


def _reduce_negative_infinity(sign: t.Minus, name: t.Name) -> n.Number:
    if name.text != "inf":
        raise ParseError(
            f"expected 'inf' after '-', got {name.text!r} "
            f"at column {name.start.column + 1}"
        )
    return n.Number(start=sign.start, end=name.end, value=NEG_INF)


def _check_variable(name: t.Name) -> None:
    if name.text == "inf":
        raise ParseError(
            f"positive infinity is not a tropical coefficient "
            f"at column {name.start.column + 1}"
        )


def _reduce_variable(name: t.Name) -> n.Power:
    _check_variable(name)
    return n.Power(start=name.start, end=name.end, name=name.text, exponent=1)


def _reduce_power(
    name: t.Name, caret: t.Caret, exponent: t.Integer
) -> n.Power:
    _check_variable(name)
    return n.Power(
        start=name.start,
        end=exponent.end,
        name=name.text,
        exponent=int(exponent.text),
    )


def _reduce_factor(factor: n.Factor) -> n.Factor:
    return factor


def _reduce_first_factor(factor: n.Factor) -> n.Term:
    return n.Term(start=factor.start, end=factor.end, factors=(factor,))


def _reduce_next_factor(
    prev: n.Term, star: t.Star, factor: n.Factor
) -> n.Term:
    return n.Term(
        start=prev.start, end=factor.end, factors=prev.factors + (factor,)
    )


def _reduce_first_term(term: n.Term) -> n.PolynomialLiteral:
    return n.PolynomialLiteral(start=term.start, end=term.end, terms=(term,))


def _reduce_next_term(
    prev: n.PolynomialLiteral, plus: t.Plus, term: n.Term
) -> n.PolynomialLiteral:
    return n.PolynomialLiteral(
        start=prev.start, end=term.end, terms=prev.terms + (term,)
    )


_polynomial_parser = _Parser(
    [
        (n.Number, (t.Integer,), _reduce_integer_number),
        (n.Number, (t.Minus, t.Integer), _reduce_negative_number),
        (
            n.Number,
            (t.Integer, t.Slash, t.Integer),
            _reduce_fraction_number,
        ),
        (
            n.Number,
            (t.Minus, t.Integer, t.Slash, t.Integer),
            _reduce_negative_fraction_number,
        ),
        (n.Number, (t.Minus, t.Name), _reduce_negative_infinity),
        (n.Power, (t.Name,), _reduce_variable),
        (n.Power, (t.Name, t.Caret, t.Integer), _reduce_power),
        (n.Factor, (n.Number,), _reduce_factor),
        (n.Factor, (n.Power,), _reduce_factor),
        (n.Term, (n.Factor,), _reduce_first_factor),
        (n.Term, (n.Term, t.Star, n.Factor), _reduce_next_factor),
        (n.PolynomialLiteral, (n.Term,), _reduce_first_term),
        (
            n.PolynomialLiteral,
            (n.PolynomialLiteral, t.Plus, n.Term),
            _reduce_next_term,
        ),
    ],
    target=n.PolynomialLiteral,
)


def parse_polynomial(tokens: Iterable[t.Token]) -> n.PolynomialLiteral:
    literal = _polynomial_parser.parse(tokens)
    assert isinstance(literal, n.PolynomialLiteral)
    return literal
