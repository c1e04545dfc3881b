from __future__ import annotations

from dataclasses import dataclass

from posetnn.types import Coefficient, Location


@dataclass(frozen=True)
class Node:
    start: Location
    end: Location


@dataclass(frozen=True)
class Integer(Node):
    value: int


@dataclass(frozen=True)
class Relation(Node):
    """
    A single `lower < upper` pair as written in a poset literal.  Relations
    written with `>` are normalised so that `lower` is always the smaller
    point.
    """

    lower: Integer
    upper: Integer


@dataclass(frozen=True)
class RelationList(Node):
    relations: tuple[Relation, ...]


@dataclass(frozen=True)
class PosetLiteral(Node):
    size: Integer
    relations: tuple[Relation, ...]


class Factor(Node):
    pass


@dataclass(frozen=True)
class Number(Factor):
    value: Coefficient


@dataclass(frozen=True)
class Power(Factor):
    name: str
    exponent: int


@dataclass(frozen=True)
class Term(Node):
    factors: tuple[Factor, ...]


@dataclass(frozen=True)
class PolynomialLiteral(Node):
    terms: tuple[Term, ...]
