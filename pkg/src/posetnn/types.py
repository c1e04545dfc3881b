from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Union


@dataclass(frozen=True, order=True)
class Location:
    offset: int
    lineno: int
    column: int


class NegativeInfinity:
    """
    Tropical zero.  Absorbing for addition, identity for `max`, and strictly
    smaller than every rational or float.
    """

    __instance: "NegativeInfinity | None" = None

    def __new__(cls) -> "NegativeInfinity":
        if cls.__instance is None:
            cls.__instance = super().__new__(cls)
        return cls.__instance

    def __repr__(self) -> str:
        return "NEG_INF"

    def __str__(self) -> str:
        return "-inf"

    def __float__(self) -> float:
        return float("-inf")

    def __hash__(self) -> int:
        return hash("NEG_INF")

    def __eq__(self, other: object) -> bool:
        return other is self

    def __lt__(self, other: Any) -> bool:
        return other is not self

    def __le__(self, other: Any) -> bool:
        return True

    def __gt__(self, other: Any) -> bool:
        return False

    def __ge__(self, other: Any) -> bool:
        return other is self

    def __add__(self, other: Any) -> "NegativeInfinity":
        return self

    __radd__ = __add__

    def __neg__(self) -> float:
        return float("inf")


NEG_INF = NegativeInfinity()

# A coefficient of a tropical polynomial.
Coefficient = Union[Fraction, NegativeInfinity]

# A ReLU_t threshold.  `NEG_INF` means the node is the identity.
Threshold = Union[float, NegativeInfinity]