"""
One frozen record per subcommand, holding everything needed to run it.
"""
import dataclasses
import pathlib
from fractions import Fraction
from typing import Literal, Optional

Format = Literal["text", "json", "csv"]


@dataclasses.dataclass(frozen=True)
class CommandSpec:
    pass


# === poset ====================================================================


@dataclasses.dataclass(frozen=True)
class PosetListCommand(CommandSpec):
    n: int


@dataclasses.dataclass(frozen=True)
class PosetShowCommand(CommandSpec):
    poset: str


@dataclasses.dataclass(frozen=True)
class PosetCountCommand(CommandSpec):
    poset: str


@dataclasses.dataclass(frozen=True)
class PosetComposeCommand(CommandSpec):
    outer: str
    inner: tuple[str, ...]


# === trop =====================================================================


@dataclasses.dataclass(frozen=True)
class TropOfPosetCommand(CommandSpec):
    poset: str


@dataclasses.dataclass(frozen=True)
class TropExpandCommand(CommandSpec):
    poset: str


@dataclasses.dataclass(frozen=True)
class TropActCommand(CommandSpec):
    poset: str
    polynomials: tuple[str, ...]
    shared_variables: bool = False
    nvars: Optional[int] = None


@dataclasses.dataclass(frozen=True)
class TropRecoverCommand(CommandSpec):
    polynomial: str
    nvars: Optional[int] = None


# === polytope =================================================================


@dataclasses.dataclass(frozen=True)
class PolytopeVerticesCommand(CommandSpec):
    poset: str


@dataclasses.dataclass(frozen=True)
class PolytopeActCommand(CommandSpec):
    """
    Acts with `poset` on the order polytopes of `inner`, or on unit
    segments when `inner` is empty.
    """

    poset: str
    inner: tuple[str, ...] = ()


@dataclasses.dataclass(frozen=True)
class PolytopeTriangulateCommand(CommandSpec):
    poset: str


@dataclasses.dataclass(frozen=True)
class PolytopeHullCommand(CommandSpec):
    points: pathlib.Path


# === nn =======================================================================


@dataclasses.dataclass(frozen=True)
class NnShowCommand(CommandSpec):
    poset: str


@dataclasses.dataclass(frozen=True)
class NnEvalCommand(CommandSpec):
    poset: str
    inputs: tuple[float, ...]
    combine: bool = True


@dataclasses.dataclass(frozen=True)
class NnPiecesCommand(CommandSpec):
    poset: str
    low: float = -2.0
    high: float = 2.0
    steps: int = 21


# === filter ===================================================================


@dataclasses.dataclass(frozen=True)
class FilterSource:
    """
    Either a poset literal with an optional index map, or a random filter
    with `random_terms` terms besides zero.
    """

    poset: Optional[str] = None
    index_map: Optional[tuple[int, ...]] = None
    random_terms: Optional[int] = None
    window: int = 4
    seed: Optional[int] = None


@dataclasses.dataclass(frozen=True)
class FilterEmitCommand(CommandSpec):
    source: FilterSource


@dataclasses.dataclass(frozen=True)
class FilterPoolCommand(CommandSpec):
    source: FilterSource
    tensor: pathlib.Path
    prefilter_relu: bool = False


@dataclasses.dataclass(frozen=True)
class FilterGradcheckCommand(CommandSpec):
    source: FilterSource
    windows: int
    seed: int
    step: float = 1e-4
    rtol: float = 1e-4


# === experiment ===============================================================


@dataclasses.dataclass(frozen=True)
class ExperimentHistogramCommand(CommandSpec):
    """
    `posets` may hold literals or the word `all4` for every poset on four
    points.  `random_filters` random filters with `random_terms` terms each
    are added when a seed is given.
    """

    posets: tuple[str, ...]
    step: Fraction = Fraction(1, 25)
    bins: int = 50
    random_filters: int = 0
    random_terms: int = 7
    seed: Optional[int] = None


@dataclasses.dataclass(frozen=True)
class ExperimentImageCommand(CommandSpec):
    image: pathlib.Path
    first: FilterSource
    second: FilterSource
    iterations: int = 3
    save_dir: Optional[pathlib.Path] = None
