import dataclasses
import itertools
import logging
import math
from fractions import Fraction
from typing import Callable, Sequence, Union

import numpy as np

from posetnn import hull
from posetnn.errors import (
    ArityError,
    DimensionError,
    InvalidPosetError,
    NotLatticeError,
    NotOrderPolytopeError,
)
from posetnn.poset import (
    LinearExtension,
    Poset,
    linear_extensions,
    up_set_masks,
)

logger = logging.getLogger(__name__)

Coordinate = Union[int, Fraction]
Vertex = tuple[Coordinate, ...]


def _as_rational(value: object) -> Coordinate:
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else value
    raise NotLatticeError(f"{value!r} is not an exact coordinate")


def _as_integer(value: object) -> int:
    coordinate = _as_rational(value)
    if not isinstance(coordinate, int):
        raise NotLatticeError(f"{value!r} is not an integer coordinate")
    return coordinate


def is_lattice_point(vertex: Vertex) -> bool:
    return all(isinstance(value, int) for value in vertex)


@dataclasses.dataclass(frozen=True)
class LatticePolytope:
    """
    A polytope held as its vertex list in lexicographic order.  Vertices
    are integer points unless the polytope was built with `lattice=False`,
    in which case coordinates may be exact fractions.
    """

    dim: int
    vertices: tuple[Vertex, ...]

    def __post_init__(self) -> None:
        if not self.vertices:
            raise DimensionError("a polytope needs at least one vertex")
        for vertex in self.vertices:
            if len(vertex) != self.dim:
                raise DimensionError(
                    f"vertex {vertex!r} does not have dimension {self.dim}"
                )
        assert list(self.vertices) == sorted(set(self.vertices))

    @classmethod
    def from_points(
        cls,
        points: Sequence[Sequence[object]],
        *,
        dim: int | None = None,
        lattice: bool = True,
    ) -> "LatticePolytope":
        """
        The convex hull of `points`.  Non-integer points may be passed in,
        but unless `lattice` is false they must not survive as vertices.
        """
        if dim is None:
            if not points:
                raise DimensionError("cannot infer dimension of no points")
            dim = len(points[0])
        vertices = hull.hull_vertices(points)  # type: ignore[arg-type]
        convert: Callable[[object], Coordinate] = (
            _as_integer if lattice else _as_rational
        )
        return cls(
            dim=dim,
            vertices=tuple(
                tuple(convert(value) for value in vertex)
                for vertex in vertices
            ),
        )

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, vertex: object) -> bool:
        return vertex in self.vertices


@dataclasses.dataclass(frozen=True)
class Simplex:
    """
    The simplex of an order polytope cut out by one linear extension.  Vertex
    `k` is the indicator vector of the top `k` points of the extension.
    """

    vertices: tuple[Vertex, ...]
    extension: LinearExtension

    def __post_init__(self) -> None:
        assert len(self.vertices) == len(self.extension) + 1


def order_polytope_vertices(poset: Poset) -> LatticePolytope:
    n = poset.n
    return LatticePolytope(
        dim=n,
        vertices=tuple(
            sorted(
                tuple(mask >> i & 1 for i in range(n))
                for mask in up_set_masks(poset)
            )
        ),
    )


def _simplex_of_extension(extension: LinearExtension) -> Simplex:
    n = len(extension)
    vertices = []
    current = [0] * n
    vertices.append(tuple(current))
    for point in reversed(extension.perm):
        current[point] = 1
        vertices.append(tuple(current))
    return Simplex(vertices=tuple(vertices), extension=extension)


def triangulate(poset: Poset) -> list[Simplex]:
    return [
        _simplex_of_extension(extension)
        for extension in linear_extensions(poset)
    ]


def shared_face(a: Simplex, b: Simplex) -> frozenset[Vertex]:
    return frozenset(a.vertices) & frozenset(b.vertices)


def poset_from_vertices(polytope: LatticePolytope) -> Poset:
    for vertex in polytope.vertices:
        if any(value not in (0, 1) for value in vertex):
            raise NotOrderPolytopeError(f"{vertex!r} is not a 0/1 vector")

    n = polytope.dim
    matrix = tuple(
        tuple(
            all(vertex[i] <= vertex[j] for vertex in polytope.vertices)
            for j in range(n)
        )
        for i in range(n)
    )
    try:
        poset = Poset(leq=matrix)
    except InvalidPosetError as exc:
        raise NotOrderPolytopeError(
            "vertices do not determine a partial order"
        ) from exc

    if order_polytope_vertices(poset) != polytope:
        raise NotOrderPolytopeError(
            "vertices are not the vertex set of an order polytope"
        )
    return poset


def embed(
    polytope: LatticePolytope, before: int, after: int
) -> LatticePolytope:
    """
    Pads every vertex with `before` leading and `after` trailing zeros.
    """
    return LatticePolytope(
        dim=before + polytope.dim + after,
        vertices=tuple(
            (0,) * before + vertex + (0,) * after
            for vertex in polytope.vertices
        ),
    )


def lift(polytope: LatticePolytope, value: int, count: int) -> LatticePolytope:
    """
    Appends `count` coordinates fixed at `value` to every vertex.
    """
    return LatticePolytope(
        dim=polytope.dim + count,
        vertices=tuple(
            vertex + (value,) * count for vertex in polytope.vertices
        ),
    )


def minkowski_sum(a: LatticePolytope, b: LatticePolytope) -> LatticePolytope:
    if a.dim != b.dim:
        raise DimensionError(
            f"cannot add polytopes of dimension {a.dim} and {b.dim}"
        )
    return LatticePolytope.from_points(
        [
            tuple(x + y for x, y in zip(u, v))
            for u in a.vertices
            for v in b.vertices
        ],
        dim=a.dim,
    )


def convex_envelope(
    a: LatticePolytope, b: LatticePolytope
) -> LatticePolytope:
    if a.dim != b.dim:
        raise DimensionError(
            f"cannot envelope polytopes of dimension {a.dim} and {b.dim}"
        )
    return LatticePolytope.from_points(
        list(a.vertices) + list(b.vertices), dim=a.dim
    )


def top_face(
    vertices: Sequence[Vertex], axes: Sequence[int] | None = None
) -> list[Vertex]:
    """
    The vertices maximising the sum of the coordinates in `axes` (all
    coordinates by default).
    """

    def _height(vertex: Vertex) -> Coordinate:
        if axes is None:
            return sum(vertex)
        return sum(vertex[axis] for axis in axes)

    best = max(_height(vertex) for vertex in vertices)
    return [vertex for vertex in vertices if _height(vertex) == best]


def action_candidates(
    poset: Poset,
    blocks: Sequence[Sequence[Vertex]],
    *,
    top: Callable[[Sequence[Vertex]], Sequence[Vertex]] = top_face,
) -> list[tuple[Vertex, ...]]:
    """
    Candidate extreme points of the action of `poset` on `blocks`, one tuple
    of per-block points per candidate.

    For every up-set of the poset, blocks outside the up-set sit at the
    origin, blocks minimal in the up-set range over all their vertices and
    blocks above another member of the up-set are pinned to their top face.
    """
    if len(blocks) != poset.n:
        raise ArityError(
            f"poset of size {poset.n} takes {poset.n} arguments, "
            f"got {len(blocks)}"
        )

    origins = [(0,) * len(block[0]) for block in blocks]
    tops = [list(top(block)) for block in blocks]

    candidates: list[tuple[Vertex, ...]] = []
    for mask in up_set_masks(poset):
        choices: list[Sequence[Vertex]] = []
        for i, block in enumerate(blocks):
            if not mask >> i & 1:
                choices.append([origins[i]])
            elif any(
                mask >> j & 1 and poset.lt(j, i) for j in range(poset.n)
            ):
                choices.append(tops[i])
            else:
                choices.append(block)
        candidates.extend(itertools.product(*choices))
    return candidates


def act_on_polytopes(
    poset: Poset,
    polytopes: Sequence[LatticePolytope],
    *,
    shared: bool = False,
) -> LatticePolytope:
    """
    The action of `poset` on `polytopes`.

    By default polytope `i` lives in its own block of coordinates and the
    result has dimension equal to the sum of the input dimensions.  With
    `shared` set, all inputs live in one space and the blocks of each
    candidate are summed before taking the hull.
    """
    if len(polytopes) != poset.n:
        raise ArityError(
            f"poset of size {poset.n} takes {poset.n} arguments, "
            f"got {len(polytopes)}"
        )

    candidates = action_candidates(
        poset, [polytope.vertices for polytope in polytopes]
    )

    if shared:
        dims = {polytope.dim for polytope in polytopes}
        if len(dims) > 1:
            raise DimensionError(
                f"shared action needs equal dimensions, got {sorted(dims)}"
            )
        dim = dims.pop() if dims else 0
        points = [
            tuple(sum(values) for values in zip(*parts))
            if parts
            else (0,) * dim
            for parts in candidates
        ]
    else:
        dim = sum(polytope.dim for polytope in polytopes)
        points = [
            tuple(value for part in parts for value in part)
            for parts in candidates
        ]

    logger.debug(
        "action of %d point poset produced %d candidates in dimension %d",
        poset.n,
        len(points),
        dim,
    )
    return LatticePolytope.from_points(points, dim=dim)


def unit_segment() -> LatticePolytope:
    return LatticePolytope(dim=1, vertices=((0,), (1,)))


def sampled_volume(poset: Poset, *, samples: int, seed: int) -> float:
    """
    Monte Carlo estimate of the volume of the order polytope of `poset`.
    """
    rng = np.random.default_rng(seed)
    relations = [
        (i, j)
        for i in range(poset.n)
        for j in range(poset.n)
        if poset.lt(i, j)
    ]
    hits = 0
    remaining = samples
    while remaining > 0:
        size = min(remaining, 1 << 18)
        points = rng.uniform(0.0, 1.0, size=(size, poset.n))
        inside = np.ones(size, dtype=bool)
        for i, j in relations:
            inside &= points[:, i] <= points[:, j]
        hits += int(np.count_nonzero(inside))
        remaining -= size
    return hits / samples


def triangulation_volume(poset: Poset) -> Fraction:
    return Fraction(len(triangulate(poset)), math.factorial(poset.n))
