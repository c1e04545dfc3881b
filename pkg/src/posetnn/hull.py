"""
Exact extreme-point selection for small point sets.

Each point is tested with a phase one simplex over the rationals: it is
removed iff it is a convex combination of the points still standing.
"""
import logging
from fractions import Fraction
from typing import Sequence, Union

from posetnn.errors import DimensionError, SizeError

logger = logging.getLogger(__name__)

MAX_HULL_DIM = 12
MAX_HULL_POINTS = 5000

Rational = Union[int, Fraction]
Point = tuple[Rational, ...]


def _pivot(tableau: list[list[Fraction]], row: int, col: int) -> None:
    pivot = tableau[row][col]
    tableau[row] = [value / pivot for value in tableau[row]]
    for i, other in enumerate(tableau):
        if i == row or other[col] == 0:
            continue
        factor = other[col]
        tableau[i] = [
            value - factor * pivot_value
            for value, pivot_value in zip(other, tableau[row])
        ]


def is_convex_combination(
    target: Sequence[Rational], points: Sequence[Sequence[Rational]]
) -> bool:
    """
    Decides exactly whether `target` lies in the convex hull of `points`.
    """
    if not points:
        return False

    dim = len(target)
    m = len(points)
    rows = dim + 1

    constraints: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for i in range(dim):
        constraints.append([Fraction(point[i]) for point in points])
        rhs.append(Fraction(target[i]))
    constraints.append([Fraction(1)] * m)
    rhs.append(Fraction(1))

    for i in range(rows):
        if rhs[i] < 0:
            constraints[i] = [-value for value in constraints[i]]
            rhs[i] = -rhs[i]

    # Columns: the m weights, then one artificial variable per row, then the
    # right hand side.  The last row holds the reduced costs of the phase one
    # objective, the sum of the artificial variables.
    tableau = [
        constraints[i]
        + [Fraction(int(k == i)) for k in range(rows)]
        + [rhs[i]]
        for i in range(rows)
    ]
    objective = [
        -sum((constraints[i][j] for i in range(rows)), Fraction(0))
        for j in range(m)
    ]
    objective += [Fraction(0)] * rows
    objective.append(-sum(rhs, Fraction(0)))
    tableau.append(objective)

    basis = [m + i for i in range(rows)]
    width = m + rows

    while True:
        # Bland's rule: lowest index entering and leaving variables.
        entering = next(
            (j for j in range(width) if tableau[rows][j] < 0), None
        )
        if entering is None:
            break

        leaving = None
        best_ratio = None
        for i in range(rows):
            coefficient = tableau[i][entering]
            if coefficient <= 0:
                continue
            ratio = tableau[i][width] / coefficient
            if (
                best_ratio is None
                or ratio < best_ratio
                or (
                    ratio == best_ratio
                    and leaving is not None
                    and basis[i] < basis[leaving]
                )
            ):
                best_ratio = ratio
                leaving = i
        assert leaving is not None, "phase one objective is bounded"

        _pivot(tableau, leaving, entering)
        basis[leaving] = entering

    return tableau[rows][width] == 0


def _strict_extremes(points: Sequence[Point]) -> set[int]:
    """
    Indices of points that are the unique minimum or maximum of some
    coordinate, and so certainly extreme.
    """
    found: set[int] = set()
    if not points:
        return found
    for axis in range(len(points[0])):
        values = [point[axis] for point in points]
        for extreme in (min(values), max(values)):
            hits = [i for i, value in enumerate(values) if value == extreme]
            if len(hits) == 1:
                found.add(hits[0])
    return found


def hull_vertices(points: Sequence[Sequence[Rational]]) -> list[Point]:
    """
    The extreme points of the convex hull of `points`, deduplicated and in
    lexicographic order.
    """
    unique = sorted({tuple(point) for point in points})
    if not unique:
        return []

    dim = len(unique[0])
    for point in unique:
        if len(point) != dim:
            raise DimensionError(
                f"mixed dimensions {dim} and {len(point)} in hull input"
            )

    if len(unique) > MAX_HULL_POINTS:
        raise SizeError(
            f"hull supports at most {MAX_HULL_POINTS} points, "
            f"got {len(unique)}"
        )

    # Coordinates that never vary carry no information.
    axes = [
        axis
        for axis in range(dim)
        if len({point[axis] for point in unique}) > 1
    ]
    if len(axes) > MAX_HULL_DIM:
        raise SizeError(
            f"hull supports at most {MAX_HULL_DIM} varying coordinates, "
            f"got {len(axes)}"
        )
    reduced = [tuple(point[axis] for axis in axes) for point in unique]

    # Distinct 0/1 vectors are vertices of the cube, hence all extreme.
    if all(value in (0, 1) for point in reduced for value in point):
        return unique

    certain = _strict_extremes(reduced)
    alive = list(range(len(reduced)))
    for index in range(len(reduced)):
        if index in certain:
            continue
        others = [reduced[i] for i in alive if i != index]
        if is_convex_combination(reduced[index], others):
            alive.remove(index)

    logger.debug(
        "kept %d of %d candidate points in dimension %d",
        len(alive),
        len(unique),
        len(axes),
    )
    return [unique[i] for i in alive]
