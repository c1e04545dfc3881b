import dataclasses
import functools
import logging
from typing import Iterable, Iterator, Optional, Sequence

from posetnn import lexer, parser
from posetnn.errors import (
    ArityError,
    CycleError,
    InvalidPosetError,
    PointIndexError,
    SizeError,
)

logger = logging.getLogger(__name__)

MAX_CANONICAL_SIZE = 10
MAX_ENUMERATE_SIZE = 6


@dataclasses.dataclass(frozen=True)
class Poset:
    """
    A finite partial order on the points `0..n-1`, stored as its full
    reflexive-transitive relation matrix.  `leq[i][j]` is true iff `i <= j`.

    Labels are display names only and do not take part in comparisons.
    """

    leq: tuple[tuple[bool, ...], ...]
    labels: Optional[tuple[str, ...]] = dataclasses.field(
        default=None, compare=False
    )

    def __post_init__(self) -> None:
        n = len(self.leq)
        for row in self.leq:
            if len(row) != n:
                raise InvalidPosetError("relation matrix is not square")

        for i in range(n):
            if not self.leq[i][i]:
                raise InvalidPosetError(f"relation is not reflexive at {i}")

        for i in range(n):
            for j in range(i + 1, n):
                if self.leq[i][j] and self.leq[j][i]:
                    raise CycleError(f"points {i} and {j} form a cycle")

        for i in range(n):
            for j in range(n):
                if not self.leq[i][j]:
                    continue
                for k in range(n):
                    if self.leq[j][k] and not self.leq[i][k]:
                        raise InvalidPosetError(
                            f"relation is not transitive at {i}, {j}, {k}"
                        )

        if self.labels is not None and len(self.labels) != n:
            raise InvalidPosetError(
                f"expected {n} labels, got {len(self.labels)}"
            )

    @classmethod
    def from_relations(
        cls,
        n: int,
        relations: Iterable[tuple[int, int]],
        *,
        labels: Optional[Sequence[str]] = None,
    ) -> "Poset":
        """
        Builds the poset generated by `relations`, a collection of
        `(lower, upper)` pairs, by taking the reflexive-transitive closure.
        """
        if n < 0:
            raise SizeError(f"poset size must be non-negative, got {n}")

        matrix = [[i == j for j in range(n)] for i in range(n)]
        for lower, upper in relations:
            for index in (lower, upper):
                if not 0 <= index < n:
                    raise PointIndexError(
                        f"point {index} out of range for poset of size {n}"
                    )
            matrix[lower][upper] = True

        # Floyd-Warshall closure.
        for k in range(n):
            for i in range(n):
                if not matrix[i][k]:
                    continue
                for j in range(n):
                    if matrix[k][j]:
                        matrix[i][j] = True

        return cls(
            leq=tuple(tuple(row) for row in matrix),
            labels=tuple(labels) if labels is not None else None,
        )

    @property
    def n(self) -> int:
        return len(self.leq)

    def le(self, i: int, j: int) -> bool:
        return self.leq[i][j]

    def lt(self, i: int, j: int) -> bool:
        return i != j and self.leq[i][j]

    def comparable(self, i: int, j: int) -> bool:
        return self.leq[i][j] or self.leq[j][i]

    def label(self, i: int) -> str:
        if self.labels is None:
            return str(i)
        return self.labels[i]

    def bits(self) -> tuple[bool, ...]:
        """
        The relation matrix flattened in row-major order.
        """
        return tuple(bit for row in self.leq for bit in row)

    def __len__(self) -> int:
        return self.n


@dataclasses.dataclass(frozen=True)
class LinearExtension:
    """
    A total order compatible with a poset.  `perm[k]` is the `k`-th smallest
    point, so `perm[0]` is the bottom and `perm[-1]` the top.
    """

    perm: tuple[int, ...]

    def __post_init__(self) -> None:
        assert sorted(self.perm) == list(range(len(self.perm)))

    def position(self, point: int) -> int:
        return self.perm.index(point)

    def positions(self) -> tuple[int, ...]:
        result = [0] * len(self.perm)
        for k, point in enumerate(self.perm):
            result[point] = k
        return tuple(result)

    def __len__(self) -> int:
        return len(self.perm)


def parse_poset(text: str) -> Poset:
    literal = parser.parse(lexer.tokenize(text))
    n = literal.size.value

    for relation in literal.relations:
        for index in (relation.lower, relation.upper):
            if index.value >= n:
                raise PointIndexError(
                    f"point {index.value} at line {index.start.lineno + 1}, "
                    f"column {index.start.column + 1} is out of range for "
                    f"poset of size {n}"
                )

    return Poset.from_relations(
        n,
        [
            (relation.lower.value, relation.upper.value)
            for relation in literal.relations
        ],
    )


def point() -> Poset:
    return Poset.from_relations(1, [])


def chain(n: int) -> Poset:
    return Poset.from_relations(n, [(i, i + 1) for i in range(n - 1)])


def antichain(n: int) -> Poset:
    return Poset.from_relations(n, [])


def relabel(poset: Poset, perm: Sequence[int]) -> Poset:
    """
    Moves point `i` of `poset` to point `perm[i]` of the result.
    """
    n = poset.n
    if sorted(perm) != list(range(n)):
        raise ArityError(f"{list(perm)!r} is not a permutation of {n} points")

    matrix = [[False] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            matrix[perm[i]][perm[j]] = poset.leq[i][j]

    labels = None
    if poset.labels is not None:
        moved = [""] * n
        for i in range(n):
            moved[perm[i]] = poset.labels[i]
        labels = tuple(moved)

    return Poset(leq=tuple(tuple(row) for row in matrix), labels=labels)


def covers(poset: Poset) -> list[tuple[int, int]]:
    """
    The Hasse diagram of `poset` as a sorted list of `(lower, upper)` pairs.
    """
    n = poset.n
    result = []
    for i in range(n):
        for j in range(n):
            if not poset.lt(i, j):
                continue
            if any(poset.lt(i, k) and poset.lt(k, j) for k in range(n)):
                continue
            result.append((i, j))
    return result


def format_poset(poset: Poset) -> str:
    relations = ", ".join(f"{i}<{j}" for i, j in covers(poset))
    if not relations:
        return f"{poset.n};"
    return f"{poset.n}; {relations}"


def minimal_points(poset: Poset) -> list[int]:
    return [
        j
        for j in range(poset.n)
        if not any(poset.lt(i, j) for i in range(poset.n))
    ]


def maximal_points(poset: Poset) -> list[int]:
    return [
        i
        for i in range(poset.n)
        if not any(poset.lt(i, j) for j in range(poset.n))
    ]


def up_set_masks(poset: Poset) -> list[int]:
    """
    Every up-set of `poset` as a bitmask, bit `i` set iff point `i` is a
    member.  Sorted ascending.
    """
    n = poset.n
    above = [
        sum(1 << j for j in range(n) if poset.lt(i, j)) for i in range(n)
    ]

    # Visit points top down so that membership of everything above a point is
    # already decided when the point itself is considered.
    order = list(reversed(next(_iter_linear_extensions(poset))))

    masks: list[int] = []

    def _visit(k: int, mask: int) -> None:
        if k == n:
            masks.append(mask)
            return
        i = order[k]
        _visit(k + 1, mask)
        if above[i] & mask == above[i]:
            _visit(k + 1, mask | (1 << i))

    _visit(0, 0)
    masks.sort()
    return masks


def up_sets(poset: Poset) -> list[frozenset[int]]:
    return [
        frozenset(i for i in range(poset.n) if mask >> i & 1)
        for mask in up_set_masks(poset)
    ]


def down_sets(poset: Poset) -> list[frozenset[int]]:
    everything = frozenset(range(poset.n))
    return sorted(
        (everything - up_set for up_set in up_sets(poset)),
        key=lambda down_set: sum(1 << i for i in down_set),
    )


def _iter_linear_extensions(poset: Poset) -> Iterator[tuple[int, ...]]:
    n = poset.n
    below = [
        sum(1 << i for i in range(n) if poset.lt(i, j)) for j in range(n)
    ]
    perm: list[int] = []

    def _extend(placed: int) -> Iterator[tuple[int, ...]]:
        if len(perm) == n:
            yield tuple(perm)
            return
        for j in range(n):
            if placed >> j & 1:
                continue
            if below[j] & placed != below[j]:
                continue
            perm.append(j)
            yield from _extend(placed | (1 << j))
            perm.pop()

    yield from _extend(0)


def linear_extensions(poset: Poset) -> list[LinearExtension]:
    """
    All linear extensions of `poset` in lexicographic order of `perm`.
    """
    return [
        LinearExtension(perm=perm) for perm in _iter_linear_extensions(poset)
    ]


def count_linear_extensions(poset: Poset) -> int:
    n = poset.n
    below = [
        sum(1 << i for i in range(n) if poset.lt(i, j)) for j in range(n)
    ]
    everything = (1 << n) - 1

    @functools.lru_cache(maxsize=None)
    def _count(placed: int) -> int:
        if placed == everything:
            return 1
        total = 0
        for j in range(n):
            if placed >> j & 1:
                continue
            if below[j] & placed == below[j]:
                total += _count(placed | (1 << j))
        return total

    return _count(0)


def lex_sum(outer: Poset, inner: Sequence[Poset]) -> Poset:
    """
    Substitutes `inner[i]` for point `i` of `outer`.  The points of
    `inner[i]` occupy a consecutive block of the result, blocks appearing in
    input order.
    """
    if len(inner) != outer.n:
        raise ArityError(
            f"poset of size {outer.n} takes {outer.n} arguments, "
            f"got {len(inner)}"
        )

    block = []
    offset = []
    for i, poset in enumerate(inner):
        offset.append(len(block))
        block.extend([i] * poset.n)

    total = len(block)
    matrix = []
    for a in range(total):
        row = []
        for b in range(total):
            if block[a] == block[b]:
                q = inner[block[a]]
                row.append(q.leq[a - offset[block[a]]][b - offset[block[b]]])
            else:
                row.append(outer.lt(block[a], block[b]))
        matrix.append(tuple(row))

    return Poset(leq=tuple(matrix))


def block_offsets(inner: Sequence[Poset]) -> list[int]:
    offsets = []
    total = 0
    for poset in inner:
        offsets.append(total)
        total += poset.n
    return offsets


def _are_twins(poset: Poset, a: int, b: int) -> bool:
    for x in range(poset.n):
        if x in (a, b):
            continue
        if poset.leq[a][x] != poset.leq[b][x]:
            return False
        if poset.leq[x][a] != poset.leq[x][b]:
            return False
    return True


def canonical_form(poset: Poset) -> Poset:
    """
    Relabels `poset` so that its row-major relation bit string is the least
    over all relabelings.  Two posets are isomorphic iff their canonical
    forms are equal.

    The minimum is always reached by listing points from the top down, so
    only orders that pick a maximal remaining point at each step are
    searched.  Rows compare lexicographically, so at each step only the
    candidates with the least row survive, and interchangeable points are
    tried once.
    """
    n = poset.n
    if n > MAX_CANONICAL_SIZE:
        raise SizeError(
            f"canonical form supports at most {MAX_CANONICAL_SIZE} points, "
            f"got {n}"
        )

    best_rows: Optional[list[tuple[bool, ...]]] = None
    best_order: list[int] = []
    order: list[int] = []
    rows: list[tuple[bool, ...]] = []

    def _search(remaining: frozenset[int]) -> None:
        nonlocal best_rows, best_order

        if best_rows is not None and rows > best_rows[: len(rows)]:
            return

        if not remaining:
            if best_rows is None or rows < best_rows:
                best_rows = list(rows)
                best_order = list(order)
            return

        candidates = [
            c
            for c in sorted(remaining)
            if not any(poset.lt(c, r) for r in remaining)
        ]
        prefixes = {
            c: tuple(poset.leq[c][placed] for placed in order)
            for c in candidates
        }
        least = min(prefixes.values())

        tried: list[int] = []
        for c in candidates:
            if prefixes[c] != least:
                continue
            if any(_are_twins(poset, c, other) for other in tried):
                continue
            tried.append(c)

            order.append(c)
            rows.append(least)
            _search(remaining - {c})
            rows.pop()
            order.pop()

    _search(frozenset(range(n)))

    perm = [0] * n
    for k, old in enumerate(best_order):
        perm[old] = k
    return relabel(poset, perm)


def is_isomorphic(a: Poset, b: Poset) -> bool:
    if a.n != b.n:
        return False
    return canonical_form(a) == canonical_form(b)


@functools.lru_cache(maxsize=None)
def _enumerate_posets(n: int) -> tuple[Poset, ...]:
    if n == 0:
        return (Poset(leq=()),)

    seen: dict[tuple[bool, ...], Poset] = {}
    for smaller in _enumerate_posets(n - 1):
        # Every poset is a smaller one with a new maximal point on top of
        # some down-set.
        for down_set in down_sets(smaller):
            relations = [(i, n - 1) for i in down_set]
            for i in range(n - 1):
                for j in range(n - 1):
                    if smaller.lt(i, j):
                        relations.append((i, j))
            candidate = canonical_form(Poset.from_relations(n, relations))
            seen.setdefault(candidate.bits(), candidate)

    logger.debug("generated %d posets on %d points", len(seen), n)
    return tuple(seen[bits] for bits in sorted(seen))


def enumerate_posets(n: int) -> list[Poset]:
    """
    One canonical representative of each isomorphism class of posets on `n`
    points, ordered by relation bit string.
    """
    if not 0 <= n <= MAX_ENUMERATE_SIZE:
        raise SizeError(
            f"can only enumerate posets with 0 to {MAX_ENUMERATE_SIZE} "
            f"points, got {n}"
        )
    return list(_enumerate_posets(n))
