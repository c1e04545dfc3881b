"""
Pooling filters built from posets.

A filter is a finite set of coefficient vectors over a window.  Its forward
pass is the largest dot product between the window and a coefficient
vector, and its backward pass routes the upstream gradient through the
winning vector.

Terms are kept in tie-breaking order: smallest support first, then
lexicographically smallest, so that the first maximising term is always the
selected one.
"""
import dataclasses
import logging
import math
from fractions import Fraction
from typing import Iterator, Optional, Sequence, Union

import numpy as np
import numpy.typing as npt

from posetnn.errors import ArityError, FilterError, ShapeError
from posetnn.exact import exact_matmul
from posetnn.poset import Poset, up_set_masks

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 4
DEFAULT_STEP = Fraction(1, 25)

Array = npt.NDArray[np.float64]
Term = tuple[float, ...]


@dataclasses.dataclass(frozen=True)
class IndexMap:
    """
    Sends poset point `i` to row-major window position `positions[i]`.  For
    a 2x2 window the positions are `(0,0), (0,1), (1,0), (1,1)`.
    """

    positions: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.positions) != list(range(len(self.positions))):
            raise FilterError(f"{self.positions!r} is not a bijection")

    @classmethod
    def row_major(cls, m: int = DEFAULT_WINDOW) -> "IndexMap":
        return cls(positions=tuple(range(m)))

    @classmethod
    def reversed(cls, m: int = DEFAULT_WINDOW) -> "IndexMap":
        return cls(positions=tuple(reversed(range(m))))

    def __len__(self) -> int:
        return len(self.positions)


@dataclasses.dataclass(frozen=True)
class PosetProvenance:
    poset: Poset
    index_map: IndexMap


@dataclasses.dataclass(frozen=True)
class RandomProvenance:
    seed: int
    count: int
    distribution: str = "uniform[0,1)"


Provenance = Union[PosetProvenance, RandomProvenance, None]


def _tie_order(term: Term) -> tuple[int, Term]:
    return (sum(1 for value in term if value != 0), term)


@dataclasses.dataclass(frozen=True)
class PoolingFilter:
    m: int
    terms: tuple[Term, ...]
    provenance: Provenance = dataclasses.field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not self.terms:
            raise FilterError("a filter needs at least one term")
        for term in self.terms:
            if len(term) != self.m:
                raise FilterError(
                    f"term {term!r} does not match window size {self.m}"
                )
        if self.terms[0] != (0.0,) * self.m:
            raise FilterError("the zero term must come first")
        if list(self.terms) != sorted(set(self.terms), key=_tie_order):
            raise FilterError("terms must be distinct and in tie order")

    @classmethod
    def from_terms(
        cls,
        terms: Sequence[Sequence[float]],
        *,
        provenance: Provenance = None,
    ) -> "PoolingFilter":
        if not terms:
            raise FilterError("a filter needs at least one term")
        m = len(terms[0])
        unique = {tuple(float(v) for v in term) for term in terms}
        unique.add((0.0,) * m)
        return cls(
            m=m,
            terms=tuple(sorted(unique, key=_tie_order)),
            provenance=provenance,
        )

    @property
    def matrix(self) -> Array:
        return np.array(self.terms, dtype=np.float64).reshape(
            len(self.terms), self.m
        )

    def __len__(self) -> int:
        return len(self.terms)


def filter_from_poset(
    poset: Poset, index_map: Optional[IndexMap] = None
) -> PoolingFilter:
    """
    The poset filter of `poset`: one 0/1 term per up-set, placed into the
    window through `index_map`.
    """
    if index_map is None:
        index_map = IndexMap.row_major(poset.n)
    if len(index_map) != poset.n:
        raise ArityError(
            f"index map of size {len(index_map)} for poset of size {poset.n}"
        )

    terms = []
    for mask in up_set_masks(poset):
        term = [0.0] * poset.n
        for i in range(poset.n):
            if mask >> i & 1:
                term[index_map.positions[i]] = 1.0
        terms.append(term)
    return PoolingFilter.from_terms(
        terms, provenance=PosetProvenance(poset=poset, index_map=index_map)
    )


def random_filter(m: int, k: int, seed: int) -> PoolingFilter:
    """
    The zero term plus `k` terms with coefficients drawn independently and
    uniformly from `[0, 1)`.
    """
    if k < 1:
        raise FilterError(f"random filters need at least one term, got {k}")
    rng = np.random.default_rng(seed)
    coefficients = rng.uniform(0.0, 1.0, size=(k, m))
    return PoolingFilter.from_terms(
        [tuple(row) for row in coefficients],
        provenance=RandomProvenance(seed=seed, count=k),
    )


def random_filters(
    count: int, m: int, k: int, seed: int
) -> list[PoolingFilter]:
    return [random_filter(m, k, seed + i) for i in range(count)]


def forward(
    pooling: PoolingFilter, window: npt.ArrayLike
) -> tuple[float, int]:
    """
    The value of `pooling` at one window and the index of the winning term.
    Each term's dot product is exact and rounded once, matching
    `eval_tropical` on the poset polynomial.  `forward_batch` trades this
    for plain float arithmetic.
    """
    values = exact_matmul(pooling.matrix, np.asarray(window, np.float64))
    index = int(np.argmax(values))
    return float(values[index]), index


def backward(
    pooling: PoolingFilter, window: npt.ArrayLike, upstream: float = 1.0
) -> Array:
    _, index = forward(pooling, window)
    return upstream * pooling.matrix[index]


def forward_batch(
    pooling: PoolingFilter, windows: npt.ArrayLike
) -> tuple[Array, npt.NDArray[np.intp]]:
    values = np.asarray(windows, dtype=np.float64) @ pooling.matrix.T
    indices = np.argmax(values, axis=-1)
    return np.take_along_axis(values, indices[..., None], -1)[..., 0], indices


@dataclasses.dataclass(frozen=True)
class PoolingCache:
    """
    What `pool2d` remembers for the backward pass.
    """

    indices: npt.NDArray[np.intp]
    input_shape: tuple[int, ...]
    passed: Optional[npt.NDArray[np.bool_]]


def _windows(tensor: Array) -> Array:
    b, c, h, w = tensor.shape
    padded = np.zeros((b, c, h + h % 2, w + w % 2), dtype=np.float64)
    padded[:, :, :h, :w] = tensor
    hh, ww = padded.shape[2] // 2, padded.shape[3] // 2
    blocks = padded.reshape(b, c, hh, 2, ww, 2).transpose(0, 1, 2, 4, 3, 5)
    return blocks.reshape(b, c, hh, ww, 4)


def pool2d(
    pooling: PoolingFilter,
    tensor: npt.ArrayLike,
    *,
    prefilter_relu: bool = False,
) -> tuple[Array, PoolingCache]:
    """
    Applies `pooling` to every non-overlapping 2x2 window of a
    `B x C x H x W` tensor.  Odd heights and widths are padded with zeros at
    the bottom and right.
    """
    array = np.asarray(tensor, dtype=np.float64)
    if array.ndim != 4:
        raise ShapeError(f"expected a B x C x H x W tensor, got {array.shape}")
    if pooling.m != 4:
        raise ShapeError(f"2x2 pooling needs a window of 4, got {pooling.m}")

    windows = _windows(array)
    passed = None
    if prefilter_relu:
        passed = windows > 0
        windows = np.where(passed, windows, 0.0)

    output, indices = forward_batch(pooling, windows)
    return output, PoolingCache(
        indices=indices, input_shape=array.shape, passed=passed
    )


def pool2d_backward(
    pooling: PoolingFilter, cache: PoolingCache, upstream: npt.ArrayLike
) -> Array:
    grad_out = np.asarray(upstream, dtype=np.float64)
    if grad_out.shape != cache.indices.shape:
        raise ShapeError(
            f"upstream gradient of shape {grad_out.shape} for output of "
            f"shape {cache.indices.shape}"
        )

    grad_windows = grad_out[..., None] * pooling.matrix[cache.indices]
    if cache.passed is not None:
        grad_windows = grad_windows * cache.passed

    b, c, hh, ww, _ = grad_windows.shape
    grad = (
        grad_windows.reshape(b, c, hh, ww, 2, 2)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(b, c, hh * 2, ww * 2)
    )
    _, _, h, w = cache.input_shape
    return grad[:, :, :h, :w]


@dataclasses.dataclass(frozen=True)
class GradcheckReport:
    checked: int
    skipped: int
    worst_error: float
    passed: bool


def _term_gap(pooling: PoolingFilter, windows: Array) -> Array:
    values = windows @ pooling.matrix.T
    if values.shape[1] < 2:
        return np.full(values.shape[0], np.inf)
    ordered = np.sort(values, axis=1)
    return ordered[:, -1] - ordered[:, -2]


def gradcheck(
    pooling: PoolingFilter,
    windows: npt.ArrayLike,
    *,
    step: float = 1e-4,
    rtol: float = 1e-4,
    margin: Optional[float] = None,
) -> GradcheckReport:
    """
    Compares `backward` against central differences of `forward`.  Windows
    whose two best terms are closer than `margin` are skipped, since a
    perturbation of size `step` may change the winning term there.
    """
    batch = np.asarray(windows, dtype=np.float64)
    matrix = pooling.matrix
    if margin is None:
        margin = max(1e-6, 4 * step * float(np.abs(matrix).sum(axis=1).max()))

    keep = _term_gap(pooling, batch) >= margin
    checked = batch[keep]

    _, indices = forward_batch(pooling, checked)
    analytic = matrix[indices]

    numeric = np.zeros_like(checked)
    for axis in range(pooling.m):
        offset = np.zeros(pooling.m)
        offset[axis] = step
        plus, _ = forward_batch(pooling, checked + offset)
        minus, _ = forward_batch(pooling, checked - offset)
        numeric[:, axis] = (plus - minus) / (2 * step)

    error = np.abs(numeric - analytic) / np.maximum(1.0, np.abs(analytic))
    worst = float(error.max()) if error.size else 0.0
    return GradcheckReport(
        checked=int(keep.sum()),
        skipped=int((~keep).sum()),
        worst_error=worst,
        passed=worst <= rtol,
    )


# === Lattice experiment =======================================================


def _lattice_scale(step: Fraction) -> int:
    step = Fraction(step)
    if step <= 0 or step.numerator != 1:
        raise FilterError(
            f"step must be 1/k for a positive integer k, got {step}"
        )
    return step.denominator


def _lattice_chunks(scale: int) -> Iterator[Array]:
    """
    Points of the 4-ball of radius 1 with coordinates in `1/scale` steps,
    grouped by their first two coordinates.
    """
    axis = np.arange(-scale, scale + 1)
    c, d = np.meshgrid(axis, axis, indexing="ij")
    tail = np.stack([c.ravel(), d.ravel()], axis=1)
    tail_norm = (tail**2).sum(axis=1)
    limit = scale * scale
    for a in axis:
        for b in axis:
            budget = limit - a * a - b * b
            if budget < 0:
                continue
            rows = tail[tail_norm <= budget]
            head = np.broadcast_to([a, b], (len(rows), 2))
            yield np.concatenate([head, rows], axis=1) / scale


def lattice_points(step: Fraction = DEFAULT_STEP) -> Array:
    return np.concatenate(list(_lattice_chunks(_lattice_scale(step))))


@dataclasses.dataclass(frozen=True)
class LatticeHistogram:
    edges: Array
    counts: npt.NDArray[np.int64]
    std: float
    positive: int
    total: int


def lattice_histogram(
    filters: Sequence[PoolingFilter],
    step: Fraction = DEFAULT_STEP,
    *,
    bins: int = 50,
) -> list[LatticeHistogram]:
    """
    Histograms of the positive outputs of each filter over the lattice
    points of the unit 4-ball, with the sample standard deviation of those
    outputs.
    """
    scale = _lattice_scale(step)
    for pooling in filters:
        if pooling.m != 4:
            raise ShapeError("the lattice experiment uses windows of 4")

    # Outputs are bounded by the longest term since points lie in the ball.
    radii = [
        max(float(np.linalg.norm(p.matrix, axis=1).max()), 1.0)
        for p in filters
    ]
    edges = [np.linspace(0.0, radius, bins + 1) for radius in radii]
    counts = [np.zeros(bins, dtype=np.int64) for _ in filters]
    sums = [0.0] * len(filters)
    squares = [0.0] * len(filters)
    positive = [0] * len(filters)
    total = 0

    for chunk in _lattice_chunks(scale):
        total += len(chunk)
        for i, pooling in enumerate(filters):
            values, _ = forward_batch(pooling, chunk)
            values = values[values > 0]
            counts[i] += np.histogram(values, bins=edges[i])[0]
            sums[i] += float(values.sum())
            squares[i] += float((values**2).sum())
            positive[i] += len(values)

    logger.debug(
        "evaluated %d filters on %d lattice points", len(filters), total
    )

    results = []
    for i in range(len(filters)):
        count = positive[i]
        if count > 1:
            mean = sums[i] / count
            variance = (squares[i] - count * mean * mean) / (count - 1)
            std = math.sqrt(max(variance, 0.0))
        else:
            std = 0.0
        results.append(
            LatticeHistogram(
                edges=edges[i],
                counts=counts[i],
                std=std,
                positive=count,
                total=total,
            )
        )
    return results
