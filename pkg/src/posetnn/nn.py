"""
Integer valued neural networks with ReLU_t activations.

A layer maps `x` to `max(x @ weights + bias, thresholds)`, coordinate by
coordinate.  A threshold of `NEG_INF` leaves its node linear.
"""
import dataclasses
import logging
from typing import Literal, Optional, Sequence, Union

import numpy as np
import numpy.typing as npt

from posetnn import exact
from posetnn.errors import (
    ArityError,
    DimensionError,
    NotLatticeError,
    SourceMissingError,
)
from posetnn.poset import Poset, lex_sum, linear_extensions
from posetnn.types import NEG_INF, Threshold

logger = logging.getLogger(__name__)

Array = npt.NDArray[np.float64]


@dataclasses.dataclass(frozen=True, eq=False)
class IvnnLayer:
    weights: npt.NDArray[np.int64]
    bias: Array
    thresholds: tuple[Threshold, ...]

    def __post_init__(self) -> None:
        if not np.issubdtype(self.weights.dtype, np.integer):
            raise NotLatticeError("layer weights must be integers")
        if self.weights.ndim != 2:
            raise DimensionError("layer weights must be a matrix")
        out_dim = self.weights.shape[1]
        if self.bias.shape != (out_dim,):
            raise DimensionError(
                f"bias of shape {self.bias.shape} for {out_dim} outputs"
            )
        if len(self.thresholds) != out_dim:
            raise DimensionError(
                f"{len(self.thresholds)} thresholds for {out_dim} outputs"
            )

    @classmethod
    def build(
        cls,
        weights: Sequence[Sequence[int]],
        thresholds: Sequence[Threshold],
        bias: Optional[Sequence[float]] = None,
    ) -> "IvnnLayer":
        matrix = np.array(weights, dtype=np.int64).reshape(
            len(weights), len(thresholds)
        )
        if bias is None:
            bias = [0.0] * len(thresholds)
        return cls(
            weights=matrix,
            bias=np.array(bias, dtype=np.float64),
            thresholds=tuple(
                t if t is NEG_INF else float(t) for t in thresholds
            ),
        )

    @property
    def in_dim(self) -> int:
        return int(self.weights.shape[0])

    @property
    def out_dim(self) -> int:
        return int(self.weights.shape[1])

    def _finite_mask(self) -> npt.NDArray[np.bool_]:
        return np.array([t is not NEG_INF for t in self.thresholds], bool)

    def _threshold_values(self) -> Array:
        return np.array(
            [-np.inf if t is NEG_INF else t for t in self.thresholds],
            dtype=np.float64,
        )

    def pre_activation(self, x: Array) -> Array:
        return x @ self.weights + self.bias

    def activate(self, z: Array) -> Array:
        finite = self._finite_mask()
        out = z.copy()
        out[..., finite] = np.maximum(
            z[..., finite], self._threshold_values()[finite]
        )
        return out

    def active(self, z: Array) -> npt.NDArray[np.bool_]:
        """
        Whether each node passes its input through.  Ties with the threshold
        count as inactive.
        """
        finite = self._finite_mask()
        result = np.ones(z.shape, dtype=bool)
        result[..., finite] = z[..., finite] > self._threshold_values()[finite]
        return result

    def __call__(self, x: Array) -> Array:
        return self.activate(self.pre_activation(x))

    def scaled_call(self, x: exact.Scaled, scale: int) -> exact.Scaled:
        """
        `__call__` on exact inputs held as integers over `scale`.
        """
        z = x @ self.weights.astype(object)
        z = z + exact.to_scaled(self.bias, scale)
        finite = self._finite_mask()
        if finite.any():
            z[..., finite] = np.maximum(
                z[..., finite],
                exact.to_scaled(self.finite_thresholds(), scale),
            )
        return z

    def finite_thresholds(self) -> Array:
        return self._threshold_values()[self._finite_mask()]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IvnnLayer):
            return NotImplemented
        return (
            np.array_equal(self.weights, other.weights)
            and np.array_equal(self.bias, other.bias)
            and self.thresholds == other.thresholds
        )

    def __hash__(self) -> int:
        return hash((self.weights.tobytes(), self.thresholds))


@dataclasses.dataclass(frozen=True)
class Ivnn:
    input_dim: int
    layers: tuple[IvnnLayer, ...]

    def __post_init__(self) -> None:
        dim = self.input_dim
        for depth, layer in enumerate(self.layers):
            if layer.in_dim != dim:
                raise DimensionError(
                    f"layer {depth} expects {layer.in_dim} inputs, "
                    f"previous layer gives {dim}"
                )
            dim = layer.out_dim

    @property
    def output_dim(self) -> int:
        if not self.layers:
            return self.input_dim
        return self.layers[-1].out_dim

    @property
    def depth(self) -> int:
        return len(self.layers)


@dataclasses.dataclass(frozen=True)
class PosetNN:
    """
    An inception bundle: the input is copied once per linear extension of
    the source poset, permuted into that extension's order and fed through
    a shared chain network.
    """

    source: Optional[Poset]
    perms: tuple[tuple[int, ...], ...]
    chain: Ivnn
    combine: bool = False

    def __post_init__(self) -> None:
        for perm in self.perms:
            if sorted(perm) != list(range(self.chain.input_dim)):
                raise DimensionError(f"{perm!r} is not a branch permutation")

    @property
    def input_dim(self) -> int:
        return self.chain.input_dim

    @property
    def branches(self) -> int:
        return len(self.perms)


def _identity(size: int) -> list[list[int]]:
    return [[int(i == j) for j in range(size)] for i in range(size)]


def _first_row_repeated(size: int) -> list[list[int]]:
    """
    The `size` by `size - 1` identity with its first row repeated, which
    adds the first two inputs and passes the rest through.
    """
    rows = [[int(j == 0) for j in range(size - 1)]]
    rows += _identity(size - 1)
    return rows


def chain_nn(n: int) -> Ivnn:
    """
    The network of the chain polynomial on `n` points, inputs ordered from
    the bottom of the chain to the top.  Layer `k` folds the running value
    into input `k` and clips it at zero.
    """
    if n < 1:
        raise ArityError(f"chain network needs at least one point, got {n}")

    layers = [IvnnLayer.build(_identity(n), [0.0] + [NEG_INF] * (n - 1))]
    for width in range(n, 1, -1):
        layers.append(
            IvnnLayer.build(
                _first_row_repeated(width), [0.0] + [NEG_INF] * (width - 2)
            )
        )
    return Ivnn(input_dim=n, layers=tuple(layers))


def poset_nn(poset: Poset, *, combine: bool = False) -> PosetNN:
    return PosetNN(
        source=poset,
        perms=tuple(ext.perm for ext in linear_extensions(poset)),
        chain=chain_nn(poset.n) if poset.n else Ivnn(input_dim=0, layers=()),
        combine=combine,
    )


def _as_batch(x: npt.ArrayLike, dim: int) -> tuple[Array, bool]:
    array = np.asarray(x, dtype=np.float64)
    single = array.ndim == 1
    if single:
        array = array[np.newaxis, :]
    if array.ndim != 2 or array.shape[1] != dim:
        raise ArityError(
            f"network takes {dim} inputs, got shape {np.shape(x)}"
        )
    return array, single


def _forward(net: Ivnn, batch: Array) -> Array:
    for layer in net.layers:
        batch = layer(batch)
    return batch


def _forward_exact(net: Ivnn, batch: Array) -> Array:
    """
    `_forward` with every layer computed exactly and the output rounded
    once, so that it agrees bit for bit with any other exact evaluation of
    the same function.
    """
    constants = [layer.bias for layer in net.layers] + [
        layer.finite_thresholds() for layer in net.layers
    ]
    if not exact.is_finite(batch, *constants):
        return _forward(net, batch)

    scale = exact.common_scale(batch, *constants)
    values = exact.to_scaled(batch, scale)
    for layer in net.layers:
        values = layer.scaled_call(values, scale)
    return exact.from_scaled(values, scale)


def _branch_values(
    net: PosetNN, batch: Array, *, rounded_once: bool = True
) -> Array:
    if not net.perms or net.input_dim == 0:
        return np.zeros((batch.shape[0], max(len(net.perms), 1)))
    forward = _forward_exact if rounded_once else _forward
    columns = [
        forward(net.chain, batch[:, list(perm)])[:, 0] for perm in net.perms
    ]
    return np.stack(columns, axis=1)


def eval_nn(
    net: Union[Ivnn, PosetNN],
    x: npt.ArrayLike,
    combine: Optional[bool] = None,
) -> Union[float, Array]:
    """
    Evaluates `net` at a single input vector or at each row of a batch.

    A `PosetNN` gives the vector of branch outputs, or their maximum when
    combining.  Outputs are exact values rounded once to the nearest float,
    which is also how `eval_tropical` rounds.
    """
    batch, single = _as_batch(x, net.input_dim)

    if isinstance(net, PosetNN):
        result = _branch_values(net, batch)
        if net.combine if combine is None else combine:
            result = result.max(axis=1)
    else:
        result = _forward_exact(net, batch)
        if result.shape[1] == 1:
            result = result[:, 0]

    if single:
        value = result[0]
        if np.ndim(value) == 0:
            return float(value)
        return value
    return result


def gradient_nn(net: Ivnn, x: npt.ArrayLike) -> Array:
    """
    A subgradient of a single output network at each input row, by back
    propagation through the activation masks.
    """
    batch, single = _as_batch(x, net.input_dim)
    if net.output_dim != 1:
        raise ArityError("gradients need a single output")

    masks = []
    for layer in net.layers:
        z = layer.pre_activation(batch)
        masks.append(layer.active(z))
        batch = layer.activate(z)

    grad = np.ones((batch.shape[0], 1))
    for layer, mask in zip(reversed(net.layers), reversed(masks)):
        grad = (grad * mask) @ layer.weights.T

    if single:
        return grad[0]
    return grad


def _pad(net: Ivnn, depth: int) -> Ivnn:
    padding = [
        IvnnLayer.build(_identity(net.output_dim), [NEG_INF] * net.output_dim)
    ] * (depth - net.depth)
    return Ivnn(input_dim=net.input_dim, layers=net.layers + tuple(padding))


def _block_diagonal(a: IvnnLayer, b: IvnnLayer) -> IvnnLayer:
    weights = np.zeros((a.in_dim + b.in_dim, a.out_dim + b.out_dim), np.int64)
    weights[: a.in_dim, : a.out_dim] = a.weights
    weights[a.in_dim :, a.out_dim :] = b.weights
    return IvnnLayer(
        weights=weights,
        bias=np.concatenate([a.bias, b.bias]),
        thresholds=a.thresholds + b.thresholds,
    )


def parallel(m: Ivnn, n: Ivnn) -> Ivnn:
    """
    Runs `m` and `n` side by side on one input and concatenates their
    outputs.  The shallower network is padded at the end with linear
    identity layers.
    """
    if m.input_dim != n.input_dim:
        raise ArityError(
            f"networks take {m.input_dim} and {n.input_dim} inputs"
        )
    depth = max(m.depth, n.depth, 1)
    m, n = _pad(m, depth), _pad(n, depth)

    first_m, first_n = m.layers[0], n.layers[0]
    layers = [
        IvnnLayer(
            weights=np.concatenate([first_m.weights, first_n.weights], axis=1),
            bias=np.concatenate([first_m.bias, first_n.bias]),
            thresholds=first_m.thresholds + first_n.thresholds,
        )
    ]
    for a, b in zip(m.layers[1:], n.layers[1:]):
        layers.append(_block_diagonal(a, b))
    return Ivnn(input_dim=m.input_dim, layers=tuple(layers))


TropicalOp = Literal["product", "quotient", "sum", "sum-alt"]


def nn_tropical_op(mode: TropicalOp, m: Ivnn, n: Ivnn) -> Ivnn:
    """
    A network computing the tropical product (`m + n`), quotient (`m - n`)
    or sum (`max(m, n)`) of two single output networks.  `sum` folds the
    difference against the second network, `sum-alt` against the first.
    """
    if m.output_dim != 1 or n.output_dim != 1:
        raise ArityError("tropical operations need single output networks")

    both = parallel(m, n)
    tail: list[IvnnLayer]
    if mode == "product":
        tail = [IvnnLayer.build([[1], [1]], [NEG_INF])]
    elif mode == "quotient":
        tail = [IvnnLayer.build([[1], [-1]], [NEG_INF])]
    elif mode == "sum":
        tail = [
            IvnnLayer.build([[1, 0, 0], [-1, 1, -1]], [0.0, 0.0, 0.0]),
            IvnnLayer.build([[1], [1], [-1]], [NEG_INF]),
        ]
    elif mode == "sum-alt":
        tail = [
            IvnnLayer.build([[-1, 1, -1], [1, 0, 0]], [0.0, 0.0, 0.0]),
            IvnnLayer.build([[1], [1], [-1]], [NEG_INF]),
        ]
    else:
        raise ValueError(f"unknown tropical operation {mode!r}")

    return Ivnn(input_dim=both.input_dim, layers=both.layers + tuple(tail))


def act_on_nn(poset: Poset, nets: Sequence[PosetNN]) -> PosetNN:
    if len(nets) != poset.n:
        raise ArityError(
            f"poset of size {poset.n} takes {poset.n} arguments, "
            f"got {len(nets)}"
        )
    sources = []
    for index, net in enumerate(nets):
        if net.source is None:
            raise SourceMissingError(f"network {index} has no source poset")
        sources.append(net.source)
    combine = any(net.combine for net in nets)
    return poset_nn(lex_sum(poset, sources), combine=combine)


@dataclasses.dataclass(frozen=True)
class GridSpec:
    low: float = -2.0
    high: float = 2.0
    steps: int = 21

    def points(self, dim: int) -> Array:
        axis = np.linspace(self.low, self.high, self.steps)
        mesh = np.meshgrid(*([axis] * dim), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


def combined_gradients(net: PosetNN, x: npt.ArrayLike) -> Array:
    """
    The gradient of the winning branch at each input row.  The first branch
    in extension order wins ties.
    """
    batch, _ = _as_batch(x, net.input_dim)
    values = _branch_values(net, batch, rounded_once=False)
    winners = np.argmax(values, axis=1)

    grads = np.zeros_like(batch)
    for branch, perm in enumerate(net.perms):
        rows = winners == branch
        if not rows.any():
            continue
        branch_grad = gradient_nn(net.chain, batch[rows][:, list(perm)])
        placed = np.zeros_like(branch_grad)
        placed[:, list(perm)] = branch_grad
        grads[rows] = placed
    return grads


def count_affine_pieces_sampled(
    net: PosetNN, grid: GridSpec = GridSpec()
) -> int:
    """
    The number of distinct gradients of the combined network seen over a
    regular grid, a lower estimate of its number of linear regions.
    """
    points = grid.points(net.input_dim)
    grads = combined_gradients(net, points)
    pieces = len(np.unique(grads, axis=0))
    logger.debug(
        "found %d pieces over %d grid points", pieces, len(points)
    )
    return pieces


def _format_threshold(threshold: Threshold) -> str:
    if threshold is NEG_INF:
        return "-inf"
    return f"{threshold:g}"


def format_layer(layer: IvnnLayer) -> str:
    relu = ", ".join(_format_threshold(t) for t in layer.thresholds)
    rows = ", ".join(
        "[" + ", ".join(str(int(v)) for v in row) + "]"
        for row in layer.weights
    )
    text = f"ReLU_({relu}) [{rows}]"
    if np.any(layer.bias):
        text += " + [" + ", ".join(f"{b:g}" for b in layer.bias) + "]"
    return text


def format_network(
    net: Union[Ivnn, PosetNN], names: Optional[Sequence[str]] = None
) -> str:
    lines = []
    if isinstance(net, PosetNN):
        if names is None:
            names = [str(i) for i in range(net.input_dim)]
        lines.append(f"branches: {net.branches}")
        for perm in net.perms:
            lines.append("  (" + ", ".join(names[i] for i in perm) + ")")
        net = net.chain
    for depth, layer in enumerate(net.layers, start=1):
        lines.append(f"layer {depth}: {format_layer(layer)}")
    return "\n".join(lines)
