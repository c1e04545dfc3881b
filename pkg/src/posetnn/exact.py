"""
Exact arithmetic on floats.

A finite float is a dyadic rational, so multiplying a batch of them by a
large enough power of two turns every value into an integer.  Integer sums,
products and maxima are exact, and dividing by the scale at the end rounds
each result once.  Two computations of the same rational value therefore
give the same float, however differently their operations are ordered.
"""
from typing import Any

import numpy as np
import numpy.typing as npt

Array = npt.NDArray[np.float64]
Scaled = npt.NDArray[np.object_]


def is_finite(*arrays: npt.ArrayLike) -> bool:
    return all(
        bool(np.isfinite(np.asarray(array, dtype=np.float64)).all())
        for array in arrays
    )


def common_scale(*arrays: npt.ArrayLike) -> int:
    """
    The least power of two turning every finite value of `arrays` into an
    integer.
    """
    scale = 1
    for array in arrays:
        values = np.asarray(array, dtype=np.float64)
        for value in values[np.isfinite(values)].tolist():
            scale = max(scale, value.as_integer_ratio()[1])
    return scale


def _scale_value(value: Any, scale: int) -> int:
    numerator, denominator = float(value).as_integer_ratio()
    return numerator * (scale // denominator)


def _unscale_value(value: Any, scale: int) -> float:
    # Integer true division rounds correctly.
    return int(value) / scale


_scale_values = np.frompyfunc(_scale_value, 2, 1)
_unscale_values = np.frompyfunc(_unscale_value, 2, 1)


def to_scaled(array: npt.ArrayLike, scale: int) -> Scaled:
    values = np.asarray(array, dtype=np.float64)
    return np.asarray(_scale_values(values, scale), dtype=object)


def from_scaled(values: Scaled, scale: int) -> Array:
    return np.asarray(_unscale_values(values, scale), dtype=np.float64)


def exact_matmul(a: npt.ArrayLike, b: npt.ArrayLike) -> Array:
    """
    `a @ b` with every entry rounded once from its exact value.  Infinite or
    missing values fall back to ordinary float arithmetic.
    """
    left = np.asarray(a, dtype=np.float64)
    right = np.asarray(b, dtype=np.float64)
    if not is_finite(left, right):
        return np.asarray(left @ right, dtype=np.float64)
    left_scale, right_scale = common_scale(left), common_scale(right)
    product = to_scaled(left, left_scale) @ to_scaled(right, right_scale)
    return from_scaled(product, left_scale * right_scale)
