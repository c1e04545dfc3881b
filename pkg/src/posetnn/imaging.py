"""
Filters as image transforms: shrink an image by repeated pooling, blow it
back up by nearest neighbour and compare with the original.
"""
import dataclasses
import logging
import math
import pathlib
from typing import Optional

import numpy as np
import numpy.typing as npt
from PIL import Image, UnidentifiedImageError
from scipy.ndimage import gaussian_filter

from posetnn.errors import FormatError, ShapeError
from posetnn.filters import PoolingFilter, pool2d

logger = logging.getLogger(__name__)

SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_SIGMA = 1.5
# Gives the usual 11x11 window for sigma 1.5.
SSIM_TRUNCATE = 3.5
PSNR_CAP = 99.0
DATA_RANGE = 2.0
DEFAULT_ITERATIONS = 3

Array = npt.NDArray[np.float64]


def read_image(path: pathlib.Path) -> npt.NDArray[np.uint8]:
    """
    Reads a binary PGM (P5) or PPM (P6) file into an `H x W` or `H x W x 3`
    array.
    """
    try:
        with Image.open(path) as image:
            if image.format != "PPM":
                raise FormatError(
                    f"{path}: expected a PGM or PPM file, got {image.format}"
                )
            if image.mode == "L":
                return np.asarray(image, dtype=np.uint8)
            if image.mode == "RGB":
                return np.asarray(image, dtype=np.uint8)
            raise FormatError(f"{path}: unsupported image mode {image.mode}")
    except (UnidentifiedImageError, OSError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_image(path: pathlib.Path, signed: Array) -> None:
    """
    Writes a signed image back out as PGM or PPM, chosen by channel count.
    """
    pixels = from_signed(signed)
    Image.fromarray(pixels).save(path, format="PPM")


def to_signed(pixels: npt.NDArray[np.uint8]) -> Array:
    return pixels.astype(np.float64) / 127.5 - 1.0


def from_signed(signed: Array) -> npt.NDArray[np.uint8]:
    return np.clip(np.rint((signed + 1.0) * 127.5), 0, 255).astype(np.uint8)


def _as_tensor(signed: Array) -> Array:
    if signed.ndim == 2:
        return signed[np.newaxis, np.newaxis, :, :]
    if signed.ndim == 3:
        return signed.transpose(2, 0, 1)[np.newaxis, :, :, :]
    raise ShapeError(
        f"expected an H x W or H x W x C image, got {signed.shape}"
    )


def _from_tensor(tensor: Array, channels: Optional[int]) -> Array:
    if channels is None:
        return tensor[0, 0]
    return tensor[0].transpose(1, 2, 0)


def _channels(signed: Array) -> Optional[int]:
    return None if signed.ndim == 2 else signed.shape[2]


def renormalize(tensor: Array) -> Array:
    """
    Rescales each channel affinely onto `[-1, 1]`.  Constant channels map to
    zero.
    """
    low = tensor.min(axis=(2, 3), keepdims=True)
    high = tensor.max(axis=(2, 3), keepdims=True)
    span = high - low
    safe = np.where(span > 0, span, 1)
    scaled = np.where(span > 0, (tensor - low) / safe, 0.5)
    return scaled * 2.0 - 1.0


def downsample(
    signed: Array, pooling: PoolingFilter, iterations: int = DEFAULT_ITERATIONS
) -> Array:
    tensor = _as_tensor(signed)
    for _ in range(iterations):
        tensor, _ = pool2d(pooling, tensor)
        tensor = renormalize(tensor)
    return _from_tensor(tensor, _channels(signed))


def nearest_downsample(
    signed: Array, iterations: int = DEFAULT_ITERATIONS
) -> Array:
    """
    Keeps the top left pixel of every 2x2 window.
    """
    tensor = _as_tensor(signed)
    for _ in range(iterations):
        tensor = tensor[:, :, ::2, ::2]
    return _from_tensor(tensor, _channels(signed))


def upsample_nearest(
    small: Array, shape: tuple[int, ...], factor: int
) -> Array:
    """
    Sends pixel `(i, j)` of an image of `shape` to
    `small[i // factor, j // factor]`, undoing a downsampling by `factor`.
    """
    rows = np.arange(shape[0]) // factor
    cols = np.arange(shape[1]) // factor
    if rows[-1] >= small.shape[0] or cols[-1] >= small.shape[1]:
        raise ShapeError(
            f"{small.shape[:2]} pixels cannot cover {shape[:2]} "
            f"at stride {factor}"
        )
    return small[rows][:, cols]


def ssim(a: Array, b: Array, *, data_range: float = DATA_RANGE) -> float:
    """
    Mean structural similarity over a Gaussian window, averaged over
    channels.
    """
    if a.shape != b.shape:
        raise ShapeError(f"cannot compare shapes {a.shape} and {b.shape}")
    if a.ndim == 3:
        return float(
            np.mean(
                [
                    ssim(a[:, :, c], b[:, :, c], data_range=data_range)
                    for c in range(a.shape[2])
                ]
            )
        )

    def _blur(image: Array) -> Array:
        return gaussian_filter(
            image, sigma=SSIM_SIGMA, truncate=SSIM_TRUNCATE, mode="reflect"
        )

    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2

    mu_a = _blur(a)
    mu_b = _blur(b)
    var_a = _blur(a * a) - mu_a * mu_a
    var_b = _blur(b * b) - mu_b * mu_b
    cov = _blur(a * b) - mu_a * mu_b

    numerator = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    denominator = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(numerator / denominator))


def psnr(a: Array, b: Array, *, data_range: float = DATA_RANGE) -> float:
    if a.shape != b.shape:
        raise ShapeError(f"cannot compare shapes {a.shape} and {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0:
        return PSNR_CAP
    return min(10.0 * math.log10(data_range**2 / mse), PSNR_CAP)


@dataclasses.dataclass(frozen=True)
class PipelineMetrics:
    name: str
    ssim: float
    psnr: float
    reconstruction: Array = dataclasses.field(repr=False, compare=False)


def _score(
    name: str, original: Array, small: Array, iterations: int
) -> PipelineMetrics:
    reconstruction = upsample_nearest(small, original.shape, 2**iterations)
    return PipelineMetrics(
        name=name,
        ssim=ssim(original, reconstruction),
        psnr=psnr(original, reconstruction),
        reconstruction=reconstruction,
    )


def image_pipeline(
    signed: Array,
    pooling: PoolingFilter,
    iterations: int = DEFAULT_ITERATIONS,
    *,
    name: str = "filter",
) -> PipelineMetrics:
    small = downsample(signed, pooling, iterations)
    logger.debug("downsampled %s to %s", signed.shape, small.shape)
    return _score(name, signed, small, iterations)


def compare_filters(
    signed: Array,
    first: PoolingFilter,
    second: PoolingFilter,
    iterations: int = DEFAULT_ITERATIONS,
    *,
    names: tuple[str, str] = ("A", "B"),
) -> list[PipelineMetrics]:
    """
    Scores two filters and the nearest neighbour baseline on one image.
    """
    return [
        image_pipeline(signed, first, iterations, name=names[0]),
        image_pipeline(signed, second, iterations, name=names[1]),
        _score(
            "nearest",
            signed,
            nearest_downsample(signed, iterations),
            iterations,
        ),
    ]
