import io

import numpy as np
import pytest
from PIL import Image

import posetnn.main
from posetnn.poset import enumerate_posets, parse_poset

N_POSET = "4; 0<2, 1<2, 1<3"


@pytest.fixture
def n_poset():
    return parse_poset(N_POSET)


@pytest.fixture
def posets4():
    return enumerate_posets(4)


@pytest.fixture
def uniform():
    """
    Random floats drawn uniformly from `[-3, 3)`.
    """
    rng = np.random.default_rng(0)

    def _uniform(*shape):
        return rng.uniform(-3.0, 3.0, size=shape)

    return _uniform


@pytest.fixture
def run_cli():
    def _run_cli(*argv):
        stdout = io.StringIO()
        stderr = io.StringIO()
        code = posetnn.main.dispatch(
            list(argv), stdout=stdout, stderr=stderr
        )
        return code, stdout.getvalue(), stderr.getvalue()

    return _run_cli


@pytest.fixture
def gray_image(tmp_path):
    path = tmp_path / "gray.pgm"
    y, x = np.mgrid[0:40, 0:48]
    pixels = ((x * 5 + y * 3) % 256).astype(np.uint8)
    Image.fromarray(pixels).save(path, format="PPM")
    return path


@pytest.fixture
def color_image(tmp_path):
    path = tmp_path / "color.ppm"
    y, x = np.mgrid[0:33, 0:35]
    pixels = np.stack(
        [(x * 7) % 256, (y * 7) % 256, ((x + y) * 3) % 256], axis=2
    ).astype(np.uint8)
    Image.fromarray(pixels).save(path, format="PPM")
    return path
