import math
from fractions import Fraction

import numpy as np
import pytest

from posetnn.errors import ArityError, FilterError, ShapeError
from posetnn.filters import (
    DEFAULT_STEP,
    IndexMap,
    PoolingFilter,
    PosetProvenance,
    backward,
    filter_from_poset,
    forward,
    forward_batch,
    gradcheck,
    lattice_histogram,
    lattice_points,
    pool2d,
    pool2d_backward,
    random_filter,
    random_filters,
)
from posetnn.poset import antichain, chain, point
from posetnn.tropical import eval_tropical, tr_of_poset


def test_poset_filter_terms(n_poset):
    pooling = filter_from_poset(n_poset)
    assert pooling.m == 4
    assert pooling.terms == (
        (0.0, 0.0, 0.0, 0.0),
        (0.0, 0.0, 0.0, 1.0),
        (0.0, 0.0, 1.0, 0.0),
        (0.0, 0.0, 1.0, 1.0),
        (1.0, 0.0, 1.0, 0.0),
        (0.0, 1.0, 1.0, 1.0),
        (1.0, 0.0, 1.0, 1.0),
        (1.0, 1.0, 1.0, 1.0),
    )
    assert pooling.provenance == PosetProvenance(
        poset=n_poset, index_map=IndexMap.row_major()
    )


def test_antichain_filter():
    assert len(filter_from_poset(antichain(4))) == 16


def test_chain_filter_orientation():
    pooling = filter_from_poset(chain(4), IndexMap(positions=(2, 3, 1, 0)))
    assert pooling.terms == (
        (0.0, 0.0, 0.0, 0.0),
        (1.0, 0.0, 0.0, 0.0),
        (1.0, 1.0, 0.0, 0.0),
        (1.0, 1.0, 0.0, 1.0),
        (1.0, 1.0, 1.0, 1.0),
    )


def test_index_map():
    assert IndexMap.reversed(4).positions == (3, 2, 1, 0)
    with pytest.raises(FilterError):
        IndexMap(positions=(0, 0, 1, 2))
    with pytest.raises(ArityError):
        filter_from_poset(chain(4), IndexMap(positions=(0, 1)))


def test_filter_invariants():
    pooling = PoolingFilter.from_terms([(1, 0), (0, 1), (1, 0)])
    assert pooling.terms == ((0.0, 0.0), (0.0, 1.0), (1.0, 0.0))
    with pytest.raises(FilterError):
        PoolingFilter(m=1, terms=((1.0,), (0.0,)))
    with pytest.raises(FilterError):
        PoolingFilter(m=2, terms=((0.0,),))
    with pytest.raises(FilterError):
        PoolingFilter.from_terms([])


def test_forward_ties(n_poset):
    window = [-1, 0, 1.9, 2]
    for poset in [n_poset, antichain(4)]:
        pooling = filter_from_poset(poset)
        value, index = forward(pooling, window)
        assert value == pytest.approx(3.9)
        assert pooling.terms[index] == (0.0, 0.0, 1.0, 1.0)


def test_forward_matches_polynomial(posets4, uniform):
    windows = uniform(1000, 4)
    assert len(posets4) == 16
    for poset in posets4:
        pooling = filter_from_poset(poset)
        f = tr_of_poset(poset)
        for window in windows:
            assert forward(pooling, window)[0] == eval_tropical(
                f, list(window)
            )


def test_forward_matches_polynomial_through_index_map(posets4, uniform):
    index_map = IndexMap(positions=(2, 3, 1, 0))
    for poset in posets4:
        pooling = filter_from_poset(poset, index_map)
        f = tr_of_poset(poset)
        for window in uniform(100, 4):
            x = [window[p] for p in index_map.positions]
            assert forward(pooling, window)[0] == eval_tropical(f, x)


def test_forward_is_rounded_once():
    window = [0.1, 0.2, 0.3, 0.0]
    value, _ = forward(filter_from_poset(antichain(4)), window)
    assert value == float(sum(Fraction(w) for w in window))


def test_forward_zero_window(n_poset):
    value, index = forward(filter_from_poset(n_poset), [0, 0, 0, 0])
    assert value == 0
    assert index == 0


def test_backward(n_poset):
    pooling = filter_from_poset(n_poset)
    assert list(backward(pooling, [-1, 0, 1.9, 2], 2.0)) == [0, 0, 2, 2]
    assert list(backward(pooling, [-1, -1, -1, -1])) == [0, 0, 0, 0]


def test_pool2d():
    pooling = filter_from_poset(antichain(4))
    output, cache = pool2d(pooling, [[[[1, 2], [3, 4]]]])
    assert output.shape == (1, 1, 1, 1)
    assert output[0, 0, 0, 0] == 10
    assert cache.input_shape == (1, 1, 2, 2)


def test_pool2d_window_order(n_poset):
    pooling = filter_from_poset(n_poset)
    output, cache = pool2d(pooling, [[[[1, -5], [-5, 1]]]])
    assert output[0, 0, 0, 0] == 1
    assert pooling.terms[cache.indices[0, 0, 0, 0]] == (0.0, 0.0, 0.0, 1.0)


def test_pool2d_chain_of_ones():
    output, _ = pool2d(filter_from_poset(chain(4)), np.ones((2, 3, 4, 4)))
    assert output.shape == (2, 3, 2, 2)
    assert np.all(output == 4)


def test_pool2d_odd_sizes():
    pooling = filter_from_poset(antichain(4))
    output, _ = pool2d(pooling, np.ones((1, 1, 3, 3)))
    assert output[0, 0].tolist() == [[4, 2], [2, 1]]


def test_pool2d_shapes():
    with pytest.raises(ShapeError):
        pool2d(filter_from_poset(antichain(4)), np.ones((2, 2)))
    with pytest.raises(ShapeError):
        pool2d(filter_from_poset(antichain(3)), np.ones((1, 1, 2, 2)))


def test_pool2d_backward():
    pooling = filter_from_poset(antichain(4))
    tensor = np.array([[[[1, -2, 5], [3, 4, -1], [2, 2, 2]]]], float)
    output, cache = pool2d(pooling, tensor)
    grad = pool2d_backward(pooling, cache, np.ones_like(output))
    assert grad.shape == tensor.shape
    assert grad[0, 0].tolist() == [[1, 0, 1], [1, 1, 0], [1, 1, 1]]


def test_pool2d_backward_scales_upstream():
    pooling = filter_from_poset(chain(4))
    output, cache = pool2d(pooling, np.ones((1, 1, 2, 2)))
    grad = pool2d_backward(pooling, cache, np.full(output.shape, 3.0))
    assert grad[0, 0].tolist() == [[3, 3], [3, 3]]


def test_pool2d_relu():
    pooling = filter_from_poset(chain(4), IndexMap.reversed())
    tensor = np.array([[[[2, -1], [-1, -1]]]], float)

    plain, _ = pool2d(pooling, tensor)
    assert plain[0, 0, 0, 0] == 2

    output, cache = pool2d(pooling, tensor, prefilter_relu=True)
    assert output[0, 0, 0, 0] == 2
    grad = pool2d_backward(pooling, cache, np.ones_like(output))
    assert grad[0, 0].tolist() == [[1, 0], [0, 0]]


def test_pool2d_backward_shape():
    pooling = filter_from_poset(chain(4))
    _, cache = pool2d(pooling, np.ones((1, 1, 2, 2)))
    with pytest.raises(ShapeError):
        pool2d_backward(pooling, cache, np.ones((1, 1, 2, 2)))


def test_gradcheck(n_poset):
    rng = np.random.default_rng(1)
    windows = rng.uniform(-3, 3, (1000, 4))
    report = gradcheck(filter_from_poset(n_poset), windows)
    assert report.passed
    assert report.checked + report.skipped == 1000
    assert report.checked > 900


def test_gradcheck_every_poset_filter(posets4, uniform):
    windows = uniform(10_000, 4)
    for poset in posets4:
        report = gradcheck(filter_from_poset(poset), windows)
        assert report.passed
        assert report.checked + report.skipped == 10_000
        assert report.checked > 9_500


def test_gradcheck_random_filter():
    rng = np.random.default_rng(2)
    windows = rng.uniform(-3, 3, (500, 4))
    report = gradcheck(random_filter(4, 7, 3), windows)
    assert report.passed


def test_gradcheck_skips_ties():
    report = gradcheck(filter_from_poset(antichain(4)), np.zeros((3, 4)))
    assert report.checked == 0
    assert report.skipped == 3
    assert report.passed


def test_random_filter():
    pooling = random_filter(4, 7, 0)
    assert pooling == random_filter(4, 7, 0)
    assert pooling != random_filter(4, 7, 1)
    assert len(pooling) == 8
    assert pooling.terms[0] == (0.0, 0.0, 0.0, 0.0)
    assert all(0 <= value < 1 for term in pooling.terms for value in term)


def test_random_filters():
    filters = random_filters(3, 4, 7, 10)
    assert filters[1] == random_filter(4, 7, 11)


def test_random_filter_needs_terms():
    with pytest.raises(FilterError):
        random_filter(4, 0, 0)


def test_poset_filters_are_monotone(posets4, uniform):
    lows = uniform(1000, 4)
    highs = lows + np.abs(uniform(1000, 4))
    for poset in posets4:
        pooling = filter_from_poset(poset)
        high_values, _ = forward_batch(pooling, highs)
        low_values, _ = forward_batch(pooling, lows)
        assert (high_values >= low_values).all()


def test_filters_are_convex(posets4, uniform):
    firsts, seconds = uniform(1000, 4), uniform(1000, 4)
    for poset in posets4:
        pooling = filter_from_poset(poset)
        middle, _ = forward_batch(pooling, (firsts + seconds) / 2)
        ends = (
            forward_batch(pooling, firsts)[0]
            + forward_batch(pooling, seconds)[0]
        ) / 2
        assert (middle <= ends + 1e-12).all()


def test_filters_bounded_below(posets4, uniform):
    for poset in posets4:
        pooling = filter_from_poset(poset)
        for window in uniform(1000, 4):
            bound = max(0.0, math.fsum(window))
            assert forward(pooling, window)[0] >= bound


def test_lattice_ball_properties(posets4):
    points = lattice_points(DEFAULT_STEP)
    assert (np.square(points).sum(axis=1) <= 1 + 1e-12).all()
    assert len(points) > 10**6
    filters = [filter_from_poset(poset) for poset in posets4]
    widest = filter_from_poset(antichain(4))
    for start in range(0, len(points), 100_000):
        chunk = points[start : start + 100_000]
        bound = np.maximum(0, chunk.sum(axis=1)) - 1e-12
        upper, _ = forward_batch(widest, chunk)
        for pooling in filters:
            values, _ = forward_batch(pooling, chunk)
            assert (values >= bound).all()
            assert (values <= upper + 1e-12).all()

            raised, _ = forward_batch(pooling, np.maximum(chunk, 0))
            assert (raised >= values).all()

            middle, _ = forward_batch(pooling, (chunk + chunk[::-1]) / 2)
            ends = (values + values[::-1]) / 2
            assert (middle <= ends + 1e-12).all()


def test_lattice_points():
    points = lattice_points(Fraction(1))
    assert points.shape == (9, 4)
    assert (np.abs(points).sum(axis=1) <= 1).all()
    assert len(lattice_points(Fraction(1, 2))) == 89


def test_lattice_step():
    with pytest.raises(FilterError):
        lattice_points(Fraction(2, 5))
    with pytest.raises(FilterError):
        lattice_points(Fraction(0))


def test_lattice_histogram(posets4):
    filters = [filter_from_poset(poset) for poset in posets4]
    histograms = lattice_histogram(filters, Fraction(1, 4), bins=10)
    total = len(lattice_points(Fraction(1, 4)))
    for histogram in histograms:
        assert histogram.total == total
        assert len(histogram.edges) == 11
        assert histogram.counts.sum() == histogram.positive
        # The origin is never positive.
        assert histogram.positive < total


def test_antichain_dominates(posets4):
    filters = [filter_from_poset(poset) for poset in posets4]
    widest = filter_from_poset(antichain(4))
    histograms = lattice_histogram(filters + [widest], Fraction(1, 4))
    assert all(h.positive <= histograms[-1].positive for h in histograms)


def test_lattice_histogram_std():
    chain_hist, antichain_hist = lattice_histogram(
        [filter_from_poset(chain(4)), filter_from_poset(antichain(4))],
        Fraction(1, 4),
    )
    assert chain_hist.std > 0
    assert chain_hist.std != antichain_hist.std


def test_lattice_histogram_window():
    with pytest.raises(ShapeError):
        lattice_histogram([filter_from_poset(point())])
