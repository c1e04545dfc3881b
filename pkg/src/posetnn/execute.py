import dataclasses
import functools
import json
import logging
from fractions import Fraction
from typing import Sequence

import numpy as np
import numpy.typing as npt

from posetnn import cmd, filters, hull, imaging, nn, polytope, poset, tropical
from posetnn.errors import ArityError, FormatError, ShapeError
from posetnn.filters import LatticeHistogram, PoolingFilter
from posetnn.imaging import PipelineMetrics
from posetnn.poset import LinearExtension, Poset
from posetnn.polytope import Simplex

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class Report:
    """
    One named output of a command.  The name becomes the file stem when
    writing to a directory.
    """

    name: str
    value: object


@dataclasses.dataclass(frozen=True)
class PosetListing:
    posets: tuple[Poset, ...]


@dataclasses.dataclass(frozen=True)
class PosetSummary:
    poset: Poset
    extensions: tuple[LinearExtension, ...]
    up_sets: int
    canonical: Poset


@dataclasses.dataclass(frozen=True)
class Count:
    value: int


@dataclasses.dataclass(frozen=True)
class Triangulation:
    source: Poset
    simplices: tuple[Simplex, ...]


@dataclasses.dataclass(frozen=True)
class Points:
    points: tuple[tuple[Fraction, ...], ...]


@dataclasses.dataclass(frozen=True)
class Evaluation:
    inputs: tuple[float, ...]
    outputs: tuple[float, ...]
    combined: bool


@dataclasses.dataclass(frozen=True)
class Pieces:
    pieces: int
    bound: int
    grid_points: int


@dataclasses.dataclass(frozen=True, eq=False)
class Pooled:
    output: npt.NDArray[np.float64]
    indices: npt.NDArray[np.intp]


@dataclasses.dataclass(frozen=True)
class HistogramReport:
    label: str
    histogram: LatticeHistogram


@dataclasses.dataclass(frozen=True)
class HistogramSummary:
    labels: tuple[str, ...]
    histograms: tuple[LatticeHistogram, ...]


@dataclasses.dataclass(frozen=True)
class Comparison:
    rows: tuple[PipelineMetrics, ...]


def build_filter(source: cmd.FilterSource) -> PoolingFilter:
    if source.poset is not None:
        index_map = None
        if source.index_map is not None:
            index_map = filters.IndexMap(positions=source.index_map)
        return filters.filter_from_poset(
            poset.parse_poset(source.poset), index_map
        )

    assert source.random_terms is not None
    assert source.seed is not None, "random filters need a seed"
    return filters.random_filter(
        source.window, source.random_terms, source.seed
    )


def _read_json(path: object) -> object:
    try:
        with open(path, encoding="utf-8") as stream:  # type: ignore
            return json.load(stream)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


def _parse_rational(value: object) -> Fraction:
    if isinstance(value, (int, str)) and not isinstance(value, bool):
        try:
            return Fraction(value)
        except ValueError as exc:
            raise FormatError(f"{value!r} is not a rational") from exc
    raise FormatError(f"{value!r} is not a rational")


@functools.singledispatch
def execute(spec: cmd.CommandSpec) -> list[Report]:
    raise NotImplementedError(f"no handler for {type(spec).__name__}")


@execute.register(cmd.PosetListCommand)
def _execute_poset_list(spec: cmd.PosetListCommand) -> list[Report]:
    return [
        Report("posets", PosetListing(tuple(poset.enumerate_posets(spec.n))))
    ]


@execute.register(cmd.PosetShowCommand)
def _execute_poset_show(spec: cmd.PosetShowCommand) -> list[Report]:
    source = poset.parse_poset(spec.poset)
    summary = PosetSummary(
        poset=source,
        extensions=tuple(poset.linear_extensions(source)),
        up_sets=len(poset.up_set_masks(source)),
        canonical=poset.canonical_form(source),
    )
    return [Report("poset", summary)]


@execute.register(cmd.PosetCountCommand)
def _execute_poset_count(spec: cmd.PosetCountCommand) -> list[Report]:
    source = poset.parse_poset(spec.poset)
    return [Report("count", Count(poset.count_linear_extensions(source)))]


@execute.register(cmd.PosetComposeCommand)
def _execute_poset_compose(spec: cmd.PosetComposeCommand) -> list[Report]:
    outer = poset.parse_poset(spec.outer)
    inner = [poset.parse_poset(text) for text in spec.inner]
    return [Report("poset", poset.lex_sum(outer, inner))]


@execute.register(cmd.TropOfPosetCommand)
def _execute_trop_of_poset(spec: cmd.TropOfPosetCommand) -> list[Report]:
    source = poset.parse_poset(spec.poset)
    return [Report("polynomial", tropical.tr_of_poset(source))]


@execute.register(cmd.TropExpandCommand)
def _execute_trop_expand(spec: cmd.TropExpandCommand) -> list[Report]:
    source = poset.parse_poset(spec.poset)
    return [Report("presentation", tropical.expanded_presentation(source))]


@execute.register(cmd.TropActCommand)
def _execute_trop_act(spec: cmd.TropActCommand) -> list[Report]:
    outer = poset.parse_poset(spec.poset)

    nvars = spec.nvars
    if spec.shared_variables and nvars is None:
        nvars = max(
            (
                tropical.infer_nvars(tropical.polynomial_variables(text))
                for text in spec.polynomials
            ),
            default=0,
        )
    inputs = [
        tropical.parse_polynomial(text, nvars=nvars)
        for text in spec.polynomials
    ]
    result = tropical.act_on_tropical(
        outer, inputs, shared_variables=spec.shared_variables
    )
    return [Report("polynomial", result)]


@execute.register(cmd.TropRecoverCommand)
def _execute_trop_recover(spec: cmd.TropRecoverCommand) -> list[Report]:
    f = tropical.parse_polynomial(spec.polynomial, nvars=spec.nvars)
    return [Report("poset", tropical.poset_from_tropical(f))]


@execute.register(cmd.PolytopeVerticesCommand)
def _execute_polytope_vertices(
    spec: cmd.PolytopeVerticesCommand,
) -> list[Report]:
    source = poset.parse_poset(spec.poset)
    return [Report("polytope", polytope.order_polytope_vertices(source))]


@execute.register(cmd.PolytopeActCommand)
def _execute_polytope_act(spec: cmd.PolytopeActCommand) -> list[Report]:
    outer = poset.parse_poset(spec.poset)
    if spec.inner:
        inputs = [
            polytope.order_polytope_vertices(poset.parse_poset(text))
            for text in spec.inner
        ]
    else:
        inputs = [polytope.unit_segment()] * outer.n
    return [Report("polytope", polytope.act_on_polytopes(outer, inputs))]


@execute.register(cmd.PolytopeTriangulateCommand)
def _execute_polytope_triangulate(
    spec: cmd.PolytopeTriangulateCommand,
) -> list[Report]:
    source = poset.parse_poset(spec.poset)
    simplices = tuple(polytope.triangulate(source))
    return [Report("triangulation", Triangulation(source, simplices))]


@execute.register(cmd.PolytopeHullCommand)
def _execute_polytope_hull(spec: cmd.PolytopeHullCommand) -> list[Report]:
    data = _read_json(spec.points)
    if isinstance(data, dict):
        data = data.get("points", data.get("vertices"))
    if not isinstance(data, list) or not all(
        isinstance(point, list) for point in data
    ):
        raise FormatError(f"{spec.points}: expected a list of points")
    points = [tuple(_parse_rational(v) for v in point) for point in data]
    vertices = hull.hull_vertices(points)
    return [
        Report(
            "hull",
            Points(tuple(tuple(Fraction(v) for v in p) for p in vertices)),
        )
    ]


@execute.register(cmd.NnShowCommand)
def _execute_nn_show(spec: cmd.NnShowCommand) -> list[Report]:
    source = poset.parse_poset(spec.poset)
    return [Report("network", nn.poset_nn(source))]


@execute.register(cmd.NnEvalCommand)
def _execute_nn_eval(spec: cmd.NnEvalCommand) -> list[Report]:
    source = poset.parse_poset(spec.poset)
    net = nn.poset_nn(source)
    value = nn.eval_nn(net, list(spec.inputs), combine=spec.combine)
    outputs = (
        (float(value),)
        if np.ndim(value) == 0
        else tuple(float(v) for v in np.ravel(value))
    )
    return [
        Report(
            "evaluation",
            Evaluation(
                inputs=tuple(spec.inputs),
                outputs=outputs,
                combined=spec.combine,
            ),
        )
    ]


@execute.register(cmd.NnPiecesCommand)
def _execute_nn_pieces(spec: cmd.NnPiecesCommand) -> list[Report]:
    source = poset.parse_poset(spec.poset)
    grid = nn.GridSpec(low=spec.low, high=spec.high, steps=spec.steps)
    pieces = nn.count_affine_pieces_sampled(nn.poset_nn(source), grid)
    bound = len(polytope.order_polytope_vertices(source))
    return [
        Report(
            "pieces",
            Pieces(
                pieces=pieces, bound=bound, grid_points=spec.steps**source.n
            ),
        )
    ]


@execute.register(cmd.FilterEmitCommand)
def _execute_filter_emit(spec: cmd.FilterEmitCommand) -> list[Report]:
    return [Report("filter", build_filter(spec.source))]


@execute.register(cmd.FilterPoolCommand)
def _execute_filter_pool(spec: cmd.FilterPoolCommand) -> list[Report]:
    pooling = build_filter(spec.source)
    data = _read_json(spec.tensor)
    try:
        tensor = np.array(data, dtype=np.float64)
    except ValueError as exc:
        raise ShapeError(f"{spec.tensor}: ragged tensor") from exc
    output, cache = filters.pool2d(
        pooling, tensor, prefilter_relu=spec.prefilter_relu
    )
    return [Report("pooled", Pooled(output=output, indices=cache.indices))]


@execute.register(cmd.FilterGradcheckCommand)
def _execute_filter_gradcheck(
    spec: cmd.FilterGradcheckCommand,
) -> list[Report]:
    pooling = build_filter(spec.source)
    rng = np.random.default_rng(spec.seed)
    windows = rng.uniform(-3.0, 3.0, size=(spec.windows, pooling.m))
    report = filters.gradcheck(
        pooling, windows, step=spec.step, rtol=spec.rtol
    )
    return [Report("gradcheck", report)]


def _histogram_filters(
    spec: cmd.ExperimentHistogramCommand,
) -> tuple[list[str], list[PoolingFilter]]:
    labels: list[str] = []
    selected: list[PoolingFilter] = []
    for text in spec.posets:
        if text == "all4":
            sources: Sequence[Poset] = poset.enumerate_posets(4)
        else:
            sources = [poset.parse_poset(text)]
        for source in sources:
            if source.n != 4:
                raise ArityError(
                    f"lattice experiment needs 4 point posets, got {source.n}"
                )
            labels.append(poset.format_poset(source))
            selected.append(filters.filter_from_poset(source))

    if spec.random_filters:
        assert spec.seed is not None, "random filters need a seed"
        family = filters.random_filters(
            spec.random_filters, 4, spec.random_terms, spec.seed
        )
        for index, pooling in enumerate(family):
            labels.append(f"random {spec.seed + index}")
            selected.append(pooling)
    return labels, selected


@execute.register(cmd.ExperimentHistogramCommand)
def _execute_experiment_histogram(
    spec: cmd.ExperimentHistogramCommand,
) -> list[Report]:
    labels, selected = _histogram_filters(spec)
    histograms = filters.lattice_histogram(selected, spec.step, bins=spec.bins)

    reports = [
        Report(f"histogram-{index:02d}", HistogramReport(label, histogram))
        for index, (label, histogram) in enumerate(zip(labels, histograms))
    ]
    reports.append(
        Report("summary", HistogramSummary(tuple(labels), tuple(histograms)))
    )
    return reports


@execute.register(cmd.ExperimentImageCommand)
def _execute_experiment_image(
    spec: cmd.ExperimentImageCommand,
) -> list[Report]:
    signed = imaging.to_signed(imaging.read_image(spec.image))
    first = build_filter(spec.first)
    second = build_filter(spec.second)
    rows = imaging.compare_filters(signed, first, second, spec.iterations)

    if spec.save_dir is not None:
        spec.save_dir.mkdir(parents=True, exist_ok=True)
        suffix = ".pgm" if signed.ndim == 2 else ".ppm"
        for row in rows:
            imaging.write_image(
                spec.save_dir / f"{row.name}{suffix}", row.reconstruction
            )

    logger.info("compared %d rows on image %s", len(rows), spec.image)
    return [Report("comparison", Comparison(tuple(rows)))]
