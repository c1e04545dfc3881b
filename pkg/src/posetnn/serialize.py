"""
Stable JSON, text and tabular renderings of everything a command can
report, and readers for the JSON schemas of the value types.

Floats are written with six significant digits in text mode and with full
precision in JSON.  Rationals are exact: integers stay integers and other
values become `"a/b"` strings.
"""
import functools
from fractions import Fraction
from typing import Any, Callable, Iterable, Optional, Sequence, TypeVar

import numpy as np
import pyarrow as pa

from posetnn import execute as ex
from posetnn.errors import Error, FormatError
from posetnn.filters import (
    GradcheckReport,
    IndexMap,
    LatticeHistogram,
    PoolingFilter,
    PosetProvenance,
    RandomProvenance,
)
from posetnn.nn import Ivnn, IvnnLayer, PosetNN, format_network
from posetnn.polytope import (
    Coordinate,
    LatticePolytope,
    Simplex,
    is_lattice_point,
)
from posetnn.poset import LinearExtension, Poset, covers, format_poset
from posetnn.tropical import (
    ExpandedPresentation,
    TropicalPolynomial,
    format_polynomial,
    format_presentation,
    variable_names,
)
from posetnn.types import NEG_INF, Coefficient, Threshold

Json = dict[str, "Json"] | list["Json"] | str | float | bool | None

T = TypeVar("T")


def _float(value: float) -> str:
    return f"{value:.6g}"


def _float_column(values: Iterable[float]) -> pa.Array:
    """
    A float column holding the values `_float` prints.
    """
    return pa.array([float(_float(v)) for v in values], pa.float64())


def _rational_to_json(value: Coefficient) -> Json:
    if value is NEG_INF:
        return "-inf"
    assert isinstance(value, Fraction)
    if value.denominator == 1:
        return value.numerator
    return str(value)


def _threshold_to_json(value: Threshold) -> Json:
    if value is NEG_INF:
        return "-inf"
    return float(value)  # type: ignore[arg-type]


def _vertex_text(vertex: Sequence[object]) -> str:
    return " ".join(str(v) for v in vertex)


# === JSON =====================================================================


@functools.singledispatch
def to_json(value: object) -> Json:
    raise FormatError(f"{type(value).__name__} has no JSON form")


@to_json.register(Poset)
def _poset_to_json(poset: Poset) -> Json:
    result: dict[str, Json] = {
        "n": poset.n,
        "covers": [[i, j] for i, j in covers(poset)],
    }
    if poset.labels is not None:
        result["labels"] = list(poset.labels)
    return result


@to_json.register(LinearExtension)
def _extension_to_json(extension: LinearExtension) -> Json:
    return list(extension.perm)


@to_json.register(LatticePolytope)
def _polytope_to_json(polytope: LatticePolytope) -> Json:
    return {
        "dim": polytope.dim,
        "vertices": [
            [_rational_to_json(Fraction(v)) for v in vertex]
            for vertex in polytope.vertices
        ],
    }


@to_json.register(Simplex)
def _simplex_to_json(simplex: Simplex) -> Json:
    return {
        "extension": list(simplex.extension.perm),
        "vertices": [list(vertex) for vertex in simplex.vertices],
    }


@to_json.register(TropicalPolynomial)
def _polynomial_to_json(f: TropicalPolynomial) -> Json:
    return {
        "nvars": f.nvars,
        "monomials": [
            {"exp": list(exp), "coef": _rational_to_json(coef)}
            for exp, coef in f.monomials
        ],
    }


@to_json.register(ExpandedPresentation)
def _presentation_to_json(presentation: ExpandedPresentation) -> Json:
    return {
        "source": to_json(presentation.source),
        "extensions": [list(ext.perm) for ext in presentation.extensions],
        "members": [to_json(member) for member in presentation.members],
        "total": to_json(presentation.total()),
    }


@to_json.register(IvnnLayer)
def _layer_to_json(layer: IvnnLayer) -> Json:
    return {
        "weights": [[int(v) for v in row] for row in layer.weights],
        "bias": [float(v) for v in layer.bias],
        "thresholds": [_threshold_to_json(t) for t in layer.thresholds],
    }


@to_json.register(Ivnn)
def _network_to_json(net: Ivnn) -> Json:
    return {
        "input_dim": net.input_dim,
        "layers": [to_json(layer) for layer in net.layers],
    }


@to_json.register(PosetNN)
def _poset_network_to_json(net: PosetNN) -> Json:
    return {
        "source": None if net.source is None else to_json(net.source),
        "perms": [list(perm) for perm in net.perms],
        "chain": to_json(net.chain),
        "combine": net.combine,
    }


@to_json.register(PoolingFilter)
def _filter_to_json(pooling: PoolingFilter) -> Json:
    provenance: Json = None
    if isinstance(pooling.provenance, PosetProvenance):
        provenance = {
            "kind": "poset",
            "poset": to_json(pooling.provenance.poset),
            "index_map": list(pooling.provenance.index_map.positions),
        }
    elif isinstance(pooling.provenance, RandomProvenance):
        provenance = {
            "kind": "random",
            "seed": pooling.provenance.seed,
            "count": pooling.provenance.count,
            "distribution": pooling.provenance.distribution,
        }
    return {
        "m": pooling.m,
        "terms": [list(term) for term in pooling.terms],
        "provenance": provenance,
    }


@to_json.register(GradcheckReport)
def _gradcheck_to_json(report: GradcheckReport) -> Json:
    return {
        "checked": report.checked,
        "skipped": report.skipped,
        "worst_error": report.worst_error,
        "passed": report.passed,
    }


@to_json.register(LatticeHistogram)
def _histogram_to_json(histogram: LatticeHistogram) -> Json:
    return {
        "edges": [float(v) for v in histogram.edges],
        "counts": [int(v) for v in histogram.counts],
        "std": histogram.std,
        "positive": histogram.positive,
        "total": histogram.total,
    }


@to_json.register(ex.PosetListing)
def _listing_to_json(listing: ex.PosetListing) -> Json:
    return [to_json(poset) for poset in listing.posets]


@to_json.register(ex.PosetSummary)
def _summary_to_json(summary: ex.PosetSummary) -> Json:
    return {
        "poset": to_json(summary.poset),
        "extensions": [list(ext.perm) for ext in summary.extensions],
        "up_sets": summary.up_sets,
        "canonical": to_json(summary.canonical),
    }


@to_json.register(ex.Count)
def _count_to_json(count: ex.Count) -> Json:
    return count.value


@to_json.register(ex.Triangulation)
def _triangulation_to_json(triangulation: ex.Triangulation) -> Json:
    return {
        "source": to_json(triangulation.source),
        "simplices": [to_json(s) for s in triangulation.simplices],
    }


@to_json.register(ex.Points)
def _points_to_json(points: ex.Points) -> Json:
    return {
        "points": [
            [_rational_to_json(v) for v in point] for point in points.points
        ]
    }


@to_json.register(ex.Evaluation)
def _evaluation_to_json(evaluation: ex.Evaluation) -> Json:
    return {
        "inputs": list(evaluation.inputs),
        "outputs": list(evaluation.outputs),
        "combined": evaluation.combined,
    }


@to_json.register(ex.Pieces)
def _pieces_to_json(pieces: ex.Pieces) -> Json:
    return {
        "pieces": pieces.pieces,
        "bound": pieces.bound,
        "grid_points": pieces.grid_points,
    }


@to_json.register(ex.Pooled)
def _pooled_to_json(pooled: ex.Pooled) -> Json:
    return {
        "output": pooled.output.tolist(),
        "indices": pooled.indices.tolist(),
    }


@to_json.register(ex.HistogramReport)
def _histogram_report_to_json(report: ex.HistogramReport) -> Json:
    result = _histogram_to_json(report.histogram)
    assert isinstance(result, dict)
    result["label"] = report.label
    return result


@to_json.register(ex.HistogramSummary)
def _histogram_summary_to_json(summary: ex.HistogramSummary) -> Json:
    return [
        {
            "label": label,
            "positive": histogram.positive,
            "total": histogram.total,
            "std": histogram.std,
        }
        for label, histogram in zip(summary.labels, summary.histograms)
    ]


@to_json.register(ex.Comparison)
def _comparison_to_json(comparison: ex.Comparison) -> Json:
    return [
        {"name": row.name, "ssim": row.ssim, "psnr": row.psnr}
        for row in comparison.rows
    ]


# === Text =====================================================================


@functools.singledispatch
def to_text(value: object) -> str:
    raise FormatError(f"{type(value).__name__} has no text form")


@to_text.register(Poset)
def _poset_to_text(poset: Poset) -> str:
    return format_poset(poset)


@to_text.register(LatticePolytope)
def _polytope_to_text(polytope: LatticePolytope) -> str:
    return "\n".join(_vertex_text(vertex) for vertex in polytope.vertices)


@to_text.register(TropicalPolynomial)
def _polynomial_to_text(f: TropicalPolynomial) -> str:
    return format_polynomial(f)


@to_text.register(ExpandedPresentation)
def _presentation_to_text(presentation: ExpandedPresentation) -> str:
    return "\n".join(
        [
            format_presentation(presentation),
            "= " + format_polynomial(presentation.total()),
        ]
    )


@to_text.register(Ivnn)
@to_text.register(PosetNN)
def _network_to_text(net: Ivnn | PosetNN) -> str:
    return format_network(net, variable_names(net.input_dim))


@to_text.register(PoolingFilter)
def _filter_to_text(pooling: PoolingFilter) -> str:
    return "\n".join(
        " ".join(_float(v) for v in term) for term in pooling.terms
    )


@to_text.register(GradcheckReport)
def _gradcheck_to_text(report: GradcheckReport) -> str:
    return "\n".join(
        [
            f"checked: {report.checked}",
            f"skipped: {report.skipped}",
            f"worst error: {_float(report.worst_error)}",
            f"passed: {'yes' if report.passed else 'no'}",
        ]
    )


@to_text.register(ex.PosetListing)
def _listing_to_text(listing: ex.PosetListing) -> str:
    return "\n".join(format_poset(poset) for poset in listing.posets)


@to_text.register(ex.PosetSummary)
def _summary_to_text(summary: ex.PosetSummary) -> str:
    poset = summary.poset
    lines = [
        f"poset: {format_poset(poset)}",
        f"linear extensions: {len(summary.extensions)}",
    ]
    for extension in summary.extensions:
        lines.append(
            "  " + " < ".join(poset.label(i) for i in extension.perm)
        )
    lines.append(f"up-sets: {summary.up_sets}")
    lines.append(f"canonical: {format_poset(summary.canonical)}")
    return "\n".join(lines)


@to_text.register(ex.Count)
def _count_to_text(count: ex.Count) -> str:
    return str(count.value)


@to_text.register(ex.Triangulation)
def _triangulation_to_text(triangulation: ex.Triangulation) -> str:
    lines = []
    for simplex in triangulation.simplices:
        order = " < ".join(str(i) for i in simplex.extension.perm)
        vertices = ", ".join(_vertex_text(v) for v in simplex.vertices)
        lines.append(f"{order}: {vertices}")
    return "\n".join(lines)


@to_text.register(ex.Points)
def _points_to_text(points: ex.Points) -> str:
    return "\n".join(_vertex_text(point) for point in points.points)


@to_text.register(ex.Evaluation)
def _evaluation_to_text(evaluation: ex.Evaluation) -> str:
    return " ".join(_float(v) for v in evaluation.outputs)


@to_text.register(ex.Pieces)
def _pieces_to_text(pieces: ex.Pieces) -> str:
    return "\n".join(
        [
            f"pieces: {pieces.pieces}",
            f"bound: {pieces.bound}",
            f"grid points: {pieces.grid_points}",
        ]
    )


@to_text.register(ex.Pooled)
def _pooled_to_text(pooled: ex.Pooled) -> str:
    lines = []
    batch, channels = pooled.output.shape[:2]
    for b in range(batch):
        for c in range(channels):
            lines.append(f"[{b}, {c}]")
            for row in pooled.output[b, c]:
                lines.append(" ".join(_float(v) for v in row))
    return "\n".join(lines)


@to_text.register(ex.HistogramReport)
def _histogram_report_to_text(report: ex.HistogramReport) -> str:
    histogram = report.histogram
    lines = [report.label]
    for left, count in zip(histogram.edges[:-1], histogram.counts):
        lines.append(f"{_float(left)} {int(count)}")
    lines.append(f"std: {_float(histogram.std)}")
    return "\n".join(lines)


@to_text.register(ex.HistogramSummary)
def _histogram_summary_to_text(summary: ex.HistogramSummary) -> str:
    return "\n".join(
        f"{label}\t{histogram.positive}\t{_float(histogram.std)}"
        for label, histogram in zip(summary.labels, summary.histograms)
    )


@to_text.register(ex.Comparison)
def _comparison_to_text(comparison: ex.Comparison) -> str:
    lines = ["name\tssim\tpsnr"]
    for row in comparison.rows:
        lines.append(f"{row.name}\t{_float(row.ssim)}\t{_float(row.psnr)}")
    return "\n".join(lines)


# === Tables ===================================================================


@functools.singledispatch
def to_table(value: object) -> pa.Table:
    raise FormatError(f"{type(value).__name__} has no tabular form")


@to_table.register(ex.PosetListing)
def _listing_to_table(listing: ex.PosetListing) -> pa.Table:
    return pa.table(
        {
            "poset": [format_poset(poset) for poset in listing.posets],
            "n": [poset.n for poset in listing.posets],
        }
    )


@to_table.register(LatticePolytope)
def _polytope_to_table(polytope: LatticePolytope) -> pa.Table:
    if all(is_lattice_point(vertex) for vertex in polytope.vertices):
        return pa.table(
            {
                f"x{axis}": pa.array(
                    [vertex[axis] for vertex in polytope.vertices],
                    pa.int64(),
                )
                for axis in range(polytope.dim)
            }
        )
    return pa.table(
        {
            f"x{axis}": [str(vertex[axis]) for vertex in polytope.vertices]
            for axis in range(polytope.dim)
        }
    )


@to_table.register(TropicalPolynomial)
def _polynomial_to_table(f: TropicalPolynomial) -> pa.Table:
    return pa.table(
        {
            "exp": [_vertex_text(exp) for exp, _ in f.monomials],
            "coef": [str(coef) for _, coef in f.monomials],
        }
    )


@to_table.register(PoolingFilter)
def _filter_to_table(pooling: PoolingFilter) -> pa.Table:
    matrix = pooling.matrix
    return pa.table(
        {
            f"w{axis}": _float_column(matrix[:, axis])
            for axis in range(pooling.m)
        }
    )


@to_table.register(GradcheckReport)
def _gradcheck_to_table(report: GradcheckReport) -> pa.Table:
    return pa.table(
        {
            "checked": [report.checked],
            "skipped": [report.skipped],
            "worst_error": _float_column([report.worst_error]),
            "passed": [report.passed],
        }
    )


@to_table.register(ex.Evaluation)
def _evaluation_to_table(evaluation: ex.Evaluation) -> pa.Table:
    return pa.table({"output": _float_column(evaluation.outputs)})


@to_table.register(ex.Pieces)
def _pieces_to_table(pieces: ex.Pieces) -> pa.Table:
    return pa.table(
        {
            "pieces": [pieces.pieces],
            "bound": [pieces.bound],
            "grid_points": [pieces.grid_points],
        }
    )


@to_table.register(ex.HistogramReport)
def _histogram_report_to_table(report: ex.HistogramReport) -> pa.Table:
    histogram = report.histogram
    return pa.table(
        {
            "bin_left": _float_column(histogram.edges[:-1]),
            "count": pa.array(histogram.counts, pa.int64()),
        }
    )


@to_table.register(ex.HistogramSummary)
def _histogram_summary_to_table(summary: ex.HistogramSummary) -> pa.Table:
    return pa.table(
        {
            "label": list(summary.labels),
            "positive": [h.positive for h in summary.histograms],
            "total": [h.total for h in summary.histograms],
            "std": _float_column(h.std for h in summary.histograms),
        }
    )


@to_table.register(ex.Comparison)
def _comparison_to_table(comparison: ex.Comparison) -> pa.Table:
    return pa.table(
        {
            "name": [row.name for row in comparison.rows],
            "ssim": _float_column(row.ssim for row in comparison.rows),
            "psnr": _float_column(row.psnr for row in comparison.rows),
        }
    )


# === Readers ==================================================================


def _reader(kind: str) -> Callable[[Callable[..., T]], Callable[..., T]]:
    """
    Reports malformed documents as `FormatError`, leaving domain errors
    raised by the value types untouched.
    """

    def decorator(function: Callable[..., T]) -> Callable[..., T]:
        @functools.wraps(function)
        def wrapper(data: Any) -> T:
            try:
                return function(data)
            except Error:
                raise
            except (KeyError, TypeError, ValueError, IndexError) as exc:
                raise FormatError(f"malformed {kind}: {exc!r}") from exc

        return wrapper

    return decorator


def _rational_from_json(value: Any) -> Coefficient:
    if value == "-inf":
        return NEG_INF
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise FormatError(f"{value!r} is not an exact rational")
    return Fraction(value)


def _coordinate_from_json(value: Any) -> Coordinate:
    coordinate = _rational_from_json(value)
    if coordinate is NEG_INF:
        raise FormatError("polytope coordinates must be finite")
    assert isinstance(coordinate, Fraction)
    if coordinate.denominator == 1:
        return coordinate.numerator
    return coordinate


def _threshold_from_json(value: Any) -> Threshold:
    if value == "-inf":
        return NEG_INF
    return float(value)


@_reader("poset")
def poset_from_json(data: Any) -> Poset:
    labels: Optional[list[str]] = data.get("labels")
    return Poset.from_relations(
        int(data["n"]),
        [(int(i), int(j)) for i, j in data["covers"]],
        labels=labels,
    )


@_reader("polytope")
def polytope_from_json(data: Any) -> LatticePolytope:
    vertices = {
        tuple(_coordinate_from_json(v) for v in vertex)
        for vertex in data["vertices"]
    }
    return LatticePolytope(
        dim=int(data["dim"]), vertices=tuple(sorted(vertices))
    )


@_reader("polynomial")
def polynomial_from_json(data: Any) -> TropicalPolynomial:
    return TropicalPolynomial.from_terms(
        int(data["nvars"]),
        [
            (
                [int(e) for e in monomial["exp"]],
                _rational_from_json(monomial["coef"]),
            )
            for monomial in data["monomials"]
        ],
    )


def _layer_from_json(data: Any) -> IvnnLayer:
    return IvnnLayer(
        weights=np.array(data["weights"], dtype=np.int64).reshape(
            len(data["weights"]), len(data["thresholds"])
        ),
        bias=np.array(data["bias"], dtype=np.float64),
        thresholds=tuple(_threshold_from_json(t) for t in data["thresholds"]),
    )


def _ivnn_from_json(data: Any) -> Ivnn:
    return Ivnn(
        input_dim=int(data["input_dim"]),
        layers=tuple(_layer_from_json(layer) for layer in data["layers"]),
    )


@_reader("network")
def network_from_json(data: Any) -> Ivnn | PosetNN:
    """
    Reads either a bare network or a poset network bundle.
    """
    if "chain" not in data:
        return _ivnn_from_json(data)
    source = data.get("source")
    return PosetNN(
        source=None if source is None else poset_from_json(source),
        perms=tuple(tuple(int(i) for i in perm) for perm in data["perms"]),
        chain=_ivnn_from_json(data["chain"]),
        combine=bool(data.get("combine", False)),
    )


@_reader("filter")
def filter_from_json(data: Any) -> PoolingFilter:
    provenance = data.get("provenance")
    if provenance is None:
        decoded = None
    elif provenance["kind"] == "poset":
        decoded = PosetProvenance(
            poset=poset_from_json(provenance["poset"]),
            index_map=IndexMap(
                positions=tuple(int(i) for i in provenance["index_map"])
            ),
        )
    elif provenance["kind"] == "random":
        decoded = RandomProvenance(
            seed=int(provenance["seed"]),
            count=int(provenance["count"]),
            distribution=str(provenance["distribution"]),
        )
    else:
        raise FormatError(f"unknown filter provenance {provenance['kind']!r}")

    terms = [tuple(float(v) for v in term) for term in data["terms"]]
    pooling = PoolingFilter.from_terms(terms, provenance=decoded)
    if pooling.m != int(data["m"]):
        raise FormatError(
            f"filter declares window {data['m']} but has terms of {pooling.m}"
        )
    return pooling
