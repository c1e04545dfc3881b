import argparse
import contextlib
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence, TextIO

from posetnn import cmd
from posetnn.errors import Error
from posetnn.execute import execute
from posetnn.io import (
    Exporter,
    FileSystemExporter,
    StreamExporter,
    emit_report,
)

logger = logging.getLogger(__name__)

_CHAIN4 = "4; 0<1, 1<2, 2<3"
_ANTICHAIN4 = "4;"


class _UsageError(Exception):
    pass


def _index_map(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma separated integers, got {text!r}"
        )


def _step(text: str) -> Fraction:
    """
    Accepts `25` or `1/25` for a lattice step of one twenty-fifth.
    """
    try:
        value = Fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid step {text!r}")
    if value > 1:
        value = 1 / value
    return value


def _require_seed(args: argparse.Namespace, what: str) -> int:
    if args.seed is None:
        raise _UsageError(f"{what} needs --seed")
    return int(args.seed)


def _add_filter_source(
    parser: argparse.ArgumentParser, prefix: str = ""
) -> None:
    dest = prefix.replace("-", "_")
    group = parser.add_mutually_exclusive_group()
    group.add_argument(
        f"--{prefix}poset",
        dest=f"{dest}poset",
        metavar="LITERAL",
        help="build the filter from the up-sets of this poset",
    )
    group.add_argument(
        f"--{prefix}random",
        dest=f"{dest}random",
        metavar="K",
        type=int,
        help="use a random filter with K terms besides zero",
    )
    parser.add_argument(
        f"--{prefix}index-map",
        dest=f"{dest}index_map",
        metavar="I,J,...",
        type=_index_map,
        help="window position of each poset point",
    )


def _filter_source(
    args: argparse.Namespace, prefix: str = "", default: str = _ANTICHAIN4
) -> cmd.FilterSource:
    random_terms = getattr(args, f"{prefix}random")
    if random_terms is not None:
        return cmd.FilterSource(
            random_terms=random_terms,
            seed=_require_seed(args, "a random filter"),
        )
    poset = getattr(args, f"{prefix}poset")
    return cmd.FilterSource(
        poset=default if poset is None else poset,
        index_map=getattr(args, f"{prefix}index_map"),
    )


# === Subcommand builders ======================================================


def _build_poset_list(args: argparse.Namespace) -> cmd.CommandSpec:
    return cmd.PosetListCommand(n=args.n)


def _build_poset_show(args: argparse.Namespace) -> cmd.CommandSpec:
    return cmd.PosetShowCommand(poset=args.poset)


def _build_poset_count(args: argparse.Namespace) -> cmd.CommandSpec:
    return cmd.PosetCountCommand(poset=args.poset)


def _build_poset_compose(args: argparse.Namespace) -> cmd.CommandSpec:
    return cmd.PosetComposeCommand(outer=args.outer, inner=tuple(args.inner))


def _build_trop_of_poset(args: argparse.Namespace) -> cmd.CommandSpec:
    return cmd.TropOfPosetCommand(poset=args.poset)


def _build_trop_expand(args: argparse.Namespace) -> cmd.CommandSpec:
    return cmd.TropExpandCommand(poset=args.poset)


def _build_trop_act(args: argparse.Namespace) -> cmd.CommandSpec:
    return cmd.TropActCommand(
        poset=args.poset,
        polynomials=tuple(args.polynomials),
        shared_variables=args.shared_variables,
        nvars=args.nvars,
    )


def _build_trop_recover(args: argparse.Namespace) -> cmd.CommandSpec:
    return cmd.TropRecoverCommand(polynomial=args.polynomial, nvars=args.nvars)


def _build_polytope_vertices(args: argparse.Namespace) -> cmd.CommandSpec:
    return cmd.PolytopeVerticesCommand(poset=args.poset)


def _build_polytope_act(args: argparse.Namespace) -> cmd.CommandSpec:
    return cmd.PolytopeActCommand(poset=args.poset, inner=tuple(args.inner))


def _build_polytope_triangulate(args: argparse.Namespace) -> cmd.CommandSpec:
    return cmd.PolytopeTriangulateCommand(poset=args.poset)


def _build_polytope_hull(args: argparse.Namespace) -> cmd.CommandSpec:
    return cmd.PolytopeHullCommand(points=args.points)


def _build_nn_show(args: argparse.Namespace) -> cmd.CommandSpec:
    if (args.poset is None) == (args.poset_option is None):
        raise _UsageError("nn show needs one poset, positional or --poset")
    poset = args.poset if args.poset_option is None else args.poset_option
    return cmd.NnShowCommand(poset=poset)


def _build_nn_eval(args: argparse.Namespace) -> cmd.CommandSpec:
    return cmd.NnEvalCommand(
        poset=args.poset,
        inputs=tuple(args.inputs),
        combine=not args.branches,
    )


def _build_nn_pieces(args: argparse.Namespace) -> cmd.CommandSpec:
    return cmd.NnPiecesCommand(
        poset=args.poset, low=args.low, high=args.high, steps=args.steps
    )


def _build_filter_emit(args: argparse.Namespace) -> cmd.CommandSpec:
    return cmd.FilterEmitCommand(source=_filter_source(args))


def _build_filter_pool(args: argparse.Namespace) -> cmd.CommandSpec:
    return cmd.FilterPoolCommand(
        source=_filter_source(args),
        tensor=args.tensor,
        prefilter_relu=args.relu,
    )


def _build_filter_gradcheck(args: argparse.Namespace) -> cmd.CommandSpec:
    return cmd.FilterGradcheckCommand(
        source=_filter_source(args),
        windows=args.windows,
        seed=_require_seed(args, "gradcheck"),
        step=args.step,
        rtol=args.rtol,
    )


def _build_experiment_histogram(args: argparse.Namespace) -> cmd.CommandSpec:
    seed = None
    if args.random_filters:
        seed = _require_seed(args, "random filters")
    return cmd.ExperimentHistogramCommand(
        posets=tuple(args.posets),
        step=args.step,
        bins=args.bins,
        random_filters=args.random_filters,
        random_terms=args.random_terms,
        seed=seed,
    )


def _build_experiment_image(args: argparse.Namespace) -> cmd.CommandSpec:
    return cmd.ExperimentImageCommand(
        image=args.image,
        first=_filter_source(args, "first_", _ANTICHAIN4),
        second=_filter_source(args, "second_", _CHAIN4),
        iterations=args.iterations,
        save_dir=args.save_dir,
    )


# === Parser ===================================================================


def _add_global_flags(
    parser: argparse.ArgumentParser, *, suppress: bool
) -> None:
    def default(value: object) -> object:
        return argparse.SUPPRESS if suppress else value

    parser.add_argument(
        "--format",
        choices=["text", "json", "csv"],
        default=default("text"),
        help="output format",
    )
    parser.add_argument(
        "--out",
        metavar="PATH",
        type=Path,
        default=default(None),
        help="directory into which one file per report should be written",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=default(None),
        help="seed for randomised commands",
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=default(0),
        help="log progress to standard error, twice for debug output",
    )


Builder = Callable[[argparse.Namespace], cmd.CommandSpec]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="posetnn",
        description="Posets, order polytopes, tropical polynomials and "
        "the networks and pooling filters built from them",
    )
    _add_global_flags(parser, suppress=False)

    common = argparse.ArgumentParser(add_help=False)
    _add_global_flags(common, suppress=True)

    groups = parser.add_subparsers(dest="group", required=True)

    def command(
        group: "argparse._SubParsersAction[argparse.ArgumentParser]",
        name: str,
        build: Builder,
        help: str,
    ) -> argparse.ArgumentParser:
        sub = group.add_parser(name, parents=[common], help=help)
        sub.set_defaults(build=build)
        return sub

    poset_group = groups.add_parser("poset", help="finite posets")
    poset_commands = poset_group.add_subparsers(dest="command", required=True)

    sub = command(
        poset_commands,
        "list",
        _build_poset_list,
        "every poset up to isomorphism",
    )
    sub.add_argument("--n", type=int, required=True)

    sub = command(poset_commands, "show", _build_poset_show, "describe")
    sub.add_argument("poset")

    sub = command(
        poset_commands, "count", _build_poset_count, "linear extensions"
    )
    sub.add_argument("poset")

    sub = command(
        poset_commands, "compose", _build_poset_compose, "lexicographic sum"
    )
    sub.add_argument("outer")
    sub.add_argument("inner", nargs="*")

    trop_group = groups.add_parser("trop", help="tropical polynomials")
    trop_commands = trop_group.add_subparsers(dest="command", required=True)

    sub = command(
        trop_commands, "of-poset", _build_trop_of_poset, "poset polynomial"
    )
    sub.add_argument("poset")

    sub = command(
        trop_commands, "expand", _build_trop_expand, "chain presentation"
    )
    sub.add_argument("poset")

    sub = command(trop_commands, "act", _build_trop_act, "poset action")
    sub.add_argument("poset")
    sub.add_argument("polynomials", nargs="*")
    sub.add_argument("--shared-variables", action="store_true")
    sub.add_argument("--nvars", type=int)

    sub = command(
        trop_commands, "recover", _build_trop_recover, "poset of polynomial"
    )
    sub.add_argument("polynomial")
    sub.add_argument("--nvars", type=int)

    polytope_group = groups.add_parser("polytope", help="lattice polytopes")
    polytope_commands = polytope_group.add_subparsers(
        dest="command", required=True
    )

    sub = command(
        polytope_commands,
        "vertices",
        _build_polytope_vertices,
        "order polytope vertices",
    )
    sub.add_argument("poset")

    sub = command(
        polytope_commands, "act", _build_polytope_act, "poset action"
    )
    sub.add_argument("poset")
    sub.add_argument(
        "inner",
        nargs="*",
        help="posets whose order polytopes are acted on, unit segments "
        "when omitted",
    )

    sub = command(
        polytope_commands,
        "triangulate",
        _build_polytope_triangulate,
        "simplices of the linear extensions",
    )
    sub.add_argument("poset")

    sub = command(
        polytope_commands, "hull", _build_polytope_hull, "convex hull"
    )
    sub.add_argument("points", type=Path, help="JSON list of points")

    nn_group = groups.add_parser("nn", help="poset neural networks")
    nn_commands = nn_group.add_subparsers(dest="command", required=True)

    sub = command(nn_commands, "show", _build_nn_show, "layer structure")
    sub.add_argument("poset", nargs="?")
    sub.add_argument("--poset", dest="poset_option", metavar="LITERAL")

    sub = command(nn_commands, "eval", _build_nn_eval, "evaluate")
    sub.add_argument("poset")
    sub.add_argument("inputs", type=float, nargs="*")
    sub.add_argument(
        "--branches",
        action="store_true",
        help="print every branch output instead of their maximum",
    )

    sub = command(
        nn_commands, "pieces", _build_nn_pieces, "count linear regions"
    )
    sub.add_argument("poset")
    sub.add_argument("--low", type=float, default=-2.0)
    sub.add_argument("--high", type=float, default=2.0)
    sub.add_argument("--steps", type=int, default=21)

    filter_group = groups.add_parser("filter", help="pooling filters")
    filter_commands = filter_group.add_subparsers(
        dest="command", required=True
    )

    sub = command(filter_commands, "emit", _build_filter_emit, "terms")
    _add_filter_source(sub)

    sub = command(filter_commands, "pool", _build_filter_pool, "2x2 pool")
    _add_filter_source(sub)
    sub.add_argument("tensor", type=Path, help="JSON B x C x H x W tensor")
    sub.add_argument(
        "--relu", action="store_true", help="apply ReLU before pooling"
    )

    sub = command(
        filter_commands,
        "gradcheck",
        _build_filter_gradcheck,
        "compare gradients against finite differences",
    )
    _add_filter_source(sub)
    sub.add_argument("--windows", type=int, default=10000)
    sub.add_argument("--step", type=float, default=1e-4)
    sub.add_argument("--rtol", type=float, default=1e-4)

    experiment_group = groups.add_parser("experiment", help="experiments")
    experiment_commands = experiment_group.add_subparsers(
        dest="command", required=True
    )

    sub = command(
        experiment_commands,
        "histogram",
        _build_experiment_histogram,
        "filter outputs over the lattice points of the unit 4-ball",
    )
    sub.add_argument("--posets", nargs="+", default=["all4"])
    sub.add_argument("--step", type=_step, default=Fraction(1, 25))
    sub.add_argument("--bins", type=int, default=50)
    sub.add_argument("--random-filters", type=int, default=0)
    sub.add_argument("--random-terms", type=int, default=7)

    sub = command(
        experiment_commands,
        "image",
        _build_experiment_image,
        "downsample an image with two filters",
    )
    sub.add_argument("image", type=Path)
    _add_filter_source(sub, "first-")
    _add_filter_source(sub, "second-")
    sub.add_argument("--iterations", type=int, default=3)
    sub.add_argument("--save-dir", metavar="PATH", type=Path)

    return parser


def _configure_logging(verbosity: int, stream: TextIO) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(
        stream=stream,
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
    )


def dispatch(
    argv: Optional[Sequence[str]] = None,
    *,
    stdout: Optional[TextIO] = None,
    stderr: Optional[TextIO] = None,
) -> int:
    """
    Runs one command and returns its exit code: 0 on success, 1 on a domain
    error and 2 on a usage error.
    """
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr

    parser = _build_parser()
    with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(
        stderr
    ):
        try:
            args = parser.parse_args(argv)
            try:
                spec = args.build(args)
            except _UsageError as exc:
                parser.error(str(exc))
        except SystemExit as exc:
            return exc.code if isinstance(exc.code, int) else 2

    _configure_logging(args.verbose, stderr)
    logger.info("running %s", type(spec).__name__)

    exporter: Exporter
    if args.out is not None:
        exporter = FileSystemExporter(args.out)
    else:
        exporter = StreamExporter(stdout)

    try:
        emit_report(execute(spec), args.format, exporter)
    except Error as exc:
        print(f"posetnn: error: {exc}", file=stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(dispatch())
