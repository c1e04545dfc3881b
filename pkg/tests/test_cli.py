import json

from posetnn.poset import chain, lex_sum, parse_poset, point
from posetnn.serialize import (
    filter_from_json,
    network_from_json,
    polynomial_from_json,
    poset_from_json,
)
from posetnn.tropical import tr_of_poset

N_POSET = "4; 0<2, 1<2, 1<3"


def test_trop_of_poset(run_cli):
    code, stdout, stderr = run_cli("trop", "of-poset", "2; 0<1")
    assert code == 0
    assert stdout == "0 + y + x*y\n"
    assert stderr == ""


def test_trop_expand(run_cli):
    code, stdout, _ = run_cli("trop", "expand", "2;")
    assert code == 0
    assert stdout.splitlines() == [
        "(0 + y*(0 + x)) + (0 + x*(0 + y))",
        "= 0 + y + x + x*y",
    ]


def test_trop_act(run_cli):
    code, stdout, _ = run_cli(
        "trop", "act", "--shared-variables", "3; 0<2, 1<2", "x", "x^2", "z"
    )
    assert code == 0
    assert stdout == "0 + z + x*z + x^2*z + x^3*z\n"


def test_trop_act_blocks(run_cli):
    code, stdout, _ = run_cli("trop", "act", "2;", "0 + y + x*y", "0 + x")
    assert code == 0
    assert stdout == "0 + z + y + y*z + x*y + x*y*z\n"


def test_trop_recover(run_cli):
    code, stdout, _ = run_cli("trop", "recover", "0 + y + x*y")
    assert code == 0
    assert stdout == "2; 0<1\n"


def test_trop_recover_rejects(run_cli):
    code, stdout, stderr = run_cli("trop", "recover", "0 + x*y")
    assert code == 1
    assert stdout == ""
    assert stderr.startswith("posetnn: error: ")


def test_poset_list(run_cli):
    code, stdout, _ = run_cli("poset", "list", "--n", "4")
    assert code == 0
    lines = stdout.splitlines()
    assert len(lines) == 16
    assert "4;" in lines


def test_poset_show(run_cli):
    code, stdout, _ = run_cli("poset", "show", N_POSET)
    assert code == 0
    lines = stdout.splitlines()
    assert lines[0] == f"poset: {N_POSET}"
    assert lines[1] == "linear extensions: 5"
    assert lines[2] == "  0 < 1 < 2 < 3"
    assert "up-sets: 8" in lines


def test_poset_count(run_cli):
    assert run_cli("poset", "count", N_POSET)[1] == "5\n"


def test_poset_compose(run_cli):
    code, stdout, _ = run_cli("poset", "compose", "2;", "2; 0<1", "1;")
    assert code == 0
    assert stdout == "3; 0<1\n"


def test_poset_compose_json(run_cli):
    code, stdout, _ = run_cli(
        "poset", "compose", "2; 0<1", "2; 0<1", "1;", "--format", "json"
    )
    assert code == 0
    composed = poset_from_json(json.loads(stdout))
    assert composed == lex_sum(chain(2), [chain(2), point()])


def test_poset_compose_arity(run_cli):
    code, _, stderr = run_cli("poset", "compose", "2;", "1;")
    assert code == 1
    assert "posetnn: error:" in stderr


def test_cycle_is_domain_error(run_cli):
    code, stdout, stderr = run_cli("poset", "show", "2; 0<1, 1<0")
    assert code == 1
    assert stdout == ""
    assert stderr.startswith("posetnn: error: ")


def test_parse_error(run_cli):
    code, _, stderr = run_cli("poset", "show", "2; 0<<1")
    assert code == 1
    assert "column 6" in stderr


def test_polytope_vertices(run_cli):
    code, stdout, _ = run_cli("polytope", "vertices", N_POSET)
    assert code == 0
    assert stdout.splitlines() == [
        "0 0 0 0",
        "0 0 0 1",
        "0 0 1 0",
        "0 0 1 1",
        "0 1 1 1",
        "1 0 1 0",
        "1 0 1 1",
        "1 1 1 1",
    ]


def test_polytope_vertices_csv(run_cli):
    code, stdout, _ = run_cli(
        "--format", "csv", "polytope", "vertices", "2; 0<1"
    )
    assert code == 0
    lines = stdout.splitlines()
    assert len(lines) == 4
    assert "x0" in lines[0]


def test_polytope_act_on_segments(run_cli):
    code, stdout, _ = run_cli("polytope", "act", "2; 0<1")
    assert code == 0
    assert stdout.splitlines() == ["0 0", "0 1", "1 1"]


def test_polytope_triangulate(run_cli):
    code, stdout, _ = run_cli("polytope", "triangulate", "2;")
    assert code == 0
    assert stdout.splitlines() == [
        "0 < 1: 0 0, 0 1, 1 1",
        "1 < 0: 0 0, 1 0, 1 1",
    ]


def test_polytope_hull(run_cli, tmp_path):
    path = tmp_path / "points.json"
    path.write_text(json.dumps([[0, 0], [2, 0], [1, 0], [0, "1/2"]]))
    code, stdout, _ = run_cli("polytope", "hull", str(path))
    assert code == 0
    assert stdout.splitlines() == ["0 0", "0 1/2", "2 0"]


def test_polytope_hull_missing_file(run_cli, tmp_path):
    code, _, stderr = run_cli("polytope", "hull", str(tmp_path / "no.json"))
    assert code == 1
    assert "posetnn: error:" in stderr


def test_nn_eval(run_cli):
    code, stdout, _ = run_cli("nn", "eval", N_POSET, "1", "1", "1", "1")
    assert code == 0
    assert stdout == "4\n"


def test_nn_eval_branches(run_cli):
    code, stdout, _ = run_cli("nn", "eval", "2;", "1", "-2", "--branches")
    assert code == 0
    assert stdout == "0 1\n"


def test_nn_eval_arity(run_cli):
    code, _, _ = run_cli("nn", "eval", "2;", "1")
    assert code == 1


def test_nn_show_json(run_cli):
    code, stdout, _ = run_cli("nn", "show", N_POSET, "--format", "json")
    assert code == 0
    net = network_from_json(json.loads(stdout))
    assert net.branches == 5
    assert net.source == parse_poset(N_POSET)


def test_nn_show_poset_option(run_cli):
    code, stdout, _ = run_cli("nn", "show", "--poset", "2;")
    assert code == 0
    assert stdout.splitlines()[:3] == ["branches: 2", "  (x, y)", "  (y, x)"]
    assert stdout == run_cli("nn", "show", "2;")[1]


def test_nn_show_needs_one_poset(run_cli):
    assert run_cli("nn", "show")[0] == 2
    assert run_cli("nn", "show", "2;", "--poset", "1;")[0] == 2


def test_nn_pieces(run_cli):
    code, stdout, _ = run_cli("nn", "pieces", "2; 0<1")
    assert code == 0
    assert stdout.splitlines() == [
        "pieces: 3",
        "bound: 3",
        "grid points: 441",
    ]


def test_filter_emit(run_cli):
    code, stdout, _ = run_cli(
        "filter",
        "emit",
        "--poset",
        "4; 0<1, 1<2, 2<3",
        "--index-map",
        "2,3,1,0",
    )
    assert code == 0
    assert stdout.splitlines() == [
        "0 0 0 0",
        "1 0 0 0",
        "1 1 0 0",
        "1 1 0 1",
        "1 1 1 1",
    ]


def test_filter_emit_random(run_cli):
    code, stdout, _ = run_cli(
        "filter", "emit", "--random", "3", "--seed", "4", "--format", "json"
    )
    assert code == 0
    pooling = filter_from_json(json.loads(stdout))
    assert len(pooling) == 4
    assert run_cli(
        "filter", "emit", "--random", "3", "--seed", "4", "--format", "json"
    )[1] == stdout


def test_random_filter_needs_seed(run_cli):
    code, stdout, stderr = run_cli("filter", "emit", "--random", "3")
    assert code == 2
    assert stdout == ""
    assert "--seed" in stderr


def test_filter_pool(run_cli, tmp_path):
    path = tmp_path / "tensor.json"
    path.write_text(json.dumps([[[[1, 2], [3, 4]]]]))
    code, stdout, _ = run_cli("filter", "pool", str(path))
    assert code == 0
    assert stdout.splitlines() == ["[0, 0]", "10"]


def test_filter_pool_ragged(run_cli, tmp_path):
    path = tmp_path / "tensor.json"
    path.write_text(json.dumps([[[[1, 2], [3]]]]))
    code, _, _ = run_cli("filter", "pool", str(path))
    assert code == 1


def test_filter_gradcheck(run_cli):
    code, stdout, _ = run_cli(
        "filter",
        "gradcheck",
        "--poset",
        N_POSET,
        "--windows",
        "200",
        "--seed",
        "0",
    )
    assert code == 0
    assert "passed: yes" in stdout.splitlines()


def test_gradcheck_needs_seed(run_cli):
    code, _, _ = run_cli("filter", "gradcheck", "--windows", "10")
    assert code == 2


def test_usage_errors(run_cli):
    assert run_cli()[0] == 2
    assert run_cli("poset")[0] == 2
    assert run_cli("--format", "xml", "poset", "count", "1;")[0] == 2
    assert run_cli("poset", "frobnicate")[0] == 2


def test_histogram_to_directory(run_cli, tmp_path):
    out = tmp_path / "histograms"
    code, stdout, _ = run_cli(
        "experiment",
        "histogram",
        "--step",
        "4",
        "--bins",
        "5",
        "--format",
        "csv",
        "--out",
        str(out),
    )
    assert code == 0
    assert stdout == ""

    names = sorted(path.name for path in out.iterdir())
    assert len(names) == 17
    assert names[0] == "histogram-00.csv"
    assert names[-1] == "summary.csv"

    summary = (out / "summary.csv").read_text().splitlines()
    assert "label" in summary[0]
    assert len(summary) == 17


def test_histogram_random_filters(run_cli):
    argv = [
        "experiment",
        "histogram",
        "--posets",
        N_POSET,
        "--step",
        "1/4",
        "--random-filters",
        "2",
        "--seed",
        "5",
    ]
    code, stdout, _ = run_cli(*argv)
    assert code == 0
    assert "random 5" in stdout
    assert "random 6" in stdout
    assert run_cli(*argv)[1] == stdout


def test_histogram_needs_four_points(run_cli):
    code, _, _ = run_cli("experiment", "histogram", "--posets", "3;")
    assert code == 1


def test_histogram_random_filters_need_seed(run_cli):
    code, _, _ = run_cli(
        "experiment", "histogram", "--random-filters", "2", "--step", "2"
    )
    assert code == 2


def test_image_experiment(run_cli, gray_image, tmp_path):
    saved = tmp_path / "saved"
    code, stdout, _ = run_cli(
        "experiment",
        "image",
        str(gray_image),
        "--iterations",
        "2",
        "--save-dir",
        str(saved),
    )
    assert code == 0
    lines = stdout.splitlines()
    assert lines[0] == "name\tssim\tpsnr"
    assert [line.split("\t")[0] for line in lines[1:]] == [
        "A",
        "B",
        "nearest",
    ]
    assert sorted(path.name for path in saved.iterdir()) == [
        "A.pgm",
        "B.pgm",
        "nearest.pgm",
    ]


def test_image_experiment_rejects_text(run_cli, tmp_path):
    path = tmp_path / "image.pgm"
    path.write_text("hello")
    code, _, stderr = run_cli("experiment", "image", str(path))
    assert code == 1
    assert "posetnn: error:" in stderr


def test_json_polynomial(run_cli):
    code, stdout, _ = run_cli("--format", "json", "trop", "of-poset", N_POSET)
    assert code == 0
    assert polynomial_from_json(json.loads(stdout)) == tr_of_poset(
        parse_poset(N_POSET)
    )
