import json
import math

import numpy as np
import pytest

from reprank.cli import EXIT_INPUT, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_USAGE, histogram, main, read_scores


def rows(path):
    return [line.rstrip("\n").split("\t") for line in path.read_text().splitlines() if not line.startswith("#")]


@pytest.fixture
def pair_files(tmp_path):
    edges = tmp_path / "edges.tsv"
    edges.write_text("# src\tdst\n1\t2\n")
    labels = tmp_path / "labels.tsv"
    labels.write_text("1\tgood\n")
    return edges, labels


@pytest.fixture
def world(tmp_path):
    rng = np.random.default_rng(3)
    lines = []
    for i in range(40):
        pool = range(15) if i < 15 else range(40)
        for j in rng.choice(list(pool), size=3, replace=False):
            if j != i:
                lines.append(f"n{i}\tn{j}")
    edges = tmp_path / "world.tsv"
    edges.write_text("\n".join(lines) + "\n")
    labels = tmp_path / "world_labels.tsv"
    labels.write_text(
        "".join(f"n{i}\tgood\n" for i in range(0, 15, 2)) + "".join(f"n{i}\tspam\n" for i in range(15, 40, 3))
    )
    return edges, labels


def test_rank_two_node_fixture(pair_files, tmp_path):
    edges, labels = pair_files
    out = tmp_path / "scores.tsv"
    assert main(["rank", "--edges", str(edges), "--labels", str(labels), "--out", str(out)]) == EXIT_OK
    header = out.read_text().splitlines()[0]
    assert header.startswith("#") and "converged=true" in header
    got = rows(out)
    assert [r[0] for r in got] == ["1", "2"]
    np.testing.assert_allclose([float(r[1]) for r in got], [0.15, 0.1275], atol=1e-12)


def test_rank_antitrust_and_id_map(pair_files, tmp_path):
    edges, _ = pair_files
    labels = tmp_path / "bad.tsv"
    labels.write_text("2\tspam\n")
    out, idmap = tmp_path / "s.tsv", tmp_path / "ids.tsv"
    code = main(["rank", "--edges", str(edges), "--labels", str(labels), "--algo", "antitrustrank",
                 "--out", str(out), "--id-map", str(idmap)])
    assert code == EXIT_OK
    assert {k: float(v) for k, v in rows(out)} == pytest.approx({"2": 0.15, "1": 0.1275})
    assert rows(idmap) == [["1", "0"], ["2", "1"]]


def test_rank_empty_labels(pair_files, tmp_path):
    edges, _ = pair_files
    empty = tmp_path / "empty.tsv"
    empty.write_text("")
    out = tmp_path / "scores.tsv"
    assert main(["rank", "--edges", str(edges), "--labels", str(empty), "--out", str(out)]) == EXIT_OK
    assert [float(r[1]) for r in rows(out)] == [0.0, 0.0]


def test_rank_missing_edges(tmp_path):
    out = tmp_path / "scores.tsv"
    assert main(["rank", "--edges", str(tmp_path / "nope"), "--out", str(out)]) == EXIT_INPUT
    assert not out.exists()


def test_rank_parse_error_reports_line(tmp_path, capsys):
    edges = tmp_path / "bad.tsv"
    edges.write_text("a b\nc\n")
    assert main(["rank", "--edges", str(edges), "--out", str(tmp_path / "o")]) == EXIT_INPUT
    assert "line 2" in capsys.readouterr().err


def test_rank_nonconvergence_still_writes(world, tmp_path):
    edges, labels = world
    out = tmp_path / "scores.tsv"
    code = main(["rank", "--edges", str(edges), "--labels", str(labels), "--max-iters", "2", "--out", str(out)])
    assert code == EXIT_NOT_CONVERGED
    assert "converged=false" in out.read_text().splitlines()[0]
    n_nodes = len({x for line in edges.read_text().split() for x in [line]})
    assert len(rows(out)) == n_nodes


def test_rank_sorted_descending(world, tmp_path):
    edges, labels = world
    out = tmp_path / "scores.tsv"
    assert main(["rank", "--edges", str(edges), "--labels", str(labels), "--out", str(out)]) == EXIT_OK
    values = [float(r[1]) for r in rows(out)]
    assert values == sorted(values, reverse=True)


def test_eval_deterministic(world, tmp_path):
    edges, labels = world
    outs = [tmp_path / "r1.json", tmp_path / "r2.json"]
    for out in outs:
        args = ["eval", "--edges", str(edges), "--labels", str(labels), "--algo", "trustrank",
                "--splits", "2", "--seed", "9", "--out", str(out)]
        assert main(args) == EXIT_OK
    assert outs[0].read_bytes() == outs[1].read_bytes()
    report = json.loads(outs[0].read_text())
    assert report["n_splits"] == 2 and report["split_seed"] == 9
    assert 0.0 <= report["mean_accuracy"] <= 1.0


def test_eval_custom_grid(world, tmp_path):
    edges, labels = world
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps([{"alpha1": 0.7, "alpha2": 0.85, "alpha3": 0.15}]))
    out = tmp_path / "r.json"
    args = ["eval", "--edges", str(edges), "--labels", str(labels), "--grid", str(grid),
            "--splits", "1", "--out", str(out)]
    assert main(args) == EXIT_OK
    assert json.loads(out.read_text())["best_params"] == [{"alpha1": 0.7, "alpha2": 0.85, "alpha3": 0.15}]


def test_eval_zero_splits_is_usage_error(world, tmp_path):
    edges, labels = world
    args = ["eval", "--edges", str(edges), "--labels", str(labels), "--splits", "0", "--out", str(tmp_path / "r")]
    assert main(args) == EXIT_USAGE


def test_histogram_examples():
    counts, _ = histogram(np.array([0.0, 0.0, 1.0]), 2)
    assert counts.tolist() == [2, 1]
    counts, edges = histogram(np.array([3.0, 3.0, 3.0]), 4)
    assert counts.sum() == 3 and edges[0] < 3.0 < edges[-1]


def test_hist_command(tmp_path):
    scores = tmp_path / "s.tsv"
    scores.write_text("# header\na\t0\nb\t0\nc\t1\n")
    out = tmp_path / "h.tsv"
    assert main(["hist", "--scores", str(scores), "--bins", "2", "--out", str(out)]) == EXIT_OK
    got = rows(out)
    assert [int(r[2]) for r in got] == [2, 1]
    assert float(got[0][3]) == pytest.approx(math.log10(3))
    assert float(got[0][0]) == 0.0 and float(got[-1][1]) == 1.0


def test_hist_errors(tmp_path):
    empty = tmp_path / "e.tsv"
    empty.write_text("# only a header\n")
    assert main(["hist", "--scores", str(empty), "--out", str(tmp_path / "h")]) == EXIT_INPUT
    assert main(["hist", "--scores", str(empty), "--bins", "0", "--out", str(tmp_path / "h")]) == EXIT_USAGE


def test_hist_counts_sum_to_rows(world, tmp_path):
    edges, labels = world
    scores, out = tmp_path / "s.tsv", tmp_path / "h.tsv"
    main(["rank", "--edges", str(edges), "--labels", str(labels), "--out", str(scores)])
    assert main(["hist", "--scores", str(scores), "--bins", "7", "--out", str(out)]) == EXIT_OK
    assert sum(int(r[2]) for r in rows(out)) == len(read_scores(scores))


def test_topk_star_indegree(tmp_path):
    edges = tmp_path / "star.tsv"
    edges.write_text("".join(f"leaf{i}\thub\n" for i in range(5)))
    out = tmp_path / "sub.tsv"
    assert main(["topk", "--edges", str(edges), "--k", "1", "--out", str(out)]) == EXIT_OK
    assert rows(out) == []
    assert rows(tmp_path / "sub.tsv.nodes") == [["hub", "5", "1"]]


def test_topk_by_equal_scores(tmp_path):
    edges = tmp_path / "e.tsv"
    edges.write_text("a\tb\nc\td\n")
    scores = tmp_path / "s.tsv"
    scores.write_text("d\t0.0\nc\t0.0\nb\t0.0\na\t0.0\n")
    out, nodes = tmp_path / "sub.tsv", tmp_path / "nodes.tsv"
    args = ["topk", "--edges", str(edges), "--k", "2", "--by", "score", "--scores", str(scores),
            "--out", str(out), "--nodes", str(nodes)]
    assert main(args) == EXIT_OK
    assert rows(out) == [["a", "b"]]
    assert [r[0] for r in rows(nodes)] == ["a", "b"]


def test_topk_errors(tmp_path):
    edges = tmp_path / "e.tsv"
    edges.write_text("a\tb\n")
    out = tmp_path / "sub.tsv"
    assert main(["topk", "--edges", str(edges), "--k", "3", "--out", str(out)]) == EXIT_INPUT
    assert main(["topk", "--edges", str(edges), "--by", "score", "--k", "1", "--out", str(out)]) == EXIT_INPUT
