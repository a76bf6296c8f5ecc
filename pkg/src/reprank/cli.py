"""``reprank`` command line: rank, eval, hist, topk.

Exit codes: 0 success, 1 input/parse error, 2 usage error, 3 solver did not
converge (scores are still written).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import evaluation as ev
from .graph import GraphParseError, build_transition, read_edge_file, top_k_by_indegree, top_k_by_score, write_id_map
from .propagation import SolverConfig, antitrustrank_solve, reprank_solve, trustrank_solve

log = logging.getLogger("reprank")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3


class InputError(Exception):
    pass


def _require_file(path: str | None, flag: str) -> Path:
    if path is None:
        raise InputError(f"{flag} is required")
    p = Path(path)
    if not p.is_file() or not os.access(p, os.R_OK):
        raise InputError(f"{flag}: cannot read {path}")
    return p


def _write_scores(path, ids, scores, header: str) -> None:
    # stable sort keeps internal (first-seen) order among equal scores
    order = np.argsort(-scores, kind="stable")
    with open(path, "w", encoding="utf-8") as out:
        out.write(f"# {header}\n")
        for i in order:
            out.write(f"{ids[i]}\t{float(scores[i])!r}\n")


def read_scores(path) -> dict[str, float]:
    scores: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphParseError(lineno, "expected node_id and score")
            try:
                scores[parts[0]] = float(parts[1])
            except ValueError:
                raise GraphParseError(lineno, f"bad score {parts[1]!r}") from None
    return scores


def cmd_rank(args) -> int:
    edges = _require_file(args.edges, "--edges")
    labels_path = _require_file(args.labels, "--labels") if args.labels else None
    cfg = SolverConfig(args.alpha1, args.alpha2, args.alpha3, args.tol, args.max_iters)
    if not 0 < args.alpha < 1:
        raise ValueError("--alpha must lie in (0, 1)")

    graph = read_edge_file(edges)
    labels = ev.read_label_file(labels_path) if labels_path else ev.LabelSet({})
    labels.check_against(graph)
    d = ev.algorithm_seeds(args.algo, graph, labels, args.normalize_seeds)
    if args.algo == "reprank":
        result = reprank_solve(build_transition(graph, "forward"), build_transition(graph, "backward"), d, cfg)
    elif args.algo == "trustrank":
        result = trustrank_solve(build_transition(graph, "forward"), d, args.alpha, args.tol, args.max_iters)
    else:
        result = antitrustrank_solve(build_transition(graph, "backward"), d, args.alpha, args.tol, args.max_iters)

    header = (
        f"algo={args.algo} converged={str(result.converged).lower()} "
        f"iterations={result.iterations} residual={result.final_residual:.6g}"
    )
    _write_scores(args.out, graph.ids, result.scores, header)
    if args.id_map:
        with open(args.id_map, "w", encoding="utf-8") as fh:
            write_id_map(graph, fh)
    if not result.converged:
        log.error("solver did not converge: %s", header)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_eval(args) -> int:
    if args.splits < 1:
        raise _UsageError("--splits must be at least 1")
    edges = _require_file(args.edges, "--edges")
    labels_path = _require_file(args.labels, "--labels")
    grid = None
    if args.grid:
        with open(_require_file(args.grid, "--grid"), encoding="utf-8") as fh:
            grid = json.load(fh)
    graph = read_edge_file(edges)
    labels = ev.read_label_file(labels_path)
    report = ev.cross_validate(
        args.algo, graph, labels, args.splits, args.seed, grid,
        tolerance=args.tol, max_iterations=args.max_iters,
        normalize_seeds=args.normalize_seeds,
    )
    Path(args.out).write_text(report.to_json(), encoding="utf-8")
    log.info("%s mean accuracy %.4f over %d splits", args.algo, report.mean_accuracy, args.splits)
    return EXIT_OK


def histogram(values: np.ndarray, bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Equal-width histogram over [min, max]; a zero-width range is widened slightly."""
    if bins < 1:
        raise ValueError("bins must be at least 1")
    if values.size == 0:
        raise ValueError("no scores to bin")
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        pad = 4 * np.finfo(float).eps * max(abs(lo), 1.0)
        lo, hi = lo - pad, hi + pad
    return np.histogram(values, bins=bins, range=(lo, hi))


def cmd_hist(args) -> int:
    if args.bins < 1:
        raise _UsageError("--bins must be at least 1")
    scores = read_scores(_require_file(args.scores, "--scores"))
    if not scores:
        raise InputError("scores file is empty")
    counts, edges = histogram(np.fromiter(scores.values(), float), args.bins)
    with open(args.out, "w", encoding="utf-8") as out:
        out.write("# bin_left\tbin_right\tcount\tlog10_count_plus_1\n")
        for left, right, c in zip(edges[:-1], edges[1:], counts):
            out.write(f"{float(left)!r}\t{float(right)!r}\t{int(c)}\t{math.log10(c + 1)!r}\n")
    return EXIT_OK


def cmd_topk(args) -> int:
    if args.k < 1:
        raise _UsageError("--k must be at least 1")
    graph = read_edge_file(_require_file(args.edges, "--edges"))
    if args.by == "score":
        raw = read_scores(_require_file(args.scores, "--scores"))
        missing = [i for i in graph.ids if i not in raw]
        if missing:
            raise InputError(f"{len(missing)} nodes have no score, e.g. {missing[:3]}")
        values = np.array([raw[i] for i in graph.ids])
        sub = top_k_by_score(graph, values, args.k)
    else:
        values = graph.in_degree()
        sub = top_k_by_indegree(graph, args.k)

    ids = graph.ids
    with open(args.out, "w", encoding="utf-8") as out:
        for s, d in sub.edges:
            out.write(f"{ids[s]}\t{ids[d]}\n")
    nodes_path = args.nodes or f"{args.out}.nodes"
    with open(nodes_path, "w", encoding="utf-8") as out:
        out.write(f"# node_id\t{args.by}\tomitted\n")
        for i in sub.nodes:
            out.write(f"{ids[i]}\t{values[i].item()!r}\t{int(i in sub.omitted)}\n")
    return EXIT_OK


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reprank", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def solver_flags(p):
        p.add_argument("--algo", choices=ev.ALGORITHMS, default="reprank")
        p.add_argument("--alpha1", type=float, default=0.85)
        p.add_argument("--alpha2", type=float, default=0.85)
        p.add_argument("--alpha3", type=float, default=0.15)
        p.add_argument("--alpha", type=float, default=0.85, help="TrustRank / anti-TrustRank damping")
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--max-iters", type=int, default=1000)
        p.add_argument("--normalize-seeds", action="store_true")

    rank = sub.add_parser("rank", help="score every node")
    rank.add_argument("--edges", required=True)
    rank.add_argument("--labels")
    rank.add_argument("--out", required=True)
    rank.add_argument("--id-map", help="also write external_id<TAB>internal_index")
    solver_flags(rank)
    rank.set_defaults(func=cmd_rank)

    evp = sub.add_parser("eval", help="cross-validated accuracy")
    evp.add_argument("--edges", required=True)
    evp.add_argument("--labels", required=True)
    evp.add_argument("--out", required=True)
    evp.add_argument("--splits", type=int, default=10)
    evp.add_argument("--seed", type=int, default=0)
    evp.add_argument("--grid", help="JSON list of parameter dicts (default: built-in grid)")
    solver_flags(evp)
    evp.set_defaults(func=cmd_eval)

    hist = sub.add_parser("hist", help="histogram of a scores file")
    hist.add_argument("--scores", required=True)
    hist.add_argument("--bins", type=int, default=50)
    hist.add_argument("--out", required=True)
    hist.set_defaults(func=cmd_hist)

    topk = sub.add_parser("topk", help="induced subgraph of the top-k nodes")
    topk.add_argument("--edges", required=True)
    topk.add_argument("--k", type=int, default=300)
    topk.add_argument("--by", choices=("indegree", "score"), default="indegree")
    topk.add_argument("--scores")
    topk.add_argument("--out", required=True)
    topk.add_argument("--nodes", help="node manifest path (default: OUT.nodes)")
    topk.set_defaults(func=cmd_topk)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"reprank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, OSError, ValueError, ev.EvaluationError) as exc:
        print(f"reprank: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
