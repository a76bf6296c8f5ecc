"""Random-subsampling cross-validation of the ranking algorithms.

Each split halves the labeled nodes (stratified by class). Seeds come only
from the train half; parameters and the decision threshold are tuned for
train accuracy, and accuracy is then measured on the test half.

Spam is the positive class in confusion counts.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Literal, Mapping, Sequence

import numpy as np

from .graph import Graph, TransitionMatrix, build_transition
from .propagation import (
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_TOLERANCE,
    SolveResult,
    SolverConfig,
    antitrustrank_solve,
    reprank_solve,
    seed_vector,
    trustrank_solve,
)

log = logging.getLogger(__name__)

GOOD = "good"
SPAM = "spam"
ALGORITHMS = ("reprank", "trustrank", "antitrustrank")
GRID_VALUES = (0.5, 0.7, 0.85, 0.95)

Polarity = Literal["higher-is-good", "higher-is-bad"]
SeedAudit = Callable[[np.ndarray], None]


class LabelParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class EvaluationError(RuntimeError):
    pass


@dataclass(frozen=True)
class LabelSet:
    entries: Mapping[str, str]

    def __post_init__(self):
        bad = {v for v in self.entries.values()} - {GOOD, SPAM}
        if bad:
            raise ValueError(f"unknown labels: {sorted(bad)}")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def good(self) -> list[str]:
        return sorted(k for k, v in self.entries.items() if v == GOOD)

    @property
    def spam(self) -> list[str]:
        return sorted(k for k, v in self.entries.items() if v == SPAM)

    def counts(self) -> dict[str, int]:
        return {GOOD: len(self.good), SPAM: len(self.spam)}

    def check_against(self, graph: Graph) -> None:
        missing = [k for k in self.entries if not graph.has_node(k)]
        if missing:
            raise ValueError(f"{len(missing)} labeled ids not in graph, e.g. {missing[:3]}")


def load_labels(source: Iterable[str]) -> LabelSet:
    """Parse ``node_id<TAB>label`` lines; ``#`` lines and blanks are skipped."""
    entries: dict[str, str] = {}
    for lineno, line in enumerate(source, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise LabelParseError(lineno, f"expected 2 fields, got {len(parts)}")
        node, label = parts
        if label not in (GOOD, SPAM):
            raise LabelParseError(lineno, f"unknown label {label!r}")
        if node in entries:
            raise LabelParseError(lineno, f"node {node!r} labeled twice")
        entries[node] = label
    return LabelSet(entries)


def read_label_file(path) -> LabelSet:
    with open(path, encoding="utf-8") as fh:
        return load_labels(fh)


def split_labels(labels: LabelSet, rng_seed: int) -> tuple[LabelSet, LabelSet]:
    """Stratified random halves of sizes ceil(m/2) (train) and floor(m/2) (test)."""
    if len(labels) < 2:
        raise ValueError("need at least two labels to split")
    good, spam = labels.good, labels.spam
    if not good or not spam:
        raise ValueError("each class needs at least one labeled node")
    rng = np.random.default_rng(rng_seed)
    n_train_good = (len(good) + 1) // 2
    n_train_spam = (len(labels) + 1) // 2 - n_train_good
    train: dict[str, str] = {}
    test: dict[str, str] = {}
    for members, n_train, label in ((good, n_train_good, GOOD), (spam, n_train_spam, SPAM)):
        order = rng.permutation(len(members))
        for rank, idx in enumerate(order):
            (train if rank < n_train else test)[members[idx]] = label
    return LabelSet(dict(sorted(train.items()))), LabelSet(dict(sorted(test.items())))


def classify(scores: np.ndarray, threshold: float, polarity: Polarity = "higher-is-good") -> np.ndarray:
    """Predicted label per node. A score equal to the threshold is called spam."""
    scores = np.asarray(scores, dtype=np.float64)
    if polarity == "higher-is-good":
        is_good = scores > threshold
    elif polarity == "higher-is-bad":
        is_good = scores < threshold
    else:
        raise ValueError(f"unknown polarity {polarity!r}")
    return np.where(is_good, GOOD, SPAM)


def polarity_of(algorithm: str) -> Polarity:
    return "higher-is-bad" if algorithm == "antitrustrank" else "higher-is-good"


def default_grid(algorithm: str) -> list[dict[str, float]]:
    """Cartesian grid over GRID_VALUES, plus alpha3 = 1 - max(alpha1, alpha2) for RepRank."""
    if algorithm in ("trustrank", "antitrustrank"):
        return [{"alpha": a} for a in GRID_VALUES]
    if algorithm != "reprank":
        raise ValueError(f"unknown algorithm {algorithm!r}")
    grid = [
        {"alpha1": a1, "alpha2": a2, "alpha3": a3}
        for a1, a2, a3 in itertools.product(GRID_VALUES, repeat=3)
    ]
    seen = {tuple(p.values()) for p in grid}
    for a1, a2 in itertools.product(GRID_VALUES, repeat=2):
        a3 = round(1.0 - max(a1, a2), 12)
        if (a1, a2, a3) not in seen:
            seen.add((a1, a2, a3))
            grid.append({"alpha1": a1, "alpha2": a2, "alpha3": a3})
    return grid


@dataclass
class Operators:
    """Forward and backward transitions of one graph, built once per evaluation."""

    graph: Graph
    F: TransitionMatrix
    B: TransitionMatrix

    @classmethod
    def of(cls, graph: Graph) -> "Operators":
        return cls(graph, build_transition(graph, "forward"), build_transition(graph, "backward"))


def algorithm_seeds(
    algorithm: str,
    graph: Graph,
    labels: LabelSet,
    normalize: bool = False,
) -> np.ndarray:
    """Seed vector for one algorithm; only nodes in ``labels`` receive mass."""
    n = graph.node_count
    good = [graph.index_of(k) for k in labels.good]
    spam = [graph.index_of(k) for k in labels.spam]
    if algorithm == "reprank":
        return seed_vector(n, good, spam, normalize)
    if algorithm == "trustrank":
        return seed_vector(n, good, (), normalize)
    if algorithm == "antitrustrank":
        # badness mass: +1 on spam seeds
        return seed_vector(n, spam, (), normalize)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def run_algorithm(
    algorithm: str,
    ops: Operators,
    d: np.ndarray,
    params: Mapping[str, float],
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> SolveResult:
    if algorithm == "reprank":
        cfg = SolverConfig(
            alpha1=params["alpha1"],
            alpha2=params["alpha2"],
            alpha3=params["alpha3"],
            tolerance=tolerance,
            max_iterations=max_iterations,
        )
        return reprank_solve(ops.F, ops.B, d, cfg)
    if algorithm == "trustrank":
        return trustrank_solve(ops.F, d, params["alpha"], tolerance, max_iterations)
    if algorithm == "antitrustrank":
        return antitrustrank_solve(ops.B, d, params["alpha"], tolerance, max_iterations)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def candidate_thresholds(train_scores: np.ndarray, include_zero: bool) -> np.ndarray:
    """Midpoints between consecutive distinct scores, ascending.

    With a single distinct score the score itself is the only candidate.
    """
    distinct = np.unique(train_scores)
    cands = (distinct[:-1] + distinct[1:]) / 2.0 if distinct.size > 1 else distinct.copy()
    if include_zero:
        cands = np.union1d(cands, [0.0])
    return cands


def threshold_accuracies(
    scores: np.ndarray,
    is_spam: np.ndarray,
    thresholds: np.ndarray,
    polarity: Polarity,
) -> np.ndarray:
    """Accuracy of ``classify`` at every threshold, vectorised with a sort."""
    order = np.argsort(scores, kind="stable")
    s = scores[order]
    spam_sorted = is_spam[order]
    spam_le = np.concatenate([[0], np.cumsum(spam_sorted)])
    good_le = np.concatenate([[0], np.cumsum(~spam_sorted)])
    n_spam, n_good = spam_le[-1], good_le[-1]
    if polarity == "higher-is-good":
        # k scores <= threshold are called spam
        k = np.searchsorted(s, thresholds, side="right")
        correct = spam_le[k] + (n_good - good_le[k])
    else:
        # k scores < threshold are called good
        k = np.searchsorted(s, thresholds, side="left")
        correct = good_le[k] + (n_spam - spam_le[k])
    return correct / scores.size


@dataclass
class GridSearchResult:
    params: dict[str, float]
    threshold: float
    train_accuracy: float
    scores: np.ndarray = field(repr=False)
    skipped: list[dict[str, float]] = field(default_factory=list)


def grid_search(
    algorithm: str,
    graph: Graph | Operators,
    train: LabelSet,
    grid: Sequence[Mapping[str, float]] | None = None,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    normalize_seeds: bool = False,
    audit: SeedAudit | None = None,
) -> GridSearchResult:
    """Pick the (params, threshold) pair with the best train accuracy.

    Ties go to the earlier grid point, then to the lower threshold. Grid
    points whose solve does not converge are skipped.
    """
    ops = graph if isinstance(graph, Operators) else Operators.of(graph)
    grid = list(default_grid(algorithm) if grid is None else grid)
    if not grid:
        raise ValueError("empty parameter grid")
    d = algorithm_seeds(algorithm, ops.graph, train, normalize_seeds)
    train_idx = np.array([ops.graph.index_of(k) for k in train.entries], dtype=np.int64)
    is_spam = np.array([v == SPAM for v in train.entries.values()])
    polarity = polarity_of(algorithm)

    best: GridSearchResult | None = None
    skipped = []
    for params in grid:
        if audit is not None:
            audit(d)
        result = run_algorithm(algorithm, ops, d, params, tolerance, max_iterations)
        if not result.converged:
            log.warning(
                "%s did not converge at %s (residual %.3g after %d iterations); skipping",
                algorithm, dict(params), result.final_residual, result.iterations,
            )
            skipped.append(dict(params))
            continue
        train_scores = result.scores[train_idx]
        thresholds = candidate_thresholds(train_scores, include_zero=algorithm == "reprank")
        acc = threshold_accuracies(train_scores, is_spam, thresholds, polarity)
        i = int(np.argmax(acc))
        if best is None or acc[i] > best.train_accuracy:
            best = GridSearchResult(dict(params), float(thresholds[i]), float(acc[i]), result.scores)
    if best is None:
        raise EvaluationError(f"{algorithm}: no grid point converged")
    best.skipped = skipped
    return best


@dataclass
class EvalReport:
    algorithm: str
    split_seed: int
    n_splits: int
    split_accuracies: list[float]
    mean_accuracy: float
    best_params: list[dict[str, float]]
    thresholds: list[float]
    train_accuracies: list[float]
    confusion: dict[str, int]
    predictions: list[list[list[str]]] = field(repr=False)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        return cls(**json.loads(text))


def confusion_counts(truth: Sequence[str], predicted: Sequence[str]) -> dict[str, int]:
    counts = {"tp": 0, "tn": 0, "fp": 0, "fn": 0}
    for y, p in zip(truth, predicted):
        if y == SPAM:
            counts["tp" if p == SPAM else "fn"] += 1
        else:
            counts["tn" if p == GOOD else "fp"] += 1
    return counts


def cross_validate(
    algorithm: str,
    graph: Graph,
    labels: LabelSet,
    n_splits: int = 10,
    rng_seed: int = 0,
    grid: Sequence[Mapping[str, float]] | None = None,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    normalize_seeds: bool = False,
    audit: Callable[[np.ndarray, LabelSet], None] | None = None,
) -> EvalReport:
    """Split ``i`` uses ``split_labels(labels, rng_seed + i)``.

    ``audit``, when given, is called as ``audit(d, test)`` before every solve.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if n_splits < 1:
        raise ValueError("n_splits must be at least 1")
    labels.check_against(graph)
    ops = Operators.of(graph)
    polarity = polarity_of(algorithm)

    accs, params, thresholds, train_accs, preds = [], [], [], [], []
    totals = {"tp": 0, "tn": 0, "fp": 0, "fn": 0}
    for i in range(n_splits):
        train, test = split_labels(labels, rng_seed + i)
        hook = None if audit is None else (lambda d, _test=test: audit(d, _test))
        best = grid_search(
            algorithm, ops, train, grid,
            tolerance=tolerance, max_iterations=max_iterations,
            normalize_seeds=normalize_seeds, audit=hook,
        )
        test_ids = list(test.entries)
        test_idx = np.array([graph.index_of(k) for k in test_ids], dtype=np.int64)
        predicted = classify(best.scores[test_idx], best.threshold, polarity).tolist()
        truth = list(test.entries.values())
        conf = confusion_counts(truth, predicted)
        for key in totals:
            totals[key] += conf[key]
        accs.append((conf["tp"] + conf["tn"]) / len(truth))
        params.append(best.params)
        thresholds.append(best.threshold)
        train_accs.append(best.train_accuracy)
        preds.append([[k, y, p] for k, y, p in zip(test_ids, truth, predicted)])
        log.info("%s split %d: test accuracy %.4f with %s", algorithm, i, accs[-1], best.params)

    return EvalReport(
        algorithm=algorithm,
        split_seed=rng_seed,
        n_splits=n_splits,
        split_accuracies=accs,
        mean_accuracy=float(np.mean(accs)),
        best_params=params,
        thresholds=thresholds,
        train_accuracies=train_accs,
        confusion=totals,
        predictions=preds,
    )
