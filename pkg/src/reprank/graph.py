"""Directed graph ingestion and the forward/backward transition operators."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal, Sequence, TextIO

import numpy as np
import scipy.sparse as sp

log = logging.getLogger(__name__)

Direction = Literal["forward", "backward"]


class GraphParseError(ValueError):
    """Malformed input line; carries the 1-based line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple directed graph with dense internal indices.

    ``src[e] -> dst[e]`` are the stored edges, sorted by (src, dst). ``ids[i]``
    is the external identifier of internal node ``i``.
    """

    src: np.ndarray
    dst: np.ndarray
    ids: tuple[str, ...]
    dropped_duplicates: int = 0
    dropped_self_loops: int = 0
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(self.ids)})
        if len(self._index) != len(self.ids):
            raise ValueError("external ids must be unique")
        for arr in (self.src, self.dst):
            arr.setflags(write=False)

    @classmethod
    def from_arrays(
        cls,
        src: Sequence[int] | np.ndarray,
        dst: Sequence[int] | np.ndarray,
        node_count: int,
        ids: Sequence[str] | None = None,
    ) -> "Graph":
        """Build from internal-index edge arrays, dropping self-loops and duplicates."""
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if src.shape != dst.shape:
            raise ValueError("src and dst must have the same length")
        if src.size and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= node_count):
            raise ValueError("edge endpoint outside 0..node_count-1")
        loops = src == dst
        src, dst = src[~loops], dst[~loops]
        key = np.unique(src * node_count + dst) if src.size else np.empty(0, np.int64)
        n_dup = src.size - key.size
        if ids is None:
            ids = [str(i) for i in range(node_count)]
        elif len(ids) != node_count:
            raise ValueError("ids length must equal node_count")
        return cls(
            src=key // max(node_count, 1),
            dst=key % max(node_count, 1),
            ids=tuple(str(i) for i in ids),
            dropped_duplicates=int(n_dup),
            dropped_self_loops=int(loops.sum()),
        )

    @property
    def node_count(self) -> int:
        return len(self.ids)

    @property
    def edge_count(self) -> int:
        return int(self.src.size)

    def index_of(self, node_id) -> int:
        return self._index[str(node_id)]

    def has_node(self, node_id) -> bool:
        return str(node_id) in self._index

    def out_degree(self) -> np.ndarray:
        return np.bincount(self.src, minlength=self.node_count)

    def in_degree(self) -> np.ndarray:
        return np.bincount(self.dst, minlength=self.node_count)

    def edges(self) -> Iterable[tuple[str, str]]:
        ids = self.ids
        for s, d in zip(self.src.tolist(), self.dst.tolist()):
            yield ids[s], ids[d]


def load_edge_list(source: Iterable[str]) -> Graph:
    """Parse ``src dst`` lines (tab or space separated, ``#`` comments).

    Internal indices follow first-seen order. Self-loops and repeated edges are
    dropped and counted on the returned graph.
    """
    index: dict[str, int] = {}
    src: list[int] = []
    dst: list[int] = []
    for lineno, line in enumerate(source, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphParseError(lineno, f"expected 2 fields, got {len(parts)}")
        a = index.setdefault(parts[0], len(index))
        b = index.setdefault(parts[1], len(index))
        src.append(a)
        dst.append(b)
    graph = Graph.from_arrays(src, dst, len(index), ids=list(index))
    if graph.dropped_duplicates or graph.dropped_self_loops:
        log.info(
            "dropped %d duplicate edges and %d self-loops",
            graph.dropped_duplicates,
            graph.dropped_self_loops,
        )
    return graph


def read_edge_file(path: str | Path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh)


def write_edge_list(graph: Graph, out: TextIO) -> None:
    for a, b in graph.edges():
        out.write(f"{a}\t{b}\n")


def write_id_map(graph: Graph, out: TextIO) -> None:
    for i, node_id in enumerate(graph.ids):
        out.write(f"{node_id}\t{i}\n")


def read_id_map(source: Iterable[str]) -> dict[str, int]:
    mapping: dict[str, int] = {}
    for lineno, line in enumerate(source, 1):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphParseError(lineno, "expected external_id and internal_index")
        try:
            mapping[parts[0]] = int(parts[1])
        except ValueError:
            raise GraphParseError(lineno, f"bad index {parts[1]!r}") from None
    return mapping


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Column-(sub)stochastic operator stored as CSC.

    Forward: column j spreads over the out-neighbours of j with weight
    1/outdeg(j). Backward: column j spreads over the in-neighbours of j with
    weight 1/indeg(j). Dangling columns stay zero.
    """

    direction: Direction
    matrix: sp.csc_matrix

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def build_transition(graph: Graph, direction: Direction) -> TransitionMatrix:
    n = graph.node_count
    if direction == "forward":
        rows, cols, deg = graph.dst, graph.src, graph.out_degree()
    elif direction == "backward":
        rows, cols, deg = graph.src, graph.dst, graph.in_degree()
    else:
        raise ValueError(f"unknown direction {direction!r}")
    data = 1.0 / deg[cols] if cols.size else np.empty(0)
    mat = sp.csc_matrix((data, (rows, cols)), shape=(n, n), dtype=np.float64)
    mat.sort_indices()
    return TransitionMatrix(direction=direction, matrix=mat)


def apply(matrix: TransitionMatrix, v: np.ndarray) -> np.ndarray:
    """Matrix-vector product; single-threaded, so results are bitwise reproducible."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (matrix.dimension,):
        raise ValueError(f"vector of shape {v.shape} does not match dimension {matrix.dimension}")
    return matrix.matrix @ v


@dataclass(frozen=True)
class Subgraph:
    """Induced subgraph on a selected node set (internal indices)."""

    nodes: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    omitted: frozenset[int]


def _induced(graph: Graph, nodes: np.ndarray) -> Subgraph:
    mask = np.zeros(graph.node_count, dtype=bool)
    mask[nodes] = True
    keep = mask[graph.src] & mask[graph.dst]
    edges = tuple(zip(graph.src[keep].tolist(), graph.dst[keep].tolist()))
    touched = set(graph.src[keep].tolist()) | set(graph.dst[keep].tolist())
    chosen = tuple(int(i) for i in nodes)
    return Subgraph(nodes=chosen, edges=edges, omitted=frozenset(i for i in chosen if i not in touched))


def _top_k(values: np.ndarray, k: int) -> np.ndarray:
    n = values.size
    if k < 1:
        raise ValueError("k must be positive")
    if k > n:
        raise ValueError(f"k={k} exceeds node count {n}")
    # lexsort: last key is primary; ties fall back to ascending index
    order = np.lexsort((np.arange(n), -values))
    return order[:k]


def top_k_by_indegree(graph: Graph, k: int) -> Subgraph:
    return _induced(graph, _top_k(graph.in_degree().astype(np.float64), k))


def top_k_by_score(graph: Graph, scores: np.ndarray, k: int) -> Subgraph:
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape != (graph.node_count,):
        raise ValueError("one score per node required")
    return _induced(graph, _top_k(scores, k))
