"""Dense reference implementations for cross-checking the sparse solvers.

Nothing here touches :mod:`reprank.graph` or :mod:`reprank.propagation`; the
transition matrices are rebuilt from a raw edge list with explicit loops.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

MAX_DENSE_NODES = 64


class OracleSizeError(ValueError):
    pass


def _check_size(n: int) -> None:
    if n > MAX_DENSE_NODES:
        raise OracleSizeError(f"dense oracle limited to {MAX_DENSE_NODES} nodes, got {n}")


def dense_transitions(n: int, edges: Iterable[tuple[int, int]]) -> tuple[np.ndarray, np.ndarray]:
    """Return dense (F, B) for a simple graph on nodes 0..n-1."""
    _check_size(n)
    adj = [[0] * n for _ in range(n)]
    for s, t in edges:
        if s != t:
            adj[s][t] = 1
    F = np.zeros((n, n))
    B = np.zeros((n, n))
    for j in range(n):
        outdeg = sum(adj[j][i] for i in range(n))
        indeg = sum(adj[i][j] for i in range(n))
        for i in range(n):
            if adj[j][i]:
                F[i, j] = 1.0 / outdeg
            if adj[i][j]:
                B[i, j] = 1.0 / indeg
    return F, B


def _matvec(M: np.ndarray, v: list[float]) -> list[float]:
    n = len(v)
    return [sum(M[i, j] * v[j] for j in range(n) if M[i, j] != 0.0) for i in range(n)]


def dense_reprank(F_dense, B_dense, d, cfg) -> np.ndarray:
    """Plain-loop RepRank iteration with the same start and stopping rule as the solver."""
    F_dense = np.asarray(F_dense, dtype=float)
    B_dense = np.asarray(B_dense, dtype=float)
    n = F_dense.shape[0]
    _check_size(n)
    d = [float(x) for x in d]
    t = [cfg.alpha3 * x for x in d]
    for _ in range(cfg.max_iterations):
        pos = [x if x > 0 else 0.0 for x in t]
        neg = [x if x < 0 else 0.0 for x in t]
        fp = _matvec(F_dense, pos)
        bn = _matvec(B_dense, neg)
        new = [cfg.alpha1 * fp[i] + cfg.alpha2 * bn[i] + cfg.alpha3 * d[i] for i in range(n)]
        step = sum(abs(new[i] - t[i]) for i in range(n))
        t = new
        if step <= cfg.tolerance:
            break
    return np.array(t)


def trustrank_linear_residual(F_dense, t, d, alpha: float) -> float:
    """L1 norm of ``(I - alpha F) t - (1 - alpha) d``."""
    F_dense = np.asarray(F_dense, dtype=float)
    n = F_dense.shape[0]
    _check_size(n)
    t = np.asarray(t, dtype=float)
    d = np.asarray(d, dtype=float)
    r = (np.eye(n) - alpha * F_dense) @ t - (1.0 - alpha) * d
    return float(np.abs(r).sum())
