"""TrustRank, anti-TrustRank and RepRank fixed-point solvers.

RepRank solves ``t = a1 * F @ pos(t) + a2 * B @ neg(t) + a3 * d`` where ``pos``
keeps the positive entries of ``t`` and ``neg`` the negative ones. The update
map is a contraction in the L1 norm with factor ``max(a1, a2)``, so plain
iteration from any start converges to the unique solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .graph import TransitionMatrix, apply

DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_ITERATIONS = 1000


@dataclass(frozen=True)
class SolverConfig:
    alpha1: float = 0.85
    alpha2: float = 0.85
    alpha3: float = 0.15
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "alpha3"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value}")
        _check_stopping(self.tolerance, self.max_iterations)

    @property
    def contraction(self) -> float:
        return max(self.alpha1, self.alpha2)

    @property
    def lipschitz(self) -> float:
        """Bound on how far the solution moves per unit L1 change of the seeds."""
        return self.alpha3 / (1.0 - self.contraction)


def _check_stopping(tolerance: float, max_iterations: int) -> None:
    if not tolerance > 0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")
    if int(max_iterations) != max_iterations or max_iterations < 1:
        raise ValueError(f"max_iterations must be a positive integer, got {max_iterations}")


@dataclass
class SolveResult:
    scores: np.ndarray
    iterations: int
    final_residual: float
    converged: bool
    residual_history: list[float] = field(default_factory=list, repr=False)


def project_positive(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    return np.where(t > 0, t, 0.0)


def project_negative(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    return np.where(t < 0, t, 0.0)


def seed_vector(
    n: int,
    good: Iterable[int] = (),
    spam: Iterable[int] = (),
    normalize: bool = False,
) -> np.ndarray:
    """Encode labels as +1 (good), -1 (spam), 0 (unlabeled).

    With ``normalize`` the vector is divided by the number of seeds so that
    ``||d||_1 == 1``.
    """
    d = np.zeros(n)
    good = list(good)
    spam = list(spam)
    if set(good) & set(spam):
        raise ValueError("a node cannot be both good and spam")
    d[good] = 1.0
    d[spam] = -1.0
    if normalize and (good or spam):
        d /= len(good) + len(spam)
    return d


def _check_dims(d: np.ndarray, *mats: TransitionMatrix) -> np.ndarray:
    d = np.asarray(d, dtype=np.float64)
    for m in mats:
        if d.shape != (m.dimension,):
            raise ValueError(f"vector of shape {d.shape} does not match dimension {m.dimension}")
    if not np.all(np.isfinite(d)):
        raise ValueError("vector has non-finite entries")
    return d


def apply_iteration(
    t: np.ndarray,
    F: TransitionMatrix,
    B: TransitionMatrix,
    d: np.ndarray,
    cfg: SolverConfig,
) -> np.ndarray:
    t = _check_dims(t, F, B)
    d = _check_dims(d, F, B)
    return (
        cfg.alpha1 * apply(F, project_positive(t))
        + cfg.alpha2 * apply(B, project_negative(t))
        + cfg.alpha3 * d
    )


def _iterate(step, t: np.ndarray, tolerance: float, max_iterations: int) -> SolveResult:
    history: list[float] = []
    for k in range(1, max_iterations + 1):
        t_next = step(t)
        residual = float(np.abs(t_next - t).sum())
        history.append(residual)
        t = t_next
        if residual <= tolerance:
            return SolveResult(t, k, residual, True, history)
    return SolveResult(t, max_iterations, history[-1], False, history)


def reprank_solve(
    F: TransitionMatrix,
    B: TransitionMatrix,
    d: np.ndarray,
    cfg: SolverConfig = SolverConfig(),
) -> SolveResult:
    """Iterate the RepRank map from ``alpha3 * d`` until the L1 step is below tolerance.

    Hitting ``max_iterations`` returns a result with ``converged=False``.
    """
    d = _check_dims(d, F, B)
    a1, a2 = cfg.alpha1, cfg.alpha2
    seed = cfg.alpha3 * d

    def step(t):
        return a1 * apply(F, project_positive(t)) + a2 * apply(B, project_negative(t)) + seed

    return _iterate(step, seed, cfg.tolerance, cfg.max_iterations)


def _linear_rank(M, d, alpha, tolerance, max_iterations) -> SolveResult:
    d = _check_dims(d, M)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    _check_stopping(tolerance, max_iterations)
    if np.any(d < 0):
        raise ValueError("seed vector must be non-negative")
    seed = (1.0 - alpha) * d
    return _iterate(lambda t: alpha * apply(M, t) + seed, seed, tolerance, max_iterations)


def trustrank_solve(
    F: TransitionMatrix,
    d: np.ndarray,
    alpha: float = 0.85,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> SolveResult:
    """Forward trust from good seeds: ``t = alpha * F t + (1 - alpha) d``."""
    return _linear_rank(F, d, alpha, tolerance, max_iterations)


def antitrustrank_solve(
    B: TransitionMatrix,
    d_bad: np.ndarray,
    alpha: float = 0.85,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> SolveResult:
    """Backward mistrust from spam seeds; a higher score means more spammy."""
    return _linear_rank(B, d_bad, alpha, tolerance, max_iterations)


def recover_seed(
    t: np.ndarray,
    F: TransitionMatrix,
    B: TransitionMatrix,
    cfg: SolverConfig,
) -> np.ndarray:
    """Seed vector whose RepRank solution is exactly ``t``."""
    t = _check_dims(t, F, B)
    return (
        t - cfg.alpha1 * apply(F, project_positive(t)) - cfg.alpha2 * apply(B, project_negative(t))
    ) / cfg.alpha3
