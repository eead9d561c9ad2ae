"""Damped Newton iteration with shifted deflation."""

from __future__ import annotations

from dataclasses import dataclass, field
from logging import getLogger
from typing import Callable

import numpy as np
import scipy.linalg

logger = getLogger(__name__)

Residual = Callable[[np.ndarray], np.ndarray]
Jacobian = Callable[[np.ndarray], np.ndarray]


@dataclass
class ShiftedDeflation:
    """Deflation operator m(u) = prod_k (1 / ‖u − r_k‖^p + shift).

    Multiplying the residual by m removes known roots r_k from the
    basins of attraction while leaving every other root a root.
    """

    power: float = 2.0
    shift: float = 1.0
    roots: list[np.ndarray] = field(default_factory=list)

    def add(self, root: np.ndarray) -> None:
        self.roots.append(np.array(root, dtype=float))

    def _terms(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        diffs = u - np.asarray(self.roots)
        dist = np.maximum(np.linalg.norm(diffs, axis=1), 1e-300)
        return diffs, dist, dist ** -self.power + self.shift

    def factor(self, u: np.ndarray) -> float:
        if not self.roots:
            return 1.0
        _, _, values = self._terms(u)
        return float(np.prod(values))

    def gradient(self, u: np.ndarray) -> np.ndarray:
        """Gradient of ``factor`` with respect to u."""
        if not self.roots:
            return np.zeros_like(u, dtype=float)
        diffs, dist, values = self._terms(u)
        d_values = (-self.power * dist ** (-self.power - 2))[:, None] * diffs
        # values >= shift > 0
        return (np.prod(values) / values) @ d_values


@dataclass
class NewtonResult:
    """Outcome of one Newton run."""

    root: np.ndarray
    converged: bool
    iterations: int
    residual_norm: float
    reason: str


def damped_newton(
    residual: Residual,
    jacobian: Jacobian,
    u0: np.ndarray,
    *,
    max_iterations: int = 200,
    tolerance: float = 1e-12,
    divergence_threshold: float = 1e6,
    deflation: ShiftedDeflation | None = None,
    min_step: float = 1e-4,
    stall_window: int = 4,
) -> NewtonResult:
    """Solve F(u) = 0 from ``u0`` with a backtracking line search.

    Args:
        residual: F
        jacobian: dF/du
        u0: Starting point
        max_iterations: Iteration cap
        tolerance: Convergence threshold on ‖F(u)‖∞ (undeflated)
        divergence_threshold: Give up once ‖u‖∞ or ‖F(u)‖∞ reaches this
        deflation: Optional deflation applied to the merit function
        min_step: Smallest damping factor the line search tries
        stall_window: Give up when the merit has not halved over this many
            iterations; 0 disables the check

    Returns:
        Result with the last iterate
    """
    u = np.array(u0, dtype=float)
    f = residual(u)
    merits: list[float] = []

    for iteration in range(max_iterations + 1):
        f_norm = float(np.max(np.abs(f)))
        if f_norm <= tolerance:
            return NewtonResult(u, True, iteration, f_norm, "converged")
        if not np.isfinite(f_norm) or f_norm >= divergence_threshold or float(np.max(np.abs(u))) >= divergence_threshold:
            return NewtonResult(u, False, iteration, f_norm, "diverged")
        if iteration == max_iterations:
            break

        g, jg = _deflated_system(f, jacobian(u), u, deflation)
        step = _solve(jg, -g)
        if step is None:
            return NewtonResult(u, False, iteration, f_norm, "singular")

        merit = float(g @ g)
        merits.append(merit)
        if stall_window and len(merits) > stall_window and merit > 0.5 * merits[-1 - stall_window]:
            return NewtonResult(u, False, iteration, f_norm, "stagnated")

        lam = 1.0
        while True:
            trial = u + lam * step
            f_trial = residual(trial)
            g_trial = f_trial if deflation is None else deflation.factor(trial) * f_trial
            if float(g_trial @ g_trial) <= (1.0 - 1e-4 * lam) * merit:
                break
            lam *= 0.5
            if lam < min_step:
                return NewtonResult(u, False, iteration, f_norm, "line_search_failed")
        u, f = trial, f_trial

    return NewtonResult(u, False, max_iterations, float(np.max(np.abs(f))), "max_iterations")


def polish(residual: Residual, jacobian: Jacobian, u: np.ndarray, steps: int = 3) -> np.ndarray:
    """Plain Newton steps on the undeflated system, kept only while they help."""
    best = np.array(u, dtype=float)
    best_norm = float(np.max(np.abs(residual(best))))
    for _ in range(steps):
        step = _solve(jacobian(best), -residual(best))
        if step is None:
            break
        trial = best + step
        trial_norm = float(np.max(np.abs(residual(trial))))
        if not trial_norm < best_norm:
            break
        best, best_norm = trial, trial_norm
    return best


def _deflated_system(
    f: np.ndarray,
    jf: np.ndarray,
    u: np.ndarray,
    deflation: ShiftedDeflation | None,
) -> tuple[np.ndarray, np.ndarray]:
    if deflation is None or not deflation.roots:
        return f, jf
    m = deflation.factor(u)
    return m * f, m * jf + np.outer(f, deflation.gradient(u))


def _solve(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray | None:
    """Newton step; least squares when the matrix is rank-deficient."""
    if not (np.all(np.isfinite(matrix)) and np.all(np.isfinite(rhs))):
        return None
    solution = None
    if matrix.shape[0] == matrix.shape[1]:
        try:
            solution = np.linalg.solve(matrix, rhs)
        except np.linalg.LinAlgError:
            pass
    if solution is None or not np.all(np.isfinite(solution)):
        try:
            solution, _, _, _ = scipy.linalg.lstsq(matrix, rhs, lapack_driver="gelsy", check_finite=False)
        except (np.linalg.LinAlgError, ValueError) as e:
            logger.debug("linear solve failed: %s", e)
            return None
    if not np.all(np.isfinite(solution)):
        return None
    return solution
