"""Minimum-power allocation for fixed antenna locations.

With every rate constraint active, the powers solve the linear system
``(I - eps G) p = a`` where ``G[m, i] = g[i, m] / g[m, m]`` is the
normalized cross gain into user ``m`` and ``a[m] = eps P_N / g[m, m]``.
The allocation is feasible when that system is well conditioned and its
solution is strictly positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import achievable_rates

#: Systems with a 2-norm condition number above this are declared infeasible.
MAX_CONDITION = 1e12


def rate_to_epsilon(target_rate: float) -> float:
    return 2.0**target_rate - 1.0


@dataclass(frozen=True)
class InterferenceSystem:
    g_matrix: np.ndarray
    a_vector: np.ndarray
    epsilon: float

    @property
    def matrix(self) -> np.ndarray:
        """The system matrix ``I - eps G``."""
        return np.eye(len(self.a_vector)) - self.epsilon * self.g_matrix


@dataclass(frozen=True)
class PowerSolution:
    """Per-cell transmit powers for one placement.

    ``powers`` is empty and ``total`` is ``inf`` when no feasible
    allocation exists.
    """

    powers: np.ndarray = field(repr=False)
    feasible: bool
    total: float

    @classmethod
    def infeasible(cls) -> "PowerSolution":
        return cls(np.empty(0), False, float("inf"))

    @classmethod
    def from_powers(cls, powers) -> "PowerSolution":
        powers = np.asarray(powers, dtype=float)
        return cls(powers, True, float(powers.sum()))


def _normalized(gains, epsilon, noise_power):
    g = np.asarray(gains, dtype=float)
    own = np.diagonal(g, axis1=-2, axis2=-1)
    cross = np.swapaxes(g, -1, -2) / own[..., :, None]
    m = g.shape[-1]
    cross = np.where(np.eye(m, dtype=bool), 0.0, cross)
    a = epsilon * noise_power / own
    return cross, a


def build_system(gains, target_rate: float, noise_power: float) -> InterferenceSystem:
    """Assemble ``G`` and ``a`` from the squared channel gains ``g[i, m]``."""
    eps = rate_to_epsilon(target_rate)
    cross, a = _normalized(gains, eps, noise_power)
    return InterferenceSystem(cross, a, eps)


def solve_batch(gains, epsilon: float, noise_power: float):
    """Solve the minimum-power system for a stack of gain matrices.

    Parameters
    ----------
    gains : array_like, shape (..., M, M)
    epsilon : float
        SINR threshold.
    noise_power : float

    Returns
    -------
    powers : ndarray, shape (..., M)
        Power vectors; rows of infeasible systems are filled with ``nan``.
    totals : ndarray, shape (...)
        Total power, ``inf`` where infeasible.
    """
    cross, a = _normalized(gains, epsilon, noise_power)
    m = cross.shape[-1]
    mat = np.eye(m) - epsilon * cross
    powers, totals = _solve_stack(mat.reshape(-1, m, m), a.reshape(-1, m))
    return powers.reshape(a.shape), totals.reshape(a.shape[:-1])


def _solve_stack(mats, rhs):
    # LU with partial pivoting per matrix; badly conditioned systems are swapped
    # for the identity before solving so one bad system cannot sink the batch.
    m = mats.shape[-1]
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(mats)
    ok = np.isfinite(cond) & (cond <= MAX_CONDITION)
    safe = np.where(ok[:, None, None], mats, np.eye(m))
    powers = np.linalg.solve(safe, rhs[..., None])[..., 0]
    ok &= np.all(np.isfinite(powers) & (powers > 0), axis=-1)
    powers[~ok] = np.nan
    totals = np.where(ok, powers.sum(axis=-1), np.inf)
    return powers, totals


def solve_min_power(system: InterferenceSystem) -> PowerSolution:
    """Solve ``(I - eps G) p = a``; singular or non-positive solutions are infeasible."""
    m = len(system.a_vector)
    powers, totals = _solve_stack(system.matrix.reshape(1, m, m), system.a_vector.reshape(1, m))
    if not np.isfinite(totals[0]):
        return PowerSolution.infeasible()
    return PowerSolution(powers[0], True, float(totals[0]))


def min_power(gains, target_rate: float, noise_power: float) -> PowerSolution:
    """Convenience wrapper: build the system for ``gains`` and solve it."""
    return solve_min_power(build_system(gains, target_rate, noise_power))


def two_cell_totals(g11, g22, g12, g21, epsilon: float, noise_power: float):
    """Closed-form two-cell powers, elementwise over broadcast gain arrays.

    ``g12`` is the gain from antenna 1 to user 2 and ``g21`` from antenna 2
    to user 1. Returns ``(p1, p2, total)``; entries are ``inf`` where
    ``g11 g22 - eps^2 g21 g12`` is not strictly positive.
    """
    det = g11 * g22 - epsilon**2 * g21 * g12
    feasible = det > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        p1 = np.where(feasible, epsilon * noise_power * (g22 + epsilon * g21) / det, np.inf)
        p2 = np.where(feasible, epsilon * noise_power * (g11 + epsilon * g12) / det, np.inf)
    return p1, p2, p1 + p2


def two_cell_powers(gains, target_rate: float, noise_power: float) -> PowerSolution:
    """Minimum powers for two cells from the closed-form 2x2 solution."""
    g = np.asarray(gains, dtype=float)
    if g.shape != (2, 2):
        raise ValueError(f"two_cell_powers needs a 2x2 gain matrix, got shape {g.shape}")
    eps = rate_to_epsilon(target_rate)
    p1, p2, _ = two_cell_totals(g[0, 0], g[1, 1], g[0, 1], g[1, 0], eps, noise_power)
    if not np.isfinite(p1):
        return PowerSolution.infeasible()
    return PowerSolution.from_powers([p1, p2])


def verify_rates(solution: PowerSolution, gains, target_rate: float, noise_power: float) -> float:
    """Largest ``|R_m - R_t|`` over users for a feasible allocation."""
    if not solution.feasible:
        raise ValueError("cannot verify rates of an infeasible allocation")
    rates = achievable_rates(solution.powers, gains, noise_power)
    return float(np.max(np.abs(rates - target_rate)))
