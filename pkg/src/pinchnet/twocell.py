"""Closed-form analysis of the two-cell case.

Both waveguides lie on the same line (a 1 x 2 grid), so user ``k``'s squared
distance to an antenna at ``x`` is ``(x - x_k)^2 + y_k^2 + d^2`` with ``y_k``
measured from that line. The interference coupling

    f = |h21|^2 |h12|^2 / (|h11|^2 |h22|^2) = 1 / (g1(x1p) g2(x2p))

separates into one factor per antenna, which is what makes both the
feasibility bound and the decoupled placement available in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import CellLayout, ConfigError, ScenarioConfig, gain_matrix
from .power import PowerSolution, rate_to_epsilon, two_cell_powers, two_cell_totals


@dataclass(frozen=True)
class TwoCellGeometry:
    x1: float
    y1: float
    x2: float
    y2: float
    d: float

    @property
    def xi(self) -> float:
        return self.y1**2 + self.y2**2 + 2 * self.d**2

    @property
    def b1(self) -> float:
        return self.y1**2 + self.d**2

    @property
    def b2(self) -> float:
        return self.y2**2 + self.d**2

    @classmethod
    def from_users(cls, users, layout: CellLayout) -> "TwoCellGeometry":
        check_two_cell(layout)
        users = np.asarray(users, dtype=float)
        wy = layout.waveguide_y[0]
        return cls(users[0, 0], users[0, 1] - wy, users[1, 0], users[1, 1] - wy, layout.height)

    def user_positions(self, layout: CellLayout) -> np.ndarray:
        wy = layout.waveguide_y[0]
        return np.array([[self.x1, self.y1 + wy, 0.0], [self.x2, self.y2 + wy, 0.0]])


@dataclass(frozen=True)
class StationaryPoints:
    gamma1: float
    gamma2: float
    gamma3: float
    roots: tuple


@dataclass(frozen=True)
class OracleResult:
    placement: np.ndarray
    solution: PowerSolution


def check_two_cell(layout: CellLayout):
    if (layout.n_row, layout.n_col) != (1, 2):
        raise ConfigError(
            f"two-cell analysis needs a 1x2 grid, got {layout.n_row}x{layout.n_col}"
        )


def g1(x1p, geom: TwoCellGeometry):
    """Interference-to-signal distance ratio of antenna 1 (to be maximized)."""
    x1p = np.asarray(x1p, dtype=float)
    return ((x1p - geom.x2) ** 2 + geom.b2) / ((x1p - geom.x1) ** 2 + geom.b1)


def g2(x2p, geom: TwoCellGeometry):
    """Interference-to-signal distance ratio of antenna 2 (to be maximized)."""
    x2p = np.asarray(x2p, dtype=float)
    return ((x2p - geom.x1) ** 2 + geom.b1) / ((x2p - geom.x2) ** 2 + geom.b2)


def coupling_ratio(x1p, x2p, geom: TwoCellGeometry):
    """Interference coupling ``f`` for antennas at ``x1p`` and ``x2p``."""
    x1p = np.asarray(x1p, dtype=float)
    x2p = np.asarray(x2p, dtype=float)
    num = ((x1p - geom.x1) ** 2 + geom.b1) * ((x2p - geom.x2) ** 2 + geom.b2)
    den = ((x2p - geom.x1) ** 2 + geom.b1) * ((x1p - geom.x2) ** 2 + geom.b2)
    return num / den


def feasibility_bound(f):
    """Largest common target rate (bits/s/Hz) the coupling ``f`` can support."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise ValueError("coupling ratio must be positive")
    out = np.log2(1.0 + 1.0 / np.sqrt(f))
    return float(out) if out.ndim == 0 else out


def stationary_points(geom: TwoCellGeometry) -> StationaryPoints:
    """Real roots of ``gamma1 x^2 + gamma2 x + gamma3 = 0``, where g1' and g2' vanish."""
    x1, x2 = geom.x1, geom.x2
    gamma1 = x2 - x1
    gamma2 = -(x2 - x1) * (x1 + x2) + (geom.y1**2 - geom.y2**2)
    gamma3 = (x2 - x1) * x1 * x2 - geom.b1 * x2 + geom.b2 * x1
    if gamma1 == 0:
        roots = () if gamma2 == 0 else (-gamma3 / gamma2,)
        return StationaryPoints(gamma1, gamma2, gamma3, roots)
    disc = gamma2**2 - 4 * gamma1 * gamma3
    if disc < 0:
        return StationaryPoints(gamma1, gamma2, gamma3, ())
    # Cancellation-free form of the quadratic formula.
    q = -0.5 * (gamma2 + math.copysign(math.sqrt(disc), gamma2))
    if q == 0:
        roots = (0.0,)
    else:
        roots = tuple(sorted({q / gamma1, gamma3 / q}))
    return StationaryPoints(gamma1, gamma2, gamma3, roots)


def _best_candidate(objective, candidates, user_x):
    values = [float(objective(c)) for c in candidates]
    top = max(values)
    tied = [c for c, v in zip(candidates, values) if v == top]
    return min(tied, key=lambda c: abs(c - user_x))


def suboptimal_placement(geom: TwoCellGeometry, d_l: float):
    """Decoupled placement minimizing the coupling ``f``.

    Antenna 1 maximizes :func:`g1` over ``[-d_l/2, x1]`` and antenna 2
    maximizes :func:`g2` over ``[x2, d_l/2]``, each by comparing the interval
    ends with the stationary points that fall inside.
    """
    roots = stationary_points(geom).roots
    lo, hi = -d_l / 2, d_l / 2
    cand1 = [lo, geom.x1] + [r for r in roots if lo <= r <= geom.x1]
    cand2 = [geom.x2, hi] + [r for r in roots if geom.x2 <= r <= hi]
    x1p = _best_candidate(lambda x: g1(x, geom), cand1, geom.x1)
    x2p = _best_candidate(lambda x: g2(x, geom), cand2, geom.x2)
    return x1p, x2p


def _grid(lo, hi, step):
    n = int(round((hi - lo) / step)) + 1
    return np.linspace(lo, hi, n)


def grid_oracle(users, layout: CellLayout, config: ScenarioConfig, step: float = 0.01) -> OracleResult:
    """Exhaustive search over a ``step``-spaced grid on both waveguides.

    Every grid point is accounted for: points are either evaluated with the
    closed-form two-cell powers or excluded by a lower bound on their total
    power that already exceeds a grid point's evaluated total.

    ``users`` is an (2, 3) array of positions or a :class:`TwoCellGeometry`.
    """
    if step <= 0:
        raise ValueError("grid step must be positive")
    check_two_cell(layout)
    if isinstance(users, TwoCellGeometry):
        users = users.user_positions(layout)
    users = np.asarray(users, dtype=float)
    eps = rate_to_epsilon(config.target_rate)
    noise = config.noise_power

    xs1 = _grid(*layout.x_bounds[0], step)
    xs2 = _grid(*layout.x_bounds[1], step)
    # a[k, j] gain from antenna k at grid point j to each user.
    ga = gain_matrix(layout.antenna_positions(np.column_stack([xs1, np.full_like(xs1, xs2[0])])), users, config.carrier_freq)
    gb = gain_matrix(layout.antenna_positions(np.column_stack([np.full_like(xs2, xs1[0]), xs2])), users, config.carrier_freq)
    g11, g12 = ga[:, 0, 0], ga[:, 0, 1]
    g22, g21 = gb[:, 1, 1], gb[:, 1, 0]
    r1 = g12 / g11
    r2 = g21 / g22
    if eps**2 * r1.min() * r2.min() >= 1:
        return OracleResult(np.array([np.nan, np.nan]), PowerSolution.infeasible())

    def totals(i, j):
        return two_cell_totals(g11[i][:, None], g22[j][None, :], g12[i][:, None], g21[j][None, :], eps, noise)[2]

    # Incumbent from a coarse sub-grid plus the minimum-coupling point.
    i0, j0 = int(np.argmin(r1)), int(np.argmin(r2))
    stride = max(1, min(len(xs1), len(xs2)) // 400)
    ci = np.union1d(np.arange(0, len(xs1), stride), [i0])
    cj = np.union1d(np.arange(0, len(xs2), stride), [j0])
    incumbent = totals(ci, cj).min()

    # total >= eps P_N (1/g11 + 1/g22) / (1 - eps^2 r1 r2) on every feasible point.
    with np.errstate(divide="ignore"):
        slack1 = np.where(eps**2 * r1 * r2.min() < 1, 1 - eps**2 * r1 * r2.min(), 0.0)
        slack2 = np.where(eps**2 * r2 * r1.min() < 1, 1 - eps**2 * r2 * r1.min(), 0.0)
        lb_rows = eps * noise * (1 / g11 + (1 / g22).min()) / slack1
        lb_cols = eps * noise * ((1 / g11).min() + 1 / g22) / slack2
    rows = np.flatnonzero(lb_rows <= incumbent)
    cols = np.flatnonzero(lb_cols <= incumbent)

    best = (np.inf, -1, -1)
    chunk = max(1, 2_000_000 // max(len(cols), 1))
    for start in range(0, len(rows), chunk):
        ri = rows[start:start + chunk]
        block = totals(ri, cols)
        k = int(np.argmin(block))
        value = block.flat[k]
        if value < best[0]:
            best = (value, ri[k // len(cols)], cols[k % len(cols)])
    _, i, j = best
    placement = np.array([xs1[i], xs2[j]])
    gains = gain_matrix(layout.antenna_positions(placement), users, config.carrier_freq)
    return OracleResult(placement, two_cell_powers(gains, config.target_rate, noise))


def suboptimal_solution(users, layout: CellLayout, config: ScenarioConfig) -> OracleResult:
    """Powers at the decoupled closed-form placement."""
    geom = TwoCellGeometry.from_users(users, layout)
    d_l = layout.x_bounds[1, 1] - layout.x_bounds[0, 0]
    placement = np.array(suboptimal_placement(geom, d_l))
    gains = gain_matrix(layout.antenna_positions(placement), users, config.carrier_freq)
    return OracleResult(placement, two_cell_powers(gains, config.target_rate, config.noise_power))
