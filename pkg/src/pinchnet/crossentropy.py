"""Cross-entropy search over pinching-antenna x-coordinates.

Each iteration draws Gaussian candidates around the current mean, clamps
them onto the waveguides, scores them by the minimum total transmit power
and refits the sampling distribution to the lowest-power (elite) candidates
with exponential smoothing. Infeasible candidates score ``inf``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import CellLayout, ConfigError, ScenarioConfig, gain_matrix
from .power import PowerSolution, rate_to_epsilon, solve_batch


@dataclass(frozen=True)
class CEParams:
    """Cross-entropy hyperparameters.

    Attributes
    ----------
    n_samples : int
        Candidates drawn per iteration.
    n_iters : int
        Number of iterations.
    n_elite : int
        Size of the elite set used to refit the distribution.
    smoothing : float
        Weight of the previous mean/variance in the update, in ``[0, 1)``.
    noise_floor : float
        Variance (m^2) added after every update.
    literal_denominator : bool
        Divide elite statistics by ``n_samples`` instead of ``n_elite``.
    """

    n_samples: int = 1000
    n_iters: int = 10
    n_elite: int = 10
    smoothing: float = 0.7
    noise_floor: float = 0.1
    literal_denominator: bool = False

    def __post_init__(self):
        if min(self.n_samples, self.n_iters, self.n_elite) < 1:
            raise ConfigError("n_samples, n_iters and n_elite must be positive")
        if self.n_elite > self.n_samples:
            raise ConfigError(f"n_elite ({self.n_elite}) exceeds n_samples ({self.n_samples})")
        if not 0.0 <= self.smoothing < 1.0:
            raise ConfigError(f"smoothing must lie in [0, 1), got {self.smoothing}")
        if self.noise_floor < 0:
            raise ConfigError(f"noise_floor must be nonnegative, got {self.noise_floor}")

    @classmethod
    def from_mapping(cls, values: dict) -> "CEParams":
        keys = {"n_ce": "n_samples", "n_max": "n_iters", "n_best": "n_elite", "alpha": "smoothing", "delta": "noise_floor"}
        return cls(**{attr: values[key] for key, attr in keys.items() if key in values})


@dataclass(frozen=True)
class CEState:
    mean: np.ndarray
    variance: np.ndarray
    best_placement: np.ndarray
    best_total: float


@dataclass(frozen=True)
class CEResult:
    placement: np.ndarray
    solution: PowerSolution
    history: list = field(default_factory=list, repr=False)

    def __iter__(self):
        return iter((self.placement, self.solution))


def boundary_project(samples, layout: CellLayout) -> np.ndarray:
    """Clamp every coordinate onto its waveguide span."""
    return np.clip(samples, layout.x_bounds[:, 0], layout.x_bounds[:, 1])


def elite_update(samples, scores, n_elite: int, denominator: int | None = None):
    """Mean and variance of the ``n_elite`` lowest-score samples.

    Only finite scores are eligible. Returns ``None`` when no score is
    finite, leaving the caller's distribution unchanged. ``denominator``
    overrides the elite count in both averages.
    """
    samples = np.asarray(samples, dtype=float)
    scores = np.asarray(scores, dtype=float)
    finite = np.flatnonzero(np.isfinite(scores))
    if finite.size == 0:
        return None
    order = finite[np.argsort(scores[finite], kind="stable")]
    elite = samples[order[:n_elite]]
    denom = len(elite) if denominator is None else denominator
    mean = elite.sum(axis=0) / denom
    variance = ((elite - mean) ** 2).sum(axis=0) / denom
    return mean, variance


def smooth_update(state: CEState, new_mean, new_variance, params: CEParams) -> CEState:
    alpha = params.smoothing
    mean = alpha * state.mean + (1 - alpha) * np.asarray(new_mean)
    variance = alpha * state.variance + (1 - alpha) * np.asarray(new_variance) + params.noise_floor
    return CEState(mean, variance, state.best_placement, state.best_total)


def placement_totals(x_pin, layout: CellLayout, users, config: ScenarioConfig):
    """Total minimum power for each row of ``x_pin`` (``inf`` where infeasible)."""
    gains = gain_matrix(layout.antenna_positions(x_pin), users, config.carrier_freq)
    powers, totals = solve_batch(gains, rate_to_epsilon(config.target_rate), config.noise_power)
    return powers, totals


def ce_optimize(
    layout: CellLayout,
    users,
    config: ScenarioConfig,
    params: CEParams,
    rng: np.random.Generator,
) -> CEResult:
    """Minimize total transmit power over antenna x-coordinates.

    The search starts at the users' x-coordinates with standard deviation
    ``D_L / (2 n_col)`` per antenna; that starting point is scored alongside
    the first batch, so the result never loses to placing each antenna at
    its user's x. The best candidate seen in any iteration is returned.
    ``history`` holds the :class:`CEState` after every iteration.
    """
    users = np.asarray(users, dtype=float)
    m = layout.n_cells
    cell_length = layout.x_bounds[0, 1] - layout.x_bounds[0, 0]
    x_bar = boundary_project(users[:, 0], layout)
    state = CEState(
        mean=users[:, 0].copy(),
        variance=np.full(m, (cell_length / 2) ** 2),
        best_placement=x_bar,
        best_total=np.inf,
    )
    best_powers = None
    denominator = params.n_samples if params.literal_denominator else None
    history = []
    for it in range(params.n_iters):
        draws = rng.normal(state.mean, np.sqrt(state.variance), size=(params.n_samples, m))
        candidates = boundary_project(draws, layout)
        if it == 0:
            candidates = np.vstack([x_bar, candidates])
        powers, totals = placement_totals(candidates, layout, users, config)
        k = int(np.argmin(totals))
        best_placement, best_total = state.best_placement, state.best_total
        if totals[k] < best_total:
            best_placement, best_total, best_powers = candidates[k], float(totals[k]), powers[k]
        state = CEState(state.mean, state.variance, best_placement, best_total)
        update = elite_update(candidates, totals, params.n_elite, denominator)
        if update is not None:
            state = smooth_update(state, *update, params)
        history.append(state)
    if best_powers is None:
        return CEResult(state.best_placement, PowerSolution.infeasible(), history)
    return CEResult(state.best_placement, PowerSolution(best_powers, True, state.best_total), history)
