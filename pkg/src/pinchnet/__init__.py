"""Multi-cell pinching-antenna downlink: minimum-power allocation and antenna placement."""

from .crossentropy import CEParams, CEResult, CEState, boundary_project, ce_optimize, elite_update, smooth_update
from .experiment import (
    ExperimentSpec,
    TrialRecord,
    conventional_scheme,
    emit_results,
    fixed_choice_scheme,
    run_experiment,
    run_sweep,
    summarize,
)
from .model import (
    CellLayout,
    ConfigError,
    ScenarioConfig,
    achievable_rate,
    achievable_rates,
    build_layout,
    channel_gain,
    dbm_to_watts,
    gain_matrix,
    load_config,
    sample_users,
    watts_to_dbm,
)
from .power import (
    InterferenceSystem,
    PowerSolution,
    build_system,
    min_power,
    solve_min_power,
    two_cell_powers,
    verify_rates,
)
from .twocell import (
    StationaryPoints,
    TwoCellGeometry,
    coupling_ratio,
    feasibility_bound,
    grid_oracle,
    stationary_points,
    suboptimal_placement,
)

__version__ = "0.1.0"
