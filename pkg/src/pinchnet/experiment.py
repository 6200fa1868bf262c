"""Monte Carlo harness: benchmark schemes, infeasibility policies, CSV/SVG output."""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .crossentropy import CEParams, ce_optimize
from .model import ConfigError, ScenarioConfig, build_layout, gain_matrix, sample_users, watts_to_dbm
from .power import PowerSolution, min_power
from .twocell import grid_oracle, suboptimal_solution

log = logging.getLogger(__name__)

SCHEMES = ("conventional", "fixed-choice", "ce", "suboptimal", "exhaustive")
TWO_CELL_SCHEMES = ("suboptimal", "exhaustive")
POLICIES = ("pmax-substitute", "discard")
SUMMARY_HEADER = ["scheme", "target_rate", "mean_power_dbm", "infeasibility_prob", "n_trials"]
TRIALS_HEADER = ["trial_id", "scheme", "target_rate", "feasible", "total_power_w", "total_power_dbm", "placement"]


def conventional_scheme(users, layout, config: ScenarioConfig) -> PowerSolution:
    """Powers with one fixed antenna above each cell center."""
    gains = gain_matrix(layout.conventional_positions(), users, config.carrier_freq)
    return min_power(gains, config.target_rate, config.noise_power)


def fixed_choice_placement(users, layout) -> np.ndarray:
    return np.clip(np.asarray(users)[:, 0], layout.x_bounds[:, 0], layout.x_bounds[:, 1])


def fixed_choice_scheme(users, layout, config: ScenarioConfig) -> PowerSolution:
    """Powers with each pinching antenna at its user's x-coordinate."""
    gains = gain_matrix(layout.antenna_positions(fixed_choice_placement(users, layout)), users, config.carrier_freq)
    return min_power(gains, config.target_rate, config.noise_power)


@dataclass(frozen=True)
class ExperimentSpec:
    scheme: str = "ce"
    policy: str = "pmax-substitute"
    n_trials: int = 100
    seed: int = 0
    rates: tuple = (0.2, 0.4, 0.6, 0.8, 1.0)
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    ce: CEParams = field(default_factory=CEParams)
    grid_step: float = 0.01
    user_model: str = "uniform"
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {', '.join(SCHEMES)}")
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown policy {self.policy!r}; choose from {', '.join(POLICIES)}")
        grid = (self.scenario.n_row, self.scenario.n_col)
        if self.scheme in TWO_CELL_SCHEMES and grid != (1, 2):
            raise ConfigError(f"scheme {self.scheme!r} needs a 1x2 grid, got {grid[0]}x{grid[1]}")
        if self.user_model == "clustered" and self.scenario.n_cells != 2:
            raise ConfigError("clustered users need exactly two cells")
        if self.user_model not in ("uniform", "clustered"):
            raise ConfigError(f"unknown user model {self.user_model!r}")
        if self.n_trials < 1 or self.workers < 1:
            raise ConfigError("n_trials and workers must be positive")
        if not self.rates or any(not r > 0 for r in self.rates):
            raise ConfigError("rate sweep must be a non-empty list of positive rates")
        if self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if self.grid_step <= 0:
            raise ConfigError("grid step must be positive")


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    scheme: str
    target_rate: float
    feasible: bool
    total_power: float
    placement: tuple | None = None


@dataclass(frozen=True)
class SummaryRow:
    scheme: str
    target_rate: float
    mean_power: float
    infeasibility_prob: float
    n_trials: int

    @property
    def mean_power_dbm(self) -> float:
        return watts_to_dbm(self.mean_power) if self.mean_power > 0 else float("nan")


@dataclass
class ExperimentResult:
    records: list
    summary: list
    policy: str


def trial_rng(seed: int, trial: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for one trial; stream 0 draws the users."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial, stream)))


def run_scheme(scheme: str, users, layout, config: ScenarioConfig, spec: ExperimentSpec, rng):
    """Return ``(placement or None, PowerSolution)`` for one scheme at ``config.target_rate``."""
    if scheme == "conventional":
        return None, conventional_scheme(users, layout, config)
    if scheme == "fixed-choice":
        return fixed_choice_placement(users, layout), fixed_choice_scheme(users, layout, config)
    if scheme == "ce":
        result = ce_optimize(layout, users, config, spec.ce, rng)
        return result.placement, result.solution
    if scheme == "suboptimal":
        result = suboptimal_solution(users, layout, config)
    else:
        result = grid_oracle(users, layout, config, spec.grid_step)
    return result.placement, result.solution


def run_trial(spec: ExperimentSpec, trial: int) -> list:
    """All records of one trial, one per target rate."""
    config = spec.scenario
    layout = build_layout(config)
    users = sample_users(config, layout, trial_rng(spec.seed, trial), spec.user_model)
    records = []
    for k, rate in enumerate(spec.rates):
        cfg = config.with_rate(rate)
        placement, sol = run_scheme(spec.scheme, users, layout, cfg, spec, trial_rng(spec.seed, trial, k + 1))
        if sol.feasible:
            total = sol.total
        else:
            total = config.p_max if spec.policy == "pmax-substitute" else float("nan")
        records.append(TrialRecord(
            trial_id=trial,
            scheme=spec.scheme,
            target_rate=rate,
            feasible=sol.feasible,
            total_power=total,
            placement=None if placement is None or not np.all(np.isfinite(placement))
            else tuple(float(x) for x in placement),
        ))
    return records


def _run_trials(spec: ExperimentSpec, trials) -> list:
    return [rec for t in trials for rec in run_trial(spec, t)]


def summarize(records, policy: str, p_max: float) -> list:
    """Mean power and infeasibility probability per (scheme, target rate).

    Under ``pmax-substitute`` every infeasible trial contributes ``p_max``;
    under ``discard`` infeasible trials are left out of the mean. Both count
    toward the infeasibility probability.
    """
    if policy not in POLICIES:
        raise ConfigError(f"unknown policy {policy!r}")
    groups = {}
    for rec in records:
        groups.setdefault((rec.scheme, rec.target_rate), []).append(rec)
    rows = []
    for (scheme, rate), recs in groups.items():
        feasible = np.array([r.feasible for r in recs])
        powers = np.array([r.total_power if r.feasible else p_max for r in recs])
        if policy == "discard":
            powers = powers[feasible]
        mean = float(powers.mean()) if powers.size else float("nan")
        rows.append(SummaryRow(scheme, rate, mean, float((~feasible).sum() / len(recs)), len(recs)))
    return rows


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Run ``spec.n_trials`` independent trials over the rate sweep."""
    trials = range(spec.n_trials)
    if spec.workers == 1:
        records = _run_trials(spec, trials)
    else:
        chunks = [list(trials[i::spec.workers]) for i in range(spec.workers)]
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            records = [rec for part in pool.map(_run_trials, [spec] * len(chunks), chunks) for rec in part]
    records.sort(key=lambda r: (r.trial_id, spec.rates.index(r.target_rate)))
    log.info("%s: %d trials x %d rates done", spec.scheme, spec.n_trials, len(spec.rates))
    return ExperimentResult(records, summarize(records, spec.policy, spec.scenario.p_max), spec.policy)


def applicable_schemes(scenario: ScenarioConfig) -> tuple:
    if (scenario.n_row, scenario.n_col) == (1, 2):
        return SCHEMES
    return tuple(s for s in SCHEMES if s not in TWO_CELL_SCHEMES)


def run_sweep(spec: ExperimentSpec, schemes=None) -> ExperimentResult:
    """Run several schemes on the same trials (users depend only on seed and trial)."""
    schemes = applicable_schemes(spec.scenario) if schemes is None else schemes
    records, summary = [], []
    for scheme in schemes:
        result = run_experiment(replace(spec, scheme=scheme))
        records += result.records
        summary += result.summary
    return ExperimentResult(records, summary, spec.policy)


def _fmt(x) -> str:
    return f"{x:.10g}"


def summary_csv(summary) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for row in summary:
        writer.writerow([row.scheme, _fmt(row.target_rate), _fmt(row.mean_power_dbm),
                         _fmt(row.infeasibility_prob), row.n_trials])
    return buf.getvalue()


def trials_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRIALS_HEADER)
    for rec in records:
        p = rec.total_power
        dbm = watts_to_dbm(p) if p > 0 else float("nan")
        placement = "" if rec.placement is None else ";".join(_fmt(x) for x in rec.placement)
        writer.writerow([rec.trial_id, rec.scheme, _fmt(rec.target_rate), int(rec.feasible),
                         _fmt(p), _fmt(dbm), placement])
    return buf.getvalue()


_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _svg_frame(width, height, title, body, x_label, y_label):
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="12">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>\n'
        f'<text x="{width / 2}" y="{height - 8}" text-anchor="middle">{x_label}</text>\n'
        f'<text x="14" y="{height / 2}" text-anchor="middle" transform="rotate(-90 14 {height / 2})">{y_label}</text>\n'
        f"{body}</svg>\n"
    )


def _axes(x0, y0, x1, y1, xticks, yticks, xmap, ymap):
    parts = [f'<line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}" stroke="black"/>',
             f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>']
    for t in xticks:
        parts.append(f'<text x="{xmap(t):.1f}" y="{y1 + 16}" text-anchor="middle">{t:g}</text>')
    for t in yticks:
        parts.append(f'<line x1="{x0}" y1="{ymap(t):.1f}" x2="{x1}" y2="{ymap(t):.1f}" stroke="#ddd"/>')
        parts.append(f'<text x="{x0 - 6}" y="{ymap(t) + 4:.1f}" text-anchor="end">{t:.3g}</text>')
    return "\n".join(parts) + "\n"


def power_svg(summary, title="Mean transmit power") -> str:
    """Line chart of mean power (dBm) against target rate, one series per scheme."""
    schemes = list(dict.fromkeys(r.scheme for r in summary))
    rates = sorted({r.target_rate for r in summary})
    values = [r.mean_power_dbm for r in summary if np.isfinite(r.mean_power_dbm)]
    lo, hi = (min(values), max(values)) if values else (0.0, 1.0)
    if hi - lo < 1e-9:
        lo, hi = lo - 1, hi + 1
    w, h, x0, y0, x1, y1 = 640, 420, 70, 40, 500, 380
    rmin, rmax = rates[0], rates[-1] if rates[-1] > rates[0] else rates[0] + 1

    def xmap(r):
        return x0 + (r - rmin) / (rmax - rmin) * (x1 - x0)

    def ymap(v):
        return y1 - (v - lo) / (hi - lo) * (y1 - y0)

    body = _axes(x0, y0, x1, y1, rates, np.linspace(lo, hi, 6), xmap, ymap)
    for k, scheme in enumerate(schemes):
        color = _PALETTE[k % len(_PALETTE)]
        pts = [(xmap(r.target_rate), ymap(r.mean_power_dbm)) for r in summary
               if r.scheme == scheme and np.isfinite(r.mean_power_dbm)]
        pts.sort()
        if pts:
            path = " ".join(f"{x:.1f},{y:.1f}" for x, y in pts)
            body += f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="2"/>\n'
            body += "".join(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="3" fill="{color}"/>\n' for x, y in pts)
        body += f'<text x="{x1 + 15}" y="{y0 + 18 * k + 10}" fill="{color}">{scheme}</text>\n'
    return _svg_frame(w, h, title, body, "target rate (bits/s/Hz)", "mean power (dBm)")


def infeasibility_svg(summary, title="Infeasibility probability") -> str:
    """Grouped bar chart of infeasibility probability per scheme and target rate."""
    schemes = list(dict.fromkeys(r.scheme for r in summary))
    rates = sorted({r.target_rate for r in summary})
    w, h, x0, y0, x1, y1 = 640, 420, 70, 40, 500, 380
    group = (x1 - x0) / len(rates)
    bar = group * 0.8 / max(len(schemes), 1)

    def ymap(v):
        return y1 - v * (y1 - y0)

    body = _axes(x0, y0, x1, y1, [], np.linspace(0, 1, 6), None, ymap)
    lookup = {(r.scheme, r.target_rate): r.infeasibility_prob for r in summary}
    for g, rate in enumerate(rates):
        gx = x0 + g * group + group * 0.1
        body += f'<text x="{x0 + (g + 0.5) * group:.1f}" y="{y1 + 16}" text-anchor="middle">{rate:g}</text>\n'
        for k, scheme in enumerate(schemes):
            p = lookup.get((scheme, rate))
            if p is None:
                continue
            color = _PALETTE[k % len(_PALETTE)]
            body += (f'<rect x="{gx + k * bar:.1f}" y="{ymap(p):.1f}" width="{bar:.1f}" '
                     f'height="{y1 - ymap(p):.1f}" fill="{color}"/>\n')
    for k, scheme in enumerate(schemes):
        body += f'<text x="{x1 + 15}" y="{y0 + 18 * k + 10}" fill="{_PALETTE[k % len(_PALETTE)]}">{scheme}</text>\n'
    return _svg_frame(w, h, title, body, "target rate (bits/s/Hz)", "infeasibility probability")


def _write(path: Path, text: str):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def emit_results(result: ExperimentResult, out_dir, formats=("csv", "svg")) -> list:
    """Write summary/detail CSVs and SVG charts into ``out_dir``; returns the paths."""
    if not result.records or not result.summary:
        raise ValueError("no results to emit")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    files = {}
    if "csv" in formats:
        files[f"summary_{result.policy}.csv"] = summary_csv(result.summary)
        files["trials.csv"] = trials_csv(result.records)
    if "svg" in formats:
        files[f"power_{result.policy}.svg"] = power_svg(result.summary)
        files["infeasibility.svg"] = infeasibility_svg(result.summary)
    paths = []
    for name, text in files.items():
        _write(out / name, text)
        paths.append(out / name)
    return paths
