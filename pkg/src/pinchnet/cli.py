"""Command-line entry point: ``pinchnet run | sweep | oracle``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .crossentropy import CEParams
from .experiment import POLICIES, SCHEMES, ExperimentSpec, emit_results, run_experiment, run_sweep
from .model import ConfigError, build_layout, read_config_file, sample_users, scenario_from_mapping, watts_to_dbm
from .twocell import TwoCellGeometry, grid_oracle, suboptimal_solution

EXIT_CONFIG = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _rates(text: str):
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad rate list {text!r}") from exc


def _load(path):
    values = read_config_file(path) if path else {}
    return scenario_from_mapping(values), CEParams.from_mapping(values)


def _common(p):
    p.add_argument("--config", help="scenario config file (key = value, or .json)")
    p.add_argument("--policy", default="pmax-substitute", choices=POLICIES)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rates", type=_rates, default=(0.2, 0.4, 0.6, 0.8, 1.0), help="comma-separated target rates")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--users", default="uniform", choices=("uniform", "clustered"), help="user placement model")
    p.add_argument("--step", type=float, default=0.01, help="grid step of the exhaustive scheme (m)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pinchnet", description="Multi-cell pinching-antenna power minimization.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one scheme over a rate sweep")
    _common(run)
    run.add_argument("--scheme", default="ce", choices=SCHEMES)

    sweep = sub.add_parser("sweep", help="run every applicable scheme on the same trials")
    _common(sweep)

    oracle = sub.add_parser("oracle", help="two-cell exhaustive grid search for one user drop")
    oracle.add_argument("--config")
    oracle.add_argument("--step", type=float, default=0.01)
    oracle.add_argument("--seed", type=int, default=0, help="seed for a clustered user drop")
    oracle.add_argument("--user-pos", help="explicit users as 'x1,y1,x2,y2' (meters)")
    oracle.add_argument("--rate", type=float, help="target rate; defaults to the config value")
    return parser


def _spec(args, scheme):
    scenario, ce = _load(args.config)
    return ExperimentSpec(
        scheme=scheme, policy=args.policy, n_trials=args.trials, seed=args.seed, rates=args.rates,
        scenario=scenario, ce=ce, grid_step=args.step, user_model=args.users, workers=args.workers,
    )


def _oracle(args):
    scenario, _ = _load(args.config)
    if args.rate is not None:
        scenario = scenario.with_rate(args.rate)
    layout = build_layout(scenario)
    if args.user_pos:
        try:
            x1, y1, x2, y2 = (float(v) for v in args.user_pos.split(","))
        except ValueError as exc:
            raise ConfigError(f"--user-pos needs four numbers, got {args.user_pos!r}") from exc
        users = TwoCellGeometry(x1, y1, x2, y2, scenario.antenna_height).user_positions(layout)
    else:
        users = sample_users(scenario, layout, np.random.default_rng(args.seed), "clustered")
    exhaustive = grid_oracle(users, layout, scenario, args.step)
    subopt = suboptimal_solution(users, layout, scenario)

    def entry(res):
        sol = res.solution
        return {
            "feasible": sol.feasible,
            "placement": [float(x) for x in res.placement] if sol.feasible else None,
            "total_power_w": sol.total if sol.feasible else None,
            "total_power_dbm": watts_to_dbm(sol.total) if sol.feasible else None,
        }

    print(json.dumps({
        "users": users[:, :2].tolist(),
        "target_rate": scenario.target_rate,
        "step": args.step,
        "exhaustive": entry(exhaustive),
        "suboptimal": entry(subopt),
    }, indent=2))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        if args.command == "oracle":
            _oracle(args)
            return 0
        if args.command == "run":
            result = run_experiment(_spec(args, args.scheme))
        else:
            result = run_sweep(_spec(args, "ce"))
        for path in emit_results(result, args.out):
            print(path)
    except ConfigError as exc:
        print(f"pinchnet: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"pinchnet: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
