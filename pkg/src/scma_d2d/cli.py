"""Command-line entry point for the experiment harness.

Subcommands: convergence, sweep-cell, sweep-d2d, bounds, compare.
Exit codes: 0 success, 2 configuration error, 3 every seed infeasible.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .channel import ConfigError, ScenarioConfig, parse_config
from .experiments import (
    DEFAULT_SWEEP_DBM,
    ExperimentSpec,
    run_experiment,
)

_SUBCOMMAND_KINDS = {
    "convergence": "convergence",
    "sweep-cell": "sweep_cellular_cap",
    "sweep-d2d": "sweep_d2d_cap",
    "bounds": "bound_validation",
    "compare": "baseline_comparison",
}

_DEFAULT_SEEDS = {
    "convergence": 1,
    "sweep_cellular_cap": 50,
    "sweep_d2d_cap": 50,
    "bound_validation": 20,
    "baseline_comparison": 50,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scma-d2d",
        description="Sum-rate experiments for an SCMA uplink sharing "
                    "subcarriers with D2D pairs.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, kind in _SUBCOMMAND_KINDS.items():
        p = sub.add_parser(name, help=f"run the {kind} experiment")
        p.add_argument("--config", help="scenario file (key = value lines); "
                                        "defaults apply for missing keys")
        p.add_argument("--seeds", type=int, default=None,
                       help="number of seeds (starting at the scenario seed)")
        p.add_argument("--out", default=f"{kind}.csv", help="output CSV path")
        p.add_argument("--tmax", type=int, default=10,
                       help="iteration cap for the power allocator")
        p.add_argument("--jd", type=int, default=None,
                       help="override the number of D2D pairs")
        p.add_argument("--trace", action="store_true",
                       help="emit per-pass solver trace CSVs")
        if name.startswith("sweep"):
            p.add_argument("--sweep-dbm", default=None,
                           help="comma-separated cap values in dBm "
                                "(default 24,26,28,30,32)")
    return parser


def _load_scenario(args) -> ScenarioConfig:
    cfg = parse_config(args.config) if args.config else ScenarioConfig()
    if args.jd is not None:
        cfg = dataclasses.replace(cfg, J_D=args.jd)
    cfg.validate()
    return cfg


def _sweep_values(args):
    raw = getattr(args, "sweep_dbm", None)
    if raw is None:
        return DEFAULT_SWEEP_DBM
    try:
        values = tuple(float(v) for v in raw.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"bad --sweep-dbm list: {raw!r}") from None
    if not values:
        raise ConfigError("--sweep-dbm must name at least one value")
    return values


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    kind = _SUBCOMMAND_KINDS[args.command]
    try:
        scenario = _load_scenario(args)
        spec = ExperimentSpec(
            kind=kind,
            scenario=scenario,
            output_path=args.out,
            num_seeds=args.seeds if args.seeds is not None else _DEFAULT_SEEDS[kind],
            sweep_values_dbm=_sweep_values(args) if kind.startswith("sweep") else (),
            t_max=args.tmax,
            trace_solver=args.trace,
        )
        spec.validate()
    except (ConfigError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2

    result = run_experiment(spec)
    _report(kind, result)
    if result.all_infeasible:
        print("error: every seed produced an infeasible scenario", file=sys.stderr)
        return 3
    return 0


def _report(kind, result):
    if kind == "convergence":
        print(f"wrote {result.output_path}: {len(result.traces)} trace(s), "
              f"{len(result.infeasible_seeds)} infeasible seed(s)")
        for seed, trace in result.traces.items():
            tag = "converged" if trace.converged else "cap reached"
            print(f"  seed {seed}: {trace.iterations_used} pass(es), {tag}, "
                  f"final sum rate {trace.final.sum_rate_bits:.4f}")
    elif kind.startswith("sweep"):
        print(f"wrote {result.detail_path} and {result.summary_path}")
        for row in result.rows:
            print(f"  {row.sweep_value_dbm:g} dBm: proposed "
                  f"{row.mean_sum_rate_proposed:.4f}, random "
                  f"{row.mean_sum_rate_random:.4f} "
                  f"({row.num_seeds_used} seeds, "
                  f"{row.num_infeasible_draws} infeasible)")
    elif kind == "bound_validation":
        print(f"wrote {result.output_path}: {result.num_rows} rows, "
              f"{result.num_violations} violation(s)")
    else:
        print(f"wrote {result.output_path}: proposed {result.mean_proposed:.4f} "
              f"vs random {result.mean_random:.4f} over "
              f"{result.num_seeds_used} seeds "
              f"({result.num_infeasible} infeasible)")


if __name__ == "__main__":
    sys.exit(main())
