"""Command-line front end.

Subcommands:
    simulate      run a sweep from a config file, write CSV/summary/figures
    gen-scenario  draw one random scenario and save it as JSON
    pathloss      dump the per-link loss matrix of a scenario as CSV
    verify        check a saved matching for blocking pairs
    report        render figures from an existing results CSV

Exit codes: 0 success (for verify: stable), 1 verify found blocking pairs,
2 bad config or input file contents, 3 I/O failure, 4 internal stability
assertion failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .channel import ChannelParams, build_path_loss_matrix
from .errors import ConfigError, StabilityError
from .geo import load_scenario, save_scenario
from .harness import (
    RESULTS_FILENAME,
    channel_seed_for_scenario,
    load_channel_file,
    load_experiment_config,
    load_matching,
    load_scenario_config,
    run_experiment,
)
from .matching import find_blocking_pairs
from .preferences import DEFAULT_USER_WEIGHT_DB_PER_USER, build_preferences
from .report import render_report
from .scenario import generate_scenario

EXIT_OK = 0
EXIT_UNSTABLE = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_STABILITY_ASSERT = 4


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = load_experiment_config(args.config)
    if args.out is not None:
        config = replace(config, output_path=args.out)
    if args.trials is not None:
        config = replace(config, trials_per_point=args.trials)
    if args.seed is not None:
        config = replace(config, master_seed=args.seed)
    if args.timings:
        config = replace(config, record_runtimes=True)
    out_dir = Path(config.output_path)
    if args.trace:
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "trace.log", "w", encoding="utf-8", newline="\n") as fh:
            run_experiment(config, on_event=lambda line: fh.write(line + "\n"),
                           progress=sys.stderr)
    else:
        run_experiment(config, progress=sys.stderr)
    if args.plots:
        render_report(str(out_dir / RESULTS_FILENAME), str(out_dir))
    print(f"wrote {out_dir / RESULTS_FILENAME}")
    return EXIT_OK


def _cmd_gen_scenario(args: argparse.Namespace) -> int:
    config = load_scenario_config(args.config)
    scenario = generate_scenario(config)
    save_scenario(scenario, args.out)
    print(f"wrote {args.out} ({scenario.n_haps} HAPs, {scenario.m_uavs} UAVs)")
    return EXIT_OK


def _channel_rng_for(scenario_seed: int) -> np.random.Generator:
    return np.random.default_rng(channel_seed_for_scenario(scenario_seed))


def _cmd_pathloss(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    params = load_channel_file(args.params) if args.params else ChannelParams()
    matrix = build_path_loss_matrix(scenario, params, _channel_rng_for(scenario.seed))
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("hap_id,uav_id,loss_db\n")
        for h in range(matrix.n_haps):
            for u in range(matrix.m_uavs):
                fh.write(f"{h},{u},{matrix.loss_db[h, u]:.6f}\n")
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    matching = load_matching(args.matching)
    if matching.n_haps != scenario.n_haps or matching.m_uavs != scenario.m_uavs:
        raise ConfigError(
            f"matching is for {matching.n_haps} HAPs x {matching.m_uavs} UAVs "
            f"but scenario has {scenario.n_haps} x {scenario.m_uavs}"
        )
    params = load_channel_file(args.params) if args.params else ChannelParams()
    capacities = [h.capacity for h in scenario.haps]
    loads = matching.loads()
    over = [h for h in range(scenario.n_haps) if loads[h] > capacities[h]]
    if over:
        raise ConfigError(f"matching overfills HAP(s) {over}")
    matrix = build_path_loss_matrix(scenario, params, _channel_rng_for(scenario.seed))
    profile = build_preferences(matrix, [u.served_users for u in scenario.uavs],
                                args.user_weight)
    blocking = find_blocking_pairs(matching, profile, capacities)
    if not blocking:
        print("stable: no blocking pairs")
        return EXIT_OK
    print(f"unstable: {len(blocking)} blocking pair(s)")
    for pair in blocking[:20]:
        reasons = "+".join(r.value for r in pair.reasons)
        print(f"  hap {pair.hap_id} / uav {pair.uav_id} ({reasons})")
    if len(blocking) > 20:
        print(f"  ... and {len(blocking) - 20} more")
    return EXIT_UNSTABLE


def _cmd_report(args: argparse.Namespace) -> int:
    out_dir = args.out if args.out is not None else str(Path(args.results).parent)
    written = render_report(args.results, out_dir)
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hapmatch",
        description="HAP-to-UAV assignment simulator: stable matching under "
                    "link-budget preferences.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a Monte Carlo sweep from a config file")
    p.add_argument("--config", required=True, help="experiment config (JSON)")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--trials", type=int, help="trials per sweep point (override)")
    p.add_argument("--seed", type=int, help="master seed (override)")
    p.add_argument("--trace", action="store_true",
                   help="write matching events to trace.log (large)")
    p.add_argument("--plots", action="store_true",
                   help="render figures next to the results CSV")
    p.add_argument("--timings", action="store_true",
                   help="record wall-clock runtimes in the CSV (breaks "
                        "byte-reproducibility of the output)")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("gen-scenario", help="draw one scenario and save it")
    p.add_argument("--config", required=True,
                   help="scenario config (JSON, bare or a 'scenario' section)")
    p.add_argument("--out", required=True, help="scenario output file (JSON)")
    p.set_defaults(fn=_cmd_gen_scenario)

    p = sub.add_parser("pathloss", help="dump a scenario's loss matrix as CSV")
    p.add_argument("--scenario", required=True, help="scenario file (JSON)")
    p.add_argument("--params", help="channel params (JSON); defaults if omitted")
    p.add_argument("--out", required=True, help="CSV output file")
    p.set_defaults(fn=_cmd_pathloss)

    p = sub.add_parser("verify", help="check a matching for blocking pairs")
    p.add_argument("--scenario", required=True, help="scenario file (JSON)")
    p.add_argument("--matching", required=True, help="matching file (JSON)")
    p.add_argument("--params", help="channel params (JSON); defaults if omitted")
    p.add_argument("--user-weight", type=float,
                   default=DEFAULT_USER_WEIGHT_DB_PER_USER,
                   help="served-user weight in the HAP ranking key")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("report", help="render figures from a results CSV")
    p.add_argument("--results", required=True, help="results CSV from simulate")
    p.add_argument("--out", help="figure directory (default: next to the CSV)")
    p.set_defaults(fn=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StabilityError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_STABILITY_ASSERT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
