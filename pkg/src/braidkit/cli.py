"""Command-line entry point for every pipeline in the package.

Subcommands::

    braid      word algebra: reduce / tc / perm / equiv
    extract    read the crossing pattern of a trajectory CSV
    simulate   run closed-loop intersection experiment batches
    analyze    dataset pipeline over a directory of scene CSVs
    enumerate  outcome-space counters

As a convenience the braid actions also work at top level, so the
installed ``braid`` script accepts both ``braid tc "n=3: -1 2"`` and
``braid braid tc "n=3: -1 2"``.

All randomness flows through ``--seed`` (fixed default, never
time-derived); ``--quiet`` keeps stdout data-only.  Invalid flags or
unparseable inputs exit nonzero before any output file is touched.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiments
from .dataset import (
    EpisodeConfig,
    analyze_directory,
    write_braid_frequency_csv,
    write_scene_report_csv,
    write_tc_cdf_csv,
)
from .loops import topological_complexity
from .trajectories import align, extract_braid, load_trajectories_csv
from .words import (
    format_word,
    is_equivalent,
    parse_word,
    permutation_of,
    relation_simplify,
)

__all__ = ["main"]

_BRAID_ACTIONS = ("reduce", "tc", "perm", "equiv")


def _cmd_braid(args) -> int:
    w = parse_word(args.word)
    if args.action == "equiv":
        if args.other is None:
            raise ValueError("equiv needs two words")
        print("true" if is_equivalent(w, parse_word(args.other)) else "false")
    elif args.action == "reduce":
        print(format_word(relation_simplify(w)))
    elif args.action == "tc":
        print(topological_complexity(w).tc)
    else:  # perm
        print(" ".join(str(v) for v in permutation_of(w)))
    return 0


def _cmd_extract(args) -> int:
    trajs = load_trajectories_csv(args.csv)
    braid, _ = extract_braid(align(trajs))
    print(format_word(braid))
    return 0


def _cmd_enumerate(args) -> int:
    print(f"braid_bound={experiments.braid_outcome_bound(args.n)}")
    given = (args.paths, args.controls, args.steps)
    if any(v is not None for v in given):
        if None in given:
            raise ValueError("--paths, --controls and --steps go together")
        count = experiments.cartesian_trajectory_count(
            args.paths, args.controls, args.n, args.steps
        )
        print(f"trajectory_count={count}")
    return 0


def _cmd_simulate(args) -> int:
    conditions = tuple(c.strip() for c in args.conditions.split(",") if c.strip())
    for c in conditions:
        if c not in ("C1", "C2", "C3", "C4", "C5"):
            raise ValueError(f"unknown condition {c!r}")
    if args.scenario not in experiments.SCENARIO_ARMS:
        raise ValueError(
            f"unknown scenario {args.scenario!r}; expected one of S1, S2, S3"
        )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    results = experiments.run_batch(
        scenarios=(args.scenario,),
        conditions=conditions,
        master_seed=args.seed,
        heterogeneous=args.heterogeneous,
        jobs=args.jobs,
    )
    summaries = experiments.aggregate(results)
    with (out / "results.csv").open("w") as fp:
        experiments.write_results_csv(results, fp)
    with (out / "summary.json").open("w") as fp:
        experiments.write_summary_json(summaries, fp)
    with (out / "plot_data.csv").open("w") as fp:
        experiments.write_plot_data_csv(summaries, fp)
    if not args.quiet:
        for s in summaries:
            print(
                f"{s.scenario} {s.condition}: n={s.n} "
                f"collision_frequency={s.collision_frequency:.4f} "
                f"(sd {s.collision_sd:.4f}) "
                f"max_time_median={s.max_time_median:.2f}s"
            )
    return 0


def _episode_config(args) -> EpisodeConfig:
    values = {}
    if args.config is not None:
        with open(args.config) as fp:
            loaded = json.load(fp)
        allowed = {
            "episode_duration",
            "min_pairwise_distance",
            "stationary_speed_threshold",
            "stride",
        }
        unknown = set(loaded) - allowed
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    for key, flag in (
        ("episode_duration", args.episode_duration),
        ("min_pairwise_distance", args.min_distance),
        ("stationary_speed_threshold", args.stationary_threshold),
        ("stride", args.stride),
    ):
        if flag is not None:
            values[key] = flag
    return EpisodeConfig(**values)


def _cmd_analyze(args) -> int:
    config = _episode_config(args)
    analyses = analyze_directory(args.directory, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reports = [a.report for a in analyses]
    with (out / "scene_report.csv").open("w") as fp:
        write_scene_report_csv(reports, fp)
    with (out / "tc_cdf.csv").open("w") as fp:
        write_tc_cdf_csv(reports, fp)
    with (out / "braid_frequency.csv").open("w") as fp:
        write_braid_frequency_csv(reports, fp)

    rejected_agents = False
    for a in analyses:
        for line, reason in a.ingest.rejected_rows:
            print(f"{a.scene}: line {line}: {reason}", file=sys.stderr)
        for agent, reason in a.ingest.rejected_agents:
            rejected_agents = True
            print(f"{a.scene}: agent {agent!r} rejected: {reason}", file=sys.stderr)
    if not args.quiet:
        for r in reports:
            print(
                f"{r.scene}: episodes={r.episodes} skipped={r.skipped} "
                f"unique_braids={r.unique_braids} tc_mean={r.tc_mean:.3f}"
            )
    return 1 if rejected_agents and not args.lenient else 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="braid",
        description="Braids of multiagent trajectories: algebra, extraction, "
        "simulation, dataset statistics, and counters.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--seed",
        type=int,
        default=experiments.DEFAULT_MASTER_SEED,
        help="master seed for all stochastic behavior",
    )
    common.add_argument("--jobs", type=int, default=1, help="worker parallelism")
    common.add_argument("--quiet", action="store_true", help="data-only stdout")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("braid", help="word algebra on braid text forms", parents=[common])
    p.add_argument("action", choices=_BRAID_ACTIONS)
    p.add_argument("word", help='braid text form, e.g. "n=3: -1 2"')
    p.add_argument("other", nargs="?", help="second word (equiv only)")
    p.set_defaults(func=_cmd_braid)

    p = sub.add_parser("extract", help="crossing pattern of a trajectory CSV", parents=[common])
    p.add_argument("csv", help="CSV with header agent_id,t,x,y")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("simulate", help="closed-loop intersection experiments", parents=[common])
    p.add_argument("--scenario", required=True, help="S1, S2, or S3")
    p.add_argument(
        "--conditions",
        default="C1,C2,C3,C4,C5",
        help="comma-separated condition tags (default: all five)",
    )
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument(
        "--heterogeneous",
        action="store_true",
        help="agent 1 ignores everyone; condition labels get a prime",
    )
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("analyze", help="dataset pipeline over scene CSVs", parents=[common])
    p.add_argument("directory", help="directory of per-scene trajectory CSVs")
    p.add_argument("--config", help="JSON file of episode settings")
    p.add_argument("--episode-duration", type=float, default=None)
    p.add_argument("--min-distance", type=float, default=None)
    p.add_argument("--stationary-threshold", type=float, default=None)
    p.add_argument("--stride", type=float, default=None)
    p.add_argument("--out", default=".", help="report directory (default: cwd)")
    p.add_argument(
        "--lenient",
        action="store_true",
        help="exit 0 even when whole agents were rejected at ingestion",
    )
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("enumerate", help="outcome-space counters", parents=[common])
    p.add_argument("--n", type=int, required=True, help="number of agents")
    p.add_argument("--paths", type=int, default=None, help="route candidates per agent")
    p.add_argument("--controls", type=int, default=None, help="control choices per step")
    p.add_argument("--steps", type=int, default=None, help="horizon steps")
    p.set_defaults(func=_cmd_enumerate)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] in _BRAID_ACTIONS:
        argv.insert(0, "braid")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
