"""Closed-loop intersection experiments: scenario grids, conditions, metrics.

Scenario S1 sends two straight crossers (south and east origins) through the
junction over a 12x12 grid of preferred speeds; S2 adds a north agent on a
5-speed grid per agent; S3 adds a west agent on a 3-speed grid.  Every
experiment runs all agents closed-loop — replanning each tick against the
latest snapshot — under one of the planner conditions, and records whether
the footprint rectangles ever overlapped, how long the slowest agent took,
and which crossing pattern was actually executed.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import json
import math
import random
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .planner import (
    KNOWN_PATH_CONDITIONS,
    TOPOLOGICAL_CONDITIONS,
    AgentView,
    PlannerConfig,
    SpeedModel,
    StepEnumeration,
    compute_belief,
    entropy,
    inattentive_policy,
    select_action,
)
from .trajectories import extract_braid
from .words import BraidWord, format_word, free_reduce
from .world import IntersectionMap, Rollout, check_collision, initial_state, step

__all__ = [
    "AggregateSummary",
    "ExperimentResult",
    "ScenarioSpec",
    "aggregate",
    "braid_outcome_bound",
    "cartesian_trajectory_count",
    "generate_scenarios",
    "run_batch",
    "run_experiment",
    "write_plot_data_csv",
    "write_results_csv",
    "write_summary_json",
]

DEFAULT_MASTER_SEED = 20260814
SCENARIO_ARMS = {
    "S1": ("south", "east"),
    "S2": ("south", "east", "north"),
    "S3": ("south", "east", "north", "west"),
}
SCENARIO_GRID_POINTS = {"S1": 12, "S2": 5, "S3": 3}
SPEED_RANGE = (5.0, 10.0)
P_HIGH_RANGE = (0.6, 0.8)


def _fanout(master_seed: int, *parts) -> int:
    """Stable 64-bit seed derived from the master seed and a label tuple."""
    text = f"{master_seed}|" + "|".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


@dataclass(frozen=True)
class ScenarioSpec:
    scenario: str
    agents: tuple[tuple[str, str, float], ...]  # (origin, maneuver, v_high)
    experiment_idx: int
    seed: int
    dt: float = 0.1
    horizon: float = 60.0

    def __post_init__(self) -> None:
        if not 2 <= len(self.agents) <= 4:
            raise ValueError(f"need 2-4 agents, got {len(self.agents)}")
        for origin, maneuver, v in self.agents:
            if not SPEED_RANGE[0] <= v <= SPEED_RANGE[1]:
                raise ValueError(f"speed {v} outside {SPEED_RANGE}")
        if self.dt <= 0 or self.horizon <= 0:
            raise ValueError("dt and horizon must be positive")


def generate_scenarios(
    which: str, master_seed: int = DEFAULT_MASTER_SEED
) -> list[ScenarioSpec]:
    """All speed-grid experiments of one scenario, in grid order."""
    if which not in SCENARIO_ARMS:
        raise ValueError(f"unknown scenario {which!r}; expected one of S1, S2, S3")
    arms = SCENARIO_ARMS[which]
    speeds = np.linspace(*SPEED_RANGE, SCENARIO_GRID_POINTS[which])
    specs = []
    for idx, combo in enumerate(itertools.product(speeds, repeat=len(arms))):
        specs.append(
            ScenarioSpec(
                scenario=which,
                agents=tuple(
                    (arm, "straight", float(v)) for arm, v in zip(arms, combo)
                ),
                experiment_idx=idx,
                seed=_fanout(master_seed, which, idx),
            )
        )
    return specs


@dataclass(frozen=True)
class ExperimentResult:
    scenario: str
    condition: str
    experiment_idx: int
    collided: bool
    max_time: float
    timed_out: bool
    executed_braid: BraidWord
    entropy_trace: tuple[tuple[float, ...], ...]
    belief_support: frozenset
    p_high: tuple[float, ...]
    v_high: tuple[float, ...]

    @property
    def executed_key(self) -> tuple[int, ...]:
        return tuple(self.executed_braid.letters)


def _extract_executed(ro: Rollout) -> BraidWord:
    """Braid of the executed run; symmetric ties are broken by a tiny shear."""
    last_error: Exception | None = None
    for jitter in (1e-7, 3e-7, 1e-6):
        try:
            braid, _ = extract_braid(ro.system(jitter=jitter))
            return free_reduce(braid)
        except ValueError as exc:  # exact symmetric tie; shear harder
            last_error = exc
    raise ValueError(f"could not read the executed crossing pattern: {last_error}")


def run_experiment(
    spec: ScenarioSpec,
    condition: str,
    *,
    inattentive: Sequence[int] = (),
    imap: IntersectionMap | None = None,
    planner: PlannerConfig | None = None,
    label: str | None = None,
) -> ExperimentResult:
    """One closed-loop run: simultaneous replanning every tick until arrival.

    Preferences ``p_high`` are drawn once per experiment from the spec seed;
    agents listed in ``inattentive`` ignore everyone (the default label gets
    a prime suffix to mark the heterogeneous variant).
    """
    if condition not in ("C1", "C2", "C3", "C4", "C5"):
        raise ValueError(f"unknown condition {condition!r}")
    imap = imap or IntersectionMap()
    planner = planner or PlannerConfig(condition=condition)
    if planner.condition != condition:
        planner = replace(planner, condition=condition)
    inattentive = tuple(sorted(set(inattentive)))
    label = label or (condition + ("'" if inattentive else ""))

    rng = random.Random(spec.seed)
    p_high = tuple(rng.uniform(*P_HIGH_RANGE) for _ in spec.agents)
    paths = [imap.path(origin, man) for origin, man, _ in spec.agents]
    models = [
        SpeedModel.from_v_high(v, p, planner.low_speed_ratio)
        for (_, _, v), p in zip(spec.agents, p_high)
    ]
    ids = tuple(f"a{k + 1}" for k in range(len(spec.agents)))
    states = [initial_state(p) for p in paths]

    n = len(states)
    topological = condition in TOPOLOGICAL_CONDITIONS
    known = condition in KNOWN_PATH_CONDITIONS
    poses = [[s.pose for s in states]]
    arrival = [math.inf] * n
    entropy_trace: list[tuple[float, ...]] = []
    support: set = set()

    t = 0.0
    n_steps = int(round(spec.horizon / spec.dt))
    for _ in range(n_steps):
        if all(s.arrived for s in states):
            break
        views = [
            AgentView(ids[k], paths[k], models[k], states[k]) for k in range(n)
        ]
        if condition == "C1":
            commands = [inattentive_policy(v) for v in views]
            entropy_trace.append(())
        else:
            enum = StepEnumeration(views, imap, planner, known_paths=known)
            commands = []
            step_entropies = []
            for k in range(n):
                if k in inattentive:
                    commands.append(inattentive_policy(views[k]))
                    step_entropies.append(math.nan)
                    continue
                u = select_action(k, views, imap, planner, enumeration=enum)
                commands.append(u)
                if states[k].arrived:
                    step_entropies.append(0.0)
                    continue
                bel = compute_belief(
                    k, views, imap, planner, ego_speed=u, enumeration=enum
                )
                step_entropies.append(entropy(bel, mass_floor=planner.mass_floor))
                if topological:
                    support.update(bel.entries)
            entropy_trace.append(tuple(step_entropies))

        for k in range(n):
            if states[k].arrived:
                continue
            states[k] = step(states[k], paths[k], commands[k], spec.dt)
            if states[k].arrived and arrival[k] == math.inf:
                arrival[k] = t + spec.dt
        t += spec.dt
        poses.append([s.pose for s in states])

    pose_arr = np.array(poses)  # (T, n, 3)
    times = spec.dt * np.arange(pose_arr.shape[0])
    positions = np.transpose(pose_arr[:, :, :2], (1, 0, 2))
    headings = np.transpose(pose_arr[:, :, 2], (1, 0))
    iu, ju = np.triu_indices(n, k=1)
    diffs = positions[iu] - positions[ju]
    executed = Rollout(
        times=times,
        positions=positions,
        headings=headings,
        arrived=tuple(s.arrived for s in states),
        arrival_times=tuple(arrival),
        min_pairwise_distance=float(np.sqrt((diffs**2).sum(-1)).min()),
        agent_ids=ids,
    )

    timed_out = not all(s.arrived for s in states)
    max_time = spec.horizon if timed_out else max(arrival)
    return ExperimentResult(
        scenario=spec.scenario,
        condition=label,
        experiment_idx=spec.experiment_idx,
        collided=check_collision(executed),
        max_time=float(max_time),
        timed_out=timed_out,
        executed_braid=_extract_executed(executed),
        entropy_trace=tuple(entropy_trace),
        belief_support=frozenset(support),
        p_high=p_high,
        v_high=tuple(v for _, _, v in spec.agents),
    )


def run_batch(
    scenarios: Iterable[str] = ("S1", "S2", "S3"),
    conditions: Iterable[str] = ("C1", "C2", "C3", "C4", "C5"),
    master_seed: int = DEFAULT_MASTER_SEED,
    *,
    heterogeneous: bool = False,
    jobs: int = 1,
    progress=None,
) -> list[ExperimentResult]:
    """Every (scenario, condition, grid point) combination, deterministically.

    Each run's seed hashes (master seed, scenario, condition label, index),
    so conditions are independent draws.  ``heterogeneous`` swaps agent 1
    for an inattentive driver and primes the condition labels.  ``jobs``
    currently runs serially; the parameter is accepted for interface
    stability (results are index-ordered either way).
    """
    del jobs  # experiments are cheap enough serially; ordering is canonical
    imap = IntersectionMap()
    inatt = (0,) if heterogeneous else ()
    results = []
    for scenario in scenarios:
        base = generate_scenarios(scenario, master_seed)
        for condition in conditions:
            label = condition + ("'" if heterogeneous else "")
            for spec in base:
                run_spec = replace(
                    spec,
                    seed=_fanout(master_seed, scenario, label, spec.experiment_idx),
                )
                results.append(
                    run_experiment(
                        run_spec,
                        condition,
                        inattentive=inatt,
                        imap=imap,
                        label=label,
                    )
                )
                if progress is not None:
                    progress(results[-1])
    return results


# --------------------------------------------------------------------------
# aggregation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AggregateSummary:
    scenario: str
    condition: str
    n: int
    collision_frequency: float
    collision_sd: float
    max_time_median: float
    max_time_p25: float
    max_time_p75: float
    timeouts: int


def aggregate(results: Sequence[ExperimentResult]) -> list[AggregateSummary]:
    """Per (scenario, condition): collision frequency with Bernoulli SD and
    max-time quartiles (numpy linear-interpolation percentiles)."""
    if not results:
        raise ValueError("nothing to aggregate")
    groups: dict[tuple[str, str], list[ExperimentResult]] = {}
    for r in results:
        groups.setdefault((r.scenario, r.condition), []).append(r)
    out = []
    for (scenario, condition), rs in sorted(groups.items()):
        n = len(rs)
        p = sum(r.collided for r in rs) / n
        times = np.array([r.max_time for r in rs])
        q25, q50, q75 = np.percentile(times, [25, 50, 75])
        out.append(
            AggregateSummary(
                scenario=scenario,
                condition=condition,
                n=n,
                collision_frequency=p,
                collision_sd=math.sqrt(p * (1 - p) / n),
                max_time_median=float(q50),
                max_time_p25=float(q25),
                max_time_p75=float(q75),
                timeouts=sum(r.timed_out for r in rs),
            )
        )
    return out


# --------------------------------------------------------------------------
# enumeration counters
# --------------------------------------------------------------------------


def cartesian_trajectory_count(
    n_paths: int, n_controls: int, n_agents: int, horizon_steps: int
) -> int:
    """Joint futures enumerated naively: path choices times per-step controls."""
    if min(n_paths, n_controls, n_agents, horizon_steps) < 1:
        raise ValueError("all counts must be at least 1")
    return n_paths**n_agents * (n_controls**n_agents) ** horizon_steps


def braid_outcome_bound(n_agents: int) -> int:
    """Distinct pairwise interaction patterns: three per pair of agents."""
    if n_agents < 2:
        raise ValueError("need at least two agents")
    return 3 ** math.comb(n_agents, 2)


# --------------------------------------------------------------------------
# writers
# --------------------------------------------------------------------------


def write_results_csv(results: Sequence[ExperimentResult], fp) -> None:
    """One row per run: scenario,condition,experiment_idx,collided,max_time,executed_braid."""
    w = csv.writer(fp, lineterminator="\n")
    w.writerow(
        ["scenario", "condition", "experiment_idx", "collided", "max_time", "executed_braid"]
    )
    for r in results:
        w.writerow(
            [
                r.scenario,
                r.condition,
                r.experiment_idx,
                "true" if r.collided else "false",
                f"{r.max_time:.6f}",
                format_word(r.executed_braid),
            ]
        )


def write_summary_json(summaries: Sequence[AggregateSummary], fp) -> None:
    payload = [
        {
            "scenario": s.scenario,
            "condition": s.condition,
            "n": s.n,
            "collision_frequency": s.collision_frequency,
            "collision_sd": s.collision_sd,
            "max_time_median": s.max_time_median,
            "max_time_p25": s.max_time_p25,
            "max_time_p75": s.max_time_p75,
            "timeouts": s.timeouts,
        }
        for s in summaries
    ]
    json.dump(payload, fp, indent=2, sort_keys=True)
    fp.write("\n")


def write_plot_data_csv(summaries: Sequence[AggregateSummary], fp) -> None:
    """Bar-chart quantities: one row per (scenario, condition) pair."""
    w = csv.writer(fp, lineterminator="\n")
    w.writerow(
        [
            "scenario",
            "condition",
            "collision_frequency",
            "collision_sd",
            "max_time_median",
            "max_time_p25",
            "max_time_p75",
        ]
    )
    for s in summaries:
        w.writerow(
            [
                s.scenario,
                s.condition,
                f"{s.collision_frequency:.6f}",
                f"{s.collision_sd:.6f}",
                f"{s.max_time_median:.6f}",
                f"{s.max_time_p25:.6f}",
                f"{s.max_time_p75:.6f}",
            ]
        )
