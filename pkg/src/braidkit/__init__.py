"""Tools for reasoning about multiagent motion through the braid group.

The package turns timed trajectories of interacting agents into braid
words, measures how entangled those words are, and uses both pieces to
drive simulation studies and traffic-data analyses.
"""

from .dataset import (
    EpisodeConfig,
    SceneReport,
    analyze_directory,
    analyze_scene,
    ingest,
    slice_episodes,
)
from .experiments import (
    ExperimentResult,
    ScenarioSpec,
    aggregate,
    braid_outcome_bound,
    cartesian_trajectory_count,
    generate_scenarios,
    run_batch,
    run_experiment,
)
from .loops import (
    ComplexityScore,
    LoopCoordinates,
    apply_letter,
    apply_word,
    canonical_diagram,
    encircling_loop,
    norm,
    probe_battery,
    topological_complexity,
)
from .planner import (
    AgentView,
    CollisionModel,
    OutcomeBelief,
    PlannerConfig,
    SpeedModel,
    collision_probability,
    compute_belief,
    entropy,
    plan_step,
    select_action,
)
from .trajectories import (
    SystemTrajectory,
    Trajectory,
    align,
    extract_braid,
    load_trajectories_csv,
    normalize,
    rank_permutations,
    trajectory,
)
from .words import (
    BraidWord,
    compose,
    format_word,
    free_reduce,
    identity,
    inverse,
    is_equivalent,
    parse_word,
    permutation_of,
    relation_simplify,
    word,
)
from .world import (
    AgentState,
    IntersectionMap,
    Path,
    Rollout,
    check_collision,
    initial_state,
    rollout,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "AgentState",
    "AgentView",
    "BraidWord",
    "CollisionModel",
    "ComplexityScore",
    "EpisodeConfig",
    "ExperimentResult",
    "IntersectionMap",
    "LoopCoordinates",
    "OutcomeBelief",
    "Path",
    "PlannerConfig",
    "Rollout",
    "ScenarioSpec",
    "SceneReport",
    "SpeedModel",
    "SystemTrajectory",
    "Trajectory",
    "aggregate",
    "align",
    "analyze_directory",
    "analyze_scene",
    "apply_letter",
    "apply_word",
    "braid_outcome_bound",
    "canonical_diagram",
    "cartesian_trajectory_count",
    "check_collision",
    "collision_probability",
    "compose",
    "compute_belief",
    "encircling_loop",
    "entropy",
    "extract_braid",
    "format_word",
    "free_reduce",
    "generate_scenarios",
    "identity",
    "ingest",
    "initial_state",
    "inverse",
    "is_equivalent",
    "load_trajectories_csv",
    "norm",
    "normalize",
    "parse_word",
    "permutation_of",
    "plan_step",
    "probe_battery",
    "rank_permutations",
    "relation_simplify",
    "rollout",
    "run_batch",
    "run_experiment",
    "select_action",
    "slice_episodes",
    "step",
    "topological_complexity",
    "trajectory",
    "word",
    "__version__",
]
