"""Four-arm intersection world: lanes, legal paths, kinematics, rollouts.

The map is a symmetric uncontrolled junction of four 50 m arms under
right-hand traffic.  Every legal route is a fixed polyline (approach
centerline, then a straight segment or a circular arc tangent to both
centerlines, then the exit centerline), sampled uniformly by arc
length so positions along it are cheap linear interpolations.  Agents
are pure path-trackers: a commanded speed advances progress along the
route, nothing else.  Rollouts project every agent forward at constant
speed and record the full motion plus the minimum center-to-center
distance; oriented-rectangle overlap is a separate ground-truth check
used for evaluation only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .trajectories import SystemTrajectory, Trajectory

__all__ = [
    "ARMS",
    "MANEUVERS",
    "LANE_LENGTH",
    "LANE_WIDTH",
    "BOX_HALF_SIDE",
    "TURN_RADIUS",
    "VehicleShape",
    "Path",
    "IntersectionMap",
    "AgentState",
    "Rollout",
    "initial_state",
    "step",
    "rollout",
    "check_collision",
]

LANE_LENGTH = 50.0
LANE_WIDTH = 3.6
BOX_HALF_SIDE = LANE_WIDTH  # the central square spans [-3.6, 3.6] x [-3.6, 3.6]
TURN_RADIUS = 1.5 * LANE_WIDTH  # tangent to both involved lane centerlines

ARMS = ("south", "east", "north", "west")
MANEUVERS = ("left", "straight", "right")

PATH_SAMPLE_STEP = 0.25  # uniform arc-length spacing of the operative polyline

NEGOTIATION = "negotiation"
EXECUTION = "execution"

_ROT90 = np.array([[0.0, -1.0], [1.0, 0.0]])  # counterclockwise quarter turn


@dataclass(frozen=True)
class VehicleShape:
    """Footprint rectangle, length along the heading."""

    length: float = 4.7
    width: float = 1.7

    def __post_init__(self):
        if self.length <= 0 or self.width <= 0:
            raise ValueError("vehicle dimensions must be positive")


@dataclass(frozen=True, eq=False)
class Path:
    """One legal route through the junction, arc-length parameterized.

    ``samples``/``s_grid`` form the operative polyline: points every
    PATH_SAMPLE_STEP meters (last gap shorter).  ``box_entry`` is the
    progress at which the reference point first enters the central box.
    """

    origin: str
    maneuver: str
    destination: str
    samples: np.ndarray  # (S, 2)
    s_grid: np.ndarray  # (S,)
    length: float
    box_entry: float

    def point_at(self, s):
        """Position at progress ``s`` (scalar or array), clamped to the ends."""
        s = np.clip(s, 0.0, self.length)
        x = np.interp(s, self.s_grid, self.samples[:, 0])
        y = np.interp(s, self.s_grid, self.samples[:, 1])
        return np.stack([x, y], axis=-1)

    def heading_at(self, s):
        """Tangent direction (radians) of the segment containing ``s``."""
        s = np.clip(s, 0.0, self.length)
        seg = np.clip(
            np.searchsorted(self.s_grid, s, side="right") - 1,
            0,
            len(self.s_grid) - 2,
        )
        d = self.samples[seg + 1] - self.samples[seg]
        return np.arctan2(d[..., 1], d[..., 0])

    def pose_at(self, s: float) -> tuple[float, float, float]:
        p = self.point_at(float(s))
        return (float(p[0]), float(p[1]), float(self.heading_at(float(s))))


def _arc(center, radius, theta0, theta1, step=0.05):
    """Sample a circular arc from theta0 to theta1 (either direction)."""
    n = max(2, int(math.ceil(abs(theta1 - theta0) * radius / step)) + 1)
    th = np.linspace(theta0, theta1, n)
    return np.column_stack(
        [center[0] + radius * np.cos(th), center[1] + radius * np.sin(th)]
    )


def _south_polyline(maneuver: str) -> np.ndarray:
    """Route entering from the south arm, in the right-hand (east) lane."""
    a = LANE_WIDTH / 2.0  # inbound lane centerline offset
    far = BOX_HALF_SIDE + LANE_LENGTH  # outer end of an arm
    r = TURN_RADIUS
    if maneuver == "straight":
        pts = [(a, -far), (a, far)]
        return np.array(pts)
    if maneuver == "right":
        # clockwise quarter arc into the eastbound exit lane (y = -a)
        center = (a + r, -(a + r))
        head = np.array([(a, -far), (a, -(a + r))])
        turn = _arc(center, r, math.pi, math.pi / 2.0)
        tail = np.array([(a + r, -a), (far, -a)])
        return np.vstack([head, turn, tail])
    if maneuver == "left":
        # counterclockwise quarter arc across the box into the westbound lane
        center = (a - r, a - r)
        head = np.array([(a, -far), (a, a - r)])
        turn = _arc(center, r, 0.0, math.pi / 2.0)
        tail = np.array([(a - r, a), (-far, a)])
        return np.vstack([head, turn, tail])
    raise ValueError(f"unknown maneuver {maneuver!r}; expected one of {MANEUVERS}")


_DESTINATION_FROM_SOUTH = {"straight": "north", "right": "east", "left": "west"}


def _dedupe(points: np.ndarray) -> np.ndarray:
    keep = np.ones(len(points), dtype=bool)
    keep[1:] = np.linalg.norm(np.diff(points, axis=0), axis=1) > 1e-12
    return points[keep]


def _resample_uniform(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    points = _dedupe(points)
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = float(cum[-1])
    grid = np.arange(0.0, total, PATH_SAMPLE_STEP)
    if grid[-1] < total:
        grid = np.append(grid, total)
    x = np.interp(grid, cum, points[:, 0])
    y = np.interp(grid, cum, points[:, 1])
    return np.column_stack([x, y]), grid


def _box_entry(samples: np.ndarray, s_grid: np.ndarray) -> float:
    inside = (np.abs(samples[:, 0]) <= BOX_HALF_SIDE) & (
        np.abs(samples[:, 1]) <= BOX_HALF_SIDE
    )
    idx = int(np.argmax(inside))
    if not inside.any():
        return math.inf
    if idx == 0:
        return 0.0
    p, q = samples[idx - 1], samples[idx]
    # slab entry parameter along the segment p -> q
    t_enter = 0.0
    for ax in range(2):
        if abs(p[ax]) > BOX_HALF_SIDE:
            bound = math.copysign(BOX_HALF_SIDE, p[ax])
            t_enter = max(t_enter, (bound - p[ax]) / (q[ax] - p[ax]))
    return float(s_grid[idx - 1] + t_enter * (s_grid[idx] - s_grid[idx - 1]))


def _build_path(origin: str, maneuver: str) -> Path:
    if origin not in ARMS:
        raise ValueError(f"unknown arm {origin!r}; expected one of {ARMS}")
    k = ARMS.index(origin)
    pts = _south_polyline(maneuver)
    rot = np.linalg.matrix_power(_ROT90, k)
    pts = pts @ rot.T
    samples, s_grid = _resample_uniform(pts)
    dest = ARMS[(ARMS.index(_DESTINATION_FROM_SOUTH[maneuver]) + k) % 4]
    return Path(
        origin=origin,
        maneuver=maneuver,
        destination=dest,
        samples=samples,
        s_grid=s_grid,
        length=float(s_grid[-1]),
        box_entry=_box_entry(samples, s_grid),
    )


class IntersectionMap:
    """The fixed symmetric junction with all twelve legal routes prebuilt."""

    lane_length = LANE_LENGTH
    lane_width = LANE_WIDTH
    box_half_side = BOX_HALF_SIDE

    def __init__(self, vehicle: VehicleShape | None = None):
        self.vehicle = vehicle or VehicleShape()
        self._paths = {
            (arm, mv): _build_path(arm, mv) for arm in ARMS for mv in MANEUVERS
        }

    def path(self, origin: str, maneuver: str) -> Path:
        try:
            return self._paths[(origin, maneuver)]
        except KeyError:
            raise ValueError(
                f"no route for ({origin!r}, {maneuver!r}); arms {ARMS}, "
                f"maneuvers {MANEUVERS}"
            ) from None

    def paths_from(self, origin: str) -> tuple[Path, ...]:
        return tuple(self.path(origin, mv) for mv in MANEUVERS)

    @staticmethod
    def box_contains(point) -> bool:
        x, y = float(point[0]), float(point[1])
        return abs(x) <= BOX_HALF_SIDE and abs(y) <= BOX_HALF_SIDE


@dataclass(frozen=True)
class AgentState:
    """Where one vehicle is along its route and what it was told to do."""

    path_progress: float
    pose: tuple[float, float, float]
    commanded_speed: float
    region: str
    arrived: bool


def _region_of(path: Path, progress: float) -> str:
    return EXECUTION if progress >= path.box_entry else NEGOTIATION


def initial_state(path: Path, offset: float = 0.0, speed: float = 0.0) -> AgentState:
    """Agent parked at ``offset`` meters along ``path`` (default: arm entrance)."""
    if not 0.0 <= offset <= path.length:
        raise ValueError(f"offset {offset} outside [0, {path.length}]")
    return AgentState(
        path_progress=offset,
        pose=path.pose_at(offset),
        commanded_speed=speed,
        region=_region_of(path, offset),
        arrived=offset >= path.length,
    )


def step(state: AgentState, path: Path, speed: float, dt: float) -> AgentState:
    """Advance one control period of pure path tracking at ``speed``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if speed < 0:
        raise ValueError("speed must be non-negative")
    progress = min(state.path_progress + speed * dt, path.length)
    return AgentState(
        path_progress=progress,
        pose=path.pose_at(progress),
        commanded_speed=speed,
        region=_region_of(path, progress),
        arrived=progress >= path.length,
    )


@dataclass(frozen=True, eq=False)
class Rollout:
    """Constant-speed forward projection of every agent.

    ``times`` are seconds from the projection start; positions and
    headings are recorded per agent per sample.  ``min_pairwise_distance``
    is the smallest recorded center-to-center distance (+inf when there
    is a single agent).
    """

    times: np.ndarray  # (T,)
    positions: np.ndarray  # (n, T, 2)
    headings: np.ndarray  # (n, T)
    arrived: tuple[bool, ...]
    arrival_times: tuple[float, ...]
    min_pairwise_distance: float
    agent_ids: tuple[str, ...]

    @property
    def n_agents(self) -> int:
        return len(self.agent_ids)

    def system(self, jitter: float = 0.0) -> SystemTrajectory:
        """The recorded motion as a shared-grid system trajectory.

        ``jitter`` offsets agent k's coordinates by k*jitter, a
        deterministic sub-millimeter shear that breaks exact position
        ties (stacked endpoints, mirror-symmetric meetings) without
        disturbing any transversal crossing.
        """
        agents = []
        for k, aid in enumerate(self.agent_ids):
            pts = self.positions[k] + k * jitter
            agents.append(Trajectory(aid, self.times.copy(), pts.copy()))
        return SystemTrajectory(
            tuple(agents), float(self.times[0]), float(self.times[-1])
        )


def rollout(
    states,
    paths,
    speeds,
    horizon: float,
    dt: float,
    agent_ids=None,
) -> Rollout:
    """Project all agents forward at constant speeds until arrival or horizon."""
    states = list(states)
    paths = list(paths)
    speeds = [float(v) for v in speeds]
    n = len(states)
    if not (len(paths) == len(speeds) == n):
        raise ValueError("need exactly one path and one speed per agent")
    if horizon <= 0 or dt <= 0:
        raise ValueError("horizon and dt must be positive")
    if any(v < 0 for v in speeds):
        raise ValueError("speeds must be non-negative")
    ids = tuple(agent_ids) if agent_ids is not None else tuple(
        f"a{k + 1}" for k in range(n)
    )

    s0 = np.array([st.path_progress for st in states])
    lengths = np.array([p.length for p in paths])
    v = np.array(speeds)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_arr = np.where(
            s0 >= lengths, 0.0, np.where(v > 0, (lengths - s0) / v, np.inf)
        )
    t_end = float(min(horizon, np.max(t_arr))) if np.isfinite(t_arr).all() else horizon
    n_steps = max(1, int(math.ceil(t_end / dt - 1e-9)))
    times = dt * np.arange(n_steps + 1)

    progress = np.clip(s0[:, None] + v[:, None] * times[None, :], 0.0, lengths[:, None])
    positions = np.empty((n, len(times), 2))
    headings = np.empty((n, len(times)))
    for k, p in enumerate(paths):
        positions[k] = p.point_at(progress[k])
        headings[k] = p.heading_at(progress[k])

    if n >= 2:
        iu, ju = np.triu_indices(n, k=1)
        diffs = positions[iu] - positions[ju]
        d_min = float(np.sqrt((diffs**2).sum(-1)).min())
    else:
        d_min = math.inf

    return Rollout(
        times=times,
        positions=positions,
        headings=headings,
        arrived=tuple(bool(progress[k, -1] >= lengths[k]) for k in range(n)),
        arrival_times=tuple(
            float(t) if t <= t_end else math.inf for t in t_arr
        ),
        min_pairwise_distance=d_min,
        agent_ids=ids,
    )


def _separating_axis_free(c1, h1, c2, h2, shape: VehicleShape) -> np.ndarray:
    """Per-sample: is there a separating axis between the two rectangles?

    c*: (T, 2) centers, h*: (T,) headings.  Uses the four edge normals
    of the two oriented boxes, which is sufficient for rectangles.
    """
    a = shape.length / 2.0
    b = shape.width / 2.0
    u1 = np.stack([np.cos(h1), np.sin(h1)], axis=-1)  # (T, 2)
    n1 = np.stack([-np.sin(h1), np.cos(h1)], axis=-1)
    u2 = np.stack([np.cos(h2), np.sin(h2)], axis=-1)
    n2 = np.stack([-np.sin(h2), np.cos(h2)], axis=-1)
    d = c1 - c2
    separated = np.zeros(len(d), dtype=bool)
    for axis in (u1, n1, u2, n2):
        proj = np.abs((d * axis).sum(-1))
        r1 = a * np.abs((u1 * axis).sum(-1)) + b * np.abs((n1 * axis).sum(-1))
        r2 = a * np.abs((u2 * axis).sum(-1)) + b * np.abs((n2 * axis).sum(-1))
        separated |= proj > r1 + r2
    return separated


def check_collision(ro: Rollout, shape: VehicleShape | None = None) -> bool:
    """True iff any two vehicle rectangles overlap at any recorded sample."""
    shape = shape or VehicleShape()
    n = ro.n_agents
    for i in range(n):
        for j in range(i + 1, n):
            separated = _separating_axis_free(
                ro.positions[i], ro.headings[i], ro.positions[j], ro.headings[j], shape
            )
            if not separated.all():
                return True
    return False
