"""From timed multiagent trajectories to braid words.

The pipeline: project planar motion onto a sweep axis (strand order)
and a depth axis (over/under at crossings), normalize everything into a
fixed box with integer-rank endpoints, then read off one braid
generator per swap of sweep-axis order, signed by which strand is
nearer on the depth axis.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .words import BraidWord, permutation_of, word

__all__ = [
    "Trajectory",
    "SystemTrajectory",
    "ProjectionFrame",
    "CrossingEvent",
    "AXIS_FRAME",
    "trajectory",
    "align",
    "frame_from_angle",
    "normalize",
    "rank_permutations",
    "extract_braid",
    "load_trajectories_csv",
]

RANK_TIE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One agent's timed planar path: samples (t, x, y), t strictly increasing."""

    agent_id: str
    times: np.ndarray  # (T,)
    points: np.ndarray  # (T, 2)

    def __post_init__(self):
        if self.times.ndim != 1 or self.points.shape != (len(self.times), 2):
            raise ValueError("times must be (T,), points must be (T, 2)")
        if len(self.times) < 2:
            raise ValueError(f"agent {self.agent_id!r}: need at least 2 samples")
        if not np.all(np.diff(self.times) > 0):
            raise ValueError(f"agent {self.agent_id!r}: times must strictly increase")

    def __len__(self):
        return len(self.times)

    def resampled(self, grid: np.ndarray) -> "Trajectory":
        if grid[0] < self.times[0] or grid[-1] > self.times[-1]:
            raise ValueError(
                f"agent {self.agent_id!r}: cannot resample onto "
                f"[{grid[0]}, {grid[-1]}], covers [{self.times[0]}, {self.times[-1]}]"
            )
        x = np.interp(grid, self.times, self.points[:, 0])
        y = np.interp(grid, self.times, self.points[:, 1])
        return Trajectory(self.agent_id, grid.copy(), np.column_stack([x, y]))


def trajectory(agent_id, samples) -> Trajectory:
    """Build a Trajectory from an iterable of (t, x, y) triples."""
    arr = np.asarray(list(samples), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError("samples must be (t, x, y) triples")
    return Trajectory(str(agent_id), arr[:, 0].copy(), arr[:, 1:].copy())


@dataclass(frozen=True, eq=False)
class SystemTrajectory:
    """Several agents on one shared time grid over [t_start, t_end]."""

    agents: tuple[Trajectory, ...]
    t_start: float
    t_end: float

    def __post_init__(self):
        if not self.agents:
            raise ValueError("need at least one agent")
        ids = [a.agent_id for a in self.agents]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate agent ids: {sorted(ids)}")
        grid = self.agents[0].times
        for a in self.agents[1:]:
            if len(a.times) != len(grid) or not np.array_equal(a.times, grid):
                raise ValueError("agents must share one time grid; use align()")
        if not (grid[0] == self.t_start and grid[-1] == self.t_end):
            raise ValueError("grid must span exactly [t_start, t_end]")
        # strand disjointness: no two agents in the same place at the same time
        for i in range(len(self.agents)):
            for j in range(i + 1, len(self.agents)):
                same = np.all(
                    self.agents[i].points == self.agents[j].points, axis=1
                )
                if same.any():
                    k = int(np.argmax(same))
                    raise ValueError(
                        f"agents {ids[i]!r} and {ids[j]!r} coincide at "
                        f"t={grid[k]}: positions must stay distinct"
                    )

    @property
    def grid(self) -> np.ndarray:
        return self.agents[0].times

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def agent_ids(self) -> tuple[str, ...]:
        return tuple(a.agent_id for a in self.agents)


def align(trajectories) -> SystemTrajectory:
    """Put agents on the union grid of the interval they all cover."""
    trajs = list(trajectories)
    if not trajs:
        raise ValueError("need at least one trajectory")
    t0 = max(t.times[0] for t in trajs)
    t1 = min(t.times[-1] for t in trajs)
    if not (t0 < t1):
        raise ValueError(f"no common time interval: starts rise to {t0}, ends fall to {t1}")
    merged = np.unique(np.concatenate([t.times for t in trajs]))
    grid = merged[(merged >= t0) & (merged <= t1)]
    return SystemTrajectory(
        tuple(t.resampled(grid) for t in trajs), float(grid[0]), float(grid[-1])
    )


@dataclass(frozen=True)
class ProjectionFrame:
    """Orthonormal pair: ``eta`` orders the strands, ``nu`` breaks ties at crossings."""

    eta: tuple[float, float]
    nu: tuple[float, float]

    def __post_init__(self):
        ex, ey = self.eta
        nx, ny = self.nu
        if abs(math.hypot(ex, ey) - 1.0) > 1e-9 or abs(math.hypot(nx, ny) - 1.0) > 1e-9:
            raise ValueError("frame axes must be unit vectors")
        if abs(ex * nx + ey * ny) > 1e-9:
            raise ValueError("frame axes must be orthogonal")


AXIS_FRAME = ProjectionFrame((1.0, 0.0), (0.0, 1.0))


def frame_from_angle(theta: float) -> ProjectionFrame:
    """Frame whose sweep axis points along ``theta`` radians from +x."""
    c, s = math.cos(theta), math.sin(theta)
    return ProjectionFrame((c, s), (-s, c))


@dataclass(frozen=True)
class CrossingEvent:
    """One strand exchange: at ``time`` the agents in slots (slot, slot+1) swap."""

    time: float
    slot: int
    sign: int
    agents: tuple[str, str]


# --------------------------------------------------------------------------
# projection and normalization
# --------------------------------------------------------------------------


def _projected(xs: SystemTrajectory, frame: ProjectionFrame):
    """Per-agent sweep and depth coordinates on the shared grid."""
    eta = np.asarray(frame.eta)
    nu = np.asarray(frame.nu)
    X = np.stack([a.points @ eta for a in xs.agents])  # (n, T)
    Y = np.stack([a.points @ nu for a in xs.agents])
    return X, Y


def _ranks_at(values, agent_ids):
    """1-based ranks by increasing value; near-ties fall back to id order."""
    order = sorted(range(len(values)), key=lambda i: (values[i], agent_ids[i]))
    # group near-equal values and re-sort each group purely by agent id
    groups = []
    for idx in order:
        if groups and abs(values[idx] - values[groups[-1][-1]]) <= RANK_TIE_TOL:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    ranks = [0] * len(values)
    pos = 1
    for g in groups:
        for idx in sorted(g, key=lambda i: agent_ids[i]):
            ranks[idx] = pos
            pos += 1
    return tuple(ranks)


def rank_permutations(xs: SystemTrajectory, frame: ProjectionFrame = AXIS_FRAME):
    """Start and end orderings of the agents along the sweep axis.

    Entry k of each tuple is the 1-based rank of ``xs.agents[k]`` at
    t_start / t_end, by increasing sweep coordinate.
    """
    X, _ = _projected(xs, frame)
    ids = xs.agent_ids
    return _ranks_at(X[:, 0], ids), _ranks_at(X[:, -1], ids)


def normalize(xs: SystemTrajectory, frame: ProjectionFrame = AXIS_FRAME) -> SystemTrajectory:
    """Map the system into the standard box, endpoints snapped to ranks.

    Time runs uniformly over [0, 1]; sweep coordinates are scaled
    affinely onto [1, n] and depth onto [-1, 1]; at the two ends each
    agent sits exactly at its integer rank with zero depth, so braids
    read off the normalized picture start and finish at tidy positions.
    """
    X, Y = _projected(xs, frame)
    n = xs.n_agents
    x_min, x_max = X.min(), X.max()
    y_min, y_max = Y.min(), Y.max()
    if x_max - x_min <= 0:
        raise ValueError("degenerate sweep extent: all agents share one sweep coordinate")
    if y_max - y_min <= 0:
        raise ValueError("degenerate depth extent: all agents share one depth coordinate")
    Xn = 1.0 + (X - x_min) / (x_max - x_min) * (n - 1)
    Yn = -1.0 + 2.0 * (Y - y_min) / (y_max - y_min)
    p_s, p_d = rank_permutations(xs, frame)
    Xn[:, 0] = p_s
    Xn[:, -1] = p_d
    Yn[:, 0] = 0.0
    Yn[:, -1] = 0.0
    span = xs.t_end - xs.t_start
    grid = (xs.grid - xs.t_start) / span
    grid[0], grid[-1] = 0.0, 1.0
    agents = tuple(
        Trajectory(a.agent_id, grid.copy(), np.column_stack([Xn[i], Yn[i]]))
        for i, a in enumerate(xs.agents)
    )
    return SystemTrajectory(agents, 0.0, 1.0)


# --------------------------------------------------------------------------
# crossing extraction
# --------------------------------------------------------------------------


def _pair_crossings(times, d, s_start, s_end):
    """Times where the sweep difference ``d`` genuinely changes sign.

    ``s_start`` / ``s_end`` are the pair's rank-order signs (±1) at the
    two boundary samples; they stand in for boundary values lying inside
    the rank tie tolerance, so episode-edge ties flip exactly when the
    rank bookkeeping says they do, pinned to the boundary time itself.
    Interior zeros are grazing unless the nearest nonzero values on the
    two sides disagree in sign; such a flip lands on the plateau's
    first touch.
    """
    last = len(d) - 1
    signs = np.sign(d)
    pinned = set()
    if abs(d[0]) <= RANK_TIE_TOL:
        signs[0] = s_start
        pinned.add(0)
    if abs(d[last]) <= RANK_TIE_TOL:
        signs[last] = s_end
        pinned.add(last)
    out = []
    nz = np.flatnonzero(signs)
    for a, b in zip(nz[:-1], nz[1:]):
        if signs[a] == signs[b]:
            continue
        if a in pinned:
            tc = times[a]
        elif b != a + 1:  # zero plateau: order flips at its first touch
            tc = times[a + 1]
        elif b in pinned:
            tc = times[b]
        else:  # clean sign change across one segment
            tc = times[a] + (times[b] - times[a]) * d[a] / (d[a] - d[b])
        out.append(float(tc))
    return out


def extract_braid(
    xs: SystemTrajectory, frame: ProjectionFrame = AXIS_FRAME
) -> tuple[BraidWord, list[CrossingEvent]]:
    """Read the braid word of a system trajectory.

    Every swap of sweep-axis order between two agents becomes one
    generator at the interpolated crossing time; the sign is positive
    when the strand coming from the lower slot is deeper (larger depth
    coordinate) at the crossing.  Letters are emitted in time order,
    ties between commuting slots by ascending slot.
    """
    if xs.n_agents < 2:
        raise ValueError("braid extraction needs at least 2 agents")
    normalize(xs, frame)  # reject degenerate sweep/depth extents up front
    n = xs.n_agents
    ids = xs.agent_ids
    times = xs.grid  # report event times in input units
    # detection runs on the raw projection: the word then survives grid
    # refinement and reparametrization, which endpoint snapping would break
    X, Y = _projected(xs, frame)
    p_s, p_d = rank_permutations(xs, frame)

    raw = []  # (t_c, i, j) with i, j agent indices
    for i in range(n):
        for j in range(i + 1, n):
            s0 = 1 if p_s[i] > p_s[j] else -1
            s1 = 1 if p_d[i] > p_d[j] else -1
            for tc in _pair_crossings(times, X[i] - X[j], s0, s1):
                raw.append((tc, i, j))
    raw.sort(key=lambda e: e[0])

    # simulate slot occupancy to place each swap and check consistency
    slots = list(p_s)  # agent index -> current slot (1-based)

    letters: list[int] = []
    events: list[CrossingEvent] = []
    k = 0
    while k < len(raw):
        same_t = [raw[k]]
        while k + 1 < len(raw) and raw[k + 1][0] == raw[k][0]:
            k += 1
            same_t.append(raw[k])
        k += 1
        batch = []
        for tc, i, j in same_t:
            si, sj = slots[i], slots[j]
            if abs(si - sj) != 1:
                raise ValueError(
                    f"agents {ids[i]!r} and {ids[j]!r} swap at t={tc} from "
                    f"non-adjacent slots {si} and {sj}; crossings overlap"
                )
            batch.append((min(si, sj), tc, i, j))
        batch.sort()
        for a, b in zip(batch, batch[1:]):
            if b[0] - a[0] <= 1:  # same or adjacent slots share a strand
                raise ValueError(
                    f"simultaneous crossings at t={a[1]} involve "
                    f"overlapping slots {a[0]} and {b[0]}"
                )
        for slot, tc, i, j in batch:
            lower = i if slots[i] < slots[j] else j
            upper = j if lower == i else i
            dy = float(
                np.interp(tc, times, Y[lower]) - np.interp(tc, times, Y[upper])
            )
            if dy == 0.0:
                raise ValueError(
                    f"agents {ids[lower]!r} and {ids[upper]!r} meet head-on at "
                    f"t={tc}: depth coordinates coincide, over/under undefined"
                )
            sign = 1 if dy > 0 else -1
            letters.append(sign * slot)
            events.append(CrossingEvent(tc, slot, sign, (ids[lower], ids[upper])))
            slots[lower], slots[upper] = slots[upper], slots[lower]

    braid = word(n, letters)
    got = permutation_of(braid)
    for idx in range(n):
        if got[p_s[idx] - 1] != p_d[idx]:
            raise ValueError(
                "extracted word permutes strands inconsistently with the "
                "endpoint rankings; the input grid is too coarse for its crossings"
            )
    return braid, events


# --------------------------------------------------------------------------
# file input
# --------------------------------------------------------------------------


def load_trajectories_csv(path) -> list[Trajectory]:
    """Read ``agent_id,t,x,y`` rows (header required) into trajectories."""
    path = Path(path)
    by_agent: dict[str, list[tuple[float, float, float]]] = {}
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        needed = {"agent_id", "t", "x", "y"}
        if reader.fieldnames is None or not needed.issubset(reader.fieldnames):
            raise ValueError(
                f"{path}: expected columns agent_id,t,x,y, got {reader.fieldnames}"
            )
        for row in reader:
            by_agent.setdefault(row["agent_id"], []).append(
                (float(row["t"]), float(row["x"]), float(row["y"]))
            )
    if not by_agent:
        raise ValueError(f"{path}: no data rows")
    return [
        trajectory(aid, sorted(samples))
        for aid, samples in sorted(by_agent.items())
    ]
