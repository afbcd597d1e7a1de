"""Entropy-guided speed selection over beliefs about joint intersection outcomes.

A planning agent enumerates every joint hypothesis about the near future —
which path each neighbour might be following and whether each driver takes
its slow or fast speed — rolls each hypothesis forward along the lane
tables, discounts futures that pass dangerously close, and aggregates what
remains into a belief over outcomes.  The topological planner variants
cluster futures by the crossing pattern they realize, so hypotheses that
differ in timing but agree on who passes in front of whom count as one
outcome.  The commanded speed is whichever candidate most decisively pins
down a single way the encounter can resolve, scored by the Shannon entropy
over each outcome together with its fate (reached safely, or crashed en
route) — so an action only looks decisive by making one outcome both
likely and safe, never by thinning the futures it would collide with.

Condition tags select the planner variant used throughout the experiments:

* ``C1`` — no planning; drive the preferred speed regardless of others.
* ``C2`` — full planner: unknown neighbour paths, crossing-pattern outcomes.
* ``C3`` — neighbour paths known, crossing-pattern outcomes.
* ``C4`` — unknown neighbour paths, every rollout its own outcome.
* ``C5`` — neighbour paths known, every rollout its own outcome.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from .trajectories import _ranks_at
from .world import EXECUTION, AgentState, IntersectionMap, Path

__all__ = [
    "AgentView",
    "CollisionModel",
    "OutcomeBelief",
    "PlannerConfig",
    "SpeedModel",
    "StepEnumeration",
    "collision_probability",
    "compute_belief",
    "control_prior",
    "entropy",
    "inattentive_policy",
    "intent_posterior",
    "plan_step",
    "select_action",
]

CONDITIONS = ("C1", "C2", "C3", "C4", "C5")
KNOWN_PATH_CONDITIONS = frozenset({"C3", "C5"})
TOPOLOGICAL_CONDITIONS = frozenset({"C2", "C3"})


# --------------------------------------------------------------------------
# models
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SpeedModel:
    """An agent's two commanded speed magnitudes and its preference for the fast one."""

    v_low: float
    v_high: float
    p_high: float

    def __post_init__(self) -> None:
        if not 0.0 < self.v_low < self.v_high:
            raise ValueError(
                f"need 0 < v_low < v_high, got {self.v_low} and {self.v_high}"
            )
        if not 0.0 < self.p_high < 1.0:
            raise ValueError(f"p_high must lie strictly in (0, 1), got {self.p_high}")

    @property
    def p_low(self) -> float:
        return 1.0 - self.p_high

    @classmethod
    def from_v_high(cls, v_high: float, p_high: float, ratio: float = 0.4) -> "SpeedModel":
        """Derive the slow magnitude as a fixed fraction of the fast one."""
        return cls(v_low=ratio * v_high, v_high=v_high, p_high=p_high)


@dataclass(frozen=True)
class CollisionModel:
    """Sigmoid mapping from closest approach to collision probability.

    The probability is 1/2 exactly at ``threshold`` metres and falls off
    with ``steepness`` (per metre) as the closest approach grows.
    """

    steepness: float = 2.0
    threshold: float = 3.0

    def __post_init__(self) -> None:
        if self.steepness <= 0:
            raise ValueError(f"steepness must be positive, got {self.steepness}")
        if self.threshold <= 0:
            raise ValueError(f"threshold must be positive, got {self.threshold}")


def collision_probability(d_min: float, model: CollisionModel | None = None) -> float:
    """Probability that a rollout with closest approach ``d_min`` collides."""
    model = model or CollisionModel()
    z = model.steepness * (d_min - model.threshold)
    if z > 700.0:  # exp overflow; the sigmoid is numerically 0 long before this
        return 0.0
    if z < -700.0:
        return 1.0
    return 1.0 / (1.0 + math.exp(z))


@dataclass(frozen=True)
class PlannerConfig:
    condition: str = "C2"
    collision: CollisionModel = field(default_factory=CollisionModel)
    low_speed_ratio: float = 0.4
    horizon_cap: float = 60.0
    rollout_dt: float = 0.5
    mass_floor: float = 1e-12

    def __post_init__(self) -> None:
        if self.condition not in CONDITIONS:
            raise ValueError(
                f"unknown condition {self.condition!r}; expected one of {CONDITIONS}"
            )
        if not 0.0 < self.low_speed_ratio < 1.0:
            raise ValueError("low_speed_ratio must lie strictly in (0, 1)")
        if self.horizon_cap <= 0 or self.rollout_dt <= 0:
            raise ValueError("horizon_cap and rollout_dt must be positive")


@dataclass(frozen=True)
class AgentView:
    """Everything publicly observable about one agent, plus its true route."""

    agent_id: str
    path: Path
    speed: SpeedModel
    state: AgentState


@dataclass(frozen=True)
class OutcomeBelief:
    """Sub-probability masses over outcome keys; ``terminal`` flags an empty future."""

    entries: Mapping[Hashable, float]
    terminal: bool = False

    @property
    def total_mass(self) -> float:
        return float(sum(self.entries.values()))

    def renormalized(self) -> dict[Hashable, float]:
        z = self.total_mass
        if z <= 0.0:
            return {}
        return {k: v / z for k, v in self.entries.items()}


def entropy(belief: OutcomeBelief, *, mass_floor: float = 1e-12) -> float:
    """Shannon entropy in bits of the renormalized belief; empty means 0."""
    if belief.terminal or belief.total_mass < mass_floor:
        return 0.0
    h = 0.0
    for p in belief.renormalized().values():
        if p > 0.0:
            h -= p * math.log2(p)
    return h


def _xlogx(m: float) -> float:
    return m * math.log2(m) if m > 0.0 else 0.0


def _decision_entropy(filtered: OutcomeBelief, unfiltered: OutcomeBelief) -> float:
    """Entropy over joint fates: every outcome key split into safe and crashed.

    Each key's unfiltered mass is divided between "this outcome happens
    safely" (the filtered mass) and "it ends in a collision instead" (the
    rest), and the entropy is taken over all of those fates together, which
    sum to one.  Scoring candidates this way keeps danger from masquerading
    as certainty: wiping an outcome out merely relabels its mass as crashed
    (no sharper), half-killing it genuinely splits it (strictly blurrier),
    so the only way to look resolved is to make one outcome both likely and
    safe.  Renormalizing the survivors instead — the reading `entropy` uses
    for reporting — would reward a speed for thinning the futures it is
    about to collide with, and with per-rollout outcome keys that reading
    makes every planner prefer the riskier speed almost everywhere.
    """
    h = 0.0
    for key, u in unfiltered.entries.items():
        f = filtered.entries.get(key, 0.0)
        h -= _xlogx(f) + _xlogx(max(u - f, 0.0))
    return h


# --------------------------------------------------------------------------
# elementary posteriors
# --------------------------------------------------------------------------


def intent_posterior(
    state: AgentState,
    path: Path,
    imap: IntersectionMap,
    *,
    is_ego: bool = False,
) -> tuple[tuple[Path, float], ...]:
    """Distribution over the routes an observed agent might be following.

    While the agent is still negotiating its approach, any of the legal
    maneuvers from its origin arm is equally plausible; once inside the
    central box the route is evident.  An agent is always certain of its
    own route.
    """
    if is_ego or state.arrived or state.region == EXECUTION:
        return ((path, 1.0),)
    candidates = imap.paths_from(path.origin)
    share = 1.0 / len(candidates)
    return tuple((c, share) for c in candidates)


def control_prior(models: Sequence[SpeedModel], assignment: Sequence[str]) -> float:
    """Joint prior of one low/high speed label per agent, chosen independently."""
    if len(models) != len(assignment):
        raise ValueError(
            f"{len(models)} speed models but {len(assignment)} assignment labels"
        )
    prob = 1.0
    for m, u in zip(models, assignment):
        if u == "high":
            prob *= m.p_high
        elif u == "low":
            prob *= m.p_low
        else:
            raise ValueError(f"speed label must be 'low' or 'high', got {u!r}")
    return prob


# --------------------------------------------------------------------------
# shared per-step enumeration
# --------------------------------------------------------------------------


def _crossing_events(times, d):
    """(t_c, sign before the crossing) wherever ``d`` genuinely changes sign.

    Mirrors the trajectory engine's crossing rule: zeros at grid points are
    grazing unless the nearest nonzero values on both sides disagree, and a
    zero plateau flips at its first touch.
    """
    nz = np.flatnonzero(d)
    if nz.size < 2:
        return []
    pos = d[nz] > 0
    out = []
    for f in np.flatnonzero(pos[:-1] != pos[1:]):
        a, b = nz[f], nz[f + 1]
        if b == a + 1:
            tc = times[a] + (times[b] - times[a]) * d[a] / (d[a] - d[b])
        else:
            tc = times[a + 1]
        out.append((float(tc), -1 if d[a] < 0 else 1))
    return out


class StepEnumeration:
    """One replanning step's shared table of joint motion hypotheses.

    Each active agent contributes variants — (candidate path, low/high
    speed) pairs — and the table holds their cartesian product.  Sampled
    futures, closest approaches and crossing words are computed here once;
    every observer's belief, for either candidate ego speed, is then just a
    reweighted slice of the same table.  Agents that already arrived are
    parked off the road and take no further part.
    """

    def __init__(
        self,
        agents: Sequence[AgentView],
        imap: IntersectionMap,
        config: PlannerConfig,
        *,
        known_paths: bool,
    ) -> None:
        self.agents = tuple(agents)
        self.config = config
        self.known_paths = known_paths
        self.active = tuple(
            k for k, ag in enumerate(self.agents) if not ag.state.arrived
        )
        self._word_keys: list | None = None
        self._slots_cache: dict[tuple[int, ...], tuple[int, ...]] = {}
        self._belief_cache: dict[tuple, dict] = {}
        if len(self.active) < 2:
            self.n_combos = 0
            return

        self.candidates: list[list[Path]] = []
        self.true_cand: list[int] = []
        for g in self.active:
            ag = self.agents[g]
            if known_paths:
                cands = [ag.path]
            else:
                cands = [p for p, _ in intent_posterior(ag.state, ag.path, imap)]
            self.candidates.append(cands)
            self.true_cand.append(
                next(
                    i
                    for i, c in enumerate(cands)
                    if (c.origin, c.maneuver) == (ag.path.origin, ag.path.maneuver)
                )
            )

        dt = config.rollout_dt
        horizon = 0.0
        for a, g in enumerate(self.active):
            ag = self.agents[g]
            remaining = max(c.length - ag.state.path_progress for c in self.candidates[a])
            horizon = max(horizon, remaining / ag.speed.v_low)
        horizon = min(config.horizon_cap, max(horizon, 2 * dt))
        self.horizon = horizon
        n_steps = max(1, int(math.ceil(horizon / dt - 1e-9)))
        self.times = dt * np.arange(n_steps + 1)

        # sampled future per agent variant; variant index = cand * 2 + (0 low, 1 high)
        self._pos: list[np.ndarray] = []
        self._en_route: list[np.ndarray] = []
        for a, g in enumerate(self.active):
            ag = self.agents[g]
            s0 = ag.state.path_progress
            rows = []
            on_road = []
            for cand in self.candidates[a]:
                for v in (ag.speed.v_low, ag.speed.v_high):
                    s = s0 + v * self.times
                    rows.append(cand.point_at(np.clip(s, 0.0, cand.length)))
                    on_road.append(s < cand.length)
            self._pos.append(np.stack(rows))  # (n_var, T, 2)
            self._en_route.append(np.stack(on_road))  # (n_var, T) bool

        n_var = [p.shape[0] for p in self._pos]
        k = len(self.active)
        grids = np.meshgrid(*[np.arange(nv) for nv in n_var], indexing="ij")
        self.var_choice = np.stack([g.reshape(-1) for g in grids])  # (k, n_combos)
        self.n_combos = self.var_choice.shape[1]

        # pairwise closest approaches and crossing events per variant pair
        self._pairs: list[tuple[int, int]] = [
            (a, b) for a in range(k) for b in range(a + 1, k)
        ]
        self._pair_dmin: dict[tuple[int, int], np.ndarray] = {}
        self._pair_events: dict[tuple[int, int], list[list[list]]] = {}
        for a, b in self._pairs:
            pa, pb = self._pos[a], self._pos[b]
            dx = pa[:, None, :, 0] - pb[None, :, :, 0]
            dy = pa[:, None, :, 1] - pb[None, :, :, 1]
            # a strand that reached its path end has left the scene; it can
            # no longer be hit, so closest approach only counts samples where
            # both cars are still en route (none shared -> no encounter)
            coexist = self._en_route[a][:, None, :] & self._en_route[b][None, :, :]
            dist = np.where(coexist, np.sqrt(dx**2 + dy**2), np.inf)
            self._pair_dmin[(a, b)] = dist.min(axis=2)
            events = [
                [self._events_for(a, b, va, vb, dx[va, vb]) for vb in range(n_var[b])]
                for va in range(n_var[a])
            ]
            self._pair_events[(a, b)] = events

        dmin = np.full(self.n_combos, np.inf)
        for a, b in self._pairs:
            np.minimum(
                dmin,
                self._pair_dmin[(a, b)][self.var_choice[a], self.var_choice[b]],
                out=dmin,
            )
        self.dmin = dmin
        self.survival = np.array(
            [1.0 - collision_probability(float(d), config.collision) for d in dmin]
        )

    def _events_for(self, a, b, va, vb, dx):
        """Crossings of one variant pair: (t_c, which local agent was lower, sign)."""
        out = []
        for tc, pre in _crossing_events(self.times, dx):
            lower, upper = (a, b) if pre < 0 else (b, a)
            vl = va if lower == a else vb
            vu = vb if lower == a else va
            dy = float(
                np.interp(tc, self.times, self._pos[lower][vl, :, 1])
                - np.interp(tc, self.times, self._pos[upper][vu, :, 1])
            )
            sign = 0 if dy == 0.0 else (1 if dy > 0 else -1)
            out.append((tc, lower, sign))
        return out

    # -- crossing words ----------------------------------------------------

    def word_keys(self) -> list:
        """Freely reduced crossing word per combo (cached); degenerate combos
        where the crossing order is not well defined get unique sentinel keys."""
        if self._word_keys is None:
            self._word_keys = [self._word_for(c) for c in range(self.n_combos)]
        return self._word_keys

    def _initial_slots(self, cands: tuple[int, ...]) -> tuple[int, ...]:
        slots = self._slots_cache.get(cands)
        if slots is None:
            ids = [self.agents[g].agent_id for g in self.active]
            x0 = [float(self._pos[a][ci * 2, 0, 0]) for a, ci in enumerate(cands)]
            slots = _ranks_at(x0, ids)
            self._slots_cache[cands] = slots
        return slots

    def _word_for(self, combo: int):
        vc = self.var_choice[:, combo]
        degenerate = ("degenerate", tuple(int(v) for v in vc))
        evs = []
        for a, b in self._pairs:
            for tc, lower, sign in self._pair_events[(a, b)][vc[a]][vc[b]]:
                if sign == 0:  # strands meet head-on: over/under undefined
                    return degenerate
                evs.append((tc, a, b, lower, sign))
        evs.sort()

        slots = list(self._initial_slots(tuple(int(v) // 2 for v in vc)))
        letters: list[int] = []
        k = 0
        while k < len(evs):
            same_t = [evs[k]]
            while k + 1 < len(evs) and evs[k + 1][0] == evs[k][0]:
                k += 1
                same_t.append(evs[k])
            k += 1
            # simultaneous swaps are serialized deterministically: always take
            # the pending event whose strands are currently adjacent, lowest
            # slot first; only an unserializable knot of swaps is degenerate
            pending = [(a, b, lower, sign) for tc, a, b, lower, sign in same_t]
            while pending:
                ready = [
                    (min(slots[a], slots[b]), a, b, lower, sign)
                    for a, b, lower, sign in pending
                    if abs(slots[a] - slots[b]) == 1
                ]
                if not ready:
                    return degenerate
                _, a, b, lower, sign = min(ready)
                pending.remove(
                    next(e for e in pending if (e[0], e[1]) == (a, b))
                )
                by_slots = a if slots[a] < slots[b] else b
                eff = sign if by_slots == lower else -sign
                letter = eff * min(slots[a], slots[b])
                if letters and letters[-1] == -letter:
                    letters.pop()
                else:
                    letters.append(letter)
                slots[a], slots[b] = slots[b], slots[a]
        return tuple(letters)

    # -- belief assembly ----------------------------------------------------

    def belief_entries(
        self,
        ego: int,
        *,
        ego_speed_idx: int | None,
        filtered: bool,
        topological: bool,
    ) -> dict:
        """Aggregate the observer's slice of the table into outcome masses.

        The observer fixes its own route (and optionally its own speed) and
        marginalizes everyone else, modelling all speed preferences with its
        own ``p_high`` — true preferences are private.  Results are memoized:
        a decision round asks for the same slice several times (once per
        candidate action, then again for whichever action won).
        """
        cache_key = (ego, ego_speed_idx, filtered, topological)
        cached = self._belief_cache.get(cache_key)
        if cached is not None:
            return cached
        p_high = self.agents[ego].speed.p_high
        mass = np.ones(self.n_combos)
        for a, g in enumerate(self.active):
            n_cand = len(self.candidates[a])
            w = np.empty(2 * n_cand)
            for ci in range(n_cand):
                if g == ego:  # an agent is never unsure of its own route
                    share = 1.0 if ci == self.true_cand[a] else 0.0
                else:
                    share = 1.0 / n_cand
                for si, sp in ((0, 1.0 - p_high), (1, p_high)):
                    if g == ego and ego_speed_idx is not None:
                        sp = 1.0 if si == ego_speed_idx else 0.0
                    w[ci * 2 + si] = share * sp
            mass *= w[self.var_choice[a]]
        if filtered:
            mass = mass * self.survival

        keys = self.word_keys() if topological else None
        entries: dict = {}
        for c in np.flatnonzero(mass > 0.0):
            if topological:
                key = keys[c]
            else:
                key = ("rollout", tuple(int(v) for v in self.var_choice[:, c]))
            entries[key] = entries.get(key, 0.0) + float(mass[c])
        self._belief_cache[cache_key] = entries
        return entries


# --------------------------------------------------------------------------
# planner entry points
# --------------------------------------------------------------------------


def _ego_speed_index(ego: AgentView, ego_speed: float | None) -> int | None:
    if ego_speed is None:
        return None
    if ego_speed == ego.speed.v_high:
        return 1
    if ego_speed == ego.speed.v_low:
        return 0
    raise ValueError(
        f"ego speed {ego_speed} is neither v_low={ego.speed.v_low} "
        f"nor v_high={ego.speed.v_high}"
    )


def compute_belief(
    ego: int,
    agents: Sequence[AgentView],
    imap: IntersectionMap,
    config: PlannerConfig,
    *,
    ego_speed: float | None = None,
    filtered: bool = True,
    enumeration: StepEnumeration | None = None,
) -> OutcomeBelief:
    """Belief over interaction outcomes as seen by agent ``ego``.

    Every joint hypothesis over neighbour routes and speed choices is rolled
    forward; ``filtered`` discounts each by its collision probability.  Keys
    are crossing words for the topological conditions, rollout identities
    otherwise.  With no one left to interact, the belief is empty and
    flagged terminal.
    """
    if config.condition == "C1":
        raise ValueError("condition C1 does not plan on a belief")
    if enumeration is None:
        enumeration = StepEnumeration(
            agents, imap, config, known_paths=config.condition in KNOWN_PATH_CONDITIONS
        )
    if agents[ego].state.arrived or enumeration.n_combos == 0:
        return OutcomeBelief({}, terminal=True)
    entries = enumeration.belief_entries(
        ego,
        ego_speed_idx=_ego_speed_index(agents[ego], ego_speed),
        filtered=filtered,
        topological=config.condition in TOPOLOGICAL_CONDITIONS,
    )
    total = sum(entries.values())
    return OutcomeBelief(entries, terminal=total < config.mass_floor)


def select_action(
    ego: int,
    agents: Sequence[AgentView],
    imap: IntersectionMap,
    config: PlannerConfig,
    *,
    enumeration: StepEnumeration | None = None,
) -> float:
    """Commanded speed for ``ego``: the candidate whose joint outcome-and-fate
    distribution (see ``_decision_entropy``) is the most resolved.

    A candidate whose belief collapses entirely — every future under it is
    filtered as unsafe — can never be selected while the other retains mass.
    Exact ties go to the preferred fast speed.
    """
    view = agents[ego]
    if view.state.arrived:
        return 0.0
    if config.condition == "C1":
        return view.speed.v_high
    if enumeration is None:
        enumeration = StepEnumeration(
            agents, imap, config, known_paths=config.condition in KNOWN_PATH_CONDITIONS
        )
    if enumeration.n_combos == 0:
        return view.speed.v_high

    def score(speed: float) -> float:
        bel = compute_belief(
            ego, agents, imap, config, ego_speed=speed, enumeration=enumeration
        )
        if bel.terminal:
            return math.inf
        raw = compute_belief(
            ego,
            agents,
            imap,
            config,
            ego_speed=speed,
            filtered=False,
            enumeration=enumeration,
        )
        return _decision_entropy(bel, raw)

    return (
        view.speed.v_high
        if score(view.speed.v_high) <= score(view.speed.v_low)
        else view.speed.v_low
    )


def inattentive_policy(ego: AgentView) -> float:
    """Drive the preferred speed along the intended route; stop once arrived."""
    return 0.0 if ego.state.arrived else ego.speed.v_high


def plan_step(
    agents: Sequence[AgentView],
    imap: IntersectionMap,
    config: PlannerConfig,
    *,
    inattentive: Sequence[int] = (),
) -> tuple[float, ...]:
    """One simultaneous decision round: every agent's commanded speed.

    All agents decide against the same immutable snapshot, so a single
    enumeration serves the whole round.  Indices in ``inattentive`` follow
    the fixed-speed policy instead of planning (the others still model them
    as ordinary drivers — nobody is told who isn't paying attention).
    """
    inattentive = frozenset(inattentive)
    if config.condition == "C1":
        return tuple(inattentive_policy(a) for a in agents)
    enum = StepEnumeration(
        agents, imap, config, known_paths=config.condition in KNOWN_PATH_CONDITIONS
    )
    return tuple(
        inattentive_policy(ag)
        if i in inattentive
        else select_action(i, agents, imap, config, enumeration=enum)
        for i, ag in enumerate(agents)
    )
