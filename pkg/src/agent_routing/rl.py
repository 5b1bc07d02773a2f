"""Learning loop that adapts the cost weights from observed workload performance.

Between windows of completed tasks the adapter summarizes the window into a
coarse state, scores it with a scalar reward (high-priority completion
speed, load fairness, reliability), and nudges one weight component up or
down. Learning is tabular Q-learning over 81 discretized states and 14
actions (seven weights times two directions), chosen for reproducibility
and inspectability at desk scale.

Weights only ever change between windows; every route inside a window sees
the same frozen vector.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .errors import EmptyWindow
from .model import WeightVector

N_STATES = 81
N_ACTIONS = 14

# Bucket edges for the discretized state. Latency buckets are graph-derived
# (terciles of edge latency, fixed per run); the rest are fixed here.
LOAD_MEAN_BUCKETS = (0.2, 0.5)
INCIDENT_BUCKETS = (0, 2)
PRIORITY_PROFILE_BUCKETS = (1 / 3, 2 / 3)


@dataclass(frozen=True)
class RLState:
    """Window summary: network latency, load spread, failures, priority mix."""

    avg_latency: float
    load_stats: tuple[float, float]
    recent_reliability_incidents: int
    priority_profile: float


@dataclass(frozen=True)
class RLAction:
    """Perturb one weight component multiplicatively."""

    index: int  # 1..7
    direction: int  # +1 or -1
    step: float


@dataclass(frozen=True)
class RewardRecord:
    reward: float
    components: tuple[float, float, float]  # (hp_completion, fairness, reliability)
    window_id: int


@dataclass(frozen=True)
class WindowTaskRecord:
    """Per-task facts the adapter consumes; assembled by the harness."""

    priority: float
    completion_time: int
    succeeded: bool
    hop_latencies: tuple[float, ...]


@dataclass(frozen=True)
class RLConfig:
    enabled: bool = False
    eta: float = 0.1
    gamma_d: float = 0.9
    epsilon_start: float = 0.3
    epsilon_end: float = 0.05
    step: float = 0.1
    window: int = 100
    alpha: float = 0.5
    beta: float = 0.3
    gamma: float = 0.2
    hp_threshold: float = 5.0
    w_min: float = 0.01
    w_max: float = 100.0

    def validate(self) -> list[str]:
        problems = []
        if self.window < 1:
            problems.append(f"rl: window {self.window} must be >= 1")
        for name in ("eta", "gamma_d", "epsilon_start", "epsilon_end"):
            value = getattr(self, name)
            if not (0 <= value <= 1):
                problems.append(f"rl: {name} {value} outside [0, 1]")
        if self.step < 0:
            problems.append(f"rl: step {self.step} must be >= 0")
        for name in ("alpha", "beta", "gamma"):
            if getattr(self, name) < 0:
                problems.append(f"rl: {name} must be >= 0")
        if not (0 < self.w_min <= self.w_max):
            problems.append(f"rl: need 0 < w_min <= w_max, got [{self.w_min}, {self.w_max}]")
        if self.hp_threshold <= 0:
            problems.append(f"rl: hp_threshold {self.hp_threshold} must be > 0")
        return problems


def action_from_index(a: int, step: float) -> RLAction:
    """Actions are ordered (w1,+1), (w1,-1), (w2,+1), ... (w7,-1)."""
    return RLAction(index=a // 2 + 1, direction=+1 if a % 2 == 0 else -1, step=step)


def action_to_index(action: RLAction) -> int:
    return (action.index - 1) * 2 + (0 if action.direction > 0 else 1)


def new_q_table() -> np.ndarray:
    return np.zeros((N_STATES, N_ACTIONS), dtype=np.float64)


def observe_window(
    records: list[WindowTaskRecord],
    agent_loads: list[float],
    hp_threshold: float,
) -> RLState:
    """Summarize a completed window. Raises EmptyWindow when no tasks finished."""
    if not records:
        raise EmptyWindow("no completed tasks in window")
    hops = [lat for record in records for lat in record.hop_latencies]
    avg_latency = float(np.mean(hops)) if hops else 0.0
    loads = np.asarray(agent_loads, dtype=np.float64)
    load_stats = (float(loads.mean()), float(loads.std())) if loads.size else (0.0, 0.0)
    incidents = sum(1 for record in records if not record.succeeded)
    profile = sum(1 for r in records if r.priority >= hp_threshold) / len(records)
    return RLState(
        avg_latency=avg_latency,
        load_stats=load_stats,
        recent_reliability_incidents=incidents,
        priority_profile=profile,
    )


def discretize(state: RLState, latency_buckets: tuple[float, float]) -> int:
    """Map a state onto 0..80 (four fields, three levels each)."""
    lat = _bucket(state.avg_latency, latency_buckets)
    load = _bucket(state.load_stats[0], LOAD_MEAN_BUCKETS)
    incidents = _bucket(state.recent_reliability_incidents, INCIDENT_BUCKETS, closed=True)
    profile = _bucket(state.priority_profile, PRIORITY_PROFILE_BUCKETS)
    return ((lat * 3 + load) * 3 + incidents) * 3 + profile


def _bucket(value: float, edges: tuple[float, float], closed: bool = False) -> int:
    lo, hi = edges
    if closed:
        return 0 if value <= lo else (1 if value <= hi else 2)
    return 0 if value < lo else (1 if value < hi else 2)


def latency_buckets_for(edge_latencies: list[float]) -> tuple[float, float]:
    """Tercile edges of the graph's latencies; fixed for a whole run."""
    if not edge_latencies:
        return (1.0, 2.0)
    lo, hi = np.percentile(edge_latencies, [33.0, 67.0])
    return (float(lo), float(hi))


def normalized_gini(values: list[float]) -> float:
    """Inequality of ``values`` scaled to [0, 1]; 0 for <= 1 value or zero mass."""
    n = len(values)
    if n <= 1:
        return 0.0
    total = float(sum(values))
    if total <= 0:
        return 0.0
    ranked = sorted(values)
    weighted = sum((i + 1) * x for i, x in enumerate(ranked))
    gini = (2.0 * weighted) / (n * total) - (n + 1) / n
    return gini * n / (n - 1)


def compute_reward(
    records: list[WindowTaskRecord],
    agent_loads: list[float],
    config: RLConfig,
    window_id: int,
) -> RewardRecord:
    """Score a window: (alpha, beta, gamma)-weighted mix of three [0, 1] terms.

    The completion term uses successful high-priority tasks only (a failed
    task has no meaningful completion time) and defaults to 1 when the
    window has none. Raises EmptyWindow for an empty window.
    """
    if not records:
        raise EmptyWindow("no completed tasks in window")
    hp_times = [
        r.completion_time
        for r in records
        if r.priority >= config.hp_threshold and r.succeeded
    ]
    hp_term = 1.0 / (1.0 + float(np.mean(hp_times))) if hp_times else 1.0
    fairness_term = 1.0 - normalized_gini(agent_loads)
    reliability_term = sum(1 for r in records if r.succeeded) / len(records)
    reward = (
        config.alpha * hp_term
        + config.beta * fairness_term
        + config.gamma * reliability_term
    )
    return RewardRecord(
        reward=reward,
        components=(hp_term, fairness_term, reliability_term),
        window_id=window_id,
    )


def select_action(
    state_index: int,
    q_table: np.ndarray,
    epsilon: float,
    rng: random.Random,
    step: float,
) -> RLAction:
    """Epsilon-greedy over the 14 actions; Q ties break to the lowest index."""
    if rng.random() < epsilon:
        return action_from_index(rng.randrange(N_ACTIONS), step)
    return action_from_index(int(np.argmax(q_table[state_index])), step)


def update(
    q_table: np.ndarray,
    state_index: int,
    action_index: int,
    reward: float,
    next_state_index: int,
    eta: float,
    gamma_d: float,
) -> np.ndarray:
    """One tabular Q-learning step, in place; returns the table."""
    current = q_table[state_index, action_index]
    target = reward + gamma_d * float(np.max(q_table[next_state_index]))
    q_table[state_index, action_index] = current + eta * (target - current)
    return q_table


def apply_action(
    weights: WeightVector, action: RLAction, bounds: tuple[float, float]
) -> WeightVector:
    """Scale one component by (1 + direction*step), clamped to bounds."""
    w_min, w_max = bounds
    value = weights.component(action.index) * (1.0 + action.direction * action.step)
    return weights.with_component(action.index, min(w_max, max(w_min, value)))


class WeightAdapter:
    """Drives the learning cycle between windows; owns the Q-table and RNG.

    ``process_window`` consumes one finished window, records its reward,
    folds it into the Q-table against the previous action, then picks and
    applies the next perturbation. With adaptation disabled the reward is
    still recorded so frozen-weight baselines stay comparable.
    """

    def __init__(
        self,
        config: RLConfig,
        weights: WeightVector,
        latency_buckets: tuple[float, float],
        rng: random.Random,
    ):
        self.config = config
        self.weights = weights
        self.latency_buckets = latency_buckets
        self.rng = rng
        self.q_table = new_q_table()
        self.window_count = 0
        self._previous: tuple[int, int] | None = None

    def epsilon_at(self, progress: float) -> float:
        progress = min(1.0, max(0.0, progress))
        cfg = self.config
        return cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * progress

    def process_window(
        self,
        records: list[WindowTaskRecord],
        agent_loads: list[float],
        progress: float,
    ) -> RewardRecord:
        cfg = self.config
        reward_record = compute_reward(records, agent_loads, cfg, self.window_count)
        self.window_count += 1
        if not cfg.enabled:
            return reward_record

        state = observe_window(records, agent_loads, cfg.hp_threshold)
        state_index = discretize(state, self.latency_buckets)
        if self._previous is not None:
            prev_state, prev_action = self._previous
            update(
                self.q_table,
                prev_state,
                prev_action,
                reward_record.reward,
                state_index,
                cfg.eta,
                cfg.gamma_d,
            )
        action = select_action(
            state_index, self.q_table, self.epsilon_at(progress), self.rng, cfg.step
        )
        self.weights = apply_action(self.weights, action, (cfg.w_min, cfg.w_max))
        self._previous = (state_index, action_to_index(action))
        return reward_record
