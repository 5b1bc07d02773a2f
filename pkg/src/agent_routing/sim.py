"""Deterministic discrete-event simulator for the routed agent network.

Time is integer ticks. A dispatched task follows its routed path hop by
hop: each hop costs ceil(latency) transit ticks, then ceil(complexity /
capability) service ticks at the hop's destination agent. On arrival at
each node the task survives a Bernoulli trial with success probability
equal to that node's reliability; a failed trial terminates the task.

Agent load rises by a fixed quantum per resident (in-service) task per tick
and decays multiplicatively toward its configured base; availability is
derived from load every tick as max(EPS_DIV, 1 - min(1, load)). These
dynamics are a simulation model choice, configurable per scenario.

Three independent seeded streams drive workload generation, failure trials,
and learning exploration, so any one can be varied in isolation.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidParams
from .filtering import EwmaHistory, FilterPolicy, apply_filter
from .hierarchy import Clustering, build_clustering, route_hierarchical
from .model import (
    EPS_DIV,
    AgentGraph,
    RouteResult,
    Task,
    Unreachable,
    WeightVector,
    validate_graph,
    validate_weights,
)
from .rl import RLConfig, RewardRecord, WeightAdapter, WindowTaskRecord, latency_buckets_for
from .router import route

DEFAULT_LOAD_QUANTUM = 0.1
DEFAULT_LOAD_DECAY = 0.95


@dataclass(frozen=True)
class WorkloadPhase:
    length: int
    rate: float
    t_range: tuple[float, float]
    p_range: tuple[float, float]


@dataclass(frozen=True)
class WorkloadParams:
    """Arrival process and task-distribution parameters.

    Arrivals per tick are floor(rate) plus a Bernoulli draw on the
    fractional part. ``phases``, when set, cycle over the run and override
    the flat parameters tick by tick.
    """

    rate: float = 1.0
    t_range: tuple[float, float] = (1.0, 5.0)
    p_range: tuple[float, float] = (1.0, 10.0)
    phases: tuple[WorkloadPhase, ...] = ()

    def validate(self) -> list[str]:
        problems = []
        if self.phases:
            if all(p.rate == 0 for p in self.phases):
                problems.append("workload: every phase has rate 0")
            for i, phase in enumerate(self.phases):
                if phase.length < 1:
                    problems.append(f"workload phase {i}: length {phase.length} must be >= 1")
                if phase.rate < 0:
                    problems.append(f"workload phase {i}: rate {phase.rate} must be >= 0")
                problems += _check_range(f"workload phase {i}: t_range", phase.t_range)
                problems += _check_range(f"workload phase {i}: p_range", phase.p_range)
        else:
            if not self.rate > 0:
                problems.append(f"workload: rate {self.rate} must be > 0")
            problems += _check_range("workload: t_range", self.t_range)
            problems += _check_range("workload: p_range", self.p_range)
        return problems

    def phase_at(self, tick: int) -> WorkloadPhase:
        if not self.phases:
            return WorkloadPhase(1, self.rate, self.t_range, self.p_range)
        cycle = sum(p.length for p in self.phases)
        offset = tick % cycle
        for phase in self.phases:
            if offset < phase.length:
                return phase
            offset -= phase.length
        raise AssertionError("phase cycle arithmetic is off")


def _check_range(label: str, bounds: tuple[float, float]) -> list[str]:
    lo, hi = bounds
    if not (0 < lo <= hi):
        return [f"{label} ({lo}, {hi}) needs 0 < lo <= hi"]
    return []


@dataclass(frozen=True)
class SimParams:
    duration: int = 100
    workload_seed: int = 1
    failure_seed: int = 2
    rl_seed: int = 3
    load_quantum: float = DEFAULT_LOAD_QUANTUM
    load_decay: float = DEFAULT_LOAD_DECAY

    def validate(self) -> list[str]:
        problems = []
        if self.duration < 0:
            problems.append(f"sim: duration {self.duration} must be >= 0")
        if self.load_quantum < 0:
            problems.append(f"sim: load_quantum {self.load_quantum} must be >= 0")
        if not (0 <= self.load_decay < 1):
            problems.append(f"sim: load_decay {self.load_decay} outside [0, 1)")
        return problems


@dataclass(frozen=True)
class HierarchyParams:
    k: int
    seed: int = 0


@dataclass
class Scenario:
    """Everything a run needs: the network plus policy blocks."""

    graph: AgentGraph
    weights: WeightVector
    workload: WorkloadParams = WorkloadParams()
    sim: SimParams = SimParams()
    filter_policy: FilterPolicy | None = None
    hierarchy: HierarchyParams | None = None
    rl: RLConfig = RLConfig()
    names: dict[int, str] = field(default_factory=dict)


@dataclass(frozen=True)
class TaskOutcome:
    task_id: int
    path: tuple[int, ...]
    dispatch_tick: int
    completion_tick: int
    completion_time: int
    succeeded: bool
    failure_node: int | None


@dataclass
class RunReport:
    tasks: list[Task]
    outcomes: list[TaskOutcome]
    rewards: list[RewardRecord]
    initial_weights: WeightVector
    final_weights: WeightVector
    cost_ratios: list[float]
    records: list[dict]  # export records in emission order
    q_table: "np.ndarray"


def generate_workload(
    params: WorkloadParams, node_ids: list[int], duration: int, seed: int
) -> list[Task]:
    """Seeded task stream ordered by submit tick; uniform T, P and endpoints."""
    problems = params.validate()
    if problems:
        raise InvalidParams("; ".join(problems))
    if len(node_ids) < 2:
        raise InvalidParams("workload needs at least 2 nodes")
    rng = random.Random(seed)
    ordered_ids = sorted(node_ids)
    tasks = []
    task_id = 0
    for tick in range(duration):
        phase = params.phase_at(tick)
        count = int(phase.rate)
        fraction = phase.rate - count
        if fraction > 0 and rng.random() < fraction:
            count += 1
        for _ in range(count):
            complexity = rng.uniform(*phase.t_range)
            priority = rng.uniform(*phase.p_range)
            source, destination = rng.sample(ordered_ids, 2)
            tasks.append(
                Task(
                    id=task_id,
                    complexity=complexity,
                    priority=priority,
                    source=source,
                    destination=destination,
                    submit_time=tick,
                )
            )
            task_id += 1
    return tasks


@dataclass
class _InFlight:
    task: Task
    path: tuple[int, ...]
    # (tick, kind, node): kind is "arrive" or "service_end"; strictly ordered.
    events: list[tuple[int, str, int]]
    hop_latencies: tuple[float, ...]
    traversed: int = 0  # hops whose arrival trial has been passed or failed
    service_node: int | None = None
    next_event: int = 0


class World:
    """Mutable run state; owned by a single run() invocation."""

    def __init__(self, scenario: Scenario, no_filter: bool = False):
        problems = validate_scenario(scenario)
        if problems:
            raise InvalidParams("; ".join(problems))
        self.scenario = scenario
        self.graph = scenario.graph
        self.base_load = {i: n.load_factor for i, n in scenario.graph.nodes.items()}
        self.load = dict(self.base_load)
        self.weights = scenario.weights
        self.filter_policy = None if no_filter else scenario.filter_policy
        self.history = EwmaHistory()
        self.clustering: Clustering | None = None
        if scenario.hierarchy is not None:
            self.clustering = build_clustering(
                scenario.graph, scenario.hierarchy.k, scenario.hierarchy.seed
            )
        self.failure_rng = random.Random(scenario.sim.failure_seed)
        self.adapter = WeightAdapter(
            scenario.rl,
            scenario.weights,
            latency_buckets_for([e.latency for e in scenario.graph.edges]),
            random.Random(scenario.sim.rl_seed),
        )
        self.in_flight: list[_InFlight] = []
        self.outcomes: list[TaskOutcome] = []
        self.rewards: list[RewardRecord] = []
        self.cost_ratios: list[float] = []
        self.records: list[dict] = []
        self._window_buffer: list[WindowTaskRecord] = []
        self._priorities: dict[int, float] = {}
        self._refresh_graph()

    # -- per-tick dynamics ------------------------------------------------

    def _refresh_graph(self) -> None:
        updated = {}
        for node_id, node in self.graph.nodes.items():
            load = self.load[node_id]
            availability = max(EPS_DIV, 1.0 - min(1.0, load))
            if load != node.load_factor or availability != node.availability:
                updated[node_id] = replace(node, load_factor=load, availability=availability)
        if updated:
            self.graph = self.graph.with_updated_nodes(updated)

    def _decay_loads(self) -> None:
        decay = self.scenario.sim.load_decay
        for node_id, base in self.base_load.items():
            self.load[node_id] = base + (self.load[node_id] - base) * decay

    def _route_task(self, task: Task) -> tuple[RouteResult | Unreachable, float | None]:
        graph = self.graph
        if self.filter_policy is not None:
            graph = apply_filter(graph, self.filter_policy, task, self.history)
        if self.clustering is not None:
            result = route_hierarchical(graph, self.clustering, task, self.weights)
            flat = route(graph, task, self.weights)
            ratio = None
            if not isinstance(result, Unreachable) and not isinstance(flat, Unreachable):
                ratio = result.total_cost / flat.total_cost if flat.total_cost > 0 else 1.0
            return result, ratio
        return route(graph, task, self.weights), None

    def _schedule(self, task: Task, result: RouteResult, tick: int) -> _InFlight:
        events = []
        latencies = []
        clock = tick
        for u, v in zip(result.path, result.path[1:]):
            link = self.graph.edge(u, v)
            clock += math.ceil(link.latency)
            events.append((clock, "arrive", v))
            service = math.ceil(task.complexity / self.graph.nodes[v].capability)
            clock += service
            events.append((clock, "service_end", v))
            latencies.append(link.latency)
        return _InFlight(
            task=task,
            path=result.path,
            events=events,
            hop_latencies=tuple(latencies),
        )

    def _dispatch(self, task: Task, tick: int) -> None:
        self._priorities[task.id] = task.priority
        result, ratio = self._route_task(task)
        if ratio is not None:
            self.cost_ratios.append(ratio)
        if isinstance(result, Unreachable):
            self._emit(
                TaskOutcome(
                    task_id=task.id,
                    path=(),
                    dispatch_tick=tick,
                    completion_tick=tick,
                    completion_time=0,
                    succeeded=False,
                    failure_node=None,
                ),
                hop_latencies=(),
            )
            return
        if len(result.path) == 1:
            self._emit(
                TaskOutcome(
                    task_id=task.id,
                    path=result.path,
                    dispatch_tick=tick,
                    completion_tick=tick,
                    completion_time=0,
                    succeeded=True,
                    failure_node=None,
                ),
                hop_latencies=(),
            )
            return
        self.in_flight.append(self._schedule(task, result, tick))

    def _advance(self, tick: int) -> None:
        # Residency is counted from state at tick start, before events fire.
        residents: dict[int, int] = {}
        for flight in self.in_flight:
            if flight.service_node is not None:
                residents[flight.service_node] = residents.get(flight.service_node, 0) + 1

        survivors = []
        for flight in self.in_flight:
            finished = self._process_events(flight, tick)
            if not finished:
                survivors.append(flight)
        self.in_flight = survivors

        quantum = self.scenario.sim.load_quantum
        for node_id, count in residents.items():
            self.load[node_id] += quantum * count

    def _process_events(self, flight: _InFlight, tick: int) -> bool:
        """Fire all events due by ``tick``; True when the task left the system."""
        events = flight.events
        while flight.next_event < len(events) and events[flight.next_event][0] <= tick:
            _, kind, node = events[flight.next_event]
            flight.next_event += 1
            if kind == "arrive":
                flight.traversed += 1
                reliability = self.graph.nodes[node].reliability
                if self.failure_rng.random() >= reliability:
                    self._emit(
                        TaskOutcome(
                            task_id=flight.task.id,
                            path=flight.path,
                            dispatch_tick=flight.task.submit_time,
                            completion_tick=tick,
                            completion_time=tick - flight.task.submit_time,
                            succeeded=False,
                            failure_node=node,
                        ),
                        hop_latencies=flight.hop_latencies[: flight.traversed],
                    )
                    return True
                flight.service_node = node
            else:
                flight.service_node = None
                if flight.next_event == len(events):
                    self._emit(
                        TaskOutcome(
                            task_id=flight.task.id,
                            path=flight.path,
                            dispatch_tick=flight.task.submit_time,
                            completion_tick=tick,
                            completion_time=tick - flight.task.submit_time,
                            succeeded=True,
                            failure_node=None,
                        ),
                        hop_latencies=flight.hop_latencies,
                    )
                    return True
        return False

    def _emit(self, outcome: TaskOutcome, hop_latencies: tuple[float, ...]) -> None:
        self.outcomes.append(outcome)
        self.records.append(_outcome_record(outcome, self._priorities[outcome.task_id]))
        self._window_buffer.append(
            WindowTaskRecord(
                priority=self._priorities[outcome.task_id],
                completion_time=outcome.completion_time,
                succeeded=outcome.succeeded,
                hop_latencies=hop_latencies,
            )
        )

    def _close_windows(self, tick: int, duration: int) -> None:
        window = self.scenario.rl.window
        while len(self._window_buffer) >= window:
            batch = self._window_buffer[:window]
            self._window_buffer = self._window_buffer[window:]
            loads = [self.load[i] for i in sorted(self.load)]
            progress = tick / duration if duration > 0 else 1.0
            reward = self.adapter.process_window(batch, loads, progress)
            self.weights = self.adapter.weights
            self.rewards.append(reward)
            self.records.append(_reward_record(reward, loads))

    def step(self, tick: int, arrivals: list[Task], duration: int) -> None:
        """One tick: decay, advance in-flight work, dispatch, bookkeeping."""
        self._decay_loads()
        self._advance(tick)
        self._refresh_graph()
        for task in arrivals:
            self._dispatch(task, tick)
        self.history.observe(self.graph)
        self._close_windows(tick, duration)


def run(scenario: Scenario, no_filter: bool = False) -> RunReport:
    """Execute the scenario to completion (arrivals plus drain); deterministic per seeds."""
    duration = scenario.sim.duration
    world = World(scenario, no_filter=no_filter)
    tasks: list[Task] = []
    if duration > 0:
        tasks = generate_workload(
            scenario.workload,
            scenario.graph.node_ids(),
            duration,
            scenario.sim.workload_seed,
        )
    by_tick: dict[int, list[Task]] = {}
    for task in tasks:
        by_tick.setdefault(task.submit_time, []).append(task)

    tick = 0
    while tick < duration or world.in_flight:
        world.step(tick, by_tick.get(tick, []), duration)
        tick += 1

    return RunReport(
        tasks=tasks,
        outcomes=world.outcomes,
        rewards=world.rewards,
        initial_weights=scenario.weights,
        final_weights=world.weights,
        cost_ratios=world.cost_ratios,
        records=world.records,
        q_table=world.adapter.q_table,
    )


def validate_scenario(scenario: Scenario) -> list[str]:
    """Aggregate validation across all blocks; empty list when runnable."""
    problems = validate_graph(scenario.graph)
    problems += validate_weights(scenario.weights)
    problems += scenario.workload.validate()
    problems += scenario.sim.validate()
    if scenario.filter_policy is not None:
        problems += scenario.filter_policy.validate()
    if scenario.hierarchy is not None:
        n = len(scenario.graph.nodes)
        if not 1 <= scenario.hierarchy.k <= max(n, 1):
            problems.append(f"hierarchy: k {scenario.hierarchy.k} outside [1, {n}]")
    problems += scenario.rl.validate()
    return problems


def _outcome_record(outcome: TaskOutcome, priority: float) -> dict:
    return {
        "record": "task_outcome",
        "task_id": outcome.task_id,
        "path": list(outcome.path),
        "dispatch_tick": outcome.dispatch_tick,
        "completion_tick": outcome.completion_tick,
        "completion_time": outcome.completion_time,
        "succeeded": outcome.succeeded,
        "failure_node": outcome.failure_node,
        "priority": priority,
    }


def _reward_record(reward: RewardRecord, loads: list[float]) -> dict:
    hp, fairness, reliability = reward.components
    return {
        "record": "reward",
        "window_id": reward.window_id,
        "reward": reward.reward,
        "hp_completion_term": hp,
        "fairness_term": fairness,
        "reliability_term": reliability,
        "agent_loads": loads,
    }
