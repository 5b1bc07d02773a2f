"""Scenario files: a human-editable YAML schema describing the network and
policy blocks.

Required sections are ``nodes``, ``edges`` and ``weights``; ``workload``,
``filter``, ``hierarchy``, ``rl`` and ``sim`` are optional and fall back to
documented defaults. Unknown keys anywhere are hard errors (typo
protection), reported with the line they appear on. Nodes may be labeled by
integer ``id`` or string ``name``; labels are mapped to dense internal ids
in file order via a symbol table. Edges are directed; ``symmetric: true``
expands one entry into both directions.
"""

from __future__ import annotations

from pathlib import Path

import yaml
from yaml.nodes import MappingNode, ScalarNode, SequenceNode

from .errors import ScenarioError
from .filtering import FilterPolicy
from .model import AgentGraph, AgentNode, Link, Task, WeightVector, build_graph, validate_graph, validate_weights
from .rl import RLConfig
from .sim import HierarchyParams, Scenario, SimParams, WorkloadParams, WorkloadPhase

TOP_LEVEL_KEYS = {"nodes", "edges", "weights", "workload", "filter", "hierarchy", "rl", "sim"}
NODE_KEYS = {"id", "name", "capability", "availability", "load_factor", "model_sophistication", "reliability"}
EDGE_KEYS = {"from", "to", "bandwidth", "latency", "symmetric"}
WEIGHT_KEYS = set(WeightVector.field_names())
WORKLOAD_KEYS = {"rate", "t_min", "t_max", "p_min", "p_max", "phases"}
PHASE_KEYS = {"length", "rate", "t_min", "t_max", "p_min", "p_max"}
FILTER_KEYS = {"enabled", "max_latency", "min_reliability", "min_availability"}
HIERARCHY_KEYS = {"k", "seed"}
RL_KEYS = {
    "enabled", "eta", "gamma_d", "epsilon_start", "epsilon_end", "step",
    "window", "alpha", "beta", "gamma", "hp_threshold", "w_min", "w_max",
}
SIM_KEYS = {"duration", "workload_seed", "failure_seed", "rl_seed", "load_quantum", "load_decay"}

NODE_METRIC_DEFAULTS = {
    "capability": 1.0,
    "availability": 1.0,
    "load_factor": 0.0,
    "model_sophistication": 1.0,
    "reliability": 1.0,
}


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from exc
    return parse_scenario_text(text)


def parse_scenario_text(text: str) -> Scenario:
    data, lines = _load_with_lines(text)
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a mapping of sections", lines.get((), 1))
    _reject_unknown(data, TOP_LEVEL_KEYS, (), lines)
    for required in ("nodes", "edges", "weights"):
        if required not in data:
            raise ScenarioError(f"missing required section '{required}'", 1)

    graph, names = _parse_graph(data, lines)
    weights = _parse_weights(data["weights"], ("weights",), lines)
    workload = _parse_workload(data.get("workload"), ("workload",), lines)
    filter_policy = _parse_filter(data.get("filter"), ("filter",), lines)
    hierarchy = _parse_hierarchy(data.get("hierarchy"), ("hierarchy",), lines, len(graph.nodes))
    rl = _parse_rl(data.get("rl"), ("rl",), lines)
    sim = _parse_sim(data.get("sim"), ("sim",), lines)

    violations = validate_graph(graph) + validate_weights(weights)
    if violations:
        raise ScenarioError("; ".join(violations), lines.get(("nodes",), 1))
    for block, key in ((filter_policy, "filter"), (rl, "rl"), (sim, "sim"), (workload, "workload")):
        problems = block.validate() if block is not None else []
        if problems:
            raise ScenarioError("; ".join(problems), lines.get((key,), 1))

    return Scenario(
        graph=graph,
        weights=weights,
        workload=workload,
        sim=sim,
        filter_policy=filter_policy,
        hierarchy=hierarchy,
        rl=rl,
        names=names,
    )


def resolve_label(scenario: Scenario, label: str) -> int:
    """Map a CLI-supplied node label (name or id literal) to an internal id."""
    table = {name: node_id for node_id, name in scenario.names.items()}
    if label in table:
        return table[label]
    raise ScenarioError(f"unknown node label '{label}'")


def make_task(
    scenario: Scenario, source_label: str, dest_label: str, complexity: float, priority: float
) -> Task:
    return Task(
        id=0,
        complexity=complexity,
        priority=priority,
        source=resolve_label(scenario, source_label),
        destination=resolve_label(scenario, dest_label),
        submit_time=0,
    )


def dump_graph_scenario(graph: AgentGraph, weights: WeightVector) -> str:
    """Minimal scenario text for a graph; inverse of the loader's graph part."""
    nodes = [
        {
            "id": node.id,
            "capability": node.capability,
            "availability": node.availability,
            "load_factor": node.load_factor,
            "model_sophistication": node.model_sophistication,
            "reliability": node.reliability,
        }
        for _, node in sorted(graph.nodes.items())
    ]
    edges = [
        {"from": link.src, "to": link.dst, "bandwidth": link.bandwidth, "latency": link.latency}
        for link in sorted(graph.edges, key=lambda e: (e.src, e.dst))
    ]
    payload = {
        "nodes": nodes,
        "edges": edges,
        "weights": dict(zip(WeightVector.field_names(), weights.as_tuple())),
    }
    return yaml.safe_dump(payload, sort_keys=False)


# -- YAML with line tracking --------------------------------------------------


def _load_with_lines(text: str):
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ScenarioError(f"not valid YAML: {getattr(exc, 'problem', exc)}", line) from exc
    if root is None:
        raise ScenarioError("scenario file is empty", 1)
    lines: dict[tuple, int] = {}
    data = _convert(root, (), lines)
    return data, lines


def _convert(node, path, lines):
    lines.setdefault(path, node.start_mark.line + 1)
    if isinstance(node, MappingNode):
        out = {}
        for key_node, value_node in node.value:
            key = _convert_scalar(key_node, path, lines)
            if not isinstance(key, str):
                raise ScenarioError(f"mapping keys must be strings, got {key!r}",
                                    key_node.start_mark.line + 1)
            if key in out:
                raise ScenarioError(f"duplicate key '{key}'", key_node.start_mark.line + 1)
            lines[path + (key,)] = key_node.start_mark.line + 1
            out[key] = _convert(value_node, path + (key,), lines)
        return out
    if isinstance(node, SequenceNode):
        return [_convert(child, path + (i,), lines) for i, child in enumerate(node.value)]
    return _convert_scalar(node, path, lines)


def _convert_scalar(node: ScalarNode, path, lines):
    tag = node.tag.rsplit(":", 1)[-1]
    line = node.start_mark.line + 1
    try:
        if tag == "int":
            return int(node.value)
        if tag == "float":
            return float(node.value)
        if tag == "bool":
            return node.value.lower() in ("true", "yes", "on")
        if tag == "null":
            return None
    except ValueError as exc:
        raise ScenarioError(f"cannot parse scalar {node.value!r} as {tag}", line) from exc
    return node.value


def _line(lines, path) -> int:
    while path:
        if path in lines:
            return lines[path]
        path = path[:-1]
    return lines.get((), 1)


def _reject_unknown(mapping: dict, allowed: set, path, lines) -> None:
    for key in mapping:
        if key not in allowed:
            raise ScenarioError(
                f"unknown key '{key}' (allowed: {', '.join(sorted(allowed))})",
                _line(lines, path + (key,)),
            )


def _expect_mapping(value, path, lines, label):
    if not isinstance(value, dict):
        raise ScenarioError(f"{label} must be a mapping", _line(lines, path))
    return value


def _expect_list(value, path, lines, label):
    if not isinstance(value, list):
        raise ScenarioError(f"{label} must be a list", _line(lines, path))
    return value


def _number(mapping, key, default, path, lines):
    if key not in mapping:
        if default is None:
            raise ScenarioError(f"missing required key '{key}'", _line(lines, path))
        return default
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"'{key}' must be a number, got {value!r}", _line(lines, path + (key,)))
    return float(value)


def _integer(mapping, key, default, path, lines):
    if key not in mapping:
        if default is None:
            raise ScenarioError(f"missing required key '{key}'", _line(lines, path))
        return default
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"'{key}' must be an integer, got {value!r}", _line(lines, path + (key,)))
    return value


def _boolean(mapping, key, default, path, lines):
    value = mapping.get(key, default)
    if not isinstance(value, bool):
        raise ScenarioError(f"'{key}' must be a boolean, got {value!r}", _line(lines, path + (key,)))
    return value


# -- section parsers -----------------------------------------------------------


def _parse_graph(data, lines) -> tuple[AgentGraph, dict[int, str]]:
    node_entries = _expect_list(data["nodes"], ("nodes",), lines, "'nodes'")
    if not node_entries:
        raise ScenarioError("'nodes' must not be empty", _line(lines, ("nodes",)))
    nodes = []
    symbols: dict[str, int] = {}
    names: dict[int, str] = {}
    for i, entry in enumerate(node_entries):
        path = ("nodes", i)
        entry = _expect_mapping(entry, path, lines, f"node entry {i}")
        _reject_unknown(entry, NODE_KEYS, path, lines)
        if ("id" in entry) == ("name" in entry):
            raise ScenarioError("each node needs exactly one of 'id' or 'name'", _line(lines, path))
        label = str(entry["id"]) if "id" in entry else entry["name"]
        if not isinstance(label, str) or not label:
            raise ScenarioError(f"node label must be non-empty, got {label!r}", _line(lines, path))
        if label in symbols:
            raise ScenarioError(f"duplicate node label '{label}'", _line(lines, path))
        dense_id = len(nodes)
        symbols[label] = dense_id
        names[dense_id] = label
        metrics = {
            key: _number(entry, key, default, path, lines)
            for key, default in NODE_METRIC_DEFAULTS.items()
        }
        nodes.append(AgentNode(id=dense_id, **metrics))

    edge_entries = _expect_list(data["edges"], ("edges",), lines, "'edges'")
    links = []
    seen_pairs: set[tuple[int, int]] = set()
    for i, entry in enumerate(edge_entries):
        path = ("edges", i)
        entry = _expect_mapping(entry, path, lines, f"edge entry {i}")
        _reject_unknown(entry, EDGE_KEYS, path, lines)
        endpoints = []
        for key in ("from", "to"):
            if key not in entry:
                raise ScenarioError(f"edge entry {i}: missing '{key}'", _line(lines, path))
            label = str(entry[key])
            if label not in symbols:
                raise ScenarioError(f"edge references unknown node '{label}'", _line(lines, path + (key,)))
            endpoints.append(symbols[label])
        src, dst = endpoints
        bandwidth = _number(entry, "bandwidth", 1.0, path, lines)
        latency = _number(entry, "latency", 0.0, path, lines)
        directions = [(src, dst)]
        if _boolean(entry, "symmetric", False, path, lines):
            directions.append((dst, src))
        for a, b in directions:
            if (a, b) in seen_pairs:
                raise ScenarioError(
                    f"duplicate edge {names[a]}->{names[b]}", _line(lines, path)
                )
            seen_pairs.add((a, b))
            links.append(Link(src=a, dst=b, bandwidth=bandwidth, latency=latency))

    return build_graph(nodes, links), names


def _parse_weights(value, path, lines) -> WeightVector:
    mapping = _expect_mapping(value, path, lines, "'weights'")
    _reject_unknown(mapping, WEIGHT_KEYS, path, lines)
    components = [_number(mapping, key, None, path, lines) for key in WeightVector.field_names()]
    try:
        return WeightVector(*components)
    except ValueError as exc:
        raise ScenarioError(str(exc), _line(lines, path)) from exc


def _parse_workload(value, path, lines) -> WorkloadParams:
    if value is None:
        return WorkloadParams()
    mapping = _expect_mapping(value, path, lines, "'workload'")
    _reject_unknown(mapping, WORKLOAD_KEYS, path, lines)
    rate = _number(mapping, "rate", 1.0, path, lines)
    t_range = (_number(mapping, "t_min", 1.0, path, lines), _number(mapping, "t_max", 5.0, path, lines))
    p_range = (_number(mapping, "p_min", 1.0, path, lines), _number(mapping, "p_max", 10.0, path, lines))
    phases = []
    if "phases" in mapping:
        entries = _expect_list(mapping["phases"], path + ("phases",), lines, "'phases'")
        for i, entry in enumerate(entries):
            phase_path = path + ("phases", i)
            entry = _expect_mapping(entry, phase_path, lines, f"phase {i}")
            _reject_unknown(entry, PHASE_KEYS, phase_path, lines)
            phases.append(
                WorkloadPhase(
                    length=_integer(entry, "length", None, phase_path, lines),
                    rate=_number(entry, "rate", None, phase_path, lines),
                    t_range=(
                        _number(entry, "t_min", t_range[0], phase_path, lines),
                        _number(entry, "t_max", t_range[1], phase_path, lines),
                    ),
                    p_range=(
                        _number(entry, "p_min", p_range[0], phase_path, lines),
                        _number(entry, "p_max", p_range[1], phase_path, lines),
                    ),
                )
            )
    return WorkloadParams(rate=rate, t_range=t_range, p_range=p_range, phases=tuple(phases))


def _parse_filter(value, path, lines) -> FilterPolicy | None:
    if value is None:
        return None
    mapping = _expect_mapping(value, path, lines, "'filter'")
    _reject_unknown(mapping, FILTER_KEYS, path, lines)
    policy = FilterPolicy(
        max_latency=(_number(mapping, "max_latency", None, path, lines) if "max_latency" in mapping else None),
        min_reliability=(_number(mapping, "min_reliability", None, path, lines) if "min_reliability" in mapping else None),
        min_availability=(_number(mapping, "min_availability", None, path, lines) if "min_availability" in mapping else None),
        enabled=_boolean(mapping, "enabled", True, path, lines),
    )
    return policy


def _parse_hierarchy(value, path, lines, node_count) -> HierarchyParams | None:
    if value is None:
        return None
    mapping = _expect_mapping(value, path, lines, "'hierarchy'")
    _reject_unknown(mapping, HIERARCHY_KEYS, path, lines)
    k = _integer(mapping, "k", None, path, lines)
    if not 1 <= k <= node_count:
        raise ScenarioError(f"hierarchy k={k} outside [1, {node_count}]", _line(lines, path + ("k",)))
    return HierarchyParams(k=k, seed=_integer(mapping, "seed", 0, path, lines))


def _parse_rl(value, path, lines) -> RLConfig:
    if value is None:
        return RLConfig()
    mapping = _expect_mapping(value, path, lines, "'rl'")
    _reject_unknown(mapping, RL_KEYS, path, lines)
    defaults = RLConfig()
    return RLConfig(
        enabled=_boolean(mapping, "enabled", False, path, lines),
        eta=_number(mapping, "eta", defaults.eta, path, lines),
        gamma_d=_number(mapping, "gamma_d", defaults.gamma_d, path, lines),
        epsilon_start=_number(mapping, "epsilon_start", defaults.epsilon_start, path, lines),
        epsilon_end=_number(mapping, "epsilon_end", defaults.epsilon_end, path, lines),
        step=_number(mapping, "step", defaults.step, path, lines),
        window=_integer(mapping, "window", defaults.window, path, lines),
        alpha=_number(mapping, "alpha", defaults.alpha, path, lines),
        beta=_number(mapping, "beta", defaults.beta, path, lines),
        gamma=_number(mapping, "gamma", defaults.gamma, path, lines),
        hp_threshold=_number(mapping, "hp_threshold", defaults.hp_threshold, path, lines),
        w_min=_number(mapping, "w_min", defaults.w_min, path, lines),
        w_max=_number(mapping, "w_max", defaults.w_max, path, lines),
    )


def _parse_sim(value, path, lines) -> SimParams:
    if value is None:
        return SimParams()
    mapping = _expect_mapping(value, path, lines, "'sim'")
    _reject_unknown(mapping, SIM_KEYS, path, lines)
    defaults = SimParams()
    return SimParams(
        duration=_integer(mapping, "duration", defaults.duration, path, lines),
        workload_seed=_integer(mapping, "workload_seed", defaults.workload_seed, path, lines),
        failure_seed=_integer(mapping, "failure_seed", defaults.failure_seed, path, lines),
        rl_seed=_integer(mapping, "rl_seed", defaults.rl_seed, path, lines),
        load_quantum=_number(mapping, "load_quantum", defaults.load_quantum, path, lines),
        load_decay=_number(mapping, "load_decay", defaults.load_decay, path, lines),
    )
