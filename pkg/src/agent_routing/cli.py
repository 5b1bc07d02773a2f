"""Command-line front end.

Subcommands: ``route`` (one-shot query with optional per-hop cost
explanation), ``simulate`` (full run with file exports), ``verify``
(randomized comparison against the exhaustive reference), ``validate``
(scenario checking). Exit codes: 0 success, 1 input error, 2 unreachable,
3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .cost import compute_cost
from .errors import AgentRoutingError, ScenarioError
from .filtering import apply_filter
from .hierarchy import build_clustering, route_hierarchical
from .model import Unreachable
from .oracle import exhaustive_best_path, random_instance
from .report import write_report
from .router import route
from .scenario import load_scenario, make_task
from .sim import run

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_UNREACHABLE = 2
EXIT_VERIFY = 3

VERIFY_DENSITIES = (0.3, 0.6, 1.0)
REL_TOLERANCE = 1e-9


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AgentRoutingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agent-routing",
        description="Priority-aware routing and simulation for agent networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_route = sub.add_parser("route", help="route one task through a scenario's network")
    p_route.add_argument("scenario", type=Path)
    p_route.add_argument("--source", required=True, help="node label (name or id)")
    p_route.add_argument("--dest", required=True, help="node label (name or id)")
    p_route.add_argument("--complexity", type=float, default=1.0)
    p_route.add_argument("--priority", type=float, default=1.0)
    p_route.add_argument("--explain", action="store_true", help="print per-hop cost terms")
    p_route.add_argument("--no-filter", action="store_true", help="ignore the scenario's filter block")
    p_route.add_argument("--hierarchical", action="store_true",
                         help="use two-level cluster routing (needs a hierarchy block)")
    p_route.set_defaults(handler=cmd_route)

    p_sim = sub.add_parser("simulate", help="run the scenario and export reports")
    p_sim.add_argument("scenario", type=Path)
    p_sim.add_argument("--out", type=Path, default=Path("sim_out"))
    p_sim.add_argument("--no-filter", action="store_true", help="ignore the scenario's filter block")
    p_sim.add_argument("--q-table", type=Path, default=None,
                       help="also export the learned action-value table as JSON")
    p_sim.set_defaults(handler=cmd_simulate)

    p_verify = sub.add_parser("verify", help="compare the router against exhaustive search")
    p_verify.add_argument("--nodes", type=int, default=8, help="maximum instance size (<= 10)")
    p_verify.add_argument("--instances", type=int, default=1000)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.set_defaults(handler=cmd_verify)

    p_validate = sub.add_parser("validate", help="parse and validate a scenario file")
    p_validate.add_argument("scenario", type=Path)
    p_validate.set_defaults(handler=cmd_validate)

    return parser


def cmd_route(args) -> int:
    scenario = load_scenario(args.scenario)
    task = make_task(scenario, args.source, args.dest, args.complexity, args.priority)
    if not task.complexity > 0 or not task.priority > 0:
        print("error: complexity and priority must be > 0", file=sys.stderr)
        return EXIT_INPUT

    graph = scenario.graph
    if scenario.filter_policy is not None and not args.no_filter:
        graph = apply_filter(graph, scenario.filter_policy, task)

    if args.hierarchical:
        if scenario.hierarchy is None:
            print("error: --hierarchical needs a hierarchy block in the scenario", file=sys.stderr)
            return EXIT_INPUT
        clustering = build_clustering(scenario.graph, scenario.hierarchy.k, scenario.hierarchy.seed)
        result = route_hierarchical(graph, clustering, task, scenario.weights)
    else:
        result = route(graph, task, scenario.weights)

    policy_flags = []
    if args.no_filter:
        policy_flags.append("no-filter")
    if args.hierarchical:
        policy_flags.append("hierarchical")
    if policy_flags:
        print(f"# flags: {' '.join(policy_flags)}")

    if isinstance(result, Unreachable):
        print(f"unreachable: no path from {args.source} to {args.dest}")
        return EXIT_UNREACHABLE

    labels = [scenario.names.get(i, str(i)) for i in result.path]
    print("path: " + " -> ".join(labels))
    print(f"total_cost: {result.total_cost!r}")
    print(f"hops: {len(result.hop_costs)}  nodes_expanded: {result.nodes_expanded}  "
          f"edges_relaxed: {result.edges_relaxed}")
    if args.explain:
        _print_explanation(scenario, graph, task, result)
    return EXIT_OK


def _print_explanation(scenario, graph, task, result) -> None:
    for u, v, hop_cost in zip(result.path, result.path[1:], result.hop_costs):
        link = graph.edge(u, v)
        breakdown = compute_cost(task, graph.nodes[u], graph.nodes[v], link, scenario.weights)
        u_label = scenario.names.get(u, str(u))
        v_label = scenario.names.get(v, str(v))
        print(f"hop {u_label} -> {v_label}: cost {hop_cost!r}")
        for name, raw, weighted in breakdown.terms:
            print(f"    {name:<24} raw {raw!r}  weighted {weighted!r}")


def cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    flags = {"no_filter": bool(args.no_filter)}
    report = run(scenario, no_filter=args.no_filter)
    try:
        records_path, summary_path = write_report(report, scenario, args.out, flags)
    except OSError as exc:
        print(f"error: cannot write reports: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.q_table is not None:
        _write_q_table(args.q_table, report.q_table)

    print(f"# flags: no_filter={flags['no_filter']}")
    print(f"records: {records_path}")
    print(f"summary: {summary_path}")
    summary = json.loads(summary_path.read_text(encoding="utf-8"))
    for key in ("tasks_generated", "tasks_completed", "tasks_succeeded", "tasks_failed", "windows"):
        print(f"{key}: {summary[key]}")
    completion = summary["completion_time"]
    if completion is not None:
        print(f"completion_time mean: {completion['mean']} p90: {completion['p90']}")
    print(f"weights_final: {summary['weights_final']}")
    return EXIT_OK


def _write_q_table(path: Path, q_table: np.ndarray) -> None:
    payload = {"shape": list(q_table.shape), "values": q_table.tolist()}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")


def cmd_verify(args) -> int:
    if args.nodes > 10:
        print("error: verify supports at most 10 nodes", file=sys.stderr)
        return EXIT_INPUT
    if args.nodes < 2:
        print("error: verify needs at least 2 nodes", file=sys.stderr)
        return EXIT_INPUT
    failures = run_verification(args.nodes, args.instances, args.seed)
    checked = args.instances
    if not failures:
        print(f"verify: {checked}/{checked} instances agree with exhaustive search")
        return EXIT_OK
    first = failures[0]
    print(f"verify: {len(failures)}/{checked} disagreements; "
          f"first at instance {first['instance']} (seed {first['seed']}): {first['reason']}")
    return EXIT_VERIFY


def run_verification(max_nodes: int, instances: int, seed: int, router_fn=None) -> list[dict]:
    """Compare ``router_fn`` to the exhaustive reference over seeded instances.

    Returns one dict per disagreement. ``router_fn`` is injectable (resolved
    at call time) so tests can prove that a corrupted router is detected.
    """
    if router_fn is None:
        router_fn = route
    failures = []
    for i in range(instances):
        instance_seed = seed + i
        node_count = 2 + (instance_seed % (max_nodes - 1)) if max_nodes > 2 else 2
        density = VERIFY_DENSITIES[instance_seed % len(VERIFY_DENSITIES)]
        graph, task, weights = random_instance(node_count, density, seed=instance_seed)
        fast = router_fn(graph, task, weights)
        slow = exhaustive_best_path(graph, task, weights)
        reason = _compare(fast, slow)
        if reason is not None:
            failures.append({"instance": i, "seed": instance_seed, "reason": reason})
    return failures


def _compare(fast, slow) -> str | None:
    fast_unreachable = isinstance(fast, Unreachable)
    slow_unreachable = isinstance(slow, Unreachable)
    if fast_unreachable != slow_unreachable:
        return f"reachability mismatch: router={fast!r} reference={slow!r}"
    if fast_unreachable:
        return None
    if abs(fast.total_cost - slow.total_cost) > REL_TOLERANCE * max(
        1.0, abs(fast.total_cost), abs(slow.total_cost)
    ):
        return (
            f"total mismatch: router {fast.total_cost!r} != reference {slow.total_cost!r} "
            f"(router path {list(fast.path)}, reference path {list(slow.path)})"
        )
    hop_sum = sum(fast.hop_costs)
    if abs(hop_sum - fast.total_cost) > REL_TOLERANCE * max(1.0, abs(fast.total_cost)):
        return f"router path cost {hop_sum!r} does not match its total {fast.total_cost!r}"
    return None


def cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    print(
        f"ok: {len(scenario.graph.nodes)} nodes, {len(scenario.graph.edges)} edges, "
        f"duration {scenario.sim.duration}"
    )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
