import pytest

from agent_routing.errors import InvalidParams, TooLarge
from agent_routing.model import AgentNode, Link, Task, Unreachable, WeightVector, build_graph, validate_graph
from agent_routing.oracle import MetricRanges, exhaustive_best_path, random_instance


def make_node(node_id):
    return AgentNode(id=node_id, capability=1.0, availability=1.0, load_factor=0.0,
                     model_sophistication=1.0, reliability=1.0)


def latency_graph(latencies):
    """Graph whose only cost signal is latency (metrics otherwise neutral)."""
    ids = sorted({i for pair in latencies for i in pair})
    nodes = [make_node(i) for i in ids]
    links = [Link(src=a, dst=b, bandwidth=1.0, latency=lat) for (a, b), lat in latencies.items()]
    return build_graph(nodes, links)


LATENCY_ONLY = WeightVector(0, 0, 0, 1, 0, 0, 0)


def test_single_edge_graph():
    graph = latency_graph({(0, 1): 2.0})
    task = Task(id=0, complexity=1.0, priority=1.0, source=0, destination=1)
    result = exhaustive_best_path(graph, task, LATENCY_ONLY)
    assert result.path == (0, 1)
    assert result.total_cost == 2.0


def test_triangle_prefers_two_cheap_hops():
    # Edge costs 1, 1, 3 (latency with unit priority): the two-hop route wins.
    graph = latency_graph({(0, 1): 1.0, (1, 2): 1.0, (0, 2): 3.0})
    task = Task(id=0, complexity=1.0, priority=1.0, source=0, destination=2)
    result = exhaustive_best_path(graph, task, LATENCY_ONLY)
    assert result.path == (0, 1, 2)
    assert result.total_cost == 2.0


def test_unreachable_pair():
    graph = build_graph([make_node(0), make_node(1)], [])
    task = Task(id=0, complexity=1.0, priority=1.0, source=0, destination=1)
    assert isinstance(exhaustive_best_path(graph, task, LATENCY_ONLY), Unreachable)


def test_node_guard():
    graph, task, weights = random_instance(11, 0.3, seed=1)
    with pytest.raises(TooLarge):
        exhaustive_best_path(graph, task, weights)


def test_tie_break_lexicographic_path():
    # Both 0->1->3 and 0->2->3 cost exactly 2; the id-lexicographically
    # smaller sequence must win.
    graph = latency_graph({(0, 1): 1.0, (0, 2): 1.0, (1, 3): 1.0, (2, 3): 1.0})
    task = Task(id=0, complexity=1.0, priority=1.0, source=0, destination=3)
    result = exhaustive_best_path(graph, task, LATENCY_ONLY)
    assert result.path == (0, 1, 3)


def test_random_instance_density_one_has_all_edges():
    graph, _, _ = random_instance(2, 1.0, seed=7)
    assert {(e.src, e.dst) for e in graph.edges} == {(0, 1), (1, 0)}


def test_random_instance_deterministic_per_seed():
    a = random_instance(6, 0.5, seed=99)
    b = random_instance(6, 0.5, seed=99)
    assert a[0].nodes == b[0].nodes
    assert a[0].edges == b[0].edges
    assert a[1] == b[1]
    assert a[2] == b[2]


def test_random_instances_always_validate():
    for seed in range(200):
        graph, task, weights = random_instance(2 + seed % 7, (0.3, 0.6, 1.0)[seed % 3], seed=seed)
        assert validate_graph(graph) == []
        assert task.source != task.destination
        assert task.source in graph.nodes and task.destination in graph.nodes
        assert all(w > 0 for w in weights.as_tuple())


def test_random_instance_rejects_bad_params():
    with pytest.raises(InvalidParams):
        random_instance(1, 0.5, seed=0)
    with pytest.raises(InvalidParams):
        random_instance(4, 0.0, seed=0)
    with pytest.raises(InvalidParams):
        random_instance(4, 1.5, seed=0)
    with pytest.raises(InvalidParams):
        random_instance(4, 0.5, ranges=MetricRanges(latency=(0.0, 1.0)), seed=0)
