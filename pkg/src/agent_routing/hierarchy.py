"""Two-level routing: cluster the agents, route between clusters on a
condensed graph, then run the full search inside each cluster.

Clustering is seeded k-medoids over pairwise latency distances (hop-count
based fallback for ordered pairs with no directed path); medoids serve as
cluster heads. The condensed super-graph uses optimistic aggregates (min
latency, max bandwidth over crossing edges; head metrics for super-nodes),
and honesty is restored at expansion time: the reported path and costs
come from real edges only.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, replace

from .cost import compute_cost
from .errors import InvalidK, UnknownNode
from .model import (
    AgentGraph,
    AgentNode,
    Link,
    RouteResult,
    Task,
    Unreachable,
    UNREACHABLE,
    WeightVector,
)
from .router import route, score_path

KMEDOIDS_MAX_ITER = 100


@dataclass(frozen=True)
class Cluster:
    id: int
    members: tuple[int, ...]
    head: int


@dataclass(frozen=True)
class Clustering:
    clusters: tuple[Cluster, ...]
    membership: dict[int, int]


@dataclass(frozen=True)
class SuperGraph:
    """Condensed graph whose vertices are clusters.

    ``graph`` carries one node per cluster (head metrics) and one edge per
    ordered cluster pair with at least one crossing link; ``crossing`` maps
    each super-edge back to the original links it summarizes.
    """

    graph: AgentGraph
    crossing: dict[tuple[int, int], tuple[Link, ...]]


def validate_clustering(clustering: Clustering, graph: AgentGraph) -> list[str]:
    """Partition checks; empty list when the clustering is valid for ``graph``."""
    problems = []
    seen: set[int] = set()
    for cluster in clustering.clusters:
        if cluster.head not in cluster.members:
            problems.append(f"cluster {cluster.id}: head {cluster.head} not a member")
        for member in cluster.members:
            if member in seen:
                problems.append(f"node {member}: appears in more than one cluster")
            seen.add(member)
            if clustering.membership.get(member) != cluster.id:
                problems.append(f"node {member}: membership map disagrees with cluster {cluster.id}")
    missing = set(graph.nodes) - seen
    if missing:
        problems.append(f"nodes not covered by any cluster: {sorted(missing)}")
    return problems


def build_clustering(graph: AgentGraph, k: int, seed: int) -> Clustering:
    """Seeded k-medoids partition of the agents; deterministic per seed.

    Pairwise dissimilarity is the symmetrized shortest-path latency; ordered
    pairs with no directed path fall back to undirected hop count scaled to
    dominate any latency path. Cluster ids are assigned by ascending head id.
    """
    node_ids = graph.node_ids()
    n = len(node_ids)
    if not 1 <= k <= n:
        raise InvalidK(f"k={k} outside [1, {n}]")

    dist = _pairwise_dissimilarity(graph, node_ids)
    rng = random.Random(seed)
    # Maximin seeding: one seeded pick, then greedy farthest points. Far less
    # prone to dropping two medoids into one natural cluster than sampling.
    medoids = [rng.choice(node_ids)]
    while len(medoids) < k:
        medoids.append(
            max(
                (v for v in node_ids if v not in medoids),
                key=lambda v: (min(dist[(v, m)] for m in medoids), -v),
            )
        )
    medoids = sorted(medoids)

    assignment: dict[int, int] = {}
    for _ in range(KMEDOIDS_MAX_ITER):
        assignment = _assign(node_ids, medoids, dist)
        new_medoids = sorted(
            _medoid_of([v for v, m in assignment.items() if m == medoid], dist)
            for medoid in medoids
        )
        if new_medoids == medoids:
            break
        medoids = new_medoids

    assignment = _assign(node_ids, medoids, dist)
    clusters = []
    membership: dict[int, int] = {}
    for cluster_id, medoid in enumerate(medoids):
        members = tuple(sorted(v for v, m in assignment.items() if m == medoid))
        clusters.append(Cluster(id=cluster_id, members=members, head=medoid))
        for member in members:
            membership[member] = cluster_id
    return Clustering(clusters=tuple(clusters), membership=membership)


def _assign(node_ids, medoids, dist) -> dict[int, int]:
    # A medoid always stays in its own cluster, so no cluster can empty out.
    assignment = {}
    for v in node_ids:
        if v in medoids:
            assignment[v] = v
        else:
            assignment[v] = min(medoids, key=lambda m: (dist[(v, m)], m))
    return assignment


def _medoid_of(members, dist) -> int:
    return min(
        members,
        key=lambda candidate: (sum(dist[(candidate, other)] for other in members), candidate),
    )


def _pairwise_dissimilarity(graph: AgentGraph, node_ids) -> dict[tuple[int, int], float]:
    directed = {v: _latency_distances(graph, v) for v in node_ids}
    hops = {v: _undirected_hops(graph, v) for v in node_ids}
    fallback_unit = 1.0 + sum(link.latency for link in graph.edges)
    unreachable = (len(node_ids) + 1) * fallback_unit

    def one_way(u, v):
        d = directed[u].get(v)
        if d is not None:
            return d
        h = hops[u].get(v)
        return h * fallback_unit if h is not None else unreachable

    return {
        (u, v): 0.5 * (one_way(u, v) + one_way(v, u))
        for u in node_ids
        for v in node_ids
    }


def _latency_distances(graph: AgentGraph, source: int) -> dict[int, float]:
    dist = {source: 0.0}
    frontier = [(0.0, source)]
    settled: set[int] = set()
    while frontier:
        d, u = heapq.heappop(frontier)
        if u in settled:
            continue
        settled.add(u)
        for link in graph.out_edges(u):
            alt = d + link.latency
            if link.dst not in dist or alt < dist[link.dst]:
                dist[link.dst] = alt
                heapq.heappush(frontier, (alt, link.dst))
    return {v: d for v, d in dist.items() if v in settled}


def _undirected_hops(graph: AgentGraph, source: int) -> dict[int, int]:
    neighbors: dict[int, set[int]] = {v: set() for v in graph.nodes}
    for link in graph.edges:
        neighbors[link.src].add(link.dst)
        neighbors[link.dst].add(link.src)
    hops = {source: 0}
    queue = [source]
    while queue:
        nxt: list[int] = []
        for u in queue:
            for v in sorted(neighbors[u]):
                if v not in hops:
                    hops[v] = hops[u] + 1
                    nxt.append(v)
        queue = nxt
    return hops


def build_supergraph(graph: AgentGraph, clustering: Clustering) -> SuperGraph:
    """Condense ``graph`` along ``clustering``.

    Super-node metrics are the cluster head's; a super-edge aggregates its
    crossing links optimistically (min latency, max bandwidth).
    """
    clusters = _restricted_clusters(clustering, graph)
    membership = {m: c.id for c in clusters for m in c.members}

    super_nodes: dict[int, AgentNode] = {}
    for cluster in clusters:
        head = graph.nodes[cluster.head]
        super_nodes[cluster.id] = replace(head, id=cluster.id)

    crossing: dict[tuple[int, int], list[Link]] = {}
    for link in graph.edges:
        cx, cy = membership.get(link.src), membership.get(link.dst)
        if cx is None or cy is None or cx == cy:
            continue
        crossing.setdefault((cx, cy), []).append(link)

    super_edges = []
    crossing_sorted: dict[tuple[int, int], tuple[Link, ...]] = {}
    for (cx, cy), links in sorted(crossing.items()):
        links = sorted(links, key=lambda e: (e.src, e.dst))
        crossing_sorted[(cx, cy)] = tuple(links)
        super_edges.append(
            Link(
                src=cx,
                dst=cy,
                bandwidth=max(e.bandwidth for e in links),
                latency=min(e.latency for e in links),
            )
        )
    condensed = AgentGraph(nodes=super_nodes, edges=tuple(super_edges))
    return SuperGraph(graph=condensed, crossing=crossing_sorted)


def route_hierarchical(
    graph: AgentGraph,
    clustering: Clustering,
    task: Task,
    weights: WeightVector,
) -> RouteResult | Unreachable:
    """End-to-end path through the cluster structure, costed on real edges.

    The cluster sequence comes from a search over the condensed graph; each
    consecutive cluster pair is bridged by its cheapest crossing edge for
    this task, with full intra-cluster searches in between. Endpoints in the
    same cluster bypass the super-graph entirely.
    """
    if not graph.has_node(task.source):
        raise UnknownNode(f"source node {task.source} not in graph")
    if not graph.has_node(task.destination):
        raise UnknownNode(f"destination node {task.destination} not in graph")

    clusters = _restricted_clusters(clustering, graph)
    membership = {m: c.id for c in clusters for m in c.members}
    members_of = {c.id: set(c.members) for c in clusters}
    if task.source not in membership or task.destination not in membership:
        raise UnknownNode("task endpoint not covered by the clustering")

    cx_src = membership[task.source]
    cx_dst = membership[task.destination]
    if cx_src == cx_dst:
        return route(graph.induced_subgraph(members_of[cx_src]), task, weights)

    supergraph = build_supergraph(graph, clustering)
    super_task = replace(task, source=cx_src, destination=cx_dst)
    super_result = route(supergraph.graph, super_task, weights)
    if isinstance(super_result, Unreachable):
        return UNREACHABLE

    nodes_expanded = super_result.nodes_expanded
    edges_relaxed = super_result.edges_relaxed
    path: list[int] = []
    current = task.source

    for cx, cy in zip(super_result.path, super_result.path[1:]):
        links = supergraph.crossing[(cx, cy)]
        edges_relaxed += len(links)
        bridge = min(
            links,
            key=lambda e: (
                compute_cost(task, graph.nodes[e.src], graph.nodes[e.dst], e, weights).total,
                e.src,
                e.dst,
            ),
        )
        leg = _intra_leg(graph, members_of[cx], current, bridge.src, task, weights)
        if isinstance(leg, Unreachable):
            return UNREACHABLE
        nodes_expanded += leg.nodes_expanded
        edges_relaxed += leg.edges_relaxed
        _extend(path, leg.path)
        path.append(bridge.dst)
        current = bridge.dst

    leg = _intra_leg(graph, members_of[cx_dst], current, task.destination, task, weights)
    if isinstance(leg, Unreachable):
        return UNREACHABLE
    nodes_expanded += leg.nodes_expanded
    edges_relaxed += leg.edges_relaxed
    _extend(path, leg.path)

    hop_costs, total = score_path(graph, path, task, weights)
    return RouteResult(
        path=tuple(path),
        hop_costs=tuple(hop_costs),
        total_cost=total,
        nodes_expanded=nodes_expanded,
        edges_relaxed=edges_relaxed,
    )


def _intra_leg(
    graph: AgentGraph,
    members: set[int],
    source: int,
    destination: int,
    task: Task,
    weights: WeightVector,
) -> RouteResult | Unreachable:
    leg_task = replace(task, source=source, destination=destination)
    return route(graph.induced_subgraph(members), leg_task, weights)


def _extend(path: list[int], leg_path: tuple[int, ...]) -> None:
    path.extend(leg_path if not path else leg_path[1:])


def _restricted_clusters(clustering: Clustering, graph: AgentGraph) -> list[Cluster]:
    """Clusters intersected with the graph's node set (filters may prune members).

    Keeps original cluster ids; a cluster whose head was pruned falls back
    to its lowest surviving member as head. Empty clusters drop out.
    """
    restricted = []
    for cluster in clustering.clusters:
        members = tuple(m for m in cluster.members if graph.has_node(m))
        if not members:
            continue
        head = cluster.head if graph.has_node(cluster.head) else members[0]
        restricted.append(Cluster(id=cluster.id, members=members, head=head))
    return restricted
