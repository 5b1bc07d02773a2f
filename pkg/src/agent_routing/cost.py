"""Seven-term adaptive edge cost.

The cost of sending a task over a directed link depends only on the task,
the destination agent's metrics, and the link's metrics:

    w1 * (T / C)  +  w2 * (P / A)  +  w3 * (P / B)  +  w4 * (P * L)
    +  w5 * (F / C)  +  w6 * (1 / M)  +  w7 * (1 / R)

where T is task complexity, P task priority, and C, A, F, M, R are the
destination agent's capability, availability, load factor, model
sophistication and reliability; B and L are the link's bandwidth and
latency. Availability, reliability and bandwidth are floored at EPS_DIV
before division; capability and sophistication must be strictly positive.

Terms are summed left to right in a fixed order so totals are
bit-reproducible across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidMetric
from .model import EPS_DIV, AgentGraph, AgentNode, Link, Task, WeightVector

TERM_NAMES = (
    "complexity_capability",
    "priority_availability",
    "priority_bandwidth",
    "priority_latency",
    "load_capability",
    "sophistication",
    "reliability",
)


@dataclass(frozen=True)
class CostBreakdown:
    """Per-term attribution of one edge cost.

    ``terms`` holds seven (name, raw_value, weighted_value) triples in fixed
    order; ``total`` is the left-to-right sum of the weighted values.
    """

    terms: tuple[tuple[str, float, float], ...]
    total: float


def compute_cost(
    task: Task,
    from_node: AgentNode,
    to_node: AgentNode,
    link: Link,
    weights: WeightVector,
) -> CostBreakdown:
    """Evaluate the edge cost for ``task`` traversing ``link`` into ``to_node``.

    Pure function of its arguments. ``from_node`` is accepted for interface
    symmetry; the cost depends on the destination agent and the link only.

    Raises InvalidMetric if capability or model sophistication is not
    strictly positive, or any metric used as a divisor is NaN.
    """
    capability = to_node.capability
    sophistication = to_node.model_sophistication
    if not capability > 0:
        raise InvalidMetric(
            f"node {to_node.id}: capability must be > 0, got {capability}"
        )
    if not sophistication > 0:
        raise InvalidMetric(
            f"node {to_node.id}: model_sophistication must be > 0, got {sophistication}"
        )

    availability = _floored(to_node.availability, "availability", to_node.id)
    reliability = _floored(to_node.reliability, "reliability", to_node.id)
    bandwidth = _floored(link.bandwidth, "bandwidth", f"{link.src}->{link.dst}")

    raws = (
        task.complexity / capability,
        task.priority / availability,
        task.priority / bandwidth,
        task.priority * link.latency,
        to_node.load_factor / capability,
        1.0 / sophistication,
        1.0 / reliability,
    )
    w = weights.as_tuple()
    terms = tuple(
        (name, raw, w_i * raw) for name, raw, w_i in zip(TERM_NAMES, raws, w)
    )
    total = 0.0
    for _, _, weighted in terms:
        total += weighted
    return CostBreakdown(terms=terms, total=total)


def edge_total(task: Task, graph: AgentGraph, link: Link, weights: WeightVector) -> float:
    """Convenience wrapper: total cost of ``link`` looked up in ``graph``."""
    return compute_cost(
        task, graph.nodes[link.src], graph.nodes[link.dst], link, weights
    ).total


def cost_matrix(
    graph: AgentGraph, task: Task, weights: WeightVector
) -> dict[tuple[int, int], float]:
    """Total edge cost for every directed edge of ``graph``."""
    return {
        (link.src, link.dst): compute_cost(
            task, graph.nodes[link.src], graph.nodes[link.dst], link, weights
        ).total
        for link in graph.edges
    }


def _floored(value: float, name: str, owner) -> float:
    if math.isnan(value):
        raise InvalidMetric(f"{name} of {owner} is NaN")
    return max(EPS_DIV, value)
