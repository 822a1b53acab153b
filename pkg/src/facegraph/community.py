"""Louvain community detection and network statistics.

The implementation is the classic two-phase scheme: repeated local moves that
greedily maximize weighted-modularity gain, then coagulation of communities
into supernodes, iterated until no move improves anything. Co-occurrence
weights participate in modularity unless a binarized graph is supplied.

Determinism: nodes are visited in ascending id order; a nonzero seed shuffles
the visit order reproducibly (one shuffle per level). Equal-gain ties resolve
toward the lowest community id, so a graph plus a seed always yields the same
partition.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .graph import CoOccurrenceGraph


class EmptyGraphError(ValueError):
    """Community detection needs at least one node."""


@dataclass(frozen=True)
class Partition:
    """Node -> community assignment with its modularity score.

    ``phase_modularities`` records the score after each Louvain level, which
    is non-decreasing by construction.
    """

    assignment: dict[int, int]
    modularity: float
    phase_modularities: tuple[float, ...] = ()

    @property
    def community_count(self) -> int:
        return len(set(self.assignment.values()))


@dataclass(frozen=True)
class CommunityStats:
    community_count: int
    size_histogram: dict[int, int]
    two_node_count: int
    largest_size: int
    largest_fraction: float
    members: dict[int, tuple[int, ...]]


def modularity(
    graph: CoOccurrenceGraph,
    assignment: dict[int, int],
    resolution: float = 1.0,
    use_weights: bool = True,
) -> float:
    """Weighted modularity Q = sum_c [S_in/(2m) - resolution*(S_tot/(2m))^2]."""
    nodes = graph.nodes
    if not nodes:
        raise EmptyGraphError("graph has no nodes")
    missing = nodes - assignment.keys()
    if missing:
        raise ValueError(f"assignment missing nodes: {sorted(missing)[:5]}")
    two_m = 2.0 * (graph.total_weight if use_weights else float(graph.edge_count))
    if two_m == 0.0:
        return 0.0
    internal: dict[int, float] = defaultdict(float)  # 2 * intra-community weight
    degree: dict[int, float] = defaultdict(float)
    for (a, b), imgs in graph.edges.items():
        w = float(len(imgs)) if use_weights else 1.0
        degree[assignment[a]] += w
        degree[assignment[b]] += w
        if assignment[a] == assignment[b]:
            internal[assignment[a]] += 2.0 * w
    q = 0.0
    for com in degree:
        q += internal.get(com, 0.0) / two_m - resolution * (degree[com] / two_m) ** 2
    return q


def _one_level(
    adj: dict[int, dict[int, float]],
    loops: dict[int, float],
    total_weight: float,
    resolution: float,
    order: list[int],
) -> tuple[dict[int, int], bool]:
    """One round of local moves; returns (node -> community, any_move)."""
    node2com = {node: i for i, node in enumerate(sorted(adj))}
    degree = {
        node: sum(w for nbr, w in adj[node].items()) + 2.0 * loops.get(node, 0.0)
        for node in adj
    }
    com_degree = {node2com[node]: degree[node] for node in adj}
    two_m = 2.0 * total_weight
    moved_any = False
    improved = True
    while improved:
        improved = False
        for node in order:
            com0 = node2com[node]
            k_i = degree[node]
            weights_to: dict[int, float] = defaultdict(float)
            for nbr, w in adj[node].items():
                if nbr != node:
                    weights_to[node2com[nbr]] += w
            com_degree[com0] -= k_i
            best_com = com0
            best_gain = weights_to.get(com0, 0.0) - resolution * com_degree[com0] * k_i / two_m
            for com in sorted(weights_to):
                if com == com0:
                    continue
                gain = weights_to[com] - resolution * com_degree[com] * k_i / two_m
                if gain > best_gain:
                    best_gain = gain
                    best_com = com
            com_degree[best_com] = com_degree.get(best_com, 0.0) + k_i
            node2com[node] = best_com
            if best_com != com0:
                improved = True
                moved_any = True
    # relabel communities densely, by first appearance over ascending node id
    relabel: dict[int, int] = {}
    for node in sorted(node2com):
        com = node2com[node]
        if com not in relabel:
            relabel[com] = len(relabel)
    return {node: relabel[com] for node, com in node2com.items()}, moved_any


def _coagulate(
    adj: dict[int, dict[int, float]],
    loops: dict[int, float],
    node2com: dict[int, int],
) -> tuple[dict[int, dict[int, float]], dict[int, float]]:
    new_adj: dict[int, dict[int, float]] = {c: {} for c in set(node2com.values())}
    new_loops: dict[int, float] = defaultdict(float)
    for node, loop_w in loops.items():
        new_loops[node2com[node]] += loop_w
    for u, nbrs in adj.items():
        cu = node2com[u]
        for v, w in nbrs.items():
            if u < v:
                cv = node2com[v]
                if cu == cv:
                    new_loops[cu] += w
                else:
                    new_adj[cu][cv] = new_adj[cu].get(cv, 0.0) + w
                    new_adj[cv][cu] = new_adj[cv].get(cu, 0.0) + w
    return new_adj, dict(new_loops)


def louvain(
    graph: CoOccurrenceGraph,
    seed: int = 0,
    resolution: float = 1.0,
    use_weights: bool = True,
) -> Partition:
    """Detect communities by greedy modularity maximization.

    Deterministic given the seed: seed 0 visits nodes in ascending id order,
    any other seed applies a reproducible shuffle per level.
    """
    nodes = sorted(graph.nodes)
    if not nodes:
        raise EmptyGraphError("graph has no nodes")
    adj = graph.adjacency(use_weights)
    loops: dict[int, float] = {}
    total_weight = graph.total_weight if use_weights else float(graph.edge_count)
    mapping = {node: node for node in nodes}  # original node -> current supernode
    rng = np.random.default_rng(seed) if seed != 0 else None
    phase_mods: list[float] = []
    while True:
        level_nodes = sorted(adj)
        if rng is not None:
            level_nodes = [level_nodes[i] for i in rng.permutation(len(level_nodes))]
        node2com, moved = _one_level(adj, loops, total_weight, resolution, level_nodes)
        if not moved:
            break
        mapping = {orig: node2com[sup] for orig, sup in mapping.items()}
        phase_mods.append(modularity(graph, mapping, resolution, use_weights))
        if len(set(node2com.values())) == len(node2com):
            break
        adj, loops = _coagulate(adj, loops, node2com)
    # final dense relabel by first appearance over ascending original node id
    relabel: dict[int, int] = {}
    assignment: dict[int, int] = {}
    for node in nodes:
        com = mapping[node]
        if com not in relabel:
            relabel[com] = len(relabel)
        assignment[node] = relabel[com]
    return Partition(
        assignment=assignment,
        modularity=modularity(graph, assignment, resolution, use_weights),
        phase_modularities=tuple(phase_mods),
    )


def community_stats(partition: Partition, graph: CoOccurrenceGraph) -> CommunityStats:
    """Counts, size histogram, and member lists for a partition."""
    members: dict[int, list[int]] = defaultdict(list)
    for node in sorted(graph.nodes):
        members[partition.assignment[node]].append(node)
    sizes = sorted(len(m) for m in members.values())
    histogram: dict[int, int] = {}
    for s in sizes:
        histogram[s] = histogram.get(s, 0) + 1
    node_count = len(graph.nodes)
    largest = sizes[-1] if sizes else 0
    return CommunityStats(
        community_count=len(members),
        size_histogram=histogram,
        two_node_count=histogram.get(2, 0),
        largest_size=largest,
        largest_fraction=(largest / node_count if node_count else 0.0),
        members={c: tuple(m) for c, m in sorted(members.items())},
    )
