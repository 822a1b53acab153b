"""Co-occurrence edge generation and the weighted undirected graph.

Every image whose resolved faces span at least two distinct identities emits
one edge record per pair (all combinations of two). Records aggregate into a
simple weighted graph: the weight of an edge is the number of distinct images
in which the pair co-occurs, and each edge keeps the list of those images.
Identities that never co-occur with anyone are tracked as isolates, outside
the node set.

All functions are pure over immutable inputs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence
from xml.etree import ElementTree as ET

from .resolver import ResolvedImage


class UnknownImageError(KeyError):
    """The image id was not part of the resolution this graph came from."""


@dataclass(frozen=True)
class EdgeRecord:
    """One co-occurrence of identities a < b in a single image."""

    a: int
    b: int
    image_id: str

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError("self-loops are not representable")
        if self.a > self.b:
            raise ValueError("edge endpoints must be canonically ordered (a < b)")


@dataclass(frozen=True)
class CoOccurrenceGraph:
    """Aggregated simple graph: (a, b) -> attributed image list."""

    edges: dict[tuple[int, int], tuple[str, ...]]
    registry_size: int
    images: frozenset[str]  # every image that went through resolution

    @property
    def nodes(self) -> set[int]:
        out: set[int] = set()
        for a, b in self.edges:
            out.add(a)
            out.add(b)
        return out

    @property
    def isolates(self) -> set[int]:
        return set(range(self.registry_size)) - self.nodes

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def weight(self, a: int, b: int) -> int:
        key = (a, b) if a < b else (b, a)
        return len(self.edges.get(key, ()))

    @property
    def total_weight(self) -> float:
        return float(sum(len(imgs) for imgs in self.edges.values()))

    def adjacency(self, use_weights: bool = True) -> dict[int, dict[int, float]]:
        adj: dict[int, dict[int, float]] = {n: {} for n in self.nodes}
        for (a, b), imgs in self.edges.items():
            w = float(len(imgs)) if use_weights else 1.0
            adj[a][b] = w
            adj[b][a] = w
        return adj

    def strength(self) -> dict[int, float]:
        """Weighted degree per node (degree centrality numerator)."""
        deg: dict[int, float] = {n: 0.0 for n in self.nodes}
        for (a, b), imgs in self.edges.items():
            deg[a] += len(imgs)
            deg[b] += len(imgs)
        return deg


def build_edgelist(resolved: Sequence[ResolvedImage]) -> list[EdgeRecord]:
    """Emit C(k, 2) records per image with k >= 2 distinct identities.

    Duplicate identities within one image collapse to a set before pairing,
    so a twice-detected person yields neither a self-loop nor doubled counts.
    """
    records: list[EdgeRecord] = []
    for image in resolved:
        distinct = sorted(set(image.identity_ids))
        if len(distinct) < 2:
            continue
        for a, b in combinations(distinct, 2):
            records.append(EdgeRecord(a, b, image.image_id))
    return records


def aggregate_graph(
    edgelist: Iterable[EdgeRecord],
    registry_size: int,
    images: Iterable[str] | None = None,
) -> CoOccurrenceGraph:
    """Merge parallel records into weighted edges with image attribution.

    ``images`` is the universe of resolved image ids; it defaults to the ids
    seen in the edgelist, but passing the full resolution lets
    ``image_edge_share`` distinguish an image that simply produced no edges
    from one that was never resolved.
    """
    edges: dict[tuple[int, int], list[str]] = {}
    seen_imgs: set[str] = set()
    for rec in edgelist:
        key = (rec.a, rec.b)
        attributed = edges.setdefault(key, [])
        if rec.image_id not in attributed:
            attributed.append(rec.image_id)
        seen_imgs.add(rec.image_id)
    universe = frozenset(images) if images is not None else frozenset(seen_imgs)
    return CoOccurrenceGraph(
        edges={k: tuple(v) for k, v in sorted(edges.items())},
        registry_size=registry_size,
        images=universe,
    )


def build_graph(resolved: Sequence[ResolvedImage], registry_size: int) -> CoOccurrenceGraph:
    """Convenience: edge generation + aggregation with the full image universe."""
    return aggregate_graph(
        build_edgelist(resolved),
        registry_size,
        images=(img.image_id for img in resolved),
    )


def image_edge_share(graph: CoOccurrenceGraph, image_id: str) -> tuple[int, float]:
    """Unique edges attributed to an image and their fraction of all edges."""
    if image_id not in graph.images:
        raise UnknownImageError(image_id)
    count = sum(1 for imgs in graph.edges.values() if image_id in imgs)
    total = graph.edge_count
    return count, (count / total if total else 0.0)


def top_images_by_edge_share(graph: CoOccurrenceGraph, limit: int = 10) -> list[tuple[str, int, float]]:
    """Images ranked by attributed unique-edge count (ties: lexicographic id)."""
    counts: dict[str, int] = {}
    for imgs in graph.edges.values():
        for image_id in imgs:
            counts[image_id] = counts.get(image_id, 0) + 1
    total = graph.edge_count
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:limit]
    return [(img, c, c / total if total else 0.0) for img, c in ranked]


# -- exports ------------------------------------------------------------------


def write_edge_csv(graph: CoOccurrenceGraph, path) -> None:
    """Edge list as CSV: source,target,weight,images (images ';'-joined)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source", "target", "weight", "images"])
        for (a, b), imgs in graph.edges.items():
            writer.writerow([a, b, len(imgs), ";".join(imgs)])


def read_edge_csv(path, registry_size: int | None = None) -> CoOccurrenceGraph:
    """Rebuild a graph from ``write_edge_csv`` output.

    Without an explicit registry size, isolates are unknowable from an edge
    list alone, so it defaults to max id + 1.
    """
    edges: dict[tuple[int, int], tuple[str, ...]] = {}
    max_id = -1
    images: set[str] = set()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["source", "target", "weight", "images"]:
            raise ValueError(f"unexpected edge CSV header: {header!r}")
        for row in reader:
            a, b = int(row[0]), int(row[1])
            imgs = tuple(x for x in row[3].split(";") if x)
            if int(row[2]) != len(imgs):
                raise ValueError(f"edge ({a},{b}) weight disagrees with image list")
            edges[(a, b)] = imgs
            images.update(imgs)
            max_id = max(max_id, a, b)
    size = registry_size if registry_size is not None else max_id + 1
    return CoOccurrenceGraph(edges=dict(sorted(edges.items())), registry_size=size, images=frozenset(images))


def write_gexf(
    graph: CoOccurrenceGraph,
    path,
    partition: dict[int, int] | None = None,
) -> None:
    """Deterministic GEXF 1.2 export readable by common graph tools.

    Nodes carry id/label (and a ``community`` attribute when a partition is
    given); edges carry their co-occurrence weight. Output is byte-stable for
    identical inputs: no timestamps, fixed ordering.
    """
    root = ET.Element("gexf", xmlns="http://www.gexf.net/1.2draft", version="1.2")
    graph_el = ET.SubElement(root, "graph", defaultedgetype="undirected", mode="static")
    if partition is not None:
        attrs = ET.SubElement(graph_el, "attributes", {"class": "node"})
        ET.SubElement(attrs, "attribute", id="0", title="community", type="integer")
    nodes_el = ET.SubElement(graph_el, "nodes")
    for node in sorted(graph.nodes):
        node_el = ET.SubElement(nodes_el, "node", id=str(node), label=str(node))
        if partition is not None and node in partition:
            values = ET.SubElement(node_el, "attvalues")
            ET.SubElement(values, "attvalue", {"for": "0", "value": str(partition[node])})
    edges_el = ET.SubElement(graph_el, "edges")
    for edge_id, ((a, b), imgs) in enumerate(sorted(graph.edges.items())):
        ET.SubElement(
            edges_el,
            "edge",
            id=str(edge_id),
            source=str(a),
            target=str(b),
            weight=str(len(imgs)),
        )
    ET.indent(root)
    tree = ET.ElementTree(root)
    tree.write(path, encoding="utf-8", xml_declaration=True)
