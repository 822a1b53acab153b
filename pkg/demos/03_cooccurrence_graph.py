"""
From resolved images to a weighted co-occurrence graph
======================================================

Every image with at least two distinct identities contributes one edge per
pair; parallel edges merge into weights and keep the list of images that
produced them.
"""

from facegraph import (
    ResolvedImage,
    build_edgelist,
    build_graph,
    image_edge_share,
    top_images_by_edge_share,
    write_edge_csv,
    write_gexf,
)

# a tiny hand-made event: identities 0..4 across six photos
resolved = [
    ResolvedImage("red-carpet-01", (0, 1, 2)),
    ResolvedImage("red-carpet-02", (0, 1)),
    ResolvedImage("stage-01", (3,)),
    ResolvedImage("stage-02", (3, 4)),
    ResolvedImage("afterparty-01", (0, 1)),
    ResolvedImage("crowd-01", ()),
]

records = build_edgelist(resolved)
print(f"{len(records)} pair records from {len(resolved)} images")

graph = build_graph(resolved, registry_size=5)
for (a, b), images in graph.edges.items():
    print(f"  edge {a}-{b}: weight {len(images)}, images {list(images)}")
print(f"nodes: {sorted(graph.nodes)}, isolates: {sorted(graph.isolates)}")

count, share = image_edge_share(graph, "red-carpet-01")
print(f"red-carpet-01 contributes {count} edges = {share:.0%} of all edges")
print("busiest images:", top_images_by_edge_share(graph, limit=3))

# exports: a CSV edge list and a GEXF file for graph tools
write_edge_csv(graph, "/tmp/demo_edges.csv")
write_gexf(graph, "/tmp/demo_graph.gexf")
print("wrote /tmp/demo_edges.csv and /tmp/demo_graph.gexf")
