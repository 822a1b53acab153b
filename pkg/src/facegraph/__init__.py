"""facegraph: co-occurrence social networks from face-embedding archives.

The pipeline: load an archive manifest of per-image 128-d face embeddings,
resolve unique identities by incremental nearest-neighbor search (exact flat
scan or IVFPQ), emit per-image identity pair edges, aggregate them into a
weighted co-occurrence graph, and analyze it with Louvain community
detection. A benchmark harness generates planted synthetic archives and
measures how each search backend scales.
"""

__version__ = "0.1.0"

from .embeddings import (
    EMBEDDING_DIM,
    ArchiveManifest,
    FaceObservation,
    ImageRecord,
    MalformedRecordError,
    as_embedding,
    euclidean_distance,
    load_manifest,
    save_manifest,
)
from .index import (
    FlatIndex,
    IndexConfig,
    InsufficientTrainingDataError,
    IvfPqIndex,
    SearchHit,
    UntrainedIndexError,
    create_index,
    load_index,
)
from .resolver import (
    IdentityRegistry,
    ResolvedImage,
    load_registry,
    load_resolution,
    reassign_archive,
    resolve_archive,
    resolve_face,
    save_registry,
    save_resolution,
)
from .graph import (
    CoOccurrenceGraph,
    EdgeRecord,
    UnknownImageError,
    aggregate_graph,
    build_edgelist,
    build_graph,
    image_edge_share,
    read_edge_csv,
    top_images_by_edge_share,
    write_edge_csv,
    write_gexf,
)
from .community import (
    CommunityStats,
    EmptyGraphError,
    Partition,
    community_stats,
    louvain,
    modularity,
)
from .synthetic import (
    InfeasibleSpecError,
    SyntheticSpec,
    generate_synthetic_archive,
    place_separated_anchors,
)
from .bench import (
    TimingRecord,
    fit_loglog_slope,
    naive_resolve_archive,
    run_scaling_benchmark,
    write_series_csv,
)

__all__ = [
    "EMBEDDING_DIM",
    "ArchiveManifest",
    "FaceObservation",
    "ImageRecord",
    "MalformedRecordError",
    "as_embedding",
    "euclidean_distance",
    "load_manifest",
    "save_manifest",
    "FlatIndex",
    "IndexConfig",
    "InsufficientTrainingDataError",
    "IvfPqIndex",
    "SearchHit",
    "UntrainedIndexError",
    "create_index",
    "load_index",
    "IdentityRegistry",
    "ResolvedImage",
    "load_registry",
    "load_resolution",
    "reassign_archive",
    "resolve_archive",
    "resolve_face",
    "save_registry",
    "save_resolution",
    "CoOccurrenceGraph",
    "EdgeRecord",
    "UnknownImageError",
    "aggregate_graph",
    "build_edgelist",
    "build_graph",
    "image_edge_share",
    "read_edge_csv",
    "top_images_by_edge_share",
    "write_edge_csv",
    "write_gexf",
    "CommunityStats",
    "EmptyGraphError",
    "Partition",
    "community_stats",
    "louvain",
    "modularity",
    "InfeasibleSpecError",
    "SyntheticSpec",
    "generate_synthetic_archive",
    "place_separated_anchors",
    "TimingRecord",
    "fit_loglog_slope",
    "naive_resolve_archive",
    "run_scaling_benchmark",
    "write_series_csv",
]
