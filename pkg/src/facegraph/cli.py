"""Command-line pipeline: resolve -> graph -> communities (+ bench).

Every stage consumes and produces only the documented file formats, so
stages can be re-run independently. All randomness flows from --seed, and a
command rerun on identical inputs writes byte-identical outputs (benchmark
wall times excepted, by nature).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .bench import (
    BACKENDS,
    format_table,
    plot_series,
    run_scaling_benchmark,
    write_series_csv,
)
from .community import community_stats, louvain
from .embeddings import load_manifest
from .graph import (
    build_graph,
    read_edge_csv,
    top_images_by_edge_share,
    write_edge_csv,
    write_gexf,
)
from .index import IndexConfig
from .resolver import (
    load_resolution,
    resolve_archive,
    save_registry,
    save_resolution,
)


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    parser.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    parser.add_argument(
        "--config-dump",
        action="store_true",
        help="print the fully resolved configuration and exit",
    )


def _add_resolve_opts(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--backend", choices=["flat", "ivfpq"], default="flat")
    parser.add_argument("--threshold", type=_positive_float, default=0.5)
    parser.add_argument("--nlist", type=int, default=None, help="IVFPQ coarse lists (auto)")
    parser.add_argument("--m", type=int, default=8, help="IVFPQ subquantizers")
    parser.add_argument("--nprobe", type=int, default=8, help="IVFPQ lists probed per query")
    parser.add_argument("--train-min", type=int, default=1024, help="IVFPQ cold-start size")
    parser.add_argument(
        "--strict-dup-faces",
        action="store_true",
        help="force a repeated within-image match into a new identity",
    )


def _index_config(args) -> IndexConfig:
    return IndexConfig(
        backend=args.backend,
        nlist=args.nlist,
        m=args.m,
        nprobe=args.nprobe,
        train_min=args.train_min,
        seed=args.seed,
    )


def _resolved_config(args) -> dict:
    skip = {"func", "config_dump"}
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        out[key] = str(value) if isinstance(value, Path) else value
    out["version"] = __version__
    return out


def _prepare(args) -> Path | None:
    """Handle --config-dump; otherwise create the output directory."""
    if args.config_dump:
        print(json.dumps(_resolved_config(args), indent=2, sort_keys=True))
        return None
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "config.json", "w", encoding="utf-8") as fh:
        json.dump(_resolved_config(args), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


def _require_file(stage: str, path: Path) -> None:
    if not path.is_file():
        raise StageError(stage, f"input file not found: {path}")


def _run_resolve(args, out: Path) -> tuple[Path, Path]:
    _require_file("resolve", args.manifest)
    manifest = load_manifest(args.manifest)
    registry, resolved = resolve_archive(
        manifest,
        _index_config(args),
        threshold=args.threshold,
        strict_dup_faces=args.strict_dup_faces,
    )
    resolution_path = out / "resolution.jsonl"
    registry_path = out / "registry.jsonl"
    save_resolution(resolved, resolution_path)
    save_registry(registry, registry_path)
    print(
        f"resolve: {len(manifest)} images, {manifest.face_count} faces -> "
        f"{len(registry)} identities"
    )
    return resolution_path, registry_path


def _run_graph(args, out: Path, resolution_path: Path) -> tuple[Path, int]:
    _require_file("graph", resolution_path)
    resolved = load_resolution(resolution_path)
    registry_size = 1 + max(
        (max(img.identity_ids) for img in resolved if img.identity_ids), default=-1
    )
    graph = build_graph(resolved, registry_size)
    edges_path = out / "edges.csv"
    write_edge_csv(graph, edges_path)
    write_gexf(graph, out / "graph.gexf")
    print(
        f"graph: {len(graph.nodes)} nodes, {graph.edge_count} edges, "
        f"{len(graph.isolates)} isolates"
    )
    return edges_path, registry_size


def _run_communities(
    args, out: Path, edges_path: Path, registry_size: int | None = None
) -> tuple[Path, Path]:
    _require_file("communities", edges_path)
    # isolates are invisible in an edge list; an explicit registry size
    # (from the resolve stage or --registry-size) restores their count
    graph = read_edge_csv(edges_path, registry_size=registry_size)
    use_weights = not args.unweighted
    partition = louvain(graph, seed=args.seed, resolution=args.resolution, use_weights=use_weights)
    stats = community_stats(partition, graph)
    strength = graph.strength()

    partition_path = out / "partition.jsonl"
    with open(partition_path, "w", encoding="utf-8") as fh:
        for node in sorted(partition.assignment):
            fh.write(
                json.dumps(
                    {
                        "identity": node,
                        "community": partition.assignment[node],
                        "degree": strength[node],
                    },
                    sort_keys=True,
                )
            )
            fh.write("\n")

    report = {
        "nodes": len(graph.nodes),
        "edges": graph.edge_count,
        "total_edge_weight": graph.total_weight,
        "isolates": len(graph.isolates),
        "communities": stats.community_count,
        "two_node_communities": stats.two_node_count,
        "largest_community_size": stats.largest_size,
        "largest_community_fraction": stats.largest_fraction,
        "modularity": partition.modularity,
        "size_histogram": {str(k): v for k, v in sorted(stats.size_histogram.items())},
        "top_images_by_edge_share": [
            {"image": img, "edges": count, "fraction": frac}
            for img, count, frac in top_images_by_edge_share(graph)
        ],
    }
    stats_path = out / "stats.json"
    with open(stats_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_gexf(graph, out / "graph_communities.gexf", partition=partition.assignment)
    print(
        f"communities: {stats.community_count} communities, "
        f"modularity {partition.modularity:.4f}"
    )
    return stats_path, partition_path


def cmd_resolve(args) -> int:
    out = _prepare(args)
    if out is None:
        return 0
    _run_resolve(args, out)
    return 0


def cmd_graph(args) -> int:
    out = _prepare(args)
    if out is None:
        return 0
    _run_graph(args, out, args.resolution_file)
    return 0


def cmd_communities(args) -> int:
    out = _prepare(args)
    if out is None:
        return 0
    _run_communities(args, out, args.edges, registry_size=args.registry_size)
    return 0


def cmd_bench(args) -> int:
    out = _prepare(args)
    if out is None:
        return 0
    backends = tuple(args.backends.split(","))
    records = run_scaling_benchmark(
        sizes=args.sizes,
        backends=backends,
        seed=args.seed,
        threshold=args.threshold,
        progress=lambda r: print(
            f"bench: {r.backend:<6} faces={r.faces:<7} {r.seconds:.3f}s "
            f"identities={r.identities} (truth {r.ground_truth_identities})"
        ),
    )
    write_series_csv(records, out / "series.csv")
    print(format_table(records))
    if args.plot:
        plot_series(records, out / "scaling.png")
    return 0


def cmd_pipeline(args) -> int:
    out = _prepare(args)
    if out is None:
        return 0
    resolution_path, _ = _run_resolve(args, out)
    edges_path, registry_size = _run_graph(args, out, resolution_path)
    _run_communities(args, out, edges_path, registry_size=registry_size)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="facegraph",
        description="Build and analyze face co-occurrence networks from embedding archives.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_resolve = sub.add_parser("resolve", help="assign identities to every face")
    p_resolve.add_argument("manifest", type=Path, help="archive manifest (.jsonl)")
    _add_resolve_opts(p_resolve)
    _add_common(p_resolve)
    p_resolve.set_defaults(func=cmd_resolve)

    p_graph = sub.add_parser("graph", help="build the co-occurrence graph")
    p_graph.add_argument("resolution_file", type=Path, help="resolution .jsonl from resolve")
    _add_common(p_graph)
    p_graph.set_defaults(func=cmd_graph)

    p_comm = sub.add_parser("communities", help="Louvain communities and statistics")
    p_comm.add_argument("edges", type=Path, help="edge CSV from graph")
    p_comm.add_argument("--resolution", type=_positive_float, default=1.0, help="Louvain resolution")
    p_comm.add_argument("--unweighted", action="store_true", help="ignore co-occurrence weights")
    p_comm.add_argument(
        "--registry-size",
        type=int,
        default=None,
        help="total identity count, for isolate accounting (default: max id + 1)",
    )
    _add_common(p_comm)
    p_comm.set_defaults(func=cmd_communities)

    p_bench = sub.add_parser("bench", help="scaling benchmark on synthetic archives")
    p_bench.add_argument(
        "--sizes",
        type=lambda s: [int(x) for x in s.split(",")],
        default=[1000, 2000, 4000, 8000, 16000],
        help="comma-separated face counts, ascending",
    )
    p_bench.add_argument("--backends", default=",".join(BACKENDS))
    p_bench.add_argument("--threshold", type=_positive_float, default=0.5)
    p_bench.add_argument("--plot", action="store_true", help="also render scaling.png")
    _add_common(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    p_pipe = sub.add_parser("pipeline", help="resolve + graph + communities")
    p_pipe.add_argument("manifest", type=Path)
    _add_resolve_opts(p_pipe)
    p_pipe.add_argument("--resolution", type=_positive_float, default=1.0, help="Louvain resolution")
    p_pipe.add_argument("--unweighted", action="store_true")
    _add_common(p_pipe)
    p_pipe.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # surface a stage-named diagnostic, not a traceback
        stage = getattr(args, "command", "facegraph")
        print(f"error: {stage}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
