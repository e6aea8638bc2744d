"""Command-line entry point.

    textgraph <subcommand> --config <path> [--force] [--workers N] [--seed S]

Subcommands run single pipeline stages (preprocess, graph, scan, select,
evaluate, classify), the whole chain (all), or generate synthetic
benchmark inputs (synth). Errors are reported as one JSON object on
stderr with a nonzero exit status. The TEXTGRAPH_OUTPUT_ROOT environment
variable re-roots relative output directories.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .corpus import write_documents
from .embeddings import save_embeddings
from .errors import TextgraphError
from .partition import Partition
from .pipeline import STAGE_RUNNERS, PipelineConfig, run_all, run_scan
from .simgraph import save_graph
from .synth import clustered_label_corpus, planted_hierarchy_graph, topic_embeddings, two_topic_corpus


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="textgraph", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    stage_names = list(STAGE_RUNNERS) + ["all"]
    for name in stage_names:
        p = sub.add_parser(name, help=f"run the {name} stage" if name != "all" else "run every stage")
        p.add_argument("--config", required=True, help="pipeline config JSON")
        p.add_argument("--force", action="store_true", help="ignore stale-artifact checks")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        if name in ("scan", "all"):
            p.add_argument("--workers", type=int, default=1, help="parallel workers for the scan")

    p = sub.add_parser("synth", help="generate synthetic benchmark inputs")
    p.add_argument("--kind", required=True,
                   choices=["planted-graph", "two-topic", "clf-corpus", "embeddings"])
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=None, help="document count (corpus kinds)")
    p.add_argument("--dim", type=int, default=32, help="embedding dimension (embeddings kind)")
    p.add_argument("--docs", default=None, help="documents.jsonl to embed (embeddings kind)")
    return parser


def _run_synth(args) -> None:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "planted-graph":
        graph, fine, coarse = planted_hierarchy_graph()
        save_graph(graph, out / "graph_edges.txt", out / "graph_nodes.json")
        (out / "planted_partitions.json").write_text(json.dumps({
            "fine": fine.labels.tolist(),
            "coarse": coarse.labels.tolist(),
        }, sort_keys=True) + "\n", "utf-8")
    elif args.kind == "two-topic":
        records, topics = two_topic_corpus(n_docs=args.n or 200, seed=args.seed)
        write_documents(records, out / "documents.jsonl")
        (out / "planted.json").write_text(json.dumps({
            "topic": topics.labels.tolist(),
        }, sort_keys=True) + "\n", "utf-8")
    elif args.kind == "clf-corpus":
        records, topics = clustered_label_corpus(n_docs=args.n or 240, seed=args.seed)
        write_documents(records, out / "documents.jsonl")
        (out / "planted.json").write_text(json.dumps({
            "topic": topics.labels.tolist(),
        }, sort_keys=True) + "\n", "utf-8")
    elif args.kind == "embeddings":
        if not args.docs:
            raise TextgraphError("synth --kind embeddings needs --docs")
        from .corpus import read_documents

        records = read_documents(args.docs)
        topics = Partition.from_labels([rec.categories.get("topic", "?") for rec in records])
        matrix = topic_embeddings(records, topics, dim=args.dim, seed=args.seed)
        save_embeddings(matrix, out / "embeddings.txt")


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            _run_synth(args)
            return 0
        cfg = PipelineConfig.from_file(args.config, seed=args.seed)
        out = cfg.output_dir
        if args.command == "all":
            run_all(cfg, out, force=args.force, workers=args.workers)
        elif args.command == "scan":
            run_scan(cfg, out, force=args.force, workers=args.workers)
        else:
            STAGE_RUNNERS[args.command](cfg, out, force=args.force)
        return 0
    except TextgraphError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
