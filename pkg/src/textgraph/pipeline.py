"""Pipeline stages and their on-disk artifacts.

Each stage reads only prior-stage artifacts and writes its outputs plus a
manifest entry (sha256 of inputs and outputs, the stage's config section,
and the seed). Before running, a stage verifies the recorded chain is
still consistent with the files on disk and refuses to run on stale
artifacts unless forced. All artifacts are deterministic functions of
(inputs, config, seed); worker counts never change bytes.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from . import corpus as corpus_mod
from .corpus import Corpus, read_documents, read_tokenized, write_tokenized
from .embeddings import EmbeddingMatrix, load_embeddings, tfidf_matrix
from .errors import (
    ConfigError,
    DegenerateLabels,
    DocumentEmptyAfterPreprocessing,
    StaleArtifact,
    ZeroEntropy,
)
from .harmclf import (
    Categorical,
    FeatureSpec,
    LabeledDataset,
    ModelSpec,
    MsLabels,
    TextEmbedding,
    TextTfidf,
    assemble_features,
    balanced_sample,
    cross_validate,
)
from .metrics import contingency_zscores, nmi, pmi_partition, sankey_links
from .mstability import ScanConfig, ScanResult, build_markov_process, linear_time_grid, log_time_grid, scan
from .partition import Partition
from .scaleselect import find_robust_scales
from .simgraph import cosine_similarity_matrix, load_graph, mst_knn_graph, normalize_similarity, save_graph

STAGE_ORDER = ("preprocess", "graph", "scan", "select", "evaluate", "classify")

ARTIFACTS = {
    "preprocess": ("tokens.jsonl",),
    "graph": ("graph_edges.txt", "graph_nodes.json"),
    "scan": ("scan.jsonl", "vi_cross.txt"),
    "select": ("scales.json",),
    "evaluate": ("evaluation.json",),
    "classify": ("classification.json",),
}

_DEFAULTS: dict[str, Any] = {
    "input": {"documents": None, "stopwords": None, "embedding_source": "tfidf", "embeddings": None},
    "graph": {"k": 13},
    "scan": {
        "grid": {"kind": "log", "t_min": 0.01, "t_max": 100.0, "num": 400, "step": 0.01},
        "runs_per_time": 500,
        "keep_top": 50,
    },
    "select": {"dip_threshold": None, "plateau_threshold": None, "min_plateau_points": None},
    "evaluate": {"category": None, "top_n_words": 10, "ngram_n": 2, "ngram_top_m": 20},
    "classify": {
        "model": "ridge",
        "alpha": 1.0,
        "penalty": 10.0,
        "tol": 1e-4,
        "epochs": 100,
        "folds": 5,
        "features": ["text"],
        "ms_scale": 0,
        "balanced_counts": None,
    },
    "seed": 0,
    "output_dir": "out",
}


def _merge(defaults: Any, given: Any) -> Any:
    if isinstance(defaults, dict) and isinstance(given, dict):
        out = dict(defaults)
        for key, value in given.items():
            out[key] = _merge(defaults.get(key), value) if key in defaults else value
        return out
    return defaults if given is None else given


@dataclass
class PipelineConfig:
    data: dict
    base_dir: Path

    @classmethod
    def from_file(cls, path: str | Path, seed: int | None = None) -> "PipelineConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text("utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})")
        data = _merge(_DEFAULTS, raw)
        if seed is not None:
            data["seed"] = seed
        cfg = cls(data, path.parent.resolve())
        cfg.validate()
        return cfg

    # --- accessors --------------------------------------------------------

    def _path(self, value: str) -> Path:
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def documents_path(self) -> Path:
        return self._path(self.data["input"]["documents"])

    @property
    def stopwords_path(self) -> Path | None:
        v = self.data["input"]["stopwords"]
        return self._path(v) if v else None

    @property
    def embeddings_path(self) -> Path | None:
        v = self.data["input"]["embeddings"]
        return self._path(v) if v else None

    @property
    def embedding_source(self) -> str:
        return self.data["input"]["embedding_source"]

    @property
    def seed(self) -> int:
        return int(self.data["seed"])

    @property
    def output_dir(self) -> Path:
        root = os.environ.get("TEXTGRAPH_OUTPUT_ROOT")
        out = Path(self.data["output_dir"])
        if root:
            return Path(root) / out
        return out if out.is_absolute() else self.base_dir / out

    def section(self, name: str) -> dict:
        return self.data[name]

    def time_grid(self) -> np.ndarray:
        grid = self.data["scan"]["grid"]
        if grid["kind"] == "log":
            return log_time_grid(grid["t_min"], grid["t_max"], int(grid["num"]))
        if grid["kind"] == "linear":
            return linear_time_grid(grid["t_min"], grid["t_max"], grid["step"])
        raise ConfigError(f"unknown grid kind {grid['kind']!r}")

    def validate(self) -> None:
        inp = self.data["input"]
        if not inp["documents"]:
            raise ConfigError("input.documents is required")
        if not self.documents_path.exists():
            raise ConfigError(f"documents file not found: {self.documents_path}")
        if inp["stopwords"] and not self.stopwords_path.exists():
            raise ConfigError(f"stopwords file not found: {self.stopwords_path}")
        if inp["embedding_source"] not in ("tfidf", "external", "both"):
            raise ConfigError("input.embedding_source must be tfidf, external or both")
        if inp["embedding_source"] in ("external", "both"):
            if not inp["embeddings"]:
                raise ConfigError("embedding_source=external needs input.embeddings")
            if not self.embeddings_path.exists():
                raise ConfigError(f"embeddings file not found: {self.embeddings_path}")
        if int(self.data["graph"]["k"]) < 0:
            raise ConfigError("graph.k must be >= 0")
        sc = self.data["scan"]
        if not (1 <= int(sc["keep_top"]) <= int(sc["runs_per_time"])):
            raise ConfigError("scan needs 1 <= keep_top <= runs_per_time")
        grid = sc["grid"]
        if grid["kind"] not in ("log", "linear"):
            raise ConfigError("scan.grid.kind must be log or linear")
        if grid["t_min"] <= 0 or grid["t_max"] <= grid["t_min"]:
            raise ConfigError("scan grid needs 0 < t_min < t_max")
        clf = self.data["classify"]
        if clf["model"] not in ("ridge", "svm"):
            raise ConfigError("classify.model must be ridge or svm")
        if int(clf["folds"]) < 2:
            raise ConfigError("classify.folds must be >= 2")
        for feat in clf["features"]:
            if feat not in ("text", "tfidf", "embedding", "ms_labels") and not feat.startswith("categorical:"):
                raise ConfigError(f"unknown feature block {feat!r}")


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------

def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


class Manifest:
    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.path = out_dir / "manifest.json"
        if self.path.exists():
            self.data = json.loads(self.path.read_text("utf-8"))
        else:
            self.data = {"stages": {}}

    def record(self, stage: str, inputs: dict[str, Path], outputs: list[str], config_section: Any, seed: int) -> None:
        self.data["stages"][stage] = {
            "inputs": {name: file_sha256(p) for name, p in sorted(inputs.items())},
            "input_paths": {name: str(p) for name, p in sorted(inputs.items())},
            "outputs": {name: file_sha256(self.out_dir / name) for name in sorted(outputs)},
            "config": config_section,
            "seed": seed,
        }
        self.save()

    def save(self) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.path.write_text(json.dumps(self.data, sort_keys=True, indent=2) + "\n", "utf-8")

    def entry(self, stage: str) -> dict | None:
        return self.data["stages"].get(stage)


def _stage_inputs(stage: str, cfg: PipelineConfig, out: Path) -> dict[str, Path]:
    """Input files a stage reads, as {logical name: path}."""
    inputs: dict[str, Path] = {}
    if stage == "preprocess":
        inputs["documents"] = cfg.documents_path
        if cfg.stopwords_path:
            inputs["stopwords"] = cfg.stopwords_path
    elif stage == "graph":
        inputs["tokens"] = out / "tokens.jsonl"
        if cfg.embedding_source == "external":
            inputs["embeddings"] = cfg.embeddings_path  # type: ignore[assignment]
    elif stage == "scan":
        inputs["graph_edges"] = out / "graph_edges.txt"
        inputs["graph_nodes"] = out / "graph_nodes.json"
    elif stage == "select":
        inputs["scan"] = out / "scan.jsonl"
        inputs["vi_cross"] = out / "vi_cross.txt"
    elif stage == "evaluate":
        inputs["tokens"] = out / "tokens.jsonl"
        inputs["scales"] = out / "scales.json"
    elif stage == "classify":
        inputs["tokens"] = out / "tokens.jsonl"
        if "ms_labels" in cfg.section("classify")["features"]:
            inputs["scales"] = out / "scales.json"
        if _classify_uses_embedding(cfg):
            inputs["embeddings"] = cfg.embeddings_path  # type: ignore[assignment]
    return inputs


_DEPS = {
    "preprocess": (),
    "graph": ("preprocess",),
    "scan": ("graph",),
    "select": ("scan",),
    "evaluate": ("preprocess", "select"),
    "classify": ("preprocess", "select"),
}


def _classify_uses_embedding(cfg: PipelineConfig) -> bool:
    feats = cfg.section("classify")["features"]
    if "embedding" in feats:
        return True
    return "text" in feats and cfg.embedding_source == "external"


def _classify_deps(cfg: PipelineConfig) -> tuple[str, ...]:
    if "ms_labels" in cfg.section("classify")["features"]:
        return ("preprocess", "select")
    return ("preprocess",)


def check_chain(stage: str, cfg: PipelineConfig, out: Path, manifest: Manifest, force: bool) -> None:
    """Verify every upstream stage's manifest entry still matches disk and config."""
    if force:
        return
    deps = _classify_deps(cfg) if stage == "classify" else _DEPS[stage]
    for dep in deps:
        entry = manifest.entry(dep)
        if entry is None:
            raise StaleArtifact(f"stage {stage!r} needs {dep!r} to run first")
        for name, path in _stage_inputs(dep, cfg, out).items():
            recorded = entry["inputs"].get(name)
            if recorded is None or not Path(path).exists() or file_sha256(path) != recorded:
                raise StaleArtifact(
                    f"input {name!r} of stage {dep!r} changed since it ran; rerun it or use --force"
                )
        for name, digest in entry["outputs"].items():
            path = out / name
            if not path.exists() or file_sha256(path) != digest:
                raise StaleArtifact(
                    f"artifact {name!r} of stage {dep!r} was modified; rerun it or use --force"
                )
        if entry["config"] != _config_snapshot(dep, cfg) or entry["seed"] != cfg.seed:
            raise StaleArtifact(
                f"configuration of stage {dep!r} changed since it ran; rerun it or use --force"
            )
        check_chain(dep, cfg, out, manifest, force)


def _config_snapshot(stage: str, cfg: PipelineConfig) -> Any:
    if stage == "preprocess":
        return cfg.section("input")
    if stage == "graph":
        return {"graph": cfg.section("graph"), "source": cfg.embedding_source}
    if stage == "scan":
        return cfg.section("scan")
    if stage == "select":
        return cfg.section("select")
    if stage == "evaluate":
        return cfg.section("evaluate")
    if stage == "classify":
        return cfg.section("classify")
    raise ValueError(stage)


def _write_json(path: Path, payload: Any) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", "utf-8")


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------

def run_preprocess(cfg: PipelineConfig, out: Path, force: bool = False) -> None:
    manifest = Manifest(out)
    check_chain("preprocess", cfg, out, manifest, force)
    records = read_documents(cfg.documents_path)
    stopwords = corpus_mod.load_stopwords(cfg.stopwords_path) if cfg.stopwords_path else None
    for rec in records:
        rec.tokens = corpus_mod.preprocess(rec.raw_text, stopwords)
        if not rec.tokens:
            raise DocumentEmptyAfterPreprocessing(rec.doc_id)
    out.mkdir(parents=True, exist_ok=True)
    write_tokenized(records, out / "tokens.jsonl")
    manifest.record("preprocess", _stage_inputs("preprocess", cfg, out), list(ARTIFACTS["preprocess"]),
                    _config_snapshot("preprocess", cfg), cfg.seed)


def _load_embedding_matrix(cfg: PipelineConfig, corpus: Corpus) -> EmbeddingMatrix:
    if cfg.embedding_source == "external":
        return load_embeddings(cfg.embeddings_path, corpus.doc_ids)
    return tfidf_matrix(corpus)


def run_graph(cfg: PipelineConfig, out: Path, force: bool = False) -> None:
    manifest = Manifest(out)
    check_chain("graph", cfg, out, manifest, force)
    records = read_tokenized(out / "tokens.jsonl")
    corpus = Corpus.from_records(records)
    embedding = _load_embedding_matrix(cfg, corpus)
    sim = normalize_similarity(cosine_similarity_matrix(embedding))
    graph = mst_knn_graph(sim.s_hat, sim.d_hat, int(cfg.section("graph")["k"]), corpus.doc_ids)
    save_graph(graph, out / "graph_edges.txt", out / "graph_nodes.json")
    manifest.record("graph", _stage_inputs("graph", cfg, out), list(ARTIFACTS["graph"]),
                    _config_snapshot("graph", cfg), cfg.seed)


def run_scan(cfg: PipelineConfig, out: Path, force: bool = False, workers: int = 1) -> None:
    manifest = Manifest(out)
    check_chain("scan", cfg, out, manifest, force)
    graph = load_graph(out / "graph_edges.txt", out / "graph_nodes.json")
    mp = build_markov_process(graph)
    section = cfg.section("scan")
    scan_cfg = ScanConfig(
        time_grid=cfg.time_grid(),
        runs_per_time=int(section["runs_per_time"]),
        keep_top=int(section["keep_top"]),
        seed=cfg.seed,
    )
    result = scan(mp, scan_cfg, workers=workers)
    result.save(out / "scan.jsonl", out / "vi_cross.txt")
    manifest.record("scan", _stage_inputs("scan", cfg, out), list(ARTIFACTS["scan"]),
                    _config_snapshot("scan", cfg), cfg.seed)


def run_select(cfg: PipelineConfig, out: Path, force: bool = False) -> None:
    manifest = Manifest(out)
    check_chain("select", cfg, out, manifest, force)
    result = ScanResult.load(out / "scan.jsonl", out / "vi_cross.txt")
    section = cfg.section("select")
    scales = find_robust_scales(
        result,
        dip_threshold=section["dip_threshold"],
        plateau_threshold=section["plateau_threshold"],
        min_plateau_points=section["min_plateau_points"],
    )
    payload = []
    partition_files = []
    for i, scale in enumerate(scales):
        fname = f"partition_{i:03d}.json"
        _write_json(out / fname, {
            "t_star": scale.t_star,
            "num_clusters": scale.num_clusters,
            "labels": scale.partition.labels.tolist(),
        })
        partition_files.append(fname)
        payload.append({
            "t_star": scale.t_star,
            "t_lo": scale.t_lo,
            "t_hi": scale.t_hi,
            "num_clusters": scale.num_clusters,
            "vi_at_dip": scale.vi_at_dip,
            "plateau_mean_vi": scale.plateau_mean_vi,
            "partition_file": fname,
        })
    _write_json(out / "scales.json", payload)
    manifest.record("select", _stage_inputs("select", cfg, out),
                    list(ARTIFACTS["select"]) + partition_files,
                    _config_snapshot("select", cfg), cfg.seed)


def _load_scales(out: Path) -> list[dict]:
    scales = json.loads((out / "scales.json").read_text("utf-8"))
    for scale in scales:
        part = json.loads((out / scale["partition_file"]).read_text("utf-8"))
        scale["partition"] = Partition(part["labels"])
    return scales


def run_evaluate(cfg: PipelineConfig, out: Path, force: bool = False) -> None:
    manifest = Manifest(out)
    check_chain("evaluate", cfg, out, manifest, force)
    records = read_tokenized(out / "tokens.jsonl")
    corpus = Corpus.from_records(records)
    scales = _load_scales(out)
    section = cfg.section("evaluate")
    category = section["category"]
    cat_values = None
    if category is not None:
        cat_values = [rec.categories.get(category, "unknown") for rec in records]

    per_scale = []
    for scale in scales:
        partition: Partition = scale["partition"]
        entry: dict[str, Any] = {
            "t_star": scale["t_star"],
            "num_clusters": scale["num_clusters"],
            "partition_file": scale["partition_file"],
        }
        topic = pmi_partition(partition, corpus, top_n_words=int(section["top_n_words"]))
        entry["pmi_hat"] = topic.pmi_hat
        entry["topics"] = topic.to_json()["clusters"]
        if cat_values is not None:
            try:
                entry["nmi"] = nmi(partition, Partition.from_labels(cat_values))
            except ZeroEntropy:
                entry["nmi"] = None
                entry["nmi_note"] = "zero entropy (single cluster on one side)"
            entry["contingency"] = contingency_zscores(partition, cat_values).to_json()
        ngrams = {}
        for cid, idx in enumerate(partition.clusters()):
            cluster_records = [records[int(i)] for i in idx]
            ngrams[str(cid)] = corpus_mod.ngram_frequencies(
                cluster_records, int(section["ngram_n"]), int(section["ngram_top_m"])
            )
        entry["ngrams"] = ngrams
        per_scale.append(entry)

    order = sorted(range(len(scales)), key=lambda i: -scales[i]["num_clusters"])
    sankey = []
    for fine_pos, coarse_pos in zip(order, order[1:]):
        links = sankey_links(scales[fine_pos]["partition"], scales[coarse_pos]["partition"])
        sankey.append({
            "fine_scale": scales[fine_pos]["partition_file"],
            "coarse_scale": scales[coarse_pos]["partition_file"],
            "links": links,
        })
    sankey_categories = []
    if cat_values is not None:
        cat_partition = Partition.from_labels(cat_values)
        for i, scale in enumerate(scales):
            sankey_categories.append({
                "scale": scale["partition_file"],
                "links": sankey_links(scale["partition"], cat_partition),
            })

    _write_json(out / "evaluation.json", {
        "scales": per_scale,
        "sankey": sankey,
        "sankey_to_categories": sankey_categories,
    })
    manifest.record("evaluate", _stage_inputs("evaluate", cfg, out), list(ARTIFACTS["evaluate"]),
                    _config_snapshot("evaluate", cfg), cfg.seed)


def run_classify(cfg: PipelineConfig, out: Path, force: bool = False) -> None:
    manifest = Manifest(out)
    check_chain("classify", cfg, out, manifest, force)
    records = read_tokenized(out / "tokens.jsonl")
    corpus = Corpus.from_records(records)
    section = cfg.section("classify")

    unlabeled = [rec.doc_id for rec in records if rec.harm_label is None]
    if unlabeled:
        raise DegenerateLabels(f"{len(unlabeled)} record(s) without harm labels (first: {unlabeled[0]!r})")

    blocks = []
    needs_tfidf = needs_embedding = False
    partition = None
    for feat in section["features"]:
        if feat == "text":
            if cfg.embedding_source == "external":
                blocks.append(TextEmbedding())
                needs_embedding = True
            else:
                blocks.append(TextTfidf())
                needs_tfidf = True
        elif feat == "tfidf":
            blocks.append(TextTfidf())
            needs_tfidf = True
        elif feat == "embedding":
            blocks.append(TextEmbedding())
            needs_embedding = True
        elif feat.startswith("categorical:"):
            blocks.append(Categorical(feat.split(":", 1)[1]))
        elif feat == "ms_labels":
            scales = _load_scales(out)
            if not scales:
                raise DegenerateLabels("ms_labels requested but no robust scales were selected")
            index = int(section["ms_scale"])
            if not (0 <= index < len(scales)):
                raise ConfigError(f"classify.ms_scale {index} out of range (have {len(scales)} scales)")
            partition = scales[index]["partition"]
            blocks.append(MsLabels(partition.num_clusters))

    tfidf = tfidf_matrix(corpus) if needs_tfidf else None
    embedding = load_embeddings(cfg.embeddings_path, corpus.doc_ids) if needs_embedding else None
    assembly = assemble_features(records, FeatureSpec(tuple(blocks)), partition=partition,
                                 tfidf=tfidf, embedding=embedding)
    labels = np.array([rec.harm_label for rec in records], dtype=np.int64)
    dataset = LabeledDataset(assembly.matrix, labels)
    if section["balanced_counts"]:
        counts = {int(k): int(v) for k, v in section["balanced_counts"].items()}
        dataset = balanced_sample(dataset, counts, seed=cfg.seed)

    spec = ModelSpec(
        kind=section["model"],
        alpha=float(section["alpha"]),
        penalty=float(section["penalty"]),
        tol=float(section["tol"]),
        epochs=int(section["epochs"]),
        standardize_columns=assembly.standardize_columns(),
    )
    report = cross_validate(dataset, spec, folds=int(section["folds"]), seed=cfg.seed)
    payload = report.to_json()
    payload["model"] = section["model"]
    payload["features"] = section["features"]
    payload["total_dimension"] = assembly.total_dimension
    _write_json(out / "classification.json", payload)
    manifest.record("classify", _stage_inputs("classify", cfg, out), list(ARTIFACTS["classify"]),
                    _config_snapshot("classify", cfg), cfg.seed)


# ---------------------------------------------------------------------------
# Whole-pipeline driver
# ---------------------------------------------------------------------------

def _branch_config(cfg: PipelineConfig, source: str) -> PipelineConfig:
    data = json.loads(json.dumps(cfg.data))  # deep copy
    data["input"]["embedding_source"] = source
    branch = PipelineConfig(data, cfg.base_dir)
    branch.validate()
    return branch


def run_all(cfg: PipelineConfig, out: Path, force: bool = False, workers: int = 1) -> None:
    if cfg.embedding_source == "both":
        rows = {}
        for source in ("tfidf", "external"):
            branch_out = out / source
            branch = _branch_config(cfg, source)
            _run_single(branch, branch_out, force, workers)
            rows[source] = _scale_summaries(branch_out)
        comparison = _pair_branches(rows["tfidf"], rows["external"])
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "comparison.json", comparison)
    else:
        _run_single(cfg, out, force, workers)


def _run_single(cfg: PipelineConfig, out: Path, force: bool, workers: int) -> None:
    run_preprocess(cfg, out, force)
    run_graph(cfg, out, force)
    run_scan(cfg, out, force, workers)
    run_select(cfg, out, force)
    run_evaluate(cfg, out, force)
    run_classify(cfg, out, force)


def _scale_summaries(out: Path) -> list[dict]:
    evaluation = json.loads((out / "evaluation.json").read_text("utf-8"))
    rows = []
    for entry in evaluation["scales"]:
        rows.append({
            "t_star": entry["t_star"],
            "num_clusters": entry["num_clusters"],
            "nmi": entry.get("nmi"),
            "pmi_hat": entry["pmi_hat"],
        })
    rows.sort(key=lambda r: -r["num_clusters"])
    return rows


def _pair_branches(tfidf_rows: list[dict], external_rows: list[dict]) -> dict:
    """Rank-paired comparison of the two embedding routes (finest scale first)."""
    paired = []
    for rank in range(min(len(tfidf_rows), len(external_rows))):
        paired.append({"rank": rank, "tfidf": tfidf_rows[rank], "external": external_rows[rank]})
    return {
        "paired_scales": paired,
        "tfidf_scales": tfidf_rows,
        "external_scales": external_rows,
    }


STAGE_RUNNERS = {
    "preprocess": run_preprocess,
    "graph": run_graph,
    "scan": run_scan,
    "select": run_select,
    "evaluate": run_evaluate,
    "classify": run_classify,
}
