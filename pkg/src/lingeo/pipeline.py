"""End-to-end runs: ingest -> geometry -> transform -> reduce -> evaluate.

One top-level seed fans out to stage seeds through a fixed hash derivation,
so identical configs reproduce identical outputs byte for byte.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from . import corpus as corpus_mod
from . import diffusion as diffusion_mod
from . import taxonomy as taxonomy_mod
from .corpus import DocumentMatrix, PreprocessConfig, Vocabulary
from .evaluate import (EvaluationReport, LabeledEmbedding, evaluate_embedding,
                       search_convex_combination)
from .geometry import (CombinationWeights, ManualGeometrySpec, SoftScoreSpec,
                       TransformMatrix, build_manual_geometry, build_soft_geometry,
                       convex_combination, factorize_T, load_geometry_spec, transform)
from .matrixio import read_matrix, write_matrix
from .reduce import Embedding2D, PointCloud, TsneConfig, pca, tsne, write_embedding_csv


class PipelineError(RuntimeError):
    """Module error annotated with the stage it surfaced in."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[stage {stage}] {message}")
        self.stage = stage


def _stage(stage: str, fn: Callable, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except Exception as e:
        raise PipelineError(stage, str(e)) from e


def derive_seed(master: int, role: str) -> int:
    digest = hashlib.sha256(f"{master}:{role}".encode()).hexdigest()
    return int(digest[:16], 16)


@dataclass(frozen=True)
class GeometryConfig:
    method: str = "identity"   # identity|manual|soft|diffusion|ngram|taxonomy|combine
    spec_file: str | None = None
    c: float = 1.0
    components: tuple["GeometryConfig", ...] = ()
    alpha: tuple[float, ...] | None = None   # combine only; None means search
    grid_step: float = 0.1


@dataclass(frozen=True)
class PipelineConfig:
    corpus: str
    corpus_format: str = "jsonl"             # jsonl | txt_dir
    estimation_corpus: str | None = None
    ngram_file: str | None = None
    ngram_n: int = 3
    taxonomy_file: str | None = None
    similarity_file: str | None = None
    preprocessing: PreprocessConfig = field(default_factory=PreprocessConfig)
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    reducer: str = "pca"                     # pca | tsne
    tsne: TsneConfig = field(default_factory=TsneConfig)
    knn_k: int = 5
    seed: int = 0
    tf_normalize: bool = True
    embedding_out: str | None = None
    report_out: str | None = None


def _resolve(base: Path, p: str | None) -> str | None:
    if p is None:
        return None
    path = Path(p)
    return str(path if path.is_absolute() else base / path)


def _geometry_config_from_json(obj: dict) -> GeometryConfig:
    return GeometryConfig(
        method=obj.get("method", "identity"),
        spec_file=obj.get("spec_file"),
        c=float(obj.get("c", 1.0)),
        components=tuple(_geometry_config_from_json(c) for c in obj.get("components", [])),
        alpha=tuple(float(a) for a in obj["alpha"]) if obj.get("alpha") is not None else None,
        grid_step=float(obj.get("grid_step", 0.1)),
    )


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    obj = json.loads(path.read_text(encoding="utf-8"))
    base = path.parent
    pre = obj.get("preprocessing", {})
    preproc = PreprocessConfig(
        lowercase=bool(pre.get("lowercase", True)),
        stem=bool(pre.get("stem", True)),
        stopword_file=_resolve(base, pre.get("stopword_file")),
        vocab_cap=int(pre.get("vocab_cap", 2000)),
    )
    geom = _geometry_config_from_json(obj.get("geometry", {}))
    if geom.spec_file:
        geom = replace(geom, spec_file=_resolve(base, geom.spec_file))
    geom = replace(geom, components=tuple(
        replace(c, spec_file=_resolve(base, c.spec_file)) if c.spec_file else c
        for c in geom.components))
    tsne_cfg = TsneConfig(**{**TsneConfig().to_dict(), **obj.get("tsne", {})})
    return PipelineConfig(
        corpus=_resolve(base, obj["corpus"]),
        corpus_format=obj.get("corpus_format", "jsonl"),
        estimation_corpus=_resolve(base, obj.get("estimation_corpus")),
        ngram_file=_resolve(base, obj.get("ngram_file")),
        ngram_n=int(obj.get("ngram_n", 3)),
        taxonomy_file=_resolve(base, obj.get("taxonomy_file")),
        similarity_file=_resolve(base, obj.get("similarity_file")),
        preprocessing=preproc,
        geometry=geom,
        reducer=obj.get("reducer", "pca"),
        tsne=tsne_cfg,
        knn_k=int(obj.get("knn_k", 5)),
        seed=int(obj.get("seed", 0)),
        tf_normalize=bool(obj.get("tf_normalize", True)),
        embedding_out=_resolve(base, obj.get("embedding_out")),
        report_out=_resolve(base, obj.get("report_out")),
    )


def load_corpus_file(path: str, fmt: str, preproc: PreprocessConfig,
                     vocab: Vocabulary | None = None) -> DocumentMatrix:
    if fmt == "jsonl":
        raw = corpus_mod.load_jsonl(path)
    elif fmt == "txt_dir":
        raw = corpus_mod.load_txt_dir(path)
    else:
        raise ValueError(f"unknown corpus format {fmt!r}")
    return corpus_mod.ingest(raw, preproc, vocab=vocab)


def build_geometry(cfg: GeometryConfig, docs: DocumentMatrix,
                   pipeline: PipelineConfig) -> TransformMatrix:
    vocab = docs.vocab
    method = cfg.method
    if method == "identity":
        return TransformMatrix.identity(len(vocab))
    if method in ("manual", "soft"):
        if cfg.spec_file is None:
            raise ValueError(f"{method} geometry needs a spec_file")
        spec = load_geometry_spec(cfg.spec_file)
        if method == "manual":
            if not isinstance(spec, ManualGeometrySpec):
                raise ValueError("spec file is not a manual clustering spec")
            return build_manual_geometry(spec, vocab)
        if not isinstance(spec, SoftScoreSpec):
            raise ValueError("spec file is not a soft-score spec")
        return build_soft_geometry(spec, vocab)
    if method == "diffusion":
        source = pipeline.estimation_corpus or pipeline.corpus
        fmt = pipeline.corpus_format if source == pipeline.corpus else "jsonl"
        est = load_corpus_file(source, fmt, pipeline.preprocessing, vocab=vocab)
        table = diffusion_mod.contextual_distributions(est.terms)
        T = diffusion_mod.diffusion_kernel(table, diffusion_mod.DiffusionConfig(c=cfg.c))
        return factorize_T(T)
    if method == "ngram":
        if pipeline.ngram_file is None:
            raise ValueError("ngram geometry needs an ngram_file")
        table = diffusion_mod.load_ngram_table(pipeline.ngram_file, n=pipeline.ngram_n,
                                               vocab=vocab)
        ctx = diffusion_mod.ngram_contextual_distributions(table, vocab)
        T = diffusion_mod.diffusion_kernel(ctx, diffusion_mod.DiffusionConfig(c=cfg.c))
        H = factorize_T(T)
        H.provenance = "ngram"
        return H
    if method == "taxonomy":
        if pipeline.similarity_file is not None:
            T = taxonomy_mod.load_similarity_file(pipeline.similarity_file, vocab)
            return factorize_T(T)
        if pipeline.taxonomy_file is None:
            raise ValueError("taxonomy geometry needs a taxonomy_file or similarity_file")
        tax = taxonomy_mod.load_taxonomy(pipeline.taxonomy_file)
        counts_source = docs
        if pipeline.estimation_corpus:
            counts_source = load_corpus_file(pipeline.estimation_corpus, "jsonl",
                                             pipeline.preprocessing, vocab=vocab)
        totals = np.asarray(counts_source.counts.sum(axis=0)).ravel()
        word_counts = {w: int(totals[i]) for i, w in enumerate(vocab.words) if totals[i] > 0}
        p = taxonomy_mod.concept_probabilities(tax, word_counts)
        T = taxonomy_mod.taxonomy_similarity_matrix(tax, p, vocab)
        return factorize_T(T)
    if method == "combine":
        if not cfg.components:
            raise ValueError("combine geometry needs components")
        parts = [build_geometry(c, docs, pipeline) for c in cfg.components]
        if cfg.alpha is None:
            raise ValueError("combine geometry needs explicit alpha; "
                             "use search_convex_combination for the search")
        return convex_combination(parts, CombinationWeights(cfg.alpha))
    raise ValueError(f"unknown geometry method {method!r}")


def make_reducer(config: PipelineConfig) -> Callable[[PointCloud, str], Embedding2D]:
    reducer_seed = derive_seed(config.seed, "reducer")
    if config.reducer == "pca":
        def run(points: PointCloud, tag: str) -> Embedding2D:
            emb = pca(points, geometry_tag=tag)
            emb.provenance["seed"] = reducer_seed
            return emb
        return run
    if config.reducer == "tsne":
        tsne_cfg = replace(config.tsne, seed=reducer_seed)

        def run(points: PointCloud, tag: str) -> Embedding2D:
            return tsne(points, tsne_cfg, geometry_tag=tag)
        return run
    raise ValueError(f"unknown reducer {config.reducer!r}")


@dataclass(frozen=True)
class PipelineResult:
    docs: DocumentMatrix
    H: TransformMatrix
    embedding: Embedding2D
    report: EvaluationReport | None
    alpha: CombinationWeights | None = None


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    docs = _stage("ingest", load_corpus_file, config.corpus, config.corpus_format,
                  config.preprocessing)
    reducer = make_reducer(config)

    alpha = None
    if config.geometry.method == "combine" and config.geometry.alpha is None:
        parts = _stage("geometry", lambda: [
            build_geometry(c, docs, config) for c in config.geometry.components])
        alpha, _ = _stage("evaluate", search_convex_combination, parts, docs, reducer,
                          grid_step=config.geometry.grid_step, k=config.knn_k)
        H = _stage("geometry", convex_combination, parts, alpha)
    else:
        H = _stage("geometry", build_geometry, config.geometry, docs, config)

    points = _stage("transform", lambda: PointCloud(
        ids=docs.ids, X=transform(H, docs.terms, normalize=config.tf_normalize)))
    embedding = _stage("reduce", reducer, points, H.provenance)

    report = None
    if docs.labels is not None:
        labeled = LabeledEmbedding(embedding=embedding, labels=docs.labels)
        report = _stage("evaluate", evaluate_embedding, labeled, k=config.knn_k,
                        geometry=H.provenance,
                        reducer=config.reducer, seed=config.seed)

    if config.embedding_out:
        write_embedding_csv(embedding, config.embedding_out, labels=docs.labels)
    if config.report_out and report is not None:
        Path(config.report_out).write_text(
            json.dumps(report.to_json(), sort_keys=True, indent=2) + "\n",
            encoding="utf-8")
    return PipelineResult(docs=docs, H=H, embedding=embedding, report=report, alpha=alpha)
