"""Command-line entry points mirroring the pipeline stages."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from . import diffusion as diffusion_mod
from . import taxonomy as taxonomy_mod
from .corpus import PreprocessConfig
from .evaluate import (LabeledEmbedding, evaluate_embedding, search_convex_combination)
from .geometry import (CombinationWeights, ManualGeometrySpec, SoftScoreSpec,
                       TransformMatrix, build_manual_geometry, build_soft_geometry,
                       convex_combination, factorize_T, load_geometry_spec, transform)
from .matrixio import read_matrix, write_matrix
from .pipeline import PipelineConfig, derive_seed, load_config, make_reducer
from .reduce import (PointCloud, TsneConfig, pca, read_embedding_csv, tsne,
                     write_embedding_csv)


def _add_preproc_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--stopwords", default=None, help="stopword file, one word per line")
    p.add_argument("--no-stem", action="store_true")
    p.add_argument("--no-lowercase", action="store_true")
    p.add_argument("--vocab-cap", type=int, default=2000)


def _preproc_from_args(args) -> PreprocessConfig:
    return PreprocessConfig(
        lowercase=not args.no_lowercase,
        stem=not args.no_stem,
        stopword_file=args.stopwords,
        vocab_cap=args.vocab_cap,
    )


def _load_docs(path: str, preproc: PreprocessConfig, vocab=None):
    if Path(path).is_dir():
        raw = corpus_mod.load_txt_dir(path)
    else:
        raw = corpus_mod.load_jsonl(path)
    return corpus_mod.ingest(raw, preproc, vocab=vocab)


def cmd_ingest(args) -> int:
    docs = _load_docs(args.corpus, _preproc_from_args(args))
    corpus_mod.save_matrix(docs, args.out)
    print(f"ingested {docs.n_docs} documents, vocabulary {len(docs.vocab)} -> {args.out}")
    return 0


def cmd_geometry(args) -> int:
    docs = corpus_mod.load_matrix(args.matrix)
    vocab = docs.vocab
    method = args.method
    if method in ("manual", "soft"):
        spec = load_geometry_spec(args.spec)
        if method == "manual":
            if not isinstance(spec, ManualGeometrySpec):
                raise SystemExit("error: spec file is not a manual clustering spec")
            H = build_manual_geometry(spec, vocab)
        else:
            if not isinstance(spec, SoftScoreSpec):
                raise SystemExit("error: spec file is not a soft-score spec")
            H = build_soft_geometry(spec, vocab)
    elif method == "diffusion":
        est = _load_docs(args.estimation_corpus, _preproc_from_args(args), vocab=vocab) \
            if args.estimation_corpus else docs
        table = diffusion_mod.contextual_distributions(est.terms)
        T = diffusion_mod.diffusion_kernel(table, diffusion_mod.DiffusionConfig(c=args.c))
        H = factorize_T(T)
    elif method == "ngram":
        table = diffusion_mod.load_ngram_table(args.ngrams, n=args.n, vocab=vocab)
        ctx = diffusion_mod.ngram_contextual_distributions(table, vocab)
        T = diffusion_mod.diffusion_kernel(ctx, diffusion_mod.DiffusionConfig(c=args.c))
        H = factorize_T(T)
        H.provenance = "ngram"
    elif method == "taxonomy":
        if args.similarities:
            T = taxonomy_mod.load_similarity_file(args.similarities, vocab)
        else:
            tax = taxonomy_mod.load_taxonomy(args.taxonomy)
            totals = np.asarray(docs.counts.sum(axis=0)).ravel()
            word_counts = {w: int(totals[i]) for i, w in enumerate(vocab.words)
                           if totals[i] > 0}
            p = taxonomy_mod.concept_probabilities(tax, word_counts)
            T = taxonomy_mod.taxonomy_similarity_matrix(tax, p, vocab)
        H = factorize_T(T)
    elif method == "combine":
        parts = [TransformMatrix(read_matrix(f), provenance="imported")
                 for f in args.components.split(",")]
        alpha = CombinationWeights([float(a) for a in args.alpha.split(",")])
        H = convex_combination(parts, alpha)
    else:
        raise SystemExit(f"error: unknown geometry method {method!r}")
    write_matrix(args.out, H.matrix)
    print(f"{method} geometry {H.shape[0]}x{H.shape[1]} -> {args.out}")
    return 0


def cmd_embed(args) -> int:
    docs = corpus_mod.load_matrix(args.matrix)
    if args.geometry:
        H = TransformMatrix(read_matrix(args.geometry), provenance="imported")
        tag = f"imported:{Path(args.geometry).name}"
    else:
        H = TransformMatrix.identity(len(docs.vocab))
        tag = "identity"
    points = PointCloud(ids=docs.ids, X=transform(H, docs.terms,
                                                  normalize=not args.raw_counts))
    seed = derive_seed(args.seed, "reducer")
    if args.reducer == "pca":
        emb = pca(points, geometry_tag=tag)
        emb.provenance["seed"] = seed
    else:
        cfg = TsneConfig(perplexity=args.perplexity, iterations=args.iters,
                         learning_rate=args.learning_rate, seed=seed)
        emb = tsne(points, cfg, geometry_tag=tag)
    write_embedding_csv(emb, args.out, labels=docs.labels)
    print(f"{args.reducer} embedding of {docs.n_docs} documents -> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    emb, labels = read_embedding_csv(args.embedding)
    if labels is None:
        raise SystemExit("error: embedding file has no label column")
    labeled = LabeledEmbedding(embedding=emb, labels=labels)
    report = evaluate_embedding(
        labeled, k=args.k,
        geometry=str(emb.provenance.get("geometry", "unknown")),
        reducer=str(emb.provenance.get("reducer", "unknown")),
        seed=emb.provenance.get("seed"),
    )
    payload = json.dumps(report.to_json(), sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(payload, encoding="utf-8")
        print(f"report -> {args.out}")
    else:
        print(payload, end="")
    return 0


def cmd_search_alpha(args) -> int:
    docs = corpus_mod.load_matrix(args.matrix)
    parts = [TransformMatrix(read_matrix(f), provenance="imported")
             for f in args.components.split(",")]
    cfg = PipelineConfig(corpus="", reducer=args.reducer, seed=args.seed,
                         tsne=TsneConfig(perplexity=args.perplexity,
                                         iterations=args.iters))
    reducer = make_reducer(cfg)
    alpha, report = search_convex_combination(parts, docs, reducer,
                                              grid_step=args.grid, k=args.k)
    result = {"alpha": list(alpha), "report": report.to_json()}
    payload = json.dumps(result, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(payload, encoding="utf-8")
        print(f"search result -> {args.out}")
    else:
        print(payload, end="")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(load_config(args.config))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lingeo",
                                     description="linguistic geometries for document "
                                                 "visualization")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="corpus file/dir -> document matrix")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    _add_preproc_args(p)
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("geometry", help="build a word geometry matrix H")
    p.add_argument("method", choices=["manual", "soft", "diffusion", "ngram",
                                      "taxonomy", "combine"])
    p.add_argument("--matrix", required=True, help="document matrix from ingest")
    p.add_argument("--out", required=True)
    p.add_argument("--spec", help="geometry spec JSON (manual/soft)")
    p.add_argument("--estimation-corpus", help="external corpus (diffusion)")
    p.add_argument("--ngrams", help="n-gram count table (ngram)")
    p.add_argument("--n", type=int, default=3, help="gram length")
    p.add_argument("--c", type=float, default=1.0, help="diffusion kernel scale")
    p.add_argument("--taxonomy", help="taxonomy file (taxonomy)")
    p.add_argument("--similarities", help="precomputed word-pair similarities")
    p.add_argument("--components", help="comma-separated H files (combine)")
    p.add_argument("--alpha", help="comma-separated weights (combine)")
    _add_preproc_args(p)
    p.set_defaults(fn=cmd_geometry)

    p = sub.add_parser("embed", help="reduce transformed documents to 2-D")
    p.add_argument("--matrix", required=True)
    p.add_argument("--geometry", help="H matrix file; omit for H=I")
    p.add_argument("--reducer", choices=["pca", "tsne"], default="tsne")
    p.add_argument("--perplexity", type=float, default=30.0)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--learning-rate", type=float, default=200.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--raw-counts", action="store_true",
                   help="skip L1 normalization of tf vectors")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_embed)

    p = sub.add_parser("evaluate", help="score a labeled embedding CSV")
    p.add_argument("--embedding", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("search-alpha", help="grid-search combination weights")
    p.add_argument("--matrix", required=True)
    p.add_argument("--components", required=True, help="comma-separated H files")
    p.add_argument("--grid", type=float, default=0.1)
    p.add_argument("--reducer", choices=["pca", "tsne"], default="pca")
    p.add_argument("--perplexity", type=float, default=30.0)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_search_alpha)

    p = sub.add_parser("serve", help="run the interactive studio service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
