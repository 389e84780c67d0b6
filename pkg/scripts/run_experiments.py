#!/usr/bin/env python3
"""Compare geometries on the demo corpora.

Builds every applicable geometry (identity, manual, diffusion, n-gram,
taxonomy), reduces with PCA and t-SNE, scores all four separation measures,
and prints the comparison tables. Optionally grid-searches combination
weights and dumps scatter plots.
"""
import argparse
import time
from pathlib import Path

import numpy as np

from lingeo.corpus import PreprocessConfig, ingest, load_jsonl
from lingeo.diffusion import (DiffusionConfig, contextual_distributions,
                              diffusion_kernel, load_ngram_table,
                              ngram_contextual_distributions)
from lingeo.evaluate import (LabeledEmbedding, evaluate_embedding,
                             search_convex_combination)
from lingeo.geometry import (TransformMatrix, build_manual_geometry, factorize_T,
                             load_geometry_spec, transform)
from lingeo.pipeline import derive_seed
from lingeo.reduce import PointCloud, TsneConfig, pca, tsne
from lingeo.taxonomy import (concept_probabilities, load_taxonomy,
                             taxonomy_similarity_matrix)


def build_geometries(data_dir: Path, docs, c: float) -> dict[str, TransformMatrix]:
    vocab = docs.vocab
    H = {"identity": TransformMatrix.identity(len(vocab))}
    spec_path = data_dir / "manual_spec.json"
    if spec_path.exists():
        H["manual"] = build_manual_geometry(load_geometry_spec(spec_path), vocab)
    est_path = data_dir / "estimation.jsonl"
    if est_path.exists():
        est = ingest(load_jsonl(est_path), PreprocessConfig(), vocab=vocab)
        H["diffusion"] = factorize_T(diffusion_kernel(
            contextual_distributions(est.terms), DiffusionConfig(c=c)))
    ngram_path = data_dir / "ngrams.tsv"
    if ngram_path.exists():
        table = load_ngram_table(ngram_path, n=3, vocab=vocab)
        H["ngram"] = factorize_T(diffusion_kernel(
            ngram_contextual_distributions(table, vocab), DiffusionConfig(c=c)))
        H["ngram"].provenance = "ngram"
    tax_path = data_dir / "taxonomy.txt"
    if tax_path.exists():
        tax = load_taxonomy(tax_path)
        totals = np.asarray(docs.counts.sum(axis=0)).ravel()
        counts = {w: int(totals[i]) for i, w in enumerate(vocab.words) if totals[i]}
        H["taxonomy"] = factorize_T(taxonomy_similarity_matrix(
            tax, concept_probabilities(tax, counts), vocab))
    return H


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("data_dir", help="a corpus directory made by make_demo_data.py")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--c", type=float, default=1.0, help="diffusion kernel scale")
    parser.add_argument("--k", type=int, default=5)
    parser.add_argument("--iters", type=int, default=1000)
    parser.add_argument("--perplexity", type=float, default=30.0)
    parser.add_argument("--search-alpha", action="store_true",
                        help="grid-search combination weights (PCA objective)")
    parser.add_argument("--plot", metavar="DIR", help="write scatter PNGs here")
    args = parser.parse_args()

    data_dir = Path(args.data_dir)
    docs = ingest(load_jsonl(data_dir / "corpus.jsonl"), PreprocessConfig())
    print(f"corpus: {docs.n_docs} docs, vocabulary {len(docs.vocab)}")
    geometries = build_geometries(data_dir, docs, c=args.c)
    seed = derive_seed(args.seed, "reducer")

    embeddings = {}
    print(f"\n{'geometry':<10} {'reducer':<6} {'(i)':>8} {'(ii)':>8} "
          f"{'(iii)':>8} {'(iv)':>8}")
    for name, H in geometries.items():
        pts = PointCloud(ids=docs.ids, X=transform(H, docs.terms))
        for reducer in ("pca", "tsne"):
            t0 = time.time()
            if reducer == "pca":
                emb = pca(pts, geometry_tag=name)
            else:
                emb = tsne(pts, TsneConfig(perplexity=args.perplexity,
                                           iterations=args.iters, seed=seed),
                           geometry_tag=name)
            report = evaluate_embedding(
                LabeledEmbedding(embedding=emb, labels=docs.labels), k=args.k,
                geometry=name, reducer=reducer, seed=args.seed)
            overlap = (f"{report.lda_overlap:8.4f}"
                       if report.lda_overlap is not None else "       -")
            print(f"{name:<10} {reducer:<6} {report.intra_inter:8.4f} "
                  f"{report.davies_bouldin:8.4f} {report.knn_accuracy:8.4f} "
                  f"{overlap}   [{time.time() - t0:.1f}s]")
            embeddings[(name, reducer)] = emb

    if args.search_alpha:
        component_names = [n for n in ("manual", "diffusion", "ngram", "taxonomy")
                           if n in geometries]
        if len(component_names) >= 2:
            def reducer_fn(points, tag):
                emb = pca(points, geometry_tag=tag)
                emb.provenance["seed"] = seed
                return emb
            parts = [geometries[n] for n in component_names]
            alpha, report = search_convex_combination(parts, docs, reducer_fn,
                                                      grid_step=0.1, k=args.k)
            pairing = ", ".join(f"{n}={w:.1f}" for n, w in zip(component_names, alpha))
            print(f"\nbest combination ({pairing}): "
                  f"(i)={report.intra_inter:.4f} (ii)={report.davies_bouldin:.4f} "
                  f"(iii)={report.knn_accuracy:.4f}")

    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        plot_dir = Path(args.plot)
        plot_dir.mkdir(parents=True, exist_ok=True)
        classes = sorted(set(docs.labels))
        colors = plt.cm.tab10(np.linspace(0, 1, len(classes)))
        for (name, reducer), emb in embeddings.items():
            fig, ax = plt.subplots(figsize=(5, 5))
            for cls, color in zip(classes, colors):
                idx = [i for i, l in enumerate(docs.labels) if l == cls]
                ax.scatter(emb.coords[idx, 0], emb.coords[idx, 1], s=8,
                           color=color, label=cls, alpha=0.7)
            ax.set_title(f"{name} / {reducer}")
            ax.legend(fontsize=7)
            fig.tight_layout()
            fig.savefig(plot_dir / f"{name}_{reducer}.png", dpi=120)
            plt.close(fig)
        print(f"plots -> {plot_dir}")


if __name__ == "__main__":
    main()
