"""Contextual distributions and the Fisher diffusion similarity matrix.

A word's contextual distribution is the mixture of the relative tf rows of
the documents containing it, each document weighted by the word's share of
its own total count there. The same machinery runs over n-gram records by
treating each gram (with multiplicity = its count) as a micro-document.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import TermCounts, Vocabulary
from .geometry import SimilarityMatrix

DIST_SUM_TOL = 1e-9


@dataclass(frozen=True)
class ContextualTable:
    """Row w of `q` is the distribution over words seen in w's contexts."""

    vocab: Vocabulary
    q: sp.csr_matrix             # n x n, rows sum to 1
    support_count: np.ndarray    # documents (or grams) containing each word

    def __post_init__(self):
        n = len(self.vocab)
        if self.q.shape != (n, n):
            raise ValueError("contextual table shape must match vocabulary")
        sums = np.asarray(self.q.sum(axis=1)).ravel()
        if n and np.abs(sums - 1.0).max() > DIST_SUM_TOL:
            raise ValueError("contextual distributions must sum to 1")
        if self.q.nnz and self.q.data.min() < 0:
            raise ValueError("contextual probabilities must be nonnegative")

    def row(self, word: str) -> np.ndarray:
        return np.asarray(self.q[self.vocab.index[word]].todense()).ravel()


@dataclass(frozen=True)
class NgramTable:
    records: tuple[tuple[tuple[str, ...], int], ...]
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("gram length must be >= 2")
        for gram, count in self.records:
            if count < 1:
                raise ValueError(f"gram {gram} has nonpositive count")


@dataclass(frozen=True)
class DiffusionConfig:
    c: float = 1.0

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("kernel scale c must be positive")


def _weighted_contextual(counts: sp.csr_matrix, doc_weights: np.ndarray,
                         vocab: Vocabulary) -> ContextualTable:
    """q_w = sum_x p(x|w) * tfrel(x) with p(x|w) proportional to weight_x * tf(w,x)."""
    n = len(vocab)
    counts = counts.tocsr().astype(np.float64)
    weighted = sp.diags(doc_weights) @ counts
    row_sums = np.asarray(counts.sum(axis=1)).ravel()
    inv_rows = np.divide(1.0, row_sums, out=np.zeros_like(row_sums), where=row_sums > 0)
    tfrel = sp.diags(inv_rows) @ counts

    numer = (weighted.T @ tfrel).tocsr()           # word x word mixture mass
    totals = np.asarray(weighted.sum(axis=0)).ravel()
    inv_tot = np.divide(1.0, totals, out=np.zeros_like(totals), where=totals > 0)
    q = sp.diags(inv_tot) @ numer

    unsupported = np.flatnonzero(totals == 0)
    if unsupported.size:
        # zero-support words fall back to self-context so the kernel stays defined
        fix = sp.csr_matrix(
            (np.ones(unsupported.size), (unsupported, unsupported)), shape=(n, n))
        q = q + fix
    support = np.asarray((counts > 0).T @ doc_weights).ravel()
    return ContextualTable(vocab=vocab, q=q.tocsr(),
                           support_count=np.rint(support).astype(np.int64))


def contextual_distributions(docs: TermCounts) -> ContextualTable:
    if docs.n_docs == 0 or len(docs.vocab) == 0:
        raise ValueError("empty document matrix")
    return _weighted_contextual(docs.counts, np.ones(docs.n_docs), docs.vocab)


def ngram_contextual_distributions(table: NgramTable, vocab: Vocabulary) -> ContextualTable:
    """Each gram with count k acts as a micro-document repeated k times;
    out-of-vocabulary tokens are dropped before the gram's tf is normalized."""
    rows: list[Counter] = []
    weights: list[float] = []
    for gram, count in table.records:
        kept = Counter(vocab.index[t] for t in gram if t in vocab.index)
        if not kept:
            continue
        rows.append(kept)
        weights.append(float(count))
    if not rows:
        raise ValueError("no gram contains any vocabulary word")
    indptr, indices, data = [0], [], []
    for row in rows:
        for j in sorted(row):
            indices.append(j)
            data.append(row[j])
        indptr.append(len(indices))
    counts = sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int32),
         np.asarray(indptr, dtype=np.int32)),
        shape=(len(rows), len(vocab)),
    )
    return _weighted_contextual(counts, np.asarray(weights), vocab)


def hellinger_affinity(qu: np.ndarray, qv: np.ndarray) -> float:
    """Bhattacharyya coefficient of two distributions, clamped into [0, 1]."""
    if qu.shape != qv.shape:
        raise ValueError("distributions live on different supports")
    return float(np.clip(np.sqrt(np.asarray(qu) * np.asarray(qv)).sum(), 0.0, 1.0))


def diffusion_kernel(table: ContextualTable, config: DiffusionConfig) -> SimilarityMatrix:
    """T(u, v) = exp(-c * arccos^2(sum_w sqrt(q_u(w) q_v(w))))."""
    root = table.q.sqrt()
    affinity = np.asarray((root @ root.T).todense())
    affinity = np.clip((affinity + affinity.T) / 2.0, 0.0, 1.0)
    T = np.exp(-config.c * np.arccos(affinity) ** 2)
    np.fill_diagonal(T, 1.0)
    return SimilarityMatrix(T, provenance="diffusion")


def load_ngram_table(path: str | Path, n: int = 3,
                     vocab: Vocabulary | None = None) -> NgramTable:
    """One record per line: n whitespace-separated tokens, a tab, a count.
    With a vocabulary, records containing no vocab word are filtered on load."""
    records = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise ValueError(f"{path}:{line_no}: expected '<tokens>\\t<count>'")
            toks, count_s = line.rsplit("\t", 1)
            gram = tuple(toks.split())
            if len(gram) != n:
                raise ValueError(f"{path}:{line_no}: expected {n}-gram, got {len(gram)} tokens")
            count = int(count_s)
            if count < 1:
                raise ValueError(f"{path}:{line_no}: count must be positive")
            if vocab is not None and not any(t in vocab.index for t in gram):
                continue
            records.append((gram, count))
    return NgramTable(records=tuple(records), n=n)
