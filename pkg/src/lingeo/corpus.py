"""Corpus ingestion: tokenize, preprocess, frequency-capped vocabulary, sparse counts.

Labels ride along for evaluation only. Downstream numeric code
(geometry/diffusion/reduce) accepts the unlabeled TermCounts view, so labels
cannot leak into unsupervised stages.
"""
from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .stemming import porter_stem

_TOKEN_RE = re.compile(r"[^\W\d_]+", re.UNICODE)


@dataclass(frozen=True)
class RawDocument:
    id: str
    text: str
    label: str | None = None


class Vocabulary:
    """Ordered set of token strings with O(1) token -> position lookup."""

    def __init__(self, words: Sequence[str]):
        self.words: tuple[str, ...] = tuple(words)
        self.index: dict[str, int] = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise ValueError("duplicate words in vocabulary")

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def __getitem__(self, i: int) -> str:
        return self.words[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.words == other.words

    def __repr__(self) -> str:
        return f"Vocabulary({len(self.words)} words)"


@dataclass(frozen=True)
class TermCounts:
    """Unlabeled document-term count matrix (CSR, n_docs x n_words)."""

    vocab: Vocabulary
    ids: tuple[str, ...]
    counts: sp.csr_matrix

    def __post_init__(self):
        if self.counts.shape != (len(self.ids), len(self.vocab)):
            raise ValueError("count matrix shape does not match ids/vocab")
        if self.counts.nnz and self.counts.data.min() < 0:
            raise ValueError("negative term count")

    @property
    def n_docs(self) -> int:
        return len(self.ids)

    def relative(self) -> sp.csr_matrix:
        """Rows L1-normalized; all-zero rows stay zero."""
        sums = np.asarray(self.counts.sum(axis=1)).ravel()
        inv = np.divide(1.0, sums, out=np.zeros_like(sums, dtype=float), where=sums > 0)
        return sp.diags(inv) @ self.counts


@dataclass(frozen=True)
class DocumentMatrix:
    terms: TermCounts
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.labels is not None and len(self.labels) != self.terms.n_docs:
            raise ValueError("labels do not align with documents")

    @property
    def vocab(self) -> Vocabulary:
        return self.terms.vocab

    @property
    def ids(self) -> tuple[str, ...]:
        return self.terms.ids

    @property
    def counts(self) -> sp.csr_matrix:
        return self.terms.counts

    @property
    def n_docs(self) -> int:
        return self.terms.n_docs


def tokenize(text: str, lowercase: bool = True) -> list[str]:
    """Maximal runs of alphabetic characters; digits and punctuation separate."""
    if lowercase:
        text = text.lower()
    return _TOKEN_RE.findall(text)


def preprocess(tokens: Iterable[str], stopwords: frozenset[str] | set[str] = frozenset(),
               stem: bool = False) -> list[str]:
    kept = [t for t in tokens if t not in stopwords]
    if stem:
        kept = [porter_stem(t) for t in kept]
    return kept


def build_vocabulary(docs: Sequence[Sequence[str]], cap: int) -> Vocabulary:
    """The cap most frequent tokens by total count, ties lexicographic ascending."""
    if cap < 1:
        raise ValueError("vocabulary cap must be >= 1")
    totals = Counter()
    for tokens in docs:
        totals.update(tokens)
    if not totals:
        raise ValueError("empty corpus")
    ranked = sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))
    return Vocabulary([w for w, _ in ranked[:cap]])


def count_matrix(docs: Sequence[Sequence[str]], vocab: Vocabulary,
                 ids: Sequence[str] | None = None,
                 labels: Sequence[str] | None = None) -> DocumentMatrix:
    """Sparse counts over vocab; out-of-vocabulary tokens dropped."""
    if ids is None:
        ids = [str(i) for i in range(len(docs))]
    if len(ids) != len(docs):
        raise ValueError("ids do not align with documents")
    indptr = [0]
    indices: list[int] = []
    data: list[int] = []
    for tokens in docs:
        row = Counter(vocab.index[t] for t in tokens if t in vocab.index)
        for j in sorted(row):
            indices.append(j)
            data.append(row[j])
        indptr.append(len(indices))
    counts = sp.csr_matrix(
        (np.asarray(data, dtype=np.int64), np.asarray(indices, dtype=np.int32),
         np.asarray(indptr, dtype=np.int32)),
        shape=(len(docs), len(vocab)),
    )
    terms = TermCounts(vocab=vocab, ids=tuple(ids), counts=counts)
    return DocumentMatrix(terms=terms, labels=tuple(labels) if labels is not None else None)


@dataclass(frozen=True)
class PreprocessConfig:
    lowercase: bool = True
    stem: bool = True
    stopword_file: str | None = None
    vocab_cap: int = 2000


def ingest(raw_docs: Sequence[RawDocument], config: PreprocessConfig,
           vocab: Vocabulary | None = None) -> DocumentMatrix:
    """Full recipe: tokenize, stop/stem, build (or reuse) vocab, count.

    Passing an existing vocab counts a second corpus in the same space,
    e.g. an external estimation corpus for contextual diffusion.
    """
    seen = set()
    for d in raw_docs:
        if d.id in seen:
            raise ValueError(f"duplicate document id: {d.id}")
        seen.add(d.id)
    stopwords = load_stopwords(config.stopword_file) if config.stopword_file else frozenset()
    token_docs = [
        preprocess(tokenize(d.text, lowercase=config.lowercase), stopwords, config.stem)
        for d in raw_docs
    ]
    if vocab is None:
        vocab = build_vocabulary(token_docs, config.vocab_cap)
    labels = [d.label for d in raw_docs]
    has_labels = any(l is not None for l in labels)
    return count_matrix(
        token_docs, vocab, ids=[d.id for d in raw_docs],
        labels=[l if l is not None else "" for l in labels] if has_labels else None,
    )


def load_jsonl(path: str | Path) -> list[RawDocument]:
    docs = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}:{line_no}: invalid JSON ({e})") from e
            if "id" not in obj or "text" not in obj:
                raise ValueError(f"{path}:{line_no}: record needs 'id' and 'text'")
            docs.append(RawDocument(id=str(obj["id"]), text=str(obj["text"]),
                                    label=obj.get("label")))
    return docs


def load_txt_dir(path: str | Path) -> list[RawDocument]:
    files = sorted(Path(path).glob("*.txt"))
    return [RawDocument(id=p.stem, text=p.read_text(encoding="utf-8")) for p in files]


def load_stopwords(path: str | Path) -> frozenset[str]:
    with open(path, encoding="utf-8") as f:
        return frozenset(w.strip() for w in f if w.strip())


def save_matrix(docs: DocumentMatrix, path: str | Path) -> None:
    rows = []
    csr = docs.counts.tocsr()
    for i in range(docs.n_docs):
        s, e = csr.indptr[i], csr.indptr[i + 1]
        rows.append([[int(j), int(v)] for j, v in zip(csr.indices[s:e], csr.data[s:e])])
    payload = {
        "format": "lingeo-docmatrix v1",
        "vocab": list(docs.vocab.words),
        "ids": list(docs.ids),
        "labels": list(docs.labels) if docs.labels is not None else None,
        "rows": rows,
    }
    Path(path).write_text(json.dumps(payload, separators=(",", ":"), sort_keys=True),
                          encoding="utf-8")


def load_matrix(path: str | Path) -> DocumentMatrix:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != "lingeo-docmatrix v1":
        raise ValueError(f"{path}: not a lingeo document matrix")
    vocab = Vocabulary(payload["vocab"])
    indptr = [0]
    indices: list[int] = []
    data: list[int] = []
    for row in payload["rows"]:
        for j, v in row:
            indices.append(j)
            data.append(v)
        indptr.append(len(indices))
    counts = sp.csr_matrix(
        (np.asarray(data, dtype=np.int64), np.asarray(indices, dtype=np.int32),
         np.asarray(indptr, dtype=np.int32)),
        shape=(len(payload["ids"]), len(vocab)),
    )
    terms = TermCounts(vocab=vocab, ids=tuple(payload["ids"]), counts=counts)
    labels = payload.get("labels")
    return DocumentMatrix(terms=terms, labels=tuple(labels) if labels is not None else None)
