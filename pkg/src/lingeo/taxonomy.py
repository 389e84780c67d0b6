"""Word similarity from an is-a concept taxonomy with corpus-derived concept
probabilities, scored per concept pair as log(p(c1) p(c2) / (2 p(lcs))).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import Vocabulary
from .geometry import SimilarityMatrix


@dataclass(frozen=True)
class Taxonomy:
    concepts: tuple[str, ...]
    parents: dict[str, frozenset[str]]     # child -> parent set (DAG)
    members: dict[str, frozenset[str]]     # concept -> words

    def __post_init__(self):
        known = set(self.concepts)
        for child, ps in self.parents.items():
            if child not in known or not ps <= known:
                raise ValueError("isa edge references undeclared concept")
        for c in self.members:
            if c not in known:
                raise ValueError(f"member list for undeclared concept {c!r}")
        self._toposort()  # raises on cycles
        object.__setattr__(self, "_ancestors", self._close_ancestors())
        word_map: dict[str, set[str]] = {}
        for c, ws in self.members.items():
            for w in ws:
                word_map.setdefault(w, set()).add(c)
        object.__setattr__(self, "word_concepts",
                           {w: frozenset(cs) for w, cs in word_map.items()})

    def _toposort(self) -> list[str]:
        ordered, state = [], {}

        def visit(c: str):
            if state.get(c) == 1:
                raise ValueError(f"taxonomy contains a cycle through {c!r}")
            if state.get(c) == 2:
                return
            state[c] = 1
            for p in sorted(self.parents.get(c, ())):
                visit(p)
            state[c] = 2
            ordered.append(c)

        for c in self.concepts:
            visit(c)
        return ordered

    def _close_ancestors(self) -> dict[str, frozenset[str]]:
        closed: dict[str, frozenset[str]] = {}
        for c in self._toposort():  # parents close before children
            anc = {c}
            for p in self.parents.get(c, ()):
                anc |= closed[p]
            closed[c] = frozenset(anc)
        return closed

    def ancestors(self, c: str) -> frozenset[str]:
        """Reflexive upward closure."""
        return self._ancestors[c]

    def roots(self) -> tuple[str, ...]:
        return tuple(c for c in self.concepts if not self.parents.get(c))


@dataclass(frozen=True)
class ConceptProbabilities:
    p: dict[str, float]

    def __post_init__(self):
        for c, v in self.p.items():
            if not (0.0 < v <= 1.0):
                raise ValueError(f"p({c!r}) = {v} outside (0, 1]")

    def __getitem__(self, c: str) -> float:
        return self.p[c]


def concept_probabilities(tax: Taxonomy, word_counts: Mapping[str, int],
                          smoothing: bool = True) -> ConceptProbabilities:
    """Each word's count flows once into every ancestor of any of its concepts.
    Add-one smoothing keeps unseen subtrees off log's pole."""
    counts = {c: 0 for c in tax.concepts}
    total = 0
    for word, k in word_counts.items():
        concepts = tax.word_concepts.get(word)
        if not concepts or k <= 0:
            continue
        total += k
        closure = frozenset().union(*(tax.ancestors(c) for c in concepts))
        for c in closure:
            counts[c] += k
    if total <= 0:
        raise ValueError("no taxonomy word has positive count")
    if smoothing:
        p = {c: (counts[c] + 1) / (total + 1) for c in tax.concepts}
    else:
        if any(v == 0 for v in counts.values()):
            zero = sorted(c for c, v in counts.items() if v == 0)[0]
            raise ValueError(f"concept {zero!r} has zero probability; enable smoothing")
        p = {c: counts[c] / total for c in tax.concepts}
    return ConceptProbabilities(p=p)


def lcs(tax: Taxonomy, p: ConceptProbabilities, c1: str, c2: str) -> str:
    """Lowest common subsumer: the shared ancestor with smallest probability."""
    common = tax.ancestors(c1) & tax.ancestors(c2)
    if not common:
        raise ValueError(f"no common subsumer for {c1!r} and {c2!r}")
    return min(common, key=lambda c: (p[c], c))


def jiang_conrath(tax: Taxonomy, p: ConceptProbabilities, c1: str, c2: str) -> float:
    anc = lcs(tax, p, c1, c2)
    return math.log(p[c1] * p[c2] / (2.0 * p[anc]))


def taxonomy_similarity_matrix(tax: Taxonomy, p: ConceptProbabilities,
                               vocab: Vocabulary) -> SimilarityMatrix:
    """Word-pair score is the best concept-pair score; off-diagonals are then
    affinely rescaled to [0, 1] (unrelated and out-of-taxonomy pairs at 0) and
    the diagonal pinned to 1. PSD is not guaranteed here; factorize before use.
    """
    n = len(vocab)
    concept_sets = [sorted(tax.word_concepts.get(w, ())) for w in vocab.words]
    pair_cache: dict[tuple[str, str], float | None] = {}

    def concept_score(a: str, b: str) -> float | None:
        key = (a, b) if a <= b else (b, a)
        if key not in pair_cache:
            try:
                pair_cache[key] = jiang_conrath(tax, p, a, b)
            except ValueError:
                pair_cache[key] = None  # disjoint roots: unrelated
        return pair_cache[key]

    raw = np.full((n, n), np.nan)
    for i in range(n):
        if not concept_sets[i]:
            continue
        for j in range(i + 1, n):
            if not concept_sets[j]:
                continue
            scores = [s for a in concept_sets[i] for b in concept_sets[j]
                      if (s := concept_score(a, b)) is not None]
            if scores:
                raw[i, j] = raw[j, i] = max(scores)

    T = np.zeros((n, n))
    scored = ~np.isnan(raw)
    if scored.any():
        lo, hi = raw[scored].min(), raw[scored].max()
        if hi > lo:
            T[scored] = (raw[scored] - lo) / (hi - lo)
        else:
            T[scored] = 0.5
    np.fill_diagonal(T, 1.0)
    return SimilarityMatrix(T, provenance="taxonomy")


def load_taxonomy(path: str | Path) -> Taxonomy:
    """Lines: "concept <id>" / "isa <child> <parent>" / "member <word> <concept>"."""
    concepts: list[str] = []
    parents: dict[str, set[str]] = {}
    members: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "concept" and len(parts) == 2:
                concepts.append(parts[1])
            elif parts[0] == "isa" and len(parts) == 3:
                parents.setdefault(parts[1], set()).add(parts[2])
            elif parts[0] == "member" and len(parts) == 3:
                members.setdefault(parts[2], set()).add(parts[1])
            else:
                raise ValueError(f"{path}:{line_no}: unrecognized line {line.strip()!r}")
    return Taxonomy(
        concepts=tuple(concepts),
        parents={c: frozenset(ps) for c, ps in parents.items()},
        members={c: frozenset(ws) for c, ws in members.items()},
    )


def load_similarity_file(path: str | Path, vocab: Vocabulary,
                         rescale: bool = True) -> SimilarityMatrix:
    """Precomputed "word1 word2 score" lines; same rescale/diagonal conventions
    as the computed path, so external scorers can stand in for the taxonomy."""
    n = len(vocab)
    raw = np.full((n, n), np.nan)
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if len(parts) != 3:
                raise ValueError(f"{path}:{line_no}: expected 'word1 word2 score'")
            w1, w2, s = parts[0], parts[1], float(parts[2])
            i, j = vocab.index.get(w1), vocab.index.get(w2)
            if i is None or j is None or i == j:
                continue
            raw[i, j] = raw[j, i] = s
    T = np.zeros((n, n))
    scored = ~np.isnan(raw)
    if scored.any():
        if rescale:
            lo, hi = raw[scored].min(), raw[scored].max()
            T[scored] = (raw[scored] - lo) / (hi - lo) if hi > lo else 0.5
        else:
            T[scored] = raw[scored]
    np.fill_diagonal(T, 1.0)
    return SimilarityMatrix(T, provenance="taxonomy")
