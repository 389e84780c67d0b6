"""Word-similarity geometries: R and D construction, H = R D, T = H'H, the
transform x -> Hx, and the induced document metric d_T.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import TermCounts, Vocabulary

COLUMN_SUM_TOL = 1e-9
SYMMETRY_TOL = 1e-9
PSD_EIG_TOL = 1e-8


@dataclass(frozen=True)
class WordClustering:
    """Named partition of vocabulary indices."""

    vocab: Vocabulary
    names: tuple[str, ...]
    assignment: np.ndarray  # word index -> cluster index

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("cluster names must be unique")
        if self.assignment.shape != (len(self.vocab),):
            raise ValueError("assignment must cover the whole vocabulary")
        if len(self.names) and (self.assignment.min() < 0
                                or self.assignment.max() >= len(self.names)):
            raise ValueError("assignment references unknown cluster")

    @classmethod
    def from_word_lists(cls, vocab: Vocabulary, clusters: dict[str, Sequence[str]],
                        default: str | None = None) -> "WordClustering":
        """Build from {name: words}; unlisted vocab words go to `default` if given."""
        names = tuple(clusters)
        pos = {n: i for i, n in enumerate(names)}
        assignment = np.full(len(vocab), -1, dtype=np.int64)
        for name, words in clusters.items():
            for w in words:
                j = vocab.index.get(w)
                if j is None:
                    continue  # lexicon may cover more words than the corpus kept
                if assignment[j] != -1 and assignment[j] != pos[name]:
                    raise ValueError(f"word {w!r} assigned to two clusters")
                assignment[j] = pos[name]
        if (assignment == -1).any():
            if default is None:
                missing = [vocab[j] for j in np.flatnonzero(assignment == -1)[:5]]
                raise ValueError(f"words not covered by any cluster: {missing}")
            if default not in pos:
                raise ValueError(f"default cluster {default!r} not declared")
            assignment[assignment == -1] = pos[default]
        return cls(vocab=vocab, names=names, assignment=assignment)

    def members(self, name: str) -> np.ndarray:
        return np.flatnonzero(self.assignment == self.names.index(name))


@dataclass(frozen=True)
class GeometryParams:
    """Blending and importance knobs for a manual geometry."""

    rho_self: dict[str, float]
    rho_pair: dict[tuple[str, str], float]  # unordered pairs, (a, a) included
    importance: dict[str, float]

    def __post_init__(self):
        for d in (self.rho_self, self.importance):
            for name, v in d.items():
                if v < 0:
                    raise ValueError(f"negative parameter for cluster {name!r}")
        norm = {}
        for (a, b), v in self.rho_pair.items():
            if v < 0:
                raise ValueError(f"negative pair affinity for ({a}, {b})")
            norm[(a, b) if a <= b else (b, a)] = v
        object.__setattr__(self, "rho_pair", norm)

    def pair(self, a: str, b: str) -> float:
        key = (a, b) if a <= b else (b, a)
        return self.rho_pair.get(key, 0.0)


@dataclass(frozen=True)
class SoftScoreSpec:
    """Per-word relatedness scores over a fixed cluster list, plus importances."""

    cluster_names: tuple[str, ...]
    scores: dict[str, tuple[float, ...]]   # word -> relatedness in [0, 2]
    importance: dict[str, float]           # word -> value in [0, 3]
    rho_self: float = 1.0

    def __post_init__(self):
        k = len(self.cluster_names)
        for w, vec in self.scores.items():
            if len(vec) != k:
                raise ValueError(f"score vector for {w!r} has wrong length")
            if any(v < 0 or v > 2 for v in vec):
                raise ValueError(f"relatedness scores for {w!r} outside [0, 2]")
        for w, v in self.importance.items():
            if v < 0 or v > 3:
                raise ValueError(f"importance for {w!r} outside [0, 3]")
        if self.rho_self < 0:
            raise ValueError("rho_self must be nonnegative")


class MarkovMatrix:
    """Nonnegative square matrix with unit column sums."""

    def __init__(self, matrix: np.ndarray):
        m = np.asarray(matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("Markov matrix must be square")
        if m.size and m.min() < 0:
            raise ValueError("Markov matrix entries must be nonnegative")
        sums = m.sum(axis=0)
        if m.size and np.abs(sums - 1.0).max() > COLUMN_SUM_TOL:
            raise ValueError("Markov matrix columns must sum to 1")
        self.matrix = m

    @property
    def shape(self):
        return self.matrix.shape


class DiagonalWeights:
    def __init__(self, weights: np.ndarray | Sequence[float]):
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1:
            raise ValueError("diagonal weights must be a vector")
        if w.size and w.min() < 0:
            raise ValueError("diagonal weights must be nonnegative")
        self.weights = w

    def __len__(self):
        return len(self.weights)


PROVENANCE_TAGS = ("manual", "soft", "diffusion", "ngram", "taxonomy",
                   "combination", "identity", "imported", "factorized")


class TransformMatrix:
    """m x n map applied to tf vectors; columns index vocabulary words."""

    def __init__(self, matrix: np.ndarray, provenance: str = "imported"):
        m = np.asarray(matrix, dtype=np.float64)
        if m.ndim != 2:
            raise ValueError("transform must be a matrix")
        if not np.isfinite(m).all():
            raise ValueError("transform entries must be finite")
        self.matrix = m
        self.provenance = provenance

    @property
    def shape(self):
        return self.matrix.shape

    @classmethod
    def identity(cls, n: int) -> "TransformMatrix":
        return cls(np.eye(n), provenance="identity")


class SimilarityMatrix:
    """Symmetric word-similarity matrix T defining d_T(x, y)."""

    def __init__(self, matrix: np.ndarray, psd_certified: bool = False,
                 provenance: str = "similarity"):
        m = np.asarray(matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("similarity matrix must be square")
        scale = max(1.0, np.abs(m).max()) if m.size else 1.0
        if m.size and np.abs(m - m.T).max() > SYMMETRY_TOL * scale:
            raise ValueError("asymmetric similarity matrix")
        self.matrix = (m + m.T) / 2.0
        self.psd_certified = psd_certified
        self.provenance = provenance

    @property
    def shape(self):
        return self.matrix.shape

    def certify_psd(self) -> bool:
        """Eigenvalue check; caches the outcome on success."""
        if self.psd_certified:
            return True
        eigs = np.linalg.eigvalsh(self.matrix)
        top = max(eigs.max(), 0.0) if eigs.size else 0.0
        if eigs.size == 0 or eigs.min() >= -PSD_EIG_TOL * max(top, 1.0):
            self.psd_certified = True
        return self.psd_certified


class CombinationWeights:
    """Point on the probability simplex, one weight per component geometry."""

    def __init__(self, weights: Sequence[float]):
        w = tuple(float(v) for v in weights)
        if any(v < 0 for v in w):
            raise ValueError("combination weights must be nonnegative")
        if abs(sum(w) - 1.0) > 1e-9:
            raise ValueError("combination weights must sum to 1")
        self.weights = w

    def __iter__(self):
        return iter(self.weights)

    def __len__(self):
        return len(self.weights)


def build_manual_R(clustering: WordClustering, params: GeometryParams) -> MarkovMatrix:
    """Affinity by cluster membership (diagonal rho_a, off-diagonal rho_ab),
    then column normalization."""
    missing = [n for n in clustering.names if n not in params.rho_self]
    if missing:
        raise ValueError(f"rho_self missing for clusters: {missing}")
    n = len(clustering.vocab)
    r = len(clustering.names)
    A = np.zeros((n, n))
    idx = [clustering.members(name) for name in clustering.names]
    for a in range(r):
        for b in range(r):
            v = params.pair(clustering.names[a], clustering.names[b])
            if v:
                A[np.ix_(idx[a], idx[b])] = v
    diag = np.array([params.rho_self[clustering.names[c]] for c in clustering.assignment])
    A[np.diag_indices(n)] = diag
    sums = A.sum(axis=0)
    dead = np.flatnonzero(sums == 0)
    if dead.size:
        raise ValueError(f"isolated word column: {clustering.vocab[int(dead[0])]!r}")
    return MarkovMatrix(A / sums)


def build_manual_D(clustering: WordClustering, params: GeometryParams) -> DiagonalWeights:
    missing = [n for n in clustering.names if n not in params.importance]
    if missing:
        raise ValueError(f"importance missing for clusters: {missing}")
    d = np.array([params.importance[clustering.names[c]] for c in clustering.assignment])
    return DiagonalWeights(d)


def build_soft_R(spec: SoftScoreSpec, vocab: Vocabulary) -> MarkovMatrix:
    """Cross affinities are cosines of the words' relatedness-score vectors;
    the diagonal is the spec's rho_self. Vocabulary words without scores get
    all-zero vectors (their columns collapse to self-indicators)."""
    n = len(vocab)
    k = len(spec.cluster_names)
    S = np.zeros((n, k))
    for w, vec in spec.scores.items():
        j = vocab.index.get(w)
        if j is not None:
            S[j] = vec
    norms = np.linalg.norm(S, axis=1)
    if not norms.any():
        raise ValueError("degenerate score table")
    Sn = np.divide(S, norms[:, None], out=np.zeros_like(S), where=norms[:, None] > 0)
    A = Sn @ Sn.T
    np.clip(A, 0.0, None, out=A)  # guard rounding; scores are nonnegative anyway
    A[np.diag_indices(n)] = spec.rho_self
    sums = A.sum(axis=0)
    dead = np.flatnonzero(sums == 0)
    if dead.size:
        raise ValueError(f"isolated word column: {vocab[int(dead[0])]!r}")
    return MarkovMatrix(A / sums)


def build_soft_D(spec: SoftScoreSpec, vocab: Vocabulary) -> DiagonalWeights:
    """Per-word importance straight onto the diagonal; unscored words get 0."""
    d = np.zeros(len(vocab))
    for w, v in spec.importance.items():
        j = vocab.index.get(w)
        if j is not None:
            d[j] = v
    return DiagonalWeights(d)


def compose_H(R: MarkovMatrix, D: DiagonalWeights,
              provenance: str = "manual") -> TransformMatrix:
    if R.shape[1] != len(D):
        raise ValueError("R and D dimensions disagree")
    return TransformMatrix(R.matrix * D.weights[None, :], provenance=provenance)


def factorize_T(T: SimilarityMatrix, drop_tol: float = 1e-12) -> TransformMatrix:
    """Symmetric eigendecomposition with negative eigenvalues clamped to zero;
    rows of (near-)zero eigenvalue are dropped, largest eigenvalue first."""
    eigvals, eigvecs = np.linalg.eigh(T.matrix)
    eigvals = np.clip(eigvals, 0.0, None)
    top = eigvals.max() if eigvals.size else 0.0
    keep = np.flatnonzero(eigvals > drop_tol * max(top, 1.0))[::-1]  # descending
    H = np.sqrt(eigvals[keep])[:, None] * eigvecs[:, keep].T
    # fix row signs for reproducibility across builds
    for i in range(H.shape[0]):
        j = int(np.argmax(np.abs(H[i])))
        if H[i, j] < 0:
            H[i] = -H[i]
    T.psd_certified = True  # clamped reconstruction is PSD by construction
    return TransformMatrix(H, provenance=T.provenance)


def convex_combination(components: Sequence[TransformMatrix],
                       alpha: CombinationWeights) -> TransformMatrix:
    if len(components) != len(alpha):
        raise ValueError("one weight per component required")
    if not components:
        raise ValueError("no components to combine")
    n = components[0].shape[1]
    for h in components:
        if h.shape[1] != n:
            raise ValueError("components disagree on vocabulary size")
    m = max(h.shape[0] for h in components)
    out = np.zeros((m, n))
    for w, h in zip(alpha, components):
        out[: h.shape[0]] += w * h.matrix  # zero-padding of short factors
    return TransformMatrix(out, provenance="combination")


def transform(H: TransformMatrix, terms: TermCounts,
              normalize: bool = True) -> np.ndarray:
    """Map each document's tf vector (L1-normalized unless disabled) to Hx."""
    if H.shape[1] != len(terms.vocab):
        raise ValueError("transform width does not match vocabulary")
    X = terms.relative() if normalize else terms.counts.astype(np.float64)
    return np.asarray((X @ H.matrix.T))


def similarity_from_transform(H: TransformMatrix) -> SimilarityMatrix:
    T = H.matrix.T @ H.matrix
    return SimilarityMatrix((T + T.T) / 2.0, psd_certified=True,
                            provenance=H.provenance)


def distance(T: SimilarityMatrix, x: np.ndarray, y: np.ndarray) -> float:
    """d_T(x, y) = sqrt((x - y)' T (x - y)); tiny negative forms are rounding."""
    d = np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    q = float(d @ T.matrix @ d)
    if q < 0:
        scale = max(1.0, float(np.abs(d) @ np.abs(T.matrix) @ np.abs(d)))
        if q < -PSD_EIG_TOL * scale:
            raise ValueError("T not PSD")
        q = 0.0
    return float(np.sqrt(q))


# ---------------------------------------------------------------------------
# Geometry spec files (JSON)

@dataclass(frozen=True)
class ManualGeometrySpec:
    clusters: dict[str, tuple[str, ...]]   # name -> words
    rho_self: dict[str, float]
    importance: dict[str, float]
    rho_pairs: dict[tuple[str, str], float]
    tree: dict | None = None
    beta: float = 0.5
    default_cluster: str | None = None

    def params(self) -> GeometryParams:
        pairs = {}
        if self.tree is not None:
            pairs.update(tree_pair_affinities(self.tree, tuple(self.clusters), self.beta))
        pairs.update(self.rho_pairs)
        return GeometryParams(rho_self=dict(self.rho_self), rho_pair=pairs,
                              importance=dict(self.importance))

    def bind(self, vocab: Vocabulary) -> WordClustering:
        return WordClustering.from_word_lists(vocab, {n: list(ws) for n, ws in
                                                      self.clusters.items()},
                                              default=self.default_cluster)


def tree_pair_affinities(tree: dict, names: Sequence[str],
                         beta: float) -> dict[tuple[str, str], float]:
    """Cross-cluster affinity beta**t where t is tree-edge distance; affinities
    must fall with distance, hence the exponential of the raw edge count."""
    if not (0.0 < beta < 1.0):
        raise ValueError("beta must lie in (0, 1)")
    parents: dict[str, str | None] = {}

    def walk(node: dict, parent: str | None):
        name = node["name"]
        if name in parents:
            raise ValueError(f"duplicate tree node {name!r}")
        parents[name] = parent
        for child in node.get("children", []):
            walk(child, name)

    walk(tree, None)
    for n in names:
        if n not in parents:
            raise ValueError(f"cluster {n!r} missing from tree")

    def path_to_root(name: str) -> list[str]:
        path = [name]
        while parents[path[-1]] is not None:
            path.append(parents[path[-1]])
        return path

    out = {}
    for i, a in enumerate(names):
        pa = path_to_root(a)
        depth_a = {node: d for d, node in enumerate(pa)}
        for b in names[i + 1:]:
            pb = path_to_root(b)
            for d_b, node in enumerate(pb):
                if node in depth_a:
                    t = depth_a[node] + d_b
                    break
            out[(a, b) if a <= b else (b, a)] = beta ** t
    return out


def build_manual_geometry(spec: ManualGeometrySpec, vocab: Vocabulary) -> TransformMatrix:
    clustering = spec.bind(vocab)
    params = spec.params()
    R = build_manual_R(clustering, params)
    D = build_manual_D(clustering, params)
    return compose_H(R, D, provenance="manual")


def build_soft_geometry(spec: SoftScoreSpec, vocab: Vocabulary) -> TransformMatrix:
    R = build_soft_R(spec, vocab)
    D = build_soft_D(spec, vocab)
    return compose_H(R, D, provenance="soft")


def load_geometry_spec(path: str | Path) -> ManualGeometrySpec | SoftScoreSpec:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    return parse_geometry_spec(obj)


def parse_geometry_spec(obj: dict) -> ManualGeometrySpec | SoftScoreSpec:
    if "clusters" in obj:
        clusters, rho_self, importance = {}, {}, {}
        for c in obj["clusters"]:
            name = c["name"]
            clusters[name] = tuple(c.get("words", []))
            rho_self[name] = float(c["rho_self"])
            importance[name] = float(c["importance"])
        pairs = {}
        for p in obj.get("rho_pairs", []):
            a, b = p["a"], p["b"]
            pairs[(a, b) if a <= b else (b, a)] = float(p["value"])
        return ManualGeometrySpec(
            clusters=clusters, rho_self=rho_self, importance=importance,
            rho_pairs=pairs, tree=obj.get("tree"), beta=float(obj.get("beta", 0.5)),
            default_cluster=obj.get("default_cluster"),
        )
    if "cluster_names" in obj:
        scores = {w["word"]: tuple(float(v) for v in w["scores"]) for w in obj["words"]}
        importance = {w["word"]: float(w.get("importance", 0.0)) for w in obj["words"]}
        return SoftScoreSpec(
            cluster_names=tuple(obj["cluster_names"]), scores=scores,
            importance=importance, rho_self=float(obj.get("rho_self", 1.0)),
        )
    raise ValueError("geometry spec needs 'clusters' or 'cluster_names'")


def geometry_spec_to_json(spec: ManualGeometrySpec | SoftScoreSpec) -> dict:
    if isinstance(spec, ManualGeometrySpec):
        out = {
            "clusters": [
                {"name": n, "words": list(ws), "rho_self": spec.rho_self[n],
                 "importance": spec.importance[n]}
                for n, ws in spec.clusters.items()
            ],
            "rho_pairs": [{"a": a, "b": b, "value": v}
                          for (a, b), v in sorted(spec.rho_pairs.items())],
        }
        if spec.tree is not None:
            out["tree"] = spec.tree
            out["beta"] = spec.beta
        if spec.default_cluster is not None:
            out["default_cluster"] = spec.default_cluster
        return out
    return {
        "cluster_names": list(spec.cluster_names),
        "words": [{"word": w, "scores": list(spec.scores[w]),
                   "importance": spec.importance.get(w, 0.0)}
                  for w in spec.scores],
        "rho_self": spec.rho_self,
    }
