"""Separation quality of labeled 2-D embeddings: scatter-matrix index,
Davies-Bouldin, leave-one-out k-NN accuracy, and Fisher-projection overlap;
plus the simplex grid search for convex-combination weights.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.stats import norm

from .corpus import DocumentMatrix
from .geometry import CombinationWeights, TransformMatrix, convex_combination, transform
from .reduce import Embedding2D, PointCloud


@dataclass(frozen=True)
class LabeledEmbedding:
    embedding: Embedding2D
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.embedding.ids):
            raise ValueError("labels do not align with embedding")

    @property
    def coords(self) -> np.ndarray:
        return self.embedding.coords

    def classes(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.labels)))


@dataclass(frozen=True)
class ScatterMatrices:
    S_W: np.ndarray
    S_B: np.ndarray
    S_T: np.ndarray


@dataclass(frozen=True)
class EvaluationReport:
    intra_inter: float
    davies_bouldin: float
    knn_k: int
    knn_accuracy: float
    lda_overlap: float | None
    geometry: str = "unknown"
    reducer: str = "unknown"
    seed: int | None = None

    def to_json(self) -> dict:
        out = {
            "measure_i": self.intra_inter,
            "measure_ii": self.davies_bouldin,
            "measure_iii": {"k": self.knn_k, "accuracy": self.knn_accuracy},
            "geometry": self.geometry,
            "reducer": self.reducer,
            "seed": self.seed,
        }
        if self.lda_overlap is not None:
            out["measure_iv"] = self.lda_overlap
        return out


def _class_groups(emb: LabeledEmbedding) -> dict[str, np.ndarray]:
    labels = np.asarray(emb.labels)
    return {c: np.flatnonzero(labels == c) for c in emb.classes()}


def scatter_matrices(emb: LabeledEmbedding) -> ScatterMatrices:
    X = emb.coords
    mu = X.mean(axis=0)
    d = X.shape[1]
    S_W = np.zeros((d, d))
    S_B = np.zeros((d, d))
    for idx in _class_groups(emb).values():
        pts = X[idx]
        mu_c = pts.mean(axis=0)
        centered = pts - mu_c
        S_W += centered.T @ centered
        delta = (mu_c - mu)[:, None]
        S_B += len(idx) * (delta @ delta.T)
    return ScatterMatrices(S_W=S_W, S_B=S_B, S_T=S_W + S_B)


def intra_inter(emb: LabeledEmbedding, ridge: float | None = None) -> float:
    """tr(S_T^-1 S_W), lightly ridged so collinear embeddings stay scorable.
    Lower is better; invariant to nonsingular linear maps of the plane."""
    sm = scatter_matrices(emb)
    if ridge is None:
        ridge = 1e-9 * np.trace(sm.S_T)
    reg = sm.S_T + ridge * np.eye(sm.S_T.shape[0])
    if np.trace(reg) == 0.0:
        return 0.0
    return float(np.trace(np.linalg.solve(reg, sm.S_W)))


def davies_bouldin(emb: LabeledEmbedding) -> float:
    """Mean over classes of the worst (s_i + s_j) / d(mu_i, mu_j); lower is better."""
    groups = _class_groups(emb)
    if len(groups) < 2:
        raise ValueError("Davies-Bouldin needs at least 2 classes")
    names = list(groups)
    X = emb.coords
    centroids = np.array([X[groups[c]].mean(axis=0) for c in names])
    spreads = np.array([
        np.linalg.norm(X[groups[c]] - centroids[i], axis=1).mean()
        for i, c in enumerate(names)
    ])
    r = len(names)
    worst = np.zeros(r)
    for i in range(r):
        for j in range(r):
            if i == j:
                continue
            sep = np.linalg.norm(centroids[i] - centroids[j])
            if sep == 0.0:
                raise ValueError("degenerate centroids")
            worst[i] = max(worst[i], (spreads[i] + spreads[j]) / sep)
    return float(worst.mean())


def knn_accuracy(emb: LabeledEmbedding, k: int = 5) -> float:
    """Leave-one-out majority vote. Distance ties fall to the lower point
    index; vote ties fall to the earlier label in sorted order."""
    n = len(emb.labels)
    if not (0 < k < n):
        raise ValueError("k must satisfy 0 < k < n_points")
    X = emb.coords
    label_rank = {c: r for r, c in enumerate(emb.classes())}
    sq = ((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2)
    correct = 0
    for i in range(n):
        order = sorted((sq[i, j], j) for j in range(n) if j != i)
        votes: dict[str, int] = {}
        for _, j in order[:k]:
            votes[emb.labels[j]] = votes.get(emb.labels[j], 0) + 1
        winner = min(votes, key=lambda c: (-votes[c], label_rank[c]))
        correct += winner == emb.labels[i]
    return correct / n


def _gaussian_overlap(mu1: float, var1: float, mu2: float, var2: float) -> float:
    """Integral of min of two Gaussian densities."""
    s1, s2 = math.sqrt(var1), math.sqrt(var2)
    if math.isclose(mu1, mu2, abs_tol=1e-12) and math.isclose(s1, s2, rel_tol=1e-12):
        return 1.0
    if math.isclose(s1, s2, rel_tol=1e-9, abs_tol=0.0):
        s = (s1 + s2) / 2.0
        return float(2.0 * norm.cdf(-abs(mu2 - mu1) / (2.0 * s)))
    # unequal variances: the densities cross at the roots of a quadratic
    a = 1.0 / (2.0 * var2) - 1.0 / (2.0 * var1)
    b = mu1 / var1 - mu2 / var2
    c = mu2 ** 2 / (2.0 * var2) - mu1 ** 2 / (2.0 * var1) + math.log(s2 / s1)
    roots = np.sort(np.roots([a, b, c]).real)
    cuts = [-np.inf, *roots, np.inf]
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo:
            continue
        if np.isinf(lo) and np.isinf(hi):
            probe = 0.0
        elif np.isinf(lo):
            probe = hi - 1.0
        elif np.isinf(hi):
            probe = lo + 1.0
        else:
            probe = (lo + hi) / 2.0
        # log densities: far-tail probes underflow plain pdfs to a 0 == 0 tie
        f1 = norm.logpdf(probe, mu1, s1)
        f2 = norm.logpdf(probe, mu2, s2)
        mu, s = (mu1, s1) if f1 <= f2 else (mu2, s2)
        total += norm.cdf(hi, mu, s) - norm.cdf(lo, mu, s)
    return float(np.clip(total, 0.0, 1.0))


def lda_overlap(emb: LabeledEmbedding) -> float:
    """Project on the Fisher discriminant direction, fit one Gaussian per
    class (ML variance), return the overlap area of the two fits."""
    groups = _class_groups(emb)
    if len(groups) != 2:
        raise ValueError("overlap measure is defined for exactly 2 classes")
    (ia, ib) = groups.values()
    if len(ia) < 2 or len(ib) < 2:
        raise ValueError("each class needs at least 2 points")
    X = emb.coords
    A, B = X[ia], X[ib]
    mu_a, mu_b = A.mean(axis=0), B.mean(axis=0)
    S_w = (A - mu_a).T @ (A - mu_a) + (B - mu_b).T @ (B - mu_b)
    w = np.linalg.pinv(S_w) @ (mu_a - mu_b)
    if np.linalg.norm(w) == 0.0:
        w = mu_a - mu_b
    pa, pb = A @ w, B @ w
    var_a, var_b = float(np.var(pa)), float(np.var(pb))
    if var_a == 0.0 or var_b == 0.0:
        raise ValueError("degenerate projection")
    return _gaussian_overlap(float(pa.mean()), var_a, float(pb.mean()), var_b)


def evaluate_embedding(emb: LabeledEmbedding, k: int = 5,
                       geometry: str = "unknown", reducer: str = "unknown",
                       seed: int | None = None) -> EvaluationReport:
    n_classes = len(emb.classes())
    overlap = None
    if n_classes == 2:
        try:
            overlap = lda_overlap(emb)
        except ValueError:
            overlap = None
    return EvaluationReport(
        intra_inter=intra_inter(emb),
        davies_bouldin=davies_bouldin(emb),
        knn_k=k,
        knn_accuracy=knn_accuracy(emb, k=k),
        lda_overlap=overlap,
        geometry=geometry,
        reducer=reducer,
        seed=seed,
    )


def simplex_grid(n_parts: int, step: float):
    """All weight vectors on the grid, first component descending, so every
    vertex appears and enumeration order is reproducible."""
    m = round(1.0 / step)
    if abs(m * step - 1.0) > 1e-9:
        raise ValueError("grid step must divide 1")

    def rec(remaining: int, parts: int):
        if parts == 1:
            yield (remaining,)
            return
        for k in range(remaining, -1, -1):
            for rest in rec(remaining - k, parts - 1):
                yield (k, *rest)

    for ks in rec(m, n_parts):
        yield CombinationWeights(tuple(k / m for k in ks))


def search_convex_combination(
    components: Sequence[TransformMatrix],
    docs: DocumentMatrix,
    reducer: Callable[[PointCloud, str], Embedding2D],
    grid_step: float = 0.1,
    k: int = 5,
) -> tuple[CombinationWeights, EvaluationReport]:
    """Exhaustive simplex-grid search minimizing the Davies-Bouldin index.
    Vertices are part of the grid, so the result is never worse on that
    measure than any pure component. Candidates whose index is undefined
    (collapsed classes) are skipped."""
    if len(components) < 1:
        raise ValueError("need at least one component geometry")
    if docs.labels is None:
        raise ValueError("weight search scores embeddings by label separation")
    best: tuple[float, CombinationWeights, Embedding2D] | None = None
    for alpha in simplex_grid(len(components), grid_step):
        H = convex_combination(components, alpha)
        points = PointCloud(ids=docs.ids, X=transform(H, docs.terms))
        emb = reducer(points, "combination")
        labeled = LabeledEmbedding(embedding=emb, labels=docs.labels)
        try:
            score = davies_bouldin(labeled)
        except ValueError:
            continue
        if best is None or score < best[0]:
            best = (score, alpha, emb)
    if best is None:
        raise ValueError("no grid point produced a scorable embedding")
    _, alpha, emb = best
    report = evaluate_embedding(
        LabeledEmbedding(embedding=emb, labels=docs.labels), k=k,
        geometry="combination:" + ",".join(f"{w:g}" for w in alpha),
        reducer=emb.provenance.get("reducer", "unknown"),
        seed=emb.provenance.get("seed"),
    )
    return alpha, report
