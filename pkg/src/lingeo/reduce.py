"""From-scratch PCA and t-SNE down to 2-D, plus embedding CSV round-trip."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class PointCloud:
    ids: tuple[str, ...]
    X: np.ndarray  # n_docs x m

    def __post_init__(self):
        if self.X.ndim != 2 or self.X.shape[0] != len(self.ids):
            raise ValueError("point matrix does not match ids")
        if not np.isfinite(self.X).all():
            raise ValueError("points must be finite")


@dataclass(frozen=True)
class Embedding2D:
    ids: tuple[str, ...]
    coords: np.ndarray          # n x 2
    provenance: dict
    components: np.ndarray | None = None   # PCA loadings (m x 2) when applicable

    def __post_init__(self):
        if self.coords.shape != (len(self.ids), 2):
            raise ValueError("embedding must be n x 2")
        if not np.isfinite(self.coords).all():
            raise ValueError("embedding coordinates must be finite")


@dataclass(frozen=True)
class TsneConfig:
    perplexity: float = 30.0
    iterations: int = 1000
    learning_rate: float = 200.0
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    momentum_start: float = 0.5
    momentum_final: float = 0.8
    momentum_switch_iter: int = 250
    seed: int = 0

    def __post_init__(self):
        if min(self.perplexity, self.iterations, self.learning_rate,
               self.early_exaggeration) <= 0:
            raise ValueError("t-SNE parameters must be positive")

    def to_dict(self) -> dict:
        return {
            "perplexity": self.perplexity, "iterations": self.iterations,
            "learning_rate": self.learning_rate,
            "early_exaggeration": self.early_exaggeration,
            "exaggeration_iters": self.exaggeration_iters,
            "momentum_start": self.momentum_start,
            "momentum_final": self.momentum_final,
            "momentum_switch_iter": self.momentum_switch_iter,
            "seed": self.seed,
        }


def pca(points: PointCloud, geometry_tag: str = "identity") -> Embedding2D:
    """Top-2 principal directions of the centered data; component signs fixed
    so the largest-magnitude loading is positive. Uses the Gram trick when
    documents are fewer than dimensions."""
    n, m = points.X.shape
    if n < 2:
        raise ValueError("PCA needs at least 2 points")
    Xc = points.X - points.X.mean(axis=0)
    if m <= n:
        cov = (Xc.T @ Xc) / (n - 1)
        eigvals, eigvecs = np.linalg.eigh(cov)
        order = np.argsort(eigvals)[::-1][:2]
        W = eigvecs[:, order]
        variances = np.clip(eigvals[order], 0.0, None)
    else:
        gram = (Xc @ Xc.T) / (n - 1)
        eigvals, eigvecs = np.linalg.eigh(gram)
        order = np.argsort(eigvals)[::-1][:2]
        W = np.zeros((m, 2))
        variances = np.clip(eigvals[order], 0.0, None)
        for k, idx in enumerate(order):
            lam = eigvals[idx]
            if lam > 1e-12 * max(eigvals.max(), 1.0):
                W[:, k] = (Xc.T @ eigvecs[:, idx]) / np.sqrt(lam * (n - 1))
    for k in range(2):
        j = int(np.argmax(np.abs(W[:, k])))
        if W[j, k] < 0:
            W[:, k] = -W[:, k]
    coords = Xc @ W
    prov = {"reducer": "pca", "geometry": geometry_tag,
            "explained_variance": [float(v) for v in variances]}
    return Embedding2D(ids=points.ids, coords=coords, provenance=prov, components=W)


def perplexity_calibration(sq_dists: np.ndarray, target: float,
                           tol: float = 1e-3, max_iter: int = 64
                           ) -> tuple[np.ndarray, float]:
    """Binary-search the Gaussian precision until the row's perplexity
    (2 to its entropy) hits the target. Returns (probability row, precision)."""
    d = np.asarray(sq_dists, dtype=np.float64)
    if target > len(d):
        raise ValueError("target perplexity exceeds neighbor count")
    beta, lo, hi = 1.0, 0.0, np.inf
    shifted = d - d.min()
    row = np.full(len(d), 1.0 / len(d))
    for _ in range(max_iter):
        w = np.exp(-shifted * beta)
        s = w.sum()
        row = w / s
        nz = row > 0
        entropy = -np.sum(row[nz] * np.log(row[nz]))
        perp = np.exp(entropy)
        if abs(perp - target) <= tol:
            break
        if perp > target:      # too flat: raise precision
            lo = beta
            beta = beta * 2.0 if hi == np.inf else (beta + hi) / 2.0
        else:
            hi = beta
            beta = (lo + beta) / 2.0
    return row, beta


def _joint_p(X: np.ndarray, perplexity: float) -> np.ndarray:
    n = X.shape[0]
    sq = _pairwise_sq_dists(X)
    P = np.zeros((n, n))
    mask = ~np.eye(n, dtype=bool)
    for i in range(n):
        row, _ = perplexity_calibration(sq[i, mask[i]], perplexity)
        P[i, mask[i]] = row
    P = (P + P.T) / (2.0 * n)
    return P


def _pairwise_sq_dists(Y: np.ndarray) -> np.ndarray:
    s = (Y * Y).sum(axis=1)
    sq = s[:, None] + s[None, :] - 2.0 * (Y @ Y.T)
    np.clip(sq, 0.0, None, out=sq)
    np.fill_diagonal(sq, 0.0)
    return sq


def _student_q(Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Student-t joint Q and the unnormalized weights W."""
    W = 1.0 / (1.0 + _pairwise_sq_dists(Y))
    np.fill_diagonal(W, 0.0)
    Q = W / W.sum()
    return Q, W


def _kl_divergence(P: np.ndarray, Q: np.ndarray) -> float:
    mask = P > 0
    return float(np.sum(P[mask] * np.log(P[mask] / np.maximum(Q[mask], 1e-300))))


def _kl_gradient(P: np.ndarray, Y: np.ndarray) -> np.ndarray:
    Q, W = _student_q(Y)
    M = (P - Q) * W
    return 4.0 * ((np.diag(M.sum(axis=1)) - M) @ Y)


def tsne(points: PointCloud, config: TsneConfig,
         geometry_tag: str = "identity") -> Embedding2D:
    """Exact (dense) t-SNE with early exaggeration and a momentum schedule.
    Deterministic for a given seed; the KL trace rides in the provenance."""
    n = points.X.shape[0]
    if n < 5:
        raise ValueError("t-SNE needs at least 5 points")
    if config.perplexity >= n:
        raise ValueError("perplexity must be below the number of points")
    P = _joint_p(points.X, config.perplexity)

    rng = np.random.default_rng(config.seed)
    Y = rng.normal(scale=1e-4, size=(n, 2))
    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    kl_trace: dict[int, float] = {}

    for t in range(config.iterations):
        exaggerate = t < config.exaggeration_iters
        Pt = P * config.early_exaggeration if exaggerate else P
        Q, W = _student_q(Y)
        M = (Pt - Q) * W
        grad = 4.0 * ((np.diag(M.sum(axis=1)) - M) @ Y)
        if not np.isfinite(grad).all():
            raise ValueError("divergence; reduce learning rate")
        momentum = (config.momentum_start if t < config.momentum_switch_iter
                    else config.momentum_final)
        # adaptive per-coordinate gains, as in the reference optimizer
        same_dir = np.sign(grad) == np.sign(update)
        gains = np.where(same_dir, gains * 0.8, gains + 0.2)
        np.clip(gains, 0.01, None, out=gains)
        update = momentum * update - config.learning_rate * (gains * grad)
        Y = Y + update
        Y = Y - Y.mean(axis=0)
        if (t + 1) % 50 == 0 or t + 1 == config.iterations:
            kl_trace[t + 1] = _kl_divergence(P, _student_q(Y)[0])

    final_kl = kl_trace[config.iterations]
    prov = {"reducer": "tsne", "geometry": geometry_tag, "seed": config.seed,
            "config": config.to_dict(), "final_kl": final_kl,
            "kl_trace": {str(k): v for k, v in sorted(kl_trace.items())}}
    return Embedding2D(ids=points.ids, coords=Y, provenance=prov)


def write_embedding_csv(emb: Embedding2D, path: str | Path,
                        labels: tuple[str, ...] | None = None) -> None:
    prov = emb.provenance
    lines = [
        f"# reducer: {prov.get('reducer', 'unknown')}",
        f"# geometry: {prov.get('geometry', 'unknown')}",
        f"# seed: {prov.get('seed', '')}",
        f"# config: {json.dumps(prov.get('config', {}), sort_keys=True)}",
    ]
    with open(path, "w", encoding="utf-8", newline="") as f:
        for ln in lines:
            f.write(ln + "\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["id", "x", "y"] + (["label"] if labels is not None else []))
        for i, doc_id in enumerate(emb.ids):
            row = [doc_id, repr(float(emb.coords[i, 0])), repr(float(emb.coords[i, 1]))]
            if labels is not None:
                row.append(labels[i])
            writer.writerow(row)


def read_embedding_csv(path: str | Path) -> tuple[Embedding2D, tuple[str, ...] | None]:
    prov: dict = {}
    ids, xs, ys, labels = [], [], [], []
    has_labels = False
    with open(path, encoding="utf-8", newline="") as f:
        rows = []
        for raw in f:
            if raw.startswith("#"):
                key, _, value = raw[1:].partition(":")
                key, value = key.strip(), value.strip()
                if key == "config" and value:
                    prov[key] = json.loads(value)
                elif value:
                    prov[key] = int(value) if key == "seed" and value.isdigit() else value
                continue
            rows.append(raw)
        for i, rec in enumerate(csv.reader(rows, lineterminator="\n")):
            if i == 0:
                has_labels = len(rec) == 4
                continue
            if not rec:
                continue
            ids.append(rec[0])
            xs.append(float(rec[1]))
            ys.append(float(rec[2]))
            if has_labels:
                labels.append(rec[3])
    coords = np.column_stack([xs, ys]) if ids else np.zeros((0, 2))
    emb = Embedding2D(ids=tuple(ids), coords=coords, provenance=prov)
    return emb, tuple(labels) if has_labels else None
