"""Text serialization for geometry matrices.

Header line: "lingeo-matrix v1 <rows> <cols> <dense|sparse>", followed by
whitespace-separated rows (dense) or "i j value" triples (sparse).
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

DENSE_LIMIT = 5000       # larger matrices go out as triples
SPARSE_DROP = 1e-8       # magnitudes at or below this are not written


def write_matrix(path: str | Path, matrix: np.ndarray, mode: str | None = None) -> None:
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("only 2-D matrices are serializable")
    if mode is None:
        mode = "dense" if max(m.shape) <= DENSE_LIMIT else "sparse"
    if mode not in ("dense", "sparse"):
        raise ValueError(f"unknown mode {mode!r}")
    lines = [f"lingeo-matrix v1 {m.shape[0]} {m.shape[1]} {mode}"]
    if mode == "dense":
        for row in m:
            lines.append(" ".join(repr(float(v)) for v in row))
    else:
        for i, j in zip(*np.nonzero(np.abs(m) > SPARSE_DROP)):
            lines.append(f"{i} {j} {repr(float(m[i, j]))}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_matrix(path: str | Path) -> np.ndarray:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text:
        raise ValueError(f"{path}: empty matrix file")
    header = text[0].split()
    if len(header) != 5 or header[0] != "lingeo-matrix" or header[1] != "v1":
        raise ValueError(f"{path}: bad header {text[0]!r}")
    rows, cols, mode = int(header[2]), int(header[3]), header[4]
    body = [ln for ln in text[1:] if ln.strip()]
    if mode == "dense":
        if len(body) != rows:
            raise ValueError(f"{path}: expected {rows} rows, found {len(body)}")
        m = np.array([[float(v) for v in ln.split()] for ln in body])
        if m.size and m.shape != (rows, cols):
            raise ValueError(f"{path}: row width disagrees with header")
        return m.reshape(rows, cols)
    if mode == "sparse":
        m = np.zeros((rows, cols))
        for ln in body:
            i, j, v = ln.split()
            m[int(i), int(j)] = float(v)
        return m
    raise ValueError(f"{path}: unknown mode {mode!r}")
