"""Low-dimensional embeddings used as filtration substrate and Mapper lens."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.spatial.distance import pdist, squareform

from sctsa.data import DistanceMatrix, ExpressionMatrix
from sctsa.errors import DataError


def digest(arr: np.ndarray) -> str:
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    h = hashlib.sha256()
    h.update(str(arr.shape).encode())
    h.update(arr.tobytes())
    return h.hexdigest()[:16]


@dataclass
class Embedding:
    coords: np.ndarray
    method: str
    source_hash: str = ""
    eigenvalues: np.ndarray | None = None

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=np.float64)
        if self.coords.ndim != 2 or self.coords.shape[1] < 1:
            raise DataError("embedding coordinates must be N x k with k >= 1")
        if not np.all(np.isfinite(self.coords)):
            raise DataError("embedding has non-finite coordinates")

    @property
    def k(self) -> int:
        return self.coords.shape[1]

    def to_csv(self, path: str | Path, m: ExpressionMatrix | None = None) -> None:
        """Write ``cell_id, t, type, x1..xk``; metadata columns come from ``m``."""
        n = self.coords.shape[0]
        frame = pd.DataFrame(self.coords, columns=[f"x{j + 1}" for j in range(self.k)])
        if m is not None:
            frame.insert(0, "type", m.cell_types)
            frame.insert(0, "t", m.timestamps)
            frame.insert(0, "cell_id", m.cell_ids)
        else:
            frame.insert(0, "type", [""] * n)
            frame.insert(0, "t", [0] * n)
            frame.insert(0, "cell_id", [str(i) for i in range(n)])
        frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\r\n")

    @classmethod
    def from_csv(cls, path: str | Path, method: str = "MDS") -> "Embedding":
        frame = pd.read_csv(path, float_precision="round_trip")
        cols = [c for c in frame.columns if c.startswith("x")]
        return cls(frame[cols].to_numpy(dtype=np.float64), method)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each column made positive; first one wins ties
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def classical_mds(d: DistanceMatrix | np.ndarray, k: int = 2) -> Embedding:
    """Torgerson scaling: eigendecompose ``B = -1/2 J D^2 J``.

    Negative eigenvalues (non-Euclidean input such as permuted nulls) are
    clamped to zero, so trailing columns may be identically zero.
    """
    raw = d.d if isinstance(d, DistanceMatrix) else np.asarray(d, dtype=np.float64)
    n = raw.shape[0]
    if raw.ndim != 2 or raw.shape[1] != n:
        raise DataError("MDS needs a square distance matrix")
    if not np.array_equal(raw, raw.T):
        raise DataError("MDS input is not symmetric")
    if k < 1 or k > n - 1:
        raise DataError(f"target dimension k={k} must lie in [1, N-1] with N={n}")
    sq = raw**2
    row_mean = sq.mean(axis=0)
    b = -0.5 * (sq - row_mean[None, :] - row_mean[:, None] + sq.mean())
    b = 0.5 * (b + b.T)
    evals, evecs = np.linalg.eigh(b)
    order = np.argsort(evals)[::-1][:k]
    evals, evecs = evals[order], _fix_signs(evecs[:, order])
    coords = evecs * np.sqrt(np.clip(evals, 0.0, None))
    return Embedding(coords, "MDS", digest(raw), evals)


def pca(m: ExpressionMatrix | np.ndarray, k: int = 2) -> Embedding:
    """Principal component scores of column-centred values.

    ``eigenvalues`` holds the explained variances (ddof=1) of all
    components, not only the first ``k``.
    """
    x = m.values if isinstance(m, ExpressionMatrix) else np.asarray(m, dtype=np.float64)
    n, p = x.shape
    if k < 1 or k > min(n, p):
        raise DataError(f"k={k} exceeds min(N_cells, N_genes)={min(n, p)}")
    xc = x - x.mean(axis=0)
    u, s, _ = np.linalg.svd(xc, full_matrices=False)
    scores = _fix_signs(u[:, :k] * s[:k])
    scores -= scores.mean(axis=0)
    var = s**2 / max(n - 1, 1)
    return Embedding(scores, "PCA", digest(x), var)


def euclidean_distances(e: Embedding | np.ndarray) -> DistanceMatrix:
    coords = e.coords if isinstance(e, Embedding) else np.asarray(e, dtype=np.float64)
    if coords.shape[0] < 2:
        return DistanceMatrix(np.zeros((coords.shape[0], coords.shape[0])))
    return DistanceMatrix(squareform(pdist(coords)))
