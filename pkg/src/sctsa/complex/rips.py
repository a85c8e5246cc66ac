"""Temporally constrained Vietoris-Rips filtrations and simplex count curves."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from sctsa.complex import _kernels
from sctsa.data import DistanceMatrix
from sctsa.embed import euclidean_distances
from sctsa.errors import BudgetError, ConfigError

INF = math.inf


@dataclass
class TimedPointCloud:
    coords: np.ndarray
    timestamps: np.ndarray

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=np.float64)
        if self.coords.ndim == 1:
            self.coords = self.coords[:, None]
        self.timestamps = np.asarray(self.timestamps, dtype=np.int64)
        if len(self.timestamps) != len(self.coords):
            raise ConfigError("timestamps and coords differ in length")
        if not np.all(np.isfinite(self.coords)):
            raise ConfigError("point cloud has non-finite coordinates")

    def distances(self) -> DistanceMatrix:
        return euclidean_distances(self.coords)


@dataclass
class FiltrationParams:
    """Threshold grid, time-delay limit and top simplex dimension.

    With ``grid=None`` each distance matrix gets its own
    :func:`default_grid` of ``steps`` thresholds.
    """

    grid: Sequence[float] | None = None
    tau: float = INF
    max_dim: int = 7
    steps: int = 100

    def __post_init__(self):
        if self.grid is not None:
            g = np.asarray(self.grid, dtype=np.float64)
            if g.ndim != 1 or len(g) == 0:
                raise ConfigError("filtration grid must be a nonempty 1-D sequence")
            if np.any(np.diff(g) <= 0):
                raise ConfigError("filtration grid must be strictly increasing")
            self.grid = tuple(float(x) for x in g)
        if self.max_dim < 1:
            raise ConfigError("max_dim must be >= 1")
        if self.tau < 0:
            raise ConfigError("tau must be >= 0")
        if self.grid is None and self.steps < 2:
            raise ConfigError("steps must be >= 2")

    def resolve(self, d: DistanceMatrix) -> np.ndarray:
        if self.grid is not None:
            return np.asarray(self.grid, dtype=np.float64)
        return default_grid(d, self.steps)


@dataclass
class SimplexCountCurve:
    """``counts[n, s]`` is the number of n-simplices present at ``grid[s]``."""

    counts: np.ndarray
    grid: np.ndarray
    tau: float = INF
    meta: dict = field(default_factory=dict)

    @property
    def max_dim(self) -> int:
        return self.counts.shape[0] - 1

    @property
    def cumulative(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def write_long_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["dim", "step", "epsilon", "count"])
            for n in range(self.counts.shape[0]):
                for s, eps in enumerate(self.grid):
                    w.writerow([n, s, repr(float(eps)), int(self.counts[n, s])])

    def write_summary_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["dim", "cumulative"])
            for n, c in enumerate(self.cumulative):
                w.writerow([n, int(c)])


def default_grid(d: DistanceMatrix | np.ndarray, steps: int = 100) -> np.ndarray:
    """``steps`` uniform thresholds in (0, max distance]; the last equals the max exactly."""
    if steps < 2:
        raise ConfigError("need at least 2 grid steps")
    raw = d.d if isinstance(d, DistanceMatrix) else np.asarray(d)
    top = float(raw.max()) if raw.size else 0.0
    if top == 0.0:
        return np.array([0.0])
    grid = top * np.arange(1, steps + 1, dtype=np.float64) / steps
    grid[-1] = top
    return grid


def edge_births(d: DistanceMatrix | np.ndarray, timestamps=None, tau: float = INF) -> np.ndarray:
    """Edge filtration values: the distance, or +inf across the time-delay limit."""
    raw = d.d if isinstance(d, DistanceMatrix) else np.asarray(d, dtype=np.float64)
    birth = raw.astype(np.float64, copy=True)
    if timestamps is not None and tau != INF:
        t = np.asarray(timestamps, dtype=np.int64)
        birth[np.abs(t[:, None] - t[None, :]) > tau] = INF
    np.fill_diagonal(birth, 0.0)
    return birth


def neighborhood_graph(d: DistanceMatrix | np.ndarray, timestamps=None, eps: float = INF, tau: float = INF) -> np.ndarray:
    """Boolean adjacency: ``d[i, j] <= eps`` and ``|t_i - t_j| <= tau``, no loops."""
    if eps < 0:
        raise ConfigError("eps must be >= 0")
    adj = edge_births(d, timestamps, tau) <= eps
    np.fill_diagonal(adj, False)
    return adj


def _check_overflow(n: int, max_dim: int, steps: int = 1) -> None:
    worst = max(math.comb(n, k) for k in range(1, max_dim + 2)) if n else 0
    if worst * steps >= 2**62:
        raise BudgetError(f"clique counts for N={n} up to dimension {max_dim} overflow 64-bit integers")


def count_cliques(adj: np.ndarray, max_dim: int) -> np.ndarray:
    """Number of n-simplices (``n+1``-cliques) for ``n = 0..max_dim``.

    Cliques are counted through pivot leaves, never listed; use
    :func:`list_cliques` when the simplices themselves are needed.
    """
    if max_dim < 1:
        raise ConfigError("max_dim must be >= 1")
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    _check_overflow(n, max_dim)
    birth = np.where(adj, 0.0, INF)
    bits, _ = _kernels.adjacency_bitsets(birth, 0.0)
    return _kernels.count_cliques_bitset(bits, n, max_dim + 1, _kernels.binomial_table(n, max_dim + 1))


def list_cliques(adj: np.ndarray, max_dim: int) -> Iterator[tuple[int, ...]]:
    """Yield every clique with at most ``max_dim + 1`` vertices as a sorted tuple."""
    adj = np.asarray(adj, dtype=bool)
    upper = [set(np.flatnonzero(adj[v, v + 1:]) + v + 1) for v in range(adj.shape[0])]

    def grow(clique, cand):
        yield clique
        if len(clique) > max_dim:
            return
        for u in sorted(cand):
            yield from grow(clique + (u,), cand & upper[u])

    for v in range(adj.shape[0]):
        yield from grow((v,), upper[v])


def curve_from_births(birth: np.ndarray, grid: np.ndarray, max_dim: int, tau: float = INF) -> SimplexCountCurve:
    n = birth.shape[0]
    grid = np.asarray(grid, dtype=np.float64)
    _check_overflow(n, max_dim, len(grid))
    counts = _kernels.count_curve(
        np.ascontiguousarray(birth, dtype=np.float64),
        grid,
        max_dim + 1,
        _kernels.binomial_table(n, max_dim + 1),
    )
    return SimplexCountCurve(np.ascontiguousarray(counts.T), grid, tau)


def simplex_count_curve(
    pc: TimedPointCloud | DistanceMatrix,
    fp: FiltrationParams,
    timestamps=None,
) -> SimplexCountCurve:
    """Per-threshold simplex counts of the temporal Rips filtration.

    ``pc`` is either a timestamped point cloud (Euclidean distances) or a
    distance matrix, in which case ``timestamps`` may be given separately.
    """
    if isinstance(pc, TimedPointCloud):
        d, timestamps = pc.distances(), pc.timestamps
    else:
        d = pc
    grid = fp.resolve(d)
    return curve_from_births(edge_births(d, timestamps, fp.tau), grid, fp.max_dim, fp.tau)
