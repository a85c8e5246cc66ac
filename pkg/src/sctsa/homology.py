"""Persistence barcodes over Z/2 for temporal Rips filtrations."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from sctsa.complex.rips import INF, FiltrationParams, TimedPointCloud, edge_births
from sctsa.data import DistanceMatrix
from sctsa.errors import BudgetError, ConfigError

DEFAULT_MAX_SIMPLICES = 2_000_000


@dataclass
class FilteredComplex:
    """Simplices ``(vertices, dim, birth)`` sorted by (birth, dim, vertices)."""

    simplices: list[tuple[tuple[int, ...], int, float]]
    max_dim: int
    homology_max_dim: int = 2

    def __len__(self):
        return len(self.simplices)

    def counts_at(self, eps: float) -> np.ndarray:
        out = np.zeros(self.max_dim + 1, dtype=np.int64)
        for _, dim, birth in self.simplices:
            if birth <= eps:
                out[dim] += 1
        return out


@dataclass
class Barcode:
    intervals: list[tuple[int, float, float]] = field(default_factory=list)
    max_dim: int = 2

    def __post_init__(self):
        self.intervals = sorted((int(k), float(b), float(d)) for k, b, d in self.intervals)

    def dim(self, k: int) -> list[tuple[float, float]]:
        return [(b, d) for kk, b, d in self.intervals if kk == k]

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["dim", "birth", "death"])
            for k, b, d in self.intervals:
                w.writerow([k, repr(b), "inf" if d == INF else repr(d)])

    @classmethod
    def read_csv(cls, path: str | Path, max_dim: int = 2) -> "Barcode":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        return cls([(int(r["dim"]), float(r["birth"]), float(r["death"])) for r in rows], max_dim)

    def to_json(self) -> dict:
        return {
            "schema": "sctsa.barcode/1",
            "max_dim": self.max_dim,
            "intervals": [
                {"dim": k, "birth": b, "death": None if d == INF else d} for k, b, d in self.intervals
            ],
        }


@dataclass
class BettiCurve:
    betti: np.ndarray
    grid: np.ndarray


def enclosing_radius(d: np.ndarray) -> float:
    """Past this threshold the Rips complex is a cone, hence contractible."""
    return float(d.max(axis=1).min()) if d.size else 0.0


def build_filtered_complex(
    pc: TimedPointCloud | DistanceMatrix,
    fp: FiltrationParams | None = None,
    homology_max_dim: int = 2,
    timestamps=None,
    max_simplices: int = DEFAULT_MAX_SIMPLICES,
    truncate: bool = False,
) -> FilteredComplex:
    """Materialise the flag filtration up to dimension ``homology_max_dim + 1``.

    A simplex is born when its last edge appears.  An explicit grid in ``fp``
    caps the filtration at its final threshold.  ``truncate`` stops at the
    enclosing radius, which leaves every barcode of dimension >= 1 and the H0
    deaths unchanged; it is ignored when ``tau`` is finite.
    """
    fp = fp or FiltrationParams()
    if homology_max_dim < 0:
        raise ConfigError("homology_max_dim must be >= 0")
    if isinstance(pc, TimedPointCloud):
        d, timestamps = pc.distances(), pc.timestamps
    else:
        d = pc
    birth = edge_births(d, timestamps, fp.tau)
    cap = INF
    if fp.grid is not None:
        cap = fp.grid[-1]
    if truncate and fp.tau == INF:
        cap = min(cap, enclosing_radius(d.d))

    top = homology_max_dim + 1
    n = d.n
    upper = []
    for v in range(n):
        row = birth[v, v + 1:]
        upper.append({int(u) + v + 1 for u in np.flatnonzero((row <= cap) & (row < INF))})

    simplices: list[tuple[tuple[int, ...], int, float]] = []

    def grow(clique, b, cand):
        simplices.append((clique, len(clique) - 1, b))
        if len(simplices) > max_simplices:
            raise BudgetError(f"filtered complex exceeds the budget of {max_simplices} simplices")
        if len(clique) > top:
            return
        for u in sorted(cand):
            nb = b
            for w in clique:
                if birth[w, u] > nb:
                    nb = birth[w, u]
            grow(clique + (u,), float(nb), cand & upper[u])

    for v in range(n):
        grow((v,), 0.0, upper[v])
    simplices.sort(key=lambda s: (s[2], s[1], s[0]))
    return FilteredComplex(simplices, min(top, n - 1) if n else 0, homology_max_dim)


def _boundary_indices(fc: FilteredComplex) -> list[list[int]]:
    index = {s[0]: i for i, s in enumerate(fc.simplices)}
    out = []
    for verts, dim, _ in fc.simplices:
        if dim == 0:
            out.append([])
        else:
            out.append([index[verts[:j] + verts[j + 1:]] for j in range(len(verts))])
    return out


def persistence_pairs(fc: FilteredComplex, clearing: bool = True) -> tuple[dict[int, int], set[int]]:
    """Column reduction over Z/2.

    Returns ``(pairs, negative)`` where ``pairs`` maps a creator index to its
    destroyer index.  Dimensions are reduced top-down so that columns of
    creators can be cleared without reduction.
    """
    boundary = _boundary_indices(fc)
    by_dim: dict[int, list[int]] = {}
    for i, (_, dim, _) in enumerate(fc.simplices):
        by_dim.setdefault(dim, []).append(i)

    pairs: dict[int, int] = {}
    negative: set[int] = set()
    cleared: set[int] = set()
    for dim in sorted(by_dim, reverse=True):
        if dim == 0:
            continue
        pivot_col: dict[int, set[int]] = {}
        for j in by_dim[dim]:
            if clearing and j in cleared:
                continue
            col = set(boundary[j])
            while col:
                low = max(col)
                other = pivot_col.get(low)
                if other is None:
                    break
                col ^= other
            if col:
                low = max(col)
                pivot_col[low] = col
                pairs[low] = j
                negative.add(j)
                cleared.add(low)
    return pairs, negative


def reduce_persistence(fc: FilteredComplex, homology_max_dim: int | None = None, keep_zero: bool = False) -> Barcode:
    """Barcode of ``fc`` in dimensions up to ``homology_max_dim``.

    Zero-length intervals are dropped unless ``keep_zero``.
    """
    if homology_max_dim is None:
        homology_max_dim = fc.homology_max_dim
    pairs, negative = persistence_pairs(fc)
    intervals = []
    for i, (_, dim, birth) in enumerate(fc.simplices):
        if dim > homology_max_dim or i in negative:
            continue
        j = pairs.get(i)
        death = fc.simplices[j][2] if j is not None else INF
        if death > birth or keep_zero:
            intervals.append((dim, birth, death))
    return Barcode(intervals, homology_max_dim)


def barcode(
    pc: TimedPointCloud | DistanceMatrix,
    fp: FiltrationParams | None = None,
    homology_max_dim: int = 2,
    timestamps=None,
    max_simplices: int = DEFAULT_MAX_SIMPLICES,
) -> Barcode:
    fp = fp or FiltrationParams()
    fc = build_filtered_complex(pc, fp, homology_max_dim, timestamps, max_simplices, truncate=True)
    return reduce_persistence(fc, homology_max_dim)


def betti_curve(b: Barcode, grid, max_dim: int | None = None) -> BettiCurve:
    """Intervals alive at each threshold under ``[birth, death)``."""
    grid = np.asarray(grid, dtype=np.float64)
    top = b.max_dim if max_dim is None else max_dim
    betti = np.zeros((top + 1, len(grid)), dtype=np.int64)
    for k, birth, death in b.intervals:
        if k <= top:
            betti[k] += (grid >= birth) & (grid < death)
    return BettiCurve(betti, grid)


def grid_step(grid: np.ndarray) -> float:
    if len(grid) >= 2:
        return float(grid[-1] - grid[0]) / (len(grid) - 1)
    return float(grid[0]) if len(grid) else 0.0


def betti_features(bc: BettiCurve) -> dict[str, float]:
    """Per dimension: curve integral (sum x step), maximum and final value."""
    step = grid_step(bc.grid)
    out = {}
    for k, row in enumerate(bc.betti):
        out[f"H{k}_integral"] = float(row.sum()) * step
        out[f"H{k}_max"] = float(row.max()) if row.size else 0.0
        out[f"H{k}_final"] = float(row[-1]) if row.size else 0.0
    return out


def write_barcode_json(b: Barcode, path: str | Path) -> None:
    Path(path).write_text(json.dumps(b.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def euler_characteristic(counts) -> int:
    return int(sum((-1) ** n * int(c) for n, c in enumerate(counts)))


def alternating_betti(betti_column) -> int:
    return int(sum((-1) ** k * int(c) for k, c in enumerate(betti_column)))


__all__ = [
    "Barcode",
    "BettiCurve",
    "FilteredComplex",
    "alternating_betti",
    "barcode",
    "betti_curve",
    "betti_features",
    "build_filtered_complex",
    "enclosing_radius",
    "euler_characteristic",
    "grid_step",
    "persistence_pairs",
    "reduce_persistence",
    "write_barcode_json",
]
