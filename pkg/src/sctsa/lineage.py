"""Hierarchical clustering of groups by their simplicial summary statistics."""

from __future__ import annotations

import csv
import json
import math
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from sctsa.complexity import ComplexityProfile, derive_seed, group_distances
from sctsa.data import ExpressionMatrix, GroupBy, bootstrap_sample
from sctsa.embed import euclidean_distances
from sctsa.errors import DataError
from sctsa.homology import barcode, betti_curve, betti_features
from sctsa.complex.rips import FiltrationParams, default_grid

LINKAGES = ("single", "average", "complete")
METRICS = ("euclidean", "correlation")


@dataclass
class FeatureTable:
    """Rows are group labels; ``nan`` entries are masked (undefined)."""

    rows: list
    columns: list[str]
    values: np.ndarray
    dropped: list[dict] = field(default_factory=list)

    def __post_init__(self):
        if len(set(self.columns)) != len(self.columns):
            raise DataError("feature column names must be unique")
        self.values = np.asarray(self.values, dtype=np.float64).reshape(len(self.rows), len(self.columns))

    def heatmap(self, order: Sequence[int] | None = None) -> dict:
        order = list(range(len(self.rows))) if order is None else list(order)
        return {
            "schema": "sctsa.lineage-heatmap/1",
            "row_order": [_label(self.rows[i]) for i in order],
            "column_order": list(self.columns),
            "values": [[None if math.isnan(v) else float(v) for v in self.values[i]] for i in order],
        }


def _label(x):
    return x if isinstance(x, str) else (int(x) if isinstance(x, (int, np.integer)) else str(x))


def _profiles_to_rows(profiles: Sequence[ComplexityProfile]) -> tuple[list, list[str], np.ndarray]:
    order: list = []
    acc: dict = {}
    for p in profiles:
        if p.group not in acc:
            order.append(p.group)
            acc[p.group] = []
        acc[p.group].append(p.sc)
    cols = [f"SC_{n}" for n in profiles[0].dims]
    vals = np.full((len(order), len(cols)), np.nan)
    for i, g in enumerate(order):
        arr = np.vstack(acc[g])
        for j in range(arr.shape[1]):
            col = arr[:, j][np.isfinite(arr[:, j])]
            if col.size:
                vals[i, j] = col.mean()
    return order, cols, vals


def build_feature_table(
    features: Sequence[ComplexityProfile] | Mapping[object, Mapping[str, float]],
    standardize: bool = True,
) -> FeatureTable:
    """Tabulate SC profiles (averaged over repeats) or per-group feature dicts.

    Columns with no defined entry are dropped; with ``standardize`` each
    column is z-scored over its defined entries (population std) and
    constant columns are dropped.  Every drop is warned about and recorded
    in ``FeatureTable.dropped``.
    """
    if isinstance(features, Mapping):
        rows = list(features)
        cols = list(next(iter(features.values()))) if rows else []
        for r in rows:
            if list(features[r]) != cols:
                raise DataError(f"group {r!r} has inconsistent feature names")
        vals = np.array([[np.nan if features[r][c] is None else features[r][c] for c in cols] for r in rows],
                        dtype=np.float64).reshape(len(rows), len(cols))
    else:
        if not features:
            raise DataError("no profiles given")
        dims = {len(p.sc) for p in features}
        if len(dims) != 1:
            raise DataError("profiles disagree on the number of dimensions")
        rows, cols, vals = _profiles_to_rows(features)

    dropped = []
    keep = []
    for j, c in enumerate(cols):
        col = vals[:, j]
        ok = np.isfinite(col)
        if not ok.any():
            dropped.append({"column": c, "reason": "all entries undefined"})
            continue
        if standardize:
            mu = col[ok].mean()
            sd = np.sqrt(((col[ok] - mu) ** 2).mean())
            if sd == 0:
                dropped.append({"column": c, "reason": "zero variance"})
                continue
            vals[:, j] = (col - mu) / sd
        keep.append(j)
    for rec in dropped:
        warnings.warn(f"dropping feature {rec['column']}: {rec['reason']}", stacklevel=2)
    return FeatureTable(rows, [cols[j] for j in keep], vals[:, keep], dropped)


def pairwise_distances(t: FeatureTable, metric: str = "euclidean") -> np.ndarray:
    """Pairwise-complete distances: each pair uses the columns both rows define.

    Euclidean distances are rescaled by ``sqrt(p / p_shared)``; pairs with
    nothing in common are infinitely far apart.
    """
    if metric not in METRICS:
        raise DataError(f"unknown metric {metric!r}")
    x = t.values
    n, p = x.shape
    out = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            ok = np.isfinite(x[a]) & np.isfinite(x[b])
            k = int(ok.sum())
            if k == 0:
                dist = math.inf
            elif metric == "euclidean":
                dist = math.sqrt(float(((x[a, ok] - x[b, ok]) ** 2).sum()) * p / k)
            else:
                u = x[a, ok] - x[a, ok].mean()
                v = x[b, ok] - x[b, ok].mean()
                den = math.sqrt(float(u @ u) * float(v @ v))
                dist = 1.0 - float(u @ v) / den if den > 0 else 1.0
            out[a, b] = out[b, a] = dist
    return out


@dataclass
class Dendrogram:
    """Merges ``(child_a, child_b, height, size)`` with scipy-style ids.

    Leaves are ``0..n-1``; merge ``i`` creates cluster ``n + i``.
    """

    merges: list[tuple[int, int, float, int]]
    labels: list

    @property
    def n(self) -> int:
        return len(self.labels)

    def _min_leaf(self) -> list[int]:
        low = list(range(self.n))
        for a, b, _, _ in self.merges:
            low.append(min(low[a], low[b]))
        return low

    def _sizes(self) -> list[int]:
        return [1] * self.n + [m[3] for m in self.merges]

    def leaf_order(self) -> list[int]:
        """Smaller subtree first; equal sizes go by smallest leaf."""
        if not self.merges:
            return list(range(self.n))
        low, size = self._min_leaf(), self._sizes()
        out: list[int] = []
        stack = [self.n + len(self.merges) - 1]
        while stack:
            node = stack.pop()
            if node < self.n:
                out.append(node)
                continue
            a, b, _, _ = self.merges[node - self.n]
            first, second = sorted((a, b), key=lambda c: (size[c], low[c]))
            stack.extend([second, first])
        return out

    def height(self, node: int) -> float:
        return 0.0 if node < self.n else self.merges[node - self.n][2]

    def to_newick(self) -> str:
        if not self.merges:
            return f"{_newick_label(self.labels[0])};" if self.n == 1 else ""
        low, size = self._min_leaf(), self._sizes()

        def rec(node: int) -> str:
            if node < self.n:
                return _newick_label(self.labels[node])
            a, b, h, _ = self.merges[node - self.n]
            parts = []
            for c in sorted((a, b), key=lambda c: (size[c], low[c])):
                parts.append(f"{rec(c)}:{h - self.height(c):.10g}")
            return "(" + ",".join(parts) + ")"

        return rec(self.n + len(self.merges) - 1) + ";"

    def write_merges_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "child_a", "child_b", "height", "size"])
            for i, (a, b, h, s) in enumerate(self.merges):
                w.writerow([i, a, b, repr(float(h)), s])


def _newick_label(x) -> str:
    s = str(x)
    if re.search(r"[\s(),:;\[\]']", s):
        return "'" + s.replace("'", "''") + "'"
    return s


def hierarchical_cluster(
    t: FeatureTable | np.ndarray,
    linkage: str = "average",
    metric: str = "euclidean",
    labels: Sequence | None = None,
) -> Dendrogram:
    """Agglomerative clustering with Lance-Williams updates.

    ``t`` is a feature table or a precomputed square distance matrix.
    Ties in merge height go to the pair with the smallest leaves.
    """
    if linkage not in LINKAGES:
        raise DataError(f"unknown linkage {linkage!r}")
    if isinstance(t, FeatureTable):
        dist = pairwise_distances(t, metric)
        labels = t.rows
    else:
        dist = np.asarray(t, dtype=np.float64)
        labels = list(labels) if labels is not None else list(range(dist.shape[0]))
    n = dist.shape[0]
    if n < 2:
        raise DataError("hierarchical clustering needs at least 2 rows")

    active = {i: (1, i) for i in range(n)}  # id -> (size, smallest leaf)
    D = {(i, j): float(dist[i, j]) for i in range(n) for j in range(i + 1, n)}

    def key(a, b):
        return (a, b) if a < b else (b, a)

    merges = []
    for step in range(n - 1):
        best = None
        for (a, b), h in D.items():
            la, lb = active[a][1], active[b][1]
            cand = (h, min(la, lb), max(la, lb))
            if best is None or cand < best[0]:
                best = (cand, a, b)
        (h, _, _), a, b = best
        if active[a][1] > active[b][1]:
            a, b = b, a
        na, nb = active[a][0], active[b][0]
        new = n + step
        merges.append((a, b, h, na + nb))
        others = [c for c in active if c not in (a, b)]
        for c in others:
            da, db = D.pop(key(a, c)), D.pop(key(b, c))
            if linkage == "single":
                dn = min(da, db)
            elif linkage == "complete":
                dn = max(da, db)
            else:
                dn = (na * da + nb * db) / (na + nb)
            D[key(new, c)] = dn
        del D[key(a, b)]
        active[new] = (na + nb, min(active[a][1], active[b][1]))
        del active[a], active[b]
    return Dendrogram(merges, list(labels))


def write_heatmap_json(t: FeatureTable, dend: Dendrogram, path: str | Path) -> None:
    doc = t.heatmap(dend.leaf_order())
    doc["newick"] = dend.to_newick()
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def betti_feature_rows(
    m: ExpressionMatrix,
    group_by: GroupBy = "cell_type",
    m_points: int = 50,
    embed: str = "PCA",
    embed_dim: int = 2,
    seed: int = 0,
    homology_max_dim: int = 1,
    steps: int = 100,
) -> dict[object, dict[str, float]]:
    """Betti-curve features per group from one bootstrap draw."""
    sample = bootstrap_sample(m, group_by, m_points, derive_seed(seed, 0, 0))
    labels = sample.labels(group_by)
    rows = {}
    for g in m.groups(group_by):
        sub = sample.subset(np.flatnonzero(labels == g))
        d, emb = group_distances(sub, embed, embed_dim)
        if emb is not None:
            d = euclidean_distances(emb)
        fp = FiltrationParams(steps=steps)
        bc = barcode(d, fp, homology_max_dim, sub.timestamps)
        rows[g] = betti_features(betti_curve(bc, default_grid(d, steps)))
    return rows
