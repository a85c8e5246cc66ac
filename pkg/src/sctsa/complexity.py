"""Permuted-distance null models and normalized n-simplicial complexity."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from sctsa.complex.rips import FiltrationParams, SimplexCountCurve, simplex_count_curve
from sctsa.data import DistanceMatrix, ExpressionMatrix, GroupBy, bootstrap_sample, correlation_distance
from sctsa.embed import Embedding, classical_mds, euclidean_distances, pca
from sctsa.errors import ConfigError

Permuter = Callable[[DistanceMatrix, int], DistanceMatrix]


def derive_seed(master: int, *keys: int) -> int:
    """Counter-based child seed; independent of the order children are drawn."""
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def permute_distances(d: DistanceMatrix, seed: int) -> DistanceMatrix:
    """Shuffle the upper-triangle entries uniformly and mirror them."""
    upper = d.upper()
    rng = np.random.default_rng(seed)
    return DistanceMatrix.from_upper(d.n, upper[rng.permutation(len(upper))])


@dataclass
class NullEnsemble:
    """Cumulative simplex counts of ``B`` permuted replicates, shape ``(B, max_dim+1)``."""

    counts: np.ndarray
    seed: int
    replicate_seeds: list[int] = field(default_factory=list)

    @property
    def B(self) -> int:
        return self.counts.shape[0]

    @property
    def mean(self) -> np.ndarray:
        return self.counts.mean(axis=0)

    @property
    def std(self) -> np.ndarray:
        return self.counts.std(axis=0)


def _filtrate(d: DistanceMatrix, timestamps, fp: FiltrationParams, embed_dim: int | None) -> SimplexCountCurve:
    if embed_dim:
        d = euclidean_distances(classical_mds(d, embed_dim))
    return simplex_count_curve(d, fp, timestamps)


def null_ensemble(
    d: DistanceMatrix,
    timestamps,
    fp: FiltrationParams,
    embed_dim: int | None = 2,
    B: int = 20,
    seed: int = 0,
    permute: Permuter = permute_distances,
) -> NullEnsemble:
    """Permute, re-embed by classical MDS, filtrate; once per replicate.

    Replicate ``b`` uses ``derive_seed(seed, b)``.  ``embed_dim=None``
    filtrates the permuted matrix itself.
    """
    if B < 1:
        raise ConfigError("B must be >= 1")
    seeds = [derive_seed(seed, b) for b in range(B)]
    rows = [_filtrate(permute(d, s), timestamps, fp, embed_dim).cumulative for s in seeds]
    return NullEnsemble(np.vstack(rows).astype(np.int64), seed, seeds)


@dataclass
class ComplexityProfile:
    """SC_n for ``n = 1..max_dim``; ``nan`` marks an undefined ratio (null mean 0)."""

    group: object
    sc: np.ndarray
    data_counts: np.ndarray
    null_mean: np.ndarray
    null_std: np.ndarray
    m: int | None = None
    seed: int | None = None
    repeat: int = 0
    null_counts: np.ndarray | None = None
    data_curve: SimplexCountCurve | None = None

    @property
    def dims(self) -> list[int]:
        return list(range(1, len(self.sc) + 1))

    def value(self, n: int) -> float | None:
        v = self.sc[n - 1]
        return None if math.isnan(v) else float(v)


def normalized_complexity(
    data_counts: Sequence[int],
    ens: NullEnsemble,
    group=None,
    m: int | None = None,
) -> ComplexityProfile:
    """``data_counts[n] / mean(null_counts[n])`` for ``n >= 1``."""
    data = np.asarray(data_counts, dtype=np.int64)
    if data.shape[0] != ens.counts.shape[1]:
        raise ConfigError("data and null counts cover different dimensions")
    mean, std = ens.mean, ens.std
    sc = np.full(len(data) - 1, np.nan)
    ok = mean[1:] > 0
    sc[ok] = data[1:][ok] / mean[1:][ok]
    return ComplexityProfile(
        group=group,
        sc=sc,
        data_counts=data[1:],
        null_mean=mean[1:],
        null_std=std[1:],
        m=m,
        seed=ens.seed,
        null_counts=ens.counts[:, 1:],
    )


def complexity_from_distances(
    d: DistanceMatrix,
    timestamps,
    fp: FiltrationParams,
    embed_dim: int | None = 2,
    B: int = 20,
    seed: int = 0,
    group=None,
    data_embedding: Embedding | None = None,
    permute: Permuter = permute_distances,
) -> ComplexityProfile:
    """One group's profile.

    The data side filtrates ``data_embedding`` when given, otherwise the MDS
    embedding of ``d`` (or ``d`` itself when ``embed_dim`` is None).
    """
    if data_embedding is not None:
        curve = simplex_count_curve(euclidean_distances(data_embedding), fp, timestamps)
    else:
        curve = _filtrate(d, timestamps, fp, embed_dim)
    ens = null_ensemble(d, timestamps, fp, embed_dim, B, seed, permute)
    prof = normalized_complexity(curve.cumulative, ens, group, d.n)
    prof.data_curve = curve
    return prof


def group_distances(sub: ExpressionMatrix, embed: str, embed_dim: int, distance: str = "correlation"):
    """Pre-embedding distance matrix and data embedding for one group.

    PCA scores coincide with classical MDS of Euclidean expression distances,
    so that matrix is what the PCA path permutes for its nulls.
    """
    embed = embed.upper()
    if embed == "PCA":
        d = euclidean_distances(sub.values)
        return d, pca(sub, embed_dim)
    if distance == "euclidean":
        d = euclidean_distances(sub.values)
    else:
        d = correlation_distance(sub, method=distance if distance in ("pearson", "spearman") else "pearson")
    if embed == "MDS":
        return d, classical_mds(d, embed_dim)
    if embed == "NONE":
        return d, None
    raise ConfigError(f"unknown embedding {embed!r}")


def _group_task(args):
    sub, group, fp, embed, embed_dim, B, seed, distance, repeat = args
    d, emb = group_distances(sub, embed, embed_dim, distance)
    prof = complexity_from_distances(
        d,
        sub.timestamps,
        fp,
        embed_dim if embed.upper() != "NONE" else None,
        B,
        seed,
        group,
        data_embedding=emb,
    )
    prof.repeat = repeat
    return prof, sub.cell_ids.tolist()


def complexity_by_group(
    m: ExpressionMatrix,
    group_by: GroupBy = "timestamp",
    m_points: int = 100,
    fp: FiltrationParams | None = None,
    embed: str = "MDS",
    embed_dim: int = 2,
    B: int = 20,
    seed: int = 0,
    repeats: int = 1,
    distance: str = "correlation",
    threads: int = 1,
    return_samples: bool = False,
    replace: bool = False,
):
    """Bootstrap each group, embed, filtrate and normalise against nulls.

    Profiles come back ordered by (repeat, group).  Bootstrap draw ``r``
    uses ``derive_seed(seed, 0, r)``; group ``g`` of draw ``r`` seeds its
    nulls with ``derive_seed(seed, 1, g, r)``.
    """
    fp = fp or FiltrationParams()
    groups = m.groups(group_by)
    tasks = []
    for r in range(repeats):
        sample = bootstrap_sample(m, group_by, m_points, derive_seed(seed, 0, r), replace)
        labels = sample.labels(group_by)
        for gi, g in enumerate(groups):
            sub = sample.subset(np.flatnonzero(labels == g))
            tasks.append((sub, g, fp, embed, embed_dim, B, derive_seed(seed, 1, gi, r), distance, r))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_group_task, tasks))
    else:
        results = [_group_task(t) for t in tasks]
    profiles = [p for p, _ in results]
    if return_samples:
        return profiles, [ids for _, ids in results]
    return profiles


def trajectory_table(profiles: Sequence[ComplexityProfile], x_dim: int = 1, y_dim: int = 3) -> list[dict]:
    """Per-group centroid of (SC_x, SC_y) across bootstrap repeats, in first-seen group order."""
    order: list = []
    pts: dict = {}
    for p in profiles:
        if p.group not in pts:
            order.append(p.group)
            pts[p.group] = []
        pts[p.group].append((p.sc[x_dim - 1], p.sc[y_dim - 1]))
    rows = []
    for g in order:
        arr = np.asarray(pts[g], dtype=np.float64)
        rows.append(
            {
                "group": g,
                f"sc{x_dim}": float(np.nanmean(arr[:, 0])) if np.isfinite(arr[:, 0]).any() else None,
                f"sc{y_dim}": float(np.nanmean(arr[:, 1])) if np.isfinite(arr[:, 1]).any() else None,
                "n": len(arr),
            }
        )
    return rows


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


def write_profiles_csv(profiles: Sequence[ComplexityProfile], path: str | Path) -> None:
    """Tidy table; an undefined SC is an empty field."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["group", "repeat", "dim", "sc", "data_count", "null_mean", "null_std", "m", "seed"])
        for p in profiles:
            for i, n in enumerate(p.dims):
                w.writerow(
                    [p.group, p.repeat, n, _fmt(p.sc[i]), int(p.data_counts[i]),
                     _fmt(p.null_mean[i]), _fmt(p.null_std[i]), p.m, p.seed]
                )


def read_profiles_csv(path: str | Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_null_counts_csv(profiles: Sequence[ComplexityProfile], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["group", "repeat", "replicate", "dim", "count"])
        for p in profiles:
            for b, row in enumerate(p.null_counts):
                for i, n in enumerate(p.dims):
                    w.writerow([p.group, p.repeat, b, n, int(row[i])])


def heatmap_matrix(profiles: Sequence[ComplexityProfile]) -> dict:
    """Groups x dims matrix of SC means over repeats; ``None`` where undefined."""
    groups: list = []
    acc: dict = {}
    for p in profiles:
        if p.group not in acc:
            groups.append(p.group)
            acc[p.group] = []
        acc[p.group].append(p.sc)
    dims = profiles[0].dims if profiles else []
    values = []
    for g in groups:
        arr = np.vstack(acc[g])
        row = []
        for j in range(arr.shape[1]):
            col = arr[:, j][np.isfinite(arr[:, j])]
            row.append(float(col.mean()) if col.size else None)
        values.append(row)
    return {
        "schema": "sctsa.complexity-heatmap/1",
        "groups": [g if isinstance(g, str) else int(g) for g in groups],
        "dims": dims,
        "values": values,
    }


def write_heatmap_json(profiles: Sequence[ComplexityProfile], path: str | Path) -> None:
    Path(path).write_text(json.dumps(heatmap_matrix(profiles), indent=2, sort_keys=True) + "\n", encoding="utf-8")
