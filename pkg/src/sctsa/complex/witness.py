"""Maxmin landmarks and lazy witness filtrations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sctsa.complex.rips import INF, FiltrationParams, SimplexCountCurve, curve_from_births
from sctsa.data import DistanceMatrix
from sctsa.errors import ConfigError


@dataclass
class LandmarkSet:
    """Landmark indices in selection order.

    ``radii[i]`` is the distance from landmark ``i`` to the ones chosen before
    it (``inf`` for the first).  ``m_nu[x]`` is the distance from point ``x`` to
    its ``nu``-th nearest landmark, zero when ``nu == 0``.
    """

    indices: np.ndarray
    nu: int
    m_nu: np.ndarray
    radii: np.ndarray


def nu_distances(d: np.ndarray, indices: np.ndarray, nu: int) -> np.ndarray:
    if nu < 0:
        raise ConfigError("nu must be >= 0")
    if nu == 0:
        return np.zeros(d.shape[0])
    if nu > len(indices):
        raise ConfigError(f"nu={nu} exceeds the number of landmarks ({len(indices)})")
    to_landmarks = np.sort(d[:, indices], axis=1)
    return to_landmarks[:, nu - 1].copy()


def maxmin_landmarks(
    d: DistanceMatrix,
    m: int,
    seed: int | None = 0,
    nu: int = 2,
    first: int | None = None,
) -> LandmarkSet:
    """Sequential maxmin selection; ties go to the lowest index.

    The first landmark is drawn uniformly with ``seed`` unless ``first`` is
    given.
    """
    n = d.n
    if not 1 <= m <= n:
        raise ConfigError(f"landmark count m={m} must lie in [1, {n}]")
    if first is None:
        first = int(np.random.default_rng(seed).integers(n))
    chosen = [first]
    radii = [INF]
    mind = d.d[first].copy()
    mind[first] = -INF
    for _ in range(m - 1):
        nxt = int(np.argmax(mind))
        chosen.append(nxt)
        radii.append(float(mind[nxt]))
        mind = np.minimum(mind, d.d[nxt])
        mind[chosen] = -INF
    idx = np.asarray(chosen, dtype=np.int64)
    return LandmarkSet(idx, nu, nu_distances(d.d, idx, nu), np.asarray(radii))


def witness_edge_births(d: DistanceMatrix, lm: LandmarkSet, timestamps=None, tau: float = INF) -> np.ndarray:
    """Birth of landmark edge ``(a, b)``: ``max(0, min_x max(d(a,x), d(b,x)) - m_nu(x))``.

    Every data point, landmarks included, is a potential witness.
    """
    to_lm = d.d[lm.indices]
    m = len(lm.indices)
    birth = np.zeros((m, m))
    for a in range(m):
        slack = np.maximum(to_lm[a][None, :], to_lm) - lm.m_nu[None, :]
        birth[a] = np.maximum(slack.min(axis=1), 0.0)
    if timestamps is not None and tau != INF:
        t = np.asarray(timestamps, dtype=np.int64)[lm.indices]
        birth[np.abs(t[:, None] - t[None, :]) > tau] = INF
    np.fill_diagonal(birth, 0.0)
    return birth


def lazy_witness_curve(
    d: DistanceMatrix,
    lm: LandmarkSet,
    fp: FiltrationParams,
    timestamps=None,
) -> SimplexCountCurve:
    """Simplex counts of the lazy witness flag filtration on the landmarks."""
    births = witness_edge_births(d, lm, timestamps, fp.tau)
    curve = curve_from_births(births, fp.resolve(d), fp.max_dim, fp.tau)
    curve.meta.update(landmarks=lm.indices.tolist(), nu=lm.nu)
    return curve
