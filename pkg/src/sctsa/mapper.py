"""Temporal Mapper: overlapping hypercube cover, time-constrained single
linkage inside each cube, and a nerve whose edges respect the time-delay
limit."""

from __future__ import annotations

import csv
import itertools
import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx
import numpy as np

from sctsa.data import DistanceMatrix
from sctsa.embed import Embedding, euclidean_distances
from sctsa.errors import ConfigError

INF = math.inf


@dataclass
class Cover:
    """Per lens dimension, ``R`` closed intervals overlapping by fraction ``g``."""

    intervals: list[np.ndarray]
    R: int
    g: float

    @property
    def n_cubes(self) -> int:
        return int(np.prod([len(iv) for iv in self.intervals]))

    def memberships(self, lens: np.ndarray) -> dict[tuple[int, ...], np.ndarray]:
        """Map each nonempty cube id to the sorted indices of its points."""
        lens = np.asarray(lens, dtype=np.float64)
        if lens.ndim == 1:
            lens = lens[:, None]
        per_dim = []
        for j, iv in enumerate(self.intervals):
            x = lens[:, j]
            per_dim.append((x[:, None] >= iv[None, :, 0]) & (x[:, None] <= iv[None, :, 1]))
        cubes: dict[tuple[int, ...], list[int]] = defaultdict(list)
        for i in range(lens.shape[0]):
            hits = [np.flatnonzero(mask[i]) for mask in per_dim]
            for cube in itertools.product(*hits):
                cubes[tuple(int(c) for c in cube)].append(i)
        return {c: np.asarray(cubes[c], dtype=np.int64) for c in sorted(cubes)}


def build_cover(lens: Embedding | np.ndarray, R: int = 10, g: float = 0.5) -> Cover:
    """Interval length ``L = range / (R - (R-1) g)``, stride ``L (1 - g)``."""
    if R < 1:
        raise ConfigError("R must be >= 1")
    if not 0 < g < 1:
        raise ConfigError("overlap g must lie in (0, 1)")
    coords = lens.coords if isinstance(lens, Embedding) else np.asarray(lens, dtype=np.float64)
    if coords.ndim == 1:
        coords = coords[:, None]
    intervals = []
    for j in range(coords.shape[1]):
        lo, hi = float(coords[:, j].min()), float(coords[:, j].max())
        if hi == lo:
            intervals.append(np.array([[lo, hi]]))
            continue
        length = (hi - lo) / (R - (R - 1) * g)
        starts = lo + np.arange(R) * length * (1 - g)
        iv = np.column_stack([starts, starts + length])
        iv[0, 0], iv[-1, 1] = lo, hi
        intervals.append(iv)
    return Cover(intervals, R, g)


def _constrained_merges(d: np.ndarray, t: np.ndarray, tau: float):
    """Kruskal-style single linkage that refuses merges whose union spans more than ``tau``.

    Returns the accepted merges as ``(height, i, j)`` in merge order.
    """
    n = d.shape[0]
    parent = list(range(n))
    lo = t.astype(np.int64).tolist()
    hi = list(lo)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    iu, ju = np.triu_indices(n, 1)
    w = d[iu, ju]
    order = np.lexsort((ju, iu, w))
    merges = []
    for e in order:
        a, b = find(iu[e]), find(ju[e])
        if a == b:
            continue
        span_lo, span_hi = min(lo[a], lo[b]), max(hi[a], hi[b])
        if span_hi - span_lo > tau:
            continue
        parent[b] = a
        lo[a], hi[a] = span_lo, span_hi
        merges.append((float(w[e]), int(iu[e]), int(ju[e])))
        if len(merges) == n - 1:
            break
    return merges


def histogram_gap_cut(heights, bins: int = 10) -> float:
    """Height below which merges are kept: left edge of the first empty bin."""
    heights = np.asarray(heights, dtype=np.float64)
    if heights.size == 0 or heights.max() == heights.min():
        return INF
    counts, edges = np.histogram(heights, bins=bins, range=(heights.min(), heights.max()))
    empty = np.flatnonzero(counts == 0)
    return float(edges[empty[0]]) if empty.size else INF


def cluster_cube(
    points,
    d: DistanceMatrix | np.ndarray,
    timestamps,
    tau: float = INF,
    bins: int = 10,
    threshold: float | None = None,
) -> list[np.ndarray]:
    """Time-constrained single linkage on ``points``, cut by the histogram-gap rule.

    ``threshold`` replaces the histogram rule with a fixed cut (merges at
    heights <= threshold are kept).  Clusters are returned as global point
    indices, ordered by their smallest member.
    """
    pts = np.asarray(points, dtype=np.int64)
    if pts.size == 0:
        raise ConfigError("cluster_cube needs at least one point")
    raw = d.d if isinstance(d, DistanceMatrix) else np.asarray(d, dtype=np.float64)
    sub = raw[np.ix_(pts, pts)]
    t = np.asarray(timestamps)[pts]
    merges = _constrained_merges(sub, t, tau)
    if threshold is not None:
        keep = [m for m in merges if m[0] <= threshold]
    else:
        cut = histogram_gap_cut([m[0] for m in merges], bins)
        keep = [m for m in merges if m[0] < cut]

    parent = list(range(len(pts)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for _, i, j in keep:
        parent[find(j)] = find(i)
    groups: dict[int, list[int]] = defaultdict(list)
    for i in range(len(pts)):
        groups[find(i)].append(int(pts[i]))
    return sorted((np.asarray(sorted(v), dtype=np.int64) for v in groups.values()), key=lambda a: a[0])


@dataclass
class MapperNode:
    id: str
    cube: tuple[int, ...]
    rank: int
    members: np.ndarray
    t_min: int
    t_max: int

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def span(self) -> int:
        return self.t_max - self.t_min


@dataclass
class MapperGraph:
    nodes: list[MapperNode]
    edges: list[tuple[int, int, int]]
    tau: float = INF
    layout: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def to_networkx(self) -> nx.Graph:
        G = nx.Graph()
        for i, node in enumerate(self.nodes):
            G.add_node(i, id=node.id, size=node.size, t_min=node.t_min, t_max=node.t_max)
        for u, v, w in self.edges:
            G.add_edge(u, v, shared=w)
        return G

    def modal_timestamp(self, node: MapperNode, timestamps) -> int:
        counts = Counter(np.asarray(timestamps)[node.members].tolist())
        return min(counts, key=lambda k: (-counts[k], k))

    def to_json(self, timestamps=None, cell_ids=None) -> dict:
        nodes = []
        for i, node in enumerate(self.nodes):
            rec = {
                "id": node.id,
                "cube": list(node.cube),
                "size": node.size,
                "t_min": node.t_min,
                "t_max": node.t_max,
                "members": [str(cell_ids[m]) for m in node.members] if cell_ids is not None
                else node.members.tolist(),
            }
            if timestamps is not None:
                rec["t_mode"] = self.modal_timestamp(node, timestamps)
            if self.layout is not None:
                rec["x"], rec["y"] = float(self.layout[i, 0]), float(self.layout[i, 1])
            nodes.append(rec)
        links = [
            {"source": self.nodes[u].id, "target": self.nodes[v].id, "shared": w} for u, v, w in self.edges
        ]
        return {
            "schema": "sctsa.mapper-graph/1",
            "tau": None if self.tau == INF else self.tau,
            "meta": self.meta,
            "nodes": nodes,
            "links": links,
        }

    def write_json(self, path: str | Path, timestamps=None, cell_ids=None) -> None:
        doc = self.to_json(timestamps, cell_ids)
        Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def write_dot(self, path: str | Path, timestamps, n_times: int | None = None) -> None:
        n_times = n_times or (int(np.max(timestamps)) + 1)
        lines = ["graph mapper {", '  node [style=filled, colorscheme=spectral11];']
        for node in self.nodes:
            mode = self.modal_timestamp(node, timestamps)
            color = 1 + int(round(10 * mode / max(n_times - 1, 1)))
            lines.append(f'  "{node.id}" [label="{node.size}", fillcolor={color}, t_mode={mode}];')
        for u, v, w in self.edges:
            lines.append(f'  "{self.nodes[u].id}" -- "{self.nodes[v].id}" [weight={w}];')
        lines.append("}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    def write_csv(self, nodes_path: str | Path, edges_path: str | Path) -> None:
        with open(nodes_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["id", "cube", "size", "t_min", "t_max", "x", "y"])
            for i, node in enumerate(self.nodes):
                xy = ["", ""] if self.layout is None else [repr(float(c)) for c in self.layout[i]]
                w.writerow([node.id, "-".join(map(str, node.cube)), node.size, node.t_min, node.t_max, *xy])
        with open(edges_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["source", "target", "shared"])
            for u, v, s in self.edges:
                w.writerow([self.nodes[u].id, self.nodes[v].id, s])


def make_nodes(clusters_by_cube: dict[tuple[int, ...], list[np.ndarray]], timestamps) -> list[MapperNode]:
    t = np.asarray(timestamps)
    nodes = []
    for cube in sorted(clusters_by_cube):
        for rank, members in enumerate(clusters_by_cube[cube]):
            span = t[members]
            nodes.append(
                MapperNode(
                    id="c" + "_".join(map(str, cube)) + f"k{rank}",
                    cube=cube,
                    rank=rank,
                    members=members,
                    t_min=int(span.min()),
                    t_max=int(span.max()),
                )
            )
    return nodes


def assemble_graph(nodes: list[MapperNode], tau: float = INF) -> MapperGraph:
    """Edge iff the clusters share a point and their union spans at most ``tau``."""
    by_point: dict[int, list[int]] = defaultdict(list)
    for i, node in enumerate(nodes):
        for p in node.members.tolist():
            by_point[p].append(i)
    shared: Counter = Counter()
    for owners in by_point.values():
        for u, v in itertools.combinations(owners, 2):
            shared[(u, v)] += 1
    edges = []
    for (u, v), w in sorted(shared.items()):
        span = max(nodes[u].t_max, nodes[v].t_max) - min(nodes[u].t_min, nodes[v].t_min)
        if span <= tau:
            edges.append((u, v, w))
    return MapperGraph(nodes, edges, tau)


def layout_graph(g: MapperGraph, seed: int = 0, iterations: int = 200, rest_length: float = 1.0) -> np.ndarray:
    """Fruchterman-Reingold positions with a seeded start; a lone node sits at the origin."""
    n = len(g.nodes)
    if n == 0:
        return np.zeros((0, 2))
    if n == 1:
        return np.zeros((1, 2))
    pos = nx.spring_layout(
        g.to_networkx(), k=rest_length, iterations=iterations, seed=seed, scale=None, weight=None
    )
    return np.array([pos[i] for i in range(n)], dtype=np.float64)


def mapper(
    lens: Embedding | np.ndarray,
    timestamps,
    d: DistanceMatrix | None = None,
    R: int = 10,
    g: float = 0.5,
    tau: float = INF,
    bins: int = 10,
    threshold: float | None = None,
    seed: int | None = 0,
) -> MapperGraph:
    """Cover the lens, cluster each cube, assemble the nerve and lay it out.

    Within-cube distances default to Euclidean distances in the lens.
    ``seed=None`` skips the layout.
    """
    coords = lens.coords if isinstance(lens, Embedding) else np.asarray(lens, dtype=np.float64)
    if d is None:
        d = euclidean_distances(coords)
    cover = build_cover(coords, R, g)
    clusters = {
        cube: cluster_cube(pts, d, timestamps, tau, bins, threshold)
        for cube, pts in cover.memberships(coords).items()
    }
    graph = assemble_graph(make_nodes(clusters, timestamps), tau)
    graph.meta = {"R": R, "g": g, "bins": bins, "n_points": int(coords.shape[0])}
    if seed is not None:
        graph.layout = layout_graph(graph, seed)
    return graph
