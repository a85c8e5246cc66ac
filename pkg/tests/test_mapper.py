import json

import networkx as nx
import numpy as np
import pytest
from scipy.cluster.hierarchy import linkage
from scipy.sparse.csgraph import connected_components

from oracles import interval_cover_scan
from sctsa.data import correlation_distance
from sctsa.embed import classical_mds, euclidean_distances
from sctsa.mapper import (
    INF,
    MapperNode,
    assemble_graph,
    build_cover,
    cluster_cube,
    histogram_gap_cut,
    layout_graph,
    make_nodes,
    mapper,
)


def test_single_interval_cover(rng):
    lens = rng.normal(size=(30, 2))
    cov = build_cover(lens, R=1)
    mem = cov.memberships(lens)
    assert list(mem) == [(0, 0)] and mem[(0, 0)].tolist() == list(range(30))


def test_two_interval_construction():
    lens = np.array([[0.0], [0.5], [1.0]])
    iv = build_cover(lens, R=2, g=0.5).intervals[0]
    length = 1 / (2 - 0.5)
    assert iv[0].tolist() == [0.0, pytest.approx(length)]
    assert iv[1][1] == 1.0 and iv[1][0] == pytest.approx(length / 2)
    assert iv[0][1] - iv[1][0] == pytest.approx(0.5 * length)
    mem = build_cover(lens, R=2, g=0.5).memberships(lens)
    assert 1 in mem[(0,)] and 1 in mem[(1,)]


def test_degenerate_dimension():
    lens = np.column_stack([np.linspace(0, 1, 10), np.zeros(10)])
    cov = build_cover(lens, R=4)
    assert len(cov.intervals[1]) == 1


def test_cover_matches_interval_scan(rng):
    lens = rng.normal(size=(200, 2))
    mem = build_cover(lens, 10, 0.5).memberships(lens)
    oracle = interval_cover_scan(lens, 10, 0.5)
    assert {k: v.tolist() for k, v in mem.items()} == oracle


def test_equal_distances_one_cluster():
    d = np.ones((6, 6)) - np.eye(6)
    (c,) = cluster_cube(np.arange(6), d, np.zeros(6))
    assert c.tolist() == list(range(6))


def test_tau_zero_time_pure(rng):
    x = rng.normal(size=(20, 2))
    t = np.repeat([0, 1], 10)
    clusters = cluster_cube(np.arange(20), euclidean_distances(x), t, tau=0)
    assert len(clusters) >= 2
    assert all(len(set(t[c])) == 1 for c in clusters)


def _scipy_clusters(pts, d):
    if len(pts) == 1:
        return [frozenset([int(pts[0])])]
    sub = d[np.ix_(pts, pts)]
    iu = np.triu_indices(len(pts), 1)
    heights = linkage(sub[iu], "single")[:, 2]
    cut = histogram_gap_cut(heights)
    _, lab = connected_components((sub < cut) & ~np.eye(len(pts), dtype=bool), directed=False)
    return sorted(frozenset(int(pts[i]) for i in np.flatnonzero(lab == k)) for k in set(lab.tolist()))


def test_two_blobs_match_linkage_oracle(rng):
    x = np.vstack([rng.normal(size=(25, 2)), rng.normal(size=(25, 2)) + [10, 0]])
    d = euclidean_distances(x).d
    got = cluster_cube(np.arange(50), d, np.zeros(50))
    assert len(got) == 2
    assert sorted(frozenset(c.tolist()) for c in got) == _scipy_clusters(np.arange(50), d)


def test_edge_rule_union_span():
    a = MapperNode("a", (0,), 0, np.array([0, 1]), 1, 1)
    b = MapperNode("b", (1,), 0, np.array([1, 2]), 3, 3)
    assert assemble_graph([a, b], tau=1).edges == []
    assert assemble_graph([a, b], tau=INF).edges == [(0, 1, 1)]


def classical_nerve(lens, d, R, g):
    cov = build_cover(lens, R, g)
    nodes = set()
    for cube, pts in cov.memberships(lens).items():
        nodes |= {(cube, c) for c in _scipy_clusters(pts, d)}
    edges = {frozenset((a, b)) for a in nodes for b in nodes if a != b and a[1] & b[1]}
    return nodes, edges


def test_tau_inf_is_classical_nerve(small_bundled):
    lens = classical_mds(correlation_distance(small_bundled), 2)
    g = mapper(lens, small_bundled.timestamps, R=6, seed=None)
    d = euclidean_distances(lens).d
    nodes, edges = classical_nerve(lens.coords, d, 6, 0.5)
    key = [(n.cube, frozenset(n.members.tolist())) for n in g.nodes]
    assert set(key) == nodes and len(key) == len(nodes)
    assert {frozenset((key[u], key[v])) for u, v, _ in g.edges} == edges


def test_graph_equals_oracle_from_exported_clusters(small_bundled, tmp_path):
    lens = classical_mds(correlation_distance(small_bundled), 2)
    t = small_bundled.timestamps
    g = mapper(lens, t, R=8, tau=1, seed=0)
    g.write_json(tmp_path / "g.json", t)
    doc = json.loads((tmp_path / "g.json").read_text())
    members = {n["id"]: set(n["members"]) for n in doc["nodes"]}
    want = set()
    for a in members:
        for b in members:
            if a < b and members[a] & members[b]:
                span = t[list(members[a] | members[b])]
                if span.max() - span.min() <= 1:
                    want.add((a, b))
    got = {tuple(sorted((e["source"], e["target"]))) for e in doc["links"]}
    assert got == want


def test_invariants_on_bundled_subsample(small_bundled):
    lens = classical_mds(correlation_distance(small_bundled), 2)
    t = small_bundled.timestamps
    for tau in (0, 1, 2, INF):
        g = mapper(lens, t, R=8, tau=tau, seed=None)
        covered = set()
        by_cube = {}
        for n in g.nodes:
            assert n.span <= tau
            covered |= set(n.members.tolist())
            by_cube.setdefault(n.cube, []).extend(n.members.tolist())
        assert covered == set(range(len(t)))
        cube_pts = build_cover(lens, 8, 0.5).memberships(lens.coords)
        for cube, pts in by_cube.items():
            assert sorted(pts) == cube_pts[cube].tolist()
        for u, v, _ in g.edges:
            a, b = g.nodes[u], g.nodes[v]
            assert max(a.t_max, b.t_max) - min(a.t_min, b.t_min) <= tau


def test_edge_monotonicity_with_fixed_clusters(small_bundled):
    lens = classical_mds(correlation_distance(small_bundled), 2)
    t = small_bundled.timestamps
    d = euclidean_distances(lens)
    clusters = {cube: cluster_cube(pts, d, t) for cube, pts in build_cover(lens, 8, 0.5).memberships(lens.coords).items()}
    nodes = make_nodes(clusters, t)
    prev = None
    for tau in (INF, 3, 2, 1, 0):
        edges = {(u, v) for u, v, _ in assemble_graph(nodes, tau).edges}
        if prev is not None:
            assert edges <= prev
        prev = edges


def test_layout():
    one = assemble_graph([MapperNode("a", (0,), 0, np.array([0]), 0, 0)])
    assert layout_graph(one).tolist() == [[0.0, 0.0]]
    a = MapperNode("a", (0,), 0, np.array([0, 1]), 0, 0)
    b = MapperNode("b", (1,), 0, np.array([1, 2]), 0, 0)
    g = assemble_graph([a, b])
    pos = layout_graph(g, seed=3)
    dist = float(np.linalg.norm(pos[0] - pos[1]))
    assert 0.5 <= dist <= 2.0
    assert np.array_equal(pos, layout_graph(g, seed=3))


def test_exports(tmp_path, small_bundled):
    lens = classical_mds(correlation_distance(small_bundled), 2)
    t = small_bundled.timestamps
    g = mapper(lens, t, R=5, tau=1, seed=0)
    g.write_json(tmp_path / "g.json", t, small_bundled.cell_ids)
    g.write_dot(tmp_path / "g.dot", t)
    g.write_csv(tmp_path / "n.csv", tmp_path / "e.csv")
    doc = json.loads((tmp_path / "g.json").read_text())
    assert doc["schema"] == "sctsa.mapper-graph/1" and doc["tau"] == 1
    assert all("x" in n and "t_mode" in n for n in doc["nodes"])
    G = nx.Graph()
    G.add_edges_from((e["source"], e["target"]) for e in doc["links"])
    assert G.number_of_edges() == len(g.edges)
    assert (tmp_path / "g.dot").read_text().startswith("graph mapper {")
    assert len((tmp_path / "n.csv").read_text().splitlines()) == len(g.nodes) + 1
