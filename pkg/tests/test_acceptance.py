"""Acceptance criteria 1-11, each at its stated tolerance and time limit.

Every test prints one ``CRITERION k: PASS|FAIL`` line; the lines are also
repeated in the pytest terminal summary.  Run as a script to execute them
all without pytest.
"""

from __future__ import annotations

import math
import sys
import time
from pathlib import Path

import networkx as nx
import numpy as np
from scipy.cluster.hierarchy import linkage
from scipy.sparse.csgraph import connected_components

sys.path.insert(0, str(Path(__file__).parent))

from oracles import (  # noqa: E402
    exhaustive_clique_counts,
    flag_filtration,
    naive_barcode,
    naive_linkage,
    naive_rips_counts,
    witness_scan_births,
)
from sctsa.cli import main as cli_main  # noqa: E402
from sctsa.complex import (  # noqa: E402
    INF,
    FiltrationParams,
    count_cliques,
    maxmin_landmarks,
    lazy_witness_curve,
    simplex_count_curve,
    witness_edge_births,
)
from sctsa.complexity import complexity_by_group, complexity_from_distances, permute_distances  # noqa: E402
from sctsa.data import DistanceMatrix, correlation_distance  # noqa: E402
from sctsa.embed import classical_mds, euclidean_distances  # noqa: E402
from sctsa.homology import (  # noqa: E402
    alternating_betti,
    barcode,
    betti_curve,
    build_filtered_complex,
    euler_characteristic,
    reduce_persistence,
)
from sctsa.lineage import build_feature_table, hierarchical_cluster, pairwise_distances  # noqa: E402
from sctsa.mapper import build_cover, histogram_gap_cut, mapper  # noqa: E402
from sctsa.synth import bifurcating_trajectory  # noqa: E402

RESULTS: dict[int, str] = {}


def report(k: int, ok: bool, detail: str, elapsed: float, limit: float | None) -> None:
    timing = f"{elapsed:.1f}s" + (f" (limit {limit:.0f}s)" if limit else "")
    line = f"CRITERION {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}  [{timing}]"
    RESULTS[k] = line
    print(line)
    assert ok, line


def within(limit, start):
    return time.perf_counter() - start, (time.perf_counter() - start) < limit


# 1 ------------------------------------------------------------------------
def test_criterion_01_clique_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(20240601)
    bad = 0
    for _ in range(200):
        n = int(rng.integers(1, 16))
        a = np.triu(rng.random((n, n)) < rng.uniform(0.1, 0.95), 1)
        adj = a | a.T
        if count_cliques(adj, 7).tolist() != exhaustive_clique_counts(adj, 7).tolist():
            bad += 1
    elapsed, fast = within(60, start)
    report(1, bad == 0 and fast, f"{200 - bad}/200 graphs match the subset oracle", elapsed, 60)


# 2 ------------------------------------------------------------------------
def test_criterion_02_euler_characteristic():
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    mismatches = 0
    thresholds = 0
    for _ in range(50):
        n = int(rng.integers(3, 11))
        d = euclidean_distances(rng.normal(size=(n, 3)))
        curve = simplex_count_curve(d, FiltrationParams(max_dim=n - 1, steps=50))
        fc = build_filtered_complex(d, homology_max_dim=n - 1)
        betti = betti_curve(reduce_persistence(fc), curve.grid, n - 1).betti
        for s in range(len(curve.grid)):
            thresholds += 1
            if euler_characteristic(curve.counts[:, s]) != alternating_betti(betti[:, s]):
                mismatches += 1
    elapsed, fast = within(120, start)
    report(2, mismatches == 0 and fast, f"{thresholds - mismatches}/{thresholds} thresholds consistent", elapsed, 120)


# 3 ------------------------------------------------------------------------
def test_criterion_03_barcode_oracle():
    start = time.perf_counter()
    k = np.abs(np.arange(8)[:, None] - np.arange(8)[None, :])
    circle = DistanceMatrix(2 * np.sin(np.pi * np.minimum(k, 8 - k) / 8))
    h1 = barcode(circle).dim(1)
    oracle = [iv for iv in naive_barcode(flag_filtration(circle.d, 3), 2) if iv[0] == 1]
    circle_ok = (
        len(h1) == 1
        and abs(h1[0][0] - 2 * math.sin(math.pi / 8)) <= 1e-9
        and len(oracle) == 1
        and h1[0][1] == oracle[0][2]
    )
    x = np.arange(5.0)
    h0 = barcode(DistanceMatrix(np.abs(x[:, None] - x[None, :]))).dim(0)
    line_ok = sorted(h0) == [(0.0, 1.0)] * 4 + [(0.0, INF)]
    elapsed, fast = within(5, start)
    detail = f"circle H1={h1}, oracle death={oracle[0][2] if oracle else None}; line H0 deaths={[d for _, d in h0]}"
    report(3, circle_ok and line_ok and fast, detail, elapsed, 5)


# 4 ------------------------------------------------------------------------
def test_criterion_04_temporal_reductions():
    start = time.perf_counter()
    rng = np.random.default_rng(44)
    ok_inf = ok_zero = True
    for _ in range(5):
        n = 10
        x = rng.normal(size=(n, 2))
        t = rng.integers(0, 4, size=n)
        d = euclidean_distances(x)
        timed = simplex_count_curve(d, FiltrationParams(tau=INF, steps=10), t)
        for s, eps in enumerate(timed.grid):
            if timed.counts[:, s].tolist() != naive_rips_counts(d.d, None, eps, INF, 7).tolist():
                ok_inf = False
        zero = simplex_count_curve(d, FiltrationParams(tau=0, steps=10), np.arange(n))
        ok_zero &= bool(zero.counts[1:].sum() == 0) and bool(np.all(zero.counts[0] == n))
        fc = build_filtered_complex(d, FiltrationParams(tau=0), 2, np.arange(n))
        ok_zero &= all(dim == 0 for _, dim, _ in fc.simplices)
    elapsed, fast = within(10, start)
    report(4, ok_inf and ok_zero and fast, f"tau=inf equals plain Rips: {ok_inf}; tau=0 vertices only: {ok_zero}",
           elapsed, 10)


# 5 ------------------------------------------------------------------------
def test_criterion_05_null_calibration():
    start = time.perf_counter()
    n, reps = 20, 50
    rng = np.random.default_rng(555)
    sc = []
    nonzero = np.zeros(7, dtype=bool)
    for r in range(reps):
        d = DistanceMatrix.from_upper(n, rng.random(n * (n - 1) // 2))
        prof = complexity_from_distances(d, None, FiltrationParams(), 2, B=20, seed=1000 + r)
        sc.append(prof.sc)
        nonzero |= prof.null_mean > 0
    sc = np.array(sc)
    worst = []
    ok = True
    for j in np.flatnonzero(nonzero):
        col = sc[:, j][np.isfinite(sc[:, j])]
        mean, se = col.mean(), col.std(ddof=1) / math.sqrt(len(col))
        z = abs(mean - 1) / se if se > 0 else (0.0 if mean == 1 else math.inf)
        worst.append(f"SC_{j + 1}={mean:.3f}({z:.1f}se)")
        ok &= z <= 3
    elapsed, fast = within(600, start)
    report(5, ok and fast, " ".join(worst), elapsed, 600)


# 6 ------------------------------------------------------------------------
def test_criterion_06_permutation_integrity():
    start = time.perf_counter()
    rng = np.random.default_rng(66)
    ok = 0
    for s in range(100):
        n = int(rng.integers(2, 40))
        d = DistanceMatrix.from_upper(n, rng.random(n * (n - 1) // 2))
        p = permute_distances(d, s)
        ok += bool(np.array_equal(np.sort(p.upper()), np.sort(d.upper())))
    elapsed, _ = within(1e9, start)
    report(6, ok == 100, f"{ok}/100 permutations preserve the distance multiset", elapsed, None)


# 7 ------------------------------------------------------------------------
def test_criterion_07_lazy_witness():
    start = time.perf_counter()
    rng = np.random.default_rng(77)
    worst = 0.0
    rips_equal = 0
    for trial in range(20):
        d = euclidean_distances(rng.normal(size=(25, 2)))
        for nu in (0, 1, 2):
            lm = maxmin_landmarks(d, 6, seed=trial, nu=nu)
            got = witness_edge_births(d, lm)
            want = witness_scan_births(d.d, lm.indices.tolist(), nu)
            worst = max(worst, float(np.abs(got - want).max()))
        full = maxmin_landmarks(d, 25, seed=trial, nu=0)
        fp = FiltrationParams(tau=INF)
        lw = lazy_witness_curve(d, full, fp)
        rips = simplex_count_curve(d, fp)
        rips_equal += bool(np.array_equal(lw.counts, rips.counts))
    elapsed, fast = within(30, start)
    ok = worst <= 1e-12 and rips_equal == 20 and fast
    report(7, ok, f"max |birth - oracle| = {worst:.1e}; m=N, nu=0 curve equals Rips in {rips_equal}/20 clouds",
           elapsed, 30)


# 8 ------------------------------------------------------------------------
def _classical_clusters(pts, d):
    if len(pts) == 1:
        return [frozenset([int(pts[0])])]
    sub = d[np.ix_(pts, pts)]
    heights = linkage(sub[np.triu_indices(len(pts), 1)], "single")[:, 2]
    cut = histogram_gap_cut(heights)
    _, lab = connected_components((sub < cut) & ~np.eye(len(pts), dtype=bool), directed=False)
    return [frozenset(int(pts[i]) for i in np.flatnonzero(lab == k)) for k in set(lab.tolist())]


def test_criterion_08_mapper():
    start = time.perf_counter()
    m = bifurcating_trajectory()
    t = m.timestamps
    lens = classical_mds(correlation_distance(m), 2)

    g_inf = mapper(lens, t, R=10, g=0.5, tau=INF, seed=None)
    d = euclidean_distances(lens).d
    nodes = set()
    for cube, pts in build_cover(lens, 10, 0.5).memberships(lens.coords).items():
        nodes |= {(cube, c) for c in _classical_clusters(pts, d)}
    key = [(n.cube, frozenset(n.members.tolist())) for n in g_inf.nodes]
    by_point: dict = {}
    for node in nodes:
        for p in node[1]:
            by_point.setdefault(p, []).append(node)
    edges = {frozenset((a, b)) for owners in by_point.values() for a in owners for b in owners if a != b}
    nerve_ok = set(key) == nodes and len(key) == len(nodes) and {
        frozenset((key[u], key[v])) for u, v, _ in g_inf.edges
    } == edges

    g1 = mapper(lens, t, R=10, g=0.5, tau=1, seed=0)
    spans_ok = all(n.span <= 1 for n in g1.nodes) and all(
        max(g1.nodes[u].t_max, g1.nodes[v].t_max) - min(g1.nodes[u].t_min, g1.nodes[v].t_min) <= 1
        for u, v, _ in g1.edges
    )
    G = g1.to_networkx()
    post = [i for i, n in enumerate(g1.nodes) if n.t_min >= 5]
    mixed = 0
    seen = set()
    comps = list(nx.connected_components(G.subgraph(post)))
    for comp in comps:
        kinds = set()
        for i in comp:
            kinds |= set(m.cell_types[g1.nodes[i].members].tolist())
        seen |= kinds
        mixed += {"lineage_A", "lineage_B"} <= kinds
    split_ok = mixed == 0 and {"lineage_A", "lineage_B"} <= seen
    elapsed, fast = within(60, start)
    detail = (f"nerve equal: {nerve_ok}; tau=1 spans <= 1: {spans_ok}; "
              f"{len(comps)} downstream components, {mixed} mixing both branches")
    report(8, nerve_ok and spans_ok and split_ok and fast, detail, elapsed, 60)


# 9 ------------------------------------------------------------------------
def test_criterion_09_branch_rise():
    start = time.perf_counter()
    m = bifurcating_trajectory()
    fp = FiltrationParams(max_dim=7)
    wins = 0
    margins = []
    for run in range(50):
        profs = complexity_by_group(m, "timestamp", 100, fp, "MDS", 2, B=20, seed=run)
        sc = np.array([p.sc for p in profs])
        pre, post = np.nanmean(sc[:5, 3:], axis=0), np.nanmean(sc[5:, 3:], axis=0)
        wins += bool(np.all(post > pre))
        margins.append(float((post - pre).min()))
    elapsed, fast = within(1800, start)
    report(9, wins >= 45 and fast,
           f"post-branch mean SC_4..7 above pre-branch in {wins}/50 runs (min margin {min(margins):+.3f})",
           elapsed, 1800)


# 10 -----------------------------------------------------------------------
def test_criterion_10_determinism(tmp_path):
    start = time.perf_counter()
    data = tmp_path / "synth.csv"
    cli_main(["synth", str(data)])
    trees = []
    for name in ("a", "b"):
        run = tmp_path / name
        code = cli_main(["complexity", "--input", str(data), "--out", str(run), "--seed", "3"])
        assert code == 0
        trees.append({p.relative_to(run).as_posix(): p.read_bytes() for p in sorted(run.rglob("*")) if p.is_file()})
    same = trees[0] == trees[1]
    elapsed, _ = within(1e9, start)
    report(10, same, f"{len(trees[0])} files, trees byte-identical: {same}", elapsed, None)


# 11 -----------------------------------------------------------------------
def test_criterion_11_clustering_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(1111)
    agree = 0
    for _ in range(50):
        x = rng.normal(size=(10, 5))
        t = build_feature_table({i: {f"f{j}": x[i, j] for j in range(5)} for i in range(10)}, standardize=True)
        dist = pairwise_distances(t)
        for method in ("single", "average", "complete"):
            dend = hierarchical_cluster(t, method)
            sets = [frozenset([i]) for i in range(10)]
            ours = []
            for a, b, h, _ in dend.merges:
                ours.append((frozenset((sets[a], sets[b])), h))
                sets.append(sets[a] | sets[b])
            oracle = naive_linkage(dist, method)
            agree += all(
                pair == frozenset((oa, ob)) and math.isclose(h, oh, rel_tol=1e-12, abs_tol=1e-12)
                for (pair, h), (oa, ob, oh) in zip(ours, oracle)
            )
    elapsed, _ = within(1e9, start)
    report(11, agree == 150, f"{agree}/150 merge sequences match the naive oracle", elapsed, None)


if __name__ == "__main__":
    import tempfile

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                if "tmp_path" in fn.__code__.co_varnames[: fn.__code__.co_argcount]:
                    with tempfile.TemporaryDirectory() as tmp:
                        fn(Path(tmp))
                else:
                    fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
