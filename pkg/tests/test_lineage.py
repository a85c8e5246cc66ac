import json

import numpy as np
import pytest
from scipy.cluster.hierarchy import linkage as scipy_linkage

from oracles import mst_weights, naive_linkage
from sctsa.complexity import NullEnsemble, normalized_complexity
from sctsa.errors import DataError
from sctsa.lineage import (
    FeatureTable,
    betti_feature_rows,
    build_feature_table,
    hierarchical_cluster,
    pairwise_distances,
    write_heatmap_json,
)


def table(values, standardize=False):
    return build_feature_table({i: {f"f{j}": v for j, v in enumerate(row)} for i, row in enumerate(values)}, standardize)


def member_sets(dend):
    sets = [frozenset([i]) for i in range(dend.n)]
    out = []
    for a, b, h, size in dend.merges:
        sets.append(sets[a] | sets[b])
        assert size == len(sets[-1])
        out.append((frozenset((sets[a], sets[b])), h))
    return out


def test_single_row_table():
    t = build_feature_table({"only": {"SC_1": 1.0, "SC_2": 2.0}}, standardize=False)
    assert t.rows == ["only"] and t.values.shape == (1, 2)


def test_constant_column_dropped():
    with pytest.warns(UserWarning, match="zero variance"):
        t = build_feature_table({"a": {"x": 1.0, "y": 3.0}, "b": {"x": 1.0, "y": 5.0}})
    assert t.columns == ["y"]
    assert t.dropped == [{"column": "x", "reason": "zero variance"}]


def test_all_undefined_column_dropped():
    with pytest.warns(UserWarning, match="undefined"):
        t = build_feature_table({"a": {"x": None, "y": 3.0}, "b": {"x": None, "y": 5.0}})
    assert t.columns == ["y"]


def test_zscores_match_two_pass(rng):
    raw = rng.normal(size=(25, 7))
    t = build_feature_table({f"type{i}": {f"SC_{j + 1}": raw[i, j] for j in range(7)} for i in range(25)})
    for j in range(7):
        col = list(raw[:, j])
        mu = sum(col) / len(col)
        sd = (sum((v - mu) ** 2 for v in col) / len(col)) ** 0.5
        assert np.allclose(t.values[:, j], [(v - mu) / sd for v in col], atol=1e-12, rtol=0)


def test_profiles_averaged_over_repeats():
    ens = NullEnsemble(np.array([[1, 2, 2]]), 0)
    a, b = normalized_complexity([1, 2, 4], ens, "g"), normalized_complexity([1, 4, 2], ens, "g")
    c = normalized_complexity([1, 1, 1], ens, "h")
    b.repeat = 1
    t = build_feature_table([a, b, c], standardize=False)
    assert t.rows == ["g", "h"] and t.values[0].tolist() == [1.5, 1.5]


def test_masked_distances():
    t = FeatureTable(["a", "b"], ["x", "y"], np.array([[0.0, np.nan], [3.0, 7.0]]))
    assert pairwise_distances(t)[0, 1] == pytest.approx(3 * np.sqrt(2))
    t2 = FeatureTable(["a", "b"], ["x", "y"], np.array([[0.0, np.nan], [np.nan, 7.0]]))
    assert pairwise_distances(t2)[0, 1] == np.inf


def test_two_rows_one_merge():
    d = hierarchical_cluster(table([[0.0, 0.0], [3.0, 4.0]]))
    assert d.merges == [(0, 1, 5.0, 2)]


def test_collinear_first_merge():
    d = hierarchical_cluster(table([[0.0], [1.0], [10.0]]), "single")
    assert d.merges[0][:3] == (0, 1, 1.0)


@pytest.mark.parametrize("method", ["single", "average", "complete"])
def test_matches_naive_oracle(method, rng):
    for _ in range(10):
        x = rng.normal(size=(10, 4))
        dend = hierarchical_cluster(table(x), method)
        oracle = naive_linkage(pairwise_distances(table(x)), method)
        got = member_sets(dend)
        for (pair, h), (a, b, h2) in zip(got, oracle):
            assert pair == frozenset((a, b))
            assert h == pytest.approx(h2, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("method", ["single", "average", "complete"])
def test_heights_match_scipy(method, rng):
    x = rng.normal(size=(12, 3))
    ours = [m[2] for m in hierarchical_cluster(table(x), method).merges]
    theirs = scipy_linkage(x, method)[:, 2]
    assert np.allclose(ours, theirs, atol=1e-12)


def test_single_linkage_is_mst(rng):
    x = rng.normal(size=(9, 3))
    dist = pairwise_distances(table(x))
    heights = [m[2] for m in hierarchical_cluster(dist, "single").merges]
    assert heights == mst_weights(dist)


def test_average_has_no_inversions(rng):
    for _ in range(20):
        h = [m[2] for m in hierarchical_cluster(table(rng.normal(size=(10, 3))), "average").merges]
        assert all(b >= a - 1e-12 for a, b in zip(h, h[1:]))


def canonical(dend):
    def rec(node):
        if node < dend.n:
            return str(dend.labels[node])
        a, b, h, _ = dend.merges[node - dend.n]
        return tuple(sorted([rec(a), rec(b)], key=str)) + (round(h, 9),)

    return rec(dend.n + len(dend.merges) - 1)


def test_row_permutation_invariance(rng):
    x = rng.normal(size=(8, 3))
    labels = [f"r{i}" for i in range(8)]
    perm = rng.permutation(8)
    a = hierarchical_cluster(build_feature_table({labels[i]: dict(enumerate(x[i])) for i in range(8)}, False))
    b = hierarchical_cluster(build_feature_table({labels[i]: dict(enumerate(x[i])) for i in perm}, False))
    assert canonical(a) == canonical(b)


def test_newick_and_exports(tmp_path):
    t = build_feature_table({"A": {"x": 0.0}, "B": {"x": 1.0}, "C d": {"x": 5.0}}, standardize=False)
    dend = hierarchical_cluster(t, "single")
    nwk = dend.to_newick()
    assert nwk.endswith(";") and "'C d'" in nwk and nwk.count("(") == 2
    assert dend.leaf_order() == [2, 0, 1]
    write_heatmap_json(t, dend, tmp_path / "h.json")
    doc = json.loads((tmp_path / "h.json").read_text())
    assert doc["row_order"] == ["C d", "A", "B"]
    dend.write_merges_csv(tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text().splitlines()[0] == "step,child_a,child_b,height,size"


def test_too_few_rows():
    with pytest.raises(DataError):
        hierarchical_cluster(np.zeros((1, 1)))


def test_betti_feature_rows(small_bundled):
    rows = betti_feature_rows(small_bundled, "cell_type", m_points=10, steps=20)
    assert set(rows) == {"lineage_A", "lineage_B", "progenitor"}
    assert set(next(iter(rows.values()))) == {f"H{k}_{s}" for k in (0, 1) for s in ("integral", "max", "final")}
