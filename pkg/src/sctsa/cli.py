"""Command-line front end: staged subcommands over a run directory.

Every stage reads its inputs from the run directory (running ``ingest``
first when ``--input`` is given and nothing is ingested yet), writes its
artifacts atomically and records their digests in ``manifest.json``.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import math
import os
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from sctsa import __version__
from sctsa.complex.rips import FiltrationParams
from sctsa.complex.witness import lazy_witness_curve, maxmin_landmarks
from sctsa.complexity import (
    complexity_by_group,
    derive_seed,
    group_distances,
    heatmap_matrix,
    trajectory_table,
    write_null_counts_csv,
    write_profiles_csv,
)
from sctsa.data import Schema, bootstrap_sample, correlation_distance, load_expression, save_expression
from sctsa.embed import Embedding, classical_mds, euclidean_distances, pca
from sctsa.errors import ConfigError, DataError, SctsaError
from sctsa.homology import barcode, betti_curve, betti_features
from sctsa.lineage import build_feature_table, hierarchical_cluster
from sctsa.mapper import mapper
from sctsa.runio import atomic_path, load_manifest, record_stage, sha256_file, write_json, write_text
from sctsa.synth import bifurcating_trajectory

OUT_ENV = "SCTSA_OUTPUT_ROOT"
STAGES = ("ingest", "embed", "complexity", "barcode", "mapper", "lineage")


class MissingArtifacts(DataError):
    pass


def parse_tau(value) -> float:
    if isinstance(value, (int, float)):
        return float(value)
    s = str(value).strip().lower()
    if s in ("inf", "infinity", "none", ""):
        return math.inf
    try:
        return float(int(s))
    except ValueError:
        raise ConfigError(f"tau must be a non-negative integer or 'inf', got {value!r}") from None


def _parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    s = str(value).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {value!r}")


@dataclass
class RunConfig:
    input: str = ""
    cell_id_col: str = "cell_id"
    timestamp_col: str = "timestamp"
    cell_type_col: str = "cell_type"
    correlation: str = "pearson"
    group_by: str = "timestamp"
    m_points: int = 100
    replace: bool = False
    embed: str = "mds"
    embed_dim: int = 2
    embed_points: int = 0
    steps: int = 100
    tau: float = math.inf
    max_dim: int = 7
    witness_m: int = 0
    nu: int = 2
    B: int = 20
    repeats: int = 1
    intervals: int = 10
    overlap: float = 0.5
    mapper_tau: float = math.inf
    lens: str = "mds"
    mapper_distance: str = "embedding"
    mapper_cut: str = "histogram"
    homology_max_dim: int = 2
    barcode_points: int = 50
    max_simplices: int = 2_000_000
    features: str = "sc"
    linkage: str = "average"
    metric: str = "euclidean"
    standardize: bool = True
    seed: int = 0
    threads: int = 1

    def validate(self) -> "RunConfig":
        choices = {
            "correlation": ("pearson", "spearman"),
            "group_by": ("timestamp", "cell_type"),
            "embed": ("mds", "pca", "none"),
            "lens": ("mds", "pca"),
            "mapper_distance": ("embedding", "correlation"),
            "features": ("sc", "betti"),
            "linkage": ("single", "average", "complete"),
            "metric": ("euclidean", "correlation"),
        }
        for key, allowed in choices.items():
            if getattr(self, key) not in allowed:
                raise ConfigError(f"{key} must be one of {', '.join(allowed)}; got {getattr(self, key)!r}")
        minimum = {
            "m_points": 1, "embed_dim": 1, "embed_points": 0, "steps": 2, "max_dim": 1, "witness_m": 0,
            "nu": 0, "B": 1, "repeats": 1, "intervals": 1, "homology_max_dim": 0, "barcode_points": 2,
            "max_simplices": 1, "threads": 1, "seed": 0,
        }
        for key, lo in minimum.items():
            if getattr(self, key) < lo:
                raise ConfigError(f"{key} must be >= {lo}")
        if not 0 < self.overlap < 1:
            raise ConfigError("overlap must lie in (0, 1)")
        if self.tau < 0 or self.mapper_tau < 0:
            raise ConfigError("tau must be >= 0")
        self.cut_threshold()
        if self.witness_m and self.nu > self.witness_m:
            raise ConfigError("nu cannot exceed witness_m")
        if self.embed != "none" and self.embed_dim > self.m_points - 1:
            raise ConfigError("embed_dim must be < m_points")
        return self

    def cut_threshold(self) -> float | None:
        if self.mapper_cut == "histogram":
            return None
        try:
            v = float(self.mapper_cut)
        except ValueError:
            raise ConfigError(f"mapper_cut must be 'histogram' or a number, got {self.mapper_cut!r}") from None
        if not v >= 0:
            raise ConfigError("mapper_cut threshold must be >= 0")
        return v

    def schema(self) -> Schema:
        return Schema(self.cell_id_col, self.timestamp_col, self.cell_type_col)

    def snapshot(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = "inf" if isinstance(v, float) and math.isinf(v) else v
        return out


def _coerce(name: str, raw):
    field_types = {f.name: f.type for f in fields(RunConfig)}
    if name not in field_types:
        raise ConfigError(f"unknown configuration key {name!r}")
    kind = field_types[name]
    try:
        if name in ("tau", "mapper_tau"):
            return parse_tau(raw)
        if kind == "bool":
            return _parse_bool(raw)
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return str(raw)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad value for {name}: {raw!r}") from None


def load_config(path: str | Path | None, overrides: dict) -> RunConfig:
    """Config file first, then command-line flags; unknown keys are rejected."""
    values = {}
    if path:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found") from None
        except configparser.Error as exc:
            raise ConfigError(f"config file {path}: {exc}") from None
        extra = [s for s in parser.sections() if s != "sctsa"]
        if extra:
            raise ConfigError(f"unknown config section(s): {', '.join(extra)}")
        if parser.has_section("sctsa"):
            for key, raw in parser.items("sctsa"):
                values[key] = _coerce(key, raw)
    for key, raw in overrides.items():
        if raw is not None:
            values[key] = _coerce(key, raw)
    return RunConfig(**values).validate()


# ---------------------------------------------------------------- stages


def _filtration(cfg: RunConfig) -> FiltrationParams:
    return FiltrationParams(tau=cfg.tau, max_dim=cfg.max_dim, steps=cfg.steps)


def _ingested(cfg: RunConfig, run: Path):
    path = run / "ingest" / "expression.csv"
    if not path.exists():
        if not cfg.input:
            raise MissingArtifacts(f"{path} missing; run 'ingest' or pass --input")
        cmd_ingest(cfg, run)
    return load_expression(path, Schema())


def cmd_ingest(cfg: RunConfig, run: Path) -> list[Path]:
    if not cfg.input:
        raise ConfigError("ingest needs --input")
    m = load_expression(cfg.input, cfg.schema())
    stage = run / "ingest"
    expr = stage / "expression.csv"
    with atomic_path(expr) as tmp:
        save_expression(m, tmp)
    summary = {
        "schema": "sctsa.ingest-summary/1",
        "n_cells": m.n_cells,
        "n_genes": m.n_genes,
        "time_labels": m.time_labels,
        "timestamp_sizes": {str(t): int((m.timestamps == t).sum()) for t in m.groups("timestamp")},
        "cell_type_sizes": {str(c): int((m.cell_types == c).sum()) for c in m.groups("cell_type")},
    }
    write_json(stage / "summary.json", summary)
    outputs = [expr, stage / "summary.json"]
    record_stage(run, "ingest", outputs, {"input": cfg.input, "schema": dataclasses.asdict(cfg.schema())},
                 inputs={cfg.input: sha256_file(cfg.input)})
    return outputs


def _embedding_for(cfg: RunConfig, m, method: str):
    if cfg.embed_points:
        m = bootstrap_sample(m, cfg.group_by, cfg.embed_points, derive_seed(cfg.seed, 3), cfg.replace)
    if method == "pca":
        return m, pca(m, cfg.embed_dim), None
    d = correlation_distance(m, cfg.correlation)
    return m, classical_mds(d, cfg.embed_dim), d


def cmd_embed(cfg: RunConfig, run: Path) -> list[Path]:
    m = _ingested(cfg, run)
    method = "pca" if cfg.embed == "pca" else "mds"
    m, emb, d = _embedding_for(cfg, m, method)
    stage = run / "embed"
    outputs = [stage / "embedding.csv", stage / "meta.json"]
    with atomic_path(outputs[0]) as tmp:
        emb.to_csv(tmp, m)
    write_json(outputs[1], {"schema": "sctsa.embed-meta/1", "method": method, "k": emb.k,
                            "source_hash": emb.source_hash, "n_points": int(emb.coords.shape[0])})
    if d is not None:
        dm = stage / "distance.sctsa-dm"
        with atomic_path(dm) as tmp:
            d.save(tmp)
        outputs.append(dm)
    record_stage(run, "embed", outputs, {k: cfg.snapshot()[k] for k in
                                         ("embed", "embed_dim", "embed_points", "correlation", "group_by", "seed")})
    return outputs


def cmd_complexity(cfg: RunConfig, run: Path) -> list[Path]:
    m = _ingested(cfg, run)
    fp = _filtration(cfg)
    profiles, samples = complexity_by_group(
        m, cfg.group_by, cfg.m_points, fp, cfg.embed.upper(), cfg.embed_dim, cfg.B, cfg.seed,
        cfg.repeats, cfg.correlation, cfg.threads, return_samples=True, replace=cfg.replace,
    )
    stage = run / "complexity"
    out = {
        "profiles": stage / "profiles.csv",
        "nulls": stage / "null_counts.csv",
        "heatmap": stage / "heatmap.json",
        "curves": stage / "data_curves.csv",
        "trajectory": stage / "trajectory.csv",
        "samples": stage / "samples.csv",
    }
    with atomic_path(out["profiles"]) as tmp:
        write_profiles_csv(profiles, tmp)
    with atomic_path(out["nulls"]) as tmp:
        write_null_counts_csv(profiles, tmp)
    write_json(out["heatmap"], heatmap_matrix(profiles))
    with atomic_path(out["curves"]) as tmp, open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["group", "repeat", "dim", "step", "epsilon", "count"])
        for p in profiles:
            c = p.data_curve
            for n in range(c.counts.shape[0]):
                for s, eps in enumerate(c.grid):
                    w.writerow([p.group, p.repeat, n, s, repr(float(eps)), int(c.counts[n, s])])
    with atomic_path(out["trajectory"]) as tmp, open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["group", "sc1", "sc3", "n"])
        for row in trajectory_table(profiles, 1, min(3, cfg.max_dim)):
            vals = list(row.values())
            w.writerow([vals[0], "" if vals[1] is None else repr(vals[1]),
                        "" if vals[2] is None else repr(vals[2]), vals[3]])
    with atomic_path(out["samples"]) as tmp, open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["group", "repeat", "cell_id"])
        for p, ids in zip(profiles, samples):
            for cid in ids:
                w.writerow([p.group, p.repeat, cid])
    outputs = list(out.values())
    if cfg.witness_m:
        outputs.append(_witness_curves(cfg, m, profiles, samples, fp, stage))
    record_stage(run, "complexity", outputs, {k: cfg.snapshot()[k] for k in (
        "group_by", "m_points", "replace", "embed", "embed_dim", "steps", "tau", "max_dim", "B", "repeats",
        "correlation", "witness_m", "nu", "seed")})
    return outputs


def _witness_curves(cfg, m, profiles, samples, fp, stage: Path) -> Path:
    index = {cid: i for i, cid in enumerate(m.cell_ids.tolist())}
    path = stage / "witness_curves.csv"
    with atomic_path(path) as tmp, open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["group", "repeat", "dim", "step", "epsilon", "count"])
        for gi, (p, ids) in enumerate(zip(profiles, samples)):
            sub = m.subset([index[c] for c in ids])
            d, _ = group_distances(sub, "MDS", cfg.embed_dim, cfg.correlation)
            if cfg.witness_m > d.n:
                raise ConfigError(f"witness_m={cfg.witness_m} exceeds group size {d.n}")
            lm = maxmin_landmarks(d, cfg.witness_m, derive_seed(cfg.seed, 2, gi), cfg.nu)
            c = lazy_witness_curve(d, lm, fp, sub.timestamps)
            for n in range(c.counts.shape[0]):
                for s, eps in enumerate(c.grid):
                    w.writerow([p.group, p.repeat, n, s, repr(float(eps)), int(c.counts[n, s])])
    return path


def cmd_barcode(cfg: RunConfig, run: Path) -> list[Path]:
    m = _ingested(cfg, run)
    sample = bootstrap_sample(m, cfg.group_by, cfg.barcode_points, derive_seed(cfg.seed, 4), cfg.replace)
    labels = sample.labels(cfg.group_by)
    fp = FiltrationParams(tau=cfg.tau, steps=cfg.steps)
    bars, feats = {}, {}
    for g in m.groups(cfg.group_by):
        sub = sample.subset(np.flatnonzero(labels == g))
        d, emb = group_distances(sub, cfg.embed.upper(), cfg.embed_dim, cfg.correlation)
        if emb is not None:
            d = euclidean_distances(emb)
        bc = barcode(d, fp, cfg.homology_max_dim, sub.timestamps, cfg.max_simplices)
        bars[g] = bc
        feats[g] = betti_features(betti_curve(bc, fp.resolve(d)))
    stage = run / "barcode"
    paths = [stage / "barcodes.csv", stage / "barcodes.json", stage / "betti_features.csv"]
    with atomic_path(paths[0]) as tmp, open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["group", "dim", "birth", "death"])
        for g, bc in bars.items():
            for k, b, dth in bc.intervals:
                w.writerow([g, k, repr(b), "inf" if math.isinf(dth) else repr(dth)])
    write_json(paths[1], {"schema": "sctsa.barcodes/1", "homology_max_dim": cfg.homology_max_dim,
                          "groups": [{"group": g if isinstance(g, str) else int(g),
                                      "intervals": bc.to_json()["intervals"]} for g, bc in bars.items()]})
    names = list(next(iter(feats.values())))
    with atomic_path(paths[2]) as tmp, open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["group", *names])
        for g, row in feats.items():
            w.writerow([g, *(repr(row[n]) for n in names)])
    record_stage(run, "barcode", paths, {k: cfg.snapshot()[k] for k in (
        "group_by", "barcode_points", "embed", "embed_dim", "tau", "homology_max_dim", "steps", "seed")})
    return paths


def _tau_tag(tau: float) -> str:
    return "tau-inf" if math.isinf(tau) else f"tau-{int(tau)}"


def cmd_mapper(cfg: RunConfig, run: Path) -> list[Path]:
    m = _ingested(cfg, run)
    meta_path = run / "embed" / "meta.json"
    lens = None
    if meta_path.exists():
        import json

        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        if meta["method"] == cfg.lens and meta["k"] == cfg.embed_dim and meta["n_points"] == m.n_cells:
            lens = Embedding.from_csv(run / "embed" / "embedding.csv", cfg.lens.upper())
    if lens is None:
        m, lens, _ = _embedding_for(cfg, m, cfg.lens)
    d = correlation_distance(m, cfg.correlation) if cfg.mapper_distance == "correlation" else None
    graph = mapper(lens, m.timestamps, d, R=cfg.intervals, g=cfg.overlap, tau=cfg.mapper_tau,
                   threshold=cfg.cut_threshold(), seed=cfg.seed)
    stage = run / "mapper" / _tau_tag(cfg.mapper_tau)
    paths = [stage / "graph.json", stage / "graph.dot", stage / "nodes.csv", stage / "edges.csv"]
    with atomic_path(paths[0]) as tmp:
        graph.write_json(tmp, m.timestamps, m.cell_ids)
    with atomic_path(paths[1]) as tmp:
        graph.write_dot(tmp, m.timestamps, len(m.time_labels))
    with atomic_path(paths[2]) as tmp2, atomic_path(paths[3]) as tmp3:
        graph.write_csv(tmp2, tmp3)
    record_stage(run, f"mapper/{_tau_tag(cfg.mapper_tau)}", paths, {k: cfg.snapshot()[k] for k in (
        "intervals", "overlap", "mapper_tau", "lens", "mapper_distance", "mapper_cut", "embed_dim", "embed_points", "seed")})
    return paths


def _read_feature_mapping(cfg: RunConfig, run: Path) -> dict:
    if cfg.features == "sc":
        path = run / "complexity" / "profiles.csv"
        if not path.exists():
            raise MissingArtifacts(f"{path} missing; run 'complexity' first")
        acc: dict = {}
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                acc.setdefault(row["group"], {}).setdefault(f"SC_{row['dim']}", []).append(
                    float(row["sc"]) if row["sc"] else math.nan)
        out = {}
        for g, cols in acc.items():
            out[g] = {}
            for c, vals in cols.items():
                arr = np.asarray(vals)
                arr = arr[np.isfinite(arr)]
                out[g][c] = float(arr.mean()) if arr.size else None
        return out
    path = run / "barcode" / "betti_features.csv"
    if not path.exists():
        raise MissingArtifacts(f"{path} missing; run 'barcode' first")
    with open(path, newline="", encoding="utf-8") as fh:
        return {row.pop("group"): {k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)}


def cmd_lineage(cfg: RunConfig, run: Path) -> list[Path]:
    import warnings

    mapping = _read_feature_mapping(cfg, run)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        table = build_feature_table(mapping, standardize=cfg.standardize)
    if not table.columns:
        raise DataError("no usable feature columns for lineage clustering")
    dend = hierarchical_cluster(table, cfg.linkage, cfg.metric)
    stage = run / "lineage"
    paths = [stage / "dendrogram.nwk", stage / "merges.csv", stage / "heatmap.json", stage / "features.csv"]
    write_text(paths[0], dend.to_newick() + "\n")
    with atomic_path(paths[1]) as tmp:
        dend.write_merges_csv(tmp)
    doc = table.heatmap(dend.leaf_order())
    doc["dropped"] = table.dropped
    doc["newick"] = dend.to_newick()
    write_json(paths[2], doc)
    with atomic_path(paths[3]) as tmp, open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["group", *table.columns])
        for g, row in zip(table.rows, table.values):
            w.writerow([g, *("" if math.isnan(v) else repr(float(v)) for v in row)])
    record_stage(run, "lineage", paths, {k: cfg.snapshot()[k] for k in (
        "features", "linkage", "metric", "standardize")})
    return paths


def build_report(run: Path) -> dict:
    """Consolidated summary of a completed run; raises listing missing stages."""
    import json

    manifest = load_manifest(run)
    stages = manifest.get("stages", {})
    missing = [s for s in STAGES if not any(k == s or k.startswith(s + "/") for k in stages)]
    if missing:
        raise MissingArtifacts(f"run {run} is missing stage(s): {', '.join(missing)}")
    digests = {}
    bad = []
    for name, entry in sorted(stages.items()):
        for rel, digest in entry["outputs"].items():
            p = run / rel
            actual = sha256_file(p) if p.exists() else None
            digests[rel] = actual
            if actual != digest:
                bad.append(rel)
    heat = json.loads((run / "complexity" / "heatmap.json").read_text(encoding="utf-8"))
    with open(run / "barcode" / "barcodes.csv", newline="", encoding="utf-8") as fh:
        bars = list(csv.DictReader(fh))
    bar_stats: dict = {}
    for r in bars:
        s = bar_stats.setdefault(r["group"], {})
        k = f"H{r['dim']}"
        s.setdefault(k, {"count": 0, "infinite": 0, "max_finite_persistence": 0.0})
        s[k]["count"] += 1
        if r["death"] == "inf":
            s[k]["infinite"] += 1
        else:
            s[k]["max_finite_persistence"] = max(s[k]["max_finite_persistence"],
                                                 float(r["death"]) - float(r["birth"]))
    mapper_stats = {}
    for name in sorted(k for k in stages if k.startswith("mapper/")):
        doc = json.loads((run / name / "graph.json").read_text(encoding="utf-8"))
        import networkx as nx

        G = nx.Graph()
        G.add_nodes_from(n["id"] for n in doc["nodes"])
        G.add_edges_from((e["source"], e["target"]) for e in doc["links"])
        mapper_stats[name.split("/", 1)[1]] = {
            "nodes": len(doc["nodes"]),
            "edges": len(doc["links"]),
            "components": nx.number_connected_components(G),
            "max_node_span": max((n["t_max"] - n["t_min"] for n in doc["nodes"]), default=0),
        }
    newick = (run / "lineage" / "dendrogram.nwk").read_text(encoding="utf-8").strip()
    return {
        "schema": "sctsa.report/1",
        "tool_version": manifest.get("tool_version"),
        "digests_ok": not bad,
        "digest_mismatches": bad,
        "digests": digests,
        "complexity": heat,
        "barcodes": bar_stats,
        "mapper": mapper_stats,
        "lineage_newick": newick,
    }


def _report_text(rep: dict) -> str:
    lines = [f"sctsa report (tool {rep['tool_version']})", ""]
    heat = rep["complexity"]
    lines.append("normalized simplicial complexity (rows: groups, cols: " +
                 " ".join(f"SC_{n}" for n in heat["dims"]) + ")")
    for g, row in zip(heat["groups"], heat["values"]):
        lines.append(f"  {str(g):>12}  " + " ".join("   n/a" if v is None else f"{v:6.3f}" for v in row))
    lines.append("")
    lines.append("barcodes")
    for g, stats in rep["barcodes"].items():
        parts = [f"{k}: {v['count']} bars ({v['infinite']} inf)" for k, v in sorted(stats.items())]
        lines.append(f"  {g:>12}  " + "; ".join(parts))
    lines.append("")
    lines.append("mapper graphs")
    for tag, s in rep["mapper"].items():
        lines.append(f"  {tag}: {s['nodes']} nodes, {s['edges']} edges, {s['components']} components, "
                     f"max node span {s['max_node_span']}")
    lines.append("")
    lines.append("lineage: " + rep["lineage_newick"])
    lines.append("")
    lines.append("digests: " + ("ok" if rep["digests_ok"] else "MISMATCH " + ", ".join(rep["digest_mismatches"])))
    return "\n".join(lines) + "\n"


def cmd_report(cfg: RunConfig, run: Path) -> list[Path]:
    rep = build_report(run)
    paths = [run / "report" / "report.json", run / "report" / "report.txt"]
    write_json(paths[0], rep)
    write_text(paths[1], _report_text(rep))
    return paths


COMMANDS = {
    "ingest": cmd_ingest,
    "embed": cmd_embed,
    "complexity": cmd_complexity,
    "barcode": cmd_barcode,
    "mapper": cmd_mapper,
    "lineage": cmd_lineage,
    "report": cmd_report,
}

HELP = {
    "ingest": "validate and normalize an expression table",
    "embed": "MDS or PCA embedding of the ingested cells",
    "complexity": "normalized simplicial complexity per group",
    "barcode": "persistence barcodes and Betti features per group",
    "mapper": "temporal Mapper graph",
    "lineage": "cluster groups by their simplicial statistics",
    "report": "consolidated summary of a completed run",
}


# ---------------------------------------------------------------- parser


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sctsa", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"sctsa {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in COMMANDS:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", help="key = value file with a [sctsa] section")
        p.add_argument("--out", help=f"run directory (default: ${OUT_ENV} or ./sctsa-run)")
        p.add_argument("--timings", action="store_true", help="record wall-clock seconds in the manifest")
        for f in fields(RunConfig):
            if name == "mapper" and f.name == "tau":
                p.add_argument("--filtration-tau", dest="tau", default=None)
                continue
            if name == "mapper" and f.name == "mapper_tau":
                p.add_argument("--tau", "--mapper-tau", dest="mapper_tau", default=None)
                continue
            p.add_argument(_flag(f.name), dest=f.name, default=None)

    s = sub.add_parser("synth", help="write the bundled synthetic bifurcating dataset as CSV")
    s.add_argument("path")
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--groups", type=int, default=12)
    s.add_argument("--cells", type=int, default=150)
    s.add_argument("--genes", type=int, default=40)
    s.add_argument("--branch-group", type=int, default=5, help="zero-based first post-branch time point")
    return parser


def _run_dir(arg: str | None) -> Path:
    return Path(arg or os.environ.get(OUT_ENV) or "sctsa-run")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            m = bifurcating_trajectory(args.groups, args.cells, args.genes, args.branch_group, args.seed)
            with atomic_path(args.path) as tmp:
                save_expression(m, tmp)
            return 0
        overrides = {f.name: getattr(args, f.name) for f in fields(RunConfig)}
        cfg = load_config(args.config, overrides)
        run = _run_dir(args.out)
        run.mkdir(parents=True, exist_ok=True)
        start = time.perf_counter()
        COMMANDS[args.command](cfg, run)
        if args.timings and args.command != "report":
            manifest = load_manifest(run)
            for key, entry in manifest["stages"].items():
                if key == args.command or key.startswith(args.command + "/"):
                    entry["wall_clock_seconds"] = round(time.perf_counter() - start, 3)
            write_json(run / "manifest.json", manifest)
        return 0
    except SctsaError as exc:
        print(f"sctsa {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
