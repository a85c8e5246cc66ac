"""Expression tables, correlation distances and per-group bootstrap sampling."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
import pandas as pd
from scipy.spatial.distance import pdist, squareform
from scipy.stats import rankdata

from sctsa.errors import DataError

GroupBy = Literal["timestamp", "cell_type"]

DM_MAGIC = b"SCTSA-DM"


@dataclass(frozen=True)
class Schema:
    """Names of the metadata columns; every other column is a gene."""

    cell_id: str = "cell_id"
    timestamp: str = "timestamp"
    cell_type: str = "cell_type"

    def columns(self) -> tuple[str, str, str]:
        return (self.cell_id, self.timestamp, self.cell_type)


@dataclass
class ExpressionMatrix:
    """Cells x genes expression values with per-cell metadata.

    ``timestamps`` are ordinal indices 0..T-1; ``time_labels[t]`` keeps the
    value that appeared in the source file for index ``t``.
    """

    values: np.ndarray
    cell_ids: np.ndarray
    timestamps: np.ndarray
    cell_types: np.ndarray
    genes: list[str] = field(default_factory=list)
    time_labels: list[int] | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise DataError("expression values must be a 2-D matrix")
        n = self.values.shape[0]
        self.cell_ids = np.asarray(self.cell_ids, dtype=object)
        self.timestamps = np.asarray(self.timestamps, dtype=np.int64)
        self.cell_types = np.asarray(self.cell_types, dtype=object)
        for name in ("cell_ids", "timestamps", "cell_types"):
            if len(getattr(self, name)) != n:
                raise DataError(f"{name} has length {len(getattr(self, name))}, expected {n}")
        if not np.all(np.isfinite(self.values)):
            r, c = np.argwhere(~np.isfinite(self.values))[0]
            raise DataError(f"non-finite expression value at row {r}, column {c}")
        if np.any(self.values < 0):
            r, c = np.argwhere(self.values < 0)[0]
            raise DataError(f"negative expression value at row {r}, column {c}")
        if not self.genes:
            self.genes = [f"g{j}" for j in range(self.values.shape[1])]
        if self.time_labels is None:
            self.time_labels = list(range(int(self.timestamps.max()) + 1 if n else 0))

    @property
    def n_cells(self) -> int:
        return self.values.shape[0]

    @property
    def n_genes(self) -> int:
        return self.values.shape[1]

    def labels(self, group_by: GroupBy) -> np.ndarray:
        if group_by == "timestamp":
            return self.timestamps
        if group_by == "cell_type":
            return self.cell_types
        raise DataError(f"unknown grouping {group_by!r}")

    def groups(self, group_by: GroupBy) -> list:
        """Distinct group labels in sorted order."""
        return sorted(set(self.labels(group_by).tolist()))

    def subset(self, idx: Sequence[int] | np.ndarray) -> "ExpressionMatrix":
        idx = np.asarray(idx, dtype=np.int64)
        return ExpressionMatrix(
            values=self.values[idx],
            cell_ids=self.cell_ids[idx],
            timestamps=self.timestamps[idx],
            cell_types=self.cell_types[idx],
            genes=list(self.genes),
            time_labels=list(self.time_labels),
        )


def load_expression(path: str | Path, schema: Schema | None = None) -> ExpressionMatrix:
    """Read a CSV/TSV expression table with a header row.

    Rows keep file order.  Reported row numbers are 1-based data rows
    (the header is row 0).
    """
    schema = schema or Schema()
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    sep = "\t" if path.suffix.lower() in {".tsv", ".tab"} else ","
    frame = pd.read_csv(path, sep=sep, dtype=str, keep_default_na=False, encoding="utf-8")

    missing = [c for c in schema.columns() if c not in frame.columns]
    if missing:
        raise DataError(f"{path}: missing column(s) {', '.join(missing)}")
    genes = [c for c in frame.columns if c not in schema.columns()]
    if not genes:
        raise DataError(f"{path}: no gene columns")

    ids = frame[schema.cell_id].to_numpy(dtype=object)
    dup = pd.Index(ids).duplicated()
    if dup.any():
        r = int(np.flatnonzero(dup)[0])
        raise DataError(f"{path}: duplicate cell id {ids[r]!r} at row {r + 1}")

    values = np.empty((len(frame), len(genes)), dtype=np.float64)
    for j, gene in enumerate(genes):
        col = _parse_floats(frame[gene].to_numpy(dtype=object))
        bad = ~np.isfinite(col)
        if bad.any():
            r = int(np.flatnonzero(bad)[0])
            raise DataError(
                f"{path}: non-numeric expression value {frame[gene].iat[r]!r} "
                f"at row {r + 1}, column {gene!r}"
            )
        neg = col < 0
        if neg.any():
            r = int(np.flatnonzero(neg)[0])
            raise DataError(f"{path}: negative expression value {col[r]} at row {r + 1}, column {gene!r}")
        values[:, j] = col

    raw_t = pd.to_numeric(frame[schema.timestamp], errors="coerce").to_numpy(dtype=np.float64)
    bad = ~np.isfinite(raw_t) | (raw_t != np.round(raw_t))
    if bad.any():
        r = int(np.flatnonzero(bad)[0])
        raise DataError(
            f"{path}: timestamp {frame[schema.timestamp].iat[r]!r} at row {r + 1} is not an integer"
        )
    labels, ordinal = np.unique(raw_t.astype(np.int64), return_inverse=True)

    return ExpressionMatrix(
        values=values,
        cell_ids=ids,
        timestamps=ordinal,
        cell_types=frame[schema.cell_type].to_numpy(dtype=object),
        genes=genes,
        time_labels=[int(x) for x in labels],
    )


def _parse_floats(cells: np.ndarray) -> np.ndarray:
    # correctly rounded parse; unparseable cells become nan
    try:
        return cells.astype(np.float64)
    except ValueError:
        out = np.empty(len(cells))
        for i, c in enumerate(cells):
            try:
                out[i] = float(c)
            except ValueError:
                out[i] = np.nan
        return out


def save_expression(m: ExpressionMatrix, path: str | Path, schema: Schema | None = None) -> None:
    schema = schema or Schema()
    frame = pd.DataFrame(m.values, columns=m.genes)
    frame.insert(0, schema.cell_type, m.cell_types)
    frame.insert(0, schema.timestamp, [m.time_labels[t] for t in m.timestamps])
    frame.insert(0, schema.cell_id, m.cell_ids)
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\r\n")


@dataclass
class DistanceMatrix:
    """Symmetric, zero-diagonal, non-negative dissimilarities.

    The triangle inequality is not required; permuted nulls break it.
    """

    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise DataError(f"distance matrix must be square, got shape {d.shape}")
        if not np.all(np.isfinite(d)):
            raise DataError("distance matrix has non-finite entries")
        if np.any(d < 0):
            raise DataError("distance matrix has negative entries")
        if np.any(np.diag(d) != 0):
            raise DataError("distance matrix diagonal must be zero")
        if not np.array_equal(d, d.T):
            raise DataError("distance matrix is not symmetric")
        self.d = d

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def upper(self) -> np.ndarray:
        """Strict upper triangle, row-major."""
        return self.d[np.triu_indices(self.n, 1)]

    @classmethod
    def from_upper(cls, n: int, values: np.ndarray) -> "DistanceMatrix":
        d = np.zeros((n, n))
        iu = np.triu_indices(n, 1)
        d[iu] = values
        d[(iu[1], iu[0])] = values
        return cls(d)

    def to_bytes(self) -> bytes:
        return DM_MAGIC + struct.pack("<Q", self.n) + self.upper().astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "DistanceMatrix":
        if blob[:8] != DM_MAGIC:
            raise DataError("not a distance-matrix file (bad magic)")
        (n,) = struct.unpack("<Q", blob[8:16])
        expected = 16 + 8 * (n * (n - 1) // 2)
        if len(blob) != expected:
            raise DataError(f"distance-matrix file truncated: {len(blob)} bytes, expected {expected}")
        return cls.from_upper(n, np.frombuffer(blob, dtype="<f8", offset=16).astype(np.float64))

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path: str | Path) -> "DistanceMatrix":
        return cls.from_bytes(Path(path).read_bytes())

    def to_csv(self, path: str | Path) -> None:
        np.savetxt(path, self.d, delimiter=",", fmt="%.17g", newline="\r\n")

    @classmethod
    def from_csv(cls, path: str | Path) -> "DistanceMatrix":
        return cls(np.loadtxt(path, delimiter=",", ndmin=2))


def correlation_distance(m: ExpressionMatrix | np.ndarray, method: str = "pearson") -> DistanceMatrix:
    """``1 - corr(row_i, row_j)`` between cells, in [0, 2]."""
    if isinstance(m, ExpressionMatrix):
        x, ids = m.values, m.cell_ids
    else:
        x = np.asarray(m, dtype=np.float64)
        ids = np.arange(x.shape[0])
    if x.shape[1] < 2:
        raise DataError("correlation distance needs at least 2 genes")
    if method == "spearman":
        x = rankdata(x, axis=1)
    elif method != "pearson":
        raise DataError(f"unknown correlation method {method!r}")
    centered = x - x.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.einsum("ij,ij->i", centered, centered))
    flat = norms == 0
    if flat.any():
        raise DataError(f"cell {ids[int(np.flatnonzero(flat)[0])]!r} has zero variance; correlation undefined")
    z = centered / norms[:, None]
    # 1 - <z_i, z_j> written as half the squared distance of unit vectors
    d = squareform(0.5 * pdist(z, "sqeuclidean")) if len(z) > 1 else np.zeros((len(z), len(z)))
    return DistanceMatrix(np.clip(d, 0.0, 2.0))


def bootstrap_sample(
    m: ExpressionMatrix,
    group_by: GroupBy,
    m_points: int,
    seed: int,
    replace: bool = False,
) -> ExpressionMatrix:
    """Draw ``m_points`` cells uniformly from each group and concatenate.

    Groups appear in sorted label order; within a group the drawn rows keep
    their original relative order.
    """
    if m_points < 1:
        raise DataError("m_points must be positive")
    labels = m.labels(group_by)
    groups = m.groups(group_by)
    members = {g: np.flatnonzero(labels == g) for g in groups}
    if not replace:
        small = [(g, len(ix)) for g, ix in members.items() if len(ix) < m_points]
        if small:
            listing = ", ".join(f"{g!r} has {n}" for g, n in small)
            raise DataError(f"groups smaller than m_points={m_points}: {listing}")
    rng = np.random.default_rng(seed)
    picked = []
    for g in groups:
        ix = members[g]
        choice = rng.choice(len(ix), size=m_points, replace=replace)
        picked.append(ix[np.sort(choice)])
    return m.subset(np.concatenate(picked))
