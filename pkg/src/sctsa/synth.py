"""Synthetic timestamped expression data with a programmed bifurcation.

Cells follow a latent trajectory through ``n_groups`` time points.  Before
``branch_group`` every group is one diffuse Gaussian blob; from
``branch_group`` on, each cell commits to lineage A or B, and the two
lineages drift apart as tight clusters.  Expression is a log-linear readout
of the latent position plus gene-level noise.
"""

from __future__ import annotations

import numpy as np

from sctsa.data import ExpressionMatrix


def bifurcating_trajectory(
    n_groups: int = 12,
    cells_per_group: int = 150,
    n_genes: int = 40,
    branch_group: int = 5,
    seed: int = 7,
    pre_spread: float = 1.0,
    post_spread: float = 0.25,
    branch_gap: float = 2.5,
    gene_noise: float = 0.15,
    major_fraction: float = 0.85,
    tail_df: float = 3.0,
) -> ExpressionMatrix:
    """Generate the bundled dataset.

    Cell types are ``progenitor`` before the branch point and
    ``lineage_A`` / ``lineage_B`` after it.  ``branch_group`` is the
    zero-based index of the first post-branch time point.
    """
    rng = np.random.default_rng(seed)
    latent_dim = 3
    loadings = rng.normal(size=(n_genes, latent_dim))
    baseline = rng.normal(1.0, 0.3, size=n_genes)

    latents, times, types = [], [], []
    for t in range(n_groups):
        centre = np.array([0.6 * t, 0.0, 0.0])
        if t < branch_group:
            z = centre + rng.normal(scale=pre_spread, size=(cells_per_group, latent_dim))
            kinds = ["progenitor"] * cells_per_group
        else:
            side = (rng.random(cells_per_group) >= major_fraction).astype(int)
            offset = branch_gap + 0.4 * (t - branch_group)
            shift = np.where(side[:, None] == 0, 1.0, -1.0) * np.array([0.0, offset, 0.0])
            # committed cells spread along the progression axis with a heavy tail
            noise = rng.normal(scale=post_spread, size=(cells_per_group, latent_dim))
            noise[:, 0] = rng.standard_t(tail_df, size=cells_per_group) * 2 * post_spread
            z = centre + shift + noise
            kinds = ["lineage_A" if s == 0 else "lineage_B" for s in side]
        latents.append(z)
        times.extend([t] * cells_per_group)
        types.extend(kinds)

    z = np.vstack(latents)
    log_expr = baseline[None, :] + 0.5 * z @ loadings.T
    log_expr += rng.normal(scale=gene_noise, size=log_expr.shape)
    values = np.exp(log_expr)
    n = len(times)
    width = len(str(n))
    return ExpressionMatrix(
        values=values,
        cell_ids=[f"cell{i:0{width}d}" for i in range(n)],
        timestamps=np.asarray(times),
        cell_types=types,
        genes=[f"gene{j:03d}" for j in range(n_genes)],
        time_labels=list(range(n_groups)),
    )
