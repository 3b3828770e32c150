"""Bundled reference data: the elder-meals study cluster tables.

Four beta runs (0.25, 0.45, 0.65, 0.85) over 20 interviewed households and
47 behavioural dimensions, stored in the dimensions-as-rows CSV layout that
:func:`personaforge.pipeline.clusters_csv` also emits. The raw score matrix
behind these clusters was never published, so the cluster tables themselves
are the ground truth used by the demos and the test oracles.
"""

from __future__ import annotations

import csv
from importlib import resources

from .dataset import Dimension
from .doc import SubspaceCluster, quality
from .errors import DatasetError

ELDER_MEALS_BETAS = (0.25, 0.45, 0.65, 0.85)
# clusters of broad-but-shallow behaviour (one or two shared dimensions over
# half the sample); excluded from the co-occurrence tally
ELDER_MEALS_TRASH = ("J85", "K85", "L85", "M85")


def _data_text(name: str) -> str:
    return resources.files("personaforge.data").joinpath(name).read_text(encoding="utf-8")


def parse_clusters_csv(text: str, beta: float) -> list[SubspaceCluster]:
    """Parse a dimensions-as-rows cluster table.

    Layout: a ``cluster`` header row, a ``members`` row with dot-separated
    subject ids, one row per dimension with means or NA, and an optional
    trailing ``dimensions`` row with subspace sizes that is verified against
    the parsed content.
    """
    rows = [r for r in csv.reader(text.splitlines()) if r]
    if rows[0][0] != "cluster" or rows[1][0] != "members":
        raise DatasetError("cluster CSV must start with 'cluster' and 'members' rows")
    ids = rows[0][1:]
    members = [tuple(cell.split(".")) for cell in rows[1][1:]]
    means: list[dict[str, float]] = [{} for _ in ids]
    declared_sizes = None
    for row in rows[2:]:
        if row[0] == "dimensions":
            declared_sizes = [int(c) for c in row[1:]]
            continue
        dim = row[0]
        for j, cell in enumerate(row[1:]):
            if cell != "NA":
                means[j][dim] = float(cell)
    if declared_sizes is not None:
        for cid, m, size in zip(ids, means, declared_sizes):
            if len(m) != size:
                raise DatasetError(
                    f"cluster {cid!r}: parsed {len(m)} subspace dimensions, table declares {size}")
    clusters = []
    for cid, mem, m in zip(ids, members, means):
        subspace = tuple(sorted(m, key=lambda d: int(d[1:])))
        clusters.append(SubspaceCluster(
            id=cid, members=mem, subspace=subspace,
            means={d: m[d] for d in subspace},
            quality=quality(len(mem), len(subspace), beta)))
    return clusters


def elder_meals_clusters(beta: float | None = None) -> list[SubspaceCluster]:
    """The study's clusters, for one beta run or all four runs combined."""
    betas = ELDER_MEALS_BETAS if beta is None else (beta,)
    out = []
    for b in betas:
        tag = str(int(round(b * 100)))
        out.extend(parse_clusters_csv(_data_text(f"elder_meals_clusters_b{tag}.csv"), b))
    return out


def elder_meals_cluster(cluster_id: str) -> SubspaceCluster:
    for c in elder_meals_clusters():
        if c.id == cluster_id:
            return c
    raise KeyError(cluster_id)


def elder_meals_dimensions() -> list[Dimension]:
    rows = list(csv.reader(_data_text("elder_meals_dimensions.csv").splitlines()))
    return [Dimension(id=r[0], label=r[1]) for r in rows[1:] if r]
