"""Comparison analytics: co-occurrence counts, CA/MCA perceptual maps, eta-squared.

These are the cross-checks against the clustering output: how often pairs
of subjects land in the same cluster, and where classical correspondence
analysis places subjects when it only sees binned categories.
"""

from __future__ import annotations

import warnings as _warnings
from dataclasses import dataclass, field

import numpy as np

from .dataset import CategoricalTable
from .doc import natural_key, natural_sorted
from .errors import ParameterError

_SV_RTOL = 1e-9    # singular values below sv_max * this are structural zeros
_SV_FLOOR = 1e-12  # below this everything is numerical noise


@dataclass(frozen=True)
class CooccurrenceTable:
    """Symmetric counts of how often two subjects share a cluster.

    The diagonal counts cluster membership per subject. ``excluded`` records
    which cluster ids were left out of the tally.
    """

    subject_ids: tuple[str, ...]
    counts: np.ndarray = field(repr=False)
    excluded: tuple[str, ...] = ()

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=int)
        if counts.shape != (len(self.subject_ids), len(self.subject_ids)):
            raise ParameterError("counts shape does not match subject ids")
        counts = counts.copy()
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    def value(self, a: str, b: str) -> int:
        return int(self.counts[self.subject_ids.index(a), self.subject_ids.index(b)])

    def to_csv(self) -> str:
        lines = ["subject," + ",".join(self.subject_ids)]
        for sid, row in zip(self.subject_ids, self.counts):
            lines.append(sid + "," + ",".join(str(int(v)) for v in row))
        return "\n".join(lines) + "\n"


def cooccurrence(clusters, exclude=(), subjects=None) -> CooccurrenceTable:
    """Count pairwise cluster co-membership over all non-excluded clusters.

    ``subjects`` fixes the row/column order; by default it is the natural-
    sorted union of members over all given clusters (excluded ones included,
    so their members still get rows). Unknown exclusion ids only warn.
    """
    clusters = list(clusters)
    exclude = set(exclude)
    known = {c.id for c in clusters}
    for unknown in natural_sorted(exclude - known):
        _warnings.warn(f"exclusion id {unknown!r} matches no cluster", stacklevel=2)
    if subjects is None:
        subjects = natural_sorted({m for c in clusters for m in c.members})
    subjects = list(subjects)
    index = {s: i for i, s in enumerate(subjects)}
    counts = np.zeros((len(subjects), len(subjects)), dtype=int)
    for c in clusters:
        if c.id in exclude:
            continue
        rows = [index[m] for m in c.members if m in index]
        for i in rows:
            counts[i, rows] += 1
    return CooccurrenceTable(tuple(subjects), counts,
                             tuple(natural_sorted(exclude & known)))


# --- correspondence analysis -------------------------------------------------

@dataclass(frozen=True)
class PerceptualMap:
    """Principal-coordinate embedding of a two-way table.

    Row and column coordinates are principal (scaled by the singular
    values), axes ordered by explained inertia. Signs are canonical: on each
    axis the largest-magnitude row coordinate is positive.
    """

    row_ids: tuple[str, ...]
    col_ids: tuple[str, ...]
    row_coords: np.ndarray = field(repr=False)
    col_coords: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    total_inertia: float = 0.0
    warnings: tuple[str, ...] = ()

    @property
    def n_axes(self) -> int:
        return len(self.eigenvalues)

    @property
    def inertia_pct(self) -> np.ndarray:
        if self.total_inertia == 0:
            return np.zeros(0)
        return 100.0 * self.eigenvalues / self.total_inertia

    def row_coord(self, row_id: str) -> np.ndarray:
        return self.row_coords[self.row_ids.index(row_id)]

    def to_dict(self) -> dict:
        return {
            "rows": [{"id": r, "coords": c.tolist()}
                     for r, c in zip(self.row_ids, self.row_coords)],
            "cols": [{"id": r, "coords": c.tolist()}
                     for r, c in zip(self.col_ids, self.col_coords)],
            "eigenvalues": self.eigenvalues.tolist(),
            "inertia_pct": self.inertia_pct.tolist(),
            "total_inertia": self.total_inertia,
            "warnings": list(self.warnings),
        }


def correspondence_analysis(table, row_ids=None, col_ids=None) -> PerceptualMap:
    """Classical CA of a non-negative two-way table.

    Pipeline: correspondence matrix P = N / n, standardized residuals
    S = Dr^-1/2 (P - r c^T) Dc^-1/2, SVD of S, principal coordinates
    Dr^-1/2 U sigma and Dc^-1/2 V sigma. Eigenvalues are squared singular
    values; total inertia equals chi-squared / n. All-zero rows or columns
    are dropped with a warning. An independence (rank-1) table yields a map
    with zero axes.
    """
    N = np.asarray(table, dtype=float)
    if N.ndim != 2:
        raise ParameterError("CA input must be a matrix")
    if (N < 0).any():
        raise ParameterError("CA input must be non-negative")
    n_rows, n_cols = N.shape
    row_ids = list(row_ids) if row_ids is not None else [str(i) for i in range(n_rows)]
    col_ids = list(col_ids) if col_ids is not None else [str(j) for j in range(n_cols)]

    notes = []
    keep_r = N.sum(axis=1) > 0
    keep_c = N.sum(axis=0) > 0
    if not keep_r.all():
        dropped = [row_ids[i] for i in np.flatnonzero(~keep_r)]
        notes.append(f"dropped all-zero rows: {dropped}")
        N, row_ids = N[keep_r], [row_ids[i] for i in np.flatnonzero(keep_r)]
    if not keep_c.all():
        dropped = [col_ids[j] for j in np.flatnonzero(~keep_c)]
        notes.append(f"dropped all-zero columns: {dropped}")
        N, col_ids = N[:, keep_c], [col_ids[j] for j in np.flatnonzero(keep_c)]

    empty = PerceptualMap(tuple(row_ids), tuple(col_ids),
                          np.zeros((len(row_ids), 0)), np.zeros((len(col_ids), 0)),
                          np.zeros(0), 0.0, tuple(notes))
    if N.size == 0 or N.sum() == 0:
        return empty

    P = N / N.sum()
    r = P.sum(axis=1)
    c = P.sum(axis=0)
    S = (P - np.outer(r, c)) / np.sqrt(np.outer(r, c))
    U, sv, Vt = np.linalg.svd(S, full_matrices=False)

    # relative cut removes the structural zero; absolute floor catches
    # rank-deficient tables where even the largest value is float noise
    keep = sv > max(sv[0] * _SV_RTOL, _SV_FLOOR)
    if not keep.any():
        return empty
    U, sv, V = U[:, keep], sv[keep], Vt[keep].T

    # canonical sign: largest-magnitude row coordinate positive per axis
    F = (U / np.sqrt(r)[:, None]) * sv[None, :]
    G = (V / np.sqrt(c)[:, None]) * sv[None, :]
    flip = np.sign(F[np.abs(F).argmax(axis=0), np.arange(F.shape[1])])
    flip[flip == 0] = 1.0
    F, G = F * flip[None, :], G * flip[None, :]

    eig = sv ** 2
    return PerceptualMap(tuple(row_ids), tuple(col_ids), F, G, eig,
                         float(eig.sum()), tuple(notes))


def mca(table: CategoricalTable) -> PerceptualMap:
    """Multiple correspondence analysis of a binned score table.

    Builds the complete disjunctive (indicator) matrix, one column per
    category including MISSING categories, and runs CA on it. Subject
    coordinates land on the rows of the map. Variables with a single
    observed category carry no information and are dropped with a warning.
    With Q variables and J observed categories the total inertia is
    (J - Q) / Q.
    """
    if len(table.subject_ids) < 2 or len(table.variables) < 2:
        raise ParameterError("MCA needs at least 2 subjects and 2 variables")
    notes = []
    blocks = []
    col_ids = []
    for j, var in enumerate(table.variables):
        cats = var.all_categories
        cells = table.cells[:, j]
        if len(np.unique(cells)) < 2:
            notes.append(f"dropped single-category variable {var.dimension_id!r}")
            _warnings.warn(notes[-1], stacklevel=2)
            continue
        block = np.zeros((len(table.subject_ids), len(cats)))
        block[np.arange(len(cells)), cells] = 1.0
        blocks.append(block)
        col_ids.extend(f"{var.dimension_id}={cat}" for cat in cats)
    if len(blocks) < 2:
        raise ParameterError("MCA needs at least 2 informative variables")
    indicator = np.hstack(blocks)
    pmap = correspondence_analysis(indicator, row_ids=table.subject_ids, col_ids=col_ids)
    return PerceptualMap(pmap.row_ids, pmap.col_ids, pmap.row_coords, pmap.col_coords,
                         pmap.eigenvalues, pmap.total_inertia,
                         tuple(notes) + pmap.warnings)


def variable_axis_correlation(table: CategoricalTable, pmap: PerceptualMap,
                              axes: int = 2) -> tuple[list[str], np.ndarray]:
    """Squared correlation ratio eta^2 of each variable with each map axis.

    For a variable's categories, eta^2 is the between-category share of the
    variance of subject coordinates on an axis: 1 when the categories
    perfectly separate the axis, 0 when they are unrelated (or the axis or
    variable is constant). Returns (variable ids, n_vars x axes matrix).
    """
    if tuple(table.subject_ids) != tuple(pmap.row_ids):
        raise ParameterError("perceptual map was not produced from this table")
    axes = min(axes, pmap.n_axes)
    ids = [v.dimension_id for v in table.variables]
    out = np.zeros((len(ids), axes))
    for k in range(axes):
        coords = pmap.row_coords[:, k]
        total = float(coords.var())
        if total == 0:
            continue
        grand = coords.mean()
        for j in range(len(ids)):
            cells = table.cells[:, j]
            between = 0.0
            for cat in np.unique(cells):
                group = coords[cells == cat]
                between += len(group) * (group.mean() - grand) ** 2
            out[j, k] = (between / len(coords)) / total
    return ids, out


def counts_from_csv(text: str) -> tuple[list[str], np.ndarray]:
    """Inverse of :meth:`CooccurrenceTable.to_csv` (any labelled count matrix)."""
    rows = [r.split(",") for r in text.strip().splitlines()]
    ids = rows[0][1:]
    counts = np.array([[int(c) for c in r[1:]] for r in rows[1:]])
    if counts.shape != (len(ids), len(ids)) or [r[0] for r in rows[1:]] != ids:
        raise ParameterError("count CSV must be square with matching row/column labels")
    return ids, counts


def eta_squared_csv(ids: list[str], values: np.ndarray) -> str:
    header = "variable," + ",".join(f"axis{k + 1}" for k in range(values.shape[1]))
    lines = [header]
    for ident, row in zip(ids, values):
        lines.append(ident + "," + ",".join(format(v, ".6f") for v in row))
    return "\n".join(lines) + "\n"
