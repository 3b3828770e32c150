"""VAS score matrices: ingestion, validation, JSON round-trip, and categorical binning.

A rating study produces one score in [0, 1] per subject per behavioural
dimension (the position of a mark on a visual analogue scale). Subjects
frequently skip scales, so every cell is optional. ``VasDataSet`` is the
immutable in-memory form; ``CategoricalTable`` is the binned form used by
the correspondence analytics.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DatasetError

MISSING_LABEL = "MISSING"


@dataclass(frozen=True)
class Subject:
    id: str
    label: str = ""

    def __post_init__(self):
        if not self.label:
            object.__setattr__(self, "label", self.id)


@dataclass(frozen=True)
class Dimension:
    """One behavioural scale; the extremes anchor the two ends of the line."""

    id: str
    label: str = ""
    left_extreme: str = ""
    right_extreme: str = ""

    def __post_init__(self):
        if not self.label:
            object.__setattr__(self, "label", self.id)


@dataclass(frozen=True)
class VasDataSet:
    """Subjects x dimensions matrix of optional scores in [0, 1].

    ``values`` uses NaN for absent markings. The array is locked read-only
    so instances can be shared freely across threads.
    """

    subjects: tuple[Subject, ...]
    dimensions: tuple[Dimension, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.subjects), len(self.dimensions)):
            raise DatasetError(
                f"value matrix shape {values.shape} does not match "
                f"{len(self.subjects)} subjects x {len(self.dimensions)} dimensions")
        present = ~np.isnan(values)
        if np.any(values[present] < 0) or np.any(values[present] > 1):
            bad = np.argwhere(present & ((values < 0) | (values > 1)))[0]
            raise DatasetError(
                f"score {values[bad[0], bad[1]]} out of [0, 1] at "
                f"subject {self.subjects[bad[0]].id!r}, dimension {self.dimensions[bad[1]].id!r}")
        _check_unique("subject", [s.id for s in self.subjects])
        _check_unique("dimension", [d.id for d in self.dimensions])
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def subject_ids(self) -> list[str]:
        return [s.id for s in self.subjects]

    @property
    def dimension_ids(self) -> list[str]:
        return [d.id for d in self.dimensions]

    def subject_index(self, subject_id: str) -> int:
        try:
            return self.subject_ids.index(subject_id)
        except ValueError:
            raise DatasetError(f"unknown subject id {subject_id!r}") from None

    def dimension_index(self, dimension_id: str) -> int:
        try:
            return self.dimension_ids.index(dimension_id)
        except ValueError:
            raise DatasetError(f"unknown dimension id {dimension_id!r}") from None

    def dimension_by_id(self, dimension_id: str) -> Dimension:
        return self.dimensions[self.dimension_index(dimension_id)]

    def to_json(self) -> str:
        """Canonical JSON export; ``from_json`` round-trips it exactly."""
        doc = {
            "subjects": [{"id": s.id, "label": s.label} for s in self.subjects],
            "dimensions": [{"id": d.id, "label": d.label,
                            "left": d.left_extreme, "right": d.right_extreme}
                           for d in self.dimensions],
            "values": [[None if math.isnan(v) else v for v in row] for row in self.values.tolist()],
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "VasDataSet":
        try:
            doc = json.loads(text)
            subjects = tuple(Subject(s["id"], s.get("label", "")) for s in doc["subjects"])
            dimensions = tuple(Dimension(d["id"], d.get("label", ""),
                                         d.get("left", ""), d.get("right", ""))
                               for d in doc["dimensions"])
            values = np.array([[np.nan if v is None else float(v) for v in row]
                               for row in doc["values"]], dtype=float)
            if values.size == 0:
                values = values.reshape(len(subjects), len(dimensions))
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetError(f"malformed dataset JSON: {exc}") from exc
        return cls(subjects, dimensions, values)


def _check_unique(kind: str, ids: list[str]):
    seen = set()
    for i in ids:
        if i in seen:
            raise DatasetError(f"duplicate {kind} id {i!r}")
        seen.add(i)


def ingest_csv(raw) -> VasDataSet:
    """Parse a VAS score CSV into a validated :class:`VasDataSet`.

    Expected layout: header row with the subject-id column name followed by
    one column per dimension; each later row is one subject. A header cell
    ``d4:Mobility`` splits into id and label. Empty cells mean "no marking".

    Accepts bytes, text, or a file-like object. Raises :class:`DatasetError`
    naming the offending cell for out-of-range values, duplicate ids, or
    ragged rows.
    """
    text = _as_text(raw)
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if len(rows) < 2:
        raise DatasetError("CSV needs a header row and at least one subject row")

    header = rows[0]
    dimensions = []
    for cell in header[1:]:
        dim_id, _, label = cell.strip().partition(":")
        dimensions.append(Dimension(dim_id.strip(), label.strip()))

    subjects = []
    values = np.full((len(rows) - 1, len(dimensions)), np.nan)
    for i, row in enumerate(rows[1:]):
        if len(row) != len(header):
            raise DatasetError(
                f"row {i + 2} has {len(row)} cells, expected {len(header)} (ragged CSV)")
        sid, _, slabel = row[0].strip().partition(":")
        subjects.append(Subject(sid.strip(), slabel.strip()))
        for j, cell in enumerate(row[1:]):
            cell = cell.strip()
            if not cell:
                continue
            try:
                v = float(cell)
            except ValueError:
                raise DatasetError(
                    f"non-numeric cell {cell!r} at row {i + 2} (subject {sid!r}), "
                    f"column {dimensions[j].id!r}") from None
            if not 0.0 <= v <= 1.0:
                raise DatasetError(
                    f"score {v} out of [0, 1] at row {i + 2} (subject {sid!r}), "
                    f"column {dimensions[j].id!r}")
            values[i, j] = v
    return VasDataSet(tuple(subjects), tuple(dimensions), values)


def export_csv(data: VasDataSet) -> str:
    """Inverse of :func:`ingest_csv`: values round-trip exactly (repr floats)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["subject"] + [_tagged(d.id, d.label) for d in data.dimensions])
    for subject, row in zip(data.subjects, data.values):
        cells = ["" if math.isnan(v) else repr(float(v)) for v in row]
        writer.writerow([_tagged(subject.id, subject.label)] + cells)
    return out.getvalue()


def _tagged(ident: str, label: str) -> str:
    return ident if label in ("", ident) else f"{ident}:{label}"


def _as_text(raw) -> str:
    if isinstance(raw, bytes):
        return raw.decode("utf-8")
    if isinstance(raw, str):
        return raw
    data = raw.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


# --- categorical binning -------------------------------------------------

BIN_LABELS = {2: ("low", "high"), 3: ("low", "mid", "high")}

# Fraction of present values that must sit in the outer thirds of the scale
# before auto mode treats the dimension as polarized (2 bins).
POLARIZED_SHARE = 0.8


@dataclass(frozen=True)
class CategoricalVariable:
    dimension_id: str
    categories: tuple[str, ...]       # substantive categories, low to high
    has_missing: bool                 # True when a MISSING category is appended

    @property
    def all_categories(self) -> tuple[str, ...]:
        return self.categories + ((MISSING_LABEL,) if self.has_missing else ())

    @property
    def missing_index(self) -> int:
        if not self.has_missing:
            raise DatasetError(f"variable {self.dimension_id!r} has no MISSING category")
        return len(self.categories)


@dataclass(frozen=True)
class CategoricalTable:
    """Binned view of a :class:`VasDataSet`: one category index per cell."""

    subject_ids: tuple[str, ...]
    variables: tuple[CategoricalVariable, ...]
    cells: np.ndarray = field(repr=False)   # (n_subjects, n_variables) int

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=int)
        if cells.shape != (len(self.subject_ids), len(self.variables)):
            raise DatasetError("cell matrix shape does not match subjects x variables")
        for j, var in enumerate(self.variables):
            n_cat = len(var.all_categories)
            if np.any(cells[:, j] < 0) or np.any(cells[:, j] >= n_cat):
                raise DatasetError(f"cell outside category range for variable {var.dimension_id!r}")
        cells = cells.copy()
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    def category_label(self, subject_idx: int, var_idx: int) -> str:
        return self.variables[var_idx].all_categories[self.cells[subject_idx, var_idx]]

    def to_dict(self) -> dict:
        return {
            "subjects": list(self.subject_ids),
            "variables": [{"dim": v.dimension_id, "categories": list(v.categories),
                           "has_missing": v.has_missing} for v in self.variables],
            "cells": self.cells.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CategoricalTable":
        variables = tuple(CategoricalVariable(v["dim"], tuple(v["categories"]),
                                              bool(v["has_missing"]))
                          for v in doc["variables"])
        return cls(tuple(doc["subjects"]), variables, np.asarray(doc["cells"], dtype=int))


def bin_index(value: float, n_bins: int) -> int:
    """Equal-width bin of ``value`` in [0, 1]; boundary values go up, 1.0 stays in the top bin."""
    return min(int(math.floor(n_bins * value)), n_bins - 1)


def auto_bin_count(present_values: np.ndarray) -> int:
    """2 bins for polarized dimensions, else 3.

    Polarized = at least ``POLARIZED_SHARE`` of present values in the outer
    thirds [0, 1/3) or (2/3, 1]. Dimensions with no present values get 3 bins.
    """
    if present_values.size == 0:
        return 3
    outer = np.sum((present_values < 1 / 3) | (present_values > 2 / 3))
    return 2 if outer / present_values.size >= POLARIZED_SHARE else 3


def bin_to_categories(data: VasDataSet, bins_per_dim: dict | None = None) -> CategoricalTable:
    """Bin every dimension into 2 or 3 ordered categories plus MISSING.

    ``bins_per_dim`` maps dimension id to 2, 3, or "auto" (the default for
    dimensions not listed). A MISSING category is added only for dimensions
    that actually have absent markings.
    """
    bins_per_dim = dict(bins_per_dim or {})
    unknown = set(bins_per_dim) - set(data.dimension_ids)
    if unknown:
        raise DatasetError(f"bins_per_dim names unknown dimensions: {sorted(unknown)}")

    variables = []
    cells = np.zeros((len(data.subjects), len(data.dimensions)), dtype=int)
    for j, dim in enumerate(data.dimensions):
        column = data.values[:, j]
        present = column[~np.isnan(column)]
        choice = bins_per_dim.get(dim.id, "auto")
        n_bins = auto_bin_count(present) if choice == "auto" else int(choice)
        if n_bins not in BIN_LABELS:
            raise DatasetError(f"dimension {dim.id!r}: bin count must be 2, 3, or 'auto'")
        has_missing = bool(np.isnan(column).any())
        var = CategoricalVariable(dim.id, BIN_LABELS[n_bins], has_missing)
        variables.append(var)
        for i, v in enumerate(column):
            cells[i, j] = var.missing_index if math.isnan(v) else bin_index(v, n_bins)
    return CategoricalTable(tuple(data.subject_ids), tuple(variables), cells)
