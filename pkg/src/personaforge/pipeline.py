"""Batch pipeline: the library functions behind every CLI subcommand.

Each stage reads and writes plain artifacts (JSON/CSV/Markdown), so a run
is fully scriptable and reproducible: identical config and seed give
byte-identical files.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .correspondence import (
    CooccurrenceTable,
    correspondence_analysis,
    cooccurrence,
    eta_squared_csv,
    mca,
    variable_axis_correlation,
)
from .dataset import CategoricalTable, VasDataSet, bin_to_categories, ingest_csv
from .doc import (
    DEFAULT_TRIAL_CAP,
    DocParams,
    DocRunResult,
    SubspaceCluster,
    doc_full_coverage,
    estimate_w,
    natural_sorted,
)
from .errors import ForgeError, ParameterError
from .synthesis import (
    build_dendrogram,
    cut_dendrogram,
    describe,
    merge_clusters,
    report_markdown,
    similarity_matrix,
)

MAX_TRIALS_ENV = "FORGE_MAX_TRIALS"


def trial_cap() -> int:
    """m cap, overridable through the FORGE_MAX_TRIALS environment variable."""
    raw = os.environ.get(MAX_TRIALS_ENV)
    return int(raw) if raw else DEFAULT_TRIAL_CAP


@dataclass(frozen=True)
class RunConfig:
    """Everything a full pipeline run needs; mirrors the CLI flags."""

    input_path: str
    out_dir: str
    w: float | str = "auto"              # numeric, or "auto" to estimate
    alpha: float = 0.1
    betas: tuple[float, ...] = (0.25, 0.45, 0.65, 0.85)
    seed: int = 0
    linkage: str = "average"
    cut_height: float = 0.5
    bins: dict | None = None             # per-dimension bin override
    exclude: tuple[str, ...] = ()
    conflict_std: float = 0.15
    parallel: bool = False
    skip_mca: bool = False

    def __post_init__(self):
        if not self.betas:
            raise ParameterError("need at least one beta value")
        for b in self.betas:
            if not 0 < b < 1:
                raise ParameterError(f"beta must be in (0, 1) (got {b})")


# --- artifact serialization -------------------------------------------------

def dumps(obj) -> str:
    """Canonical JSON for artifacts: sorted keys, stable float repr."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def run_to_dict(result: DocRunResult) -> dict:
    p = result.params
    return {
        "params": {"w": p.w, "alpha": p.alpha, "beta": p.beta, "seed": p.seed},
        "clusters": [c.to_dict() for c in result.clusters],
        "warnings": list(result.warnings),
    }


def runs_to_json(results: list[DocRunResult]) -> str:
    return dumps({"runs": [run_to_dict(r) for r in results]})


def clusters_from_json(text: str) -> list[SubspaceCluster]:
    doc = json.loads(text)
    runs = doc["runs"] if "runs" in doc else [doc]
    out = []
    for run in runs:
        out.extend(SubspaceCluster.from_dict(c) for c in run["clusters"])
    return out


def clusters_csv(clusters, dimension_ids=None) -> str:
    """Dimensions-as-rows table: one column per cluster, NA off-subspace.

    The trailing ``dimensions`` row gives each cluster's subspace size.
    """
    clusters = list(clusters)
    if dimension_ids is None:
        dimension_ids = natural_sorted({d for c in clusters for d in c.subspace})
    lines = ["cluster," + ",".join(c.id for c in clusters)]
    lines.append("members," + ",".join(".".join(c.members) for c in clusters))
    for dim in dimension_ids:
        cells = [format(c.means[dim], ".3f") if dim in c.means else "NA" for c in clusters]
        lines.append(dim + "," + ",".join(cells))
    lines.append("dimensions," + ",".join(str(len(c.subspace)) for c in clusters))
    return "\n".join(lines) + "\n"


def load_dataset(path) -> VasDataSet:
    """Dataset from canonical JSON or score CSV, decided by content."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        return VasDataSet.from_json(text)
    return ingest_csv(text)


# --- stages -------------------------------------------------------------------

def cluster_stage(data: VasDataSet, w: float, alpha: float, betas, seed: int,
                  parallel: bool = False) -> list[DocRunResult]:
    cap = trial_cap()
    return [doc_full_coverage(data,
                              DocParams(w=w, alpha=alpha, beta=b, seed=seed, trial_cap=cap),
                              parallel=parallel)
            for b in betas]


def merge_stage(clusters, cut_height: float, linkage: str = "average",
                conflict_std: float = 0.15):
    """Similarity -> dendrogram -> cut -> merged proto-personas.

    Returns (similarity matrix, dendrogram, merge sets, personas); personas
    come back in merge-set order, named Proto-1, Proto-2, ...
    """
    clusters = list(clusters)
    by_id = {c.id: c for c in clusters}
    sims = similarity_matrix(clusters)
    dend = build_dendrogram(sims, linkage)
    sets = cut_dendrogram(dend, cut_height)
    personas = []
    for i, group in enumerate(sets):
        p = merge_clusters([by_id[cid] for cid in group], conflict_std=conflict_std)
        personas.append(type(p)(p.sources, p.members, p.dims, name=f"Proto-{i + 1}"))
    return sims, dend, sets, personas


def run_pipeline(config: RunConfig) -> dict:
    """Execute every stage and write one artifact per stage into out_dir.

    Returns the manifest (also written as manifest.json). Raises ForgeError
    with the failing stage name on error.
    """
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest: dict = {"stages": [], "artifacts": {}, "config": {
        "input": str(config.input_path), "w": config.w, "alpha": config.alpha,
        "betas": list(config.betas), "seed": config.seed, "linkage": config.linkage,
        "cut_height": config.cut_height, "exclude": list(config.exclude),
    }}

    def write(name: str, text: str) -> None:
        (out / name).write_text(text, encoding="utf-8")
        manifest["artifacts"][name] = name

    def stage(name: str):
        manifest["stages"].append(name)

    try:
        stage("ingest")
        data = load_dataset(config.input_path)
        write("dataset.json", data.to_json())

        w = config.w
        if w == "auto":
            stage("estimate-w")
            est = estimate_w(data)
            write("westimate.json", dumps({"raw": est.raw, "suggested": est.suggested,
                                           "per_subject": est.per_subject}))
            w = est.suggested
        w = float(w)

        stage("cluster")
        runs = cluster_stage(data, w, config.alpha, config.betas, config.seed,
                             parallel=config.parallel)
        write("clusters.json", runs_to_json(runs))
        for run in runs:
            write(f"clusters_b{run.params.beta_tag}.csv",
                  clusters_csv(run.clusters, data.dimension_ids))
        clusters = [c for run in runs for c in run.clusters]
        write("clusters_all.csv", clusters_csv(clusters, data.dimension_ids))

        stage("similarity")
        sims, dend, sets, personas = merge_stage(
            clusters, config.cut_height, config.linkage, config.conflict_std)
        write("similarity.csv", sims.to_csv())
        stage("dendrogram")
        write("dendrogram.json", dumps(dend.to_dict()))
        stage("merge")
        write("merge_sets.json", dumps({"cut": config.cut_height, "sets": sets}))
        write("protos.json", dumps({"personas": [p.to_dict() for p in personas]}))

        stage("describe")
        dims = {d.id: d for d in data.dimensions}
        write("report.md", report_markdown(personas, dims))

        stage("cooccur")
        table = cooccurrence(clusters, exclude=config.exclude)
        write("cooccurrence.csv", table.to_csv())

        stage("ca")
        pmap = correspondence_analysis(table.counts, row_ids=table.subject_ids,
                                       col_ids=table.subject_ids)
        write("ca.json", dumps(pmap.to_dict()))

        if not config.skip_mca:
            stage("bin")
            cat = bin_to_categories(data, config.bins)
            write("categorical.json", dumps(cat.to_dict()))
            stage("mca")
            mca_map = mca(cat)
            write("mca.json", dumps(mca_map.to_dict()))
            stage("corr")
            ids, values = variable_axis_correlation(cat, mca_map, axes=2)
            write("eta_squared.csv", eta_squared_csv(ids, values))
    except ForgeError as exc:
        raise ForgeError(f"stage {manifest['stages'][-1]!r} failed: {exc}") from exc

    write("manifest.json", dumps(manifest))
    return manifest
