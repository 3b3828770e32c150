"""The forge command line: one subcommand per pipeline stage.

Every subcommand is a thin shell over :mod:`personaforge.pipeline`; the
same calls are available as library functions. Re-running a subcommand
with the same inputs and seed writes byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
import warnings
from pathlib import Path

from . import __version__
from .correspondence import (
    cooccurrence,
    correspondence_analysis,
    counts_from_csv,
    eta_squared_csv,
    mca,
    variable_axis_correlation,
)
from .dataset import CategoricalTable, bin_to_categories
from .doc import estimate_w
from .errors import ForgeError
from .pipeline import (
    RunConfig,
    cluster_stage,
    clusters_csv,
    clusters_from_json,
    dumps,
    load_dataset,
    merge_stage,
    run_pipeline,
    runs_to_json,
)
from .synthesis import ProtoPersona, build_dendrogram, report_markdown, similarity_matrix

CI_ENV = "FORGE_CI"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _beta_list(raw: str) -> tuple[float, ...]:
    return tuple(float(b) for b in raw.split(","))


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    if os.environ.get(CI_ENV):
        raise ForgeError(f"--seed is required when {CI_ENV} is set")
    seed = secrets.randbelow(2 ** 31)
    print(f"seed: {seed} (pass --seed {seed} to reproduce)", file=sys.stderr)
    return seed


def cmd_ingest(args) -> int:
    data = load_dataset(args.input)
    _emit(data.to_json(), args.out)
    print(f"ok: {len(data.subjects)} subjects x {len(data.dimensions)} dimensions",
          file=sys.stderr)
    return 0


def cmd_estimate_w(args) -> int:
    est = estimate_w(load_dataset(args.input))
    _emit(dumps({"raw": est.raw, "suggested": est.suggested,
                 "per_subject": est.per_subject}), args.out)
    return 0


def cmd_cluster(args) -> int:
    data = load_dataset(args.input)
    seed = _resolve_seed(args.seed)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    w = args.w
    if w == "auto":
        est = estimate_w(data)
        (outdir / "westimate.json").write_text(
            dumps({"raw": est.raw, "suggested": est.suggested}), encoding="utf-8")
        w = est.suggested
    runs = cluster_stage(data, float(w), args.alpha, _beta_list(args.beta), seed,
                         parallel=args.parallel)
    (outdir / "clusters.json").write_text(runs_to_json(runs), encoding="utf-8")
    for run in runs:
        name = f"clusters_b{run.params.beta_tag}.csv"
        (outdir / name).write_text(clusters_csv(run.clusters, data.dimension_ids),
                                   encoding="utf-8")
        print(f"beta {run.params.beta}: {len(run.clusters)} clusters"
              + (f", {len(run.warnings)} warnings" if run.warnings else ""),
              file=sys.stderr)
    return 0


def cmd_similarity(args) -> int:
    sims = similarity_matrix(clusters_from_json(_read(args.clusters)))
    _emit(sims.to_csv(), args.out)
    return 0


def cmd_dendrogram(args) -> int:
    clusters = clusters_from_json(_read(args.clusters))
    dend = build_dendrogram(similarity_matrix(clusters), args.linkage)
    _emit(dumps(dend.to_dict()), args.out)
    return 0


def cmd_merge(args) -> int:
    clusters = clusters_from_json(_read(args.clusters))
    _, dend, sets, personas = merge_stage(clusters, args.cut, args.linkage,
                                          args.conflict_std)
    _emit(dumps({"cut": args.cut, "linkage": args.linkage, "sets": sets,
                 "personas": [p.to_dict() for p in personas]}), args.out)
    return 0


def cmd_describe(args) -> int:
    doc = json.loads(_read(args.protos))
    personas = [ProtoPersona.from_dict(p) for p in doc["personas"]]
    dims = {d.id: d for d in load_dataset(args.dataset).dimensions}
    _emit(report_markdown(personas, dims), args.out)
    return 0


def cmd_cooccur(args) -> int:
    clusters = clusters_from_json(_read(args.clusters))
    exclude = tuple(args.exclude.split(",")) if args.exclude else ()
    table = cooccurrence(clusters, exclude=exclude)
    _emit(table.to_csv(), args.out)
    return 0


def cmd_ca(args) -> int:
    ids, counts = counts_from_csv(_read(args.counts))
    pmap = correspondence_analysis(counts, row_ids=ids, col_ids=ids)
    _emit(dumps(pmap.to_dict()), args.out)
    return 0


def cmd_bin(args) -> int:
    data = load_dataset(args.input)
    bins = {}
    if args.bins:
        for part in args.bins.split(","):
            dim, _, count = part.partition("=")
            bins[dim] = count if count == "auto" else int(count)
    table = bin_to_categories(data, bins)
    _emit(dumps(table.to_dict()), args.out)
    return 0


def cmd_mca(args) -> int:
    table = CategoricalTable.from_dict(json.loads(_read(args.categorical)))
    _emit(dumps(mca(table).to_dict()), args.out)
    return 0


def cmd_corr(args) -> int:
    table = CategoricalTable.from_dict(json.loads(_read(args.categorical)))
    pmap = mca(table)
    ids, values = variable_axis_correlation(table, pmap, axes=args.axes)
    _emit(eta_squared_csv(ids, values), args.out)
    return 0


def cmd_pipeline(args) -> int:
    config = RunConfig(
        input_path=args.input, out_dir=args.out,
        w=args.w if args.w == "auto" else float(args.w),
        alpha=args.alpha, betas=_beta_list(args.beta), seed=_resolve_seed(args.seed),
        linkage=args.linkage, cut_height=args.cut, exclude=tuple(
            args.exclude.split(",")) if args.exclude else (),
        conflict_std=args.conflict_std, parallel=args.parallel, skip_mca=args.skip_mca)
    manifest = run_pipeline(config)
    print(f"wrote {len(manifest['artifacts'])} artifacts to {args.out}", file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.data_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _add_out(p, help_text="output path (stdout if omitted)"):
    p.add_argument("-o", "--out", default=None, help=help_text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forge",
        description="Subspace-clustering workbench for persona development")
    parser.add_argument("--version", action="version", version=f"forge {__version__}")
    parser.add_argument("--config", default=None,
                        help="JSON file with default values for the subcommand flags "
                             "(explicit flags win)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a score CSV, emit canonical dataset JSON")
    p.add_argument("input")
    _add_out(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("estimate-w", help="nearest-neighbour estimate of the w parameter")
    p.add_argument("input")
    _add_out(p)
    p.set_defaults(func=cmd_estimate_w)

    p = sub.add_parser("cluster", help="full-coverage subspace clustering, one run per beta")
    p.add_argument("input")
    p.add_argument("-o", "--out", default="forge-out", help="output directory")
    p.add_argument("--beta", default="0.25,0.45,0.65,0.85",
                   help="comma-separated beta values")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--w", default="auto", help="max per-dimension distance, or 'auto'")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--parallel", action="store_true")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("similarity", help="pairwise cluster similarity matrix (CSV)")
    p.add_argument("clusters", help="clusters.json from the cluster stage")
    _add_out(p)
    p.set_defaults(func=cmd_similarity)

    p = sub.add_parser("dendrogram", help="agglomerative dendrogram over clusters (JSON)")
    p.add_argument("clusters")
    p.add_argument("--linkage", choices=("average", "single", "complete"), default="average")
    _add_out(p)
    p.set_defaults(func=cmd_dendrogram)

    p = sub.add_parser("merge", help="cut the dendrogram and merge each set into a proto-persona")
    p.add_argument("clusters")
    p.add_argument("--cut", type=float, required=True, help="dissimilarity cut height in [0,1]")
    p.add_argument("--linkage", choices=("average", "single", "complete"), default="average")
    p.add_argument("--conflict-std", type=float, default=0.15)
    _add_out(p)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("describe", help="markdown report for merged proto-personas")
    p.add_argument("protos", help="output of the merge subcommand")
    p.add_argument("dataset", help="dataset JSON/CSV with dimension labels")
    _add_out(p)
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("cooccur", help="subject co-occurrence counts over clusters (CSV)")
    p.add_argument("clusters")
    p.add_argument("--exclude", default="", help="comma-separated cluster ids to skip")
    _add_out(p)
    p.set_defaults(func=cmd_cooccur)

    p = sub.add_parser("ca", help="correspondence analysis of a count matrix CSV")
    p.add_argument("counts")
    _add_out(p)
    p.set_defaults(func=cmd_ca)

    p = sub.add_parser("bin", help="bin scores into 2/3 categories per dimension")
    p.add_argument("input")
    p.add_argument("--bins", default="",
                   help="per-dimension overrides, e.g. 'd1=2,d7=3' (default auto)")
    _add_out(p)
    p.set_defaults(func=cmd_bin)

    p = sub.add_parser("mca", help="multiple correspondence analysis of binned categories")
    p.add_argument("categorical", help="categorical.json from the bin subcommand")
    _add_out(p)
    p.set_defaults(func=cmd_mca)

    p = sub.add_parser("corr", help="variable-axis correlation ratios (eta^2) for the MCA map")
    p.add_argument("categorical")
    p.add_argument("--axes", type=int, default=2)
    _add_out(p)
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser("pipeline", help="run every stage end to end into an output directory")
    p.add_argument("input")
    p.add_argument("-o", "--out", default="forge-out")
    p.add_argument("--beta", default="0.25,0.45,0.65,0.85")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--w", default="auto")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--linkage", choices=("average", "single", "complete"), default="average")
    p.add_argument("--cut", type=float, default=0.5)
    p.add_argument("--exclude", default="")
    p.add_argument("--conflict-std", type=float, default=0.15)
    p.add_argument("--parallel", action="store_true")
    p.add_argument("--skip-mca", action="store_true")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("serve", help="start the HTTP workbench service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8571)
    p.add_argument("--data-dir", default="forge-sessions")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    config_path = _peek_config(argv)
    if config_path:
        try:
            defaults = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            print(json.dumps({"error": {"type": "ConfigError", "message": str(exc)}}),
                  file=sys.stderr)
            return 2
        for action in parser._subparsers._group_actions[0].choices.values():
            known = {a.dest for a in action._actions}
            action.set_defaults(**{k: v for k, v in defaults.items() if k in known})
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            args = parser.parse_args(argv)
            return args.func(args)
    except ForgeError as exc:
        print(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}),
              file=sys.stderr)
        return 2


def _peek_config(argv) -> str | None:
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if arg.startswith("--config="):
            return arg.split("=", 1)[1]
    return None


if __name__ == "__main__":
    sys.exit(main())
