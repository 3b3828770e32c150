"""From clusters to proto-personas: similarity, dendrograms, merging, reporting.

Clusters found at different pivots (or different beta runs) often describe
nearly the same behaviour pattern. The tools here quantify that overlap,
arrange clusters in a dendrogram, merge the sets below a chosen
dissimilarity cut into proto-personas, and render those as template text
and radar-plot data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import Dimension
from .doc import SubspaceCluster, natural_key, natural_sorted
from .errors import ForgeError, ParameterError

DEFAULT_CONFLICT_STD = 0.15
LOW_BAND = 0.33
HIGH_BAND = 0.67


# --- similarity -------------------------------------------------------------

def shared_dims(a: SubspaceCluster, b: SubspaceCluster) -> list[str]:
    """Dimensions present in both subspaces, natural order."""
    return natural_sorted(set(a.subspace) & set(b.subspace))


def cluster_mean_vector(c: SubspaceCluster, dims) -> np.ndarray:
    """Member means of ``c`` on ``dims`` (must be inside c's subspace), in natural order."""
    missing = set(dims) - set(c.subspace)
    if missing:
        raise ParameterError(
            f"dims {natural_sorted(missing)} are outside the subspace of cluster {c.id!r}")
    return np.array([c.means[d] for d in natural_sorted(dims)], dtype=float)


def similarity(a: SubspaceCluster, b: SubspaceCluster) -> float:
    """Behaviour-pattern similarity in [0, 1].

    Dice overlap of the two subspaces, discounted by the mean squared gap
    between the clusters' mean vectors on the shared dimensions:

        sim = (2|F| / (|Da| + |Db|)) * (1 - sum_i (mb_i - ma_i)^2 / |F|)

    1 means same subspace and identical means; 0 means no shared dimension
    or shared means at opposite extremes everywhere. Member identities do
    not enter: only the subspace and the central tendency count.
    """
    F = shared_dims(a, b)
    if not F:
        return 0.0
    gaps = cluster_mean_vector(b, F) - cluster_mean_vector(a, F)
    dice = 2 * len(F) / (len(a.subspace) + len(b.subspace))
    return dice * (1.0 - float(np.mean(gaps ** 2)))


@dataclass(frozen=True)
class SimilarityMatrix:
    ids: tuple[str, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (len(self.ids), len(self.ids)):
            raise ParameterError("similarity matrix shape does not match ids")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def value(self, a: str, b: str) -> float:
        return float(self.matrix[self.ids.index(a), self.ids.index(b)])

    def to_csv(self) -> str:
        lines = ["cluster," + ",".join(self.ids)]
        for cid, row in zip(self.ids, self.matrix):
            lines.append(cid + "," + ",".join(format(v, ".6f") for v in row))
        return "\n".join(lines) + "\n"


def similarity_matrix(clusters) -> SimilarityMatrix:
    """Pairwise similarity of a cluster list; symmetric with unit diagonal."""
    clusters = list(clusters)
    n = len(clusters)
    m = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            m[i, j] = m[j, i] = similarity(clusters[i], clusters[j])
    return SimilarityMatrix(tuple(c.id for c in clusters), m)


def drop_redundant(clusters, threshold: float) -> list[SubspaceCluster]:
    """Optional post-filter: drop clusters too similar to a higher-quality one."""
    kept: list[SubspaceCluster] = []
    for c in sorted(clusters, key=lambda c: (-c.quality, tuple(natural_key(i) for i in c.members))):
        if all(similarity(c, k) <= threshold for k in kept):
            kept.append(c)
    return kept


# --- dendrograms ------------------------------------------------------------

@dataclass(frozen=True)
class Merge:
    left: int      # node index: 0..n-1 are leaves, n+i is the i-th merge
    right: int
    height: float


@dataclass(frozen=True)
class Dendrogram:
    leaves: tuple[str, ...]
    merges: tuple[Merge, ...]

    @property
    def root_height(self) -> float:
        return self.merges[-1].height if self.merges else 0.0

    def to_dict(self) -> dict:
        return {"leaves": list(self.leaves),
                "merges": [{"left": m.left, "right": m.right, "height": m.height}
                           for m in self.merges]}

    @classmethod
    def from_dict(cls, doc: dict) -> "Dendrogram":
        return cls(tuple(doc["leaves"]),
                   tuple(Merge(int(m["left"]), int(m["right"]), float(m["height"]))
                         for m in doc["merges"]))


LINKAGES = ("average", "single", "complete")


def build_dendrogram(sims: SimilarityMatrix, linkage: str = "average") -> Dendrogram:
    """Agglomerative clustering on dissimilarity 1 - similarity.

    ``average`` (the default) merges at the mean pairwise dissimilarity,
    ``single`` at the minimum, ``complete`` at the maximum. Equal candidate
    distances break on the smallest (left, right) node-index pair, so the
    merge order is deterministic.
    """
    if linkage not in LINKAGES:
        raise ParameterError(f"linkage must be one of {LINKAGES} (got {linkage!r})")
    n = len(sims.ids)
    if n < 2:
        raise ParameterError("need at least 2 clusters to build a dendrogram")
    base = 1.0 - sims.matrix
    reduce = {"average": np.mean, "single": np.min, "complete": np.max}[linkage]

    active: dict[int, list[int]] = {i: [i] for i in range(n)}   # node -> leaf indices
    merges: list[Merge] = []
    for step in range(n - 1):
        nodes = sorted(active)
        best = None
        for ai, a in enumerate(nodes):
            for b in nodes[ai + 1:]:
                d = float(reduce(base[np.ix_(active[a], active[b])]))
                key = (d, a, b)
                if best is None or key < best:
                    best = key
        d, a, b = best
        new = n + step
        active[new] = active.pop(a) + active.pop(b)
        merges.append(Merge(a, b, d))
    return Dendrogram(tuple(sims.ids), tuple(merges))


def cut_dendrogram(dend: Dendrogram, height: float) -> list[list[str]]:
    """Partition of the leaves induced by keeping merges at or below ``height``.

    Cutting at 0 gives singletons (absent zero-height merges); cutting at or
    above the root height gives one group. Lower cuts refine higher ones.
    """
    if not 0 <= height <= 1:
        raise ParameterError(f"cut height must be in [0, 1] (got {height})")
    n = len(dend.leaves)
    parent = list(range(n + len(dend.merges)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, m in enumerate(dend.merges):
        if m.height <= height:
            node = n + i
            parent[find(m.left)] = node
            parent[find(m.right)] = node

    groups: dict[int, list[str]] = {}
    for leaf, ident in enumerate(dend.leaves):
        groups.setdefault(find(leaf), []).append(ident)
    parts = [natural_sorted(g) for g in groups.values()]
    return sorted(parts, key=lambda g: natural_key(g[0]))


# --- merging into proto-personas --------------------------------------------

@dataclass(frozen=True)
class PersonaDim:
    dim_id: str
    mean: float
    std: float          # sample std over the supporting clusters (0 for support 1)
    support: int        # how many source clusters carry the dimension
    conflicting: bool   # std above the conflict threshold; candidate for veto


@dataclass(frozen=True)
class ProtoPersona:
    """A merged cluster set: the stable dimensions and who exhibits them."""

    sources: tuple[str, ...]            # source cluster ids
    members: tuple[str, ...]            # union of source members
    dims: tuple[PersonaDim, ...]        # support-descending, then dimension id
    name: str = ""

    def dim(self, dim_id: str) -> PersonaDim:
        for d in self.dims:
            if d.dim_id == dim_id:
                return d
        raise KeyError(dim_id)

    @property
    def dim_ids(self) -> list[str]:
        return [d.dim_id for d in self.dims]

    def without_dims(self, vetoed) -> "ProtoPersona":
        vetoed = set(vetoed)
        return replace(self, dims=tuple(d for d in self.dims if d.dim_id not in vetoed))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "sources": list(self.sources),
            "members": list(self.members),
            "dims": [{"dim": d.dim_id, "mean": d.mean, "std": d.std,
                      "support": d.support, "conflicting": d.conflicting}
                     for d in self.dims],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ProtoPersona":
        dims = tuple(PersonaDim(d["dim"], float(d["mean"]), float(d["std"]),
                                int(d["support"]), bool(d["conflicting"]))
                     for d in doc["dims"])
        return cls(tuple(doc["sources"]), tuple(doc["members"]), dims,
                   str(doc.get("name", "")))


def merge_clusters(clusters, conflict_std: float = DEFAULT_CONFLICT_STD) -> ProtoPersona:
    """Merge a set of clusters into one proto-persona.

    A dimension is kept when it lies in the subspace of at least half
    (ceil(n/2)) of the n source clusters. Its score is the arithmetic mean
    of the supporting clusters' means; the sample standard deviation across
    those means flags conflicting dimensions (std > ``conflict_std``) for
    the persona designer to veto.
    """
    clusters = list(clusters)
    if not clusters:
        raise ParameterError("cannot merge an empty cluster set")
    need = math.ceil(len(clusters) / 2)

    support: dict[str, list[float]] = {}
    for c in clusters:
        for dim in c.subspace:
            support.setdefault(dim, []).append(c.means[dim])

    dims = []
    for dim, vals in support.items():
        if len(vals) < need:
            continue
        arr = np.array(vals)
        std = float(arr.std(ddof=1)) if len(vals) > 1 else 0.0
        dims.append(PersonaDim(dim_id=dim, mean=float(arr.mean()), std=std,
                               support=len(vals), conflicting=std > conflict_std))
    dims.sort(key=lambda d: (-d.support, natural_key(d.dim_id)))

    members = natural_sorted({m for c in clusters for m in c.members})
    sources = tuple(c.id for c in clusters)
    return ProtoPersona(sources=sources, members=tuple(members), dims=tuple(dims))


# --- reporting --------------------------------------------------------------

def _phrases(dim: Dimension) -> tuple[str, str, str]:
    left = dim.left_extreme or f"low {dim.label}"
    right = dim.right_extreme or f"high {dim.label}"
    return left, right, f"moderate {dim.label}"


def describe(persona: ProtoPersona, dimensions) -> str:
    """Template description: one clause per stable dimension.

    ``dimensions`` maps dimension id to :class:`Dimension` (or is an
    iterable of them). Means at or below 0.33 phrase the left extreme, at or
    above 0.67 the right extreme, anything between reads as moderate. Each
    clause carries its dimension id so the reader can trace it back to the
    scale. Deterministic for identical input.
    """
    meta = dimensions if isinstance(dimensions, dict) else {d.id: d for d in dimensions}
    name = persona.name or "Unnamed proto-persona"
    if not persona.dims:
        return f"{name}: no stable traits (no dimension was shared by half of the merged clusters)."
    clauses = []
    for pd in persona.dims:
        if pd.dim_id not in meta:
            raise ForgeError(f"no dimension metadata for {pd.dim_id!r}")
        left, right, mid = _phrases(meta[pd.dim_id])
        phrase = left if pd.mean <= LOW_BAND else right if pd.mean >= HIGH_BAND else mid
        flag = " [CONFLICT]" if pd.conflicting else ""
        clauses.append(f"{phrase} ({pd.dim_id}){flag}")
    return f"{name}: " + "; ".join(clauses) + "."


def report_markdown(personas, dimensions) -> str:
    """Markdown report over a list of (named) proto-personas."""
    lines = ["# Proto-persona report", ""]
    for p in personas:
        lines.append(f"## {p.name or 'Unnamed proto-persona'}")
        lines.append("")
        lines.append(f"- sources: {', '.join(p.sources)}")
        lines.append(f"- members: {', '.join(p.members)}")
        lines.append("")
        lines.append("| dimension | mean | std | support | conflict |")
        lines.append("|---|---|---|---|---|")
        for d in p.dims:
            lines.append(f"| {d.dim_id} | {d.mean:.3f} | {d.std:.3f} | {d.support} "
                         f"| {'yes' if d.conflicting else ''} |")
        lines.append("")
        lines.append(describe(p, dimensions))
        lines.append("")
    return "\n".join(lines)


def _axes_of(entity) -> tuple[str, list[str], dict[str, float]]:
    if isinstance(entity, SubspaceCluster):
        return entity.id, list(entity.subspace), dict(entity.means)
    if isinstance(entity, ProtoPersona):
        return (entity.name or "+".join(entity.sources),
                entity.dim_ids, {d.dim_id: d.mean for d in entity.dims})
    raise ParameterError(f"cannot plot {type(entity).__name__} as a radar series")


def radar_data(a, b, dimensions=None) -> dict:
    """Plot data for a side-by-side radar comparison of two clusters/personas.

    Axes are the union of both subspaces. The rim of an axis is the
    dimension's right extreme and the centre the opposite one, so a score
    plots as its distance from the centre. Where an entity does not cluster
    on an axis its value is null and the axis is marked greyed for it.
    """
    meta = {}
    if dimensions is not None:
        meta = dimensions if isinstance(dimensions, dict) else {d.id: d for d in dimensions}
    id_a, dims_a, means_a = _axes_of(a)
    id_b, dims_b, means_b = _axes_of(b)
    axes = natural_sorted(set(dims_a) | set(dims_b))

    def axis_info(dim_id: str) -> dict:
        d = meta.get(dim_id)
        return {"dim": dim_id,
                "label": d.label if d else dim_id,
                "rim": (d.right_extreme or f"high {d.label}") if d else "high",
                "centre": (d.left_extreme or f"low {d.label}") if d else "low"}

    def series(ident: str, means: dict[str, float]) -> dict:
        return {"id": ident,
                "values": [means.get(ax) for ax in axes],
                "greyed": [ax not in means for ax in axes]}

    return {"axes": [axis_info(ax) for ax in axes],
            "series": [series(id_a, means_a), series(id_b, means_b)]}
