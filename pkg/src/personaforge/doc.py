"""Overlapping density-based projective clustering with a fixed pivot subject.

The search is a randomized two-loop procedure. For a pivot subject ``o`` it
repeatedly samples a small discrimination set ``X`` of other subjects,
keeps the dimensions on which everyone in ``X`` lies within ``w`` of the
pivot (that induced dimension set is the candidate subspace), collects all
subjects inside the width-``2w`` hyper-rectangle around the pivot on those
dimensions, and finally returns the densest candidate under the quality
score ``|C| * (1/beta)^|D|``. Running the search once per subject gives an
overlapping cover of the whole sample: every subject anchors one cluster.

Missing scores are treated as absence of evidence: a dimension with a
missing value in ``{pivot} union X`` never enters the subspace, and a
subject missing a value on any subspace dimension fails the membership
test. Accepted clusters therefore always have complete data on their own
subspace, which keeps per-dimension means well defined.

Determinism: every trial's randomness comes from a counter-based generator
keyed by (seed, target index), and trial ``t`` consumes exactly the words
at counter offsets ``[t*r, (t+1)*r)``. Results are identical whatever the
chunking or target-level parallelism.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .dataset import VasDataSet
from .errors import NoClusterFound, NoSharedDims, ParameterError

DEFAULT_TRIAL_CAP = 10_000_000
_CHUNK = 32768  # trials per vectorized batch; multiple of 4 keeps chunk offsets block-aligned
_PACK_LIMIT = 64   # dimensions that fit one uint64 mask take the packed kernel
_LOGQ_SLACK = 1e-9   # float prefilter width; exact arithmetic settles ties


def natural_key(ident: str):
    """Sort key that orders embedded integers numerically ("2" before "10")."""
    return tuple((0, int(part)) if part.isdigit() else (1, part)
                 for part in re.split(r"(\d+)", ident) if part)


def natural_sorted(ids) -> list[str]:
    return sorted(ids, key=natural_key)


@dataclass(frozen=True)
class DocParams:
    """Knobs of the clustering search.

    w       max per-dimension distance from the pivot (> 0)
    alpha   density threshold as a fraction of the sample (0 < alpha <= 1)
    beta    quality trade-off between member count and subspace size (0 < beta < 1)
    seed    PRNG seed
    target  pivot subject id, or None to cover every subject
    trial_cap  upper bound on inner trials before refusing to run
    """

    w: float
    alpha: float
    beta: float
    seed: int = 0
    target: str | None = None
    trial_cap: int = DEFAULT_TRIAL_CAP

    def __post_init__(self):
        if not self.w > 0:
            raise ParameterError(f"w must be > 0 (got {self.w})")
        if not 0 < self.alpha <= 1:
            raise ParameterError(f"alpha must be in (0, 1] (got {self.alpha})")
        if not 0 < self.beta < 1:
            raise ParameterError(f"beta must be in (0, 1) (got {self.beta})")

    @property
    def beta_tag(self) -> str:
        """Two-digit-style tag used in cluster ids, e.g. 0.45 -> "45"."""
        pct = self.beta * 100
        return str(int(round(pct))) if abs(pct - round(pct)) < 1e-9 else f"{pct:g}"


@dataclass(frozen=True)
class SubspaceCluster:
    """A member set that agrees within a width-2w window on every subspace dimension."""

    id: str
    members: tuple[str, ...]        # subject ids, natural order
    subspace: tuple[str, ...]       # dimension ids, natural order
    means: dict[str, float]         # per-dimension member means, keys == subspace
    quality: float

    @property
    def size(self) -> int:
        return len(self.members)

    def mean_of(self, dim_id: str) -> float:
        return self.means[dim_id]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "members": list(self.members),
            "subspace": list(self.subspace),
            "means": {d: self.means[d] for d in self.subspace},
            "quality": self.quality,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SubspaceCluster":
        members = tuple(natural_sorted(str(m) for m in doc["members"]))
        subspace = tuple(natural_sorted(str(d) for d in doc["subspace"]))
        means = {str(k): float(v) for k, v in doc["means"].items()}
        return cls(str(doc["id"]), members, subspace, means, float(doc["quality"]))


@dataclass(frozen=True)
class DocRunResult:
    """Full-coverage output: the non-redundant clusters plus per-target warnings."""

    params: DocParams
    clusters: tuple[SubspaceCluster, ...]
    warnings: tuple[str, ...] = ()


# --- parameter formulas ---------------------------------------------------

def discrimination_set_size(num_dims: int, beta: float) -> int:
    """Number of subjects sampled per trial to pin down the subspace.

    r = floor(ln(2*num_dims) / ln(2/beta)), clamped to at least 1. This is
    the inverse of beta = 2*exp(-ln(2*num_dims)/r), so choosing beta is the
    same as choosing how many subjects define a subspace.
    """
    if num_dims < 1:
        raise ParameterError(f"need at least one dimension (got {num_dims})")
    if not 0 < beta < 1:
        raise ParameterError(f"beta must be in (0, 1) (got {beta})")
    r = math.floor(math.log(2 * num_dims) / math.log(2 / beta))
    return max(r, 1)


def beta_for_set_size(num_dims: int, r: int) -> float:
    """Inverse helper: the beta that makes ``discrimination_set_size`` equal r."""
    return 2 * math.exp(-math.log(2 * num_dims) / r)


def inner_trial_count(alpha: float, r: int, cap: int = DEFAULT_TRIAL_CAP) -> int:
    """Trials per outer iteration: m = ceil((2/alpha)^r * ln 4).

    Enough sampling for a constant success probability per pivot. Refuses to
    run (ParameterError) when m exceeds ``cap``, since m grows geometrically
    in r: lower beta (hence r) or raise alpha to get back under the cap.
    """
    if not 0 < alpha <= 1:
        raise ParameterError(f"alpha must be in (0, 1] (got {alpha})")
    if r < 1:
        raise ParameterError(f"r must be >= 1 (got {r})")
    m = math.ceil((2 / alpha) ** r * math.log(4))
    if m > cap:
        raise ParameterError(
            f"inner trial count m={m} exceeds the cap of {cap}; "
            f"lower beta (smaller discrimination set) or raise alpha")
    return m


def outer_iterations(alpha: float) -> int:
    return math.ceil(2 / alpha)


def min_cluster_size(alpha: float, num_subjects: int) -> int:
    """Smallest member count that clears the density threshold alpha*|S|."""
    return max(1, math.ceil(alpha * num_subjects - 1e-9))


def quality(cluster_size: int, subspace_size: int, beta: float) -> float:
    """Score |C| * (1/beta)^|D|; for beta < 1 it rewards both size and subspace."""
    if cluster_size < 0 or subspace_size < 0:
        raise ParameterError("sizes must be non-negative")
    return cluster_size * (1.0 / beta) ** subspace_size


def _exact_quality(cluster_size: int, subspace_size: int, beta: float) -> Fraction:
    # Fraction(beta) is the exact value of the float, so ties are decided
    # by arithmetic rather than rounding noise.
    return cluster_size * (Fraction(1) / Fraction(beta)) ** subspace_size


# --- single-trial primitives (also the public fine-grained API) -----------

def induce_subspace(p, X, w: float, dimension_ids=None) -> list:
    """Dimensions on which every row of X lies within w of p.

    ``p`` is one row of scores, ``X`` a non-empty set of rows (NaN = missing).
    A dimension enters only when p and all of X have present values there.
    Returns column indices, or ids when ``dimension_ids`` is given.
    """
    p = np.asarray(p, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] == 0:
        raise ParameterError("discrimination set must be non-empty")
    with np.errstate(invalid="ignore"):
        close = np.abs(X - p[None, :]) <= w
    mask = ~np.isnan(p) & ~np.isnan(X).any(axis=0) & close.all(axis=0)
    idx = np.flatnonzero(mask)
    if dimension_ids is None:
        return idx.tolist()
    return [dimension_ids[i] for i in idx]


def cluster_membership(data: VasDataSet, p, subspace, w: float) -> list[str]:
    """Subject ids inside the width-2w hyper-rectangle around p on ``subspace``.

    ``subspace`` holds dimension ids (or column indices); it must be
    non-empty. Subjects missing a value on any subspace dimension are out.
    """
    cols = [d if isinstance(d, (int, np.integer)) else data.dimension_index(d)
            for d in subspace]
    if not cols:
        raise ParameterError("subspace must be non-empty")
    p = np.asarray(p, dtype=float)
    sub = data.values[:, cols]
    with np.errstate(invalid="ignore"):
        hit = (~np.isnan(sub) & (np.abs(sub - p[cols][None, :]) <= w)).all(axis=1)
    return [data.subjects[i].id for i in np.flatnonzero(hit)]


# --- the randomized search -------------------------------------------------

@dataclass(frozen=True)
class _Candidate:
    trial: int
    size: int
    dsize: int
    member_idx: tuple[int, ...]
    dim_idx: tuple[int, ...]


def _sample_words(seed: int, target_idx: int, start: int, count: int) -> np.ndarray:
    """Raw 64-bit words [start, start+count) of the (seed, target) counter stream.

    The generator emits 4-word blocks, so resuming mid-stream only works at
    block boundaries; chunk sizes are multiples of 4 to guarantee that.
    """
    if start % 4:
        raise ParameterError("stream offset must be block-aligned (multiple of 4 words)")
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(target_idx,))
    bg = np.random.Philox(ss)
    if start:
        bg.advance(start // 4)
    return bg.random_raw(count)


def _fisher_yates_prefix(pool_ids: np.ndarray, words: np.ndarray, r: int) -> np.ndarray:
    """First r entries of a partial shuffle of ``pool_ids`` per row of draws.

    ``words`` is (T, r) raw uint64; the modulo step has bias ~2^-60 for the
    pool sizes seen here, which is far below anything observable.
    """
    T = words.shape[0]
    n_pool = pool_ids.shape[0]
    pool = np.broadcast_to(pool_ids.astype(np.int16), (T, n_pool)).copy()
    rows = np.arange(T)
    for i in range(r):
        j = i + (words[:, i] % np.uint64(n_pool - i)).astype(np.int64)
        picked = pool[rows, j].copy()
        pool[rows, j] = pool[rows, i]
        pool[rows, i] = picked
    return pool[:, :r]


def _general_kernel(in_window: np.ndarray):
    """Per-chunk trial evaluation for any dimensionality.

    Returns a function mapping sampled X (T, r) to per-trial subspace and
    member-count statistics plus extractors for single trials.
    """
    violations = (~in_window).astype(np.float32)

    def kernel(X: np.ndarray):
        # subspace per trial: dimensions where the whole sample is in-window
        D = in_window[X].all(axis=1)
        dsize = D.sum(axis=1)
        # members per trial: zero violated subspace dimensions
        hits = (D.astype(np.float32) @ violations.T) == 0
        csize = hits.sum(axis=1)
        return (dsize, csize,
                lambda t: np.flatnonzero(hits[t]),
                lambda t: np.flatnonzero(D[t]))

    return kernel


def _packed_kernel(in_window: np.ndarray):
    """Bit-packed variant of :func:`_general_kernel` for up to 64 dimensions.

    Each subject's in-window dimensions become one uint64 mask, so a
    trial's subspace is the AND over its sample and the membership test is
    a single masked comparison. Identical output to the general kernel,
    roughly an order of magnitude faster at large r.
    """
    n, d = in_window.shape
    shifts = np.arange(d, dtype=np.uint64)
    masks = (in_window.astype(np.uint64) << shifts[None, :]).sum(axis=1, dtype=np.uint64)
    outside = ~masks

    def kernel(X: np.ndarray):
        D_bits = np.bitwise_and.reduce(masks[X], axis=1)
        dsize = _popcount(D_bits)
        hits = (D_bits[:, None] & outside[None, :]) == 0
        csize = hits.sum(axis=1)
        return (dsize, csize,
                lambda t: np.flatnonzero(hits[t]),
                lambda t: np.flatnonzero((D_bits[t] >> shifts) & np.uint64(1)))

    return kernel


def _popcount(bits: np.ndarray) -> np.ndarray:
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(bits).astype(np.int64)
    return np.unpackbits(bits.view(np.uint8)).reshape(bits.shape[0], 64).sum(axis=1)


def doc_for_target(data: VasDataSet, params: DocParams) -> SubspaceCluster:
    """Best-quality cluster anchored on ``params.target``.

    Runs ceil(2/alpha) outer iterations of m inner trials with the pivot
    fixed to the target subject; every trial samples a fresh discrimination
    set from the other subjects. Candidates below the density threshold
    alpha*|S| (or with an empty induced subspace) are discarded. Ties on
    quality break deterministically: larger member count, then smallest
    member-id set in natural order, then earliest trial.

    Raises NoClusterFound when every trial is discarded.
    """
    if params.target is None:
        raise ParameterError("doc_for_target requires params.target")
    target_idx = data.subject_index(params.target)
    cluster, _ = _search_target(data, params, target_idx)
    if cluster is None:
        raise NoClusterFound(params.target)
    return cluster


def _search_target(data: VasDataSet, params: DocParams,
                   target_idx: int) -> tuple[SubspaceCluster | None, str | None]:
    values = data.values
    n, d = values.shape
    if n < 2:
        raise ParameterError("need at least 2 subjects")
    r = discrimination_set_size(d, params.beta)
    if r > n - 1:
        raise ParameterError(
            f"discrimination set size r={r} needs {r} other subjects but only "
            f"{n - 1} are available; lower beta or add subjects")
    m = inner_trial_count(params.alpha, r, params.trial_cap)
    total = outer_iterations(params.alpha) * m
    min_size = min_cluster_size(params.alpha, n)

    p = values[target_idx]
    present = ~np.isnan(values)
    with np.errstate(invalid="ignore"):
        close = np.abs(values - p[None, :]) <= params.w
    # in_window[s, k]: subject s has a value within w of the pivot on k
    in_window = present & present[target_idx][None, :] & close
    kernel = (_packed_kernel if d <= _PACK_LIMIT else _general_kernel)(in_window)
    pool_ids = np.delete(np.arange(n), target_idx)

    log_inv_beta = math.log(1.0 / params.beta)
    best_logq = -math.inf
    finalists: list[_Candidate] = []

    for start in range(0, total, _CHUNK):
        count = min(_CHUNK, total - start)
        words = _sample_words(params.seed, target_idx, start * r, count * r)
        X = _fisher_yates_prefix(pool_ids, words.reshape(count, r), r)
        dsize, csize, members_of, dims_of = kernel(X)
        ok = (csize >= min_size) & (dsize >= 1)
        if not ok.any():
            continue
        logq = np.where(ok, np.log(np.maximum(csize, 1)) + dsize * log_inv_beta, -np.inf)
        chunk_best = float(logq.max())
        if chunk_best > best_logq:
            best_logq = chunk_best
            finalists = [c for c in finalists
                         if math.log(c.size) + c.dsize * log_inv_beta >= best_logq - _LOGQ_SLACK]
        for t in np.flatnonzero(logq >= best_logq - _LOGQ_SLACK):
            finalists.append(_Candidate(
                trial=start + int(t),
                size=int(csize[t]),
                dsize=int(dsize[t]),
                member_idx=tuple(members_of(int(t))),
                dim_idx=tuple(dims_of(int(t)))))

    if not finalists:
        return None, (f"subject {data.subjects[target_idx].id!r}: all {total} trials "
                      f"discarded (density threshold {min_size} members)")

    def rank(c: _Candidate):
        ids = natural_sorted(data.subjects[i].id for i in c.member_idx)
        return (-_exact_quality(c.size, c.dsize, params.beta), -c.size,
                tuple(natural_key(i) for i in ids), c.trial)

    best = min(finalists, key=rank)
    return _build_cluster(data, params, best), None


def _build_cluster(data: VasDataSet, params: DocParams, c: _Candidate) -> SubspaceCluster:
    member_ids = natural_sorted(data.subjects[i].id for i in c.member_idx)
    dim_ids = natural_sorted(data.dimensions[k].id for k in c.dim_idx)
    rows = list(c.member_idx)
    means = {data.dimensions[k].id: float(data.values[rows, k].mean()) for k in c.dim_idx}
    means = {d: means[d] for d in dim_ids}
    return SubspaceCluster(
        id=f"{params.target}@{params.beta_tag}",
        members=tuple(member_ids),
        subspace=tuple(dim_ids),
        means=means,
        quality=quality(c.size, c.dsize, params.beta))


def doc_full_coverage(data: VasDataSet, params: DocParams,
                      parallel: bool = False) -> DocRunResult:
    """One optimal cluster per subject, deduplicated and labelled by quality.

    Subjects whose search comes up empty produce a warning in the result
    rather than failing the whole run. Clusters that agree on both members
    and subspace are reported once. Labels are letters in descending quality
    order suffixed with the beta tag (A45, B45, ...).

    ``parallel`` fans the per-subject searches out to a thread pool; output
    is identical to the serial schedule.
    """
    if len(data.subjects) < 2:
        raise ParameterError("full coverage needs at least 2 subjects")
    indices = range(len(data.subjects))

    def run(idx: int):
        return _search_target(data, replace(params, target=data.subjects[idx].id), idx)

    if parallel:
        with ThreadPoolExecutor() as pool:
            outcomes = list(pool.map(run, indices))
    else:
        outcomes = [run(i) for i in indices]

    warnings = tuple(w for _, w in outcomes if w)
    unique: dict[tuple, SubspaceCluster] = {}
    for cluster, _ in outcomes:
        if cluster is not None:
            unique.setdefault((cluster.members, cluster.subspace), cluster)

    ordered = sorted(
        unique.values(),
        key=lambda c: (-_exact_quality(c.size, len(c.subspace), params.beta),
                       tuple(natural_key(i) for i in c.members),
                       tuple(natural_key(k) for k in c.subspace)))
    labelled = tuple(replace(c, id=f"{_letters(i)}{params.beta_tag}")
                     for i, c in enumerate(ordered))
    return DocRunResult(params=params, clusters=labelled, warnings=warnings)


def _letters(index: int) -> str:
    # A..Z, then AA, AB, ... for runs with more than 26 clusters
    out = ""
    index += 1
    while index:
        index, rem = divmod(index - 1, 26)
        out = chr(ord("A") + rem) + out
    return out


def check_cluster(data: VasDataSet, cluster: SubspaceCluster, params: DocParams) -> None:
    """Assert the structural soundness of a cluster against its dataset.

    Checks, without re-running the search: density >= alpha*|S|, complete
    data on the subspace, per-dimension spread <= 2w, and stored means.
    Raises AssertionError on any violation (used by tests and debugging).
    """
    rows = [data.subject_index(s) for s in cluster.members]
    assert len(rows) >= min_cluster_size(params.alpha, len(data.subjects)), "density violated"
    for dim in cluster.subspace:
        col = data.values[rows, data.dimension_index(dim)]
        assert not np.isnan(col).any(), f"missing value inside subspace dim {dim}"
        assert col.max() - col.min() <= 2 * params.w + 1e-12, f"width > 2w on {dim}"
        assert abs(col.mean() - cluster.means[dim]) < 1e-9, f"stored mean wrong on {dim}"
    assert set(cluster.means) == set(cluster.subspace), "means must cover exactly the subspace"


# --- hyperparameter estimation ---------------------------------------------

@dataclass(frozen=True)
class WEstimate:
    raw: float
    suggested: float          # rounded up to one decimal
    per_subject: dict[str, float] = field(repr=False, default_factory=dict)


def estimate_w(data: VasDataSet) -> WEstimate:
    """Data-driven w: mean over subjects of the nearest-neighbour distance.

    The distance between two subjects is the mean absolute difference over
    the dimensions where both have values. Raises NoSharedDims when a
    subject shares no observed dimension with anyone.
    """
    values = data.values
    n = len(data.subjects)
    if n < 2:
        raise ParameterError("need at least 2 subjects to estimate w")
    present = ~np.isnan(values)
    per_subject: dict[str, float] = {}
    for i in range(n):
        best = math.inf
        for j in range(n):
            if j == i:
                continue
            shared = present[i] & present[j]
            k = int(shared.sum())
            if k == 0:
                continue
            dist = float(np.abs(values[i, shared] - values[j, shared]).sum()) / k
            best = min(best, dist)
        if math.isinf(best):
            raise NoSharedDims(
                f"subject {data.subjects[i].id!r} shares no observed dimension with any other")
        per_subject[data.subjects[i].id] = best
    raw = sum(per_subject.values()) / n
    suggested = math.ceil(raw * 10 - 1e-9) / 10
    return WEstimate(raw=raw, suggested=suggested, per_subject=per_subject)
