import csv
from pathlib import Path

import numpy as np
import pytest

from personaforge import Dimension, Subject, SubspaceCluster, VasDataSet, quality
from personaforge.fixtures import elder_meals_clusters, elder_meals_dimensions

DATA = Path(__file__).parent / "data"


def read_counts_csv(path):
    rows = list(csv.reader(path.read_text().splitlines()))
    ids = rows[0][1:]
    counts = np.array([[int(c) for c in r[1:]] for r in rows[1:]])
    return ids, counts


@pytest.fixture(scope="session")
def elder_clusters():
    return elder_meals_clusters()


@pytest.fixture(scope="session")
def elder_clusters_by_id(elder_clusters):
    return {c.id: c for c in elder_clusters}


@pytest.fixture(scope="session")
def elder_dims():
    return {d.id: d for d in elder_meals_dimensions()}


def make_dataset(values, missing=None):
    """Dataset from a plain array; ids are 1..n / d1..dk."""
    values = np.asarray(values, dtype=float)
    if missing is not None:
        values = values.copy()
        for i, j in missing:
            values[i, j] = np.nan
    subjects = tuple(Subject(str(i + 1)) for i in range(values.shape[0]))
    dims = tuple(Dimension(f"d{j + 1}") for j in range(values.shape[1]))
    return VasDataSet(subjects, dims, values)


def planted_dataset(seed, n=20, d=47, planted_subjects=4, planted_dims=12, width=0.1,
                    ensure_dominant=None):
    """Uniform noise with one planted agreement block of the given spread.

    The planted block agrees within ``width`` around per-dimension centres
    drawn near the scale extremes, the way VAS markings polarize in
    practice. With ``ensure_dominant=(w, alpha, beta)`` the sample is
    re-drawn until an exhaustive check confirms that every maximum-quality
    candidate anchored on the first planted subject contains the planted
    members and dimensions, so a correct search must recover the plant.
    Returns (dataset, planted subject ids, planted dimension ids).
    """
    for attempt in range(50):
        rng = np.random.default_rng((seed, attempt))
        values = rng.uniform(0, 1, (n, d))
        rows = rng.choice(n, planted_subjects, replace=False)
        cols = rng.choice(d, planted_dims, replace=False)
        side = rng.uniform(0.05, 0.2, planted_dims) + rng.integers(0, 2, planted_dims) * 0.75
        jitter = rng.uniform(-width / 2, width / 2, (planted_subjects, planted_dims))
        values[np.ix_(rows, cols)] = np.clip(side[None, :] + jitter, 0, 1)
        data = make_dataset(values)
        subjects = sorted((str(i + 1) for i in rows), key=lambda s: int(s))
        dims = sorted((f"d{j + 1}" for j in cols), key=lambda s: int(s[1:]))
        if ensure_dominant is None or _plant_is_dominant(
                data, subjects, dims, subjects[0], *ensure_dominant):
            return data, subjects, dims
    raise RuntimeError(f"no dominant plant found for seed {seed}")


def _plant_is_dominant(data, planted_subjects, planted_dims, target, w, alpha, beta):
    """Exhaustively verify that every best candidate contains the plant."""
    from fractions import Fraction
    from itertools import combinations

    from personaforge import (
        cluster_membership,
        discrimination_set_size,
        induce_subspace,
        min_cluster_size,
    )

    n, d = data.values.shape
    r = discrimination_set_size(d, beta)
    need = min_cluster_size(alpha, n)
    o = data.subject_index(target)
    pivot = data.values[o]
    inv_beta = Fraction(1) / Fraction(beta)
    best_q, best_ok = None, False
    for X in combinations([i for i in range(n) if i != o], r):
        D = induce_subspace(pivot, data.values[list(X)], w, data.dimension_ids)
        if not D:
            continue
        C = cluster_membership(data, pivot, D, w)
        if len(C) < need:
            continue
        q = len(C) * inv_beta ** len(D)
        ok = set(C) >= set(planted_subjects) and set(D) >= set(planted_dims)
        if best_q is None or q > best_q:
            best_q, best_ok = q, ok
        elif q == best_q:
            best_ok = best_ok and ok
    return best_q is not None and best_ok


def random_cluster(rng, ident="c", n_dims=10, id_pool=20):
    """Random small cluster for property tests."""
    k = int(rng.integers(1, n_dims + 1))
    dims = sorted(rng.choice(n_dims, k, replace=False).tolist())
    members = sorted(rng.choice(id_pool, int(rng.integers(1, 6)), replace=False).tolist())
    means = {f"d{j + 1}": float(rng.uniform(0, 1)) for j in dims}
    subspace = tuple(sorted(means, key=lambda s: int(s[1:])))
    return SubspaceCluster(
        id=ident, members=tuple(str(m + 1) for m in members), subspace=subspace,
        means=means, quality=quality(len(members), len(subspace), 0.45))
