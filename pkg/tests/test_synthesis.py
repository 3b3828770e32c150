import csv
import math

import numpy as np
import pytest

from personaforge import (
    Dimension,
    ParameterError,
    SubspaceCluster,
    build_dendrogram,
    cluster_mean_vector,
    cut_dendrogram,
    describe,
    drop_redundant,
    merge_clusters,
    quality,
    radar_data,
    shared_dims,
    similarity,
    similarity_matrix,
)
from personaforge.synthesis import Dendrogram, SimilarityMatrix

from conftest import DATA, random_cluster


def tiny_cluster(ident, means, members=("1", "2")):
    subspace = tuple(sorted(means, key=lambda d: int(d[1:])))
    return SubspaceCluster(ident, tuple(members), subspace, dict(means),
                           quality(len(members), len(subspace), 0.45))


class TestSharedDims:
    def test_identical(self):
        a = tiny_cluster("a", {"d1": 0.2, "d3": 0.8})
        assert shared_dims(a, a) == ["d1", "d3"]

    def test_disjoint(self):
        a = tiny_cluster("a", {"d1": 0.2})
        b = tiny_cluster("b", {"d2": 0.2})
        assert shared_dims(a, b) == []

    def test_study_pair(self, elder_clusters_by_id):
        F = shared_dims(elder_clusters_by_id["D65"], elder_clusters_by_id["J65"])
        assert F == ["d2", "d3", "d9", "d20", "d22", "d23", "d25", "d29", "d42", "d47"]


class TestMeanVector:
    def test_singleton_member(self):
        a = tiny_cluster("a", {"d1": 0.4, "d2": 0.6}, members=("7",))
        assert cluster_mean_vector(a, ["d1", "d2"]).tolist() == [0.4, 0.6]

    def test_study_value(self, elder_clusters_by_id):
        v = cluster_mean_vector(elder_clusters_by_id["D65"], ["d20"])
        assert v.tolist() == [0.029]

    def test_outside_subspace_rejected(self):
        a = tiny_cluster("a", {"d1": 0.4})
        with pytest.raises(ParameterError, match="outside the subspace"):
            cluster_mean_vector(a, ["d1", "d9"])


class TestSimilarity:
    def test_self_similarity_is_one(self):
        a = tiny_cluster("a", {"d1": 0.31, "d2": 0.77})
        assert similarity(a, a) == 1.0

    def test_disjoint_is_zero(self):
        a = tiny_cluster("a", {"d1": 0.5})
        b = tiny_cluster("b", {"d2": 0.5})
        assert similarity(a, b) == 0.0

    def test_opposite_extremes_is_zero(self):
        a = tiny_cluster("a", {"d1": 0.0, "d2": 1.0})
        b = tiny_cluster("b", {"d1": 1.0, "d2": 0.0})
        assert similarity(a, b) == pytest.approx(0.0)

    def test_study_pair_matches_independent_evaluation(self, elder_clusters_by_id):
        d65, j65 = elder_clusters_by_id["D65"], elder_clusters_by_id["J65"]
        # independent evaluation straight from the stored means
        F = set(d65.means) & set(j65.means)
        dice = 2 * len(F) / (len(d65.means) + len(j65.means))
        msd = sum((j65.means[d] - d65.means[d]) ** 2 for d in F) / len(F)
        expected = dice * (1 - msd)
        assert similarity(d65, j65) == pytest.approx(expected, abs=1e-12)
        assert similarity(d65, j65) == pytest.approx(0.768678, abs=1e-6)
        assert dice == pytest.approx(20 / 26)
        assert msd == pytest.approx(0.0007186, abs=1e-9)

    def test_property_suite(self):
        rng = np.random.default_rng(99)
        for i in range(200):
            a = random_cluster(rng, f"a{i}")
            b = random_cluster(rng, f"b{i}")
            s = similarity(a, b)
            assert 0.0 <= s <= 1.0
            assert s == similarity(b, a)
            # member relabelling leaves the score unchanged
            a2 = SubspaceCluster("a2", ("x", "y", "z"), a.subspace, a.means, a.quality)
            assert similarity(a2, b) == s

    def test_one_iff_same_subspace_and_means(self):
        a = tiny_cluster("a", {"d1": 0.5, "d2": 0.5})
        b = tiny_cluster("b", {"d1": 0.5, "d2": 0.5}, members=("8", "9"))
        assert similarity(a, b) == 1.0
        c = tiny_cluster("c", {"d1": 0.5, "d2": 0.5, "d3": 0.5})
        assert similarity(a, c) < 1.0
        d = tiny_cluster("d", {"d1": 0.5, "d2": 0.6})
        assert similarity(a, d) < 1.0


class TestSimilarityMatrix:
    def test_structure(self, elder_clusters):
        sub = elder_clusters[:8]
        sims = similarity_matrix(sub)
        assert np.allclose(np.diag(sims.matrix), 1.0)
        assert np.array_equal(sims.matrix, sims.matrix.T)
        assert sims.matrix.min() >= 0 and sims.matrix.max() <= 1

    def test_csv_round_numbers(self):
        a = tiny_cluster("a", {"d1": 0.5})
        b = tiny_cluster("b", {"d1": 0.5})
        text = similarity_matrix([a, b]).to_csv()
        rows = list(csv.reader(text.splitlines()))
        assert rows[0] == ["cluster", "a", "b"]
        assert rows[1][1] == "1.000000"


class TestDendrogram:
    def test_two_leaves(self):
        sims = SimilarityMatrix(("a", "b"), np.array([[1.0, 0.8], [0.8, 1.0]]))
        dend = build_dendrogram(sims)
        assert len(dend.merges) == 1
        assert dend.merges[0].height == pytest.approx(0.2)

    def test_three_leaves_average_linkage(self):
        m = np.array([[1.0, 0.9, 0.1],
                      [0.9, 1.0, 0.1],
                      [0.1, 0.1, 1.0]])
        dend = build_dendrogram(SimilarityMatrix(("a", "b", "c"), m))
        assert (dend.merges[0].left, dend.merges[0].right) == (0, 1)
        assert dend.merges[0].height == pytest.approx(0.1)
        assert dend.merges[1].height == pytest.approx(0.9)

    def test_identical_clusters_merge_at_zero(self):
        a = tiny_cluster("a", {"d1": 0.5})
        b = tiny_cluster("b", {"d1": 0.5})
        dend = build_dendrogram(similarity_matrix([a, b]))
        assert dend.merges[0].height == 0.0

    def test_heights_monotone(self, elder_clusters):
        for linkage in ("average", "single", "complete"):
            dend = build_dendrogram(similarity_matrix(elder_clusters[:15]), linkage)
            heights = [m.height for m in dend.merges]
            assert heights == sorted(heights)

    def test_matches_scipy_linkage(self):
        scipy_hierarchy = pytest.importorskip("scipy.cluster.hierarchy")
        squareform = pytest.importorskip("scipy.spatial.distance").squareform
        rng = np.random.default_rng(31)
        for linkage in ("average", "single", "complete"):
            for trial in range(5):
                n = int(rng.integers(4, 12))
                sim = rng.uniform(0, 1, (n, n))
                sim = (sim + sim.T) / 2
                np.fill_diagonal(sim, 1.0)
                ids = tuple(f"c{i}" for i in range(n))
                dend = build_dendrogram(SimilarityMatrix(ids, sim), linkage)
                Z = scipy_hierarchy.linkage(squareform(1 - sim, checks=False), method=linkage)
                assert np.allclose(sorted(m.height for m in dend.merges), sorted(Z[:, 2]))
                for h in rng.uniform(0, 1, 4):
                    parts = {frozenset(g) for g in cut_dendrogram(dend, float(h))}
                    labels = scipy_hierarchy.fcluster(Z, t=float(h), criterion="distance")
                    expected = {}
                    for i, lab in enumerate(labels):
                        expected.setdefault(lab, set()).add(f"c{i}")
                    assert parts == {frozenset(g) for g in expected.values()}

    def test_json_round_trip(self, elder_clusters):
        dend = build_dendrogram(similarity_matrix(elder_clusters[:6]))
        assert Dendrogram.from_dict(dend.to_dict()) == dend


class TestCut:
    def test_cut_zero_gives_singletons(self):
        m = np.array([[1.0, 0.5, 0.2], [0.5, 1.0, 0.3], [0.2, 0.3, 1.0]])
        dend = build_dendrogram(SimilarityMatrix(("a", "b", "c"), m))
        assert cut_dendrogram(dend, 0.0) == [["a"], ["b"], ["c"]]

    def test_cut_one_gives_everything(self):
        m = np.array([[1.0, 0.5, 0.2], [0.5, 1.0, 0.3], [0.2, 0.3, 1.0]])
        dend = build_dendrogram(SimilarityMatrix(("a", "b", "c"), m))
        assert cut_dendrogram(dend, 1.0) == [["a", "b", "c"]]

    def test_lower_cut_refines_higher(self, elder_clusters):
        dend = build_dendrogram(similarity_matrix(elder_clusters[:20]))
        low = cut_dendrogram(dend, 0.2)
        high = cut_dendrogram(dend, 0.5)
        for group in low:
            assert any(set(group) <= set(big) for big in high)

    def test_bad_height(self, elder_clusters):
        dend = build_dendrogram(similarity_matrix(elder_clusters[:3]))
        with pytest.raises(ParameterError):
            cut_dendrogram(dend, 1.5)


@pytest.fixture()
def athlete(elder_clusters_by_id):
    ids = ["D65", "E65", "F65", "H65", "J65", "K65"]
    return merge_clusters([elder_clusters_by_id[i] for i in ids])


class TestMerge:
    def test_reproduces_published_means_and_stds(self, athlete):
        rows = list(csv.reader((DATA / "merged_athlete_expected.csv").read_text().splitlines()))
        expected = {r[0]: (float(r[1]), float(r[2])) for r in rows[1:]}
        assert athlete.dim_ids == list(expected)   # inclusion set and order match exactly
        for pd in athlete.dims:
            mean, std = expected[pd.dim_id]
            assert abs(pd.mean - mean) <= 0.001, pd.dim_id
            assert abs(pd.std - std) <= 0.001, pd.dim_id

    def test_half_support_threshold(self, athlete):
        # d4 sits in only 3 of the 6 subspaces and is still included
        d4 = athlete.dim("d4")
        assert d4.support == 3
        assert d4.mean == pytest.approx(0.952, abs=0.001)
        # d34 has support 2 and is excluded
        assert "d34" not in athlete.dim_ids

    def test_members_are_union(self, athlete):
        assert athlete.members == ("5", "6", "8", "9", "10", "11", "13", "15", "16", "18", "20")

    def test_singleton_set(self, elder_clusters_by_id):
        c = elder_clusters_by_id["D65"]
        p = merge_clusters([c])
        assert set(p.dim_ids) == set(c.subspace)
        for pd in p.dims:
            assert pd.mean == c.means[pd.dim_id]
            assert pd.std == 0.0

    def test_copies_reproduce_cluster(self, elder_clusters_by_id):
        c = elder_clusters_by_id["J65"]
        p = merge_clusters([c, c, c])
        assert set(p.dim_ids) == set(c.subspace)
        for pd in p.dims:
            assert pd.mean == pytest.approx(c.means[pd.dim_id])
            assert pd.std == pytest.approx(0.0)

    def test_conflict_flag(self):
        a = tiny_cluster("a", {"d1": 0.1})
        b = tiny_cluster("b", {"d1": 0.9})
        p = merge_clusters([a, b])
        assert p.dim("d1").conflicting
        assert not merge_clusters([a, b], conflict_std=0.99).dim("d1").conflicting

    def test_veto(self):
        a = tiny_cluster("a", {"d1": 0.1, "d2": 0.2})
        p = merge_clusters([a]).without_dims(["d1"])
        assert p.dim_ids == ["d2"]

    def test_empty_set_rejected(self):
        with pytest.raises(ParameterError):
            merge_clusters([])


class TestDescribe:
    DIMS = {
        "d46": Dimension("d46", "Living with partner", "lives alone", "lives with partner"),
        "d47": Dimension("d47", "Is female", "is male", "is female"),
        "d15": Dimension("d15", "Tendency to eat out"),
    }

    def test_bands_and_annotations(self):
        a = tiny_cluster("a", {"d46": 0.0, "d47": 1.0, "d15": 0.5})
        p = merge_clusters([a])
        text = describe(p, self.DIMS)
        assert "lives alone (d46)" in text
        assert "is female (d47)" in text
        assert "moderate Tendency to eat out (d15)" in text

    def test_deterministic_golden(self):
        a = tiny_cluster("a", {"d46": 0.1, "d47": 0.9})
        b = tiny_cluster("b", {"d46": 0.1, "d47": 0.95, "d15": 0.2})
        p = merge_clusters([a, b])
        p = p.__class__(p.sources, p.members, p.dims, name="Solo regular")
        assert describe(p, self.DIMS) == (
            "Solo regular: lives alone (d46); is female (d47); "
            "low Tendency to eat out (d15).")

    def test_empty_dims_notice(self):
        a = tiny_cluster("a", {"d46": 0.5})
        b = tiny_cluster("b", {"d47": 0.5})
        c = tiny_cluster("c", {"d15": 0.5})
        p = merge_clusters([a, b, c])   # no dim reaches support 2 of 3
        assert "no stable traits" in describe(p, self.DIMS)

    def test_missing_label_rejected(self):
        a = tiny_cluster("a", {"d99": 0.5})
        with pytest.raises(Exception, match="d99"):
            describe(merge_clusters([a]), self.DIMS)


class TestRadar:
    def test_study_pair_axes(self, elder_clusters_by_id, elder_dims):
        doc = radar_data(elder_clusters_by_id["D65"], elder_clusters_by_id["J65"], elder_dims)
        assert len(doc["axes"]) == 16
        by_dim = {ax["dim"]: i for i, ax in enumerate(doc["axes"])}
        j65 = doc["series"][1]
        greyed = {d for d, i in by_dim.items() if j65["greyed"][i]}
        assert greyed == {"d4", "d35", "d37", "d43", "d44"}
        d65 = doc["series"][0]
        assert {d for d, i in by_dim.items() if d65["greyed"][i]} == {"d6"}

    def test_self_comparison_identical(self, elder_clusters_by_id):
        c = elder_clusters_by_id["A45"]
        doc = radar_data(c, c)
        assert doc["series"][0]["values"] == doc["series"][1]["values"]
        assert not any(doc["series"][0]["greyed"])

    def test_disjoint_grey_pattern(self):
        a = tiny_cluster("a", {"d1": 0.5})
        b = tiny_cluster("b", {"d2": 0.5})
        doc = radar_data(a, b)
        assert doc["series"][0]["greyed"] == [False, True]
        assert doc["series"][1]["greyed"] == [True, False]
        assert doc["series"][0]["values"] == [0.5, None]

    def test_persona_input(self, elder_clusters_by_id):
        p = merge_clusters([elder_clusters_by_id["D65"], elder_clusters_by_id["J65"]])
        doc = radar_data(p, elder_clusters_by_id["K65"])
        assert any(not g for g in doc["series"][0]["greyed"])


class TestDropRedundant:
    def test_keeps_highest_quality(self, elder_clusters_by_id):
        d65, j65 = elder_clusters_by_id["D65"], elder_clusters_by_id["J65"]
        kept = drop_redundant([d65, j65], threshold=0.7)
        assert [c.id for c in kept] == ["D65"]   # higher quality, J65 too similar
        both = drop_redundant([d65, j65], threshold=0.8)
        assert {c.id for c in both} == {"D65", "J65"}
