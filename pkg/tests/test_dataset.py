import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from personaforge import (
    DatasetError,
    Dimension,
    Subject,
    VasDataSet,
    bin_to_categories,
    export_csv,
    ingest_csv,
)
from personaforge.dataset import MISSING_LABEL, auto_bin_count, bin_index

from conftest import make_dataset


class TestIngest:
    def test_basic_matrix_with_missing(self):
        csv_text = "subject,d1,d2,d3\n1,0.5,,1.0\n2,0,0.25,0.75\n"
        data = ingest_csv(csv_text)
        assert data.subject_ids == ["1", "2"]
        assert data.dimension_ids == ["d1", "d2", "d3"]
        assert math.isnan(data.values[0, 1])
        assert data.values[1, 2] == 0.75

    def test_paper_scale_shape(self):
        rows = ["s," + ",".join(f"d{j}" for j in range(1, 48))]
        for i in range(1, 21):
            cells = [f"{(i * j) % 100 / 100:.2f}" if (i + j) % 7 else "" for j in range(1, 48)]
            rows.append(f"{i}," + ",".join(cells))
        data = ingest_csv("\n".join(rows))
        assert len(data.subjects) == 20
        assert len(data.dimensions) == 47

    def test_singleton(self):
        data = ingest_csv("subject,d1\ns1,0.5\n")
        assert data.values.tolist() == [[0.5]]

    def test_out_of_range_names_cell(self):
        with pytest.raises(DatasetError, match=r"1\.2.*row 2.*'s1'.*'d2'"):
            ingest_csv("subject,d1,d2\ns1,0.5,1.2\n")

    def test_duplicate_subject_id(self):
        with pytest.raises(DatasetError, match="duplicate subject"):
            ingest_csv("subject,d1\na,0.1\na,0.2\n")

    def test_duplicate_dimension_id(self):
        with pytest.raises(DatasetError, match="duplicate dimension"):
            ingest_csv("subject,d1,d1\na,0.1,0.2\n")

    def test_ragged_row(self):
        with pytest.raises(DatasetError, match="ragged"):
            ingest_csv("subject,d1,d2\na,0.1\n")

    def test_non_numeric_cell(self):
        with pytest.raises(DatasetError, match="non-numeric"):
            ingest_csv("subject,d1\na,abc\n")

    def test_header_labels(self):
        data = ingest_csv("subject,d1:Mobility\ns1:Alice,0.5\n")
        assert data.dimensions[0].label == "Mobility"
        assert data.subjects[0].label == "Alice"

    def test_bytes_input(self):
        data = ingest_csv(b"subject,d1\na,0.5\n")
        assert data.values[0, 0] == 0.5


class TestRoundTrip:
    def test_csv_round_trip_is_identity(self):
        rng = np.random.default_rng(2)
        data = make_dataset(rng.uniform(0, 1, (3, 4)), missing=[(0, 1), (2, 3)])
        again = ingest_csv(export_csv(data))
        assert again.subject_ids == data.subject_ids
        assert again.dimension_ids == data.dimension_ids
        assert np.array_equal(np.isnan(again.values), np.isnan(data.values))
        present = ~np.isnan(data.values)
        assert np.array_equal(again.values[present], data.values[present])

    def test_json_round_trip(self):
        data = VasDataSet(
            (Subject("a", "Alice"), Subject("b")),
            (Dimension("d1", "Mobility", "immobile", "fully mobile"), Dimension("d2")),
            np.array([[0.25, np.nan], [1.0, 0.0]]))
        again = VasDataSet.from_json(data.to_json())
        assert again.subjects == data.subjects
        assert again.dimensions == data.dimensions
        assert np.array_equal(np.isnan(again.values), np.isnan(data.values))
        assert again.to_json() == data.to_json()


class TestValidation:
    def test_shape_mismatch(self):
        with pytest.raises(DatasetError, match="shape"):
            VasDataSet((Subject("a"),), (Dimension("d1"),), np.zeros((2, 1)))

    def test_immutability(self):
        data = make_dataset([[0.5]])
        with pytest.raises(ValueError):
            data.values[0, 0] = 0.1


class TestBinning:
    def test_three_bin_outgoing(self):
        data = make_dataset([[0.9]])
        table = bin_to_categories(data, {"d1": 3})
        assert table.category_label(0, 0) == "high"

    def test_two_bin_boundaries(self):
        data = make_dataset([[0.0], [1.0], [0.5]])
        table = bin_to_categories(data, {"d1": 2})
        labels = [table.category_label(i, 0) for i in range(3)]
        assert labels == ["low", "high", "high"]   # boundary goes up

    def test_three_bin_formula(self):
        for v in [0.0, 0.1, 1 / 3, 0.5, 2 / 3, 0.9, 1.0]:
            assert bin_index(v, 3) == min(math.floor(3 * v), 2)

    def test_auto_polarized(self):
        # 4/4 present values in the outer thirds -> 2 bins
        data = make_dataset([[0.05], [0.1], [0.9], [0.95]])
        table = bin_to_categories(data)
        assert len(table.variables[0].categories) == 2

    def test_auto_spread(self):
        data = make_dataset([[0.05], [0.5], [0.45], [0.55], [0.9]])
        table = bin_to_categories(data)
        assert len(table.variables[0].categories) == 3

    def test_auto_threshold_is_eighty_percent(self):
        outer = np.array([0.1, 0.1, 0.9, 0.9])
        assert auto_bin_count(np.append(outer, 0.5)) == 2        # exactly 80% counts
        assert auto_bin_count(np.append(outer, [0.5] * 2)) == 3  # 4/6 < 80%
        assert auto_bin_count(outer) == 2

    def test_missing_category_only_when_needed(self):
        data = make_dataset([[0.1, 0.2], [np.nan, 0.9]])
        table = bin_to_categories(data)
        assert table.variables[0].has_missing
        assert not table.variables[1].has_missing
        assert table.category_label(1, 0) == MISSING_LABEL

    def test_binning_total_on_present(self):
        rng = np.random.default_rng(5)
        values = rng.uniform(0, 1, (10, 6))
        values[rng.uniform(size=values.shape) < 0.3] = np.nan
        data = make_dataset(values)
        table = bin_to_categories(data)
        for i in range(10):
            for j in range(6):
                label = table.category_label(i, j)
                if math.isnan(values[i, j]):
                    assert label == MISSING_LABEL
                else:
                    assert label in table.variables[j].categories

    def test_unknown_dim_rejected(self):
        with pytest.raises(DatasetError, match="unknown dimensions"):
            bin_to_categories(make_dataset([[0.5]]), {"nope": 2})

    @given(st.floats(min_value=0, max_value=1), st.sampled_from([2, 3]))
    def test_bin_index_total_function(self, v, n):
        assert 0 <= bin_index(v, n) < n
