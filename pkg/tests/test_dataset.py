import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ucal.dataset import (DatasetBundle, DatasetError, FeatureMatrix, Sample,
                          l2_normalize, load_dataset, save_dataset,
                          similarity_matrix, unit_interval_similarity)


def write_files(tmp_path, csv_lines, meta_lines):
    emb = tmp_path / "embeddings.csv"
    meta = tmp_path / "meta.jsonl"
    emb.write_text("\n".join(csv_lines) + "\n")
    meta.write_text("\n".join(meta_lines) + "\n")
    return emb, meta


class TestLoadDataset:
    def test_basic_load(self, tmp_path):
        emb, meta = write_files(
            tmp_path,
            ["1.0,2.0", "3.0,4.0", "0.5,-0.5"],
            ['{"sample_id":0,"identity":"a","camera":null,"image":null}',
             '{"sample_id":1,"identity":"a","camera":"c1","image":"img/1.png"}',
             '{"sample_id":2,"identity":null,"camera":null,"image":null}'],
        )
        bundle = load_dataset(emb, meta)
        assert bundle.n == 3
        assert bundle.features.dim == 2
        assert not bundle.features.normalized
        assert bundle.samples[1].camera == "c1"
        assert bundle.samples[1].image_ref == "img/1.png"
        assert bundle.samples[2].identity is None

    def test_dimension_mismatch_reports_line(self, tmp_path):
        emb, meta = write_files(tmp_path, ["1.0,2.0", "1.0,2.0,3.0"],
                                ['{"sample_id":0}', '{"sample_id":1}'])
        with pytest.raises(DatasetError, match="line 2"):
            load_dataset(emb, meta)

    def test_non_contiguous_sample_id(self, tmp_path):
        emb, meta = write_files(tmp_path, ["1.0", "1.0", "1.0"],
                                ['{"sample_id":0}', '{"sample_id":2}', '{"sample_id":3}'])
        with pytest.raises(DatasetError, match="non-contiguous"):
            load_dataset(emb, meta)

    def test_duplicate_sample_id(self, tmp_path):
        emb, meta = write_files(tmp_path, ["1.0", "1.0"],
                                ['{"sample_id":0}', '{"sample_id":0}'])
        with pytest.raises(DatasetError, match="duplicate"):
            load_dataset(emb, meta)

    def test_row_count_mismatch(self, tmp_path):
        emb, meta = write_files(tmp_path, ["1.0", "2.0"], ['{"sample_id":0}'])
        with pytest.raises(DatasetError, match="row count mismatch"):
            load_dataset(emb, meta)

    def test_non_finite_value(self, tmp_path):
        emb, meta = write_files(tmp_path, ["1.0", "nan"],
                                ['{"sample_id":0}', '{"sample_id":1}'])
        with pytest.raises(DatasetError, match="line 2"):
            load_dataset(emb, meta)

    def test_metadata_round_trips_bit_exactly(self, tmp_path):
        samples = (
            Sample(0, "p1", "cam0", "a/b.png"),
            Sample(1, None, None, None),
            Sample(2, "p2", None, "z.jpg"),
        )
        rows = np.array([[0.1, 0.2], [1.5, -2.25], [3e-7, 1e12]])
        bundle = DatasetBundle(samples, FeatureMatrix(rows), "t")
        save_dataset(bundle, tmp_path / "e.csv", tmp_path / "m.jsonl")
        first_meta = (tmp_path / "m.jsonl").read_bytes()
        first_emb = (tmp_path / "e.csv").read_bytes()

        loaded = load_dataset(tmp_path / "e.csv", tmp_path / "m.jsonl")
        assert loaded.samples == samples
        assert np.array_equal(loaded.features.rows, rows)
        save_dataset(loaded, tmp_path / "e2.csv", tmp_path / "m2.jsonl")
        assert (tmp_path / "m2.jsonl").read_bytes() == first_meta
        assert (tmp_path / "e2.csv").read_bytes() == first_emb


class TestL2Normalize:
    def test_three_four_five(self):
        fm = l2_normalize(FeatureMatrix(np.array([[3.0, 4.0]])))
        assert np.allclose(fm.rows, [[0.6, 0.8]])
        assert fm.normalized

    def test_unit_row_unchanged(self):
        fm = l2_normalize(FeatureMatrix(np.array([[1.0, 0.0]])))
        assert np.array_equal(fm.rows, [[1.0, 0.0]])

    def test_zero_row_rejected(self):
        with pytest.raises(DatasetError, match="row 1"):
            l2_normalize(FeatureMatrix(np.array([[1.0, 0.0], [0.0, 0.0]])))

    @settings(max_examples=50)
    @given(st.lists(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3),
                    min_size=1, max_size=8))
    def test_idempotent(self, rows):
        arr = np.asarray(rows)
        norms = np.linalg.norm(arr, axis=1)
        if np.any(norms == 0):
            return
        once = l2_normalize(FeatureMatrix(arr))
        twice = l2_normalize(once)
        assert np.max(np.abs(once.rows - twice.rows)) <= 1e-12


class TestSimilarityMatrix:
    def test_identical_orthogonal_opposite(self):
        fm = FeatureMatrix(np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]]),
                           normalized=True)
        s = similarity_matrix(fm)
        assert s[0, 1] == 1.0
        assert s[0, 2] == 0.0
        assert s[0, 3] == -1.0
        assert np.all(np.diag(s) == 1.0)

    def test_requires_normalized(self):
        with pytest.raises(DatasetError, match="normalized"):
            similarity_matrix(FeatureMatrix(np.array([[2.0, 0.0]])))

    def test_exact_symmetry_and_range(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((40, 7))
        fm = l2_normalize(FeatureMatrix(x))
        s = similarity_matrix(fm)
        assert np.array_equal(s, s.T)
        assert s.min() >= -1.0 and s.max() <= 1.0

    def test_mapped_similarity_bounds(self):
        s = np.array([-1.0, 0.0, 1.0])
        assert np.array_equal(unit_interval_similarity(s), [0.0, 0.5, 1.0])


def test_feature_matrix_rejects_nan():
    with pytest.raises(DatasetError):
        FeatureMatrix(np.array([[np.nan, 1.0]]))


def test_feature_matrix_normalized_flag_checked():
    with pytest.raises(DatasetError):
        FeatureMatrix(np.array([[2.0, 0.0]]), normalized=True)


def test_bundle_length_mismatch():
    with pytest.raises(DatasetError):
        DatasetBundle((Sample(0),), FeatureMatrix(np.zeros((2, 2))), "x")
