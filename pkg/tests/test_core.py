"""Dataset handling, path indices, random streams, persistence."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from probboost.core import (
    Dataset,
    RandomStream,
    load_csv,
    load_record,
    make_synthetic_dataset,
    normalize_weights,
    path_last,
    path_parent,
    save_record,
    validate_path,
)


class TestNormalizeWeights:
    def test_uniform(self):
        np.testing.assert_allclose(normalize_weights(np.ones(4)), np.full(4, 0.25))

    def test_proportionality_with_zero(self):
        np.testing.assert_allclose(normalize_weights(np.array([2.0, 0.0, 2.0])), [0.5, 0.0, 0.5])

    def test_underflow_survival(self):
        out = normalize_weights(np.array([1e-300, 1e-300]))
        np.testing.assert_allclose(out, [0.5, 0.5])

    @given(
        st.lists(st.floats(min_value=1e-6, max_value=1e6), min_size=1, max_size=30)
    )
    @settings(max_examples=100, deadline=None)
    def test_idempotent_bit_exact(self, raw):
        once = normalize_weights(np.array(raw))
        twice = normalize_weights(once)
        assert np.array_equal(once, twice)

    def test_errors(self):
        with pytest.raises(ValueError):
            normalize_weights(np.zeros(3))
        with pytest.raises(ValueError):
            normalize_weights(np.array([1.0, -0.5]))
        with pytest.raises(ValueError):
            normalize_weights(np.array([]))


class TestDataset:
    def test_uniform_default_weights(self):
        ds = Dataset.from_arrays([[0.0], [1.0]], [1, -1])
        np.testing.assert_allclose(ds.weights, [0.5, 0.5])
        assert ds.n_examples == 2
        assert ds.dimension == 1

    def test_label_validation(self):
        with pytest.raises(ValueError):
            Dataset.from_arrays([[0.0]], [0])

    def test_weight_sum_validation(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros((2, 1)), np.array([1, -1]), np.array([0.6, 0.6]))

    def test_synthetic_is_valid(self):
        ds = make_synthetic_dataset(n=11, dim=3, seed=4)
        assert ds.n_examples == 11
        assert ds.dimension == 3
        assert abs(ds.weights.sum() - 1.0) <= 1e-12
        assert set(np.unique(ds.labels)) <= {-1, 1}

    def test_synthetic_seeded(self):
        a = make_synthetic_dataset(seed=9)
        b = make_synthetic_dataset(seed=9)
        assert np.array_equal(a.features, b.features)


class TestLoadCsv:
    def test_uniform_weights(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("f0,label\n0.5,1\n-1.5,-1\n")
        ds = load_csv(p)
        np.testing.assert_allclose(ds.weights, [0.5, 0.5])
        np.testing.assert_allclose(ds.features[:, 0], [0.5, -1.5])

    def test_weight_column(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("f0,label,weight\n0,1,3\n1,-1,1\n")
        ds = load_csv(p)
        np.testing.assert_allclose(ds.weights, [0.75, 0.25])

    def test_bad_label_names_row(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("f0,label\n0.5,1\n0.7,0\n")
        with pytest.raises(ValueError, match="row 3"):
            load_csv(p)

    def test_malformed_row(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("f0,label\n0.5,1\nxyz,1\n")
        with pytest.raises(ValueError, match="row 3"):
            load_csv(p)

    def test_wrong_field_count(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("f0,f1,label\n0.5,1\n")
        with pytest.raises(ValueError, match="row 2"):
            load_csv(p)

    def test_empty_file(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("")
        with pytest.raises(ValueError, match="empty"):
            load_csv(p)

    def test_header_enforced(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("x,y,label\n0,0,1\n")
        with pytest.raises(ValueError):
            load_csv(p)


class TestPaths:
    def test_parent_and_last(self):
        assert path_parent("++-") == "++"
        assert path_last("++-") == -1
        assert path_parent("+") == ""
        assert path_last("+") == 1

    def test_recompose(self):
        for s in ("+", "-", "+-", "--+", "++-+"):
            assert path_parent(s) + ("+" if path_last(s) == 1 else "-") == s

    def test_root_errors(self):
        with pytest.raises(ValueError):
            path_parent("")
        with pytest.raises(ValueError):
            path_last("")

    def test_validate(self):
        assert validate_path("") == ""
        with pytest.raises(ValueError):
            validate_path("+x")


class TestRandomStream:
    def test_reproducible(self):
        a = RandomStream(7).generator("p", 3, 2).random(5)
        b = RandomStream(7).generator("p", 3, 2).random(5)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        s = RandomStream(7)
        draws = {
            s.uniform("p", 0, 0),
            s.uniform("p", 1, 0),
            s.uniform("p", 0, 1),
            s.uniform("q", 0, 0),
            RandomStream(8).uniform("p", 0, 0),
        }
        assert len(draws) == 5

    def test_order_independent(self):
        s = RandomStream(3)
        forward = [s.uniform("t", n, 0) for n in range(4)]
        backward = [RandomStream(3).uniform("t", n, 0) for n in reversed(range(4))]
        assert forward == list(reversed(backward))


class TestRecords:
    def test_round_trip(self, tmp_path):
        record = {"kind": "demo", "values": [1.0, 0.30000000000000004], "nested": {"a": 1}}
        path = tmp_path / "m.json"
        save_record(record, path)
        loaded = load_record(path)
        assert loaded == record

    def test_identical_bytes(self, tmp_path):
        record = {"b": 2, "a": [1.5, -0.125]}
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        save_record(record, p1)
        save_record(record, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_version_checked(self, tmp_path):
        p = tmp_path / "m.json"
        p.write_text('{"kind": "demo", "format_version": 99}')
        with pytest.raises(ValueError, match="version"):
            load_record(p)
