"""Tests for dataset, model and table files."""

import pytest

from edgevote.errors import InputError
from edgevote.source import draw_dataset, make_spec
from edgevote.storage import (
    decode_dataset,
    encode_dataset,
    load_dataset,
    load_model,
    rows_to_csv,
    save_dataset,
    save_model,
    write_csv,
)
from edgevote.vote import VoteModel


class TestDatasetFiles:
    """Tests for the packed dataset format."""

    def test_save_and_load(self, mixed_spec):
        data = draw_dataset(mixed_spec, 37, seed=12)
        path = save_dataset(data, "train.bin")
        loaded = load_dataset(path, mixed_spec)
        assert loaded.same_as(data)
        assert loaded.stream == data.stream

    def test_relative_path_lands_in_output_dir(self, mixed_spec, tmp_path):
        path = save_dataset(draw_dataset(mixed_spec, 3, seed=0), "sub/d.bin")
        assert path == tmp_path / "out" / "sub" / "d.bin"
        assert path.exists()

    def test_header_is_readable(self, three_example_dataset):
        raw = encode_dataset(three_example_dataset)
        lines = raw.split(b"\n", 2)
        assert lines[0] == b"EDGEVOTE-DATASET"
        assert b'"m": 3' in lines[1]
        assert b'"N": 2' in lines[1]

    def test_header_records_relevant_count(self, mixed_spec):
        data = draw_dataset(mixed_spec, 4, seed=2)
        raw = encode_dataset(data)
        assert b'"K": 6' in raw.split(b"\n", 2)[1]
        assert decode_dataset(raw, mixed_spec).K == 6

    def test_unknown_relevant_count_survives(self, three_example_dataset):
        raw = encode_dataset(three_example_dataset)
        assert b'"K": null' in raw.split(b"\n", 2)[1]
        assert decode_dataset(raw).K is None

    def test_rejects_other_files(self):
        with pytest.raises(InputError, match="Not an edgevote dataset"):
            decode_dataset(b"hello\nworld")

    def test_rejects_truncated_body(self, mixed_spec):
        raw = encode_dataset(draw_dataset(mixed_spec, 20, seed=1))
        with pytest.raises(InputError, match="bytes"):
            decode_dataset(raw[:-1])

    def test_rejects_malformed_header(self):
        with pytest.raises(InputError, match="header"):
            decode_dataset(b"EDGEVOTE-DATASET\n{not json}\n")

    def test_rejects_foreign_source(self, mixed_spec):
        raw = encode_dataset(draw_dataset(mixed_spec, 5, seed=1))
        with pytest.raises(InputError, match="different source"):
            decode_dataset(raw, make_spec(30, 6, "1/5"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError, match="Cannot read"):
            load_dataset(tmp_path / "absent.bin")


class TestModelFiles:
    """Tests for model JSON files."""

    def test_save_and_load(self):
        model = VoteModel.from_features(["+0", "-4", "+9"], default_label=0)
        assert load_model(save_model(model, "model.json")) == model

    def test_rejects_non_object(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("[1, 2]")
        with pytest.raises(InputError):
            load_model(path)

    def test_rejects_bad_feature(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"features": ["+a"]}')
        with pytest.raises(InputError):
            load_model(path)


class TestTables:
    """Tests for CSV rendering."""

    def test_fixed_columns_and_empty_cells(self):
        text = rows_to_csv(
            [{"b": 1, "a": None}, {"a": 0.25, "b": "x", "extra": 9}], ("a", "b")
        )
        assert text == "a,b\n,1\n0.25,x\n"

    def test_floats_keep_full_precision(self):
        text = rows_to_csv([{"v": 1 / 3}], ("v",))
        assert text.splitlines()[1] == repr(1 / 3)

    def test_write_refuses_symlink(self, tmp_path):
        target = tmp_path / "real.csv"
        target.write_text("")
        (tmp_path / "out").mkdir()
        (tmp_path / "out" / "link.csv").symlink_to(target)
        with pytest.raises(InputError, match="symlink"):
            write_csv([], ("a",), "link.csv")

    def test_write_creates_parents(self, tmp_path):
        path = write_csv([{"a": 1}], ("a",), tmp_path / "deep" / "t.csv")
        assert path.read_text() == "a\n1\n"
