"""Tests for result files and provenance."""

import json

import pytest

from src.reporting import (
    Provenance,
    format_csv,
    format_value,
    manifest_sha256,
    read_csv,
    staged_directory,
    write_csv,
    write_json,
    write_text_atomic,
)


@pytest.fixture
def provenance():
    return Provenance(manifest_sha256=manifest_sha256(b"{}"), seed=7)


class TestFormatting:
    """Tests for CSV cell text."""

    def test_nine_significant_digits(self):
        assert format_value(1 / 3) == "0.333333333"
        assert format_value(123456.7891234) == "123456.789"

    def test_booleans(self):
        assert format_value(True) == "1"
        assert format_value(False) == "0"

    def test_nan(self):
        assert format_value(float("nan")) == "nan"

    def test_lf_line_endings(self, provenance):
        text = format_csv(["a", "b"], [{"a": 1, "b": 0.5}], provenance)
        assert "\r" not in text
        assert text.splitlines() == [provenance.comment_line(), "a,b", "1,0.5"]


class TestProvenance:
    def test_comment_line(self, provenance):
        line = provenance.comment_line()
        assert line.startswith("# manifest_sha256=")
        assert line.endswith(" seed=7")
        assert Provenance.parse(line) == provenance

    def test_digest(self):
        assert manifest_sha256(b"abc") == (
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        )


class TestWriting:
    """Tests for atomic writes and read-back."""

    def test_csv_read_back(self, tmp_path, provenance):
        path = write_csv(tmp_path / "out" / "t.csv", ["x", "y"], [{"x": "a", "y": 2.0}], provenance)
        read_provenance, rows = read_csv(path)
        assert read_provenance == provenance
        assert rows == [{"x": "a", "y": "2"}]

    def test_csv_without_provenance(self, tmp_path):
        path = write_csv(tmp_path / "t.csv", ["x"], [{"x": 1}])
        read_provenance, rows = read_csv(path)
        assert read_provenance is None
        assert rows == [{"x": "1"}]

    def test_atomic_write_leaves_no_temp_files(self, tmp_path):
        write_text_atomic(tmp_path / "a.txt", "one\n")
        write_text_atomic(tmp_path / "a.txt", "two\n")
        assert [p.name for p in tmp_path.iterdir()] == ["a.txt"]
        assert (tmp_path / "a.txt").read_text() == "two\n"

    def test_failed_write_keeps_old_file(self, tmp_path):
        target = tmp_path / "a.txt"
        target.write_text("old\n")
        with pytest.raises(TypeError):
            write_text_atomic(target, None)
        assert target.read_text() == "old\n"
        assert [p.name for p in tmp_path.iterdir()] == ["a.txt"]

    def test_json_nan_becomes_null(self, tmp_path, provenance):
        path = write_json(tmp_path / "s.json", {"p": float("nan"), "x": 1 / 3}, provenance)
        document = json.loads(path.read_text())
        assert document["p"] is None
        assert document["x"] == 0.333333333
        assert document["provenance"] == {"manifest_sha256": provenance.manifest_sha256, "seed": 7}


class TestStagedDirectory:
    """Tests for writing a set of result files together."""

    def test_new_directory_appears_complete(self, tmp_path, provenance):
        out = tmp_path / "run"
        with staged_directory(out) as stage:
            write_csv(stage / "a.csv", ["x"], [{"x": 1}], provenance)
            assert not out.exists()
            write_json(stage / "b.json", {"k": 2}, provenance)
        assert sorted(p.name for p in out.iterdir()) == ["a.csv", "b.json"]
        assert [p.name for p in tmp_path.iterdir()] == ["run"]

    def test_failure_leaves_nothing(self, tmp_path):
        """Test that an error after the first file leaves neither output nor staging."""
        out = tmp_path / "run"
        with pytest.raises(RuntimeError):
            with staged_directory(out) as stage:
                write_text_atomic(stage / "a.csv", "x\n1\n")
                raise RuntimeError("second file failed")
        assert list(tmp_path.iterdir()) == []

    def test_existing_directory_keeps_unrelated_files(self, tmp_path):
        out = tmp_path / "run"
        out.mkdir()
        (out / "evidence_model.json").write_text("{}\n")
        (out / "a.csv").write_text("old\n")
        with staged_directory(out) as stage:
            write_text_atomic(stage / "a.csv", "new\n")
        assert (out / "a.csv").read_text() == "new\n"
        assert (out / "evidence_model.json").read_text() == "{}\n"
        assert [p.name for p in tmp_path.iterdir()] == ["run"]

    def test_failure_keeps_previous_results(self, tmp_path):
        out = tmp_path / "run"
        out.mkdir()
        (out / "a.csv").write_text("old\n")
        with pytest.raises(OSError):
            with staged_directory(out) as stage:
                write_text_atomic(stage / "a.csv", "new\n")
                raise OSError("disk full")
        assert (out / "a.csv").read_text() == "old\n"
        assert [p.name for p in tmp_path.iterdir()] == ["run"]
