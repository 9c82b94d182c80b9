"""
Tests for the atomic artifact writers.
"""
import os
import sys

import pytest

PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from shgrav.artifacts import atomic_write_text, format_csv, write_csv
from shgrav.errors import OutputError


def test_write_replaces_existing_file(tmp_path):
    path = tmp_path / "a.txt"
    atomic_write_text(str(path), "old\n")
    atomic_write_text(str(path), "new\n")
    assert path.read_text() == "new\n"
    assert [p.name for p in tmp_path.iterdir()] == ["a.txt"]


def test_failed_write_leaves_no_temporary_file(tmp_path):
    path = tmp_path / "a.txt"
    with pytest.raises(TypeError):
        atomic_write_text(str(path), None)
    assert list(tmp_path.iterdir()) == []


def test_failed_write_keeps_the_previous_artifact(tmp_path):
    path = tmp_path / "a.txt"
    atomic_write_text(str(path), "kept\n")
    with pytest.raises(TypeError):
        atomic_write_text(str(path), 42)
    assert path.read_text() == "kept\n"
    assert [p.name for p in tmp_path.iterdir()] == ["a.txt"]


def test_os_failure_becomes_output_error(tmp_path):
    target = tmp_path / "taken"
    target.mkdir()
    with pytest.raises(OutputError) as info:
        atomic_write_text(str(target), "x")
    assert info.value.exit_code == 3
    assert [p.name for p in tmp_path.iterdir()] == ["taken"]
    assert list(target.iterdir()) == []


def test_missing_directory_is_not_created(tmp_path):
    with pytest.raises(OutputError):
        write_csv(str(tmp_path / "missing" / "a.csv"), ["x"], [[1.0]])
    assert not (tmp_path / "missing").exists()


def test_file_mode_follows_umask(tmp_path):
    path = tmp_path / "a.csv"
    write_csv(str(path), ["x"], [[1.0]])
    mask = os.umask(0)
    os.umask(mask)
    assert os.stat(path).st_mode & 0o777 == 0o666 & ~mask


def test_csv_cells():
    text = format_csv(["x", "flag"], [[0.1, 2.5], [True, False]])
    assert text == "x,flag\n0.1,1\n2.5,0\n"


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
