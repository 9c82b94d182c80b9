"""
Artifact writers. Every file is written to a temporary sibling and renamed
into place, so a failed run never leaves a partial artifact behind.
"""

import csv
import io
import json
import os
import tempfile
from typing import Any, Iterable, List, Sequence

import numpy as np

from .errors import InputError, OutputError


def _umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(directory):
        raise OutputError(f"cannot write {path}: directory {directory} does not exist")
    tmp = None
    try:
        fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        # mkstemp creates 0600; artifacts get the usual umask-derived mode
        os.chmod(tmp, 0o666 & ~_umask())
        os.replace(tmp, path)
    except BaseException as e:
        if tmp is not None and os.path.exists(tmp):
            os.remove(tmp)
        if isinstance(e, OSError):
            raise OutputError(f"cannot write {path}: {e}") from e
        raise


def write_json(path: str, payload: Any) -> None:
    atomic_write_text(path, json.dumps(payload, indent=1) + "\n")


def read_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}")
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e}")


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def format_csv(header: Sequence[str], columns: Sequence[Iterable]) -> str:
    """Render equal-length columns as CSV text; floats keep full precision."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    cols: List[list] = [list(c) for c in columns]
    for row in zip(*cols):
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_csv(path: str, header: Sequence[str], columns: Sequence[Iterable]) -> None:
    atomic_write_text(path, format_csv(header, columns))
