"""
Result files: atomic writes, CSV and JSON with provenance.

Every file records the SHA-256 of the manifest that produced it and the run
seed. CSV files carry them on a leading comment line:

    # manifest_sha256=<hex> seed=<n>
    arm,user,auc,...

Floats are written with 9 significant digits so reruns are byte-identical.
"""

import csv
import hashlib
import io
import json
import logging
import math
import os
import shutil
import tempfile
from collections.abc import Iterable, Iterator, Sequence
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any

logger = logging.getLogger(__name__)

PROVENANCE_PREFIX = "# "


@dataclass(frozen=True)
class Provenance:
    """Manifest digest and seed stamped into every output file."""

    manifest_sha256: str
    seed: int

    def comment_line(self) -> str:
        return f"{PROVENANCE_PREFIX}manifest_sha256={self.manifest_sha256} seed={self.seed}"

    def to_dict(self) -> dict:
        return {"manifest_sha256": self.manifest_sha256, "seed": self.seed}

    @classmethod
    def parse(cls, line: str) -> "Provenance":
        fields = dict(part.split("=", 1) for part in line[len(PROVENANCE_PREFIX):].split())
        return cls(manifest_sha256=fields["manifest_sha256"], seed=int(fields["seed"]))


def manifest_sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def write_text_atomic(path: str | Path, text: str) -> Path:
    """
    Write text through a temporary file in the target directory and rename
    it into place, so a failed run never leaves a partial file.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    logger.info(f"Wrote {path}")
    return path


@contextmanager
def staged_directory(path: str | Path) -> Iterator[Path]:
    """
    Directory in which a set of result files is written together.

    Files go to a hidden sibling of `path` and are moved into `path` only
    when the block exits cleanly; on any error the sibling is removed and
    `path` keeps its previous contents.

    Example usage:
        with staged_directory(out_dir) as stage:
            write_csv(stage / "sessions.csv", columns, rows, provenance)
            write_json(stage / "summary.json", document, provenance)
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent))
    stage.chmod(0o755)
    try:
        yield stage
        if path.exists():
            for item in sorted(stage.iterdir()):
                os.replace(item, path / item.name)
            stage.rmdir()
        else:
            os.replace(stage, path)
    except BaseException:
        shutil.rmtree(stage, ignore_errors=True)
        raise
    logger.info(f"Committed results to {path}")


def format_value(value: Any) -> str:
    """CSV cell text: 9 significant digits for floats, 1/0 for booleans."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.9g}"
    return str(value)


def format_csv(
    columns: Sequence[str], rows: Iterable[dict[str, Any]], provenance: Provenance | None = None
) -> str:
    buffer = io.StringIO()
    if provenance is not None:
        buffer.write(provenance.comment_line() + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row[c]) for c in columns])
    return buffer.getvalue()


def write_csv(
    path: str | Path,
    columns: Sequence[str],
    rows: Iterable[dict[str, Any]],
    provenance: Provenance | None = None,
) -> Path:
    return write_text_atomic(path, format_csv(columns, rows, provenance))


def read_csv(path: str | Path) -> tuple[Provenance | None, list[dict[str, str]]]:
    """Rows of a CSV written by write_csv, with its provenance line if present."""
    with open(path, encoding="utf-8", newline="") as f:
        lines = f.read().splitlines()
    provenance = None
    if lines and lines[0].startswith(PROVENANCE_PREFIX):
        try:
            provenance = Provenance.parse(lines[0])
        except (KeyError, ValueError):
            logger.warning(f"Unreadable provenance line in {path}")
        lines = lines[1:]
    return provenance, list(csv.DictReader(lines))


def _json_safe(value: Any) -> Any:
    if isinstance(value, float):
        return None if math.isnan(value) or math.isinf(value) else float(f"{value:.9g}")
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def write_json(
    path: str | Path, document: dict[str, Any], provenance: Provenance | None = None
) -> Path:
    """JSON document with an embedded `provenance` object; NaN and inf become null."""
    body = dict(document)
    if provenance is not None:
        body["provenance"] = provenance.to_dict()
    return write_text_atomic(path, json.dumps(_json_safe(body), indent=2, sort_keys=True) + "\n")
