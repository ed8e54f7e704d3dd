"""Pair files, pair metadata and result export.

Pair files hold whitespace-separated numeric rows; the first two columns are
``x`` and ``y``.  Metadata rows follow the cause-effect pairs corpus layout::

    <id> <cause_first> <cause_last> <effect_first> <effect_last> <weight>

Result files are CSV (header :data:`RESULT_FIELDS`) or JSON lines with the
same keys in the same order.
"""

from __future__ import annotations

import csv
import json
import logging
import re
import warnings
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable

from .core import Direction, SamplePairs
from .errors import InvalidPairs, ParseError, TooFewRows

__all__ = [
    "MultiColumnWarning",
    "PairRecord",
    "ResultRecord",
    "MetadataMap",
    "RESULT_FIELDS",
    "load_pair_file",
    "load_metadata",
    "find_pair_files",
    "write_results",
    "read_results",
]

logger = logging.getLogger(__name__)


class MultiColumnWarning(UserWarning):
    """A pair file has more than two columns; only the first two are used."""


@dataclass
class PairRecord:
    id: str
    pairs: SamplePairs
    truth: Direction
    weight: float = 1.0


@dataclass
class ResultRecord:
    id: str
    method: str
    k: int
    T: int
    weighting: str
    decision: str
    vote_sum: float
    correct: bool
    elapsed: float = 0.0

    def __post_init__(self):
        self.k = int(self.k)
        self.T = int(self.T)
        self.vote_sum = float(self.vote_sum)
        self.elapsed = float(self.elapsed)
        if isinstance(self.correct, str):
            self.correct = self.correct.strip().lower() in ("1", "true")
        self.correct = bool(self.correct)


RESULT_FIELDS = tuple(f.name for f in fields(ResultRecord))


class MetadataMap(dict):
    """``id -> (truth, weight)``; ``excluded`` lists ids dropped as non-scalar."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.excluded: list[str] = []


def _read_text(path) -> str:
    try:
        return Path(path).read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read file: {exc}", path=path) from exc


def load_pair_file(path) -> SamplePairs:
    """Read ``x`` and ``y`` from columns 1 and 2 of a whitespace pair file."""
    xs: list[float] = []
    ys: list[float] = []
    wide = False
    for lineno, line in enumerate(_read_text(path).splitlines(), start=1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) < 2:
            raise ParseError(f"expected at least 2 numeric fields, got {len(parts)}", path, lineno)
        try:
            a, b = float(parts[0]), float(parts[1])
        except ValueError:
            raise ParseError(f"non-numeric field in {line.strip()!r}", path, lineno) from None
        if len(parts) > 2:
            wide = True
        xs.append(a)
        ys.append(b)
    if len(xs) < 3:
        raise TooFewRows(f"need at least 3 rows, got {len(xs)}", path)
    if wide:
        warnings.warn(f"{path}: more than 2 columns, using the first two", MultiColumnWarning, stacklevel=2)
    try:
        return SamplePairs(xs, ys)
    except InvalidPairs as exc:
        raise ParseError(str(exc), path) from exc


def load_metadata(path) -> MetadataMap:
    """Parse a pair metadata file.

    Rows whose cause or effect spans several columns are excluded (listed in
    ``result.excluded``); so are rows that do not map columns 1 and 2.
    """
    out = MetadataMap()
    for lineno, line in enumerate(_read_text(path).splitlines(), start=1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if len(parts) < 5:
            raise ParseError(f"expected 6 fields, got {len(parts)}", path, lineno)
        pid = parts[0]
        try:
            c0, c1, e0, e1 = (int(p) for p in parts[1:5])
            weight = float(parts[5]) if len(parts) > 5 else 1.0
        except ValueError:
            raise ParseError(f"malformed row {line.strip()!r}", path, lineno) from None
        if c0 != c1 or e0 != e1:
            out.excluded.append(pid)
            continue
        if (c0, e0) == (1, 2):
            truth = Direction.X_CAUSES_Y
        elif (c0, e0) == (2, 1):
            truth = Direction.Y_CAUSES_X
        else:
            out.excluded.append(pid)
            continue
        out[pid] = (truth, weight)
    if out.excluded:
        logger.info("excluded %d non-scalar pairs: %s", len(out.excluded), " ".join(out.excluded))
    return out


_PAIR_NAME = re.compile(r"^pair(\d+)\.txt$")


def find_pair_files(directory) -> dict[str, Path]:
    """Map numeric ids to files named ``pair<id>.txt`` in ``directory``."""
    found = {}
    for p in sorted(Path(directory).iterdir()):
        m = _PAIR_NAME.match(p.name)
        if m:
            found[m.group(1)] = p
    return found


def _row(rec: ResultRecord) -> dict:
    return {name: getattr(rec, name) for name in RESULT_FIELDS}


def write_results(path, records: Iterable[ResultRecord], format: str = "csv") -> None:
    """Write records as CSV (fixed header) or JSON lines, fields in declaration order."""
    records = list(records)
    if format == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=RESULT_FIELDS, lineterminator="\n")
            w.writeheader()
            for rec in records:
                w.writerow({**_row(rec), "vote_sum": repr(rec.vote_sum), "elapsed": repr(rec.elapsed)})
    elif format == "jsonl":
        with open(path, "w") as fh:
            for rec in records:
                fh.write(json.dumps(_row(rec)) + "\n")
    else:
        raise ValueError(f"unknown format {format!r}")


def read_results(path, format: str | None = None) -> list[ResultRecord]:
    path = Path(path)
    if format is None:
        format = "jsonl" if path.suffix == ".jsonl" else "csv"
    if format == "jsonl":
        return [ResultRecord(**json.loads(line)) for line in path.read_text().splitlines() if line.strip()]
    with open(path, newline="") as fh:
        return [ResultRecord(**row) for row in csv.DictReader(fh)]
