"""Reading datasets and writing results.

Angular data arrive as CSV files with a header row, one observation per
row, directions in degrees from North (or radians with ``unit="rad"``).
Matrix, booklet and Euclidean samples are plain numeric CSV files:

* Bures-Wasserstein: the upper triangle of each matrix, row by row
  (``s11,s12,s22`` for 2x2);
* booklet: ``branch,spine,page_1,...``;
* Euclidean: one column per coordinate.
"""
import csv
import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from datetime import date, datetime

import numpy as np

from .errors import IsometError
from .geometry.points import wrap_angle
from .geometry.spaces import Booklet, BuresWasserstein, Circle, Euclidean


class DataError(IsometError):
    """Unreadable or empty input."""


@dataclass(frozen=True)
class AngularDataset:
    """Directions in degrees in ``[0, 360)`` with optional ISO-8601 timestamps."""
    records: tuple
    source: str = ""
    skipped: int = 0

    def __len__(self):
        return len(self.records)

    @property
    def degrees(self):
        return np.array([r[1] for r in self.records], dtype=float)

    @property
    def radians(self):
        return wrap_angle(np.radians(self.degrees))


def _parse_date(text):
    return date.fromisoformat(text) if isinstance(text, str) else text


def ingest_angles(path, column="dir", unit="deg", hour=None, date_from=None, date_to=None,
                  time_column="ts", stderr=None):
    """Read a column of directions from a CSV file.

    Rows whose direction is missing or not a finite number are skipped. So
    are rows that fail an hour or date filter because their timestamp is
    missing or unparsable. The number of skipped invalid rows is written
    to ``stderr``.

    Parameters
    ----------
    path : str or path-like
    column : str
        Header of the direction column.
    unit : {"deg", "rad"}
    hour : int, optional
        Keep only rows whose timestamp has this hour of day.
    date_from, date_to : str or datetime.date, optional
        Inclusive date range on the timestamp.
    time_column : str
        Header of the timestamp column; it may be absent when no time
        filter is used.
    """
    if unit not in ("deg", "rad"):
        raise DataError(f"unit must be 'deg' or 'rad', got {unit!r}")
    date_from, date_to = _parse_date(date_from), _parse_date(date_to)
    need_time = hour is not None or date_from is not None or date_to is not None
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
    records = []
    skipped = 0
    with handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        if column not in header:
            raise DataError(f"column {column!r} not found in {path} (columns: {', '.join(header)})")
        if need_time and time_column not in header:
            raise DataError(f"time filter needs column {time_column!r}, not found in {path}")
        for row in reader:
            try:
                value = float(row[column])
            except (TypeError, ValueError):
                skipped += 1
                continue
            if not math.isfinite(value):
                skipped += 1
                continue
            ts = row.get(time_column) or None
            if need_time:
                try:
                    when = datetime.fromisoformat(ts)
                except (TypeError, ValueError):
                    skipped += 1
                    continue
                if hour is not None and when.hour != hour:
                    continue
                if date_from is not None and when.date() < date_from:
                    continue
                if date_to is not None and when.date() > date_to:
                    continue
            deg = math.degrees(value) if unit == "rad" else value
            records.append((ts, deg % 360.0))
    if skipped:
        print(f"{path}: skipped {skipped} invalid row(s)", file=stderr or sys.stderr)
    if not records:
        raise DataError(f"no valid observations in {path}")
    return AngularDataset(tuple(records), str(path), skipped)


def emit_angles(dataset, path):
    """Write ``ts,dir`` rows; the inverse of :func:`ingest_angles` with defaults."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ts", "dir"])
        for ts, deg in dataset.records:
            w.writerow([ts or "", repr(float(deg))])


def read_points(path, space):
    """Read a numeric CSV sample for a matrix, booklet or Euclidean space."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if len(rows) < 2:
        raise DataError(f"{path} has no data rows")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc
    if data.ndim != 2 or not np.all(np.isfinite(data)):
        raise DataError(f"{path}: rows must be complete and finite")
    if isinstance(space, BuresWasserstein):
        p = space.dim
        iu = np.triu_indices(p)
        if data.shape[1] != iu[0].size:
            raise DataError(f"{path}: expected {iu[0].size} upper-triangle columns for {p}x{p} matrices")
        out = np.zeros((data.shape[0], p, p))
        out[:, iu[0], iu[1]] = data
        out[:, iu[1], iu[0]] = data
        return out
    if isinstance(space, (Booklet, Euclidean)):
        return data
    raise DataError(f"read_points does not handle {space!r}; use ingest_angles")


# -- null-mean encodings -----------------------------------------------------

def _floats(text, sep=","):
    try:
        return [float(v) for v in text.split(sep) if v.strip() != ""]
    except ValueError as exc:
        raise DataError(f"not a number list: {text!r}") from exc


def parse_null_mean(text, space):
    """Decode a null mean.

    Circle ``"225deg"`` or ``"3.93rad"``; Bures-Wasserstein rows joined by
    ``;`` (``"1,0;0,1"``); booklet ``"z:x:y1,y2"``; Euclidean ``"a,b,c"``.
    """
    text = text.strip()
    if isinstance(space, Circle):
        for suffix, conv in (("deg", math.radians), ("rad", float)):
            if text.endswith(suffix):
                try:
                    return float(wrap_angle(conv(float(text[: -len(suffix)]))))
                except ValueError:
                    break
        raise DataError(f"circle null mean must look like '225deg' or '3.9rad', got {text!r}")
    if isinstance(space, BuresWasserstein):
        rows = [_floats(r) for r in text.split(";")]
        if len(rows) != space.dim or any(len(r) != space.dim for r in rows):
            raise DataError(f"expected a {space.dim}x{space.dim} matrix, got {text!r}")
        return space.canonical(np.array(rows))
    if isinstance(space, Booklet):
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise DataError(f"booklet null mean must look like 'z:x:y1,...', got {text!r}")
        try:
            head = [float(parts[0]), float(parts[1])]
        except ValueError as exc:
            raise DataError(f"bad booklet point {text!r}") from exc
        page = _floats(parts[2]) if len(parts) == 3 else []
        return space.canonical(np.array(head + page))
    if isinstance(space, Euclidean):
        return space.canonical(np.array(_floats(text)))
    raise DataError(f"no null-mean encoding for {space!r}")


def format_null_mean(value, space):
    """Inverse of :func:`parse_null_mean` (circle values are printed in radians)."""
    value = np.asarray(value, dtype=float)
    if isinstance(space, Circle):
        return f"{float(value)!r}rad"
    if isinstance(space, BuresWasserstein):
        return ";".join(",".join(repr(float(v)) for v in row) for row in value)
    if isinstance(space, Booklet):
        page = ",".join(repr(float(v)) for v in value[2:])
        return f"{int(value[0])}:{float(value[1])!r}:{page}"
    if isinstance(space, Euclidean):
        return ",".join(repr(float(v)) for v in value)
    raise DataError(f"no null-mean encoding for {space!r}")


# -- sweep tables --------------------------------------------------------------

SWEEP_HEADER = ("scenario", "n", "delta", "rejection_rate", "wilson_low", "wilson_high",
                "datasets", "wall_seconds")


def write_sweep_csv(rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow([r.scenario, r.n, repr(float(r.delta)), repr(float(r.rejection_rate)),
                    repr(float(r.wilson_low)), repr(float(r.wilson_high)), r.datasets,
                    f"{r.wall_seconds:.3f}"])


def read_sweep_csv(fh):
    reader = csv.DictReader(fh)
    if tuple(reader.fieldnames or ()) != SWEEP_HEADER:
        raise DataError("not a sweep table")
    out = []
    for row in reader:
        out.append({k: (row[k] if k == "scenario" else
                         int(row[k]) if k in ("n", "datasets") else float(row[k])) for k in SWEEP_HEADER})
    return out


# -- run manifests -------------------------------------------------------------

def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class RunManifest:
    """What is needed to rerun a command: its flags, seed, version and inputs."""
    command: str
    flags: dict
    seed: int | None
    version: str
    started: str
    finished: str = ""
    inputs: dict = field(default_factory=dict)

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")


__all__ = [
    "AngularDataset", "DataError", "RunManifest", "SWEEP_HEADER", "emit_angles", "file_digest",
    "format_null_mean", "ingest_angles", "parse_null_mean", "read_points", "read_sweep_csv",
    "write_sweep_csv",
]
