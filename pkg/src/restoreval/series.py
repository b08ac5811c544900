"""Time-series container and its CSV exchange format.

A series CSV has a ``time_s`` column followed by one column per
channel.  Timestamps must be strictly increasing; the sampling rate is
inferred as ``1 / median(diff(time_s))`` rounded to 3 decimals, which
tolerates a few dropped frames without skewing the rate.
"""

from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    EmptySeries,
    HeaderMismatch,
    IoFailure,
    NonFiniteValue,
    NonMonotonicTime,
    RaggedRow,
    SeriesFormatError,
)

TIME_COLUMN = "time_s"


@dataclass
class TimeSeries:
    """Uniformly interpreted multichannel signal.

    ``values`` is (T, C) float64; ``channel_names`` labels the columns.
    """

    fps: float
    channel_names: tuple[str, ...]
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.channel_names = tuple(self.channel_names)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if self.values.ndim != 2:
            raise SeriesFormatError(f"values must be (T, C), got {self.values.shape}")
        if self.values.shape[0] < 1:
            raise EmptySeries("series has no samples")
        if self.values.shape[1] != len(self.channel_names):
            raise SeriesFormatError(
                f"{len(self.channel_names)} channel names for "
                f"{self.values.shape[1]} columns"
            )
        if len(set(self.channel_names)) != len(self.channel_names):
            raise HeaderMismatch("duplicate channel names")
        if not self.fps > 0:
            raise SeriesFormatError(f"fps must be positive, got {self.fps}")
        if not np.all(np.isfinite(self.values)):
            raise NonFiniteValue("series contains non-finite values")

    @property
    def frame_count(self) -> int:
        return self.values.shape[0]

    def channel(self, name: str) -> np.ndarray:
        return self.values[:, self.channel_names.index(name)]


def read_series_csv(path: str | Path, default_fps: float = 30.0) -> TimeSeries:
    """Parse a series CSV.

    ``default_fps`` only applies to single-row files where no rate can
    be inferred.
    """
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    rows = [r for r in rows if r]
    if not rows:
        raise EmptySeries(f"{path}: no header row")
    header = rows[0]
    if not header or header[0] != TIME_COLUMN:
        raise HeaderMismatch(f"{path}: first column must be {TIME_COLUMN!r}")
    names = tuple(header[1:])
    if not names:
        raise HeaderMismatch(f"{path}: no channel columns")
    if len(set(names)) != len(names):
        raise HeaderMismatch(f"{path}: duplicate channel names")
    if len(rows) < 2:
        raise EmptySeries(f"{path}: no data rows")
    width = len(header)
    times = np.empty(len(rows) - 1)
    values = np.empty((len(rows) - 1, len(names)))
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise RaggedRow(f"{path}:{i}: {len(row)} fields, expected {width}")
        try:
            parsed = [float(x) for x in row]
        except ValueError as exc:
            raise SeriesFormatError(f"{path}:{i}: {exc}") from exc
        times[i - 2] = parsed[0]
        values[i - 2] = parsed[1:]
    if not np.all(np.isfinite(times)):
        raise NonFiniteValue(f"{path}: non-finite timestamp")
    if not np.all(np.isfinite(values)):
        raise NonFiniteValue(f"{path}: non-finite sample value")
    if times.size > 1:
        deltas = np.diff(times)
        if np.any(deltas <= 0):
            at = int(np.argmax(deltas <= 0))
            raise NonMonotonicTime(f"{path}: time_s not increasing at data row {at + 2}")
        fps = round(1.0 / float(np.median(deltas)), 3)
    else:
        fps = default_fps
    return TimeSeries(fps=fps, channel_names=names, values=values, meta={"path": str(path)})


def write_series_csv(path: str | Path, series: TimeSeries) -> None:
    """Write a series with synthesized timestamps ``i / fps``.

    Uses repr-precision floats so a read-back reproduces the values
    bit for bit.  Atomic like the tensor writer.
    """
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow((TIME_COLUMN,) + series.channel_names)
                for i in range(series.frame_count):
                    t = i / series.fps
                    writer.writerow([repr(t)] + [repr(float(v)) for v in series.values[i]])
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
