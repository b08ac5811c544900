"""Series CSV writer matching the evaluator's reader.

The consumer expects a ``time_s`` column followed by one column per
channel, timestamps strictly increasing, every cell a finite float.
Timestamps are synthesized as ``i / fps`` and all numbers are written
at repr precision so the values survive a round trip bit for bit.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import BridgeError, ShapeMismatch

TIME_COLUMN = "time_s"


def write_series_csv(
    path: str | Path,
    channel_names: tuple[str, ...],
    values: np.ndarray,
    fps: float,
) -> None:
    """Write a (T, C) series under the given channel names."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ShapeMismatch(f"series values must be (T, C), got {values.shape}")
    frames, width = values.shape
    if frames < 1:
        raise ShapeMismatch("series needs at least one row")
    if width != len(channel_names) or width < 1:
        raise ShapeMismatch(
            f"{width} value columns for {len(channel_names)} channel names"
        )
    if len(set(channel_names)) != width or TIME_COLUMN in channel_names:
        raise BridgeError(f"channel names must be unique and not {TIME_COLUMN!r}")
    for name in channel_names:
        if not name or "," in name or "\n" in name or '"' in name:
            raise BridgeError(f"channel name {name!r} does not fit a bare CSV cell")
    if not np.isfinite(fps) or fps <= 0:
        raise BridgeError(f"fps must be positive and finite, got {fps}")
    if not np.all(np.isfinite(values)):
        raise BridgeError(f"refusing to write non-finite samples to {path}")
    lines = [",".join((TIME_COLUMN,) + tuple(channel_names))]
    for i in range(frames):
        cells = [repr(i / fps)] + [repr(float(v)) for v in values[i]]
        lines.append(",".join(cells))
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise
