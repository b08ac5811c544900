"""Assembling unpaired training pools from manifest frame tensors.

Training never sees aligned frame pairs: each condition's frames are
pooled across sessions, tasks and takes, then independently subsampled
down to the configured fraction of what is available.  The random
sampler is the default; an equidistant sampler exists for comparison
because evenly spaced frames oversample the periodic parts of scripted
tasks.
"""

from __future__ import annotations

import numpy as np

from .errors import BridgeError, DecodeFailure, ShapeMismatch
from .manifest import KIND_FRAMES, ManifestRow, select
from .tensorio import load_frames

SAMPLERS = ("random", "equidistant")


def gather_condition_frames(
    rows: list[ManifestRow], subject: str, condition: str
) -> np.ndarray:
    """All of one subject and condition's frames as a single (N, H, W) pool."""
    frame_rows = select(rows, kind=KIND_FRAMES, subject=subject, condition=condition)
    if not frame_rows:
        raise DecodeFailure(
            f"no frame tensors for subject {subject!r} condition {condition!r}"
        )
    frame_rows = sorted(frame_rows, key=lambda r: r.key)
    arrays = [load_frames(r.path) for r in frame_rows]
    shape = arrays[0].shape[1:]
    for row, arr in zip(frame_rows, arrays):
        if arr.shape[1:] != shape:
            raise ShapeMismatch(
                f"{row.path}: frame size {arr.shape[1:]} differs from {shape}"
            )
    return np.concatenate(arrays, axis=0)


def sample_indices(
    total: int, fraction: float, sampler: str, seed: int
) -> np.ndarray:
    """Pick ``round(total * fraction)`` frame indices, at least one."""
    if total < 1:
        raise ShapeMismatch("cannot sample from an empty pool")
    if not 0.0 < fraction <= 1.0:
        raise BridgeError(f"sample fraction {fraction} outside (0, 1]")
    count = max(1, round(total * fraction))
    if sampler == "random":
        rng = np.random.default_rng(seed)
        return np.sort(rng.choice(total, size=count, replace=False))
    if sampler == "equidistant":
        return np.round(np.linspace(0, total - 1, count)).astype(np.int64)
    raise BridgeError(f"unknown sampler {sampler!r}; choose from {SAMPLERS}")


def train_val_split(
    count: int, val_fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint shuffled train and validation index sets over ``count``."""
    if count < 1:
        raise ShapeMismatch("cannot split an empty pool")
    if not 0.0 <= val_fraction < 1.0:
        raise BridgeError(f"validation fraction {val_fraction} outside [0, 1)")
    rng = np.random.default_rng(seed)
    order = rng.permutation(count)
    n_val = min(count - 1, round(count * val_fraction)) if count > 1 else 0
    val = np.sort(order[:n_val])
    train = np.sort(order[n_val:])
    return train, val
