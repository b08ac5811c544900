"""Reader and writer for the evaluator's binary tensor container.

The wire layout is fixed by the consumer and reimplemented here from
its definition rather than shared as code, so each side checks the
other:

    bytes 0..3    magic ``FFR1``
    bytes 4..7    u32 dtype code (0 = float32)
    bytes 8..11   u32 ndim
    then          ndim * u64 dimension sizes
    then          row-major float payload, exactly prod(dims) elements

Everything is little-endian, payloads must be finite, dimensions must
be at least 1, and no trailing bytes are allowed.  Writes go through a
temp file plus rename so partially written tensors never appear under
the final name.
"""

from __future__ import annotations

import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import BridgeError, DecodeFailure, ShapeMismatch

MAGIC = b"FFR1"
DTYPE_FLOAT32 = 0
MAX_NDIM = 8


def _u32(blob: bytes, offset: int) -> int:
    return int.from_bytes(blob[offset : offset + 4], "little")


def _u64(blob: bytes, offset: int) -> int:
    return int.from_bytes(blob[offset : offset + 8], "little")


def write_tensor(path: str | Path, values) -> None:
    """Serialize an array as float32 in the container format."""
    arr = np.ascontiguousarray(values, dtype=np.float32)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim > MAX_NDIM:
        raise ShapeMismatch(f"ndim {arr.ndim} exceeds container limit {MAX_NDIM}")
    if arr.size == 0:
        raise ShapeMismatch("empty tensors are not representable")
    if not np.all(np.isfinite(arr)):
        raise BridgeError(f"refusing to write non-finite values to {path}")
    parts = [MAGIC]
    parts.append(DTYPE_FLOAT32.to_bytes(4, "little"))
    parts.append(arr.ndim.to_bytes(4, "little"))
    for dim in arr.shape:
        parts.append(int(dim).to_bytes(8, "little"))
    parts.append(arr.astype("<f4", copy=False).tobytes(order="C"))
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(b"".join(parts))
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def read_tensor(path: str | Path) -> np.ndarray:
    """Read a container file back into a float32 array.

    Any deviation from the wire contract raises DecodeFailure; the
    message names the offending part.
    """
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise DecodeFailure(f"cannot read {path}: {exc}") from exc
    if len(blob) < 12:
        raise DecodeFailure(f"{path}: header cut short at {len(blob)} bytes")
    if blob[:4] != MAGIC:
        raise DecodeFailure(f"{path}: bad magic {blob[:4]!r}")
    dtype_code = _u32(blob, 4)
    if dtype_code != DTYPE_FLOAT32:
        raise DecodeFailure(f"{path}: unsupported dtype code {dtype_code}")
    ndim = _u32(blob, 8)
    if not 1 <= ndim <= MAX_NDIM:
        raise DecodeFailure(f"{path}: ndim {ndim} out of range")
    dims_end = 12 + 8 * ndim
    if len(blob) < dims_end:
        raise DecodeFailure(f"{path}: dimension block cut short")
    dims = tuple(_u64(blob, 12 + 8 * i) for i in range(ndim))
    if any(d < 1 for d in dims):
        raise DecodeFailure(f"{path}: zero-sized dimension in {dims}")
    count = math.prod(dims)
    expected = dims_end + 4 * count
    if len(blob) < expected:
        raise DecodeFailure(
            f"{path}: payload has {len(blob) - dims_end} bytes, needs {4 * count}"
        )
    if len(blob) > expected:
        raise DecodeFailure(f"{path}: {len(blob) - expected} trailing bytes")
    flat = np.frombuffer(blob, dtype="<f4", count=count, offset=dims_end)
    # Copy out of the read-only buffer so callers own writable data.
    arr = flat.reshape(dims).astype(np.float32, copy=True)
    if not np.all(np.isfinite(arr)):
        raise DecodeFailure(f"{path}: payload contains non-finite values")
    return arr


def load_frames(path: str | Path) -> np.ndarray:
    """Read a (T, H, W) grayscale frame tensor."""
    arr = read_tensor(path)
    if arr.ndim != 3:
        raise ShapeMismatch(f"{path}: expected (T, H, W) frames, got {arr.shape}")
    return arr


def crop_frames(frames: np.ndarray, box: tuple[int, int, int, int]) -> np.ndarray:
    """Cut the fixed box (top, left, height, width) out of every frame."""
    top, left, height, width = box
    _, full_h, full_w = frames.shape
    if height < 1 or width < 1:
        raise ShapeMismatch(f"crop box {box} has empty extent")
    if top < 0 or left < 0 or top + height > full_h or left + width > full_w:
        raise ShapeMismatch(f"crop box {box} leaves the {full_h}x{full_w} frame")
    return frames[:, top : top + height, left : left + width]


def write_stack_sequence(dirpath: str | Path, layers: dict[str, np.ndarray]) -> None:
    """Write per-layer (T, C, H, W) tensors, one ``<layer_id>.ffr`` each."""
    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)
    frames = None
    for layer_id, arr in layers.items():
        arr = np.asarray(arr, dtype=np.float32)
        if arr.ndim != 4:
            raise ShapeMismatch(f"layer {layer_id!r} must be (T, C, H, W), got {arr.shape}")
        if frames is None:
            frames = arr.shape[0]
        elif arr.shape[0] != frames:
            raise ShapeMismatch(
                f"layer {layer_id!r} has {arr.shape[0]} frames, expected {frames}"
            )
        write_tensor(dirpath / f"{layer_id}.ffr", arr)
