"""Binary tensor container and the feature types stored in it.

File layout, all little-endian:

    bytes 0..3    magic ``FFR1``
    bytes 4..7    u32 dtype code (0 = float32)
    bytes 8..11   u32 ndim
    then          ndim * u64 dimension sizes
    then          row-major float payload, exactly prod(dims) elements

No trailing bytes are allowed, payloads must be finite, and every
dimension must be at least 1.  Writes are atomic (temp file + rename)
so a crashed run never leaves a half-written tensor behind.
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    IoFailure,
    NonFiniteValue,
    ShapeMismatch,
    TensorFormatError,
    TruncatedPayload,
    UnsupportedDtype,
)

MAGIC = b"FFR1"
DTYPE_FLOAT32 = 0
MAX_NDIM = 8

_HEAD = struct.Struct("<4sII")


def write_tensor(path: str | Path, values) -> None:
    """Serialize an array to ``path`` in the container format.

    Values are converted to float32.  Raises NonFiniteValue if the
    input contains NaN or infinity, IoFailure if the OS write fails.
    """
    arr = np.ascontiguousarray(values, dtype=np.float32)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim > MAX_NDIM:
        raise TensorFormatError(f"ndim {arr.ndim} exceeds limit {MAX_NDIM}")
    if arr.size == 0:
        raise TensorFormatError("empty tensors are not representable")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"refusing to write non-finite values to {path}")
    header = _HEAD.pack(MAGIC, DTYPE_FLOAT32, arr.ndim)
    dims = struct.pack(f"<{arr.ndim}Q", *arr.shape)
    payload = arr.astype("<f4", copy=False).tobytes(order="C")
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(header)
                fh.write(dims)
                fh.write(payload)
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_tensor(path: str | Path) -> np.ndarray:
    """Read a tensor file back into a float32 array.

    Raises BadMagic, UnsupportedDtype, TruncatedPayload or
    TensorFormatError depending on which part of the contract the
    file violates.
    """
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if blob[:4] != MAGIC:
        raise BadMagic(f"{path}: expected {MAGIC!r}, got {blob[:4]!r}")
    if len(blob) < _HEAD.size:
        raise TruncatedPayload(f"{path}: header cut short at {len(blob)} bytes")
    _, dtype_code, ndim = _HEAD.unpack_from(blob)
    if dtype_code != DTYPE_FLOAT32:
        raise UnsupportedDtype(f"{path}: dtype code {dtype_code}")
    if not 1 <= ndim <= MAX_NDIM:
        raise TensorFormatError(f"{path}: ndim {ndim} out of range")
    dims_end = _HEAD.size + 8 * ndim
    if len(blob) < dims_end:
        raise TruncatedPayload(f"{path}: dimension block cut short")
    dims = struct.unpack_from(f"<{ndim}Q", blob, _HEAD.size)
    if any(d < 1 for d in dims):
        raise TensorFormatError(f"{path}: zero-sized dimension in {dims}")
    count = 1
    for d in dims:
        count *= d
    expected = dims_end + 4 * count
    if len(blob) < expected:
        raise TruncatedPayload(
            f"{path}: payload has {len(blob) - dims_end} bytes, needs {4 * count}"
        )
    if len(blob) > expected:
        raise TensorFormatError(f"{path}: {len(blob) - expected} trailing bytes")
    flat = np.frombuffer(blob, dtype="<f4", count=count, offset=dims_end)
    arr = np.ascontiguousarray(flat.reshape(dims), dtype=np.float32)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"{path}: payload contains non-finite values")
    return arr


@dataclass
class FeatureMatrix:
    """N embedding vectors of dimension d, one row per frame."""

    values: np.ndarray
    source: str | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.ndim != 2:
            raise ShapeMismatch(f"feature matrix must be 2-D, got {self.values.ndim}-D")
        n, d = self.values.shape
        if n < 1 or d < 1:
            raise ShapeMismatch(f"feature matrix must be non-empty, got {n}x{d}")
        if not np.all(np.isfinite(self.values)):
            raise NonFiniteValue("feature matrix contains non-finite values")

    @property
    def count(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


@dataclass
class FeatureStack:
    """Per-frame activations: named layers, each a (C, H, W) array."""

    frame_index: int
    layers: tuple[tuple[str, np.ndarray], ...]

    def __post_init__(self):
        if not self.layers:
            raise ShapeMismatch("feature stack needs at least one layer")
        fixed = []
        seen = set()
        for layer_id, arr in self.layers:
            if layer_id in seen:
                raise ShapeMismatch(f"duplicate layer id {layer_id!r}")
            seen.add(layer_id)
            arr = np.asarray(arr, dtype=np.float32)
            if arr.ndim != 3:
                raise ShapeMismatch(f"layer {layer_id!r} must be (C, H, W), got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise NonFiniteValue(f"layer {layer_id!r} contains non-finite values")
            fixed.append((layer_id, arr))
        self.layers = tuple(fixed)

    @property
    def layer_ids(self) -> tuple[str, ...]:
        return tuple(layer_id for layer_id, _ in self.layers)


def load_feature_matrix(path: str | Path) -> FeatureMatrix:
    """Read a 2-D tensor file as a FeatureMatrix."""
    arr = read_tensor(path)
    if arr.ndim != 2:
        raise ShapeMismatch(f"{path}: expected a 2-D embedding matrix, got {arr.ndim}-D")
    return FeatureMatrix(arr, source=str(path))


def write_stack_sequence(dirpath: str | Path, layers: dict[str, np.ndarray]) -> None:
    """Write per-layer (T, C, H, W) activation tensors under ``dirpath``.

    One file per layer, named ``<layer_id>.ffr``, so a sequence can be
    streamed back frame by frame without loading unrelated layers.
    """
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


def load_stack_sequence(dirpath: str | Path) -> list[FeatureStack]:
    """Read every ``<layer_id>.ffr`` under ``dirpath`` into per-frame stacks.

    Layers are ordered by filename so the result does not depend on
    directory enumeration order.
    """
    dirpath = Path(dirpath)
    files = sorted(dirpath.glob("*.ffr"))
    if not files:
        raise TensorFormatError(f"no .ffr layer files under {dirpath}")
    per_layer = []
    frames = None
    for f in files:
        arr = read_tensor(f)
        if arr.ndim != 4:
            raise ShapeMismatch(f"{f}: expected (T, C, H, W), got {arr.shape}")
        if frames is None:
            frames = arr.shape[0]
        elif arr.shape[0] != frames:
            raise ShapeMismatch(f"{f}: {arr.shape[0]} frames, expected {frames}")
        per_layer.append((f.stem, arr))
    return [
        FeatureStack(t, tuple((layer_id, arr[t]) for layer_id, arr in per_layer))
        for t in range(frames)
    ]
