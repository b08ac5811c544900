"""Perceptual distance between feature stacks.

Given per-frame activation stacks, each layer is channel-normalized to
unit length at every spatial location, squared differences are
weighted per channel, averaged over space, and summed over layers:

    d(a, b) = sum_l (1 / (H_l * W_l)) * sum_{h,w} sum_c w_lc (a_hat - b_hat)^2

Weights default to 1 for every channel; calibrated weights can be
loaded from per-layer tensor files.  Note the distance is a sum over
layers and is not clamped to [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptySequence, ShapeMismatch, UnsupportedForm
from .tensorio import FeatureStack, read_tensor

# Locations with activation norm at or below this are mapped to the
# zero vector instead of being divided by ~0.
_NORM_EPS = 1e-10


@dataclass
class LayerWeights:
    """Per-channel weights keyed by layer id; missing layers mean 1."""

    weights: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        fixed = {}
        for layer_id, w in self.weights.items():
            w = np.asarray(w, dtype=np.float64).reshape(-1)
            if np.any(w < 0):
                raise ShapeMismatch(f"negative weight for layer {layer_id!r}")
            fixed[layer_id] = w
        self.weights = fixed

    def for_layer(self, layer_id: str, channels: int) -> np.ndarray:
        w = self.weights.get(layer_id)
        if w is None:
            return np.ones(channels)
        if w.shape[0] != channels:
            raise ShapeMismatch(
                f"layer {layer_id!r}: {w.shape[0]} weights for {channels} channels"
            )
        return w

    @classmethod
    def from_dir(cls, dirpath: str | Path) -> "LayerWeights":
        """Load every ``<layer_id>.ffr`` weight vector under a directory."""
        dirpath = Path(dirpath)
        weights = {}
        for f in sorted(dirpath.glob("*.ffr")):
            weights[f.stem] = read_tensor(f).reshape(-1)
        return cls(weights)


def normalize_stack(stack: FeatureStack) -> FeatureStack:
    """Scale each spatial location's channel vector to unit length."""
    layers = []
    for layer_id, arr in stack.layers:
        wide = arr.astype(np.float64)
        norm = np.sqrt((wide**2).sum(axis=0, keepdims=True))
        unit = np.divide(wide, norm, out=np.zeros_like(wide), where=norm > _NORM_EPS)
        layers.append((layer_id, unit.astype(np.float32)))
    return FeatureStack(stack.frame_index, tuple(layers))


def lpips_frame(a: FeatureStack, b: FeatureStack, weights: LayerWeights | None = None) -> float:
    """Weighted perceptual distance between two frames."""
    if a.layer_ids != b.layer_ids:
        raise ShapeMismatch(f"layer ids differ: {a.layer_ids} vs {b.layer_ids}")
    if weights is None:
        weights = LayerWeights()
    na = normalize_stack(a)
    nb = normalize_stack(b)
    total = 0.0
    for (layer_id, ua), (_, ub) in zip(na.layers, nb.layers):
        if ua.shape != ub.shape:
            raise ShapeMismatch(
                f"layer {layer_id!r}: shape {ua.shape} vs {ub.shape}"
            )
        c, h, w = ua.shape
        wvec = weights.for_layer(layer_id, c)
        sq = (ua.astype(np.float64) - ub.astype(np.float64)) ** 2
        total += float((wvec[:, None, None] * sq).sum()) / (h * w)
    return total


@dataclass
class FramePairing:
    """How video frames are matched before frame distances are averaged.

    ``index`` resamples the longer sequence to the shorter length by
    rounded linear index spacing and compares position by position.
    ``all_pairs`` compares every frame of one side against every frame
    of the other, with a seeded cap on frames per side to bound cost.
    """

    mode: str = "index"
    max_frames: int = 64
    seed: int = 0


@dataclass
class PairSummary:
    mean: float
    std: float
    count: int


def _resample_indices(length: int, target: int) -> np.ndarray:
    return np.round(np.linspace(0, length - 1, target)).astype(int)


def lpips_video(
    a: list[FeatureStack],
    b: list[FeatureStack],
    weights: LayerWeights | None = None,
    pairing: FramePairing | None = None,
) -> PairSummary:
    """Aggregate frame distances over two stack sequences.

    Returns mean, population std, and the number of frame pairs that
    entered the average.
    """
    if pairing is None:
        pairing = FramePairing()
    if not a or not b:
        raise EmptySequence("both sequences need at least one frame")
    if pairing.mode == "index":
        target = min(len(a), len(b))
        ia = _resample_indices(len(a), target)
        ib = _resample_indices(len(b), target)
        scores = [
            lpips_frame(a[i], b[j], weights) for i, j in zip(ia, ib)
        ]
    elif pairing.mode == "all_pairs":
        rng = np.random.default_rng(pairing.seed)
        sel_a = list(range(len(a)))
        sel_b = list(range(len(b)))
        if len(sel_a) > pairing.max_frames:
            sel_a = sorted(rng.choice(len(a), size=pairing.max_frames, replace=False))
        if len(sel_b) > pairing.max_frames:
            sel_b = sorted(rng.choice(len(b), size=pairing.max_frames, replace=False))
        scores = [
            lpips_frame(a[i], b[j], weights) for i in sel_a for j in sel_b
        ]
    else:
        raise UnsupportedForm(f"unknown pairing mode {pairing.mode!r}")
    arr = np.asarray(scores)
    return PairSummary(mean=float(arr.mean()), std=float(arr.std()), count=len(scores))
