"""Embedding backbones for frame tensors.

Two backbones share one contract: given (T, H, W) grayscale frames in
the unit range they return one 2048-wide row per frame plus a small
dict of named intermediate activation stacks.  The ``toy`` backbone is
an untrained convnet whose weights come from a fixed numpy seed, so
its outputs are reproducible across machines and torch versions; the
``inception_v3`` backbone wraps the standard pretrained network when
torchvision and its weights are reachable and raises
BackboneUnavailable when they are not.

The 2048 width is pinned by the standard backbone's pooling layer;
the toy net keeps the same width so downstream files are
interchangeable.
"""

from __future__ import annotations

import math

import numpy as np
import torch
from torch import nn

from .errors import BackboneUnavailable, BridgeError, ShapeMismatch

WIDTH = 2048
STACK_LAYERS = ("c1", "c2")

_TOY_SEED = 400837
_BATCH = 64


def _seeded_conv(rng: np.random.Generator, conv: nn.Conv2d) -> nn.Conv2d:
    fan_in = conv.in_channels * conv.kernel_size[0] * conv.kernel_size[1]
    scale = math.sqrt(2.0 / fan_in)
    weights = rng.normal(0.0, scale, size=tuple(conv.weight.shape))
    with torch.no_grad():
        conv.weight.copy_(torch.from_numpy(weights.astype(np.float32)))
        conv.bias.zero_()
    return conv


class ToyBackbone(nn.Module):
    """Three strided conv stages and a wide pooled head.

    The two early stages double as the exported activation stacks
    (``c1`` at half resolution, ``c2`` at quarter resolution); the
    head projects to the standard 2048 embedding width and averages
    over space.
    """

    def __init__(self) -> None:
        super().__init__()
        rng = np.random.default_rng(_TOY_SEED)
        self.conv1 = _seeded_conv(rng, nn.Conv2d(1, 16, 3, stride=2, padding=1))
        self.conv2 = _seeded_conv(rng, nn.Conv2d(16, 32, 3, stride=2, padding=1))
        self.conv3 = _seeded_conv(rng, nn.Conv2d(32, 64, 3, stride=2, padding=1))
        self.head = _seeded_conv(rng, nn.Conv2d(64, WIDTH, 1))
        self.eval()

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, dict[str, torch.Tensor]]:
        a1 = torch.relu(self.conv1(x))
        a2 = torch.relu(self.conv2(a1))
        a3 = torch.relu(self.conv3(a2))
        pooled = torch.relu(self.head(a3)).mean(dim=(2, 3))
        return pooled, {"c1": a1, "c2": a2}


class InceptionBackbone(nn.Module):
    """Pretrained Inception v3 behind the same two-output interface."""

    def __init__(self, model, transforms) -> None:
        super().__init__()
        self.model = model
        self.transforms = transforms
        self._grabbed: dict[str, torch.Tensor] = {}
        model.Conv2d_2b_3x3.register_forward_hook(self._grab("c1"))
        model.Conv2d_4a_3x3.register_forward_hook(self._grab("c2"))
        model.avgpool.register_forward_hook(self._grab("pool"))
        self.eval()

    def _grab(self, name: str):
        def hook(_module, _inputs, output):
            self._grabbed[name] = output

        return hook

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, dict[str, torch.Tensor]]:
        rgb = self.transforms(x.expand(-1, 3, -1, -1))
        self._grabbed.clear()
        self.model(rgb)
        pooled = self._grabbed["pool"].flatten(1)
        return pooled, {"c1": self._grabbed["c1"], "c2": self._grabbed["c2"]}


def load_backbone(name: str = "toy") -> nn.Module:
    """Construct a backbone by name; unknown or unloadable names raise."""
    if name == "toy":
        return ToyBackbone()
    if name == "inception_v3":
        try:
            from torchvision.models import Inception_V3_Weights, inception_v3

            weights = Inception_V3_Weights.IMAGENET1K_V1
            model = inception_v3(weights=weights)
        except Exception as exc:
            raise BackboneUnavailable(f"inception_v3: {exc}") from exc
        return InceptionBackbone(model, weights.transforms())
    raise BackboneUnavailable(f"unknown backbone {name!r}")


def _frame_batches(frames: np.ndarray):
    if frames.ndim != 3:
        raise ShapeMismatch(f"expected (T, H, W) frames, got {frames.shape}")
    if not np.all(np.isfinite(frames)):
        raise BridgeError("frames contain non-finite values")
    for start in range(0, frames.shape[0], _BATCH):
        chunk = frames[start : start + _BATCH].astype(np.float32, copy=False)
        yield torch.from_numpy(chunk).unsqueeze(1)


def embed_frames(backbone: nn.Module, frames: np.ndarray) -> np.ndarray:
    """One 2048-wide embedding row per frame."""
    rows = []
    with torch.no_grad():
        for batch in _frame_batches(frames):
            pooled, _ = backbone(batch)
            rows.append(pooled.numpy())
    return np.concatenate(rows, axis=0).astype(np.float32)


def featurize_frames(backbone: nn.Module, frames: np.ndarray) -> dict[str, np.ndarray]:
    """Named per-frame activation stacks, each (T, C, H, W)."""
    chunks: dict[str, list[np.ndarray]] = {}
    with torch.no_grad():
        for batch in _frame_batches(frames):
            _, stacks = backbone(batch)
            for layer_id, act in stacks.items():
                chunks.setdefault(layer_id, []).append(act.numpy())
    return {
        layer_id: np.concatenate(parts, axis=0).astype(np.float32)
        for layer_id, parts in chunks.items()
    }


def layer_weights(backbone: nn.Module, size: int = 64) -> dict[str, np.ndarray]:
    """Per-channel weights that equalize activation scale across channels.

    A fixed noise-and-ramp probe batch is pushed through the backbone
    and each channel is weighted by the inverse of its activation
    spread, normalized to mean one.  This is the calibration exported
    for consumers that support weighted perceptual distances; without
    it they fall back to all-ones.
    """
    rng = np.random.default_rng(_TOY_SEED + 1)
    ramp = np.linspace(0.0, 1.0, size)
    probe = np.clip(
        rng.uniform(0.0, 1.0, (16, size, size)) * 0.5
        + 0.25 * ramp[None, None, :]
        + 0.25 * ramp[None, :, None],
        0.0,
        1.0,
    )
    stacks = featurize_frames(backbone, probe.astype(np.float32))
    weights = {}
    for layer_id, act in stacks.items():
        spread = act.std(axis=(0, 2, 3)) + 1e-6
        w = 1.0 / spread
        weights[layer_id] = (w / w.mean()).astype(np.float32)
    return weights
