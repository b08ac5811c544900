"""Unpaired occlusion-removal training and inference.

Two resnet generators learn opposite translations between the normal
and the sensor-occluded frame domains, each judged by a patch
discriminator on its target domain.  The objective is the usual
three-part composition: least-squares adversarial terms, cycle
reconstructions weighted by ``lambda_cycle``, and identity terms
weighted by ``lambda_identity * lambda_cycle``.  The loss weights and
optimizer are reference defaults, not values from the study protocol,
and are recorded in the training log.

Training keeps the study protocol's schedule at any scale: a fixed
epoch count with the learning rate decaying linearly to zero after the
decay epoch, a random 2% frame budget per domain, and a 90/10
train/validation split.  The toy preset runs 64 px frames through
slim nets; ``TrainConfig.full_scale()`` restores the 286-load /
256-crop geometry with nine resnet blocks.

Domains are never index-paired: each side is pooled, subsampled and
shuffled independently, so nothing in here can exploit frame
correspondence even when the caller happens to have aligned takes.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from .data import sample_indices, train_val_split
from .errors import BridgeError, DecodeFailure, DivergenceDetected, ShapeMismatch

_INIT_SD = 0.02
_TRANSLATE_BATCH = 16

LOSS_KEYS = (
    "adv_s2n", "adv_n2s", "cycle_n", "cycle_s", "idt_n", "idt_s",
    "d_n", "d_s", "g_total", "d_total",
)


@dataclass(frozen=True)
class TrainConfig:
    """Knobs for one training run; defaults are the toy preset."""

    image_size: int = 64
    load_size: int = 72
    base_channels: int = 16
    disc_channels: int = 16
    resnet_blocks: int = 3
    epochs: int = 30
    decay_start: int = 15
    lr: float = 3e-4
    beta1: float = 0.5
    batch_size: int = 1
    lambda_cycle: float = 10.0
    lambda_identity: float = 0.5
    sample_fraction: float = 0.02
    val_fraction: float = 0.1
    sampler: str = "random"
    seed: int = 0

    @classmethod
    def full_scale(cls, **overrides) -> "TrainConfig":
        """The study-scale geometry: 286 load, 256 crop, nine blocks."""
        base = dict(
            image_size=256, load_size=286,
            base_channels=64, disc_channels=64, resnet_blocks=9,
        )
        base.update(overrides)
        return cls(**base)


def lr_factor(epoch: int, config: TrainConfig) -> float:
    """Learning-rate multiplier: flat, then linear to zero.

    Continuous at the junction: the factor is exactly 1 at the decay
    epoch and would reach 0 one epoch past the last.
    """
    if epoch < config.decay_start:
        return 1.0
    span = config.epochs - config.decay_start
    return max(0.0, (config.epochs - epoch) / span)


class _ResnetBlock(nn.Module):
    def __init__(self, channels: int) -> None:
        super().__init__()
        self.body = nn.Sequential(
            nn.ReflectionPad2d(1),
            nn.Conv2d(channels, channels, 3),
            nn.InstanceNorm2d(channels),
            nn.ReLU(inplace=True),
            nn.ReflectionPad2d(1),
            nn.Conv2d(channels, channels, 3),
            nn.InstanceNorm2d(channels),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x + self.body(x)


def build_generator(config: TrainConfig) -> nn.Module:
    """Resnet generator: stem, two downsamplers, blocks, mirror upsamplers."""
    ngf = config.base_channels
    layers: list[nn.Module] = [
        nn.ReflectionPad2d(3),
        nn.Conv2d(1, ngf, 7),
        nn.InstanceNorm2d(ngf),
        nn.ReLU(inplace=True),
    ]
    ch = ngf
    for _ in range(2):
        layers += [
            nn.Conv2d(ch, ch * 2, 3, stride=2, padding=1),
            nn.InstanceNorm2d(ch * 2),
            nn.ReLU(inplace=True),
        ]
        ch *= 2
    layers += [_ResnetBlock(ch) for _ in range(config.resnet_blocks)]
    for _ in range(2):
        layers += [
            nn.ConvTranspose2d(ch, ch // 2, 3, stride=2, padding=1, output_padding=1),
            nn.InstanceNorm2d(ch // 2),
            nn.ReLU(inplace=True),
        ]
        ch //= 2
    layers += [nn.ReflectionPad2d(3), nn.Conv2d(ch, 1, 7), nn.Tanh()]
    return nn.Sequential(*layers)


def build_discriminator(config: TrainConfig) -> nn.Module:
    """Patch discriminator: real/fake score per receptive-field patch."""
    ndf = config.disc_channels
    return nn.Sequential(
        nn.Conv2d(1, ndf, 4, stride=2, padding=1),
        nn.LeakyReLU(0.2, inplace=True),
        nn.Conv2d(ndf, ndf * 2, 4, stride=2, padding=1),
        nn.InstanceNorm2d(ndf * 2),
        nn.LeakyReLU(0.2, inplace=True),
        nn.Conv2d(ndf * 2, ndf * 4, 4, stride=1, padding=1),
        nn.InstanceNorm2d(ndf * 4),
        nn.LeakyReLU(0.2, inplace=True),
        nn.Conv2d(ndf * 4, 1, 4, stride=1, padding=1),
    )


def _seed_weights(net: nn.Module, rng: np.random.Generator) -> None:
    # Numpy-seeded init keeps runs identical across torch releases.
    with torch.no_grad():
        for module in net.modules():
            if isinstance(module, (nn.Conv2d, nn.ConvTranspose2d)):
                drawn = rng.normal(0.0, _INIT_SD, size=tuple(module.weight.shape))
                module.weight.copy_(torch.from_numpy(drawn.astype(np.float32)))
                if module.bias is not None:
                    module.bias.zero_()


@dataclass
class TranslationModelPair:
    """Both generators and both discriminators plus their config."""

    g_s2n: nn.Module
    g_n2s: nn.Module
    d_n: nn.Module
    d_s: nn.Module
    config: TrainConfig

    def eval(self) -> "TranslationModelPair":
        for net in (self.g_s2n, self.g_n2s, self.d_n, self.d_s):
            net.eval()
        return self


def build_model_pair(config: TrainConfig) -> TranslationModelPair:
    """Fresh, deterministically initialized model pair."""
    rng = np.random.default_rng(config.seed)
    pair = TranslationModelPair(
        g_s2n=build_generator(config),
        g_n2s=build_generator(config),
        d_n=build_discriminator(config),
        d_s=build_discriminator(config),
        config=config,
    )
    for net in (pair.g_s2n, pair.g_n2s, pair.d_n, pair.d_s):
        _seed_weights(net, rng)
    return pair


def _to_unit_tensor(frames: np.ndarray, name: str) -> torch.Tensor:
    frames = np.asarray(frames, dtype=np.float32)
    if frames.ndim != 3:
        raise ShapeMismatch(f"{name} frames must be (N, H, W), got {frames.shape}")
    if frames.shape[0] < 1:
        raise ShapeMismatch(f"{name} frame set is empty")
    if not np.all(np.isfinite(frames)):
        raise BridgeError(f"{name} frames contain non-finite values")
    return torch.from_numpy(frames).unsqueeze(1)


def _augment(
    batch: torch.Tensor, config: TrainConfig, rng: np.random.Generator
) -> torch.Tensor:
    """Resize up, random-crop back down, random horizontal flip."""
    up = F.interpolate(
        batch, size=(config.load_size, config.load_size),
        mode="bilinear", align_corners=False,
    )
    span = config.load_size - config.image_size
    out = torch.empty(
        (batch.shape[0], 1, config.image_size, config.image_size),
        dtype=batch.dtype,
    )
    for i in range(batch.shape[0]):
        top = int(rng.integers(0, span + 1))
        left = int(rng.integers(0, span + 1))
        crop = up[
            i, :, top : top + config.image_size, left : left + config.image_size
        ]
        if rng.random() < 0.5:
            crop = torch.flip(crop, dims=(2,))
        out[i] = crop
    return out * 2.0 - 1.0


def _resize_plain(batch: torch.Tensor, config: TrainConfig) -> torch.Tensor:
    out = F.interpolate(
        batch, size=(config.image_size, config.image_size),
        mode="bilinear", align_corners=False,
    )
    return out * 2.0 - 1.0


def _epoch_order(
    count: int, steps: int, batch: int, rng: np.random.Generator
) -> np.ndarray:
    reps = math.ceil(steps * batch / count)
    order = np.concatenate([rng.permutation(count) for _ in range(reps)])
    return order[: steps * batch].reshape(steps, batch)


def train_removal_model(
    normal_frames: np.ndarray,
    sensor_frames: np.ndarray,
    config: TrainConfig | None = None,
    log_path: str | Path | None = None,
) -> tuple[TranslationModelPair, list[dict]]:
    """Train both translations from pooled, unpaired frame sets.

    The pools are what is available; the configured sample fraction is
    applied per domain in here, followed by the train/validation
    split.  Returns the trained pair and the per-epoch loss log; the
    log is also appended line by line to ``log_path`` when given.
    """
    config = config if config is not None else TrainConfig()
    all_n = _to_unit_tensor(normal_frames, "normal")
    all_s = _to_unit_tensor(sensor_frames, "sensor")

    seeds = np.random.default_rng(config.seed).integers(2**63, size=5)
    picked_n = sample_indices(
        all_n.shape[0], config.sample_fraction, config.sampler, int(seeds[0])
    )
    picked_s = sample_indices(
        all_s.shape[0], config.sample_fraction, config.sampler, int(seeds[1])
    )
    train_n, val_n = train_val_split(len(picked_n), config.val_fraction, int(seeds[2]))
    train_s, val_s = train_val_split(len(picked_s), config.val_fraction, int(seeds[3]))
    pool_n, pool_val_n = all_n[picked_n[train_n]], all_n[picked_n[val_n]]
    pool_s, pool_val_s = all_s[picked_s[train_s]], all_s[picked_s[val_s]]

    pair = build_model_pair(config)
    for net in (pair.g_s2n, pair.g_n2s, pair.d_n, pair.d_s):
        net.train()
    opt_g = torch.optim.Adam(
        list(pair.g_s2n.parameters()) + list(pair.g_n2s.parameters()),
        lr=config.lr, betas=(config.beta1, 0.999),
    )
    opt_d = torch.optim.Adam(
        list(pair.d_n.parameters()) + list(pair.d_s.parameters()),
        lr=config.lr, betas=(config.beta1, 0.999),
    )
    mse = nn.MSELoss()
    l1 = nn.L1Loss()
    rng = np.random.default_rng(int(seeds[4]))
    lam_cyc = config.lambda_cycle
    lam_idt = config.lambda_identity * config.lambda_cycle

    log: list[dict] = []
    log_path = Path(log_path) if log_path is not None else None
    if log_path is not None:
        log_path.write_text("")

    steps = math.ceil(max(pool_n.shape[0], pool_s.shape[0]) / config.batch_size)
    for epoch in range(config.epochs):
        lr_now = config.lr * lr_factor(epoch, config)
        for group in opt_g.param_groups + opt_d.param_groups:
            group["lr"] = lr_now
        order_n = _epoch_order(pool_n.shape[0], steps, config.batch_size, rng)
        order_s = _epoch_order(pool_s.shape[0], steps, config.batch_size, rng)
        sums = dict.fromkeys(LOSS_KEYS, 0.0)
        for step in range(steps):
            real_n = _augment(pool_n[order_n[step]], config, rng)
            real_s = _augment(pool_s[order_s[step]], config, rng)

            fake_n = pair.g_s2n(real_s)
            fake_s = pair.g_n2s(real_n)
            pred_fn = pair.d_n(fake_n)
            pred_fs = pair.d_s(fake_s)
            adv_s2n = mse(pred_fn, torch.ones_like(pred_fn))
            adv_n2s = mse(pred_fs, torch.ones_like(pred_fs))
            cycle_n = l1(pair.g_s2n(fake_s), real_n)
            cycle_s = l1(pair.g_n2s(fake_n), real_s)
            idt_n = l1(pair.g_s2n(real_n), real_n)
            idt_s = l1(pair.g_n2s(real_s), real_s)
            loss_g = (
                adv_s2n + adv_n2s
                + lam_cyc * (cycle_n + cycle_s)
                + lam_idt * (idt_n + idt_s)
            )
            opt_g.zero_grad()
            loss_g.backward()
            opt_g.step()

            pred_rn = pair.d_n(real_n)
            pred_fn = pair.d_n(fake_n.detach())
            pred_rs = pair.d_s(real_s)
            pred_fs = pair.d_s(fake_s.detach())
            loss_d_n = 0.5 * (
                mse(pred_rn, torch.ones_like(pred_rn))
                + mse(pred_fn, torch.zeros_like(pred_fn))
            )
            loss_d_s = 0.5 * (
                mse(pred_rs, torch.ones_like(pred_rs))
                + mse(pred_fs, torch.zeros_like(pred_fs))
            )
            loss_d = loss_d_n + loss_d_s
            opt_d.zero_grad()
            loss_d.backward()
            opt_d.step()

            batch_vals = {
                "adv_s2n": adv_s2n, "adv_n2s": adv_n2s,
                "cycle_n": cycle_n, "cycle_s": cycle_s,
                "idt_n": idt_n, "idt_s": idt_s,
                "d_n": loss_d_n, "d_s": loss_d_s,
                "g_total": loss_g, "d_total": loss_d,
            }
            for key, val in batch_vals.items():
                scalar = float(val.detach())
                if not math.isfinite(scalar):
                    raise DivergenceDetected(
                        f"loss {key} is {scalar} at epoch {epoch} step {step}"
                    )
                sums[key] += scalar

        record = {"epoch": epoch, "lr": lr_now, "steps": steps}
        record.update({key: sums[key] / steps for key in LOSS_KEYS})
        record["val_cycle_n"] = _val_cycle(pair.g_n2s, pair.g_s2n, pool_val_n, config)
        record["val_cycle_s"] = _val_cycle(pair.g_s2n, pair.g_n2s, pool_val_s, config)
        log.append(record)
        if log_path is not None:
            with log_path.open("a") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
    return pair.eval(), log


def _val_cycle(
    there: nn.Module, back: nn.Module, frames: torch.Tensor, config: TrainConfig
) -> float | None:
    """Round-trip reconstruction error on held-back frames."""
    if frames.shape[0] == 0:
        return None
    with torch.no_grad():
        x = _resize_plain(frames, config)
        rec = back(there(x))
        return float(torch.mean(torch.abs(rec - x)))


def translate_video(
    pair: TranslationModelPair, frames: np.ndarray, direction: str = "s2n"
) -> np.ndarray:
    """Map (T, H, W) frames through one generator, deterministically.

    Frames must match the configured image size; output is float32 in
    the unit range with the frame count preserved.
    """
    if direction not in ("s2n", "n2s"):
        raise BridgeError(f"unknown direction {direction!r}")
    tensor = _to_unit_tensor(frames, "input")
    size = pair.config.image_size
    if tensor.shape[2] != size or tensor.shape[3] != size:
        raise ShapeMismatch(
            f"frames are {tensor.shape[2]}x{tensor.shape[3]}, model wants {size}x{size}"
        )
    generator = pair.g_s2n if direction == "s2n" else pair.g_n2s
    generator.eval()
    outputs = []
    with torch.no_grad():
        for start in range(0, tensor.shape[0], _TRANSLATE_BATCH):
            batch = tensor[start : start + _TRANSLATE_BATCH] * 2.0 - 1.0
            out = generator(batch)
            outputs.append(((out + 1.0) * 0.5).squeeze(1).numpy())
    return np.clip(np.concatenate(outputs, axis=0), 0.0, 1.0).astype(np.float32)


def save_model(pair: TranslationModelPair, dirpath: str | Path) -> None:
    """Write the four networks and the config under ``dirpath``."""
    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)
    nets = {
        "g_s2n": pair.g_s2n, "g_n2s": pair.g_n2s,
        "d_n": pair.d_n, "d_s": pair.d_s,
    }
    for name, net in nets.items():
        torch.save(net.state_dict(), dirpath / f"{name}.pt")
    config_blob = json.dumps(dataclasses.asdict(pair.config), indent=2, sort_keys=True)
    (dirpath / "config.json").write_text(config_blob + "\n")


def load_model(dirpath: str | Path) -> TranslationModelPair:
    """Rebuild a saved model pair in eval mode."""
    dirpath = Path(dirpath)
    try:
        raw = json.loads((dirpath / "config.json").read_text())
        config = TrainConfig(**raw)
    except (OSError, ValueError, TypeError) as exc:
        raise DecodeFailure(f"{dirpath}: cannot load model config: {exc}") from exc
    pair = build_model_pair(config)
    nets = {
        "g_s2n": pair.g_s2n, "g_n2s": pair.g_n2s,
        "d_n": pair.d_n, "d_s": pair.d_s,
    }
    for name, net in nets.items():
        try:
            state = torch.load(dirpath / f"{name}.pt", weights_only=True)
            net.load_state_dict(state)
        except (OSError, RuntimeError) as exc:
            raise DecodeFailure(f"{dirpath}: cannot load {name}: {exc}") from exc
    return pair.eval()
