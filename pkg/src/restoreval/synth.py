"""Synthetic data with known ground truth.

Three families of generators back the test suite and the demo
pipeline:

* Gaussian embedding sets with diagonal (optionally co-rotated)
  covariances, whose pairwise distance has a closed form.
* Time series that are exact shifted-plus-noise copies of a base
  signal, for shift-recovery checks.
* A miniature capture session: procedurally rendered faces driven by
  a two-channel expression trace (brow raise, smile), an occlusion
  template of round sensor patches and cables, and the derived
  artifacts (embeddings, feature stacks, action-unit and emotion
  series) laid out under a manifest.

Within a session, each sensor take and its clean counterpart share
the same underlying frames; the clean take simply omits the occlusion
overlay.  That makes the clean condition a perfect restoration, so
every metric should rank it closer to the unobstructed baseline than
the occluded take.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .catalog import (
    KIND_AU,
    KIND_EMBED,
    KIND_EMOTION,
    KIND_FRAMES,
    KIND_STACKS,
    SESSIONS,
    TASKS,
    write_manifest,
)
from .errors import UnsupportedForm
from .seeding import stable_seed
from .series import TimeSeries, write_series_csv
from .tensorio import FeatureMatrix, write_stack_sequence, write_tensor

# ---------------------------------------------------------------------------
# Gaussian benchmark sets


@dataclass
class GaussianSpec:
    """Diagonal-covariance Gaussian, optionally rotated into a basis.

    Rotating mean and covariance by the same orthogonal matrix leaves
    the distance between two specs unchanged, so the closed form below
    stays valid for rotated pairs while the estimators see dense
    covariances.
    """

    mean: np.ndarray
    variances: np.ndarray
    seed: int = 0
    rotation: np.ndarray | None = None

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64).reshape(-1)
        self.variances = np.asarray(self.variances, dtype=np.float64).reshape(-1)
        if self.variances.shape != self.mean.shape:
            raise UnsupportedForm("mean and variances must have the same length")
        if np.any(self.variances < 0):
            raise UnsupportedForm("variances must be non-negative")


def sample_gaussian_features(spec: GaussianSpec, n: int) -> FeatureMatrix:
    """Draw n samples from the spec as a feature matrix."""
    rng = np.random.default_rng(spec.seed)
    x = rng.standard_normal((n, spec.mean.shape[0]))
    x = x * np.sqrt(spec.variances) + spec.mean
    if spec.rotation is not None:
        x = x @ np.asarray(spec.rotation).T
    return FeatureMatrix(x.astype(np.float32))


def analytic_frechet(a: GaussianSpec, b: GaussianSpec) -> float:
    """Closed-form squared distance between two diagonal specs.

    For diagonal covariances the trace term reduces elementwise:
    ||mu_a - mu_b||^2 + sum (sqrt(va) - sqrt(vb))^2.  Both specs must
    share the same rotation (or none) for the form to apply.
    """
    same_rotation = (
        (a.rotation is None and b.rotation is None)
        or (
            a.rotation is not None
            and b.rotation is not None
            and np.array_equal(a.rotation, b.rotation)
        )
    )
    if not same_rotation:
        raise UnsupportedForm("closed form requires a shared rotation")
    if a.mean.shape != b.mean.shape:
        raise UnsupportedForm("specs must share dimension")
    dmean = a.mean - b.mean
    dvar = np.sqrt(a.variances) - np.sqrt(b.variances)
    return float(dmean @ dmean + dvar @ dvar)


def random_rotation(dim: int, seed: int) -> np.ndarray:
    """Haar-ish orthogonal matrix from a QR factorization."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


# ---------------------------------------------------------------------------
# Shifted series


def make_shifted_series(
    base: np.ndarray,
    shift: int,
    noise_sd: float,
    seed: int,
    fps: float = 30.0,
    channel: str = "signal",
) -> tuple[TimeSeries, TimeSeries]:
    """Reference series plus a copy delayed by ``shift`` frames.

    The copy is a circular roll, so at the true shift the overlapping
    spans match exactly up to the added noise.  The ground truth is
    recorded in the metadata of the shifted series.
    """
    base = np.asarray(base, dtype=np.float64).reshape(-1)
    rng = np.random.default_rng(seed)
    moved = np.roll(base, shift) + rng.normal(0.0, noise_sd, base.shape)
    ref = TimeSeries(fps=fps, channel_names=(channel,), values=base[:, None])
    other = TimeSeries(
        fps=fps,
        channel_names=(channel,),
        values=moved[:, None],
        meta={"true_shift": shift, "noise_sd": noise_sd},
    )
    return ref, other


def _smooth(x: np.ndarray, width: int) -> np.ndarray:
    """Hanning smoothing that degrades gracefully on short signals."""
    width = min(width, len(x))
    if width % 2 == 0:
        width -= 1
    if width < 3:
        return x
    kernel = np.hanning(width)
    return np.convolve(x, kernel / kernel.sum(), mode="same")


def smooth_random_signal(frames: int, fps: float, seed: int) -> np.ndarray:
    """Band-limited positive signal for alignment experiments."""
    rng = np.random.default_rng(seed)
    t = np.arange(frames) / fps
    f1 = rng.uniform(0.3, 0.7)
    f2 = rng.uniform(0.9, 1.6)
    sig = (
        0.55
        + 0.25 * np.sin(2 * math.pi * f1 * t + rng.uniform(0, 2 * math.pi))
        + 0.15 * np.sin(2 * math.pi * f2 * t + rng.uniform(0, 2 * math.pi))
    )
    rough = _smooth(rng.normal(0.0, 1.0, frames), int(fps) | 1)
    return sig + 0.05 * rough


# ---------------------------------------------------------------------------
# Occlusion template

_PATCH_COUNT = 62
_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class Patch:
    cx: float
    cy: float
    radius: float
    gray: float


@dataclass(frozen=True)
class Cable:
    x_top: float
    y_top: float
    x_bottom: float
    half_width: float
    gray: float


@dataclass(frozen=True)
class OcclusionTemplate:
    patches: tuple[Patch, ...]
    cables: tuple[Cable, ...]


def canonical_template(seed: int = 104729) -> OcclusionTemplate:
    """Standard sensor layout: patches on a sunflower spiral plus
    cables running from a subset of patches off the chin.

    Coordinates are normalized image coordinates in [0, 1].
    """
    rng = np.random.default_rng(seed)
    patches = []
    for k in range(_PATCH_COUNT):
        r = math.sqrt((k + 0.5) / _PATCH_COUNT)
        theta = k * _GOLDEN_ANGLE
        cx = 0.5 + 0.33 * r * math.cos(theta) + rng.normal(0, 0.008)
        cy = 0.52 + 0.38 * r * math.sin(theta) + rng.normal(0, 0.008)
        radius = 0.030 + rng.uniform(0.0, 0.010)
        gray = 0.10 + rng.uniform(0.0, 0.10)
        patches.append(Patch(cx, cy, radius, gray))
    patches.sort(key=lambda p: (p.cy, p.cx))
    cables = []
    for idx in range(0, _PATCH_COUNT, 9):
        p = patches[idx]
        cables.append(
            Cable(
                x_top=p.cx,
                y_top=p.cy,
                x_bottom=min(max(p.cx + rng.normal(0, 0.05), 0.1), 0.9),
                half_width=0.006 + rng.uniform(0.0, 0.003),
                gray=0.18,
            )
        )
    return OcclusionTemplate(patches=tuple(patches), cables=tuple(cables))


def template_mask(template: OcclusionTemplate, size: int) -> np.ndarray:
    """Boolean (size, size) mask of pixels covered by the template."""
    centers = (np.arange(size) + 0.5) / size
    uu, vv = np.meshgrid(centers, centers)  # uu = x, vv = y
    mask = np.zeros((size, size), dtype=bool)
    for p in template.patches:
        mask |= (uu - p.cx) ** 2 + (vv - p.cy) ** 2 <= p.radius**2
    for c in template.cables:
        # Straight run from the patch down to the bottom edge.
        denom = max(1.0 - c.y_top, 1e-9)
        frac = np.clip((vv - c.y_top) / denom, 0.0, 1.0)
        x_line = c.x_top + (c.x_bottom - c.x_top) * frac
        mask |= (np.abs(uu - x_line) <= c.half_width) & (vv >= c.y_top)
    return mask


def face_region(size: int) -> np.ndarray:
    """Boolean mask of the nominal head ellipse."""
    centers = (np.arange(size) + 0.5) / size
    uu, vv = np.meshgrid(centers, centers)
    return ((uu - 0.5) / 0.38) ** 2 + ((vv - 0.52) / 0.44) ** 2 <= 1.0


def template_coverage(template: OcclusionTemplate, size: int = 256) -> float:
    """Fraction of the face ellipse hidden by the template."""
    mask = template_mask(template, size)
    face = face_region(size)
    return float((mask & face).sum() / face.sum())


# ---------------------------------------------------------------------------
# Face rendering

TRACE_CHANNELS = ("brow", "smile")


def expression_trace(task: str, frames: int, fps: float, seed: int) -> TimeSeries:
    """Scripted two-channel expression schedule with per-take jitter.

    All takes of a task follow the same schedule; the seed adds a
    small temporal offset and amplitude noise so repeated takes look
    like repeated human performances rather than copies.
    """
    if task not in TASKS:
        raise UnsupportedForm(f"unknown task {task!r}")
    rng = np.random.default_rng(seed)
    t = np.arange(frames) / fps
    if task == "schaede":
        brow = 0.5 + 0.42 * np.sin(2 * math.pi * 0.23 * t)
        smile = 0.5 + 0.42 * np.sin(2 * math.pi * 0.31 * t + 1.1)
    elif task == "sentence":
        burst = _smooth(0.5 + 0.5 * np.sign(np.sin(2 * math.pi * 0.11 * t + 0.4)), 9)
        smile = 0.18 + 0.62 * np.abs(np.sin(2 * math.pi * 1.3 * t)) * burst
        brow = 0.35 + 0.12 * np.sin(2 * math.pi * 0.09 * t)
    else:  # emotion: hold one display per segment, eight segments
        targets = np.array(
            [
                [0.15, 0.10],
                [0.80, 0.20],
                [0.50, 0.90],
                [0.90, 0.85],
                [0.20, 0.60],
                [0.70, 0.50],
                [0.35, 0.25],
                [0.55, 0.55],
            ]
        )
        seg = np.minimum((np.arange(frames) * 8) // max(frames, 1), 7)
        brow = _smooth(targets[seg, 0].astype(np.float64), 11)
        smile = _smooth(targets[seg, 1].astype(np.float64), 11)
    offset = int(rng.integers(-12, 13))
    brow = np.roll(brow, offset)
    smile = np.roll(smile, offset)
    gain = rng.uniform(0.92, 1.08)
    brow = np.clip(0.5 + (brow - 0.5) * gain + rng.normal(0, 0.02, frames), 0.0, 1.0)
    smile = np.clip(0.5 + (smile - 0.5) * gain + rng.normal(0, 0.02, frames), 0.0, 1.0)
    return TimeSeries(
        fps=fps,
        channel_names=TRACE_CHANNELS,
        values=np.stack([brow, smile], axis=1),
        meta={"task": task, "offset": offset},
    )


@dataclass
class SubjectLook:
    """Per-subject rendering parameters."""

    skin: float
    face_scale: float
    face_dy: float
    eye_dx: float

    @classmethod
    def from_seed(cls, seed: int) -> "SubjectLook":
        rng = np.random.default_rng(seed)
        return cls(
            skin=float(rng.uniform(0.66, 0.78)),
            face_scale=float(rng.uniform(0.96, 1.04)),
            face_dy=float(rng.uniform(-0.015, 0.015)),
            eye_dx=float(rng.uniform(0.13, 0.16)),
        )


def render_face_sequence(
    look: SubjectLook,
    trace: TimeSeries,
    size: int = 64,
    noise_sd: float = 0.01,
    seed: int = 0,
) -> np.ndarray:
    """Draw (T, size, size) grayscale frames for an expression trace.

    The brow channel moves both eyebrow bars vertically; the smile
    channel bends the mouth parabola.  A little per-frame camera noise
    keeps frames from being bitwise equal.
    """
    rng = np.random.default_rng(seed)
    centers = (np.arange(size) + 0.5) / size
    uu, vv = np.meshgrid(centers, centers)
    ax = 0.38 * look.face_scale
    ay = 0.44 * look.face_scale
    cy = 0.52 + look.face_dy
    head = ((uu - 0.5) / ax) ** 2 + ((vv - cy) / ay) ** 2 <= 1.0
    shade = 1.0 - 0.08 * (vv - 0.3)
    base = np.where(head, look.skin * shade, 0.08)
    eye_l = ((uu - (0.5 - look.eye_dx)) / 0.055) ** 2 + ((vv - 0.44) / 0.030) ** 2 <= 1.0
    eye_r = ((uu - (0.5 + look.eye_dx)) / 0.055) ** 2 + ((vv - 0.44) / 0.030) ** 2 <= 1.0
    base = np.where(eye_l | eye_r, 0.15, base)

    brow = trace.channel("brow")
    smile = trace.channel("smile")
    frames = np.empty((trace.frame_count, size, size), dtype=np.float64)
    mouth_span = 0.14
    for i in range(trace.frame_count):
        img = base.copy()
        brow_y = 0.375 - 0.05 * brow[i]
        for sign in (-1.0, 1.0):
            bx = 0.5 + sign * look.eye_dx
            bar = (np.abs(uu - bx) <= 0.085) & (np.abs(vv - brow_y) <= 0.016)
            img = np.where(bar & head, 0.25, img)
        xi = (uu - 0.5) / mouth_span
        curve = 0.70 - 0.12 * (smile[i] - 0.5) * (1.0 - xi**2)
        mouth = (np.abs(xi) <= 1.0) & (np.abs(vv - curve) <= 0.018)
        img = np.where(mouth & head, 0.20, img)
        frames[i] = img
    frames += rng.normal(0.0, noise_sd, frames.shape)
    return np.clip(frames, 0.0, 1.0)


def apply_occlusion(frames: np.ndarray, template: OcclusionTemplate) -> np.ndarray:
    """Overlay the sensor patches and cables on every frame."""
    size = frames.shape[-1]
    centers = (np.arange(size) + 0.5) / size
    uu, vv = np.meshgrid(centers, centers)
    out = frames.copy()
    overlay = np.full((size, size), np.nan)
    for p in template.patches:
        hit = (uu - p.cx) ** 2 + (vv - p.cy) ** 2 <= p.radius**2
        overlay[hit] = p.gray
    for c in template.cables:
        denom = max(1.0 - c.y_top, 1e-9)
        frac = np.clip((vv - c.y_top) / denom, 0.0, 1.0)
        x_line = c.x_top + (c.x_bottom - c.x_top) * frac
        hit = (np.abs(uu - x_line) <= c.half_width) & (vv >= c.y_top)
        overlay[hit] = c.gray
    covered = ~np.isnan(overlay)
    out[:, covered] = overlay[covered]
    return out


# ---------------------------------------------------------------------------
# Derived artifacts


def _block_mean(frames: np.ndarray, factor: int) -> np.ndarray:
    t, h, w = frames.shape
    return frames.reshape(t, h // factor, factor, w // factor, factor).mean(axis=(2, 4))


def embed_frames(frames: np.ndarray, grid: int = 8) -> FeatureMatrix:
    """Coarse appearance embedding: grid x grid block means per frame."""
    t, h, w = frames.shape
    pooled = _block_mean(frames, h // grid)
    return FeatureMatrix(pooled.reshape(t, grid * grid).astype(np.float32))


def featurize_frames(frames: np.ndarray) -> dict[str, np.ndarray]:
    """Two-scale activation stacks per frame.

    Each layer holds intensity, horizontal and vertical gradients, and
    a constant channel; the constant keeps every spatial location's
    channel vector away from zero so unit normalization is stable.
    """
    layers = {}
    for name, factor in (("lum", 2), ("lum2", 4)):
        down = _block_mean(frames, factor)
        gy = np.gradient(down, axis=1)
        gx = np.gradient(down, axis=2)
        ones = np.ones_like(down)
        layers[name] = np.stack([down, gx, gy, ones], axis=1).astype(np.float32)
    return layers


AU_CHANNELS = (
    "AU01", "AU02", "AU04", "AU05", "AU06", "AU07", "AU09", "AU10",
    "AU12", "AU14", "AU15", "AU17", "AU18", "AU20", "AU23", "AU24",
    "AU25", "AU26", "AU28", "AU43",
)

# (brow weight, smile weight, bias) per action unit; AU43 is handled
# separately as uninstructed blinking.
_AU_MIX = {
    "AU01": (0.90, 0.00, 0.02),
    "AU02": (0.85, 0.05, 0.02),
    "AU04": (-0.70, -0.10, 0.75),
    "AU05": (0.60, 0.10, 0.05),
    "AU06": (0.05, 0.80, 0.05),
    "AU07": (0.10, 0.45, 0.10),
    "AU09": (-0.30, 0.30, 0.30),
    "AU10": (0.00, 0.60, 0.10),
    "AU12": (0.00, 0.95, 0.02),
    "AU14": (0.05, 0.55, 0.10),
    "AU15": (0.10, -0.60, 0.65),
    "AU17": (0.05, -0.40, 0.50),
    "AU18": (0.00, -0.30, 0.40),
    "AU20": (0.10, 0.50, 0.10),
    "AU23": (0.05, -0.35, 0.45),
    "AU24": (0.00, -0.50, 0.55),
    "AU25": (0.05, 0.75, 0.08),
    "AU26": (0.10, 0.60, 0.05),
    "AU28": (0.00, -0.25, 0.30),
}

EMOTION_CHANNELS = (
    "anger", "contempt", "disgust", "fear",
    "happiness", "neutral", "sadness", "surprise",
)


def au_series(trace: TimeSeries, seed: int, noise_sd: float = 0.005) -> TimeSeries:
    """Action-unit intensities as fixed mixes of the expression trace.

    AU43 (blink) is generated independently of the trace because
    blinking is spontaneous; that is why downstream comparisons drop
    it by default.
    """
    rng = np.random.default_rng(seed)
    brow = trace.channel("brow")
    smile = trace.channel("smile")
    cols = []
    for name in AU_CHANNELS:
        if name == "AU43":
            blink = np.full(trace.frame_count, 0.02)
            hits = rng.random(trace.frame_count) < 0.3 / trace.fps
            blink = blink + np.convolve(hits.astype(float), [0.45, 0.9, 0.45], mode="same")
            cols.append(np.clip(blink, 0.0, 1.0))
            continue
        wb, ws, bias = _AU_MIX[name]
        raw = wb * brow + ws * smile + bias
        raw = raw + rng.normal(0.0, noise_sd, trace.frame_count)
        cols.append(np.clip(raw, 0.0, 1.0))
    return TimeSeries(
        fps=trace.fps,
        channel_names=AU_CHANNELS,
        values=np.stack(cols, axis=1),
        meta=dict(trace.meta),
    )


def emotion_series(trace: TimeSeries, seed: int, noise_sd: float = 0.005) -> TimeSeries:
    """Eight emotion scores per frame, normalized to sum to one."""
    rng = np.random.default_rng(seed)
    brow = trace.channel("brow")
    smile = trace.channel("smile")
    raw = {
        "anger": (1 - brow) * (1 - smile),
        "contempt": 0.5 * (1 - brow) * smile,
        "disgust": 0.6 * (1 - brow) * (1 - smile) + 0.05,
        "fear": brow * (1 - smile),
        "happiness": smile,
        "neutral": np.clip(
            0.6 - np.abs(brow - 0.5) - np.abs(smile - 0.5), 0.05, None
        ),
        "sadness": 0.6 * (1 - smile) * (0.4 + 0.6 * (1 - brow)),
        "surprise": brow * (0.3 + 0.5 * (1 - smile)),
    }
    cols = np.stack([raw[name] for name in EMOTION_CHANNELS], axis=1)
    cols = cols + rng.normal(0.0, noise_sd, cols.shape)
    cols = np.clip(cols, 1e-4, None)
    cols = cols / cols.sum(axis=1, keepdims=True)
    return TimeSeries(
        fps=trace.fps,
        channel_names=EMOTION_CHANNELS,
        values=cols,
        meta=dict(trace.meta),
    )


def corrupt_series(series: TimeSeries, seed: int) -> TimeSeries:
    """Degrade a series the way extraction on occluded video does.

    Attenuates toward a per-channel offset and adds broadband noise;
    the clip keeps values in the unit range the extractors emit.
    """
    rng = np.random.default_rng(seed)
    offsets = rng.uniform(0.05, 0.15, len(series.channel_names))
    noise = rng.normal(0.0, 0.05, series.values.shape)
    values = np.clip(0.35 * series.values + offsets + noise, 0.0, 1.0)
    return TimeSeries(
        fps=series.fps,
        channel_names=series.channel_names,
        values=values,
        meta=dict(series.meta, corrupted=True),
    )


# ---------------------------------------------------------------------------
# Session fixture


@dataclass
class FixtureConfig:
    """Shape of a generated miniature study."""

    subjects: int = 3
    frames: int = 160
    size: int = 64
    fps: float = 30.0
    takes: int = 2
    seed: int = 0
    emit_frames: bool = False


def generate_fixture(root: str | Path, config: FixtureConfig | None = None) -> Path:
    """Write a full synthetic study under ``root``; returns the manifest path.

    Per subject, task, and session: one unobstructed normal take plus
    ``takes`` sensor takes, each with a clean twin rendered from the
    same frames minus the occlusion overlay.
    """
    cfg = config if config is not None else FixtureConfig()
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    template = canonical_template()
    rows: list[dict] = []

    def emit(subject, session, condition, task, take, frames, trace, corrupted):
        rel = Path(subject) / session / condition / task / f"t{take}"
        out = root / rel
        out.mkdir(parents=True, exist_ok=True)
        sseed = stable_seed(cfg.seed, subject, session, condition, task, take)
        embed = embed_frames(frames)
        write_tensor(out / "embed.ffr", embed.values)
        write_stack_sequence(out / "feat", featurize_frames(frames))
        au = au_series(trace, stable_seed(sseed, "au"))
        emo = emotion_series(trace, stable_seed(sseed, "emotion"))
        if corrupted:
            au = corrupt_series(au, stable_seed(sseed, "au-corrupt"))
            emo = corrupt_series(emo, stable_seed(sseed, "emotion-corrupt"))
        write_series_csv(out / "au.csv", au)
        write_series_csv(out / "emotion.csv", emo)
        kinds = [
            (KIND_EMBED, rel / "embed.ffr"),
            (KIND_STACKS, rel / "feat"),
            (KIND_AU, rel / "au.csv"),
            (KIND_EMOTION, rel / "emotion.csv"),
        ]
        if cfg.emit_frames:
            write_tensor(out / "frames.ffr", frames)
            kinds.append((KIND_FRAMES, rel / "frames.ffr"))
        for kind, path in kinds:
            rows.append(
                {
                    "subject": subject,
                    "session": session,
                    "condition": condition,
                    "task": task,
                    "take": take,
                    "kind": kind,
                    "path": path.as_posix(),
                    "fps": cfg.fps,
                }
            )

    for s in range(1, cfg.subjects + 1):
        subject = f"p{s:02d}"
        look = SubjectLook.from_seed(stable_seed(cfg.seed, subject, "look"))
        for task in TASKS:
            for session in SESSIONS:
                trace_n = expression_trace(
                    task, cfg.frames, cfg.fps,
                    stable_seed(cfg.seed, subject, session, task, "normal-trace"),
                )
                frames_n = render_face_sequence(
                    look, trace_n, cfg.size,
                    seed=stable_seed(cfg.seed, subject, session, task, "normal-render"),
                )
                emit(subject, session, "normal", task, 1, frames_n, trace_n, False)
                for take in range(1, cfg.takes + 1):
                    trace_s = expression_trace(
                        task, cfg.frames, cfg.fps,
                        stable_seed(cfg.seed, subject, session, task, "take-trace", take),
                    )
                    frames_clean = render_face_sequence(
                        look, trace_s, cfg.size,
                        seed=stable_seed(cfg.seed, subject, session, task, "take-render", take),
                    )
                    frames_sensor = apply_occlusion(frames_clean, template)
                    emit(subject, session, "sensor", task, take, frames_sensor, trace_s, True)
                    emit(subject, session, "clean", task, take, frames_clean, trace_s, False)

    manifest = root / "manifest.jsonl"
    write_manifest(manifest, rows)
    return manifest
