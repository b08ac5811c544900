"""Geometric series analyzers for grayscale face frames.

Three analyzers share one measurement core.  Per frame the core finds
the face as the bright region, reads the eyebrow height from the
centroid of mid-dark bar pixels in the upper face, and reads the mouth
curvature from a weighted parabola fit over dark pixels in the lower
face.  The two measurements, brow and smile in [0, 1], then drive
fixed per-channel mixes:

    au_rdf      20 action units, the wide channel set
    au_jaanet   12 action units, the narrow channel set
    emotion     7 emotions plus neutral, rows normalized to sum 1

The calibration constants were fitted once against synthetic studio
faces and frozen; like any appearance-based extractor the outputs are
only meaningful on unobstructed faces, and occlusions corrupt them.
Analyzers are deterministic and add no noise of their own.
"""

from __future__ import annotations

import numpy as np

from .errors import AnalyzerUnavailable, BridgeError, ShapeMismatch

TRACE_CHANNELS = ("brow", "smile")

AU_RDF_CHANNELS = (
    "AU01", "AU02", "AU04", "AU05", "AU06", "AU07", "AU09", "AU10",
    "AU12", "AU14", "AU15", "AU17", "AU18", "AU20", "AU23", "AU24",
    "AU25", "AU26", "AU28", "AU43",
)

AU_JAANET_CHANNELS = (
    "AU01", "AU02", "AU04", "AU06", "AU07", "AU10",
    "AU12", "AU14", "AU15", "AU17", "AU23", "AU24",
)

EMOTION_CHANNELS = (
    "anger", "contempt", "disgust", "fear",
    "happiness", "neutral", "sadness", "surprise",
)

# Face-box thresholds and the affine map from bar centroid to brow
# value; see the module docstring for provenance.
_BRIGHT = 0.45
_DARK = 0.30
_BAR_LOW = 0.18
_BROW_REST = 0.307
_BROW_SLOPE = 17.5
_CURVE_GAIN = 0.12

# (brow weight, smile weight, bias) per action unit.  AU43 comes from
# the eye-darkness measurement instead and is listed for completeness.
_RDF_MIX = {
    "AU01": (0.80, 0.00, 0.10),
    "AU02": (0.90, 0.00, 0.05),
    "AU04": (-0.80, 0.00, 0.85),
    "AU05": (0.70, 0.00, 0.10),
    "AU06": (0.00, 0.85, 0.05),
    "AU07": (0.00, 0.50, 0.15),
    "AU09": (-0.25, 0.25, 0.35),
    "AU10": (0.00, 0.70, 0.05),
    "AU12": (0.00, 0.90, 0.05),
    "AU14": (0.00, 0.60, 0.15),
    "AU15": (0.00, -0.70, 0.70),
    "AU17": (0.00, -0.50, 0.55),
    "AU18": (0.10, -0.30, 0.35),
    "AU20": (0.05, 0.55, 0.10),
    "AU23": (0.00, -0.40, 0.50),
    "AU24": (-0.05, -0.55, 0.60),
    "AU25": (0.00, 0.80, 0.10),
    "AU26": (0.05, 0.65, 0.10),
    "AU28": (0.00, -0.35, 0.40),
}

# The narrow model reads the same geometry with its own gains.
_JAANET_MIX = {
    "AU01": (0.70, 0.05, 0.12),
    "AU02": (0.85, 0.00, 0.08),
    "AU04": (-0.75, -0.05, 0.82),
    "AU06": (0.05, 0.80, 0.08),
    "AU07": (0.00, 0.45, 0.18),
    "AU10": (0.00, 0.65, 0.08),
    "AU12": (0.05, 0.85, 0.05),
    "AU14": (0.00, 0.55, 0.18),
    "AU15": (0.05, -0.65, 0.65),
    "AU17": (0.00, -0.45, 0.50),
    "AU23": (0.05, -0.35, 0.45),
    "AU24": (0.00, -0.50, 0.55),
}


def _face_box(img: np.ndarray) -> tuple[float, float, np.ndarray]:
    """Top, height and column mask of the face in unit coordinates."""
    size = img.shape[0]
    bright = img > _BRIGHT
    rows = np.flatnonzero(bright.mean(axis=1) > 0.05)
    # Core columns only: a column counts when it is mostly face, which
    # keeps background corners out of the eye window.  The column mask
    # backs off independently of the row box so a heavily occluded face
    # still gets its vertical extent measured.
    cols = bright.mean(axis=0) > 0.5
    if cols.sum() < 2:
        cols = np.ones(img.shape[1], dtype=bool)
    if rows.size < 2:
        return 0.0, 1.0, cols
    top = (rows[0] + 0.5) / size
    height = (rows[-1] - rows[0] + 1) / size
    return top, height, cols


def _measure_frame(img: np.ndarray) -> tuple[float, float, float]:
    """One frame's (brow, smile, eye darkness fraction)."""
    size_y, size_x = img.shape
    top, height, face_cols = _face_box(img)
    ys = (np.arange(size_y) + 0.5) / size_y
    xs = (np.arange(size_x) + 0.5) / size_x

    upper = (ys >= top) & (ys <= top + 0.55 * height)
    bar = (img > _BAR_LOW) & (img < _DARK) & upper[:, None]
    mass = bar.sum()
    if mass >= 4:
        centroid = float((ys[:, None] * bar).sum() / mass)
        rel = (centroid - top) / height
        brow = float(np.clip(0.5 + (_BROW_REST - rel) * _BROW_SLOPE, 0.0, 1.0))
    else:
        brow = 0.5

    # The mouth is fitted over the central face columns only, keeping
    # the dark background and the face's lower boundary out of the fit.
    x_center = float(xs[face_cols].mean())
    central = np.abs(xs - x_center) <= 0.20
    lower = (ys >= top + 0.60 * height) & (ys <= top + 0.85 * height)
    mouth = (img < _DARK) & lower[:, None] & central[None, :]
    col_mass = mouth.sum(axis=0)
    cols = np.flatnonzero(col_mass)
    smile = 0.5
    if cols.size >= 5:
        col_y = (ys[:, None] * mouth).sum(axis=0)[cols] / col_mass[cols]
        w = col_mass[cols].astype(np.float64)
        x_mean = float((xs[cols] * w).sum() / w.sum())
        x_sd = float(np.sqrt(((xs[cols] - x_mean) ** 2 * w).sum() / w.sum()))
        if x_sd > 1e-6:
            # Uniform sampling over a full parabola has sd 1/sqrt(3).
            xi = (xs[cols] - x_mean) / (x_sd * np.sqrt(3.0))
            if np.unique(np.round(xi, 6)).size >= 3:
                coeffs = np.polyfit(xi, col_y, 2, w=np.sqrt(w))
                smile = float(np.clip(0.5 + coeffs[0] / _CURVE_GAIN, 0.0, 1.0))

    # Eye darkness is read inside the face's own column extent so the
    # dark background cannot swamp the fraction.
    eye_band = (ys >= top + 0.32 * height) & (ys <= top + 0.48 * height)
    window = eye_band[:, None] & face_cols[None, :]
    area = window.sum()
    eye_frac = float(((img < 0.19) & window).sum() / area) if area else 0.0
    return brow, smile, eye_frac


def _checked(frames: np.ndarray) -> np.ndarray:
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 3:
        raise ShapeMismatch(f"expected (T, H, W) frames, got {frames.shape}")
    if not np.all(np.isfinite(frames)):
        raise BridgeError("frames contain non-finite values")
    return frames


def measure_trace(frames: np.ndarray) -> np.ndarray:
    """(T, 2) array of raw (brow, smile) measurements."""
    frames = _checked(frames)
    out = np.empty((frames.shape[0], 2))
    for i, img in enumerate(frames):
        brow, smile, _ = _measure_frame(img)
        out[i] = (brow, smile)
    return out


def _mixed(frames: np.ndarray, mix: dict, names: tuple[str, ...]) -> np.ndarray:
    frames = _checked(frames)
    values = np.empty((frames.shape[0], len(names)))
    for i, img in enumerate(frames):
        brow, smile, eye_frac = _measure_frame(img)
        for j, name in enumerate(names):
            if name == "AU43":
                values[i, j] = np.clip(1.0 - 35.0 * eye_frac, 0.0, 1.0)
                continue
            wb, ws, bias = mix[name]
            values[i, j] = np.clip(wb * brow + ws * smile + bias, 0.0, 1.0)
    return values


def _emotions(frames: np.ndarray) -> np.ndarray:
    frames = _checked(frames)
    values = np.empty((frames.shape[0], len(EMOTION_CHANNELS)))
    for i, img in enumerate(frames):
        b, s, _ = _measure_frame(img)
        raw = {
            "anger": (1 - b) * (1 - s),
            "contempt": 0.4 * s * (1 - b),
            "disgust": 0.5 * (1 - b) * (1 - s) + 0.05,
            "fear": 0.8 * b * (1 - s),
            "happiness": 1.1 * s,
            "neutral": 1.4 * np.exp(-6.0 * ((b - 0.5) ** 2 + (s - 0.5) ** 2)),
            "sadness": 0.9 * (1 - s) * (0.3 + 0.7 * (1 - b)),
            "surprise": 1.1 * b * (0.4 + 0.6 * (1 - s)),
        }
        row = np.array([raw[name] for name in EMOTION_CHANNELS])
        row = np.clip(row, 1e-4, None)
        values[i] = row / row.sum()
    return values


def analyzer_channels(name: str) -> tuple[str, ...]:
    """Channel names an analyzer emits, in column order."""
    try:
        return {
            "au_rdf": AU_RDF_CHANNELS,
            "au_jaanet": AU_JAANET_CHANNELS,
            "emotion": EMOTION_CHANNELS,
        }[name]
    except KeyError:
        raise AnalyzerUnavailable(f"unknown analyzer {name!r}") from None


def analyze_frames(name: str, frames: np.ndarray) -> np.ndarray:
    """Run one analyzer over a frame tensor; returns (T, C) values."""
    if name == "au_rdf":
        return _mixed(frames, _RDF_MIX, AU_RDF_CHANNELS)
    if name == "au_jaanet":
        return _mixed(frames, _JAANET_MIX, AU_JAANET_CHANNELS)
    if name == "emotion":
        return _emotions(frames)
    raise AnalyzerUnavailable(f"unknown analyzer {name!r}")
