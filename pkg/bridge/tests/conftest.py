import shutil
import subprocess

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def draw_face(
    brow: float,
    smile: float,
    size: int = 64,
    skin: float = 0.72,
    eye_dx: float = 0.145,
    eyes: bool = True,
    noise_sd: float = 0.0,
    seed: int = 0,
) -> np.ndarray:
    """Render one studio face frame from the shared geometry.

    This is an independent re-drawing of the layout the analyzers were
    calibrated against: a bright head ellipse on a dark background,
    eyebrow bars whose height tracks ``brow`` and a mouth parabola whose
    curvature tracks ``smile``.  Tests use it as the analyzer oracle.
    """
    centers = (np.arange(size) + 0.5) / size
    uu, vv = np.meshgrid(centers, centers)
    head = ((uu - 0.5) / 0.38) ** 2 + ((vv - 0.52) / 0.44) ** 2 <= 1.0
    img = np.where(head, skin * (1.0 - 0.08 * (vv - 0.3)), 0.08)
    if eyes:
        for sign in (-1.0, 1.0):
            eye = ((uu - (0.5 + sign * eye_dx)) / 0.055) ** 2
            eye += ((vv - 0.44) / 0.030) ** 2
            img = np.where(eye <= 1.0, 0.15, img)
    brow_y = 0.375 - 0.05 * brow
    for sign in (-1.0, 1.0):
        bar = (np.abs(uu - (0.5 + sign * eye_dx)) <= 0.085)
        bar &= np.abs(vv - brow_y) <= 0.016
        img = np.where(bar & head, 0.25, img)
    xi = (uu - 0.5) / 0.14
    curve = 0.70 - 0.12 * (smile - 0.5) * (1.0 - xi**2)
    mouth = (np.abs(xi) <= 1.0) & (np.abs(vv - curve) <= 0.018)
    img = np.where(mouth & head, 0.20, img)
    if noise_sd > 0.0:
        rng = np.random.default_rng(seed)
        img = img + rng.normal(0.0, noise_sd, img.shape)
    return np.clip(img, 0.0, 1.0)


def face_sequence(brows, smiles, size: int = 64, **kwargs) -> np.ndarray:
    frames = [
        draw_face(b, s, size=size, seed=i, **kwargs)
        for i, (b, s) in enumerate(zip(brows, smiles))
    ]
    return np.stack(frames).astype(np.float32)


@pytest.fixture(scope="session")
def face():
    return draw_face


@pytest.fixture(scope="session")
def faces():
    return face_sequence


@pytest.fixture(scope="session")
def evaluator_cli() -> str:
    """Path to the consumer's CLI; the interop tests require it."""
    exe = shutil.which("restoreval")
    if exe is None:
        pytest.fail("restoreval CLI not on PATH; interop tests cannot run")
    return exe


def synth_study(cli, root, subjects: int, frames: int, takes: int, seed: int):
    """Generate the consumer's synthetic study fixture with frame tensors."""
    subprocess.run(
        [
            cli, "synth", "--out", str(root),
            "--subjects", str(subjects), "--frames", str(frames),
            "--takes", str(takes), "--seed", str(seed), "--emit-frames",
        ],
        check=True, capture_output=True, text=True,
    )
    return root / "manifest.jsonl"


@pytest.fixture(scope="session")
def micro_study(evaluator_cli, tmp_path_factory):
    """Smallest real manifest: one subject, one take, 8-frame clips."""
    root = tmp_path_factory.mktemp("micro_study")
    return synth_study(evaluator_cli, root, subjects=1, frames=8, takes=1, seed=7)
