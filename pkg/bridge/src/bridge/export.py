"""Bulk extraction: one manifest of frames in, one of features out.

For every frame tensor in the source manifest this writes the four
derived artifacts the evaluator consumes (embeddings, activation
stacks, an action-unit series and an emotion series) into a parallel
tree, then publishes a fresh manifest for that tree.  Identity fields
are carried over unchanged so the output groups exactly like the
input.
"""

from __future__ import annotations

from pathlib import Path

from .analyzers import analyze_frames, analyzer_channels
from .backbone import embed_frames, featurize_frames, load_backbone
from .errors import AnalyzerUnavailable, DecodeFailure
from .manifest import (
    KIND_AU,
    KIND_EMBED,
    KIND_EMOTION,
    KIND_FRAMES,
    KIND_STACKS,
    read_manifest,
    write_manifest,
)
from .series import write_series_csv
from .tensorio import load_frames, write_stack_sequence, write_tensor

_AU_ANALYZERS = ("au_rdf", "au_jaanet")


def export_recordings(
    manifest_path: str | Path,
    out_root: str | Path,
    backbone_name: str = "toy",
    au_analyzer: str = "au_rdf",
    default_fps: float = 30.0,
) -> Path:
    """Extract every recording's features; returns the new manifest path."""
    if au_analyzer not in _AU_ANALYZERS:
        raise AnalyzerUnavailable(
            f"au analyzer must be one of {_AU_ANALYZERS}, got {au_analyzer!r}"
        )
    rows = read_manifest(manifest_path)
    frame_rows = sorted(
        (r for r in rows if r.kind == KIND_FRAMES), key=lambda r: r.key
    )
    if not frame_rows:
        raise DecodeFailure(f"{manifest_path}: no frame tensors to extract from")
    out_root = Path(out_root)
    backbone = load_backbone(backbone_name)
    out_rows: list[dict] = []
    for row in frame_rows:
        frames = load_frames(row.path)
        rel = Path(row.subject) / row.session / row.condition / row.task / f"t{row.take}"
        dest = out_root / rel
        dest.mkdir(parents=True, exist_ok=True)
        fps = row.fps if row.fps is not None else default_fps

        write_tensor(dest / "embed.ffr", embed_frames(backbone, frames))
        write_stack_sequence(dest / "feat", featurize_frames(backbone, frames))
        write_series_csv(
            dest / "au.csv",
            analyzer_channels(au_analyzer),
            analyze_frames(au_analyzer, frames),
            fps,
        )
        write_series_csv(
            dest / "emotion.csv",
            analyzer_channels("emotion"),
            analyze_frames("emotion", frames),
            fps,
        )
        for kind, name in (
            (KIND_EMBED, "embed.ffr"),
            (KIND_STACKS, "feat"),
            (KIND_AU, "au.csv"),
            (KIND_EMOTION, "emotion.csv"),
        ):
            out_rows.append(
                {
                    "subject": row.subject,
                    "session": row.session,
                    "condition": row.condition,
                    "task": row.task,
                    "take": row.take,
                    "kind": kind,
                    "path": (rel / name).as_posix(),
                    "fps": fps,
                }
            )
    manifest = out_root / "manifest.jsonl"
    write_manifest(manifest, out_rows)
    return manifest
