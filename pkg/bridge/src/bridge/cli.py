"""Command-line front end.

One subcommand per operation: embedding extraction, series analysis,
perceptual-weight export, removal-model training, video translation,
and manifest-wide bulk export.  Exit codes: 0 on success, 1 when an
input or contract check fails, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .analyzers import analyze_frames, analyzer_channels
from .backbone import embed_frames, featurize_frames, layer_weights, load_backbone
from .cyclegan import TrainConfig, load_model, save_model, train_removal_model, translate_video
from .data import SAMPLERS, gather_condition_frames
from .errors import BridgeError
from .export import export_recordings
from .manifest import read_manifest
from .series import write_series_csv
from .tensorio import crop_frames, load_frames, write_stack_sequence, write_tensor


def _parse_crop(text: str | None) -> tuple[int, int, int, int] | None:
    if text is None:
        return None
    parts = text.split(",")
    if len(parts) != 4:
        raise BridgeError(f"crop must be top,left,height,width, got {text!r}")
    try:
        top, left, height, width = (int(p) for p in parts)
    except ValueError as exc:
        raise BridgeError(f"crop must be four integers, got {text!r}") from exc
    return top, left, height, width


def _load_cropped(path: str, crop_text: str | None):
    frames = load_frames(path)
    box = _parse_crop(crop_text)
    if box is not None:
        frames = crop_frames(frames, box)
    return frames


def cmd_extract(args) -> int:
    frames = _load_cropped(args.frames, args.crop)
    backbone = load_backbone(args.backbone)
    write_tensor(args.embed_out, embed_frames(backbone, frames))
    print(args.embed_out)
    if args.stacks_out is not None:
        write_stack_sequence(args.stacks_out, featurize_frames(backbone, frames))
        print(args.stacks_out)
    return 0


def cmd_series(args) -> int:
    frames = _load_cropped(args.frames, args.crop)
    values = analyze_frames(args.analyzer, frames)
    write_series_csv(args.out, analyzer_channels(args.analyzer), values, args.fps)
    print(args.out)
    return 0


def cmd_weights(args) -> int:
    backbone = load_backbone(args.backbone)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for layer_id, weights in layer_weights(backbone, size=args.size).items():
        write_tensor(out / f"{layer_id}.ffr", weights)
    print(out)
    return 0


def cmd_train(args) -> int:
    rows = read_manifest(args.manifest)
    normal = gather_condition_frames(rows, args.subject, "normal")
    sensor = gather_condition_frames(rows, args.subject, "sensor")
    config = TrainConfig(
        image_size=args.image_size,
        load_size=args.load_size,
        epochs=args.epochs,
        sample_fraction=args.sample_fraction,
        sampler=args.sampler,
        seed=args.seed,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    pair, log = train_removal_model(
        normal, sensor, config, log_path=out / "training_log.jsonl"
    )
    save_model(pair, out)
    last = log[-1]
    print(
        f"{out} after {config.epochs} epochs: "
        f"g_total={last['g_total']:.4f} d_total={last['d_total']:.4f}"
    )
    return 0


def cmd_translate(args) -> int:
    pair = load_model(args.model)
    frames = _load_cropped(args.frames, args.crop)
    write_tensor(args.out, translate_video(pair, frames, direction=args.direction))
    print(args.out)
    return 0


def cmd_export(args) -> int:
    manifest = export_recordings(
        args.manifest,
        args.out,
        backbone_name=args.backbone,
        au_analyzer=args.au_analyzer,
    )
    print(manifest)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bridge",
        description="Extract features from face frames and train occlusion removal.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="embed frames, optionally with stacks")
    p.add_argument("--frames", required=True)
    p.add_argument("--embed-out", required=True)
    p.add_argument("--stacks-out", default=None, help="also write activation stacks")
    p.add_argument("--backbone", default="toy")
    p.add_argument("--crop", default=None, metavar="T,L,H,W")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("series", help="run an analyzer over frames into a CSV")
    p.add_argument("--frames", required=True)
    p.add_argument("--analyzer", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--fps", type=float, default=30.0)
    p.add_argument("--crop", default=None, metavar="T,L,H,W")
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("weights", help="export per-layer perceptual weights")
    p.add_argument("--out", required=True)
    p.add_argument("--backbone", default="toy")
    p.add_argument("--size", type=int, default=64, help="probe frame size")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("train", help="train a removal model for one subject")
    p.add_argument("--manifest", required=True)
    p.add_argument("--subject", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--image-size", type=int, default=64)
    p.add_argument("--load-size", type=int, default=72)
    p.add_argument("--sample-fraction", type=float, default=0.02)
    p.add_argument("--sampler", choices=SAMPLERS, default="random")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("translate", help="run frames through a trained generator")
    p.add_argument("--model", required=True)
    p.add_argument("--frames", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--direction", choices=("s2n", "n2s"), default="s2n")
    p.add_argument("--crop", default=None, metavar="T,L,H,W")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("export", help="extract all artifacts listed in a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--backbone", default="toy")
    p.add_argument("--au-analyzer", choices=("au_rdf", "au_jaanet"), default="au_rdf")
    p.set_defaults(func=cmd_export)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BridgeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
