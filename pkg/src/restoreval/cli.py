"""Command-line front end.

Subcommands mirror the library layers: one-shot metric calls (fid,
lpips, dtw, mape), manifest validation, fixture synthesis, and the
full pairing protocol (plan, report).  Exit codes: 0 on success, 1
when inputs fail validation or a metric contract, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import plan as planmod
from .catalog import load_manifest
from .errors import RestoreEvalError, ValidationError
from .frechet import BatchPolicy, fid_between_sets
from .lpips import FramePairing, LayerWeights, lpips_video
from .seriesmetrics import DEFAULT_EXCLUDE, compare_multichannel
from .series import read_series_csv
from .synth import FixtureConfig, generate_fixture
from .tensorio import load_feature_matrix, load_stack_sequence


def _add_exclude(parser):
    parser.add_argument(
        "--exclude", action="append", default=None, metavar="CHANNEL",
        help="channel to skip (repeatable; default: AU43)",
    )


def _excludes(args) -> frozenset:
    if args.exclude is None:
        return DEFAULT_EXCLUDE
    return frozenset(args.exclude)


def cmd_validate(args) -> int:
    try:
        catalog = load_manifest(args.manifest, check_paths=not args.no_check_paths)
    except ValidationError as exc:
        for v in exc.violations:
            print(f"invalid: {v}", file=sys.stderr)
        return 1
    print(
        f"ok: {len(catalog.recordings)} recordings, "
        f"{len(catalog.subjects())} subjects, {len(catalog.tasks())} tasks"
    )
    return 0


def cmd_fid(args) -> int:
    a = load_feature_matrix(args.a)
    b = load_feature_matrix(args.b)
    policy = BatchPolicy(batch_size=args.batch, allow_all=not args.strict, seed=args.seed)
    result = fid_between_sets(a, b, policy)
    print(f"{result.value:.6g}")
    return 0


def cmd_lpips(args) -> int:
    a = load_stack_sequence(args.a)
    b = load_stack_sequence(args.b)
    weights = LayerWeights.from_dir(args.weights) if args.weights else None
    pairing = FramePairing(mode=args.pairing, max_frames=args.max_frames, seed=args.seed)
    summary = lpips_video(a, b, weights, pairing)
    print(f"{summary.mean:.6g}")
    return 0


def cmd_dtw(args) -> int:
    a = read_series_csv(args.a)
    b = read_series_csv(args.b)
    scores = compare_multichannel(
        a, b, metric="dtw", exclude=_excludes(args),
        dtw_normalized=not args.raw,
    )
    print(f"{scores.mean:.6g}")
    return 0


def cmd_mape(args) -> int:
    a = read_series_csv(args.a)
    b = read_series_csv(args.b)
    scores = compare_multichannel(
        a, b, metric="mape", exclude=_excludes(args),
        window_seconds=args.window,
    )
    print(f"{scores.mean:.6g}")
    return 0


def _run_config(args) -> planmod.RunConfig:
    return planmod.RunConfig(
        seed=args.seed,
        fid_batch=args.fid_batch,
        fid_allow_all=not args.fid_strict,
        lpips_pairing=args.lpips_pairing,
        lpips_max_frames=args.lpips_max_frames,
        weights_dir=args.weights,
        mape_window_seconds=args.window,
        exclude_channels=tuple(sorted(_excludes(args))),
        take_policy=args.take_policy,
        threads=args.threads,
    )


def _protocol(args, write_reports: bool) -> int:
    catalog = load_manifest(args.manifest)
    config = _run_config(args)
    jobs = planmod.build_pairings(catalog, config.metrics)
    records = planmod.run_plan(jobs, config)
    out = Path(args.out)
    if write_reports:
        planmod.write_report(out, records, config)
        table = planmod.aggregate(records, config.take_policy, config.echo())
        print(planmod.render_table(table, "markdown"), end="")
    else:
        out.mkdir(parents=True, exist_ok=True)
        planmod.write_scores_jsonl(out / "scores.jsonl", records)
    failures = [r for r in records if r.error is not None]
    for rec in failures:
        print(
            f"failed: {rec.subject}/{rec.task}/{rec.label} {rec.metric}: {rec.error}",
            file=sys.stderr,
        )
    print(f"{len(records) - len(failures)}/{len(records)} scores written to {out}",
          file=sys.stderr)
    return 0


def cmd_plan(args) -> int:
    return _protocol(args, write_reports=False)


def cmd_report(args) -> int:
    return _protocol(args, write_reports=True)


def cmd_synth(args) -> int:
    cfg = FixtureConfig(
        subjects=args.subjects,
        frames=args.frames,
        size=args.size,
        takes=args.takes,
        seed=args.seed,
        emit_frames=args.emit_frames,
    )
    manifest = generate_fixture(args.out, cfg)
    print(manifest)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="restoreval",
        description="Evaluate how well occluded facial behavior was restored.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a manifest for consistency")
    p.add_argument("manifest")
    p.add_argument("--no-check-paths", action="store_true",
                   help="skip existence checks for artifact files")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("fid", help="Frechet distance between two embedding files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--batch", type=int, default=128)
    p.add_argument("--strict", action="store_true",
                   help="fail instead of using all frames when short")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fid)

    p = sub.add_parser("lpips", help="perceptual distance between two stack dirs")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--weights", default=None, help="dir of per-layer weight tensors")
    p.add_argument("--pairing", choices=("index", "all_pairs"), default="index")
    p.add_argument("--max-frames", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_lpips)

    p = sub.add_parser("dtw", help="warping distance between two series files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--raw", action="store_true", help="report unnormalized cost")
    _add_exclude(p)
    p.set_defaults(func=cmd_dtw)

    p = sub.add_parser("mape", help="shift-searched percentage error between series")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--window", type=float, default=20.0,
                   help="shift search half-window in seconds")
    _add_exclude(p)
    p.set_defaults(func=cmd_mape)

    for name, help_text in (
        ("plan", "run all pairings, write scores.jsonl"),
        ("report", "run all pairings, write scores and rendered tables"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--manifest", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--fid-batch", type=int, default=128)
        p.add_argument("--fid-strict", action="store_true")
        p.add_argument("--lpips-pairing", choices=("index", "all_pairs"), default="index")
        p.add_argument("--lpips-max-frames", type=int, default=64)
        p.add_argument("--weights", default=None)
        p.add_argument("--window", type=float, default=20.0)
        p.add_argument("--take-policy", choices=("average", "first"), default="average")
        p.add_argument("--threads", type=int, default=None)
        _add_exclude(p)
        p.set_defaults(func=cmd_plan if name == "plan" else cmd_report)

    p = sub.add_parser("synth", help="generate a synthetic study fixture")
    p.add_argument("--out", required=True)
    p.add_argument("--subjects", type=int, default=3)
    p.add_argument("--frames", type=int, default=160)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--takes", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--emit-frames", action="store_true",
                   help="also write raw frame tensors")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RestoreEvalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
