"""Session-pairing protocol and report assembly.

The protocol compares, per subject and task:

    N1-N2   session 1 normal take vs session 2 normal take
    N1-S1   session 1 normal vs each session 1 sensor take
    N1-C1   session 1 normal vs each session 1 clean take
    N2-S2   session 2 normal vs each session 2 sensor take
    N2-C2   session 2 normal vs each session 2 clean take

N1-N2 calibrates how far apart two honest repetitions already are;
the restoration question is whether clean takes land nearer the
normal baseline than the occluded sensor takes they derive from.

Scores are produced per job and metric, then aggregated within
subject (takes averaged by default) and across subjects into
mean +/- std cells.  Failures are recorded per job rather than
aborting the run, and every run writes its configuration next to its
numbers.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from threading import Lock

import numpy as np

from .catalog import (
    KIND_AU,
    KIND_EMBED,
    KIND_EMOTION,
    KIND_STACKS,
    RecordingCatalog,
    RecordingRef,
)
from .errors import MissingBaseline, RestoreEvalError, UnsupportedForm
from .frechet import BatchPolicy, fid_between_sets
from .lpips import FramePairing, LayerWeights, lpips_video
from .seeding import stable_seed
from .series import read_series_csv
from .seriesmetrics import compare_multichannel
from .tensorio import load_feature_matrix, load_stack_sequence

PAIRING_LABELS = ("N1N2", "N1S1", "N1C1", "N2S2", "N2C2")
LABEL_DISPLAY = {
    "N1N2": "N1-N2",
    "N1S1": "N1-S1",
    "N1C1": "N1-C1",
    "N2S2": "N2-S2",
    "N2C2": "N2-C2",
}
METRICS = ("lpips", "fid", "au_dtw", "au_mape", "emo_dtw", "emo_mape")
# Column order follows the published tables.
TASK_ORDER = ("schaede", "emotion", "sentence")

_METRIC_KIND = {
    "lpips": KIND_STACKS,
    "fid": KIND_EMBED,
    "au_dtw": KIND_AU,
    "au_mape": KIND_AU,
    "emo_dtw": KIND_EMOTION,
    "emo_mape": KIND_EMOTION,
}


@dataclass(frozen=True)
class ComparisonJob:
    """One left-vs-right recording comparison under a pairing label."""

    subject: str
    task: str
    label: str
    left: RecordingRef
    right: RecordingRef
    metrics: tuple[str, ...]


@dataclass
class RunConfig:
    """Everything that influences the numbers a run produces."""

    seed: int = 0
    metrics: tuple[str, ...] = METRICS
    fid_batch: int = 128
    fid_allow_all: bool = True
    lpips_pairing: str = "index"
    lpips_max_frames: int = 64
    weights_dir: str | None = None
    dtw_normalized: bool = True
    mape_window_seconds: float = 20.0
    exclude_channels: tuple[str, ...] = ("AU43",)
    take_policy: str = "average"
    threads: int | None = None

    def echo(self) -> dict:
        """Flat, json-safe view for embedding into reports."""
        d = asdict(self)
        d["metrics"] = list(self.metrics)
        d["exclude_channels"] = list(self.exclude_channels)
        return d


@dataclass
class ScoreRecord:
    """One metric value (or failure) for one comparison job."""

    subject: str
    task: str
    label: str
    left_take: int
    right_take: int
    metric: str
    value: float | None
    seed: int
    error: str | None = None


def build_pairings(
    catalog: RecordingCatalog, metrics: tuple[str, ...] = METRICS
) -> list[ComparisonJob]:
    """Expand a catalog into the full comparison list.

    Subjects missing a normal take for a session contribute no jobs
    for that session's labels; a normal-vs-normal job additionally
    needs both sessions.
    """
    jobs: list[ComparisonJob] = []
    for subject in catalog.subjects():
        for task in catalog.tasks():
            normals = {
                session: next(
                    iter(catalog.find(subject=subject, session=session,
                                      condition="normal", task=task)),
                    None,
                )
                for session in ("S1", "S2")
            }
            n1, n2 = normals["S1"], normals["S2"]
            if n1 is not None and n2 is not None:
                jobs.append(ComparisonJob(subject, task, "N1N2", n1, n2, metrics))
            for session, normal, s_label, c_label in (
                ("S1", n1, "N1S1", "N1C1"),
                ("S2", n2, "N2S2", "N2C2"),
            ):
                if normal is None:
                    continue
                for condition, label in (("sensor", s_label), ("clean", c_label)):
                    for rec in catalog.find(
                        subject=subject, session=session, condition=condition, task=task
                    ):
                        jobs.append(ComparisonJob(subject, task, label, normal, rec, metrics))
    jobs.sort(key=lambda j: (j.subject, j.task, PAIRING_LABELS.index(j.label),
                             j.left.take, j.right.take))
    return jobs


class _ArtifactCache:
    """Small thread-safe cache for embeddings and series.

    Normal takes are reused across several jobs; stacks are large and
    are deliberately not cached.
    """

    def __init__(self):
        self._lock = Lock()
        self._store: dict = {}

    def get(self, path: Path, loader):
        key = str(path)
        with self._lock:
            if key in self._store:
                return self._store[key]
        value = loader(path)
        with self._lock:
            self._store.setdefault(key, value)
        return value


def _score_one(job: ComparisonJob, metric: str, config: RunConfig,
               cache: _ArtifactCache, seed: int) -> float:
    kind = _METRIC_KIND.get(metric)
    if kind is None:
        raise UnsupportedForm(f"unknown metric {metric!r}")
    left_path = job.left.artifact(kind)
    right_path = job.right.artifact(kind)
    if left_path is None or right_path is None:
        raise MissingBaseline(
            f"{job.subject}/{job.task}/{job.label}: missing {kind!r} artifact"
        )
    if metric == "fid":
        a = cache.get(left_path, load_feature_matrix)
        b = cache.get(right_path, load_feature_matrix)
        policy = BatchPolicy(
            batch_size=config.fid_batch, allow_all=config.fid_allow_all, seed=seed
        )
        return fid_between_sets(a, b, policy).value
    if metric == "lpips":
        weights = (
            LayerWeights.from_dir(config.weights_dir) if config.weights_dir else None
        )
        pairing = FramePairing(
            mode=config.lpips_pairing, max_frames=config.lpips_max_frames, seed=seed
        )
        a = load_stack_sequence(left_path)
        b = load_stack_sequence(right_path)
        return lpips_video(a, b, weights, pairing).mean
    a = cache.get(left_path, read_series_csv)
    b = cache.get(right_path, read_series_csv)
    exclude = frozenset(config.exclude_channels)
    if metric.endswith("_dtw"):
        return compare_multichannel(
            a, b, metric="dtw", exclude=exclude, dtw_normalized=config.dtw_normalized
        ).mean
    return compare_multichannel(
        a, b, metric="mape", exclude=exclude,
        window_seconds=config.mape_window_seconds,
    ).mean


def run_plan(jobs: list[ComparisonJob], config: RunConfig | None = None) -> list[ScoreRecord]:
    """Evaluate every job and metric; never aborts on a single failure.

    Each (job, metric) gets a seed derived from the run seed and the
    job identity, so results do not depend on scheduling order or
    worker count.
    """
    config = config if config is not None else RunConfig()
    cache = _ArtifactCache()

    def run_job(job: ComparisonJob) -> list[ScoreRecord]:
        records = []
        for metric in job.metrics:
            seed = stable_seed(config.seed, job.subject, job.task, job.label,
                               job.left.take, job.right.take, metric)
            try:
                value = _score_one(job, metric, config, cache, seed)
                error = None
            except RestoreEvalError as exc:
                value = None
                error = f"{type(exc).__name__}: {exc}"
            records.append(
                ScoreRecord(
                    subject=job.subject,
                    task=job.task,
                    label=job.label,
                    left_take=job.left.take,
                    right_take=job.right.take,
                    metric=metric,
                    value=value,
                    seed=seed,
                    error=error,
                )
            )
        return records

    threads = config.threads
    if threads is None:
        env = os.environ.get("RESTOREVAL_THREADS")
        threads = int(env) if env else min(4, os.cpu_count() or 1)
    if threads <= 1 or len(jobs) <= 1:
        grouped = [run_job(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            grouped = list(pool.map(run_job, jobs))
    return [rec for group in grouped for rec in group]


def write_scores_jsonl(path: str | Path, records: list[ScoreRecord]) -> None:
    path = Path(path)
    lines = [json.dumps(asdict(r), sort_keys=True) for r in records]
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text("\n".join(lines) + ("\n" if lines else ""))
    os.replace(tmp, path)


def read_scores_jsonl(path: str | Path) -> list[ScoreRecord]:
    records = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            records.append(ScoreRecord(**json.loads(line)))
    return records


@dataclass
class CellStats:
    mean: float
    std: float
    n: int


@dataclass
class ResultTable:
    """Aggregated cells keyed by (label, task, metric), plus metadata."""

    cells: dict[tuple[str, str, str], CellStats] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def metrics(self) -> tuple[str, ...]:
        present = {m for (_, _, m) in self.cells}
        return tuple(m for m in METRICS if m in present) + tuple(
            sorted(present - set(METRICS))
        )

    def tasks(self) -> tuple[str, ...]:
        present = {t for (_, t, _) in self.cells}
        return tuple(t for t in TASK_ORDER if t in present) + tuple(
            sorted(present - set(TASK_ORDER))
        )


def aggregate(
    records: list[ScoreRecord],
    take_policy: str = "average",
    metadata: dict | None = None,
) -> ResultTable:
    """Collapse per-take scores into subject values, then into cells.

    ``average`` pools every successful take pair of a subject;
    ``first`` keeps only the lowest-numbered take pair.  Cell std is
    the population standard deviation across subjects.
    """
    if take_policy not in ("average", "first"):
        raise UnsupportedForm(f"unknown take policy {take_policy!r}")
    by_subject: dict[tuple, dict[tuple, list[tuple]]] = {}
    for rec in records:
        if rec.value is None:
            continue
        cell = (rec.label, rec.task, rec.metric)
        by_subject.setdefault(cell, {}).setdefault(rec.subject, []).append(
            (rec.left_take, rec.right_take, rec.value)
        )
    table = ResultTable(metadata=dict(metadata or {}))
    for cell, subjects in by_subject.items():
        values = []
        for _, takes in sorted(subjects.items()):
            takes.sort(key=lambda t: (t[0], t[1]))
            if take_policy == "first":
                values.append(takes[0][2])
            else:
                values.append(float(np.mean([t[2] for t in takes])))
        table.cells[cell] = CellStats(
            mean=float(np.mean(values)),
            std=float(np.std(values)),
            n=len(values),
        )
    return table


def _format_cell(stats: CellStats | None) -> str:
    if stats is None:
        return ""
    return f"{stats.mean:.6g}±{stats.std:.6g} (n={stats.n})"


def render_table(table: ResultTable, fmt: str = "markdown") -> str:
    """Render the pairing table; csv and markdown carry identical cells."""
    metrics = table.metrics()
    tasks = table.tasks()
    columns = [f"{m}/{t}" for m in metrics for t in tasks]
    header = ["pairing"] + columns
    rows = []
    for label in PAIRING_LABELS:
        if not any(key[0] == label for key in table.cells):
            continue
        row = [LABEL_DISPLAY[label]]
        for m in metrics:
            for t in tasks:
                row.append(_format_cell(table.cells.get((label, t, m))))
        rows.append(row)
    if fmt == "csv":
        lines = [",".join(header)] + [",".join(r) for r in rows]
        return "\n".join(lines) + "\n"
    if fmt == "markdown":
        lines = [
            "| " + " | ".join(header) + " |",
            "|" + "|".join(" --- " for _ in header) + "|",
        ]
        for r in rows:
            lines.append("| " + " | ".join(cell or " " for cell in r) + " |")
        return "\n".join(lines) + "\n"
    raise UnsupportedForm(f"unknown table format {fmt!r}")


def render_report(table: ResultTable, title: str = "Restoration evaluation") -> str:
    """Markdown report: configuration echo, then the pairing table."""
    lines = [f"# {title}", "", "## Configuration", ""]
    for key in sorted(table.metadata):
        lines.append(f"- {key} = {table.metadata[key]}")
    lines += ["", "## Pairing table", "", render_table(table, "markdown")]
    return "\n".join(lines)


def write_report(out_dir: str | Path, records: list[ScoreRecord],
                 config: RunConfig) -> ResultTable:
    """Write scores.jsonl, report.csv, report.md, run_config.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_scores_jsonl(out / "scores.jsonl", records)
    table = aggregate(records, take_policy=config.take_policy, metadata=config.echo())
    (out / "report.csv").write_text(render_table(table, "csv"))
    (out / "report.md").write_text(render_report(table))
    (out / "run_config.json").write_text(
        json.dumps(config.echo(), indent=2, sort_keys=True) + "\n"
    )
    return table
