"""Reading and writing the evaluator's manifest format.

A manifest is JSON lines, one recording artifact per line, with the
fields subject, session, condition, task, take, kind, path and an
optional fps.  Paths are stored relative to the manifest file.  The
bridge reads manifests to find frame tensors and writes manifests to
publish what it extracted; the heavyweight consistency checking stays
on the consumer side.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import DecodeFailure

_REQUIRED = ("subject", "session", "condition", "task", "take", "kind", "path")

KIND_FRAMES = "frames"
KIND_EMBED = "embed"
KIND_STACKS = "feat"
KIND_AU = "au"
KIND_EMOTION = "emotion"


@dataclass(frozen=True)
class ManifestRow:
    """One artifact entry with its path resolved to an absolute one."""

    subject: str
    session: str
    condition: str
    task: str
    take: int
    kind: str
    path: Path
    fps: float | None

    @property
    def key(self) -> tuple[str, str, str, str, int]:
        return (self.subject, self.session, self.condition, self.task, self.take)


def read_manifest(path: str | Path) -> list[ManifestRow]:
    """Parse a manifest; malformed lines raise DecodeFailure."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DecodeFailure(f"cannot read {path}: {exc}") from exc
    rows: list[ManifestRow] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DecodeFailure(f"{path}:{lineno}: {exc}") from exc
        if not isinstance(obj, dict):
            raise DecodeFailure(f"{path}:{lineno}: expected a JSON object")
        missing = [f for f in _REQUIRED if f not in obj]
        if missing:
            raise DecodeFailure(f"{path}:{lineno}: missing fields {missing}")
        try:
            take = int(obj["take"])
            fps = float(obj["fps"]) if obj.get("fps") is not None else None
        except (TypeError, ValueError) as exc:
            raise DecodeFailure(f"{path}:{lineno}: {exc}") from exc
        rows.append(
            ManifestRow(
                subject=str(obj["subject"]),
                session=str(obj["session"]),
                condition=str(obj["condition"]),
                task=str(obj["task"]),
                take=take,
                kind=str(obj["kind"]),
                path=(path.parent / str(obj["path"])).resolve(),
                fps=fps,
            )
        )
    return rows


def select(
    rows: list[ManifestRow],
    kind: str | None = None,
    subject: str | None = None,
    session: str | None = None,
    condition: str | None = None,
    task: str | None = None,
    take: int | None = None,
) -> list[ManifestRow]:
    """Filter rows by any subset of fields, keeping manifest order."""
    out = []
    for row in rows:
        if kind is not None and row.kind != kind:
            continue
        if subject is not None and row.subject != subject:
            continue
        if session is not None and row.session != session:
            continue
        if condition is not None and row.condition != condition:
            continue
        if task is not None and row.task != task:
            continue
        if take is not None and row.take != take:
            continue
        out.append(row)
    return out


def write_manifest(path: str | Path, rows: list[dict]) -> None:
    """Write rows as sorted, compact JSON lines.

    ``path`` fields must already be relative to the manifest location;
    sorting keys and rows keeps rewrites byte for byte reproducible.
    """
    path = Path(path)
    ordered = sorted(
        rows,
        key=lambda r: (
            r["subject"], r["session"], r["condition"], r["task"],
            r["take"], r["kind"],
        ),
    )
    lines = [
        json.dumps(row, sort_keys=True, separators=(",", ":")) for row in ordered
    ]
    path.write_text("\n".join(lines) + "\n")
