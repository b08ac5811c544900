"""Recording manifest: which files belong to which capture.

The manifest is JSON lines, one artifact per line:

    {"subject": "p01", "session": "S1", "condition": "normal",
     "task": "schaede", "take": 1, "kind": "embed",
     "path": "p01/S1/normal/schaede/t1/embed.ffr", "fps": 30.0}

Paths are relative to the manifest file so a bundle can be moved as a
unit.  Artifacts with the same (subject, session, condition, task,
take) are grouped into one recording with a kind -> path map.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import IoFailure, ParseError, ValidationError

SESSIONS = ("S1", "S2")
CONDITIONS = ("normal", "sensor", "clean")
TASKS = ("schaede", "sentence", "emotion")

KIND_EMBED = "embed"
KIND_STACKS = "feat"
KIND_AU = "au"
KIND_EMOTION = "emotion"
KIND_FRAMES = "frames"
KINDS = (KIND_EMBED, KIND_STACKS, KIND_AU, KIND_EMOTION, KIND_FRAMES)

_REQUIRED = ("subject", "session", "condition", "task", "take", "kind", "path")


@dataclass(frozen=True)
class RecordingRef:
    """One captured take plus the artifacts extracted from it."""

    subject: str
    session: str
    condition: str
    task: str
    take: int
    artifacts: tuple[tuple[str, Path], ...]
    fps: float | None = None

    @property
    def key(self) -> tuple:
        return (self.subject, self.session, self.condition, self.task, self.take)

    def artifact(self, kind: str) -> Path | None:
        for k, p in self.artifacts:
            if k == kind:
                return p
        return None


@dataclass
class RecordingCatalog:
    """All recordings from one manifest, sorted by key."""

    root: Path
    recordings: tuple[RecordingRef, ...]

    def subjects(self) -> tuple[str, ...]:
        return tuple(sorted({r.subject for r in self.recordings}))

    def tasks(self) -> tuple[str, ...]:
        return tuple(t for t in TASKS if any(r.task == t for r in self.recordings))

    def find(self, subject=None, session=None, condition=None, task=None) -> list[RecordingRef]:
        out = []
        for r in self.recordings:
            if subject is not None and r.subject != subject:
                continue
            if session is not None and r.session != session:
                continue
            if condition is not None and r.condition != condition:
                continue
            if task is not None and r.task != task:
                continue
            out.append(r)
        return out


def load_manifest(path: str | Path, check_paths: bool = True) -> RecordingCatalog:
    """Parse and validate a manifest.

    Collects every consistency violation before raising so one pass
    reports all problems: unknown enum values, duplicate kinds within
    a recording, duplicate paths, more than one normal take per
    (subject, session, task), clean takes with no sensor sibling, and
    (optionally) artifact files that do not exist on disk.
    """
    path = Path(path)
    root = path.parent
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc

    entries = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
        if not isinstance(obj, dict):
            raise ParseError(f"{path}:{lineno}: expected an object")
        missing = [k for k in _REQUIRED if k not in obj]
        if missing:
            raise ParseError(f"{path}:{lineno}: missing fields {missing}")
        if not isinstance(obj["take"], int):
            raise ParseError(f"{path}:{lineno}: take must be an integer")
        entries.append((lineno, obj))

    violations = []
    seen_paths = {}
    grouped: dict[tuple, dict] = {}
    for lineno, obj in entries:
        where = f"line {lineno}"
        if obj["session"] not in SESSIONS:
            violations.append(f"{where}: unknown session {obj['session']!r}")
        if obj["condition"] not in CONDITIONS:
            violations.append(f"{where}: unknown condition {obj['condition']!r}")
        if obj["task"] not in TASKS:
            violations.append(f"{where}: unknown task {obj['task']!r}")
        if obj["kind"] not in KINDS:
            violations.append(f"{where}: unknown kind {obj['kind']!r}")
        if obj["take"] < 1:
            violations.append(f"{where}: take must be >= 1, got {obj['take']}")
        rel = obj["path"]
        if rel in seen_paths:
            violations.append(f"{where}: path {rel!r} already used on line {seen_paths[rel]}")
        else:
            seen_paths[rel] = lineno
        full = root / rel
        if check_paths and not full.exists():
            violations.append(f"{where}: missing file {rel!r}")
        key = (obj["subject"], obj["session"], obj["condition"], obj["task"], obj["take"])
        group = grouped.setdefault(key, {"kinds": {}, "fps": None})
        if obj["kind"] in group["kinds"]:
            violations.append(f"{where}: duplicate kind {obj['kind']!r} for recording {key}")
        else:
            group["kinds"][obj["kind"]] = full
        if "fps" in obj and obj["fps"] is not None:
            fps = float(obj["fps"])
            if group["fps"] is not None and group["fps"] != fps:
                violations.append(f"{where}: conflicting fps for recording {key}")
            group["fps"] = fps

    normal_takes: dict[tuple, list[int]] = {}
    for (subject, session, condition, task, take) in grouped:
        if condition == "normal":
            normal_takes.setdefault((subject, session, task), []).append(take)
    for slot, takes in sorted(normal_takes.items()):
        if len(takes) > 1:
            violations.append(f"multiple normal takes {sorted(takes)} for {slot}")

    for (subject, session, condition, task, take) in sorted(grouped):
        if condition == "clean":
            sibling = (subject, session, "sensor", task, take)
            if sibling not in grouped:
                violations.append(
                    f"clean take {(subject, session, task, take)} has no sensor sibling"
                )

    if violations:
        raise ValidationError(violations)

    recordings = tuple(
        RecordingRef(
            subject=key[0],
            session=key[1],
            condition=key[2],
            task=key[3],
            take=key[4],
            artifacts=tuple(sorted(group["kinds"].items())),
            fps=group["fps"],
        )
        for key, group in sorted(grouped.items())
    )
    return RecordingCatalog(root=root, recordings=recordings)


def write_manifest(path: str | Path, rows: list[dict]) -> None:
    """Write manifest rows as JSON lines, sorted canonically.

    ``path`` entries must already be relative to the manifest's
    directory.  Sorting plus separators-free json keeps the output
    byte-stable across runs.
    """
    path = Path(path)
    def sort_key(row):
        return tuple(row.get(k) for k in _REQUIRED)
    lines = [
        json.dumps(row, sort_keys=True, separators=(",", ":"))
        for row in sorted(rows, key=sort_key)
    ]
    tmp = path.with_suffix(path.suffix + ".tmp")
    try:
        tmp.write_text("\n".join(lines) + "\n")
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
