import json

import pytest

from bridge.errors import DecodeFailure
from bridge.manifest import ManifestRow, read_manifest, select, write_manifest


def _row(**overrides):
    base = {
        "subject": "p01", "session": "S1", "condition": "normal",
        "task": "schaede", "take": 1, "kind": "frames",
        "path": "p01/S1/normal/schaede/t1/frames.ffr", "fps": 30.0,
    }
    base.update(overrides)
    return base


def test_round_trip(tmp_path):
    p = tmp_path / "manifest.jsonl"
    write_manifest(p, [_row(), _row(condition="sensor", take=2)])
    rows = read_manifest(p)
    assert len(rows) == 2
    assert rows[0].subject == "p01"
    assert rows[0].take == 1
    assert rows[0].fps == 30.0
    assert rows[0].path == (tmp_path / "p01/S1/normal/schaede/t1/frames.ffr").resolve()


def test_write_sorts_rows_and_keys(tmp_path):
    p = tmp_path / "manifest.jsonl"
    write_manifest(p, [_row(condition="sensor"), _row(condition="normal")])
    lines = p.read_text().splitlines()
    assert '"condition":"normal"' in lines[0]
    assert '"condition":"sensor"' in lines[1]
    parsed = json.loads(lines[0])
    assert list(parsed) == sorted(parsed)


def test_write_is_reproducible(tmp_path):
    rows = [_row(take=t, condition=c) for t in (2, 1) for c in ("sensor", "clean")]
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_manifest(a, rows)
    write_manifest(b, list(reversed(rows)))
    assert a.read_text() == b.read_text()


def test_read_skips_blank_lines(tmp_path):
    p = tmp_path / "manifest.jsonl"
    p.write_text(json.dumps(_row()) + "\n\n" + json.dumps(_row(take=2)) + "\n")
    assert [r.take for r in read_manifest(p)] == [1, 2]


def test_read_missing_file(tmp_path):
    with pytest.raises(DecodeFailure):
        read_manifest(tmp_path / "absent.jsonl")


def test_read_rejects_bad_json(tmp_path):
    p = tmp_path / "manifest.jsonl"
    p.write_text("{not json\n")
    with pytest.raises(DecodeFailure) as err:
        read_manifest(p)
    assert ":1:" in str(err.value)


def test_read_rejects_non_object_line(tmp_path):
    p = tmp_path / "manifest.jsonl"
    p.write_text("[1, 2]\n")
    with pytest.raises(DecodeFailure):
        read_manifest(p)


def test_read_rejects_missing_fields(tmp_path):
    p = tmp_path / "manifest.jsonl"
    row = _row()
    del row["task"]
    p.write_text(json.dumps(row) + "\n")
    with pytest.raises(DecodeFailure) as err:
        read_manifest(p)
    assert "task" in str(err.value)


def test_read_rejects_non_numeric_take(tmp_path):
    p = tmp_path / "manifest.jsonl"
    p.write_text(json.dumps(_row(take="one")) + "\n")
    with pytest.raises(DecodeFailure):
        read_manifest(p)


def test_fps_is_optional(tmp_path):
    p = tmp_path / "manifest.jsonl"
    row = _row()
    del row["fps"]
    p.write_text(json.dumps(row) + "\n")
    assert read_manifest(p)[0].fps is None


def test_select_filters_each_field(tmp_path):
    p = tmp_path / "manifest.jsonl"
    write_manifest(
        p,
        [
            _row(),
            _row(condition="sensor", kind="embed"),
            _row(subject="p02", session="S2", task="emotion", take=3),
        ],
    )
    rows = read_manifest(p)
    assert len(select(rows, kind="frames")) == 2
    assert len(select(rows, subject="p02")) == 1
    assert len(select(rows, session="S2")) == 1
    assert len(select(rows, condition="sensor")) == 1
    assert len(select(rows, task="emotion")) == 1
    assert len(select(rows, take=3)) == 1
    assert select(rows) == rows


def test_select_preserves_order(tmp_path):
    p = tmp_path / "manifest.jsonl"
    write_manifest(p, [_row(take=t) for t in (1, 2, 3)])
    rows = read_manifest(p)
    assert [r.take for r in select(rows, kind="frames")] == [1, 2, 3]


def test_key_groups_recording_identity():
    row = ManifestRow(
        subject="p01", session="S1", condition="clean", task="sentence",
        take=2, kind="au", path=None, fps=None,
    )
    assert row.key == ("p01", "S1", "clean", "sentence", 2)
