import numpy as np
import pytest

from bridge.errors import AnalyzerUnavailable, DecodeFailure
from bridge.export import export_recordings
from bridge.manifest import read_manifest, select, write_manifest
from bridge.series import TIME_COLUMN
from bridge.tensorio import read_tensor, write_tensor


@pytest.fixture(scope="module")
def exported(micro_study, tmp_path_factory):
    out_root = tmp_path_factory.mktemp("exported")
    manifest = export_recordings(micro_study, out_root)
    return micro_study, out_root, manifest


def test_every_frame_recording_is_extracted(exported):
    source, _, manifest = exported
    frame_rows = select(read_manifest(source), kind="frames")
    out_rows = read_manifest(manifest)
    assert len(out_rows) == 4 * len(frame_rows)
    for kind in ("embed", "feat", "au", "emotion"):
        rows = select(out_rows, kind=kind)
        assert len(rows) == len(frame_rows)
        assert {r.key for r in rows} == {r.key for r in frame_rows}


def test_embeddings_are_one_row_per_frame(exported):
    _, out_root, manifest = exported
    row = select(read_manifest(manifest), kind="embed")[0]
    emb = read_tensor(row.path)
    assert emb.shape == (8, 2048)


def test_stacks_live_next_to_embeddings(exported):
    _, _, manifest = exported
    row = select(read_manifest(manifest), kind="feat")[0]
    c1 = read_tensor(row.path / "c1.ffr")
    c2 = read_tensor(row.path / "c2.ffr")
    assert c1.shape == (8, 16, 32, 32)
    assert c2.shape == (8, 32, 16, 16)


def test_series_cover_every_frame_at_source_fps(exported):
    _, _, manifest = exported
    rows = read_manifest(manifest)
    au = select(rows, kind="au")[0]
    lines = au.path.read_text().splitlines()
    header = lines[0].split(",")
    assert header[0] == TIME_COLUMN
    assert len(header) == 1 + 20
    assert len(lines) == 1 + 8
    assert au.fps == 30.0
    emotion = select(rows, kind="emotion")[0]
    header = emotion.path.read_text().splitlines()[0].split(",")
    assert len(header) == 1 + 8


def test_identity_fields_are_carried_over(exported):
    source, out_root, manifest = exported
    src = select(read_manifest(source), kind="frames")
    for row in select(read_manifest(manifest), kind="au"):
        assert any(s.key == row.key for s in src)
        rel = row.path.relative_to(out_root)
        assert rel.parts[0] == row.subject
        assert rel.parts[1] == row.session


def test_narrow_analyzer_export(micro_study, tmp_path):
    manifest = export_recordings(micro_study, tmp_path, au_analyzer="au_jaanet")
    row = select(read_manifest(manifest), kind="au")[0]
    header = row.path.read_text().splitlines()[0].split(",")
    assert len(header) == 1 + 12


def test_unknown_au_analyzer_raises(micro_study, tmp_path):
    with pytest.raises(AnalyzerUnavailable):
        export_recordings(micro_study, tmp_path, au_analyzer="emotion")


def test_manifest_without_frames_raises(tmp_path):
    write_manifest(
        tmp_path / "manifest.jsonl",
        [
            {
                "subject": "p01", "session": "S1", "condition": "normal",
                "task": "schaede", "take": 1, "kind": "embed",
                "path": "embed.ffr", "fps": None,
            }
        ],
    )
    with pytest.raises(DecodeFailure):
        export_recordings(tmp_path / "manifest.jsonl", tmp_path / "out")


def test_default_fps_fills_missing_field(tmp_path):
    frames = np.random.default_rng(0).uniform(0, 1, (4, 32, 32)).astype(np.float32)
    write_tensor(tmp_path / "frames.ffr", frames)
    write_manifest(
        tmp_path / "manifest.jsonl",
        [
            {
                "subject": "p01", "session": "S1", "condition": "normal",
                "task": "schaede", "take": 1, "kind": "frames",
                "path": "frames.ffr", "fps": None,
            }
        ],
    )
    manifest = export_recordings(
        tmp_path / "manifest.jsonl", tmp_path / "out", default_fps=25.0
    )
    rows = read_manifest(manifest)
    assert {r.fps for r in rows} == {25.0}
    au = select(rows, kind="au")[0]
    second = au.path.read_text().splitlines()[2]
    assert second.split(",")[0] == repr(1 / 25.0)
