import json

import numpy as np
import pytest

from bridge.cli import main
from bridge.cyclegan import TrainConfig, build_model_pair, save_model
from bridge.tensorio import read_tensor, write_tensor

TINY = dict(
    image_size=16, load_size=18, base_channels=4, disc_channels=4, resnet_blocks=1
)


@pytest.fixture()
def frames_file(tmp_path, faces):
    path = tmp_path / "frames.ffr"
    write_tensor(path, faces([0.3, 0.5, 0.7], [0.6, 0.5, 0.4], noise_sd=0.01))
    return path


def test_extract_writes_embeddings(tmp_path, frames_file):
    embed = tmp_path / "embed.ffr"
    assert main(["extract", "--frames", str(frames_file), "--embed-out", str(embed)]) == 0
    assert read_tensor(embed).shape == (3, 2048)


def test_extract_with_stacks(tmp_path, frames_file):
    embed = tmp_path / "embed.ffr"
    stacks = tmp_path / "feat"
    code = main(
        [
            "extract", "--frames", str(frames_file),
            "--embed-out", str(embed), "--stacks-out", str(stacks),
        ]
    )
    assert code == 0
    assert read_tensor(stacks / "c1.ffr").shape == (3, 16, 32, 32)
    assert read_tensor(stacks / "c2.ffr").shape == (3, 32, 16, 16)


def test_extract_with_crop(tmp_path, frames_file):
    embed = tmp_path / "embed.ffr"
    code = main(
        [
            "extract", "--frames", str(frames_file),
            "--embed-out", str(embed), "--crop", "0,0,32,32",
        ]
    )
    assert code == 0
    assert read_tensor(embed).shape == (3, 2048)


@pytest.mark.parametrize("crop", ["1,2,3", "a,b,c,d", "0,0,100,100"])
def test_bad_crop_is_an_input_error(tmp_path, frames_file, crop, capsys):
    code = main(
        [
            "extract", "--frames", str(frames_file),
            "--embed-out", str(tmp_path / "e.ffr"), "--crop", crop,
        ]
    )
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_unknown_backbone_is_an_input_error(tmp_path, frames_file, capsys):
    code = main(
        [
            "extract", "--frames", str(frames_file),
            "--embed-out", str(tmp_path / "e.ffr"), "--backbone", "vgg",
        ]
    )
    assert code == 1
    assert "BackboneUnavailable" in capsys.readouterr().err


def test_series_writes_analyzer_csv(tmp_path, frames_file):
    out = tmp_path / "au.csv"
    code = main(
        ["series", "--frames", str(frames_file), "--analyzer", "au_rdf",
         "--out", str(out), "--fps", "25"]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("time_s,AU01,")
    assert len(lines) == 4
    assert lines[2].split(",")[0] == repr(1 / 25.0)


def test_series_unknown_analyzer(tmp_path, frames_file, capsys):
    code = main(
        ["series", "--frames", str(frames_file), "--analyzer", "gaze",
         "--out", str(tmp_path / "s.csv")]
    )
    assert code == 1
    assert "AnalyzerUnavailable" in capsys.readouterr().err


def test_weights_exports_per_layer_tensors(tmp_path):
    out = tmp_path / "weights"
    assert main(["weights", "--out", str(out)]) == 0
    assert read_tensor(out / "c1.ffr").shape == (16,)
    assert read_tensor(out / "c2.ffr").shape == (32,)


def test_translate_round_trip(tmp_path, faces):
    model_dir = tmp_path / "model"
    save_model(build_model_pair(TrainConfig(**TINY)), model_dir)
    frames = tmp_path / "frames.ffr"
    write_tensor(frames, faces([0.4, 0.6], [0.5, 0.5], size=16))
    out = tmp_path / "translated.ffr"
    code = main(
        ["translate", "--model", str(model_dir), "--frames", str(frames),
         "--out", str(out), "--direction", "s2n"]
    )
    assert code == 0
    assert read_tensor(out).shape == (2, 16, 16)


def test_translate_missing_model(tmp_path, frames_file, capsys):
    code = main(
        ["translate", "--model", str(tmp_path / "absent"),
         "--frames", str(frames_file), "--out", str(tmp_path / "o.ffr")]
    )
    assert code == 1
    assert "DecodeFailure" in capsys.readouterr().err


def test_translate_size_mismatch(tmp_path, frames_file, capsys):
    model_dir = tmp_path / "model"
    save_model(build_model_pair(TrainConfig(**TINY)), model_dir)
    code = main(
        ["translate", "--model", str(model_dir), "--frames", str(frames_file),
         "--out", str(tmp_path / "o.ffr")]
    )
    assert code == 1
    assert "ShapeMismatch" in capsys.readouterr().err


def test_train_writes_model_and_log(micro_study, tmp_path, capsys):
    out = tmp_path / "model"
    code = main(
        ["train", "--manifest", str(micro_study), "--subject", "p01",
         "--out", str(out), "--epochs", "1", "--image-size", "16",
         "--load-size", "18", "--sample-fraction", "0.5", "--seed", "1"]
    )
    assert code == 0
    assert "after 1 epochs" in capsys.readouterr().out
    for name in ("g_s2n.pt", "g_n2s.pt", "d_n.pt", "d_s.pt", "config.json"):
        assert (out / name).exists()
    log_lines = (out / "training_log.jsonl").read_text().splitlines()
    assert len(log_lines) == 1
    record = json.loads(log_lines[0])
    assert record["epoch"] == 0
    assert record["cycle_n"] > 0.0


def test_train_missing_condition(tmp_path, frames_file, capsys):
    from bridge.manifest import write_manifest

    write_manifest(
        tmp_path / "manifest.jsonl",
        [
            {
                "subject": "p01", "session": "S1", "condition": "normal",
                "task": "schaede", "take": 1, "kind": "frames",
                "path": "frames.ffr", "fps": 30.0,
            }
        ],
    )
    code = main(
        ["train", "--manifest", str(tmp_path / "manifest.jsonl"),
         "--subject", "p01", "--out", str(tmp_path / "model")]
    )
    assert code == 1
    assert "sensor" in capsys.readouterr().err


def test_export_builds_parallel_tree(micro_study, tmp_path):
    out = tmp_path / "exported"
    code = main(["export", "--manifest", str(micro_study), "--out", str(out)])
    assert code == 0
    rows = (out / "manifest.jsonl").read_text().splitlines()
    assert len(rows) == 4 * 18
    sample = out / "p01" / "S1" / "normal" / "schaede" / "t1"
    for name in ("embed.ffr", "au.csv", "emotion.csv"):
        assert (sample / name).exists()
    assert (sample / "feat" / "c1.ffr").exists()


def test_usage_errors_exit_two():
    with pytest.raises(SystemExit) as err:
        main(["extract"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(["unknown-command"])
    assert err.value.code == 2
