import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from restoreval.errors import EmptySequence, ShapeMismatch, UnsupportedForm
from restoreval.lpips import (
    FramePairing,
    LayerWeights,
    lpips_frame,
    lpips_video,
    normalize_stack,
)
from restoreval.tensorio import FeatureStack, write_tensor


def stack(frame, **layers):
    return FeatureStack(frame, tuple(sorted(layers.items())))


def unit_stack(frame, vec, h=1, w=1):
    """Single layer whose every location holds the same channel vector."""
    vec = np.asarray(vec, dtype=np.float32)
    arr = np.tile(vec[:, None, None], (1, h, w))
    return stack(frame, lum=arr)


@given(
    arrays(
        np.float32,
        st.tuples(st.integers(1, 4), st.integers(1, 3), st.integers(1, 3)),
        elements=st.floats(-10, 10, width=32),
    )
)
def test_normalization_gives_unit_or_zero_vectors(arr):
    s = normalize_stack(stack(0, lum=arr))
    norms = np.linalg.norm(s.layers[0][1], axis=0)
    assert np.all((np.abs(norms - 1.0) < 1e-5) | (norms < 1e-5))


def test_identical_frames_score_zero():
    rng = np.random.default_rng(0)
    a = stack(0, lum=rng.random((4, 8, 8)).astype(np.float32))
    assert lpips_frame(a, a) == 0.0


def test_orthogonal_unit_vectors_hand_value():
    a = unit_stack(0, [1.0, 0.0])
    b = unit_stack(0, [0.0, 1.0])
    # normalized difference (1,-1): squared sum 2, one location
    assert lpips_frame(a, b) == pytest.approx(2.0, abs=1e-6)


def test_spatial_average_keeps_value():
    a = unit_stack(0, [1.0, 0.0], h=4, w=3)
    b = unit_stack(0, [0.0, 1.0], h=4, w=3)
    assert lpips_frame(a, b) == pytest.approx(2.0, abs=1e-6)


def test_layers_add():
    a1 = unit_stack(0, [1.0, 0.0])
    b1 = unit_stack(0, [0.0, 1.0])
    a2 = stack(0, lum=a1.layers[0][1], edge=a1.layers[0][1].copy())
    b2 = stack(0, lum=b1.layers[0][1], edge=b1.layers[0][1].copy())
    one_layer = lpips_frame(a1, b1)
    two_layers = lpips_frame(a2, b2)
    assert two_layers == pytest.approx(2.0 * one_layer, abs=1e-6)


def test_opposite_vectors_exceed_one():
    a = unit_stack(0, [1.0, 0.0])
    b = unit_stack(0, [-1.0, 0.0])
    assert lpips_frame(a, b) == pytest.approx(4.0, abs=1e-6)


def test_weights_scale_contributions():
    a = unit_stack(0, [1.0, 0.0])
    b = unit_stack(0, [0.0, 1.0])
    w = LayerWeights({"lum": np.array([0.5, 0.25])})
    # 0.5 * 1 + 0.25 * 1
    assert lpips_frame(a, b, w) == pytest.approx(0.75, abs=1e-6)


def test_weights_from_dir(tmp_path):
    write_tensor(tmp_path / "lum.ffr", np.array([0.5, 0.25], dtype=np.float32))
    w = LayerWeights.from_dir(tmp_path)
    a = unit_stack(0, [1.0, 0.0])
    b = unit_stack(0, [0.0, 1.0])
    assert lpips_frame(a, b, w) == pytest.approx(0.75, abs=1e-6)


def test_weight_length_checked():
    a = unit_stack(0, [1.0, 0.0])
    w = LayerWeights({"lum": np.array([1.0, 1.0, 1.0])})
    with pytest.raises(ShapeMismatch):
        lpips_frame(a, a, w)
    with pytest.raises(ShapeMismatch):
        LayerWeights({"lum": np.array([-1.0])})


def test_symmetry_is_exact():
    rng = np.random.default_rng(1)
    a = stack(0, lum=rng.random((3, 4, 4)).astype(np.float32))
    b = stack(0, lum=rng.random((3, 4, 4)).astype(np.float32))
    assert lpips_frame(a, b) == lpips_frame(b, a)


def test_layer_mismatch_rejected():
    a = stack(0, lum=np.ones((2, 2, 2), dtype=np.float32))
    b = stack(0, edge=np.ones((2, 2, 2), dtype=np.float32))
    with pytest.raises(ShapeMismatch):
        lpips_frame(a, b)
    c = stack(0, lum=np.ones((2, 3, 3), dtype=np.float32))
    with pytest.raises(ShapeMismatch):
        lpips_frame(a, c)


def make_sequence(count, seed):
    rng = np.random.default_rng(seed)
    return [stack(i, lum=rng.random((2, 3, 3)).astype(np.float32)) for i in range(count)]


def test_index_pairing_resamples_longer_side():
    a = make_sequence(10, 0)
    b = make_sequence(5, 1)
    summary = lpips_video(a, b, pairing=FramePairing(mode="index"))
    assert summary.count == 5
    # index pairing of equal-length sequences is the diagonal
    same = lpips_video(a, a, pairing=FramePairing(mode="index"))
    assert same.mean == 0.0 and same.count == 10


def test_all_pairs_counts_and_cap():
    a = make_sequence(3, 2)
    b = make_sequence(4, 3)
    full = lpips_video(a, b, pairing=FramePairing(mode="all_pairs", max_frames=64))
    assert full.count == 12
    capped = lpips_video(a, b, pairing=FramePairing(mode="all_pairs", max_frames=2, seed=5))
    assert capped.count == 4
    again = lpips_video(a, b, pairing=FramePairing(mode="all_pairs", max_frames=2, seed=5))
    assert capped.mean == again.mean


def test_video_summary_statistics():
    a = make_sequence(6, 4)
    b = make_sequence(6, 5)
    summary = lpips_video(a, b)
    per_frame = [lpips_frame(x, y) for x, y in zip(a, b)]
    assert summary.mean == pytest.approx(np.mean(per_frame))
    assert summary.std == pytest.approx(np.std(per_frame))


def test_video_contract_errors():
    a = make_sequence(2, 6)
    with pytest.raises(EmptySequence):
        lpips_video([], a)
    with pytest.raises(UnsupportedForm):
        lpips_video(a, a, pairing=FramePairing(mode="zigzag"))
