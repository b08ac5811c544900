import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from restoreval.errors import (
    EmptySeries,
    HeaderMismatch,
    NonFiniteValue,
    NonMonotonicTime,
    RaggedRow,
    SeriesFormatError,
)
from restoreval.series import TimeSeries, read_series_csv, write_series_csv


def write_text(tmp_path, text):
    p = tmp_path / "s.csv"
    p.write_text(text)
    return p


def test_golden_parse(tmp_path):
    p = write_text(
        tmp_path,
        "time_s,AU01,AU12\n"
        "0.0,0.1,0.9\n"
        "0.033333,0.2,0.8\n"
        "0.066667,0.3,0.7\n"
        "0.1,0.4,0.6\n",
    )
    ts = read_series_csv(p)
    assert ts.channel_names == ("AU01", "AU12")
    assert ts.frame_count == 4
    assert ts.fps == 30.0
    np.testing.assert_allclose(ts.channel("AU12"), [0.9, 0.8, 0.7, 0.6])


def test_fps_inference_tolerates_dropped_frame(tmp_path):
    # One missing sample doubles a single delta; the median ignores it.
    times = [0.0, 1 / 25, 2 / 25, 4 / 25, 5 / 25]
    body = "".join(f"{t},{i}\n" for i, t in enumerate(times))
    ts = read_series_csv(write_text(tmp_path, "time_s,x\n" + body))
    assert ts.fps == 25.0


def test_single_row_uses_default_fps(tmp_path):
    ts = read_series_csv(write_text(tmp_path, "time_s,x\n0.0,1.0\n"), default_fps=24.0)
    assert ts.fps == 24.0
    assert ts.frame_count == 1


def test_header_must_start_with_time(tmp_path):
    with pytest.raises(HeaderMismatch):
        read_series_csv(write_text(tmp_path, "t,x\n0,1\n"))


def test_header_needs_channels(tmp_path):
    with pytest.raises(HeaderMismatch):
        read_series_csv(write_text(tmp_path, "time_s\n0\n"))


def test_duplicate_channels_rejected(tmp_path):
    with pytest.raises(HeaderMismatch):
        read_series_csv(write_text(tmp_path, "time_s,x,x\n0,1,2\n"))


def test_ragged_row_reports_line(tmp_path):
    with pytest.raises(RaggedRow, match=":3:"):
        read_series_csv(write_text(tmp_path, "time_s,x\n0.0,1\n0.1,2,9\n"))


def test_non_monotonic_time(tmp_path):
    with pytest.raises(NonMonotonicTime):
        read_series_csv(write_text(tmp_path, "time_s,x\n0.0,1\n0.2,2\n0.1,3\n"))
    with pytest.raises(NonMonotonicTime):
        read_series_csv(write_text(tmp_path, "time_s,x\n0.0,1\n0.0,2\n"))


def test_unparseable_value(tmp_path):
    with pytest.raises(SeriesFormatError):
        read_series_csv(write_text(tmp_path, "time_s,x\n0.0,oops\n"))


def test_nan_rejected(tmp_path):
    with pytest.raises(NonFiniteValue):
        read_series_csv(write_text(tmp_path, "time_s,x\n0.0,nan\n0.1,1\n"))
    with pytest.raises(NonFiniteValue):
        read_series_csv(write_text(tmp_path, "time_s,x\n0.0,1\n0.1,inf\n"))


def test_empty_rejected(tmp_path):
    with pytest.raises(EmptySeries):
        read_series_csv(write_text(tmp_path, ""))
    with pytest.raises(EmptySeries):
        read_series_csv(write_text(tmp_path, "time_s,x\n"))


def test_series_validation():
    with pytest.raises(SeriesFormatError):
        TimeSeries(fps=0.0, channel_names=("x",), values=np.ones((3, 1)))
    with pytest.raises(HeaderMismatch):
        TimeSeries(fps=30.0, channel_names=("x", "x"), values=np.ones((3, 2)))
    with pytest.raises(SeriesFormatError):
        TimeSeries(fps=30.0, channel_names=("x",), values=np.ones((3, 2)))
    ts = TimeSeries(fps=30.0, channel_names=("x",), values=np.arange(3.0))
    assert ts.values.shape == (3, 1)


@given(
    arrays(
        np.float64,
        st.tuples(st.integers(2, 20), st.integers(1, 4)),
        elements=st.floats(-1e3, 1e3),
    ),
    st.sampled_from([24.0, 25.0, 30.0, 60.0]),
)
def test_round_trip_exact(tmp_path_factory, values, fps):
    p = tmp_path_factory.mktemp("rt") / "s.csv"
    names = tuple(f"c{i}" for i in range(values.shape[1]))
    write_series_csv(p, TimeSeries(fps=fps, channel_names=names, values=values))
    back = read_series_csv(p)
    assert back.channel_names == names
    assert back.fps == fps
    np.testing.assert_array_equal(back.values, values)
