"""Alignment metrics over behavioral time series.

Two complementary views of similarity:

* Dynamic time warping with absolute-difference local cost and the
  classic (i-1,j), (i,j-1), (i-1,j-1) transitions.  Both endpoints are
  matched.  Reported raw and normalized by warping-path length.
* Mean absolute percentage error minimized over integer frame shifts
  inside a window, for signals that are aligned up to a clock offset.
  The denominator is floored at an epsilon so near-zero reference
  samples flag themselves through the floor instead of exploding.

The DTW recurrence is evaluated along anti-diagonals so whole stacks
of channel pairs vectorize through numpy; at the lengths produced by a
recording session this is fast enough without compiled extensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ChannelMismatch,
    EmptySeries,
    InsufficientOverlap,
    NonFiniteValue,
    UnsupportedForm,
)
from .series import TimeSeries

MAPE_EPS = 1e-2
DEFAULT_WINDOW_SECONDS = 20.0
DEFAULT_EXCLUDE = frozenset({"AU43"})


@dataclass
class DtwResult:
    total_cost: float
    path_length: int
    normalized_cost: float


def _as_signal(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise EmptySeries("empty signal")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue("signal contains non-finite values")
    return arr


def _cumulative_costs(costs: np.ndarray) -> np.ndarray:
    """Batched DTW tables: (B, n, m) local costs -> cumulative costs.

    Sweeps anti-diagonals; cells on diagonal k depend only on
    diagonals k-1 and k-2, so each sweep is one vectorized minimum
    over the batch.
    """
    b, n, m = costs.shape
    table = np.empty_like(costs)
    prev1 = np.full((b, n + 1), np.inf)
    prev2 = np.full((b, n + 1), np.inf)
    for k in range(n + m - 1):
        lo = max(0, k - m + 1)
        hi = min(k, n - 1)
        ii = np.arange(lo, hi + 1)
        jj = k - ii
        best = np.minimum(
            np.minimum(prev1[:, ii], prev1[:, ii + 1]),  # up, left
            prev2[:, ii],  # diagonal
        )
        vals = costs[:, ii, jj]
        if k != 0:
            vals = vals + best
        table[:, ii, jj] = vals
        prev2 = prev1
        prev1 = np.full((b, n + 1), np.inf)
        prev1[:, ii + 1] = vals
    return table


def _path_length(table: np.ndarray) -> int:
    """Backtrack one optimal path, preferring diagonal steps on ties."""
    n, m = table.shape
    i, j = n - 1, m - 1
    steps = 1
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag = table[i - 1, j - 1]
            up = table[i - 1, j]
            left = table[i, j - 1]
            if diag <= up and diag <= left:
                i -= 1
                j -= 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
        steps += 1
    return steps


def dtw(a, b) -> DtwResult:
    """Warping distance between two 1-D signals."""
    sa = _as_signal(a)
    sb = _as_signal(b)
    costs = np.abs(sa[:, None] - sb[None, :])[None]
    table = _cumulative_costs(costs)[0]
    total = float(table[-1, -1])
    length = _path_length(table)
    return DtwResult(total_cost=total, path_length=length, normalized_cost=total / length)


def dtw_many(pairs: list[tuple[np.ndarray, np.ndarray]]) -> list[DtwResult]:
    """DTW over many equal-length signal pairs in one vectorized sweep.

    Pairs whose lengths differ from the batch shape fall back to the
    single-pair routine.
    """
    if not pairs:
        return []
    shapes = {(len(a), len(b)) for a, b in pairs}
    if len(shapes) != 1:
        return [dtw(a, b) for a, b in pairs]
    stacked = np.stack(
        [np.abs(_as_signal(a)[:, None] - _as_signal(b)[None, :]) for a, b in pairs]
    )
    tables = _cumulative_costs(stacked)
    out = []
    for table in tables:
        total = float(table[-1, -1])
        length = _path_length(table)
        out.append(DtwResult(total, length, total / length))
    return out


def mape_at_shift(ref, other, shift: int, eps: float = MAPE_EPS) -> float:
    """Percentage error after sliding ``other`` by ``shift`` frames.

    Positive shift means ``other`` lags ``ref``: sample t of the
    reference is compared with sample t + shift of the other signal.
    Only the overlapping span contributes.
    """
    r = _as_signal(ref)
    o = _as_signal(other)
    lo_r = max(-shift, 0)
    lo_o = max(shift, 0)
    span = min(len(r) - lo_r, len(o) - lo_o)
    if span < 1:
        raise InsufficientOverlap(f"shift {shift} leaves no overlap")
    rs = r[lo_r : lo_r + span]
    os_ = o[lo_o : lo_o + span]
    denom = np.maximum(np.abs(rs), eps)
    return float(np.mean(np.abs(rs - os_) / denom))


@dataclass
class ShiftScanResult:
    best_score: float
    best_shift: int
    window: int
    evaluated: int


def mape_best_shift(
    ref,
    other,
    window_seconds: float = DEFAULT_WINDOW_SECONDS,
    fps: float = 30.0,
    eps: float = MAPE_EPS,
) -> ShiftScanResult:
    """Exhaustive MAPE minimization over shifts in [-W, W] frames.

    W = round(window_seconds * fps).  Shifts keeping less than half of
    the shorter signal overlapping are skipped; if that excludes every
    candidate the scan fails rather than report a score from scraps.
    Ties prefer the smaller magnitude shift, then the negative one.
    """
    r = _as_signal(ref)
    o = _as_signal(other)
    window = int(round(window_seconds * fps))
    min_overlap = (min(len(r), len(o)) + 1) // 2
    best = None
    evaluated = 0
    # Candidates ordered by the tie-break rule so a strict improvement
    # test yields the canonical winner.
    for shift in sorted(range(-window, window + 1), key=lambda s: (abs(s), s)):
        span = min(len(r) - max(-shift, 0), len(o) - max(shift, 0))
        if span < min_overlap or span < 1:
            continue
        score = mape_at_shift(r, o, shift, eps)
        evaluated += 1
        if best is None or score < best[0]:
            best = (score, shift)
    if best is None:
        raise InsufficientOverlap(
            f"no shift in [-{window}, {window}] keeps {min_overlap} samples overlapping"
        )
    return ShiftScanResult(
        best_score=best[0], best_shift=best[1], window=window, evaluated=evaluated
    )


@dataclass
class ChannelScores:
    """Per-channel scores and their cross-channel summary."""

    metric: str
    scores: dict[str, float]
    shifts: dict[str, int] = field(default_factory=dict)

    @property
    def mean(self) -> float:
        return float(np.mean(list(self.scores.values())))

    @property
    def std(self) -> float:
        return float(np.std(list(self.scores.values())))


def compare_multichannel(
    a: TimeSeries,
    b: TimeSeries,
    metric: str = "dtw",
    exclude: frozenset[str] = DEFAULT_EXCLUDE,
    window_seconds: float = DEFAULT_WINDOW_SECONDS,
    dtw_normalized: bool = True,
) -> ChannelScores:
    """Score every channel the two series share, minus exclusions.

    ``metric`` is ``dtw`` or ``mape``.  Channels are matched by name;
    AU43 (blink) is excluded by default because blinking is
    uninstructed and uncorrelated across takes.
    """
    shared = [c for c in a.channel_names if c in b.channel_names and c not in exclude]
    if not shared:
        raise ChannelMismatch(
            f"no shared channels after excluding {sorted(exclude)}"
        )
    scores: dict[str, float] = {}
    shifts: dict[str, int] = {}
    if metric == "dtw":
        pairs = [(a.channel(c), b.channel(c)) for c in shared]
        for c, res in zip(shared, dtw_many(pairs)):
            scores[c] = res.normalized_cost if dtw_normalized else res.total_cost
    elif metric == "mape":
        for c in shared:
            res = mape_best_shift(
                a.channel(c), b.channel(c), window_seconds=window_seconds, fps=a.fps
            )
            scores[c] = res.best_score
            shifts[c] = res.best_shift
    else:
        raise UnsupportedForm(f"unknown metric {metric!r}")
    return ChannelScores(metric=metric, scores=scores, shifts=shifts)
