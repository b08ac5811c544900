"""Frechet distance between Gaussian summaries of embedding sets.

For Gaussians (m1, C1) and (m2, C2) the squared distance is

    ||m1 - m2||^2 + tr(C1) + tr(C2) - 2 tr((C1^1/2 C2 C1^1/2)^1/2)

The trace term is evaluated through the symmetric product
C1^1/2 C2 C1^1/2, never through sqrtm(C1 @ C2): the nonsymmetric
product has complex eigenvalue noise that symmetric eigensolvers
avoid, and eigh is both faster and stable here.

Two evaluation paths share the same formula:

* exact      eigendecomposition of the d x d covariances.
* low-rank   when N << d the trace term equals the trace of an N x N
             matrix built from centered factors, so the d x d
             covariances are never materialized.  Writing C = F F^T / (N-1)
             with F the d x N centered factor,
             tr((C1^1/2 C2 C1^1/2)^1/2) = sum sqrt(eig(M)) where
             M = (F1^T F2)(F2^T F1) / ((N1-1)(N2-1)) is N1 x N1 and PSD.

Sample covariances use the N-1 divisor throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    IndefiniteCovariance,
    InsufficientFrames,
    TooFewSamples,
)
from .tensorio import FeatureMatrix

# Eigenvalues this far below zero (relative to the largest) are treated
# as roundoff; anything worse means the input was not a covariance.
_EIG_REL_TOL = 1e-8
# A squared distance may come out slightly negative through cancellation.
_RESULT_TOL = 1e-6


@dataclass
class GaussianSummary:
    """First and second moments of an embedding set.

    Either ``cov`` (d x d) or ``factor`` (d x N centered samples,
    unscaled) is stored; the factor form enables the low-rank path.
    """

    mean: np.ndarray
    sample_count: int
    cov: np.ndarray | None = None
    factor: np.ndarray | None = None

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        if self.mean.ndim != 1:
            raise DimensionMismatch(f"mean must be 1-D, got {self.mean.ndim}-D")
        if self.cov is None and self.factor is None:
            raise TooFewSamples("summary needs a covariance or a sample factor")
        if self.cov is not None:
            self.cov = np.asarray(self.cov, dtype=np.float64)
            if self.cov.shape != (self.dim, self.dim):
                raise DimensionMismatch(
                    f"covariance shape {self.cov.shape} does not match dim {self.dim}"
                )
        if self.factor is not None:
            self.factor = np.asarray(self.factor, dtype=np.float64)
            if self.factor.ndim != 2 or self.factor.shape[0] != self.dim:
                raise DimensionMismatch(
                    f"factor shape {self.factor.shape} does not match dim {self.dim}"
                )

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def covariance(self) -> np.ndarray:
        if self.cov is not None:
            return self.cov
        return self.factor @ self.factor.T / (self.sample_count - 1)


def estimate_gaussian(features: FeatureMatrix | np.ndarray, keep_factor: bool = False) -> GaussianSummary:
    """Fit mean and covariance to an (N, d) embedding matrix.

    Requires N >= 2 so the N-1 covariance divisor is defined.  With
    ``keep_factor`` the centered samples are retained instead of the
    d x d covariance, for the low-rank distance path.
    """
    values = features.values if isinstance(features, FeatureMatrix) else np.asarray(features)
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise DimensionMismatch(f"expected (N, d) features, got shape {values.shape}")
    n = values.shape[0]
    if n < 2:
        raise TooFewSamples(f"need at least 2 samples for a covariance, got {n}")
    mean = values.mean(axis=0)
    centered = values - mean
    if keep_factor:
        return GaussianSummary(mean=mean, sample_count=n, factor=centered.T)
    cov = centered.T @ centered / (n - 1)
    return GaussianSummary(mean=mean, sample_count=n, cov=cov)


def _clip_spectrum(eigvals: np.ndarray, context: str) -> np.ndarray:
    """Zero small negative eigenvalues, reject genuinely indefinite input."""
    scale = float(eigvals.max(initial=0.0))
    floor = -_EIG_REL_TOL * max(scale, 1.0)
    worst = float(eigvals.min(initial=0.0))
    if worst < floor:
        raise IndefiniteCovariance(
            f"{context}: eigenvalue {worst:.3e} below tolerance {floor:.3e}"
        )
    return np.clip(eigvals, 0.0, None)


def _finalize(squared: float) -> float:
    if squared < -_RESULT_TOL:
        raise IndefiniteCovariance(f"squared distance {squared:.3e} is negative")
    return max(squared, 0.0)


def frechet_exact(g1: GaussianSummary, g2: GaussianSummary) -> float:
    """Distance via full eigendecomposition of the covariances."""
    if g1.dim != g2.dim:
        raise DimensionMismatch(f"dim {g1.dim} vs {g2.dim}")
    c1 = g1.covariance()
    c2 = g2.covariance()
    # Identity deserves an exact zero, not an eigensolver's roundoff.
    if np.array_equal(g1.mean, g2.mean) and np.array_equal(c1, c2):
        return 0.0
    diff = g1.mean - g2.mean
    vals1, vecs1 = np.linalg.eigh(c1)
    vals1 = _clip_spectrum(vals1, "first covariance")
    root1 = (vecs1 * np.sqrt(vals1)) @ vecs1.T
    inner = root1 @ c2 @ root1
    inner = (inner + inner.T) / 2.0
    cross = _clip_spectrum(np.linalg.eigvalsh(inner), "cross term")
    squared = (
        float(diff @ diff)
        + float(np.trace(c1))
        + float(np.trace(c2))
        - 2.0 * float(np.sqrt(cross).sum())
    )
    return _finalize(squared)


def frechet_lowrank(g1: GaussianSummary, g2: GaussianSummary) -> float:
    """Distance via the N x N factor form; never builds a d x d matrix.

    Exact in infinite precision whenever N <= d; in practice it agrees
    with the exact path to a relative difference around 1e-3 at
    d = 2048, N = 128.
    """
    if g1.dim != g2.dim:
        raise DimensionMismatch(f"dim {g1.dim} vs {g2.dim}")
    if g1.factor is None or g2.factor is None:
        raise TooFewSamples("low-rank path needs factor-form summaries")
    f1 = g1.factor
    f2 = g2.factor
    if np.array_equal(g1.mean, g2.mean) and np.array_equal(f1, f2):
        return 0.0
    scale = (g1.sample_count - 1) * (g2.sample_count - 1)
    cross = f1.T @ f2
    m = cross @ cross.T / scale
    m = (m + m.T) / 2.0
    eig = _clip_spectrum(np.linalg.eigvalsh(m), "factor cross term")
    trace_sqrt = float(np.sqrt(eig).sum())
    diff = g1.mean - g2.mean
    tr1 = float((f1 * f1).sum()) / (g1.sample_count - 1)
    tr2 = float((f2 * f2).sum()) / (g2.sample_count - 1)
    squared = float(diff @ diff) + tr1 + tr2 - 2.0 * trace_sqrt
    return _finalize(squared)


@dataclass
class BatchPolicy:
    """How many frames to draw from each side, and what to do short.

    Evaluation uses a fixed-size seeded subsample so set-level scores
    compare like against like.  ``allow_all`` lets short recordings
    fall back to every frame instead of failing.
    """

    batch_size: int = 128
    allow_all: bool = True
    seed: int = 0


@dataclass
class FidResult:
    """Distance plus the subsampling provenance that produced it."""

    value: float
    seed: int
    batch_size: int
    left_total: int
    right_total: int
    left_used: int
    right_used: int


def _select(values: np.ndarray, policy: BatchPolicy, side: str) -> np.ndarray:
    n = values.shape[0]
    if n >= policy.batch_size:
        # Independent generator per side: identical inputs draw
        # identical row indices, so a set compared to itself is 0.
        rng = np.random.default_rng(policy.seed)
        idx = np.sort(rng.choice(n, size=policy.batch_size, replace=False))
        return values[idx]
    if not policy.allow_all:
        raise InsufficientFrames(
            f"{side} set has {n} frames, policy requires {policy.batch_size}"
        )
    return values


def fid_between_sets(
    a: FeatureMatrix | np.ndarray,
    b: FeatureMatrix | np.ndarray,
    batch: BatchPolicy | None = None,
) -> FidResult:
    """Frechet distance between two embedding sets under a batch policy.

    Subsampling without replacement is seeded and sorted, so results
    are reproducible and a set against itself scores exactly 0.  The
    low-rank path is used when the batch is smaller than the feature
    dimension, the exact path otherwise.
    """
    policy = batch if batch is not None else BatchPolicy()
    va = a.values if isinstance(a, FeatureMatrix) else np.asarray(a)
    vb = b.values if isinstance(b, FeatureMatrix) else np.asarray(b)
    if va.ndim != 2 or vb.ndim != 2:
        raise DimensionMismatch("embedding sets must be 2-D")
    if va.shape[1] != vb.shape[1]:
        raise DimensionMismatch(f"dim {va.shape[1]} vs {vb.shape[1]}")
    sa = _select(va, policy, "left")
    sb = _select(vb, policy, "right")
    lowrank = max(sa.shape[0], sb.shape[0]) < sa.shape[1]
    if lowrank:
        g1 = estimate_gaussian(sa, keep_factor=True)
        g2 = estimate_gaussian(sb, keep_factor=True)
        value = frechet_lowrank(g1, g2)
    else:
        value = frechet_exact(estimate_gaussian(sa), estimate_gaussian(sb))
    return FidResult(
        value=value,
        seed=policy.seed,
        batch_size=policy.batch_size,
        left_total=va.shape[0],
        right_total=vb.shape[0],
        left_used=sa.shape[0],
        right_used=sb.shape[0],
    )
