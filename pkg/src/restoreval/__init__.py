"""Restoration evaluation toolkit.

Quantifies how faithfully facial behavior was reconstructed after
occlusion removal, using distribution distances over frame embeddings
(Frechet), perceptual distances over activation stacks, and alignment
metrics over behavioral time series (DTW, shift-searched MAPE), all
wired into a session-pairing protocol that renders mean +/- std
tables.
"""

from .catalog import RecordingCatalog, RecordingRef, load_manifest
from .frechet import (
    BatchPolicy,
    FidResult,
    GaussianSummary,
    estimate_gaussian,
    fid_between_sets,
    frechet_exact,
    frechet_lowrank,
)
from .lpips import FramePairing, LayerWeights, lpips_frame, lpips_video
from .plan import (
    ComparisonJob,
    ResultTable,
    RunConfig,
    ScoreRecord,
    aggregate,
    build_pairings,
    render_table,
    run_plan,
    write_report,
)
from .series import TimeSeries, read_series_csv, write_series_csv
from .seriesmetrics import (
    ChannelScores,
    DtwResult,
    compare_multichannel,
    dtw,
    mape_at_shift,
    mape_best_shift,
)
from .tensorio import (
    FeatureMatrix,
    FeatureStack,
    load_feature_matrix,
    load_stack_sequence,
    read_tensor,
    write_tensor,
)

__version__ = "0.1.0"

__all__ = [
    "BatchPolicy",
    "ChannelScores",
    "ComparisonJob",
    "DtwResult",
    "FeatureMatrix",
    "FeatureStack",
    "FidResult",
    "FramePairing",
    "GaussianSummary",
    "LayerWeights",
    "RecordingCatalog",
    "RecordingRef",
    "ResultTable",
    "RunConfig",
    "ScoreRecord",
    "TimeSeries",
    "aggregate",
    "build_pairings",
    "compare_multichannel",
    "dtw",
    "estimate_gaussian",
    "fid_between_sets",
    "frechet_exact",
    "frechet_lowrank",
    "load_feature_matrix",
    "load_manifest",
    "load_stack_sequence",
    "lpips_frame",
    "lpips_video",
    "mape_at_shift",
    "mape_best_shift",
    "read_series_csv",
    "read_tensor",
    "render_table",
    "run_plan",
    "write_report",
    "write_series_csv",
    "write_tensor",
    "__version__",
]
