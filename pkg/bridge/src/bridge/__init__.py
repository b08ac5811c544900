"""Feature extraction and toy occlusion removal for face frame tensors.

The bridge sits between raw frame tensors and the restoration
evaluator: it exports embeddings, activation stacks and AU/emotion
series in the evaluator's file formats, and it trains the unpaired
translation model whose outputs the evaluator scores.  Nothing here
imports the evaluator; the two packages meet only at files.
"""

from .analyzers import (
    AU_JAANET_CHANNELS,
    AU_RDF_CHANNELS,
    EMOTION_CHANNELS,
    analyze_frames,
    analyzer_channels,
    measure_trace,
)
from .backbone import (
    WIDTH,
    ToyBackbone,
    embed_frames,
    featurize_frames,
    layer_weights,
    load_backbone,
)
from .cyclegan import (
    TrainConfig,
    TranslationModelPair,
    build_model_pair,
    load_model,
    lr_factor,
    save_model,
    train_removal_model,
    translate_video,
)
from .data import gather_condition_frames, sample_indices, train_val_split
from .errors import (
    AnalyzerUnavailable,
    BackboneUnavailable,
    BridgeError,
    DecodeFailure,
    DivergenceDetected,
    ShapeMismatch,
)
from .export import export_recordings
from .manifest import ManifestRow, read_manifest, select, write_manifest
from .series import write_series_csv
from .tensorio import (
    crop_frames,
    load_frames,
    read_tensor,
    write_stack_sequence,
    write_tensor,
)

__version__ = "0.1.0"

__all__ = [
    "AU_JAANET_CHANNELS",
    "AU_RDF_CHANNELS",
    "AnalyzerUnavailable",
    "BackboneUnavailable",
    "BridgeError",
    "DecodeFailure",
    "DivergenceDetected",
    "EMOTION_CHANNELS",
    "ManifestRow",
    "ShapeMismatch",
    "ToyBackbone",
    "TrainConfig",
    "TranslationModelPair",
    "WIDTH",
    "analyze_frames",
    "analyzer_channels",
    "build_model_pair",
    "crop_frames",
    "embed_frames",
    "export_recordings",
    "featurize_frames",
    "gather_condition_frames",
    "layer_weights",
    "load_backbone",
    "load_frames",
    "load_model",
    "lr_factor",
    "measure_trace",
    "read_manifest",
    "read_tensor",
    "sample_indices",
    "save_model",
    "select",
    "train_removal_model",
    "train_val_split",
    "translate_video",
    "write_manifest",
    "write_series_csv",
    "write_stack_sequence",
    "write_tensor",
]
