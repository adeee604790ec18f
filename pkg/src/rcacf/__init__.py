"""Correlation-filter object tracking with restoration filters and selective
single-background-patch context regularization, plus OTB-style evaluation."""

from .errors import (
    ConsistencyError,
    DimensionError,
    LoadError,
    NumericError,
    ParameterError,
    ParseError,
    SynthSpecError,
    TrackingError,
)
from .geometry import Box
from .dsp import (
    extract_patch,
    forward_spectrum,
    gaussian_label,
    hann_window,
    inverse_spectrum,
    preprocess_patch,
)
from .filters import (
    CfModel,
    Cls,
    FilterConfig,
    ResponseMap,
    Wiener,
    add_anchor_term,
    apply_restoration,
    learn_base_filter,
    learn_ca_filter,
    learn_filter,
    preset,
    response,
    update_model,
)
from .context import (
    ContextPatch,
    PatchTag,
    generate_context_patches,
    patch_distance,
    select_nearest_patch,
)
from .tracker import (
    SelectionEvent,
    TrackResult,
    TrackerState,
    init_tracker,
    run_sequence,
    track_frame,
)
from .sequences import (
    ATTRIBUTE_CODES,
    Distractor,
    Linear,
    SequenceMeta,
    Sinusoidal,
    Static,
    SynthSpec,
    generate_synthetic,
    iter_frames,
    load_attributes,
    load_result,
    load_sequence,
    render_sequence,
    save_result,
)
from .metrics import (
    ComparisonTable,
    Curve,
    EvalReport,
    SequenceEval,
    attribute_rollup,
    build_report,
    center_error,
    comparison_table,
    evaluate_result,
    overlap,
    precision_curve,
    success_curve,
)

__version__ = "0.1.0"

__all__ = [
    "ATTRIBUTE_CODES",
    "Box",
    "CfModel",
    "Cls",
    "ComparisonTable",
    "ConsistencyError",
    "ContextPatch",
    "Curve",
    "DimensionError",
    "Distractor",
    "EvalReport",
    "FilterConfig",
    "Linear",
    "LoadError",
    "NumericError",
    "ParameterError",
    "ParseError",
    "PatchTag",
    "ResponseMap",
    "SelectionEvent",
    "SequenceEval",
    "SequenceMeta",
    "Sinusoidal",
    "Static",
    "SynthSpec",
    "SynthSpecError",
    "TrackResult",
    "TrackerState",
    "TrackingError",
    "Wiener",
    "add_anchor_term",
    "apply_restoration",
    "attribute_rollup",
    "build_report",
    "center_error",
    "comparison_table",
    "evaluate_result",
    "extract_patch",
    "forward_spectrum",
    "gaussian_label",
    "generate_context_patches",
    "generate_synthetic",
    "hann_window",
    "init_tracker",
    "inverse_spectrum",
    "iter_frames",
    "learn_base_filter",
    "learn_ca_filter",
    "learn_filter",
    "load_attributes",
    "load_result",
    "load_sequence",
    "overlap",
    "patch_distance",
    "precision_curve",
    "preprocess_patch",
    "preset",
    "render_sequence",
    "response",
    "run_sequence",
    "save_result",
    "select_nearest_patch",
    "success_curve",
    "track_frame",
    "update_model",
]
