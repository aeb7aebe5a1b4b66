"""Python interface to the evaluation core.

Everything is implemented in the C++ extension; this package re-exports the
public names so `import xdeval` works both from an installed wheel and from
a build tree placed on PYTHONPATH.
"""

from ._xdeval import (  # noqa: F401
    ApConfig,
    ApReport,
    AlResult,
    BadK,
    Box,
    Detection,
    EmptySample,
    GroundTruth,
    MetricSummary,
    NoGroundTruth,
    NoPositiveRelevance,
    NotEvaluable,
    ShapeMismatch,
    TkiResult,
    UndefinedMetric,
    ValidationError,
    __version__,
    attribution_localization,
    grid_roundtrip,
    iou,
    mean_ap,
    rasterize,
    summarize,
    topk_intersection,
    topk_mask,
)

__all__ = [
    "ApConfig",
    "ApReport",
    "AlResult",
    "BadK",
    "Box",
    "Detection",
    "EmptySample",
    "GroundTruth",
    "MetricSummary",
    "NoGroundTruth",
    "NoPositiveRelevance",
    "NotEvaluable",
    "ShapeMismatch",
    "TkiResult",
    "UndefinedMetric",
    "ValidationError",
    "__version__",
    "attribution_localization",
    "grid_roundtrip",
    "iou",
    "mean_ap",
    "rasterize",
    "summarize",
    "topk_intersection",
    "topk_mask",
]
