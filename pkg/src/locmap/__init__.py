"""Localization-map enhancement, direct pixel-wise evaluation, and weakly
supervised boundary tooling."""

from .core import (
    as_binary_mask,
    as_feature_stack,
    as_quantized_map,
    as_score_map,
    normalize_map,
    quantize_map,
    resize_bilinear,
)
from .npyfmt import read_array, write_array
from .pngio import read_mask_png, read_rgb_png, write_mask_png, write_rgb_png
from .manifest import ImageRecord, Manifest, load_manifest, save_manifest
from .sem import DEFAULT_K, SeedSet, aggregate_max, select_seeds, sem_enhance, similarity_maps
from .direct_eval import (
    ConfusionCounts,
    EvalCurve,
    average_precision,
    binarize,
    confusion_counts,
    dataset_curve,
    iou_threshold_curve,
    quantized_curve,
)
from .box_eval import (
    BBox,
    BoxEvalItem,
    ComponentLabeling,
    box_iou,
    connected_components,
    infer_box,
    localization_accuracy,
)
from .boundary import (
    ContourPath,
    CrfParams,
    canny_edges,
    crf_refine,
    make_pseudo_boundary,
    rgb_to_gray,
    trace_contours,
)
from .hns import (
    FitResult,
    LossWeights,
    class_balance_weights,
    hns_gradient,
    hns_loss,
    toy_fit,
)
from .edge_eval import (
    EdgeBenchResult,
    MatchCounts,
    edge_benchmark,
    mask_boundary,
    match_edges,
    nms_thin,
)
from .fixtures import gen_fixtures

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "as_binary_mask",
    "as_feature_stack",
    "as_quantized_map",
    "as_score_map",
    "normalize_map",
    "quantize_map",
    "resize_bilinear",
    "read_array",
    "write_array",
    "read_mask_png",
    "read_rgb_png",
    "write_mask_png",
    "write_rgb_png",
    "ImageRecord",
    "Manifest",
    "load_manifest",
    "save_manifest",
    "DEFAULT_K",
    "SeedSet",
    "select_seeds",
    "similarity_maps",
    "aggregate_max",
    "sem_enhance",
    "ConfusionCounts",
    "EvalCurve",
    "binarize",
    "confusion_counts",
    "quantized_curve",
    "iou_threshold_curve",
    "dataset_curve",
    "average_precision",
    "BBox",
    "BoxEvalItem",
    "ComponentLabeling",
    "connected_components",
    "infer_box",
    "box_iou",
    "localization_accuracy",
    "CrfParams",
    "ContourPath",
    "crf_refine",
    "canny_edges",
    "trace_contours",
    "make_pseudo_boundary",
    "rgb_to_gray",
    "LossWeights",
    "FitResult",
    "class_balance_weights",
    "hns_loss",
    "hns_gradient",
    "toy_fit",
    "EdgeBenchResult",
    "MatchCounts",
    "nms_thin",
    "match_edges",
    "edge_benchmark",
    "mask_boundary",
    "gen_fixtures",
]
