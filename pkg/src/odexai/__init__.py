"""Saliency explanations for object detections, plus a three-dimension
evaluation suite: localization, faithfulness, and complexity."""

from .core import (
    BBox,
    Detection,
    GroundTruthInstance,
    ImageBuffer,
    SaliencyMap,
    cosine_sim,
    iou,
)
from .explainers import (
    ExplainerConfig,
    ExplanationResult,
    Method,
    TargetSpec,
    explain,
    explain_dclose,
    explain_drise,
    explain_gcame,
)
from .metrics import (
    EvaluationRecord,
    MetricConfig,
    PerturbationCurve,
    deletion_curve,
    ebpg,
    evaluate_all,
    insertion_curve,
    overall,
    pg_accuracy,
    pointing_game_hit,
    sparsity,
    target_score,
)

__version__ = "0.1.0"

__all__ = [
    "BBox",
    "Detection",
    "EvaluationRecord",
    "ExplainerConfig",
    "ExplanationResult",
    "GroundTruthInstance",
    "ImageBuffer",
    "Method",
    "MetricConfig",
    "PerturbationCurve",
    "SaliencyMap",
    "TargetSpec",
    "cosine_sim",
    "deletion_curve",
    "ebpg",
    "evaluate_all",
    "explain",
    "explain_dclose",
    "explain_drise",
    "explain_gcame",
    "insertion_curve",
    "iou",
    "overall",
    "pg_accuracy",
    "pointing_game_hit",
    "sparsity",
    "target_score",
]
