"""Scenario construction and reduction."""

from ._accel import BACKEND as KERNEL_BACKEND
from .reduce import (
    DEVIATION_COMPONENTS,
    ReductionError,
    ReductionTrace,
    ScenarioSet,
    YearSeries,
    backward_reduce,
    deviation_report,
    feature_matrix,
    kantorovich_matrix,
    kmeans_labels,
    kmeans_reduce,
    price_varies,
    reduce_distances,
    slice_days,
)

__all__ = [
    "DEVIATION_COMPONENTS", "KERNEL_BACKEND", "ReductionError", "ReductionTrace", "ScenarioSet",
    "YearSeries", "backward_reduce", "deviation_report", "feature_matrix", "kantorovich_matrix",
    "kmeans_labels", "kmeans_reduce", "price_varies", "reduce_distances", "slice_days",
]
