"""DTW-based k-NN etch-rate regression with aggregate-statistic baselines.

A library plus CLI that benchmarks banded dynamic-time-warping k-NN
regression against two-stage summary-statistic models under shared
cross-validation folds, on reproducible synthetic spectroscopy-like data,
and explains predictions through nearest/furthest neighbor alignments.
"""

__version__ = "0.1.0"

from .bench import (
    BenchCell,
    BenchReport,
    FoldPlan,
    kfold_plan,
    mape,
    run_comparison,
    sweep_parameter,
)
from .core import (
    ChannelSeries,
    DataError,
    Dataset,
    WaferRecord,
    load_dataset,
    save_dataset,
)
from .dtw import DtwOutcome, DtwParams, dtw_align, dtw_distance, multichannel_distance
from .explain import (
    NeighborReport,
    export_alignment,
    neighbor_report,
    region_contributions,
)
from .features import FourMetrics, detect_stage_split, featurize_wafer, four_metrics
from .models import (
    FittedOls,
    ModelConfig,
    knn_predict_4m,
    knn_predict_dtw,
    ols_fit,
    ols_predict,
)
from .synth import SynthConfig, generate

__all__ = [
    "__version__",
    "BenchCell",
    "BenchReport",
    "ChannelSeries",
    "DataError",
    "Dataset",
    "DtwOutcome",
    "DtwParams",
    "FittedOls",
    "FoldPlan",
    "FourMetrics",
    "ModelConfig",
    "NeighborReport",
    "SynthConfig",
    "WaferRecord",
    "detect_stage_split",
    "dtw_align",
    "dtw_distance",
    "export_alignment",
    "featurize_wafer",
    "four_metrics",
    "generate",
    "kfold_plan",
    "knn_predict_4m",
    "knn_predict_dtw",
    "load_dataset",
    "mape",
    "multichannel_distance",
    "neighbor_report",
    "ols_fit",
    "ols_predict",
    "region_contributions",
    "run_comparison",
    "save_dataset",
    "sweep_parameter",
]
