"""Detection evaluation and experiment statistics for truck-axle detectors.

Evaluate detector outputs against ground truth (IoU matching, precision,
recall, F1, AP/mAP), compose balanced real/synthetic training sets, and
compare experiment results with Mann-Whitney U tests.
"""

from .annotations import (
    BoundingBox,
    Dataset,
    DatasetStats,
    Detection,
    GroundTruthObject,
    ImageRecord,
    dataset_stats,
    load_dataset,
    parse_detections,
    parse_ground_truth,
    save_dataset,
)
from .composer import CompositionSpec, check_disjoint, compose_mixed
from .errors import (
    AnnotationParseError,
    AxleEvalError,
    CompositionError,
    DatasetLoadError,
    MatrixError,
    StatsError,
)
from .matching import ConfusionCounts, MatchResult, accumulate_counts, iou, match_image
from .metrics import (
    MetricsRow,
    PrCurve,
    average_precision,
    evaluate_dataset,
    f1,
    mean_average_precision,
    metrics_row,
    pr_curve,
    precision,
    recall,
)
from .report import (
    ExperimentMatrix,
    build_report,
    database_hypothesis_battery,
    derive_metric_table,
    load_matrix,
    render,
    version_hypothesis_battery,
)
from .stats import (
    Decision,
    Sample,
    UTestOutcome,
    approx_p_value,
    critical_value,
    critical_value_lookup,
    exact_p_value,
    mann_whitney_test,
    rank_with_ties,
    u_statistic,
)

__version__ = "0.1.0"
