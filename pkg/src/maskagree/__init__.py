"""Inter-annotator agreement for binary segmentation masks.

Pairwise Cohen's kappa between annotators of the same lesion, mask
conditionings (opening, closing, convex hull, bounding box and their
combinations), distribution summaries and two-sample K-S tests.
"""

__version__ = "0.1.0"

from .agreement import (  # noqa: E402
    AgreementRecord,
    ConfusionCounts,
    cohen_kappa,
    confusion_counts,
    dataset_agreements,
    lesion_mean_kappa,
)
from .conditioning import ALL_KINDS, ConditioningSpec, Kind, apply  # noqa: E402
from .estimators import AgreementAnalyzer, MaskConditioner  # noqa: E402
from .geometry import Box, bounding_box, bounding_box_mask, convex_hull_mask  # noqa: E402
from .masks import (  # noqa: E402
    BinaryMask,
    DatasetSummary,
    LesionGroup,
    decode_mask,
    encode_mask,
    ingest_dataset,
    summarize_dataset,
)
from .morphology import StructuringElement, closing, dilate, erode, opening  # noqa: E402
from .report import AnalysisReport, build_report, rank_lesions  # noqa: E402
from .stats import DistributionSummary, KsResult, ks_test, summarize  # noqa: E402

__all__ = [
    "ALL_KINDS",
    "AgreementAnalyzer",
    "AgreementRecord",
    "AnalysisReport",
    "BinaryMask",
    "Box",
    "ConditioningSpec",
    "ConfusionCounts",
    "DatasetSummary",
    "DistributionSummary",
    "Kind",
    "KsResult",
    "LesionGroup",
    "MaskConditioner",
    "StructuringElement",
    "apply",
    "bounding_box",
    "bounding_box_mask",
    "build_report",
    "closing",
    "cohen_kappa",
    "confusion_counts",
    "convex_hull_mask",
    "dataset_agreements",
    "decode_mask",
    "dilate",
    "encode_mask",
    "erode",
    "ingest_dataset",
    "ks_test",
    "lesion_mean_kappa",
    "opening",
    "rank_lesions",
    "summarize",
    "summarize_dataset",
]
