from .datasets import (
    BenchmarkInstance,
    UNMAPPED,
    load_dataset,
    map_claimreview_label,
)
from .metrics import (
    MetricsReport,
    accuracy,
    confusion_matrix,
    micro_f1,
    verite_pairwise,
)
from .runner import run_benchmark, seeded_subset

__all__ = [
    "BenchmarkInstance",
    "MetricsReport",
    "UNMAPPED",
    "accuracy",
    "confusion_matrix",
    "load_dataset",
    "map_claimreview_label",
    "micro_f1",
    "run_benchmark",
    "seeded_subset",
    "verite_pairwise",
]
