"""Online learning for class-imbalanced streams via G-mean maximization."""

from .dataio import Dataset, Instance, LabelMapping, SparseFeatures, load_dataset, open_dataset, permute
from .learner import OnlineLearner, decide_label, dot, run_stream
from .metrics import ConfusionState, gmean, mistake_rate, sum_metric
from .ogmean import OGMEAN, ClassCounts, ogmean_step, rho

__all__ = [
    "ClassCounts", "ConfusionState", "Dataset", "Instance", "LabelMapping", "OGMEAN",
    "OnlineLearner", "SparseFeatures", "decide_label", "dot", "gmean", "load_dataset",
    "mistake_rate", "ogmean_step", "open_dataset", "permute", "rho", "run_stream", "sum_metric",
]

__version__ = "0.1.0"
