from .experiment import ALGORITHMS, ExperimentConfig, RunSummary, TraceRecord, aggregate, make_learner, run_experiment
from .regret import RegretReport, regret_check
from .report import emit_csv
from .svgchart import emit_svg_chart

__all__ = [
    "ALGORITHMS", "ExperimentConfig", "RegretReport", "RunSummary", "TraceRecord", "aggregate",
    "emit_csv", "emit_svg_chart", "make_learner", "regret_check", "run_experiment",
]
