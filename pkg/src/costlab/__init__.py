"""costlab: a from-scratch model zoo for conceptual project-cost prediction.

Twenty supervised-regression variants (transformed regressions, case-based
reasoning, fuzzy and genetic-fuzzy systems, trees and tree ensembles, neural
networks, kernel regression) behind one fit/predict contract, plus a shared
evaluation layer and a CLI benchmark harness.
"""

from .bench import BenchConfig, load_config, parse_config, render, run_bench
from .core import EvalReport, Predictor, TargetTransform, evaluate
from .data import (
    Dataset,
    FeatureVector,
    ProjectRecord,
    SplitSpec,
    check_green_rule,
    load_csv,
    save_csv,
    split,
    synthesize,
)
from .metrics import MapeCategory, adjusted_r_squared, categorize, mape, r_squared
from .zoo import DEFAULT_MODEL_IDS, MODEL_REGISTRY, build_model

__version__ = "0.1.0"

__all__ = [
    "BenchConfig",
    "Dataset",
    "DEFAULT_MODEL_IDS",
    "EvalReport",
    "FeatureVector",
    "MapeCategory",
    "MODEL_REGISTRY",
    "Predictor",
    "ProjectRecord",
    "SplitSpec",
    "TargetTransform",
    "adjusted_r_squared",
    "build_model",
    "categorize",
    "check_green_rule",
    "evaluate",
    "load_config",
    "load_csv",
    "mape",
    "parse_config",
    "r_squared",
    "render",
    "run_bench",
    "save_csv",
    "split",
    "synthesize",
]
