"""Surrogate-assisted global optimization with budgeted true evaluations."""

from .problem import (
    Budget,
    CutSample,
    Problem,
    SearchSpace,
    TimingReport,
    budget_from_saving,
    clamp,
    functional_cut,
    parallel_time_saving,
    time_saving,
    timing_estimates,
)
from .surrogate import (
    OkModel,
    Prediction,
    RbfnModel,
    SurrogateFitError,
    SvrModel,
    TrainingSet,
    fit_ok,
    fit_rbfn,
    fit_svr,
    predict,
    sm_error,
)
from .sampling import SamplingPlan, full_factorial, lhs, osf_expand
from .optimize import (
    DeParams,
    OptimizerConfig,
    PsoParams,
    RunResult,
    bare_sbd,
    de_run,
    osf_then_bare,
    pso_run,
)
from .confidence import (
    ProvenancedPoint,
    lcb,
    pso_ok_c_run,
    ucb,
    update_global_best,
    update_personal_best,
)
from . import benchmarks

__all__ = [
    "Budget", "CutSample", "Problem", "SearchSpace", "TimingReport",
    "budget_from_saving", "clamp", "functional_cut", "parallel_time_saving",
    "time_saving", "timing_estimates",
    "OkModel", "Prediction", "RbfnModel", "SurrogateFitError", "SvrModel",
    "TrainingSet", "fit_ok", "fit_rbfn", "fit_svr", "predict", "sm_error",
    "SamplingPlan", "full_factorial", "lhs", "osf_expand",
    "DeParams", "OptimizerConfig", "PsoParams", "RunResult",
    "bare_sbd", "de_run", "osf_then_bare", "pso_run",
    "ProvenancedPoint", "lcb", "pso_ok_c_run", "ucb",
    "update_global_best", "update_personal_best",
    "benchmarks",
]

__version__ = "0.1.0"
