"""Test whether high-frequency increments are locally Gaussian.

Increments are devolatilized with block-local bipower (or truncated)
variation, jumps are truncated, and the empirical CDF is compared with
the standard normal on a set of quantile intervals.
"""
from ._backend import BACKEND
from .critvals import (
    CriticalValue,
    CriticalValueCache,
    LimitLawConfig,
    critical_value,
    critical_values,
    simulate_limit_paths,
    simulate_sup_limit,
)
from .ecdf import EcdfCurve, EvalSet, TestResult, ecdf_devol, ks_distance, ks_statistic, local_gaussianity_test
from .errors import (
    AccuracyError,
    DataError,
    DegenerateVolatilityError,
    EmptyStatisticError,
    LocGaussError,
    ParameterError,
    ParseError,
    ShapeError,
)
from .intraday import DiurnalProfile, IntradayReturns, Session, diurnal_adjust, ingest_csv
from .limits import ReferenceLaw, f_beta, normal_cdf, normal_quantile, stable_abs_mean, stable_cdf
from .montecarlo import Experiment, RejectionRow, RejectionTable, emit_table, read_table, run_experiment
from .paths import (
    PathGrid,
    SamplePath,
    StableLaw,
    SvJumpDiffusionParams,
    TemperedStableParams,
    add_noise,
    simulate_model,
    simulate_stable,
    simulate_sv_jump_diffusion,
    simulate_tempered_stable_tc,
)
from .spotvol import BlockPlan, TruncationConfig, VolEstimates, leave_out_estimates

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CriticalValue",
    "CriticalValueCache",
    "LimitLawConfig",
    "critical_value",
    "critical_values",
    "simulate_limit_paths",
    "simulate_sup_limit",
    "EcdfCurve",
    "EvalSet",
    "TestResult",
    "ecdf_devol",
    "ks_distance",
    "ks_statistic",
    "local_gaussianity_test",
    "AccuracyError",
    "DataError",
    "DegenerateVolatilityError",
    "EmptyStatisticError",
    "LocGaussError",
    "ParameterError",
    "ParseError",
    "ShapeError",
    "DiurnalProfile",
    "IntradayReturns",
    "Session",
    "diurnal_adjust",
    "ingest_csv",
    "ReferenceLaw",
    "f_beta",
    "normal_cdf",
    "normal_quantile",
    "stable_abs_mean",
    "stable_cdf",
    "Experiment",
    "RejectionRow",
    "RejectionTable",
    "emit_table",
    "read_table",
    "run_experiment",
    "PathGrid",
    "SamplePath",
    "StableLaw",
    "SvJumpDiffusionParams",
    "TemperedStableParams",
    "add_noise",
    "simulate_model",
    "simulate_stable",
    "simulate_sv_jump_diffusion",
    "simulate_tempered_stable_tc",
    "BlockPlan",
    "TruncationConfig",
    "VolEstimates",
    "leave_out_estimates",
]
