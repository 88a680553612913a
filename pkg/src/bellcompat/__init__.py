"""Probabilistic compatibility of dichotomous random variables and Bell-type tests."""

__version__ = "0.1.0"

from .core import (
    CELLS,
    MAX_VARIABLES,
    TAU_NORM,
    CoincidenceRecord,
    FamilyError,
    MarginalFamily,
    Outcome,
    PairwiseTable,
    SignedJoint,
    VariableId,
    correlation_of,
    decode_atom,
    encode_atom,
    validate_family,
)
from .marginal import (
    CompatibilityVerdict,
    QuasiSolution,
    Status,
    brute_force_compatibility,
    check_compatibility,
    solve_quasi,
    verify_certificate,
)
from .inequalities import (
    InequalityReport,
    LeggetModel,
    bell_covariance,
    chsh,
    legget_joint_average,
    legget_two_step,
    model_from_joint,
    wigner,
)
from .singlet import AngleSet, singlet_correlation, singlet_family, singlet_pair_table
from .simulate import (
    ContextSpec,
    DiscreteDensity,
    EventStream,
    RunDriftSpec,
    ThresholdDetectionSpec,
    UniformDensity,
    ZeroDensity,
    alternating_drift,
    pool_records,
    post_select,
    run_with_drift,
    sample_context,
    sample_from_table,
    sample_threshold,
    shared_sign,
    sign_cos2,
)
from .analysis import (
    AnomalyReport,
    CrossContextEvaluation,
    anomaly_analysis,
    empirical_table,
    evaluate_cross_context,
    parse_coincidence_csv,
    write_coincidence_csv,
)

__all__ = [
    "AngleSet",
    "AnomalyReport",
    "CELLS",
    "CoincidenceRecord",
    "CompatibilityVerdict",
    "ContextSpec",
    "CrossContextEvaluation",
    "DiscreteDensity",
    "EventStream",
    "FamilyError",
    "InequalityReport",
    "LeggetModel",
    "MAX_VARIABLES",
    "MarginalFamily",
    "Outcome",
    "PairwiseTable",
    "QuasiSolution",
    "RunDriftSpec",
    "SignedJoint",
    "Status",
    "TAU_NORM",
    "ThresholdDetectionSpec",
    "UniformDensity",
    "VariableId",
    "ZeroDensity",
    "alternating_drift",
    "anomaly_analysis",
    "bell_covariance",
    "brute_force_compatibility",
    "check_compatibility",
    "chsh",
    "correlation_of",
    "decode_atom",
    "empirical_table",
    "encode_atom",
    "evaluate_cross_context",
    "legget_joint_average",
    "legget_two_step",
    "model_from_joint",
    "parse_coincidence_csv",
    "pool_records",
    "post_select",
    "run_with_drift",
    "sample_context",
    "sample_from_table",
    "sample_threshold",
    "shared_sign",
    "sign_cos2",
    "singlet_correlation",
    "singlet_family",
    "singlet_pair_table",
    "solve_quasi",
    "validate_family",
    "verify_certificate",
    "wigner",
    "write_coincidence_csv",
]
