"""Minimax bounds, packing constructions and Monte Carlo risk for
differentially private distribution estimation."""

from ._dpminimax import (
    Error,
    assouad_bound,
    check_dp,
    empirical_hamming,
    expected_hamming,
    fano_bound,
    gv_constant_weight,
    gv_qary,
    laplace_estimator,
    le_cam_bound,
    packing,
    project_simplex,
    run_experiment,
    sample_complexity_table,
    scaling_check,
    verify_family,
    version,
)

__all__ = [
    "Error",
    "assouad_bound",
    "check_dp",
    "empirical_hamming",
    "expected_hamming",
    "fano_bound",
    "gv_constant_weight",
    "gv_qary",
    "laplace_estimator",
    "le_cam_bound",
    "packing",
    "project_simplex",
    "run_experiment",
    "sample_complexity_table",
    "scaling_check",
    "verify_family",
    "version",
]
