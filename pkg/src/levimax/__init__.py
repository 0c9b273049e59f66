"""Levi-form spectra and maximal-estimate conditions for domains in ℂⁿ."""

from .conditions import (
    ConditionReport,
    ConditionVerdict,
    VerdictKind,
    admissible_t_window,
    check_Zq,
    check_weak_zq,
    epsilon_almost_pseudoconcave,
    epsilon_almost_pseudoconvex,
    necessary_min_A,
    scan_region,
)
from .expr import DefiningFunction, Jet2, eval_gradient_norms, eval_jet2, parse_defining_function
from .levi import BoundaryPoint, Frame, LeviSpectrum, levi_spectrum, project_to_boundary, tangential_frame
from .model import GaussianProfile, ModelData, certify_A_lower_bound, finite_tau_norm, gaussian_ratio, min_ratio_sum
from .upsilon import UpsilonField, ValidationReport, theta, theta_identity, validate_upsilon

__version__ = "0.1.0"

__all__ = [
    "BoundaryPoint",
    "ConditionReport",
    "ConditionVerdict",
    "DefiningFunction",
    "Frame",
    "GaussianProfile",
    "Jet2",
    "LeviSpectrum",
    "ModelData",
    "UpsilonField",
    "ValidationReport",
    "VerdictKind",
    "admissible_t_window",
    "certify_A_lower_bound",
    "check_Zq",
    "check_weak_zq",
    "epsilon_almost_pseudoconcave",
    "epsilon_almost_pseudoconvex",
    "eval_gradient_norms",
    "eval_jet2",
    "finite_tau_norm",
    "gaussian_ratio",
    "levi_spectrum",
    "min_ratio_sum",
    "necessary_min_A",
    "parse_defining_function",
    "project_to_boundary",
    "scan_region",
    "tangential_frame",
    "theta",
    "theta_identity",
    "validate_upsilon",
]
