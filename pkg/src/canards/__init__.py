"""Canard analysis of slow-fast systems with one fast variable.

The package locates pseudo-singular points of 3D and 4D singularly perturbed
systems, classifies them through the sigma invariants of the normalized slow
dynamics, brackets canard windows between saddle-node and Hopf values, and
integrates the full system to observe canard trajectories. Built-in models
are memristor-based Chua circuits.
"""

__version__ = "0.1.0"

from .characteristic import CubicFit, cubic_charge, fit_cubic, pwl_charge, square_error
from .circuits import (build, chua3d_cubic, chua3d_particular, chua3d_pwl, chua4d_cubic,
                       parse_descriptor)
from .classify import (SigmaReport, classify_folded_singularity, normal_form_coefficients,
                       normalized_slow_jacobian, sigma_invariants)
from .errors import (BranchAbsent, ConvergenceError, DomainError, FoldError,
                     NoSignChange, PreconditionError, StepSizeUnderflow)
from .folded import (PseudoSingularity, find_pseudo_singular_points, genericity_check,
                     pseudo_singular_manifold)
from .jets import Jet2, jet_eval
from .simulate import Trajectory, detect_canard, emit_manifold_and_orbit, integrate
from .stability import (CanardWindow, canard_window, characteristic_polynomial,
                        find_fixed_points, hopf_parameter, routh_hurwitz, saddle_region)
from .system import (SlowFastSystem, critical_residual, eval_rhs, reduced_flow,
                     sample_critical_manifold)

__all__ = [
    "BranchAbsent", "CanardWindow", "ConvergenceError", "CubicFit", "DomainError",
    "FoldError", "Jet2", "NoSignChange", "PreconditionError", "PseudoSingularity",
    "SigmaReport", "SlowFastSystem", "StepSizeUnderflow", "Trajectory", "build",
    "canard_window", "characteristic_polynomial", "chua3d_cubic", "chua3d_particular",
    "chua3d_pwl", "chua4d_cubic", "classify_folded_singularity", "critical_residual",
    "cubic_charge", "detect_canard", "emit_manifold_and_orbit", "eval_rhs",
    "find_fixed_points", "find_pseudo_singular_points", "fit_cubic", "genericity_check",
    "hopf_parameter", "integrate", "jet_eval", "normal_form_coefficients",
    "normalized_slow_jacobian", "parse_descriptor", "pseudo_singular_manifold",
    "pwl_charge", "reduced_flow", "routh_hurwitz", "saddle_region",
    "sample_critical_manifold", "sigma_invariants", "square_error",
]
