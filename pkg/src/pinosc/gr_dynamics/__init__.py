"""Rate-equation model, integrator and linear stability analysis."""
from .model import (GRParams, GRState, ScaledSystem, control_parameter,
                    impact_ionization_coefficient, paper_like_params, rhs)
from .simulate import MIN_STEP_SECONDS, StiffnessError, Trajectory, integrate
from .stability import (HopfPoint, NoEquilibriumError, StabilityReport, classify_stability,
                        fixed_points, hopf_boundary, jacobian, stability_at,
                        tracked_fixed_point)

__all__ = [
    "GRParams", "GRState", "ScaledSystem", "control_parameter", "impact_ionization_coefficient",
    "paper_like_params", "rhs", "MIN_STEP_SECONDS", "StiffnessError", "Trajectory", "integrate",
    "HopfPoint", "NoEquilibriumError", "StabilityReport", "classify_stability", "fixed_points",
    "hopf_boundary", "jacobian", "stability_at", "tracked_fixed_point",
]
