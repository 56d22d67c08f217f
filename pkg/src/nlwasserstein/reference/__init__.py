from nlwasserstein.reference.hamilton_jacobi import (
    HJConstants,
    HJLowerBound,
    Potential,
    SubsolutionCheck,
    c_transform,
    hj_convolution_closure,
    hj_lower_bound,
    hj_residual,
    hopf_lax,
    hopf_lax_path,
    kantorovich_potential,
    local_slopes,
    nl_hj_subsolution,
    support_radius,
)
from nlwasserstein.reference.transport import (
    TransportPlan,
    convolution_w2_estimates,
    exact_plan,
    w1,
    w2,
    w2_quantile,
)


__all__ = [
    "c_transform",
    "convolution_w2_estimates",
    "exact_plan",
    "hj_convolution_closure",
    "hj_lower_bound",
    "hj_residual",
    "HJConstants",
    "HJLowerBound",
    "hopf_lax",
    "hopf_lax_path",
    "kantorovich_potential",
    "local_slopes",
    "nl_hj_subsolution",
    "Potential",
    "SubsolutionCheck",
    "support_radius",
    "TransportPlan",
    "w1",
    "w2",
    "w2_quantile",
]
