from nlwasserstein.dynamics.action import (
    ActionValue,
    action,
    antisymmetrize,
    edge_action,
    matrix_action,
    nce_residual,
    nl_divergence,
    path_action,
    path_action_frame,
    translation_convolve,
)
from nlwasserstein.dynamics.curves import (
    CurveCertificate,
    concatenate,
    dirac_chain_curve,
    expel_curve_annuli,
    expel_curve_boundary,
    two_point_curve,
    two_set_curve,
)
from nlwasserstein.dynamics.nonlocalize import (
    local_ce_residual,
    local_divergence,
    nonlocal_flux,
    nonlocalize,
    refinement_study,
    translating_bump,
)


__all__ = [
    "action",
    "ActionValue",
    "antisymmetrize",
    "concatenate",
    "CurveCertificate",
    "dirac_chain_curve",
    "edge_action",
    "expel_curve_annuli",
    "expel_curve_boundary",
    "local_ce_residual",
    "local_divergence",
    "matrix_action",
    "nce_residual",
    "nl_divergence",
    "nonlocal_flux",
    "nonlocalize",
    "path_action",
    "path_action_frame",
    "refinement_study",
    "translating_bump",
    "translation_convolve",
    "two_point_curve",
    "two_set_curve",
]
