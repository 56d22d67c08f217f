from nlwasserstein.certify.certificates import (
    BoundCertificate,
    CertifyContext,
    assembled_constants,
    available_batteries,
    certificates_to_dataframe,
    certify_crude_w2_upper,
    certify_dirac_floor,
    certify_disintegration,
    certify_expel,
    certify_holder,
    certify_lower_bounds,
    certify_nonlocalization_action,
    certify_phi_bound,
    certify_tv_upper,
    classify_regime,
    local_action,
    run_battery,
)
from nlwasserstein.certify.experiments import ConvergenceTable, converge_experiment


__all__ = [
    "assembled_constants",
    "available_batteries",
    "BoundCertificate",
    "certificates_to_dataframe",
    "certify_crude_w2_upper",
    "certify_dirac_floor",
    "certify_disintegration",
    "certify_expel",
    "certify_holder",
    "certify_lower_bounds",
    "certify_nonlocalization_action",
    "certify_phi_bound",
    "certify_tv_upper",
    "CertifyContext",
    "classify_regime",
    "converge_experiment",
    "ConvergenceTable",
    "local_action",
    "run_battery",
]
