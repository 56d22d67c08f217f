__version__ = "0.1.0"

from nlwasserstein.certify import (  # noqa: E402
    BoundCertificate,
    CertifyContext,
    ConvergenceTable,
    assembled_constants,
    classify_regime,
    converge_experiment,
    run_battery,
)
from nlwasserstein.datasets.datasets import (  # noqa: E402
    load_bumps_line,
    load_converge_bumps,
    load_disconnected,
    load_fractional_line,
    load_hj_line,
    load_nonlocalize_bump,
    load_two_point,
)
from nlwasserstein.dynamics import action, nonlocalize, path_action  # noqa: E402
from nlwasserstein.interpolation import Interpolation  # noqa: E402
from nlwasserstein.kernels import RadialKernel, SmoothingKernel, laplace_kernel  # noqa: E402
from nlwasserstein.reference import hj_lower_bound, w1, w2  # noqa: E402
from nlwasserstein.solver import (  # noqa: E402
    SolveConfig,
    SolveReport,
    geodesic,
    solve,
    solve_smoothed,
)
from nlwasserstein.space import (  # noqa: E402
    Density,
    DiscreteSpace,
    Path,
    build_grid,
    from_points,
    measure_from_spec,
    two_point_space,
)
from nlwasserstein.utils import (  # noqa: E402
    ConfigError,
    DivergenceError,
    KernelFamily,
    MassMismatchError,
    NlwError,
    PreconditionError,
    Regime,
    RegimeError,
    ResolutionError,
    SizeLimitError,
    SolveStatus,
    ThetaFamily,
)


__all__ = [
    "action",
    "assembled_constants",
    "BoundCertificate",
    "build_grid",
    "CertifyContext",
    "classify_regime",
    "ConfigError",
    "converge_experiment",
    "ConvergenceTable",
    "Density",
    "DiscreteSpace",
    "DivergenceError",
    "from_points",
    "geodesic",
    "hj_lower_bound",
    "Interpolation",
    "KernelFamily",
    "laplace_kernel",
    "load_bumps_line",
    "load_converge_bumps",
    "load_disconnected",
    "load_fractional_line",
    "load_hj_line",
    "load_nonlocalize_bump",
    "load_two_point",
    "MassMismatchError",
    "measure_from_spec",
    "NlwError",
    "nonlocalize",
    "Path",
    "path_action",
    "PreconditionError",
    "RadialKernel",
    "Regime",
    "RegimeError",
    "ResolutionError",
    "SizeLimitError",
    "SmoothingKernel",
    "solve",
    "solve_smoothed",
    "SolveConfig",
    "SolveReport",
    "SolveStatus",
    "ThetaFamily",
    "two_point_space",
    "w1",
    "w2",
]
