from nlwasserstein.utils.basic_functions import (
    difference_quotient,
    log_factorial,
    pairwise_distances,
    radial_integral,
    unit_ball_volume,
)
from nlwasserstein.utils.errors import (
    ConfigError,
    DivergenceError,
    MassMismatchError,
    NlwError,
    PreconditionError,
    RegimeError,
    ResolutionError,
    SizeLimitError,
)
from nlwasserstein.utils.formats import dict_to_dataframe, jsonable, numpy_array, write_json
from nlwasserstein.utils.types import (
    ConvolutionMode,
    CurveConstruction,
    KernelFamily,
    Regime,
    SmoothingKind,
    SolveStatus,
    ThetaFamily,
)


__all__ = [
    "ConfigError",
    "ConvolutionMode",
    "CurveConstruction",
    "dict_to_dataframe",
    "difference_quotient",
    "DivergenceError",
    "jsonable",
    "KernelFamily",
    "log_factorial",
    "MassMismatchError",
    "NlwError",
    "numpy_array",
    "pairwise_distances",
    "PreconditionError",
    "radial_integral",
    "Regime",
    "RegimeError",
    "ResolutionError",
    "SizeLimitError",
    "SmoothingKind",
    "SolveStatus",
    "ThetaFamily",
    "unit_ball_volume",
    "write_json",
]
