"""Provides the custom types used throughout the modules.
"""

from enum import Enum, unique
from typing import Callable, Dict, Union

import numpy as np
import pandas as pd


Array = Union[np.ndarray, pd.Series, list, tuple]
Series = Union[pd.Series, list, tuple]

Number = Union[float, int]
StringNumber = Union[str, float, int]

DictStrNum = Dict[str, Number]
DictStrFloat = Dict[str, float]

ThetaCallable = Callable[[np.ndarray, np.ndarray], np.ndarray]
ProfileCallable = Callable[[np.ndarray], np.ndarray]


# Jump kernel profiles
@unique
class KernelFamily(Enum):
    indicator = "Indicator"
    smooth_bump = "SmoothBump"
    fractional = "TruncatedFractional"
    custom = "Custom"


@unique
class SmoothingKind(Enum):
    laplace = "Laplace"
    zeta = "ZetaOf"


@unique
class ConvolutionMode(Enum):
    """Normalization of discretized convolutions"""

    measure = "measure"  # columns sum to one against m, total mass preserved
    function = "function"  # rows sum to one against m, constants preserved


# Interpolation functions
@unique
class ThetaFamily(Enum):
    arithmetic = "Arithmetic"
    geometric = "Geometric"
    logarithmic = "Logarithmic"
    harmonic = "Harmonic"
    custom = "Custom"


@unique
class SolveStatus(Enum):
    converged = "Converged"
    max_iters = "MaxIters"
    infeasible = "Infeasible"
    infinite_cost = "InfiniteCost"


@unique
class Regime(Enum):
    """Topological regimes induced by the pair (eta, theta)"""

    disconnected = "Disconnected"
    strong = "StrongTopology"
    weak = "WeakTopology"
    unclassified = "Unclassified"


@unique
class CurveConstruction(Enum):
    two_point = "TwoPoint"
    expel_annuli = "ExpelAnnuli"
    expel_boundary = "ExpelBoundary"
    dirac_chain = "DiracChain"
    two_set = "TwoSet"
    nonlocalized = "Nonlocalized"
