class NlwError(Exception):
    """Type of errors"""

    pass


class DivergenceError(NlwError):
    """Integral or quadrature does not converge"""

    pass


class MassMismatchError(NlwError):
    """Measures do not carry the same total mass"""

    pass


class RegimeError(NlwError):
    """Construction or certificate not applicable to the kernel and interpolation regime"""

    pass


class ResolutionError(NlwError):
    """Grid too coarse for the requested construction"""

    pass


class PreconditionError(NlwError):
    """A verified precondition does not hold"""

    pass


class SizeLimitError(NlwError):
    """Problem larger than the supported size"""

    pass


class ConfigError(NlwError):
    """Invalid run configuration"""

    pass
