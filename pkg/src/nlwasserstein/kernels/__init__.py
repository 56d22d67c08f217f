from nlwasserstein.kernels.radial import RadialKernel, kernel_from_dict, load_profile
from nlwasserstein.kernels.smoothing import (
    SmoothingKernel,
    convolution_matrix,
    convolve,
    laplace_gradient_bounds,
    laplace_kernel,
    laplace_moment,
    laplace_normalizer,
    zeta_mass,
    zeta_profile,
    zeta_relative_lipschitz,
)


__all__ = [
    "convolution_matrix",
    "convolve",
    "kernel_from_dict",
    "laplace_gradient_bounds",
    "laplace_kernel",
    "laplace_moment",
    "laplace_normalizer",
    "load_profile",
    "RadialKernel",
    "SmoothingKernel",
    "zeta_mass",
    "zeta_profile",
    "zeta_relative_lipschitz",
]
