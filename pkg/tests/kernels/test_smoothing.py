import math

import numpy as np
import pytest

from nlwasserstein.kernels import (
    RadialKernel,
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
from nlwasserstein.space import build_grid
from nlwasserstein.utils import ConvolutionMode, KernelFamily, SmoothingKind


def test_laplace_normalizer():
    assert np.isclose(laplace_normalizer(1), 0.5)
    assert np.isclose(laplace_normalizer(2), 1 / (2 * math.pi))


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("N", [0, 1, 2, 3, 4, 5])
def test_laplace_moments(d, N):
    exact = math.factorial(N + d - 1) / math.factorial(d - 1)
    assert laplace_moment(d, N) == exact
    assert np.isclose(laplace_kernel(d, 1.0).moment(N), exact, rtol=1e-8)


def test_laplace_moment_scaling():
    assert np.isclose(laplace_kernel(2, 0.3).moment(2), 0.09 * laplace_moment(2, 2), rtol=1e-8)


@pytest.mark.parametrize(
    "kernel",
    [
        RadialKernel(KernelFamily.indicator, dim=1),
        RadialKernel(KernelFamily.indicator, dim=2),
        RadialKernel(KernelFamily.fractional, dim=1, s=0.5, c_s=1.0),
        RadialKernel(KernelFamily.fractional, dim=2, s=0.5, c_s=2.0),
    ],
)
def test_zeta_mass(kernel):
    assert np.isclose(zeta_mass(kernel), kernel.moment(2) / kernel.dim, rtol=1e-8)


def test_zeta_mass_scaling():
    kernel = RadialKernel(KernelFamily.indicator, dim=1, scale=0.2)
    assert np.isclose(zeta_mass(kernel), 0.04 * 2 / 3, rtol=1e-8)


def test_normalized_kernels_have_unit_mass():
    assert np.isclose(laplace_kernel(1, 0.5).mass(), 1.0, rtol=1e-8)
    zeta = zeta_profile(RadialKernel(KernelFamily.indicator, dim=1, scale=0.3))
    assert zeta.kind == SmoothingKind.zeta
    assert zeta.scale == 0.3
    assert np.isclose(zeta.mass(), 1.0, rtol=1e-8)


def test_zeta_requires_base():
    with pytest.raises(ValueError):
        SmoothingKernel(SmoothingKind.zeta, dim=1, scale=1.0)


grid = build_grid(1, 1.0, 50, RadialKernel(KernelFamily.indicator, dim=1, scale=0.1))


def test_convolution_measure_mode_preserves_mass():
    P = convolution_matrix(laplace_kernel(1, 0.1), grid, ConvolutionMode.measure)
    rho = np.random.default_rng(1).uniform(0, 1, grid.n)
    assert np.isclose(np.dot(P @ rho, grid.ref_mass), np.dot(rho, grid.ref_mass))
    assert (P >= 0).all()


def test_convolution_function_mode_preserves_constants():
    constant = np.full(grid.n, 3.0)
    smoothed = convolve(laplace_kernel(1, 0.1), grid, constant, ConvolutionMode.function)
    assert np.allclose(smoothed, 3.0)


def test_convolution_small_scale_warns():
    with pytest.warns(UserWarning):
        convolution_matrix(laplace_kernel(1, 0.01), grid)


ring_kernel = RadialKernel(KernelFamily.indicator, dim=1, scale=0.05)
ring = build_grid(1, 1.0, 128, ring_kernel, periodic=True)


def test_laplace_gradient_bounds_on_ring():
    phi = np.sin(2 * np.pi * ring.points[:, 0])
    report = laplace_gradient_bounds(ring, 0.1, phi)
    assert report["gradient_bound"]
    assert report["sup_bound"]
    assert report["hessian_bound"]
    assert report["pass"]


def test_laplace_gradient_bounds_requires_line():
    plane = build_grid(2, 1.0, 5, RadialKernel(KernelFamily.indicator, dim=2, scale=0.5))
    with pytest.raises(ValueError):
        laplace_gradient_bounds(plane, 0.5, np.zeros(plane.n))


def test_zeta_relative_lipschitz_on_ring():
    kernel = ring_kernel
    rho = np.random.default_rng(3).uniform(0.1, 1.0, ring.n)
    report = zeta_relative_lipschitz(ring, kernel, 0.3, rho)
    assert report["pass"]


def test_zeta_relative_lipschitz_scales():
    kernel = RadialKernel(KernelFamily.indicator, dim=1, scale=0.5)
    with pytest.raises(ValueError):
        zeta_relative_lipschitz(ring, kernel, 0.3, np.ones(ring.n))
