import numpy as np
import pytest

from nlwasserstein.dynamics import (
    local_ce_residual,
    local_divergence,
    nce_residual,
    nonlocal_flux,
    nonlocalize,
    refinement_study,
    translating_bump,
)
from nlwasserstein.kernels import RadialKernel
from nlwasserstein.space import build_grid, from_points
from nlwasserstein.utils import KernelFamily, PreconditionError


kernel = RadialKernel(KernelFamily.indicator, dim=1, scale=0.2)
line = build_grid(1, 1.0, 128, kernel)
times, rho, J = translating_bump(line, 0.3, 0.4, 0.08, 16)


def test_translating_bump():
    assert rho.shape == (17, 128)
    assert J.shape == (17, 128, 1)
    assert np.allclose(J[:, :, 0], 0.4 * rho)
    assert np.isclose(line.points[np.argmax(rho[-1]), 0], 0.7, atol=line.spacing)


def test_local_ce_residual_small():
    assert local_ce_residual(line, times, rho, J) < 0.1


def test_local_divergence_constant_field():
    ring = build_grid(1, 1.0, 32, kernel, periodic=True)
    assert np.allclose(local_divergence(ring, np.ones(32)), 0.0)
    linear = local_divergence(line, line.points[:, 0])
    assert np.allclose(linear, 1.0)


def test_local_divergence_needs_square_grid():
    cloud = from_points(np.random.default_rng(0).uniform(size=(3, 2)), np.ones(3), edges=[])
    with pytest.raises(ValueError):
        local_divergence(cloud, np.zeros((3, 2)))


def test_nonlocal_flux_constant_field():
    space = build_grid(1, 1.0, 10, kernel.rescale(0.25))
    flux = nonlocal_flux(space, space.kernel, np.ones(10))
    k = space.edge_index(0, 1)
    assert np.isclose(flux[k], 24 * 0.1 * 2)


def test_nonlocalize_beats_control():
    exact = nonlocalize(line, kernel, times, rho, J)
    control = nonlocalize(line, kernel, times, rho, J, convolve_density=False)
    assert exact.n_steps == 16
    masses = exact.masses(line.ref_mass)
    assert np.allclose(masses, masses[0], rtol=1e-3)
    assert nce_residual(line, exact) < 0.5 * nce_residual(line, control)


def test_nonlocalize_precondition():
    with pytest.raises(PreconditionError):
        nonlocalize(line, kernel, times, rho, np.zeros_like(J))


def test_translating_bump_wraps_on_ring():
    ring = build_grid(1, 0.8, 64, kernel, periodic=True)
    _, wrapped, _ = translating_bump(ring, 0.7, 0.4, 0.08, 4)
    assert np.isclose(ring.points[np.argmax(wrapped[-1]), 0], 0.3, atol=ring.spacing)
    assert np.allclose(wrapped @ ring.ref_mass, 1.0, atol=1e-5)


def test_refinement_study_first_order():
    frame = refinement_study(kernel, [64, 128, 256], 0.8, 0.2, 0.4, 0.08, 128)
    assert frame["n"].tolist() == [64, 128, 256]
    assert frame["time_steps"].tolist() == [128, 256, 512]
    ratios = frame["ratio"].iloc[1:]
    assert ((ratios > 1.4) & (ratios < 2.6)).all()
    assert frame["control_residual"].min() > frame["residual"].max()


def test_refinement_study_misaligned_support():
    with pytest.warns(UserWarning):
        refinement_study(kernel, [64, 128], 1.0, 0.3, 0.4, 0.08, 32)


def test_refinement_study_needs_line():
    plane = RadialKernel(KernelFamily.indicator, dim=2, scale=0.2)
    with pytest.raises(ValueError):
        refinement_study(plane, [16, 32], 1.0, 0.3, 0.4, 0.08, 16)
