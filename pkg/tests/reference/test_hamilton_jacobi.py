import math

import numpy as np
import pytest

from nlwasserstein.interpolation import Interpolation
from nlwasserstein.kernels import RadialKernel
from nlwasserstein.reference import (
    HJConstants,
    Potential,
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
    w2,
)
from nlwasserstein.solver import SolveConfig, solve
from nlwasserstein.space import (
    build_grid,
    dirac_at,
    random_density,
    two_point_space,
    uniform_ball,
)
from nlwasserstein.utils import KernelFamily, PreconditionError, ThetaFamily


theta = Interpolation(ThetaFamily.logarithmic)
kernel = RadialKernel(KernelFamily.indicator, dim=1, scale=0.1)
line = build_grid(1, 1.0, 64, kernel)
x = line.points[:, 0]

small_line = build_grid(1, 1.0, 20, RadialKernel(KernelFamily.indicator, dim=1, scale=0.25))
rng = np.random.default_rng(7)
mu = random_density(small_line, rng)
nu = random_density(small_line, rng)


def test_potential_pairing():
    phi = Potential(np.ones(line.n))
    assert np.isclose(phi.pairing(line, dirac_at(line, 5, mass=2.0)), 2.0)
    assert np.isclose(Potential(x).lipschitz(line), 1.0)


def test_hopf_lax_zero():
    phi_t = hopf_lax(line, Potential(np.zeros(line.n)), 0.3)
    assert np.allclose(phi_t.values, 0.0)
    assert np.isclose(phi_t.time, 0.3)


def test_hopf_lax_linear():
    phi_t = hopf_lax(line, Potential(x), 0.1)
    inside = x >= 0.2
    assert np.allclose(phi_t.values[inside], x[inside] - 0.05, atol=1e-3)
    assert (phi_t.values <= x + 1e-12).all()


def test_hopf_lax_time():
    with pytest.raises(ValueError):
        hopf_lax(line, Potential(x), 0.0)


def test_c_transform():
    phi = Potential(np.sin(3 * x))
    assert np.allclose(c_transform(line, phi).values, hopf_lax(line, phi, 1.0).values)


def test_kantorovich_duality():
    phi0, phi1 = kantorovich_potential(small_line, mu, nu)
    distance, _ = w2(small_line, mu, nu)
    dual = phi1.pairing(small_line, nu) - phi0.pairing(small_line, mu)
    assert np.isclose(dual, 0.5 * distance**2, rtol=1e-6)

    half_sq = small_line.distance_matrix() ** 2 / 2
    assert (phi1.values[None, :] - phi0.values[:, None] <= half_sq + 1e-12).all()
    assert phi0.lipschitz(small_line) <= small_line.diameter * (1 + 1e-9)


def test_kantorovich_identical():
    phi0, phi1 = kantorovich_potential(small_line, mu, mu)
    assert np.allclose(phi0.values, 0.0)
    assert np.allclose(phi1.values, 0.0)


def test_hopf_lax_path():
    path = hopf_lax_path(line, Potential(x), n_times=8)
    assert len(path) == 9
    assert np.allclose([p.time for p in path], np.linspace(0, 1, 9))
    assert np.allclose(path[0].values, x)


def test_local_slopes_linear():
    assert np.allclose(local_slopes(line, 0.5 * x), 0.5)


def test_hj_residual_hopf_lax():
    path = hopf_lax_path(line, Potential(0.5 * x), n_times=16)
    assert hj_residual(line, path) <= 10 * line.spacing


def test_hj_residual_increasing():
    rising = [Potential(np.zeros(line.n), 0.0), Potential(np.ones(line.n), 1.0)]
    assert np.isclose(hj_residual(line, rising), 1.0)


def test_hj_residual_order():
    with pytest.raises(ValueError):
        hj_residual(line, [Potential(x, 1.0), Potential(x, 0.5)])


def test_hj_convolution_closure():
    path = hopf_lax_path(line, Potential(0.5 * x), n_times=16)
    closure = hj_convolution_closure(line, path, 0.3)
    assert set(closure) == {"residual", "residual_smoothed", "slack", "pass"}
    assert closure["residual"] <= closure["slack"]


def test_hj_constants():
    constants = HJConstants(C=2.0, A=0.5, s=0.25, eps=0.1, m2=2 / 3, dim=1)
    assert np.isclose(constants.factor, 2 / (0.01 * 2 / 3))
    assert np.isclose(constants.drift, 2.0 * 0.25 / 0.025)
    assert constants.to_dict()["M2"] == 2 / 3


def test_nl_hj_subsolution_needs_kernel():
    space = two_point_space(0.5)
    path = [Potential(np.zeros(2), 0.0), Potential(np.zeros(2), 1.0)]
    with pytest.raises(PreconditionError):
        nl_hj_subsolution(space, theta, path, 0.5)


def test_nl_hj_subsolution_scales():
    path = hopf_lax_path(line, Potential(0.5 * x), n_times=4)
    with pytest.raises(PreconditionError):
        nl_hj_subsolution(line, theta, path, 0.05)


def test_nl_hj_subsolution_residual():
    rising = [Potential(np.zeros(line.n), 0.0), Potential(np.ones(line.n), 1.0)]
    with pytest.raises(PreconditionError):
        nl_hj_subsolution(line, theta, rising, 0.5)


def test_support_radius():
    assert np.isclose(
        support_radius(small_line, dirac_at(small_line, 4), dirac_at(small_line, 14)), 0.25
    )


mu0 = uniform_ball(line, 19, 0.1)
mu1 = uniform_ball(line, 44, 0.1)


def test_hj_lower_bound():
    report = solve(line, theta, mu0, mu1, SolveConfig(time_steps=16))
    assert report.converged
    result = hj_lower_bound(
        line, theta, mu0, mu1, distance=report.distance, n_times=16, n_samples=20
    )
    assert result.subsolution.holds
    assert result.duality_holds
    assert result.holds
    assert result.lower_bound <= report.distance * (1 + 1e-3)
    assert result.headline_margin >= 0
    assert result.lower_bound >= 0
    assert np.isclose(result.s, math.sqrt(0.1))
    assert np.isclose(result.w2, w2(line, mu0, mu1)[0])
    assert result.subsolution.lhs.shape[0] == 16
    assert len(result.subsolution.potentials) == 17

    frame = result.to_dataframe()
    assert "headline_margin" in frame["quantity"].tolist()
    assert result.to_dict()["constants"]["s"] == result.s


def test_hj_lower_bound_needs_kernel():
    space = two_point_space(0.5)
    with pytest.raises(PreconditionError):
        hj_lower_bound(space, theta, dirac_at(space, 0), dirac_at(space, 1), distance=2.0)
