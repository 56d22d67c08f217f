import numpy as np
import pytest

from nlwasserstein.dynamics import (
    concatenate,
    dirac_chain_curve,
    expel_curve_annuli,
    expel_curve_boundary,
    two_point_curve,
    two_set_curve,
)
from nlwasserstein.interpolation import Interpolation
from nlwasserstein.kernels import RadialKernel
from nlwasserstein.space import build_grid, dirac_at, two_point_space, uniform_ball
from nlwasserstein.utils import (
    CurveConstruction,
    KernelFamily,
    RegimeError,
    ResolutionError,
    ThetaFamily,
)


arithmetic = Interpolation(ThetaFamily.arithmetic)
logarithmic = Interpolation(ThetaFamily.logarithmic)

indicator = RadialKernel(KernelFamily.indicator, dim=1, scale=0.2)
fractional = RadialKernel(KernelFamily.fractional, dim=1, scale=0.3, s=0.5, c_s=1.0)
line = build_grid(1, 1.0, 100, indicator)


def test_two_point_curve_arithmetic():
    cert = two_point_curve(arithmetic, 0.5)
    assert np.isclose(cert.action_integral, 4.0)
    assert np.isclose(cert.length, 2.0)
    assert cert.construction == CurveConstruction.two_point
    assert cert.passes


def test_two_point_curve_logarithmic():
    cert = two_point_curve(logarithmic, 1.0)
    bound = logarithmic.two_point_distance(1.0) ** 2
    assert np.isclose(cert.claimed_bound, bound)
    assert np.isclose(cert.action_integral, bound, rtol=0.05)
    assert cert.residual <= cert.residual_tol


def test_two_point_curve_endpoints():
    cert = two_point_curve(logarithmic, 1.0, T_steps=64)
    assert np.allclose(cert.path.densities[0], [1.0, 0.0])
    assert np.allclose(cert.path.densities[-1], [0.0, 1.0])
    assert cert.path.n_steps == 64


def test_two_set_curve_errors():
    with pytest.raises(ValueError):
        two_set_curve(line, arithmetic, [3, 4], [4, 5])
    with pytest.raises(ResolutionError):
        two_set_curve(line, arithmetic, [0], [99])
    with pytest.raises(ValueError):
        two_set_curve(line, arithmetic, [3], [4], p_start=1.5)
    with pytest.raises(ResolutionError):
        two_set_curve(line, arithmetic, [], [4])


def test_two_set_curve_keeps_sets_uniform():
    cert = two_set_curve(line, arithmetic, [10, 11], [15, 16, 17], T=16)
    densities = cert.path.densities
    assert np.allclose(densities[:, 10], densities[:, 11])
    assert np.allclose(densities[:, 15], densities[:, 17])
    assert np.allclose(densities @ line.ref_mass, 1.0)
    assert cert.residual <= cert.residual_tol


def test_expel_curve_boundary():
    cert = expel_curve_boundary(line, None, arithmetic, 50, 0.1)
    assert np.isclose(cert.claimed_bound, 8.0)
    assert cert.action_integral <= cert.claimed_bound
    assert cert.passes
    assert np.allclose(cert.path.densities[0], dirac_at(line, 50).values)
    ball = uniform_ball(line, 50, 0.1, exclude_center=True)
    assert np.allclose(cert.path.densities[-1], ball.values)


def test_expel_curve_boundary_regime():
    with pytest.raises(RegimeError):
        expel_curve_boundary(line, None, logarithmic, 50, 0.1)


def test_expel_curve_annuli():
    space = build_grid(1, 1.0, 100, fractional)
    cert = expel_curve_annuli(space, None, logarithmic, 50, 0.08)
    assert cert.construction == CurveConstruction.expel_annuli
    assert len(cert.details["radii"]) == 4
    assert np.allclose(cert.path.densities[0], dirac_at(space, 50).values)
    assert np.allclose(cert.path.densities[-1], uniform_ball(space, 50, 0.08).values)
    assert cert.residual <= cert.residual_tol
    assert np.isfinite(cert.action_integral)
    assert cert.continuum_bound > 0


def test_expel_curve_annuli_regime():
    with pytest.raises(RegimeError):
        expel_curve_annuli(line, None, logarithmic, 50, 0.1)


def test_concatenate():
    pair = two_point_space(1.0)
    forward = two_point_curve(arithmetic, 1.0, T_steps=16)
    backward = two_set_curve(pair, arithmetic, [1], [0], T=16)
    cert = concatenate(pair, arithmetic, [forward, backward], CurveConstruction.two_point)
    assert np.isclose(cert.length, forward.length + backward.length)
    assert np.allclose(cert.path.densities[-1], [1.0, 0.0])
    assert np.isclose(cert.path.times[-1], 1.0)
    with pytest.raises(ValueError):
        concatenate(pair, arithmetic, [], CurveConstruction.two_point)
    with pytest.raises(ValueError):
        concatenate(pair, arithmetic, [forward, forward], CurveConstruction.two_point)


def test_dirac_chain_curve():
    cert = dirac_chain_curve(line, None, arithmetic, 20, 80)
    assert np.allclose(cert.path.densities[0], dirac_at(line, 20).values)
    assert np.allclose(cert.path.densities[-1], dirac_at(line, 80).values)
    assert cert.residual <= cert.residual_tol
    assert cert.passes
    assert cert.continuum_bound > 0


def test_dirac_chain_same_node():
    cert = dirac_chain_curve(line, None, arithmetic, 20, 20)
    assert cert.action_integral == 0.0


def test_dirac_chain_regime():
    with pytest.raises(RegimeError):
        dirac_chain_curve(line, None, logarithmic, 20, 80)


def test_curve_to_dict():
    doc = two_point_curve(arithmetic, 0.5, T_steps=8).to_dict()
    assert doc["construction"] == "TwoPoint"
    assert doc["passes"]
