import json
import math

import numpy as np
import pytest

import nlwasserstein.reference.transport as transport

from nlwasserstein.kernels import RadialKernel, laplace_kernel
from nlwasserstein.reference import (
    TransportPlan,
    convolution_w2_estimates,
    exact_plan,
    w1,
    w2,
    w2_quantile,
)
from nlwasserstein.space import build_grid, dirac_at, gaussian_bump, random_density, uniform
from nlwasserstein.utils import KernelFamily, MassMismatchError, SizeLimitError


kernel = RadialKernel(KernelFamily.indicator, dim=1, scale=0.25)
line = build_grid(1, 1.0, 10, kernel)
ring = build_grid(1, 1.0, 10, kernel, periodic=True)

rng = np.random.default_rng(2024)
mu = random_density(line, rng)
nu = random_density(line, rng)


def test_w2_diracs():
    distance, plan = w2(line, dirac_at(line, 0), dirac_at(line, 9))
    assert np.isclose(distance, 0.9)
    assert plan.rows.tolist() == [0] and plan.cols.tolist() == [9]
    assert np.isclose(plan.masses.sum(), 1.0)


def test_w1_diracs():
    assert np.isclose(w1(line, dirac_at(line, 2), dirac_at(line, 7)), 0.5)


def test_w2_periodic():
    distance, _ = w2(ring, dirac_at(ring, 0), dirac_at(ring, 9))
    assert np.isclose(distance, 0.1)


def test_w2_matches_rearrangement():
    distance, _ = w2(line, mu, nu)
    assert np.isclose(distance, w2_quantile(line, mu, nu), rtol=1e-7)
    assert distance > 0


def test_w2_identical():
    distance, _ = w2(line, mu, mu)
    assert np.isclose(distance, 0.0, atol=1e-9)


def test_w1_below_w2():
    assert w1(line, mu, nu) <= w2(line, mu, nu)[0] + 1e-12


def test_w2_scales_with_mass():
    distance, _ = w2(line, mu.scale(2.0), nu.scale(2.0))
    assert np.isclose(distance, math.sqrt(2) * w2(line, mu, nu)[0])


def test_exact_plan_marginals():
    plan, info = exact_plan(line, mu, nu, line.distance_matrix() ** 2)
    first, second = plan.marginals(line.n)
    assert np.allclose(first, mu.values * line.ref_mass)
    assert np.allclose(second, nu.values * line.ref_mass)
    assert np.isclose(info["mass"], 1.0)
    assert info["u"].shape == info["source"].shape


def test_exact_plan_mass_mismatch():
    with pytest.raises(MassMismatchError):
        exact_plan(line, dirac_at(line, 0, mass=2.0), dirac_at(line, 3), line.distance_matrix())


def test_exact_plan_size_limit(monkeypatch):
    monkeypatch.setattr(transport, "MAX_SUPPORT", 5)
    with pytest.raises(SizeLimitError):
        w2(line, uniform(line), dirac_at(line, 0))


def test_w2_quantile_needs_line():
    with pytest.raises(ValueError):
        w2_quantile(ring, dirac_at(ring, 0), dirac_at(ring, 1))


def test_transport_plan_outputs(tmp_path):
    plan = TransportPlan(
        rows=np.array([0, 1]), cols=np.array([2, 2]), masses=np.array([0.25, 0.75]), cost=0.1
    )
    first, second = plan.marginals(3)
    assert np.allclose(first, [0.25, 0.75, 0.0])
    assert np.allclose(second, [0.0, 0.0, 1.0])
    assert list(plan.to_dataframe().columns) == ["source", "target", "mass"]

    plan.to_json(tmp_path / "plan.json")
    with open(tmp_path / "plan.json", "r") as fh:
        doc = json.load(fh)
    assert doc["target"] == [2, 2]
    assert np.isclose(doc["cost"], 0.1)


fine_line = build_grid(1, 1.0, 100, RadialKernel(KernelFamily.indicator, dim=1, scale=0.1))
bump = gaussian_bump(fine_line, 0.5, 0.1)


def test_convolution_estimates_laplace():
    estimates = convolution_w2_estimates(fine_line, bump, laplace_kernel(1, 0.05))
    assert np.isclose(estimates["bound"], math.sqrt(2) * 0.05)
    assert estimates["coupling"] >= estimates["w2"] - 1e-9
    assert estimates["pass"]


def test_convolution_estimates_zeta():
    estimates = convolution_w2_estimates(fine_line, bump, fine_line.kernel)
    assert np.isclose(estimates["bound"], math.sqrt(0.2) * 0.1)
    assert estimates["coupling"] >= estimates["w2"] - 1e-9
    assert estimates["pass"]
