import json

import numpy as np
import pandas as pd
import pytest

from nlwasserstein.kernels import RadialKernel
from nlwasserstein.space import (
    Density,
    Flux,
    Path,
    build_grid,
    density_to_json,
    dirac_at,
    gaussian_bump,
    measure_from_spec,
    min_measure,
    random_density,
    tv_distance,
    two_point_space,
    uniform,
    uniform_ball,
)
from nlwasserstein.utils import ConfigError, KernelFamily, MassMismatchError


line = build_grid(1, 1.0, 10, RadialKernel(KernelFamily.indicator, dim=1, scale=0.25))


def test_dirac_at():
    dirac = dirac_at(line, 3)
    assert np.isclose(dirac.values[3], 10.0)
    assert np.isclose(dirac.total_mass, 1.0)
    assert list(dirac.support) == [3]
    assert np.isclose(dirac_at(line, 3, mass=2.0).total_mass, 2.0)


def test_uniform():
    density = uniform(line)
    assert np.allclose(density.values, 1.0)
    assert density.is_probability()


def test_uniform_ball():
    density = uniform_ball(line, 4, 0.1)
    assert list(density.support) == [3, 4, 5]
    assert np.allclose(density.values[[3, 4, 5]], 1 / 0.3)
    assert density.is_probability()


def test_gaussian_bump():
    bump = gaussian_bump(line, 0.45, 0.1)
    assert bump.is_probability()
    assert (bump.values > 0).all()
    assert int(np.argmax(bump.values)) == 4


def test_random_density():
    rng = np.random.default_rng(0)
    density = random_density(line, rng)
    assert density.is_probability()
    assert (density.values > 0).all()
    sparse_density = random_density(line, rng, n_atoms=3)
    assert sparse_density.support.shape[0] == 3
    assert sparse_density.is_probability()


def test_density_validation():
    with pytest.raises(ValueError):
        Density(np.array([1.0, -1.0]), np.ones(2))
    with pytest.raises(AssertionError):
        Density(np.ones(3), np.ones(2))


def test_density_scaling():
    density = Density(np.array([1.0, 3.0]), np.array([0.5, 0.5]))
    assert np.isclose(density.total_mass, 2.0)
    assert np.allclose(density.masses, [0.5, 1.5])
    assert np.isclose(density.normalized().total_mass, 1.0)
    assert np.isclose(density.scale(3.0).total_mass, 6.0)
    assert not density.is_probability()


def test_tv_distance():
    a = dirac_at(line, 0)
    b = dirac_at(line, 9)
    assert np.isclose(tv_distance(a, b), 1.0)
    assert tv_distance(a, a) == 0.0
    assert np.isclose(tv_distance(uniform(line), uniform_ball(line, 4, 0.1)), 0.7)


def test_tv_distance_mass_mismatch():
    with pytest.raises(MassMismatchError):
        tv_distance(dirac_at(line, 0), dirac_at(line, 1, mass=2.0))


def test_min_measure():
    common = min_measure(uniform(line), uniform_ball(line, 4, 0.1))
    assert np.allclose(common.values[[3, 4, 5]], 1.0)
    assert np.isclose(common.total_mass, 0.3)


def test_flux_as_matrix():
    space = two_point_space(1.0)
    mat = Flux(np.array([0.7])).as_matrix(space)
    assert np.allclose(mat, -mat.T)
    assert np.isclose(mat[0, 1], 0.7)
    with pytest.raises(ValueError):
        Flux(np.array([np.inf]))


times = np.array([0.0, 0.5, 1.0])
densities = np.array([[2.0, 0.0], [1.0, 1.0], [0.0, 2.0]])
fluxes = np.array([[2.0], [2.0]])
path = Path(times, densities, fluxes)


def test_path_properties():
    assert path.n_steps == 2
    assert np.allclose(path.dt, 0.5)
    assert np.allclose(path.midpoint_densities, [[1.5, 0.5], [0.5, 1.5]])
    assert np.allclose(path.masses(np.ones(2)), 2.0)
    assert np.isclose(path.density(1, np.ones(2)).total_mass, 2.0)


def test_path_validation():
    with pytest.raises(AssertionError):
        Path(times, densities[:2], fluxes)
    with pytest.raises(AssertionError):
        Path(times, densities, fluxes[:1])
    with pytest.raises(ValueError):
        Path(np.array([0.0, 1.0, 0.5]), densities, fluxes)


def test_path_reparametrize():
    slow = path.reparametrize(0.0, 2.0)
    assert np.allclose(slow.times, [0.0, 1.0, 2.0])
    assert np.allclose(slow.fluxes, 1.0)
    assert np.allclose(slow.densities, densities)


def test_path_scale_mass():
    half = path.scale_mass(0.5)
    assert np.allclose(half.masses(np.ones(2)), 1.0)
    assert np.allclose(half.fluxes, 1.0)


def test_path_to_dataframe():
    frame = path.to_dataframe()
    assert frame.shape == (6, 3)
    assert list(frame.columns) == ["t", "node", "density"]


def test_measure_from_spec_dirac():
    assert measure_from_spec(line, {"shape": "dirac", "at": 0.33}).support[0] == 3
    dirac = measure_from_spec(line, {"shape": "dirac", "node": 0, "mass": 2.0})
    assert np.isclose(dirac.total_mass, 2.0)


def test_measure_from_spec_shapes():
    ball = measure_from_spec(line, {"shape": "uniform-ball", "center": [0.45], "radius": 0.1})
    assert list(ball.support) == [3, 4, 5]
    bump = measure_from_spec(line, {"shape": "gaussian-bump", "center": 0.45, "width": 0.1})
    assert bump.is_probability()
    assert measure_from_spec(line, {"shape": "uniform"}).is_probability()


def test_measure_from_spec_csv(tmp_path):
    pd.DataFrame({"node": [1, 2], "density": [1.0, 1.0]}).to_csv(
        tmp_path / "mu.csv", index=False
    )
    density = measure_from_spec(line, {"shape": "from-csv", "file": "mu.csv"}, tmp_path)
    assert list(density.support) == [1, 2]
    assert np.allclose(density.values[[1, 2]], 5.0)


def test_measure_from_spec_errors():
    with pytest.raises(ConfigError):
        measure_from_spec(line, {"shape": "triangle"})
    with pytest.raises(ConfigError):
        measure_from_spec(line, {"shape": "dirac"})
    with pytest.raises(ConfigError):
        measure_from_spec(line, {"shape": "gaussian-bump", "center": 0.5})


def test_density_to_json(tmp_path):
    density_to_json(uniform(line), tmp_path / "density.json")
    with open(tmp_path / "density.json", "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    assert np.isclose(doc["total_mass"], 1.0)
    assert len(doc["values"]) == 10
