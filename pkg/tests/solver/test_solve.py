import importlib
import json
import math

import numpy as np
import pandas as pd
import pytest

from scipy.optimize import OptimizeResult

from nlwasserstein.interpolation import Interpolation
from nlwasserstein.kernels import RadialKernel, convolution_matrix, laplace_kernel
from nlwasserstein.solver import (
    ReducedProblem,
    SolveConfig,
    geodesic,
    restrict,
    solve,
    solve_smoothed,
)
from nlwasserstein.space import (
    build_grid,
    dirac_at,
    from_points,
    gaussian_bump,
    two_point_space,
)
from nlwasserstein.utils import (
    ConfigError,
    KernelFamily,
    PreconditionError,
    SolveStatus,
    ThetaFamily,
)


arithmetic = Interpolation(ThetaFamily.arithmetic)
geometric = Interpolation(ThetaFamily.geometric)
logarithmic = Interpolation(ThetaFamily.logarithmic)

pair = two_point_space(0.5)
delta0 = np.array([1.0, 0.0])
delta1 = np.array([0.0, 1.0])
config = SolveConfig(time_steps=64)
report = solve(pair, arithmetic, delta0, delta1, config)

line = build_grid(1, 1.0, 16, RadialKernel(KernelFamily.indicator, dim=1, scale=0.25))
bump0 = gaussian_bump(line, 0.3, 0.1)
bump1 = gaussian_bump(line, 0.7, 0.1)


def test_two_point_distance():
    assert report.status == SolveStatus.converged
    assert report.converged
    assert np.isclose(report.distance, 2.0, atol=2e-3)
    assert np.isclose(report.objective, report.distance**2)


def test_two_point_path():
    path = report.path
    assert path.n_steps == 64
    assert np.allclose(path.densities[0], delta0)
    assert np.allclose(path.densities[-1], delta1)
    assert np.allclose(path.masses(pair.ref_mass), 1.0)
    assert report.nce_residual < 1e-6


def test_two_point_constant_speed():
    assert report.action_per_step.shape == (64,)
    assert report.speed_deviation < 0.05


def test_identical_endpoints():
    same = solve(line, logarithmic, bump0, bump0, SolveConfig(time_steps=4))
    assert same.distance == 0.0
    assert same.converged
    assert same.message == "identical endpoints"
    assert same.path.n_steps == 4


def test_mass_mismatch():
    result = solve(pair, arithmetic, delta0, 2 * delta1)
    assert result.status == SolveStatus.infeasible
    assert result.distance == math.inf
    assert result.path is None


def test_zero_mass():
    with pytest.raises(ValueError):
        solve(pair, arithmetic, np.zeros(2), np.zeros(2))


def test_disconnected_components():
    split = from_points(np.array([0.0, 1.0, 2.0]), np.ones(3), edges=[(0, 1, 1.0)])
    result = solve(split, arithmetic, dirac_at(split, 0), dirac_at(split, 2))
    assert result.status == SolveStatus.infinite_cost
    assert result.distance == math.inf


def test_symmetry():
    short = SolveConfig(time_steps=8)
    forward = solve(line, arithmetic, bump0, bump1, short)
    backward = solve(line, arithmetic, bump1, bump0, short)
    assert forward.converged and backward.converged
    assert np.isclose(forward.distance, backward.distance, rtol=1e-3)


def test_geodesic():
    assert geodesic(report) is report.path
    with pytest.raises(PreconditionError):
        geodesic(solve(pair, arithmetic, delta0, 2 * delta1))


def test_restrict():
    sub = restrict(report.path, 0.25, 0.75)
    assert sub.n_steps == 32
    assert np.isclose(sub.times[0], 0.0) and np.isclose(sub.times[-1], 1.0)
    assert np.allclose(sub.fluxes, report.path.fluxes[16:48] * 0.5)
    assert np.allclose(sub.densities[0], report.path.densities[16])


def test_restrict_errors():
    with pytest.raises(ValueError):
        restrict(report.path, 0.5, 0.5)
    with pytest.raises(ValueError):
        restrict(report.path, -0.1, 0.5)
    with pytest.warns(UserWarning):
        restrict(report.path, 0.26, 0.75)


def test_report_outputs(tmp_path):
    doc = report.to_dict()
    assert doc["status"] == "Converged"
    assert doc["config"]["time_steps"] == 64
    report.to_json(tmp_path / "report.json")
    with open(tmp_path / "report.json", "r", encoding="utf-8") as fh:
        assert np.isclose(json.load(fh)["distance"], report.distance)
    report.trace_to_csv(tmp_path / "trace.csv")
    trace = pd.read_csv(tmp_path / "trace.csv")
    assert list(trace.columns) == ["iteration", "objective", "grad_norm"]
    frame = report.to_dataframe()
    assert list(frame.columns) == ["step", "t0", "t1", "action"]
    assert frame.shape[0] == 64


def test_solve_smoothed():
    smoothed = solve_smoothed(line, arithmetic, bump0, bump1, 0.2, SolveConfig(time_steps=8))
    assert smoothed.smoothing_scale == 0.2
    assert smoothed.converged
    assert 0 < smoothed.distance < math.inf


def test_solve_smoothed_degenerate():
    same = solve_smoothed(line, arithmetic, bump0, bump0, 0.2)
    assert same.distance == 0.0
    assert same.smoothing_scale == 0.2
    split = from_points(np.array([0.0, 1.0, 2.0]), np.ones(3), edges=[(0, 1, 1.0)])
    with pytest.raises(PreconditionError):
        solve_smoothed(split, arithmetic, dirac_at(split, 0), dirac_at(split, 1), 0.5)


def test_reduced_gradient():
    problem = ReducedProblem(line, logarithmic, bump0.values, bump1.values, 4, 1e-9)
    rng = np.random.default_rng(11)
    x = problem.initial_point(0.1) + 0.1 * rng.normal(size=problem.n_vars)
    direction = rng.normal(size=problem.n_vars)
    _, grad = problem.value_and_grad(x)
    h = 1e-6
    hi, _ = problem.value_and_grad(x + h * direction)
    lo, _ = problem.value_and_grad(x - h * direction)
    assert np.isclose((hi - lo) / (2 * h), grad @ direction, rtol=1e-5)


def test_reduced_densities_keep_mass():
    problem = ReducedProblem(line, logarithmic, bump0.values, bump1.values, 4, 1e-9)
    x = np.random.default_rng(12).normal(size=problem.n_vars)
    densities = problem.densities(x)
    assert densities.shape == (5, line.n)
    assert np.allclose(densities @ line.ref_mass, 1.0)
    assert (densities[1:-1] >= 1e-9).all()


def test_solve_config():
    assert SolveConfig().time_steps == 16
    with pytest.raises(ValueError):
        SolveConfig(time_steps=1)
    with pytest.raises(ValueError):
        SolveConfig(init_mixing=1.0)
    with pytest.raises(ValueError):
        SolveConfig(feas_tol=0.0)
    assert SolveConfig.from_dict({"time_steps": 32}).time_steps == 32
    with pytest.raises(ConfigError):
        SolveConfig.from_dict({"steps": 32})
    with pytest.raises(ConfigError):
        SolveConfig.from_dict({"time_steps": 0})
    assert SolveConfig().to_dict()["memory"] == 20


solve_module = importlib.import_module("nlwasserstein.solver.solve")
reduced_module = importlib.import_module("nlwasserstein.solver.reduced")


@pytest.mark.parametrize("theta", [logarithmic, geometric])
def test_two_point_vanishing_kappa(theta):
    result = solve(pair, theta, delta0, delta1, SolveConfig(time_steps=256))
    assert result.status == SolveStatus.converged
    assert result.continuation == []
    assert np.isclose(result.distance, 2 * theta.c_theta, atol=5e-3)
    assert np.isclose(result.distance, theta.two_point_distance(0.5), atol=5e-3)


def test_atom_continuation_growth():
    grid = build_grid(1, 1.0, 32, RadialKernel(KernelFamily.indicator, dim=1, scale=0.2))
    result = solve(grid, logarithmic, dirac_at(grid, 6), dirac_at(grid, 25))
    assert result.status == SolveStatus.infinite_cost
    assert result.distance == math.inf
    assert len(result.continuation) == 4
    assert (np.diff(result.continuation) > 0).all()
    ratios = result.continuation_ratios
    assert ratios.shape == (3,)
    assert ((ratios > 1.1) & (ratios < 1.5)).all()
    assert np.allclose(result.continuation, [46.4, 63.9, 79.7, 94.0], rtol=0.05)
    assert np.allclose(result.to_dict()["continuation_ratios"], ratios)


def test_abnormal_stop_without_progress(monkeypatch):
    def fake_minimize(fun, x0, callback=None, **kwargs):
        value, _ = fun(x0)
        return OptimizeResult(x=x0, status=2, nit=0, fun=value, message="ABNORMAL")

    monkeypatch.setattr(solve_module, "minimize", fake_minimize)
    with pytest.warns(UserWarning, match="before convergence"):
        result = solve(line, arithmetic, bump0, bump1, SolveConfig(time_steps=4))
    assert result.status == SolveStatus.max_iters
    assert not result.converged


def test_abnormal_stop_after_stall(monkeypatch):
    def fake_minimize(fun, x0, callback=None, **kwargs):
        for _ in range(3):
            value, _ = fun(x0)
            callback(x0)
        return OptimizeResult(x=x0, status=2, nit=3, fun=value, message="ABNORMAL")

    monkeypatch.setattr(solve_module, "minimize", fake_minimize)
    with pytest.warns(UserWarning, match="precision limit"):
        result = solve(line, arithmetic, bump0, bump1, SolveConfig(time_steps=4))
    assert result.status == SolveStatus.converged
    assert result.trace.shape[0] == 3


def test_reduced_sparse_matches_dense(monkeypatch):
    problem = ReducedProblem(line, logarithmic, bump0.values, bump1.values, 4, 1e-9)
    x = problem.initial_point(0.1) + 0.1 * np.random.default_rng(13).normal(size=problem.n_vars)
    dense_value, dense_grad = problem.value_and_grad(x)
    monkeypatch.setattr(reduced_module, "DENSE_LIMIT", 0)
    sparse_value, sparse_grad = problem.value_and_grad(x)
    assert np.isclose(sparse_value, dense_value, rtol=1e-10)
    assert np.allclose(sparse_grad, dense_grad, rtol=1e-8, atol=1e-12)


def test_triangle_inequality():
    short = SolveConfig(time_steps=8)
    middle = gaussian_bump(line, 0.5, 0.15)
    direct = solve(line, logarithmic, bump0, bump1, short)
    first = solve(line, logarithmic, bump0, middle, short)
    second = solve(line, logarithmic, middle, bump1, short)
    assert direct.converged and first.converged and second.converged
    assert direct.distance <= first.distance + second.distance + 3e-3


def test_mass_scaling():
    short = SolveConfig(time_steps=8)
    base = solve(line, logarithmic, bump0, bump1, short)
    scaled = solve(line, logarithmic, 3 * bump0.values, 3 * bump1.values, short)
    assert scaled.converged
    assert np.isclose(scaled.objective, 3 * base.objective, rtol=1e-4)


def test_solve_smoothed_sandwich():
    ring = build_grid(
        1, 1.0, 16, RadialKernel(KernelFamily.indicator, dim=1, scale=0.25), periodic=True
    )
    rng = np.random.default_rng(14)
    mu0 = rng.uniform(0.5, 1.5, ring.n)
    mu1 = rng.uniform(0.5, 1.5, ring.n)
    mu0, mu1 = mu0 / np.dot(mu0, ring.ref_mass), mu1 / np.dot(mu1, ring.ref_mass)
    short = SolveConfig(time_steps=8)
    smoothed = solve_smoothed(ring, logarithmic, mu0, mu1, 0.2, short)
    plain = solve(ring, logarithmic, mu0, mu1, short)
    smoothing = convolution_matrix(laplace_kernel(1, 0.2), ring)
    of_smoothed = solve(ring, logarithmic, smoothing @ mu0, smoothing @ mu1, short)
    assert smoothed.converged and plain.converged and of_smoothed.converged
    assert of_smoothed.distance <= smoothed.distance + 1e-3
    assert smoothed.distance <= plain.distance + 1e-3


def test_monotone_time_refinement():
    distances = [
        solve(line, logarithmic, bump0, bump1, SolveConfig(time_steps=steps)).distance
        for steps in (8, 16, 32)
    ]
    increments = np.abs(np.diff(distances))
    assert increments[1] <= increments[0]


def test_floor_halving():
    short = SolveConfig(time_steps=8)
    base = solve(line, arithmetic, bump0, bump1, short)
    halved = solve(line, arithmetic, bump0, bump1, SolveConfig(time_steps=8, rho_floor=5e-10))
    assert np.isclose(halved.distance, base.distance, rtol=1e-4)
