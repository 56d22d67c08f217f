"""Nonlocal Wasserstein distance by time-discretized action minimization

Functions:
    | *solve()* distance and geodesic between two densities of equal mass.
    | *solve_smoothed()* same problem with the action evaluated on Laplace-smoothed densities.
    | *geodesic()* the optimal path of a converged report.
    | *restrict()* restriction of a path to a sub-interval, reparametrized to unit time.
"""

from __future__ import annotations

import json
import logging
import math
import warnings

from dataclasses import dataclass, field
from pathlib import Path as FilePath
from typing import Any, Optional, Union

import numpy as np
import pandas as pd

from scipy.optimize import minimize

from nlwasserstein.dynamics.action import nce_residual
from nlwasserstein.interpolation.theta import Interpolation
from nlwasserstein.kernels.smoothing import convolution_matrix, laplace_kernel
from nlwasserstein.solver.config import SolveConfig
from nlwasserstein.solver.reduced import ReducedProblem
from nlwasserstein.space.discrete_space import DiscreteSpace
from nlwasserstein.space.measures import Density, Path
from nlwasserstein.utils.errors import PreconditionError
from nlwasserstein.utils.formats import jsonable
from nlwasserstein.utils.types import Array, ConvolutionMode, SolveStatus


log = logging.getLogger(__name__)

MASS_RTOL = 1e-9
STALL_RTOL = 1e-6
STALL_WINDOW = 3


@dataclass
class SolveReport:
    """Outcome of a distance computation.

    Attributes:
        | distance (float): square root of the minimal total action.
        | objective (float): the minimal total action.
        | status (SolveStatus): Converged, MaxIters, Infeasible or InfiniteCost.
        | iterations (int): number of quasi-Newton iterations.
        | action_per_step (np.ndarray): action of each time step of the optimal path.
        | nce_residual (float): residual of the discrete continuity equation along the path.
        | path (Path): the optimal path, None when the cost is infinite or infeasible.
        | trace (pd.DataFrame): convergence trace (iteration, objective, grad_norm).
        | continuation (list): objectives of the atom-sharpening continuation, when run.
        | continuation_ratios (np.ndarray): per-decade growth factors of those objectives.
    """

    distance: float
    objective: float
    status: SolveStatus
    iterations: int = 0
    action_per_step: np.ndarray = field(default_factory=lambda: np.zeros(0))
    nce_residual: float = 0.0
    path: Optional[Path] = None
    trace: pd.DataFrame = field(
        default_factory=lambda: pd.DataFrame(columns=["iteration", "objective", "grad_norm"])
    )
    continuation: list[float] = field(default_factory=list)
    smoothing_scale: Optional[float] = None
    message: str = ""
    config: SolveConfig = field(default_factory=SolveConfig)

    @property
    def converged(self) -> bool:
        return self.status == SolveStatus.converged

    @property
    def continuation_ratios(self) -> np.ndarray:
        """Growth factor of the minimal action per decade of atom sharpening."""

        objectives = np.asarray(self.continuation, dtype=float)
        if objectives.size < 2:
            return np.zeros(0)

        return objectives[1:] / objectives[:-1]

    @property
    def speed_deviation(self) -> float:
        """Largest relative deviation of the per-step actions from their mean."""

        if self.action_per_step.size == 0:
            return 0.0
        mean = float(np.mean(self.action_per_step))
        if mean <= 0:
            return 0.0

        return float(np.max(np.abs(self.action_per_step - mean)) / mean)

    def to_dataframe(self) -> pd.DataFrame:

        if self.path is None:
            return pd.DataFrame(columns=["step", "t0", "t1", "action"])
        return pd.DataFrame(
            {
                "step": np.arange(self.path.n_steps),
                "t0": self.path.times[:-1],
                "t1": self.path.times[1:],
                "action": self.action_per_step,
            }
        )

    def to_dict(self) -> dict[str, Any]:

        return {
            "distance": self.distance,
            "objective": self.objective,
            "status": self.status.value,
            "iterations": self.iterations,
            "action_per_step": self.action_per_step,
            "nce_residual": self.nce_residual,
            "speed_deviation": self.speed_deviation,
            "continuation": self.continuation,
            "continuation_ratios": self.continuation_ratios,
            "smoothing_scale": self.smoothing_scale,
            "message": self.message,
            "config": self.config.to_dict(),
        }

    def to_json(self, file_path: Union[str, FilePath]) -> None:

        with open(file_path, "w", encoding="utf-8") as fh:
            json.dump(jsonable(self.to_dict()), fh, indent=2)

    def trace_to_csv(self, file_path: Union[str, FilePath]) -> None:
        self.trace.to_csv(file_path, index=False)


def _values(mu: Union[Density, Array]) -> np.ndarray:
    return mu.values if isinstance(mu, Density) else np.asarray(mu, dtype=float)


def _trivial_report(space: DiscreteSpace, rho: np.ndarray, config: SolveConfig) -> SolveReport:

    T = config.time_steps
    path = Path(
        np.linspace(0.0, 1.0, T + 1),
        np.repeat(rho[None, :], T + 1, axis=0),
        np.zeros((T, space.n_edges)),
    )
    return SolveReport(
        distance=0.0,
        objective=0.0,
        status=SolveStatus.converged,
        action_per_step=np.zeros(T),
        path=path,
        message="identical endpoints",
        config=config,
    )


def _stalled(rows: list[dict[str, float]], objective: float, config: SolveConfig) -> bool:
    """True when the last iterations no longer move the objective or the gradient vanishes."""

    if not rows:
        return False
    last = rows[-1]
    if math.isfinite(last["grad_norm"]) and last["grad_norm"] <= math.sqrt(config.grad_tol):
        return True
    if len(rows) < 2:
        return False
    recent = [row["objective"] for row in rows[-STALL_WINDOW:]] + [objective]
    spread = max(recent) - min(recent)

    return bool(np.isfinite(recent).all() and spread <= STALL_RTOL * max(1.0, abs(objective)))


def _minimize(
    space: DiscreteSpace,
    theta: Interpolation,
    rho0: np.ndarray,
    rho1: np.ndarray,
    config: SolveConfig,
    smoothing: Optional[np.ndarray] = None,
) -> SolveReport:

    mass = float(np.dot(rho0, space.ref_mass))
    floor = config.rho_floor * mass / space.total_mass
    problem = ReducedProblem(space, theta, rho0, rho1, config.time_steps, floor, smoothing)

    cache: dict[str, float] = {}
    rows: list[dict[str, float]] = []

    def fun(x: np.ndarray) -> tuple[float, np.ndarray]:
        value, grad = problem.value_and_grad(x)
        cache["objective"] = value
        cache["grad_norm"] = float(np.max(np.abs(grad))) if grad.size else 0.0
        return value, grad

    def callback(xk: np.ndarray) -> None:
        rows.append({"iteration": len(rows) + 1, **cache})

    log.debug(f"Solving with {problem.n_vars} variables and {config.time_steps} time steps")
    x0 = problem.initial_point(config.init_mixing)
    result = minimize(
        fun,
        x0,
        jac=True,
        method="L-BFGS-B",
        callback=callback,
        options={
            "maxiter": config.max_iters,
            "maxfun": 4 * config.max_iters,
            "ftol": config.gap_tol,
            "gtol": config.grad_tol,
            "maxcor": config.memory,
        },
    )

    path, per_step = problem.path(result.x)
    objective = float(np.sum(per_step) / config.time_steps)
    residual = nce_residual(space, path)
    rates = np.abs(np.diff(path.densities, axis=0)) * config.time_steps
    rate_scale = max(1.0, float(np.max(rates)))
    feasible = bool(residual <= config.feas_tol * rate_scale)
    if not feasible:
        warnings.warn(f"Continuity equation residual {residual:.3e} above tolerance.")

    if result.status == 0:
        status = SolveStatus.converged
    elif result.status == 1:
        status = SolveStatus.max_iters
        warnings.warn(f"Maximum number of iterations reached: {result.message}")
    elif feasible and math.isfinite(objective) and _stalled(rows, objective, config):
        status = SolveStatus.converged
        warnings.warn(f"Optimizer stopped at its precision limit: {result.message}")
    else:
        status = SolveStatus.max_iters
        warnings.warn(f"Optimizer stopped before convergence: {result.message}")

    report = SolveReport(
        distance=math.sqrt(max(objective, 0.0)),
        objective=objective,
        status=status,
        iterations=int(result.nit),
        action_per_step=per_step,
        nce_residual=residual,
        path=path,
        trace=pd.DataFrame(rows, columns=["iteration", "objective", "grad_norm"]),
        message=str(result.message),
        config=config,
    )
    log.info(
        f"Solved: distance {report.distance:.6g}, {report.iterations} iterations, {status.value}"
    )

    return report


def _atom_nodes(rho0: np.ndarray, rho1: np.ndarray) -> np.ndarray:
    """Nodes carrying all of one endpoint's mass where the other endpoint has none."""

    atoms = []
    for a, b in ((rho0, rho1), (rho1, rho0)):
        support = np.flatnonzero(a > 0)
        if support.size == 1 and b[support[0]] == 0:
            atoms.append(int(support[0]))

    return np.array(sorted(set(atoms)), dtype=np.int64)


def _sharpened(space: DiscreteSpace, atoms: np.ndarray, factor: float) -> DiscreteSpace:

    ref_mass = space.ref_mass.copy()
    ref_mass[atoms] /= factor
    return DiscreteSpace(
        space.points,
        ref_mass,
        space.edge_i,
        space.edge_j,
        space.weights,
        kernel=space.kernel,
        periodic=space.periodic,
        extent=space.extent,
    )


def _needs_continuation(space: DiscreteSpace, theta: Interpolation, atoms: np.ndarray) -> bool:
    """Regime where an atom may be impossible to expel: κ_θ = 0 with an integrable kernel.

    Graphs without a kernel have finite distances. When the atoms are all the nodes of their
    components, sharpening rescales those components uniformly and the action only scales.
    """

    if atoms.size == 0 or theta.kappa > 0:
        return False
    if space.kernel is None or not space.kernel.is_integrable():
        return False
    _, comp = space.components()
    nodes = np.flatnonzero(np.isin(comp, comp[atoms]))

    return not np.isin(nodes, atoms).all()


def _diverges(objectives: list[float]) -> bool:

    increments = np.diff(objectives)
    if increments.size == 0 or (increments <= 0).any():
        return False

    return bool(increments[-1] >= 0.5 * increments[0])


def _continuation(
    space: DiscreteSpace,
    theta: Interpolation,
    rho0: np.ndarray,
    rho1: np.ndarray,
    atoms: np.ndarray,
    config: SolveConfig,
) -> tuple[SolveReport, list[float]]:
    """Sharpens the atoms by one decade at a time and records the minimal actions."""

    first = _minimize(space, theta, rho0, rho1, config)
    objectives = [first.objective]
    for decade in range(1, config.continuation_decades):
        factor = 10.0**decade
        sharp0, sharp1 = rho0.copy(), rho1.copy()
        sharp0[atoms] *= factor
        sharp1[atoms] *= factor
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            report = _minimize(_sharpened(space, atoms, factor), theta, sharp0, sharp1, config)
        objectives.append(report.objective)
        log.debug(f"Continuation decade {decade}: objective {report.objective:.6g}")

    return first, objectives


def _endpoint_check(
    space: DiscreteSpace, rho0: np.ndarray, rho1: np.ndarray, config: SolveConfig
) -> Optional[SolveReport]:
    """Report of the degenerate cases, or None when the minimization must run."""

    m = space.ref_mass
    mass0, mass1 = float(np.dot(rho0, m)), float(np.dot(rho1, m))
    if mass0 <= 0 or mass1 <= 0:
        raise ValueError("Both measures must carry a positive mass!")
    if abs(mass0 - mass1) > MASS_RTOL * max(mass0, mass1):
        log.warning(f"Mass mismatch: {mass0} versus {mass1}")
        return SolveReport(
            distance=math.inf,
            objective=math.inf,
            status=SolveStatus.infeasible,
            message="endpoint masses differ",
            config=config,
        )
    if np.allclose(rho0, rho1, rtol=0.0, atol=1e-14 * float(np.max(np.abs(rho0)))):
        return _trivial_report(space, rho0, config)

    return None


def solve(
    space: DiscreteSpace,
    theta: Interpolation,
    mu0: Union[Density, Array],
    mu1: Union[Density, Array],
    config: Optional[SolveConfig] = None,
) -> SolveReport:
    """Computes W(μ₀, μ₁) on the space and a constant-speed geodesic.

    Args:
        space (DiscreteSpace): the space with kernel-assembled edges.
        theta (Interpolation): the interpolation of the action.
        mu0, mu1 (Density or Array): endpoint densities of equal positive mass.
        config (Optional[SolveConfig]): solver parameters. Defaults to SolveConfig().

    Returns:
        SolveReport: distance, path and convergence diagnostics.
    """

    config = SolveConfig() if config is None else config
    rho0, rho1 = _values(mu0), _values(mu1)
    degenerate = _endpoint_check(space, rho0, rho1, config)
    if degenerate is not None:
        return degenerate

    n_comp, comp = space.components()
    if n_comp > 1:
        m = space.ref_mass
        comp0 = np.bincount(comp, rho0 * m, minlength=n_comp)
        comp1 = np.bincount(comp, rho1 * m, minlength=n_comp)
        if (np.abs(comp0 - comp1) > MASS_RTOL * comp0.sum()).any():
            log.info("Components of the edge graph carry different masses")
            return SolveReport(
                distance=math.inf,
                objective=math.inf,
                status=SolveStatus.infinite_cost,
                message="mass must cross between disconnected components",
                config=config,
            )

    atoms = _atom_nodes(rho0, rho1)
    if _needs_continuation(space, theta, atoms):
        report, objectives = _continuation(space, theta, rho0, rho1, atoms, config)
        report.continuation = objectives
        if _diverges(objectives):
            ratios = np.round(report.continuation_ratios, 3).tolist()
            log.info(f"Atom-sharpening objectives {objectives} diverge, ratios {ratios}")
            return SolveReport(
                distance=math.inf,
                objective=math.inf,
                status=SolveStatus.infinite_cost,
                iterations=report.iterations,
                continuation=objectives,
                message="objective diverges under atom sharpening",
                config=config,
            )
        return report

    return _minimize(space, theta, rho0, rho1, config)


def solve_smoothed(
    space: DiscreteSpace,
    theta: Interpolation,
    mu0: Union[Density, Array],
    mu1: Union[Density, Array],
    s: float,
    config: Optional[SolveConfig] = None,
) -> SolveReport:
    """Computes W_{η,ε,s}(μ₀, μ₁): the action is evaluated on K_s∗ρ along the path.

    The returned path holds the smoothed densities and their fluxes.
    """

    config = SolveConfig() if config is None else config
    rho0, rho1 = _values(mu0), _values(mu1)
    degenerate = _endpoint_check(space, rho0, rho1, config)
    if degenerate is not None:
        degenerate.smoothing_scale = s
        return degenerate

    n_comp, _ = space.components()
    if n_comp > 1:
        raise PreconditionError("The smoothed distance needs a connected edge graph.")

    smoothing = convolution_matrix(laplace_kernel(space.dim, s), space, ConvolutionMode.measure)
    sig0, sig1 = smoothing @ rho0, smoothing @ rho1
    if np.allclose(sig0, sig1, rtol=0.0, atol=1e-12 * float(np.max(np.abs(sig0)))):
        report = _trivial_report(space, sig0, config)
    else:
        report = _minimize(space, theta, rho0, rho1, config, smoothing)
    report.smoothing_scale = s

    return report


def geodesic(report: SolveReport) -> Path:

    if not report.converged or report.path is None:
        raise PreconditionError(f"No geodesic for a report with status {report.status.value}.")

    return report.path


def restrict(path: Path, t0: float, t1: float) -> Path:
    """Sub-path on [t0, t1], reparametrized to unit time.

    The interval ends are snapped to the time grid of the path.
    """

    if not path.times[0] <= t0 < t1 <= path.times[-1]:
        raise ValueError("The restriction interval must be a nonempty sub-interval of the path!")

    k0 = int(np.argmin(np.abs(path.times - t0)))
    k1 = int(np.argmin(np.abs(path.times - t1)))
    if k1 <= k0:
        raise ValueError("The restriction interval is shorter than one time step!")
    if not (np.isclose(path.times[k0], t0) and np.isclose(path.times[k1], t1)):
        warnings.warn(f"Restriction [{t0}, {t1}] snapped to the time grid.")

    sub = Path(
        path.times[k0 : k1 + 1].copy(),
        path.densities[k0 : k1 + 1].copy(),
        path.fluxes[k0:k1].copy(),
    )

    return sub.reparametrize(0.0, 1.0)
