"""Convergence of the rescaled nonlocal distance to W₂ as the kernel scale shrinks

For each scale ε the experiment solves W_{η_ε,θ} on a grid of spacing at most ε/10, rescales it
by ε√(M₂(η)/2d) and compares the result with the exact W₂ through the two one-sided envelopes
of the estimates. The empirical rate of the error is fitted on log-log axes.
"""

from __future__ import annotations

import logging
import math
import warnings

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional, Sequence, Union

import numpy as np
import pandas as pd
import statsmodels.api as sm

from nlwasserstein.dynamics import constants
from nlwasserstein.interpolation.theta import Interpolation
from nlwasserstein.kernels.radial import RadialKernel
from nlwasserstein.reference.hamilton_jacobi import support_radius
from nlwasserstein.reference.transport import w2
from nlwasserstein.solver.config import SolveConfig
from nlwasserstein.solver.solve import solve
from nlwasserstein.space.discrete_space import DiscreteSpace, build_grid
from nlwasserstein.space.measures import Density, measure_from_spec
from nlwasserstein.utils.errors import ResolutionError


log = logging.getLogger(__name__)

MONOTONE_SLACK = 0.1

MeasureBuilder = Union[dict[str, Any], Callable[[DiscreteSpace], Density]]


@dataclass
class ConvergenceTable:
    """Rows (eps, distance, scaled, w2, error, upper_env, lower_env) ordered by decreasing ε."""

    frame: pd.DataFrame
    slope: float = math.nan
    slope_se: float = math.nan
    monotone: bool = field(init=False)

    def __post_init__(self) -> None:

        errors = self.frame["error"].to_numpy()
        self.monotone = bool(
            np.all(errors[1:] <= (1 + MONOTONE_SLACK) * errors[:-1] + 1e-12)
        )

    @property
    def upper_holds(self) -> bool:
        return bool(self.frame["upper_ok"].all())

    @property
    def lower_holds(self) -> bool:
        return bool(self.frame["lower_ok"].all())

    @property
    def holds(self) -> bool:
        return self.upper_holds and self.lower_holds

    def to_csv(self, file_path: Union[str, Path]) -> None:
        self.frame.to_csv(file_path, index=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "rows": self.frame.to_dict(orient="records"),
            "slope": self.slope,
            "slope_se": self.slope_se,
            "monotone": self.monotone,
            "upper_holds": self.upper_holds,
            "lower_holds": self.lower_holds,
        }


def _measure(space: DiscreteSpace, builder: MeasureBuilder) -> Density:

    if callable(builder):
        return builder(space)
    return measure_from_spec(space, builder)


def _fit_rate(eps: np.ndarray, errors: np.ndarray) -> tuple[float, float]:
    """Slope and standard error of log(error) against log(ε)."""

    keep = errors > 0
    if keep.sum() < 2:
        return math.nan, math.nan
    X = sm.add_constant(np.log(eps[keep]))
    with warnings.catch_warnings():
        # two points leave no residual degree of freedom
        warnings.simplefilter("ignore", RuntimeWarning)
        fit = sm.OLS(np.log(errors[keep]), X).fit()

    return float(fit.params[1]), float(fit.bse[1])


def converge_experiment(
    theta: Interpolation,
    kernel: RadialKernel,
    mu0: MeasureBuilder,
    mu1: MeasureBuilder,
    eps_list: Sequence[float],
    extent: float = 1.0,
    spacing: Optional[float] = None,
    config: Optional[SolveConfig] = None,
) -> ConvergenceTable:
    """Runs the ε sweep on grids of [0, extent]ᵈ.

    Args:
        theta (Interpolation): interpolation of the action.
        kernel (RadialKernel): jump kernel; its profile is rescaled to each ε.
        mu0, mu1: measure specifications (as in run configurations) or callables building the
            endpoint densities on a given space.
        eps_list (Sequence[float]): kernel scales.
        extent (float): side of the domain.
        spacing (Optional[float]): fixed grid spacing for every ε; by default ε/10.

    Raises:
        ResolutionError: when the grid spacing exceeds ε/10 for some ε.

    Returns:
        ConvergenceTable: one row per ε, sorted by decreasing ε.
    """

    if len(eps_list) == 0:
        raise ValueError("The list of kernel scales is empty!")
    config = config if config is not None else SolveConfig()
    d = kernel.dim
    m2 = kernel.unscaled().moment(2)

    for eps in eps_list:
        h = spacing if spacing is not None else eps / 10
        if h > eps / 10 * (1 + 1e-9):
            raise ResolutionError(
                f"Grid spacing {h} exceeds eps/10 = {eps / 10} at eps = {eps}."
            )

    rows = []
    for eps in sorted(eps_list, reverse=True):
        h = spacing if spacing is not None else eps / 10
        n_per_axis = int(math.ceil(extent / h - 1e-9))
        kernel_eps = kernel.rescale(eps)
        space = build_grid(d, extent, n_per_axis, kernel_eps)
        rho0, rho1 = _measure(space, mu0), _measure(space, mu1)

        report = solve(space, theta, rho0, rho1, config)
        w2_value, _ = w2(space, rho0, rho1)
        scaled = eps * math.sqrt(m2 / (2 * d)) * report.distance
        radius = support_radius(space, rho0, rho1)
        hj_term = constants.hj_error_term(d, radius, eps)
        upper_env = constants.nonlocal_upper_envelope(theta, kernel_eps, w2_value)
        lower_env = math.sqrt(max(w2_value**2 - hj_term, 0.0))

        rows.append(
            {
                "eps": eps,
                "n_nodes": space.n,
                "status": report.status.value,
                "distance": report.distance,
                "scaled": scaled,
                "w2": w2_value,
                "error": abs(scaled - w2_value),
                "upper_env": upper_env,
                "lower_env": lower_env,
                "upper_ok": scaled <= upper_env * (1 + 1e-9),
                "lower_ok": w2_value**2 <= scaled**2 + hj_term,
            }
        )
        log.info(
            f"eps={eps}: scaled distance {scaled:.6g}, W2 {w2_value:.6g}, "
            f"envelopes [{lower_env:.4g}, {upper_env:.4g}]"
        )

    frame = pd.DataFrame(rows)
    slope, slope_se = _fit_rate(frame["eps"].to_numpy(), frame["error"].to_numpy())
    table = ConvergenceTable(frame, slope, slope_se)
    if not table.monotone:
        warnings.warn("The error |scaled - W2| does not decrease with eps (10% slack).")

    return table
