"""Exact nonlocalization of local continuity equations

A solution (ρ_t, J_t) of the local continuity equation ∂_t ρ + div J = 0 becomes a solution of
the nonlocal continuity equation after convolving the density with ζ̄_{(η_ε)} and using the edge
flux j(x, y) = d/(ε² M₂(η)) (y - x)·(J(x) + J(y)).
"""

from __future__ import annotations

import logging
import warnings

from typing import Optional, Sequence

import numpy as np
import pandas as pd

from nlwasserstein.dynamics.action import nce_residual
from nlwasserstein.kernels.radial import RadialKernel
from nlwasserstein.kernels.smoothing import convolution_matrix, zeta_profile
from nlwasserstein.space.discrete_space import DiscreteSpace, build_grid
from nlwasserstein.space.measures import Path
from nlwasserstein.utils.errors import PreconditionError
from nlwasserstein.utils.types import ConvolutionMode


log = logging.getLogger(__name__)


def _grid_shape(space: DiscreteSpace) -> tuple[int, ...]:

    n_axis = round(space.n ** (1 / space.dim))
    if n_axis**space.dim != space.n:
        raise ValueError("The local divergence is computed on square grids only!")

    return (n_axis,) * space.dim


def local_divergence(space: DiscreteSpace, J: np.ndarray) -> np.ndarray:
    """Centered differences of a vector field given per node, one-sided at the boundary."""

    J = np.asarray(J, dtype=float).reshape(space.n, space.dim)
    shape = _grid_shape(space)
    h = space.spacing
    div = np.zeros(shape)
    for axis in range(space.dim):
        component = J[:, axis].reshape(shape)
        if space.periodic:
            div += (np.roll(component, -1, axis) - np.roll(component, 1, axis)) / (2 * h)
        else:
            div += np.gradient(component, h, axis=axis)

    return div.ravel()


def local_ce_residual(
    space: DiscreteSpace, times: np.ndarray, rho_path: np.ndarray, J_path: np.ndarray
) -> float:
    """Relative residual of ∂_t ρ + div J = 0 with the flux averaged over each step."""

    rates = np.diff(rho_path, axis=0) / np.diff(times)[:, None]
    worst = 0.0
    for k in range(rates.shape[0]):
        mid = (J_path[k] + J_path[k + 1]) / 2
        worst = max(worst, float(np.max(np.abs(rates[k] + local_divergence(space, mid)))))
    scale = float(np.max(np.abs(rates)))

    return worst / scale if scale > 0 else worst


def nonlocal_flux(space: DiscreteSpace, kernel: RadialKernel, J: np.ndarray) -> np.ndarray:
    """Edge flux d/(ε² M₂) (x_j - x_i)·(J_i + J_j) for the stored edges i < j."""

    J = np.asarray(J, dtype=float).reshape(space.n, space.dim)
    factor = kernel.dim / (kernel.scale**2 * kernel.unscaled().moment(2))
    diff = space.points[space.edge_j] - space.points[space.edge_i]
    if space.periodic:
        diff = (diff + space.extent / 2) % space.extent - space.extent / 2

    return factor * np.sum(diff * (J[space.edge_i] + J[space.edge_j]), axis=1)


def nonlocalize(
    space: DiscreteSpace,
    kernel: RadialKernel,
    times: np.ndarray,
    rho_path: np.ndarray,
    J_path: np.ndarray,
    local_tol: float = 0.1,
    convolve_density: bool = True,
) -> Path:
    """Nonlocal path of a local flow given by densities and vector fluxes at the same times.

    Args:
        space (DiscreteSpace): grid carrying the kernel edges.
        kernel (RadialKernel): jump kernel at scale ε with finite second moment.
        times (np.ndarray): time grid, shape (T+1,).
        rho_path (np.ndarray): densities, shape (T+1, n).
        J_path (np.ndarray): vector fluxes per node, shape (T+1, n, d).
        local_tol (float, optional): accepted relative residual of the local equation.
        convolve_density (bool, optional): convolve the densities with ζ̄. Turning it off
            gives the control path whose nonlocal residual does not vanish.

    Raises:
        PreconditionError: when the input does not solve the local continuity equation.

    Returns:
        Path: densities ζ̄ ∗ ρ_t and the nonlocal fluxes at the step midpoints.
    """

    times = np.asarray(times, dtype=float)
    rho_path = np.asarray(rho_path, dtype=float)
    J_path = np.asarray(J_path, dtype=float).reshape(times.shape[0], space.n, space.dim)

    residual = local_ce_residual(space, times, rho_path, J_path)
    if residual > local_tol:
        raise PreconditionError(
            f"The local continuity equation residual {residual:.3g} exceeds {local_tol}."
        )

    if convolve_density:
        conv = convolution_matrix(zeta_profile(kernel), space, ConvolutionMode.measure)
        densities = rho_path @ conv.T
    else:
        densities = rho_path.copy()

    mids = (J_path[:-1] + J_path[1:]) / 2
    fluxes = np.array([nonlocal_flux(space, kernel, mids[k]) for k in range(mids.shape[0])])
    log.debug("Nonlocalized a path of %d steps (local residual %.3g)", mids.shape[0], residual)

    return Path(times=times, densities=densities, fluxes=fluxes)


def translating_bump(
    space: DiscreteSpace,
    start: float,
    velocity: float,
    width: float,
    T: int,
    times: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gaussian bump translating at constant velocity along the first axis, with J = ρ v.

    On a periodic grid the bump wraps around the ring.
    """

    times = np.linspace(0.0, 1.0, T + 1) if times is None else np.asarray(times, dtype=float)
    x = space.points[:, 0]
    centers = start + velocity * times
    offsets = x[None, :] - centers[:, None]
    if space.periodic:
        offsets = (offsets + space.extent / 2) % space.extent - space.extent / 2
    rho = np.exp(-(offsets**2) / (2 * width**2))
    rho /= np.sqrt(2 * np.pi) * width
    J = np.zeros((times.shape[0], space.n, space.dim))
    J[:, :, 0] = velocity * rho

    return times, rho, J


def refinement_study(
    kernel: RadialKernel,
    n_list: Sequence[int],
    extent: float,
    start: float,
    velocity: float,
    width: float,
    time_steps: int,
) -> pd.DataFrame:
    """Nonlocal residuals of a translating bump on periodic rings of increasing resolution.

    The time steps grow with the grid, time_steps at the coarsest grid. The residual of the
    ζ̄-convolved construction is first order in h when the kernel support is a multiple of
    the spacing; the control path keeps the unconvolved density.

    Returns:
        pd.DataFrame: n, spacing, time_steps, residual, control_residual and the ratio of
        consecutive residuals.
    """

    if kernel.dim != 1:
        raise ValueError("The refinement study runs on one-dimensional rings!")
    n_list = sorted(int(n) for n in n_list)

    rows = []
    for n in n_list:
        space = build_grid(1, extent, n, kernel, periodic=True)
        cells = kernel.support / space.spacing
        if not np.isclose(cells, round(cells), rtol=0.0, atol=1e-9):
            warnings.warn(
                f"The kernel support is {cells:.3g} spacings; the refinement rate is erratic "
                "unless it is a whole number."
            )
        steps = time_steps * n // n_list[0]
        times, rho, J = translating_bump(space, start, velocity, width, steps)
        exact = nonlocalize(space, kernel, times, rho, J)
        control = nonlocalize(space, kernel, times, rho, J, convolve_density=False)
        rows.append(
            {
                "n": n,
                "spacing": space.spacing,
                "time_steps": steps,
                "residual": nce_residual(space, exact),
                "control_residual": nce_residual(space, control),
            }
        )
        log.info(f"n={n}: residual {rows[-1]['residual']:.4g}")

    frame = pd.DataFrame(rows)
    frame["ratio"] = frame["residual"].shift(1) / frame["residual"]

    return frame
