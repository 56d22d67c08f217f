"""Nonlocal action, divergence and continuity equation

The action of a density ρ and an antisymmetric flux j is

    𝒜(ρ, j) = ½ Σ_{i≠j} j(i,j)² / θ(ρ_i, ρ_j) · η_ij m_i m_j,

that is the sum over stored edges of j_e² / θ · η_e m_i m_j, with 0/0 = 0 and j²/0 = +∞.

Functions:
    | *action()* evaluates the action of a density and a flux.
    | *nl_divergence()* nonlocal divergence Σ_j j(i,j) η_ij m_j.
    | *nce_residual()* residual of the discrete nonlocal continuity equation along a path.
    | *path_action()* time integral of the action along a path.
    | *antisymmetrize()* antisymmetric part of a general edge matrix.
    | *matrix_action()* action of a general (not necessarily antisymmetric) edge matrix.
    | *translation_convolve()* paired-translation convolution on a periodic ring.
"""

from __future__ import annotations

import math

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import pandas as pd

from nlwasserstein.interpolation.theta import Interpolation
from nlwasserstein.space.discrete_space import DiscreteSpace
from nlwasserstein.space.measures import Density, Flux, Path
from nlwasserstein.utils.types import Array


@dataclass
class ActionValue:

    total: float
    per_edge: Optional[np.ndarray] = None

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.total)


def _values(x: Union[Density, Flux, Array]) -> np.ndarray:
    return x.values if isinstance(x, (Density, Flux)) else np.asarray(x, dtype=float)


def edge_action(
    space: DiscreteSpace, theta: Interpolation, rho: np.ndarray, j: np.ndarray
) -> np.ndarray:
    """Per-edge terms j_e² / θ(ρ_i, ρ_j) · η_e m_i m_j, +∞ where θ = 0 and j ≠ 0."""

    th = theta(rho[space.edge_i], rho[space.edge_j])
    jsq = j**2 * space.edge_mass
    terms = np.zeros_like(jsq)
    pos = th > 0
    terms[pos] = jsq[pos] / th[pos]
    terms[~pos & (jsq > 0)] = math.inf

    return terms


def action(
    space: DiscreteSpace,
    theta: Interpolation,
    rho: Union[Density, Array],
    j: Union[Flux, Array],
    breakdown: bool = False,
) -> ActionValue:

    terms = edge_action(space, theta, _values(rho), _values(j))
    total = math.inf if np.isinf(terms).any() else float(np.sum(terms))

    return ActionValue(total=total, per_edge=terms if breakdown else None)


def nl_divergence(space: DiscreteSpace, j: Union[Flux, Array]) -> np.ndarray:
    """Nonlocal divergence div_i = Σ_j j(i,j) η_ij m_j."""

    j = _values(j)
    m = space.ref_mass
    wj = j * space.weights

    return np.bincount(space.edge_i, wj * m[space.edge_j], minlength=space.n) - np.bincount(
        space.edge_j, wj * m[space.edge_i], minlength=space.n
    )


def nce_residual(space: DiscreteSpace, path: Path) -> float:
    """max_k ‖(ρ_{k+1} - ρ_k)/Δt_k + div(j_{k+½})‖_∞ over the steps of the path."""

    rates = np.diff(path.densities, axis=0) / path.dt[:, None]
    residual = 0.0
    for k in range(path.n_steps):
        residual = max(
            residual, float(np.max(np.abs(rates[k] + nl_divergence(space, path.fluxes[k]))))
        )

    return residual


def path_action(
    space: DiscreteSpace, theta: Interpolation, path: Path
) -> tuple[float, np.ndarray]:
    """Returns Σ_k Δt_k 𝒜(ρ̄_k, j_k) and the per-step actions, ρ̄_k the midpoint density."""

    mids = path.midpoint_densities
    per_step = np.array(
        [action(space, theta, mids[k], path.fluxes[k]).total for k in range(path.n_steps)]
    )
    total = math.inf if np.isinf(per_step).any() else float(np.sum(path.dt * per_step))

    return total, per_step


def path_action_frame(space: DiscreteSpace, theta: Interpolation, path: Path) -> pd.DataFrame:

    _, per_step = path_action(space, theta, path)
    return pd.DataFrame(
        {
            "t0": path.times[:-1],
            "t1": path.times[1:],
            "action": per_step,
            "mass": path.masses(space.ref_mass)[:-1],
        }
    )


def antisymmetrize(space: DiscreteSpace, matrix: np.ndarray) -> Flux:
    """Edge flux of the antisymmetric part (J - Jᵀ)/2 of a general n×n edge matrix."""

    matrix = np.asarray(matrix, dtype=float)
    return Flux(
        (matrix[space.edge_i, space.edge_j] - matrix[space.edge_j, space.edge_i]) / 2
    )


def matrix_action(
    space: DiscreteSpace, theta: Interpolation, rho: Union[Density, Array], matrix: np.ndarray
) -> float:
    """½ Σ over ordered edge pairs of J(i,j)²/θ(ρ_i, ρ_j) η_ij m_i m_j for a general matrix."""

    matrix = np.asarray(matrix, dtype=float)
    rho = _values(rho)
    forward = edge_action(space, theta, rho, matrix[space.edge_i, space.edge_j])
    backward = edge_action(space, theta, rho, matrix[space.edge_j, space.edge_i])
    terms = np.concatenate([forward, backward])

    return math.inf if np.isinf(terms).any() else 0.5 * float(np.sum(terms))


def translation_convolve(
    space: DiscreteSpace, weights: Array, rho: Union[Density, Array], flux: Union[Flux, Array]
) -> tuple[np.ndarray, np.ndarray]:
    """Averages of ρ and j over the translations of a periodic ring.

    With weights w_k ≥ 0 summing to one, returns Σ_k w_k ρ(· - k) and the flux
    Σ_k w_k j(· - k, · - k), each translation moving both endpoints of an edge.
    """

    if not space.periodic:
        raise ValueError("Translation convolutions are defined on periodic rings only!")

    weights = np.asarray(weights, dtype=float)
    if weights.shape[0] != space.n or (weights < 0).any():
        raise ValueError("One nonnegative weight per translation is required!")
    weights = weights / weights.sum()

    rho = _values(rho)
    mat = Flux(_values(flux)).as_matrix(space)
    rho_conv = np.zeros(space.n)
    mat_conv = np.zeros_like(mat)
    for k in np.flatnonzero(weights):
        rho_conv += weights[k] * np.roll(rho, k)
        mat_conv += weights[k] * np.roll(np.roll(mat, k, axis=0), k, axis=1)

    return rho_conv, mat_conv[space.edge_i, space.edge_j]
