"""Densities, fluxes and paths on discrete spaces

Functions:
    | *tv_distance()* total variation distance between two densities of equal mass.
    | *min_measure()* pointwise minimum of two densities.
    | *dirac_at()* all the mass at one node, with density 1/m_i.
    | *uniform()*, *uniform_ball()* and *gaussian_bump()* built-in measure shapes.
    | *density_from_csv()* reads (node, density) pairs.
    | *measure_from_spec()* builds a density from a JSON-like specification.
"""

from __future__ import annotations

import json

from dataclasses import dataclass
from pathlib import Path as FilePath
from typing import Any, Optional, Union

import numpy as np
import pandas as pd

from nlwasserstein.space.discrete_space import DiscreteSpace, ball_nodes
from nlwasserstein.utils.checks import assert_nonnegative, assert_same_mass, assert_same_shape
from nlwasserstein.utils.errors import ConfigError
from nlwasserstein.utils.formats import jsonable
from nlwasserstein.utils.types import Array


@dataclass
class Density:
    """Density ρ_i with respect to the reference masses m_i."""

    values: np.ndarray
    ref_mass: np.ndarray

    def __post_init__(self) -> None:

        self.values = np.asarray(self.values, dtype=float)
        self.ref_mass = np.asarray(self.ref_mass, dtype=float)
        assert_same_shape(self.values, self.ref_mass)
        assert_nonnegative(density=self.values)

    @property
    def total_mass(self) -> float:
        return float(np.dot(self.values, self.ref_mass))

    @property
    def masses(self) -> np.ndarray:
        return self.values * self.ref_mass

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.values > 0)

    def is_probability(self, tol: float = 1e-10) -> bool:
        return abs(self.total_mass - 1.0) <= tol

    def scale(self, factor: float) -> Density:
        return Density(self.values * factor, self.ref_mass)

    def normalized(self) -> Density:
        return self.scale(1.0 / self.total_mass)

    def to_dict(self) -> dict[str, Any]:
        return {"values": self.values, "total_mass": self.total_mass}


@dataclass
class Flux:
    """Edge flux j(i,j) for the stored edges i < j; j(j,i) = -j(i,j) is implicit."""

    values: np.ndarray

    def __post_init__(self) -> None:

        self.values = np.asarray(self.values, dtype=float)
        if not np.isfinite(self.values).all():
            raise ValueError("Fluxes must be finite!")

    def as_matrix(self, space: DiscreteSpace) -> np.ndarray:
        """Dense antisymmetric n×n matrix of the flux."""

        mat = np.zeros((space.n, space.n))
        mat[space.edge_i, space.edge_j] = self.values
        mat[space.edge_j, space.edge_i] = -self.values

        return mat


@dataclass
class Path:
    """Time-staggered path: densities at the times t_k and fluxes on [t_k, t_{k+1}]."""

    times: np.ndarray
    densities: np.ndarray
    fluxes: np.ndarray

    def __post_init__(self) -> None:

        self.times = np.asarray(self.times, dtype=float)
        self.densities = np.atleast_2d(np.asarray(self.densities, dtype=float))
        self.fluxes = np.atleast_2d(np.asarray(self.fluxes, dtype=float))
        if self.densities.shape[0] != self.times.shape[0]:
            raise AssertionError("One density per time is required!")
        if self.fluxes.shape[0] != self.times.shape[0] - 1:
            raise AssertionError("One flux per time step is required!")
        if (np.diff(self.times) <= 0).any():
            raise ValueError("Times must be increasing!")

    @property
    def n_steps(self) -> int:
        return int(self.times.shape[0] - 1)

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def midpoint_densities(self) -> np.ndarray:
        return (self.densities[:-1] + self.densities[1:]) / 2

    def density(self, k: int, ref_mass: np.ndarray) -> Density:
        return Density(self.densities[k], ref_mass)

    def masses(self, ref_mass: np.ndarray) -> np.ndarray:
        return self.densities @ ref_mass

    def scale_mass(self, factor: float) -> Path:
        return Path(self.times.copy(), self.densities * factor, self.fluxes * factor)

    def reparametrize(self, t0: float, t1: float) -> Path:
        """Same states on the time interval [t0, t1]; fluxes are rescaled accordingly."""

        span = self.times[-1] - self.times[0]
        times = t0 + (self.times - self.times[0]) * (t1 - t0) / span

        return Path(times, self.densities.copy(), self.fluxes * span / (t1 - t0))

    def to_dataframe(self) -> pd.DataFrame:

        T, n = self.densities.shape
        return pd.DataFrame(
            {
                "t": np.repeat(self.times, n),
                "node": np.tile(np.arange(n), T),
                "density": self.densities.ravel(),
            }
        )

    def to_dict(self) -> dict[str, Any]:
        return {"times": self.times, "densities": self.densities, "fluxes": self.fluxes}


def tv_distance(a: Density, b: Density) -> float:
    """TV(a, b) = ½ Σ_i |a_i - b_i| m_i, the supremum over sets of the mass discrepancy."""

    assert_same_mass(a.total_mass, b.total_mass, rtol=1e-9)
    assert_same_shape(a.values, b.values)

    return float(0.5 * np.sum(np.abs(a.values - b.values) * a.ref_mass))


def min_measure(a: Density, b: Density) -> Density:

    assert_same_shape(a.values, b.values)
    return Density(np.minimum(a.values, b.values), a.ref_mass)


def dirac_at(space: DiscreteSpace, i: int, mass: float = 1.0) -> Density:

    values = np.zeros(space.n)
    values[i] = mass / space.ref_mass[i]

    return Density(values, space.ref_mass)


def uniform(space: DiscreteSpace, nodes: Optional[np.ndarray] = None) -> Density:

    nodes = np.arange(space.n) if nodes is None else np.asarray(nodes)
    values = np.zeros(space.n)
    values[nodes] = 1.0 / space.ref_mass[nodes].sum()

    return Density(values, space.ref_mass)


def uniform_ball(
    space: DiscreteSpace, center: int, radius: float, exclude_center: bool = False
) -> Density:
    return uniform(space, ball_nodes(space, center, radius, exclude_center=exclude_center))


def gaussian_bump(space: DiscreteSpace, center: Array, width: float) -> Density:

    center = np.atleast_1d(np.asarray(center, dtype=float))
    sq = np.sum((space.points - center[None, :]) ** 2, axis=1)
    values = np.exp(-sq / (2 * width**2))

    return Density(values / np.dot(values, space.ref_mass), space.ref_mass)


def random_density(
    space: DiscreteSpace, rng: np.random.Generator, n_atoms: Optional[int] = None
) -> Density:
    """Random probability density, on n_atoms random nodes when given."""

    values = np.zeros(space.n)
    nodes = (
        np.arange(space.n)
        if n_atoms is None
        else rng.choice(space.n, size=n_atoms, replace=False)
    )
    values[nodes] = rng.uniform(0.2, 1.0, nodes.shape[0])

    return Density(values / np.dot(values, space.ref_mass), space.ref_mass)


def density_from_csv(space: DiscreteSpace, file_path: Union[str, FilePath]) -> Density:

    df = pd.read_csv(file_path)
    if not {"node", "density"}.issubset(df.columns):
        df = pd.read_csv(file_path, header=None, names=["node", "density"])
    values = np.zeros(space.n)
    values[df["node"].to_numpy(dtype=int)] = df["density"].to_numpy(dtype=float)

    return Density(values, space.ref_mass)


def measure_from_spec(
    space: DiscreteSpace, spec: dict[str, Any], base_dir: Optional[FilePath] = None
) -> Density:
    """Builds one of the shapes dirac, uniform, uniform-ball, gaussian-bump or from-csv.

    Positions are given in space coordinates and snapped to the nearest node.
    """

    shape = spec.get("shape")
    mass = float(spec.get("mass", 1.0))
    try:
        if shape == "dirac":
            node = spec["node"] if "node" in spec else space.nearest_node(spec["at"])
            density = dirac_at(space, int(node))
        elif shape == "uniform":
            density = uniform(space)
        elif shape == "uniform-ball":
            density = uniform_ball(space, space.nearest_node(spec["center"]), spec["radius"])
        elif shape == "gaussian-bump":
            density = gaussian_bump(space, spec["center"], spec["width"])
        elif shape == "from-csv":
            file_path = FilePath(spec["file"])
            if base_dir is not None and not file_path.is_absolute():
                file_path = base_dir / file_path
            density = density_from_csv(space, file_path).normalized()
        else:
            raise ConfigError(f"Unknown measure shape '{shape}'")
    except KeyError as err:
        raise ConfigError(f"Missing key {err} in measure {spec}") from err

    return density.scale(mass)


def density_to_json(density: Density, file_path: Union[str, FilePath]) -> None:

    with open(file_path, "w", encoding="utf-8") as fh:
        json.dump(jsonable(density.to_dict()), fh, indent=2)
