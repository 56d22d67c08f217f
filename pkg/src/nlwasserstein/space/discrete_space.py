"""Discrete spaces

A DiscreteSpace is a finite set of points of ℝᵈ with reference masses m_i > 0 and a weighted
edge set. Edges are stored once, as flat arrays sorted by (i, j) with i < j, together with
per-node adjacency offsets (CSR layout of the symmetric weight matrix).

Functions:
    | *build_grid()* uniform cell-centered grid on [0, extent]ᵈ with edges from a kernel.
    | *two_point_space()* two nodes at distance one with a single edge.
    | *from_points()* graph mode from a point cloud, a kernel or an explicit edge list.
    | *ball_nodes()* nodes of a closed ball, optionally without its center.
    | *annulus_nodes()* nodes of the dyadic annulus B(x, r) minus B(x, r/2).
"""

from __future__ import annotations

import json
import logging
import math
import warnings

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np

from scipy import sparse
from scipy.sparse import csgraph
from scipy.spatial import cKDTree

from nlwasserstein.kernels.radial import RadialKernel
from nlwasserstein.utils.basic_functions import pairwise_distances
from nlwasserstein.utils.errors import SizeLimitError
from nlwasserstein.utils.formats import jsonable, numpy_array
from nlwasserstein.utils.types import Array


log = logging.getLogger(__name__)

MAX_EDGES = 10**8


@dataclass
class DiscreteSpace:
    """Finite point cloud with reference masses and symmetric edge weights η_ij."""

    points: np.ndarray
    ref_mass: np.ndarray
    edge_i: np.ndarray
    edge_j: np.ndarray
    weights: np.ndarray
    kernel: Optional[RadialKernel] = None
    periodic: bool = False
    extent: Optional[float] = None

    offsets: np.ndarray = field(init=False, repr=False)
    neighbors: np.ndarray = field(init=False, repr=False)
    spacing: float = field(init=False)
    C_const: float = field(init=False)
    C_tilde: float = field(init=False)
    diameter: float = field(init=False)
    _dists: Optional[np.ndarray] = field(init=False, repr=False, default=None)

    def __post_init__(self) -> None:

        self.points = numpy_array(self.points).astype(float)
        if self.points.ndim == 1:
            self.points = self.points[:, None]
        self.ref_mass = numpy_array(self.ref_mass).astype(float)
        self.edge_i = np.asarray(self.edge_i, dtype=np.int64)
        self.edge_j = np.asarray(self.edge_j, dtype=np.int64)
        self.weights = np.asarray(self.weights, dtype=float)

        if self.ref_mass.shape[0] != self.points.shape[0]:
            raise AssertionError("One reference mass per point is required!")
        if (self.ref_mass <= 0).any():
            raise ValueError("Reference masses must be strictly positive!")
        if (self.edge_i >= self.edge_j).any():
            raise ValueError("Edges must be stored with i < j and no self-edges!")
        if (self.weights <= 0).any() or not np.isfinite(self.weights).all():
            raise ValueError("Edge weights must be positive and finite!")
        if self.periodic and (self.dim != 1 or self.extent is None):
            raise ValueError("Periodic spaces are one-dimensional rings with a given extent!")

        order = np.lexsort((self.edge_j, self.edge_i))
        self.edge_i, self.edge_j = self.edge_i[order], self.edge_j[order]
        self.weights = self.weights[order]

        wmat = self.weight_matrix.tocsr()
        self.offsets = wmat.indptr
        self.neighbors = wmat.indices

        lengths = self.edge_lengths
        weighted = sparse.csr_matrix(
            (
                np.concatenate([lengths**2 * self.weights] * 2),
                (
                    np.concatenate([self.edge_i, self.edge_j]),
                    np.concatenate([self.edge_j, self.edge_i]),
                ),
            ),
            shape=(self.n, self.n),
        )
        self.C_const = float(np.max(wmat @ self.ref_mass)) if self.n_edges else 0.0
        self.C_tilde = float(np.max(weighted @ self.ref_mass)) if self.n_edges else 0.0

        dists = self.distance_matrix()
        self.diameter = float(dists.max()) if self.n > 1 else 0.0
        positive = dists[dists > 0]
        self.spacing = float(positive.min()) if positive.size else 1.0

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    @property
    def n_edges(self) -> int:
        return int(self.edge_i.shape[0])

    @property
    def total_mass(self) -> float:
        return float(self.ref_mass.sum())

    @property
    def weight_matrix(self) -> sparse.coo_matrix:
        """Symmetric n×n matrix of edge weights η_ij."""

        return sparse.coo_matrix(
            (
                np.concatenate([self.weights, self.weights]),
                (
                    np.concatenate([self.edge_i, self.edge_j]),
                    np.concatenate([self.edge_j, self.edge_i]),
                ),
            ),
            shape=(self.n, self.n),
        )

    @property
    def incidence(self) -> sparse.csr_matrix:
        """Edge-node incidence matrix, -1 at the tail i and +1 at the head j."""

        rows = np.concatenate([np.arange(self.n_edges)] * 2)
        cols = np.concatenate([self.edge_i, self.edge_j])
        vals = np.concatenate([-np.ones(self.n_edges), np.ones(self.n_edges)])

        return sparse.csr_matrix((vals, (rows, cols)), shape=(self.n_edges, self.n))

    @property
    def edge_mass(self) -> np.ndarray:
        """η_ij m_i m_j per stored edge."""

        return self.weights * self.ref_mass[self.edge_i] * self.ref_mass[self.edge_j]

    @property
    def edge_lengths(self) -> np.ndarray:

        diff = self.points[self.edge_j] - self.points[self.edge_i]
        if self.periodic:
            diff = np.abs(diff)
            diff = np.minimum(diff, self.extent - diff)

        return np.linalg.norm(diff, axis=1)

    def distance_matrix(self) -> np.ndarray:

        if self._dists is None:
            dists = pairwise_distances(self.points)
            if self.periodic:
                dists = np.minimum(dists, self.extent - dists)
            self._dists = dists

        return self._dists

    def degree(self, i: int) -> int:
        return int(self.offsets[i + 1] - self.offsets[i])

    def adjacent(self, i: int) -> np.ndarray:
        return self.neighbors[self.offsets[i] : self.offsets[i + 1]]

    def edge_index(self, i: int, j: int) -> int:
        """Position of the undirected edge {i, j}, or -1 when it is not stored."""

        a, b = (i, j) if i < j else (j, i)
        lo = np.searchsorted(self.edge_i, a, side="left")
        hi = np.searchsorted(self.edge_i, a, side="right")
        k = lo + np.searchsorted(self.edge_j[lo:hi], b)

        return int(k) if k < hi and self.edge_j[k] == b else -1

    def edge_lookup(self, rows: np.ndarray, cols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized edge positions of the pairs (rows[k], cols[k]), -1 when missing.

        The sign is +1 when the pair has the stored orientation i < j and -1 otherwise.
        """

        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        lo, hi = np.minimum(rows, cols), np.maximum(rows, cols)
        keys = self.edge_i * self.n + self.edge_j
        query = lo * self.n + hi
        pos = np.minimum(np.searchsorted(keys, query), max(self.n_edges - 1, 0))
        found = (keys[pos] == query) if self.n_edges else np.zeros(query.shape, dtype=bool)
        idx = np.where(found & (rows != cols), pos, -1)

        return idx, np.where(rows < cols, 1.0, -1.0)

    def gradient(self, phi: Array) -> np.ndarray:
        """Nonlocal gradient φ_j - φ_i per stored edge."""

        phi = np.asarray(phi, dtype=float)
        return phi[self.edge_j] - phi[self.edge_i]

    def components(self) -> tuple[int, np.ndarray]:
        return csgraph.connected_components(self.weight_matrix.tocsr(), directed=False)

    def nearest_node(self, x: Array) -> int:

        x = np.atleast_1d(np.asarray(x, dtype=float))
        return int(np.argmin(np.linalg.norm(self.points - x[None, :], axis=1)))

    def to_dict(self) -> dict[str, Any]:

        return {
            "dim": self.dim,
            "n": self.n,
            "points": self.points,
            "ref_mass": self.ref_mass,
            "edges": np.column_stack([self.edge_i, self.edge_j]),
            "weights": self.weights,
            "kernel": None if self.kernel is None else self.kernel.to_dict(),
            "periodic": self.periodic,
            "extent": self.extent,
            "C_const": self.C_const,
            "C_tilde": self.C_tilde,
            "diameter": self.diameter,
        }

    def to_json(self, file_path: Union[str, Path]) -> None:

        with open(file_path, "w", encoding="utf-8") as fh:
            json.dump(jsonable(self.to_dict()), fh, indent=2)


def _kernel_edges(
    points: np.ndarray,
    kernel: RadialKernel,
    spacing: float,
    periodic: bool = False,
    extent: Optional[float] = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:

    n, d = points.shape
    radius = kernel.support
    per_node = n if radius >= np.ptp(points, axis=0).max() else (2 * radius / spacing + 1) ** d
    if n * per_node / 2 > MAX_EDGES:
        raise SizeLimitError(f"About {n * per_node / 2:.3g} edges exceed the limit {MAX_EDGES}.")

    if periodic:
        tree = cKDTree(np.mod(points, extent), boxsize=extent)
    else:
        tree = cKDTree(points)
    pairs = tree.query_pairs(r=radius * (1 + 1e-12), output_type="ndarray")
    if pairs.size == 0:
        return np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0)

    i, j = np.minimum(pairs[:, 0], pairs[:, 1]), np.maximum(pairs[:, 0], pairs[:, 1])
    diff = np.abs(points[j] - points[i])
    if periodic:
        diff = np.minimum(diff, extent - diff)
    r = np.linalg.norm(diff, axis=1)
    w = kernel.edge_weight(r, r_min=spacing / 2)
    keep = w > 0

    return i[keep], j[keep], w[keep]


def build_grid(
    dim: int,
    extent: float,
    n_per_axis: int,
    kernel: RadialKernel,
    periodic: bool = False,
) -> DiscreteSpace:
    """Uniform cell-centered grid on [0, extent]ᵈ with m_i the cell volume."""

    if n_per_axis < 2:
        raise ValueError("At least two nodes per axis are required!")
    if kernel.dim != dim:
        raise AssertionError("The kernel and the grid must have the same dimension!")

    h = extent / n_per_axis
    if kernel.support < 2 * h:
        warnings.warn(f"The kernel scale {kernel.scale} is below two grid spacings ({h}).")

    axis = (np.arange(n_per_axis) + 0.5) * h
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    points = np.column_stack([g.ravel() for g in mesh])
    ref_mass = np.full(points.shape[0], h**dim)

    i, j, w = _kernel_edges(points, kernel, h, periodic=periodic, extent=extent)
    log.debug("Grid with %d nodes and %d edges", points.shape[0], i.shape[0])

    return DiscreteSpace(
        points=points,
        ref_mass=ref_mass,
        edge_i=i,
        edge_j=j,
        weights=w,
        kernel=kernel,
        periodic=periodic,
        extent=extent if periodic else None,
    )


def two_point_space(w: float) -> DiscreteSpace:

    if w <= 0:
        raise ValueError("The edge weight must be positive!")

    return DiscreteSpace(
        points=np.array([[0.0], [1.0]]),
        ref_mass=np.ones(2),
        edge_i=np.array([0]),
        edge_j=np.array([1]),
        weights=np.array([float(w)]),
    )


def from_points(
    points: Array,
    ref_mass: Array,
    kernel: Optional[RadialKernel] = None,
    edges: Optional[Sequence[tuple[int, int, float]]] = None,
) -> DiscreteSpace:
    """Graph mode: arbitrary points and masses with kernel edges or an explicit edge list."""

    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if (kernel is None) == (edges is None):
        raise ValueError("Provide either a kernel or an explicit edge list!")

    if kernel is not None:
        dists = pairwise_distances(points)
        positive = dists[dists > 0]
        spacing = float(positive.min()) if positive.size else 1.0
        i, j, w = _kernel_edges(points, kernel, spacing)
    else:
        arr = np.asarray(edges, dtype=float).reshape(-1, 3)
        a, b = arr[:, 0].astype(np.int64), arr[:, 1].astype(np.int64)
        i, j, w = np.minimum(a, b), np.maximum(a, b), arr[:, 2]

    return DiscreteSpace(
        points=points, ref_mass=ref_mass, edge_i=i, edge_j=j, weights=w, kernel=kernel
    )


def ball_nodes(
    space: DiscreteSpace, center: int, radius: float, exclude_center: bool = False
) -> np.ndarray:

    dists = space.distance_matrix()[center]
    nodes = np.flatnonzero(dists <= radius * (1 + 1e-12))
    if exclude_center:
        nodes = nodes[nodes != center]

    return nodes


def annulus_nodes(space: DiscreteSpace, center: int, r_outer: float) -> np.ndarray:

    dists = space.distance_matrix()[center]
    return np.flatnonzero((dists > r_outer / 2 * (1 + 1e-12)) & (dists <= r_outer * (1 + 1e-12)))


def set_measure(space: DiscreteSpace, nodes: np.ndarray) -> float:
    return float(space.ref_mass[nodes].sum())


def min_pair_weight(space: DiscreteSpace, a: np.ndarray, b: np.ndarray) -> float:
    """Smallest η_ij over A×B, zero when some pair is not an edge."""

    wmat = space.weight_matrix.tocsr()
    block = wmat[a][:, b].toarray()
    block[a[:, None] == b[None, :]] = math.inf

    return float(block.min())
