"""Reduced formulation of the time-discretized action minimization

At fixed densities, the flux minimizing Σ_e j_e² c_e/θ_e subject to the continuity equation
is j = θ·∇φ, where φ solves the weighted graph Laplacian system Bᵀ diag(cθ) B φ = m∘Δσ/Δt
and c_e = η_e m_i m_j. The action of the step is then φᵀ(m∘Δσ)/Δt, so the problem becomes
a smooth minimization over the interior densities alone. Positivity and mass are carried
by a floor-shifted softmax parametrization on each connected component of the graph.

The Laplacian entries are linear in the edge weights, so the grounded systems of all time
steps are assembled at once from a fixed pattern matrix. Small systems are solved as one
dense batch, larger ones one sparse factorization per step.
"""

from __future__ import annotations

import logging

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from scipy import sparse
from scipy.sparse.linalg import spsolve

from nlwasserstein.interpolation.theta import Interpolation
from nlwasserstein.space.discrete_space import DiscreteSpace
from nlwasserstein.space.measures import Path


log = logging.getLogger(__name__)

DENSE_LIMIT = 400


@dataclass
class ReducedProblem:
    """Objective and gradient of the reduced problem in the softmax variables.

    Args:
        space (DiscreteSpace): the space carrying the edges.
        theta (Interpolation): the interpolation of the action.
        rho0, rho1 (np.ndarray): endpoint densities with equal mass on every component.
        T (int): number of time steps.
        floor (float): absolute lower bound of interior densities.
        smoothing (Optional[np.ndarray]): matrix S; the action is evaluated on σ = Sρ.
    """

    space: DiscreteSpace
    theta: Interpolation
    rho0: np.ndarray
    rho1: np.ndarray
    T: int
    floor: float
    smoothing: Optional[np.ndarray] = None

    dt: float = field(init=False)
    active: np.ndarray = field(init=False, repr=False)
    labels: np.ndarray = field(init=False, repr=False)
    comp_mass: np.ndarray = field(init=False, repr=False)
    comp_scale: np.ndarray = field(init=False, repr=False)
    edges: np.ndarray = field(init=False, repr=False)
    B: sparse.csr_matrix = field(init=False, repr=False)
    free: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:

        space = self.space
        self.dt = 1.0 / self.T
        n_comp, comp = space.components()
        m = space.ref_mass
        mass0 = np.bincount(comp, self.rho0 * m, minlength=n_comp)

        if self.smoothing is not None:
            self.active = np.arange(space.n)
        else:
            self.active = np.flatnonzero(mass0[comp] > 0)
        _, self.labels = np.unique(comp[self.active], return_inverse=True)
        n_active_comp = int(self.labels.max()) + 1 if self.active.size else 0
        m_act = m[self.active]
        if self.smoothing is not None:
            self.comp_mass = np.array([float(np.dot(self.rho0, m))])
            self.labels = np.zeros(space.n, dtype=np.int64)
        else:
            self.comp_mass = np.bincount(
                self.labels, (self.rho0 * m)[self.active], minlength=n_active_comp
            )
        comp_measure = np.bincount(self.labels, m_act, minlength=self.comp_mass.shape[0])
        self.comp_scale = self.comp_mass - self.floor * comp_measure
        if (self.comp_scale <= 0).any():
            raise ValueError("The density floor exceeds the mass of a component!")

        in_active = np.zeros(space.n, dtype=bool)
        in_active[self.active] = True
        self.edges = np.flatnonzero(in_active[space.edge_i] & in_active[space.edge_j])
        position = np.full(space.n, -1, dtype=np.int64)
        position[self.active] = np.arange(self.active.size)
        self.B = space.incidence[self.edges][:, self.active].tocsr()

        grounded = np.zeros(self.active.size, dtype=bool)
        _, first = np.unique(self.labels, return_index=True)
        grounded[first] = True
        self.free = np.flatnonzero(~grounded)
        self._c = space.edge_mass[self.edges]
        self._tail = position[space.edge_i[self.edges]]
        self._head = position[space.edge_j[self.edges]]

        n_edges = self.edges.size
        ones = np.ones(n_edges)
        self._tail_map = sparse.csr_matrix(
            (ones, (np.arange(n_edges), self._tail)), shape=(n_edges, self.active.size)
        )
        self._head_map = sparse.csr_matrix(
            (ones, (np.arange(n_edges), self._head)), shape=(n_edges, self.active.size)
        )
        self._build_pattern()

    def _build_pattern(self) -> None:
        """Maps edge weights to the entries of the grounded Laplacian in row-major order."""

        nf = self.free.size
        free_pos = np.full(self.active.size, -1, dtype=np.int64)
        free_pos[self.free] = np.arange(nf)
        a, b = free_pos[self._tail], free_pos[self._head]
        ids = np.arange(self.edges.size)

        keys, cols, vals = [], [], []
        for r, c, sign in ((a, a, 1.0), (b, b, 1.0), (a, b, -1.0), (b, a, -1.0)):
            keep = (r >= 0) & (c >= 0)
            keys.append(r[keep] * nf + c[keep])
            cols.append(ids[keep])
            vals.append(np.full(int(keep.sum()), sign))
        keys_all = np.concatenate(keys)
        self._keys, inverse = np.unique(keys_all, return_inverse=True)
        self._pattern = sparse.csr_matrix(
            (np.concatenate(vals), (inverse, np.concatenate(cols))),
            shape=(self._keys.size, self.edges.size),
        )
        rows = self._keys // max(nf, 1)
        self._cols = self._keys % max(nf, 1)
        self._indptr = np.concatenate([[0], np.cumsum(np.bincount(rows, minlength=nf))])

    @property
    def n_vars(self) -> int:
        return (self.T - 1) * self.active.size

    def interior_densities(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Interior densities (T-1, n) and the softmax weights p on the active nodes."""

        u = x.reshape(self.T - 1, self.active.size)
        m_act = self.space.ref_mass[self.active]
        n_comp = self.comp_mass.shape[0]
        shift = np.full((self.T - 1, n_comp), -np.inf)
        for k in range(self.T - 1):
            np.maximum.at(shift[k], self.labels, u[k])
        e = np.exp(u - shift[:, self.labels])
        z = np.stack(
            [np.bincount(self.labels, m_act * e[k], minlength=n_comp) for k in range(self.T - 1)]
        )
        p = e / z[:, self.labels]
        rho = np.zeros((self.T - 1, self.space.n))
        rho[:, self.active] = self.floor + self.comp_scale[self.labels][None, :] * p

        return rho, p

    def densities(self, x: np.ndarray) -> np.ndarray:
        """All densities ρ_0, ..., ρ_T."""

        interior, _ = self.interior_densities(x)
        return np.vstack([self.rho0[None, :], interior, self.rho1[None, :]])

    def _sigma(self, rho: np.ndarray) -> np.ndarray:
        return rho if self.smoothing is None else rho @ self.smoothing.T

    def _solve_grounded(self, data: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        """Solves the grounded systems of all steps; data holds the pattern entries per step."""

        nf = self.free.size
        steps = rhs.shape[0]
        if nf <= DENSE_LIMIT:
            lap = np.zeros((steps, nf * nf))
            lap[:, self._keys] = data
            return np.linalg.solve(lap.reshape(steps, nf, nf), rhs[..., None])[..., 0]

        out = np.empty((steps, nf))
        for k in range(steps):
            # symmetric: the row-major arrays read as CSC give the same matrix
            lap = sparse.csc_matrix((data[k], self._cols, self._indptr), shape=(nf, nf))
            out[k] = spsolve(lap, rhs[k])

        return out

    def _steps(self, sigma: np.ndarray) -> tuple[np.ndarray, ...]:
        """Potentials φ, gradients Bφ, θ, edge ends and right-hand sides of all steps."""

        mid = (sigma[:-1] + sigma[1:]) / 2
        a, b = mid[:, self._tail], mid[:, self._head]
        th = self.theta(a, b)
        rhs = self.space.ref_mass[self.active][None, :] * np.diff(sigma, axis=0) / self.dt
        phi = np.zeros_like(rhs)
        if self.free.size:
            data = np.asarray(self._pattern @ (self._c[None, :] * th).T).T
            phi[:, self.free] = self._solve_grounded(data, rhs[:, self.free])
        grad_phi = phi[:, self._head] - phi[:, self._tail]

        return phi, grad_phi, th, a, b, rhs

    def value_and_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]:

        rho = self.densities(x)
        sigma = self._sigma(rho)[:, self.active]
        m_act = self.space.ref_mass[self.active]

        phi, grad_phi, _, a, b, rhs = self._steps(sigma)
        value = self.dt * float(np.sum(phi * rhs))
        ta, tb = self.theta.theta_grad(a, b)
        sq = self._c[None, :] * grad_phi**2
        g = -np.asarray(self._tail_map.T @ (sq * ta).T + self._head_map.T @ (sq * tb).T).T

        grad_sigma = np.zeros_like(sigma)
        grad_sigma[1:] += 2 * m_act[None, :] * phi + self.dt / 2 * g
        grad_sigma[:-1] += -2 * m_act[None, :] * phi + self.dt / 2 * g

        grad_rho = grad_sigma[1:-1]
        if self.smoothing is not None:
            grad_rho = grad_rho @ self.smoothing

        _, p = self.interior_densities(x)
        n_comp = self.comp_mass.shape[0]
        gp = grad_rho * p
        inner = np.stack(
            [np.bincount(self.labels, gp[k], minlength=n_comp) for k in range(self.T - 1)]
        )
        scale = self.comp_scale[self.labels][None, :]
        grad_u = scale * (gp - m_act[None, :] * p * inner[:, self.labels])

        return value, grad_u.ravel()

    def initial_point(self, mixing: float) -> np.ndarray:
        """Softmax variables of the linear interpolation mixed with the uniform density."""

        t = np.linspace(0.0, 1.0, self.T + 1)[1:-1]
        rho = (1 - t)[:, None] * self.rho0[None, :] + t[:, None] * self.rho1[None, :]
        rho = rho[:, self.active]
        m_act = self.space.ref_mass[self.active]
        measure = np.bincount(self.labels, m_act)
        uniform = (self.comp_mass / measure)[self.labels]
        rho = (1 - mixing) * rho + mixing * uniform[None, :]
        p = np.maximum(rho - self.floor, 0.0) / self.comp_scale[self.labels][None, :]

        return np.log(np.maximum(p, 1e-300)).ravel()

    def path(self, x: np.ndarray) -> tuple[Path, np.ndarray]:
        """The path of the (smoothed) densities with optimal fluxes, and per-step actions."""

        sigma_full = self._sigma(self.densities(x))
        sigma = sigma_full[:, self.active]
        phi, grad_phi, th, _, _, rhs = self._steps(sigma)
        fluxes = np.zeros((self.T, self.space.n_edges))
        fluxes[:, self.edges] = th * grad_phi
        per_step = np.sum(phi * rhs, axis=1)
        times = np.linspace(0.0, 1.0, self.T + 1)

        return Path(times, sigma_full, fluxes), per_step
