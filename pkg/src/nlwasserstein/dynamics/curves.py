"""Explicit curves certifying upper bounds

Every construction returns a CurveCertificate: a discrete path solving the nonlocal continuity
equation exactly (up to round-off) together with its action and the bound it is claimed to
satisfy. Bounds are evaluated with the discrete set measures and edge weights of the space;
the continuum value of the same bound is reported alongside when it exists.

Functions:
    | *two_set_curve()* moves uniform mass between two disjoint node sets.
    | *two_point_curve()* the geodesic between the two Diracs of the two-point space.
    | *concatenate()* constant-speed concatenation of curves.
    | *expel_curve_boundary()* Dirac to uniform on a punctured ball, when θ(1,0) > 0.
    | *expel_curve_annuli()* Dirac to uniform on a ball through dyadic annuli.
    | *dirac_chain_curve()* Dirac to Dirac through expel, ball chain and absorb.
"""

from __future__ import annotations

import logging
import math

from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd

from scipy.integrate import cumulative_trapezoid

from nlwasserstein.dynamics import constants
from nlwasserstein.dynamics.action import nce_residual, path_action
from nlwasserstein.interpolation.theta import Interpolation
from nlwasserstein.kernels.radial import RadialKernel
from nlwasserstein.space.discrete_space import (
    DiscreteSpace,
    annulus_nodes,
    ball_nodes,
    set_measure,
    two_point_space,
)
from nlwasserstein.space.measures import Path
from nlwasserstein.utils.checks import assert_in_range
from nlwasserstein.utils.errors import RegimeError, ResolutionError
from nlwasserstein.utils.types import CurveConstruction


log = logging.getLogger(__name__)

_TABLE_SIZE = 20001


@dataclass
class CurveCertificate:
    """A constructed path with its action and the upper bound it certifies."""

    path: Path = field(repr=False)
    action_integral: float
    claimed_bound: float
    construction: CurveConstruction
    tolerance: float = 1e-2
    continuum_bound: Optional[float] = None
    residual: float = 0.0
    residual_tol: float = 1e-8
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def length(self) -> float:
        return math.sqrt(self.action_integral)

    @property
    def passes(self) -> bool:
        within = self.action_integral <= self.claimed_bound * (1 + self.tolerance) + 1e-14
        return bool(within and self.residual <= self.residual_tol)

    def to_dict(self) -> dict[str, Any]:
        return {
            "construction": self.construction.value,
            "action_integral": self.action_integral,
            "claimed_bound": self.claimed_bound,
            "continuum_bound": self.continuum_bound,
            "tolerance": self.tolerance,
            "residual": self.residual,
            "passes": self.passes,
            "details": self.details,
            "path": self.path.to_dict(),
        }

    def to_dataframe(self) -> pd.DataFrame:
        return self.path.to_dataframe()


def _certificate(
    space: DiscreteSpace,
    theta: Interpolation,
    path: Path,
    claimed_bound: float,
    construction: CurveConstruction,
    tolerance: float,
    continuum_bound: Optional[float] = None,
    details: Optional[dict[str, Any]] = None,
) -> CurveCertificate:

    total, _ = path_action(space, theta, path)
    scale = max(1.0, float(np.max(np.abs(np.diff(path.densities, axis=0)) / path.dt[:, None])))
    cert = CurveCertificate(
        path=path,
        action_integral=total,
        claimed_bound=claimed_bound,
        construction=construction,
        tolerance=tolerance,
        continuum_bound=continuum_bound,
        residual=nce_residual(space, path),
        residual_tol=1e-9 * scale,
        details=details or {},
    )
    log.debug(
        "%s curve: action %.6g, bound %.6g, pass %s",
        construction.value,
        cert.action_integral,
        claimed_bound,
        cert.passes,
    )

    return cert


def _arclength_table(theta: Interpolation) -> tuple[np.ndarray, np.ndarray]:
    """Table of (γ, S(γ)) with S(γ) = ∫_{-1}^{γ} dγ'/√θ(1+γ', 1-γ').

    The grid γ = -cos(πv) clusters at ±1, where the integrand may blow up.
    """

    v = np.linspace(0.0, 1.0, _TABLE_SIZE)
    gamma = -np.cos(np.pi * v)
    th = theta(np.clip(1 + gamma, 0.0, 2.0), np.clip(1 - gamma, 0.0, 2.0))
    integrand = np.zeros_like(v)
    pos = th > 0
    integrand[pos] = np.pi * np.sin(np.pi * v[pos]) / np.sqrt(th[pos])
    integrand[0], integrand[-1] = integrand[1], integrand[-2]
    arclength = cumulative_trapezoid(integrand, v, initial=0.0)

    return gamma, arclength * (2 * theta.c_theta / arclength[-1])


def _pair_edges(
    space: DiscreteSpace, a: np.ndarray, b: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Edge positions, orientation signs and weights of all pairs of A×B."""

    rows = np.repeat(a, b.shape[0])
    cols = np.tile(b, a.shape[0])
    idx, sign = space.edge_lookup(rows, cols)
    if (idx < 0).any():
        k = int(np.argmax(idx < 0))
        raise ResolutionError(
            f"Nodes {rows[k]} and {cols[k]} are not joined by an edge; "
            "the two sets are further apart than the kernel support."
        )

    return idx, sign, space.weights[idx]


def two_set_curve(
    space: DiscreteSpace,
    theta: Interpolation,
    a_nodes: Sequence[int],
    b_nodes: Sequence[int],
    p_start: float = 1.0,
    p_end: float = 0.0,
    T: int = 64,
    mass: float = 1.0,
    base: Optional[np.ndarray] = None,
    tolerance: float = 1e-2,
) -> CurveCertificate:
    """Transports uniform mass between the disjoint node sets A and B.

    The density is base + mass·p/|A| on A and base + mass·(1-p)/|B| on B, with p moving from
    p_start to p_end at constant speed in the arclength of γ = 2p - 1. Every pair of A×B
    carries the flux q/η_ik, so the set densities stay uniform. The length is at most
    √mass·|S(γ₁) - S(γ₀)|/√(2·min(|A|, |B|)·η_min).

    Raises:
        ResolutionError: when a pair of A×B is not an edge of the space.
    """

    a = np.unique(np.asarray(a_nodes, dtype=np.int64))
    b = np.unique(np.asarray(b_nodes, dtype=np.int64))
    if a.size == 0 or b.size == 0:
        raise ResolutionError("Both node sets of a two-set step must be nonempty!")
    if np.intersect1d(a, b).size:
        raise ValueError("The two node sets must be disjoint!")
    assert_in_range(0.0, 1.0, p_start=p_start, p_end=p_end)
    if T < 1:
        raise ValueError("At least one time step is required!")

    size_a, size_b = set_measure(space, a), set_measure(space, b)
    idx, sign, eta = _pair_edges(space, a, b)

    gamma_tab, s_tab = _arclength_table(theta)
    s0 = float(np.interp(2 * p_start - 1, gamma_tab, s_tab))
    s1 = float(np.interp(2 * p_end - 1, gamma_tab, s_tab))
    p = (np.interp(np.linspace(s0, s1, T + 1), s_tab, gamma_tab) + 1) / 2
    p[0], p[-1] = p_start, p_end

    times = np.linspace(0.0, 1.0, T + 1)
    a_vec = np.zeros(space.n)
    b_vec = np.zeros(space.n)
    a_vec[a] = mass / size_a
    b_vec[b] = mass / size_b
    base_vec = np.zeros(space.n) if base is None else np.asarray(base, dtype=float)
    densities = base_vec[None, :] + np.outer(p, a_vec) + np.outer(1 - p, b_vec)

    q = -mass * np.diff(p) / np.diff(times) / (size_a * size_b)
    fluxes = np.zeros((T, space.n_edges))
    fluxes[:, idx] = np.outer(q, sign / eta)

    bound = mass * (s1 - s0) ** 2 / (2 * min(size_a, size_b) * float(eta.min()))
    details = {
        "measure_a": size_a,
        "measure_b": size_b,
        "eta_min": float(eta.min()),
        "p_start": p_start,
        "p_end": p_end,
        "mass": mass,
    }

    return _certificate(
        space,
        theta,
        Path(times, densities, fluxes),
        bound,
        CurveConstruction.two_set,
        tolerance,
        details=details,
    )


def two_point_curve(
    theta: Interpolation, w: float, T_steps: int = 256, tolerance: float = 1e-2
) -> CurveCertificate:
    """Geodesic from δ₀ to δ₁ on the two-point space; its action tends to (√(2/w)·C_θ)²."""

    space = two_point_space(w)
    cert = two_set_curve(space, theta, [0], [1], 1.0, 0.0, T=T_steps, tolerance=tolerance)
    cert.construction = CurveConstruction.two_point
    cert.claimed_bound = theta.two_point_distance(w) ** 2
    cert.continuum_bound = cert.claimed_bound
    cert.details["w"] = w

    return cert


def _reverse(cert: CurveCertificate) -> CurveCertificate:

    path = cert.path
    times = path.times[-1] + path.times[0] - path.times[::-1]
    reversed_path = Path(times, path.densities[::-1].copy(), -path.fluxes[::-1])

    return CurveCertificate(
        path=reversed_path,
        action_integral=cert.action_integral,
        claimed_bound=cert.claimed_bound,
        construction=cert.construction,
        tolerance=cert.tolerance,
        continuum_bound=cert.continuum_bound,
        residual=cert.residual,
        residual_tol=cert.residual_tol,
        details=dict(cert.details),
    )


def concatenate(
    space: DiscreteSpace,
    theta: Interpolation,
    pieces: Sequence[CurveCertificate],
    construction: CurveConstruction,
    continuum_bound: Optional[float] = None,
) -> CurveCertificate:
    """Runs the pieces one after the other on [0, 1] with durations proportional to their
    lengths, so the total action is (Σ lengths)². The claimed bound is (Σ √bounds)².
    """

    if not pieces:
        raise ValueError("At least one curve is required!")
    for first, second in zip(pieces[:-1], pieces[1:]):
        if not np.allclose(first.path.densities[-1], second.path.densities[0], atol=1e-12):
            raise ValueError("Consecutive curves must share their endpoint densities!")

    lengths = np.array([p.length for p in pieces])
    moving = [p for p, ell in zip(pieces, lengths) if ell > 0]
    bound = float(np.sum(np.sqrt([p.claimed_bound for p in pieces]))) ** 2
    tolerance = max(p.tolerance for p in pieces)
    details = {"n_pieces": len(pieces), "piece_lengths": lengths}

    if not moving:
        first = pieces[0].path
        path = Path(first.times.copy(), first.densities.copy(), np.zeros_like(first.fluxes))
        return _certificate(
            space, theta, path, bound, construction, tolerance, continuum_bound, details
        )

    moving_lengths = np.array([p.length for p in moving])
    cuts = np.concatenate([[0.0], np.cumsum(moving_lengths) / moving_lengths.sum()])
    cuts[-1] = 1.0
    times, densities, fluxes = [], [], []
    for k, piece in enumerate(moving):
        part = piece.path.reparametrize(cuts[k], cuts[k + 1])
        start = 0 if k == 0 else 1
        times.append(part.times[start:])
        densities.append(part.densities[start:])
        fluxes.append(part.fluxes)

    path = Path(np.concatenate(times), np.vstack(densities), np.vstack(fluxes))

    return _certificate(
        space, theta, path, bound, construction, tolerance, continuum_bound, details
    )


def _require_kernel(space: DiscreteSpace, kernel: Optional[RadialKernel]) -> RadialKernel:

    kernel = kernel if kernel is not None else space.kernel
    if kernel is None:
        raise ValueError("The construction needs the jump kernel of the space!")

    return kernel


def expel_curve_boundary(
    space: DiscreteSpace,
    kernel: Optional[RadialKernel],
    theta: Interpolation,
    center_node: int,
    radius: float,
    g_exponent: float = 2.0,
    T: int = 64,
    tolerance: float = 0.1,
) -> CurveCertificate:
    """Moves a Dirac at the center onto the uniform measure of the punctured ball.

    The center keeps the mass G(t) = (1 - t)^g and sends it directly to every ball node. With
    θ(a, b) ≥ κ_θ·a the action is at most ∫Ġ²/G dt/(κ_θ·|B|·η_min), and ∫Ġ²/G = g²/(g - 1)
    for g > 1 (4 for g = 2); for g ≤ 1 it diverges and the claimed bound is infinite.

    Raises:
        RegimeError: when θ(1, 0) = 0.
        ResolutionError: when the punctured ball is empty or exceeds the kernel support.
    """

    kernel = _require_kernel(space, kernel)
    if theta.kappa <= 0:
        raise RegimeError(
            f"The boundary expel bound needs theta(1, 0) > 0, got {theta.kappa} for {theta.name}."
        )
    if g_exponent <= 0:
        raise ValueError("The mass profile exponent must be positive!")

    ball = ball_nodes(space, center_node, radius, exclude_center=True)
    if ball.size == 0:
        raise ResolutionError(f"The ball of radius {radius} contains no node besides its center.")
    size_b = set_measure(space, ball)
    idx, sign, eta = _pair_edges(space, np.array([center_node]), ball)
    m_c = space.ref_mass[center_node]

    times = np.linspace(0.0, 1.0, T + 1)
    g_mass = (1 - times) ** g_exponent
    densities = np.zeros((T + 1, space.n))
    densities[:, center_node] = g_mass / m_c
    densities[:, ball] = ((1 - g_mass) / size_b)[:, None]
    q = -np.diff(g_mass) / np.diff(times) / (m_c * size_b)
    fluxes = np.zeros((T, space.n_edges))
    fluxes[:, idx] = np.outer(q, sign / eta)

    integral = g_exponent**2 / (g_exponent - 1) if g_exponent > 1 else math.inf
    eta_min = float(eta.min())
    bound = integral / (theta.kappa * size_b * eta_min)
    ratio = radius / kernel.scale
    continuum = None
    if g_exponent == 2:
        continuum = constants.boundary_expel_bound(theta, kernel, ratio) ** 2
    details = {
        "center": int(center_node),
        "radius": radius,
        "g_exponent": g_exponent,
        "ball_measure": size_b,
        "eta_min": eta_min,
    }

    return _certificate(
        space,
        theta,
        Path(times, densities, fluxes),
        bound,
        CurveConstruction.expel_boundary,
        tolerance,
        continuum,
        details,
    )


def expel_curve_annuli(
    space: DiscreteSpace,
    kernel: Optional[RadialKernel],
    theta: Interpolation,
    center: int,
    delta: float,
    n_levels: Optional[int] = None,
    T: int = 32,
    tolerance: float = 1e-2,
) -> CurveCertificate:
    """Moves a Dirac onto the uniform measure of B(center, δ) through dyadic annuli.

    The mass jumps from the center to the innermost nonempty annulus of radius δ2^{-K}, then
    outwards annulus by annulus up to the annulus of radius δ, and finally spreads over the
    whole ball with a partial two-set step between that annulus and B(center, δ/2). The
    chain stops at the first empty annulus; the realized radii are reported.

    Raises:
        RegimeError: when the kernel has no algebraic blow-up parameters.
    """

    kernel = _require_kernel(space, kernel)
    if kernel.blowup_parameters() is None:
        raise RegimeError("The annuli construction needs a kernel with algebraic blow-up.")

    rings: list[np.ndarray] = []
    radii: list[float] = []
    level = 0
    while n_levels is None or level <= n_levels:
        ring = annulus_nodes(space, center, delta * 2.0**-level)
        if ring.size == 0:
            break
        rings.append(ring)
        radii.append(delta * 2.0**-level)
        level += 1
    if not rings:
        raise ResolutionError(f"The annulus of radius {delta} around node {center} is empty.")
    log.debug("Annuli chain with %d levels, innermost radius %.4g", len(rings), radii[-1])

    pieces = [two_set_curve(space, theta, [center], rings[-1], T=T, tolerance=tolerance)]
    for inner, outer in zip(rings[::-1][:-1], rings[::-1][1:]):
        pieces.append(two_set_curve(space, theta, inner, outer, T=T, tolerance=tolerance))

    ball = ball_nodes(space, center, delta)
    inner_ball = ball_nodes(space, center, delta / 2)
    p_end = 1.0 - set_measure(space, inner_ball) / set_measure(space, ball)
    pieces.append(
        two_set_curve(space, theta, rings[0], inner_ball, 1.0, p_end, T=T, tolerance=tolerance)
    )

    cert = concatenate(
        space,
        theta,
        pieces,
        CurveConstruction.expel_annuli,
        constants.annuli_expel_bound(theta, kernel, delta / kernel.scale) ** 2,
    )
    cert.details.update({"center": int(center), "delta": delta, "radii": radii})

    return cert


def _expel(
    space: DiscreteSpace,
    kernel: RadialKernel,
    theta: Interpolation,
    node: int,
    delta: float,
    T: int,
) -> CurveCertificate:

    if theta.kappa > 0:
        return expel_curve_boundary(space, kernel, theta, node, delta, 2.0, T)
    return expel_curve_annuli(space, kernel, theta, node, delta, T=T)


def _ball_step(
    space: DiscreteSpace,
    theta: Interpolation,
    ball0: np.ndarray,
    ball1: np.ndarray,
    T: int,
    tolerance: float,
) -> CurveCertificate:
    """Uniform on ball0 to uniform on ball1 for congruent balls; the overlap stays put."""

    size = set_measure(space, ball0)
    if not math.isclose(size, set_measure(space, ball1), rel_tol=1e-9):
        raise ResolutionError(
            "Consecutive balls of the chain have different measures; "
            "the chain comes too close to the boundary of the grid."
        )

    common = np.intersect1d(ball0, ball1)
    leaving = np.setdiff1d(ball0, ball1)
    arriving = np.setdiff1d(ball1, ball0)
    base = np.zeros(space.n)
    base[common] = 1.0 / size
    moved = set_measure(space, leaving) / size

    return two_set_curve(
        space, theta, leaving, arriving, T=T, mass=moved, base=base, tolerance=tolerance
    )


def dirac_chain_curve(
    space: DiscreteSpace,
    kernel: Optional[RadialKernel],
    theta: Interpolation,
    node_a: int,
    node_b: int,
    T: int = 32,
    tolerance: float = 0.1,
) -> CurveCertificate:
    """δ_a to δ_b: expel at a onto a ball of radius ε/6, ball-to-ball steps of length at most
    ε/6 along the segment, and absorb at b.

    The claimed bound is the squared sum of the discrete bounds of the pieces; the continuum
    bound is ((C_{d,θ}/√η(½))·|a - b|/ε + C_{d,θ,η})².

    Raises:
        RegimeError: when θ(1, 0) = 0 and the kernel has no algebraic blow-up, where Diracs
            are at infinite distance.
    """

    kernel = _require_kernel(space, kernel)
    if theta.kappa <= 0 and kernel.blowup_parameters() is None:
        raise RegimeError(
            "Diracs are at infinite distance: theta(1, 0) = 0 and the kernel is integrable."
        )

    if node_a == node_b:
        densities = np.zeros((T + 1, space.n))
        densities[:, node_a] = 1.0 / space.ref_mass[node_a]
        path = Path(np.linspace(0.0, 1.0, T + 1), densities, np.zeros((T, space.n_edges)))
        return _certificate(
            space, theta, path, 0.0, CurveConstruction.dirac_chain, tolerance, 0.0
        )

    eps = kernel.scale
    delta = constants.CHAIN_SPACING * eps
    punctured = theta.kappa > 0
    xa, xb = space.points[node_a], space.points[node_b]
    gap = float(np.linalg.norm(xb - xa))
    n_steps = max(1, math.ceil(gap / delta))
    centers = [space.nearest_node(xa + (k / n_steps) * (xb - xa)) for k in range(n_steps + 1)]
    centers[0], centers[-1] = node_a, node_b
    centers = [c for k, c in enumerate(centers) if k == 0 or c != centers[k - 1]]

    pieces = [_expel(space, kernel, theta, node_a, delta, T)]
    for c0, c1 in zip(centers[:-1], centers[1:]):
        ball0 = ball_nodes(space, c0, delta, exclude_center=punctured)
        ball1 = ball_nodes(space, c1, delta, exclude_center=punctured)
        pieces.append(_ball_step(space, theta, ball0, ball1, T, tolerance))
    pieces.append(_reverse(_expel(space, kernel, theta, node_b, delta, T)))

    continuum = constants.dirac_chain_bound(theta, kernel, gap / eps) ** 2
    cert = concatenate(space, theta, pieces, CurveConstruction.dirac_chain, continuum)
    cert.tolerance = tolerance
    cert.details.update({"node_a": int(node_a), "node_b": int(node_b), "centers": centers})

    return cert
