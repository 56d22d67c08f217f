"""Kantorovich potentials, Hopf-Lax evolution and the smoothed nonlocal subsolution

The lower bound W₂² ≤ ε²(M₂/2d)·W²_{η,ε} + (7/4 dR² + 8dR)√ε is certified by a chain of
discrete computations: an optimal Kantorovich potential φ₀ for the cost ½|x - y|², its
Hopf-Lax evolution φ_t, the Laplace smoothing K_s∗φ_t at s = √ε and the rescaled, drifted
potential

    φ̌_t = (2d/(ε²M₂))·K_s∗φ_t - (C A²/(ε s))·t,

which is a subsolution of the smoothed nonlocal Hamilton-Jacobi inequality

    ∫ ∂_tφ̌ dσ + ¼ ∬ (φ̌(y) - φ̌(x))² θ(σ(x), σ(y)) η_ε(|x - y|) dx dy ≤ 0,   σ = K_s∗μ.

Pairing φ̌ with the smoothed endpoints bounds ½W²_{η,ε,s} and hence ½W²_{η,ε} from below.

Functions:
    | *kantorovich_potential()* optimal dual pair (φ₀, φ₀ᶜ) from the exact transport problem.
    | *c_transform()* and *hopf_lax()* exhaustive minimizations over the nodes.
    | *hopf_lax_path()* potentials φ_t on a uniform time grid.
    | *hj_residual()* largest value of ∂_tφ + ½|∇φ|² along a path of potentials.
    | *hj_convolution_closure()* the Laplace smoothing of a subsolution stays a subsolution.
    | *nl_hj_subsolution()* builds φ̌ and evaluates the nonlocal inequality on sampled measures.
    | *hj_lower_bound()* runs the whole pipeline and checks the lower bound chain.
"""

from __future__ import annotations

import logging
import math
import warnings

from dataclasses import dataclass, field
from typing import Any, Optional, Sequence, Union

import numpy as np
import pandas as pd

from nlwasserstein.dynamics.constants import hj_constant, hj_error_term
from nlwasserstein.interpolation.theta import Interpolation
from nlwasserstein.kernels.radial import RadialKernel
from nlwasserstein.kernels.smoothing import convolution_matrix, laplace_kernel
from nlwasserstein.reference.transport import exact_plan, w2
from nlwasserstein.space.discrete_space import DiscreteSpace
from nlwasserstein.space.measures import Density
from nlwasserstein.utils.basic_functions import difference_quotient
from nlwasserstein.utils.checks import assert_positive
from nlwasserstein.utils.errors import PreconditionError
from nlwasserstein.utils.types import Array, ConvolutionMode


log = logging.getLogger(__name__)

HJ_TIMES = 32


@dataclass
class Potential:
    """Values φ_i of a potential at the nodes, labelled by a time t."""

    values: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)

    def lipschitz(self, space: DiscreteSpace, radius: Optional[float] = None) -> float:
        """Largest difference quotient over node pairs, optionally within a radius."""

        return difference_quotient(self.values, space.distance_matrix(), radius)

    def pairing(self, space: DiscreteSpace, rho: Union[Density, Array]) -> float:

        values = rho.values if isinstance(rho, Density) else np.asarray(rho, dtype=float)
        return float(np.sum(self.values * values * space.ref_mass))

    def to_dict(self) -> dict[str, Any]:
        return {"time": self.time, "values": self.values}


@dataclass
class HJConstants:
    """Constants of the smoothed nonlocal subsolution.

    Attributes:
        | C (float): moment constant built from d and M₂, ..., M₅ of the kernel.
        | A (float): bound on the local gradients of the potentials along the path.
        | s (float): Laplace smoothing scale.
        | eps (float): kernel scale ε.
        | factor (float): 2d/(ε²M₂), the rescaling of the smoothed potentials.
        | drift (float): C A²/(ε s), the time drift of the subsolution.
    """

    C: float
    A: float
    s: float
    eps: float
    m2: float
    dim: int
    factor: float = field(init=False)
    drift: float = field(init=False)

    def __post_init__(self) -> None:

        assert_positive(C=self.C, s=self.s, eps=self.eps, m2=self.m2)
        self.factor = 2 * self.dim / (self.eps**2 * self.m2)
        self.drift = self.C * self.A**2 / (self.eps * self.s)

    @classmethod
    def from_kernel(cls, kernel: RadialKernel, A: float, s: float) -> HJConstants:

        return cls(
            C=hj_constant(kernel),
            A=A,
            s=s,
            eps=kernel.scale,
            m2=kernel.unscaled().moment(2),
            dim=kernel.dim,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "C": self.C,
            "A": self.A,
            "s": self.s,
            "eps": self.eps,
            "M2": self.m2,
            "factor": self.factor,
            "drift": self.drift,
        }


def hopf_lax(space: DiscreteSpace, phi: Potential, t: float) -> Potential:
    """φ_t(x) = min_y φ(y) + |x - y|²/(2t) over the nodes y of the space."""

    if t <= 0:
        raise ValueError("The Hopf-Lax time must be positive!")

    values = np.min(phi.values[None, :] + space.distance_matrix() ** 2 / (2 * t), axis=1)
    return Potential(values, phi.time + t)


def c_transform(space: DiscreteSpace, phi: Potential) -> Potential:
    """φᶜ(y) = min_x φ(x) + ½|x - y|²."""

    return hopf_lax(space, phi, 1.0)


def kantorovich_potential(
    space: DiscreteSpace, mu: Union[Density, Array], nu: Union[Density, Array]
) -> tuple[Potential, Potential]:
    """Optimal dual pair for the cost ½|x - y|², extended to all nodes with φ₁ = φ₀ᶜ.

    The pair satisfies φ₁(y) - φ₀(x) ≤ ½|x - y|² and ∫φ₁dν - ∫φ₀dμ = ½W₂²(μ, ν). The
    potential φ₀ is fixed to 0 at the first node of the support of μ.

    Raises:
        PreconditionError: when Lip(φ₀) exceeds the diameter of the space.
    """

    values_mu = mu.values if isinstance(mu, Density) else np.asarray(mu, dtype=float)
    values_nu = nu.values if isinstance(nu, Density) else np.asarray(nu, dtype=float)
    if np.allclose(values_mu, values_nu, rtol=0.0, atol=1e-14 * float(np.max(values_mu))):
        return Potential(np.zeros(space.n), 0.0), Potential(np.zeros(space.n), 1.0)

    half_sq = space.distance_matrix() ** 2 / 2
    plan, info = exact_plan(space, values_mu, values_nu, half_sq)
    source, target = info["source"], info["target"]

    # c-transform from the support of mu, then back over all nodes
    phi1 = np.min(-info["u"][:, None] + half_sq[source], axis=0)
    phi0 = np.max(phi1[None, :] - half_sq, axis=1)
    phi0 -= phi0[source[0]]
    potential0 = Potential(phi0, 0.0)
    potential1 = c_transform(space, potential0)

    dual = potential1.pairing(space, values_nu) - potential0.pairing(space, values_mu)
    gap = abs(dual - plan.cost)
    if gap > 1e-8 * max(1.0, plan.cost):
        warnings.warn(f"Kantorovich duality gap {gap:.3e} above 1e-8.")
    lip = potential0.lipschitz(space)
    if lip > space.diameter * (1 + 1e-9):
        raise PreconditionError(f"Lip(phi0) = {lip} exceeds the diameter {space.diameter}.")
    log.debug(f"Kantorovich potential: dual {dual:.6g}, primal {plan.cost:.6g}, Lip {lip:.4g}")

    return potential0, potential1


def hopf_lax_path(
    space: DiscreteSpace, phi0: Potential, n_times: int = HJ_TIMES
) -> list[Potential]:
    """φ_t for t = k/n_times, k = 0, ..., n_times."""

    times = np.linspace(0.0, 1.0, n_times + 1)
    return [Potential(phi0.values.copy(), 0.0)] + [hopf_lax(space, phi0, t) for t in times[1:]]


def _stack(potentials: Sequence[Potential]) -> tuple[np.ndarray, np.ndarray]:

    values = np.vstack([p.values for p in potentials])
    times = np.array([p.time for p in potentials])
    if (np.diff(times) <= 0).any():
        raise ValueError("Potentials must be ordered by increasing time!")

    return values, times


def local_slopes(space: DiscreteSpace, values: np.ndarray) -> np.ndarray:
    """Per node, the largest difference quotient towards the nearest grid neighbors."""

    dists = space.distance_matrix()
    mask = (dists > 0) & (dists <= 1.5 * space.spacing)
    diffs = np.abs(values[None, :] - values[:, None])
    quotients = np.where(mask, diffs / np.where(mask, dists, 1.0), 0.0)

    return quotients.max(axis=1)


def _slack(space: DiscreteSpace, scale: float) -> float:
    return 1e-6 + 10 * space.spacing * scale


def hj_residual(space: DiscreteSpace, potentials: Sequence[Potential]) -> float:
    """max over nodes and steps of (φ_{k+1} - φ_k)/Δt + ½ min(|∇φ_k|, |∇φ_{k+1}|)².

    The smaller of the two end slopes keeps the residual of Hopf-Lax solutions nonpositive
    both where characteristics spread out of the boundary and where they focus.
    """

    values, times = _stack(potentials)
    rates = np.diff(values, axis=0) / np.diff(times)[:, None]
    all_slopes = np.array([local_slopes(space, v) for v in values])
    slopes = np.minimum(all_slopes[:-1], all_slopes[1:])

    return float(np.max(rates + 0.5 * slopes**2))


def hj_convolution_closure(
    space: DiscreteSpace, potentials: Sequence[Potential], s: float
) -> dict[str, Any]:
    """Residual of the path and of its Laplace smoothing K_s∗φ_t (function mode)."""

    smoothing = convolution_matrix(laplace_kernel(space.dim, s), space, ConvolutionMode.function)
    smoothed = [Potential(smoothing @ p.values, p.time) for p in potentials]
    A = max(float(np.max(local_slopes(space, p.values))) for p in potentials)
    residual = hj_residual(space, potentials)
    residual_smoothed = hj_residual(space, smoothed)
    slack = _slack(space, max(1.0, A**2))

    return {
        "residual": residual,
        "residual_smoothed": residual_smoothed,
        "slack": slack,
        "pass": residual_smoothed <= slack,
    }


def _sample_measures(space: DiscreteSpace, n_samples: int, seed: int) -> np.ndarray:
    """Uniform, Dirac and random probability densities, one per row."""

    rng = np.random.default_rng(seed)
    m = space.ref_mass
    rows = [np.full(space.n, 1.0 / space.total_mass)]
    n_dirac = min(space.n, max(1, n_samples // 3))
    for i in rng.choice(space.n, size=n_dirac, replace=False):
        row = np.zeros(space.n)
        row[i] = 1.0 / m[i]
        rows.append(row)
    while len(rows) < n_samples:
        weights = rng.dirichlet(np.ones(space.n))
        rows.append(weights / m)

    return np.vstack(rows[:n_samples])


@dataclass
class SubsolutionCheck:
    """Smoothed nonlocal potentials φ̌ and the largest value of the nonlocal inequality."""

    potentials: list[Potential]
    constants: HJConstants
    lhs_max: float
    slack: float
    lhs: pd.DataFrame = field(repr=False)

    @property
    def holds(self) -> bool:
        return self.lhs_max <= self.slack


def nl_hj_subsolution(
    space: DiscreteSpace,
    theta: Interpolation,
    potentials: Sequence[Potential],
    s: float,
    n_samples: int = 100,
    seed: int = 12345,
) -> SubsolutionCheck:
    """Builds φ̌_t = (2d/(ε²M₂))·K_s∗φ_t - (C A²/(ε s))·t and checks the nonlocal inequality.

    Raises:
        PreconditionError: when the path violates ∂_tφ + ½|∇φ|² ≤ 0 beyond tolerance, or the
            scales do not satisfy ε ≤ 1 and s ≥ ε.
    """

    kernel = space.kernel
    if kernel is None:
        raise PreconditionError("The nonlocal subsolution needs a space built from a kernel.")
    eps = kernel.scale
    if not 0 < eps <= 1 or s < eps:
        raise PreconditionError(f"Scales must satisfy 0 < eps <= 1 and s >= eps, got {eps}, {s}.")

    values, times = _stack(potentials)
    A = float(max(np.max(local_slopes(space, v)) for v in values))
    residual = hj_residual(space, potentials)
    if residual > _slack(space, max(1.0, A**2)):
        raise PreconditionError(f"The local Hamilton-Jacobi residual {residual:.3e} is positive.")

    constants = HJConstants.from_kernel(kernel, A, s)
    smoothing_f = convolution_matrix(laplace_kernel(space.dim, s), space, ConvolutionMode.function)
    smoothing_m = convolution_matrix(laplace_kernel(space.dim, s), space, ConvolutionMode.measure)
    checked = constants.factor * values @ smoothing_f.T - constants.drift * times[:, None]

    sigma = _sample_measures(space, n_samples, seed) @ smoothing_m.T
    m = space.ref_mass
    c = space.edge_mass
    rows = []
    for k in range(len(times) - 1):
        rate = (checked[k + 1] - checked[k]) / (times[k + 1] - times[k])
        grad = space.gradient(checked[k])
        th = theta(sigma[:, space.edge_i], sigma[:, space.edge_j])
        lhs = sigma @ (rate * m) + 0.5 * (th * (grad**2 * c)[None, :]).sum(axis=1)
        rows.append(
            {"time": times[k], "lhs_max": float(np.max(lhs)), "lhs_mean": float(np.mean(lhs))}
        )

    frame = pd.DataFrame(rows)
    slack = _slack(space, float(np.max(np.abs(checked))))
    lhs_max = float(frame["lhs_max"].max())
    log.info(f"Nonlocal subsolution: largest left-hand side {lhs_max:.4g}, slack {slack:.3g}")

    return SubsolutionCheck(
        potentials=[Potential(v, t) for v, t in zip(checked, times)],
        constants=constants,
        lhs_max=lhs_max,
        slack=slack,
        lhs=frame,
    )


def support_radius(space: DiscreteSpace, *densities: Union[Density, Array]) -> float:
    """Radius of the ball centered at the middle of the bounding box of the supports."""

    support = np.zeros(space.n, dtype=bool)
    for rho in densities:
        values = rho.values if isinstance(rho, Density) else np.asarray(rho, dtype=float)
        support |= values > 0
    pts = space.points[support]
    center = (pts.min(axis=0) + pts.max(axis=0)) / 2

    return float(np.max(np.linalg.norm(pts - center[None, :], axis=1)))


@dataclass
class HJLowerBound:
    """Outcome of the Hamilton-Jacobi lower bound pipeline."""

    pairing: float
    lower_bound: float
    distance: float
    smoothed_distance: Optional[float]
    w2: float
    radius: float
    eps: float
    s: float
    headline_rhs: float
    subsolution: SubsolutionCheck = field(repr=False)

    @property
    def headline_margin(self) -> float:
        return self.headline_rhs - self.w2**2

    @property
    def duality_holds(self) -> bool:
        tol = 1e-4 * max(1.0, self.distance**2)
        if self.smoothed_distance is None:
            return self.pairing <= 0.5 * self.distance**2 + tol
        return (
            self.pairing <= 0.5 * self.smoothed_distance**2 + tol
            and self.smoothed_distance <= self.distance * (1 + 1e-3) + 1e-3
        )

    @property
    def holds(self) -> bool:
        return self.headline_margin >= 0 and self.duality_holds and self.subsolution.holds

    def to_dict(self) -> dict[str, Any]:
        return {
            "pairing": self.pairing,
            "lower_bound": self.lower_bound,
            "distance": self.distance,
            "smoothed_distance": self.smoothed_distance,
            "w2": self.w2,
            "radius": self.radius,
            "eps": self.eps,
            "s": self.s,
            "headline_rhs": self.headline_rhs,
            "headline_margin": self.headline_margin,
            "duality_holds": self.duality_holds,
            "subsolution_lhs_max": self.subsolution.lhs_max,
            "subsolution_slack": self.subsolution.slack,
            "constants": self.subsolution.constants.to_dict(),
            "holds": self.holds,
        }

    def to_dataframe(self) -> pd.DataFrame:

        flat = {k: v for k, v in self.to_dict().items() if k != "constants"}
        return pd.DataFrame({"quantity": list(flat), "value": list(flat.values())})


def hj_lower_bound(
    space: DiscreteSpace,
    theta: Interpolation,
    mu0: Union[Density, Array],
    mu1: Union[Density, Array],
    distance: float,
    smoothed_distance: Optional[float] = None,
    n_times: int = HJ_TIMES,
    n_samples: int = 100,
    seed: int = 12345,
) -> HJLowerBound:
    """Runs potential, Hopf-Lax, smoothing at s = √ε and the nonlocal pairing.

    Args:
        distance (float): W_{η,ε}(μ₀, μ₁) computed by the solver.
        smoothed_distance (Optional[float]): W_{η,ε,s}(μ₀, μ₁) at s = √ε, when available.

    Returns:
        HJLowerBound: the pairing, the implied lower bound √(2·pairing) and the margin of
        W₂² ≤ ε²(M₂/2d)·W² + (7/4 dR² + 8dR)√ε.
    """

    kernel = space.kernel
    if kernel is None:
        raise PreconditionError("The lower bound pipeline needs a space built from a kernel.")
    eps = kernel.scale
    s = math.sqrt(eps)
    d = space.dim

    phi0, _ = kantorovich_potential(space, mu0, mu1)
    path = hopf_lax_path(space, phi0, n_times)
    check = nl_hj_subsolution(space, theta, path, s, n_samples=n_samples, seed=seed)

    smoothing = convolution_matrix(laplace_kernel(d, s), space, ConvolutionMode.measure)
    rho0 = mu0.values if isinstance(mu0, Density) else np.asarray(mu0, dtype=float)
    rho1 = mu1.values if isinstance(mu1, Density) else np.asarray(mu1, dtype=float)
    pairing = check.potentials[-1].pairing(space, smoothing @ rho1) - check.potentials[0].pairing(
        space, smoothing @ rho0
    )

    w2_value, _ = w2(space, rho0, rho1)
    radius = support_radius(space, rho0, rho1)
    m2 = kernel.unscaled().moment(2)
    headline_rhs = eps**2 * m2 / (2 * d) * distance**2 + hj_error_term(d, radius, eps)

    result = HJLowerBound(
        pairing=float(pairing),
        lower_bound=math.sqrt(2 * max(pairing, 0.0)),
        distance=distance,
        smoothed_distance=smoothed_distance,
        w2=w2_value,
        radius=radius,
        eps=eps,
        s=s,
        headline_rhs=headline_rhs,
        subsolution=check,
    )
    log.info(
        f"Hamilton-Jacobi lower bound {result.lower_bound:.6g} against distance {distance:.6g}"
    )

    return result
