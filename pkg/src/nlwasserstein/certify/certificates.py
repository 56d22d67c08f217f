"""Certificates of the quantitative inequalities satisfied by the nonlocal distance

A certificate compares a left-hand side with a right-hand side recomputed from the module
formulas and passes when rhs - lhs ≥ -tolerance. Constants are evaluated with the discrete
quantities of the space (sums Σ η m over neighbors, set measures), and the continuum values are
recorded alongside in the details.

Functions:
    | *classify_regime()* topological regime induced by a kernel and an interpolation.
    | *certify_lower_bounds()* W₁ and total variation lower bounds.
    | *certify_dirac_floor()* distance floor between a Dirac and a measure without atom there.
    | *certify_disintegration()* W² is below the transport cost of Dirac-to-Dirac distances.
    | *certify_phi_bound()* Dirac-to-Dirac distances below Φ(|x - y|/ε).
    | *certify_tv_upper()*, *certify_crude_w2_upper()* upper bounds from TV and W₂.
    | *certify_holder()* ½-Hölder continuity of set masses along a geodesic.
    | *certify_expel()* expel constructions against their bounds.
    | *certify_nonlocalization_action()* action of a nonlocalized smoothed local curve.
    | *assembled_constants()* table of every assembled constant.
    | *run_battery()* runs a named selection of certificates on a shared context.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Optional, Sequence, Union

import numpy as np
import pandas as pd

from nlwasserstein.dynamics import constants
from nlwasserstein.dynamics.action import path_action
from nlwasserstein.dynamics.curves import (
    CurveCertificate,
    expel_curve_annuli,
    expel_curve_boundary,
)
from nlwasserstein.dynamics.nonlocalize import nonlocalize
from nlwasserstein.interpolation.theta import Interpolation
from nlwasserstein.kernels.radial import RadialKernel
from nlwasserstein.kernels.smoothing import convolution_matrix, laplace_kernel, zeta_profile
from nlwasserstein.reference.transport import convolution_w2_estimates, exact_plan, w1, w2
from nlwasserstein.solver.config import SolveConfig
from nlwasserstein.solver.solve import SolveReport, solve
from nlwasserstein.space.discrete_space import DiscreteSpace
from nlwasserstein.space.measures import Density, Path, dirac_at, min_measure, tv_distance
from nlwasserstein.utils.errors import NlwError, RegimeError, SizeLimitError
from nlwasserstein.utils.formats import dict_to_dataframe, jsonable
from nlwasserstein.utils.types import Array, ConvolutionMode, Regime


log = logging.getLogger(__name__)

DISINTEGRATION_MAX_SUPPORT = 30


@dataclass
class BoundCertificate:
    """One inequality lhs ≤ rhs, passing when margin = rhs - lhs ≥ -tolerance."""

    name: str
    lhs: float
    rhs: float
    tolerance: float = 1e-6
    details: dict[str, Any] = field(default_factory=dict)
    skipped: bool = False
    reason: str = ""

    @property
    def margin(self) -> float:
        if math.isinf(self.rhs) and self.rhs > 0:
            return math.inf
        if math.isinf(self.lhs) and self.lhs > 0:
            return -math.inf
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.skipped or self.margin >= -self.tolerance

    @property
    def digest(self) -> str:
        payload = json.dumps(jsonable({"name": self.name, **self.details}), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "skipped": self.skipped,
            "reason": self.reason,
            "digest": self.digest,
            "details": self.details,
        }


def certificates_to_dataframe(certificates: Sequence[BoundCertificate]) -> pd.DataFrame:

    rows = [
        {k: v for k, v in cert.to_dict().items() if k not in ("details", "digest")}
        for cert in certificates
    ]
    return dict_to_dataframe(
        rows, ["name", "lhs", "rhs", "margin", "tolerance", "pass", "skipped", "reason"]
    )


def _skipped(name: str, reason: str) -> BoundCertificate:

    log.info(f"Certificate {name} skipped: {reason}")
    return BoundCertificate(name, math.nan, math.nan, skipped=True, reason=reason)


def _values(mu: Union[Density, Array]) -> np.ndarray:
    return mu.values if isinstance(mu, Density) else np.asarray(mu, dtype=float)


def _mass(space: DiscreteSpace, mu: Union[Density, Array]) -> float:
    return float(np.dot(_values(mu), space.ref_mass))


def classify_regime(kernel: RadialKernel, theta: Interpolation) -> Regime:
    """Disconnected when θ(1,0) = 0 and η is integrable, StrongTopology when θ(1,0) > 0 and η
    is integrable, WeakTopology when the kernel declares an algebraic blow-up."""

    if kernel.is_integrable():
        return Regime.disconnected if theta.kappa <= 0 else Regime.strong
    if kernel.blowup_parameters() is not None:
        return Regime.weak

    return Regime.unclassified


def _space_kernel(space: DiscreteSpace, kernel: Optional[RadialKernel]) -> RadialKernel:

    kernel = kernel if kernel is not None else space.kernel
    if kernel is None:
        raise ValueError("The certificate needs the jump kernel of the space!")

    return kernel


def certify_lower_bounds(
    space: DiscreteSpace,
    theta: Interpolation,
    mu0: Union[Density, Array],
    mu1: Union[Density, Array],
    distance: float,
    tolerance: float = 1e-3,
) -> list[BoundCertificate]:
    """√(2/(C̃M))·W₁ ≤ W and √(2/(CM))·TV ≤ W.

    C = sup_x Σ_y η(x,y) m_y and C̃ = sup_x Σ_y |x - y|² η(x,y) m_y on the space, M the mass.
    """

    rho0, rho1 = _values(mu0), _values(mu1)
    mass = _mass(space, rho0)
    tol = tolerance * max(1.0, distance)

    w1_value = w1(space, rho0, rho1)
    tv_value = tv_distance(Density(rho0, space.ref_mass), Density(rho1, space.ref_mass))
    w1_bound = math.sqrt(2 / (space.C_tilde * mass)) * w1_value if w1_value > 0 else 0.0
    tv_bound = math.sqrt(2 / (space.C_const * mass)) * tv_value if tv_value > 0 else 0.0

    return [
        BoundCertificate(
            "w1-lower",
            w1_bound,
            distance,
            tol,
            {"w1": w1_value, "C_tilde": space.C_tilde, "mass": mass},
        ),
        BoundCertificate(
            "tv-lower",
            tv_bound,
            distance,
            tol,
            {"tv": tv_value, "C": space.C_const, "mass": mass},
        ),
    ]


def certify_dirac_floor(
    space: DiscreteSpace,
    theta: Interpolation,
    node: int,
    nu: Union[Density, Array],
    distance: Optional[float] = None,
    config: Optional[SolveConfig] = None,
    tolerance: float = 1e-3,
) -> BoundCertificate:
    """W(M·δ_x, ν) ≥ 2√(M/Σ_y η(x,y) m_y) when ν has no mass at x.

    The continuum floor 2(∫η)^{-1/2} is recorded in the details.

    Raises:
        RegimeError: outside the strong topology regime.
    """

    kernel = _space_kernel(space, None)
    regime = classify_regime(kernel, theta)
    if regime != Regime.strong:
        raise RegimeError(
            f"The Dirac floor holds in the strong topology regime, not {regime.value}."
        )

    rho1 = _values(nu)
    if rho1[node] > 0:
        return _skipped("dirac-floor", "the target measure has an atom at the Dirac node")

    mass = _mass(space, rho1)
    if distance is None:
        report = solve(space, theta, dirac_at(space, node, mass), rho1, config)
        distance = report.distance

    row = space.weight_matrix.tocsr()[node].toarray().ravel()
    integral = float(row @ space.ref_mass)
    floor = 2 * math.sqrt(mass / integral)

    return BoundCertificate(
        "dirac-floor",
        floor,
        distance,
        tolerance * max(1.0, distance),
        {
            "node": node,
            "discrete_integral": integral,
            "continuum_floor": 2 * math.sqrt(mass / kernel.kernel_integral()),
        },
    )


def _dirac_distance(
    space: DiscreteSpace,
    theta: Interpolation,
    i: int,
    j: int,
    config: Optional[SolveConfig],
) -> float:

    if i == j:
        return 0.0
    return solve(space, theta, dirac_at(space, i), dirac_at(space, j), config).distance


def certify_disintegration(
    space: DiscreteSpace,
    theta: Interpolation,
    mu: Union[Density, Array],
    nu: Union[Density, Array],
    distance: Optional[float] = None,
    config: Optional[SolveConfig] = None,
    tolerance: float = 1e-3,
) -> BoundCertificate:
    """W²(μ, ν) ≤ min over couplings π of Σ π(x, y)·W²(δ_x, δ_y).

    Raises:
        SizeLimitError: when a support has more than 30 nodes.
    """

    rho0, rho1 = _values(mu), _values(nu)
    source, target = np.flatnonzero(rho0 > 0), np.flatnonzero(rho1 > 0)
    if max(source.size, target.size) > DISINTEGRATION_MAX_SUPPORT:
        raise SizeLimitError(
            f"The disintegration certificate takes supports of at most "
            f"{DISINTEGRATION_MAX_SUPPORT} nodes."
        )

    cost = np.zeros((space.n, space.n))
    for i in source:
        for j in target:
            cost[i, j] = _dirac_distance(space, theta, int(i), int(j), config) ** 2
    if distance is None:
        distance = solve(space, theta, rho0, rho1, config).distance

    plan, _ = exact_plan(space, rho0, rho1, cost)
    lhs = distance**2

    return BoundCertificate(
        "disintegration",
        lhs,
        plan.cost,
        tolerance * max(1.0, plan.cost),
        {"n_pairs": int(source.size * target.size), "plan_size": int(plan.masses.size)},
    )


def certify_phi_bound(
    space: DiscreteSpace,
    theta: Interpolation,
    pairs: Sequence[tuple[int, int]],
    config: Optional[SolveConfig] = None,
    tolerance: float = 1e-3,
) -> list[BoundCertificate]:
    """W(δ_x, δ_y) ≤ Φ(|x - y|/ε) for each node pair.

    Raises:
        RegimeError: when the kernel declares no algebraic blow-up.
    """

    kernel = _space_kernel(space, None)
    if kernel.blowup_parameters() is None:
        raise RegimeError("The Phi bound needs a kernel with algebraic blow-up.")

    dists = space.distance_matrix()
    certificates = []
    for i, j in pairs:
        t = float(dists[i, j]) / kernel.scale
        bound = float(constants.phi_bound(theta, kernel, t))
        distance = _dirac_distance(space, theta, int(i), int(j), config)
        certificates.append(
            BoundCertificate(
                "phi",
                distance,
                bound,
                tolerance * max(1.0, bound),
                {"pair": [int(i), int(j)], "t": t},
            )
        )

    return certificates


def _overlap_curve_action(
    space: DiscreteSpace,
    theta: Interpolation,
    rho0: np.ndarray,
    rho1: np.ndarray,
    config: Optional[SolveConfig],
) -> tuple[float, float]:
    """Action of the curve keeping Θ = min(μ₀, μ₁) static while the excess moves.

    The excess μᵢ - Θ is moved along its own solver geodesic and Θ is added back at every
    time. Returns the action of the lifted curve and the squared distance of the excess.
    """

    m = space.ref_mass
    overlap = min_measure(Density(rho0, m), Density(rho1, m)).values
    excess0, excess1 = rho0 - overlap, rho1 - overlap
    if float(np.dot(excess0, m)) <= 1e-14 * float(np.dot(rho0, m)):
        return 0.0, 0.0

    report = solve(space, theta, excess0, excess1, config)
    if report.path is None:
        return math.inf, report.objective
    path = report.path
    lifted = Path(path.times, path.densities + overlap[None, :], path.fluxes)
    total, _ = path_action(space, theta, lifted)

    return total, report.objective


def certify_tv_upper(
    space: DiscreteSpace,
    theta: Interpolation,
    mu0: Union[Density, Array],
    mu1: Union[Density, Array],
    distance: float,
    config: Optional[SolveConfig] = None,
    tolerance: float = 1e-3,
) -> BoundCertificate:
    """W² ≤ C·TV with C = 2C²_{d,θ}·diam²/(ε²η(½)) + 4C²_{d,θ,η} on the space's diameter.

    The details carry the action of the overlap curve, which lies between W² and the
    squared distance of the excess measures.
    """

    kernel = _space_kernel(space, None)
    rho0, rho1 = _values(mu0), _values(mu1)
    tv_value = tv_distance(Density(rho0, space.ref_mass), Density(rho1, space.ref_mass))
    C = constants.tv_upper_constant(theta, kernel, space.diameter)
    curve_action, excess_objective = _overlap_curve_action(space, theta, rho0, rho1, config)
    log.debug(f"Overlap curve action {curve_action:.6g} against C·TV {C * tv_value:.6g}")

    return BoundCertificate(
        "tv-upper",
        distance**2,
        C * tv_value,
        tolerance * max(1.0, distance**2),
        {
            "tv": tv_value,
            "C": C,
            "diameter": space.diameter,
            "curve_action": curve_action,
            "excess_objective": excess_objective,
        },
    )

def certify_crude_w2_upper(
    space: DiscreteSpace,
    theta: Interpolation,
    mu0: Union[Density, Array],
    mu1: Union[Density, Array],
    distance: float,
    tolerance: float = 1e-3,
) -> BoundCertificate:
    """W² ≤ 2C²_{d,θ}/η(½)·W₂²/ε² + 2C²_{d,θ,η}·M."""

    kernel = _space_kernel(space, None)
    rho0, rho1 = _values(mu0), _values(mu1)
    mass = _mass(space, rho0)
    a, b = constants.crude_w2_constants(theta, kernel)
    w2_value, _ = w2(space, rho0, rho1)
    rhs = a * w2_value**2 / kernel.scale**2 + b * mass if w2_value > 0 else 0.0

    return BoundCertificate(
        "crude-w2",
        distance**2,
        rhs,
        tolerance * max(1.0, distance**2),
        {"w2": w2_value, "a": a, "b": b},
    )


def certify_holder(
    space: DiscreteSpace,
    path: Path,
    distance: float,
    sets: Sequence[Array],
    tolerance: float = 1e-6,
) -> list[BoundCertificate]:
    """|ρ_{t₀}(A) - ρ_{t₁}(A)| ≤ √(CM/2)·W·(t₁ - t₀)^{1/2} over all pairs of path times."""

    mass = float(path.masses(space.ref_mass)[0])
    coefficient = math.sqrt(space.C_const * mass / 2) * distance
    root_dt = np.sqrt(np.abs(path.times[:, None] - path.times[None, :]))
    off_diag = root_dt > 0

    certificates = []
    for nodes in sets:
        nodes = np.asarray(nodes, dtype=np.int64)
        set_mass = path.densities[:, nodes] @ space.ref_mass[nodes]
        jumps = np.abs(set_mass[:, None] - set_mass[None, :])
        ratio = float(np.max(jumps[off_diag] / root_dt[off_diag])) if off_diag.any() else 0.0
        certificates.append(
            BoundCertificate(
                "holder",
                ratio,
                coefficient,
                tolerance * max(1.0, coefficient),
                {"set_size": int(nodes.size), "C": space.C_const},
            )
        )

    return certificates


def certify_expel(
    space: DiscreteSpace,
    theta: Interpolation,
    center: int,
    radius: float,
    T: int = 32,
) -> BoundCertificate:
    """Action of the expel construction from a Dirac at the center against its bound.

    The boundary construction is used when θ(1, 0) > 0 and the annuli construction for
    kernels with algebraic blow-up.
    """

    kernel = _space_kernel(space, None)
    if theta.kappa > 0:
        curve: CurveCertificate = expel_curve_boundary(space, kernel, theta, center, radius, T=T)
    elif kernel.blowup_parameters() is not None:
        curve = expel_curve_annuli(space, kernel, theta, center, radius, T=T)
    else:
        raise RegimeError("No expel construction: theta(1, 0) = 0 and the kernel is integrable.")

    return BoundCertificate(
        f"expel-{curve.construction.value}",
        curve.action_integral,
        curve.claimed_bound * (1 + curve.tolerance),
        1e-12,
        {
            "residual": curve.residual,
            "continuum_bound": curve.continuum_bound,
            "center": center,
            "radius": radius,
        },
    )


def local_action(
    space: DiscreteSpace, times: np.ndarray, rho_path: np.ndarray, J_path: np.ndarray
) -> float:
    """∫ Σ_i |J_i|²/ρ_i m_i dt with midpoint densities and fluxes."""

    times = np.asarray(times, dtype=float)
    J_path = np.asarray(J_path, dtype=float).reshape(times.shape[0], space.n, space.dim)
    rho_mid = (rho_path[:-1] + rho_path[1:]) / 2
    J_mid = (J_path[:-1] + J_path[1:]) / 2
    sq = np.sum(J_mid**2, axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        density = np.where(sq > 0, sq / rho_mid, 0.0)

    return float(np.sum(np.diff(times) * (density @ space.ref_mass)))


def certify_nonlocalization_action(
    space: DiscreteSpace,
    theta: Interpolation,
    times: np.ndarray,
    rho_path: np.ndarray,
    J_path: np.ndarray,
    s: float,
    local_tol: float = 0.2,
) -> BoundCertificate:
    """Action of the nonlocalized K_s-smoothed local curve ≤ 2d/(ε²M₂)(1 + 3ε/s)⁴·local action."""

    kernel = _space_kernel(space, None)
    times = np.asarray(times, dtype=float)
    J_path = np.asarray(J_path, dtype=float).reshape(times.shape[0], space.n, space.dim)
    smoothing = convolution_matrix(laplace_kernel(space.dim, s), space, ConvolutionMode.measure)
    rho_s = np.asarray(rho_path, dtype=float) @ smoothing.T
    J_s = np.einsum("ij,tjd->tid", smoothing, J_path)

    local = local_action(space, times, rho_s, J_s)
    path = nonlocalize(space, kernel, times, rho_s, J_s, local_tol=local_tol)
    nonlocal_value, _ = path_action(space, theta, path)
    factor = constants.nonlocalization_action_factor(kernel, s)

    return BoundCertificate(
        "nonlocalization-action",
        nonlocal_value,
        factor * local,
        1e-9 * max(1.0, factor * local),
        {"local_action": local, "factor": factor, "s": s},
    )


def assembled_constants(
    theta: Interpolation, kernel: RadialKernel, diameter: float = 1.0
) -> pd.DataFrame:
    """Every constant of the estimates for (d, θ, η) at the kernel's scale.

    Constants that do not apply to the regime are reported as NaN.
    """

    def attempt(func: Callable[[], float]) -> float:
        try:
            return float(func())
        except (NlwError, ValueError):
            return math.nan

    base = kernel.unscaled()
    d = kernel.dim
    params = kernel.blowup_parameters()
    rows = {
        "C_theta": attempt(lambda: theta.c_theta),
        "kappa_theta": theta.kappa,
        "kernel_integral": base.kernel_integral(),
        "M2": attempt(lambda: base.moment(2)),
        "M3": attempt(lambda: base.moment(3)),
        "M4": attempt(lambda: base.moment(4)),
        "M5": attempt(lambda: base.moment(5)),
        "C_d_theta": constants.c_d_theta(d, theta),
        "C_d_theta_eta": attempt(lambda: constants.c_d_theta_eta(theta, kernel)),
        "C_tilde_d_s": math.nan if params is None else constants.c_tilde_d_s(d, *params),
        "C_d_s": math.nan if params is None else constants.c_d_s(d, *params),
        "C_d_theta_s": attempt(lambda: constants.c_d_theta_s(theta, kernel)),
        "Phi(3/8)": attempt(lambda: constants.phi_bound(theta, kernel, constants.PHI_THRESHOLD)),
        "tv_upper": attempt(lambda: constants.tv_upper_constant(theta, kernel, diameter)),
        "crude_w2_a": attempt(lambda: constants.crude_w2_constants(theta, kernel)[0]),
        "crude_w2_b": attempt(lambda: constants.crude_w2_constants(theta, kernel)[1]),
        "hj_C": attempt(lambda: constants.hj_constant(kernel)),
        "nonlocalization_factor": attempt(
            lambda: constants.nonlocalization_action_factor(kernel, math.sqrt(kernel.scale))
        ),
    }

    return pd.DataFrame({"constant": list(rows), "value": list(rows.values())})


@dataclass
class CertifyContext:
    """Shared inputs of a certificate battery; the distance is solved once on demand."""

    space: DiscreteSpace
    theta: Interpolation
    mu0: np.ndarray
    mu1: np.ndarray
    config: SolveConfig = field(default_factory=SolveConfig)
    phi_pairs: Optional[list[tuple[int, int]]] = None
    holder_sets: Optional[list[np.ndarray]] = None

    def __post_init__(self) -> None:
        self.mu0 = _values(self.mu0)
        self.mu1 = _values(self.mu1)

    @cached_property
    def report(self) -> SolveReport:
        return solve(self.space, self.theta, self.mu0, self.mu1, self.config)

    @property
    def distance(self) -> float:
        return self.report.distance

    @property
    def kernel(self) -> RadialKernel:
        return _space_kernel(self.space, None)

    @property
    def center(self) -> int:
        return self.space.nearest_node(self.space.points.mean(axis=0))


def _battery_lower_bounds(ctx: CertifyContext) -> list[BoundCertificate]:
    return certify_lower_bounds(ctx.space, ctx.theta, ctx.mu0, ctx.mu1, ctx.distance)


def _battery_dirac_floor(ctx: CertifyContext) -> list[BoundCertificate]:

    node = int(np.argmax(ctx.mu0 * ctx.space.ref_mass))
    return [certify_dirac_floor(ctx.space, ctx.theta, node, ctx.mu1, config=ctx.config)]


def _battery_phi(ctx: CertifyContext) -> list[BoundCertificate]:

    pairs = ctx.phi_pairs
    if pairs is None:
        masses0, masses1 = ctx.mu0 * ctx.space.ref_mass, ctx.mu1 * ctx.space.ref_mass
        pairs = [(int(np.argmax(masses0)), int(np.argmax(masses1)))]
    return certify_phi_bound(ctx.space, ctx.theta, pairs, ctx.config)


def _battery_tv_upper(ctx: CertifyContext) -> list[BoundCertificate]:
    return [certify_tv_upper(ctx.space, ctx.theta, ctx.mu0, ctx.mu1, ctx.distance, ctx.config)]


def _battery_crude_w2(ctx: CertifyContext) -> list[BoundCertificate]:
    return [certify_crude_w2_upper(ctx.space, ctx.theta, ctx.mu0, ctx.mu1, ctx.distance)]


def _battery_convolution_w2(ctx: CertifyContext) -> list[BoundCertificate]:

    certificates = []
    s = math.sqrt(ctx.kernel.scale)
    smoothers = (("laplace", laplace_kernel(ctx.space.dim, s)), ("zeta", zeta_profile(ctx.kernel)))
    for name, kernel in smoothers:
        result = convolution_w2_estimates(ctx.space, ctx.mu0, kernel)
        certificates.append(
            BoundCertificate(
                f"convolution-w2-{name}",
                result["w2"],
                result["bound"],
                1e-9 * max(1.0, result["bound"]),
                {"coupling": result["coupling"]},
            )
        )
    return certificates


def _battery_disintegration(ctx: CertifyContext) -> list[BoundCertificate]:
    return [
        certify_disintegration(
            ctx.space, ctx.theta, ctx.mu0, ctx.mu1, distance=ctx.distance, config=ctx.config
        )
    ]


def _battery_holder(ctx: CertifyContext) -> list[BoundCertificate]:

    if not ctx.report.converged or ctx.report.path is None:
        return [_skipped("holder", f"solver status {ctx.report.status.value}")]
    sets = ctx.holder_sets
    if sets is None:
        x = ctx.space.points[:, 0]
        sets = [np.flatnonzero(x <= q) for q in np.quantile(x, [0.25, 0.5, 0.75])]
    return certify_holder(ctx.space, ctx.report.path, ctx.distance, sets)


def _battery_expel(ctx: CertifyContext) -> list[BoundCertificate]:
    return [certify_expel(ctx.space, ctx.theta, ctx.center, ctx.kernel.scale / 2)]


BATTERIES: dict[str, Callable[[CertifyContext], list[BoundCertificate]]] = {
    "lower-bounds": _battery_lower_bounds,
    "dirac-floor": _battery_dirac_floor,
    "phi": _battery_phi,
    "tv-upper": _battery_tv_upper,
    "crude-w2": _battery_crude_w2,
    "convolution-w2": _battery_convolution_w2,
    "disintegration": _battery_disintegration,
    "holder": _battery_holder,
    "expel": _battery_expel,
}


def available_batteries() -> list[str]:
    return list(BATTERIES) + ["all"]


def _run_one(context: CertifyContext, name: str) -> list[BoundCertificate]:

    try:
        return BATTERIES[name](context)
    except (RegimeError, SizeLimitError) as err:
        return [_skipped(name, str(err))]


def run_battery(
    context: CertifyContext, which: str = "all", threads: int = 1
) -> list[BoundCertificate]:
    """Runs the selected certificates; inapplicable ones are returned as skipped.

    The distance between the endpoints is solved once before the certificates run, which
    then share the context on at most `threads` workers. Results keep the selector order.

    Raises:
        ValueError: for an unknown selector.
    """

    if which not in available_batteries():
        raise ValueError(
            f"Unknown certificate selector '{which}', use one of {available_batteries()}"
        )
    if threads < 1:
        raise ValueError("The number of threads must be at least 1!")

    names = list(BATTERIES) if which == "all" else [which]
    if set(names) - {"expel", "convolution-w2", "phi"}:
        log.debug(f"Endpoint distance {context.distance:.6g} shared by {len(names)} certificates")

    if threads == 1:
        batches = [_run_one(context, name) for name in names]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            batches = list(executor.map(lambda name: _run_one(context, name), names))

    certificates = [cert for batch in batches for cert in batch]
    failed = [c.name for c in certificates if not c.passed]
    log.info(f"Ran {len(certificates)} certificates, {len(failed)} failed {failed}")

    return certificates
