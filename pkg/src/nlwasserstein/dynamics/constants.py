"""Assembled constants of the upper and lower bound estimates

All constants follow the action normalization of :mod:`nlwasserstein.dynamics.action`: a
two-set step between sets of measures |A| ≤ |B| joined by edges of weight at least η_min has
length at most √2·C_θ/√(|A|·η_min), and moving a Dirac onto the uniform measure of a ball B
costs a length of at most 2/√(κ_θ·|B|·η_min).

Functions:
    | *c_d_s()* expel constant of dyadic annuli chains for kernels with algebraic blow-up.
    | *c_d_theta()* slope constant of ball chains with spacing ε/6.
    | *c_d_theta_eta()* additive constant of Dirac chains (two expels and one rounding step).
    | *c_d_theta_s()* constant of the power branch of Φ.
    | *phi_bound()* the continuous nondecreasing Dirac-to-Dirac bound Φ(t).
    | *tv_upper_constant()*, *crude_w2_constants()*, *nonlocal_upper_envelope()*,
    | *hj_constant()*, *hj_error_term()* constants of the remaining estimates.
"""

from __future__ import annotations

import math

from typing import Union

import numpy as np

from nlwasserstein.interpolation.theta import Interpolation
from nlwasserstein.kernels.radial import RadialKernel
from nlwasserstein.utils.basic_functions import unit_ball_volume
from nlwasserstein.utils.errors import RegimeError
from nlwasserstein.utils.types import Array


CHAIN_SPACING = 1.0 / 6.0
PHI_THRESHOLD = 3.0 / 8.0
PHI_RATIO = 5.0 / 6.0  # ball radius over |x - y| in the power branch


def _profile(kernel: RadialKernel, r: float) -> float:
    return float(kernel.unscaled().profile(r))


def c_tilde_d_s(d: int, s: float, c_s: float) -> float:
    return math.sqrt(unit_ball_volume(d) * c_s * 1.5 ** (-d - s))


def c_d_s(d: int, s: float, c_s: float) -> float:
    """C_{d,s} such that W(δ_x, uniform on B(x,δ)) ≤ (C_θ/C_{d,s})·(δ/ε)^{s/2}.

    The annuli series is summed with the ratio 2^{-s/2}, so its sum is 1/(1 - 2^{-s/2}).
    """

    series = 1.0 / ((1.0 - 2.0 ** (-s / 2)) * math.sqrt(1.0 - 2.0 ** (-d)))
    return c_tilde_d_s(d, s, c_s) * 2.0 ** (-d / 2) / (math.sqrt(2.0) * (series + 1.0))


def annuli_expel_bound(theta: Interpolation, kernel: RadialKernel, ratio: float) -> float:
    """Continuum length bound (C_θ/C_{d,s})·(δ/ε)^{s/2} for δ/ε = ratio."""

    params = kernel.blowup_parameters()
    if params is None:
        raise RegimeError("The annuli construction needs a kernel with algebraic blow-up.")
    s, c_s = params

    return theta.c_theta / c_d_s(kernel.dim, s, c_s) * ratio ** (s / 2)


def boundary_expel_bound(theta: Interpolation, kernel: RadialKernel, ratio: float) -> float:
    """Continuum length bound 2/√(κ_θ α_d (δ/ε)^d η(δ/ε)) for δ/ε = ratio."""

    if theta.kappa <= 0:
        raise RegimeError("The boundary expel construction needs theta(1, 0) > 0.")
    d = kernel.dim
    value = _profile(kernel, ratio)
    if value <= 0:
        return math.inf

    return 2.0 / math.sqrt(theta.kappa * unit_ball_volume(d) * ratio**d * value)


def c_d_theta(d: int, theta: Interpolation) -> float:
    return 6.0 * math.sqrt(2.0) * theta.c_theta / (
        math.sqrt(unit_ball_volume(d)) * CHAIN_SPACING ** (d / 2)
    )


def c_d_theta_eta(theta: Interpolation, kernel: RadialKernel) -> float:
    """Additive constant of the Dirac chain bound (C_{d,θ}/√η(½))·|x - y|/ε + C_{d,θ,η}.

    Raises:
        RegimeError: when θ(1, 0) = 0 and the kernel has no algebraic blow-up.
    """

    d = kernel.dim
    rounding = CHAIN_SPACING * c_d_theta(d, theta) / math.sqrt(_profile(kernel, 0.5))
    if theta.kappa > 0:
        return rounding + 2 * boundary_expel_bound(theta, kernel, CHAIN_SPACING)
    if kernel.blowup_parameters() is not None:
        return rounding + 2 * annuli_expel_bound(theta, kernel, CHAIN_SPACING)

    raise RegimeError(
        "Diracs are at infinite distance when theta(1, 0) = 0 and the kernel is integrable."
    )


def dirac_chain_bound(theta: Interpolation, kernel: RadialKernel, t: float) -> float:
    """Continuum length bound of the Dirac chain between points at distance t·ε."""

    if t == 0:
        return 0.0
    slope = c_d_theta(kernel.dim, theta) / math.sqrt(_profile(kernel, 0.5))

    return slope * t + c_d_theta_eta(theta, kernel)


def c_d_theta_s(theta: Interpolation, kernel: RadialKernel) -> float:
    """Constant of W(δ_x, δ_y) ≤ C_{d,θ,s}·t^{s/2} for t = |x - y|/ε below 3/8.

    The curve expels x onto the ball of radius (5/6)|x - y|, moves that ball onto the
    congruent ball around y with one two-set step and absorbs it at y.
    """

    params = kernel.blowup_parameters()
    if params is None:
        raise RegimeError("The power branch of Phi needs a kernel with algebraic blow-up.")
    s, c_s = params
    d = kernel.dim
    lam = PHI_RATIO
    expel = 2 * theta.c_theta / c_d_s(d, s, c_s) * lam ** (s / 2)
    middle = (
        math.sqrt(2.0)
        * theta.c_theta
        * (2 * lam + 1) ** ((d + s) / 2)
        / math.sqrt(unit_ball_volume(d) * c_s * lam**d)
    )

    return expel + middle


def phi_bound(
    theta: Interpolation, kernel: RadialKernel, t: Union[float, Array]
) -> Union[float, np.ndarray]:
    """Φ(t): power branch C·t^{s/2} below 3/8 and the Dirac chain slope beyond.

    The power constant is raised, when needed, so that Φ(3/8) dominates the chain bound at
    3/8; the linear branch then dominates the chain bound everywhere and Φ is continuous.
    """

    s = kernel.blowup_parameters()[0] if kernel.blowup_parameters() else None
    if s is None:
        raise RegimeError("Phi is defined for kernels with algebraic blow-up.")
    slope = c_d_theta(kernel.dim, theta) / math.sqrt(_profile(kernel, 0.5))
    at_threshold = slope * PHI_THRESHOLD + c_d_theta_eta(theta, kernel)
    power = max(c_d_theta_s(theta, kernel), at_threshold / PHI_THRESHOLD ** (s / 2))

    t_arr = np.asarray(t, dtype=float)
    values = np.where(
        t_arr < PHI_THRESHOLD,
        power * np.maximum(t_arr, 0.0) ** (s / 2),
        power * PHI_THRESHOLD ** (s / 2) + slope * (t_arr - PHI_THRESHOLD),
    )

    return float(values) if values.ndim == 0 else values


def tv_upper_constant(theta: Interpolation, kernel: RadialKernel, diameter: float) -> float:
    """C of W² ≤ C·TV on a set of the given diameter, for the kernel at scale ε."""

    eps = kernel.scale
    eta_half = _profile(kernel, 0.5)

    return 2 * c_d_theta(kernel.dim, theta) ** 2 * diameter**2 / (
        eps**2 * eta_half
    ) + 4 * c_d_theta_eta(theta, kernel) ** 2


def crude_w2_constants(theta: Interpolation, kernel: RadialKernel) -> tuple[float, float]:
    """(a, b) such that W² ≤ a·W₂²/ε² + b."""

    eta_half = _profile(kernel, 0.5)
    a = 2 * c_d_theta(kernel.dim, theta) ** 2 / eta_half
    b = 2 * c_d_theta_eta(theta, kernel) ** 2

    return a, b


def nonlocal_upper_envelope(theta: Interpolation, kernel: RadialKernel, w2: float) -> float:
    """Upper envelope of ε√(M₂/2d)·W_{η,ε} in terms of W₂, at the scale ε of the kernel."""

    d = kernel.dim
    eps = kernel.scale
    base = kernel.unscaled()
    m2 = base.moment(2)
    m4 = base.moment(4)
    eta_half = _profile(kernel, 0.5)
    slope = 2 * math.sqrt(2.0) * c_d_theta(d, theta) / math.sqrt(eta_half)
    smoothing = math.sqrt(d * d + d) * math.sqrt(eps) + math.sqrt(d * m4 / ((d + 2) * m2)) * eps
    tail = 2 * math.sqrt(2.0) * c_d_theta_eta(theta, kernel) * eps

    return (1 + math.sqrt(eps)) ** 2 * w2 + math.sqrt(m2 / (2 * d)) * (slope * smoothing + tail)


def hj_constant(kernel: RadialKernel) -> float:
    """C = d²/M₂² [3/8 M₃ + √((M₂/d + 3/2 M₃)(M₄ + 3/2 M₅)) + ¼(M₄ + 3/2 M₅)]."""

    d = kernel.dim
    base = kernel.unscaled()
    m2, m3, m4, m5 = (base.moment(p) for p in (2, 3, 4, 5))
    upper = m4 + 1.5 * m5

    return d**2 / m2**2 * (0.375 * m3 + math.sqrt((m2 / d + 1.5 * m3) * upper) + 0.25 * upper)


def hj_error_term(d: int, radius: float, eps: float) -> float:
    """(7/4 dR² + 8dR)·√ε."""

    return (1.75 * d * radius**2 + 8 * d * radius) * math.sqrt(eps)


def nonlocalization_action_factor(kernel: RadialKernel, s: float) -> float:
    """2d/(ε²M₂)·(1 + 3ε/s)⁴ bounding the nonlocalized action of a Laplace-smoothed curve."""

    d = kernel.dim
    eps = kernel.scale

    return 2 * d / (eps**2 * kernel.unscaled().moment(2)) * (1 + 3 * eps / s) ** 4
