"""Smoothing (convolution) kernels

Two families of mass-normalized convolution kernels are provided: the Laplace kernel
K(x) = c_K exp(-|x|) with its rescalings K_s, and the normalized ζ̄ kernel derived from a
radial jump kernel, ζ(r) = ∫_r^∞ t η(t) dt.

Functions:
    | *laplace_normalizer()* returns c_K = 1/(α_d d (d-1)!).
    | *laplace_moment()* returns the exact moments M_N(K) = (N+d-1)!/(d-1)!.
    | *laplace_kernel()* builds the Laplace smoothing kernel at scale s.
    | *zeta_profile()* builds the normalized ζ̄ kernel of a radial kernel.
    | *zeta_mass()* integrates the unnormalized ζ kernel by quadrature.
    | *convolution_matrix()* discretizes a convolution on a discrete space.
    | *convolve()* applies a discretized convolution to a field.
    | *zeta_relative_lipschitz()* checks the two-sided bounds of ζ̄ ∗ K_δ ∗ μ.
    | *laplace_gradient_bounds()* checks derivative bounds of K_s ∗ φ on a 1D grid.
"""

from __future__ import annotations

import math
import warnings

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Optional, Union

import numpy as np

from nlwasserstein.kernels.radial import RadialKernel
from nlwasserstein.utils.basic_functions import log_factorial, radial_integral, unit_ball_volume
from nlwasserstein.utils.checks import assert_positive
from nlwasserstein.utils.types import Array, ConvolutionMode, KernelFamily, SmoothingKind


if TYPE_CHECKING:
    from nlwasserstein.space.discrete_space import DiscreteSpace


def laplace_normalizer(d: int) -> float:
    return 1.0 / (unit_ball_volume(d) * d * math.factorial(d - 1))


def laplace_moment(d: int, N: int) -> float:
    """Exact moment M_N(K) = (N+d-1)!/(d-1)! of the Laplace kernel."""

    if d < 1 or N < 0:
        raise ValueError("The Laplace moments require d >= 1 and N >= 0!")
    if N + d > 20:
        return math.exp(log_factorial(N + d - 1) - log_factorial(d - 1))

    return math.factorial(N + d - 1) / math.factorial(d - 1)


@dataclass
class SmoothingKernel:
    """Mass-normalized radial convolution kernel.

    For the Laplace kind, ``scale`` is the smoothing scale s. For the ZetaOf kind, the scale is
    the one of the underlying jump kernel ``base``.
    """

    kind: SmoothingKind
    dim: int
    scale: float
    base: Optional[RadialKernel] = None
    _zeta_mass: float = field(init=False, repr=False, default=math.nan)
    _table: Optional[tuple[np.ndarray, np.ndarray]] = field(init=False, repr=False, default=None)

    def __post_init__(self) -> None:

        assert_positive(scale=self.scale)
        if self.kind == SmoothingKind.zeta:
            if self.base is None:
                raise ValueError("A ZetaOf kernel needs the underlying radial kernel!")
            self.dim = self.base.dim
            self.scale = self.base.scale
            self._zeta_mass = zeta_mass(self.base.unscaled())
            if self.base.family in (KernelFamily.smooth_bump, KernelFamily.custom):
                r = np.linspace(0.0, self.base.support_radius, 1025)
                self._table = (r, self.base.zeta(r))

    @property
    def support(self) -> float:
        return math.inf if self.kind == SmoothingKind.laplace else self.scale

    def profile(self, r: Union[float, Array]) -> np.ndarray:
        """Unscaled normalized profile."""

        r = np.asarray(r, dtype=float)
        if self.kind == SmoothingKind.laplace:
            return laplace_normalizer(self.dim) * np.exp(-r)
        if self._table is not None:
            values = np.interp(r, self._table[0], self._table[1], right=0.0)
        else:
            values = self.base.zeta(r)

        return values / self._zeta_mass

    def eval(self, r: Union[float, Array]) -> np.ndarray:
        return self.scale ** (-self.dim) * self.profile(np.asarray(r, dtype=float) / self.scale)

    def mass(self) -> float:
        """Total integral of the kernel by radial quadrature."""

        if self.kind == SmoothingKind.laplace:
            return radial_integral(self.profile, self.dim, upper=math.inf)

        return radial_integral(
            self.profile,
            self.dim,
            upper=self.base.support_radius,
            singular_exponent=_zeta_singularity(self.base),
        )

    def moment(self, p: float) -> float:

        if self.kind == SmoothingKind.laplace:
            value = radial_integral(self.profile, self.dim, p=p, upper=math.inf)
        else:
            value = radial_integral(
                self.profile,
                self.dim,
                p=p,
                upper=self.base.support_radius,
                singular_exponent=_zeta_singularity(self.base),
            )

        return self.scale**p * value

    def to_dict(self) -> dict[str, Any]:

        spec: dict[str, Any] = {"kind": self.kind.value, "dim": self.dim, "scale": self.scale}
        if self.base is not None:
            spec["base"] = self.base.to_dict()

        return spec


def _zeta_singularity(kernel: RadialKernel) -> Optional[float]:

    if kernel.family == KernelFamily.fractional and kernel.dim + kernel.s > 2:
        return kernel.dim + kernel.s - 2

    return None


def laplace_kernel(dim: int, s: float) -> SmoothingKernel:
    return SmoothingKernel(kind=SmoothingKind.laplace, dim=dim, scale=s)


def zeta_profile(kernel: RadialKernel) -> SmoothingKernel:
    """Returns the normalized kernel ζ̄ of a radial kernel at the kernel's scale."""

    return SmoothingKernel(
        kind=SmoothingKind.zeta, dim=kernel.dim, scale=kernel.scale, base=kernel
    )


def zeta_mass(kernel: RadialKernel) -> float:
    """Unnormalized mass ∫ ζ_{η_ε}(|x|) dx, equal to ε² M₂(η)/d."""

    value = radial_integral(
        kernel.zeta,
        kernel.dim,
        upper=kernel.support_radius,
        singular_exponent=_zeta_singularity(kernel),
    )

    return kernel.scale**2 * value


def convolution_matrix(
    kernel: SmoothingKernel,
    space: DiscreteSpace,
    mode: ConvolutionMode = ConvolutionMode.measure,
) -> np.ndarray:
    """Returns the matrix P such that (k∗f)_i = Σ_j P_ij f_j on the space.

    In measure mode the columns are normalized, Σ_i m_i P_ij = m_j, so the total mass of a
    density is preserved. In function mode the rows are normalized, Σ_j P_ij = 1, so constant
    fields are preserved.
    """

    if kernel.scale < 2 * space.spacing and kernel.kind == SmoothingKind.laplace:
        warnings.warn(
            f"The smoothing scale {kernel.scale} is below two grid spacings ({space.spacing})."
        )

    dists = space.distance_matrix()
    if kernel.kind == SmoothingKind.zeta and _zeta_singularity(kernel.base) is not None:
        dists = np.maximum(dists, space.spacing / 2)
    weights = kernel.eval(dists)
    m = space.ref_mass

    if mode == ConvolutionMode.measure:
        col = (m[:, None] * weights).sum(axis=0)
        return weights / col[None, :] * m[None, :]
    else:
        row = (weights * m[None, :]).sum(axis=1)
        return weights * m[None, :] / row[:, None]


def convolve(
    kernel: SmoothingKernel,
    space: DiscreteSpace,
    values: Array,
    mode: ConvolutionMode = ConvolutionMode.measure,
) -> np.ndarray:

    matrix = convolution_matrix(kernel, space, mode)

    return matrix @ np.asarray(values, dtype=float)


def zeta_relative_lipschitz(
    space: DiscreteSpace, kernel: RadialKernel, delta: float, rho: Array
) -> dict[str, Any]:
    """Checks the two-sided bounds satisfied by ζ̄_{(η_ε)} ∗ (K_δ ∗ μ) for 0 < ε < δ.

    Pointwise, the double smoothing stays within a factor (1 + 3ε/δ) of K_δ ∗ μ, and for node
    pairs with |x - y| < ε the ratio of its values lies within
    (1 + 3ε/δ)² (1 + 3|x - y|/δ) and its inverse.
    """

    eps = kernel.scale
    if not 0 < eps < delta:
        raise ValueError("The relative Lipschitz bounds require 0 < eps < delta!")

    single = convolve(laplace_kernel(space.dim, delta), space, rho, ConvolutionMode.measure)
    double = convolve(zeta_profile(kernel), space, single, ConvolutionMode.function)

    factor = 1 + 3 * eps / delta
    pointwise_lower = np.min(double - single / factor)
    pointwise_upper = np.min(single * factor - double)

    dists = space.distance_matrix()
    close = (dists < eps) & (dists > 0)
    ratio = double[None, :] / double[:, None]
    bound = factor**2 * (1 + 3 * dists / delta)
    pair_upper = np.min((bound - ratio)[close]) if close.any() else 0.0
    pair_lower = np.min((ratio - 1 / bound)[close]) if close.any() else 0.0

    tol = 1e-12 * max(1.0, float(np.max(np.abs(double))))
    margins = {
        "pointwise_lower": float(pointwise_lower),
        "pointwise_upper": float(pointwise_upper),
        "pair_lower": float(pair_lower),
        "pair_upper": float(pair_upper),
    }

    return {**margins, "pass": all(v >= -tol for v in margins.values())}


def laplace_gradient_bounds(space: DiscreteSpace, s: float, phi: Array) -> dict[str, Any]:
    """Checks ‖∇(K_s∗φ)‖ ≤ ‖∇φ‖, ‖∇(K_s∗φ)‖ ≤ ‖φ‖/s and ‖D²(K_s∗φ)‖ ≤ ‖∇φ‖/s on a 1D grid.

    Derivatives are forward difference quotients between consecutive nodes. On bounded
    (non periodic) grids the bounds are only expected away from the boundary.
    """

    if space.dim != 1:
        raise ValueError("The gradient bounds are checked on one-dimensional grids only!")

    phi = np.asarray(phi, dtype=float)
    smoothed = convolve(laplace_kernel(1, s), space, phi, ConvolutionMode.function)
    h = space.spacing

    def grad(v: np.ndarray) -> np.ndarray:
        return (np.roll(v, -1) - v) / h if space.periodic else np.diff(v) / h

    lip_phi = float(np.max(np.abs(grad(phi))))
    lip_smooth = float(np.max(np.abs(grad(smoothed))))
    hess_smooth = float(np.max(np.abs(grad(grad(smoothed)))))
    sup_phi = float(np.max(np.abs(phi)))
    tol = 1e-9 * max(1.0, lip_phi, sup_phi / s)

    report = {
        "lip_phi": lip_phi,
        "lip_smoothed": lip_smooth,
        "hess_smoothed": hess_smooth,
        "sup_phi": sup_phi,
        "gradient_bound": lip_smooth <= lip_phi + tol,
        "sup_bound": lip_smooth <= sup_phi / s + tol,
        "hessian_bound": hess_smooth <= lip_phi / s + tol,
    }
    report["pass"] = report["gradient_bound"] and report["sup_bound"] and report["hessian_bound"]

    return report
