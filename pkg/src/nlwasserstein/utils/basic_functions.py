"""This module provides basic functions used across multiple classes and modules.

Functions:
    | *unit_ball_volume()* returns the volume α_d of the unit ball of ℝᵈ.
    | *log_factorial()* computes log(n!) through the log-gamma function.
    | *radial_integral()* integrates a radial profile against r^{d+p-1} with adaptive quadrature.
    | *pairwise_distances()* returns the matrix of Euclidean distances between two point sets.
    | *difference_quotient()* returns the largest difference quotient of a field over node pairs.
"""

from __future__ import annotations

import math
import warnings

from typing import Optional

import numpy as np

from scipy import integrate, special
from scipy.spatial.distance import cdist

from nlwasserstein.utils.errors import DivergenceError
from nlwasserstein.utils.types import ProfileCallable


def unit_ball_volume(d: int) -> float:

    if d < 1:
        raise ValueError("The dimension must be at least 1!")

    return float(math.pi ** (d / 2) / special.gamma(d / 2 + 1))


def log_factorial(n: int) -> float:

    if n < 0:
        raise ValueError("The factorial is only defined for nonnegative integers!")

    return float(special.gammaln(n + 1))


def radial_integral(
    profile: ProfileCallable,
    d: int,
    p: float = 0.0,
    lower: float = 0.0,
    upper: float = 1.0,
    singular_exponent: Optional[float] = None,
    epsabs: float = 1e-10,
    epsrel: float = 1e-10,
) -> float:
    """Computes d·α_d ∫_lower^upper r^{d+p-1} profile(r) dr.

    When the profile behaves like r^{-singular_exponent} near zero, the substitution
    r = u^{1/a} with a = d + p - singular_exponent removes the singularity at the origin.

    Args:
        profile (ProfileCallable): radial profile, vectorized or scalar.
        d (int): spatial dimension.
        p (float, optional): moment order. Defaults to 0.0.
        lower (float, optional): lower radius. Defaults to 0.0.
        upper (float, optional): upper radius. Defaults to 1.0.
        singular_exponent (Optional[float], optional): power of the blow-up at the origin.
            Defaults to None.

    Raises:
        DivergenceError: when the integral does not converge.

    Returns:
        float: the value of the radial integral.
    """

    sphere = d * unit_ball_volume(d)

    if singular_exponent is not None and lower == 0.0:
        a = d + p - singular_exponent
        if a <= 0:
            raise DivergenceError(
                f"The radial integral diverges at the origin (d + p = {d + p} <= s + d)."
            )

        def integrand(u: float) -> float:
            r = u ** (1.0 / a)
            return float(r ** (d + p - 1) * profile(r) * r / (a * u)) if u > 0 else 0.0

        bounds = (0.0, upper**a)
    else:

        def integrand(u: float) -> float:
            return float(u ** (d + p - 1) * profile(u))

        bounds = (lower, upper)

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(
                integrand, bounds[0], bounds[1], epsabs=epsabs, epsrel=epsrel, limit=500
            )
        except integrate.IntegrationWarning as err:
            raise DivergenceError(f"The radial integral did not converge: {err}") from err

    if not np.isfinite(value):
        raise DivergenceError("The radial integral is not finite!")

    return sphere * value


def pairwise_distances(x: np.ndarray, y: Optional[np.ndarray] = None) -> np.ndarray:

    x = np.asarray(x, dtype=float)
    x = x[:, None] if x.ndim == 1 else x
    if y is None:
        return cdist(x, x)
    y = np.asarray(y, dtype=float)
    y = y[:, None] if y.ndim == 1 else y

    return cdist(x, y)


def difference_quotient(
    values: np.ndarray, dists: np.ndarray, radius: Optional[float] = None
) -> float:
    """Returns max |v_i - v_j| / |x_i - x_j| over pairs at positive distance (within radius)."""

    diffs = np.abs(values[:, None] - values[None, :])
    mask = dists > 0
    if radius is not None:
        mask &= dists <= radius
    if not mask.any():
        return 0.0

    return float(np.max(diffs[mask] / dists[mask]))
