"""Interpolation functions θ

An interpolation θ: [0,∞)² → [0,∞) is a symmetric, concave and positively 1-homogeneous mean
with θ(1,1) = 1. It defines the density of an edge in the action from the densities at its two
endpoints. The module computes θ, its partial derivatives, the boundary value κ_θ = θ(1,0) and
the connectivity constant C_θ = ∫₀¹ dr/√θ(1-r,1+r), and checks the structural properties on
random samples.

All derivatives are written through the one-variable function f(x) = θ(x,1): by homogeneity,
θ(a,b) = b f(a/b), θ_a = f'(x) and θ_b = f(x) - x f'(x) with x = a/b.
"""

from __future__ import annotations

import logging
import math
import warnings

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import pandas as pd

from scipy import integrate

from nlwasserstein.utils.checks import assert_nonnegative
from nlwasserstein.utils.errors import ConfigError, DivergenceError
from nlwasserstein.utils.types import Array, ThetaCallable, ThetaFamily


log = logging.getLogger(__name__)


@dataclass
class Interpolation:
    """Interpolation function θ of a built-in family or a custom callable.

    Args:
        family (ThetaFamily): family of the mean.
        func (Optional[ThetaCallable]): vectorized θ(a, b) for Custom families.
        grad_func (Optional[ThetaCallable]): returns the pair (θ_a, θ_b) for Custom families;
            central differences are used when it is not provided.
        name (str): label used in reports.
    """

    family: ThetaFamily
    func: Optional[ThetaCallable] = field(default=None, repr=False)
    grad_func: Optional[ThetaCallable] = field(default=None, repr=False)
    name: str = ""

    def __post_init__(self) -> None:

        if isinstance(self.family, str):
            self.family = ThetaFamily(self.family)
        if self.family == ThetaFamily.custom and self.func is None:
            raise ValueError("Custom interpolations need a callable theta!")
        if self.family != ThetaFamily.custom and self.func is not None:
            raise ValueError("Only Custom interpolations take a callable!")
        if not self.name:
            self.name = self.family.value

    def __call__(self, a: Union[float, Array], b: Union[float, Array]) -> np.ndarray:
        return self.theta(a, b)

    def theta(self, a: Union[float, Array], b: Union[float, Array]) -> np.ndarray:

        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if (a < 0).any() or (b < 0).any():
            raise ValueError("Interpolations are only defined for nonnegative arguments!")

        if self.family == ThetaFamily.arithmetic:
            return (a + b) / 2
        elif self.family == ThetaFamily.geometric:
            return np.sqrt(a * b)
        elif self.family == ThetaFamily.harmonic:
            total = a + b
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(total > 0, 2 * a * b / np.where(total > 0, total, 1.0), 0.0)
        elif self.family == ThetaFamily.logarithmic:
            return _logarithmic_mean(a, b)
        else:
            return np.asarray(self.func(a, b), dtype=float)

    def theta_grad(
        self, a: Union[float, Array], b: Union[float, Array]
    ) -> tuple[np.ndarray, np.ndarray]:
        """Partial derivatives (θ_a, θ_b) at positive arguments."""

        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)

        if self.family == ThetaFamily.custom:
            if self.grad_func is not None:
                ga, gb = self.grad_func(a, b)
                return np.asarray(ga, dtype=float), np.asarray(gb, dtype=float)
            return _central_grad(self.theta, a, b)

        x = a / b
        f, df, _ = _shape_function(self.family, x, order=1)

        return df, f - x * df

    def theta_hess(
        self, a: Union[float, Array], b: Union[float, Array]
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Second partial derivatives (θ_aa, θ_ab, θ_bb) at positive arguments."""

        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)

        if self.family == ThetaFamily.custom:
            h = 1e-4 * (a + b + 1)
            lo = np.maximum(a - h, 0.0)
            ga_hi, gb_hi = self.theta_grad(a + h, b)
            ga_lo, gb_lo = self.theta_grad(lo, b)
            haa = (ga_hi - ga_lo) / (a + h - lo)
            hab = (gb_hi - gb_lo) / (a + h - lo)
            lo = np.maximum(b - h, 0.0)
            _, gb_hi = self.theta_grad(a, b + h)
            _, gb_lo = self.theta_grad(a, lo)
            hbb = (gb_hi - gb_lo) / (b + h - lo)
            return haa, hab, hbb

        x = a / b
        _, _, d2f = _shape_function(self.family, x, order=2)

        return d2f / b, -x * d2f / b, x**2 * d2f / b

    @cached_property
    def kappa(self) -> float:
        return float(self.theta(1.0, 0.0))

    @cached_property
    def c_theta(self) -> float:
        """C_θ = ∫₀¹ dr/√θ(1-r,1+r), with r = 1 - u² near the singular endpoint when κ_θ = 0.

        Raises:
            DivergenceError: when the integral does not converge.
        """

        if self.kappa > 0:

            def integrand(r: float) -> float:
                return 1.0 / math.sqrt(float(self.theta(1.0 - r, 1.0 + r)))

            bounds = (0.0, 1.0)
        else:

            def integrand(u: float) -> float:
                value = float(self.theta(u * u, 2.0 - u * u))
                if value <= 0:
                    return math.inf if u > 0 else 0.0
                return 2.0 * u / math.sqrt(value)

            bounds = (0.0, 1.0)

        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                value, _ = integrate.quad(
                    integrand, bounds[0], bounds[1], epsabs=1e-10, epsrel=1e-10, limit=500
                )
            except (integrate.IntegrationWarning, ZeroDivisionError) as err:
                raise DivergenceError(f"The constant C_theta does not converge: {err}") from err

        if not math.isfinite(value):
            raise DivergenceError("The constant C_theta is not finite!")

        return value

    def two_point_distance(self, w: float) -> float:
        """Distance between the two Diracs of the two-point space with edge weight w."""

        if w <= 0:
            raise ValueError("The edge weight must be positive!")

        return math.sqrt(2.0 / w) * self.c_theta

    def check_assumptions(self, n_samples: int = 1000, seed: int = 12345) -> AssumptionReport:
        return check_assumptions(self, n_samples=n_samples, seed=seed)

    def to_dict(self) -> dict[str, Any]:
        return {"theta": self.name if self.family == ThetaFamily.custom else self.family.value}


def _logarithmic_mean(a: np.ndarray, b: np.ndarray) -> np.ndarray:

    shape = np.broadcast(a, b).shape
    a, b = np.broadcast_arrays(np.atleast_1d(a), np.atleast_1d(b))
    out = np.zeros(a.shape, dtype=float)
    pos = (a > 0) & (b > 0)
    ap, bp = a[pos], b[pos]
    w = np.log(ap) - np.log(bp)
    small = np.abs(w) < 1e-4
    ratio = np.empty_like(w)
    ratio[small] = 1 + w[small] / 2 + w[small] ** 2 / 6 + w[small] ** 3 / 24
    ratio[~small] = np.expm1(w[~small]) / w[~small]
    out[pos] = bp * ratio

    return out.reshape(shape)


def _shape_function(
    family: ThetaFamily, x: np.ndarray, order: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns f(x) = θ(x,1), f'(x) and, when order = 2, f''(x)."""

    x = np.asarray(x, dtype=float)
    d2f = np.zeros_like(x)

    if family == ThetaFamily.arithmetic:
        f = (x + 1) / 2
        df = np.full_like(x, 0.5)
    elif family == ThetaFamily.geometric:
        f = np.sqrt(x)
        df = 0.5 / f
        if order > 1:
            d2f = -0.25 * x ** (-1.5)
    elif family == ThetaFamily.harmonic:
        f = 2 * x / (x + 1)
        df = 2 / (x + 1) ** 2
        if order > 1:
            d2f = -4 / (x + 1) ** 3
    else:
        w = np.atleast_1d(np.log(x))
        f = np.empty_like(w)
        df = np.empty_like(w)
        small = np.abs(w) < 1e-4
        ws, wl = w[small], w[~small]
        f[small] = 1 + ws / 2 + ws**2 / 6 + ws**3 / 24
        f[~small] = np.expm1(wl) / wl
        df[small] = 0.5 - ws / 6 + ws**2 / 24 - ws**3 / 120
        df[~small] = (wl - 1 + np.exp(-wl)) / wl**2
        f, df = f.reshape(x.shape), df.reshape(x.shape)
        if order > 1:
            g = np.empty_like(w)
            mid = np.abs(w) < 1e-2
            wm, wo = w[mid], w[~mid]
            g[mid] = -1 / 6 + wm / 12 - wm**2 / 40
            g[~mid] = -np.expm1(-wo) / wo**2 - 2 * (wo - 1 + np.exp(-wo)) / wo**3
            d2f = g.reshape(x.shape) / x

    return f, df, d2f


def _central_grad(
    theta: ThetaCallable, a: np.ndarray, b: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:

    h = 1e-6 * (a + b + 1)
    lo = np.maximum(a - h, 0.0)
    ga = (theta(a + h, b) - theta(lo, b)) / (a + h - lo)
    lo = np.maximum(b - h, 0.0)
    gb = (theta(a, b + h) - theta(a, lo)) / (b + h - lo)

    return ga, gb


@dataclass
class AssumptionReport:
    """Outcome of the randomized checks of the structural properties of θ."""

    name: str
    n_samples: int
    results: dict[str, bool] = field(default_factory=dict)
    counterexamples: dict[str, tuple] = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return all(self.results.values())

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "property": list(self.results),
                "pass": list(self.results.values()),
                "counterexample": [self.counterexamples.get(k) for k in self.results],
            }
        )


def check_assumptions(
    interp: Interpolation, n_samples: int = 1000, seed: int = 12345
) -> AssumptionReport:
    """Checks symmetry, normalization, positivity, monotonicity, homogeneity, C¹ regularity,
    midpoint concavity, the arithmetic-mean bound and connectedness on random samples."""

    if n_samples < 1:
        raise ValueError("At least one sample is required!")

    rng = np.random.default_rng(seed)
    a = rng.uniform(0.05, 5.0, n_samples)
    b = rng.uniform(0.05, 5.0, n_samples)
    b[: n_samples // 2] = a[: n_samples // 2]
    lam = rng.uniform(0.1, 10.0, n_samples)
    th = interp.theta(a, b)
    report = AssumptionReport(name=interp.name, n_samples=n_samples)

    def record(prop: str, failed: np.ndarray, points: tuple[np.ndarray, ...]) -> None:
        failed = np.atleast_1d(failed)
        report.results[prop] = not bool(failed.any())
        if failed.any():
            k = int(np.argmax(failed))
            report.counterexamples[prop] = tuple(float(np.atleast_1d(p)[k]) for p in points)

    scale = a + b
    record("symmetry", np.abs(th - interp.theta(b, a)) > 1e-12 * scale, (a, b))
    record("normalization", np.abs(interp.theta(1.0, 1.0) - 1.0) > 1e-12, (1.0, 1.0))
    record("positivity", th <= 0, (a, b))

    h = 1e-3 * scale
    record("monotonicity", interp.theta(a + h, b) < th - 1e-12 * scale, (a, b))
    record(
        "homogeneity",
        np.abs(interp.theta(lam * a, lam * b) - lam * th) > 1e-12 * lam * scale,
        (a, b, lam),
    )

    step = 1e-6 * scale
    forward = (interp.theta(a + step, b) - th) / step
    backward = (th - interp.theta(a - step, b)) / step
    record("regularity", np.abs(forward - backward) > 1e-3 * (1 + np.abs(forward)), (a, b))

    c = rng.uniform(0.0, 5.0, n_samples)
    d = rng.uniform(0.0, 5.0, n_samples)
    mid = interp.theta((a + c) / 2, (b + d) / 2)
    chord = (th + interp.theta(c, d)) / 2
    record("concavity", mid < chord - 1e-12 * (scale + c + d), (a, b, c, d))
    record("arithmetic_bound", th > scale / 2 + 1e-12 * scale, (a, b))

    try:
        finite = math.isfinite(interp.c_theta)
    except DivergenceError:
        finite = False
    report.results["connectedness"] = finite

    log.debug("Assumption report for %s: %s", interp.name, report.results)

    return report


def interpolation_from_table(table: np.ndarray, name: str = "table") -> Interpolation:
    """Custom interpolation from a table (x, f(x)) of f(x) = θ(x, 1) on [0, 1].

    The mean is extended by symmetry and homogeneity, θ(a, b) = max(a,b)·f(min(a,b)/max(a,b)).
    """

    table = np.asarray(table, dtype=float)
    table = table[np.argsort(table[:, 0])]
    if table[0, 0] != 0 or table[-1, 0] != 1 or not np.isclose(table[-1, 1], 1.0):
        raise ValueError("A tabulated theta needs x from 0 to 1 with f(1) = 1!")
    assert_nonnegative(table=table)

    def func(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        big = np.maximum(a, b)
        small = np.minimum(a, b)
        with np.errstate(invalid="ignore", divide="ignore"):
            x = np.where(big > 0, small / np.where(big > 0, big, 1.0), 0.0)
        return big * np.interp(x, table[:, 0], table[:, 1])

    return Interpolation(family=ThetaFamily.custom, func=func, name=name)


def interpolation_from_spec(
    spec: Union[str, dict[str, Any]], base_dir: Optional[Path] = None
) -> Interpolation:
    """Parses {"theta": "logarithmic"} style values or {"custom": "table", "file": ...}."""

    if isinstance(spec, str):
        try:
            return Interpolation(family=ThetaFamily(spec.capitalize()))
        except ValueError as err:
            raise ConfigError(f"Unknown interpolation '{spec}'") from err

    if spec.get("custom") != "table" or "file" not in spec:
        raise ConfigError(f"Invalid custom interpolation {spec}")
    file_path = Path(spec["file"])
    if base_dir is not None and not file_path.is_absolute():
        file_path = base_dir / file_path
    df = pd.read_csv(file_path)

    try:
        return interpolation_from_table(df.iloc[:, :2].to_numpy(), name=file_path.stem)
    except ValueError as err:
        raise ConfigError(str(err)) from err
