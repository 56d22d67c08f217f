"""Radial jump kernels

The module implements the radial profiles η used to weight point pairs, their rescalings
η_ε(r) = ε^{-d} η(r/ε), the radial moments M_p(η), and the quantities used to classify the
topology induced by a kernel (integrability near the origin and algebraic blow-up).

Functions:
    | *load_profile()* reads a tabulated (r, value) profile from a CSV file.
    | *kernel_from_dict()* builds a RadialKernel from a JSON-like dictionary.
"""

from __future__ import annotations

import dataclasses
import logging
import math

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import pandas as pd

from scipy import integrate

from nlwasserstein.utils.basic_functions import radial_integral
from nlwasserstein.utils.checks import assert_positive
from nlwasserstein.utils.errors import ConfigError, DivergenceError
from nlwasserstein.utils.types import Array, KernelFamily


log = logging.getLogger(__name__)


@dataclass
class RadialKernel:
    """Radial jump kernel η_ε with profile supported in (0, support_radius] before scaling.

    Args:
        family (KernelFamily): profile family.
        dim (int): spatial dimension d.
        scale (float): kernel scale ε.
        s (Optional[float]): blow-up exponent of TruncatedFractional kernels.
        c_s (Optional[float]): blow-up constant of TruncatedFractional kernels.
        table (Optional[np.ndarray]): two columns (r, value) for Custom kernels.
    """

    family: KernelFamily
    dim: int = 1
    scale: float = 1.0
    s: Optional[float] = None
    c_s: Optional[float] = None
    table: Optional[np.ndarray] = field(default=None, repr=False)
    support_radius: float = field(default=1.0, init=False)

    def __post_init__(self) -> None:

        if isinstance(self.family, str):
            self.family = KernelFamily(self.family)
        if self.dim < 1:
            raise ValueError("The dimension must be at least 1!")
        assert_positive(scale=self.scale)

        if self.family == KernelFamily.fractional:
            if self.s is None or self.c_s is None:
                raise ValueError("TruncatedFractional kernels require 's' and 'c_s'!")
            assert_positive(s=self.s, c_s=self.c_s)
        elif self.family == KernelFamily.custom:
            if self.table is None:
                raise ValueError("Custom kernels require a tabulated profile!")
            self.table = _validate_table(np.asarray(self.table, dtype=float))
        elif self.s is not None or self.c_s is not None:
            raise ValueError("Only TruncatedFractional and Custom kernels take 's' and 'c_s'!")

    def profile(self, r: Union[float, Array]) -> np.ndarray:
        """Unscaled profile η(r), zero outside (0, 1]."""

        shape = np.shape(r)
        r = np.atleast_1d(np.asarray(r, dtype=float))
        inside = (r > 0) & (r <= self.support_radius * (1 + 1e-12))
        values = np.zeros_like(r)
        if self.family == KernelFamily.indicator:
            values[inside] = 1.0
        elif self.family == KernelFamily.smooth_bump:
            ri = r[inside]
            with np.errstate(divide="ignore", over="ignore"):
                values[inside] = np.where(ri < 1, np.exp(1.0 - 1.0 / (1.0 - ri**2)), 0.0)
        elif self.family == KernelFamily.fractional:
            values[inside] = self.c_s * r[inside] ** (-self.dim - self.s)
        else:
            r_tab, v_tab = self.table[:, 0], self.table[:, 1]
            inside &= r <= r_tab[-1] * (1 + 1e-12)
            values[inside] = np.interp(r[inside], r_tab, v_tab)

        return values.reshape(shape)

    def eval(self, r: Union[float, Array]) -> Union[float, np.ndarray]:

        r_arr = np.asarray(r, dtype=float)
        if (r_arr <= 0).any():
            raise ValueError("The kernel is only evaluated at positive distances!")
        values = self.scale ** (-self.dim) * self.profile(r_arr / self.scale)

        return float(values) if values.ndim == 0 else values

    def eval_pair(self, x: Array, y: Array) -> float:

        return float(self.eval(np.linalg.norm(np.asarray(x, float) - np.asarray(y, float))))

    def edge_weight(self, r: np.ndarray, r_min: float = 0.0) -> np.ndarray:
        """Kernel values used on a discrete space, frozen below r_min for singular profiles."""

        r = np.asarray(r, dtype=float)
        if self.family == KernelFamily.fractional and r_min > 0:
            r = np.maximum(r, r_min)

        return np.asarray(self.eval(r), dtype=float)

    @property
    def support(self) -> float:
        return self.scale * self.support_radius

    def rescale(self, scale: float) -> RadialKernel:
        return dataclasses.replace(self, scale=scale)

    def unscaled(self) -> RadialKernel:
        return self.rescale(1.0)

    def moment(self, p: float) -> float:
        """Returns M_p(η_ε) = ε^p · d α_d ∫₀¹ r^{d+p-1} η(r) dr.

        Raises:
            DivergenceError: when the integral diverges at the origin.
        """

        if p < 0:
            raise ValueError("Moments are defined for nonnegative orders only!")

        singular = self.dim + self.s if self.family == KernelFamily.fractional else None
        breaks = None if self.table is None else self.table[:, 0]
        value = radial_integral(
            self.profile,
            self.dim,
            p=p,
            upper=self.support_radius if breaks is None else float(breaks[-1]),
            singular_exponent=singular,
        )

        return self.scale**p * value

    def kernel_integral(self) -> float:
        """∫_{B(0,1)} η(|y|) dy of the unscaled profile, infinite when it diverges."""

        try:
            return self.unscaled().moment(0)
        except DivergenceError:
            log.debug("Kernel %s is not integrable near the origin", self.family.value)
            return math.inf

    def is_integrable(self) -> bool:
        return math.isfinite(self.kernel_integral())

    def blowup_parameters(self) -> Optional[tuple[float, float]]:
        """Returns (s, c_s) such that η(r) ≥ c_s r^{-d-s} near the origin, if declared."""

        if self.s is None or self.c_s is None:
            return None
        if self.family == KernelFamily.custom:
            r = np.linspace(self.table[0, 0], 0.5 * self.table[-1, 0], 101)
            if (self.profile(r) < self.c_s * r ** (-self.dim - self.s)).any():
                return None

        return self.s, self.c_s

    def is_monotone(self, n_samples: int = 1001) -> bool:

        r = np.linspace(0, self.support_radius, n_samples + 1)[1:]
        values = self.profile(r)

        return bool(np.all(np.diff(values) <= 1e-12 * np.maximum(1.0, np.abs(values[:-1]))))

    def zeta(self, r: Union[float, Array]) -> np.ndarray:
        """Unnormalized ζ(r) = ∫_r^1 t η(t) dt of the unscaled profile."""

        shape = np.shape(r)
        r = np.atleast_1d(np.asarray(r, dtype=float))
        values = np.zeros_like(r)
        inside = r < self.support_radius
        ri = np.maximum(r[inside], 0.0)
        if self.family == KernelFamily.indicator:
            values[inside] = (1.0 - ri**2) / 2
        elif self.family == KernelFamily.fractional:
            e = 2.0 - self.dim - self.s
            with np.errstate(divide="ignore"):
                if abs(e) < 1e-14:
                    values[inside] = -self.c_s * np.log(ri)
                else:
                    values[inside] = self.c_s * (1.0 - ri**e) / e
        else:
            values[inside] = [
                integrate.quad(
                    lambda t: t * float(self.profile(t)), rk, self.support_radius, limit=200
                )[0]
                for rk in ri
            ]

        return values.reshape(shape)

    def to_dict(self) -> dict[str, Any]:

        spec: dict[str, Any] = {"family": self.family.value, "dim": self.dim, "scale": self.scale}
        if self.s is not None:
            spec["s"] = self.s
            spec["c_s"] = self.c_s

        return spec


def _validate_table(table: np.ndarray) -> np.ndarray:

    if table.ndim != 2 or table.shape[1] != 2 or table.shape[0] < 2:
        raise ValueError("A tabulated profile must have two columns (r, value) and 2+ rows!")
    table = table[np.argsort(table[:, 0])]
    if table[0, 0] <= 0 or table[-1, 0] > 1:
        raise ValueError("A tabulated profile must be supported in (0, 1]!")
    if (table[:, 1] < 0).any() or (np.diff(table[:, 1]) > 0).any():
        raise ValueError("A tabulated profile must be nonnegative and nonincreasing!")

    return table


def load_profile(file_path: Union[str, Path]) -> np.ndarray:

    df = pd.read_csv(file_path)
    if not {"r", "value"}.issubset(df.columns):
        df = pd.read_csv(file_path, header=None, names=["r", "value"])

    return _validate_table(df[["r", "value"]].to_numpy(dtype=float))


def kernel_from_dict(spec: dict[str, Any], base_dir: Optional[Path] = None) -> RadialKernel:

    spec = dict(spec)
    try:
        family = KernelFamily(spec.pop("family"))
    except (KeyError, ValueError) as err:
        raise ConfigError(f"Invalid kernel family in {spec}") from err

    table = None
    if "file" in spec:
        file_path = Path(spec.pop("file"))
        if base_dir is not None and not file_path.is_absolute():
            file_path = base_dir / file_path
        table = load_profile(file_path)

    unknown = set(spec) - {"dim", "scale", "s", "c_s"}
    if unknown:
        raise ConfigError(f"Unknown kernel keys: {sorted(unknown)}")

    try:
        return RadialKernel(family=family, table=table, **spec)
    except ValueError as err:
        raise ConfigError(str(err)) from err
