"""Exact transport distances between discrete measures

Functions:
    | *exact_plan()* optimal transport plan for the cost |x - y|^p by network simplex.
    | *w2()* quadratic Wasserstein distance and its optimal plan.
    | *w1()* Kantorovich-Rubinstein distance.
    | *w2_quantile()* quadratic Wasserstein distance on the line by monotone rearrangement.
    | *convolution_w2_estimates()* W₂ displacement of a measure under a smoothing kernel.
"""

from __future__ import annotations

import json
import logging
import math
import warnings

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Union

import numpy as np
import ot
import pandas as pd

from nlwasserstein.kernels.radial import RadialKernel
from nlwasserstein.kernels.smoothing import (
    SmoothingKernel,
    convolution_matrix,
    laplace_moment,
    zeta_profile,
)
from nlwasserstein.space.discrete_space import DiscreteSpace
from nlwasserstein.space.measures import Density
from nlwasserstein.utils.checks import assert_same_mass
from nlwasserstein.utils.errors import SizeLimitError
from nlwasserstein.utils.formats import jsonable
from nlwasserstein.utils.types import Array, ConvolutionMode, SmoothingKind


log = logging.getLogger(__name__)

MAX_SUPPORT = 2000
MAX_ITER = 10**7


@dataclass
class TransportPlan:
    """Sparse coupling: mass moved from node rows[k] to node cols[k]."""

    rows: np.ndarray
    cols: np.ndarray
    masses: np.ndarray
    cost: float
    p: float = 2.0

    def marginals(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Node masses of the first and second marginals."""

        return (
            np.bincount(self.rows, self.masses, minlength=n),
            np.bincount(self.cols, self.masses, minlength=n),
        )

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame({"source": self.rows, "target": self.cols, "mass": self.masses})

    def to_dict(self) -> dict[str, Any]:
        return {
            "source": self.rows,
            "target": self.cols,
            "mass": self.masses,
            "cost": self.cost,
            "p": self.p,
        }

    def to_json(self, file_path: Union[str, Path]) -> None:

        with open(file_path, "w", encoding="utf-8") as fh:
            json.dump(jsonable(self.to_dict()), fh, indent=2)


def _masses(space: DiscreteSpace, mu: Union[Density, Array]) -> np.ndarray:

    values = mu.values if isinstance(mu, Density) else np.asarray(mu, dtype=float)
    return values * space.ref_mass


def exact_plan(
    space: DiscreteSpace,
    mu: Union[Density, Array],
    nu: Union[Density, Array],
    cost: np.ndarray,
    p: float = 2.0,
) -> tuple[TransportPlan, dict[str, Any]]:
    """Solves the transportation problem between the supports of mu and nu.

    Args:
        cost (np.ndarray): n×n cost matrix on the nodes of the space.

    Returns:
        the plan and the solver log with the dual variables 'u' and 'v' on the supports
        and the support indices 'source' and 'target'.

    Raises:
        MassMismatchError: when the two measures carry different masses.
        SizeLimitError: when a support exceeds the exact linear programming scale.
    """

    a_all, b_all = _masses(space, mu), _masses(space, nu)
    mass = float(a_all.sum())
    assert_same_mass(mass, float(b_all.sum()), rtol=1e-9)
    source, target = np.flatnonzero(a_all > 0), np.flatnonzero(b_all > 0)
    if max(source.size, target.size) > MAX_SUPPORT:
        raise SizeLimitError(
            f"Supports of sizes {source.size} and {target.size} exceed {MAX_SUPPORT} nodes."
        )

    a = a_all[source] / mass
    b = b_all[target] / b_all[target].sum()
    M = np.ascontiguousarray(cost[np.ix_(source, target)], dtype=np.float64)
    G, info = ot.emd(a, b, M, numItermax=MAX_ITER, log=True)
    if info.get("warning") is not None:
        warnings.warn(f"Network simplex: {info['warning']}")

    r, c = np.nonzero(G > 0)
    plan = TransportPlan(
        rows=source[r],
        cols=target[c],
        masses=G[r, c] * mass,
        cost=float(info["cost"]) * mass,
        p=p,
    )
    info = {
        "u": np.asarray(info["u"]) * 1.0,
        "v": np.asarray(info["v"]) * 1.0,
        "source": source,
        "target": target,
        "mass": mass,
    }

    return plan, info


def w2(
    space: DiscreteSpace, mu: Union[Density, Array], nu: Union[Density, Array]
) -> tuple[float, TransportPlan]:
    """Exact W₂(μ, ν); on non-periodic lines the value is cross-checked by rearrangement."""

    dists = space.distance_matrix()
    plan, _ = exact_plan(space, mu, nu, dists**2, p=2.0)
    distance = math.sqrt(max(plan.cost, 0.0))

    if space.dim == 1 and not space.periodic:
        quantile = w2_quantile(space, mu, nu)
        if abs(quantile - distance) > 1e-8 * max(1.0, distance):
            warnings.warn(
                f"Network simplex ({distance}) and rearrangement ({quantile}) disagree."
            )

    return distance, plan


def w1(space: DiscreteSpace, mu: Union[Density, Array], nu: Union[Density, Array]) -> float:

    plan, _ = exact_plan(space, mu, nu, space.distance_matrix(), p=1.0)
    return plan.cost


def w2_quantile(
    space: DiscreteSpace, mu: Union[Density, Array], nu: Union[Density, Array]
) -> float:
    """W₂ on a non-periodic line through the monotone rearrangement of the two measures."""

    if space.dim != 1 or space.periodic:
        raise ValueError("The rearrangement formula holds on the (non periodic) line only!")

    a_all, b_all = _masses(space, mu), _masses(space, nu)
    mass = float(a_all.sum())
    assert_same_mass(mass, float(b_all.sum()), rtol=1e-9)
    source, target = np.flatnonzero(a_all > 0), np.flatnonzero(b_all > 0)
    x = space.points[:, 0]
    cost = ot.lp.emd2_1d(
        x[source],
        x[target],
        a_all[source] / mass,
        b_all[target] / b_all[target].sum(),
        metric="sqeuclidean",
    )

    return math.sqrt(max(float(cost) * mass, 0.0))


def convolution_w2_estimates(
    space: DiscreteSpace,
    mu: Union[Density, Array],
    kernel: Union[SmoothingKernel, RadialKernel],
) -> dict[str, Any]:
    """Compares W₂(μ, k∗μ) with the bound of the product coupling.

    For the Laplace kernel K_s the bound is √(M₂(K))·s; for the normalized ζ̄ kernel of a
    radial kernel at scale ε it is √(d/(d+2)·M₄(η)/M₂(η))·ε.
    """

    smoothing = zeta_profile(kernel) if isinstance(kernel, RadialKernel) else kernel
    d = smoothing.dim
    if smoothing.kind == SmoothingKind.laplace:
        bound = math.sqrt(laplace_moment(d, 2)) * smoothing.scale
    else:
        base = smoothing.base.unscaled()
        bound = math.sqrt(d / (d + 2) * base.moment(4) / base.moment(2)) * smoothing.scale

    rho = mu.values if isinstance(mu, Density) else np.asarray(mu, dtype=float)
    P = convolution_matrix(smoothing, space, ConvolutionMode.measure)
    smoothed = P @ rho
    distance, _ = w2(space, rho, smoothed)

    # product coupling: node j sends m_i P_ij ρ_j to node i
    m = space.ref_mass
    sq = space.distance_matrix() ** 2
    coupling = float(np.sqrt(np.sum(m[:, None] * P * rho[None, :] * sq)))
    log.debug(f"W2 displacement {distance:.6g}, coupling {coupling:.6g}, bound {bound:.6g}")

    return {
        "w2": distance,
        "coupling": coupling,
        "bound": bound,
        "pass": distance <= bound * (1 + 1e-9) + 1e-12,
    }
