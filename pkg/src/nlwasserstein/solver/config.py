from __future__ import annotations

import dataclasses

from dataclasses import dataclass
from typing import Any

from nlwasserstein.utils.checks import assert_in_range, assert_positive
from nlwasserstein.utils.errors import ConfigError


@dataclass
class SolveConfig:
    """Parameters of the time-discretized action minimization.

    Args:
        time_steps (int): number T of time steps. Defaults to 16.
        max_iters (int): maximum number of quasi-Newton iterations. Defaults to 50000.
        feas_tol (float): accepted residual of the discrete continuity equation.
        gap_tol (float): relative objective stagnation tolerance.
        grad_tol (float): projected gradient tolerance of the quasi-Newton iterations.
        rho_floor (float): lower bound of interior densities, relative to the uniform density
            of the same mass. Defaults to 1e-9.
        memory (int): number of stored quasi-Newton corrections.
        init_mixing (float): weight of the uniform density mixed into the linear
            interpolation used as starting point.
        continuation_decades (int): decades of the atom-sharpening continuation used to
            diagnose infinite costs.
    """

    time_steps: int = 16
    max_iters: int = 50000
    feas_tol: float = 1e-7
    gap_tol: float = 1e-7
    grad_tol: float = 1e-10
    rho_floor: float = 1e-9
    memory: int = 20
    init_mixing: float = 1e-2
    continuation_decades: int = 4

    def __post_init__(self) -> None:

        if self.time_steps < 2:
            raise ValueError("At least two time steps are required!")
        if self.continuation_decades < 2:
            raise ValueError("The continuation needs at least two decades!")
        assert_positive(
            max_iters=self.max_iters,
            feas_tol=self.feas_tol,
            gap_tol=self.gap_tol,
            grad_tol=self.grad_tol,
            rho_floor=self.rho_floor,
            memory=self.memory,
        )
        assert_in_range(0.0, 1.0, open_high=True, init_mixing=self.init_mixing)

    @classmethod
    def from_dict(cls, spec: dict[str, Any]) -> SolveConfig:

        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(spec) - names
        if unknown:
            raise ConfigError(f"Unknown solver keys: {sorted(unknown)}")
        try:
            return cls(**spec)
        except (TypeError, ValueError) as err:
            raise ConfigError(f"Invalid solver configuration: {err}") from err

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)
