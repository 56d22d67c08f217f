"""Run configurations of the command line

A run configuration is a JSON document with the keys

    | space: {"kind": "grid", "dim", "extent", "n_per_axis", "periodic"}, {"kind": "two-point",
    |     "w"} or {"kind": "points", "file"} (CSV with coordinate columns and a "mass" column)
    | kernel: kernel specification (family, dim, scale, s, c_s, file)
    | theta: family name or {"custom": "table", "file": ...}
    | mu0, mu1: measure specifications (dirac, uniform, uniform-ball, gaussian-bump, from-csv)
    | solver: solver settings
    | eps_list, spacing: scales and grid spacing of the convergence experiment
    | which, seed, hj, nonlocalize: options of the certify, hj-lower and nonlocalize commands

Relative file names are resolved against the directory of the configuration.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import pandas as pd

from nlwasserstein.interpolation.theta import Interpolation, interpolation_from_spec
from nlwasserstein.kernels.radial import RadialKernel, kernel_from_dict
from nlwasserstein.solver.config import SolveConfig
from nlwasserstein.space.discrete_space import (
    DiscreteSpace,
    build_grid,
    from_points,
    two_point_space,
)
from nlwasserstein.space.measures import Density, measure_from_spec
from nlwasserstein.utils.errors import ConfigError
from nlwasserstein.utils.formats import write_json


log = logging.getLogger(__name__)

SPACE_KINDS = ("grid", "two-point", "points")

GRID_DEFAULTS: dict[str, Any] = {
    "kind": "grid",
    "dim": 1,
    "extent": 1.0,
    "n_per_axis": 64,
    "periodic": False,
}
HJ_DEFAULTS: dict[str, Any] = {"n_times": 32, "n_samples": 100}
NONLOCALIZE_DEFAULTS: dict[str, Any] = {
    "n_list": [64, 128, 256],
    "start": 0.2,
    "velocity": 0.4,
    "width": 0.08,
    "time_steps": 128,
}


def _merge(name: str, defaults: dict[str, Any], given: Optional[dict[str, Any]]) -> dict[str, Any]:

    given = {} if given is None else dict(given)
    unknown = set(given) - set(defaults)
    if unknown:
        raise ConfigError(f"Unknown keys in '{name}': {sorted(unknown)}")

    return {**defaults, **given}


@dataclass
class RunConfig:
    """Validated run configuration with every default filled in."""

    space: dict[str, Any]
    theta: Union[str, dict[str, Any]]
    mu0: dict[str, Any]
    mu1: dict[str, Any]
    kernel: Optional[dict[str, Any]] = None
    solver: SolveConfig = field(default_factory=SolveConfig)
    eps_list: list[float] = field(default_factory=list)
    spacing: Optional[float] = None
    which: str = "all"
    seed: int = 12345
    hj: dict[str, Any] = field(default_factory=lambda: dict(HJ_DEFAULTS))
    nonlocalize: dict[str, Any] = field(default_factory=lambda: dict(NONLOCALIZE_DEFAULTS))
    base_dir: Path = field(default=Path("."), repr=False)

    def __post_init__(self) -> None:

        kind = self.space.get("kind")
        if kind not in SPACE_KINDS:
            raise ConfigError(f"Space kind must be one of {SPACE_KINDS}, got '{kind}'")
        if kind in ("grid", "points") and self.kernel is None:
            raise ConfigError(f"A '{kind}' space needs a kernel specification")
        if kind == "grid":
            self.space = _merge("space", GRID_DEFAULTS, self.space)
            if int(self.space["n_per_axis"]) < 2 or float(self.space["extent"]) <= 0:
                raise ConfigError("Grids need n_per_axis >= 2 and a positive extent")
        elif kind == "two-point":
            self.space = _merge("space", {"kind": "two-point", "w": 0.5}, self.space)
            if float(self.space["w"]) <= 0:
                raise ConfigError("The two-point edge weight must be positive")
        else:
            self.space = _merge("space", {"kind": "points", "file": None}, self.space)
            if self.space["file"] is None:
                raise ConfigError("A 'points' space needs a CSV file")

        for name in ("mu0", "mu1"):
            if not isinstance(getattr(self, name), dict) or "shape" not in getattr(self, name):
                raise ConfigError(f"'{name}' must be a measure specification with a 'shape'")
        if any((not math.isfinite(e)) or e <= 0 for e in self.eps_list):
            raise ConfigError("Kernel scales in 'eps_list' must be positive")
        if self.spacing is not None and self.spacing <= 0:
            raise ConfigError("'spacing' must be positive")
        self.hj = _merge("hj", HJ_DEFAULTS, self.hj)
        self.nonlocalize = _merge("nonlocalize", NONLOCALIZE_DEFAULTS, self.nonlocalize)

        # fail early on invalid kernel and theta specifications
        self.build_kernel()
        self.build_theta()

    @classmethod
    def from_dict(cls, spec: dict[str, Any], base_dir: Optional[Path] = None) -> RunConfig:

        names = {f.name for f in dataclasses.fields(cls)} - {"base_dir"}
        unknown = set(spec) - names
        if unknown:
            raise ConfigError(f"Unknown configuration keys: {sorted(unknown)}")
        missing = {"space", "theta", "mu0", "mu1"} - set(spec)
        if missing:
            raise ConfigError(f"Missing configuration keys: {sorted(missing)}")

        values = dict(spec)
        values["solver"] = SolveConfig.from_dict(values.get("solver") or {})
        values["eps_list"] = [float(e) for e in values.get("eps_list", [])]
        try:
            return cls(**values, base_dir=Path(".") if base_dir is None else base_dir)
        except (TypeError, ValueError) as err:
            raise ConfigError(f"Invalid configuration: {err}") from err

    def build_kernel(self) -> Optional[RadialKernel]:
        if self.kernel is None:
            return None
        return kernel_from_dict(self.kernel, self.base_dir)

    def build_theta(self) -> Interpolation:
        return interpolation_from_spec(self.theta, self.base_dir)

    def build_space(self, kernel: Optional[RadialKernel] = None) -> DiscreteSpace:
        """The configured space, with the configured kernel unless another one is given."""

        kernel = kernel if kernel is not None else self.build_kernel()
        kind = self.space["kind"]
        try:
            if kind == "two-point":
                return two_point_space(float(self.space["w"]))
            if kind == "grid":
                return build_grid(
                    int(self.space["dim"]),
                    float(self.space["extent"]),
                    int(self.space["n_per_axis"]),
                    kernel,
                    periodic=bool(self.space["periodic"]),
                )
            file_path = Path(self.space["file"])
            if not file_path.is_absolute():
                file_path = self.base_dir / file_path
            df = pd.read_csv(file_path)
            if "mass" not in df.columns:
                raise ConfigError(f"The points file {file_path} has no 'mass' column")
            coords = df.drop(columns="mass").to_numpy(dtype=float)
            return from_points(coords, df["mass"].to_numpy(dtype=float), kernel=kernel)
        except (AssertionError, ValueError) as err:
            raise ConfigError(f"Invalid space: {err}") from err

    def build_measures(self, space: DiscreteSpace) -> tuple[Density, Density]:
        return (
            measure_from_spec(space, self.mu0, self.base_dir),
            measure_from_spec(space, self.mu1, self.base_dir),
        )

    def to_dict(self) -> dict[str, Any]:

        return {
            "space": self.space,
            "kernel": self.kernel,
            "theta": self.theta,
            "mu0": self.mu0,
            "mu1": self.mu1,
            "solver": self.solver.to_dict(),
            "eps_list": self.eps_list,
            "spacing": self.spacing,
            "which": self.which,
            "seed": self.seed,
            "hj": self.hj,
            "nonlocalize": self.nonlocalize,
        }

    def echo(self, out_dir: Union[str, Path]) -> Path:
        """Writes the resolved configuration as config.resolved.json."""

        return write_json(self.to_dict(), Path(out_dir) / "config.resolved.json")


def load_config(file_path: Union[str, Path]) -> RunConfig:
    """Reads and validates a JSON run configuration.

    Raises:
        ConfigError: when the file is missing, is not valid JSON or fails validation.
    """

    file_path = Path(file_path)
    try:
        with open(file_path, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
    except FileNotFoundError as err:
        raise ConfigError(f"Configuration file {file_path} not found") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"Configuration file {file_path} is not valid JSON: {err}") from err
    if not isinstance(spec, dict):
        raise ConfigError("The configuration must be a JSON object")
    log.debug(f"Loaded configuration {file_path}")

    return RunConfig.from_dict(spec, base_dir=file_path.parent)
