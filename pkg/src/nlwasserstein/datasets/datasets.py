"""Bundled example run configurations.

Each loader returns a dictionary with the name, a description, the parsed configuration and
the path of the JSON file, which can be given to the command line with --config.
"""

from __future__ import annotations

import json

from pathlib import Path
from typing import Any


def _load_config(file_name: str, name: str, description: str) -> dict[str, Any]:

    file_path = Path(__file__).parent / "data" / file_name
    with open(file_path, "r", encoding="utf-8") as fh:
        config = json.load(fh)

    return {
        "name": name,
        "description": description,
        "config": config,
        "path": file_path,
    }


def load_two_point():
    name = "Two-point space"
    description = "Diracs on the two nodes of a unit-mass two-point space with edge weight 1/2."

    return _load_config("two_point.json", name=name, description=description)


def load_disconnected():
    name = "Disconnected regime"
    description = "Indicator kernel and logarithmic mean between two Diracs: infinite cost."

    return _load_config("disconnected.json", name=name, description=description)


def load_bumps_line():
    name = "Gaussian bumps on a line"
    description = "Two Gaussian bumps on a 64 node grid of [0, 1] with an indicator kernel."

    return _load_config("bumps_line.json", name=name, description=description)


def load_fractional_line():
    name = "Fractional kernel on a line"
    description = "Gaussian bumps with a truncated fractional kernel of order 1/2."

    return _load_config("fractional_line.json", name=name, description=description)


def load_converge_bumps():
    name = "Convergence sweep"
    description = "Kernel scales 0.4, 0.2 and 0.1 on grids of spacing eps/10."

    return _load_config("converge_bumps.json", name=name, description=description)


def load_hj_line():
    name = "Hamilton-Jacobi lower bound"
    description = "Uniform measures on two intervals of a 256 node grid, kernel scale 0.1."

    return _load_config("hj_line.json", name=name, description=description)


def load_nonlocalize_bump():
    name = "Translating bump"
    description = "Grid refinement of the nonlocalized translating Gaussian bump on a ring."

    return _load_config("nonlocalize_bump.json", name=name, description=description)
