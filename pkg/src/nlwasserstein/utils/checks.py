"""Runs checks on the inputs to help capture some errors faster and provides better error messages.

Functions:
    | *assert_positive()* ensures that scalar parameters are strictly positive.
    | *assert_nonnegative()* ensures that arrays of densities or theta arguments are not negative.
    | *assert_in_range()* ensures that scalar parameters lie in a closed or half-open interval.
    | *assert_same_mass()* raises a MassMismatchError if two measures have different total masses.
    | *assert_same_shape()* ensures that fields live on the same set of nodes.
"""
from __future__ import annotations

from typing import Union

import numpy as np

from nlwasserstein.utils import formats
from nlwasserstein.utils.errors import MassMismatchError
from nlwasserstein.utils.types import Array, Number


def assert_positive(**kargs: Number) -> None:
    for k in kargs:
        if not kargs[k] > 0:
            raise ValueError(f"param '{k}' must be strictly positive, got {kargs[k]}!")


def assert_nonnegative(**kargs: Union[Number, Array]) -> None:
    for k in kargs:
        values = formats.numpy_array(kargs[k])
        if np.isnan(values).any() or (values < 0).any():
            raise ValueError(f"param '{k}' must only contain nonnegative values!")


def assert_in_range(low: Number, high: Number, open_high: bool = False, **kargs: Number) -> None:
    """Raises a ValueError unless every parameter lies in [low, high], or [low, high)."""

    for k, x in kargs.items():
        if np.isnan(x) or x < low or x > high or (open_high and x == high):
            bracket = ")" if open_high else "]"
            raise ValueError(f"param '{k}' must lie in [{low}, {high}{bracket}, got {x}!")


def assert_same_mass(mass_a: float, mass_b: float, rtol: float = 1e-10) -> None:
    if not np.isclose(mass_a, mass_b, rtol=rtol, atol=rtol):
        raise MassMismatchError(
            f"The two measures must have the same total mass, got {mass_a} and {mass_b}."
        )


def assert_same_shape(*arrays: np.ndarray) -> None:
    shapes = {np.shape(arr) for arr in arrays}
    if len(shapes) > 1:
        raise AssertionError(f"Fields must be defined on the same nodes, got shapes {shapes}.")
