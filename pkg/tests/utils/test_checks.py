import numpy as np
import pytest

from nlwasserstein.utils import MassMismatchError
from nlwasserstein.utils.checks import (
    assert_in_range,
    assert_nonnegative,
    assert_positive,
    assert_same_mass,
    assert_same_shape,
)


def test_assert_positive():
    assert_positive(scale=0.5, s=1)
    with pytest.raises(ValueError):
        assert_positive(scale=0.0)


def test_assert_nonnegative():
    assert_nonnegative(rho=np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        assert_nonnegative(rho=[0.0, -1e-3])
    with pytest.raises(ValueError):
        assert_nonnegative(rho=np.array([np.nan, 1.0]))


def test_assert_in_range():
    assert_in_range(0, 1, p_start=0.0, p_end=1.0)
    with pytest.raises(ValueError):
        assert_in_range(0, 1, p_start=1.5)
    with pytest.raises(ValueError):
        assert_in_range(0, 1, open_high=True, init_mixing=1.0)
    with pytest.raises(ValueError):
        assert_in_range(0, 1, init_mixing=np.nan)


def test_assert_same_mass():
    assert_same_mass(1.0, 1.0 + 1e-12)
    with pytest.raises(MassMismatchError):
        assert_same_mass(1.0, 2.0)


def test_assert_same_shape():
    assert_same_shape(np.zeros(3), np.ones(3))
    with pytest.raises(AssertionError):
        assert_same_shape(np.zeros(3), np.ones(4))
