import math
import warnings

import numpy as np
import pandas as pd
import pytest

from nlwasserstein.kernels import RadialKernel, kernel_from_dict, load_profile, zeta_mass
from nlwasserstein.utils import ConfigError, DivergenceError, KernelFamily


indicator = RadialKernel(KernelFamily.indicator, dim=1)
fractional = RadialKernel(KernelFamily.fractional, dim=1, s=0.5, c_s=1.0)


def test_indicator_profile():
    assert np.allclose(indicator.profile([0.1, 0.5, 1.0]), 1.0)
    assert indicator.profile(1.5) == 0.0
    assert indicator.profile(0.0) == 0.0


def test_eval_rejects_zero_distance():
    with pytest.raises(ValueError):
        indicator.eval(0.0)


def test_rescaled_values():
    kernel = indicator.rescale(0.2)
    assert np.isclose(kernel.eval(0.1), 5.0)
    assert kernel.eval(0.3) == 0.0
    assert np.isclose(kernel.support, 0.2)


def test_eval_pair():
    kernel = indicator.rescale(0.2)
    assert np.isclose(kernel.eval_pair([0.3], [0.4]), 5.0)
    assert kernel.eval_pair([0.3], [0.6]) == 0.0


@pytest.mark.parametrize("p, value", [(0, 2.0), (1, 1.0), (2, 2.0 / 3), (4, 2.0 / 5)])
def test_indicator_moments(p, value):
    assert np.isclose(indicator.moment(p), value, rtol=1e-10)


@pytest.mark.parametrize("eps", [0.1, 0.5, 2.0])
@pytest.mark.parametrize("p", [2, 3, 4])
def test_moment_scaling(eps, p):
    for kernel in (indicator, fractional):
        assert np.isclose(kernel.rescale(eps).moment(p), eps**p * kernel.moment(p), rtol=1e-10)


def test_fractional_moments():
    assert np.isclose(fractional.moment(2), 4.0 / 3, rtol=1e-8)
    with pytest.raises(DivergenceError):
        fractional.moment(0)


def test_integrability():
    assert indicator.is_integrable()
    assert np.isclose(indicator.kernel_integral(), 2.0)
    assert not fractional.is_integrable()
    assert math.isinf(fractional.kernel_integral())


def test_blowup_parameters():
    assert indicator.blowup_parameters() is None
    assert fractional.blowup_parameters() == (0.5, 1.0)


def test_monotone_profiles():
    assert indicator.is_monotone()
    assert RadialKernel(KernelFamily.smooth_bump, dim=2).is_monotone()
    assert fractional.is_monotone()


def test_fractional_requires_parameters():
    with pytest.raises(ValueError):
        RadialKernel(KernelFamily.fractional, dim=1)


def test_indicator_rejects_parameters():
    with pytest.raises(ValueError):
        RadialKernel(KernelFamily.indicator, dim=1, s=0.5, c_s=1.0)


def test_zeta_indicator():
    assert np.allclose(indicator.zeta([0.0, 0.5, 1.0]), [0.5, 0.375, 0.0])


def test_zeta_keeps_shape():
    assert np.shape(indicator.zeta(0.5)) == ()
    assert indicator.zeta(np.zeros((2, 3))).shape == (2, 3)
    with warnings.catch_warnings():
        warnings.simplefilter("error", DeprecationWarning)
        assert np.isclose(zeta_mass(indicator.rescale(0.2)), 0.04 * 2 / 3)


def test_custom_profile(tmp_path):
    file_path = tmp_path / "profile.csv"
    profile = pd.DataFrame({"r": [0.01, 0.5, 1.0], "value": [2.0, 1.0, 0.0]})
    profile.to_csv(file_path, index=False)
    table = load_profile(file_path)
    kernel = RadialKernel(KernelFamily.custom, dim=1, table=table)
    assert np.isclose(kernel.profile(0.75), 0.5)
    assert kernel.is_integrable()


def test_custom_profile_must_decrease():
    with pytest.raises(ValueError):
        RadialKernel(KernelFamily.custom, dim=1, table=np.array([[0.1, 1.0], [0.5, 2.0]]))


def test_kernel_from_dict():
    spec = {"family": "TruncatedFractional", "dim": 1, "scale": 0.3, "s": 0.5, "c_s": 1.0}
    kernel = kernel_from_dict(spec)
    assert kernel.family == KernelFamily.fractional
    assert kernel.scale == 0.3
    assert kernel_from_dict(kernel.to_dict()) == kernel


@pytest.mark.parametrize(
    "spec",
    [
        {"family": "Gaussian"},
        {"dim": 1},
        {"family": "Indicator", "radius": 2},
        {"family": "Indicator", "scale": -1.0},
    ],
)
def test_kernel_from_dict_invalid(spec):
    with pytest.raises(ConfigError):
        kernel_from_dict(spec)
