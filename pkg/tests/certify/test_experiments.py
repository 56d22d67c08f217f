import math

import numpy as np
import pandas as pd
import pytest

from nlwasserstein.certify import ConvergenceTable, converge_experiment
from nlwasserstein.interpolation import Interpolation
from nlwasserstein.kernels import RadialKernel
from nlwasserstein.solver import SolveConfig
from nlwasserstein.space import gaussian_bump
from nlwasserstein.utils import KernelFamily, ResolutionError, ThetaFamily


arithmetic = Interpolation(ThetaFamily.arithmetic)
indicator = RadialKernel(KernelFamily.indicator, dim=1, scale=1.0)

bump_left = {"shape": "gaussian-bump", "center": 0.4, "width": 0.1}
bump_right = {"shape": "gaussian-bump", "center": 0.6, "width": 0.1}


def _frame(errors):
    return pd.DataFrame(
        {
            "eps": [0.4, 0.2, 0.1][: len(errors)],
            "error": errors,
            "upper_ok": [True] * len(errors),
            "lower_ok": [True] * len(errors),
        }
    )


def test_convergence_table_monotone():
    assert ConvergenceTable(_frame([0.3, 0.2, 0.1])).monotone
    assert ConvergenceTable(_frame([0.3, 0.32, 0.1])).monotone
    assert not ConvergenceTable(_frame([0.1, 0.2])).monotone


def test_convergence_table_holds():
    frame = _frame([0.3, 0.2])
    assert ConvergenceTable(frame).holds
    frame.loc[1, "lower_ok"] = False
    table = ConvergenceTable(frame)
    assert table.upper_holds and not table.lower_holds
    assert not table.holds
    assert set(table.to_dict()) == {
        "rows",
        "slope",
        "slope_se",
        "monotone",
        "upper_holds",
        "lower_holds",
    }


def test_converge_empty():
    with pytest.raises(ValueError):
        converge_experiment(arithmetic, indicator, bump_left, bump_right, [])


def test_converge_resolution():
    with pytest.raises(ResolutionError):
        converge_experiment(arithmetic, indicator, bump_left, bump_right, [0.1], spacing=0.05)


def test_converge_experiment():
    table = converge_experiment(
        arithmetic,
        indicator,
        bump_left,
        lambda space: gaussian_bump(space, 0.6, 0.1),
        [0.1, 0.2],
        config=SolveConfig(time_steps=8),
    )
    frame = table.frame
    assert frame["eps"].tolist() == [0.2, 0.1]
    assert frame["n_nodes"].tolist() == [50, 100]
    assert np.allclose(frame["w2"], 0.2, rtol=1e-2)
    assert (frame["scaled"] > 0).all()
    assert np.allclose(frame["error"], np.abs(frame["scaled"] - frame["w2"]))
    assert math.isfinite(table.slope)
    assert frame["upper_ok"].all() and frame["lower_ok"].all()
    assert table.upper_holds and table.lower_holds
    assert table.monotone
    assert table.holds
