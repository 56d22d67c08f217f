import json

import numpy as np
import pandas as pd
import pytest

from nlwasserstein.cli.config import RunConfig, load_config
from nlwasserstein.utils import ConfigError


base = {
    "space": {"kind": "grid", "n_per_axis": 16},
    "kernel": {"family": "Indicator", "dim": 1, "scale": 0.25},
    "theta": "arithmetic",
    "mu0": {"shape": "dirac", "at": [0.2]},
    "mu1": {"shape": "dirac", "at": [0.8]},
}


def test_grid_defaults():
    config = RunConfig.from_dict(base)
    assert config.space == {
        "kind": "grid",
        "dim": 1,
        "extent": 1.0,
        "n_per_axis": 16,
        "periodic": False,
    }
    assert config.solver.time_steps == 16
    assert config.which == "all"
    assert config.hj["n_times"] == 32
    assert config.build_space().n == 16


def test_build_measures():
    config = RunConfig.from_dict(base)
    space = config.build_space()
    mu0, mu1 = config.build_measures(space)
    assert mu0.support.tolist() == [space.nearest_node([0.2])]
    assert np.isclose(mu1.total_mass, 1.0)


def test_unknown_keys():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**base, "colour": "blue"})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**base, "space": {"kind": "grid", "size": 3}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**base, "solver": {"speed": 1}})


def test_missing_keys():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({k: v for k, v in base.items() if k != "mu1"})


def test_invalid_values():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**base, "space": {"kind": "torus"}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({k: v for k, v in base.items() if k != "kernel"})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**base, "eps_list": [0.1, -0.2]})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**base, "space": {"kind": "two-point", "w": 0.0}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**base, "mu0": {"center": [0.2]}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({**base, "theta": "quadratic"})


def test_two_point_space():
    config = RunConfig.from_dict({**base, "space": {"kind": "two-point"}})
    space = config.build_space()
    assert space.n == 2
    assert np.isclose(space.weights[0], 0.5)


def test_points_space(tmp_path):
    pd.DataFrame({"x": [0.0, 0.1, 0.2, 0.3], "mass": [0.25] * 4}).to_csv(
        tmp_path / "points.csv", index=False
    )
    spec = {
        **base,
        "space": {"kind": "points", "file": "points.csv"},
        "mu0": {"shape": "dirac", "node": 0},
        "mu1": {"shape": "dirac", "node": 3},
    }
    with open(tmp_path / "run.json", "w") as fh:
        json.dump(spec, fh)

    config = load_config(tmp_path / "run.json")
    space = config.build_space()
    assert space.n == 4
    assert np.allclose(space.ref_mass, 0.25)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    (tmp_path / "broken.json").write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "broken.json")
    (tmp_path / "list.json").write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "list.json")


def test_echo(tmp_path):
    config = RunConfig.from_dict(base)
    config.echo(tmp_path)
    with open(tmp_path / "config.resolved.json", "r") as fh:
        echoed = json.load(fh)
    assert echoed["space"]["n_per_axis"] == 16
    assert echoed["solver"]["time_steps"] == 16
    assert RunConfig.from_dict(echoed).to_dict() == config.to_dict()
