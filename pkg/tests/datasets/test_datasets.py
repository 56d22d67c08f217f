import pytest

from nlwasserstein.cli.config import load_config
from nlwasserstein.datasets.datasets import (
    load_bumps_line,
    load_converge_bumps,
    load_disconnected,
    load_fractional_line,
    load_hj_line,
    load_nonlocalize_bump,
    load_two_point,
)


LOADERS = [
    load_two_point,
    load_disconnected,
    load_bumps_line,
    load_fractional_line,
    load_converge_bumps,
    load_hj_line,
    load_nonlocalize_bump,
]


@pytest.mark.parametrize("loader", LOADERS)
def test_loader_contents(loader):
    dataset = loader()
    assert set(dataset) == {"name", "description", "config", "path"}
    assert dataset["path"].exists()
    assert {"space", "theta", "mu0", "mu1"} <= set(dataset["config"])


@pytest.mark.parametrize("loader", LOADERS)
def test_loader_config_validates(loader):
    config = load_config(loader()["path"])
    assert config.space["kind"] in ("grid", "two-point")


def test_loading_two_point():
    two_point = load_two_point()
    assert two_point["name"] == "Two-point space"
    assert two_point["config"]["space"] == {"kind": "two-point", "w": 0.5}
    assert two_point["config"]["solver"]["time_steps"] == 256


def test_loading_converge_bumps():
    sweep = load_converge_bumps()
    assert sweep["config"]["eps_list"] == [0.4, 0.2, 0.1]
    assert sweep["path"].name == "converge_bumps.json"


def test_loading_hj_line():
    config = load_config(load_hj_line()["path"])
    assert config.hj == {"n_times": 32, "n_samples": 100}
    assert config.build_kernel().scale == 0.1
