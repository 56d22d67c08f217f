from nlwasserstein.datasets.datasets import (
    load_bumps_line,
    load_converge_bumps,
    load_disconnected,
    load_fractional_line,
    load_hj_line,
    load_nonlocalize_bump,
    load_two_point,
)


__all__ = [
    "load_bumps_line",
    "load_converge_bumps",
    "load_disconnected",
    "load_fractional_line",
    "load_hj_line",
    "load_nonlocalize_bump",
    "load_two_point",
]
