from nlwasserstein.space.discrete_space import (
    DiscreteSpace,
    annulus_nodes,
    ball_nodes,
    build_grid,
    from_points,
    min_pair_weight,
    set_measure,
    two_point_space,
)
from nlwasserstein.space.measures import (
    Density,
    Flux,
    Path,
    density_from_csv,
    density_to_json,
    dirac_at,
    gaussian_bump,
    measure_from_spec,
    min_measure,
    random_density,
    tv_distance,
    uniform,
    uniform_ball,
)


__all__ = [
    "annulus_nodes",
    "ball_nodes",
    "build_grid",
    "Density",
    "density_from_csv",
    "density_to_json",
    "dirac_at",
    "DiscreteSpace",
    "Flux",
    "from_points",
    "gaussian_bump",
    "measure_from_spec",
    "min_measure",
    "min_pair_weight",
    "Path",
    "random_density",
    "set_measure",
    "tv_distance",
    "two_point_space",
    "uniform",
    "uniform_ball",
]
