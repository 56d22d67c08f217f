from nlwasserstein.solver.config import SolveConfig
from nlwasserstein.solver.reduced import ReducedProblem
from nlwasserstein.solver.solve import SolveReport, geodesic, restrict, solve, solve_smoothed


__all__ = [
    "geodesic",
    "ReducedProblem",
    "restrict",
    "solve",
    "solve_smoothed",
    "SolveConfig",
    "SolveReport",
]
