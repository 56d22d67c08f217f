from nlwasserstein.interpolation.theta import (
    AssumptionReport,
    Interpolation,
    check_assumptions,
    interpolation_from_spec,
    interpolation_from_table,
)


__all__ = [
    "AssumptionReport",
    "check_assumptions",
    "Interpolation",
    "interpolation_from_spec",
    "interpolation_from_table",
]
