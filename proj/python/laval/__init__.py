"""Transonic de Laval nozzle flow in the potential-stream plane."""

from ._core import (  # noqa: F401
    AdmissibilityError,
    Branch,
    ConfigError,
    ConvergenceError,
    DomainError,
    GasModel,
    analyze,
    parse_config,
    run,
    solve_subsonic,
    solve_supersonic,
)
