from .refit import power_refit, waterfill
from .subproblem import (
    SubproblemSolution,
    SubproblemSpec,
    check_solution,
    perspective_rate,
    solve_p4,
)

__all__ = [
    "SubproblemSolution",
    "SubproblemSpec",
    "check_solution",
    "perspective_rate",
    "power_refit",
    "solve_p4",
    "waterfill",
]
