"""LP/MILP solving: simplex kernels, branch and bound, file export."""

from .bnb import Solution, TooManyBinaries, bruteforce_milp, solve_lp, solve_milp
from .lpfile import LpParseError, parse_lp, write_lp
from .mpsfile import write_mps
from .simplex import BACKEND, NumericalFailure

__all__ = [
    "BACKEND",
    "LpParseError",
    "NumericalFailure",
    "Solution",
    "TooManyBinaries",
    "bruteforce_milp",
    "parse_lp",
    "solve_lp",
    "solve_milp",
    "write_lp",
    "write_mps",
]
