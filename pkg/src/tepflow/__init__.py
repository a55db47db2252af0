"""tepflow: joint generation and transmission expansion planning.

Networks with candidate lines are compiled into mixed-integer linear
programs under a linearized power flow, in either of two equivalent
formulations (bus angles, or cycle sums), solved with a built-in simplex
plus branch and bound, and cross-checked against each other.
"""

from .formulation import ANGLE, CYCLE, AngleFormulationUnsupported, FormulationConfig, analyze, build
from .netmodel import (
    MissingFile,
    Network,
    NetworkError,
    ParseError,
    ValidationError,
    apply_investment,
    load_network,
    save_network,
    synchronous_zones,
)
from .solver import Solution, bruteforce_milp, solve_lp, solve_milp

__version__ = "0.1.0"

__all__ = [
    "ANGLE",
    "CYCLE",
    "AngleFormulationUnsupported",
    "FormulationConfig",
    "MissingFile",
    "Network",
    "NetworkError",
    "ParseError",
    "Solution",
    "ValidationError",
    "analyze",
    "apply_investment",
    "build",
    "bruteforce_milp",
    "load_network",
    "save_network",
    "solve_lp",
    "solve_milp",
    "synchronous_zones",
    "__version__",
]
