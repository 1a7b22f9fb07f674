from .program import ConeProgram, NONNEG, RSOC, SOC, ZERO
from .solver import (CachedSolver, ConeSolution, INFEASIBLE, MAX_ITER,
                     NUMERICAL, OPTIMAL, UNBOUNDED, solve)

__all__ = [
    "ConeProgram", "ZERO", "NONNEG", "SOC", "RSOC",
    "CachedSolver", "ConeSolution", "solve",
    "OPTIMAL", "INFEASIBLE", "UNBOUNDED", "MAX_ITER", "NUMERICAL",
]
