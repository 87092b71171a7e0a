from .annealing import solve_sa
from .decomposition import solve_decomposed
from .exact import solve_exact
from .exhaustive import solve_exhaustive
from .pipeline import BACKENDS, SolveReport, find_all_pne, run_backend
from .sampleset import SampleSet, SolverParams
from .tabu import solve_tabu

__all__ = ["BACKENDS", "SampleSet", "SolveReport", "SolverParams", "find_all_pne", "run_backend",
           "solve_decomposed", "solve_exact", "solve_exhaustive", "solve_sa", "solve_tabu"]
