"""Pure Nash equilibria of graphical games through a set-cover style QUBO."""

from .baselines import BaselineReport, brute_force_sets, is_pne, oracle_pne, random_search
from .bestresponse import BestResponseCollection, PointedSet, best_responses, collect_b
from .game import GraphicalGame, generate_game, load_game, payoff, save_game
from .qubo import IsingModel, QuboModel, build_qubo, decode, energy, export_qubo, import_qubo, to_ising
from .solvers import SampleSet, SolverParams, find_all_pne, SolveReport

__all__ = [
    "BaselineReport", "BestResponseCollection", "GraphicalGame", "IsingModel", "PointedSet",
    "QuboModel", "SampleSet", "SolveReport", "SolverParams", "best_responses", "brute_force_sets",
    "build_qubo", "collect_b", "decode", "energy", "export_qubo", "find_all_pne", "generate_game",
    "import_qubo", "is_pne", "load_game", "oracle_pne", "payoff", "random_search", "save_game",
    "to_ising",
]
