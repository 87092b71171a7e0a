"""End-to-end search: best responses, QUBO, backend, decoding."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from ..baselines import is_pne
from ..bestresponse import BestResponseCollection, collect_b
from ..game import GraphicalGame
from ..qubo import QuboError, QuboModel, build_qubo, decode
from .annealing import solve_sa
from .decomposition import solve_decomposed
from .exact import solve_exact
from .exhaustive import EXHAUSTIVE_CAP, solve_exhaustive
from .sampleset import SampleSet, SolverParams
from .tabu import solve_tabu

BACKENDS = ("exhaustive", "sa", "tabu", "decomp")


@dataclass
class SolveReport:
    """Decoded equilibria plus per-phase timings and backend metadata."""

    pne_found: frozenset[tuple[int, ...]]
    timings: dict[str, float]
    backend: dict = field(default_factory=dict)

    def to_dict(self, include_timings: bool = True) -> dict:
        out = {"pne": [list(s) for s in sorted(self.pne_found)]}
        if include_timings:
            out["timings_ms"] = dict(self.timings)
        out["backend"] = self.backend
        return out

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.to_dict(include_timings), sort_keys=True) + "\n"


def run_backend(model: QuboModel, backend: str, params: SolverParams) -> SampleSet:
    """Dispatch to a backend by name.

    ``exhaustive`` enumerates all ``2**V`` vectors when ``V`` is within the
    enumeration cap and otherwise hands the zero-energy question to the exact
    constraint solver, so it stays complete on every model size.
    """
    if backend == "exhaustive":
        if model.num_vars <= EXHAUSTIVE_CAP:
            return solve_exhaustive(model)
        if model.rows is None:
            return solve_exact(model)
        return solve_exact(model, max_energy=0)
    if backend == "sa":
        return solve_sa(model, params)
    if backend == "tabu":
        return solve_tabu(model, params)
    if backend == "decomp":
        return solve_decomposed(model, params)
    raise QuboError(f"unknown backend {backend!r}; expected one of {', '.join(BACKENDS)}")


def _metadata(backend: str, params: SolverParams, model: QuboModel, b: BestResponseCollection,
              samples: SampleSet) -> dict:
    info = {k: v for k, v in samples.info.items() if not k.endswith("_ms") and k != "energy_trace"}
    meta = {"name": backend, "num_vars": model.num_vars, "c_b": b.c_b,
            "penalty_a": model.penalty_a, "samples": len(samples),
            "best_energy": samples.best_energy, "solver_info": info}
    if backend != "exhaustive":
        meta["params"] = params.to_dict()
    if backend == "decomp":
        meta["note"] = "block-decomposition analog of QBSolv, not a reimplementation"
    return meta


def find_all_pne(game: GraphicalGame, backend: str = "exhaustive",
                 params: SolverParams = SolverParams(), penalty_a: int = 1) -> SolveReport:
    """Run both phases and decode every zero-energy sample.

    Each decoded profile is checked again with :func:`is_pne`; heuristic
    backends may miss equilibria but never report a non-equilibrium.
    """
    if backend not in BACKENDS:
        raise QuboError(f"unknown backend {backend!r}; expected one of {', '.join(BACKENDS)}")
    t0 = time.perf_counter()
    b = collect_b(game)
    t1 = time.perf_counter()
    model = build_qubo(b, game, penalty_a)
    t2 = time.perf_counter()
    samples = run_backend(model, backend, params)
    t3 = time.perf_counter()
    found = set()
    for x, e in samples:
        if e != 0:
            break
        profile = decode(model, x, b)
        if profile is not None and is_pne(game, profile):
            found.add(profile)
    t4 = time.perf_counter()
    timings = {"best_response_ms": (t1 - t0) * 1e3, "qubo_build_ms": (t2 - t1) * 1e3,
               "solve_ms": (t3 - t2) * 1e3, "decode_ms": (t4 - t3) * 1e3,
               "total_ms": (t4 - t0) * 1e3}
    return SolveReport(frozenset(found), timings, _metadata(backend, params, model, b, samples))


def decode_all(model: QuboModel, samples: SampleSet, b: BestResponseCollection) -> list[tuple[int, ...]]:
    """Profiles of the zero-energy samples, in sample order."""
    zero = samples.samples[np.asarray(samples.energies) == 0]
    return [decode(model, x, b) for x in zero]
