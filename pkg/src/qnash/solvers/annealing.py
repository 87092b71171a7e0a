from __future__ import annotations

import time

import numpy as np

from ..qubo import QuboModel
from ._kernels import anneal, anneal_selectors, csr_couplings, zobrist_keys
from .sampleset import SampleSet, SolverParams
from .selector import SelectorSpace, supports_selector_moves


def repeat_seeds(seed: int, count: int) -> list[int]:
    """Independent per-restart seeds derived from one user seed."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count, dtype=np.uint32)]


def beta_schedule(t_initial: float, t_final: float, sweeps: int) -> np.ndarray:
    """Inverse temperatures of a geometric cooling schedule, one per sweep."""
    if sweeps == 1:
        return np.array([1.0 / t_final])
    return 1.0 / np.geomspace(t_initial, t_final, sweeps)


def solve_sa(model: QuboModel, params: SolverParams = SolverParams()) -> SampleSet:
    """Simulated annealing with ``params.num_repeats`` independent restarts.

    Each restart starts from a random vector and runs sequential single-flip
    Metropolis sweeps while the temperature falls geometrically. The result
    holds every end state plus the distinct lowest-energy states each run met.
    With selector moves the flips range over the pointed-set selectors only.
    """
    t0 = time.perf_counter()
    seeds = repeat_seeds(params.seed, params.num_repeats)
    found = []
    if params.selector_moves and supports_selector_moves(model):
        space = SelectorSpace(model)
        # the starting temperature follows the coefficients of the moved bits
        t_hi, t_lo, sweeps = params.schedule(model, space.temperature_scale())
        betas = beta_schedule(t_hi, t_lo, sweeps)
        keys = zobrist_keys(space.num_selectors)
        sel = []
        for s in seeds:
            end, best_states, _ = anneal_selectors(space.mem_ptr, space.mem_q, space.mem_a, space.nact,
                                                   space.n, space.weight, betas, s,
                                                   params.keep_per_repeat, keys)
            sel.append(end[None, :])
            sel.append(best_states)
        sel_all = np.unique(np.concatenate(sel), axis=0)
        found.append(np.array([space.complete(v) for v in sel_all], dtype=np.int8))
        moves = "selector"
    else:
        t_hi, t_lo, sweeps = params.schedule(model)
        betas = beta_schedule(t_hi, t_lo, sweeps)
        indptr, indices, data = csr_couplings(model)
        keys = zobrist_keys(model.num_vars)
        h = model.linear.astype(np.int64)
        for s in seeds:
            end, best_states, _ = anneal(h, indptr, indices, data, np.int64(model.offset), betas,
                                         s, params.keep_per_repeat, keys)
            found.append(end[None, :])
            found.append(best_states)
        moves = "single-bit"
    info = {"solver": "sa", "moves": moves, "t_initial": t_hi, "t_final": t_lo, "sweeps": sweeps,
            "num_repeats": params.num_repeats, "solve_ms": (time.perf_counter() - t0) * 1e3}
    return SampleSet.from_samples(model, np.concatenate(found), info)
