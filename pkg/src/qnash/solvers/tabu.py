from __future__ import annotations

import time

import numpy as np

from ..qubo import QuboModel
from ._kernels import csr_couplings, tabu, tabu_selectors, zobrist_keys
from .annealing import repeat_seeds
from .sampleset import SampleSet, SolverParams
from .selector import SelectorSpace, supports_selector_moves


def solve_tabu(model: QuboModel, params: SolverParams = SolverParams(),
               initial: np.ndarray | None = None) -> SampleSet:
    """Multistart tabu search.

    Every start is a random vector (or ``initial`` for the first start) and
    ends after ``stall_limit`` moves with no new best energy. With selector
    moves the derived defaults are tenure 10 and 50 stall moves per selector:
    a tenure that grows with the model freezes most of the smaller move space.
    """
    t0 = time.perf_counter()
    tenure, stall = params.tabu(model)
    seeds = repeat_seeds(params.seed, params.num_repeats)
    found = []
    if params.selector_moves and supports_selector_moves(model):
        space = SelectorSpace(model)
        nsel = space.num_selectors
        if params.tabu_tenure is None:
            tenure = 10
        if params.stall_limit is None:
            stall = 50 * nsel
        tenure = min(tenure, nsel - 1)
        keys = zobrist_keys(nsel)
        sel = []
        for r, s in enumerate(seeds):
            if r == 0 and initial is not None:
                x0 = np.asarray(initial, dtype=np.int8)[:nsel].copy()
            else:
                x0 = np.random.default_rng(s).integers(0, 2, size=nsel).astype(np.int8)
            end, best_states, _ = tabu_selectors(space.mem_ptr, space.mem_q, space.mem_a, space.nact,
                                                 space.n, x0, tenure, stall, s,
                                                 params.keep_per_repeat, keys)
            sel.append(end[None, :])
            sel.append(best_states)
        sel_all = np.unique(np.concatenate(sel), axis=0)
        found.append(np.array([space.complete(v) for v in sel_all], dtype=np.int8))
        moves = "selector"
    else:
        indptr, indices, data = csr_couplings(model)
        keys = zobrist_keys(model.num_vars)
        h = model.linear.astype(np.int64)
        for r, s in enumerate(seeds):
            if r == 0 and initial is not None:
                x0 = np.asarray(initial, dtype=np.int8).copy()
            else:
                x0 = np.random.default_rng(s).integers(0, 2, size=model.num_vars).astype(np.int8)
            end, best_states, _ = tabu(h, indptr, indices, data, np.int64(model.offset), x0,
                                       tenure, stall, s, params.keep_per_repeat, keys)
            found.append(end[None, :])
            found.append(best_states)
        moves = "single-bit"
    info = {"solver": "tabu", "moves": moves, "tenure": tenure, "stall_limit": stall,
            "num_repeats": params.num_repeats, "solve_ms": (time.perf_counter() - t0) * 1e3}
    return SampleSet.from_samples(model, np.concatenate(found), info)
