"""Block decomposition driver in the spirit of QBSolv.

The driver keeps one current assignment. Each pass ranks variables by the
magnitude of the energy change a single flip would cause (largest first,
ties by index) and walks that ranking in blocks of ``subproblem_size``
variables. For every block the other variables are clamped, the induced
sub-QUBO is handed to the inner backend, and its best answer replaces the
block when the total energy does not go up. The run ends after
``decomposition_stall`` passes without a new best energy.

Like QBSolv, each pass can open with a single-start tabu search over the
whole model from the current assignment (``tabu_phase``). Its best state is
accepted under the same no-increase rule, so the energy trace stays monotone.
"""

from __future__ import annotations

import time
from dataclasses import replace
from typing import Callable

import numpy as np

from ..qubo import QuboError, QuboModel
from .annealing import solve_sa
from .exhaustive import EXHAUSTIVE_CAP, solve_exhaustive
from .sampleset import SampleSet, SolverParams
from .tabu import solve_tabu

Inner = Callable[[QuboModel], SampleSet]

_INNER_CAPS = {"exhaustive": EXHAUSTIVE_CAP}


def _inner_backend(inner: str | Inner, params: SolverParams) -> tuple[Inner, str]:
    if callable(inner):
        return inner, getattr(inner, "__name__", "custom")
    if inner == "exhaustive":
        return solve_exhaustive, inner
    plain = SolverParams(num_repeats=1, seed=params.seed, selector_moves=False)
    if inner == "sa":
        return (lambda m: solve_sa(m, plain)), inner
    if inner == "tabu":
        return (lambda m: solve_tabu(m, plain)), inner
    raise QuboError(f"unknown inner backend {inner!r}")


def flip_deltas(model: QuboModel, x: np.ndarray) -> np.ndarray:
    """Energy change of flipping each variable of ``x`` on its own."""
    x = np.asarray(x, dtype=np.int64)
    f = model.linear.astype(np.int64).copy()
    np.add.at(f, model.quad_i, model.quad_v * x[model.quad_j])
    np.add.at(f, model.quad_j, model.quad_v * x[model.quad_i])
    return np.where(x == 0, f, -f)


def clamp(model: QuboModel, x: np.ndarray, block: np.ndarray) -> QuboModel:
    """Sub-QUBO over ``block`` with every other variable fixed to ``x``.

    Its energy at ``y`` equals the full energy of ``x`` with ``x[block] = y``.
    """
    x = np.asarray(x, dtype=np.int64)
    block = np.asarray(block, dtype=np.int64)
    pos = np.full(model.num_vars, -1, dtype=np.int64)
    pos[block] = np.arange(block.size)
    inside_i = pos[model.quad_i] >= 0
    inside_j = pos[model.quad_j] >= 0

    rest = x.copy()
    rest[block] = 0
    both = inside_i & inside_j
    outer = ~inside_i & ~inside_j
    offset = (model.offset + int(model.linear @ rest)
              + int(np.dot(model.quad_v[outer], rest[model.quad_i[outer]] * rest[model.quad_j[outer]])))

    linear = model.linear[block].astype(np.int64).copy()
    only_i = inside_i & ~inside_j
    only_j = inside_j & ~inside_i
    np.add.at(linear, pos[model.quad_i[only_i]], model.quad_v[only_i] * x[model.quad_j[only_i]])
    np.add.at(linear, pos[model.quad_j[only_j]], model.quad_v[only_j] * x[model.quad_i[only_j]])

    a, b = pos[model.quad_i[both]], pos[model.quad_j[both]]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    coeffs = {(i, i): int(v) for i, v in enumerate(linear)}
    for i, j, v in zip(lo, hi, model.quad_v[both]):
        coeffs[(int(i), int(j))] = coeffs.get((int(i), int(j)), 0) + int(v)
    return QuboModel.from_coefficients(block.size, coeffs, offset)


def solve_decomposed(model: QuboModel, params: SolverParams = SolverParams(),
                     inner: str | Inner = "exhaustive",
                     initial: np.ndarray | None = None, tabu_phase: bool = True) -> SampleSet:
    """Improve one assignment block by block until it stops getting better.

    Args:
        inner: ``"exhaustive"``, ``"sa"``, ``"tabu"`` or a callable taking a
            sub-QUBO and returning a :class:`SampleSet`.
        initial: start vector; a seeded random vector by default.
        tabu_phase: open every pass with a full-model tabu search.

    Raises:
        QuboError: ``subproblem_size`` exceeds the inner backend's cap.
    """
    t0 = time.perf_counter()
    solve_block, inner_name = _inner_backend(inner, params)
    size = min(params.subproblem_size, model.num_vars)
    cap = _INNER_CAPS.get(inner_name)
    if cap is not None and params.subproblem_size > cap and model.num_vars > cap:
        raise QuboError(f"subproblem_size {params.subproblem_size} exceeds the {inner_name} cap of {cap}")

    if initial is None:
        x = np.random.default_rng(params.seed).integers(0, 2, size=model.num_vars).astype(np.int8)
    else:
        x = np.asarray(initial, dtype=np.int8).copy()
    e = model.energy(x)
    best = e
    kept = [x.copy()]
    trace = [e]
    passes = stall = subproblems = 0
    tabu_params = replace(params, num_repeats=1)

    while stall < params.decomposition_stall and model.num_vars:
        passes += 1
        improved = False
        if tabu_phase:
            result = solve_tabu(model, replace(tabu_params, seed=params.seed + passes), initial=x)
            if result.best_energy <= e:
                x, e = result.samples[0].copy(), result.best_energy
                trace.append(e)
                if e < best:
                    best, kept, improved = e, [], True
                if e == best:
                    kept.append(x.copy())
        deltas = flip_deltas(model, x)
        order = np.lexsort((np.arange(model.num_vars), -np.abs(deltas)))
        for start in range(0, model.num_vars, size):
            block = np.sort(order[start:start + size])
            sub = clamp(model, x, block)
            result = solve_block(sub)
            subproblems += 1
            if not len(result):
                continue
            y, sub_e = result.samples[0], int(result.energies[0])
            if sub_e <= e:
                x[block] = y
                e = sub_e
                trace.append(e)
                if e < best:
                    best, kept, improved = e, [], True
                if e == best:
                    kept.append(x.copy())
        stall = 0 if improved else stall + 1
        if size >= model.num_vars:
            break

    info = {"solver": "decomp", "inner": inner_name, "subproblem_size": size, "passes": passes,
            "subproblems": subproblems, "tabu_phase": tabu_phase, "energy_trace": trace,
            "solve_ms": (time.perf_counter() - t0) * 1e3}
    return SampleSet.from_samples(model, np.array(kept + [x]), info)
