"""Exact minimization of QUBO models with OR-tools CP-SAT.

Compiled models are sums of weighted squared linear forms, so their energy
is zero exactly when every form is zero. That case is posed to CP-SAT as a
set of linear equalities and all solutions are enumerated. Otherwise the
minimum is found first (squares or linearized products in the objective)
and every assignment at that minimum is enumerated afterwards.
"""

from __future__ import annotations

import time

import numpy as np
from ortools.sat.python import cp_model

from ..qubo import QuboError, QuboModel
from .sampleset import SampleSet


class _Collector(cp_model.CpSolverSolutionCallback):
    def __init__(self, xs, limit: int):
        super().__init__()
        self.xs = xs
        self.limit = limit
        self.found: list[list[int]] = []
        self.overflow = False

    def on_solution_callback(self):
        self.found.append([int(self.Value(v)) for v in self.xs])
        if len(self.found) >= self.limit:
            self.overflow = True
            self.StopSearch()


def _linear(xs, vars_, coefs, const: int = 0):
    return const + sum(int(a) * xs[int(v)] for v, a in zip(vars_, coefs))


def _energy_expr(m: cp_model.CpModel, model: QuboModel, xs):
    """Expression equal to ``energy - offset``."""
    if model.rows is not None:
        expr = 0
        for r, row in enumerate(model.rows):
            lo = int(row.const + row.coefs[row.coefs < 0].sum())
            hi = int(row.const + row.coefs[row.coefs > 0].sum())
            d = m.NewIntVar(lo, hi, f"d{r}")
            m.Add(d == _linear(xs, row.vars, row.coefs, int(row.const)))
            sq = m.NewIntVar(0, max(lo * lo, hi * hi), f"s{r}")
            m.AddMultiplicationEquality(sq, [d, d])
            expr += int(row.weight) * sq
        return expr - model.offset
    expr = _linear(xs, range(model.num_vars), model.linear)
    for i, j, v in zip(model.quad_i, model.quad_j, model.quad_v):
        z = m.NewBoolVar(f"z{i}_{j}")
        m.AddBoolAnd([xs[int(i)], xs[int(j)]]).OnlyEnforceIf(z)
        m.AddBoolOr([xs[int(i)].Not(), xs[int(j)].Not()]).OnlyEnforceIf(z.Not())
        expr += int(v) * z
    return expr


def _solver(time_limit: float | None) -> cp_model.CpSolver:
    solver = cp_model.CpSolver()
    solver.parameters.num_workers = 1
    solver.parameters.random_seed = 0
    if time_limit is not None:
        solver.parameters.max_time_in_seconds = time_limit
    return solver


def _enumerate(m: cp_model.CpModel, xs, limit: int, time_limit: float | None) -> list[list[int]]:
    solver = _solver(time_limit)
    solver.parameters.enumerate_all_solutions = True
    # index order (selectors first) beats the default portfolio when enumerating
    solver.parameters.search_branching = cp_model.FIXED_SEARCH
    cb = _Collector(xs, limit)
    status = solver.Solve(m, cb)
    if cb.overflow:
        raise QuboError(f"more than {limit - 1} minimizers")
    if status not in (cp_model.OPTIMAL, cp_model.INFEASIBLE):
        raise QuboError(f"exact search did not finish: {solver.StatusName(status)}")
    return cb.found


def _fresh(num_vars: int):
    m = cp_model.CpModel()
    return m, [m.NewBoolVar(f"x{i}") for i in range(num_vars)]


def solve_exact(model: QuboModel, max_energy: int | None = None,
                max_solutions: int = 1_000_000, time_limit: float | None = None) -> SampleSet:
    """All assignments of minimum energy.

    Args:
        max_energy: restrict the search to energies at most this value; the
            lowest of them are returned, or nothing when none exists. With
            ``max_energy=0`` on a compiled model only the row equalities are
            posed, which is the fast path for ground-state enumeration.
        max_solutions: raise :class:`QuboError` beyond this many minimizers.
    """
    t0 = time.perf_counter()
    limit = max_solutions + 1
    if model.rows is not None and max_energy is not None and max_energy <= 0:
        found = []
        if max_energy == 0 and all(len(r.vars) or r.const == 0 for r in model.rows):
            m, xs = _fresh(model.num_vars)
            for row in model.rows:
                if len(row.vars):
                    m.Add(_linear(xs, row.vars, row.coefs, int(row.const)) == 0)
            found = _enumerate(m, xs, limit, time_limit)
    else:
        m, xs = _fresh(model.num_vars)
        expr = _energy_expr(m, model, xs)
        if max_energy is not None:
            m.Add(expr <= int(max_energy) - model.offset)
        m.Minimize(expr)
        solver = _solver(time_limit)
        status = solver.Solve(m)
        found = []
        if status == cp_model.OPTIMAL:
            best = int(round(solver.ObjectiveValue()))
            m2, xs2 = _fresh(model.num_vars)
            m2.Add(_energy_expr(m2, model, xs2) == best)
            found = _enumerate(m2, xs2, limit, time_limit)
        elif status != cp_model.INFEASIBLE:
            raise QuboError(f"exact search did not finish: {solver.StatusName(status)}")
    xs_arr = np.array(found, dtype=np.int8).reshape(len(found), model.num_vars)
    info = {"solver": "exact", "solve_ms": (time.perf_counter() - t0) * 1e3}
    return SampleSet.from_samples(model, xs_arr, info).lowest()
