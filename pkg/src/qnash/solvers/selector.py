"""Selector-space view of a compiled Q-Nash model.

For fixed selector bits the multiplicity bits of each player can be set to
their energy-minimizing values in closed form (see ``_kernels``). Local search
then moves one selector at a time while the multiplicity bits follow, which
lets a single move swap a player's coverage claim instead of climbing the
barrier that a lone multiplicity flip faces on the full vector.
"""

from __future__ import annotations

import numpy as np

from ..qubo import QuboModel


class SelectorSpace:
    """Membership tables of a compiled model, in the layout the kernels use."""

    def __init__(self, model: QuboModel):
        if not supports_selector_moves(model):
            raise ValueError("selector moves need a model compiled by build_qubo")
        idx = model.index
        self.model = model
        self.num_selectors = idx.num_selectors
        self.n = len(idx.actions)
        self.weight = int(model.penalty_a)
        self.nact = np.array(idx.actions, dtype=np.int64)
        members: list[list[tuple[int, int]]] = [[] for _ in range(self.num_selectors)]
        for (p, j), ks in sorted(idx.covers.items()):
            for k in ks:
                members[k].append((p, j))
        self.mem_ptr = np.zeros(self.num_selectors + 1, dtype=np.int64)
        self.mem_ptr[1:] = np.cumsum([len(m) for m in members])
        flat = [pj for m in members for pj in m]
        self.mem_q = np.array([p for p, _ in flat], dtype=np.int64)
        self.mem_a = np.array([j for _, j in flat], dtype=np.int64)

    def temperature_scale(self) -> int:
        """Largest coefficient among the selector variables alone."""
        m, v = self.model, self.num_selectors
        sel = (m.quad_i < v) & (m.quad_j < v)
        vals = np.concatenate([m.linear[:v], m.quad_v[sel]])
        return int(np.abs(vals).max())

    def coverage(self, sel: np.ndarray) -> np.ndarray:
        """``cov[q, a]`` = number of selected sets assigning action ``a`` to ``q``."""
        cov = np.zeros((self.n, max(self.nact.max(initial=1), 1)), dtype=np.int64)
        for k in np.flatnonzero(sel):
            lo, hi = self.mem_ptr[k], self.mem_ptr[k + 1]
            np.add.at(cov, (self.mem_q[lo:hi], self.mem_a[lo:hi]), 1)
        return cov

    def complete(self, sel: np.ndarray) -> np.ndarray:
        """Full binary vector: ``sel`` plus the best multiplicity bits for it."""
        sel = np.asarray(sel, dtype=np.int8)
        idx = self.model.index
        mult = idx.multiplicity_index
        x = np.zeros(self.model.num_vars, dtype=np.int8)
        x[:self.num_selectors] = sel
        cov = self.coverage(sel)
        for q in range(self.n):
            covered = sorted((a for a in range(self.nact[q]) if cov[q, a] > 0),
                             key=lambda a: (-cov[q, a], a))
            k = _claims(cov[q, covered])
            for a in covered[:k]:
                x[mult[(q, a, int(cov[q, a]))]] = 1
        return x

    def energy(self, sel: np.ndarray) -> int:
        """Minimum full-model energy over the multiplicity bits."""
        cov = self.coverage(np.asarray(sel))
        total = int(np.sum(sel))
        e = (self.n - total) ** 2
        for q in range(self.n):
            c = sorted((int(v) for v in cov[q, :self.nact[q]] if v > 0), reverse=True)
            e += _cost(c, _claims(np.array(c)))
        return self.weight * e


def _cost(c, k: int) -> int:
    return (1 - k) ** 2 + sum(v * v for v in c[k:])


def _claims(c_desc: np.ndarray) -> int:
    """Smallest number of leading coverages to claim at minimum cost."""
    c = [int(v) for v in c_desc]
    costs = [_cost(c, k) for k in range(len(c) + 1)]
    return int(np.argmin(costs))


def supports_selector_moves(model: QuboModel) -> bool:
    idx = model.index
    return (idx is not None and model.rows is not None and bool(idx.actions)
            and len(idx.bases) == idx.num_selectors > 0)
