"""Compilation of the best-response collection into a penalty QUBO.

The Hamiltonian is a weighted sum of squared integer linear forms over the
binary variables::

    H = A * sum_p (1 - sum_{j,m} y[p,j,m])**2
      + A * sum_{p,j} (sum_m m * y[p,j,m] - sum_{k covers (p,j)} x[k])**2
      + A * (n - sum_k x[k])**2

``x[k]`` selects pointed set ``k``; ``y[p,j,m]`` claims that action ``j`` of
player ``p`` is covered by exactly ``m`` selected sets. ``H == 0`` exactly when
the selected sets form one pure Nash equilibrium.

Each square is kept as a :class:`PenaltyRow` next to the expanded upper
triangular coefficients, so exact solvers can reason about the constraints
directly. All arithmetic is integer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .bestresponse import BestResponseCollection
from .game import GraphicalGame


class QuboError(ValueError):
    pass


class CompilerInvariantError(AssertionError):
    """A zero-energy vector that does not decode to a consistent profile."""


@dataclass(frozen=True)
class PenaltyRow:
    """``weight * (const + sum(coefs * x[vars]))**2``."""

    const: int
    vars: np.ndarray
    coefs: np.ndarray
    weight: int = 1

    def value(self, x: np.ndarray) -> int:
        return int(self.const + int(np.dot(self.coefs, x[self.vars])))


@dataclass(frozen=True)
class VariableIndex:
    """Layout of the binary vector.

    Selectors come first (index ``k`` is pointed set ``k``), followed by the
    multiplicity variables ordered by player, action, multiplicity.
    """

    num_selectors: int
    multiplicity_keys: tuple[tuple[int, int, int], ...]
    bounds: dict[tuple[int, int], int]
    covers: dict[tuple[int, int], tuple[int, ...]] = field(default_factory=dict)
    actions: tuple[int, ...] = ()
    bases: tuple[int, ...] = ()

    @cached_property
    def multiplicity_index(self) -> dict[tuple[int, int, int], int]:
        return {key: self.num_selectors + i for i, key in enumerate(self.multiplicity_keys)}

    @property
    def total_vars(self) -> int:
        return self.num_selectors + len(self.multiplicity_keys)

    def selector(self, k: int) -> int:
        if not 0 <= k < self.num_selectors:
            raise IndexError(k)
        return k

    def multiplicity(self, p: int, j: int, m: int) -> int:
        return self.multiplicity_index[(p, j, m)]

    def bound(self, p: int, j: int) -> int:
        return self.bounds.get((p, j), 0)

    def describe(self, i: int) -> str:
        if i < self.num_selectors:
            return f"x[{i}]"
        p, j, m = self.multiplicity_keys[i - self.num_selectors]
        return f"y[{p},{j},{m}]"


@dataclass(frozen=True, eq=False)
class QuboModel:
    """Integer QUBO ``offset + sum_i linear[i] x_i + sum_{i<j} Q_ij x_i x_j``.

    ``rows`` (when the model was compiled rather than read from a file) holds
    the penalty rows whose weighted squares sum to the same energy.
    """

    num_vars: int
    linear: np.ndarray
    quad_i: np.ndarray
    quad_j: np.ndarray
    quad_v: np.ndarray
    offset: int = 0
    penalty_a: int = 1
    index: VariableIndex | None = None
    rows: tuple[PenaltyRow, ...] | None = None
    game: GraphicalGame | None = field(default=None, repr=False)

    def __post_init__(self):
        for name in ("linear", "quad_i", "quad_j", "quad_v"):
            arr = np.array(getattr(self, name), dtype=np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "offset", int(self.offset))
        if self.linear.shape != (self.num_vars,):
            raise QuboError("linear coefficients must have one entry per variable")
        if not (self.quad_i.shape == self.quad_j.shape == self.quad_v.shape):
            raise QuboError("quadratic index/value arrays differ in length")
        if self.quad_i.size and (np.any(self.quad_i >= self.quad_j) or self.quad_j.max() >= self.num_vars
                                 or self.quad_i.min() < 0):
            raise QuboError("quadratic entries must satisfy 0 <= i < j < num_vars")

    @classmethod
    def from_coefficients(cls, num_vars: int, coefficients: dict[tuple[int, int], int],
                          offset: int = 0, **kwargs) -> "QuboModel":
        """Build from a ``{(i, j): value}`` map; ``(j, i)`` entries fold onto ``(i, j)``."""
        linear = np.zeros(num_vars, dtype=np.int64)
        quad: dict[tuple[int, int], int] = {}
        for (i, j), v in coefficients.items():
            i, j = int(i), int(j)
            if not (0 <= i < num_vars and 0 <= j < num_vars):
                raise QuboError(f"coefficient ({i}, {j}) outside {num_vars} variables")
            if i == j:
                linear[i] += int(v)
            else:
                key = (min(i, j), max(i, j))
                quad[key] = quad.get(key, 0) + int(v)
        keys = sorted(k for k, v in quad.items() if v != 0)
        return cls(num_vars, linear,
                   np.array([k[0] for k in keys], dtype=np.int64),
                   np.array([k[1] for k in keys], dtype=np.int64),
                   np.array([quad[k] for k in keys], dtype=np.int64),
                   offset, **kwargs)

    @classmethod
    def from_rows(cls, num_vars: int, rows: Sequence[PenaltyRow], **kwargs) -> "QuboModel":
        """Expand weighted squared linear forms into QUBO coefficients."""
        linear = np.zeros(num_vars, dtype=np.int64)
        offset = 0
        keys, vals = [], []
        for row in rows:
            w, c, v, a = int(row.weight), int(row.const), row.vars, row.coefs
            offset += w * c * c
            # x_i**2 == x_i folds the squared coefficient onto the diagonal
            np.add.at(linear, v, w * (a * a + 2 * c * a))
            if len(v) > 1:
                iu, ju = np.triu_indices(len(v), k=1)
                vi, vj = v[iu], v[ju]
                lo, hi = np.minimum(vi, vj), np.maximum(vi, vj)
                keys.append(lo * num_vars + hi)
                vals.append(2 * w * a[iu] * a[ju])
        if keys:
            allk = np.concatenate(keys)
            allv = np.concatenate(vals)
            uk, inv = np.unique(allk, return_inverse=True)
            summed = np.zeros(uk.size, dtype=np.int64)
            np.add.at(summed, inv, allv)
            keep = summed != 0
            uk, summed = uk[keep], summed[keep]
            qi, qj = uk // num_vars, uk % num_vars
        else:
            qi = qj = summed = np.zeros(0, dtype=np.int64)
        return cls(num_vars, linear, qi, qj, summed, offset, rows=tuple(rows), **kwargs)

    @property
    def coefficients(self) -> dict[tuple[int, int], int]:
        """Upper-triangular map ``(i, j) -> Q_ij`` with ``i <= j``; zeros omitted."""
        out = {(i, i): int(v) for i, v in enumerate(self.linear) if v}
        out.update({(int(i), int(j)): int(v) for i, j, v in zip(self.quad_i, self.quad_j, self.quad_v)})
        return dict(sorted(out.items()))

    def upper_matrix(self) -> np.ndarray:
        q = np.zeros((self.num_vars, self.num_vars), dtype=np.int64)
        q[np.arange(self.num_vars), np.arange(self.num_vars)] = self.linear
        q[self.quad_i, self.quad_j] = self.quad_v
        return q

    def symmetric_matrix(self) -> np.ndarray:
        """Full symmetric matrix with zero diagonal; couplings appear on both sides."""
        q = np.zeros((self.num_vars, self.num_vars), dtype=np.int64)
        q[self.quad_i, self.quad_j] = self.quad_v
        q[self.quad_j, self.quad_i] = self.quad_v
        return q

    def max_abs_coefficient(self) -> int:
        vals = np.concatenate([self.linear, self.quad_v])
        return int(np.abs(vals).max()) if vals.size else 0

    def energy(self, x: Sequence[int]) -> int:
        return energy(self, x)

    def energies(self, xs: np.ndarray) -> np.ndarray:
        return energies(self, xs)


def _as_binary(model: QuboModel, x) -> np.ndarray:
    x = np.asarray(x)
    if x.shape[-1:] != (model.num_vars,):
        raise QuboError(f"vector length {x.shape[-1] if x.ndim else 0} != num_vars {model.num_vars}")
    if x.size and not np.all((x == 0) | (x == 1)):
        raise QuboError("vector entries must be 0 or 1")
    return x.astype(np.int64)


def energy(model: QuboModel, x: Sequence[int]) -> int:
    """Exact integer energy of one binary vector, offset included."""
    x = _as_binary(model, x)
    return int(model.offset + int(model.linear @ x)
               + int(np.dot(model.quad_v, x[model.quad_i] * x[model.quad_j])))


def energies(model: QuboModel, xs: np.ndarray) -> np.ndarray:
    """Energies of the rows of a ``(samples, num_vars)`` binary array."""
    xs = _as_binary(model, np.atleast_2d(xs))
    out = np.empty(len(xs), dtype=np.int64)
    # bound the (rows x couplings) temporary to a few million entries
    step = max(1, 4_000_000 // max(model.quad_v.size, 1))
    for lo in range(0, len(xs), step):
        chunk = xs[lo:lo + step]
        out[lo:lo + step] = (model.offset + chunk @ model.linear
                             + (chunk[:, model.quad_i] * chunk[:, model.quad_j]) @ model.quad_v)
    return out


def row_energy(model: QuboModel, x: Sequence[int]) -> int:
    """Energy summed over the penalty rows (needs a compiled model)."""
    if model.rows is None:
        raise QuboError("model has no penalty rows")
    x = _as_binary(model, x)
    return sum(r.weight * r.value(x) ** 2 for r in model.rows)


# -- compilation ---------------------------------------------------------------

def build_qubo(b: BestResponseCollection, game: GraphicalGame, penalty_a: int = 1,
               truncate: bool = True) -> QuboModel:
    """Compile ``b`` into the Q-Nash penalty QUBO.

    With ``truncate`` the multiplicity of ``(p, j)`` runs up to the number of
    sets covering it, and uncovered pairs get no variables. Without it every
    pair gets multiplicities ``1..C_B``.
    """
    if int(penalty_a) != penalty_a or penalty_a < 1:
        raise QuboError(f"penalty_a must be a positive integer, got {penalty_a}")
    if b.n != game.n:
        raise QuboError(f"collection is for {b.n} players, game has {game.n}")
    penalty_a = int(penalty_a)
    n, c_b = game.n, b.c_b
    cover = b.covering()
    for (p, j) in cover:
        if not (0 <= p < n and 0 <= j < game.actions[p]):
            raise QuboError(f"pointed set assigns unknown action {j} to player {p}")

    if truncate:
        bounds = {key: len(ks) for key, ks in cover.items()}
    else:
        bounds = {(p, j): c_b for p in range(n) for j in range(game.actions[p]) if c_b}
    keys = tuple((p, j, m) for (p, j), bnd in sorted(bounds.items()) for m in range(1, bnd + 1))
    index = VariableIndex(c_b, keys, bounds, cover, game.actions,
                          tuple(s.base_player for s in b.sets))
    mult = index.multiplicity_index

    rows = []
    for p in range(n):
        ys = [mult[k] for k in keys if k[0] == p]
        rows.append(PenaltyRow(1, np.array(ys, dtype=np.int64), -np.ones(len(ys), dtype=np.int64), penalty_a))
    for p in range(n):
        for j in range(game.actions[p]):
            ys = [(mult[(p, j, m)], m) for m in range(1, bounds.get((p, j), 0) + 1)]
            xs = cover.get((p, j), ())
            if not ys and not xs:
                continue
            vars_ = [v for v, _ in ys] + list(xs)
            coefs = [m for _, m in ys] + [-1] * len(xs)
            rows.append(PenaltyRow(0, np.array(vars_, dtype=np.int64), np.array(coefs, dtype=np.int64), penalty_a))
    rows.append(PenaltyRow(n, np.arange(c_b, dtype=np.int64), -np.ones(c_b, dtype=np.int64), penalty_a))

    return QuboModel.from_rows(index.total_vars, rows, penalty_a=penalty_a, index=index, game=game)


def selected_sets(model: QuboModel, x: Sequence[int]) -> list[int]:
    if model.index is None:
        raise QuboError("model has no variable index")
    x = _as_binary(model, x)
    return [int(k) for k in np.flatnonzero(x[:model.index.num_selectors])]


def decode(model: QuboModel, x: Sequence[int], b: BestResponseCollection) -> tuple[int, ...] | None:
    """Global profile encoded by a zero-energy vector, else ``None``.

    Raises:
        CompilerInvariantError: the vector has energy 0 but its selected sets
            do not form one pure Nash equilibrium.
    """
    from .baselines import is_pne

    if energy(model, x) != 0:
        return None
    ks = selected_sets(model, x)
    chosen = [b[k] for k in ks]
    bases = sorted(s.base_player for s in chosen)
    if bases != list(range(b.n)):
        raise CompilerInvariantError(f"zero-energy vector selects base players {bases}")
    profile: dict[int, int] = {}
    for s in chosen:
        for q, a in s.members():
            if profile.setdefault(q, a) != a:
                raise CompilerInvariantError(f"selected sets disagree on player {q}")
    out = tuple(profile[p] for p in range(b.n))
    if model.game is not None and not is_pne(model.game, out):
        raise CompilerInvariantError(f"decoded profile {out} is not a pure Nash equilibrium")
    return out


# -- Ising form ----------------------------------------------------------------

@dataclass(frozen=True)
class IsingModel:
    """``offset + sum_i h_i s_i + sum_{i<j} J_ij s_i s_j`` over spins in {-1, +1}."""

    h: tuple[Fraction, ...]
    j: dict[tuple[int, int], Fraction]
    offset: Fraction

    def energy(self, spins: Sequence[int]) -> Fraction:
        s = [int(v) for v in spins]
        if len(s) != len(self.h) or any(v not in (-1, 1) for v in s):
            raise QuboError("spins must be a +-1 vector with one entry per variable")
        e = self.offset + sum(hi * si for hi, si in zip(self.h, s))
        return e + sum(jv * s[a] * s[b] for (a, b), jv in self.j.items())


def to_ising(model: QuboModel) -> IsingModel:
    """Rewrite the model in spins via ``x = (s + 1) / 2``."""
    h = [Fraction(int(v), 2) for v in model.linear]
    offset = Fraction(model.offset) + sum(h, Fraction(0))
    j: dict[tuple[int, int], Fraction] = {}
    for a, b, v in zip(model.quad_i, model.quad_j, model.quad_v):
        q = Fraction(int(v), 4)
        j[(int(a), int(b))] = q
        h[a] += q
        h[b] += q
        offset += q
    return IsingModel(tuple(h), j, offset)


def from_ising(ising: IsingModel) -> tuple[dict[tuple[int, int], Fraction], Fraction]:
    """Inverse map ``s = 2x - 1``; returns rational QUBO coefficients and offset."""
    coeffs: dict[tuple[int, int], Fraction] = {}
    offset = ising.offset - sum(ising.h, Fraction(0))
    for i, hi in enumerate(ising.h):
        coeffs[(i, i)] = 2 * hi
    for (a, b), jv in ising.j.items():
        coeffs[(a, b)] = coeffs.get((a, b), Fraction(0)) + 4 * jv
        coeffs[(a, a)] -= 2 * jv
        coeffs[(b, b)] -= 2 * jv
        offset += jv
    return coeffs, offset


# -- text formats -------------------------------------------------------------

def dumps_qubo(model: QuboModel, fmt: str = "coo") -> str:
    coeffs = model.coefficients
    lines = []
    if fmt == "coo":
        lines.append(f"vars {model.num_vars} offset {model.offset}")
        lines.extend(f"{i} {j} {v}" for (i, j), v in coeffs.items())
    elif fmt == "qbsolv":
        diag = [(i, v) for (i, j), v in coeffs.items() if i == j]
        off = [((i, j), v) for (i, j), v in coeffs.items() if i != j]
        lines.append(f"c offset {model.offset}")
        lines.append(f"p qubo 0 {model.num_vars} {len(diag)} {len(off)}")
        lines.extend(f"{i} {i} {v}" for i, v in diag)
        lines.extend(f"{i} {j} {v}" for (i, j), v in off)
    else:
        raise QuboError(f"unknown QUBO format {fmt!r}; expected 'coo' or 'qbsolv'")
    return "\n".join(lines) + "\n"


def export_qubo(model: QuboModel, fmt: str, path: str | Path) -> None:
    Path(path).write_text(dumps_qubo(model, fmt), encoding="utf-8")


def loads_qubo(text: str) -> QuboModel:
    """Parse either text format (detected from the header)."""
    num_vars = None
    offset = 0
    coeffs: dict[tuple[int, int], int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if m := re.fullmatch(r"vars\s+(\d+)\s+offset\s+(-?\d+)", line):
            num_vars, offset = int(m.group(1)), int(m.group(2))
        elif m := re.fullmatch(r"c\s+offset\s+(-?\d+)", line):
            offset = int(m.group(1))
        elif line.startswith("c"):
            continue
        elif m := re.fullmatch(r"p\s+qubo\s+\S+\s+(\d+)\s+(\d+)\s+(\d+)", line):
            num_vars = int(m.group(1))
        elif m := re.fullmatch(r"(\d+)\s+(\d+)\s+(-?\d+)", line):
            if num_vars is None:
                raise QuboError(f"line {lineno}: coefficient before header")
            key = (int(m.group(1)), int(m.group(2)))
            coeffs[key] = coeffs.get(key, 0) + int(m.group(3))
        else:
            raise QuboError(f"line {lineno}: cannot parse {raw!r}")
    if num_vars is None:
        raise QuboError("missing header line")
    return QuboModel.from_coefficients(num_vars, coeffs, offset)


def import_qubo(path: str | Path) -> QuboModel:
    return loads_qubo(Path(path).read_text(encoding="utf-8"))
