"""Reference algorithms: the PNE oracle, brute force over pointed-set
combinations, and random search."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bestresponse import BestResponseCollection, collect_b
from .game import GameError, GraphicalGame, check_profile

ORACLE_CAP = 3 ** 10
BRUTE_FORCE_CAP = 10 ** 7


class CapExceeded(RuntimeError):
    """The requested enumeration is larger than the configured cap."""


@dataclass
class BaselineReport:
    pne_found: frozenset[tuple[int, ...]]
    elapsed_ms: float
    combinations_examined: int = 0
    method: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self, include_timings: bool = True) -> dict:
        out = {"pne": [list(s) for s in sorted(self.pne_found)],
               "method": self.method,
               "combinations_examined": self.combinations_examined,
               **self.extra}
        if include_timings:
            out["elapsed_ms"] = self.elapsed_ms
        return out


def is_pne(game: GraphicalGame, profile: Sequence[int]) -> bool:
    """True iff no player gains by deviating alone from ``profile``."""
    s = check_profile(game, profile)
    for p in range(game.n):
        local = game.local_profile(p, s)
        column = game.payoffs[p][(slice(None), *local[1:])]
        if column[local[0]] < column.max():
            return False
    return True


def all_profiles(actions: Sequence[int]) -> np.ndarray:
    """Every global profile, one per row, in lexicographic order."""
    grids = np.indices(tuple(actions)).reshape(len(actions), -1)
    return grids.T.astype(np.int64)


def oracle_pne(game: GraphicalGame, cap: int | None = ORACLE_CAP) -> BaselineReport:
    """Exact PNE set by checking every global profile."""
    total = game.num_profiles()
    if cap is not None and total > cap:
        raise CapExceeded(f"{total} profiles exceed the oracle cap of {cap}")
    t0 = time.perf_counter()
    found = set()
    chunk = 1 << 16
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        prof = np.stack(np.unravel_index(idx, game.actions), axis=1)
        ok = np.ones(len(idx), dtype=bool)
        for p, nb in enumerate(game.neighborhoods):
            table = game.payoffs[p]
            got = table[tuple(prof[:, q] for q in nb)]
            best = table.max(axis=0)[tuple(prof[:, q] for q in nb[1:])]
            ok &= got >= best
        found.update(tuple(int(a) for a in row) for row in prof[ok])
    return BaselineReport(frozenset(found), (time.perf_counter() - t0) * 1e3, total, "oracle")


class _SetTable:
    """Pointed sets of each player as (member players, member actions)."""

    def __init__(self, game: GraphicalGame, b: BestResponseCollection):
        self.players = [game.neighborhoods[p] for p in range(game.n)]
        self.actions = []
        for p, ks in enumerate(b.by_player):
            rows = [[a for _, a in b[k].members()] for k in ks]
            self.actions.append(np.array(rows, dtype=np.int64).reshape(len(ks), len(self.players[p])))


def brute_force_sets(game: GraphicalGame, b: BestResponseCollection | None = None,
                     prune: bool = True, cap: int | None = BRUTE_FORCE_CAP) -> BaselineReport:
    """Try combinations of one pointed set per player.

    With ``prune`` a partial combination is dropped as soon as two of its sets
    disagree on some player's action; ``combinations_examined`` then counts
    the full combinations not ruled out that way, and ``extra["pruned"]`` the
    ones that were, so the two always add up to ``prod_p |BR_p|``. ``cap``
    bounds the number of search nodes (pruned) or combinations (unpruned).
    """
    t0 = time.perf_counter()
    if b is None:
        b = collect_b(game)
    counts = b.counts()
    product = math.prod(counts)
    table = _SetTable(game, b)
    n = game.n
    found = set()

    if not prune:
        if cap is not None and product > cap:
            raise CapExceeded(f"{product} combinations exceed the brute force cap of {cap}")
        for combo in itertools.product(*(range(c) for c in counts)):
            prof = [-1] * n
            ok = True
            for p, i in enumerate(combo):
                for q, a in zip(table.players[p], table.actions[p][i]):
                    if prof[q] < 0:
                        prof[q] = int(a)
                    elif prof[q] != a:
                        ok = False
                        break
                if not ok:
                    break
            if ok and is_pne(game, prof):
                found.add(tuple(prof))
        return BaselineReport(frozenset(found), (time.perf_counter() - t0) * 1e3, product,
                              "brute_force", {"pruned": 0, "nodes": product})

    suffix = [1] * (n + 1)
    for p in range(n - 1, -1, -1):
        suffix[p] = suffix[p + 1] * counts[p]
    prof = [-1] * n
    stats = {"pruned": 0, "nodes": 0}
    players = [list(nb) for nb in table.players]
    acts = [t.tolist() for t in table.actions]

    def descend(p: int) -> None:
        if p == n:
            s = tuple(prof)
            if is_pne(game, s):
                found.add(s)
            return
        for row in acts[p]:
            stats["nodes"] += 1
            if cap is not None and stats["nodes"] > cap:
                raise CapExceeded(f"brute force visited more than {cap} nodes")
            fresh = []
            ok = True
            for q, a in zip(players[p], row):
                cur = prof[q]
                if cur < 0:
                    prof[q] = a
                    fresh.append(q)
                elif cur != a:
                    ok = False
                    break
            if ok:
                descend(p + 1)
            else:
                stats["pruned"] += suffix[p + 1]
            for q in fresh:
                prof[q] = -1

    descend(0)
    return BaselineReport(frozenset(found), (time.perf_counter() - t0) * 1e3, product - stats["pruned"],
                          "brute_force", stats)


def random_search(game: GraphicalGame, timeout: float, seed: int | None = 0,
                  b: BestResponseCollection | None = None, batch: int = 256,
                  max_samples: int | None = None) -> BaselineReport:
    """Sample one pointed set per player uniformly until ``timeout`` seconds pass.

    The sample stream depends only on ``seed``; the timeout (checked between
    batches) and ``max_samples`` only decide where it is cut off.
    """
    if timeout < 0:
        raise GameError("timeout must be non-negative")
    t0 = time.perf_counter()
    if b is None:
        b = collect_b(game)
    table = _SetTable(game, b)
    rng = np.random.default_rng(seed)
    counts = np.array(b.counts())
    found = set()
    drawn = 0
    while time.perf_counter() - t0 < timeout:
        if max_samples is not None and drawn >= max_samples:
            break
        size = batch if max_samples is None else min(batch, max_samples - drawn)
        picks = rng.integers(0, counts, size=(size, game.n))
        drawn += size
        base = np.stack([table.actions[p][picks[:, p], 0] for p in range(game.n)], axis=1)
        ok = np.ones(size, dtype=bool)
        for p in range(game.n):
            members = table.actions[p][picks[:, p]]
            for i, q in enumerate(table.players[p][1:], 1):
                ok &= members[:, i] == base[:, q]
        for row in base[ok]:
            s = tuple(int(a) for a in row)
            if is_pne(game, s):
                found.add(s)
    return BaselineReport(frozenset(found), (time.perf_counter() - t0) * 1e3, drawn, "random_search")
