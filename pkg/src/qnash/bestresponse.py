"""Best-response extraction: every player's pointed sets and the collection B."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterator

import numpy as np

from .game import GameError, GraphicalGame


@dataclass(frozen=True, order=True)
class PointedSet:
    """A best-response action of ``base_player`` together with the neighbor
    actions (``context``) it responds to.

    ``context`` holds ``(player, action)`` pairs in neighborhood order.
    """

    base_player: int
    base_action: int
    context: tuple[tuple[int, int], ...]

    def members(self) -> tuple[tuple[int, int], ...]:
        """All ``(player, action)`` pairs, base point first."""
        return ((self.base_player, self.base_action), *self.context)

    def action_of(self, player: int) -> int | None:
        for q, a in self.members():
            if q == player:
                return a
        return None

    def __str__(self):
        inner = ", ".join(f"{q}:{a}" for q, a in self.members())
        return f"<{inner}>"


def best_responses(game: GraphicalGame, p: int) -> list[PointedSet]:
    """All pointed sets with base player ``p``.

    Contexts run in lexicographic order; tied maximizers are all emitted in
    ascending action order.
    """
    if not 0 <= p < game.n:
        raise GameError(f"unknown player {p}")
    table = game.payoffs[p]
    others = game.neighborhoods[p][1:]
    is_best = table == table.max(axis=0, keepdims=True)
    out = []
    for ctx in np.ndindex(*table.shape[1:]):
        context = tuple(zip(others, (int(a) for a in ctx)))
        for a in np.flatnonzero(is_best[(slice(None), *ctx)]):
            out.append(PointedSet(p, int(a), context))
    return out


@dataclass(frozen=True)
class BestResponseCollection:
    """The superset B: pointed sets of all players, player-major."""

    sets: tuple[PointedSet, ...]
    n: int

    @property
    def c_b(self) -> int:
        return len(self.sets)

    def __len__(self):
        return len(self.sets)

    def __iter__(self) -> Iterator[PointedSet]:
        return iter(self.sets)

    def __getitem__(self, k: int) -> PointedSet:
        return self.sets[k]

    @cached_property
    def by_player(self) -> tuple[tuple[int, ...], ...]:
        """Indices into ``sets`` grouped by base player."""
        groups: list[list[int]] = [[] for _ in range(self.n)]
        for k, s in enumerate(self.sets):
            groups[s.base_player].append(k)
        return tuple(tuple(g) for g in groups)

    def counts(self) -> list[int]:
        """``|BR_p|`` for every player."""
        return [len(g) for g in self.by_player]

    def covering(self) -> dict[tuple[int, int], tuple[int, ...]]:
        """Map ``(player, action)`` to the indices of the sets that assign it."""
        cover: dict[tuple[int, int], list[int]] = {}
        for k, s in enumerate(self.sets):
            for member in s.members():
                cover.setdefault(member, []).append(k)
        return {key: tuple(v) for key, v in sorted(cover.items())}


def collect_b(game: GraphicalGame) -> BestResponseCollection:
    sets = []
    for p in range(game.n):
        sets.extend(best_responses(game, p))
    return BestResponseCollection(tuple(sets), game.n)


def dump_b_jsonl(b: BestResponseCollection, path: str | Path) -> None:
    """One JSON object per pointed set: ``{"base", "action", "context"}``."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in b:
            fh.write(json.dumps({"base": s.base_player, "action": s.base_action,
                                 "context": {str(q): a for q, a in s.context}}) + "\n")


def load_b_jsonl(path: str | Path, n: int) -> BestResponseCollection:
    sets = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            ctx = tuple(sorted((int(q), int(a)) for q, a in rec["context"].items()))
            sets.append(PointedSet(int(rec["base"]), int(rec["action"]), ctx))
    return BestResponseCollection(tuple(sets), n)
