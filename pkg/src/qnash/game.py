"""Graphical game model, topology generator and JSON game files.

A graphical game stores one local payoff table per player. The table of
player ``p`` is indexed by the actions of ``p``'s neighborhood, with ``p``
itself first and the remaining neighbors in ascending order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

PAYOFF_LOW = 0
PAYOFF_HIGH = 15
TOPOLOGIES = ("tree", "circle", "road")


class GameError(ValueError):
    """Invalid game structure or generator arguments."""


class GameFormatError(GameError):
    """Malformed game file."""


class NeighborhoodSymmetryError(GameFormatError):
    """q is a neighbor of p but p is not a neighbor of q."""


class PayoffTableSizeError(GameFormatError):
    """A payoff table does not match its neighborhood's joint action count."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.int64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GraphicalGame:
    """An n-player graphical game with integer local payoff tables.

    Attributes:
        actions: number of actions of every player.
        neighborhoods: ``neighborhoods[p]`` is ``(p, q1, q2, ...)`` with the
            other neighbors ascending.
        payoffs: ``payoffs[p]`` is an integer array whose shape is
            ``tuple(actions[q] for q in neighborhoods[p])``.
    """

    actions: tuple[int, ...]
    neighborhoods: tuple[tuple[int, ...], ...]
    payoffs: tuple[np.ndarray, ...]

    def __post_init__(self):
        actions = tuple(int(a) for a in self.actions)
        neighborhoods = tuple(tuple(int(q) for q in nb) for nb in self.neighborhoods)
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "neighborhoods", neighborhoods)
        n = len(actions)
        if n < 2:
            raise GameError(f"a game needs at least 2 players, got {n}")
        if any(a < 2 for a in actions):
            raise GameError(f"every player needs at least 2 actions, got {list(actions)}")
        if len(neighborhoods) != n or len(self.payoffs) != n:
            raise GameFormatError("actions, neighborhoods and payoffs must have one entry per player")
        for p, nb in enumerate(neighborhoods):
            if not nb or nb[0] != p:
                raise GameFormatError(f"neighborhood of player {p} must start with {p}, got {list(nb)}")
            rest = nb[1:]
            if list(rest) != sorted(set(rest)) or p in rest:
                raise GameFormatError(f"neighbors of player {p} must be distinct and ascending, got {list(nb)}")
            if any(q < 0 or q >= n for q in rest):
                raise GameFormatError(f"neighborhood of player {p} names an unknown player: {list(nb)}")
        for p, nb in enumerate(neighborhoods):
            for q in nb[1:]:
                if p not in neighborhoods[q]:
                    raise NeighborhoodSymmetryError(
                        f"player {q} is a neighbor of {p} but {p} is not a neighbor of {q}"
                    )
        tables = []
        for p, (nb, table) in enumerate(zip(neighborhoods, self.payoffs)):
            shape = tuple(actions[q] for q in nb)
            arr = np.asarray(table)
            if arr.size != math.prod(shape):
                raise PayoffTableSizeError(
                    f"payoff table of player {p} has {arr.size} entries, expected {math.prod(shape)}"
                )
            if arr.dtype.kind not in "iu":
                if arr.dtype.kind == "b" or not np.all(np.equal(np.mod(arr, 1), 0)):
                    raise GameFormatError(f"payoffs of player {p} must be integers")
            tables.append(_freeze(arr.reshape(shape)))
        object.__setattr__(self, "payoffs", tuple(tables))

    @property
    def n(self) -> int:
        return len(self.actions)

    @property
    def max_degree(self) -> int:
        """Largest number of neighbors of any player, excluding the player."""
        return max(len(nb) - 1 for nb in self.neighborhoods)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(p, q) for p, nb in enumerate(self.neighborhoods) for q in nb[1:] if p < q]

    def representation_size(self) -> int:
        """Total number of payoff entries over all local tables."""
        return sum(t.size for t in self.payoffs)

    def num_profiles(self) -> int:
        return math.prod(self.actions)

    def local_profile(self, p: int, profile: Sequence[int]) -> tuple[int, ...]:
        """Restrict a global profile to the neighborhood of ``p``."""
        return tuple(int(profile[q]) for q in self.neighborhoods[p])

    def __eq__(self, other):
        if not isinstance(other, GraphicalGame):
            return NotImplemented
        return (
            self.actions == other.actions
            and self.neighborhoods == other.neighborhoods
            and all(np.array_equal(a, b) for a, b in zip(self.payoffs, other.payoffs))
        )

    def __hash__(self):
        return hash((self.actions, self.neighborhoods, tuple(t.tobytes() for t in self.payoffs)))

    def __repr__(self):
        return f"GraphicalGame(n={self.n}, actions={list(self.actions)}, edges={self.edges})"

    @classmethod
    def from_edges(
        cls,
        actions: Sequence[int],
        edges: Iterable[tuple[int, int]],
        payoffs: Sequence[np.ndarray],
    ) -> "GraphicalGame":
        """Build a game from an undirected edge list.

        ``payoffs[p]`` must already be laid out in canonical neighborhood order.
        """
        return cls(tuple(actions), neighborhoods_from_edges(len(actions), edges), tuple(payoffs))


def neighborhoods_from_edges(n: int, edges: Iterable[tuple[int, int]]) -> tuple[tuple[int, ...], ...]:
    adj: list[set[int]] = [set() for _ in range(n)]
    for p, q in edges:
        if p == q:
            continue
        adj[p].add(q)
        adj[q].add(p)
    return tuple((p, *sorted(adj[p])) for p in range(n))


def check_profile(game: GraphicalGame, profile: Sequence[int]) -> tuple[int, ...]:
    """Validate a global profile and return it as a tuple of ints."""
    if len(profile) != game.n:
        raise GameError(f"profile has {len(profile)} entries for a {game.n}-player game")
    out = tuple(int(a) for a in profile)
    for p, a in enumerate(out):
        if not 0 <= a < game.actions[p]:
            raise GameError(f"action {a} out of range for player {p} ({game.actions[p]} actions)")
    return out


def payoff(game: GraphicalGame, p: int, profile: Sequence[int]) -> int:
    """Payoff to player ``p`` under a global profile."""
    if not 0 <= p < game.n:
        raise GameError(f"unknown player {p}")
    profile = check_profile(game, profile)
    return int(game.payoffs[p][game.local_profile(p, profile)])


# -- topologies ---------------------------------------------------------------

def topology_edges(topology: str, n: int) -> list[tuple[int, int]]:
    """Undirected edges of the named dependency graph on ``n`` players.

    circle: simple cycle. tree: complete binary tree filled level by level
    (node ``i`` hangs under ``(i - 1) // 2``). road: a 2 x (n/2) grid, i.e.
    two lanes ``0..k-1`` and ``k..2k-1`` joined by rungs ``i -- i + k``.
    """
    if topology == "circle":
        if n < 3:
            raise GameError(f"circle topology needs at least 3 players (a cycle needs 3 vertices), got {n}")
        return [(i, (i + 1) % n) for i in range(n)]
    if topology == "tree":
        if n < 2:
            raise GameError(f"tree topology needs at least 2 players, got {n}")
        return [((i - 1) // 2, i) for i in range(1, n)]
    if topology == "road":
        if n < 2 or n % 2:
            raise GameError(f"road requires even n >= 2, got {n}")
        k = n // 2
        lanes = [(i, i + 1) for i in range(k - 1)] + [(k + i, k + i + 1) for i in range(k - 1)]
        rungs = [(i, i + k) for i in range(k)]
        return lanes + rungs
    raise GameError(f"unknown topology {topology!r}; expected one of {', '.join(TOPOLOGIES)}")


def generate_game(topology: str, n: int, actions_per_player: int = 3, seed: int | None = 0) -> GraphicalGame:
    """Random game on a named topology with payoffs uniform on 0..15."""
    if actions_per_player < 2:
        raise GameError(f"actions_per_player must be at least 2, got {actions_per_player}")
    edges = topology_edges(topology, n)
    actions = (int(actions_per_player),) * n
    neighborhoods = neighborhoods_from_edges(n, edges)
    rng = np.random.default_rng(seed)
    payoffs = tuple(
        rng.integers(PAYOFF_LOW, PAYOFF_HIGH + 1, size=tuple(actions[q] for q in nb), dtype=np.int64)
        for nb in neighborhoods
    )
    return GraphicalGame(actions, neighborhoods, payoffs)


# -- files -------------------------------------------------------------------

def game_to_dict(game: GraphicalGame) -> dict:
    return {
        "n": game.n,
        "actions": list(game.actions),
        "neighborhoods": [list(nb) for nb in game.neighborhoods],
        "payoffs": [[int(v) for v in t.ravel()] for t in game.payoffs],
    }


def _int_list(value, what: str) -> list[int]:
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise GameFormatError(f"{what} must be a list of integers")
    return value


def game_from_dict(data: dict) -> GraphicalGame:
    if not isinstance(data, dict):
        raise GameFormatError("game file must contain a JSON object")
    missing = {"n", "actions", "neighborhoods", "payoffs"} - set(data)
    if missing:
        raise GameFormatError(f"game file is missing keys: {sorted(missing)}")
    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise GameFormatError("'n' must be an integer")
    actions = _int_list(data["actions"], "'actions'")
    nbs = data["neighborhoods"]
    tables = data["payoffs"]
    if not isinstance(nbs, list) or not isinstance(tables, list):
        raise GameFormatError("'neighborhoods' and 'payoffs' must be lists")
    if not (len(actions) == len(nbs) == len(tables) == n):
        raise GameFormatError(f"expected {n} entries in actions, neighborhoods and payoffs")
    nbs = [_int_list(nb, f"neighborhood {p}") for p, nb in enumerate(nbs)]
    tables = [_int_list(t, f"payoff table {p}") for p, t in enumerate(tables)]
    for p, nb in enumerate(nbs):
        for q in nb:
            if not 0 <= q < n:
                raise GameFormatError(f"neighborhood of player {p} names unknown player {q}")
    return GraphicalGame(tuple(actions), tuple(tuple(nb) for nb in nbs),
                         tuple(np.asarray(t, dtype=np.int64) for t in tables))


def dumps_game(game: GraphicalGame) -> str:
    return json.dumps(game_to_dict(game)) + "\n"


def save_game(path: str | Path, game: GraphicalGame) -> None:
    Path(path).write_text(dumps_game(game), encoding="utf-8")


def load_game(path: str | Path) -> GraphicalGame:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"{path}: not valid JSON ({exc})") from exc
    return game_from_dict(data)
