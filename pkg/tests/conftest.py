import numpy as np
import pytest
from hypothesis import strategies as st

from qnash.game import GraphicalGame, generate_game

# player A's table from the three-player worked example: rows are A's actions,
# columns the contexts B0C0, B0C1, B1C0, B1C1, B2C0, B2C1
TABLE1_A = [[4, 1, 2, 2, 1, 4],
            [1, 3, 2, 1, 2, 2]]


def table1_game() -> GraphicalGame:
    """A (2 actions) adjacent to B (3) and C (2); B and C are indifferent."""
    a = np.array(TABLE1_A).reshape(2, 3, 2)
    return GraphicalGame((2, 3, 2), ((0, 1, 2), (1, 0), (2, 0)),
                         (a, np.zeros((3, 2), dtype=int), np.zeros((2, 2), dtype=int)))


def two_player(m0, m1) -> GraphicalGame:
    """Bimatrix game; ``m0[a0][a1]`` and ``m1[a0][a1]`` are the payoffs."""
    m0, m1 = np.array(m0), np.array(m1)
    return GraphicalGame(m0.shape, ((0, 1), (1, 0)), (m0, m1.T))


def coordination() -> GraphicalGame:
    eye = np.eye(2, dtype=int)
    return two_player(eye, eye)


def matching_pennies() -> GraphicalGame:
    return two_player([[1, 0], [0, 1]], [[0, 1], [1, 0]])


def dominant_game(best=(1, 0, 1), n_actions=2) -> GraphicalGame:
    """Path of three players; each has a strictly dominant action."""
    n = len(best)
    nbs = tuple((p,) + tuple(q for q in (p - 1, p + 1) if 0 <= q < n) for p in range(n))
    rng = np.random.default_rng(7)
    tables = []
    for p, nb in enumerate(nbs):
        shape = (n_actions,) * len(nb)
        t = rng.integers(0, 5, size=shape)
        t[best[p]] = 10 + rng.integers(0, 5, size=shape[1:])
        tables.append(t)
    return GraphicalGame((n_actions,) * n, nbs, tuple(tables))


@st.composite
def small_games(draw, max_players=4, max_actions=3, max_payoff=3):
    """Random graphical games on random undirected graphs (forests allowed)."""
    n = draw(st.integers(2, max_players))
    actions = tuple(draw(st.integers(2, max_actions)) for _ in range(n))
    pairs = [(p, q) for p in range(n) for q in range(p + 1, n)]
    edges = [e for e in pairs if draw(st.booleans())]
    adj = {p: sorted({q for e in edges for q in e if p in e} - {p}) for p in range(n)}
    nbs = tuple((p, *adj[p]) for p in range(n))
    tables = []
    for nb in nbs:
        shape = tuple(actions[q] for q in nb)
        flat = draw(st.lists(st.integers(0, max_payoff), min_size=int(np.prod(shape)),
                             max_size=int(np.prod(shape))))
        tables.append(np.array(flat).reshape(shape))
    return GraphicalGame(actions, nbs, tuple(tables))


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion; echoed in the summary."""
    def record(number: int, title: str, passed: bool, detail: str) -> None:
        line = f"ACCEPTANCE {number} {'PASS' if passed else 'FAIL'} {title}: {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def table1():
    return table1_game()


@pytest.fixture
def circle6():
    return generate_game("circle", 6, 3, 42)


def pne_by_backtracking(game: GraphicalGame, order=None) -> set[tuple[int, ...]]:
    """Exact PNE set by assigning players one at a time in ``order``.

    A player's no-deviation condition is checked as soon as its whole
    neighborhood is assigned, and failing branches are cut. Works off the
    payoff tables only, so it is independent of the pointed-set machinery.
    """
    order = list(range(game.n)) if order is None else list(order)
    rank = {p: i for i, p in enumerate(order)}
    due = [[] for _ in order]
    for p, nb in enumerate(game.neighborhoods):
        due[max(rank[q] for q in nb)].append(p)
    prof = [-1] * game.n
    found = set()

    def stable(p):
        local = tuple(prof[q] for q in game.neighborhoods[p][1:])
        column = game.payoffs[p][(slice(None),) + local]
        return column[prof[p]] == column.max()

    def descend(d):
        if d == len(order):
            found.add(tuple(prof))
            return
        p = order[d]
        for a in range(game.actions[p]):
            prof[p] = a
            if all(stable(q) for q in due[d]):
                descend(d + 1)
        prof[p] = -1

    descend(0)
    return found


def ladder_order(n: int) -> list[int]:
    """Column-by-column order for the two-lane road layout."""
    k = n // 2
    return [p for i in range(k) for p in (i, i + k)]
