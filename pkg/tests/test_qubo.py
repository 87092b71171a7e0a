import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import coordination, dominant_game, matching_pennies, small_games, table1_game
from qnash.baselines import oracle_pne
from qnash.bestresponse import collect_b
from qnash.game import GraphicalGame, generate_game
from qnash.qubo import (CompilerInvariantError, IsingModel, QuboError, QuboModel, build_qubo, decode,
                        dumps_qubo, energies, energy, export_qubo, from_ising, import_qubo, loads_qubo,
                        row_energy, selected_sets, to_ising)
from qnash.solvers.decomposition import clamp
from qnash.solvers.exact import solve_exact
from qnash.solvers.exhaustive import solve_exhaustive


def hamiltonian(game, b, model, x, a=1):
    """The three penalty sums written out directly from the pointed sets."""
    x = np.asarray(x)
    n = game.n
    sel = x[:b.c_b]
    ys = {key: x[i] for key, i in model.index.multiplicity_index.items()}
    covers = {}
    for k, s in enumerate(b.sets):
        for q, act in s.members():
            covers.setdefault((q, act), []).append(k)
    t1 = sum((1 - sum(v for (p, _, _), v in ys.items() if p == q)) ** 2 for q in range(n))
    t2 = 0
    for q in range(n):
        for j in range(game.actions[q]):
            claim = sum(m * v for (p, jj, m), v in ys.items() if (p, jj) == (q, j))
            cov = sum(sel[k] for k in covers.get((q, j), []))
            t2 += (claim - cov) ** 2
    t3 = (n - sel.sum()) ** 2
    return a * (t1 + t2 + t3)


def all_vectors(v):
    return np.array(list(itertools.product((0, 1), repeat=v)), dtype=np.int8)


def test_all_zero_energy_is_offset():
    g = dominant_game()
    for a in (1, 2, 5):
        m = build_qubo(collect_b(g), g, a)
        assert m.offset == a * (3 + 9)
        assert energy(m, np.zeros(m.num_vars, dtype=int)) == a * 12


def test_single_selector_pays_set_count_term():
    g = generate_game("circle", 6, 3, 1)
    b = collect_b(g)
    m = build_qubo(b, g)
    for k in range(0, b.c_b, 7):
        x = np.zeros(m.num_vars, dtype=int)
        x[k] = 1
        assert energy(m, x) >= (g.n - 1) ** 2 > 0


@pytest.mark.parametrize("a", [1, 3])
def test_energy_matches_direct_sums(a):
    rng = np.random.default_rng(0)
    for g in (table1_game(), generate_game("circle", 6, 3, 5), generate_game("tree", 6, 3, 2)):
        b = collect_b(g)
        m = build_qubo(b, g, a)
        for x in rng.integers(0, 2, size=(30, m.num_vars)):
            assert energy(m, x) == hamiltonian(g, b, m, x, a) == row_energy(m, x)


def test_dominant_game_unique_ground_state():
    g = dominant_game(best=(1, 0, 1))
    b = collect_b(g)
    m = build_qubo(b, g)
    ground = solve_exhaustive(m, cap=m.num_vars)
    assert len(ground) == 1 and ground.best_energy == 0
    x = ground.samples[0]
    chosen = [b[k] for k in selected_sets(m, x)]
    assert sorted((s.base_player, s.base_action) for s in chosen) == [(0, 1), (1, 0), (2, 1)]
    assert decode(m, x, b) == (1, 0, 1)
    assert oracle_pne(g).pne_found == {(1, 0, 1)}


def test_three_sets_for_four_players_is_not_a_solution():
    # path 0-1-2-3 with indifferent players: the sets based at 0, 1 and 2
    # agree and together cover all four players, yet only three are chosen
    nbs = ((0, 1), (1, 0, 2), (2, 1, 3), (3, 2))
    g = GraphicalGame((2,) * 4, nbs, tuple(np.zeros((2,) * len(nb), dtype=int) for nb in nbs))
    b = collect_b(g)
    m = build_qubo(b, g)
    picks = [k for k, s in enumerate(b) if s.base_player in (0, 1, 2) and
             all(a == 0 for _, a in s.members())]
    assert len(picks) == 3
    covered = {q for k in picks for q, _ in b[k].members()}
    assert covered == {0, 1, 2, 3}
    x = np.zeros(m.num_vars, dtype=np.int8)
    x[picks] = 1
    best_y = solve_exact(clamp(m, x, np.arange(b.c_b, m.num_vars)))
    assert best_y.best_energy == m.penalty_a * (4 - 3) ** 2


def test_energy_length_mismatch():
    g = coordination()
    m = build_qubo(collect_b(g), g)
    with pytest.raises(QuboError):
        energy(m, [0] * (m.num_vars - 1))
    with pytest.raises(QuboError):
        energy(m, [2] * m.num_vars)


def test_decode_positive_energy_is_none():
    g = coordination()
    b = collect_b(g)
    m = build_qubo(b, g)
    assert decode(m, np.zeros(m.num_vars, dtype=int), b) is None


def test_decode_tie_gives_two_distinct_vectors():
    g = coordination()
    b = collect_b(g)
    m = build_qubo(b, g)
    zero = [x for x in all_vectors(m.num_vars) if energy(m, x) == 0]
    assert len(zero) == 2
    assert {decode(m, x, b) for x in zero} == {(0, 0), (1, 1)}


def test_decode_flags_compiler_bugs():
    g = coordination()
    b = collect_b(g)
    m = build_qubo(b, g)
    broken = QuboModel(m.num_vars, np.zeros(m.num_vars), [], [], [], 0, index=m.index, game=g)
    x = np.zeros(m.num_vars, dtype=int)
    x[0] = 1
    with pytest.raises(CompilerInvariantError):
        decode(broken, x, b)


def test_matching_pennies_minimum_positive():
    g = matching_pennies()
    m = build_qubo(collect_b(g), g)
    assert energies(m, all_vectors(m.num_vars)).min() > 0


def test_empty_collection_minimum():
    g = coordination()
    from qnash.bestresponse import BestResponseCollection
    m = build_qubo(BestResponseCollection((), 2), g, 2)
    assert m.num_vars == 0
    assert energy(m, []) == 2 * (2 + 4)


def test_variable_count_circle6():
    g = generate_game("circle", 6, 3, 42)
    b = collect_b(g)
    m = build_qubo(b, g)
    # count (player, action) coverage straight from the sets
    cover = {}
    for s in b:
        for key in s.members():
            cover[key] = cover.get(key, 0) + 1
    assert m.num_vars == m.index.total_vars == b.c_b + sum(cover.values())
    assert all(m.index.bound(p, j) == c for (p, j), c in cover.items())


def test_untruncated_form_has_same_ground_states():
    for g in (coordination(), matching_pennies()):
        b = collect_b(g)
        short, full = build_qubo(b, g), build_qubo(b, g, truncate=False)
        assert full.num_vars > short.num_vars
        zs = {decode(short, x, b) for x in all_vectors(short.num_vars) if energy(short, x) == 0}
        zf = {decode(full, x, b) for x in all_vectors(full.num_vars) if energy(full, x) == 0}
        assert zs == zf == set(oracle_pne(g).pne_found)


def test_symmetric_matrix_agrees():
    g = generate_game("road", 6, 3, 0)
    m = build_qubo(collect_b(g), g)
    q = m.symmetric_matrix()
    rng = np.random.default_rng(1)
    for x in rng.integers(0, 2, size=(50, m.num_vars)):
        assert m.offset + m.linear @ x + (x @ q @ x) // 2 == energy(m, x)
    assert np.array_equal(np.triu(m.upper_matrix(), 1) + np.triu(m.upper_matrix(), 1).T, q)


# -- Ising -----------------------------------------------------------------------

def test_ising_single_variable():
    m = QuboModel.from_coefficients(1, {(0, 0): 2})
    ising = to_ising(m)
    assert ising.h == (Fraction(1),) and ising.offset == 1 and ising.j == {}
    assert [ising.energy([s]) for s in (-1, 1)] == [0, 2]


def test_ising_zero_model():
    ising = to_ising(QuboModel.from_coefficients(3, {}))
    assert all(h == 0 for h in ising.h) and ising.offset == 0 and not ising.j


def test_ising_exhaustive_random_model():
    rng = np.random.default_rng(3)
    coeffs = {(i, j): int(rng.integers(-9, 10)) for i in range(10) for j in range(i, 10) if rng.random() < 0.5}
    m = QuboModel.from_coefficients(10, coeffs, offset=4)
    ising = to_ising(m)
    xs = all_vectors(10)
    gap = max(abs(Fraction(int(e)) - ising.energy(2 * x - 1)) for x, e in zip(xs, energies(m, xs)))
    assert gap == 0
    back, off = from_ising(ising)
    assert off == m.offset
    assert {k: v for k, v in back.items() if v} == {k: Fraction(v) for k, v in m.coefficients.items()}


def test_ising_rejects_non_spins():
    with pytest.raises(QuboError):
        IsingModel((Fraction(0),), {}, Fraction(0)).energy([0])


# -- text formats ------------------------------------------------------------------

@pytest.mark.parametrize("fmt", ["coo", "qbsolv"])
def test_export_round_trip(tmp_path, fmt):
    g = generate_game("tree", 8, 3, 4)
    m = build_qubo(collect_b(g), g, 2)
    path = tmp_path / f"m.{fmt}"
    export_qubo(m, fmt, path)
    back = import_qubo(path)
    xs = np.random.default_rng(0).integers(0, 2, size=(100, m.num_vars))
    assert back.num_vars == m.num_vars
    assert np.array_equal(energies(back, xs), energies(m, xs))


def test_coo_layout():
    m = QuboModel.from_coefficients(3, {(0, 0): -1, (2, 0): 4, (1, 2): 2}, offset=7)
    assert dumps_qubo(m, "coo") == "vars 3 offset 7\n0 0 -1\n0 2 4\n1 2 2\n"


def test_qbsolv_layout():
    m = QuboModel.from_coefficients(3, {(0, 0): -1, (1, 1): 3, (0, 2): 4}, offset=7)
    lines = dumps_qubo(m, "qbsolv").splitlines()
    assert lines[1] == "p qubo 0 3 2 1"
    assert lines[2:] == ["0 0 -1", "1 1 3", "0 2 4"]
    assert loads_qubo("\n".join(lines)).offset == 7


def test_empty_model_header_only():
    m = QuboModel.from_coefficients(0, {})
    assert dumps_qubo(m, "coo") == "vars 0 offset 0\n"
    assert dumps_qubo(m, "qbsolv").splitlines()[-1] == "p qubo 0 0 0 0"


def test_bad_format_and_text():
    m = QuboModel.from_coefficients(1, {})
    with pytest.raises(QuboError):
        dumps_qubo(m, "json")
    with pytest.raises(QuboError):
        loads_qubo("0 0 1\n")
    with pytest.raises(QuboError):
        loads_qubo("vars 1 offset 0\nnonsense\n")


def test_penalty_must_be_positive_integer():
    g = coordination()
    with pytest.raises(QuboError):
        build_qubo(collect_b(g), g, 0)
    with pytest.raises(QuboError):
        build_qubo(collect_b(g), g, 1.5)


# -- properties --------------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(small_games(max_players=4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_energy_nonnegative_multiple_of_a(g, a, seed):
    m = build_qubo(collect_b(g), g, a)
    xs = np.random.default_rng(seed).integers(0, 2, size=(200, m.num_vars))
    es = energies(m, xs)
    assert np.all(es >= 0) and np.all(es % a == 0)


def _tiny(g):
    return build_qubo(collect_b(g), g).num_vars <= 16


@settings(max_examples=40, deadline=None)
@given(small_games(max_players=3, max_actions=2).filter(_tiny))
def test_ground_states_biject_with_pne(g):
    b = collect_b(g)
    m = build_qubo(b, g)
    xs = all_vectors(m.num_vars)
    zero = xs[energies(m, xs) == 0]
    profiles = [decode(m, x, b) for x in zero]
    assert len(set(profiles)) == len(profiles)
    assert set(profiles) == set(oracle_pne(g).pne_found)
    for x in zero:
        bases = sorted(b[k].base_player for k in selected_sets(m, x))
        assert bases == list(range(g.n))


@settings(max_examples=25, deadline=None)
@given(small_games(max_players=3, max_actions=2).filter(_tiny), st.integers(2, 5))
def test_penalty_does_not_move_ground_states(g, a):
    b = collect_b(g)
    m1, ma = build_qubo(b, g, 1), build_qubo(b, g, a)
    xs = all_vectors(m1.num_vars)
    assert np.array_equal(energies(m1, xs) == 0, energies(ma, xs) == 0)
    assert np.array_equal(energies(m1, xs) * a, energies(ma, xs))
