"""Acceptance criteria, one test each, at the stated sizes and tolerances.

Set ``QNASH_ACCEPTANCE_QUICK=1`` for a reduced smoke run while developing;
the default is the full sizes.
"""

import itertools
import math
import os
import statistics
import time
from fractions import Fraction

import numpy as np

from conftest import ladder_order, pne_by_backtracking
from qnash.baselines import brute_force_sets, is_pne, oracle_pne, random_search
from qnash.bestresponse import collect_b
from qnash.cli import game_seed, main
from qnash.game import GraphicalGame, generate_game
from qnash.qubo import build_qubo, decode, energies, row_energy, to_ising
from qnash.solvers import SolverParams, find_all_pne, solve_exhaustive

QUICK = os.environ.get("QNASH_ACCEPTANCE_QUICK") == "1"
GAMES_PER_CELL = 5 if QUICK else 50
SMALL_GAMES = 20 if QUICK else 100
SWEEP_SEEDS = 5 if QUICK else 20
ROAD20_GAMES = 4 if QUICK else 20

TOPOLOGIES = ("tree", "circle", "road")
SIZES = (6, 8, 10)
GRID = [(t, n, i) for t in TOPOLOGIES for n in SIZES for i in range(GAMES_PER_CELL)]

_games: dict = {}
_oracle: dict = {}


def grid_game(topology, n, trial):
    key = (topology, n, trial)
    if key not in _games:
        _games[key] = generate_game(topology, n, 3, game_seed(0, topology, n, trial))
    return _games[key]


def grid_oracle(topology, n, trial):
    key = (topology, n, trial)
    if key not in _oracle:
        _oracle[key] = oracle_pne(grid_game(*key)).pne_found
    return _oracle[key]


def small_random_games(count, seed=2024, max_vars=24):
    """Seeded random games on 2-4 players whose model has at most ``max_vars`` variables."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(2, 5))
        actions = tuple(int(a) for a in rng.integers(2, 4, size=n))
        pairs = [(p, q) for p in range(n) for q in range(p + 1, n)]
        edges = [e for e in pairs if rng.random() < 0.6]
        tables = []
        adj = {p: sorted({q for e in edges for q in e if p in e} - {p}) for p in range(n)}
        nbs = tuple((p, *adj[p]) for p in range(n))
        for nb in nbs:
            shape = tuple(actions[q] for q in nb)
            tables.append(rng.integers(0, 4, size=shape))
        game = GraphicalGame(actions, nbs, tuple(tables))
        model = build_qubo(collect_b(game), game)
        if model.num_vars <= max_vars:
            out.append((game, model))
    return out


def test_1_oracle_equivalence(acceptance):
    bad_q, bad_bf = [], []
    for cell in GRID:
        game, truth = grid_game(*cell), grid_oracle(*cell)
        if find_all_pne(game, "exhaustive").pne_found != truth:
            bad_q.append(cell)
        if brute_force_sets(game).pne_found != truth:
            bad_bf.append(cell)
    passed = not bad_q and not bad_bf
    acceptance(1, "oracle equivalence", passed,
               f"{len(GRID)} games ({GAMES_PER_CELL} per cell); exhaustive mismatches {len(bad_q)}, "
               f"brute force mismatches {len(bad_bf)}")
    assert passed, (bad_q, bad_bf)


def test_2_heuristic_recall(acceptance):
    params = SolverParams(num_repeats=50)
    full = unsound = 0
    per_cell = {}
    for cell in GRID:
        game, truth = grid_game(*cell), grid_oracle(*cell)
        found = find_all_pne(game, "sa", SolverParams(**{**params.to_dict(), "seed": cell[2]})).pne_found
        unsound += not (found <= truth and all(is_pne(game, s) for s in found))
        hit = found == truth
        full += hit
        per_cell.setdefault(cell[:2], []).append(hit)
    recall = full / len(GRID)
    passed = recall >= 0.95 and unsound == 0
    worst = min(per_cell, key=lambda c: sum(per_cell[c]))
    acceptance(2, "heuristic recall", passed,
               f"SA num_repeats=50 recovered the full set in {full}/{len(GRID)} = {recall:.1%} "
               f"(need >= 95%); unsound reports {unsound}; weakest cell {worst} "
               f"{sum(per_cell[worst])}/{len(per_cell[worst])}")
    assert passed


def test_3_ground_state_bijection(acceptance):
    failures = []
    for k, (game, model) in enumerate(small_random_games(SMALL_GAMES)):
        truth = oracle_pne(game).pne_found
        res = solve_exhaustive(model)
        zero = res.samples[res.energies == 0] if res.best_energy == 0 else res.samples[:0]
        b = collect_b(game)
        decoded = [decode(model, x, b) for x in zero]
        if len(zero) != len(truth) or len(set(decoded)) != len(decoded) or set(decoded) != truth:
            failures.append(k)
    passed = not failures
    acceptance(3, "ground-state bijection", passed,
               f"{SMALL_GAMES} games with <= 24 variables; mismatches {len(failures)}")
    assert passed, failures


def test_4_energy_identities(acceptance):
    rng = np.random.default_rng(4)
    models = []
    for topology, n in itertools.product(TOPOLOGIES, SIZES):
        game = grid_game(topology, n, 0)
        models += [(game, build_qubo(collect_b(game), game, a)) for a in (1, 3)]
    models += [(g, m) for g, m in small_random_games(SMALL_GAMES)]
    offset_bad = sign_bad = mod_bad = route_bad = 0
    for game, model in models:
        a, n = model.penalty_a, game.n
        offset_bad += model.energy(np.zeros(model.num_vars, dtype=np.int8)) != a * (n + n * n)
        xs = rng.integers(0, 2, size=(10_000, model.num_vars)).astype(np.int8)
        es = energies(model, xs)
        sign_bad += int((es < 0).sum())
        mod_bad += int((es % a != 0).sum())
        route_bad += sum(row_energy(model, x) != e for x, e in zip(xs[:50], es[:50]))
    ising_models = [m for _, m in small_random_games(SMALL_GAMES, max_vars=12)][:20]
    ising_bad = 0
    for model in ising_models:
        ising = to_ising(model)
        xs = np.array(list(itertools.product((0, 1), repeat=model.num_vars)), dtype=np.int8)
        for x, e in zip(xs, energies(model, xs)):
            ising_bad += ising.energy(2 * x.astype(int) - 1) != Fraction(int(e))
    passed = not (offset_bad or sign_bad or mod_bad or route_bad or ising_bad)
    acceptance(4, "energy identities", passed,
               f"{len(models)} models x 10^4 vectors: offset {offset_bad}, negative {sign_bad}, "
               f"not multiple of A {mod_bad}, row-route {route_bad}; Ising exhaustive on "
               f"{len(ising_models)} models: {ising_bad} mismatches")
    assert passed


def test_5_num_repeats_monotone(acceptance):
    game = generate_game("road", 10, 3, game_seed(0, "road", 10, 0))
    truth = len(pne_by_backtracking(game, ladder_order(10)))
    medians = []
    for reps in (10, 20, 50, 100):
        counts = [len(find_all_pne(game, "sa", SolverParams(num_repeats=reps, seed=s)).pne_found)
                  for s in range(SWEEP_SEEDS)]
        medians.append(statistics.median(counts))
    steps = list(zip(medians, medians[1:]))
    decreases = sum(b < a for a, b in steps)
    # a median already at the true count cannot rise further
    plateaus = sum(b == a < truth for a, b in steps)
    passed = decreases == 0 and plateaus <= 1
    acceptance(5, "num_repeats monotone", passed,
               f"road-10 game with {truth} PNE, {SWEEP_SEEDS} seeds, medians for 10/20/50/100 = {medians}; "
               f"decreases {decreases}, plateaus below the true count {plateaus}")
    assert passed


def test_6_random_search_inferior(acceptance):
    games = []
    i = 0
    while len(games) < ROAD20_GAMES:
        seed = game_seed(0, "road", 20, i)
        game = generate_game("road", 20, 3, seed)
        truth = pne_by_backtracking(game, ladder_order(20))
        if truth:
            games.append((seed, game, truth))
        i += 1
    fewer = tabu_ahead = 0
    lines = []
    for seed, game, truth in games:
        params = SolverParams(num_repeats=50, seed=seed)
        report = find_all_pne(game, "sa", params)
        rs = random_search(game, report.timings["total_ms"] / 1e3, seed=seed)
        # recorded only: the tabu pipeline against the same RS run, whose budget was the SA time
        tabu = find_all_pne(game, "tabu", params)
        assert report.pne_found <= truth and tabu.pne_found <= truth and rs.pne_found <= truth
        fewer += len(rs.pne_found) < len(report.pne_found)
        tabu_ahead += len(rs.pne_found) < len(tabu.pne_found)
        lines.append(f"{len(report.pne_found)}/{len(rs.pne_found)}/{len(tabu.pne_found)}/{len(truth)}")
    share = fewer / len(games)
    passed = share >= 0.8
    acceptance(6, "random search inferior", passed,
               f"RS found fewer than SA on {fewer}/{len(games)} = {share:.0%} road-20 games with a PNE "
               f"(need >= 80%); recorded: fewer than the tabu backend on {tabu_ahead}/{len(games)}; "
               f"SA/RS/tabu/true per game: {' '.join(lines)}; seeds scanned {i}")
    assert passed


def _median_ms(fn, games, reps=3):
    out = []
    for g in games:
        best = math.inf
        for _ in range(reps):
            t = time.perf_counter()
            fn(g)
            best = min(best, time.perf_counter() - t)
        out.append(best * 1e3)
    return statistics.median(out)


def test_7_phase_scaling(acceptance):
    sizes = list(range(6, 21, 2))
    games = {n: [generate_game("circle", n, 3, game_seed(0, "circle", n, i)) for i in range(5)] for n in sizes}
    br = {n: _median_ms(collect_b, games[n]) for n in sizes}
    bf = {n: _median_ms(brute_force_sets, games[n]) for n in sizes}
    slope = np.polyfit(np.log(sizes), np.log([br[n] for n in sizes]), 1)[0]
    doubling = [bf[2 * n] / bf[n] for n in (6, 8, 10)]
    growing = all(a < b for a, b in zip(doubling, doubling[1:]))
    product = {n: statistics.median(math.prod(collect_b(g).counts()) for g in games[n]) for n in sizes}
    count_doubling = [product[2 * n] / product[n] for n in (6, 8, 10)]
    passed = slope < 2.5 and growing
    acceptance(7, "phase scaling", passed,
               f"best-response log-log slope {slope:.2f} (need < 2.5); brute force time doubling ratios "
               f"t(2n)/t(n) at n=6,8,10: {', '.join(f'{r:.2f}' for r in doubling)} (need increasing); "
               f"combination count ratios {', '.join(f'{r:.3g}' for r in count_doubling)}")
    assert passed


def test_8_determinism(acceptance, tmp_path):
    def twice(name, *argv):
        outs = []
        for k in (1, 2):
            out = tmp_path / f"{name}{k}"
            assert main([str(a) for a in argv] + ["--out", str(out)]) == 0
            outs.append(out)
        return outs

    pairs = []
    game = tmp_path / "game.json"
    a, b = twice("gen", "generate", "--topology", "road", "--players", 8, "--seed", 5)
    pairs.append(("generate", a, b))
    main(["generate", "--topology", "road", "--players", "8", "--seed", "5", "--out", str(game)])
    for backend in ("exhaustive", "sa", "tabu", "decomp"):
        a, b = twice(backend, "solve", game, "--backend", backend, "--num-repeats", 5, "--seed", 1,
                     "--subproblem-size", 20)
        pairs.append((f"solve {backend}", a, b))
    for fmt in ("coo", "qbsolv"):
        a, b = twice(fmt, "export", game, "--format", fmt)
        pairs.append((f"export {fmt}", a, b))
    a, b = twice("bench", "bench", "--topology", "tree", "circle", "--players", 6, "--trials", 2,
                 "--timeout-ms", 0, "--variance-runs", 2, "--num-repeats", 3, "--sweep-topology", "circle",
                 "--sweep-players", 6, "--sweep-repeats", 1, 3, "--tables", "quality", "variance", "sweep")
    for table in ("quality.csv", "variance.csv", "sweep.csv", "sweep_runs.csv"):
        pairs.append((f"bench {table}", a / table, b / table))
    differing = [name for name, x, y in pairs if x.read_bytes() != y.read_bytes()]
    passed = not differing
    acceptance(8, "determinism", passed,
               f"{len(pairs)} seeded outputs compared byte for byte; differing: {differing or 'none'}")
    assert passed
