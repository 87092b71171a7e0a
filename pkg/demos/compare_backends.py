"""Every backend and both exact baselines on one seeded 8-player game.

    python demos/compare_backends.py [topology] [players] [seed]
"""

import sys

from qnash import brute_force_sets, find_all_pne, generate_game, oracle_pne, random_search
from qnash.solvers import BACKENDS, SolverParams


def main(topology="circle", players=8, seed=3):
    game = generate_game(topology, players, 3, seed)
    truth = oracle_pne(game)
    print(f"{topology} game, {players} players, seed {seed}: {len(truth.pne_found)} equilibria "
          f"({truth.elapsed_ms:.0f} ms by direct enumeration)")

    bf = brute_force_sets(game)
    print(f"{'brute force':12s} {len(bf.pne_found):3d} found  {bf.elapsed_ms:9.1f} ms  "
          f"({bf.combinations_examined} full combinations, {bf.extra['pruned']} cut early)")

    budget = None
    for backend in BACKENDS:
        report = find_all_pne(game, backend, SolverParams(num_repeats=20, seed=seed))
        t = report.timings
        budget = budget or t["total_ms"]
        print(f"{backend:12s} {len(report.pne_found):3d} found  {t['total_ms']:9.1f} ms  "
              f"(solve {t['solve_ms']:.1f} ms, {report.backend['num_vars']} variables)")

    rs = random_search(game, budget / 1e3, seed=seed)
    print(f"{'random':12s} {len(rs.pne_found):3d} found  {rs.elapsed_ms:9.1f} ms  "
          f"({rs.combinations_examined} samples)")


if __name__ == "__main__":
    args = sys.argv[1:]
    main(*(t(a) for t, a in zip((str, int, int), args)))
