"""Three-player walk-through: best responses, the penalty model, its ground states.

Player A (2 actions) sits between B (3 actions) and C (2 actions); B and C
are indifferent, so every profile in which A best-responds is an equilibrium.

    python demos/worked_example.py
"""

import numpy as np

from qnash import GraphicalGame, build_qubo, collect_b, decode, oracle_pne
from qnash.solvers import solve_exact

A_TABLE = np.array([[4, 1, 2, 2, 1, 4],
                    [1, 3, 2, 1, 2, 2]]).reshape(2, 3, 2)


def main():
    game = GraphicalGame((2, 3, 2), ((0, 1, 2), (1, 0), (2, 0)),
                         (A_TABLE, np.zeros((3, 2), dtype=int), np.zeros((2, 2), dtype=int)))

    b = collect_b(game)
    print(f"{b.c_b} pointed sets in total; per player {b.counts()}")
    for k, s in enumerate(b.sets):
        if s.base_player == 0:
            members = ", ".join(f"{'ABC'[q]}{a}" for q, a in s.members())
            print(f"  set {k}: {{{members}}}")

    model = build_qubo(b, game)
    print(f"\nmodel: {model.num_vars} binary variables, offset {model.offset}")
    print("energy of the all-zero vector:", model.energy(np.zeros(model.num_vars, dtype=int)))

    ground = solve_exact(model, max_energy=0)
    print(f"\n{len(ground)} assignments reach energy 0; decoded profiles:")
    for x in ground.samples:
        print("  ", decode(model, x, b))
    print("direct enumeration agrees:", sorted(decode(model, x, b) for x in ground.samples)
          == sorted(oracle_pne(game).pne_found))


if __name__ == "__main__":
    main()
