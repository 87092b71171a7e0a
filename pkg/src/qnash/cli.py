"""Command line front end.

    python -m qnash generate --topology circle --players 6 --seed 42 --out g.json
    python -m qnash solve g.json --backend sa --num-repeats 50 --out report.json
    python -m qnash export g.json --format qbsolv --out g.qubo
    python -m qnash bench --out results/

Exit codes: 0 success (finding no equilibrium is a success), 1 internal
error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from .baselines import CapExceeded, brute_force_sets, oracle_pne, random_search
from .bestresponse import collect_b
from .game import TOPOLOGIES, GameError, generate_game, load_game, save_game
from .qubo import CompilerInvariantError, QuboError, build_qubo, export_qubo
from .solvers.pipeline import BACKENDS, find_all_pne
from .solvers.sampleset import SolverParams


class UsageError(Exception):
    pass


# -- argument parsing ------------------------------------------------------------

def _params(args) -> SolverParams:
    try:
        return SolverParams(num_repeats=args.num_repeats, subproblem_size=args.subproblem_size,
                            seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", choices=BACKENDS, default="exhaustive")
    p.add_argument("--num-repeats", type=int, default=50)
    p.add_argument("--subproblem-size", type=int, default=20)
    p.add_argument("--penalty", type=int, default=1, help="penalty weight A (positive integer)")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qnash", description="Pure Nash equilibria of graphical games via QUBO")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random game file")
    g.add_argument("--topology", choices=TOPOLOGIES, required=True)
    g.add_argument("--players", type=int, required=True)
    g.add_argument("--actions", type=int, default=3)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path, required=True)

    s = sub.add_parser("solve", help="find the PNE of a game file")
    s.add_argument("game", type=Path)
    _add_solver_flags(s)
    s.add_argument("--out", type=Path, help="report JSON path")
    s.add_argument("--timings", action="store_true", help="include wall-clock timings in the report file")

    e = sub.add_parser("export", help="write the game's QUBO in a text format")
    e.add_argument("game", type=Path)
    e.add_argument("--format", choices=("coo", "qbsolv"), default="coo")
    e.add_argument("--penalty", type=int, default=1)
    e.add_argument("--out", type=Path, required=True)

    b = sub.add_parser("bench", help="run the comparison experiments and write CSV tables")
    b.add_argument("--topology", nargs="+", choices=TOPOLOGIES, default=list(TOPOLOGIES))
    b.add_argument("--players", nargs="+", type=int, default=[6, 8, 10])
    b.add_argument("--actions", type=int, default=3)
    b.add_argument("--trials", type=int, default=3)
    _add_solver_flags(b)
    b.add_argument("--timeout-ms", type=float, default=None,
                   help="random search budget; default is the measured Q-Nash total per instance")
    b.add_argument("--variance-runs", type=int, default=5)
    b.add_argument("--sweep-topology", choices=TOPOLOGIES, default="road")
    b.add_argument("--sweep-players", type=int, default=10)
    b.add_argument("--sweep-repeats", nargs="+", type=int, default=[10, 20, 50, 100])
    b.add_argument("--timing-players", nargs="+", type=int, default=[6, 8, 10, 12, 14, 16, 18, 20])
    b.add_argument("--tables", nargs="+", choices=("quality", "variance", "sweep", "timing"),
                   default=["quality", "variance", "sweep", "timing"])
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--out", type=Path, required=True, help="output directory")
    return parser


# -- commands --------------------------------------------------------------------

def cmd_generate(args) -> int:
    try:
        game = generate_game(args.topology, args.players, args.actions, args.seed)
    except GameError as exc:
        raise UsageError(str(exc)) from exc
    save_game(args.out, game)
    print(f"wrote {args.out}: {args.topology} game, {game.n} players, {game.representation_size()} payoffs")
    return 0


def _load(path: Path):
    try:
        return load_game(path)
    except (OSError, GameError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read game file {path}: {exc}") from exc


def cmd_solve(args) -> int:
    game = _load(args.game)
    params = _params(args)
    if args.penalty < 1:
        raise UsageError("--penalty must be a positive integer")
    report = find_all_pne(game, args.backend, params, args.penalty)
    count = len(report.pne_found)
    print(f"{count} PNE found (backend {args.backend}, {report.backend['num_vars']} QUBO variables)")
    for profile in sorted(report.pne_found):
        print("  " + " ".join(str(a) for a in profile))
    t = report.timings
    print(f"best responses  {t['best_response_ms']:10.2f} ms")
    print(f"QUBO build      {t['qubo_build_ms']:10.2f} ms")
    print(f"backend solve   {t['solve_ms']:10.2f} ms")
    print(f"decode          {t['decode_ms']:10.2f} ms")
    if args.out:
        args.out.write_text(report.to_json(include_timings=args.timings), encoding="utf-8")
    return 0


def cmd_export(args) -> int:
    game = _load(args.game)
    if args.penalty < 1:
        raise UsageError("--penalty must be a positive integer")
    model = build_qubo(collect_b(game), game, args.penalty)
    export_qubo(model, args.format, args.out)
    print(f"wrote {args.out}: {model.num_vars} variables, offset {model.offset}")
    return 0


# -- bench -----------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    topologies: tuple[str, ...]
    players: tuple[int, ...]
    actions: int = 3
    trials: int = 3
    backend: str = "exhaustive"
    params: SolverParams = field(default_factory=SolverParams)
    penalty_a: int = 1
    rs_timeout_ms: float | None = None
    variance_runs: int = 5
    sweep_topology: str = "road"
    sweep_players: int = 10
    sweep_repeats: tuple[int, ...] = (10, 20, 50, 100)
    timing_players: tuple[int, ...] = (6, 8, 10, 12, 14, 16, 18, 20)
    workers: int = 1

    def __post_init__(self):
        if not self.topologies or not self.players:
            raise UsageError("experiment grid must not be empty")
        if self.trials < 1 or self.variance_runs < 1:
            raise UsageError("trials and variance runs must be >= 1")
        if self.backend not in BACKENDS:
            raise UsageError(f"unknown backend {self.backend!r}")


def game_seed(base: int, topology: str, players: int, trial: int) -> int:
    """Seed of one grid instance; recorded in every CSV row."""
    return base * 1_000_003 + TOPOLOGIES.index(topology) * 10_007 + players * 101 + trial


def _count_or_blank(fn):
    try:
        return len(fn().pne_found)
    except CapExceeded:
        return ""


def _quality_row(cfg: ExperimentConfig, topology: str, players: int, trial: int) -> dict:
    seed = game_seed(cfg.params.seed, topology, players, trial)
    row = {"topology": topology, "players": players, "trial": trial, "game_seed": seed}
    try:
        game = generate_game(topology, players, cfg.actions, seed)
    except GameError as exc:
        row["error"] = str(exc)
        return row
    report = find_all_pne(game, cfg.backend, cfg.params, cfg.penalty_a)
    budget = cfg.rs_timeout_ms if cfg.rs_timeout_ms is not None else report.timings["total_ms"]
    row.update({
        "oracle": _count_or_blank(lambda: oracle_pne(game)),
        "qnash": len(report.pne_found),
        "bf": _count_or_blank(lambda: brute_force_sets(game)),
        "rs": len(random_search(game, budget / 1e3, seed=seed).pne_found),
        "backend": cfg.backend,
        "num_vars": report.backend["num_vars"],
        "rs_budget_ms": round(budget, 3),
        "error": "",
    })
    return row


def _variance_rows(cfg: ExperimentConfig, topology: str, players: int, trial: int) -> list[dict]:
    seed = game_seed(cfg.params.seed, topology, players, trial)
    try:
        game = generate_game(topology, players, cfg.actions, seed)
    except GameError:
        return []
    rows = []
    for run in range(cfg.variance_runs):
        params = SolverParams(**{**asdict(cfg.params), "seed": run})
        report = find_all_pne(game, cfg.backend, params, cfg.penalty_a)
        budget = cfg.rs_timeout_ms if cfg.rs_timeout_ms is not None else report.timings["total_ms"]
        rs = random_search(game, budget / 1e3, seed=run)
        for method, count in (("qnash", len(report.pne_found)), ("rs", len(rs.pne_found))):
            rows.append({"topology": topology, "players": players, "game_seed": seed, "run_seed": run,
                         "method": method, "pne_found": count})
    return rows


def _sweep_rows(cfg: ExperimentConfig) -> tuple[list[dict], list[dict]]:
    seed = game_seed(cfg.params.seed, cfg.sweep_topology, cfg.sweep_players, 0)
    game = generate_game(cfg.sweep_topology, cfg.sweep_players, cfg.actions, seed)
    runs, summary = [], []
    backend = cfg.backend if cfg.backend != "exhaustive" else "sa"
    for reps in cfg.sweep_repeats:
        counts = []
        for run in range(cfg.trials):
            params = SolverParams(**{**asdict(cfg.params), "num_repeats": reps, "seed": run})
            counts.append(len(find_all_pne(game, backend, params, cfg.penalty_a).pne_found))
            runs.append({"num_repeats": reps, "run_seed": run, "game_seed": seed, "pne_found": counts[-1]})
        summary.append({"topology": cfg.sweep_topology, "players": cfg.sweep_players, "game_seed": seed,
                        "backend": backend, "num_repeats": reps, "runs": len(counts),
                        "median_pne": statistics.median(counts), "min_pne": min(counts),
                        "max_pne": max(counts)})
    return summary, runs


def _timing_row(cfg: ExperimentConfig, topology: str, players: int) -> dict:
    seed = game_seed(cfg.params.seed, topology, players, 0)
    row = {"topology": topology, "players": players, "game_seed": seed}
    try:
        game = generate_game(topology, players, cfg.actions, seed)
    except GameError as exc:
        return {**row, "error": str(exc)}
    report = find_all_pne(game, cfg.backend, cfg.params, cfg.penalty_a)
    try:
        bf = brute_force_sets(game)
        bf_ms, bf_count = round(bf.elapsed_ms, 3), bf.combinations_examined
    except CapExceeded:
        bf_ms = bf_count = ""
    t = report.timings
    return {**row, "c_b": report.backend["c_b"], "num_vars": report.backend["num_vars"],
            "best_response_ms": round(t["best_response_ms"], 3), "qubo_build_ms": round(t["qubo_build_ms"], 3),
            "solve_ms": round(t["solve_ms"], 3), "total_ms": round(t["total_ms"], 3),
            "bf_ms": bf_ms, "bf_combinations": bf_count, "error": ""}


def _write_csv(path: Path, rows: Sequence[dict]) -> None:
    fields: list[str] = []
    for r in rows:
        fields.extend(k for k in r if k not in fields)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, restval="", lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def _starmap(workers: int, fn, jobs):
    if workers <= 1:
        return [fn(*j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map keeps submission order, so rows come out in config order
        return list(pool.map(fn, *zip(*jobs)))


def run_bench(cfg: ExperimentConfig, out: Path, tables: Sequence[str]) -> dict[str, Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    cells = [(cfg, t, n, i) for t in cfg.topologies for n in cfg.players for i in range(cfg.trials)]
    if "quality" in tables:
        written["quality"] = out / "quality.csv"
        _write_csv(written["quality"], _starmap(cfg.workers, _quality_row, cells))
    if "variance" in tables:
        nested = _starmap(cfg.workers, _variance_rows, [(cfg, t, n, 0) for t in cfg.topologies for n in cfg.players])
        written["variance"] = out / "variance.csv"
        _write_csv(written["variance"], [r for rows in nested for r in rows])
    if "sweep" in tables:
        summary, runs = _sweep_rows(cfg)
        written["sweep"] = out / "sweep.csv"
        _write_csv(written["sweep"], summary)
        written["sweep_runs"] = out / "sweep_runs.csv"
        _write_csv(written["sweep_runs"], runs)
    if "timing" in tables:
        jobs = [(cfg, t, n) for t in cfg.topologies for n in cfg.timing_players]
        written["timing"] = out / "timing.csv"
        _write_csv(written["timing"], _starmap(cfg.workers, _timing_row, jobs))
    return written


def cmd_bench(args) -> int:
    if args.penalty < 1:
        raise UsageError("--penalty must be a positive integer")
    cfg = ExperimentConfig(tuple(args.topology), tuple(args.players), args.actions, args.trials,
                           args.backend, _params(args), args.penalty, args.timeout_ms, args.variance_runs,
                           args.sweep_topology, args.sweep_players, tuple(args.sweep_repeats),
                           tuple(args.timing_players), args.workers)
    t0 = time.perf_counter()
    for name, path in run_bench(cfg, args.out, args.tables).items():
        print(f"{name:10s} -> {path}")
    print(f"bench finished in {time.perf_counter() - t0:.1f} s")
    return 0


COMMANDS = {"generate": cmd_generate, "solve": cmd_solve, "export": cmd_export, "bench": cmd_bench}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (QuboError, GameError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CompilerInvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to the internal-error code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
