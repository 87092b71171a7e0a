from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..qubo import QuboModel, energies


@dataclass(frozen=True)
class SolverParams:
    """Knobs shared by the heuristic backends.

    ``None`` for a schedule or tabu field means "derive from the model":
    ``t_initial`` = largest absolute coefficient, ``sweeps`` = 10 * num_vars,
    ``tabu_tenure`` = max(10, num_vars // 10), ``stall_limit`` = 50 * num_vars.

    ``selector_moves`` lets SA and tabu flip pointed-set selectors with the
    multiplicity bits following at their best values, on models compiled by
    ``build_qubo``; other models always use plain single-bit flips.
    """

    num_repeats: int = 50
    subproblem_size: int = 20
    seed: int = 0
    t_initial: float | None = None
    t_final: float = 0.1
    sweeps: int | None = None
    tabu_tenure: int | None = None
    stall_limit: int | None = None
    decomposition_stall: int = 3
    keep_per_repeat: int = 32
    selector_moves: bool = True

    def __post_init__(self):
        if self.num_repeats < 1:
            raise ValueError(f"num_repeats must be >= 1, got {self.num_repeats}")
        if self.subproblem_size < 2:
            raise ValueError(f"subproblem_size must be >= 2, got {self.subproblem_size}")
        if self.t_final <= 0 or (self.t_initial is not None and self.t_initial <= 0):
            raise ValueError("temperatures must be positive")
        if self.t_initial is not None and self.t_initial < self.t_final:
            raise ValueError("temperature must decrease: t_initial < t_final")
        if self.sweeps is not None and self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if self.tabu_tenure is not None and self.tabu_tenure < 0:
            raise ValueError("tabu_tenure must be >= 0")
        if self.stall_limit is not None and self.stall_limit < 1:
            raise ValueError("stall_limit must be >= 1")

    def schedule(self, model: QuboModel, scale: int | None = None) -> tuple[float, float, int]:
        """``(t_initial, t_final, sweeps)``; ``scale`` replaces the largest
        coefficient as the default starting temperature."""
        if scale is None:
            scale = model.max_abs_coefficient()
        t0 = self.t_initial if self.t_initial is not None else float(max(scale, 1))
        t0 = max(t0, self.t_final)
        sweeps = self.sweeps if self.sweeps is not None else max(10 * model.num_vars, 1)
        return t0, self.t_final, sweeps

    def tabu(self, model: QuboModel) -> tuple[int, int]:
        tenure = self.tabu_tenure if self.tabu_tenure is not None else max(10, model.num_vars // 10)
        tenure = min(tenure, max(model.num_vars - 1, 0))
        stall = self.stall_limit if self.stall_limit is not None else max(50 * model.num_vars, 1)
        return tenure, stall

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class SampleSet:
    """Distinct binary vectors with their exact energies, lowest first.

    Ties in energy are broken by the vector read as a bit string.
    """

    samples: np.ndarray
    energies: np.ndarray
    info: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_samples(cls, model: QuboModel, xs: np.ndarray, info: dict | None = None) -> "SampleSet":
        xs = np.asarray(xs, dtype=np.int8).reshape(-1, model.num_vars)
        if len(xs):
            xs = np.unique(xs, axis=0)
        es = energies(model, xs) if len(xs) else np.zeros(0, dtype=np.int64)
        # lexsort: last key is primary
        order = np.lexsort(tuple(xs[:, i] for i in range(model.num_vars - 1, -1, -1)) + (es,)) \
            if len(xs) else np.zeros(0, dtype=np.int64)
        xs, es = xs[order], es[order]
        xs.setflags(write=False)
        es.setflags(write=False)
        return cls(xs, es, dict(info or {}))

    def __len__(self):
        return len(self.energies)

    def __iter__(self):
        return iter(zip(self.samples, (int(e) for e in self.energies)))

    @property
    def best_energy(self) -> int | None:
        return int(self.energies[0]) if len(self) else None

    def lowest(self) -> "SampleSet":
        """Only the samples that share the minimum energy."""
        if not len(self):
            return self
        keep = self.energies == self.energies[0]
        return SampleSet(self.samples[keep], self.energies[keep], self.info)

    def at_most(self, level: int) -> "SampleSet":
        keep = self.energies <= level
        return SampleSet(self.samples[keep], self.energies[keep], self.info)

    def merged(self, model: QuboModel, other: "SampleSet") -> "SampleSet":
        return SampleSet.from_samples(model, np.concatenate([self.samples, other.samples]), self.info)
