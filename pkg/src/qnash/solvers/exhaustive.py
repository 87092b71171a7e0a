from __future__ import annotations

import time

import numpy as np

from ..qubo import QuboError, QuboModel
from ._kernels import gray_enumerate
from .sampleset import SampleSet

EXHAUSTIVE_CAP = 24


def solve_exhaustive(model: QuboModel, cap: int = EXHAUSTIVE_CAP) -> SampleSet:
    """Enumerate all ``2**num_vars`` assignments; return every minimizer.

    Raises:
        QuboError: ``num_vars`` is above ``cap``.
    """
    if model.num_vars > cap:
        raise QuboError(f"{model.num_vars} variables exceed the exhaustive cap of {cap}")
    t0 = time.perf_counter()
    v = model.num_vars
    best, codes = gray_enumerate(model.linear.astype(np.int64), model.symmetric_matrix(),
                                 np.int64(model.offset))
    xs = ((codes[:, None] >> np.arange(v)) & 1).astype(np.int8)
    info = {"solver": "exhaustive", "min_energy": int(best),
            "solve_ms": (time.perf_counter() - t0) * 1e3}
    return SampleSet.from_samples(model, xs, info)
