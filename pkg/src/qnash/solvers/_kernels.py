"""Compiled inner loops shared by the local-search backends.

All kernels work on integer local fields ``f_i = h_i + sum_j Q_ij x_j``
(symmetric CSR couplings), so flipping ``x_i`` changes the energy by
``f_i`` when it goes 0 -> 1 and by ``-f_i`` when it goes 1 -> 0.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ..qubo import QuboModel


def csr_couplings(model: QuboModel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    v = model.num_vars
    rows = np.concatenate([model.quad_i, model.quad_j])
    cols = np.concatenate([model.quad_j, model.quad_i])
    vals = np.concatenate([model.quad_v, model.quad_v])
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    indptr = np.zeros(v + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    return np.cumsum(indptr), cols.astype(np.int64), vals.astype(np.int64)


def zobrist_keys(num_vars: int) -> np.ndarray:
    return np.random.default_rng(0x5EED).integers(1, 2 ** 62, size=num_vars, dtype=np.int64)


@njit(cache=True)
def _fields(h, indptr, indices, data, x):
    f = h.copy()
    for i in range(h.size):
        if x[i]:
            for k in range(indptr[i], indptr[i + 1]):
                f[indices[k]] += data[k]
    return f


@njit(cache=True)
def _energy(h, f, x, offset):
    lin = 0
    quad = 0
    for i in range(h.size):
        if x[i]:
            lin += h[i]
            quad += f[i] - h[i]
    return offset + lin + quad // 2


@njit(cache=True)
def _flip(i, x, f, indptr, indices, data):
    s = 1 if x[i] == 0 else -1
    x[i] = 1 - x[i]
    for k in range(indptr[i], indptr[i + 1]):
        f[indices[k]] += s * data[k]


@njit(cache=True)
def _remember(x, h, best_hashes, store, count):
    for c in range(count):
        if best_hashes[c] == h:
            return count
    if count < store.shape[0]:
        store[count, :] = x
        best_hashes[count] = h
        count += 1
    return count


@njit(cache=True)
def gray_enumerate(h, q, offset):
    """Every minimizer of a dense QUBO, as integer codes (bit i = x_i)."""
    v = h.size
    x = np.zeros(v, dtype=np.int8)
    f = h.copy()
    e = offset
    best = e
    codes = np.empty(1024, dtype=np.int64)
    codes[0] = 0
    n_codes = 1
    code = 0
    for t in range(1, 1 << v):
        i = 0
        while not (t >> i) & 1:
            i += 1
        if x[i] == 0:
            e += f[i]
            x[i] = 1
            for j in range(v):
                f[j] += q[i, j]
        else:
            e -= f[i]
            x[i] = 0
            for j in range(v):
                f[j] -= q[i, j]
        code ^= 1 << i
        if e < best:
            best = e
            n_codes = 0
        if e == best:
            if n_codes == codes.size:
                grown = np.empty(codes.size * 2, dtype=np.int64)
                grown[:n_codes] = codes[:n_codes]
                codes = grown
            codes[n_codes] = code
            n_codes += 1
    return best, codes[:n_codes].copy()


@njit(cache=True)
def anneal(h, indptr, indices, data, offset, betas, seed, keep, keys):
    """One Metropolis run over the given inverse-temperature schedule.

    Returns the final state and up to ``keep`` distinct states at the lowest
    energy seen during the run.
    """
    np.random.seed(seed)
    v = h.size
    x = np.zeros(v, dtype=np.int8)
    for i in range(v):
        if np.random.random() < 0.5:
            x[i] = 1
    f = _fields(h, indptr, indices, data, x)
    e = _energy(h, f, x, offset)
    hsh = 0
    for i in range(v):
        if x[i]:
            hsh ^= keys[i]
    store = np.zeros((keep, v), dtype=np.int8)
    hashes = np.zeros(keep, dtype=np.int64)
    store[0, :] = x
    hashes[0] = hsh
    count = 1
    best = e
    for beta in betas:
        for i in range(v):
            d = f[i] if x[i] == 0 else -f[i]
            if d <= 0 or np.random.random() < np.exp(-beta * d):
                _flip(i, x, f, indptr, indices, data)
                e += d
                hsh ^= keys[i]
                if e < best:
                    best = e
                    count = 0
                    count = _remember(x, hsh, hashes, store, count)
                elif e == best:
                    count = _remember(x, hsh, hashes, store, count)
    return x, store[:count].copy(), best


@njit(cache=True)
def tabu(h, indptr, indices, data, offset, x0, tenure, stall_limit, seed, keep, keys):
    """Steepest single-flip descent with a tabu list and aspiration.

    Stops after ``stall_limit`` consecutive moves without a new best energy.
    """
    np.random.seed(seed)
    v = h.size
    x = x0.copy()
    f = _fields(h, indptr, indices, data, x)
    e = _energy(h, f, x, offset)
    hsh = 0
    for i in range(v):
        if x[i]:
            hsh ^= keys[i]
    store = np.zeros((keep, v), dtype=np.int8)
    hashes = np.zeros(keep, dtype=np.int64)
    store[0, :] = x
    hashes[0] = hsh
    count = 1
    best = e
    tabu_until = np.zeros(v, dtype=np.int64)
    it = 0
    stall = 0
    while stall < stall_limit and v > 0:
        it += 1
        pick = -1
        pick_d = 0
        n_ties = 0
        for i in range(v):
            d = f[i] if x[i] == 0 else -f[i]
            if tabu_until[i] > it and e + d >= best:
                continue
            if pick < 0 or d < pick_d:
                pick = i
                pick_d = d
                n_ties = 1
            elif d == pick_d:
                # reservoir choice among equal moves keeps runs from cycling
                n_ties += 1
                if np.random.randint(0, n_ties) == 0:
                    pick = i
        if pick < 0:
            break
        _flip(pick, x, f, indptr, indices, data)
        e += pick_d
        hsh ^= keys[pick]
        tabu_until[pick] = it + tenure + 1
        if e < best:
            best = e
            stall = 0
            count = 0
            count = _remember(x, hsh, hashes, store, count)
        else:
            stall += 1
            if e == best:
                count = _remember(x, hsh, hashes, store, count)
    return x, store[:count].copy(), best


# -- selector space ------------------------------------------------------------
#
# On a compiled Q-Nash model the multiplicity bits of player q only enter q's
# own rows, so for fixed selectors their best setting has a closed form: with
# the nonzero coverages of q sorted c_1 >= c_2 >= ..., claiming the K largest
# (one bit y[q,j,c_j] each) costs (1 - K)**2 + sum_{i > K} c_i**2. The kernels
# below search over selectors only and score states by that minimum.

@njit(cache=True)
def player_cost(cov, q, nact, buf):
    k = 0
    for a in range(nact[q]):
        c = cov[q, a]
        if c > 0:
            j = k
            while j > 0 and buf[j - 1] < c:
                buf[j] = buf[j - 1]
                j -= 1
            buf[j] = c
            k += 1
    rest = 0
    for i in range(k):
        rest += buf[i] * buf[i]
    best = 1 + rest
    for kk in range(1, k + 1):
        rest -= buf[kk - 1] * buf[kk - 1]
        cost = (1 - kk) * (1 - kk) + rest
        if cost < best:
            best = cost
    return best


@njit(cache=True)
def _refresh(q, cov, pc, dplus, dminus, nact, buf):
    # cost change of player q if one more / one fewer set covered each action
    pc[q] = player_cost(cov, q, nact, buf)
    for a in range(nact[q]):
        cov[q, a] += 1
        dplus[q, a] = player_cost(cov, q, nact, buf) - pc[q]
        cov[q, a] -= 1
        if cov[q, a] > 0:
            cov[q, a] -= 1
            dminus[q, a] = player_cost(cov, q, nact, buf) - pc[q]
            cov[q, a] += 1


@njit(cache=True)
def _sel_delta(k, x, dplus, dminus, mem_ptr, mem_q, mem_a, n, total):
    d = 0
    if x[k] == 0:
        for t in range(mem_ptr[k], mem_ptr[k + 1]):
            d += dplus[mem_q[t], mem_a[t]]
        return d + 2 * (total - n) + 1
    for t in range(mem_ptr[k], mem_ptr[k + 1]):
        d += dminus[mem_q[t], mem_a[t]]
    return d - 2 * (total - n) + 1


@njit(cache=True)
def _sel_apply(k, x, cov, pc, dplus, dminus, mem_ptr, mem_q, mem_a, nact, buf):
    s = 1 if x[k] == 0 else -1
    x[k] = 1 - x[k]
    for t in range(mem_ptr[k], mem_ptr[k + 1]):
        q = mem_q[t]
        cov[q, mem_a[t]] += s
        _refresh(q, cov, pc, dplus, dminus, nact, buf)
    return s


@njit(cache=True)
def _sel_init(x, mem_ptr, mem_q, mem_a, nact, n, amax):
    cov = np.zeros((n, amax), dtype=np.int64)
    total = 0
    for k in range(x.size):
        if x[k]:
            total += 1
            for t in range(mem_ptr[k], mem_ptr[k + 1]):
                cov[mem_q[t], mem_a[t]] += 1
    buf = np.zeros(amax + 1, dtype=np.int64)
    pc = np.zeros(n, dtype=np.int64)
    dplus = np.zeros((n, amax), dtype=np.int64)
    dminus = np.zeros((n, amax), dtype=np.int64)
    e = (n - total) * (n - total)
    for q in range(n):
        _refresh(q, cov, pc, dplus, dminus, nact, buf)
        e += pc[q]
    return cov, pc, dplus, dminus, buf, total, e


@njit(cache=True)
def anneal_selectors(mem_ptr, mem_q, mem_a, nact, n, weight, betas, seed, keep, keys):
    """Metropolis run over single selector flips; energies in units of ``weight``."""
    np.random.seed(seed)
    v = mem_ptr.size - 1
    amax = 1
    for q in range(n):
        amax = max(amax, nact[q])
    x = np.zeros(v, dtype=np.int8)
    for i in range(v):
        if np.random.random() < 0.5:
            x[i] = 1
    cov, pc, dplus, dminus, buf, total, e = _sel_init(x, mem_ptr, mem_q, mem_a, nact, n, amax)
    hsh = 0
    for i in range(v):
        if x[i]:
            hsh ^= keys[i]
    store = np.zeros((keep, v), dtype=np.int8)
    hashes = np.zeros(keep, dtype=np.int64)
    store[0, :] = x
    hashes[0] = hsh
    count = 1
    best = e
    for beta in betas:
        for k in range(v):
            d = _sel_delta(k, x, dplus, dminus, mem_ptr, mem_q, mem_a, n, total)
            if d > 0:
                z = beta * weight * d
                if z > 50.0 or np.random.random() >= np.exp(-z):
                    continue
            total += _sel_apply(k, x, cov, pc, dplus, dminus, mem_ptr, mem_q, mem_a, nact, buf)
            hsh ^= keys[k]
            e += d
            if e < best:
                best = e
                count = 0
                count = _remember(x, hsh, hashes, store, count)
            elif e == best:
                count = _remember(x, hsh, hashes, store, count)
    return x, store[:count].copy(), best


@njit(cache=True)
def tabu_selectors(mem_ptr, mem_q, mem_a, nact, n, x0, tenure, stall_limit, seed, keep, keys):
    """Tabu search over selector flips (see :func:`anneal_selectors`)."""
    np.random.seed(seed)
    v = mem_ptr.size - 1
    amax = 1
    for q in range(n):
        amax = max(amax, nact[q])
    x = x0.copy()
    cov, pc, dplus, dminus, buf, total, e = _sel_init(x, mem_ptr, mem_q, mem_a, nact, n, amax)
    hsh = 0
    for i in range(v):
        if x[i]:
            hsh ^= keys[i]
    store = np.zeros((keep, v), dtype=np.int8)
    hashes = np.zeros(keep, dtype=np.int64)
    store[0, :] = x
    hashes[0] = hsh
    count = 1
    best = e
    tabu_until = np.zeros(v, dtype=np.int64)
    it = 0
    stall = 0
    while stall < stall_limit and v > 0:
        it += 1
        pick = -1
        pick_d = 0
        n_ties = 0
        for k in range(v):
            d = _sel_delta(k, x, dplus, dminus, mem_ptr, mem_q, mem_a, n, total)
            if tabu_until[k] > it and e + d >= best:
                continue
            if pick < 0 or d < pick_d:
                pick = k
                pick_d = d
                n_ties = 1
            elif d == pick_d:
                n_ties += 1
                if np.random.randint(0, n_ties) == 0:
                    pick = k
        if pick < 0:
            break
        total += _sel_apply(pick, x, cov, pc, dplus, dminus, mem_ptr, mem_q, mem_a, nact, buf)
        e += pick_d
        hsh ^= keys[pick]
        tabu_until[pick] = it + tenure + 1
        if e < best:
            best = e
            stall = 0
            count = 0
            count = _remember(x, hsh, hashes, store, count)
        else:
            stall += 1
            if e == best:
                count = _remember(x, hsh, hashes, store, count)
    return x, store[:count].copy(), best
