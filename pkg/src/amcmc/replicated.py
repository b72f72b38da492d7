"""Vectorized Monte Carlo over independent replicas of finite-state runs.

For finite spaces the resampling reservoir only enters through per-state visit
counts, so R replicas advance in lockstep with (R, S) count matrices instead of
R separate reservoirs.  Sampling a past auxiliary state uniformly (EE) or
weight-proportionally (IRMCMC) is a categorical draw over those counts, which
is exactly the law of drawing an index from the stored path.
"""
from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .models import FiniteModel
from .samplers import Algorithm


def _rng_for(seed: int, purpose: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                        spawn_key=(purpose,)))


def _row_sample(cum_rows: np.ndarray, states: np.ndarray, u: np.ndarray) -> np.ndarray:
    c = cum_rows[states]
    idx = (c <= u[:, None]).sum(axis=1)
    return np.minimum(idx, cum_rows.shape[1] - 1)


def _count_sample(weights: np.ndarray, u: np.ndarray) -> np.ndarray:
    cum = np.cumsum(weights, axis=1)
    idx = (cum <= (u * cum[:, -1])[:, None]).sum(axis=1)
    return np.minimum(idx, weights.shape[1] - 1)


def run_replicas(model: FiniteModel, algorithm: Algorithm, eps: float,
                 x0: int, y0: int, n_max: int, checkpoints, replicas: int,
                 seed: int, f_values=None):
    """Advance R independent chains; collect X-marginal counts at checkpoints.

    Returns ``(marginal_counts, partial_sums)`` where ``marginal_counts`` maps
    checkpoint n to a length-S count vector and ``partial_sums`` (when
    ``f_values`` is given) maps n to the per-replica sums of f over X_1..X_n.
    """
    cps = sorted(set(int(c) for c in checkpoints))
    if not cps or cps[-1] > n_max or cps[0] < 1:
        raise ConfigError("checkpoints must lie in [1, n_max]")
    rng = _rng_for(seed)
    R, S = replicas, model.size
    P_cum = np.cumsum(model.kernel.rows, axis=1)
    PY_cum = np.cumsum(model.aux_kernel.rows, axis=1)
    wv = model.w.values
    x = np.full(R, x0, dtype=np.int64)
    y = np.full(R, y0, dtype=np.int64)
    counts = np.zeros((R, S))
    rows_idx = np.arange(R)
    fv = None if f_values is None else np.asarray(f_values, dtype=float)
    sums = None if fv is None else np.zeros(R)
    marg, sums_at = {}, {}
    cp_set = set(cps)
    for n in range(1, n_max + 1):
        take_eps = rng.random(R) < eps
        x_base = _row_sample(P_cum, x, rng.random(R))
        if algorithm is Algorithm.IRMCMC:
            if n == 1:
                x_res = np.full(R, y0, dtype=np.int64)
            else:
                x_res = _count_sample(counts * wv[None, :], rng.random(R))
            x = np.where(take_eps, x_res, x_base)
        elif algorithm is Algorithm.EE:
            if n == 1:
                x = np.where(take_eps, x, x_base)  # nothing to propose yet
            else:
                z = _count_sample(counts, rng.random(R))
                accept = rng.random(R) * wv[x] < wv[z]
                x = np.where(take_eps, np.where(accept, z, x), x_base)
        elif algorithm is Algorithm.MODIFIED_EE:
            accept = rng.random(R) * wv[x] < wv[y]
            x = np.where(take_eps, np.where(accept, y, x), x_base)
        else:
            raise ConfigError(f"unknown algorithm {algorithm}")
        y = _row_sample(PY_cum, y, rng.random(R))
        counts[rows_idx, y] += 1.0
        if sums is not None:
            sums += fv[x]
        if n in cp_set:
            marg[n] = np.bincount(x, minlength=S)
            if sums is not None:
                sums_at[n] = sums.copy()
    return marg, sums_at


def run_base_replicas(kernel_rows: np.ndarray, x0: int, n_max: int,
                      checkpoints, replicas: int, seed: int):
    """Plain Markov chain replicas (the eps = 0 degenerate case)."""
    rng = _rng_for(seed)
    cum = np.cumsum(kernel_rows, axis=1)
    x = np.full(replicas, x0, dtype=np.int64)
    marg = {}
    cp_set = set(int(c) for c in checkpoints)
    for n in range(1, max(cp_set) + 1):
        x = _row_sample(cum, x, rng.random(replicas))
        if n in cp_set:
            marg[n] = np.bincount(x, minlength=kernel_rows.shape[0])
    return marg


def run_ladder_replicas(kernels, weight_values, eps: float, x0s, n_max: int,
                        checkpoints, replicas: int, seed: int):
    """Lockstep multiple-IRMCMC replicas on a shared finite space.

    ``kernels[l]`` is the row matrix for level l; ``weight_values[l-1]``
    tabulates w_l.  Returns per-level marginal counts at each checkpoint.
    """
    rng = _rng_for(seed)
    m = len(kernels) - 1
    S = kernels[0].shape[0]
    R = replicas
    cums = [np.cumsum(k, axis=1) for k in kernels]
    xs = [np.full(R, x0, dtype=np.int64) for x0 in x0s]
    counts = [np.zeros((R, S)) for _ in range(m)]
    rows_idx = np.arange(R)
    cp_set = set(int(c) for c in checkpoints)
    marg = {lvl: {} for lvl in range(m + 1)}
    for n in range(1, n_max + 1):
        new = [_row_sample(cums[0], xs[0], rng.random(R))]
        for lvl in range(1, m + 1):
            take_eps = rng.random(R) < eps
            base = _row_sample(cums[lvl], xs[lvl], rng.random(R))
            if n == 1:
                res = np.full(R, x0s[lvl - 1], dtype=np.int64)
            else:
                res = _count_sample(counts[lvl - 1] * weight_values[lvl - 1][None, :],
                                    rng.random(R))
            new.append(np.where(take_eps, res, base))
        for lvl in range(1, m + 1):
            counts[lvl - 1][rows_idx, new[lvl - 1]] += 1.0
        xs = new
        if n in cp_set:
            for lvl in range(m + 1):
                marg[lvl][n] = np.bincount(xs[lvl], minlength=S)
    return marg


def aux_f_sums(P_Y, y0: int, n: int, replicas: int, f_values: np.ndarray,
               seed: int) -> np.ndarray:
    """Per-replica sums of f over one auxiliary path of length n."""
    rng = _rng_for(seed, purpose=1)
    rows = P_Y.rows if hasattr(P_Y, "rows") else np.asarray(P_Y)
    cum = np.cumsum(rows, axis=1)
    y = np.full(replicas, y0, dtype=np.int64)
    fv = np.asarray(f_values, dtype=float)
    sums = np.zeros(replicas)
    for _ in range(n):
        y = _row_sample(cum, y, rng.random(replicas))
        sums += fv[y]
    return sums
