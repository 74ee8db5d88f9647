"""Stochastic jump-process sampler over the master-equation generator.

Independent oracle for `evolve`: exact simulation of the birth-death chain
(exponential waiting times, categorical jump choice).  Trajectories run in
fixed-size blocks; block b draws from a counter-based Philox stream keyed by
(seed, b), so results are reproducible for a given seed and mergeable in
trajectory order regardless of how blocks are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .master import DiscreteDistribution, RateTable, transition_rates
from .model import ModelParams

__all__ = ["TrajectoryEnsemble", "sample_trajectories"]

_BLOCK = 4096


@dataclass
class TrajectoryEnsemble:
    histogram: DiscreteDistribution
    final_states: np.ndarray       # grid index per trajectory, in launch order
    final_side: np.ndarray         # sign of m_final - m_repel per trajectory
    up_fraction: float
    n_traj: int
    seed: int


def _simulate_block(rng: np.random.Generator, k0: np.ndarray, up: np.ndarray,
                    down: np.ndarray, t_end: float) -> np.ndarray:
    """Advance one block of walkers to t_end; returns final grid indices."""
    k = k0.copy()
    t = np.zeros(k.shape[0])
    active = np.ones(k.shape[0], dtype=bool)
    while active.any():
        idx = np.flatnonzero(active)
        r_up = up[k[idx]]
        total = r_up + down[k[idx]]
        stuck = total <= 0.0
        if stuck.any():  # zero total rate: frozen for good
            active[idx[stuck]] = False
            idx, r_up, total = idx[~stuck], r_up[~stuck], total[~stuck]
            if idx.size == 0:
                break
        wait = rng.standard_exponential(idx.size) / total
        t_new = t[idx] + wait
        done = t_new >= t_end
        active[idx[done]] = False
        alive = ~done
        idx = idx[alive]
        if idx.size:
            t[idx] = t_new[alive]
            go_up = rng.random(idx.size) < (r_up[alive] / total[alive])
            k[idx] += np.where(go_up, 1, -1)
    return k


def sample_trajectories(params: ModelParams, n_traj: int, t_end: float,
                        seed: int = 0, mode: str = "short-memory",
                        rates: RateTable | None = None,
                        init: DiscreteDistribution | None = None,
                        m_repel: float | None = None) -> TrajectoryEnsemble:
    """Sample n_traj jump-process trajectories up to t_end.

    Short-memory (time-homogeneous rates) only.  Initial states are drawn
    from `init` (default: exact paramagnet).  Deterministic for a fixed seed.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    if mode != "short-memory":
        raise ValueError("trajectory sampling requires time-homogeneous rates")
    if rates is None:
        rates = transition_rates(params, mode="short-memory")
    if init is None:
        from .master import initial_distribution
        init = initial_distribution(params, "exact-paramagnet")
    if m_repel is None:
        if params.temp_bath < params.coupling_j:
            m_repel = -params.g_eff / (params.coupling_j - params.temp_bath)
        else:
            m_repel = 0.0

    n = params.n_spins
    up, down = rates.up, rates.down
    cdf = np.cumsum(init.weights)
    cdf /= cdf[-1]

    finals = np.empty(n_traj, dtype=np.int64)
    for b, start in enumerate(range(0, n_traj, _BLOCK)):
        count = min(_BLOCK, n_traj - start)
        rng = np.random.Generator(np.random.Philox(key=np.array([seed, b],
                                                                dtype=np.uint64)))
        # always simulate a full block so trajectory i is the same walker no
        # matter how many trajectories were requested in total
        k0 = np.searchsorted(cdf, rng.random(_BLOCK), side="left")
        finals[start:start + count] = _simulate_block(rng, k0, up, down,
                                                      t_end)[:count]

    hist = np.bincount(finals, minlength=n + 1).astype(float)
    hist /= n_traj
    grid = (2.0 * np.arange(n + 1) - n) / n
    m_final = grid[finals]
    side = np.sign(m_final - m_repel)
    up_fraction = float((side > 0).sum() + 0.5 * (side == 0).sum()) / n_traj
    return TrajectoryEnsemble(
        histogram=DiscreteDistribution(n_spins=n, weights=hist, time=t_end),
        final_states=finals,
        final_side=side,
        up_fraction=up_fraction,
        n_traj=n_traj,
        seed=seed,
    )
