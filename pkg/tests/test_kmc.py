import math

import numpy as np
import pytest

from magdot.kmc import sample_trajectories
from magdot.master import RateTable, evolve, initial_distribution
from magdot.model import derived_scales

from conftest import small_params


def zero_rates(n):
    m = (2.0 * np.arange(n + 1) - n) / n
    z = np.zeros(n + 1)
    return RateTable(m=m, up=z.copy(), down=z.copy(),
                     gain_above=z.copy(), gain_below=z.copy())


def test_frozen_walkers_with_zero_rates():
    p = small_params(n=20)
    ens = sample_trajectories(p, 50, t_end=100.0, seed=0, rates=zero_rates(20))
    init = initial_distribution(p, "exact-paramagnet")
    # nobody moves: histogram is a sample of the initial distribution only
    ens2 = sample_trajectories(p, 50, t_end=0.0, seed=0, rates=zero_rates(20))
    assert np.array_equal(ens.final_states, ens2.final_states)


def test_deterministic_under_seed():
    p = small_params(n=50)
    th = derived_scales(p).theta
    a = sample_trajectories(p, 500, 0.5 * th, seed=42)
    b = sample_trajectories(p, 500, 0.5 * th, seed=42)
    c = sample_trajectories(p, 500, 0.5 * th, seed=43)
    assert np.array_equal(a.final_states, b.final_states)
    assert not np.array_equal(a.final_states, c.final_states)


def test_block_partition_invariance_of_prefix():
    # first block of trajectories is independent of how many follow
    p = small_params(n=50)
    th = derived_scales(p).theta
    a = sample_trajectories(p, 600, 0.3 * th, seed=7)
    b = sample_trajectories(p, 5000, 0.3 * th, seed=7)
    assert np.array_equal(a.final_states[:600], b.final_states[:600])


def test_histogram_matches_master_equation():
    p = small_params(n=100, g=0.158113883008419)  # keeps lambda at ~1.89
    th = derived_scales(p).theta
    res = evolve(initial_distribution(p, "exact-paramagnet"), p, 2 * th)
    ens = sample_trajectories(p, 20_000, 2 * th, seed=11)
    l1 = np.abs(ens.histogram.weights - res.final.weights).sum()
    assert l1 < 0.05  # ~3x the multinomial noise floor at this sample size


def test_symmetric_split_fraction():
    p = small_params(n=100, g=0.0)
    th = derived_scales(p).theta
    n = 20_000
    ens = sample_trajectories(p, n, 2 * th, seed=5)
    sigma = 0.5 / math.sqrt(n)
    assert abs(ens.up_fraction - 0.5) < 3 * sigma


def test_input_validation():
    p = small_params(n=20)
    with pytest.raises(ValueError):
        sample_trajectories(p, 0, 1.0)
    with pytest.raises(ValueError):
        sample_trajectories(p, 10, 1.0, mode="full-memory")
