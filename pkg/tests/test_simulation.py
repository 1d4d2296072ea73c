import math
import struct

import numpy as np
import pytest
from scipy import stats

from levyglue.levy_core import AtomicJumps, LevyTriplet, NoJumps, StableJumps
from levyglue.simulation import (
    LevyIncrementSampler,
    PathEnsemble,
    block_rng,
    empirical_cf,
    sample_stable,
    simulate_glued_sde,
    simulate_levy_increments,
    simulate_levy_paths,
    simulate_stable_like,
    stable_from_uniforms,
)


def test_cms_cauchy_is_tangent():
    v = np.linspace(-1.5, 1.5, 7)
    assert np.array_equal(stable_from_uniforms(1.0, v, np.ones(7)), np.tan(v))


def test_cms_gaussian_limit():
    # alpha = 2: 2 sin(V) sqrt(W) with V ~ U(-pi/2, pi/2), W ~ Exp(1)
    v, w = np.array([0.3, -1.0]), np.array([0.7, 2.0])
    assert np.allclose(stable_from_uniforms(2.0, v, w), 2 * np.sin(v) * np.sqrt(w), rtol=1e-14)


def test_gaussian_variance():
    x = sample_stable(2.0, 100_000, seed=1)
    se = 2.0 * math.sqrt(2.0 / x.size)
    assert abs(x.var() - 2.0) <= 4 * se


def test_cauchy_median_and_cf():
    x = sample_stable(1.0, 100_000, seed=2)
    assert abs(np.median(x)) <= 0.02
    assert abs(empirical_cf(x, [1.0])[0] - math.exp(-1.0)) <= 3 / math.sqrt(x.size)


@pytest.mark.parametrize("alpha", [0.8, 1.5])
def test_stable_cf(alpha):
    x = sample_stable(alpha, 100_000, seed=3)
    xi = np.array([0.5, 1.0, 2.0])
    assert np.max(np.abs(empirical_cf(x, xi) - np.exp(-np.abs(xi) ** alpha))) <= 0.01


def test_brownian_increments():
    s = LevyIncrementSampler(LevyTriplet(0.0, 1.0, NoJumps()))
    inc = simulate_levy_increments(s, 0.01, 4, 50_000, seed=4)
    v = inc.var()
    assert abs(v - 0.01) <= 4 * 0.01 * math.sqrt(2 / inc.size)


def test_exact_stable_increments_cf():
    s = LevyIncrementSampler(LevyTriplet.stable(1.3))
    inc = simulate_levy_increments(s, 0.1, 1, 100_000, seed=5)[:, 0]
    xi = np.array([0.5, 1.0, 2.0, 4.0])
    assert np.max(np.abs(empirical_cf(inc, xi) - np.exp(-0.1 * xi**1.3))) <= 0.01


def test_compound_poisson_jump_count():
    # unit jumps at rate 2; the compensator removes 2 per unit time because |1| <= 1
    s = LevyIncrementSampler(LevyTriplet(0.0, 0.0, AtomicJumps((1.0,), (2.0,))))
    inc = simulate_levy_increments(s, 1.0, 1, 20_000, seed=6)[:, 0]
    counts = inc + 2.0
    assert np.allclose(counts, np.round(counts))
    assert abs(counts.mean() - 2.0) <= 4 * math.sqrt(2.0 / counts.size)


def test_truncated_matches_exact_stable():
    t = LevyTriplet.stable(1.5)
    exact = simulate_levy_increments(LevyIncrementSampler(t), 0.1, 1, 10_000, seed=7)[:, 0]
    trunc = simulate_levy_increments(LevyIncrementSampler(t, exact_stable=False), 0.1, 1, 10_000, seed=8)[:, 0]
    assert stats.ks_2samp(exact, trunc).statistic <= 0.02


def test_glued_equal_sides_match_single_levy():
    t = LevyTriplet(0.2, 0.5, StableJumps(1.4))
    single = simulate_levy_paths(t, 0.0, 0.5, 0.01, 10_000, seed=9).at(0.5)
    glued = simulate_glued_sde(t, t, 0.0, 0.5, 0.01, 10_000, seed=10).at(0.5)
    assert stats.ks_2samp(single, glued).statistic <= 0.02


def test_pure_drift_is_exact():
    t = LevyTriplet(1.0, 0.0, NoJumps())
    ens = simulate_glued_sde(t, t, 0.0, 1.0, 0.001, 10, seed=0)
    assert np.allclose(ens.at(1.0), 1.0, rtol=0, atol=1e-12)


def test_drift_switching_sticks_at_threshold():
    # left dynamics push up, right dynamics push down
    up, down = LevyTriplet(1.0, 0.0, NoJumps()), LevyTriplet(-1.0, 0.0, NoJumps())
    dt = 1e-3
    ens = simulate_glued_sde(up, down, -0.5, 1.0, dt, 4, seed=0)
    x = ens.paths[0]
    hit = ens.index_of(0.5)
    assert np.allclose(x[: hit + 1], -0.5 + ens.times[: hit + 1], atol=1e-12)
    assert np.all(np.abs(x[hit:]) <= dt + 1e-12)


def test_stable_like_constant_index_cf():
    ens = simulate_stable_like(1.5, 0.0, 0.5, 0.05, 100_000, seed=11)
    xi = np.array([0.5, 1.0, 2.0, 4.0])
    cf = empirical_cf(ens.at(0.5) - ens.x0, xi)
    assert np.max(np.abs(cf - np.exp(-0.5 * xi**1.5))) <= 0.01


def test_stable_like_gaussian_scaling():
    ens = simulate_stable_like(2.0, 0.0, 0.4, 0.04, 40_000, seed=12)
    v = ens.at(0.4).var()
    assert abs(v - 0.8) <= 4 * 0.8 * math.sqrt(2 / ens.n_paths)


def test_blocks_make_runs_prefix_stable():
    small = simulate_stable_like(1.5, 0.0, 0.1, 0.01, 100, seed=13)
    large = simulate_stable_like(1.5, 0.0, 0.1, 0.01, 3000, seed=13)
    assert np.array_equal(small.paths, large.paths[:100])


def test_threads_do_not_change_paths():
    a = simulate_glued_sde(LevyTriplet.stable(1.2), LevyTriplet.stable(1.8), 0.0, 0.1, 0.01, 3000, seed=14)
    b = simulate_glued_sde(LevyTriplet.stable(1.2), LevyTriplet.stable(1.8), 0.0, 0.1, 0.01, 3000, seed=14, threads=3)
    assert np.array_equal(a.paths, b.paths)


def test_block_rng_streams_differ():
    a = block_rng(1, 0, 0).random(4)
    assert not np.array_equal(a, block_rng(1, 1, 0).random(4))
    assert not np.array_equal(a, block_rng(1, 0, 1).random(4))
    assert np.array_equal(a, block_rng(1, 0, 0).random(4))


def test_random_initial_values():
    ens = simulate_stable_like(1.5, {"kind": "uniform", "low": -1.0, "high": 1.0}, 0.1, 0.01, 2000, seed=15)
    assert ens.x0.min() >= -1.0 and ens.x0.max() <= 1.0 and np.unique(ens.x0).size == 2000


def test_binary_dump_layout(tmp_path):
    ens = simulate_stable_like(1.5, 0.25, 0.03, 0.01, 5, seed=16)
    p = tmp_path / "e.bin"
    ens.write_binary(p)
    raw = p.read_bytes()
    head = struct.unpack("<8sIQQdQ", raw[:44])
    assert head == (b"LEVYPTH\x00", 1, 3, 5, 0.01, 16)
    assert len(raw) == 44 + 8 * 5 * 4
    assert np.array_equal(np.frombuffer(raw[44:], "<f8").reshape(5, 4), ens.paths)
    back = PathEnsemble.read_binary(p)
    assert np.array_equal(back.paths, ens.paths) and back.seed == 16


def test_csv_long_format(tmp_path):
    ens = simulate_stable_like(1.5, 0.0, 0.02, 0.01, 3, seed=17)
    p = tmp_path / "e.csv"
    ens.write_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "path_id,t,x"
    assert len(lines) == 1 + 3 * 3
    i, t, x = lines[5].split(",")
    assert int(i) == 1 and float(t) == ens.times[1] and float(x) == ens.paths[1, 1]


def test_bad_grid_time():
    ens = simulate_stable_like(1.5, 0.0, 0.02, 0.01, 3, seed=18)
    with pytest.raises(ValueError):
        ens.at(0.015)
