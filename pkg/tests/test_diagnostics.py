import math

import numpy as np
import pytest

from levyglue.approximation import build_exceptional_sets, glued_approx_symbol
from levyglue.diagnostics import (
    GeneratorCache,
    InterpolationBudgetError,
    WeightDesign,
    check_exceptional_sets,
    check_locality,
    check_symbol_conditions,
    default_designs,
    exit_probability_check,
    hartman_wintner,
    martingale_defect,
    martingale_defects,
    transition_density_bound,
)
from levyglue.levy_core import LevyTriplet, NoJumps, StabilityIndexFn, SymbolFn, levy_symbol
from levyglue.operators import Bump, GluedApproxSpec, GluedSpec, LevySpec, StableLikeSpec, apply_generator
from levyglue.simulation import simulate_glued_sde, simulate_levy_paths, simulate_stable_like

LEFT, RIGHT = LevyTriplet.stable(1.2), LevyTriplet.stable(1.8)


def _xfree(func, name):
    return SymbolFn(func, 1.0, True, True, (), None, name)


def test_glued_family_conditions():
    syms = [glued_approx_symbol(LEFT, RIGHT, n) for n in (1, 3, 10)]
    reps = {r.condition: r for r in check_symbol_conditions(syms)}
    assert reps["A1"].value == 0.0 and reps["A1"].passed
    assert reps["A2"].passed
    assert reps["A3"].passed
    ratios = dict(zip(reps["A4"].details["shells"], reps["A4"].details["min_ratio"]))
    assert ratios[1e3] > ratios[1e2]
    assert reps["A4"].passed


def test_gaussian_growth_constant():
    q = _xfree(lambda x, xi: np.asarray(xi, dtype=float) ** 2 + 0j, "xi^2")
    a2 = [r for r in check_symbol_conditions([q]) if r.condition == "A2"][0]
    assert a2.value == pytest.approx(1.0, abs=1e-5)


def test_hartman_wintner_verdicts():
    assert hartman_wintner(_xfree(lambda x, xi: np.abs(xi) ** 0.5 + 0j, "sqrt")).verdict == "pass"
    assert hartman_wintner(_xfree(lambda x, xi: np.log1p(np.abs(xi)) + 0j, "log")).verdict == "fail"
    sq = hartman_wintner(_xfree(lambda x, xi: np.asarray(xi, dtype=float) ** 2 + 0j, "sq"))
    assert sq.verdict == "pass"
    lo, hi = sq.details["shell_edges"][-2:]
    assert sq.details["ratios"][-1] == pytest.approx(lo**2 / math.log1p(lo), rel=1e-12)


def test_hartman_wintner_needs_levy_symbol():
    with pytest.raises(ValueError):
        hartman_wintner(glued_approx_symbol(LEFT, RIGHT, 2))


def test_exit_pure_drift():
    t = LevyTriplet(1.0, 0.0, NoJumps())
    ens = simulate_levy_paths(t, 0.0, 0.5, 0.01, 200, seed=1)
    r = exit_probability_check(ens, levy_symbol(t), 1.0, 0.5)
    assert r.value == 0.0 and r.threshold >= 0 and r.verdict == "pass"


def test_exit_cauchy():
    t = LevyTriplet.stable(1.0)
    ens = simulate_levy_paths(t, 0.0, 0.1, 1e-3, 10_000, seed=2)
    r = exit_probability_check(ens, levy_symbol(t), 10.0, 0.1)
    assert r.details["C"] == pytest.approx(0.5, rel=1e-6)
    assert r.value <= r.threshold + 3 * math.sqrt(r.value * (1 - r.value) / 10_000)
    assert r.verdict in ("pass", "warn")


def test_exit_brownian_far_below_bound():
    t = LevyTriplet(0.0, 1.0, NoJumps())
    ens = simulate_levy_paths(t, 0.0, 1.0, 0.01, 10_000, seed=3)
    r = exit_probability_check(ens, levy_symbol(t), 6.0, 1.0)
    assert r.value <= 1e-3 < r.threshold and r.verdict == "pass"


def test_exit_needs_point_start():
    ens = simulate_stable_like(1.5, {"kind": "uniform", "low": 0, "high": 1}, 0.1, 0.01, 50, seed=4)
    with pytest.raises(ValueError):
        exit_probability_check(ens, levy_symbol(LevyTriplet.stable(1.5)), 1.0, 0.1)


def test_density_bound_cauchy():
    b = transition_density_bound([levy_symbol(LevyTriplet.stable(1.0))], 1.0, exact=1 / math.pi)
    assert abs(b.value - 8 / math.pi) <= 1e-10
    assert b.holds


def test_density_bound_gaussian():
    # int exp(-xi^2/32) d xi / (4 pi) = sqrt(2/pi); the exact density at 0 is 1/sqrt(2 pi)
    b = transition_density_bound([levy_symbol(LevyTriplet(0.0, 1.0, NoJumps()))], 1.0, exact=1 / math.sqrt(2 * math.pi))
    assert abs(b.value - math.sqrt(2 / math.pi)) <= 1e-10
    assert b.holds


def test_density_bound_glued_family_finite():
    b = transition_density_bound([glued_approx_symbol(LEFT, RIGHT, n) for n in (1, 2, 5)], 1.0)
    assert math.isfinite(b.value) and b.value > 0
    assert min(g for _, g in b.envelope) >= 1.0


def test_generator_cache_accuracy():
    spec = GluedSpec(LEFT, RIGHT)
    f = Bump(0.3, 0.6)
    cache = GeneratorCache(spec, f, -50.0, 50.0)
    x = np.random.default_rng(5).uniform(-50, 50, 400)
    x = np.concatenate([x, [0.0, 1e-12, -1e-12]])
    assert np.max(np.abs(cache(x) - apply_generator(spec, f, x))) <= 1e-6
    with pytest.raises(ValueError):
        cache(np.array([60.0]))


def test_generator_cache_budget_error():
    with pytest.raises(InterpolationBudgetError):
        GeneratorCache(LevySpec(LEFT), Bump(0.0, 1.0), -5, 5, budget=1e-16, density=4, max_refine=0)


def test_martingale_pure_drift():
    t = LevyTriplet(1.0, 0.0, NoJumps())
    ens = simulate_levy_paths(t, {"kind": "uniform", "low": -1.5, "high": 0.5}, 0.5, 0.01, 2000, seed=6)
    r = martingale_defect(ens, LevySpec(t), Bump(0.0, 1.0), [], (0.0, 0.5))
    assert abs(r.defect) <= 1e-5


def test_martingale_small_ensembles():
    T = 0.2
    ens = simulate_stable_like(1.5, 0.0, T, 1e-3, 20_000, seed=7)
    fs = [Bump(0.0, 1.0), Bump(0.3, 0.6)]
    good = martingale_defects(ens, StableLikeSpec(StabilityIndexFn.constant(1.5)), fs, default_designs(T))
    assert all(abs(r.z) <= 3 for r in good)
    bad = martingale_defects(ens, StableLikeSpec(StabilityIndexFn.constant(1.0)), fs, default_designs(T))
    assert max(abs(r.z) for r in bad) > 5


def test_martingale_rejects_future_weights():
    ens = simulate_glued_sde(LEFT, RIGHT, 0.0, 0.1, 0.01, 20, seed=8)
    d = WeightDesign("late", 0.0, 0.1, ((0.05, lambda x: x),), ("x",))
    with pytest.raises(ValueError):
        martingale_defects(ens, GluedSpec(LEFT, RIGHT), [Bump(0.0, 1.0)], [d])


def test_exceptional_set_check():
    r = check_exceptional_sets(build_exceptional_sets([-1.0, 0.0, 1.0], 10))[0]
    assert r.condition == "B1" and r.passed
    assert r.details["max_measure_ratio"] <= 1.0 + 1e-12


def test_locality_report():
    r = check_locality(GluedApproxSpec(LEFT, RIGHT, 3), Bump(0.0, 1.0), [2, 3])
    assert r.passed and r.value <= 1e-8


def test_report_records_are_plain():
    r = check_symbol_conditions([levy_symbol(LEFT)])[0]
    rec = r.to_record()
    assert set(rec) >= {"condition", "value", "threshold", "verdict", "grid", "details"}
