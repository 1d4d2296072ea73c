import math

import mpmath as mp
import numpy as np
import pytest

from levyglue.levy_core import (
    AtomicJumps,
    CompoundPoissonJumps,
    InvalidMeasureError,
    LevyTriplet,
    NoJumps,
    StabilityIndexFn,
    StableJumps,
    TemperedStableJumps,
    eval_levy_khinchine,
    jump_measure_from_dict,
    levy_khinchine_quadrature,
    levy_symbol,
    stable_like_symbol,
    stable_normalizer,
)

# Gamma(1 + a) sin(pi a / 2) / pi at 30 digits, frozen from mpmath
H_ORACLE = {
    0.5: 0.19947114020071633897,
    0.8: 0.28195845299999038903,
    1.0: 0.31830988618379067154,
    1.2: 0.33354942991224815367,
    1.5: 0.29920671030107450845,
    1.8: 0.16490493881830266487,
    1.99: 0.0099079344762812619836,
}


@pytest.mark.parametrize("alpha", sorted(H_ORACLE))
def test_normalizer_frozen(alpha):
    assert stable_normalizer(alpha) == pytest.approx(H_ORACLE[alpha], rel=1e-12)


@pytest.mark.parametrize("alpha", [0.3, 0.7, 1.3, 1.7])
def test_normalizer_mpmath(alpha):
    a = mp.mpf(alpha)
    ref = float(mp.gamma(1 + a) * mp.sin(mp.pi * a / 2) / mp.pi)
    assert abs(stable_normalizer(alpha) - ref) <= 1e-10


def test_normalizer_cauchy_and_near_two():
    assert stable_normalizer(1.0) == pytest.approx(1 / math.pi, abs=1e-15)
    h = stable_normalizer(1.99)
    assert math.isfinite(h) and h > 0


def test_normalizer_defining_integral_half():
    # 2 h int_0^inf (1 - cos y) y^{-3/2} dy = 1, split so the oscillatory part is integrable
    mp.mp.dps = 25
    a = mp.mpf("0.5")
    body = mp.quad(lambda y: (1 - mp.cos(y)) / y ** (1 + a), [0, 1])
    tail = 1 / a - mp.quadosc(lambda y: mp.cos(y) / y ** (1 + a), [1, mp.inf], omega=1)
    assert abs(2 * float(body + tail) * stable_normalizer(0.5) - 1.0) <= 1e-10


@pytest.mark.parametrize("alpha", [0.0, -0.1, 2.0, 2.5])
def test_normalizer_rejects(alpha):
    with pytest.raises(ValueError):
        stable_normalizer(alpha)


def test_gaussian_and_drift_exponents():
    assert eval_levy_khinchine(LevyTriplet(0.0, 1.0, NoJumps()), 2.0) == pytest.approx(2.0 + 0j)
    assert eval_levy_khinchine(LevyTriplet(1.0, 0.0, NoJumps()), 3.0) == pytest.approx(-3j)


def test_stable_exponent():
    q = eval_levy_khinchine(LevyTriplet.stable(1.5), 2.0)
    assert q == pytest.approx(2.0**1.5, rel=1e-14)
    assert complex(levy_khinchine_quadrature(LevyTriplet.stable(1.5), 2.0)) == pytest.approx(2.0**1.5, rel=1e-8)


JUMPS = [
    StableJumps(0.7),
    StableJumps(1.5, scale=0.4),
    TemperedStableJumps(1.3, 2.0),
    TemperedStableJumps(0.5, 0.5, scale=3.0),
    CompoundPoissonJumps(2.0, 0.3, 0.5),
    CompoundPoissonJumps(1.5, 1.0, 0.0),
    AtomicJumps((-2.0, 0.5, 1.5), (0.3, 1.0, 0.2)),
]


@pytest.mark.parametrize("jumps", JUMPS, ids=lambda j: j.kind)
def test_closed_form_matches_quadrature(jumps):
    t = LevyTriplet(0.4, 0.3, jumps)
    for xi in (-7.0, -0.3, 0.9, 4.0, 25.0):
        ref = complex(levy_khinchine_quadrature(t, xi))
        got = complex(eval_levy_khinchine(t, xi))
        assert abs(got - ref) <= 1e-8 * (1 + abs(ref))


@pytest.mark.parametrize("jumps", JUMPS, ids=lambda j: j.kind)
def test_growth_constant_bounds_symbol(jumps):
    t = LevyTriplet(0.4, 0.3, jumps)
    q = levy_symbol(t)
    xi = np.concatenate([-np.geomspace(1e-3, 1e4, 300), np.geomspace(1e-3, 1e4, 300)])
    assert np.all(np.abs(q(0.0, xi)) <= q.growth_constant * (1 + xi**2) * (1 + 1e-12))


@pytest.mark.parametrize("g", [0.0, 0.25, 0.5, 1.0])
def test_scaled_triplet_exponent(g):
    t = LevyTriplet(0.4, 0.3, TemperedStableJumps(1.3, 2.0))
    xi = np.linspace(-10, 10, 41)
    # triplet of the process g L, whose exponent is q(g xi)
    assert np.allclose(eval_levy_khinchine(t.scaled(g), xi), eval_levy_khinchine(t, g * xi), rtol=1e-12, atol=1e-14)


def test_invalid_measures():
    with pytest.raises(InvalidMeasureError):
        LevyTriplet(0.0, -1.0, NoJumps())
    with pytest.raises((InvalidMeasureError, ValueError)):
        StableJumps(2.0)
    with pytest.raises((InvalidMeasureError, ValueError)):
        AtomicJumps((0.0,), (1.0,))
    with pytest.raises(InvalidMeasureError):
        jump_measure_from_dict({"kind": "stable", "alpha": 1.0, "sclae": 1.0})
    with pytest.raises(InvalidMeasureError):
        jump_measure_from_dict({"kind": "gamma"})


def test_triplet_round_trip():
    t = LevyTriplet(0.1, 0.2, CompoundPoissonJumps(2.0, 0.3, 0.5))
    assert LevyTriplet.from_dict(t.to_dict()) == t


def test_stable_like_symbol_values():
    q = stable_like_symbol(StabilityIndexFn.constant(1.5))
    assert q(0.0, 2.0) == pytest.approx(2.0**1.5)
    glued = stable_like_symbol(StabilityIndexFn.piecewise_constant([0.0], [1.2, 1.8]))
    assert glued(-1.0, 2.0) == pytest.approx(2.0**1.2)
    assert glued(0.0, 2.0) == pytest.approx(2.0**1.2)
    assert glued(1e-9, 2.0) == pytest.approx(2.0**1.8)
    assert np.all(glued(np.linspace(-3, 3, 7), 0.0) == 0.0)


def test_stability_index_validation():
    with pytest.raises(ValueError, match=r"\(S2\)"):
        StabilityIndexFn.piecewise_constant([0.0], [1.2, 2.1])
    with pytest.raises(ValueError):
        StabilityIndexFn.piecewise_constant([0.0, 0.0], [1.2, 1.5, 1.8])
    a = StabilityIndexFn.piecewise_constant([-1.0, 1.0], [1.2, 1.5, 1.8])
    assert StabilityIndexFn.from_dict(a.to_dict()).to_dict() == a.to_dict()
    assert (a.alpha_min, a.alpha_max) == (1.2, 1.8)


def test_to_dict_is_plain_python():
    import yaml

    t = LevyTriplet(0.1, 0.2, TemperedStableJumps(1.1, 2.0)).scaled(0.3)
    for trip in (t, LevyTriplet.stable(1.2), LevyTriplet(0.0, 0.0, AtomicJumps((1.0,), (2.0,)))):
        assert LevyTriplet.from_dict(yaml.safe_load(yaml.safe_dump(trip.to_dict()))) == trip
