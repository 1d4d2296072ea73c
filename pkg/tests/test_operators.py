import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from levyglue.approximation import mollify_alpha
from levyglue.levy_core import AtomicJumps, LevyTriplet, NoJumps, StabilityIndexFn, TemperedStableJumps
from levyglue.operators import (
    Bump,
    GluedApproxSpec,
    GluedSpec,
    LevySpec,
    StableLikeApproxSpec,
    StableLikeSpec,
    apply_generator_fourier,
    apply_generator_integral,
    bump_transform,
    canonical_bumps,
    fourier_weighted_norm,
    generator_difference_sup,
    region_grid,
    stable_like_difference_bound,
)

# (1/2pi) int exp(-1/(1-x^2)) cos(w x) dx on (-1, 1), 20 digits from mpmath
FHAT_ORACLE = {
    0.0: 0.070663810545384122162,
    1.0: 0.065231106891278851926,
    5.0: -0.000033780623053562483201,
    20.0: -0.000089429632022931067117,
}


def test_bump_fourier_frozen():
    f = Bump(0.0, 1.0)
    for w, ref in FHAT_ORACLE.items():
        assert abs(f.fourier(np.array([w]))[0].real - ref) <= 1e-15
    # the raw transform is 2 pi times the normalised one
    assert bump_transform(np.array([1.0]))[0] == pytest.approx(2 * math.pi * FHAT_ORACLE[1.0], rel=1e-13)


def test_bump_fourier_shift_and_scale():
    f, g = Bump(0.0, 1.0), Bump(0.7, 2.0, 1.5)
    xi = np.array([0.3, 1.1, 4.0])
    expected = 1.5 * 2.0 * np.exp(-0.7j * xi) * f.fourier(2.0 * xi)
    assert np.allclose(g.fourier(xi), expected, rtol=1e-13, atol=1e-17)


def test_bump_second_derivative_closed_form():
    # exp(-1/(1-s^2)) has second derivative -2/e at 0
    assert Bump(0.0, 1.0).derivative(np.array([0.0]), 2)[0] == pytest.approx(-2 / math.e, rel=1e-14)


def test_parseval():
    f = Bump(0.2, 0.8, 1.3)
    x = np.linspace(-0.6, 1.0, 200001)
    lhs = trapezoid(f(x) ** 2, x)
    xi = np.linspace(-400, 400, 400001)
    rhs = 2 * math.pi * trapezoid(np.abs(f.fourier(xi)) ** 2, xi)
    assert lhs == pytest.approx(rhs, rel=1e-9)


def test_brownian_generator_half_second_derivative():
    f = Bump(0.0, 1.0, math.e)  # f''(0) = -2
    spec = LevySpec(LevyTriplet(0.0, 1.0, NoJumps()))
    assert apply_generator_integral(spec, f, np.array([0.0]))[0] == pytest.approx(-1.0, abs=1e-12)
    assert apply_generator_fourier(spec, f, np.array([0.0]))[0] == pytest.approx(-1.0, abs=1e-9)


def test_drift_generator_first_derivative():
    # f = amp * b((x - c) / r) with f'(1) = 3, using b'(s) = -2 s b(s) / (1 - s^2)^2
    c, r, x = 0.0, 2.0, 1.0
    s = (x - c) / r
    db = -2 * s * math.exp(-1 / (1 - s * s)) / (1 - s * s) ** 2
    f = Bump(c, r, 3.0 * r / db)
    spec = LevySpec(LevyTriplet(1.0, 0.0, NoJumps()))
    assert apply_generator_integral(spec, f, np.array([x]))[0] == pytest.approx(3.0, rel=1e-12)
    assert apply_generator_fourier(spec, f, np.array([x]))[0] == pytest.approx(3.0, rel=1e-8)


def test_atomic_generator_direct_sum():
    sizes, weights = (-2.0, 0.5, 1.5), (0.3, 1.0, 0.2)
    t = LevyTriplet(0.25, 0.0, AtomicJumps(sizes, weights))
    f = Bump(0.1, 1.2)
    x = np.linspace(-2.5, 2.5, 11)
    ref = 0.25 * f.derivative(x, 1)
    for y, w in zip(sizes, weights):
        ref = ref + w * (f(x + y) - f(x) - (y * f.derivative(x, 1) if abs(y) <= 1 else 0.0))
    assert np.allclose(apply_generator_integral(LevySpec(t), f, x), ref, rtol=0, atol=1e-14)


ROUTE_SPECS = {
    "cauchy": StableLikeSpec(StabilityIndexFn.constant(1.0)),
    "stable_like_1.5": StableLikeSpec(StabilityIndexFn.constant(1.5)),
    "stable_like_jump": StableLikeSpec(StabilityIndexFn.piecewise_constant([0.0], [1.2, 1.8])),
    "tempered": LevySpec(LevyTriplet(0.3, 0.2, TemperedStableJumps(1.3, 2.0))),
    "glued": GluedSpec(LevyTriplet.stable(1.2), LevyTriplet(0.5, 0.1, TemperedStableJumps(0.8, 1.0))),
}


@pytest.mark.parametrize("name", sorted(ROUTE_SPECS))
def test_routes_agree(name):
    spec = ROUTE_SPECS[name]
    f = Bump(0.3, 0.6)
    x = np.linspace(-2.0, 2.0, 9)
    a = apply_generator_integral(spec, f, x)
    b = apply_generator_fourier(spec, f, x)
    assert np.all(np.abs(a - b) <= 1e-6 * (1 + np.abs(a)))


def test_fourier_tail_estimate():
    _, info = apply_generator_fourier(ROUTE_SPECS["cauchy"], Bump(0.0, 1.0), np.array([0.0]), return_info=True)
    assert info["tail_estimate"] <= 1e-10
    assert info["imag_residual"] <= 1e-8


def test_glued_approx_is_right_triplet_beyond_kink():
    n = 10
    left, right = LevyTriplet.stable(1.2), LevyTriplet.stable(1.8)
    f = Bump(0.5, 1.0)
    x = np.array([1.0 / n, 0.3, 1.0, 2.5])
    got = apply_generator_integral(GluedApproxSpec(left, right, n), f, x)
    ref = apply_generator_fourier(LevySpec(right), f, x)
    assert np.all(np.abs(got - ref) <= 1e-8 * (1 + np.abs(ref)))


def test_difference_of_equal_specs_is_zero():
    spec = ROUTE_SPECS["stable_like_jump"]
    assert generator_difference_sup(spec, spec, Bump(0.0, 1.0), [(-2.0, 2.0)], density=64) <= 1e-12


@pytest.mark.parametrize("m", [2, 5])
def test_glued_locality(m):
    left, right = LevyTriplet.stable(1.2), LevyTriplet.stable(1.8)
    f = Bump(-0.2, 1.5)
    d = generator_difference_sup(
        GluedApproxSpec(left, right, m), GluedSpec(left, right), f, [(-m, -1.0 / m), (1.0 / m, m)], density=64
    )
    assert d <= 1e-8


def test_stable_like_approx_difference_bound():
    alpha = StabilityIndexFn.piecewise_constant([0.0], [1.2, 1.8])
    m, k = 3, 16
    an = mollify_alpha(alpha, m, k)
    f = Bump(0.0, 1.0)
    region = [(-m, -1.0 / (8 * m)), (1.0 / (8 * m), m)]  # complement of U_3 inside [-3, 3]
    x = region_grid(region, 32)
    diff = np.max(
        np.abs(
            apply_generator_integral(StableLikeApproxSpec(an), f, x)
            - apply_generator_integral(StableLikeSpec(alpha), f, x)
        )
    )
    bound = stable_like_difference_bound(an, alpha, x, f, 1.2, 1.8)
    assert diff <= bound
    assert fourier_weighted_norm(f) > 0


def test_canonical_bumps():
    fs = canonical_bumps()
    assert len(fs) == 5
    assert len({f.name for f in fs}) == 5
