import numpy as np
import pytest
from scipy.integrate import quad

from levyglue.approximation import (
    ContinuousExtension,
    GlueWeights,
    Mollifier,
    build_exceptional_sets,
    bump_mass,
    derived_levels,
    derived_set,
    glued_approx_symbol,
    mollify_alpha,
    select_schedule,
    sup_distance,
)
from levyglue.levy_core import LevyTriplet, StabilityIndexFn

JUMP_AT_ZERO = StabilityIndexFn.piecewise_constant([0.0], [1.2, 1.8])


def test_bump_mass_frozen():
    # int_{-1}^{1} exp(-1/(1-x^2)) dx, 20 digits from mpmath
    assert bump_mass() == pytest.approx(0.44399381616807943782, rel=1e-14)


@pytest.mark.parametrize("k", [1, 4, 50])
def test_mollifier_unit_mass(k):
    phi = Mollifier(k)
    assert quad(phi, -1.0 / k, 1.0 / k, epsabs=1e-14)[0] == pytest.approx(1.0, abs=1e-12)
    assert phi(np.array([1.0 / k, 2.0 / k])).tolist() == [0.0, 0.0]


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
def test_single_jump_radius_rule(m):
    sets = build_exceptional_sets([0.0], 5)
    (a, b), = sets.intervals(m)
    assert (a, b) == pytest.approx((-1 / (8 * m), 1 / (8 * m)), abs=1e-15)
    assert sets.measure(m) == pytest.approx(1 / (4 * m), rel=1e-14)


def test_single_jump_simple_rule():
    sets = build_exceptional_sets([0.0], 4, rule="simple")
    for m in range(1, 5):
        assert sets.intervals(m)[0] == pytest.approx((-1 / m, 1 / m))


def test_empty_jump_set():
    sets = build_exceptional_sets([], 3)
    assert all(sets.intervals(m) == [] and sets.measure(m) == 0.0 for m in range(1, 4))


def test_three_jumps_radii_and_nesting():
    sets = build_exceptional_sets([-1.0, 0.0, 1.0], 20)
    # gap term 1 and j = 1, 2, 3 from left to right
    expected = [(-1 - 1 / 8, -1 + 1 / 8), (-1 / 16, 1 / 16), (1 - 1 / 32, 1 + 1 / 32)]
    assert np.allclose(sets.intervals(1), expected)
    for m in range(1, 20):
        assert sets.is_nested(m)
        assert sets.measure(m) <= sets.measure(1) / m * (1 + 1e-12)


def test_derived_sets_of_finite_sets_are_empty():
    assert derived_set([-1.0, 0.0, 2.0]).size == 0
    levels = derived_levels([-1.0, 0.0, 2.0])
    assert len(levels) == 1 and levels[0].tolist() == [-1.0, 0.0, 2.0]


def test_duplicate_jumps_rejected():
    with pytest.raises(ValueError):
        build_exceptional_sets([0.0, 0.0], 2)


def test_continuous_extension_matches_off_set():
    sets = build_exceptional_sets([0.0], 4)
    ext = ContinuousExtension(JUMP_AT_ZERO, sets, 2)
    x = np.array([-3.0, -1 / 16, 1 / 16, 2.0])
    assert np.allclose(ext(x), JUMP_AT_ZERO(x))
    assert ext(np.array([0.0]))[0] == pytest.approx(1.5)


@pytest.mark.parametrize("k", [1, 7, 64])
def test_constant_index_unchanged(k):
    an = mollify_alpha(StabilityIndexFn.constant(1.3), 2, k)
    assert np.allclose(an(np.linspace(-4, 4, 17)), 1.3, rtol=0, atol=1e-13)


@pytest.mark.parametrize("m,k", [(1, 4), (2, 8), (3, 20)])
def test_local_constancy(m, k):
    # x = 2/k keeps the window [1/k, 3/k] outside U_m = (-1/(8m), 1/(8m))
    an = mollify_alpha(JUMP_AT_ZERO, m, k)
    assert an(np.array([2.0 / k]))[0] == pytest.approx(1.8, abs=1e-13)
    assert an(np.array([-2.0 / k]))[0] == pytest.approx(1.2, abs=1e-13)


def test_sup_distance_decreases_in_k():
    m = 3
    sets = build_exceptional_sets([0.0], m)
    d = [sup_distance(JUMP_AT_ZERO, mollify_alpha(JUMP_AT_ZERO, m, k, sets), sets, m, 256) for k in (1, 4, 16, 64)]
    assert all(b < a for a, b in zip(d, d[1:]))
    assert d[-1] < 0.05


def test_schedule_constant_index():
    s = select_schedule(StabilityIndexFn.constant(1.5), 0.1, 4)
    assert max(s.sup_errors.values()) <= 1e-13
    assert all(v["pass"] for v in s.certificates.values())


def test_schedule_jump_at_zero():
    s = select_schedule(JUMP_AT_ZERO, 0.1, 10)
    assert s.sup_errors[10] < 0.1
    assert all(v["pass"] for v in s.certificates.values())
    rows = s.table([0.0, 1.0])
    assert rows[0][:2] == (1, 0.0)


def test_schedule_two_jumps():
    s = select_schedule(StabilityIndexFn.piecewise_constant([-1.0, 1.0], [1.3, 1.7, 1.1]), 0.1, 6)
    assert s.certificates["S1"]["nested"] and s.certificates["S1"]["measure_decay"]
    assert all(v["pass"] for v in s.certificates.values())


def test_schedule_bad_eps():
    with pytest.raises(ValueError, match=r"\(S2\)"):
        select_schedule(JUMP_AT_ZERO, 0.3, 3)


def test_glue_weights():
    w = GlueWeights(4)
    x = np.array([-1.0, 0.0, 0.125, 0.25, 1.0])
    g1, g2 = w(x)
    assert g1.tolist() == [1.0, 1.0, 0.5, 0.0, 0.0]
    assert np.allclose(g1 + g2, 1.0)


def test_glued_approx_symbol():
    n = 8
    left, right = LevyTriplet.stable(1.2), LevyTriplet.stable(1.8)
    q = glued_approx_symbol(left, right, n)
    xi = np.array([-3.0, 0.5, 2.0])
    assert np.array_equal(q(-5.0, xi), np.abs(xi) ** 1.2 + 0j)
    assert np.all(q(np.linspace(-2, 2, 9), 0.0) == 0)
    cauchy = LevyTriplet.stable(1.0)
    qc = glued_approx_symbol(cauchy, cauchy, n)
    assert np.allclose(qc(1.0 / (2 * n), xi), np.abs(xi), rtol=1e-14)
