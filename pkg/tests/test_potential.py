"""Potential family, flea bump, ramp, Agmon distances, flea validity checks."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flea_lab import (
    FleaCoversMinimum,
    FleaSpec,
    PotentialSpec,
    RampSpec,
    agmon_distance,
    classify_flea,
    eval_potential,
    flea_size_check,
    from_config,
    to_config,
)


def damped(lo, hi):
    return st.floats(lo, hi, allow_nan=False, allow_infinity=False)


# ---------------------------------------------------------------------------
# potential values


def test_double_well_minimum_is_zero(standard_well):
    assert eval_potential(standard_well, 1.0) == 0.0
    assert eval_potential(standard_well, -1.0) == 0.0


def test_double_well_barrier_value(standard_well):
    assert eval_potential(standard_well, 0.0) == 0.25
    assert standard_well.barrier_height == 0.25


def test_double_well_scaled_geometry():
    spec = PotentialSpec("double_well", 2.0, 0.5)
    assert spec.a == pytest.approx(2.0 / math.sqrt(0.5))
    assert spec.v(spec.a) == pytest.approx(0.0, abs=1e-15)
    # V(0) = lambda a^4 / 4 = omega^2 a^2 / 4
    assert spec.barrier_height == pytest.approx(0.25 * 2.0**2 * spec.a**2)


def test_harmonic_quarter_omega_sq():
    spec = PotentialSpec("harmonic", 2.0, 1.0)
    assert spec.v(1.0) == pytest.approx(1.0)
    assert spec.v_double_prime(0.3) == pytest.approx(0.5 * 2.0**2)


def test_anharmonic_values():
    spec = PotentialSpec("anharmonic", 1.0, 0.8)
    x = 1.3
    assert spec.v(x) == pytest.approx(0.25 * x**2 + 0.25 * 0.8 * x**4)


def test_double_well_curvatures(standard_well):
    assert standard_well.v_double_prime(1.0) == pytest.approx(2.0)
    assert standard_well.v_double_prime(0.0) == pytest.approx(-1.0)


@given(damped(-6.0, 6.0))
def test_double_well_reflection_symmetry(x):
    spec = PotentialSpec("double_well", 1.25, 0.7)
    assert spec.v(x) == pytest.approx(spec.v(-x), rel=1e-12, abs=1e-15)
    assert spec.v(x) >= 0.0


def test_potential_derivatives_match_finite_differences():
    h = 1e-6
    for kind in ("harmonic", "anharmonic", "double_well"):
        spec = PotentialSpec(kind, 1.1, 0.9)
        for x in (-1.7, -0.4, 0.3, 1.2):
            fd = (spec.v(x + h) - spec.v(x - h)) / (2 * h)
            assert spec.v_prime(x) == pytest.approx(fd, rel=1e-6, abs=1e-8)
            fd2 = (spec.v(x + h) - 2 * spec.v(x) + spec.v(x - h)) / h**2
            assert spec.v_double_prime(x) == pytest.approx(fd2, rel=1e-3, abs=1e-5)


def test_invalid_kind_and_parameters():
    with pytest.raises(ValueError):
        PotentialSpec("cubic", 1.0, 1.0)
    with pytest.raises(ValueError):
        PotentialSpec("harmonic", -1.0, 1.0)
    with pytest.raises(ValueError):
        FleaSpec(0.0, -0.5, 0.1)
    with pytest.raises(ValueError):
        RampSpec(0.0)


# ---------------------------------------------------------------------------
# flea bump


def test_flea_peak_value_is_exactly_d():
    flea = FleaSpec(7.5, 0.5, 0.3)
    assert flea.delta_v(7.5) == 0.3


def test_flea_zero_outside_support():
    flea = FleaSpec(1.0, 0.25, -0.4)
    for x in (0.75, 1.25, 0.0, 5.0, -3.0):
        assert flea.delta_v(x) == 0.0
        assert flea.delta_v_prime(x) == 0.0


@given(damped(-3.0, 3.0), damped(0.05, 1.0), damped(-1.0, 1.0), damped(-0.999, 0.999))
def test_flea_sign_definite_and_bounded(b, c, d, frac):
    flea = FleaSpec(b, c, d)
    x = b + frac * c
    value = flea.delta_v(x)
    assert abs(value) <= abs(d) + 1e-15
    if d != 0.0:
        assert value * d >= 0.0


def test_flea_smooth_at_support_edge():
    """4th-order difference quotients shrink under refinement at the edge."""
    flea = FleaSpec(0.3, 0.4, 0.2)
    edge = flea.support[0]
    quotients = []
    for h in (1e-2, 2e-3):
        stencil = edge + h * np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
        weights = np.array([1.0, -4.0, 6.0, -4.0, 1.0])
        quotients.append(abs(np.dot(weights, flea.delta_v(stencil))) / h**4)
    assert quotients[1] < quotients[0]
    assert quotients[1] < 1e-6


def test_flea_derivative_matches_finite_difference():
    flea = FleaSpec(-0.5, 0.6, 0.25)
    h = 1e-7
    for x in (-0.9, -0.5, -0.2, 0.05):
        fd = (flea.delta_v(x + h) - flea.delta_v(x - h)) / (2 * h)
        assert float(flea.delta_v_prime(x)) == pytest.approx(fd, rel=1e-5, abs=1e-10)


def test_flea_full_potential_peak(standard_well):
    flea = FleaSpec(7.5, 0.5, 0.3)
    ramp = RampSpec(800.0)
    expected = standard_well.v(7.5) + 0.3
    for t in (800.0, 900.0, 1e6):
        assert eval_potential(standard_well, 7.5, flea=flea, ramp=ramp, t=t) == pytest.approx(
            expected, rel=1e-15
        )


# ---------------------------------------------------------------------------
# ramp


def test_ramp_profile_values():
    ramp = RampSpec(10.0)
    assert ramp.factor(-1.0) == 0.0
    assert ramp.factor(0.0) == 0.0
    assert ramp.factor(10.0) == pytest.approx(1.0)
    assert ramp.factor(25.0) == 1.0
    assert ramp.factor(10.0 / 3.0) == pytest.approx(math.sin(math.pi / 6.0))


def test_ramp_monotone_on_ramp_interval():
    ramp = RampSpec(5.0)
    ts = np.linspace(0.0, 5.0, 400)
    vals = np.array([ramp.factor(t) for t in ts])
    assert np.all(np.diff(vals) >= 0.0)


def test_ramp_continuous_at_switch_off(standard_well):
    flea = FleaSpec(0.3, 0.2, 0.1)
    ramp = RampSpec(7.0)
    for eps in (1e-4, 1e-6, 1e-8):
        before = eval_potential(standard_well, 0.3, flea=flea, ramp=ramp, t=7.0 - eps)
        after = eval_potential(standard_well, 0.3, flea=flea, ramp=ramp, t=7.0 + eps)
        assert abs(before - after) < 1e-3 * eps + 1e-14


def test_ramp_requires_flea(standard_well):
    with pytest.raises(ValueError):
        eval_potential(standard_well, 0.0, ramp=RampSpec(1.0), t=0.5)


# ---------------------------------------------------------------------------
# Agmon distances


def w_standard(x):
    """Antiderivative of sqrt(V) = (1-x^2)/2 on [-1, 1] for the standard well."""
    return 0.5 * (x - x**3 / 3.0)


def test_agmon_empty_interval(standard_well):
    assert agmon_distance(standard_well, 0.0, 0.0) == 0.0


def test_agmon_barrier_distance_closed_form(standard_well):
    assert agmon_distance(standard_well, -1.0, 1.0) == pytest.approx(2.0 / 3.0, abs=1e-9)


def test_agmon_symmetry(standard_well):
    assert agmon_distance(standard_well, 1.0, -1.0) == pytest.approx(
        agmon_distance(standard_well, -1.0, 1.0), rel=1e-12
    )


def test_agmon_harmonic_closed_form():
    spec = PotentialSpec("harmonic", 1.3, 1.0)
    # sqrt(V) = omega |x| / 2, so the distance from y to z (0 <= y <= z)
    # is omega (z^2 - y^2) / 4.
    assert agmon_distance(spec, 0.3, 1.7) == pytest.approx(
        1.3 * (1.7**2 - 0.3**2) / 4.0, abs=1e-9
    )


@given(damped(-1.0, 1.0), damped(-1.0, 1.0))
def test_agmon_matches_antiderivative_inside_barrier(y, z):
    spec = PotentialSpec("double_well", 1.0, 1.0)
    assert agmon_distance(spec, y, z) == pytest.approx(
        abs(w_standard(z) - w_standard(y)), abs=1e-8
    )


@given(st.tuples(damped(-2.0, 2.0), damped(-2.0, 2.0), damped(-2.0, 2.0)))
def test_agmon_triangle_equality_for_ordered_points(points):
    spec = PotentialSpec("double_well", 1.0, 1.0)
    y, z, w = sorted(points)
    left = agmon_distance(spec, y, z) + agmon_distance(spec, z, w)
    assert left == pytest.approx(agmon_distance(spec, y, w), rel=1e-8, abs=1e-8)


# ---------------------------------------------------------------------------
# flea classification


def test_classify_bump_case(standard_well):
    flea = FleaSpec(0.05, 0.3, 0.1)
    cls = classify_flea(standard_well, flea)
    d_near = 2.0 * (w_standard(1.0) - w_standard(0.35))
    d_far = 2.0 * (w_standard(-0.25) - w_standard(-1.0))
    assert cls.case == "bump"
    assert cls.d_v == pytest.approx(2.0 / 3.0, abs=1e-9)
    assert cls.d_v_prime == pytest.approx(d_near, abs=1e-8)
    assert cls.d_v_double_prime == pytest.approx(d_far, abs=1e-8)
    assert cls.d_v_prime < cls.d_v_double_prime < cls.d_v


def test_classify_edge_case(standard_well):
    flea = FleaSpec(1.5, 0.2, 0.05)
    cls = classify_flea(standard_well, flea)
    # support [1.3, 1.7] beyond the right minimum: near distance from +1,
    # far distance from -1 through the whole barrier
    outer = 0.5 * (1.3**3 / 3.0 - 1.3) - 0.5 * (1.0 / 3.0 - 1.0)
    assert cls.case == "edge"
    assert cls.d_v_prime == pytest.approx(2.0 * outer, abs=1e-8)
    assert cls.d_v_double_prime == pytest.approx(2.0 * (2.0 / 3.0 + outer), abs=1e-8)
    assert cls.d_v_prime < cls.d_v < cls.d_v_double_prime


def test_classify_symmetric_is_invalid(standard_well):
    cls = classify_flea(standard_well, FleaSpec(0.0, 0.3, 0.1))
    assert cls.case == "invalid"
    assert cls.d_v_prime == pytest.approx(cls.d_v_double_prime, rel=1e-10)


def test_classify_rejects_flea_covering_minimum(standard_well):
    with pytest.raises(FleaCoversMinimum):
        classify_flea(standard_well, FleaSpec(1.0, 0.2, 0.1))
    with pytest.raises(FleaCoversMinimum):
        classify_flea(standard_well, FleaSpec(-1.05, 0.2, 0.1))


def test_classify_requires_double_well():
    with pytest.raises(ValueError):
        classify_flea(PotentialSpec("harmonic", 1.0, 1.0), FleaSpec(0.5, 0.1, 0.1))


@given(damped(-0.55, 0.55), damped(0.05, 0.4), damped(-0.5, 0.5))
def test_classify_prime_never_exceeds_double_prime(b, c, d):
    spec = PotentialSpec("double_well", 1.0, 1.0)
    lo, hi = b - c, b + c
    if lo <= -1.0 <= hi or lo <= 1.0 <= hi:
        return
    cls = classify_flea(spec, FleaSpec(b, c, d))
    assert cls.d_v_prime <= cls.d_v_double_prime + 1e-12


# ---------------------------------------------------------------------------
# flea size check


def test_size_check_dominating_flea(standard_well):
    report = flea_size_check(standard_well, FleaSpec(0.3, 0.2, 0.3), 0.01)
    assert report.satisfied
    assert report.ratio > 1e20


def test_size_check_zero_flea(standard_well):
    report = flea_size_check(standard_well, FleaSpec(0.3, 0.2, 0.0), 0.5)
    assert not report.satisfied


def test_size_check_ratio_one_fails_threshold(standard_well):
    d = math.exp(-(2.0 / 3.0) / 0.5)
    report = flea_size_check(standard_well, FleaSpec(0.3, 0.2, d), 0.5)
    assert not report.satisfied
    assert report.ratio == pytest.approx(1.0, rel=1e-6)


# ---------------------------------------------------------------------------
# config round trip


def test_config_round_trip():
    spec = PotentialSpec("double_well", 0.06, 1.15e-4)
    flea = FleaSpec(7.0, 0.5, 0.15)
    ramp = RampSpec(800.0)
    block = to_config(spec, flea, ramp)
    spec2, flea2, ramp2 = from_config(block)
    assert spec2 == spec
    assert flea2 == flea
    assert ramp2 == ramp


def test_config_round_trip_without_optionals(standard_well):
    spec2, flea2, ramp2 = from_config(to_config(standard_well))
    assert spec2 == standard_well
    assert flea2 is None and ramp2 is None
