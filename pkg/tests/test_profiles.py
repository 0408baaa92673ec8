import numpy as np
import pytest
from hypothesis import given, strategies as st

from halfline_pair.profiles import (
    DEFAULT_CUTOFF,
    RAMP,
    SMOOTHSTEP_SLOPE,
    Cutoff,
    partition_pair,
    partition_pair_d1,
    smoothstep,
)

reals = st.floats(-3.0, 5.0, allow_nan=False)


@pytest.mark.parametrize("order", [5, 7])
def test_smoothstep_endpoints_and_slope(order):
    t = np.linspace(0, 1, 20001)
    s = smoothstep(t, order)
    assert s[0] == 0.0 and s[-1] == 1.0
    assert np.all(np.diff(s) >= 0)
    d1 = smoothstep(t, order, 1)
    assert np.max(d1) == pytest.approx(SMOOTHSTEP_SLOPE[order], rel=1e-12)


@pytest.mark.parametrize("order", [5, 7])
@pytest.mark.parametrize("deriv", [0, 1])
def test_smoothstep_derivative_matches_finite_difference(order, deriv):
    t = np.linspace(0.01, 0.99, 97)
    step = 1e-6
    fd = (smoothstep(t + step, order, deriv) - smoothstep(t - step, order, deriv)) / (2 * step)
    assert np.allclose(fd, smoothstep(t, order, deriv + 1), atol=1e-6)


def test_smoothstep_rejects_bad_order():
    with pytest.raises(ValueError):
        smoothstep(0.5, order=3)


@given(reals)
def test_partition_of_unity(t):
    c1, c2 = partition_pair(t)
    assert c1**2 + c2**2 == pytest.approx(1.0, abs=1e-15)


@given(reals)
def test_partition_derivative_is_orthogonal(t):
    # d/dt (chi1^2 + chi2^2) = 0
    c1, c2 = partition_pair(t)
    d1, d2 = partition_pair_d1(t)
    assert c1 * d1 + c2 * d2 == pytest.approx(0.0, abs=1e-12)


def test_partition_support():
    c1, c2 = partition_pair(np.array([0.0, 1.0, 2.0, 3.0]))
    assert np.array_equal(c1, [1, 1, 0, 0]) or np.allclose(c1, [1, 1, 0, 0], atol=1e-16)
    assert np.allclose(c2, [0, 0, 1, 1], atol=1e-16)


@given(reals)
def test_cutoff_range(t):
    c = DEFAULT_CUTOFF(t)
    assert 0.0 <= c <= 1.0
    if t <= 1.0:
        assert c == 1.0
    if t >= 2.0:
        assert c == 0.0


def test_cutoff_derivatives_by_finite_difference():
    chi = Cutoff(1.1, 0.9, 7)
    t = np.linspace(1.15, 1.95, 41)
    step = 1e-6
    assert np.allclose((chi(t + step) - chi(t - step)) / (2 * step), chi.d1(t), atol=1e-6)
    assert np.allclose((chi.d1(t + step) - chi.d1(t - step)) / (2 * step), chi.d2(t), atol=1e-5)
    assert chi.end == pytest.approx(2.0)
    assert np.max(np.abs(chi.d1(np.linspace(1.1, 2, 9001)))) == pytest.approx(chi.sup_d1, rel=1e-6)


def test_cutoff_rejects_zero_width():
    with pytest.raises(ValueError):
        Cutoff(1.0, 0.0)


def test_ramp_is_complement_of_cutoff():
    t = np.linspace(0, 3, 301)
    assert np.allclose(RAMP(t) + DEFAULT_CUTOFF(t), 1.0, atol=1e-15)
    assert np.allclose(RAMP.d1(t), -DEFAULT_CUTOFF.d1(t))
    assert np.allclose(RAMP.d2(t), -DEFAULT_CUTOFF.d2(t))
