import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import eigvalsh_tridiagonal

from halfline_pair import (
    ConfigError,
    DomainError,
    bargmann_bound,
    count_negative_q0,
    cutting_profile,
    effective_Z,
    finiteness_audit,
    interior_sector_count,
    wr_eval,
)
from halfline_pair.counting import sturm_count


@given(st.floats(0.1, 100.0))
def test_sup_w_closed_form(R):
    prof = cutting_profile(R)
    d = np.linspace(0.0, 3.0 * R, 30001)
    sampled = np.max(wr_eval(prof, 0.0, d))
    assert sampled == pytest.approx(prof.sup_W, rel=1e-6)
    assert prof.sup_W * R**2 == pytest.approx(2 * (math.pi / 2 * 15 / 8) ** 2, rel=1e-14)


def test_w_support():
    prof = cutting_profile(2.0)
    assert np.all(wr_eval(prof, 0.0, np.array([0.0, 1.0, 2.0, 4.0, 9.0])) == 0.0)
    with pytest.raises(ConfigError):
        cutting_profile(0.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 60), st.integers(0, 2**31 - 1), st.floats(-3.0, 3.0))
def test_sturm_matches_eigenvalues(n, seed, shift):
    rng = np.random.default_rng(seed)
    d = rng.standard_normal(n)
    e = rng.standard_normal(n - 1)
    w = eigvalsh_tridiagonal(d, e)
    if np.min(np.abs(w - shift)) < 1e-9:
        return
    assert sturm_count(d, e, shift) == int(np.count_nonzero(w < shift))


@given(st.floats(0.2, 5.0))
def test_bargmann_on_exponential(a):
    # int_0^inf x exp(-a x) = 1/a^2
    x = np.linspace(0.0, 8.0 / a, 4001)
    assert bargmann_bound(x, np.exp(-a * x)) == pytest.approx(1.0 / a**2, rel=1e-4)


def test_bargmann_errors():
    x = np.linspace(0, 1, 50)
    with pytest.raises(DomainError):
        bargmann_bound(x, -np.ones_like(x))
    with pytest.raises(DomainError):
        bargmann_bound(x, np.exp(x))
    assert bargmann_bound(x, np.zeros_like(x)) == 0.0


@pytest.mark.parametrize("depth,width", [(1.0, 2.0), (4.0, 3.0), (10.0, 5.0), (0.5, 1.0)])
def test_q0_count_box(depth, width):
    # -u'' - depth on an interval of length `width` inside the line: 1 + floor(width sqrt(depth) / pi) bound states
    expected = 1 + math.floor(width * math.sqrt(depth) / math.pi)
    x = np.linspace(0.0, 2.0 * width, 8001)
    Z = np.where(x < width, depth, 0.0)
    got = count_negative_q0(x, Z, X=4.0 * width + 40.0, h=0.005)
    assert got.count == expected and got.stable


def test_effective_potential_support(well_gs):
    R = 5.0
    prof = cutting_profile(R)
    Z = effective_Z(well_gs, prof)
    assert np.all(Z.Z[Z.x <= R] == 0.0)
    assert np.max(Z.Z) <= prof.sup_W + R * prof.sup_W**2
    assert np.all(Z.Z >= 0)
    direct = effective_Z(well_gs, prof, x2_grid=Z.x[::50])
    assert np.allclose(direct.Z, Z.Z[::50], atol=1e-12)


def test_audit_admissible_R(well, well_gs):
    rep = finiteness_audit(well, well_gs, 10.0)
    assert rep.admissible_R and rep.n_q0_stable
    assert rep.n_q0 <= rep.bargmann
    assert rep.to_json()["sup_WR_times_R2"] == pytest.approx(17.3489, abs=1e-4)
    small = finiteness_audit(well, well_gs, 0.5)
    assert not small.admissible_R and small.notes


def test_interior_count_bounds_sector(well, well_gs):
    R = 3.0
    n_int = interior_sector_count(well, R, well_gs.eps0, h=0.1)
    n_q0 = finiteness_audit(well, well_gs, R).n_q0
    assert n_int >= 1
    assert n_int + n_q0 >= 1


def test_partition_values():
    from halfline_pair.profiles import partition_pair
    c1, c2 = partition_pair(0.5)
    assert (c1, c2) == (1.0, 0.0)
    c1, c2 = partition_pair(1.5)
    assert c1 == pytest.approx(math.sqrt(0.5), abs=1e-15) and c2 == pytest.approx(math.sqrt(0.5), abs=1e-15)
    t = np.linspace(-1, 4, 10000)
    c1, c2 = partition_pair(t)
    assert np.max(np.abs(c1**2 + c2**2 - 1.0)) < 4e-16


@given(st.floats(0.5, 50.0))
def test_w_scaling_and_sign(R):
    d = np.linspace(0.0, 6.0 * R, 60001)
    w1 = wr_eval(cutting_profile(R), 0.0, d)
    w2 = wr_eval(cutting_profile(2 * R), 0.0, d)
    assert np.all(w1 >= 0)
    assert np.max(w2) == pytest.approx(np.max(w1) / 4, rel=1e-6)
    assert wr_eval(cutting_profile(R), 0.0, R / 2) == 0.0


def test_z_tail_decays_at_agmon_rate(well_gs):
    R = 5.0
    Z = effective_Z(well_gs, cutting_profile(R))
    a = math.sqrt(-well_gs.eps0)
    sel = (Z.x >= 2 * R + 1.0) & (Z.x <= 20.0)
    slope = np.polyfit(Z.x[sel], np.log(Z.Z[sel]), 1)[0]
    assert slope <= -a


def test_bargmann_refinement(well):
    from halfline_pair import solve_ground_state
    values = [bargmann_bound(*(lambda z: (z.x, z.Z))(effective_Z(solve_ground_state(well, h=h), cutting_profile(5.0))))
              for h in (2e-3, 1e-3)]
    assert values[0] == pytest.approx(values[1], rel=1e-2)


def test_zero_potential_has_no_negative_levels():
    x = np.linspace(0, 10, 101)
    assert count_negative_q0(x, np.zeros_like(x)).count == 0


@pytest.mark.filterwarnings("ignore:negative-eigenvalue count")
@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.0, 3.0), st.floats(0.5, 4.0))
def test_count_monotone_in_z(depth, extra, width):
    x = np.linspace(0, 10, 501)
    small = np.where(x < width, depth, 0.0)
    large = small + extra * np.exp(-x)
    kw = dict(X=30.0, h=0.02)
    assert count_negative_q0(x, large, **kw).count >= count_negative_q0(x, small, **kw).count


def test_admissibility(harmonic, harmonic_gs, well, well_gs):
    assert finiteness_audit(harmonic, harmonic_gs, 10.0).admissible_R
    inside = finiteness_audit(well, well_gs, 0.5)
    assert inside.exterior_margin < 0
    for R in (5.0, 10.0):
        assert finiteness_audit(well, well_gs, R).admissible_R
        assert finiteness_audit(well, well_gs, 2 * R).admissible_R
