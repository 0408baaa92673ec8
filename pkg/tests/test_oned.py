import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from halfline_pair import (
    ConfigError,
    DomainError,
    GroundStateError,
    Grid1D,
    PotentialSpec,
    agmon_check,
    appendix_audit,
    assemble_h1d,
    ground_state,
    solve_ground_state,
    truncated_bottom,
)
from halfline_pair.oned import bound_levels, lowest_levels, positive_ground_vector, richardson_eps0

from oracles import harmonic_levels, shooting_bottom, square_well_ground


def test_harmonic_levels_against_hermite(harmonic):
    for bc, parity in (("neumann", "even"), ("dirichlet", "odd")):
        grid = Grid1D.from_spacing(12.0, 2e-3, bc, "dirichlet")
        levels = bound_levels(harmonic, grid, k=4)["eigenvalues"]
        assert np.allclose(levels, harmonic_levels(1.0, parity, 4), atol=1e-4)


def test_ground_state_fields(harmonic_gs):
    r = harmonic_gs
    assert r.eps0 == pytest.approx(1.0, abs=1e-6)
    assert r.e2 == pytest.approx(5.0, abs=1e-5)
    assert not r.e2_is_continuum and r.below_tail and r.gap_positive and r.b_confirmed
    assert np.all(r.psi0 > 0)
    assert np.sum(r.psi0**2) * r.h == pytest.approx(1.0, rel=1e-12)
    assert r.residual < 1e-6 * assemble_h1d(PotentialSpec.harmonic(), r.grid).norm_bound()


def test_ground_vector_matches_dense_eigenvector(harmonic):
    grid = Grid1D.from_spacing(8.0, 0.05)
    op = assemble_h1d(harmonic, grid)
    w, v = np.linalg.eigh(op.dense())
    r = ground_state(harmonic, grid, check_stability=False)
    assert r.eps0 == pytest.approx(w[0], abs=1e-10)
    ref = np.abs(v[:, 0]) / math.sqrt(grid.h)
    assert np.allclose(r.psi0, ref, atol=1e-9)


def test_ground_vector_rejects_excited_level(harmonic):
    op = assemble_h1d(harmonic, Grid1D.from_spacing(8.0, 0.05))
    w, v = lowest_levels(op, 2)
    with pytest.raises(GroundStateError):
        positive_ground_vector(op, float(w[1]), int(np.argmax(np.abs(v[:, 1]))))


@pytest.mark.parametrize("bc", ["neumann", "dirichlet"])
def test_square_well_against_matching_condition(well, bc):
    r = solve_ground_state(well, h=1e-3, bc_origin=bc)
    assert r.eps0 == pytest.approx(square_well_ground(4.0, 1.0, bc), abs=2e-6)
    assert r.e2_is_continuum and r.e2 == 0.0
    assert r.b_confirmed


def test_second_order_convergence(well):
    exact = square_well_ground(4.0, 1.0)
    errors = [abs(solve_ground_state(well, h=h, x_max=30.0).eps0 - exact) for h in (0.02, 0.01, 0.005)]
    rates = [math.log2(a / b) for a, b in zip(errors[:-1], errors[1:])]
    assert all(1.8 < p < 2.2 for p in rates)


def test_richardson_improves(well):
    exact = square_well_ground(4.0, 1.0)
    value, err = richardson_eps0(well, 30.0, 0.02)
    coarse = truncated_bottom(well, 30.0, "dirichlet", 0.02)
    assert abs(value - exact) < 0.05 * abs(coarse - exact)
    assert err == pytest.approx(abs(coarse - exact), rel=0.05)


@pytest.mark.parametrize("bc", ["neumann", "dirichlet"])
def test_truncated_bottom_against_shooting(harmonic, bc):
    L = 3.0
    ref = shooting_bottom(lambda x: x * x, L, "neumann", bc, 0.3, 2.5)
    assert truncated_bottom(harmonic, L, bc, 2e-3) == pytest.approx(ref, abs=2e-6)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.25, 4.0))
def test_harmonic_frequency_scaling(omega2):
    omega = math.sqrt(omega2)
    r = solve_ground_state(PotentialSpec.harmonic(omega2), h=5e-3, x_max=12.0 / math.sqrt(omega))
    assert r.eps0 == pytest.approx(omega, rel=2e-5)
    assert r.e2 == pytest.approx(5 * omega, rel=2e-5)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.5, 6.0), st.floats(0.1, 2.0))
def test_deeper_well_lies_lower(depth, extra):
    grid = Grid1D.from_spacing(20.0, 0.02)
    shallow = ground_state(PotentialSpec.square_well(depth, 1.0), grid, check_stability=False).eps0
    deep = ground_state(PotentialSpec.square_well(depth + extra, 1.0), grid, check_stability=False).eps0
    assert deep < shallow


def test_lj_without_bound_state_is_not_confirmed():
    r = solve_ground_state(PotentialSpec.lennard_jones_soft(1.0, 1.0, 0.5), h=1e-2)
    assert not r.b_confirmed
    assert r.eps0 > 0 or not r.below_tail


def test_lj_deep_bound_state_confirmed():
    r = solve_ground_state(PotentialSpec.lennard_jones_soft(10.0, 1.0, 0.5), h=2e-3)
    assert r.b_confirmed and r.eps0 < 0


def test_agmon_rate(well_gs, well):
    for theta in (0.5, 0.9):
        rep = agmon_check(well, well_gs, theta)
        assert rep.fitted_rate >= 2 * theta * math.sqrt(-well_gs.eps0)
        assert math.isfinite(rep.weighted_norm) and rep.tail_fraction < 1e-3
    with pytest.raises(ConfigError):
        agmon_check(well, well_gs, 1.0)


def test_agmon_requires_bound_state():
    spec = PotentialSpec.lennard_jones_soft(1.0, 1.0, 0.5)
    r = ground_state(spec, Grid1D.from_spacing(30.0, 0.01), check_stability=False)
    if r.below_tail:
        pytest.skip("truncated LJ bottom happens to lie below the tail")
    with pytest.raises(DomainError):
        agmon_check(spec, r, 0.5)


def test_audit_identities(harmonic, harmonic_gs):
    rep = appendix_audit(harmonic, harmonic_gs)
    assert rep.positive and rep.min_psi0 > 0
    assert rep.flux_last <= 1e-10
    assert rep.flux_first < 1e-3  # Neumann origin: O(h) one-sided flux
    assert max(rep.ibp_defects) <= 1e-6


def test_product_rule_second_order(harmonic):
    # below h ~ 2e-3 the norm reaches the rounding floor of the eigen-residual itself
    res = [appendix_audit(harmonic, solve_ground_state(harmonic, h=h, x_max=12.0)).product_rule_residual
           for h in (8e-3, 4e-3, 2e-3)]
    assert 3.5 < res[0] / res[1] < 4.5
    assert 3.5 < res[1] / res[2] < 4.5


def test_audit_dirichlet_origin(harmonic):
    r = solve_ground_state(harmonic, h=2e-3, x_max=12.0, bc_origin="dirichlet")
    assert r.eps0 == pytest.approx(3.0, abs=1e-5)
    assert max(appendix_audit(harmonic, r).ibp_defects) < 1e-8


@pytest.mark.parametrize("kwargs", [
    dict(x_max=0.0, n_points=100),
    dict(x_max=1.0, n_points=4),
    dict(x_max=1.0, n_points=100, bc_origin="robin"),
])
def test_grid_validation(kwargs):
    with pytest.raises(ConfigError):
        Grid1D(**kwargs)


def test_truncated_bottom_rejects_bad_length(harmonic):
    with pytest.raises(ConfigError):
        truncated_bottom(harmonic, -1.0, "neumann", 0.01)


def test_json_view(harmonic_gs):
    data = harmonic_gs.to_json()
    assert data["grid"]["n_points"] == 12000
    assert data["flags"]["b_confirmed"] is True


@pytest.mark.parametrize("bc_origin,expected", [("dirichlet", 1.0), ("neumann", 0.25)])
def test_free_operator_on_box(bc_origin, expected):
    free = PotentialSpec.square_well(0.0, 1.0)
    errs = []
    for n in (100, 200):
        grid = Grid1D(math.pi, n, bc_origin, "dirichlet")
        errs.append(abs(lowest_levels(assemble_h1d(free, grid), 1)[0][0] - expected))
    assert errs[0] < 1e-3
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_operator_symmetric(well):
    T = assemble_h1d(well, Grid1D.from_spacing(5.0, 0.1)).dense()
    assert np.array_equal(T, T.T)


def test_long_neumann_truncation_well(well, well_gs):
    # exact bottom at this spacing from the large automatic domain
    assert abs(truncated_bottom(well, 20.0, "neumann", 1e-3) - well_gs.eps0) <= 1e-6


def test_agmon_without_weight_is_norm(well, well_gs, harmonic, harmonic_gs):
    assert agmon_check(well, well_gs, 0.0).weighted_norm == pytest.approx(1.0, abs=1e-10)
    rep = agmon_check(harmonic, harmonic_gs, 0.9)
    assert math.isfinite(rep.weighted_norm) and rep.tail_fraction < 1e-3
