import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quasiwave.errors import DegeneracyError, DomainError
from quasiwave.initial_data import (Bump, Custom, Grid, ScaledDerivative, Scenario, Theorem,
                                    TruncatedGaussian, Zero, bump_unit_integral, central_difference,
                                    check_hypotheses, compact_support_radius, degeneracy_time_bound,
                                    degeneracy_time_bound_from, riemann_initial, sample_profile,
                                    trapezoid)
from quasiwave.wavespeed import builtin_constant, builtin_zabusky

# closed-form value of the unit bump integral, computed independently to 30 digits
UNIT_BUMP = 0.443993816168079437823048921171


def grid(n=2048, w=10.0):
    return Grid.symmetric(w, n)


def test_grid_layout():
    g = Grid.symmetric(2.0, 16)
    assert g.dx == 0.25
    assert g.x[0] == pytest.approx(-1.875) and g.x[-1] == pytest.approx(1.875)
    assert g.extent == pytest.approx(1.875)
    with pytest.raises(DomainError):
        Grid(0.0, 0.1, 8)


def test_zero_profile():
    assert np.all(sample_profile(Zero(), grid(64)) == 0.0)


def test_bump_values():
    b = Bump(1.0, 1.0)
    assert b.values(0.0) == pytest.approx(0.3678794, abs=1e-7)
    assert b.values(1.5) == 0.0
    assert b.values(1.0) == 0.0


def test_bump_integral():
    assert bump_unit_integral() == pytest.approx(UNIT_BUMP, rel=1e-12)
    b = Bump.with_integral(-0.375, 1.0)
    g = grid(4096, 2.0)
    assert trapezoid(sample_profile(b, g), g) == pytest.approx(-0.375, rel=1e-10)
    assert b.integral() == pytest.approx(-0.375)


def test_profile_derivatives_match_difference():
    g = grid(4096, 4.0)
    for p in (Bump(2.0, 1.5, 0.3), TruncatedGaussian(1.0, 0.7, 10.0)):
        d = central_difference(sample_profile(p, g), g.dx)
        np.testing.assert_allclose(d, p.derivative(g.x), atol=1e-6)


def test_scaled_derivative_and_custom():
    g = grid(256, 3.0)
    b = Bump(1.0, 1.0)
    np.testing.assert_allclose(sample_profile(ScaledDerivative(b, -2.0), g), -2.0 * b.derivative(g.x))
    c = Custom("exp(-x^2)")
    np.testing.assert_allclose(c.values(g.x), np.exp(-g.x ** 2))
    np.testing.assert_allclose(c.derivative(g.x), -2 * g.x * np.exp(-g.x ** 2))


def test_central_difference_order():
    errs = []
    for n in (200, 400):
        g = Grid.symmetric(math.pi, n)
        errs.append(np.max(np.abs(central_difference(np.sin(g.x), g.dx)[2:-2] - np.cos(g.x)[2:-2])))
    assert errs[0] / errs[1] > 14


def test_scenario_guards():
    g = grid(64)
    m = builtin_zabusky(2.0)
    with pytest.raises(DegeneracyError):
        Scenario(g, np.full(64, -1.5), np.zeros(64), m, 1.0)
    with pytest.raises(DomainError):
        Scenario(g, np.zeros(63), np.zeros(64), m, 1.0)
    s = Scenario(g, np.zeros(64), np.zeros(64), m, 1.0)
    with pytest.raises(ValueError):
        s.u0[0] = 1.0


def test_riemann_initial_examples():
    g = grid(256)
    m = builtin_zabusky(2.0)
    s = Scenario(g, np.full(256, 0.3), np.ones(256), m, 10.0)
    R1, R2 = riemann_initial(s)
    np.testing.assert_allclose(R1, 1.0)
    np.testing.assert_allclose(R2, 1.0)

    s = Scenario.from_profiles(g, Bump(0.5, 2.0), Zero(), m)
    R1, R2 = riemann_initial(s)
    np.testing.assert_array_equal(R1, -R2)

    # R1 = u1 + u0' vanishes up to the 4th-order differencing error
    b = Bump(1.0, 1.0)
    errs = []
    for n in (2048, 4096):
        s = Scenario.from_profiles(grid(n), b, ScaledDerivative(b, -1.0), builtin_constant(1.0))
        errs.append(np.max(np.abs(riemann_initial(s)[0])))
    assert errs[1] < 2e-5
    assert errs[0] / errs[1] > 10


def mass_scenario(mass, n=4096, w=3.0, a=2.0):
    g = Grid.symmetric(w, n)
    return Scenario.from_profiles(g, Zero(), Bump.with_integral(-mass, 1.0), builtin_zabusky(a))


def test_thm1_mass_margin():
    rep = check_hypotheses(mass_scenario(0.375), Theorem.THM1)
    assert rep.satisfied
    assert rep["INICON3"].margin == pytest.approx(0.125, abs=1e-9)


def test_thm2_mass_margin():
    rep = check_hypotheses(mass_scenario(4.0), Theorem.THM2)
    assert rep.satisfied
    assert rep["INICON5"].margin == pytest.approx(2.0, abs=1e-9)
    assert not check_hypotheses(mass_scenario(4.0), Theorem.THM1).satisfied


def test_thm3_requires_nontrivial_data():
    g = grid(64)
    s = Scenario(g, np.zeros(64), np.zeros(64), builtin_zabusky(2.0), 1.0)
    rep = check_hypotheses(s, Theorem.THM3)
    assert not rep.satisfied
    assert rep.failed() == ["NONTRIVIAL"]


def test_thm3_outgoing_data():
    g = Grid.symmetric(6.0, 2048)
    s = Scenario.from_profiles(g, Zero(), Bump(3.0, 1.0), builtin_zabusky(2.0))
    assert check_hypotheses(s, "THM3").satisfied
    assert not check_hypotheses(s, "THM1").satisfied


def test_constant_speed_fails_strict_monotonicity():
    g = grid(64)
    s = Scenario.from_profiles(g, Zero(), Bump(1.0, 1.0), builtin_constant(1.0))
    rep = check_hypotheses(s, Theorem.THM3)
    assert "INICON6" in rep.failed()
    assert "INICON5" in check_hypotheses(s, Theorem.THM2).failed()


def test_support_touching_edge_fails():
    g = Grid.symmetric(1.0, 64)
    s = Scenario.from_profiles(g, Zero(), TruncatedGaussian(-0.1, 1.0, 5.0), builtin_zabusky(2.0), K=1.0)
    assert "INICON4" in check_hypotheses(s, Theorem.THM2).failed()


def test_report_serialises():
    d = check_hypotheses(mass_scenario(4.0, n=512), Theorem.THM1).to_dict()
    assert d["theorem"] == "THM1" and d["satisfied"] is False
    assert {c["id"] for c in d["conditions"]} == {"INICON1", "INICON2", "INICON3", "CON2", "CON4"}


def test_compact_support_examples():
    g = Grid.symmetric(3.0, 600)
    assert compact_support_radius(np.zeros(600), g) == 0.0
    assert compact_support_radius(sample_profile(Bump(1, 1), g), g) == pytest.approx(1.0, abs=g.dx)
    g = Grid.symmetric(5.0, 1000)
    assert compact_support_radius(sample_profile(TruncatedGaussian(1, 1, 3), g), g) == pytest.approx(3.0, abs=g.dx)


def test_time_bound_examples():
    assert degeneracy_time_bound_from(-1.0, 1.0, 1.0, 0.0, 4.0) == pytest.approx(1.0)
    assert degeneracy_time_bound_from(-1.0, 1.0, 1.0, 0.0, 2.0) is None
    # F(0) = -int u0: positive u0 postpones degeneracy
    assert degeneracy_time_bound_from(-1.0, 1.0, 1.0, -1.0, 4.0) == pytest.approx(1.5)
    assert degeneracy_time_bound_from(-1.0, 1.0, 1.0, 1.0, 4.0) == pytest.approx(0.5)
    assert degeneracy_time_bound_from(-math.inf, 1.0, 1.0, 0.0, 4.0) is None


def test_time_bound_from_scenario():
    assert degeneracy_time_bound(mass_scenario(4.0)) == pytest.approx(1.0, rel=1e-9)
    assert degeneracy_time_bound(mass_scenario(2.0)) is None or degeneracy_time_bound(mass_scenario(2.0)) > 1e6


def test_threshold_mass_is_not_applicable():
    rep = check_hypotheses(mass_scenario(2.0), Theorem.THM2)
    assert not rep["INICON5"].satisfied
    rep = check_hypotheses(mass_scenario(0.5), Theorem.THM1)
    assert not rep["INICON3"].satisfied


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(1.01, 4.0))
def test_margins_monotone_in_scale(mass, lam):
    a, b = mass_scenario(mass, n=1024), mass_scenario(mass * lam, n=1024)
    assert check_hypotheses(b, Theorem.THM1)["INICON3"].margin <= check_hypotheses(a, Theorem.THM1)["INICON3"].margin
    assert check_hypotheses(b, Theorem.THM2)["INICON5"].margin >= check_hypotheses(a, Theorem.THM2)["INICON5"].margin


@given(st.floats(2.05, 50.0), st.floats(1.01, 3.0))
def test_time_bound_decreases_with_mass(mass, lam):
    t1 = degeneracy_time_bound_from(-1.0, 1.0, 1.0, 0.0, mass)
    t2 = degeneracy_time_bound_from(-1.0, 1.0, 1.0, 0.0, mass * lam)
    assert t2 < t1
