import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heatflux import oracles
from heatflux.ode_core import IvpSpec, Params, integrate


@given(st.floats(-5.0, -0.05))
def test_riccati_bounded_initial_data(g):
    f, fp, fpp = oracles.riccati_bounded(g, 0.0)
    assert f == pytest.approx(-g, abs=1e-12)
    assert fp == pytest.approx(-1.0 / g, rel=1e-12)
    assert fpp == pytest.approx(-1.0, abs=1e-10)


def test_riccati_bounded_limit_and_first_integral():
    g = -1.5
    d = oracles.RiccatiParams.bounded(g).d
    f, fp, _ = oracles.riccati_bounded(g, 200.0)
    assert f == pytest.approx(math.sqrt(2 * d), abs=1e-12)
    for t in (0.3, 1.0, 4.0):
        f, fp, _ = oracles.riccati_bounded(g, t)
        assert fp + 0.5 * f * f == pytest.approx(d, abs=1e-12)


def test_riccati_bounded_needs_suction():
    with pytest.raises(oracles.OracleError):
        oracles.RiccatiParams.bounded(0.5)


def test_riccati_residual_small_for_any_slope():
    for a in (0.5, 1.0, 3.0):
        traj = integrate(IvpSpec(Params(-1.0, -1.0), a, t_max=20.0))
        assert oracles.riccati_residual(traj) < 1e-6
    with pytest.raises(oracles.OracleError):
        oracles.riccati_residual(integrate(IvpSpec(Params(0.0, 0.0), 1.0, t_max=1.0)))


@given(st.floats(-3.0, 3.0))
def test_m1_eta_solves_cubic(g):
    eta = oracles.m1_eta(g)
    assert eta > 0
    assert 9 * eta**3 + 9 * g * eta**2 == pytest.approx(1.0, abs=1e-11)


def test_m1_eta_frozen_values():
    assert oracles.m1_eta(0.0) == pytest.approx(9 ** (-1 / 3), abs=1e-14)
    # eta = 1/3 solves the cubic for gamma = 2/3
    assert oracles.m1_eta(2.0 / 3.0) == pytest.approx(1.0 / 3.0, abs=1e-13)


def test_explicit_m1_solves_ode():
    sol = oracles.ExplicitM1(0.5, oracles.m1_eta(0.5))
    f0, fp0, fpp0 = sol(0.0)
    assert (f0, fp0, fpp0) == pytest.approx((-0.5, sol.alpha, -1.0), abs=1e-14)
    traj = integrate(IvpSpec(Params(1.0, 0.5), sol.alpha, t_max=8.0))
    for t in np.linspace(0.0, 8.0, 9):
        assert traj(float(t)).f == pytest.approx(sol(float(t))[0], abs=1e-8)
    assert sol(500.0)[0] == pytest.approx(sol.limit, abs=1e-12)


def test_blasius_check():
    traj = integrate(IvpSpec(Params(-0.5, 0.0), 1.0, t_max=10.0))
    assert oracles.blasius_check(traj) < 1e-8
    with pytest.raises(oracles.OracleError):
        oracles.blasius_check(integrate(IvpSpec(Params(0.0, 0.0), 1.0, t_max=1.0)))


@pytest.mark.parametrize("m,target", [(1.0, 0.7), (1.0, -0.7), (0.0, 0.5)])
def test_translate_scale_recovers_shooting_slope(m, target):
    from heatflux.shooting import shoot_concave

    prof = oracles.gamma_zero_profile(m, t_backward=4.0)
    spec = oracles.translate_scale(prof, target)
    assert spec.alpha == pytest.approx(shoot_concave(Params(m, target)).alpha, abs=1e-6)


def test_translate_scale_m1_closed_form():
    prof = oracles.gamma_zero_profile(1.0, t_backward=4.0)
    spec = oracles.translate_scale(prof, -1.0)
    assert spec.alpha == pytest.approx(1.0 / (3.0 * oracles.m1_eta(-1.0)), abs=1e-7)


def test_translate_scale_zero_is_identity():
    prof = oracles.gamma_zero_profile(1.0, t_backward=4.0)
    assert oracles.translate_scale(prof, 0.0).alpha == prof.alpha
