import json
import math

import pytest

from heatflux import asymptotics as asy
from heatflux import oracles
from heatflux.ode_core import IvpSpec, Params, integrate
from heatflux.shooting import shoot_concave


def test_growth_exponent_values():
    assert asy.growth_exponent(-1.0) == pytest.approx(0.5)
    assert asy.growth_exponent(-1.5) == pytest.approx(0.2)
    assert asy.growth_exponent(0.0) == pytest.approx(2.0)


def test_bound_ceiling():
    assert asy.bound_ceiling(Params(0.0, 1.0), 1.0) == pytest.approx(math.sqrt(2.0))
    assert asy.bound_ceiling(Params(-1.0, 1.0), 1.0) is None


def test_lambda_riccati_bounded():
    traj = integrate(IvpSpec(Params(-1.0, -1.0), 1.0))
    d = oracles.RiccatiParams.bounded(-1.0).d
    assert asy.lambda_limit(traj) == pytest.approx(math.sqrt(2 * d), abs=1e-8)


def test_lambda_explicit_m1():
    g = 0.5
    sol = oracles.ExplicitM1(g, oracles.m1_eta(g))
    traj = integrate(IvpSpec(Params(1.0, g), shoot_concave(Params(1.0, g)).alpha))
    assert asy.lambda_limit(traj) == pytest.approx(sol.limit, abs=1e-8)


def test_lambda_divergent_for_unbounded():
    traj = integrate(IvpSpec(Params(-1.0, -1.0), 2.0))
    assert asy.lambda_limit(traj) == asy.DIVERGENT


def test_lambda_requires_full_horizon():
    traj = integrate(IvpSpec(Params(-3.0, 5.0), 0.01, t_max=50.0, events=frozenset()))
    with pytest.raises(asy.FarFieldNotReached):
        asy.lambda_limit(traj)


def test_tail_exponent_preconditions():
    bounded = integrate(IvpSpec(Params(-1.0, -1.0), 1.0))
    with pytest.raises(asy.PreconditionError):
        asy.tail_exponent(bounded)
    short = integrate(IvpSpec(Params(-1.0, -1.0), 2.0, t_max=4.0))
    with pytest.raises(asy.PreconditionError):
        asy.tail_exponent(short)


def test_converged_tail_fit_m_minus_one():
    fit, traj = asy.converged_tail_fit(Params(-1.0, -1.0), 2.0)
    assert fit.verdict == "reliable"
    assert abs(fit.exponent_est - 0.5) < 0.02
    rec = json.loads(fit.to_json())
    assert rec["target_exponent"] == 0.5 and len(rec["window"]) == 2


def test_law_ratio_riccati_unbounded():
    # c = -1 - gamma alpha = 1, so f ~ sqrt(2 t)
    traj = integrate(IvpSpec(Params(-1.0, -1.0), 2.0, t_max=2000.0, events=frozenset()))
    assert asy.law_ratio(traj, math.sqrt(2.0), 0.5) == pytest.approx(1.0, abs=1e-2)


def test_decay_check_m3():
    # inside the slope band [0.538516, 0.542165] of concave-convex solutions
    traj = integrate(IvpSpec(Params(3.0, 0.0), 0.54034, t_max=400.0))
    assert asy.decay_check_2_over_t(traj) < 0.05


def test_decay_check_shape_mismatch():
    traj = integrate(IvpSpec(Params(0.5, 0.0), 1.0, t_max=10.0))
    with pytest.raises(asy.ShapeMismatch):
        asy.decay_check_2_over_t(traj)
    concave = integrate(IvpSpec(Params(3.0, 0.0), shoot_concave(Params(3.0, 0.0)).alpha))
    with pytest.raises(asy.ShapeMismatch):
        asy.decay_check_2_over_t(concave)


def test_decay_check_skipped_when_cycle_present():
    traj = integrate(IvpSpec(Params(1.2, 0.0), 0.5, t_max=10.0))
    with pytest.raises(asy.CheckSkipped) as exc:
        asy.decay_check_2_over_t(traj)
    assert exc.value.reason == "cycle_present"
