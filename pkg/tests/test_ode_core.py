import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatflux import oracles
from heatflux._dopri import StepBudgetExceeded
from heatflux._dopri import integrate as dopri_integrate
from heatflux.ode_core import (
    IvpSpec,
    InvalidSpec,
    Params,
    State,
    far_field_ok,
    fmt,
    integrate,
    residuals,
    rhs,
    vector_field,
)


def test_initial_state_matches_boundary_data():
    spec = IvpSpec(Params(0.3, 1.5), 0.7)
    assert spec.initial_state == State(0.0, -1.5, 0.7, -1.0)


@pytest.mark.parametrize("kw", [dict(t_max=0.0), dict(rel_tol=0.0), dict(abs_tol=-1.0),
                                dict(blowup_bound=0.0), dict(events=frozenset({"bogus"}))])
def test_invalid_spec_rejected(kw):
    with pytest.raises(InvalidSpec):
        IvpSpec(Params(0.0, 0.0), 1.0, **kw)


def test_non_finite_params_rejected():
    with pytest.raises(InvalidSpec):
        Params(math.nan, 0.0)


@given(m=st.floats(-5, 5), f=st.floats(-5, 5), fp=st.floats(-5, 5), fpp=st.floats(-5, 5))
def test_rhs_agrees_with_vector_field(m, f, fp, fpp):
    third = vector_field(m)(0.0, (f, fp, fpp))[2]
    assert third == pytest.approx(rhs(State(0.0, f, fp, fpp), Params(m, 0.0)), abs=1e-12)


def test_exponential_decay_against_exact():
    raw = dopri_integrate(lambda t, y: (-y[0],), 0.0, (1.0,), 5.0, rtol=1e-10, atol=1e-14, h0=1e-3)
    assert abs(raw.y[-1][0] - math.exp(-5.0)) < 1e-10


def test_backward_integration_runs_to_negative_time():
    traj = integrate(IvpSpec(Params(1.0, 0.0), 0.5, t_max=3.0), direction=-1.0)
    assert traj.t_end == pytest.approx(-3.0)
    assert traj(-1.5).t == -1.5


def test_dense_output_matches_step_values():
    traj = integrate(IvpSpec(Params(-1.0, -1.0), 1.0, t_max=10.0))
    for i in range(0, len(traj.t), max(1, len(traj.t) // 10)):
        s = traj(float(traj.t[i]))
        assert np.allclose([s.f, s.fp, s.fpp], traj.y[i], atol=1e-12)


def test_dense_output_between_steps_matches_closed_form():
    traj = integrate(IvpSpec(Params(-1.0, -1.0), 1.0, t_max=20.0))
    for t in np.linspace(0.05, 19.95, 57):
        assert abs(traj(float(t)).f - oracles.riccati_bounded(-1.0, float(t))[0]) < 1e-7


def test_call_outside_range_raises():
    traj = integrate(IvpSpec(Params(-1.0, -1.0), 1.0, t_max=1.0))
    with pytest.raises(ValueError):
        traj(2.0)


def test_events_located_precisely():
    traj = integrate(IvpSpec(Params(1.0, 0.0), 0.2, t_max=5.0))
    fp0 = traj.events_of("fp_zero")
    assert fp0, "expected f' to vanish"
    assert abs(fp0[0].state.fp) < 1e-11


def test_terminal_event_stops_integration():
    traj = integrate(IvpSpec(Params(1.0, 0.0), 0.2, terminal=frozenset({"fp_zero"})))
    assert traj.termination.kind == "event_stop"
    assert traj.termination.t == traj.events_of("fp_zero")[0].t


def test_blowup_detected():
    # m < -2 with a small slope: f' vanishes and f escapes to -inf in finite time
    traj = integrate(IvpSpec(Params(-3.0, 5.0), 0.01, t_max=50.0, events=frozenset()))
    assert traj.termination.kind == "blowup_at"
    assert traj.termination.t < 50.0
    assert str(traj.termination).startswith("blowup_at(")


def test_step_budget_raises():
    fun = lambda t, y: (y[0] * y[0] + 1.0,)  # noqa: E731
    with pytest.raises(StepBudgetExceeded):
        dopri_integrate(fun, 0.0, (0.0,), 1.0, rtol=1e-12, atol=1e-14, h0=1e-6, max_steps=5)


def test_csv_round_trip_exact():
    traj = integrate(IvpSpec(Params(0.5, 0.25), 0.9, t_max=4.0))
    rows = list(csv.reader(io.StringIO(traj.to_csv())))
    assert rows[0] == ["t", "f", "fp", "fpp"]
    back = np.array([[float(x) for x in r] for r in rows[1:]])
    assert np.array_equal(back[:, 0], traj.t)
    assert np.array_equal(back[:, 1:], traj.y)


def test_json_round_trip_exact():
    traj = integrate(IvpSpec(Params(0.5, 0.25), 0.9, t_max=4.0))
    rec = json.loads(traj.to_json())
    assert np.array_equal(np.array(rec["states"])[:, 1:], traj.y)
    assert rec["termination"] == "reached_t_max"


def test_fmt_uses_17_significant_digits():
    assert fmt(0.1) == "0.10000000000000001"
    assert float(fmt(1 / 3)) == 1 / 3
    assert fmt(math.inf) == "inf"


def test_integration_is_deterministic():
    a = integrate(IvpSpec(Params(2.0, -1.0), 0.1))
    b = integrate(IvpSpec(Params(2.0, -1.0), 0.1))
    assert a.to_csv() == b.to_csv()


@pytest.mark.parametrize("m,g,a", [(-1.0, -1.0, 1.0), (1.0, 0.0, 3 ** (-1 / 3)), (-3.0, 5.2277, 1.0)])
def test_identity_residuals_small(m, g, a):
    traj = integrate(IvpSpec(Params(m, g), a))
    assert max(residuals(traj, 0.0, traj.t_end)) < 1e-6
    assert max(residuals(traj, 1.0, 7.0)) < 1e-6


def test_identity_residuals_empty_interval_is_zero():
    traj = integrate(IvpSpec(Params(0.0, 0.0), 0.9, t_max=2.0))
    assert residuals(traj, 1.0, 1.0) == (0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        residuals(traj, 1.5, 1.0)


def test_identity_residuals_shrink_with_tolerance():
    p, a = Params(-1.0, -1.0), 2.0
    seq = []
    for rt in (1e-6, 1e-8, 1e-10):
        traj = integrate(IvpSpec(p, a, rel_tol=rt, abs_tol=rt * 1e-2))
        seq.append(residuals(traj, 0.0, traj.t_end))
    for lo, hi in zip(seq, seq[1:]):
        assert all(b < a_ for a_, b in zip(lo, hi))


def test_global_error_order():
    errs = []
    tols = [1e-5, 1e-6, 1e-7, 1e-8]
    for rt in tols:
        traj = integrate(IvpSpec(Params(-1.0, -1.0), 1.0, t_max=10.0, rel_tol=rt, abs_tol=rt * 1e-2))
        errs.append(abs(traj.last.f - oracles.riccati_bounded(-1.0, 10.0)[0]))
    slope = np.polyfit(np.log(tols), np.log(errs), 1)[0]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert 0.6 <= slope <= 1.3


@settings(max_examples=25, deadline=None)
@given(m=st.floats(-4, 4), g=st.floats(-3, 3), a=st.floats(-2, 3))
def test_sign_propagation_low_m(m, g, a):
    """For m <= -1/2, f'' stays negative wherever the trajectory is defined."""
    if m > -0.5 or abs(m + 2) < 1e-3:
        return
    traj = integrate(IvpSpec(Params(m, g), a, t_max=10.0, events=frozenset({"fpp_zero"})))
    assert not traj.events_of("fpp_zero")
    assert np.all(traj.y[1:, 2] < 0)


def test_far_field_predicate():
    traj = integrate(IvpSpec(Params(-1.0, -1.0), 1.0))
    assert far_field_ok(traj)
    short = integrate(IvpSpec(Params(-1.0, -1.0), 1.0, t_max=1.0))
    assert not far_field_ok(short)
