import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatflux import phase_plane as pp
from heatflux.ode_core import IvpSpec, Params, integrate

# gamma* values from the separatrix route, cross-checked against shooting
GAMMA_STAR = {-4.0: 1.5064409038, -3.0: 2.6138347849, -2.5: 4.7170495059,
              -1.75: -7.2875712775, -1.5: -3.1007070292, -1.25: -1.5262856567}


def test_equilibrium_a_is_stationary():
    for m in (-3.0, -1.0, 0.0, 2.5):
        P, Q = pp.vector_field(m, -0.5, 0.5)
        assert P == 0.0 and abs(Q) < 1e-15


@pytest.mark.parametrize("m,kind", [
    (-2.5, "unstable_node"), (pp.M_NODE_UNSTABLE, "unstable_node"),
    (pp.M_NODE_UNSTABLE + 1e-10, "unstable_focus"), (1.0, "unstable_focus"),
    (1.5, "center"), (2.0, "stable_focus"), (pp.M_NODE_STABLE - 1e-10, "stable_focus"),
    (pp.M_NODE_STABLE, "stable_node"), (6.0, "stable_node"),
])
def test_focus_type_regimes(m, kind):
    assert pp.equilibria(m)[1].kind == kind


def test_thresholds_closed_form():
    assert pp.M_NODE_UNSTABLE == pytest.approx((3 - 2 * math.sqrt(6)) / 2, abs=1e-15)
    assert pp.M_NODE_STABLE == pytest.approx((3 + 2 * math.sqrt(6)) / 2, abs=1e-15)


@given(st.floats(-6, 6))
def test_eigenvalues_match_numpy(m):
    o, a = pp.equilibria(m)
    num = np.sort_complex(np.linalg.eigvals(pp.jacobian(m, -0.5, 0.5)))
    assert np.allclose(num, np.sort_complex(np.array(a.eigenvalues)), atol=1e-9)
    assert sorted(z.real for z in o.eigenvalues) == pytest.approx(sorted([0.0, -(m + 2)]))


def test_origin_degenerate_at_minus_two():
    assert pp.equilibria(-2.0)[0].kind == "degenerate"
    with pytest.raises(ValueError):
        pp.trace_separatrix(-2.0)


def test_isocline_pole_raises():
    # Psi has a pole where its denominator (m+2) + 3u vanishes
    with pytest.raises(ZeroDivisionError):
        pp.isocline_psi(1.0, -1.0)


def test_isocline_is_q_zero():
    for m in (-3.0, 0.5, 2.0):
        for u in (-0.3, 0.2, 0.7):
            v = pp.isocline_psi(m, u)
            assert abs(pp.vector_field(m, u, v)[1]) < 1e-12


def test_slope_field_undefined_on_p_zero():
    with pytest.raises(ZeroDivisionError):
        pp.slope_field(0.0, 0.5, 0.5)


def test_blowup_transform_coordinates():
    traj = integrate(IvpSpec(Params(0.0, -1.0), 0.4, t_max=3.0))
    curve = pp.blowup_transform(traj, 0.0)
    p0 = curve.points[0]
    assert (p0.u, p0.v) == pytest.approx((0.4, -1.0))
    assert np.all(np.diff(curve.s) > 0)


@settings(max_examples=8, deadline=None)
@given(m=st.floats(-1.9, 2.5), g=st.floats(-2.5, -0.5), a=st.floats(0.2, 2.0))
def test_conjugacy_property(m, g, a):
    traj = integrate(IvpSpec(Params(m, g), a, t_max=4.0, events=frozenset()))
    if traj.termination.kind != "reached_t_max" or traj.y[:, 0].min() < 0.2:
        return
    curve = pp.blowup_transform(traj, 0.0)
    orbit = pp.integrate_planar(m, curve.points[0].u, curve.points[0].v, curve.points[-1].s, box=1e6)
    for p in curve.points[:: max(1, len(curve.points) // 20)]:
        u, v = orbit(p.s)
        assert abs(u - p.u) < 1e-5 and abs(v - p.v) < 1e-5


def test_w_manifold_is_line_at_minus_one():
    tr = pp.trace_separatrix(-1.0, "S0")
    assert max(abs(p.v + p.u) for p in tr.points) < 1e-9


def test_centre_manifold_is_axis_at_minus_half():
    tr = pp.trace_separatrix(-0.5, "S2")
    assert max(abs(p.v) for p in tr.points) < 1e-12


def test_crossing_order_m_minus_three():
    tr = pp.trace_separatrix(-3.0, "S0")
    assert tr.crossing_order()[:4] == ["Q_zero", "P_zero", "u_axis", "v_axis"]
    assert tr.tangent_at_O == "L"


@pytest.mark.parametrize("m", sorted(GAMMA_STAR))
def test_gamma_star_separatrix(m):
    res = pp.gamma_star_separatrix(m)
    assert res.gamma_star == pytest.approx(GAMMA_STAR[m], abs=1e-7)
    assert res.richardson_gap < pp.RICHARDSON_TOL
    if m < -2:
        assert res.gamma_star > (2 / (m + 2) ** 2) ** (1 / 3)
    else:
        assert res.gamma_star < 0


def test_gamma_star_separatrix_exact_at_minus_five_quarters():
    # the first Q = 0 crossing lands on (3/4, -9/32)
    res = pp.gamma_star_separatrix(-1.25)
    assert (res.u_star, res.v_star) == pytest.approx((0.75, -0.28125), abs=1e-8)


def test_gamma_star_regime_guard():
    with pytest.raises(ValueError):
        pp.gamma_star_separatrix(0.0)


def test_cycle_probe_verdicts():
    assert pp.limit_cycle_probe(1.2).found
    assert pp.limit_cycle_probe(1.5).verdict == "center_like"
    assert pp.limit_cycle_probe(3.0).verdict == "spiral_in"
    with pytest.raises(ValueError):
        pp.limit_cycle_probe(0.5)


def test_separatrix_csv_header():
    tr = pp.trace_separatrix(-3.0, "S0", s_max=5.0)
    assert tr.to_csv().splitlines()[0] == "s,u,v"


def test_gamma_star_increases_with_m_between_minus_two_and_minus_one():
    ms = np.linspace(-1.9, -1.1, 9)
    gs = [pp.gamma_star_separatrix(float(m)).gamma_star for m in ms]
    assert all(b > a for a, b in zip(gs, gs[1:]))
    assert all(g < 0 for g in gs)
