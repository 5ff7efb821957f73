"""Registry of verification checks shared by ``heatflux verify`` and the test suite.

Each check returns a ``CheckResult`` holding the measured quantities next to
the thresholds they were held to.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import asymptotics, oracles, phase_plane, shooting
from .ode_core import EPS_FAR, IvpSpec, Params, integrate, residuals

BASE_RTOL = 1e-10
BASE_ATOL = 1e-12


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_record(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed),
                "seconds": round(self.seconds, 3), "details": _jsonable(self.details)}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


REGISTRY: dict = {}


def check(name):
    def deco(fn):
        REGISTRY[name] = fn
        return fn
    return deco


def run_checks(names=None, tol_scale: float = 1.0) -> list[CheckResult]:
    out = []
    for name, fn in REGISTRY.items():
        if names and name not in names:
            continue
        t0 = time.perf_counter()
        try:
            res = fn(tol_scale)
        except Exception as exc:  # a crashing check is a failing check
            res = CheckResult(name, False, {"error": repr(exc)})
        res.seconds = time.perf_counter() - t0
        out.append(res)
    return out


def _tols(scale):
    return BASE_RTOL * scale, BASE_ATOL * scale


# ---------------------------------------------------------------- closed forms

@check("riccati")
def check_riccati(tol_scale=1.0) -> CheckResult:
    """m = -1: bounded slope -1/gamma, pointwise closed form, first integral."""
    rtol, atol = _tols(tol_scale)
    slopes, pointwise, ric = {}, {}, {}
    for g in (-0.5, -1.0, -2.0, -4.0):
        iv = shooting.alpha_interval(Params(-1.0, g), rel_tol=rtol, abs_tol=atol, tol=1e-10)
        slopes[g] = abs(iv.lo - (-1.0 / g))
        traj = integrate(IvpSpec(Params(-1.0, g), iv.lo, t_max=20.0, rel_tol=rtol, abs_tol=atol))
        ts = np.linspace(0.0, 20.0, 201)
        pointwise[g] = max(abs(traj(t).f - oracles.riccati_bounded(g, t)[0]) for t in ts)
        ric[g] = oracles.riccati_residual(traj)
    ok = (max(slopes.values()) < 1e-6 and max(pointwise.values()) < 1e-5
          and max(ric.values()) < 1e-6)
    return CheckResult("riccati", ok, {"slope_error": slopes, "pointwise_error": pointwise,
                                       "riccati_residual": ric})


@check("order")
def check_order(tol_scale=1.0) -> CheckResult:
    """Global error of the m = -1 bounded solution at t = 10 shrinks with tolerance."""
    tols = [1e-5, 1e-6, 1e-7, 1e-8, 1e-9]
    errs = []
    for rt in tols:
        rt *= tol_scale
        traj = integrate(IvpSpec(Params(-1.0, -1.0), 1.0, t_max=10.0, rel_tol=rt, abs_tol=rt * 1e-2))
        errs.append(abs(traj.last.f - oracles.riccati_bounded(-1.0, 10.0)[0]))
    slope = float(np.polyfit(np.log(tols), np.log(errs), 1)[0])
    ok = all(b < a for a, b in zip(errs, errs[1:])) and 0.6 <= slope <= 1.3
    return CheckResult("order", ok, {"rel_tol": tols, "error": errs, "slope": slope})


@check("explicit_m1")
def check_explicit_m1(tol_scale=1.0) -> CheckResult:
    """m = 1: shot slope 1/(3 eta) and limit 1/(9 eta^2) - gamma."""
    rtol, atol = _tols(tol_scale)
    d = {}
    ok = True
    for g in (-1.0, 0.0, 1.0, 2.0):
        ex = oracles.ExplicitM1(g, oracles.m1_eta(g))
        rep = shooting.shoot_concave(Params(1.0, g), rel_tol=rtol, abs_tol=atol)
        ea, el = abs(rep.alpha - ex.alpha), abs(rep.lambda_est - ex.limit)
        d[g] = {"alpha_error": ea, "lambda_error": el}
        ok &= ea < 1e-6 and el < 1e-5
    return CheckResult("explicit_m1", ok, d)


@check("blasius")
def check_blasius(tol_scale=1.0) -> CheckResult:
    rtol, atol = _tols(tol_scale)
    worst = 0.0
    for g, a in ((0.0, 1.2), (0.5, 2.0), (-1.0, 0.5)):
        traj = integrate(IvpSpec(Params(-0.5, g), a, rel_tol=rtol, abs_tol=atol))
        worst = max(worst, oracles.blasius_check(traj))
    return CheckResult("blasius", worst < 1e-6, {"max_scaled_residual": worst})


@check("scaling")
def check_scaling(tol_scale=1.0) -> CheckResult:
    """gamma = 0 profile rescaled to gamma = -1 at m = -0.75."""
    g = oracles.gamma_zero_profile(-0.75)
    spec = oracles.translate_scale(g, -1.0)
    rep = shooting.solve(spec.params, spec.alpha)
    direct = shooting.shoot_concave(Params(-0.75, -1.0)).alpha
    traj = rep.trajectory
    ok = rep.accepted and rep.classification.boundedness == "bounded" and abs(traj.y[0, 0] - 1.0) < 1e-12
    ok &= abs(spec.alpha - direct) < 1e-6
    return CheckResult("scaling", ok, {"alpha_scaled": spec.alpha, "alpha_shot": direct,
                                       "shape": rep.classification.shape})


# ---------------------------------------------------------------- phase plane

@check("equilibria")
def check_equilibria(tol_scale=1.0) -> CheckResult:
    """Type of A on both sides of each threshold; O eigenvalues {0, -(m+2)}."""
    eps = 1e-10
    lo, hi = phase_plane.M_NODE_UNSTABLE, phase_plane.M_NODE_STABLE
    expect = [
        (lo - 1.0, "unstable_node"), (lo, "unstable_node"), (lo + eps, "unstable_focus"),
        (0.0, "unstable_focus"), (1.5 - eps, "unstable_focus"), (1.5, "center"),
        (1.5 + eps, "stable_focus"), (hi - eps, "stable_focus"), (hi, "stable_node"),
        (5.0, "stable_node"),
    ]
    got = {m: phase_plane.equilibria(m)[1].kind for m, _ in expect}
    ok = all(got[m] == k for m, k in expect)
    eig_err = 0.0
    for m in np.linspace(-5, 6, 23):
        o, a = phase_plane.equilibria(float(m))
        num_o = np.sort_complex(np.linalg.eigvals(phase_plane.jacobian(m, 0.0, 0.0)))
        num_a = np.sort_complex(np.linalg.eigvals(phase_plane.jacobian(m, -0.5, 0.5)))
        eig_err = max(eig_err,
                      float(np.max(np.abs(num_o - np.sort_complex(np.array(o.eigenvalues))))),
                      float(np.max(np.abs(num_a - np.sort_complex(np.array(a.eigenvalues))))))
        P, Q = phase_plane.vector_field(m, -0.5, 0.5)
        ok &= abs(P) < 1e-12 and abs(Q) < 1e-12
    ok &= eig_err < 1e-10
    for m in (lo, hi):
        tr = 1.5 - m
        ok &= abs(tr * tr - 6.0) < 1e-10
    return CheckResult("equilibria", ok, {"kinds": {str(m): k for m, k in got.items()},
                                          "eigenvalue_error": eig_err})


GAMMA_STAR_M = (-4.0, -3.0, -2.5, -1.75, -1.5, -1.25)


@check("gamma_star")
def check_gamma_star(tol_scale=1.0) -> CheckResult:
    rtol, atol = _tols(tol_scale)
    d = {}
    ok = True
    for m in GAMMA_STAR_M:
        gs = shooting.gamma_star_shooting(m, rel_tol=rtol, abs_tol=atol)
        gp = phase_plane.gamma_star_separatrix(m).gamma_star
        side = gs > shooting.lower_gamma_bound(m) and gp > shooting.lower_gamma_bound(m) \
            if m < -2 else gs < 0 and gp < 0
        d[m] = {"shooting": gs, "separatrix": gp, "difference": abs(gs - gp), "sign_ok": side}
        ok &= side and abs(gs - gp) < 1e-4
    return CheckResult("gamma_star", ok, d)


@check("conjugacy")
def check_conjugacy(tol_scale=1.0, n: int = 20, seed: int = 7) -> CheckResult:
    """Blown-up trajectory vs the planar system integrated from its first point."""
    rng = np.random.default_rng(seed)
    rtol, atol = _tols(tol_scale)
    worst, used = 0.0, []
    while len(used) < n:
        m = float(rng.uniform(-3.5, 3.0))
        if abs(m + 2) < 0.2:
            continue
        g = float(rng.uniform(-3.0, -0.3))
        a = float(rng.uniform(0.1, 3.0))
        traj = integrate(IvpSpec(Params(m, g), a, t_max=6.0, rel_tol=rtol, abs_tol=atol,
                                 events=frozenset()))
        if traj.termination.kind != "reached_t_max" or traj.y[:, 0].min() < 0.2:
            continue
        curve = phase_plane.blowup_transform(traj, 0.0)
        p0 = curve.points[0]
        orbit = phase_plane.integrate_planar(m, p0.u, p0.v, curve.points[-1].s, box=1e6)
        if orbit.status != "reached_end":
            continue
        err = max(max(abs(orbit(pt.s)[0] - pt.u), abs(orbit(pt.s)[1] - pt.v))
                  for pt in curve.points)
        worst = max(worst, err)
        used.append((m, g, a))
    return CheckResult("conjugacy", worst < 1e-5, {"cases": used, "max_uv_error": worst})


@check("separatrix_shapes")
def check_separatrix_shapes(tol_scale=1.0) -> CheckResult:
    w = phase_plane.trace_separatrix(-1.0, "S0")
    dev_w = max(abs(p.v + p.u) for p in w.points)
    c = phase_plane.trace_separatrix(-0.5, "S2")
    dev_c = max(abs(p.v) for p in c.points)
    order = phase_plane.trace_separatrix(-3.0, "S0").crossing_order()[:4]
    ok = dev_w < 1e-6 and dev_c < 1e-8 and order == ["Q_zero", "P_zero", "u_axis", "v_axis"]
    return CheckResult("separatrix_shapes", ok, {"m=-1 |v+u|": dev_w, "m=-1/2 |v|": dev_c,
                                                 "m=-3 order": order})


@check("cycles")
def check_cycles(tol_scale=1.0) -> CheckResult:
    r12 = phase_plane.limit_cycle_probe(1.2)
    r15 = phase_plane.limit_cycle_probe(1.5)
    r3 = phase_plane.limit_cycle_probe(3.0)
    ok = r12.found and r15.verdict == "center_like" and r3.verdict == "spiral_in"
    return CheckResult("cycles", ok, {"m=1.2": r12.verdict, "v_cycle": r12.v_cycle,
                                      "m=1.5": r15.verdict, "m=3": r3.verdict})


# ---------------------------------------------------------------- regimes

def regime_counts(tol_scale=1.0) -> dict:
    """Admissible alpha-sets at the sample points of the regime table."""
    rtol, atol = _tols(tol_scale)
    kw = dict(rel_tol=rtol, abs_tol=atol)
    gs3 = shooting.gamma_star_shooting(-3.0, **kw)
    gs15 = shooting.gamma_star_shooting(-1.5, **kw)
    out = {}

    def put(label, m, g):
        out[label] = (m, g, shooting.alpha_interval(Params(m, g), **kw))

    put("m=-3,gamma=1", -3.0, 1.0)
    put("m=-1.5,gamma=gamma*+0.5", -1.5, gs15 + 0.5)
    for m in (0.0, 1.0):
        for g in (-1.0, 0.0, 1.0):
            put(f"m={m:g},gamma={g:g}", m, g)
    put("m=-3,gamma=2gamma*", -3.0, 2.0 * gs3)
    put("m=2,gamma=-1", 2.0, -1.0)
    put("m=-1,gamma=-1", -1.0, -1.0)
    return out


def m_minus_two_grid(tol_scale=1.0, n: int = 11) -> int:
    """Number of accepted trajectories at m = -2 on a gamma x alpha grid over [-5, 5]^2."""
    rtol, atol = _tols(tol_scale)
    hits = 0
    for g in np.linspace(-5, 5, n):
        for a in np.linspace(-5, 5, n):
            _, cls = shooting.run(Params(-2.0, float(g)), float(a), rel_tol=rtol, abs_tol=atol)
            hits += cls.accepted
    return hits


@check("regime_table")
def check_regime_table(tol_scale=1.0) -> CheckResult:
    rows = regime_counts(tol_scale)
    kinds = {k: v[2].kind for k, v in rows.items()}
    expect = {
        "m=-3,gamma=1": "empty", "m=-1.5,gamma=gamma*+0.5": "empty",
        "m=-3,gamma=2gamma*": "interval", "m=2,gamma=-1": "interval",
        "m=-1,gamma=-1": "interval",
    }
    for m in (0.0, 1.0):
        for g in (-1.0, 0.0, 1.0):
            expect[f"m={m:g},gamma={g:g}"] = "singleton"
    ok = all(kinds[k] == v for k, v in expect.items())
    iv = rows["m=-1,gamma=-1"][2]
    lo_rep = shooting.solve(Params(-1.0, -1.0), iv.lo)
    hi_rep = shooting.solve(Params(-1.0, -1.0), iv.lo + 0.5)
    ok &= math.isinf(iv.hi) and lo_rep.classification.boundedness == "bounded"
    ok &= hi_rep.classification.boundedness == "unbounded"
    hits = m_minus_two_grid(tol_scale)
    ok &= hits == 0
    return CheckResult("regime_table", ok, {
        "kinds": kinds,
        "intervals": {k: [v[2].lo, v[2].hi] for k, v in rows.items()},
        "m=-2 accepted": hits,
    })


# ---------------------------------------------------------------- asymptotics

UNBOUNDED_CASES = {  # m: (gamma, alpha) inside the unbounded family
    -1.75: (-10.0, None), -1.5: (-6.2, None), -1.25: (-3.0, None),
    -0.9: (-1.0, 1.5), -0.6: (-1.0, 1.5),
}


@check("exponents")
def check_exponents(tol_scale=1.0) -> CheckResult:
    rtol, atol = _tols(tol_scale)
    d = {}
    ok = True
    for m, (g, a) in UNBOUNDED_CASES.items():
        p = Params(m, g)
        if a is None:
            iv = shooting.alpha_interval(p, rel_tol=rtol, abs_tol=atol)
            a = math.sqrt(iv.lo * iv.hi)
        fit, _ = asymptotics.converged_tail_fit(p, a, rel_tol=rtol, abs_tol=atol)
        target = asymptotics.growth_exponent(m)
        rel = abs(fit.exponent_est / target - 1.0)
        d[m] = {"alpha": a, "exponent": fit.exponent_est, "target": target, "rel_error": rel,
                "window": fit.window}
        ok &= rel < 0.05
    # m = -1: f ~ sqrt(-2(1 + gamma alpha)) sqrt(t)
    g, a = -1.0, 2.0
    fit, traj = asymptotics.converged_tail_fit(Params(-1.0, g), a, rel_tol=rtol, abs_tol=atol)
    c = math.sqrt(-2.0 * (1.0 + g * a))
    ratio = asymptotics.law_ratio(traj, c, 0.5)
    d[-1.0] = {"exponent": fit.exponent_est, "coeff_fit": fit.coeff_est, "coeff": c,
               "ratio_at_horizon": ratio}
    ok &= abs(fit.exponent_est / 0.5 - 1) < 0.05 and abs(ratio - 1) < 0.05
    # m = 3: interior concave-convex solution decays like 2/t
    iv = shooting.alpha_interval(Params(3.0, 0.0), rel_tol=rtol, abs_tol=atol)
    a3 = 0.5 * (iv.lo + iv.hi)
    traj = integrate(IvpSpec(Params(3.0, 0.0), a3, t_max=400.0, rel_tol=rtol, abs_tol=atol))
    dev = asymptotics.decay_check_2_over_t(traj)
    d[3.0] = {"alpha": a3, "max_rel_dev_2_over_t": dev}
    ok &= dev < 0.10
    return CheckResult("exponents", ok, d)


@check("lambda")
def check_lambda(tol_scale=1.0) -> CheckResult:
    rtol, atol = _tols(tol_scale)
    r1 = shooting.solve(Params(-1.0, -1.0), 1.0, rel_tol=rtol, abs_tol=atol)
    r2 = shooting.shoot_concave(Params(1.0, 0.0), rel_tol=rtol, abs_tol=atol)
    e1 = abs(r1.lambda_est - math.sqrt(3.0))
    e2 = abs(r2.lambda_est - 9.0 ** (-1.0 / 3.0))
    # boundary vs interior of the alpha-interval for m = -3 above gamma*
    gs = phase_plane.gamma_star_separatrix(-3.0).gamma_star
    p = Params(-3.0, gs + 0.3)
    iv = shooting.alpha_interval(p, rel_tol=rtol, abs_tol=atol)
    lam_lo = shooting.solve(p, iv.lo).lambda_est
    lam_hi = shooting.solve(p, iv.hi).lambda_est
    lam_mid = shooting.solve(p, math.sqrt(iv.lo * iv.hi)).lambda_est
    ok = e1 < 1e-5 and e2 < 1e-5 and lam_lo < -0.05 and lam_hi < -0.05
    ok &= abs(lam_mid) < 0.5 * min(abs(lam_lo), abs(lam_hi))
    return CheckResult("lambda", ok, {"m=-1 error": e1, "m=1 error": e2,
                                      "m=-3 boundary": [lam_lo, lam_hi], "m=-3 interior": lam_mid})


# ---------------------------------------------------------------- invariants

def random_cases(n: int = 200, seed: int = 2024, shot_fraction: float = 0.25):
    """(m, gamma, alpha) triples: uniform draws plus concave solutions found by shooting."""
    rng = np.random.default_rng(seed)
    cases = []
    n_shot = int(n * shot_fraction)
    while len(cases) < n - n_shot:
        m = float(rng.uniform(-4.0, 4.0))
        if abs(m + 2) < 0.05:
            continue
        cases.append((m, float(rng.uniform(-3.0, 3.0)), float(rng.uniform(0.0, 3.0))))
    while len(cases) < n:
        m = float(rng.uniform(-0.95, 4.0))
        g = float(rng.uniform(-2.0, 2.0))
        try:
            a = shooting.shoot_concave(Params(m, g)).alpha
        except shooting.ShootingError:
            continue
        cases.append((m, g, a))
    return cases


def fpp_at_horizon(p: Params, alpha: float, rtol: float, atol: float,
                   eps_far: float = EPS_FAR, max_doublings: int = 4) -> tuple[float, float, float]:
    """|f''| at the horizon and its local decay power q in |f''| ~ t^-q.

    The horizon doubles (up to 16x) while |f''| is above 10 eps_far and still
    decaying.
    """
    T = 50.0
    for k in range(max_doublings + 1):
        traj = integrate(IvpSpec(p, alpha, t_max=T, rel_tol=rtol, abs_tol=atol, events=frozenset()))
        fpp, fpp_half = abs(traj.last.fpp), abs(traj(T / 2).fpp)
        q = math.log2(fpp_half / fpp) if fpp > 0 and fpp_half > 0 else math.inf
        if fpp < 10 * eps_far or q <= 0 or k == max_doublings:
            return fpp, T, q
        T *= 2
    raise AssertionError("unreachable")


FPP_DECAY_POWER = 0.5


def invariant_violations(m, g, a, rtol=BASE_RTOL, atol=BASE_ATOL) -> list[str]:
    p = Params(m, g)
    traj, cls = shooting.run(p, a, rel_tol=rtol, abs_tol=atol)
    bad = []
    fpp = traj.y[:, 2]
    if m <= -0.5:
        if np.any(fpp[1:] >= 0):
            bad.append("sign_propagation")
    else:
        pos = np.nonzero(fpp >= 0)[0]
        if len(pos) and np.any(fpp[pos[0] + 1:] <= 0):
            bad.append("sign_propagation")
    for e in traj.events:
        far = abs(e.state.fp) < EPS_FAR and abs(e.state.fpp) < EPS_FAR
        if far:
            # both derivatives are at noise level in the far field
            continue
        if e.kind == "fp_zero" and abs(e.state.fpp) < 1e-10:
            bad.append("simultaneous_zero")
        if e.kind == "fpp_zero" and abs(e.state.fp) < 1e-10:
            bad.append("simultaneous_zero")
    if not cls.accepted:
        return bad
    if m > -1 and cls.shape == "concave" and cls.boundedness == "bounded":
        ceiling = asymptotics.bound_ceiling(p, a)
        f = traj.y[:, 0]
        if f.min() < -g - 1e-9 or f.max() > ceiling + 1e-9:
            bad.append("bounds")
    if -2 < m < -1 and not (g < 0 and a >= -1.0 / ((m + 2) * g) - 1e-9):
        bad.append("necessary_condition")
    if m == -1 and not (g < 0 and a >= -1.0 / g - 1e-9):
        bad.append("necessary_condition")
    if m >= -0.5 and cls.boundedness != "bounded":
        bad.append("boundedness")
    fpp_T, _, q = fpp_at_horizon(p, a, rtol, atol)
    # slowly growing tails have f'' ~ t^(p-2); accept a measured power decay
    if fpp_T >= 10 * EPS_FAR and not (cls.boundedness == "unbounded" and q >= FPP_DECAY_POWER):
        bad.append("fpp_tail")
    return bad


@check("invariants")
def check_invariants(tol_scale=1.0, n: int = 200) -> CheckResult:
    rtol, atol = _tols(tol_scale)
    failures = {}
    accepted = 0
    for m, g, a in random_cases(n):
        bad = invariant_violations(m, g, a, rtol, atol)
        accepted += shooting.run(Params(m, g), a, rel_tol=rtol, abs_tol=atol)[1].accepted
        if bad:
            failures[f"{m:.4f},{g:.4f},{a:.6f}"] = bad
    return CheckResult("invariants", not failures,
                       {"cases": n, "accepted": accepted, "failures": failures})


@check("identities")
def check_identities(tol_scale=1.0) -> CheckResult:
    """Integral identities on accepted solutions, and their decrease with tolerance."""
    rtol, atol = _tols(tol_scale)
    sols = [(-1.0, -1.0, 1.0), (-1.0, -1.0, 2.0), (1.0, 0.0, 3 ** (-1 / 3)), (2.0, -1.0, 0.0),
            (-3.0, 5.2277, 1.0), (-1.5, -6.2, 1.0), (-0.75, 1.0, None), (0.0, 1.0, None)]
    worst = 0.0
    mono = True
    rows = {}
    for m, g, a in sols:
        p = Params(m, g)
        if a is None:
            a = shooting.shoot_concave(p).alpha
        rep = shooting.solve(p, a, rel_tol=rtol, abs_tol=atol)
        if not rep.accepted:
            rows[f"{m},{g}"] = "not accepted"
            mono = False
            continue
        worst = max(worst, max(rep.identity_residuals))
        seq = []
        for rt in (1e-6, 1e-8, 1e-10):
            tr = integrate(IvpSpec(p, a, rel_tol=rt * tol_scale, abs_tol=rt * tol_scale * 1e-2))
            seq.append(residuals(tr, 0.0, tr.t_end))
        dec = all(all(b[i] < a_[i] for i in range(3)) for a_, b in zip(seq, seq[1:]))
        mono &= dec
        rows[f"{m},{g},{a:.6f}"] = {"at_tol": rep.identity_residuals, "decreasing": dec}
    return CheckResult("identities", worst < 1e-6 and mono, {"max_residual": worst, "cases": rows})


@check("horizon")
def check_horizon(tol_scale=1.0) -> CheckResult:
    """Doubling t_max moves reported slopes, gamma* and limits by < 1e-5."""
    rtol, atol = _tols(tol_scale)
    kw = dict(rel_tol=rtol, abs_tol=atol)
    d = {}
    for label, fn in {
        "alpha* m=1,gamma=0": lambda T: shooting.shoot_concave(Params(1.0, 0.0), t_max=T, **kw).alpha,
        "alpha* m=0,gamma=1": lambda T: shooting.shoot_concave(Params(0.0, 1.0), t_max=T, **kw).alpha,
        "alpha* m=-0.75,gamma=-1": lambda T: shooting.shoot_concave(Params(-0.75, -1.0), t_max=T, **kw).alpha,
        "alpha_lo m=-1,gamma=-2": lambda T: shooting.alpha_interval(Params(-1.0, -2.0), t_max=T, tol=1e-10, **kw).lo,
        "alpha_lo m=-3,gamma=3": lambda T: shooting.alpha_interval(Params(-3.0, 3.0), t_max=T, **kw).lo,
        "gamma* m=-3": lambda T: shooting.gamma_star_shooting(-3.0, t_max=T, **kw),
        "gamma* m=-1.5": lambda T: shooting.gamma_star_shooting(-1.5, t_max=T, **kw),
        "lambda m=-1,gamma=-1": lambda T: shooting.solve(Params(-1.0, -1.0), 1.0, t_max=T, **kw).lambda_est,
        "lambda m=1,gamma=1": lambda T: shooting.shoot_concave(Params(1.0, 1.0), t_max=T, **kw).lambda_est,
        "lambda m=2,gamma=-1 (alpha=0)": lambda T: shooting.solve(Params(2.0, -1.0), 0.0, t_max=T, **kw).lambda_est,
        "lambda m=-3,gamma=3 (lower edge)": lambda T: shooting.solve(
            Params(-3.0, 3.0), shooting.alpha_interval(Params(-3.0, 3.0), t_max=T, **kw).lo,
            t_max=T, **kw).lambda_est,
    }.items():
        v1, v2 = fn(50.0), fn(100.0)
        d[label] = {"t50": v1, "t100": v2, "change": abs(v2 - v1)}
    ok = all(v["change"] < 1e-5 for v in d.values())
    return CheckResult("horizon", ok, d)
