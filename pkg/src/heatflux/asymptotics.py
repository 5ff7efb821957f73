"""Tail behaviour of computed solutions: limits, power-law growth and 2/t decay."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import ode_core
from ._dopri import StepBudgetExceeded
from .ode_core import EPS_FAR, IvpSpec, Params, Trajectory

DIVERGENT = math.inf
MIN_WINDOW_POINTS = 50
R2_RELIABLE = 0.999
ALGEBRAIC_EXPONENT = 0.05


class PreconditionError(ValueError):
    pass


class FarFieldNotReached(PreconditionError):
    pass


class ShapeMismatch(PreconditionError):
    pass


class CheckSkipped(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class TailFit:
    exponent_est: float
    coeff_est: float
    window: tuple
    r_squared: float
    target_exponent: float | None = None

    @property
    def verdict(self) -> str:
        return "reliable" if self.r_squared >= R2_RELIABLE else "unreliable"

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["window"] = list(self.window)
        rec["verdict"] = self.verdict
        return rec

    def to_json(self) -> str:
        return json.dumps(self.to_record())


def growth_exponent(m: float) -> float:
    """Power p of the algebraic growth f ~ c t^p of unbounded solutions."""
    return (m + 2.0) / (1.0 - m)


def bound_ceiling(p: Params, alpha: float) -> float | None:
    """Upper bound sqrt(gamma^2 + 2 alpha/(m+2)) on bounded solutions, m > -1."""
    if p.m <= -1.0:
        return None
    arg = p.gamma**2 + 2.0 * alpha / (p.m + 2.0)
    return math.sqrt(arg) if arg >= 0 else None


def lambda_limit(traj: Trajectory, eps_far: float = EPS_FAR) -> float:
    """Limit of f at infinity, or ``DIVERGENT`` (+inf) when f grows without bound.

    Uses f at the dyadic checkpoints T/4, T/2, T. A converged tail returns f(T);
    a tail decaying like a power of t returns 0; otherwise the increments are
    extrapolated geometrically (Aitken).
    """
    if traj.termination.kind != "reached_t_max":
        raise FarFieldNotReached(f"trajectory ended with {traj.termination}")
    T = traj.t_end
    s_half, s_end = traj(T / 2), traj.last
    a, b, c = traj(T / 4).f, s_half.f, s_end.f
    if abs(s_end.fp) < eps_far and abs(c - b) < 10 * eps_far:
        return c
    if abs(s_end.fp) >= abs(s_half.fp):
        raise FarFieldNotReached(f"f' is not decaying at the horizon (f'={s_end.fp:.3g})")
    # power-law decay to zero: the local exponent -t f'/f holds steady,
    # whereas an exponential approach to a nonzero limit collapses it
    if b * c > 0:
        q_half, q_end = -0.5 * T * s_half.fp / b, -T * s_end.fp / c
        if q_end >= ALGEBRAIC_EXPONENT and q_end >= 0.5 * q_half:
            return 0.0
    ceiling = bound_ceiling(traj.params, traj.alpha)
    if ceiling is not None and c > ceiling + 1e-9:
        return DIVERGENT
    d1, d2 = b - a, c - b
    if d1 == 0.0:
        return c
    r = d2 / d1
    if r >= 1.0:
        return DIVERGENT
    if r <= 0.0:
        return c
    return c + d2 * r / (1.0 - r)


def tail_exponent(traj: Trajectory, target: float | None = None) -> TailFit:
    """Log-log least-squares fit of f on the last quarter of the trajectory."""
    if traj.termination.kind != "reached_t_max":
        raise PreconditionError(f"trajectory ended with {traj.termination}")
    T = traj.t_end
    if T < 8.0:
        raise PreconditionError(f"fit window [{0.75 * T}, {T}] too short")
    last = traj.last
    if not (last.f > 0 and last.fp > 0):
        raise PreconditionError("tail is not increasing with f > 0")
    try:
        lam = lambda_limit(traj)
    except FarFieldNotReached as exc:
        raise PreconditionError(str(exc)) from exc
    if lam != DIVERGENT:
        raise PreconditionError(f"bounded tail (lambda ~ {lam:.6g}); nothing to fit")
    t_lo = 0.75 * T
    ts = np.exp(np.linspace(math.log(t_lo), math.log(T), 64))
    fs = np.array([traj(float(t)).f for t in ts])
    if np.any(fs <= 0):
        raise PreconditionError("f changes sign in the fit window")
    x, y = np.log(ts), np.log(fs)
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
    return TailFit(
        exponent_est=float(slope),
        coeff_est=float(math.exp(icpt)),
        window=(float(t_lo), float(T)),
        r_squared=min(max(r2, 0.0), 1.0),
        target_exponent=target,
    )


def converged_tail_fit(
    params: Params,
    alpha: float,
    *,
    t_start: float = 200.0,
    t_limit: float = 6400.0,
    rel_change: float = 0.01,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-12,
) -> tuple[TailFit, Trajectory]:
    """Fit the growth exponent, doubling the horizon until it settles.

    Algebraic tails approach their power law slowly, so a single horizon gives a
    biased exponent. The horizon doubles until two successive estimates agree to
    ``rel_change`` or ``t_limit`` (or the step budget) is reached.
    """
    target = growth_exponent(params.m) if params.m < 1 else None
    prev = None
    best = None
    T = t_start
    while T <= t_limit:
        spec = IvpSpec(params, alpha, t_max=T, rel_tol=rel_tol, abs_tol=abs_tol,
                       events=frozenset())
        try:
            traj = ode_core.integrate(spec)
        except StepBudgetExceeded:
            break
        fit = tail_exponent(traj, target)
        best = (fit, traj)
        if prev is not None and abs(fit.exponent_est - prev) <= rel_change * abs(fit.exponent_est):
            break
        prev = fit.exponent_est
        T *= 2.0
    if best is None:
        raise PreconditionError("no horizon could be integrated")
    return best


def decay_check_2_over_t(traj: Trajectory, cycle_present: bool | None = None) -> float:
    """Max relative deviation of t f(t) from 2 on [T/2, T].

    Only meaningful for m > 3/2 where the tail spirals into the focus/node of the
    planar system. For 1 < m <= 3/2 the check is skipped when a periodic orbit
    is detected (``cycle_present``; probed if not given).
    """
    m = traj.params.m
    if m <= 1.0:
        raise ShapeMismatch(f"2/t decay is specific to m > 1, got m={m}")
    if m <= 1.5:
        if cycle_present is None:
            from .phase_plane import limit_cycle_probe

            cycle_present = limit_cycle_probe(m).found
        if cycle_present:
            raise CheckSkipped("cycle_present")
    if traj.termination.kind != "reached_t_max":
        raise ShapeMismatch(f"trajectory ended with {traj.termination}")
    if len(traj.events_of("fpp_zero")) != 1:
        raise ShapeMismatch("not a concave-convex trajectory")
    last = traj.last
    if not (last.f > 0 and last.fp < 0 and last.fpp > 0):
        raise ShapeMismatch("tail is not positive, decreasing and convex")
    T = traj.t_end
    ts = np.linspace(T / 2, T, 101)
    return float(max(abs(t * traj(float(t)).f - 2.0) / 2.0 for t in ts))


def law_ratio(traj: Trajectory, coeff: float, exponent: float) -> float:
    """f(T) / (coeff T^exponent): tends to 1 when f ~ coeff t^exponent."""
    T = traj.t_end
    return traj.last.f / (coeff * T**exponent)
