"""Shooting on alpha = f'(0): classification, concave solutions, admissible
alpha-sets and the critical gamma* by bisection on existence.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import ode_core
from ._dopri import StepBudgetExceeded
from .asymptotics import DIVERGENT, FarFieldNotReached, lambda_limit
from .ode_core import EPS_FAR, T_MAX, IvpSpec, Params, Trajectory, fmt

ACCEPTED_SHAPES = ("concave", "concave_convex")
REJECTED_SHAPES = ("rejected_fp_vanishes", "rejected_blowup", "rejected_divergent_fp")
BISECT_TOL = 1e-14
EDGE_TOL = 1e-8
IDENTITY_BUDGET = 1e-6


class ShootingError(ValueError):
    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.kind = kind


class RegimeError(ValueError):
    """Parameters outside the regime an operation is defined for."""


@dataclass(frozen=True)
class Classification:
    shape: str
    boundedness: str = "not_applicable"  # bounded | unbounded | not_applicable
    lam: float | None = None
    reason: str = ""
    # time at which the rejection became certain (None when accepted)
    witness_t: float | None = None

    @property
    def accepted(self) -> bool:
        return self.shape in ACCEPTED_SHAPES

    def to_record(self) -> dict:
        return {
            "shape": self.shape,
            "boundedness": self.boundedness,
            "lambda": self.lam,
            "reason": self.reason,
        }


def _reject(shape, reason, t):
    return Classification(shape=shape, reason=reason, witness_t=float(t))


def _shape_low_m(traj: Trajectory, eps_far: float) -> Classification:
    """m <= -1/2: f'' stays negative, so f' must stay positive and decay."""
    m = traj.params.m
    if traj.alpha <= 0:
        return _reject("rejected_fp_vanishes", "f'(0) <= 0 with f'' < 0", 0.0)
    for e in traj.events:
        if e.kind == "fp_zero":
            return _reject("rejected_fp_vanishes", "f' vanishes while f'' < 0", e.t)
        if e.kind == "f_zero" and m < -2 and e.state.fp > 0:
            return _reject("rejected_fp_vanishes", "f turns positive (f' must then vanish)", e.t)
        if e.kind == "fpp_zero":
            return _reject("rejected_divergent_fp", "f'' changed sign", e.t)
    if traj.termination.kind == "blowup_at":
        return _reject("rejected_blowup", "finite-time blow-up", traj.termination.t)
    if traj.termination.kind == "event_stop":
        return _reject("rejected_divergent_fp", "stopped on event", traj.termination.t)
    if m == -0.5 and not ode_core.far_field_ok(traj, eps_far):
        return _reject("rejected_divergent_fp", "horizon: f' does not decay", traj.t_end)
    return Classification(shape="concave")


ALGEBRAIC_DECAY = 0.5   # local exponent -t f'/f above which f -> 0 like a power
SPIRAL_GROWTH = 1.05    # allowed growth of the distance to A between dyadic windows
NEAR_FOCUS = 0.5        # |OA| = 0.707; tails drifting toward O stay near that
SLOPE_AT_INFINITY = 1e-9


def _focus_distance(traj: Trajectory, t_lo: float, t_hi: float) -> float:
    """max |(u, v) - A| over [t_lo, t_hi] with u = f'/f^2, v = f''/f^3."""
    worst = 0.0
    for t in np.exp(np.linspace(math.log(t_lo), math.log(t_hi), 24)):
        s = traj(float(t))
        worst = max(worst, math.hypot(s.fp / s.f**2 + 0.5, s.fpp / s.f**3 - 0.5))
    return worst


def _convex_tail(traj: Trajectory) -> Classification:
    """Accept a positive, decreasing, convex tail only if it can persist.

    Either f decays like a power (the orbit settles on A or a cycle around
    it), or f tends to a positive limit with f' + f''/((m+2) f), the
    projected value of f' at infinity, equal to zero.
    """
    T = traj.t_end
    last = traj.last
    if _algebraic_tail(traj):
        late = _focus_distance(traj, T / 2, T)
        if late <= NEAR_FOCUS and late <= SPIRAL_GROWTH * _focus_distance(traj, T / 4, T / 2):
            return Classification(shape="concave_convex")
        return _reject("rejected_divergent_fp", "horizon: tail is not settling onto A", T)
    slope_inf = last.fp + last.fpp / ((traj.params.m + 2.0) * last.f)
    if abs(slope_inf) <= SLOPE_AT_INFINITY and abs(last.fpp) < EPS_FAR:
        return Classification(shape="concave_convex")
    return _reject("rejected_divergent_fp",
                   f"horizon: f' tends to {slope_inf:.3g}, not 0", T)


def _shape_high_m(traj: Trajectory, eps_far: float) -> Classification:
    """m > -1/2: concave, or concave-convex after a single inflection."""
    inflected = False
    for e in traj.events:
        if e.kind == "fpp_zero":
            if inflected:
                return _reject("rejected_divergent_fp", "second inflection", e.t)
            if e.state.fp > 0:
                return _reject("rejected_divergent_fp", "convex while increasing", e.t)
            inflected = True
        elif e.kind == "fp_zero" and inflected:
            return _reject("rejected_divergent_fp", "f' turns positive after inflection", e.t)
        elif e.kind == "f_zero" and e.state.fp < 0:
            return _reject("rejected_divergent_fp", "f crosses zero while decreasing", e.t)
    if traj.termination.kind == "blowup_at":
        return _reject("rejected_blowup", "finite-time blow-up", traj.termination.t)
    if traj.termination.kind == "event_stop":
        return _reject("rejected_divergent_fp", "stopped on event", traj.termination.t)
    last = traj.last
    if inflected:
        if last.f > 0 and last.fp <= 0 and last.fpp >= 0:
            return _convex_tail(traj)
        return _reject("rejected_divergent_fp", "horizon: tail leaves the convex decreasing shape", traj.t_end)
    if ode_core.far_field_ok(traj, eps_far):
        return Classification(shape="concave")
    if last.fp < 0:
        return _reject("rejected_divergent_fp", "horizon: f' negative, no inflection yet", traj.t_end)
    return _reject("rejected_divergent_fp", "horizon: f' does not decay", traj.t_end)


def classify(traj: Trajectory, eps_far: float = EPS_FAR) -> Classification:
    """Shape from event witnesses, boundedness from the tail limit of f."""
    if traj.params.m <= -0.5:
        cls = _shape_low_m(traj, eps_far)
    else:
        cls = _shape_high_m(traj, eps_far)
    if not cls.accepted:
        return cls
    try:
        lam = lambda_limit(traj, eps_far)
    except FarFieldNotReached as exc:
        return _reject("rejected_divergent_fp", f"horizon: {exc}", traj.t_end)
    if lam == DIVERGENT:
        return Classification(shape=cls.shape, boundedness="unbounded")
    return Classification(shape=cls.shape, boundedness="bounded", lam=float(lam))


@dataclass(frozen=True)
class SolutionReport:
    params: Params
    alpha: float
    classification: Classification
    lambda_est: float | None
    residual_far: float
    identity_residuals: tuple
    t_max: float = T_MAX
    trajectory: Trajectory | None = field(default=None, repr=False, compare=False)

    @property
    def accepted(self) -> bool:
        return self.classification.accepted

    def to_record(self) -> dict:
        return {
            "params": {"m": self.params.m, "gamma": self.params.gamma},
            "alpha": self.alpha,
            "classification": self.classification.to_record(),
            "lambda_est": self.lambda_est,
            "residual_far": self.residual_far,
            "identity_residuals": list(self.identity_residuals),
            "t_max": self.t_max,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record())

    def csv_row(self) -> list[str]:
        c = self.classification
        lam = "" if self.lambda_est is None else fmt(self.lambda_est)
        return [fmt(self.params.m), fmt(self.params.gamma), fmt(self.alpha),
                c.shape, c.boundedness, lam, fmt(self.residual_far)]


SWEEP_HEADER = ["m", "gamma", "alpha", "shape", "bounded", "lambda", "residual_far"]


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


def _decisive(ev, earlier) -> bool:
    """Rejection witnesses for m > -1/2 (mirrors ``_shape_high_m``)."""
    inflected = any(e.kind == "fpp_zero" for e in earlier)
    if ev.kind == "fpp_zero":
        return inflected or ev.state.fp > 0
    if ev.kind == "fp_zero":
        return inflected
    return ev.state.fp < 0


def _terminal_kinds(m: float) -> frozenset:
    # for m <= -1/2 a vanishing f' is final; stopping there saves the blow-up tail
    return frozenset({"fp_zero"}) if m <= -0.5 else frozenset()


def run(p: Params, alpha: float, t_max: float = T_MAX, rel_tol: float = 1e-10,
        abs_tol: float = 1e-12, eps_far: float = EPS_FAR) -> tuple[Trajectory, Classification]:
    """Integrate and classify.

    The horizon is doubled once when a rejection is only horizon-limited and
    f' is still decaying, and once more to confirm a tail that decays like a
    power (such tails can pass close to A before drifting away).
    """
    stop = _decisive if p.m > -0.5 else None

    def attempt(T):
        spec = IvpSpec(p, alpha, t_max=T, rel_tol=rel_tol, abs_tol=abs_tol,
                       terminal=_terminal_kinds(p.m))
        tr = ode_core.integrate(spec, stop_when=stop)
        return tr, classify(tr, eps_far)

    traj, cls = attempt(t_max)
    if not cls.accepted and cls.reason.startswith("horizon") and _fp_decaying(traj):
        traj, cls = attempt(2 * t_max)
    if cls.shape == "concave_convex" and _algebraic_tail(traj):
        traj, cls = attempt(2 * traj.t_end)
    return traj, cls


def _algebraic_tail(traj: Trajectory) -> bool:
    s = traj.last
    return -traj.t_end * s.fp / s.f >= ALGEBRAIC_DECAY


def _fp_decaying(traj: Trajectory) -> bool:
    if traj.termination.kind != "reached_t_max":
        return False
    T = traj.t_end
    return abs(traj.last.fp) < abs(traj(T / 2).fp)


def solve(p: Params, alpha: float, *, t_max: float = T_MAX, rel_tol: float = 1e-10,
          abs_tol: float = 1e-12, eps_far: float = EPS_FAR) -> SolutionReport:
    traj, cls = run(p, alpha, t_max, rel_tol, abs_tol, eps_far)
    if cls.accepted:
        res = tuple(float(x) for x in ode_core.residuals(traj, 0.0, traj.t_end))
    else:
        res = (math.nan, math.nan, math.nan)
    return SolutionReport(
        params=p,
        alpha=float(alpha),
        classification=cls,
        lambda_est=cls.lam,
        residual_far=abs(traj.last.fp),
        identity_residuals=res,
        t_max=traj.t_end,
        trajectory=traj,
    )


# ---------------------------------------------------------------- concave shooting

def _too_large(p: Params, alpha: float, t_max: float, rel_tol: float, abs_tol: float) -> bool:
    """Dichotomy for the concave solution: True if alpha overshoots it."""
    if alpha <= 0:
        return False
    spec = IvpSpec(p, alpha, t_max=t_max, rel_tol=rel_tol, abs_tol=abs_tol,
                   events=frozenset({"fp_zero", "fpp_zero"}),
                   terminal=frozenset({"fp_zero", "fpp_zero"}))
    traj = ode_core.integrate(spec)
    if traj.events:
        return traj.events[0].kind == "fpp_zero"
    if traj.termination.kind == "blowup_at":
        return traj.last.fp > 0
    if p.m <= -0.5:
        return True
    s = traj.last
    if s.f <= 0:
        return s.fp > 0
    # sign of the growing mode around the decaying tail f'' = -(m+2) f f'
    return s.fp + s.fpp / ((p.m + 2.0) * s.f) > 0


def shoot_concave(p: Params, alpha_bracket: tuple | None = None, *, t_max: float = T_MAX,
                  rel_tol: float = 1e-10, abs_tol: float = 1e-12,
                  eps_far: float = EPS_FAR, tol: float = BISECT_TOL) -> SolutionReport:
    """Bisection for the concave bounded solution (the smallest admissible slope
    when -1 < m <= -1/2)."""
    if not p.m > -1:
        raise RegimeError(f"concave shooting needs m > -1, got m={p.m}")

    def big(a):
        return _too_large(p, a, t_max, rel_tol, abs_tol)

    if alpha_bracket is None:
        lo, hi = 0.0, 1.0
        for _ in range(60):
            if big(hi):
                break
            lo, hi = hi, 2.0 * hi
        else:
            raise ShootingError("no_sign_change", "no overshooting slope found")
    else:
        lo, hi = map(float, alpha_bracket)
        if big(lo) or not big(hi):
            raise ShootingError("no_sign_change", f"bracket [{lo}, {hi}] does not straddle")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if big(mid):
            hi = mid
        else:
            lo = mid
    # the boundary solution itself is the limit from the overshooting side
    # when m <= -1/2, so try that end first
    ends = (hi, 0.5 * (lo + hi), lo) if p.m <= -0.5 else (0.5 * (lo + hi), hi, lo)
    for alpha in ends:
        rep = solve(p, alpha, t_max=t_max, rel_tol=rel_tol, abs_tol=abs_tol, eps_far=eps_far)
        if rep.accepted:
            return rep
    raise ShootingError("horizon_exhausted", f"alpha={ends[0]!r}: {rep.classification.reason}")


# ---------------------------------------------------------------- alpha intervals

@dataclass(frozen=True)
class AlphaInterval:
    lo: float
    hi: float
    kind: str  # empty | singleton | interval

    def to_record(self) -> dict:
        return {"lo": _json_num(self.lo), "hi": _json_num(self.hi), "kind": self.kind}

    def to_json(self) -> str:
        return json.dumps(self.to_record())

    def __contains__(self, a: float) -> bool:
        return self.kind != "empty" and self.lo <= a <= self.hi


EMPTY = AlphaInterval(math.nan, math.nan, "empty")


def _json_num(x):
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


class _Prober:
    """Cached accept/survival evaluations for one parameter pair."""

    def __init__(self, p, t_max, rel_tol, abs_tol):
        self.p, self.t_max, self.rel_tol, self.abs_tol = p, t_max, rel_tol, abs_tol
        self.cache = {}

    def __call__(self, a: float) -> Classification:
        c = self.cache.get(a)
        if c is None:
            c = run(self.p, a, self.t_max, self.rel_tol, self.abs_tol)[1]
            self.cache[a] = c
        return c

    def ok(self, a):
        return self(a).accepted

    def survival(self, a):
        c = self(a)
        return math.inf if c.accepted else c.witness_t

    def edge(self, good: float, bad: float, tol: float = EDGE_TOL) -> float:
        """Bisect the accept/reject boundary between an accepted and a rejected slope."""
        while abs(good - bad) > tol * max(1.0, abs(good)):
            mid = 0.5 * (good + bad)
            if self.ok(mid):
                good = mid
            else:
                bad = mid
        return good


def _scan_range(p: Params) -> tuple[float, float]:
    m, g = p.m, p.gamma
    if m < -2:
        # slopes of solutions stay below |m+2| gamma^2 / 2 when gamma > 0
        hi = abs(m + 2) * g * g / 2 if g > 0 else 1.0
        return 1e-4 * hi, hi
    if m < -1 and g < 0:
        lo = -1.0 / ((m + 2) * g)
        return lo, max(10.0 * lo, 4.0 * (1.0 + g * g))
    return 1e-4, 10.0 * (1.0 + g * g)


def _fold_search(pr: _Prober, grid: np.ndarray, iters: int = 60):
    """Golden-section maximization of survival time around the best grid slope."""
    surv = [pr.survival(a) for a in grid]
    i = int(np.argmax(surv))
    a = math.log(grid[max(i - 1, 0)])
    b = math.log(grid[min(i + 1, len(grid) - 1)])
    invphi = (math.sqrt(5) - 1) / 2
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = pr.survival(math.exp(c)), pr.survival(math.exp(d))
    for _ in range(iters):
        if math.isinf(fc):
            return math.exp(c)
        if math.isinf(fd):
            return math.exp(d)
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = pr.survival(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = pr.survival(math.exp(d))
        if b - a < 1e-13:
            break
    return None


def _find_accepted(pr: _Prober, lo: float, hi: float, n: int, hint: float | None):
    if hint is not None and pr.ok(hint):
        return hint, None
    grid = np.exp(np.linspace(math.log(lo), math.log(hi), n))
    for a in grid:
        if pr.ok(float(a)):
            return float(a), grid
    return _fold_search(pr, grid), grid


def alpha_interval(p: Params, *, t_max: float = T_MAX, rel_tol: float = 1e-10,
                   abs_tol: float = 1e-12, grid: int = 64, tol: float = EDGE_TOL,
                   hint: float | None = None) -> AlphaInterval:
    """Set of slopes alpha whose trajectories are accepted solutions."""
    m, g = p.m, p.gamma
    if m > -1:
        return _interval_around_concave(p, t_max, rel_tol, abs_tol, tol)
    if m == -1 and g >= 0:
        return EMPTY
    if -2 < m < -1 and g >= 0:
        return EMPTY
    pr = _Prober(p, t_max, rel_tol, abs_tol)
    lo, hi = _scan_range(p)
    found, _ = _find_accepted(pr, lo, hi, grid, hint)
    if found is None:
        return EMPTY
    a_lo = _walk_edge(pr, found, 1.0 / 1.25, lo=0.0)
    if m == -1:
        # the whole half-line above the bounded slope is admissible
        return AlphaInterval(a_lo, math.inf, "interval")
    a_hi = _walk_edge(pr, found, 1.25, hi=math.inf)
    kind = "interval" if a_hi - a_lo > 10 * tol * max(1.0, a_hi) else "singleton"
    return AlphaInterval(a_lo, a_hi, kind)


def _walk_edge(pr: _Prober, good: float, factor: float, lo: float = 0.0,
               hi: float = math.inf, max_steps: int = 200) -> float:
    """Step geometrically from an accepted slope until rejection, then bisect."""
    a = good
    for _ in range(max_steps):
        nxt = a * factor
        if nxt <= lo or nxt >= hi:
            return a
        if not pr.ok(nxt):
            return pr.edge(a, nxt)
        a = nxt
    return a


def _interval_around_concave(p, t_max, rel_tol, abs_tol, tol) -> AlphaInterval:
    """Accepted set next to the concave slope alpha_c.

    Slopes just beside alpha_c creep along the slow manifold of the planar
    system for a time growing like log(1/|alpha - alpha_c|), so their fate is
    undecided at any fixed horizon. Each side is therefore probed at
    geometrically growing offsets; the first decisively accepted slope opens a
    band, which is closed at alpha_c and extended outward to its far edge.
    """
    rep = shoot_concave(p, t_max=t_max, rel_tol=rel_tol, abs_tol=abs_tol)
    ac = rep.alpha
    pr = _Prober(p, t_max, rel_tol, abs_tol)
    scale = max(1.0, abs(ac))

    def far_edge(sign):
        for k in range(23):
            a = ac + sign * 1e-6 * scale * 2.0**k
            if pr.ok(a):
                return _walk_linear(pr, a, sign * 1e-6 * scale * 2.0**k)
        return ac

    lo, hi = far_edge(-1.0), far_edge(1.0)
    if lo == hi:
        return AlphaInterval(ac, ac, "singleton")
    return AlphaInterval(lo, hi, "interval")


WALK_LIMIT = 1e3


def _walk_linear(pr: _Prober, good: float, step: float, max_steps: int = 60) -> float:
    """Walk from an accepted slope with doubling steps until rejection, then bisect.

    Returns +-inf when no rejection is met before ``WALK_LIMIT`` times the
    starting scale.
    """
    limit = WALK_LIMIT * max(1.0, abs(good))
    for _ in range(max_steps):
        nxt = good + step
        if abs(nxt) > limit:
            break
        try:
            if not pr.ok(nxt):
                return pr.edge(good, nxt)
        except StepBudgetExceeded:
            # stiff growth far out on an unbounded branch; no rejection seen
            break
        good, step = nxt, 2.0 * step
    return math.copysign(math.inf, step)


# ---------------------------------------------------------------- gamma*

def lower_gamma_bound(m: float) -> float:
    """No solution exists for m < -2 unless gamma exceeds this."""
    return (2.0 / (m + 2.0) ** 2) ** (1.0 / 3.0)


def gamma_star_shooting(m: float, *, t_max: float = T_MAX, rel_tol: float = 1e-10,
                        abs_tol: float = 1e-12, tol: float = 1e-7,
                        grid: int = 32) -> float:
    """Bisection in gamma on non-emptiness of the admissible alpha-set."""
    if m < -2:
        lo = lower_gamma_bound(m)
        no, yes = lo, 10.0 * lo
    elif -2 < m < -1:
        no, yes = 0.0, -50.0
    else:
        raise RegimeError(f"gamma* is defined for m < -2 or -2 < m < -1, got m={m}")
    hint = None

    def exists(g):
        nonlocal hint
        pr = _Prober(Params(m, g), t_max, rel_tol, abs_tol)
        lo_a, hi_a = _scan_range(pr.p)
        found, _ = _find_accepted(pr, lo_a, hi_a, grid, hint)
        if found is not None:
            hint = found
        return found is not None

    if not exists(yes):
        raise ShootingError("no_sign_change", f"no solution at gamma={yes}")
    while abs(yes - no) > tol:
        mid = 0.5 * (yes + no)
        if exists(mid):
            yes = mid
        else:
            no = mid
    return 0.5 * (yes + no)
