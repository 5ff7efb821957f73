"""Closed-form and semi-analytic reference solutions.

* m = -1: the first integral f' + f^2/2 = c t + d with c = -1 - gamma f'(0) and
  d = f'(0) + gamma^2/2; the bounded branch has c = 0.
* m = 1: f(t) = -(e^{-3 eta t} - 1)/(9 eta^2) - gamma with 9 eta^3 + 9 gamma eta^2 = 1.
* m = -1/2: the equation reduces to f''' + 3/2 f f'' = 0.
* any m: t -> k g(k t + t0) maps solutions to solutions, which turns a
  gamma = 0 profile into one for any other gamma.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import ode_core
from .ode_core import IvpSpec, Params, Trajectory


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class RiccatiParams:
    gamma: float
    c: float
    d: float

    @classmethod
    def from_slope(cls, gamma: float, alpha: float) -> "RiccatiParams":
        return cls(gamma, -1.0 - gamma * alpha, alpha + 0.5 * gamma * gamma)

    @classmethod
    def bounded(cls, gamma: float) -> "RiccatiParams":
        if not gamma < 0:
            raise OracleError(f"bounded Riccati branch needs gamma < 0, got {gamma}")
        return cls.from_slope(gamma, -1.0 / gamma)


def riccati_bounded(gamma: float, t: float) -> tuple[float, float, float]:
    """(f, f', f'') of the bounded m = -1 solution; f tends to sqrt(2d)."""
    d = RiccatiParams.bounded(gamma).d
    k = math.sqrt(2.0 * d)
    r = (gamma - k) / (gamma + k)
    # written with w = e^{-kt} so that large t does not overflow
    w = math.exp(-k * t)
    den = r - w
    f = k + 2.0 * k * w / den
    fp = -2.0 * k * k * r * w / den**2
    fpp = 2.0 * k**3 * r * (r + w) * w / den**3
    return f, fp, fpp


def riccati_residual(traj: Trajectory) -> float:
    """max |f' + f^2/2 - (c t + d)| over the recorded states (m = -1 only)."""
    if traj.params.m != -1:
        raise OracleError(f"Riccati reduction needs m = -1, got m={traj.params.m}")
    rp = RiccatiParams.from_slope(traj.params.gamma, traj.alpha)
    t = traj.t
    f, fp = traj.y[:, 0], traj.y[:, 1]
    return float(np.max(np.abs(fp + 0.5 * f * f - (rp.c * t + rp.d))))


@dataclass(frozen=True)
class ExplicitM1:
    gamma: float
    eta: float

    @property
    def alpha(self) -> float:
        return 1.0 / (3.0 * self.eta)

    @property
    def limit(self) -> float:
        return 1.0 / (9.0 * self.eta**2) - self.gamma

    def __call__(self, t: float) -> tuple[float, float, float]:
        e = math.exp(-3.0 * self.eta * t)
        return -(e - 1.0) / (9.0 * self.eta**2) - self.gamma, e / (3.0 * self.eta), -e


def m1_eta(gamma: float) -> float:
    """Unique positive root of 9 eta^3 + 9 gamma eta^2 - 1 by bisection."""
    # at eta = 1 + |gamma| the cubic is at least 9 eta^2 - 1 > 0
    lo, hi = 0.0, 1.0 + abs(gamma)
    cubic = lambda x: 9.0 * x**3 + 9.0 * gamma * x * x - 1.0  # noqa: E731
    while cubic(hi) <= 0:
        hi *= 2.0
    while hi - lo > 1e-14 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if cubic(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def explicit_m1(gamma: float, t: float) -> tuple[float, float, float]:
    return ExplicitM1(gamma, m1_eta(gamma))(t)


def blasius_check(traj: Trajectory) -> float:
    """Scaled residual |f3 + 3/2 f f2| / (1 + |f3| + 3/2 |f f2|), maximized over
    step midpoints; f3 is the dense-output derivative of f''.
    """
    if traj.params.m != -0.5:
        raise OracleError(f"Blasius form needs m = -1/2, got m={traj.params.m}")
    t = traj.t
    worst = 0.0
    for a, b in zip(t[:-1], t[1:]):
        tm = 0.5 * (a + b)
        f, _fp, fpp = traj.dense(tm)
        fppp = traj.dense.deriv(tm)[2]
        ffpp = 1.5 * f * fpp
        worst = max(worst, abs(fppp + ffpp) / (1.0 + abs(fppp) + abs(ffpp)))
    return worst


# ---------------------------------------------------------------- scaling

@dataclass(frozen=True)
class TwoSidedProfile:
    """A gamma = 0 solution integrated both ways from t = 0."""

    forward: Trajectory
    backward: Trajectory

    @property
    def alpha(self) -> float:
        return self.forward.alpha

    @property
    def m(self) -> float:
        return self.forward.params.m

    def __call__(self, t: float) -> ode_core.State:
        return self.forward(t) if t >= 0 else self.backward(t)


def gamma_zero_profile(m: float, t_forward: float = ode_core.T_MAX,
                       t_backward: float = 20.0, alpha: float | None = None) -> TwoSidedProfile:
    """Concave gamma = 0 solution (found by shooting) plus its backward extension."""
    if alpha is None:
        from .shooting import shoot_concave

        alpha = shoot_concave(Params(m, 0.0)).alpha
    p = Params(m, 0.0)
    fwd = ode_core.integrate(IvpSpec(p, alpha, t_max=t_forward, events=frozenset()))
    bwd = ode_core.integrate(IvpSpec(p, alpha, t_max=t_backward, events=frozenset()),
                             direction=-1.0)
    return TwoSidedProfile(fwd, bwd)


def _h(state) -> float:
    return state.f**3 / state.fpp


def translate_scale(g: TwoSidedProfile, target_gamma: float) -> IvpSpec:
    """IvpSpec for f(t) = k g(k t + t0) where g(t0)^3/g''(t0) = gamma^3.

    Then k = -gamma/g(t0) and k^3 g''(t0) = -1, so f(0) = -gamma, f''(0) = -1
    and f'(0) = k^2 g'(t0).
    """
    p = Params(g.m, target_gamma)
    if target_gamma == 0:
        return IvpSpec(p, g.alpha)
    goal = target_gamma**3
    traj = g.forward if target_gamma < 0 else g.backward
    ts = traj.t
    hs = [_h(ode_core.State(float(t), *y)) if y[2] < 0 else math.nan
          for t, y in zip(ts, traj.y)]
    for i in range(1, len(ts)):
        a, b = hs[i - 1] - goal, hs[i] - goal
        if not (math.isfinite(a) and math.isfinite(b)):
            break
        if a == 0 or (a > 0) != (b > 0):
            lo, hi = sorted((float(ts[i - 1]), float(ts[i])))
            t0 = brentq(lambda t: _h(traj(t)) - goal, lo, hi, xtol=1e-15)
            s0 = traj(t0)
            k = -target_gamma / s0.f
            return IvpSpec(p, k * k * s0.fp)
    raise OracleError(
        f"g^3/g'' never reaches gamma^3={goal:.6g} on [{ts[0]}, {ts[-1]}]; extend the profile"
    )
