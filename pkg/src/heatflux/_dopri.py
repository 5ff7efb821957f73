"""Dormand-Prince 5(4) stepper with PI step control, dense output and
event location.

Works on plain Python float sequences: the systems integrated here have two
or three components, where numpy's per-call overhead dominates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

# Butcher tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84

# difference between the 5th and embedded 4th order weights
E1, E3, E4, E5, E6, E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)

# Hairer's continuous extension (order 4)
D1 = -12715105075 / 11282082432
D3 = 87487479700 / 32700410799
D4 = -10690763975 / 1880347072
D5 = 701980252875 / 199316789632
D6 = -1453857185 / 822651844
D7 = 69997945 / 29380423

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 10.0
BETA = 0.04
EXPO1 = 0.2 - BETA * 0.75

EVENT_TOL = 1e-12

RHS = Callable[[float, Sequence[float]], Sequence[float]]


class StepBudgetExceeded(RuntimeError):
    pass


@dataclass
class EventHit:
    index: int
    t: float
    y: tuple


@dataclass
class RawSolution:
    """Accepted steps plus per-step interpolation coefficients."""

    t: list
    y: list
    rcont: list = field(default_factory=list)
    events: list = field(default_factory=list)
    status: str = "reached_end"  # reached_end | blowup | event_stop
    t_stop: float = math.nan


def interp(rc, t0: float, h: float, t: float) -> tuple:
    th = (t - t0) / h
    th1 = 1.0 - th
    r1, r2, r3, r4, r5 = rc
    return tuple(
        r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])))
        for i in range(len(r1))
    )


def interp_deriv(rc, t0: float, h: float, t: float) -> tuple:
    """Time derivative of the continuous extension."""
    th = (t - t0) / h
    th1 = 1.0 - th
    r1, r2, r3, r4, r5 = rc
    out = []
    for i in range(len(r1)):
        # p = r2*th + r3*th*th1 + r4*th^2*th1 + r5*th^2*th1^2
        dp = (
            r2[i]
            + r3[i] * (1 - 2 * th)
            + r4[i] * (2 * th - 3 * th * th)
            + r5[i] * (2 * th * th1 * th1 - 2 * th * th * th1)
        )
        out.append(dp / h)
    return tuple(out)


def _locate(g, rc, t0, h, ga, gb, tol=EVENT_TOL):
    """Bisection for a sign change of g on [t0, t0+h] using the interpolant."""
    a, b = t0, t0 + h
    while abs(b - a) > tol:
        mid = 0.5 * (a + b)
        ym = interp(rc, t0, h, mid)
        gm = g(mid, ym)
        if gm == 0.0:
            return mid, ym
        if (gm > 0) == (ga > 0):
            a, ga = mid, gm
        else:
            b, gb = mid, gm
    return b, interp(rc, t0, h, b)


def integrate(
    fun: RHS,
    t0: float,
    y0: Sequence[float],
    t_end: float,
    *,
    rtol: float,
    atol: float,
    h0: float,
    h_min: float = 1e-14,
    max_abs: float = math.inf,
    events: Sequence[Callable[[float, Sequence[float]], float]] = (),
    stop: Callable[[int, float, tuple], bool] | None = None,
    max_steps: int = 2_000_000,
) -> RawSolution:
    """Integrate ``y' = fun(t, y)`` from ``t0`` towards ``t_end`` (either direction).

    ``events`` are scalar functions whose sign changes are located to
    ``EVENT_TOL`` on the dense output. ``stop(index, t, y)`` decides whether a
    located event terminates the run. Exceeding ``max_abs`` in any component,
    or needing a step below ``h_min``, ends the run with status ``blowup``.
    """
    n = len(y0)
    direction = 1.0 if t_end >= t0 else -1.0
    t = float(t0)
    y = tuple(float(v) for v in y0)
    sol = RawSolution(t=[t], y=[y])
    if t == t_end:
        return sol

    h = min(abs(h0), abs(t_end - t0))
    k1 = tuple(fun(t, y))
    g_old = [g(t, y) for g in events]
    facold = 1e-4
    reject = False
    rng = range(n)

    for _ in range(max_steps):
        if abs(t_end - t) <= 0:
            break
        if h < h_min:
            sol.status = "blowup"
            sol.t_stop = t
            return sol
        last = False
        if h >= abs(t_end - t):
            h = abs(t_end - t)
            last = True
        hs = direction * h

        y2 = tuple(y[i] + hs * A21 * k1[i] for i in rng)
        k2 = fun(t + C2 * hs, y2)
        y3 = tuple(y[i] + hs * (A31 * k1[i] + A32 * k2[i]) for i in rng)
        k3 = fun(t + C3 * hs, y3)
        y4 = tuple(y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]) for i in rng)
        k4 = fun(t + C4 * hs, y4)
        y5 = tuple(
            y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
            for i in rng
        )
        k5 = fun(t + C5 * hs, y5)
        y6 = tuple(
            y[i]
            + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
            for i in rng
        )
        k6 = fun(t + hs, y6)
        y1 = tuple(
            y[i]
            + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i])
            for i in rng
        )
        t_new = t + hs
        k7 = fun(t_new, y1)

        err = 0.0
        for i in rng:
            ei = hs * (
                E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]
            )
            sk = atol + rtol * max(abs(y[i]), abs(y1[i]))
            r = abs(ei) / sk
            if r > err:
                err = r
        if not math.isfinite(err):
            h *= FAC_MIN
            reject = True
            continue

        fac11 = max(err, 1e-300) ** EXPO1
        fac = fac11 / facold**BETA / SAFETY
        fac = max(1.0 / FAC_MAX, min(1.0 / FAC_MIN, fac))
        h_new = h / fac

        if err > 1.0:
            h = h / min(1.0 / FAC_MIN, fac11 / SAFETY)
            reject = True
            continue

        # accepted
        facold = max(err, 1e-4)
        ydiff = tuple(y1[i] - y[i] for i in rng)
        bspl = tuple(hs * k1[i] - ydiff[i] for i in rng)
        rc = (
            y,
            ydiff,
            bspl,
            tuple(ydiff[i] - hs * k7[i] - bspl[i] for i in rng),
            tuple(
                hs
                * (
                    D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i]
                    + D6 * k6[i] + D7 * k7[i]
                )
                for i in rng
            ),
        )

        stop_at = None
        if events:
            hits = []
            g_new = [g(t_new, y1) for g in events]
            for idx, g in enumerate(events):
                ga, gb = g_old[idx], g_new[idx]
                if ga == 0.0:
                    continue
                if gb == 0.0:
                    hits.append(EventHit(idx, t_new, y1))
                elif (ga > 0) != (gb > 0):
                    te, ye = _locate(g, rc, t, hs, ga, gb)
                    hits.append(EventHit(idx, te, ye))
            hits.sort(key=lambda e: direction * e.t)
            for hit in hits:
                sol.events.append(hit)
                if stop is not None and stop(hit.index, hit.t, hit.y):
                    stop_at = hit
                    break
            g_old = g_new

        sol.t.append(t_new)
        sol.y.append(y1)
        sol.rcont.append(rc)
        t, y, k1 = t_new, y1, k7

        if stop_at is not None:
            sol.status = "event_stop"
            sol.t_stop = stop_at.t
            return sol
        if max(abs(v) for v in y) > max_abs:
            sol.status = "blowup"
            sol.t_stop = t
            return sol
        if last:
            break
        if reject:
            h_new = min(h_new, h)
            reject = False
        h = h_new
    else:
        raise StepBudgetExceeded(f"no convergence to t={t_end} within {max_steps} steps (t={t})")
    sol.t_stop = t
    return sol


class DenseOutput:
    """Piecewise continuous extension over the accepted steps."""

    def __init__(self, t: np.ndarray, rcont: list):
        self.t = t
        self.rcont = rcont
        self.forward = len(t) < 2 or t[-1] >= t[0]

    def _segment(self, tq: float) -> int:
        if self.forward:
            k = int(np.searchsorted(self.t, tq, side="right")) - 1
        else:
            k = int(np.searchsorted(-self.t, -tq, side="right")) - 1
        return min(max(k, 0), len(self.rcont) - 1)

    def __call__(self, tq: float) -> tuple:
        k = self._segment(tq)
        return interp(self.rcont[k], self.t[k], self.t[k + 1] - self.t[k], tq)

    def deriv(self, tq: float) -> tuple:
        k = self._segment(tq)
        return interp_deriv(self.rcont[k], self.t[k], self.t[k + 1] - self.t[k], tq)
