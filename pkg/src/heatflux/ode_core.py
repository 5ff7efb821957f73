"""The similarity ODE f''' + (m+2) f f'' - (2m+1) f'^2 = 0 and its initial
value problem f(0) = -gamma, f'(0) = alpha, f''(0) = -1.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from . import _dopri

EVENT_KINDS = ("fp_zero", "fpp_zero", "f_zero")
_EVENT_COMPONENT = {"f_zero": 0, "fp_zero": 1, "fpp_zero": 2}

EPS_FAR = 1e-6
T_MAX = 50.0
BLOWUP_BOUND = 1e8
H_MIN = 1e-14


class InvalidSpec(ValueError):
    pass


@dataclass(frozen=True)
class Params:
    m: float
    gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.m) and math.isfinite(self.gamma)):
            raise InvalidSpec(f"non-finite parameters m={self.m}, gamma={self.gamma}")


class State(NamedTuple):
    t: float
    f: float
    fp: float
    fpp: float


@dataclass(frozen=True)
class IvpSpec:
    params: Params
    alpha: float
    t_max: float = T_MAX
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    blowup_bound: float = BLOWUP_BOUND
    events: frozenset = frozenset(EVENT_KINDS)
    # event kinds that end the integration when first located
    terminal: frozenset = frozenset()

    def __post_init__(self):
        if not self.t_max > 0:
            raise InvalidSpec(f"t_max must be positive, got {self.t_max}")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise InvalidSpec("tolerances must be positive")
        if not self.blowup_bound > 0:
            raise InvalidSpec("blowup_bound must be positive")
        unknown = set(self.events) - set(EVENT_KINDS)
        if unknown:
            raise InvalidSpec(f"unknown event kinds {sorted(unknown)}")

    @property
    def initial_state(self) -> State:
        return State(0.0, -self.params.gamma, self.alpha, -1.0)


@dataclass(frozen=True)
class Event:
    kind: str
    t: float
    state: State


@dataclass(frozen=True)
class Termination:
    kind: str  # reached_t_max | blowup_at | event_stop
    t: float

    def __str__(self):
        if self.kind == "blowup_at":
            return f"blowup_at({self.t!r})"
        return self.kind


@dataclass(frozen=True, eq=False)
class Trajectory:
    params: Params
    alpha: float
    t: np.ndarray
    y: np.ndarray  # columns f, f', f''
    events: tuple
    termination: Termination
    spec: IvpSpec
    dense: _dopri.DenseOutput = field(repr=False)

    @property
    def states(self) -> list[State]:
        return [State(float(ti), *map(float, yi)) for ti, yi in zip(self.t, self.y)]

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def last(self) -> State:
        return State(float(self.t[-1]), *map(float, self.y[-1]))

    def __call__(self, t: float) -> State:
        """Dense-output evaluation of (f, f', f'') at ``t``."""
        lo, hi = sorted((self.t[0], self.t[-1]))
        if not (lo - 1e-12 <= t <= hi + 1e-12):
            raise ValueError(f"t={t} outside trajectory range [{lo}, {hi}]")
        if len(self.t) == 1:
            return self.states[0]
        return State(float(t), *map(float, self.dense(t)))

    def events_of(self, kind: str) -> list[Event]:
        return [e for e in self.events if e.kind == kind]

    def to_csv(self) -> str:
        return states_to_csv(self.states)

    def to_record(self) -> dict:
        return {
            "params": {"m": self.params.m, "gamma": self.params.gamma},
            "alpha": self.alpha,
            "termination": str(self.termination),
            "events": [
                {"kind": e.kind, "t": e.t, "state": list(e.state)} for e in self.events
            ],
            "states": [list(s) for s in self.states],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record())


def fmt(x: float) -> str:
    return repr(float(x)) if not math.isfinite(x) else f"{x:.17g}"


def states_to_csv(states: Iterable[State]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "f", "fp", "fpp"])
    for s in states:
        w.writerow([fmt(v) for v in s])
    return buf.getvalue()


def rhs(s: State, p: Params) -> float:
    """f''' from the ODE."""
    return -(p.m + 2.0) * s.f * s.fpp + (2.0 * p.m + 1.0) * s.fp * s.fp


def vector_field(m: float):
    a = m + 2.0
    b = 2.0 * m + 1.0

    def fun(t, y):
        f, fp, fpp = y
        return (fp, fpp, -a * f * fpp + b * fp * fp)

    return fun


def initial_step(alpha: float, gamma: float) -> float:
    return 1e-4 / (1.0 + abs(alpha) + abs(gamma))


def integrate(spec: IvpSpec, *, direction: float = 1.0, stop_when=None) -> Trajectory:
    """Integrate the IVP over [0, t_max] (or [-t_max, 0] for ``direction=-1``).

    Besides the kinds in ``spec.terminal``, ``stop_when(event, earlier_events)``
    may end the run at any located event.
    """
    kinds = [k for k in EVENT_KINDS if k in spec.events]
    funcs = [_component(_EVENT_COMPONENT[k]) for k in kinds]
    terminal = spec.terminal
    seen: list[Event] = []

    def stop(idx, t, y):
        ev = Event(kinds[idx], float(t), State(float(t), *map(float, y)))
        done = kinds[idx] in terminal or (stop_when is not None and stop_when(ev, seen))
        seen.append(ev)
        return done

    y0 = spec.initial_state[1:]
    raw = _dopri.integrate(
        vector_field(spec.params.m),
        0.0,
        y0,
        direction * spec.t_max,
        rtol=spec.rel_tol,
        atol=spec.abs_tol,
        h0=initial_step(spec.alpha, spec.params.gamma),
        h_min=H_MIN,
        max_abs=spec.blowup_bound,
        events=funcs,
        stop=stop if (terminal or stop_when is not None) else None,
    )
    return _wrap(spec, raw)


def _component(i: int):
    return lambda t, y: y[i]


def _wrap(spec: IvpSpec, raw: _dopri.RawSolution) -> Trajectory:
    t = np.array(raw.t, dtype=float)
    y = np.array(raw.y, dtype=float).reshape(len(raw.t), 3)
    kinds = [k for k in EVENT_KINDS if k in spec.events]
    events = tuple(
        Event(kinds[e.index], float(e.t), State(float(e.t), *map(float, e.y)))
        for e in raw.events
    )
    if raw.status == "blowup":
        term = Termination("blowup_at", float(raw.t_stop))
    elif raw.status == "event_stop":
        term = Termination("event_stop", float(raw.t_stop))
    else:
        term = Termination("reached_t_max", float(t[-1]))
    t.setflags(write=False)
    y.setflags(write=False)
    return Trajectory(
        params=spec.params,
        alpha=float(spec.alpha),
        t=t,
        y=y,
        events=events,
        termination=term,
        spec=spec,
        dense=_dopri.DenseOutput(t, raw.rcont),
    )


# Gauss-Legendre nodes for per-step quadrature on the dense output
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def quad_dense(traj: Trajectory, func, a: float, b: float) -> float:
    """Integrate ``func(t, f, fp, fpp)`` over [a, b] along the dense output."""
    if a == b:
        return 0.0
    sign = 1.0
    if a > b:
        a, b, sign = b, a, -1.0
    ts = traj.t
    rcont = traj.dense.rcont
    nodes = list(zip(_GL_X.tolist(), _GL_W.tolist()))
    total = 0.0
    for k in range(len(rcont)):
        t0, t1 = float(ts[k]), float(ts[k + 1])
        lo, hi = min(t0, t1), max(t0, t1)
        lo, hi = max(lo, a), min(hi, b)
        if hi <= lo:
            continue
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        h = t1 - t0
        rc = rcont[k]
        for x, w in nodes:
            tq = mid + half * x
            f, fp, fpp = _dopri.interp(rc, t0, h, tq)
            total += w * half * func(tq, f, fp, fpp)
    return sign * total


def cumulative_dense(traj: Trajectory, func, i0: int, i1: int) -> np.ndarray:
    """Running integral of ``func(t, f, fp, fpp)`` from step point i0 to each
    step point up to i1 (inclusive), per-step Gauss-Legendre on the dense output."""
    ts = traj.t
    rcont = traj.dense.rcont
    out = np.zeros(i1 - i0 + 1)
    total = 0.0
    for k in range(i0, i1):
        t0 = float(ts[k])
        h = float(ts[k + 1]) - t0
        rc = rcont[k]
        acc = 0.0
        for x, w in zip(_GL_X, _GL_W):
            tq = t0 + 0.5 * h * (1.0 + x)
            f, fp, fpp = _dopri.interp(rc, t0, h, tq)
            acc += w * func(tq, f, fp, fpp)
        total += 0.5 * h * acc
        out[k - i0 + 1] = total
    return out


def identity_residuals_from(
    m: float,
    rho_state: State,
    r_state: State,
    i_fp2: float,
    i_tfp2: float,
    i_ffp2: float,
) -> tuple[float, float, float]:
    """Residuals of the three integrated forms of the ODE on [rho, r].

    ``i_fp2``, ``i_tfp2`` and ``i_ffp2`` are the integrals of f'^2, t f'^2 and
    f f'^2 over [rho, r].
    """
    a = m + 2.0
    p, r = rho_state, r_state
    lhs1 = r.fpp - p.fpp + a * (r.f * r.fp - p.f * p.fp)
    rhs1 = 3.0 * (m + 1.0) * i_fp2
    lhs2 = (
        r.t * r.fpp - p.t * p.fpp - r.fp + p.fp
        + a * (r.t * r.f * r.fp - p.t * p.f * p.fp)
        - 0.5 * a * (r.f**2 - p.f**2)
    )
    rhs2 = 3.0 * (m + 1.0) * i_tfp2
    lhs3 = (
        r.f * r.fpp - p.f * p.fpp - 0.5 * (r.fp**2 - p.fp**2)
        + a * (r.f**2 * r.fp - p.f**2 * p.fp)
    )
    rhs3 = (4.0 * m + 5.0) * i_ffp2
    return abs(lhs1 - rhs1), abs(lhs2 - rhs2), abs(lhs3 - rhs3)


def residuals(traj: Trajectory, rho: float, r: float) -> tuple[float, float, float]:
    lo, hi = sorted((traj.t[0], traj.t[-1]))
    if not (lo <= rho <= hi and lo <= r <= hi):
        raise ValueError(f"[{rho}, {r}] not inside trajectory range [{lo}, {hi}]")
    if rho > r:
        raise ValueError("rho must not exceed r")
    if rho == r:
        return 0.0, 0.0, 0.0
    i1 = quad_dense(traj, lambda t, f, fp, fpp: fp * fp, rho, r)
    i2 = quad_dense(traj, lambda t, f, fp, fpp: t * fp * fp, rho, r)
    i3 = quad_dense(traj, lambda t, f, fp, fpp: f * fp * fp, rho, r)
    res = identity_residuals_from(traj.params.m, traj(rho), traj(r), i1, i2, i3)
    return tuple(float(x) for x in res)


def far_field_ok(traj: Trajectory, eps_far: float = EPS_FAR) -> bool:
    s = traj.last
    return abs(s.fp) < eps_far and abs(s.fpp) < eps_far
