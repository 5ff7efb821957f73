"""Blown-up coordinates s = int f, u = f'/f^2, v = f''/f^3 and the planar system

    u' = P(u, v) = v - 2u^2
    v' = Q(u, v) = -(m+2) v + (2m+1) u^2 - 3uv

(derivatives in s): equilibria, separatrices at the saddle-node O, the
critical gamma* from separatrix/isocline intersections, and return maps
around the focus A.
"""
from __future__ import annotations

import cmath
import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _dopri
from .ode_core import Trajectory, cumulative_dense, fmt

SEED_OFFSET = 1e-6
S2_SEED_OFFSET = 1e-3
RICHARDSON_OFFSET = 1e-7
RICHARDSON_TOL = 1e-4
NEAR_O = 1e-8
BOX = 1e3
PLANAR_RTOL = 1e-12
PLANAR_ATOL = 1e-20

# thresholds on m where the equilibrium A changes type
M_NODE_UNSTABLE = (3.0 - 2.0 * math.sqrt(6.0)) / 2.0
M_CENTER = 1.5
M_NODE_STABLE = (3.0 + 2.0 * math.sqrt(6.0)) / 2.0

CROSSINGS = ("Q_zero", "P_zero", "u_axis", "v_axis", "line_L")


class PhasePoint(NamedTuple):
    s: float
    u: float
    v: float


def vector_field(m: float, u: float, v: float) -> tuple[float, float]:
    P = v - 2.0 * u * u
    Q = -(m + 2.0) * v + (2.0 * m + 1.0) * u * u - 3.0 * u * v
    return P, Q


def isocline_psi(m: float, u: float) -> float:
    """The Q = 0 isocline as a graph v = Psi_m(u)."""
    den = 3.0 * u + m + 2.0
    if den == 0.0:
        raise ZeroDivisionError(f"isocline pole at u = -(m+2)/3 = {u}")
    return (2.0 * m + 1.0) * u * u / den


def slope_field(m: float, u: float, v: float) -> float:
    """dv/du = Q/P along orbits."""
    P, Q = vector_field(m, u, v)
    if P == 0.0:
        raise ZeroDivisionError("slope undefined on the parabola v = 2u^2")
    return Q / P


def in_domain_plus(m: float, u: float, v: float) -> bool:
    """{0 < u < -(m+2)/2, 0 <= v < -(m+2)u}, the trapping region for m < -2."""
    return 0.0 < u < -(m + 2.0) / 2.0 and 0.0 <= v < -(m + 2.0) * u


def in_domain_minus(m: float, u: float, v: float) -> bool:
    """{-(m+2)/2 < u < 0, 0 <= v < -(m+2)u}, the trapping region for m > 1."""
    return -(m + 2.0) / 2.0 < u < 0.0 and 0.0 <= v < -(m + 2.0) * u


# ---------------------------------------------------------------- equilibria

@dataclass(frozen=True)
class Equilibrium:
    location: tuple
    eigenvalues: tuple
    kind: str

    def to_record(self) -> dict:
        return {
            "location": list(self.location),
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "kind": self.kind,
        }


def jacobian(m: float, u: float, v: float) -> np.ndarray:
    return np.array([[-4.0 * u, 1.0],
                     [2.0 * (2.0 * m + 1.0) * u - 3.0 * v, -(m + 2.0) - 3.0 * u]])


def focus_type(m: float, tol: float = 1e-12) -> str:
    """Type of A from trace 3/2 - m and discriminant (3/2 - m)^2 - 6 (det = 3/2)."""
    tr = 1.5 - m
    disc = tr * tr - 6.0
    if abs(tr) <= tol:
        return "center"
    node = disc >= -tol
    if tr > 0:
        return "unstable_node" if node else "unstable_focus"
    return "stable_node" if node else "stable_focus"


def equilibria(m: float) -> tuple[Equilibrium, Equilibrium]:
    o = Equilibrium((0.0, 0.0), (0j, complex(-(m + 2.0))),
                    "saddle_node" if m != -2 else "degenerate")
    tr = 1.5 - m
    disc = tr * tr - 6.0
    root = cmath.sqrt(disc)
    a = Equilibrium((-0.5, 0.5), ((tr + root) / 2, (tr - root) / 2), focus_type(m))
    return o, a


# ---------------------------------------------------------------- curves

@dataclass(frozen=True)
class PhaseCurve:
    points: tuple

    def to_csv(self) -> str:
        return points_to_csv(self.points)

    @property
    def u(self) -> np.ndarray:
        return np.array([p.u for p in self.points])

    @property
    def v(self) -> np.ndarray:
        return np.array([p.v for p in self.points])

    @property
    def s(self) -> np.ndarray:
        return np.array([p.s for p in self.points])


def points_to_csv(points) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "u", "v"])
    for p in points:
        w.writerow([fmt(x) for x in p])
    return buf.getvalue()


def to_phase(f: float, fp: float, fpp: float) -> tuple[float, float]:
    return fp / (f * f), fpp / (f * f * f)


def blowup_transform(traj: Trajectory, tau: float) -> PhaseCurve:
    """Map the trajectory from ``tau`` onward (while f keeps its sign) to (s, u, v).

    s is measured from tau; it decreases along the curve when f < 0.
    """
    s0 = traj(tau)
    if s0.f == 0.0:
        raise ValueError(f"f vanishes at tau={tau}")
    sign = math.copysign(1.0, s0.f)
    ts, ys = traj.t, traj.y
    i0 = int(np.searchsorted(ts, tau, side="right"))
    i1 = i0
    while i1 < len(ts) and ys[i1, 0] * sign > 0:
        i1 += 1
    pts = [PhasePoint(0.0, *to_phase(s0.f, s0.fp, s0.fpp))]
    if i1 == i0:
        return PhaseCurve(tuple(pts))
    # s at step points: integral from tau to t[i0], then running sums
    s_first = _integral_f(traj, tau, float(ts[i0]))
    cum = cumulative_dense(traj, lambda t, f, fp, fpp: f, i0, i1 - 1)
    for k, i in enumerate(range(i0, i1)):
        f, fp, fpp = ys[i]
        if float(ts[i]) == tau:
            continue
        pts.append(PhasePoint(s_first + float(cum[k]), *to_phase(f, fp, fpp)))
    return PhaseCurve(tuple(pts))


def _integral_f(traj: Trajectory, a: float, b: float) -> float:
    if a == b:
        return 0.0
    x, w = np.polynomial.legendre.leggauss(8)
    half, mid = 0.5 * (b - a), 0.5 * (a + b)
    return float(sum(wi * half * traj(mid + half * xi).f for xi, wi in zip(x, w)))


def _planar_fun(m: float):
    a = m + 2.0
    b = 2.0 * m + 1.0

    def fun(s, y):
        u, v = y
        return (v - 2.0 * u * u, -a * v + b * u * u - 3.0 * u * v)

    return fun


@dataclass
class PlanarOrbit:
    s: np.ndarray
    uv: np.ndarray
    dense: _dopri.DenseOutput = field(repr=False)
    crossings: list
    status: str  # reached_end | left_box | near_O | event_stop | stalled

    def __call__(self, s: float) -> tuple[float, float]:
        return self.dense(s)

    def points(self) -> tuple:
        return tuple(PhasePoint(float(si), float(p[0]), float(p[1]))
                     for si, p in zip(self.s, self.uv))


def integrate_planar(m: float, u0: float, v0: float, s_end: float, *,
                     rtol: float = PLANAR_RTOL, atol: float = PLANAR_ATOL,
                     stop_at: tuple = (), stop_near_O: bool = False,
                     box: float = BOX) -> PlanarOrbit:
    """Integrate the planar system from (u0, v0) to s = s_end (either sign).

    Crossings of Q=0, P=0, the axes and the line v = -(m+2)u are recorded;
    those named in ``stop_at`` end the run.
    """
    a = m + 2.0
    fun = _planar_fun(m)
    events = [
        lambda s, y: fun(s, y)[1],
        lambda s, y: fun(s, y)[0],
        lambda s, y: y[1],
        lambda s, y: y[0],
        lambda s, y: y[1] + a * y[0],
    ]
    if stop_near_O:
        events.append(lambda s, y: math.hypot(y[0], y[1]) - NEAR_O)
    names = list(CROSSINGS) + (["near_O"] if stop_near_O else [])

    def stop(i, s, y):
        return names[i] in stop_at or names[i] == "near_O"

    h0 = 1e-3 * max(1e-3, abs(s_end))
    raw = _dopri.integrate(fun, 0.0, (u0, v0), s_end, rtol=rtol, atol=atol, h0=h0,
                           max_abs=box, events=events, stop=stop, h_min=1e-14)
    crossings = [(names[e.index], float(e.t), float(e.y[0]), float(e.y[1])) for e in raw.events]
    status = {"blowup": "left_box", "reached_end": "reached_end"}.get(raw.status, "event_stop")
    if raw.status == "blowup" and max(abs(x) for x in raw.y[-1]) <= box:
        status = "stalled"
    if raw.status == "event_stop" and raw.events and names[raw.events[-1].index] == "near_O":
        status = "near_O"
    s = np.array(raw.t)
    return PlanarOrbit(s=s, uv=np.array(raw.y), dense=_dopri.DenseOutput(s, raw.rcont),
                       crossings=crossings, status=status)


# ---------------------------------------------------------------- separatrices

def manifold_seed(m: float, which: str, offset: float) -> tuple[float, float]:
    """Point at distance ~offset from O on the requested invariant manifold.

    S0 and S1 lie on the manifold tangent to L = span{(1, -(m+2))}, whose
    second-order expansion is v = -(m+2)u - 3(m+1)u^2/(2(m+2)); S0 is the
    branch with u > 0, S1 the branch with u < 0. S2 is the branch of the
    centre manifold v = (2m+1)u^2/(m+2) + ... tangent to L0 = span{(1, 0)}
    along which orbits leave O (u < 0 when m > -2).
    """
    a = m + 2.0
    if a == 0.0:
        raise ValueError("O is not a saddle-node at m = -2")
    if which in ("S0", "S1"):
        u = offset if which == "S0" else -offset
        return u, -a * u - 3.0 * (m + 1.0) * u * u / (2.0 * a)
    if which == "S2":
        u = -offset if a > 0 else offset
        c2 = (2.0 * m + 1.0) / a
        c3 = -c2 * (2.0 * c2 - 1.0) / a
        return u, c2 * u * u + c3 * u**3
    raise ValueError(f"unknown separatrix {which!r}")


def natural_direction(m: float, which: str) -> str:
    """Direction in s along which the branch moves away from O."""
    if which == "S2":
        return "forward"
    # the L-tangent manifold has eigenvalue -(m+2)
    return "forward" if m < -2 else "backward"


@dataclass(frozen=True)
class SeparatrixTrace:
    m: float
    which: str
    direction: str
    points: tuple
    tangent_at_O: str
    crossings: tuple
    status: str
    seed_offset: float

    def to_csv(self) -> str:
        return points_to_csv(self.points)

    def crossing_order(self) -> list[str]:
        return [c[0] for c in self.crossings]

    def to_record(self) -> dict:
        return {
            "m": self.m, "which": self.which, "direction": self.direction,
            "tangent_at_O": self.tangent_at_O, "status": self.status,
            "seed_offset": self.seed_offset,
            "crossings": [{"kind": k, "s": s, "u": u, "v": v} for k, s, u, v in self.crossings],
        }


def trace_separatrix(m: float, which: str = "S0", direction: str | None = None, *,
                     seed_offset: float = SEED_OFFSET, s_max: float = 500.0,
                     stop_at: tuple = ()) -> SeparatrixTrace:
    if m == -2:
        raise ValueError("separatrix side is ambiguous at m = -2")
    direction = direction or natural_direction(m, which)
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be forward or backward, got {direction!r}")
    if which == "S2":
        # the drift along the centre manifold is only quadratic,
        # u' ~ -3u^2/(m+2), so start further out on its cubic expansion
        seed_offset = max(seed_offset, S2_SEED_OFFSET)
        s_max += abs(m + 2.0) / (3.0 * seed_offset)
    u0, v0 = manifold_seed(m, which, seed_offset)
    sgn = 1.0 if direction == "forward" else -1.0
    toward_O = direction != natural_direction(m, which)
    orb = integrate_planar(m, u0, v0, sgn * s_max, stop_at=stop_at, stop_near_O=toward_O)
    return SeparatrixTrace(
        m=m, which=which, direction=direction, points=orb.points(),
        tangent_at_O="L0" if which == "S2" else "L",
        crossings=tuple(orb.crossings), status=orb.status, seed_offset=seed_offset,
    )


@dataclass(frozen=True)
class GammaStarResult:
    m: float
    u_star: float
    v_star: float
    gamma_star: float
    richardson_gap: float = 0.0

    def to_record(self) -> dict:
        return {"m": self.m, "u_star": self.u_star, "v_star": self.v_star,
                "gamma_star": self.gamma_star, "method": "separatrix"}

    def to_json(self) -> str:
        return json.dumps(self.to_record())


def _first_q_crossing(m: float, offset: float) -> tuple[float, float]:
    tr = trace_separatrix(m, "S0", seed_offset=offset, stop_at=("Q_zero",))
    for kind, _s, u, v in tr.crossings:
        if kind == "Q_zero":
            return u, v
    raise RuntimeError(f"S0 does not cross Q=0 within the trace horizon (m={m})")


def gamma_star_separatrix(m: float, seed_offset: float = SEED_OFFSET) -> GammaStarResult:
    """gamma* = v*^(-1/3) from the first crossing of S0 with Q = 0."""
    if not (m < -2 or -2 < m < -1):
        raise ValueError(f"gamma* is defined for m < -2 or -2 < m < -1, got m={m}")
    u, v = _first_q_crossing(m, seed_offset)
    u2, v2 = _first_q_crossing(m, seed_offset * RICHARDSON_OFFSET / SEED_OFFSET)
    g, g2 = _cbrt_inv(v), _cbrt_inv(v2)
    gap = abs(g - g2)
    if gap > RICHARDSON_TOL:
        raise RuntimeError(f"separatrix seed sensitivity {gap:.2e} exceeds {RICHARDSON_TOL}")
    return GammaStarResult(m=m, u_star=u, v_star=v, gamma_star=g, richardson_gap=gap)


def _cbrt_inv(v: float) -> float:
    return math.copysign(abs(v) ** (-1.0 / 3.0), v)


# ---------------------------------------------------------------- cycles around A

@dataclass
class CycleReport:
    m: float
    found: bool
    verdict: str  # cycle | spiral_in | spiral_out | center_like | no_return
    v_cycle: float | None
    samples: list  # (v0, v1) pairs on the section u = -1/2

    def to_record(self) -> dict:
        return {"m": self.m, "found": self.found, "verdict": self.verdict,
                "v_cycle": self.v_cycle,
                "section": [{"v0": a, "v1": b} for a, b in self.samples]}


def return_map(m: float, v0: float, s_max: float = 400.0) -> float | None:
    """Next crossing of u = -1/2 with u increasing, starting from (-1/2, v0)."""
    fun = _planar_fun(m)
    sec = lambda s, y: y[0] + 0.5  # noqa: E731
    hits = []

    def stop(i, s, y):
        if s > 1e-9 and fun(s, y)[0] > 0:
            hits.append(y[1])
            return True
        return False

    raw = _dopri.integrate(fun, 0.0, (-0.5, v0), s_max, rtol=1e-11, atol=1e-14,
                           h0=1e-3, max_abs=BOX, events=[sec], stop=stop)
    return hits[0] if hits else None


def limit_cycle_probe(m: float, n: int = 24, v_range: tuple = (0.5, 1.5)) -> CycleReport:
    """Look for a fixed point of the return map on the section u = -1/2."""
    if not m > 1:
        raise ValueError(f"cycle probe is meant for m > 1, got m={m}")
    lo, hi = v_range
    grid = [lo + (hi - lo) * (k + 0.5) / n for k in range(n)]
    samples = []
    disp = []
    for v0 in grid:
        v1 = return_map(m, v0)
        samples.append((v0, v1))
        disp.append(None if v1 is None else v1 - v0)
    known = [(v0, d) for v0, d in zip(grid, disp) if d is not None]
    if not known:
        return CycleReport(m, False, "no_return", None, samples)
    for (va, da), (vb, db) in zip(known, known[1:]):
        if da == 0.0 or (da > 0) != (db > 0):
            vc = _bisect_fixed_point(m, va, vb, da)
            return CycleReport(m, True, "cycle", vc, samples)
    if focus_type(m) == "center":
        # linear centre: small orbits close up to higher-order terms
        near = [(0.5 + a, return_map(m, 0.5 + a)) for a in (1e-3, 3e-3, 1e-2)]
        samples = near + samples
        if all(v1 is not None and abs(v1 - v0) < 1e-4 for v0, v1 in near):
            return CycleReport(m, False, "center_like", None, samples)
    return CycleReport(m, False, "spiral_in" if known[0][1] < 0 else "spiral_out", None, samples)


def _bisect_fixed_point(m, va, vb, da, tol=1e-10):
    while vb - va > tol:
        mid = 0.5 * (va + vb)
        v1 = return_map(m, mid)
        if v1 is None:
            break
        d = v1 - mid
        if (d > 0) == (da > 0):
            va, da = mid, d
        else:
            vb = mid
    return 0.5 * (va + vb)
