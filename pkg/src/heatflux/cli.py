"""Command-line front end.

Exit codes: 0 success, 1 internal error, 2 usage error, 3 the requested
solution provably does not exist for these parameters.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, asymptotics, checks, phase_plane, shooting
from ._dopri import StepBudgetExceeded
from .ode_core import EPS_FAR, T_MAX, Params, fmt

FORMAT_VERSION = "heatflux-artifact/1"
WORKERS_ENV = "HEATFLUX_WORKERS"

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_NONEXISTENT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class Nonexistent(Exception):
    pass


# ---------------------------------------------------------------- regimes

def nonexistence_rule(m: float, gamma: float | None) -> str | None:
    """Reason no solution exists at (m, gamma), or None if one may exist."""
    if m == -2:
        return "no solution exists for m = -2 (any gamma)"
    if gamma is None:
        return None
    if m < -2:
        bound = shooting.lower_gamma_bound(m)
        if gamma <= bound:
            return (f"no solution exists for m < -2 when gamma <= (2/(m+2)^2)^(1/3) "
                    f"= {bound:.17g}")
    elif -2 < m < -1 and gamma >= 0:
        return "no solution exists for -2 < m < -1 when gamma >= 0"
    elif m == -1 and gamma >= 0:
        return "no solution exists for m = -1 when gamma >= 0"
    return None


# ---------------------------------------------------------------- output

def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def config_echo(args: argparse.Namespace) -> dict:
    skip = {"func", "out"}
    return _clean({k: v for k, v in sorted(vars(args).items()) if k not in skip})


def json_artifact(args, payload: dict) -> str:
    doc = {"format": FORMAT_VERSION, "config": config_echo(args)}
    doc.update(_clean(payload))
    return json.dumps(doc, indent=2, sort_keys=False, ensure_ascii=False) + "\n"


def csv_artifact(args, body: str) -> str:
    head = (f"# format: {FORMAT_VERSION}\n"
            f"# config: {json.dumps(config_echo(args), sort_keys=True)}\n")
    return head + body


def emit(args, text: str, path: str | None = None) -> None:
    path = path if path is not None else args.out
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from exc


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


# ---------------------------------------------------------------- grid spec

def parse_axis(text: str) -> list[float]:
    """``a,b,c`` lists values; ``lo:hi:n`` is n evenly spaced values."""
    text = text.strip()
    if not text:
        return []
    out = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            bits = part.split(":")
            if len(bits) != 3:
                raise UsageError(f"range must be lo:hi:n, got {part!r}")
            lo, hi, n = float(bits[0]), float(bits[1]), int(bits[2])
            if n < 0:
                raise UsageError(f"negative point count in {part!r}")
            out.extend(float(x) for x in np.linspace(lo, hi, n))
        else:
            out.append(float(part))
    return out


def parse_grid(spec: str) -> dict:
    """``m=...;gamma=...;alpha=...`` into sorted axis values."""
    axes = {}
    for chunk in spec.split(";"):
        if not chunk.strip():
            continue
        if "=" not in chunk:
            raise UsageError(f"grid axis must look like name=values, got {chunk!r}")
        name, vals = chunk.split("=", 1)
        name = name.strip()
        if name not in ("m", "gamma", "alpha"):
            raise UsageError(f"unknown grid axis {name!r}")
        try:
            axes[name] = sorted(set(parse_axis(vals)))
        except ValueError as exc:
            raise UsageError(f"bad number in grid axis {name!r}: {exc}") from exc
    missing = {"m", "gamma", "alpha"} - set(axes)
    if missing:
        raise UsageError(f"grid is missing axes: {', '.join(sorted(missing))}")
    return axes


def workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise UsageError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from exc
    return max(1, n)


def ordered_map(fn, items):
    """Map preserving input order, on a process pool when workers() > 1."""
    n = workers()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- commands

def _tol_kw(args) -> dict:
    return {"t_max": args.t_max, "rel_tol": args.rel_tol, "abs_tol": args.abs_tol}


def bounded_alphas(p: Params, kw: dict) -> list[float]:
    """Slopes of the bounded solution(s) at (m, gamma)."""
    if p.m > -1:
        return [shooting.shoot_concave(p, **kw).alpha]
    iv = shooting.alpha_interval(p, **kw)
    if iv.kind == "empty":
        raise Nonexistent(f"no admissible slope found at m={p.m:g}, gamma={p.gamma:.17g}")
    if p.m < -2:
        return [iv.lo] if iv.kind == "singleton" else [iv.lo, iv.hi]
    return [iv.lo]


def cmd_solve(args) -> int:
    p = Params(args.m, args.gamma)
    rule = nonexistence_rule(p.m, p.gamma)
    if rule:
        raise Nonexistent(rule)
    if args.alpha is None and not args.shoot_bounded:
        raise UsageError("solve needs --alpha or --shoot-bounded")
    kw = _tol_kw(args)
    if args.shoot_bounded:
        alphas = bounded_alphas(p, kw)
    else:
        alphas = [args.alpha]
    reports = [shooting.solve(p, a, eps_far=args.eps_far, **kw) for a in alphas]
    if args.format == "json":
        payload = {"reports": [r.to_record() for r in reports]}
        emit(args, json_artifact(args, payload))
    else:
        emit(args, csv_artifact(args, shooting.reports_to_csv(reports)))
    if args.trajectory:
        traj = reports[0].trajectory
        emit(args, csv_artifact(args, traj.to_csv()), args.trajectory)
    return EXIT_OK


def _sweep_point(task):
    m, g, a, kw, eps_far = task
    try:
        return shooting.solve(Params(m, g), a, eps_far=eps_far, **kw).csv_row()
    except StepBudgetExceeded:
        return [fmt(m), fmt(g), fmt(a), "undecided_step_budget", "not_applicable", "", ""]


def cmd_sweep(args) -> int:
    axes = parse_grid(args.grid)
    kw = _tol_kw(args)
    tasks = [(m, g, a, kw, args.eps_far)
             for m in axes["m"] for g in axes["gamma"] for a in axes["alpha"]]
    rows = ordered_map(_sweep_point, tasks)
    if args.format == "json":
        recs = [dict(zip(shooting.SWEEP_HEADER, r)) for r in rows]
        emit(args, json_artifact(args, {"rows": recs}))
    else:
        emit(args, csv_artifact(args, _rows_csv(shooting.SWEEP_HEADER, rows)))
    return EXIT_OK


def cmd_gamma_star(args) -> int:
    m = args.m
    if not (m < -2 or -2 < m < -1):
        raise Nonexistent(f"gamma* is only defined for m < -2 or -2 < m < -1, got m={m:g}")
    kw = _tol_kw(args)
    gs = shooting.gamma_star_shooting(m, **kw)
    sep = phase_plane.gamma_star_separatrix(m)
    payload = {
        "m": m,
        "shooting": {"gamma_star": gs, "method": "shooting"},
        "separatrix": sep.to_record() | {"richardson_gap": sep.richardson_gap},
        "difference": abs(gs - sep.gamma_star),
    }
    if args.format == "json":
        emit(args, json_artifact(args, payload))
    else:
        body = _rows_csv(["m", "method", "gamma_star"],
                         [(m, "shooting", gs), (m, "separatrix", sep.gamma_star)])
        emit(args, csv_artifact(args, body))
    return EXIT_OK


def _isoclines(m: float, n: int = 401, span: float = 2.0) -> list[tuple]:
    rows = []
    for u in np.linspace(-span, span, n):
        u = float(u)
        try:
            psi = phase_plane.isocline_psi(m, u)
        except ZeroDivisionError:
            psi = math.nan
        rows.append((u, 2.0 * u * u, psi))
    return rows


def _separatrix_names(m: float) -> tuple:
    return ("S0", "S1", "S2")


def cmd_phase(args) -> int:
    m = args.m
    if m == -2:
        raise Nonexistent("the phase portrait is degenerate at m = -2 (O is not a saddle-node)")
    o, a = phase_plane.equilibria(m)
    eq = [{"name": n, "u": e.location[0], "v": e.location[1], "kind": e.kind,
           "eigenvalues": [[z.real, z.imag] for z in e.eigenvalues]}
          for n, e in (("O", o), ("A", a))]
    traces = {w: phase_plane.trace_separatrix(m, w) for w in _separatrix_names(m)}
    cycle = phase_plane.limit_cycle_probe(m) if args.cycle and m > 1 else None
    iso = _isoclines(m)
    if args.format == "json":
        payload = {
            "m": m,
            "equilibria": eq,
            "separatrices": {w: t.to_record() | {"points": [list(p) for p in t.points]}
                             for w, t in traces.items()},
            "isoclines": {"u": [r[0] for r in iso], "P_zero_v": [r[1] for r in iso],
                          "Q_zero_v": [r[2] for r in iso]},
        }
        if cycle is not None:
            payload["cycle"] = cycle.to_record()
        emit(args, json_artifact(args, payload))
        return EXIT_OK
    if args.out in (None, "-"):
        raise UsageError("phase --format csv writes several files; give a directory with --out")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    eq_rows = [(d["name"], d["u"], d["v"], d["kind"], d["eigenvalues"][0][0], d["eigenvalues"][0][1],
                d["eigenvalues"][1][0], d["eigenvalues"][1][1]) for d in eq]
    emit(args, csv_artifact(args, _rows_csv(
        ["name", "u", "v", "kind", "re1", "im1", "re2", "im2"], eq_rows)), str(out / "equilibria.csv"))
    for w, t in traces.items():
        emit(args, csv_artifact(args, t.to_csv()), str(out / f"separatrix_{w}.csv"))
    cross = [(w, k, s, u, v) for w, t in traces.items() for k, s, u, v in t.crossings]
    emit(args, csv_artifact(args, _rows_csv(["separatrix", "kind", "s", "u", "v"], cross)),
         str(out / "crossings.csv"))
    emit(args, csv_artifact(args, _rows_csv(["u", "P_zero_v", "Q_zero_v"], iso)),
         str(out / "isoclines.csv"))
    if cycle is not None:
        emit(args, csv_artifact(args, _rows_csv(["v0", "v1"], cycle.samples)),
             str(out / "cycle_section.csv"))
    return EXIT_OK


def cmd_verify(args) -> int:
    names = args.only or None
    if names:
        unknown = sorted(set(names) - set(checks.REGISTRY))
        if unknown:
            raise UsageError(f"unknown checks: {', '.join(unknown)}; "
                             f"available: {', '.join(checks.REGISTRY)}")
    results = checks.run_checks(names, tol_scale=args.tol_scale)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<18} {r.seconds:7.1f}s", file=sys.stderr)
    payload = {"passed": all(r.passed for r in results),
               "checks": [r.to_record() for r in results]}
    emit(args, json_artifact(args, payload))
    return EXIT_OK if payload["passed"] else EXIT_INTERNAL


def cmd_asymptote(args) -> int:
    p = Params(args.m, args.gamma)
    rule = nonexistence_rule(p.m, p.gamma)
    if rule:
        raise Nonexistent(rule)
    kw = _tol_kw(args)
    alpha = bounded_alphas(p, kw)[0] if args.alpha is None else args.alpha
    rep = shooting.solve(p, alpha, eps_far=args.eps_far, **kw)
    payload = {"m": p.m, "gamma": p.gamma, "alpha": alpha,
               "classification": rep.classification.to_record(), "lambda": rep.lambda_est}
    if rep.accepted and rep.classification.boundedness == "unbounded":
        fit, _ = asymptotics.converged_tail_fit(p, alpha, rel_tol=args.rel_tol, abs_tol=args.abs_tol)
        payload["lambda"] = "divergent"
        payload["tail_fit"] = fit.to_record()
    if rep.accepted and rep.classification.shape == "concave_convex" and p.m > 1:
        try:
            from . import ode_core
            traj = ode_core.integrate(ode_core.IvpSpec(p, alpha, t_max=args.decay_t_max,
                                                       rel_tol=args.rel_tol, abs_tol=args.abs_tol))
            payload["decay_2_over_t"] = {"max_rel_error": asymptotics.decay_check_2_over_t(traj),
                                         "t_max": args.decay_t_max}
        except asymptotics.CheckSkipped as exc:
            payload["decay_2_over_t"] = {"skipped": exc.reason}
        except asymptotics.PreconditionError as exc:
            payload["decay_2_over_t"] = {"skipped": str(exc)}
    if args.format == "json":
        emit(args, json_artifact(args, payload))
    else:
        rows = [("lambda", payload["lambda"] if isinstance(payload["lambda"], str)
                 else fmt(payload["lambda"]) if payload["lambda"] is not None else "")]
        if "tail_fit" in payload:
            tf = payload["tail_fit"]
            rows += [("exponent_est", fmt(tf["exponent_est"])), ("coeff_est", fmt(tf["coeff_est"])),
                     ("r_squared", fmt(tf["r_squared"])), ("verdict", tf["verdict"])]
        emit(args, csv_artifact(args, _rows_csv(["quantity", "value"], rows)))
    return EXIT_OK


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(sp, *, gamma=True, alpha=False):
    sp.add_argument("--m", type=float, required=True)
    if gamma:
        sp.add_argument("--gamma", type=float, required=True)
    if alpha:
        sp.add_argument("--alpha", type=float)
    sp.add_argument("--t-max", type=float, default=T_MAX)
    sp.add_argument("--rel-tol", type=float, default=1e-10)
    sp.add_argument("--abs-tol", type=float, default=1e-12)
    sp.add_argument("--format", choices=("csv", "json"), default="json")
    sp.add_argument("--out", default=None, help="output path ('-' or omitted: stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="heatflux", description="Shooting and phase-plane solver for "
                 "f''' + (m+2) f f'' - (2m+1) f'^2 = 0, f(0) = -gamma, f''(0) = -1.")
    ap.add_argument("--version", action="version", version=f"heatflux {__version__}")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("solve", help="integrate one slope or shoot for the bounded solution")
    _common(s, alpha=True)
    s.add_argument("--shoot-bounded", action="store_true")
    s.add_argument("--eps-far", type=float, default=EPS_FAR)
    s.add_argument("--trajectory", default=None, help="also write the trajectory CSV here")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("sweep", help="classify every point of an (m, gamma, alpha) grid")
    s.add_argument("--grid", required=True, help="e.g. 'm=-3,0;gamma=-1:1:5;alpha=0.5'")
    s.add_argument("--t-max", type=float, default=T_MAX)
    s.add_argument("--rel-tol", type=float, default=1e-10)
    s.add_argument("--abs-tol", type=float, default=1e-12)
    s.add_argument("--eps-far", type=float, default=EPS_FAR)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("gamma-star", help="critical gamma by shooting and by the separatrix")
    _common(s, gamma=False)
    s.set_defaults(func=cmd_gamma_star)

    s = sub.add_parser("phase", help="equilibria, separatrices, isoclines, cycle probe")
    s.add_argument("--m", type=float, required=True)
    s.add_argument("--cycle", action="store_true", help="probe for a cycle around A (m > 1)")
    s.add_argument("--format", choices=("csv", "json"), default="json")
    s.add_argument("--out", default=None, help="file (json) or directory (csv)")
    s.set_defaults(func=cmd_phase)

    s = sub.add_parser("verify", help="run the built-in check suite")
    s.add_argument("--only", action="append", metavar="CHECK")
    s.add_argument("--tol-scale", type=float, default=1.0)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_verify, format="json")

    s = sub.add_parser("asymptote", help="tail limit, growth exponent or 2/t decay")
    _common(s, alpha=True)
    s.add_argument("--eps-far", type=float, default=EPS_FAR)
    s.add_argument("--decay-t-max", type=float, default=400.0)
    s.set_defaults(func=cmd_asymptote)
    return ap


def _validate(args) -> None:
    if getattr(args, "command", None) == "solve":
        if args.alpha is not None and args.shoot_bounded:
            raise UsageError("--alpha and --shoot-bounded are mutually exclusive")
    for name in ("t_max", "rel_tol", "abs_tol", "tol_scale"):
        v = getattr(args, name, None)
        if v is not None and not (v > 0 and math.isfinite(v)):
            raise UsageError(f"--{name.replace('_', '-')} must be positive and finite")
    for name in ("m", "gamma", "alpha"):
        v = getattr(args, name, None)
        if v is not None and not math.isfinite(v):
            raise UsageError(f"--{name} must be finite")


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _validate(args)
        return args.func(args)
    except UsageError as exc:
        print(f"heatflux: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Nonexistent as exc:
        print(f"heatflux: {exc}", file=sys.stderr)
        return EXIT_NONEXISTENT
    except shooting.RegimeError as exc:
        print(f"heatflux: {exc}", file=sys.stderr)
        return EXIT_NONEXISTENT
    except Exception as exc:  # noqa: BLE001
        print(f"heatflux: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
