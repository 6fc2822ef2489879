"""Command-line front end: ``g2forge verify | compute | scan | flow``.

Exit codes: 0 success, 1 a verification check failed, 2 bad input,
3 the input is well formed but violates a structural constraint (not
closed, not positive, Jacobi fails, ...).
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from . import family, solitons, verify
from .config import (
    FLOAT,
    RATIONAL,
    ConfigError,
    DomainError,
    Instance,
    dumps,
    form_to_json,
    format_scalar,
    json_scalar,
    matrix_to_json,
    parse_scalar,
    resolve_instance,
)
from .exterior import DEFAULT_TOL
from .g2core import (
    NotClosedError,
    PositivityError,
    compute_torsion,
    eigenform_residual,
    erp_residual,
    hodge_laplacian,
    ricci_generic,
)
from .liealg import derivation_space

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_DOMAIN = 0, 1, 2, 3
WHATS = ("torsion", "laplacian", "ricci", "erp", "eigenform", "soliton", "ricci-soliton")
SCAN_HEADER = ["param", "scal", "ric_norm", "F", "c", "classification",
               "laplacian_residual", "ricci_soliton_residual"]


def _env_tol() -> float | None:
    raw = os.environ.get("G2FORGE_TOL")
    if raw is None or raw.strip() == "":
        return None
    try:
        tol = float(raw)
    except ValueError as exc:
        raise ConfigError(f"G2FORGE_TOL={raw!r} is not a number") from exc
    if not tol > 0:
        raise ConfigError("G2FORGE_TOL must be positive")
    return tol


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _scalar_entry(value, path: str) -> dict:
    return {"value": json_scalar(value), "path": path}


def _form_entry(a, path: str) -> dict:
    return {"value": form_to_json(a), "path": path}


def _check(name: str, residual, tol: float) -> dict:
    r = float(residual)
    return {"name": name, "residual": repr(r), "tol": repr(tol), "passed": r <= tol}


def _max_diff(a, b) -> float:
    return float((a - b).max_abs())


# -- verify -------------------------------------------------------------------

def cmd_verify(args) -> int:
    try:
        only = [n for item in (args.only or []) for n in item.split(",") if n]
        checks = verify.select(only)
    except KeyError as exc:
        print(f"error: unknown check(s): {exc.args[0]}; known: {', '.join(verify.CHECK_NAMES)}",
              file=sys.stderr)
        return EXIT_INPUT
    ctx = verify.Context(mode=args.mode, tol=args.tol, seed=args.seed)
    results = []
    width = max(len(c.name) for c in checks)
    print(f"{'check':<{width}}  crit  status  {'measured':>12}  {'tol':>8}")
    for check in checks:
        r = verify.run_check(check, ctx)
        results.append(r)
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  {r.criterion:>4}  {status:<6}  {r.measured:>12.3e}  {r.tol:>8.1e}",
              flush=True)
    failed = [r for r in results if not r.passed]
    report = {
        "mode": args.mode,
        "seed": args.seed,
        "tol_override": None if args.tol is None else repr(args.tol),
        "passed": not failed,
        "checks": [r.as_dict() for r in results],
    }
    if args.out:
        _emit(dumps(report), args.out)
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if failed:
        print(f"first failing check: {failed[0].name} (measured {failed[0].measured:.3e}, "
              f"tol {failed[0].tol:.1e})", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- compute ------------------------------------------------------------------

def _warn_degenerate(inst: Instance) -> None:
    if inst.algebra.is_exact():
        return
    space = derivation_space(inst.algebra)
    if space.near_degenerate:
        print(f"warning: derivation nullspace is near the cutoff {space.cutoff:.2e}; "
              f"dim Der = {space.dim} may be overestimated", file=sys.stderr)


def _torsion(inst: Instance, tol: float) -> dict:
    s = inst.structure()
    t = compute_torsion(s)
    out = {
        "tau0": _scalar_entry(t.tau0, "generic"),
        "tau1": _form_entry(t.tau1, "generic"),
        "tau2": _form_entry(t.tau2, "generic"),
        "tau3": _form_entry(t.tau3, "generic"),
        "closed": s.is_closed(tol),
        "coclosed": s.is_coclosed(tol),
    }
    checks = []
    if inst.spec is not None:
        f = family.specialized_torsion(inst.spec)
        r = max(float(abs(f.tau0 - t.tau0)), _max_diff(f.tau1, t.tau1),
                _max_diff(f.tau2, t.tau2), _max_diff(f.tau3, t.tau3))
        checks.append(_check("family-torsion-vs-generic", r, tol))
    return {"results": out, "checks": checks}


def _laplacian(inst: Instance, tol: float) -> dict:
    s = inst.structure()
    lap = hodge_laplacian(s, s.phi)
    checks = []
    if inst.spec is not None:
        checks.append(_check("family-laplacian-vs-generic",
                             _max_diff(family.specialized_laplacian(inst.spec), lap), tol))
    return {"results": {"laplacian": _form_entry(lap, "generic"), "closed": s.is_closed(tol)},
            "checks": checks}


def _ricci(inst: Instance, tol: float) -> dict:
    gen = ricci_generic(inst.algebra)
    checks = []
    if inst.spec is not None:
        data = family.ricci_operator(inst.spec)
        ric, path = data.ricci_operator, "family"
        r = max(float(abs(ric[i][j] - gen[i][j])) for i in range(7) for j in range(7))
        checks.append(_check("family-ricci-vs-generic", r, tol))
    else:
        ric, path = gen, "generic"
    scal = sum(ric[i][i] for i in range(7))
    norm2 = sum(v * v for row in ric for v in row)
    flat = (norm2 == 0) if all(isinstance(v, (int, Fraction)) for row in ric for v in row) \
        else float(norm2) < tol * tol
    out = {
        "ricci_operator": {"value": matrix_to_json(ric), "path": path},
        "scalar_curvature": _scalar_entry(scal, path),
        "ricci_norm": _scalar_entry(math.sqrt(float(norm2)), path),
        "ricci_norm_squared": _scalar_entry(norm2, path),
        "F": {"value": "flat", "path": path} if flat else _scalar_entry(scal * scal / norm2, path),
    }
    return {"results": out, "checks": checks}


def _erp(inst: Instance, tol: float) -> dict:
    res = erp_residual(inst.structure(), tol)
    return {"results": {
        "d_tau": _form_entry(res.lhs, "generic"),
        "erp_rhs": _form_entry(res.rhs, "generic"),
        "residual": _scalar_entry(res.residual, "generic"),
        "is_erp": res.residual <= tol,
    }, "checks": []}


def _eigenform(inst: Instance, tol: float) -> dict:
    s = inst.structure()
    lam, res = eigenform_residual(s, tol)
    tau = compute_torsion(s).tau2
    return {"results": {
        "lambda": _scalar_entry(lam, "|tau|^2 / 7"),
        "residual": _scalar_entry(res, "generic"),
        "tau_norm": _scalar_entry(s.norm(tau), "generic"),
        "is_eigenform": res <= tol,
    }, "checks": []}


def _soliton_common(sol) -> dict:
    return {
        "residual": _scalar_entry(sol.residual, "recomputed from scratch"),
        "is_soliton": sol.is_soliton,
        "classification": sol.classification,
    }


def _soliton(inst: Instance, tol: float) -> dict:
    _warn_degenerate(inst)
    s = inst.structure()
    sol = solitons.solve_laplacian_soliton(s, tol)
    out = _soliton_common(sol)
    exact = solitons.rationalize_soliton(s, sol) if sol.is_soliton else None
    if exact is not None:
        path = "least squares, confirmed exactly in rationals"
        out["c"] = _scalar_entry(exact[0], path)
        out["D"] = {"value": matrix_to_json(exact[1]), "path": path}
    else:
        out["c"] = _scalar_entry(sol.c, "least squares")
        out["D"] = {"value": matrix_to_json(np.asarray(sol.D)), "path": "least squares"}
    T = sol.singularity_time
    if T is not None and exact is not None:
        T = Fraction(-3, 2) / exact[0]
    out["singularity_time"] = None if T is None else _scalar_entry(T, "-3 / (2c)")
    return {"results": out, "checks": []}


def _ricci_soliton(inst: Instance, tol: float) -> dict:
    _warn_degenerate(inst)
    sol = solitons.solve_ricci_soliton(inst.spec if inst.spec is not None else inst.algebra, tol)
    out = _soliton_common(sol)
    out["c"] = _scalar_entry(sol.c, "least squares")
    out["D"] = {"value": matrix_to_json(np.asarray(sol.D)), "path": "least squares"}
    return {"results": out, "checks": []}


_COMPUTE = {
    "torsion": _torsion,
    "laplacian": _laplacian,
    "ricci": _ricci,
    "erp": _erp,
    "eigenform": _eigenform,
    "soliton": _soliton,
    "ricci-soliton": _ricci_soliton,
}


def cmd_compute(args) -> int:
    inst = resolve_instance(args.config, args.mode)
    tol = args.tol if args.tol is not None else DEFAULT_TOL
    body = _COMPUTE[args.what](inst, tol)
    report = {"instance": inst.label, "mode": args.mode, "what": args.what,
              "tol": repr(tol), **body}
    _emit(dumps(report), args.out)
    failed = [c for c in body["checks"] if not c["passed"]]
    if failed:
        print(f"check failed: {failed[0]['name']}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- scan ---------------------------------------------------------------------

def _grid(start, stop, step, mode: str) -> list:
    if mode == FLOAT:
        n = math.floor((stop - start) / step + 1e-9)
        return [start + k * step for k in range(n + 1)] if stop >= start else []
    out, k = [], 0
    while start + k * step <= stop:
        out.append(start + k * step)
        k += 1
    return out


def _param_text(p) -> str:
    """Terminating fractions as decimals so the column plots directly."""
    if isinstance(p, Fraction) and p.denominator > 1:
        d = p.denominator
        for f in (2, 5):
            while d % f == 0:
                d //= f
        if d == 1:
            digits = 0
            while (p * 10**digits).denominator != 1:
                digits += 1
            return f"{float(p):.{digits}f}"
    return format_scalar(p)


def scan_row(name: str, p, mode: str, tol: float) -> list[str]:
    spec = family.builtin(name, p)
    if mode == FLOAT:
        spec = spec.to_float()
    data = family.ricci_operator(spec)
    lap = solitons.solve_laplacian_soliton(spec.structure(), tol)
    ric = solitons.solve_ricci_soliton(spec, tol)
    return [
        _param_text(p),
        format_scalar(data.scalar_curvature),
        repr(data.ricci_norm),
        "flat" if data.F_value is None else format_scalar(data.F_value),
        repr(lap.c),
        lap.classification,
        repr(lap.residual),
        repr(ric.residual),
    ]


def _scan_row_args(a):
    return scan_row(*a)


def cmd_scan(args) -> int:
    start, stop, step = (parse_scalar(v, args.mode) for v in (args.start, args.stop, args.step))
    if not step > 0:
        raise ConfigError("step must be positive")
    tol = args.tol if args.tol is not None else DEFAULT_TOL
    params = _grid(start, stop, step, args.mode)
    jobs = [(args.family, p, args.mode, tol) for p in params]
    if args.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            rows = list(pool.map(_scan_row_args, jobs, chunksize=8))
    else:
        rows = [scan_row(*j) for j in jobs]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_HEADER)
    w.writerows(rows)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


# -- flow ---------------------------------------------------------------------

def _trajectory_text(states) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(solitons.TRAJECTORY_HEADER)
    w.writerows(solitons.trajectory_rows(states))
    return buf.getvalue()


def cmd_flow(args) -> int:
    inst = resolve_instance(args.config, args.mode)
    summary_to = sys.stderr if args.out is None else sys.stdout
    try:
        run = solitons.flow_integrate(inst.structure(), args.t_end, args.dt,
                                      sample_every=args.sample_every, adaptive=args.adaptive)
    except solitons.FlowPositivityError as exc:
        _emit(_trajectory_text(exc.states), args.out)
        print(f"error: {exc}; last good t = {exc.last_t:.6g}", file=sys.stderr)
        return EXIT_DOMAIN
    except solitons.StepUnderflowError as exc:
        _emit(_trajectory_text(exc.states), args.out)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    _emit(_trajectory_text(run.states), args.out)
    final = run.final
    parts = [f"t_final={final.t:.6g}", f"laplacian_norm={final.laplacian_norm:.6g}",
             f"positivity_margin={final.margin:.6g}"]
    if run.blowup_time is not None:
        parts.append(f"singularity detected at t={run.blowup_time:.6g}")
    else:
        parts.append("no singularity detected")
    print("summary: " + ", ".join(parts), file=summary_to)
    return EXIT_OK


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive_float, default=None,
                        help="absolute tolerance (default: G2FORGE_TOL, else per check / 1e-9)")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
    common.add_argument("--mode", choices=(RATIONAL, FLOAT), default=RATIONAL,
                        help="exact rational arithmetic where possible, or floats")
    common.add_argument("--out", default=None, help="write the report / CSV here instead of stdout")

    p = argparse.ArgumentParser(prog="g2forge", description="G2-structures on solvable Lie algebras")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run the named verification checks")
    v.add_argument("--only", action="append", metavar="NAME[,NAME]",
                   help=f"run only these checks ({', '.join(verify.CHECK_NAMES)})")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("compute", parents=[common], help="compute one quantity for an instance")
    c.add_argument("config", help="JSON file, inline JSON, or builtin gs:<s> / sa:<a> / fr / flat")
    c.add_argument("what", choices=WHATS)
    c.set_defaults(func=cmd_compute)

    s = sub.add_parser("scan", parents=[common], help="sweep the gs or sa family into a CSV")
    s.add_argument("family", choices=("gs", "sa"))
    s.add_argument("--start", default="0")
    s.add_argument("--stop", default="3")
    s.add_argument("--step", default="1/100")
    s.add_argument("--workers", type=int, default=1, help="processes for the sweep")
    s.set_defaults(func=cmd_scan)

    f = sub.add_parser("flow", parents=[common], help="integrate the Laplacian flow with RK4")
    f.add_argument("config")
    f.add_argument("--t-end", type=_positive_float, required=True)
    f.add_argument("--dt", type=_positive_float, required=True)
    f.add_argument("--sample-every", type=int, default=1)
    f.add_argument("--adaptive", action="store_true", help="halve dt when positivity gets thin")
    f.set_defaults(func=cmd_flow)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        if args.tol is None:
            args.tol = _env_tol()
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DomainError, family.FamilyError, NotClosedError, PositivityError,
            family.FlatMetricError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
