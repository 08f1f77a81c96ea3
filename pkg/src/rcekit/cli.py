"""Command-line entry point.

Exit codes:
  0  success
  2  invalid problem file, schema violation or bad arguments
  3  reduction precondition failed (s2 or a12 vanishing, w01 not positive)
  4  integration failure (step underflow, non-finite state, no return from a pole)
  5  primitive-pair construction failed
  6  analysis failure (family, time-domain, Floquet or portrait)
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from importlib import resources
from typing import Optional

import jsonschema
import numpy as np

from .cases import CaseError, case_spec
from .coeffexpr import ExprSyntaxError, SingularityError, parse_expression, to_string
from .family import FamilyError, FamilySolution, family_eval, fit_branch_and_K, \
    fit_to_samples, phase_accumulator
from .floquet import FloquetError, floquet_exponents
from .odeengine import ESCAPE_CAP, IntegrationError, TimeGrid, integrate_rce
from .phaseportrait import TransientError, classify_portrait, measure_rce_transient
from .primitive import PrimitiveError, complex_pair_from, decompose_to_primitive, \
    find_primitive_backward, primitive_pair
from .reduction import GeneralRiccati, ReductionError, ScalarSystem, StateMatrix2x2, reduce
from .sweep import SweepSpec, refine_boundaries, rows_to_csv, rows_to_jsonl, run_sweep
from .timedomain import RCE_OF, TimeDomainError, fit_time_domain, reconstruct_time_domain, \
    source_residual

EXIT_OK, EXIT_SCHEMA, EXIT_REDUCTION, EXIT_INTEGRATION, EXIT_PRIMITIVE, EXIT_ANALYSIS = \
    0, 2, 3, 4, 5, 6
SCHEMA_VERSION = 1
DEFAULT_SAMPLES = 2001

SWEEP_COLUMNS_HELP = """sweep columns:
  params          grid point as JSON
  status          ok | inconclusive | error
  label           attractor | attractor_periodic_escape | no_attractor_bounded |
                  repetitive_escape
  pair_kind       real | imaginary
  portrait_kind   attractor_separatrix | repetitive_escape | degenerate
  predisposition  stable-capable | escape-predisposed | mixed
  dc_intrinsic    period average of w01*nu_I (nu_Im for the imaginary kind)
  r1, r2          Floquet exponents [re, im]
  multipliers     monodromy eigenvalues [[re, im], [re, im]]
  escape_cadence  mean time between escape events (null if none)
  rce_periodic    periodicity verdict of the primitive solution
  rce_deviation   its sup-norm deviation
  product_error   |det M - exp(int tr A)| / exp(int tr A)
  message         error text for failed points
"""


class UsageError(ValueError):
    pass


# --------------------------------------------------------------------------
# problem loading


def load_schema() -> dict:
    text = resources.files("rcekit").joinpath("schema/problem.schema.json").read_text()
    return json.loads(text)


def load_problem(path: str) -> dict:
    try:
        with (sys.stdin if path == "-" else open(path)) as fh:
            problem = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"problem file is not valid JSON: {exc}") from exc
    jsonschema.validate(problem, load_schema())
    return problem


def _coef(v):
    return parse_expression(str(v))


def build_system(problem: dict):
    """Returns (system, case spec or None)."""
    form = problem["form"]
    if form == "case":
        params = {k: problem[k] for k in ("N", "a0", "q", "w02") if k in problem}
        spec = case_spec(problem["case"], **params)
        return spec.build(), spec
    c = problem["coefficients"]
    need = {"riccati": ("s2", "s1", "s0"), "second_order": ("r1", "r0"),
            "state_matrix": ("a11", "a12", "a21", "a22")}[form]
    missing = [k for k in need if k not in c]
    extra = [k for k in c if k not in need]
    if missing or extra:
        raise UsageError(f"form {form!r} needs coefficients {need}; missing {missing}, "
                         f"unexpected {extra}")
    args = [_coef(c[k]) for k in need]
    cls = {"riccati": GeneralRiccati, "second_order": ScalarSystem,
           "state_matrix": StateMatrix2x2}[form]
    return cls(*args), None


def _window(problem: dict, args, spec) -> tuple:
    if args.window:
        try:
            a, b = (float(x) for x in args.window.split(":"))
        except ValueError as exc:
            raise UsageError("--window expects t0:t1") from exc
        return a, b
    if "window" in problem:
        return problem["window"]["t0"], problem["window"]["t1"]
    if spec is not None:
        return spec.window
    raise UsageError("no window given (problem 'window' or --window)")


def _period(problem: dict, args, spec) -> Optional[float]:
    if args.period is not None:
        return args.period
    opt = problem.get("options", {})
    if "period" in opt:
        return opt["period"]
    return None if spec is None else spec.period


def _ic(problem: dict):
    ic = problem.get("ic")
    if ic is None:
        return None
    if isinstance(ic, list):
        return complex(ic[0], ic[1])
    return float(ic)


class Context:
    """Everything a subcommand needs, built once from the problem and flags."""

    def __init__(self, problem: dict, args):
        self.problem = problem
        self.args = args
        self.options = dict(problem.get("options", {}))
        self.system, self.spec = build_system(problem)
        self.window = _window(problem, args, self.spec)
        self.period = _period(problem, args, self.spec)
        self.tol = args.tol if args.tol is not None else self.options.get("tol")
        self.cap = args.escape_cap if args.escape_cap is not None else \
            self.options.get("escape_cap", ESCAPE_CAP)
        self.r = reduce(self.system, window=self.window)
        if self.period is not None:
            self.r = self.r.with_period(self.period)
        n = problem.get("samples", DEFAULT_SAMPLES)
        try:
            self.grid = TimeGrid.uniform(self.window[0], self.window[1], n,
                                         self.r.singular_points)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        self._pair = None

    def pair(self):
        if self._pair is None:
            self._pair = self._make_pair()
        return self._pair

    def _make_pair(self):
        opt = self.options
        r, grid = self.r, self.grid
        if "guess" in opt:
            g = complex(*opt["guess"])
            return find_primitive_backward(r, g, opt.get("t_ref"), window=grid)
        if self.spec is not None and self.spec.name == "qho":
            lo, hi = sorted(self.window)
            t_ref = 0.0 if lo <= 0.0 <= hi else lo
            nu0 = complex(0.0, math.sqrt(self.spec.params["N"])) if t_ref == 0.0 else None
            if nu0 is not None:
                return complex_pair_from(r, grid, t_ref, nu0, method="symmetric start")
        if self.spec is not None and self.spec.name == "bessel":
            far = max(100.0, max(self.window))
            return find_primitive_backward(r, None, far, window=grid)
        return primitive_pair(r, grid, kind_hint=opt.get("kind"))

    def base_time(self) -> float:
        return float(self.options.get("base_time", self.grid.samples[0]))

    def ic_time(self) -> float:
        return float(self.problem.get("ic_time", self.grid.samples[0]))


# --------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _open_out(path: str):
    return sys.stdout if path == "-" else open(path, "w", newline="")


def write_table(path: str, fmt: str, columns: list, rows) -> None:
    fh = _open_out(path)
    try:
        if fmt == "jsonl":
            for row in rows:
                fh.write(json.dumps({c: _jsonable(v) for c, v in zip(columns, row)}) + "\n")
        else:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    finally:
        if fh is not sys.stdout:
            fh.close()


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [_jsonable(v.real), _jsonable(v.imag)]
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    return v


def write_json(path: str, obj) -> None:
    data = {"schema": SCHEMA_VERSION}
    data.update(_jsonable(obj))
    fh = _open_out(path)
    try:
        json.dump(data, fh, indent=2)
        fh.write("\n")
    finally:
        if fh is not sys.stdout:
            fh.close()


def write_sidecar(path: str, obj) -> None:
    if path == "-":
        print(json.dumps(_jsonable(obj)), file=sys.stderr)
    else:
        write_json(path + ".json", obj)


def pair_summary(pair) -> dict:
    fin = pair.nuI[np.isfinite(pair.nuI)]
    return {
        "kind": pair.kind, "method": pair.method,
        "t_start": pair.t[0], "t_end": pair.t[-1],
        "nuR_start": pair.nuR[0], "nuR_end": pair.nuR[-1],
        "nuI_start": pair.nuI[0], "nuI_end": pair.nuI[-1],
        "nuI_min": float(fin.min()) if fin.size else None,
        "has_poles": pair.has_poles,
    }


def _expr_str(cf) -> str:
    return to_string(cf.value)


# --------------------------------------------------------------------------
# subcommands


def cmd_reduce(ctx: Context) -> int:
    r = ctx.r
    t = np.linspace(ctx.window[0], ctx.window[1], 11)
    names = ("omega01", "omega02", "eta", "alpha", "sigma0")
    fns = [getattr(r, k) for k in names]
    vals = [np.asarray(f(t), dtype=float) * np.ones_like(t) for f in fns]
    if ctx.args.format == "jsonl" or ctx.args.format == "csv" and ctx.args.samples_only:
        write_table(ctx.args.out, ctx.args.format, ["t", *names],
                    [[t[i], *(v[i] for v in vals)] for i in range(len(t))])
        return EXIT_OK
    report = {
        "form": r.form,
        "expressions": {k: _expr_str(f) for k, f in zip(names, fns)},
        "singular_points": list(r.singular_points),
        "autonomous": r.is_autonomous(),
        "samples": {"t": t, **{k: v for k, v in zip(names, vals)}},
    }
    write_json(ctx.args.out, report)
    return EXIT_OK


def _member_for(ctx: Context, pair, phi):
    opt = ctx.options
    ic = _ic(ctx.problem)
    if ic is not None and not isinstance(ic, complex):
        return fit_branch_and_K(pair, phi, ic, ctx.ic_time())
    if "branch" in opt and opt["branch"] in RCE_OF.values():
        return FamilySolution(pair, opt["branch"], float(opt.get("K", math.inf)), phi)
    return None


def cmd_solve(ctx: Context) -> int:
    ic = _ic(ctx.problem)
    if ic is None:
        raise UsageError("solve needs an initial condition 'ic'")
    if ctx.problem.get("ic_time", ctx.grid.samples[0]) != ctx.grid.samples[0]:
        raise UsageError("solve integrates from the window start; set ic_time to t0")
    tol = ctx.tol or 1e-10
    traj = integrate_rce(ctx.r, ic, ctx.grid, tol=tol, cap=ctx.cap)
    tags = np.where(traj.modes == 1, "reciprocal", "direct")
    rows = [[traj.t[i], traj.values[i].real, traj.values[i].imag, tags[i]]
            for i in range(len(traj.t))]
    write_table(ctx.args.out, ctx.args.format, ["t", "nu_re", "nu_im", "variable_tag"], rows)
    side = {"escape_events": [e.t_escape for e in traj.escape_events], "branch": None,
            "K": None, "status": traj.status, "ic": ic}
    try:
        pair = ctx.pair()
        side["pair"] = pair_summary(pair)
        if not isinstance(ic, complex) and not pair.has_poles:
            phi = phase_accumulator(ctx.r, pair, ctx.base_time())
            m = fit_branch_and_K(pair, phi, ic, ctx.ic_time())
            side.update(branch=m.branch, K=m.K, base_time=phi.base_time,
                        family_escape_times=m.escape_times())
    except (PrimitiveError, FamilyError) as exc:
        side["pair_error"] = str(exc)
    write_sidecar(ctx.args.out, side)
    return EXIT_OK


def cmd_family(ctx: Context) -> int:
    pair = ctx.pair()
    phi = phase_accumulator(ctx.r, pair, ctx.base_time())
    member = _member_for(ctx, pair, phi)
    cols = ["t", "nu_R", "nu_I", "phi_f"]
    data = [pair.t, pair.nuR, pair.nuI, phi.phi_f]
    if member is not None:
        v = family_eval(member, phi, pair.t)
        cols += ["nu_re", "nu_im"]
        data += [np.real(v), np.imag(v)]
    write_table(ctx.args.out, ctx.args.format, cols,
                [[d[i] for d in data] for i in range(len(pair.t))])
    side = {"pair": pair_summary(pair), "base_time": phi.base_time}
    if member is not None:
        side.update(branch=member.branch, K=member.K, escape_times=member.escape_times())
        if member.branch in ("tanh", "coth"):
            side.update(C=member.C, K0=member.K0)
    write_sidecar(ctx.args.out, side)
    return EXIT_OK


def read_trajectory(path: str):
    """t and nu columns of a solve export (CSV)."""
    with open(path) as fh:
        rd = csv.DictReader(fh)
        rows = list(rd)
    if not rows or "t" not in rows[0] or "nu_re" not in rows[0]:
        raise UsageError(f"{path} is not a trajectory export")
    t = np.array([float(r["t"]) for r in rows])
    nu = np.array([float(r["nu_re"]) for r in rows])
    return t, nu


def cmd_timedomain(ctx: Context) -> int:
    opt = ctx.options
    r = ctx.r
    if ctx.args.trajectory:
        t, nu = read_trajectory(ctx.args.trajectory)
        grid = TimeGrid.from_samples(t, r.singular_points)
        pair = decompose_to_primitive(r, (t, nu))
        ctx.grid, ctx._pair = grid, pair
        phi = phase_accumulator(r, pair, ctx.base_time())
        member = fit_to_samples(pair, phi, nu)
        td_branch = {v: k for k, v in RCE_OF.items()}[member.branch]
        td = reconstruct_time_domain(r, pair, phi, td_branch, member.K, opt.get("A", 1.0))
    else:
        pair = ctx.pair()
        phi = phase_accumulator(r, pair, ctx.base_time())
        if "y0" in opt or "dy0" in opt:
            td = fit_time_domain(r, pair, phi, opt.get("y0", 0.0), opt.get("dy0", 0.0),
                                 ctx.ic_time())
        else:
            branch = opt.get("branch")
            if branch is None or branch not in RCE_OF:
                member = _member_for(ctx, pair, phi)
                if member is None:
                    branch = "cosh" if pair.kind == "real" else "sin"
                    K = opt.get("K", 0.0)
                else:
                    branch = {v: k for k, v in RCE_OF.items()}[member.branch]
                    K = member.K
            else:
                K = opt.get("K", 0.0)
            td = reconstruct_time_domain(r, pair, phi, branch, K, opt.get("A", 1.0))
    res = source_residual(r.scalar, td.t, td.y)
    rows = [[td.t[i], td.y[i], td.dy[i], td.envelope_g[i], td.f[i], res[i]]
            for i in range(len(td.t))]
    write_table(ctx.args.out, ctx.args.format, ["t", "y", "dy", "g", "f", "residual"], rows)
    write_sidecar(ctx.args.out, {"branch": td.branch, "K": td.K, "A": td.A,
                                 "max_residual": float(np.max(res)),
                                 "pair": pair_summary(pair)})
    return EXIT_OK


def cmd_floquet(ctx: Context) -> int:
    if ctx.period is None:
        raise UsageError("floquet needs a period (options.period or --period)")
    pair = ctx.pair()
    fr = floquet_exponents(ctx.system, ctx.r, pair, ctx.period)
    out = fr.to_dict()
    out["pair"] = pair_summary(pair)
    write_json(ctx.args.out, out)
    return EXIT_OK


def cmd_portrait(ctx: Context) -> int:
    pair = ctx.pair()
    rep = classify_portrait(ctx.r, pair, probe_ics=ctx.options.get("probes"),
                            eps=ctx.options.get("eps", 1e-3), threads=ctx.args.threads)
    out = rep.to_dict()
    ic = _ic(ctx.problem)
    if ic is not None and pair.kind == "real" and not isinstance(ic, complex):
        try:
            out["ic_transient"] = measure_rce_transient(ctx.r, pair, ic,
                                                        ctx.options.get("eps", 1e-3))
        except TransientError as exc:
            out["ic_transient_error"] = str(exc)
    out["pair"] = pair_summary(pair)
    write_json(ctx.args.out, out)
    return EXIT_OK


def cmd_sweep(problem: dict, args) -> int:
    sw = problem.get("sweep")
    if sw is None:
        raise UsageError("sweep needs a 'sweep' block")
    if problem["form"] != "case":
        raise UsageError("sweeps run over a named case family")
    axes = {}
    for k, v in sw["axes"].items():
        axes[k] = SweepSpec.linspace(v["lo"], v["hi"], v["count"]) if isinstance(v, dict) \
            else [float(x) for x in v]
    fixed = {k: problem[k] for k in ("N", "a0", "q", "w02") if k in problem and k not in axes}
    fixed.update(sw.get("fixed", {}))
    spec = SweepSpec(problem["case"], axes, fixed, sw.get("n_periods", 6),
                     sw.get("samples_per_period", 600), args.tol or 1e-12,
                     sw.get("refine_axis"), sw.get("refine_resolution", 1e-3))
    rows = run_sweep(spec, threads=args.threads)
    fh = _open_out(args.out)
    try:
        (rows_to_jsonl if args.format == "jsonl" else rows_to_csv)(rows, fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    if spec.refine_axis:
        write_sidecar(args.out, {"boundaries": refine_boundaries(spec, rows)})
    return EXIT_OK


COMMANDS = {"reduce": cmd_reduce, "solve": cmd_solve, "family": cmd_family,
            "timedomain": cmd_timedomain, "floquet": cmd_floquet, "portrait": cmd_portrait}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rcekit", description="Riccati characteristic equation toolkit",
        epilog=__doc__ + "\n" + SWEEP_COLUMNS_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("command", choices=list(COMMANDS) + ["sweep"])
    p.add_argument("--problem", required=True, help="problem file (JSON), '-' for stdin")
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--escape-cap", type=float, default=None)
    p.add_argument("--window", default=None, help="t0:t1")
    p.add_argument("--period", type=float, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--trajectory", default=None,
                   help="timedomain: seed from a solve CSV export instead of the ic")
    p.add_argument("--samples-only", action="store_true",
                   help="reduce: emit only the sampled coefficient table")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SCHEMA if exc.code else EXIT_OK
    try:
        problem = load_problem(args.problem)
        if args.command == "sweep":
            return cmd_sweep(problem, args)
        ctx = Context(problem, args)
        return COMMANDS[args.command](ctx)
    except (jsonschema.ValidationError, UsageError, ExprSyntaxError, CaseError,
            FileNotFoundError) as exc:
        print(f"rcekit: invalid problem: {_msg(exc)}", file=sys.stderr)
        return EXIT_SCHEMA
    except ReductionError as exc:
        print(f"rcekit: reduction failed: {exc}", file=sys.stderr)
        return EXIT_REDUCTION
    except (IntegrationError, SingularityError) as exc:
        print(f"rcekit: integration failed: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except PrimitiveError as exc:
        print(f"rcekit: primitive pair failed: {exc}", file=sys.stderr)
        return EXIT_PRIMITIVE
    except (FamilyError, TimeDomainError, FloquetError, TransientError) as exc:
        print(f"rcekit: analysis failed: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


def _msg(exc) -> str:
    return exc.message if isinstance(exc, jsonschema.ValidationError) else str(exc)


if __name__ == "__main__":
    sys.exit(main())
