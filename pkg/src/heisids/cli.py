"""Command-line front end: ``heisids <command> [options]``.

Every run emits one record set as a table, CSV or JSON::

    {"command": ..., "config": {...}, "results": [...], "meta": {"version", "walltime_ms"}}

Exit codes: 0 success, 1 selftest failure, 2 invalid input, 3 non-convergence
(the record is still written, with ``converged`` false).

Tolerances may be preset in an INI-style config file (section ``[heisids]``,
keys ``rel_tol``, ``abs_tol``, ``tol``, ``max_terms``, ``format``); the file
named by ``--config`` wins over ``$HEISIDS_CONFIG``, and explicit flags win
over both.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import sys
import time
from typing import Callable

import numpy as np

from . import __version__
from . import green, ids, kernels, weylsim
from .numerics import NonConvergence, QuadratureSpec, SeriesSpec
from .specfun import SpecialFunctionError

CONFIG_ENV = "HEISIDS_CONFIG"
CONFIG_KEYS = {"rel_tol": float, "abs_tol": float, "tol": float, "max_terms": int, "format": str}


class BadParameter(ValueError):
    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


class UnknownCommand(ValueError):
    pass


# --- formatting ----------------------------------------------------------------

def fmt_float(v: float) -> str:
    return format(v, ".17g")


def _plain(v):
    """Make a result value JSON-friendly; complex values stay as {re, im}."""
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(fmt_float(float(v)))
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": _plain(v.real), "im": _plain(v.imag)}
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if hasattr(v, "value") and isinstance(getattr(v, "value"), str):  # enums
        return v.value
    return v


def _flatten(record: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in record.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (complex, np.complexfloating)):
            out[key + "_re"] = v.real
            out[key + "_im"] = v.imag
        else:
            out[key] = v
    return out


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt_float(float(v))
    if v is None:
        return ""
    if hasattr(v, "value") and isinstance(getattr(v, "value"), str):
        return v.value
    return str(v)


def to_csv(results: list[dict]) -> str:
    rows = [_flatten(r) for r in results]
    header: list[str] = []
    for r in rows:
        header += [k for k in r if k not in header]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(r.get(k)) for k in header])
    return buf.getvalue()


def to_table(results: list[dict]) -> str:
    rows = [_flatten(r) for r in results]
    if len(rows) == 1:
        width = max((len(k) for k in rows[0]), default=0)
        return "".join(f"{k.ljust(width)}  {_cell(v)}\n" for k, v in rows[0].items())
    header: list[str] = []
    for r in rows:
        header += [k for k in r if k not in header]
    cells = [header] + [[_cell(r.get(k)) for k in header] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    return "".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() + "\n" for row in cells)


def to_json(command: str, config: dict, results: list[dict], walltime_ms: float) -> str:
    doc = {
        "command": command,
        "config": _plain(config),
        "results": [_plain(r) for r in results],
        "meta": {"version": __version__, "walltime_ms": round(walltime_ms, 3)},
    }
    return json.dumps(doc, indent=2) + "\n"


# --- parameters -------------------------------------------------------------------

def _complex_list(text: str) -> list[complex]:
    try:
        return [complex(t.strip().replace(" ", "")) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of complex numbers: {text!r}") from exc


def _zeta(args) -> complex:
    return complex(args.zeta_re, args.zeta_im)


def _need_resolvent_zeta(args):
    z = _zeta(args)
    if not z.real < 0:
        raise BadParameter("--zeta-re", "resolvent commands need Re zeta < 0")
    return z


def _need_n(args):
    if args.n is None or args.n < 1:
        raise BadParameter("--n", "dimension must be a positive integer")
    return args.n


def _points(args, n: int | None):
    z = args.z if args.z is not None else None
    w = args.w if args.w is not None else None
    if z is None and n is None:
        raise BadParameter("--z", "give the point coordinates or --n")
    if z is None:
        z = [0j] * n
    if w is None:
        w = [0j] * len(z)
    if len(z) != len(w):
        raise BadParameter("--w", "points must have the same dimension")
    if n is not None and len(z) != n:
        raise BadParameter("--n", f"--n {n} does not match point dimension {len(z)}")
    return kernels.ComplexPoint(z), kernels.ComplexPoint(w)


def _reduced(args):
    """(n, rho, theta) from --rho/--theta, or from points --z/--w/--tau/--s."""
    if args.rho is not None:
        n = _need_n(args)
        if args.rho < 0:
            raise BadParameter("--rho", "must be >= 0")
        return n, args.rho, args.theta
    z, w = _points(args, args.n)
    rc = kernels.reduced_coordinates(kernels.HeisenbergPoint(z, args.tau), kernels.HeisenbergPoint(w, args.s))
    return z.n, rc.rho, rc.theta


def _qspec(args) -> QuadratureSpec:
    base = QuadratureSpec()
    return QuadratureSpec(rel_tol=args.rel_tol if args.rel_tol is not None else base.rel_tol,
                          abs_tol=args.abs_tol if args.abs_tol is not None else base.abs_tol)


def _sspec(args, default: SeriesSpec | None = None) -> SeriesSpec:
    base = default or SeriesSpec()
    kw = {}
    if args.tol is not None:
        kw["tol"] = args.tol
    if args.max_terms is not None:
        kw["max_terms"] = args.max_terms
    return SeriesSpec(**{**{"tol": base.tol, "max_terms": base.max_terms,
                            "abel_radii": base.abel_radii,
                            "extrapolation_depth": base.extrapolation_depth}, **kw})


def _eval_record(res, **extra) -> dict:
    return {**extra, "value": res.value, "error_estimate": res.error_estimate,
            "work": int(res.terms_or_nodes_used), "converged": bool(res.converged)}


# --- commands ---------------------------------------------------------------------------
# each returns (results, plot) where plot is None or (x_name, y_name, xs, ys)

def cmd_ids_magnetic(args):
    n = _need_n(args)
    out = []
    for lam in args.lam:
        v = ids.ids_magnetic(lam, n)
        out.append({"n": n, "lambda": lam, "value": v.value, "route": v.route.value})
    xs = np.linspace(0.0, max(max(args.lam), 1.0) + 1.0, 401)
    plot = ("lambda", "ids", xs, [ids.ids_magnetic(x, n).value for x in xs])
    return out, plot


def cmd_ids_sub(args):
    n = _need_n(args)
    spec = _sspec(args)
    out = []
    for lam in args.lam:
        if args.route in ("closed_form", "both"):
            v = ids.ids_sub(lam, n, spec)
            out.append({"n": n, "lambda": lam, "value": v.value, "error_estimate": v.error_estimate,
                        "route": v.route.value})
        if args.route in ("kernel_diagonal", "both"):
            v = ids.ids_sub_via_kernel(lam, n, spec)
            out.append({"n": n, "lambda": lam, "value": v.value, "error_estimate": v.error_estimate,
                        "route": v.route.value})
    g = ids.gamma_coefficient(n, spec).value
    xs = np.linspace(0.0, max(max(args.lam), 1.0), 201)
    return out, ("lambda", "ids", xs, g * xs ** n)


def cmd_gamma(args):
    n = _need_n(args)
    res = ids.gamma_coefficient(n, _sspec(args))
    return [_eval_record(res, n=n)], None


def cmd_dos(args):
    n = _need_n(args)
    if args.lambda_max < 0:
        raise BadParameter("--lambda-max", "must be >= 0")
    jumps = ids.dos_magnetic_jumps(args.lambda_max, n)
    out = [{"n": n, "level": j.level, "weight": j.weight} for j in jumps]
    return out, ("level", "weight", [j.level for j in jumps], [j.weight for j in jumps])


def cmd_kernel_projection(args):
    z, w = _points(args, args.n)
    out = []
    for lam in args.lam:
        v = kernels.projection_kernel_magnetic(lam, z, w)
        out.append({"n": z.n, "lambda": lam, "value": v})
    return out, None


def cmd_kernel_resolvent(args):
    zeta = _zeta(args)
    z, w = _points(args, args.n)
    out = []
    if args.route in ("integral", "both"):
        if not zeta.real < 0:
            raise BadParameter("--zeta-re", "the integral route needs Re zeta < 0")
        v = kernels.resolvent_kernel_magnetic(zeta, z, w, _qspec(args))
        out.append({"n": z.n, "zeta": zeta, "route": "integral", "value": v})
    if args.route in ("series", "both"):
        v = kernels.resolvent_series_magnetic(zeta, z, w, _sspec(args, kernels.ABEL_LAGUERRE_SPEC)
                                              if (args.tol or args.max_terms) else None)
        out.append({"n": z.n, "zeta": zeta, "route": "abel_series", "value": v})
    return out, None


def cmd_kernel_density(args):
    n, rho, theta = _reduced(args)
    spec = _sspec(args, kernels.DENSITY_SERIES_SPEC)
    out = []
    for lam in args.lam:
        res = kernels.density_sub_reduced(lam, n, rho, theta, spec)
        out.append(_eval_record(res, n=n, rho=rho, theta=theta, **{"lambda": lam}))
    plot = None
    if args.emit_plot_data:
        xs = np.linspace(0.0, max(max(args.lam), 1.0), 41)
        plot = ("lambda", "density", xs, [kernels.density_sub_reduced(x, n, rho, theta, spec).value
                                         for x in xs])
    return out, plot


def cmd_kernel_resolvent_sub(args):
    zeta = _need_resolvent_zeta(args)
    n, rho, theta = _reduced(args)
    out = []
    if args.route in ("direct", "both"):
        res = kernels.resolvent_sub_reduced(zeta, n, rho, theta, _qspec(args))
        # the x-integral carries the 2^n prefactor (the variant with 2 misses the closed form)
        out.append(_eval_record(res, n=n, rho=rho, theta=theta, zeta=zeta, route="direct", prefactor="2^n"))
    if args.route in ("spectral", "both"):
        sspec = SeriesSpec(tol=args.tol) if args.tol is not None else None
        res = kernels.resolvent_sub_spectral_reduced(zeta, n, rho, theta, sspec)
        out.append(_eval_record(res, n=n, rho=rho, theta=theta, zeta=zeta, route="spectral"))
    return out, None


def _mu_theta(args):
    if args.mu is not None:
        n = _need_n(args)
        if args.mu <= 0:
            raise BadParameter("--mu", "must be > 0")
        return n, args.mu, args.theta
    n, rho, theta = _reduced(args)
    return n, 2.0 * rho, theta


def cmd_green_closed(args):
    n, mu, theta = _mu_theta(args)
    v = green.green_closed_reduced(n, mu / 2.0, theta)
    return [{"n": n, "mu": mu, "theta": theta, "value": v}], None


def cmd_green_integral(args):
    n, mu, theta = _mu_theta(args)
    res = green.green_integral_reduced(n, mu, theta, _qspec(args))
    closed = green.green_closed_reduced(n, mu / 2.0, theta)
    rec = _eval_record(res, n=n, mu=mu, theta=theta)
    rec["closed_form"] = closed
    rec["rel_residual"] = abs(res.value - closed) / closed
    return [rec], None


def cmd_folland_constant(args):
    n = _need_n(args)
    out = []
    if args.route in ("integral_3_9", "both"):
        c = green.folland_constant(n, _qspec(args))
        out.append({"n": n, "route": c.route.value, "value": c.value, "error_estimate": c.error_estimate})
    if args.route in ("appendix_consistency", "both"):
        c = green.folland_constant_appendix(n)
        out.append({"n": n, "route": c.route.value, "value": c.value, "error_estimate": 0.0})
    return out, None


def cmd_folland_repr(args):
    n = _need_n(args)
    if args.z2 is None or args.z2 <= 0:
        raise BadParameter("--z2", "needs |z|^2 > 0")
    res = green.folland_repr_reduced(n, args.z2, args.tau, _qspec(args))
    norm = (args.z2 ** 2 + args.tau ** 2) ** 0.25
    rec = _eval_record(res, n=n, z2=args.z2, tau=args.tau)
    for route, c in (("integral_3_9", green.folland_constant(n)),
                     ("appendix_consistency", green.folland_constant_appendix(n))):
        sol = c.value * norm ** (-2 * n)
        rec[f"folland_solution[{route}]"] = sol
        rec[f"rel_residual[{route}]"] = abs(res.value - sol) / sol
    return [rec], None


def cmd_verify_appendix(args):
    n = _need_n(args)
    if args.mu is None or args.mu <= 0:
        raise BadParameter("--mu", "must be > 0")
    if not args.theta > 0:
        raise BadParameter("--theta", "the chain needs theta > 0")
    rep = green.verify_chain(n, args.mu, args.theta, _qspec(args))
    out = [{"step": k, "residual": v} for k, v in rep.residuals.items()]
    out.append({"step": "final", "residual": rep.final_residual})
    out += [{"step": f"extra:{k}", "residual": v} for k, v in rep.extras.items()]
    return out, None


def _grid(args, L):
    if args.N is not None:
        return weylsim.GridSpec(L, args.N, args.B)
    return weylsim.GridSpec.with_spacing(L, args.h, args.B)


def _count(H, lam):
    try:
        return weylsim.count_eigenvalues_below(H, lam), 0.0
    except weylsim.SingularShift as exc:
        return weylsim.count_eigenvalues_below(H, exc.retry), 1e-9


def cmd_weyl_count(args):
    g = _grid(args, args.L[0])
    H = weylsim.discretize_magnetic_hamiltonian(g, args.scheme)
    out = []
    for lam in args.lam:
        c, nudge = _count(H, lam)
        out.append({"L": g.L, "N": g.N, "h": g.h, "B": g.B, "lambda": lam, "nudge": nudge, "count": c,
                    "volume": g.volume, "empirical_ids": c / g.volume,
                    "closed_form": weylsim.landau_ids(lam, g.B)})
    plot = ("lambda", "empirical_ids", [r["lambda"] for r in out], [r["empirical_ids"] for r in out])
    return out, plot


def cmd_weyl_study(args):
    if len(args.lam) != 1:
        raise BadParameter("--lambda", "weyl-study takes a single lambda")
    sizes = []
    for L in args.L:
        g = _grid(args, L)
        sizes.append((g.L, g.N))
    rows = weylsim.convergence_study(args.B, args.lam[0], sizes, args.scheme)
    return rows, ("L", "empirical_ids", [r["L"] for r in rows], [r["empirical_ids"] for r in rows])


def cmd_selftest(args):
    from .selftest import run_selftest
    rows = run_selftest(tol=args.tol)
    return rows, None


COMMANDS: dict[str, Callable] = {
    "ids-magnetic": cmd_ids_magnetic,
    "ids-sub": cmd_ids_sub,
    "gamma": cmd_gamma,
    "dos": cmd_dos,
    "kernel-projection": cmd_kernel_projection,
    "kernel-resolvent": cmd_kernel_resolvent,
    "kernel-density": cmd_kernel_density,
    "kernel-resolvent-sub": cmd_kernel_resolvent_sub,
    "green-closed": cmd_green_closed,
    "green-integral": cmd_green_integral,
    "folland-constant": cmd_folland_constant,
    "folland-repr": cmd_folland_repr,
    "verify-appendix": cmd_verify_appendix,
    "weyl-count": cmd_weyl_count,
    "weyl-study": cmd_weyl_study,
    "selftest": cmd_selftest,
}


# --- parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "csv", "json"), default=None)
    common.add_argument("--output", "-o", default=None, help="write records here instead of stdout")
    common.add_argument("--config", default=None, help=f"INI config file (default ${CONFIG_ENV})")
    common.add_argument("--emit-plot-data", default=None, metavar="PATH",
                        help="write an (x, y) CSV series for plotting")
    common.add_argument("--rel-tol", type=float, default=None)
    common.add_argument("--abs-tol", type=float, default=None)
    common.add_argument("--tol", type=float, default=None, help="series tolerance")
    common.add_argument("--max-terms", type=int, default=None)
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="heisids", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", metavar="command")

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    def lam(sp, required=True):
        sp.add_argument("--lambda", dest="lam", type=float, nargs="+", required=required,
                        default=None if required else [1.0])

    def points(sp):
        sp.add_argument("--n", type=int, default=None)
        sp.add_argument("--z", type=_complex_list, default=None, help="e.g. '1+0.5j,0'")
        sp.add_argument("--w", type=_complex_list, default=None)

    def hpoints(sp):
        points(sp)
        sp.add_argument("--tau", type=float, default=0.0)
        sp.add_argument("--s", type=float, default=0.0)
        sp.add_argument("--rho", type=float, default=None, help="|z-w|^2 (skips the points)")
        sp.add_argument("--theta", type=float, default=0.0)

    def zeta(sp):
        sp.add_argument("--zeta-re", type=float, required=True)
        sp.add_argument("--zeta-im", type=float, default=0.0)

    s = add("ids-magnetic", "closed-form magnetic IDS")
    s.add_argument("--n", type=int, required=True)
    lam(s)
    s = add("ids-sub", "sub-Laplacian IDS gamma_n lambda^n")
    s.add_argument("--n", type=int, required=True)
    lam(s)
    s.add_argument("--route", choices=("closed_form", "kernel_diagonal", "both"), default="closed_form")
    s = add("gamma", "the coefficient gamma_n")
    s.add_argument("--n", type=int, required=True)
    s = add("dos", "magnetic DOS jump weights")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--lambda-max", type=float, required=True)
    s = add("kernel-projection", "magnetic spectral projection kernel")
    points(s)
    lam(s)
    s = add("kernel-resolvent", "magnetic resolvent kernel")
    points(s)
    zeta(s)
    s.add_argument("--route", choices=("integral", "series", "both"), default="integral")
    s = add("kernel-density", "sub-Laplacian spectral density kernel")
    hpoints(s)
    lam(s)
    s = add("kernel-resolvent-sub", "sub-Laplacian resolvent kernel")
    hpoints(s)
    zeta(s)
    s.add_argument("--route", choices=("direct", "spectral", "both"), default="direct")
    for name, help_ in (("green-closed", "closed-form Green kernel"),
                        ("green-integral", "Green kernel by quadrature")):
        s = add(name, help_)
        hpoints(s)
        s.add_argument("--mu", type=float, default=None, help="2|z-w|^2 (skips the points)")
    s = add("folland-constant", "the constant c_n")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--route", choices=("integral_3_9", "appendix_consistency", "both"), default="both")
    s = add("folland-repr", "integral representation of the fundamental solution")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--z2", type=float, default=None, help="|z|^2")
    s.add_argument("--tau", type=float, default=0.0)
    s = add("verify-appendix", "step-by-step zeta = 0 chain")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--mu", type=float, required=True)
    s.add_argument("--theta", type=float, required=True)
    for name, help_ in (("weyl-count", "eigenvalue counts of the discretized Hamiltonian"),
                        ("weyl-study", "finite-size convergence table")):
        s = add(name, help_)
        s.add_argument("--B", type=float, default=1.0)
        s.add_argument("--L", type=float, nargs="+", required=True)
        s.add_argument("--N", type=int, default=None)
        s.add_argument("--h", type=float, default=0.1)
        s.add_argument("--scheme", choices=weylsim.SCHEMES, default="peierls")
        lam(s)
    add("selftest", "run the invariant suite at reduced sizes")
    return p


def load_config(path: str | None) -> dict:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise BadParameter("--config", f"cannot read {path}")
    section = cp["heisids"] if cp.has_section("heisids") else cp.defaults()
    out = {}
    for key, typ in CONFIG_KEYS.items():
        if key in section:
            try:
                out[key] = typ(section[key])
            except ValueError as exc:
                raise BadParameter("--config", f"bad value for {key}: {section[key]!r}") from exc
    return out


def _resolved_config(args) -> dict:
    skip = {"output", "emit_plot_data", "config"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _write_plot(path: str, plot):
    xname, yname, xs, ys = plot
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([xname, yname])
        for x, y in zip(xs, ys):
            w.writerow([_cell(float(x)), _cell(float(y))])


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    start = time.perf_counter()
    converged = True
    try:
        cfg = load_config(args.config)
        for key in ("rel_tol", "abs_tol", "tol", "max_terms", "format"):
            if getattr(args, key) is None and key in cfg:
                setattr(args, key, cfg[key])
        if args.format is None:
            args.format = "table"
        results, plot = COMMANDS[args.command](args)
    except NonConvergence as exc:
        converged = False
        res = exc.result
        rec = {"error": str(exc), "converged": False}
        if res is not None:
            rec.update({"value": res.value, "error_estimate": res.error_estimate})
        results, plot = [rec], None
    except (BadParameter, SpecialFunctionError, kernels.DimensionMismatch, kernels.SpectrumPole,
            green.OriginSingularity, weylsim.GridTooSmall, ValueError) as exc:
        print(f"heisids {args.command}: {exc}", file=sys.stderr)
        return 2
    walltime = (time.perf_counter() - start) * 1e3
    fmt = args.format or "table"
    config = _resolved_config(args)
    if fmt == "json":
        text = to_json(args.command, config, results, walltime)
    elif fmt == "csv":
        text = to_csv(results)
    else:
        text = to_table(results)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if args.emit_plot_data and plot is not None:
        _write_plot(args.emit_plot_data, plot)
    if not converged:
        return 3
    if args.command == "selftest" and not all(r["passed"] for r in results):
        return 1
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
