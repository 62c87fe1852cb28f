"""Command-line front end.

Exit codes: 0 success, 2 usage error or unknown subcommand, 3 malformed
operator config, 4 order/degree cap exceeded, 5 any other failed
precondition.  Diagnostics are a single line on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import shlex
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import bound_coefficients, extrapolate_radius, fer_bound
from .csvio import series_table, write_csv
from .experiments import dyson_check, so3_trace_experiment, su2_sweep
from .fer import fer_terms, modified_fer_residual, modified_fer_terms
from .linalg import CapExceededError
from .operators import ConfigError, Grid, GridSeries, load_operator
from .permsym import commutators_to_json, to_commutator_basis, wilcox_weights
from .wilcox import wilcox_generators
from .zassenhaus import bellman_c1_series, zassenhaus_terms

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_CAP = 4
EXIT_PRECONDITION = 5


@contextmanager
def _open_out(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _emit_json(doc, path):
    with _open_out(path) as fh:
        json.dump(doc, fh)
        fh.write("\n")


def _meta(argv, **extra):
    meta = {"command": "expfact " + shlex.join(argv), "version": __version__}
    meta.update(extra)
    return meta


def _grid_meta(grid: Grid) -> str:
    return f"[{grid.t0!r}, {grid.t1!r}] nodes={grid.n_nodes}"


def _grid(args) -> Grid:
    return Grid(args.t0, args.t1, args.nodes)


# ---------------------------------------------------------------------------


def cmd_wilcox_weights(args, argv):
    w = wilcox_weights(args.n)
    doc = {"permutation": w.to_json()}
    if args.n >= 2:
        doc["commutator"] = commutators_to_json(to_commutator_basis(w, args.fixed_last), args.n,
                                                args.fixed_last)
    _emit_json(doc, args.output)


def cmd_zassenhaus(args, argv):
    ws = zassenhaus_terms(args.n)
    _emit_json({"W": [dict(order=n, **w.to_json()) for n, w in enumerate(ws, start=1)]}, args.output)


def cmd_bellman_c1(args, argv):
    _emit_json({"K": args.k, **bellman_c1_series(args.k).to_json()}, args.output)


def _emit_series(named, args, argv, grid, **extra):
    header, table = series_table(named)
    with _open_out(args.output) as fh:
        write_csv(fh, header, table, _meta(argv, operator=args.op, grid=_grid_meta(grid), **extra))


def cmd_wilcox_numeric(args, argv):
    op = load_operator(args.op)
    grid = _grid(args)
    ws, _ = wilcox_generators(op, grid, args.n)
    _emit_series([(f"W{k}", GridSeries(grid, w)) for k, w in enumerate(ws, start=1)], args, argv, grid)


def cmd_fer_numeric(args, argv):
    op = load_operator(args.op)
    grid = _grid(args)
    omegas, bs = fer_terms(op, grid, args.n, tol=args.tol, kmax=args.kmax)
    named = [(f"Omega{k}", o) for k, o in enumerate(omegas, start=1)]
    _emit_series(named, args, argv, grid, tol=args.tol, kmax=args.kmax)


def cmd_modified_fer(args, argv):
    op = load_operator(args.op)
    grid = _grid(args)
    omegas = modified_fer_terms(op, grid, complete=args.complete)
    named = [(f"Omega{k}", o) for k, o in enumerate(omegas, start=1)]
    if args.residual:
        named.append(("B2", modified_fer_residual(op, grid)))
    _emit_series(named, args, argv, grid, complete=args.complete)


def cmd_convergence_bound(args, argv):
    table = bound_coefficients(args.n)
    d_inf, xi = extrapolate_radius(table.d_values, args.tail)
    n = np.arange(1, args.n + 1)
    rows = ([k, table.log_c[k], table.D[k] if k >= 3 else ""] for k in n)
    meta = _meta(argv, tail_fraction=args.tail, D_inf=d_inf, xi_W=xi, fer_bound=fer_bound())
    with _open_out(args.output) as fh:
        write_csv(fh, ["n", "c_n_log", "D_n"], rows, meta)
    if args.output not in (None, "-"):
        print(f"D_inf = {d_inf:.17g}")
        print(f"xi_W = {xi:.17g}")


def _emit_sweep(sweep, args, argv, extra):
    meta = _meta(argv, oracle=sweep.oracle, **sweep.metadata, **extra)
    with _open_out(args.output) as fh:
        write_csv(fh, sweep.header, sweep.rows(), meta)
    if args.gnuplot:
        Path(args.gnuplot).write_text(gnuplot_stub(sweep, args.output or "sweep.csv"))


def gnuplot_stub(sweep, csv_path: str) -> str:
    """A minimal log-scale plot script for an ErrorSweep CSV."""
    err_cols = [i + 2 for i, name in enumerate(sweep.columns) if name.startswith("err")]
    plots = ", \\\n     ".join(
        f"'{csv_path}' using 1:{c} with lines title columnheader({c})" for c in err_cols)
    return (
        "set datafile separator ','\n"
        "set datafile commentschars '#'\n"
        "set key autotitle columnhead\n"
        "set logscale y\n"
        f"set xlabel '{sweep.parameter}'\n"
        "set ylabel 'absolute error'\n"
        f"plot {plots}\n"
    )


def cmd_su2_sweep(args, argv):
    eps = np.geomspace(args.eps_min, args.eps_max, args.points)
    sweep = su2_sweep(args.a, eps, max_order=args.max_order, n_nodes=args.nodes)
    _emit_sweep(sweep, args, argv, {"grid": _grid_meta(Grid(0.0, 1.0, args.nodes))})


def cmd_so3_sweep(args, argv):
    theta = np.linspace(args.theta_min, args.theta_max, args.points)
    sweep = so3_trace_experiment(args.alpha, theta, max_order=args.max_order, n_nodes=args.nodes)
    _emit_sweep(sweep, args, argv, {"grid": _grid_meta(Grid(0.0, 1.0, args.nodes))})


def cmd_dyson_check(args, argv):
    op = load_operator(args.op)
    grid = _grid(args)
    sweep = dyson_check(op, grid, args.k)
    _emit_sweep(sweep, args, argv, {"operator": args.op, "grid": _grid_meta(grid)})


# ---------------------------------------------------------------------------


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _add_grid(p, nodes=20001):
    p.add_argument("--op", required=True, help="su2(a), so3(alpha,theta) or a JSON config path")
    p.add_argument("--nodes", type=int, default=nodes)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=1.0)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {' '.join(message.split())}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="expfact", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("-o", "--output", default=None, help="output file (default stdout)")
        return p

    p = add("wilcox-weights", cmd_wilcox_weights, "exact W_n over permutation words")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--format", choices=["json"], default="json")
    p.add_argument("--fixed-last", type=int, default=1)

    p = add("zassenhaus", cmd_zassenhaus, "continuous Zassenhaus terms W_1..W_N")
    p.add_argument("--n", type=_positive_int, required=True)

    p = add("bellman-c1", cmd_bellman_c1, "first Bellman exponent as a truncated series")
    p.add_argument("--k", type=int, required=True)

    p = add("wilcox-numeric", cmd_wilcox_numeric, "W_1..W_N on a grid")
    p.add_argument("--n", type=_positive_int, required=True)
    _add_grid(p)

    p = add("fer-numeric", cmd_fer_numeric, "Fer exponents Omega_1..Omega_n on a grid")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--tol", type=float, default=1e-14)
    p.add_argument("--kmax", type=int, default=40)
    _add_grid(p)

    p = add("modified-fer", cmd_modified_fer, "modified Fer exponents Omega_1..Omega_3")
    p.add_argument("--residual", action="store_true", help="also emit the residual generator B_2")
    p.add_argument("--complete", action="store_true",
                   help="include the B_1 - B_1^[2] remainder in Omega_3")
    _add_grid(p)

    p = add("convergence-bound", cmd_convergence_bound, "bound coefficients and radius estimate")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--tail", type=float, default=0.5)

    p = add("su2-sweep", cmd_su2_sweep, "SU(2) Bellman |U12|^2 error sweep over eps")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--eps-min", type=float, default=0.01)
    p.add_argument("--eps-max", type=float, default=1.2)
    p.add_argument("--points", type=_positive_int, default=60)
    p.add_argument("--max-order", type=_positive_int, default=11)
    p.add_argument("--nodes", type=int, default=20001)
    p.add_argument("--gnuplot", default=None, help="also write a gnuplot script here")

    p = add("so3-sweep", cmd_so3_sweep, "SO(3) trace error sweep over theta")
    p.add_argument("--alpha", type=float, default=math.pi)
    p.add_argument("--theta-min", type=float, default=0.0)
    p.add_argument("--theta-max", type=float, default=math.pi / 2)
    p.add_argument("--points", type=_positive_int, default=181)
    p.add_argument("--max-order", type=_positive_int, default=5)
    p.add_argument("--nodes", type=int, default=20001)
    p.add_argument("--gnuplot", default=None, help="also write a gnuplot script here")

    p = add("dyson-check", cmd_dyson_check, "Dyson terms vs their reconstruction from W_k")
    p.add_argument("--k", type=_positive_int, default=4)
    p.add_argument("--gnuplot", default=None, help="also write a gnuplot script here")
    _add_grid(p, nodes=2001)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        args.func(args, argv)
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except ConfigError as exc:
        return _fail(f"malformed config: {exc}", EXIT_CONFIG)
    except CapExceededError as exc:
        return _fail(str(exc), EXIT_CAP)
    except (ValueError, IndexError, OSError) as exc:
        return _fail(str(exc), EXIT_PRECONDITION)
    return EXIT_OK


def _fail(msg: str, code: int) -> int:
    print(f"expfact: error: {' '.join(str(msg).split())}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
