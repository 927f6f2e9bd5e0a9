"""Batch command line interface.

Exit codes: 0 success, 2 parse or specification error, 3 domain error,
4 rank deficiency or infeasible constraints.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .algebra import gram, kernel_from_dict
from .engine import interpolant_from_dict, problem_from_dict, solve_min_norm
from .errors import (
    CapabilityError,
    DomainError,
    MembershipError,
    ParameterError,
    RankDeficiencyError,
)
from .numerics import JITTER_SCHEDULE, factor_solve
from .schemes import DEFAULT_H_LIST, catalog_function, dirac_convergence_study, reproducing_error

EXIT_OK = 0
EXIT_SPEC = 2
EXIT_DOMAIN = 3
EXIT_RANK = 4


class UsageError(Exception):
    pass


def _fmt(x):
    return repr(float(x))


def _load_json(value, what):
    """Parse ``value`` as inline JSON, or read it as a file path."""
    text = value
    if not value.lstrip().startswith(("{", "[")):
        path = Path(value)
        if not path.is_file():
            raise ParameterError(f"{what}: no such file {value!r}")
        text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParameterError(f"{what}: invalid JSON ({exc})") from None


def parse_grid(text):
    """``a:b:n`` -> ``n`` equally spaced points from ``a`` to ``b``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ParameterError(f"--grid must look like a:b:n, got {text!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ParameterError(f"--grid must look like a:b:n, got {text!r}") from None
    if n < 1:
        raise ParameterError("--grid needs at least one point")
    return np.linspace(a, b, n)


def parse_h_list(text):
    try:
        hs = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--h-list must be comma separated reals, got {text!r}") from None
    if not hs:
        raise UsageError("--h-list must not be empty")
    return hs


def _csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _grid_points(kernel, grid):
    if kernel.ndim == 1:
        return grid, [(x,) for x in grid]
    if kernel.ndim != 2:
        raise ParameterError("grids are available for 1-d and 2-d kernels only")
    pts = np.array([(s, t) for s in grid for t in grid])
    return pts, [tuple(p) for p in pts]


# ---------------------------------------------------------------------------
# commands; each returns the text to emit
# ---------------------------------------------------------------------------

def cmd_kernel_eval(args):
    kernel = kernel_from_dict(_load_json(args.kernel, "--kernel"))
    if kernel.ndim != 1:
        raise ParameterError("kernel-eval supports one-dimensional kernels")
    grid = parse_grid(args.grid)
    values = kernel.eval(grid[:, None], grid[None, :])
    rows = [(s, t, values[i, j]) for i, s in enumerate(grid) for j, t in enumerate(grid)]
    return _csv(["s", "t", "value"], rows)


def cmd_fit(args):
    data = _load_json(args.constraints, "--constraints")
    kernel = kernel_from_dict(_load_json(args.kernel, "--kernel")) if args.kernel else None
    problem = problem_from_dict(data, kernel)
    interp = solve_min_norm(problem)
    out = interp.to_dict()
    out["norm_sq"] = interp.norm_sq()
    return json.dumps(out, indent=2) + "\n"


def cmd_eval(args):
    interp = interpolant_from_dict(_load_json(args.interpolant, "--interpolant"))
    pts, labels = _grid_points(interp.kernel, parse_grid(args.grid))
    values = np.atleast_1d(interp(pts))
    header = ["t", "value"] if interp.kernel.ndim == 1 else ["s", "t", "value"]
    return _csv(header, [(*lab, v) for lab, v in zip(labels, values)])


def cmd_verify_reproduce(args):
    kernel = kernel_from_dict(_load_json(args.kernel, "--kernel"))
    f = catalog_function(args.f)
    grid = parse_grid(args.grid)
    rows = []
    for t in grid:
        err = reproducing_error(kernel, f, t, panels=args.panels)
        rows.append((t, float(f[0](t)), err))
    return _csv(["t", "f", "abs_error"], rows)


def cmd_dirac_study(args):
    f = catalog_function(args.f)
    rows = dirac_convergence_study(f, t=args.t, h_list=sorted(args.h_list, reverse=True),
                                   panels=args.panels)
    return _csv(["h", "t", "approx", "target", "abs_error"],
                [(r.h, r.t, r.approx, r.target, r.abs_error) for r in rows])


def cmd_gram_check(args):
    kernel = kernel_from_dict(_load_json(args.kernel, "--kernel"))
    pts, _ = _grid_points(kernel, parse_grid(args.grid))
    G = gram(kernel, pts)
    report = {
        "n": int(G.shape[0]),
        "symmetry_error": float(np.max(np.abs(G - G.T))),
        "min_eigenvalue": float(np.linalg.eigvalsh(0.5 * (G + G.T)).min()),
    }
    _, jitter, _ = factor_solve(G, np.zeros(G.shape[0]), JITTER_SCHEDULE)
    report["jitter_used"] = jitter
    return json.dumps(report, indent=2) + "\n"


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="rkhs-interp",
        description="Minimum-norm interpolation with reproducing kernels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        p.add_argument("--out", help="output path (default: stdout)")
        return p

    p = add("kernel-eval", cmd_kernel_eval, "tabulate H(s, t) on a grid")
    p.add_argument("--kernel", required=True, help="kernel JSON or file")
    p.add_argument("--grid", required=True, help="a:b:n")

    p = add("fit", cmd_fit, "solve a minimum-norm interpolation problem")
    p.add_argument("--constraints", required=True, help="problem or constraint list JSON/file")
    p.add_argument("--kernel", help="kernel JSON or file (overrides the problem's kernel)")

    p = add("eval", cmd_eval, "evaluate a fitted interpolant on a grid")
    p.add_argument("--interpolant", required=True, help="output of 'fit'")
    p.add_argument("--grid", required=True, help="a:b:n (s-major for 2-d kernels)")

    p = add("verify-reproduce", cmd_verify_reproduce, "check f(t) = <f | H(., t)>")
    p.add_argument("--kernel", required=True)
    p.add_argument("--f", required=True, help="catalog function name")
    p.add_argument("--grid", default="0.1:0.9:9")
    p.add_argument("--panels", type=int, default=2000)

    p = add("dirac-study", cmd_dirac_study, "convergence of int L_h(s, t) f(s) ds to f(t)")
    p.add_argument("--f", required=True, help="one, linear, square or sin")
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--h-list", default=",".join(str(h) for h in DEFAULT_H_LIST))
    p.add_argument("--panels", type=int, default=2000)

    p = add("gram-check", cmd_gram_check, "symmetry, spectrum and factorization of a Gram matrix")
    p.add_argument("--kernel", required=True)
    p.add_argument("--grid", required=True)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "h_list"):
            args.h_list = parse_h_list(args.h_list)
        text = args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except RankDeficiencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RANK
    except (ParameterError, CapabilityError, MembershipError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
