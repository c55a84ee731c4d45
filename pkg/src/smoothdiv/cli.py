"""Command-line interface.

Exit codes: 0 success, 2 unreadable input, 3 solver failure, 4 domain error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import divergences as dv
from .config import FORMATS, RunConfig, load_config
from .conic.quantities import hypothesis_testing
from .errors import DomainError, ParseError, SmoothDivError, SolverFailure
from .figures import (BRACKET_COLUMNS, DEFAULT_EPS_GRID, FIG3_COLUMNS, FIG3_NOTES, bracket_sweep,
                      fig3, fmt, parse_grid, random_pair, to_csv, to_json)
from .operators import BipartiteLabel, load_operator
from .smoothing import smooth_dmax, smooth_hmin

EXIT_OK, EXIT_PARSE, EXIT_SOLVER, EXIT_DOMAIN = 0, 2, 3, 4

DIVERGENCES = ("relative-entropy", "variance", "sandwiched", "petz", "dmax", "dmin", "dminf",
               "hypothesis")

ZERO_SNAP = 1e-12


def _number(x) -> str:
    """Shortest float text after rounding to 12 significant digits.

    Magnitudes below 1e-12 are rounding noise and print as 0.0.
    """
    if abs(x) < ZERO_SNAP:
        x = 0.0
    s = fmt(x)
    return s if s in ("nan", "inf", "-inf") else repr(float(s))


def _emit_record(record: dict, fmt_name: str, out) -> None:
    if fmt_name == "json":
        out.write(json.dumps({k: (v if not isinstance(v, float) or math.isfinite(v) else fmt(v))
                              for k, v in record.items()}) + "\n")
        return
    out.write(",".join(record) + "\n")
    out.write(",".join(_number(v) if isinstance(v, float) else str(v) for v in record.values()) + "\n")


def _config(args) -> RunConfig:
    return load_config(args.config, restarts=args.restarts, seed=args.seed, format=args.format)


def _dims(text: str) -> BipartiteLabel:
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError as exc:
        raise ParseError(f"--dims expects 'dA,dB', got {text!r}", "dims") from exc
    return BipartiteLabel(a, b)


def cmd_divergence(args, out) -> int:
    cfg = _config(args)
    rho = load_operator(args.rho)
    sigma = load_operator(args.sigma)
    kind = args.kind
    if kind == "relative-entropy":
        val = dv.relative_entropy(rho, sigma)
    elif kind == "variance":
        val = dv.relative_entropy_variance(rho, sigma)
    elif kind in ("sandwiched", "petz"):
        if args.alpha is None:
            raise DomainError(f"{kind} needs --alpha")
        f = dv.sandwiched_renyi if kind == "sandwiched" else dv.petz_renyi
        val = f(rho, sigma, args.alpha)
    elif kind == "dmax":
        val = dv.d_max(rho, sigma)
    elif kind == "dmin":
        val = dv.d_min_projector(rho, sigma)
    elif kind == "dminf":
        val = dv.d_min_f(rho, sigma)
    else:
        if args.eps is None:
            raise DomainError("hypothesis needs --eps")
        val = dv.DivergenceValue(hypothesis_testing(rho, sigma, args.eps, cfg.solver).value_bits, True)
    if cfg.format == "json":
        _emit_record({"kind": kind, "bits": float(val.bits),
                      "support_condition_met": val.support_condition_met}, "json", out)
    else:
        out.write(_number(val.bits) + "\n")
        if not val.support_condition_met:
            sys.stderr.write("+inf: support of rho is not contained in support of sigma\n")
    return EXIT_OK


def _pair_from_args(args):
    if args.rho and args.sigma:
        return load_operator(args.rho), load_operator(args.sigma)
    if args.rho or args.sigma:
        raise ParseError("give both operator files or neither", "operators")
    return random_pair(args.dim, args.seed if args.seed is not None else 0)


def _write_table(name, columns, rows, fmt_name, out, notes=()):
    out.write(to_json(name, columns, rows, notes) + "\n" if fmt_name == "json"
              else to_csv(name, columns, rows, notes))


def _grids(args):
    eps = parse_grid(args.eps_grid) if args.eps_grid is not None else list(DEFAULT_EPS_GRID)
    delta = parse_grid(args.delta_grid) if args.delta_grid is not None else None
    return eps, delta


def cmd_bracket(args, out) -> int:
    cfg = _config(args)
    rho, sigma = _pair_from_args(args)
    eps, delta = _grids(args)
    rows = bracket_sweep(rho, sigma, eps, cfg, delta)
    _write_table("bracket", BRACKET_COLUMNS, rows, cfg.format, out)
    return EXIT_OK


def cmd_figure(args, out) -> int:
    cfg = _config(args)
    if args.name == "fig3":
        rows = fig3(args.d, args.p, args.eps if args.eps is not None else 1e-4)
        _write_table("fig3", FIG3_COLUMNS, rows, cfg.format, out, FIG3_NOTES)
        return EXIT_OK
    dim = 2 if args.name == "fig4" else 4
    seed = args.seed if args.seed is not None else {"fig4": 4, "fig5": 5}[args.name]
    rho, sigma = random_pair(dim, seed)
    eps, delta = _grids(args)
    rows = bracket_sweep(rho, sigma, eps, cfg, delta)
    _write_table(args.name, BRACKET_COLUMNS, rows, cfg.format, out)
    return EXIT_OK


def _result_record(res) -> dict:
    return {"value": float(res.value_bits), "primal": float(res.primal_bits),
            "dual": float(res.dual_bits), "gap": float(res.gap), "status": res.status}


def cmd_hmin(args, out) -> int:
    cfg = _config(args)
    rho = load_operator(args.rho)
    res = smooth_hmin(rho, _dims(args.dims), args.eps, cfg.solver)
    _emit_record(_result_record(res), cfg.format, out)
    return EXIT_OK


def cmd_smooth_dmax(args, out) -> int:
    cfg = _config(args)
    res = smooth_dmax(load_operator(args.rho), load_operator(args.sigma), args.eps, args.set, cfg.solver)
    _emit_record(_result_record(res), cfg.format, out)
    return EXIT_OK


def cmd_config(args, out) -> int:
    out.write(_config(args).to_json() + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (else $SMOOTHDIV_CONFIG)")
    common.add_argument("--format", choices=FORMATS, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--restarts", type=int, default=None)

    p = argparse.ArgumentParser(prog="smoothdiv", description="Smoothed quantum divergences in bits.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("divergence", parents=[common], help="closed-form divergences")
    d.add_argument("kind", choices=DIVERGENCES)
    d.add_argument("rho")
    d.add_argument("sigma")
    d.add_argument("--alpha", type=float)
    d.add_argument("--eps", type=float)
    d.set_defaults(func=cmd_divergence)

    b = sub.add_parser("bracket", parents=[common], help="lower/upper bracket sweep")
    b.add_argument("rho", nargs="?")
    b.add_argument("sigma", nargs="?")
    b.add_argument("--eps-grid", help="a:b:k or comma list")
    b.add_argument("--delta-grid", help="a:b:k or comma list; points outside (0, 1-eps) are dropped")
    b.add_argument("--dim", type=int, default=2, help="random pair dimension when no files are given")
    b.set_defaults(func=cmd_bracket)

    f = sub.add_parser("figure", parents=[common], help="figure datasets")
    f.add_argument("name", choices=("fig3", "fig4", "fig5"))
    f.add_argument("--d", type=int, default=2)
    f.add_argument("--p", type=float, default=0.3)
    f.add_argument("--eps", type=float)
    f.add_argument("--eps-grid")
    f.add_argument("--delta-grid")
    f.set_defaults(func=cmd_figure)

    h = sub.add_parser("hmin", parents=[common], help="smooth conditional min-entropy")
    h.add_argument("rho")
    h.add_argument("--dims", required=True, help="dA,dB")
    h.add_argument("--eps", type=float, default=0.0)
    h.set_defaults(func=cmd_hmin)

    m = sub.add_parser("smooth-dmax", parents=[common], help="smooth max-relative entropy")
    m.add_argument("rho")
    m.add_argument("sigma")
    m.add_argument("--eps", type=float, default=0.0)
    m.add_argument("--set", choices=("subnormalized", "normalized"), default="subnormalized")
    m.set_defaults(func=cmd_smooth_dmax)

    c = sub.add_parser("config", parents=[common], help="print the effective configuration")
    c.set_defaults(func=cmd_config)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except ParseError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except SolverFailure as exc:
        sys.stderr.write(f"solver failure: {exc}\n")
        return EXIT_SOLVER
    except DomainError as exc:
        sys.stderr.write(f"domain error: {exc}\n")
        return EXIT_DOMAIN
    except SmoothDivError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
