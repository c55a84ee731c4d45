"""Datasets behind the figures: rate curves and bracket sweeps."""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .config import RunConfig
from .errors import EmptyGrid, ParseError
from .operators import random_state
from .randomness import PRODUCT_RELAXATION, asymptotes, isotropic_state, rate_curves
from .smoothing import bracket_dminf, default_delta_grid

CSV_VERSION = "v1"
BRACKET_COLUMNS = ("eps", "lower", "upper", "delta_star", "gap")
FIG3_COLUMNS = ("n", "lower_curve", "upper_curve", "lower_asymptote", "upper_asymptote")
DEFAULT_EPS_GRID = tuple(np.round(np.linspace(0.05, 0.5, 10), 12))


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def to_csv(name: str, columns, rows, notes=()) -> str:
    buf = io.StringIO()
    buf.write(f"# {name} {CSV_VERSION}\n")
    for note in notes:
        buf.write(f"# {note}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def to_json(name: str, columns, rows, notes=()) -> str:
    def clean(v):
        v = float(v)
        return v if math.isfinite(v) else fmt(v)

    data = {"dataset": name, "version": CSV_VERSION, "notes": list(notes),
            "rows": [{c: clean(r[c]) for c in columns} for r in rows]}
    return json.dumps(data, indent=1)


def parse_grid(text: str) -> list[float]:
    """'a:b:k' gives k evenly spaced points from a to b; otherwise a comma list."""
    text = text.strip()
    try:
        if ":" in text:
            a, b, k = text.split(":")
            return [float(v) for v in np.linspace(float(a), float(b), int(k))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ParseError(f"cannot parse grid {text!r}", "grid") from exc


def bracket_sweep(rho, sigma, eps_list, config: RunConfig | None = None, delta_grid=None) -> list[dict]:
    """One bracket per epsilon, in input order.

    An explicit ``delta_grid`` is shared by all epsilons, keeping only the
    points inside (0, 1 - eps); by default each epsilon gets its own grid.

    Each seesaw also starts from the witness found at the nearest smaller
    epsilon already solved, which keeps the lower curve monotone.
    """
    config = config or RunConfig()
    if len(eps_list) == 0:
        raise EmptyGrid("epsilon grid is empty")
    rows, witnesses = [], {}
    for eps in eps_list:
        eps = float(eps)
        smaller = [e for e in witnesses if e <= eps]
        warm = witnesses[max(smaller)] if smaller else None
        grid = None
        if eps > 0:
            if delta_grid is None:
                grid = default_delta_grid(eps, config.delta_points)
            else:
                grid = [d for d in delta_grid if 0 < d < 1 - eps]
        b = bracket_dminf(rho, sigma, eps, config.seesaw, grid, config.solver, warm)
        if b.lower is not None:
            witnesses[eps] = b.lower.witness_state.matrix
        rows.append({"eps": eps, "lower": b.lower_bits, "upper": b.upper_bits,
                     "delta_star": b.delta_star, "gap": b.upper_bits - b.lower_bits})
    return rows


def random_pair(dim: int, seed: int):
    rng = np.random.default_rng(seed)
    return random_state(dim, rng), random_state(dim, rng)


def fig_bracket(dim: int, seed: int, eps_list=DEFAULT_EPS_GRID, config: RunConfig | None = None):
    rho, sigma = random_pair(dim, seed)
    return bracket_sweep(rho, sigma, eps_list, config)


def default_n_list(points: int = 41) -> list[int]:
    return sorted({int(round(v)) for v in np.logspace(2, 6, points)})


def fig3(d: int = 2, p: float = 0.3, eps: float = 1e-4, n_list=None) -> list[dict]:
    rho, label = isotropic_state(d, p)
    n_list = default_n_list() if n_list is None else n_list
    lo_line, up_line = asymptotes(rho, label)
    return [{"n": b.n, "lower_curve": b.lower_bits_per_copy, "upper_curve": b.upper_bits_per_copy,
             "lower_asymptote": lo_line, "upper_asymptote": up_line}
            for b in rate_curves(rho, eps, n_list, label)]


FIG3_NOTES = (f"upper curve and asymptote use the {PRODUCT_RELAXATION}",)
