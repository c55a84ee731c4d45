"""Optimization-defined smoothed quantities.

* smooth max-relative entropy, over subnormalized or normalized states
* smooth conditional min-entropy
* a seesaw lower bound and a delta-swept upper bound on the fidelity-based
  smooth min-relative entropy, combined into a :class:`Bracket`

The smooth min-relative entropy is -2 log2 a*, where a* is the optimum of the
bilinear program

    a* = 1/2 inf  Tr[Y rt] + Tr[Z sigma]
         s.t.  [[Y, I], [I, Z]] >= 0,  [[rt, X], [X^H, rho]] >= 0,
               Re Tr X >= sqrt(1 - eps),  Tr rt <= 1.

Every feasible point gives a value >= a*, so each seesaw iterate yields a
certified lower bound on the entropy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import f_eps_delta
from .conic import Program, SolverOptions, bmat, kron, partial_trace, solve
from .conic.backends import PROPOSAL_BACKEND
from .conic.solve import refine_pair, relative_gap
from .divergences import d_max, d_min_f
from .errors import (
    AllRestartsFailed,
    DomainError,
    EmptyGrid,
    InfeasibleSmoothing,
    SolverFailure,
)
from .operators import (
    CLIP,
    BipartiteLabel,
    DensityOperator,
    as_matrix,
    fidelity,
    herm,
    random_pure_state,
)

FIDELITY_SLACK = 1e-6
TRACE_SLACK = 1e-8


def _check_eps(eps, lo_open=False):
    ok = (0.0 < eps < 1.0) if lo_open else (0.0 <= eps < 1.0)
    if not ok:
        raise DomainError(f"epsilon must lie in {'(0' if lo_open else '[0'}, 1), got {eps}")


def _inputs(rho, sigma):
    r = DensityOperator(as_matrix(rho)).matrix
    s = herm(sigma)
    if s.shape != r.shape:
        raise DomainError(f"shapes {r.shape} and {s.shape} differ")
    if np.linalg.eigvalsh(s)[0] < -1e-8:
        raise DomainError("sigma is not positive semidefinite")
    return np.array(r), s


def _psd_part(m) -> np.ndarray:
    w, v = np.linalg.eigh(herm(m))
    return (v * np.clip(w, 0.0, None)) @ v.conj().T


@dataclass(frozen=True)
class SmoothingResult:
    value_bits: float
    witness_state: DensityOperator | None
    aux_witnesses: dict = field(default_factory=dict)
    status: str = "optimal"
    gap: float = 0.0
    primal_bits: float = math.nan
    dual_bits: float = math.nan


def _witness(m) -> DensityOperator:
    w = _psd_part(m)
    tr = float(np.trace(w).real)
    if tr > 1.0:
        w = w / tr
    return DensityOperator(w, "subnormalized")


def check_witness(rt, rho, eps) -> None:
    """Independent feasibility check of a smoothing witness."""
    f = fidelity(rt, rho)
    tr = float(np.trace(as_matrix(rt)).real)
    if f < 1.0 - eps - FIDELITY_SLACK or tr > 1.0 + TRACE_SLACK:
        raise InfeasibleSmoothing(f"witness has F={f:.9g} (need {1 - eps:.9g}) and trace {tr:.9g}")


# -- smooth max-relative entropy -----------------------------------------------


def _log2_pos(x):
    return math.log2(x) if x > 0 else -math.inf


def smooth_dmax(rho, sigma, eps: float, smoothing_set: str = "subnormalized",
                opts: SolverOptions | None = None, dual: bool = True) -> SmoothingResult:
    """log2 of min { lam : rt <= lam sigma, F(rt, rho) >= 1 - eps } over the smoothing set.

    With ``dual=False`` only the primal is solved; its value is still an
    upper bound, but gap and dual_bits come back as nan.
    """
    _check_eps(eps)
    if smoothing_set not in ("subnormalized", "normalized"):
        raise DomainError(f"unknown smoothing set {smoothing_set!r}")
    r, s = _inputs(rho, sigma)
    n = r.shape[0]
    # work with sigma of unit trace so lam is O(1); undo at the end
    ts = float(np.trace(s).real)
    if ts <= 0:
        raise DomainError("sigma must be nonzero")
    s1 = s / ts
    if eps == 0:
        return _dmax_unsmoothed(r, s1, ts, opts)
    c = math.sqrt(1.0 - eps)
    normalized = smoothing_set == "normalized"

    # Both programs are posed on supp(sigma), where rt must live, and in the
    # eigenbasis of sigma with rt whitened: Y = s^-1/2 rt s^-1/2 and the dual
    # W = s^1/2 W_orig s^1/2.  This is the same pair of programs but keeps
    # every block O(1) when sigma is close to singular; the original scaling
    # stalls interior-point solvers about 1e-6 short of optimal.
    w_s, v_s = np.linalg.eigh(s1)
    keep = w_s > CLIP * w_s[-1]
    basis, evals = v_s[:, keep], w_s[keep]
    k = len(evals)
    rc = herm(basis.conj().T @ r @ basis)
    root, sig, eye = np.diag(np.sqrt(evals)), np.diag(evals), np.eye(k)

    p = Program(f"smooth_dmax_{smoothing_set}")
    lam = p.scalar("lam")
    y = p.hermitian("Y", k)
    x = p.matrix("X", k, k)
    p.psd(kron(eye, lam) - y, "Y<=lam")
    p.psd(bmat([[rc, x], [x.H, y]]), "fidelity")
    xs = x @ root
    p.ge((xs.trace() + xs.H.trace()) / 2, c, "ReTrX")
    if normalized:
        p.eq((y @ sig).trace(), 1.0, "trace")
    else:
        p.le((y @ sig).trace(), 1.0, "trace")
    p.minimize(lam)
    sp_ = solve(p, opts)
    if sp_.status == "infeasible":
        raise InfeasibleSmoothing("smoothing program reported infeasible")
    sp_.require("smooth D_max primal")
    shift = -math.log2(ts)
    primal_bits = _log2_pos(sp_.primal_value) + shift
    lift = basis @ root
    witness = _witness(lift @ sp_.witnesses["Y"] @ lift.conj().T)
    if not dual:
        return SmoothingResult(primal_bits, witness, {"lam": sp_.primal_value / ts}, "optimal",
                               math.nan, primal_bits, math.nan)

    d = Program(f"smooth_dmax_{smoothing_set}_dual")
    w = d.hermitian("W", k)
    z = d.hermitian("Z", k)
    nu = d.scalar("nu")
    mu = d.scalar("mu")
    d.psd(w, "W>=0")
    d.ge(nu, 0.0, "nu>=0")
    if not normalized:
        d.ge(mu, 0.0, "mu>=0")
    d.le(w.trace(), 1.0, "TrW")
    d.psd(bmat([[z, nu * root], [nu * root, w + mu * sig]]), "block")
    d.maximize(-mu + 2 * c * nu - (z @ rc).trace())
    sd = solve(d, opts).require("smooth D_max dual")
    sp_, sd = refine_pair(p, d, sp_, sd, opts)

    dual_bits = _log2_pos(sd.primal_value) + shift
    unwhite = basis / np.sqrt(evals)
    return SmoothingResult(
        primal_bits, witness,
        {"lam": sp_.primal_value / ts,
         "W": unwhite @ sd.witnesses["W"] @ unwhite.conj().T / ts,
         "Z": basis @ sd.witnesses["Z"] @ basis.conj().T,
         "nu": float(sd.witnesses["nu"].real[0, 0]),
         "mu": float(sd.witnesses["mu"].real[0, 0])},
        "optimal", relative_gap(sp_.primal_value, sd.primal_value), primal_bits, dual_bits,
    )


def _dmax_unsmoothed(r, s1, ts, opts):
    """eps = 0: the smoothing ball is {rho}; Slater fails for the general form."""
    n = r.shape[0]
    p = Program("dmax")
    lam = p.scalar("lam")
    p.psd(kron(s1, lam) - r, "rho<=lam*sigma")
    p.minimize(lam)
    sp_ = solve(p, opts)
    if sp_.status == "infeasible":
        raise InfeasibleSmoothing("rho is not dominated by any multiple of sigma")
    sp_.require("D_max primal")
    d = Program("dmax_dual")
    w = d.hermitian("W", n)
    d.psd(w, "W>=0")
    d.le((w @ s1).trace(), 1.0, "TrWsigma")
    d.maximize((w @ r).trace())
    sd = solve(d, opts).require("D_max dual")
    sp_, sd = refine_pair(p, d, sp_, sd, opts)
    shift = -math.log2(ts)
    pb = _log2_pos(sp_.primal_value) + shift
    db = _log2_pos(sd.primal_value) + shift
    return SmoothingResult(pb, DensityOperator(r, "subnormalized"),
                           {"lam": sp_.primal_value / ts, "W": sd.witnesses["W"]},
                           "optimal", relative_gap(sp_.primal_value, sd.primal_value), pb, db)


def _hmin_unsmoothed(r, da, db, opts):
    p = Program("hmin")
    s_b = p.hermitian("S_B", db)
    p.psd(kron(np.eye(da), s_b) - r, "rho<=I(x)S")
    p.minimize(s_b.trace())
    sp_ = solve(p, opts).require("H_min primal")
    d = Program("hmin_dual")
    w = d.hermitian("W", da * db)
    d.psd(w, "W>=0")
    d.psd(np.eye(db) - partial_trace(w, da, db, "B"), "TrA W<=I")
    d.maximize((w @ r).trace())
    sd = solve(d, opts).require("H_min dual")
    sp_, sd = refine_pair(p, d, sp_, sd, opts)
    pb = -_log2_pos(sp_.primal_value)
    dbits = -_log2_pos(sd.primal_value)
    return SmoothingResult(pb, DensityOperator(r, "subnormalized"),
                           {"S_B": sp_.witnesses["S_B"], "W": sd.witnesses["W"]},
                           "optimal", relative_gap(sp_.primal_value, sd.primal_value), pb, dbits)


# -- smooth conditional min-entropy ---------------------------------------------


def smooth_hmin(rho_ab, label: BipartiteLabel, eps: float,
                opts: SolverOptions | None = None) -> SmoothingResult:
    """H^eps_min(A|B); the fidelity radius inside the program is 1 - eps^2."""
    _check_eps(eps)
    r = DensityOperator(as_matrix(rho_ab)).matrix
    label.check(r)
    da, db = label.dim_a, label.dim_b
    n = da * db
    if eps == 0:
        return _hmin_unsmoothed(r, da, db, opts)
    c = math.sqrt(1.0 - eps * eps)

    p = Program("smooth_hmin")
    s_b = p.hermitian("S_B", db)
    rt = p.hermitian("rt", n)
    x = p.matrix("X", n, n)
    p.psd(kron(np.eye(da), s_b) - rt, "rt<=I(x)S")
    p.psd(bmat([[r, x], [x.H, rt]]), "fidelity")
    p.ge((x.trace() + x.H.trace()) / 2, c, "ReTrX")
    p.le(rt.trace(), 1.0, "trace")
    p.minimize(s_b.trace())
    sp_ = solve(p, opts).require("smooth H_min primal")

    d = Program("smooth_hmin_dual")
    w = d.hermitian("W", n)
    z = d.hermitian("Z", n)
    nu = d.scalar("nu")
    mu = d.scalar("mu")
    eye = np.eye(n)
    d.psd(w, "W>=0")
    d.ge(nu, 0.0, "nu>=0")
    d.ge(mu, 0.0, "mu>=0")
    d.psd(np.eye(db) - partial_trace(w, da, db, "B"), "TrA W<=I")
    d.psd(bmat([[z, kron(eye, nu)], [kron(eye, nu), w + kron(eye, mu)]]), "block")
    d.maximize(-mu + 2 * c * nu - (z @ r).trace())
    sd = solve(d, opts).require("smooth H_min dual")
    sp_, sd = refine_pair(p, d, sp_, sd, opts)

    primal_bits = -_log2_pos(sp_.primal_value)
    dual_bits = -_log2_pos(sd.primal_value)
    return SmoothingResult(
        primal_bits, _witness(sp_.witnesses["rt"]),
        {"S_B": sp_.witnesses["S_B"], "X": sp_.witnesses["X"], "W": sd.witnesses["W"]},
        "optimal", relative_gap(sp_.primal_value, sd.primal_value), primal_bits, dual_bits,
    )


# -- seesaw lower bound ---------------------------------------------------------


@dataclass(frozen=True)
class SeesawOptions:
    restarts: int = 8
    max_iters: int = 50
    tol: float = 1e-7
    seed: int = 0


@dataclass
class SeesawTrace:
    restart_id: int
    iterates: list = field(default_factory=list)  # a_k after each half-step
    converged: bool = False
    failed: bool = False
    best_value_bits: float = -math.inf
    message: str = ""


def repair_yz(y, z):
    """Smallest shifts making [[Y, I], [I, Z]] >= 0 hold exactly."""
    y = herm(y)
    w = np.linalg.eigvalsh(y)
    if w[0] < 1e-12:
        y = y + (1e-12 - w[0]) * np.eye(y.shape[0])
    z = herm(z)
    kappa = float(np.linalg.eigvalsh(np.linalg.inv(y) - z)[-1])
    if kappa > 0:
        z = z + kappa * np.eye(z.shape[0])
    return y, z


def repair_state(rt, rho, eps):
    """Exactly feasible smoothing candidate close to ``rt``.

    Clips to PSD and caps the trace at 1.  A missed fidelity constraint is
    fixed by scaling up (F is linear in scale) as far as the trace allows,
    then by mixing with rho (the root fidelity is concave in its argument).
    """
    m = _psd_part(rt)
    tr = float(np.trace(m).real)
    if tr > 1.0:
        m = m / tr
        tr = 1.0
    f = fidelity(m, rho)
    if f < 1.0 - eps and f > 0:
        c = min((1.0 - eps) / f, 1.0 / tr) if tr > 0 else 1.0
        m = m * c
        f = f * c
    target = math.sqrt(1.0 - eps)
    f0 = math.sqrt(max(f, 0.0))
    if f0 < target:
        t = min(1.0, (target - f0) / (1.0 - f0) * (1 + 1e-9) + 1e-15)
        m = (1 - t) * m + t * np.asarray(rho)
    return herm(m)


def _usable(sol) -> bool:
    return sol.status == "optimal" or (sol.status == "inaccurate" and bool(sol.witnesses))


def _block_solution(program, opts, what):
    # A block solve only proposes a point; the point is repaired and its
    # objective evaluated exactly, so a reduced-accuracy solution is usable
    # and the slower fallback is needed only when no point comes back.
    sol = solve(program, opts, PROPOSAL_BACKEND)
    if not _usable(sol):
        sol = solve(program, opts)
    if _usable(sol):
        return sol
    raise SolverFailure(f"{what}: solver status {sol.status} ({sol.solver_status})", sol.status)


def _objective(y, z, rt, sigma) -> float:
    return 0.5 * float(np.real(np.trace(y @ rt) + np.trace(z @ sigma)))


def _step_fix_state(rt, sigma, opts):
    """Minimize over (Y, Z) with rt fixed; the optimum is sqrt F(rt, sigma)."""
    n = rt.shape[0]
    p = Program("seesaw_fix_state")
    y = p.hermitian("Y", n)
    z = p.hermitian("Z", n)
    eye = np.eye(n)
    p.psd(bmat([[y, eye], [eye, z]]), "YZ")
    p.minimize(((y @ rt).trace() + (z @ sigma).trace()) / 2)
    sol = _block_solution(p, opts, "seesaw (Y, Z) block")
    return repair_yz(sol.witnesses["Y"], sol.witnesses["Z"])


def _step_fix_y(y, rho, sigma, eps, opts):
    """Minimize over (rt, X, Z) with Y fixed."""
    n = rho.shape[0]
    p = Program("seesaw_fix_y")
    rt = p.hermitian("rt", n)
    x = p.matrix("X", n, n)
    z = p.hermitian("Z", n)
    eye = np.eye(n)
    p.psd(bmat([[y, eye], [eye, z]]), "YZ")
    p.psd(bmat([[rt, x], [x.H, rho]]), "fidelity")
    p.ge((x.trace() + x.H.trace()) / 2, math.sqrt(1.0 - eps), "ReTrX")
    p.le(rt.trace(), 1.0, "trace")
    p.minimize(((y @ rt).trace() + (z @ sigma).trace()) / 2)
    sol = _block_solution(p, opts, "seesaw (rt, X, Z) block")
    rt_new = repair_state(sol.witnesses["rt"], rho, eps)
    _, z_new = repair_yz(y, sol.witnesses["Z"])
    return rt_new, z_new


def relaxation_state(rho, sigma, eps, opts: SolverOptions | None = None):
    """Solution of min Tr[P sigma] s.t. Tr[P rho] >= 1 - eps, Tr P <= 1, P >= 0.

    Generically rank one.  It is feasible for the smoothing set because
    F(P, rho) >= Tr[P rho] (the squared trace norm dominates the squared
    Hilbert-Schmidt norm).  Returns None if the program has no usable solution.
    """
    n = rho.shape[0]
    p = Program("pure_relaxation")
    pm = p.hermitian("P", n)
    p.psd(pm, "P>=0")
    p.ge((pm @ rho).trace(), 1.0 - eps, "overlap")
    p.le(pm.trace(), 1.0, "trace")
    p.minimize((pm @ sigma).trace())
    sol = solve(p, opts)
    if not sol.witnesses:
        return None
    return repair_state(sol.witnesses["P"], rho, eps)


def initial_state(rho, eps, restart_id: int, rng: np.random.Generator, sigma=None, opts=None):
    """Starting point of one restart.

    Restart 0 is rho itself.  Restart 1 (when sigma is given) is the
    pure-state relaxation optimum.  Later restarts mix rho with a random
    pure state and rescale so that F(rt, rho) = 1 - eps.
    """
    rho = np.asarray(rho)
    if restart_id == 0 or eps == 0:
        return rho.copy()
    if restart_id == 1 and sigma is not None:
        start = relaxation_state(rho, sigma, eps, opts)
        if start is not None:
            return start
    n = rho.shape[0]
    psi = random_pure_state(n, rng)
    t = rng.uniform(0.0, 1.0)
    for _ in range(60):
        mix = (1 - t) * rho + t * psi
        f = fidelity(mix, rho)
        if f >= 1.0 - eps:
            return herm(mix * ((1.0 - eps) / f))
        t /= 2
    return rho.copy()


def alternate(rho, sigma, eps, start, opts: SolverOptions | None, max_iters: int, tol: float,
              trace: SeesawTrace):
    """Run the two block solves from ``start``; fills ``trace``; returns (best a, best rt).

    The first recorded value is sqrt F(start, sigma), the exact optimum of
    the (Y, Z) block at the starting point.  After that one value is
    recorded per half-step; an update that does not improve is rejected,
    so the recorded sequence is nonincreasing.
    """
    rt = start
    best_a = math.sqrt(fidelity(rt, sigma))
    best_rt = rt
    trace.iterates.append(best_a)
    prev_full = best_a
    try:
        for _ in range(max_iters):
            y, z = _step_fix_state(rt, sigma, opts)
            # the block optimum is sqrt F(rt, sigma); the returned pair can
            # only be worse, and is when rt is close to rank deficient
            a1 = min(_objective(y, z, rt, sigma), math.sqrt(fidelity(rt, sigma)))
            a1 = min(a1, trace.iterates[-1])
            trace.iterates.append(a1)

            rt_new, z_new = _step_fix_y(y, rho, sigma, eps, opts)
            a2 = _objective(y, z_new, rt_new, sigma)
            if a2 <= a1:
                rt = rt_new
                a_new = math.sqrt(fidelity(rt_new, sigma))  # never above a2
                if a_new < best_a:
                    best_a, best_rt = a_new, rt_new
            else:
                a2 = a1
            trace.iterates.append(a2)

            if abs(prev_full - a2) <= tol:
                trace.converged = True
                break
            prev_full = a2
    except SolverFailure as exc:
        trace.failed = True
        trace.message = str(exc)
    best_a = min(best_a, min(trace.iterates))
    trace.best_value_bits = -2.0 * math.log2(best_a) if best_a > 0 else math.inf
    return best_a, best_rt


def seesaw_dminf_lower(rho, sigma, eps: float, restarts: int = 8, max_iters: int = 50,
                       tol: float = 1e-7, seed: int = 0, opts: SolverOptions | None = None,
                       warm_start=None):
    """Certified lower bound on the smooth F-min-relative entropy.

    ``warm_start`` (e.g. the witness at a smaller epsilon, which stays
    feasible as epsilon grows) adds one extra restart with the next id.
    Returns ``(SmoothingResult, [SeesawTrace, ...])``.
    """
    _check_eps(eps)
    if restarts < 1:
        raise DomainError("restarts must be >= 1")
    r, s = _inputs(rho, sigma)
    rng = np.random.default_rng(seed)
    traces = []
    best = (math.inf, None, -1)
    starts = [(k, None) for k in range(restarts)]
    if warm_start is not None:
        starts.append((restarts, repair_state(as_matrix(warm_start), r, eps)))
    for k, start in starts:
        if start is None:
            start = initial_state(r, eps, k, rng, s, opts)
        tr = SeesawTrace(k)
        a, rt = alternate(r, s, eps, start, opts, max_iters, tol, tr)
        traces.append(tr)
        # a restart whose block solve failed is abandoned; strict < keeps the smaller id on ties
        if not tr.failed and tr.iterates and a < best[0]:
            best = (a, rt, k)
    a, rt, k = best
    if rt is None:
        raise AllRestartsFailed("every seesaw restart failed: " + "; ".join(t.message for t in traces))
    check_witness(rt, r, eps)
    value = -2.0 * math.log2(a) if a > 0 else math.inf
    result = SmoothingResult(value, _witness(rt), {"restart_id": k, "a": a},
                             "optimal", 0.0, value, math.nan)
    return result, traces


def rescale_witness(rt, rho, eps):
    """Scale rt down so F(rt, rho) = 1 - eps exactly (never increases F(rt, sigma))."""
    f = fidelity(rt, rho)
    if f <= 0:
        raise DomainError("witness is orthogonal to rho")
    return herm(as_matrix(rt) * min(1.0, (1.0 - eps) / f))


# -- upper bound ----------------------------------------------------------------


def default_delta_grid(eps: float, points: int = 40) -> np.ndarray:
    _check_eps(eps, lo_open=True)
    return np.geomspace(1e-4 * (1.0 - eps), 0.999 * (1.0 - eps), points)


@dataclass(frozen=True)
class UpperResult:
    upper_bits: float
    delta_star: float
    per_delta: tuple  # (delta, bits or nan)


def dminf_upper(rho, sigma, eps: float, delta_grid=None, opts: SolverOptions | None = None) -> UpperResult:
    """min over delta of D_max^{1-eps-delta} + log2 1/(1 - f(eps, delta))."""
    _check_eps(eps, lo_open=True)
    grid = default_delta_grid(eps) if delta_grid is None else np.asarray(delta_grid, dtype=float)
    if grid.size == 0:
        raise EmptyGrid("delta grid is empty")
    if np.any(grid < 0) or np.any(grid >= 1 - eps):
        raise DomainError("delta grid must lie in (0, 1 - eps)")
    r, s = _inputs(rho, sigma)
    best, delta_star = math.inf, math.nan
    rows = []
    failures = []
    for delta in grid:
        f = f_eps_delta(eps, float(delta))
        if f >= 1.0:  # delta = 0: the penalty term is infinite
            rows.append((float(delta), math.nan))
            continue
        try:
            dm = smooth_dmax(r, s, 1.0 - eps - float(delta), "subnormalized", opts, dual=False)
        except SolverFailure as exc:
            failures.append(str(exc))
            rows.append((float(delta), math.nan))
            continue
        val = dm.primal_bits - math.log2(1.0 - f)
        rows.append((float(delta), val))
        if val < best:
            best, delta_star = val, float(delta)
    if not math.isfinite(best) and failures:
        raise SolverFailure("no delta point could be solved: " + failures[0])
    return UpperResult(best, delta_star, tuple(rows))


@dataclass(frozen=True)
class Bracket:
    lower_bits: float
    upper_bits: float
    delta_star: float
    eps: float = math.nan
    lower: SmoothingResult | None = None
    traces: tuple = ()

    @property
    def width(self) -> float:
        return self.upper_bits - self.lower_bits


BRACKET_SLACK = 1e-6


def bracket_dminf(rho, sigma, eps: float, seesaw: SeesawOptions | None = None, delta_grid=None,
                  opts: SolverOptions | None = None, warm_start=None) -> Bracket:
    """Seesaw lower bound and delta-swept upper bound, checked for consistency."""
    _check_eps(eps)
    seesaw = seesaw or SeesawOptions()
    if eps == 0:
        v = d_min_f(rho, sigma).bits  # no smoothing: the quantity is exact
        return Bracket(v, v, math.nan, 0.0)
    low, traces = seesaw_dminf_lower(rho, sigma, eps, seesaw.restarts, seesaw.max_iters,
                                     seesaw.tol, seesaw.seed, opts, warm_start)
    up = dminf_upper(rho, sigma, eps, delta_grid, opts)
    if low.value_bits > up.upper_bits + BRACKET_SLACK:
        raise SolverFailure(f"bracket inverted: lower {low.value_bits} > upper {up.upper_bits}")
    return Bracket(low.value_bits, up.upper_bits, up.delta_star, eps, low, tuple(traces))


def dmax_plus_penalty(rho, sigma, eps: float) -> float:
    """Unsmoothed upper bound D_max + log2 1/(1 - eps)."""
    return d_max(rho, sigma).bits - math.log2(1.0 - eps)
