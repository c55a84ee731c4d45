"""Solver adapters.

A backend receives a :class:`~smoothdiv.conic.program.Compiled` program and
returns a :class:`RawResult`.  Nothing else about the solver leaks out, so
tests can substitute a mock.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np
import scipy.sparse as sp

from ..errors import SolverFailure
from .program import Compiled


@dataclass(frozen=True)
class SolverOptions:
    tol_abs: float = 1e-8
    tol_rel: float = 1e-8
    max_iter: int = 200
    verbose: bool = False


@dataclass(frozen=True)
class RawResult:
    status: str  # 'optimal' | 'infeasible' | 'unbounded' | 'inaccurate'
    x: np.ndarray
    z: np.ndarray
    primal_obj: float  # of the standard form, without q0
    dual_obj: float
    iterations: int
    solver_status: str


class Backend(Protocol):
    def solve(self, program: Compiled, opts: SolverOptions) -> RawResult: ...


_STATUS = {
    "Solved": "optimal",
    "PrimalInfeasible": "infeasible",
    "DualInfeasible": "unbounded",
    # reduced-accuracy termination; solve() only accepts it if the
    # independent gap and feasibility checks pass
    "AlmostSolved": "almost",
}


class ClarabelBackend:
    """Interior-point solves through Clarabel.  A new solver per call."""

    def solve(self, program: Compiled, opts: SolverOptions) -> RawResult:
        import clarabel

        cones = []
        for kind, size in program.cones:
            if kind == "zero":
                cones.append(clarabel.ZeroConeT(size))
            elif kind == "nonneg":
                cones.append(clarabel.NonnegativeConeT(size))
            elif kind == "psd":
                cones.append(clarabel.PSDTriangleConeT(size))
            else:
                raise SolverFailure(f"unsupported cone {kind!r}")

        settings = clarabel.DefaultSettings()
        settings.verbose = opts.verbose
        settings.tol_gap_abs = opts.tol_abs
        settings.tol_gap_rel = opts.tol_rel
        settings.tol_feas = opts.tol_abs
        settings.max_iter = opts.max_iter
        settings.max_threads = 1

        n = len(program.q)
        p = sp.csc_matrix((n, n))
        try:
            solver = clarabel.DefaultSolver(p, program.q, program.A, program.b, cones, settings)
            sol = solver.solve()
        except Exception as exc:  # backend crash, not a status
            raise SolverFailure(f"clarabel raised {type(exc).__name__}: {exc}") from exc

        raw = str(sol.status).split(".")[-1]
        return RawResult(
            status=_STATUS.get(raw, "inaccurate"),
            x=np.asarray(sol.x, dtype=float),
            z=np.asarray(sol.z, dtype=float),
            primal_obj=float(sol.obj_val),
            dual_obj=float(sol.obj_val_dual),
            iterations=int(sol.iterations),
            solver_status=raw,
        )




class CvxoptBackend:
    """Interior-point solves through cvxopt's conelp.

    The compiled form packs PSD blocks as scaled upper triangles; cvxopt
    wants full column-major matrices, so those rows are unpacked here and
    the duals packed back.
    """

    def solve(self, program: Compiled, opts: SolverOptions) -> RawResult:
        import cvxopt
        from cvxopt import solvers

        A = sp.csr_matrix(program.A)
        b = np.asarray(program.b, dtype=float)
        eq_rows, lin_rows, psd = [], [], []
        r = 0
        for kind, size in program.cones:
            width = size * (size + 1) // 2 if kind == "psd" else size
            rows = list(range(r, r + width))
            if kind == "zero":
                eq_rows += rows
            elif kind == "nonneg":
                lin_rows += rows
            elif kind == "psd":
                psd.append((r, size))
            else:
                raise SolverFailure(f"unsupported cone {kind!r}")
            r += width

        # triangle index k of (i, j), i <= j, column-major upper
        blocks, dims_s = [], []
        for r0, m in psd:
            size = m * (m + 1) // 2
            rows, cols, vals, k = [], [], [], 0
            for j in range(m):
                for i in range(j + 1):
                    if i == j:
                        rows.append(i + j * m), cols.append(k), vals.append(1.0)
                    else:
                        f = 1.0 / np.sqrt(2.0)
                        rows += [i + j * m, j + i * m]
                        cols += [k, k]
                        vals += [f, f]
                    k += 1
            unpack = sp.csr_matrix((vals, (rows, cols)), shape=(m * m, size))
            blocks.append((r0, size, m, unpack))
            dims_s.append(m)

        g_parts = [A[lin_rows]] + [u @ A[r0:r0 + size] for r0, size, _, u in blocks]
        h_parts = [b[lin_rows]] + [u @ b[r0:r0 + size] for r0, size, _, u in blocks]
        G = sp.vstack(g_parts).tocoo()
        h = np.concatenate(h_parts)

        def spm(m):
            m = sp.coo_matrix(m)
            return cvxopt.spmatrix(m.data.tolist(), m.row.tolist(), m.col.tolist(), m.shape)

        n = A.shape[1]
        kw = {}
        if eq_rows:
            kw = {"A": spm(A[eq_rows]), "b": cvxopt.matrix(b[eq_rows])}
        options = {"show_progress": opts.verbose, "abstol": opts.tol_abs, "reltol": opts.tol_rel,
                   "feastol": opts.tol_abs, "maxiters": opts.max_iter}
        try:
            sol = solvers.conelp(cvxopt.matrix(np.asarray(program.q, dtype=float)), spm(G),
                                 cvxopt.matrix(h), {"l": len(lin_rows), "q": [], "s": dims_s},
                                 options=options, kktsolver="ldl", **kw)
        except (ValueError, ArithmeticError) as exc:
            raise SolverFailure(f"cvxopt raised {type(exc).__name__}: {exc}") from exc

        status = {"optimal": "optimal", "primal infeasible": "infeasible",
                  "dual infeasible": "unbounded"}.get(sol["status"], "almost")
        if sol["x"] is None or status in ("infeasible", "unbounded"):
            return RawResult(status if status != "almost" else "inaccurate", np.full(n, np.nan), np.full(len(b), np.nan),
                             np.nan, np.nan, int(sol.get("iterations", 0)), sol["status"])
        z = np.zeros(len(b))
        if eq_rows:
            z[eq_rows] = np.asarray(sol["y"]).ravel()
        zs = np.asarray(sol["z"]).ravel()
        z[lin_rows] = zs[:len(lin_rows)]
        off = len(lin_rows)
        for r0, size, m, u in blocks:
            full = zs[off:off + m * m]
            # <u s, Z> = <s, u^T Z>; the adjoint packs Z back to the triangle
            z[r0:r0 + size] = u.T @ full
            off += m * m
        return RawResult(status, np.asarray(sol["x"]).ravel(), z, float(sol["primal objective"]),
                         float(sol["dual objective"]), int(sol["iterations"]), sol["status"])


class FallbackBackend:
    """Try ``primary``; on anything short of a clean optimum, try ``fallback``.

    The fallback result is used only if it reports optimal, so a
    definite infeasible/unbounded answer from the primary is kept.
    """

    def __init__(self, primary, fallback):
        self.primary = primary
        self.fallback = fallback

    def solve(self, program: Compiled, opts: SolverOptions) -> RawResult:
        try:
            first = self.primary.solve(program, opts)
        except SolverFailure:
            return self.fallback.solve(program, opts)
        if first.status in ("optimal", "infeasible", "unbounded"):
            return first
        try:
            second = self.fallback.solve(program, opts)
        except SolverFailure:
            return first
        return second if second.status == "optimal" else first


# Clarabel is faster on these small programs; cvxopt is slower but gets a
# few more digits on near-degenerate ones.
DEFAULT_BACKEND = FallbackBackend(ClarabelBackend(), CvxoptBackend())
ACCURATE_BACKEND = FallbackBackend(CvxoptBackend(), ClarabelBackend())
# for solves whose point is repaired and re-evaluated afterwards
PROPOSAL_BACKEND = ClarabelBackend()
