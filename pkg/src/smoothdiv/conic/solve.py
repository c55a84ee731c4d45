"""Solve a :class:`Program` and interpret the result in complex terms."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import SolverFailure
from .backends import ACCURATE_BACKEND, DEFAULT_BACKEND, Backend, FallbackBackend, SolverOptions
from .program import Affine, Program, smat, unembed_dual

GAP_TOL = 1e-6
LMI_TOL = 1e-7
REFINE_TOL = 1e-7


@dataclass(frozen=True)
class ConicSolution:
    status: str
    primal_value: float
    dual_value: float
    gap: float
    witnesses: dict = field(default_factory=dict)  # variable name -> complex array
    # LMI label -> complex Hermitian W >= 0 entering the Lagrangian as -Tr[W M]
    duals: dict = field(default_factory=dict)
    lmi_violation: float = 0.0
    iterations: int = 0
    solver_status: str = ""
    values: dict = field(default_factory=dict, repr=False)  # raw real parameters

    @property
    def ok(self) -> bool:
        return self.status == "optimal"

    def value(self, expr: Affine) -> np.ndarray:
        return expr.evaluate(self.values)

    def require(self, what: str = "program") -> "ConicSolution":
        if not self.ok:
            raise SolverFailure(f"{what}: solver status {self.status} ({self.solver_status})", self.status)
        return self


def relative_gap(p: float, d: float) -> float:
    return abs(p - d) / (1.0 + abs(p))


def solve(program: Program, opts: SolverOptions | None = None, backend: Backend | None = None) -> ConicSolution:
    """Solve ``program``; infeasible/unbounded/inaccurate come back as statuses.

    Only a crash inside the backend raises :class:`SolverFailure`.  With a
    :class:`FallbackBackend` the fallback runs only when the checked primary
    result is unusable, so a near-optimal answer that passes the gap and
    LMI checks is not solved twice.
    """
    opts = opts or SolverOptions()
    backend = backend or DEFAULT_BACKEND
    c = program.compile()
    if not isinstance(backend, FallbackBackend):
        return _interpret(program, c, backend.solve(c, opts))
    try:
        first = _interpret(program, c, backend.primary.solve(c, opts))
    except SolverFailure:
        return _interpret(program, c, backend.fallback.solve(c, opts))
    if first.status in ("optimal", "infeasible", "unbounded"):
        return first
    try:
        second = _interpret(program, c, backend.fallback.solve(c, opts))
    except SolverFailure:
        return first
    return second if second.ok else first


def _interpret(program: Program, c, raw) -> ConicSolution:
    primal = c.sign * (raw.primal_obj + c.q0)
    dual = c.sign * (raw.dual_obj + c.q0)
    if raw.status not in ("optimal", "almost"):
        return ConicSolution(raw.status, primal, dual, np.inf, iterations=raw.iterations,
                             solver_status=raw.solver_status)

    values = program.values(raw.x, c)
    witnesses = {}
    for name, v in program.variables.items():
        witnesses[name] = (v.basis @ values[name]).reshape(v.shape)

    violation = 0.0
    duals = {}
    for (label, expr), (_, r0, r1, m) in zip(program.lmis, c.lmi_rows):
        mat = expr.evaluate(values)
        lam = np.linalg.eigvalsh((mat + mat.conj().T) / 2)
        scale = max(1.0, float(np.max(np.abs(lam))))
        violation = max(violation, -float(lam[0]) / scale)
        # <Z, embed(M)> = 2 Re Tr[Z_c M], so the complex multiplier is 2 Z_c
        duals[label] = 2 * unembed_dual(smat(raw.z[r0:r1], 2 * m))
    for _, e in program.inequalities:
        violation = max(violation, -float(np.real(e.evaluate(values)[0, 0])))
    for _, e in program.equalities:
        violation = max(violation, abs(float(np.real(e.evaluate(values)[0, 0]))))

    gap = relative_gap(primal, dual)
    status = "optimal" if gap <= GAP_TOL and violation <= LMI_TOL else "inaccurate"
    return ConicSolution(status, primal, dual, gap, witnesses, duals, violation,
                         raw.iterations, raw.solver_status, values)


def refine_pair(primal: Program, dual: Program, sp_: ConicSolution, sd: ConicSolution,
                opts: SolverOptions | None = None) -> tuple[ConicSolution, ConicSolution]:
    """Re-solve a primal/dual pair on the accurate backend if their values disagree.

    The trigger sits below GAP_TOL so accepted pairs keep some margin.
    Both programs are still solved separately; the new pair replaces the
    old one only if both are optimal and their gap is smaller.
    """
    gap = relative_gap(sp_.primal_value, sd.primal_value)
    if gap <= REFINE_TOL:
        return sp_, sd
    sp2 = solve(primal, opts, ACCURATE_BACKEND)
    sd2 = solve(dual, opts, ACCURATE_BACKEND)
    if sp2.ok and sd2.ok and relative_gap(sp2.primal_value, sd2.primal_value) < gap:
        return sp2, sd2
    return sp_, sd
