"""Divergences that are exactly semidefinite programs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..operators import BipartiteLabel, as_matrix, herm, kron, partial_trace
from .backends import SolverOptions
from .program import Program, bmat
from .solve import refine_pair, relative_gap, solve

ZERO_TYPE2 = 1e-12


def _check_eps(eps):
    if not (0.0 <= eps < 1.0):
        raise DomainError(f"epsilon must lie in [0, 1), got {eps}")


def _same_shape(a, b):
    a, b = herm(a), herm(b)
    if a.shape != b.shape:
        raise DomainError(f"shapes {a.shape} and {b.shape} differ")
    return a, b


def clip_effect(lam) -> np.ndarray:
    """Project a Hermitian matrix onto {0 <= L <= I} spectrally."""
    w, v = np.linalg.eigh(herm(lam))
    w = np.clip(w, 0.0, 1.0)
    return (v * w) @ v.conj().T


@dataclass(frozen=True)
class RootFidelityResult:
    primal: float  # sup Re Tr X
    dual: float  # (1/2) inf Tr[Y rho] + Tr[Z sigma]
    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    gap: float  # between the two programs
    solver_gaps: tuple


def root_fidelity_sdp(rho, sigma, opts: SolverOptions | None = None) -> RootFidelityResult:
    r, s = _same_shape(rho, sigma)
    n = r.shape[0]

    p = Program("root_fidelity_primal")
    x = p.matrix("X", n, n)
    p.psd(bmat([[r, x], [x.H, s]]), "block")
    p.maximize((x.trace() + x.H.trace()) / 2)
    sp_ = solve(p, opts).require("root fidelity primal")

    d = Program("root_fidelity_dual")
    y = d.hermitian("Y", n)
    z = d.hermitian("Z", n)
    eye = np.eye(n)
    d.psd(bmat([[y, eye], [eye, z]]), "block")
    d.minimize(((y @ r).trace() + (z @ s).trace()) / 2)
    sd = solve(d, opts).require("root fidelity dual")
    sp_, sd = refine_pair(p, d, sp_, sd, opts)
    dual, wy, wz = _polish_fidelity_dual(r, s, sd.witnesses["Y"], sd.witnesses["Z"], sd.primal_value)

    return RootFidelityResult(
        sp_.primal_value, dual, sp_.witnesses["X"], wy, wz,
        relative_gap(sp_.primal_value, dual), (sp_.gap, sd.gap),
    )


def _polish_fidelity_dual(r, s, wy, wz, value):
    """Move an interior dual point onto the boundary.

    For Y > 0 the block constraint says Z >= Y^-1, so Z = Y^-1 is feasible
    and never costs more.  Interior-point solvers stop about 1e-8 inside the
    cone, which otherwise leaves the bound ~1e-7 high, and they may also land
    slightly outside it.  The polished point is feasible by construction.
    """
    wy = herm(wy)
    w, v = np.linalg.eigh(wy)
    if w[0] <= 1e-9 * max(1.0, w[-1]):
        return value, wy, herm(wz)
    z = herm((v / w) @ v.conj().T)
    return float(np.real(np.trace(wy @ r) + np.trace(z @ s))) / 2, wy, z


@dataclass(frozen=True)
class HypothesisTestResult:
    value_bits: float
    witness: np.ndarray  # Lambda, clipped into [0, I]
    type2: float  # min Tr[Lambda sigma]
    primal: float
    dual: float
    gap: float


def _bits_from_type2(t: float) -> float:
    return math.inf if t <= ZERO_TYPE2 else -math.log2(t)


def _type2_program(rho_blocks, sigma_blocks, eps, scale):
    p = Program("hypothesis_testing")
    type1 = 0
    type2 = 0
    for i, (rb, sb) in enumerate(zip(rho_blocks, sigma_blocks)):
        n = rb.shape[0]
        lam = p.hermitian(f"L{i}", n)
        p.psd(lam, f"L{i}>=0")
        p.psd(np.eye(n) - lam, f"L{i}<=I")
        type1 = (lam @ rb).trace() + type1
        type2 = (lam @ sb).trace() * scale + type2
    p.ge(type1, 1 - eps, "type1")
    p.minimize(type2)
    return p


def _hypothesis_blocks(rho_blocks, sigma_blocks, eps, opts) -> HypothesisTestResult:
    sol = solve(_type2_program(rho_blocks, sigma_blocks, eps, 1.0), opts).require("hypothesis testing")
    scale = 1.0
    t0 = sol.primal_value
    # The solver's tolerances are absolute, so a small type-II error would
    # only be known to a few digits.  Re-solve with sigma rescaled to O(1).
    # If the rescaled solve stops short, try a milder scale, then keep the first.
    if 1e-12 < t0 < 0.1:
        for s in (1.0 / t0, 1.0 / math.sqrt(t0)):
            again = solve(_type2_program(rho_blocks, sigma_blocks, eps, s), opts)
            if again.ok:
                sol, scale = again, s
                break
    blocks = [clip_effect(sol.witnesses[f"L{i}"]) for i in range(len(rho_blocks))]
    dim = sum(b.shape[0] for b in blocks)
    w = np.zeros((dim, dim), dtype=complex)
    i = 0
    for b in blocks:
        k = b.shape[0]
        w[i:i + k, i:i + k] = b
        i += k
    t = max(sol.primal_value / scale, 0.0)
    return HypothesisTestResult(_bits_from_type2(t), w, t, sol.primal_value / scale,
                                sol.dual_value / scale, sol.gap)


def hypothesis_testing(rho, sigma, eps: float, opts: SolverOptions | None = None) -> HypothesisTestResult:
    """-log2 min { Tr[L sigma] : 0 <= L <= I, Tr[L rho] >= 1 - eps }."""
    _check_eps(eps)
    r, s = _same_shape(rho, sigma)
    return _hypothesis_blocks([r], [s], eps, opts)


def hypothesis_testing_blockdiag(rho_blocks, sigma_blocks, eps: float,
                                 opts: SolverOptions | None = None) -> HypothesisTestResult:
    """Hypothesis test between block-diagonal operators, one test block per block.

    Restricting the test to the block structure loses nothing: pinching onto
    the blocks is a channel that fixes both operators.
    """
    _check_eps(eps)
    if len(rho_blocks) != len(sigma_blocks) or not rho_blocks:
        raise DomainError("need matching, nonempty block lists")
    pairs = [_same_shape(rb, sb) for rb, sb in zip(rho_blocks, sigma_blocks)]
    return _hypothesis_blocks([a for a, _ in pairs], [b for _, b in pairs], eps, opts)


def smooth_min_mutual_info(rho_ab, label: BipartiteLabel, eps: float,
                           opts: SolverOptions | None = None) -> float:
    """I^eps_min(A;B) = D^eps_H(rho_AB || rho_A (x) rho_B)."""
    r = as_matrix(rho_ab)
    label.check(r)
    prod = kron(partial_trace(r, label, "A"), partial_trace(r, label, "B"))
    return hypothesis_testing(r, prod, eps, opts).value_bits
