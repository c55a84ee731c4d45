"""Closed-form divergences, evaluated spectrally.  All values are in bits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadAlpha, DimensionMismatch, NotPSD, SupportViolation
from .operators import (
    BipartiteLabel,
    DensityOperator,
    as_matrix,
    fidelity,
    herm,
    kron,
    matrix_function,
    partial_trace,
    support_projector,
)

SUPPORT_TOL = 1e-9


@dataclass(frozen=True)
class DivergenceValue:
    bits: float
    support_condition_met: bool = True

    def __float__(self):
        return float(self.bits)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.bits)


INFINITE = DivergenceValue(math.inf, False)


def _state(rho) -> np.ndarray:
    return DensityOperator(as_matrix(rho)).matrix


def _psd(sigma) -> np.ndarray:
    s = herm(sigma)
    if s.size and np.linalg.eigvalsh(s)[0] < -1e-8:
        raise NotPSD("sigma is not positive semidefinite")
    return s


def _pair(rho, sigma):
    r, s = _state(rho), _psd(sigma)
    if r.shape != s.shape:
        raise DimensionMismatch(f"shapes {r.shape} and {s.shape} differ")
    return r, s


def support_contained(rho, sigma, tol: float = SUPPORT_TOL) -> bool:
    """True when supp(rho) lies inside supp(sigma) up to ``tol`` leakage."""
    r, s = as_matrix(rho), as_matrix(sigma)
    q = np.eye(s.shape[0]) - support_projector(s)
    leak = q @ r @ q
    return bool(np.linalg.norm(leak, 2) <= tol)


def _log_ratio(r, s) -> np.ndarray:
    """log2 rho - log2 sigma (both on their supports)."""
    return matrix_function(r, "log2") - matrix_function(s, "log2")


def relative_entropy(rho, sigma) -> DivergenceValue:
    r, s = _pair(rho, sigma)
    if not support_contained(r, s):
        return INFINITE
    return DivergenceValue(float(np.real(np.trace(r @ _log_ratio(r, s)))))


def relative_entropy_variance(rho, sigma) -> DivergenceValue:
    r, s = _pair(rho, sigma)
    if not support_contained(r, s):
        raise SupportViolation("supp(rho) is not contained in supp(sigma)")
    lr = _log_ratio(r, s)
    m1 = float(np.real(np.trace(r @ lr)))
    m2 = float(np.real(np.trace(r @ lr @ lr)))
    # rounding can push an exact zero slightly negative
    return DivergenceValue(max(m2 - m1 * m1, 0.0))


def _check_alpha(alpha):
    if not (alpha > 0 and alpha != 1 and math.isfinite(alpha)):
        raise BadAlpha(f"alpha must lie in (0,1) or (1,inf), got {alpha}")


def _renyi_from_q(q: float, alpha: float) -> DivergenceValue:
    if q <= 0:
        # only reachable for alpha < 1 when rho and sigma are orthogonal
        return DivergenceValue(math.inf, True)
    return DivergenceValue(math.log2(q) / (alpha - 1))


def sandwiched_renyi(rho, sigma, alpha: float) -> DivergenceValue:
    _check_alpha(alpha)
    r, s = _pair(rho, sigma)
    if alpha > 1 and not support_contained(r, s):
        return INFINITE
    s_pow = matrix_function(s, "power", (1 - alpha) / (2 * alpha))
    inner = s_pow @ r @ s_pow
    w = np.clip(np.linalg.eigvalsh(herm(inner)), 0.0, None)
    q = float(np.sum(w[w > 1e-15] ** alpha))
    return _renyi_from_q(q, alpha)


def petz_renyi(rho, sigma, alpha: float) -> DivergenceValue:
    _check_alpha(alpha)
    r, s = _pair(rho, sigma)
    if alpha > 1 and not support_contained(r, s):
        return INFINITE
    q = float(np.real(np.trace(matrix_function(r, "power", alpha) @ matrix_function(s, "power", 1 - alpha))))
    return _renyi_from_q(q, alpha)


def d_max(rho, sigma) -> DivergenceValue:
    r, s = _pair(rho, sigma)
    if not support_contained(r, s):
        return INFINITE
    s_inv = matrix_function(s, "power", -0.5)
    lam = float(np.linalg.eigvalsh(herm(s_inv @ r @ s_inv))[-1])
    return DivergenceValue(math.log2(lam))


def d_min_projector(rho, sigma) -> DivergenceValue:
    r, s = _pair(rho, sigma)
    t = float(np.real(np.trace(support_projector(r) @ s)))
    if t <= 1e-15:
        return DivergenceValue(math.inf, True)
    return DivergenceValue(-math.log2(t))


def d_min_f(rho, sigma) -> DivergenceValue:
    r, s = _pair(rho, sigma)
    f = fidelity(r, s)
    if f <= 1e-15:
        return DivergenceValue(math.inf, True)
    return DivergenceValue(-math.log2(f))


def product_of_marginals(rho_ab, label: BipartiteLabel) -> np.ndarray:
    r = as_matrix(rho_ab)
    return kron(partial_trace(r, label, "A"), partial_trace(r, label, "B"))


def mutual_information_and_variance(rho_ab, label: BipartiteLabel) -> tuple[float, float]:
    """I(A;B) = D(rho_AB || rho_A (x) rho_B) and the matching variance."""
    r = _state(rho_ab)
    label.check(r)
    prod = product_of_marginals(r, label)
    return relative_entropy(r, prod).bits, relative_entropy_variance(r, prod).bits
