"""Gaussian quantiles and closed-form expansion / bound evaluators."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .divergences import relative_entropy, relative_entropy_variance, support_contained
from .errors import DomainError, SupportViolation, ZeroVariance
from .operators import as_matrix, fidelity

REMAINDER_NOTE = "O(log n / n)"
ZERO_VARIANCE = 1e-12
_SQRT2 = math.sqrt(2.0)


def gaussian_cdf(a: float) -> float:
    return 0.5 * math.erfc(-a / _SQRT2)


def _gaussian_pdf(a: float) -> float:
    return math.exp(-0.5 * a * a) / math.sqrt(2 * math.pi)


def gaussian_quantile(eps: float) -> float:
    """Inverse of :func:`gaussian_cdf` on (0, 1)."""
    if not (0.0 < eps < 1.0):
        raise DomainError(f"quantile needs eps in (0, 1), got {eps}")
    if eps > 0.5:
        return -gaussian_quantile(1.0 - eps)
    if eps == 0.5:
        return 0.0
    lo, hi = -40.0, 0.0
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if gaussian_cdf(mid) < eps:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    return x - (gaussian_cdf(x) - eps) / _gaussian_pdf(x)


def f_eps_delta(eps: float, delta: float) -> float:
    """Fidelity of the binary distributions (eps, 1-eps) and (eps+delta, 1-eps-delta)."""
    if not (0.0 <= eps <= 1.0):
        raise DomainError(f"eps must lie in [0, 1], got {eps}")
    if not (0.0 <= delta <= 1.0 - eps + 1e-15):
        raise DomainError(f"delta must lie in [0, 1-eps], got {delta}")
    rest = max(1.0 - eps - delta, 0.0)
    return (math.sqrt(eps) * math.sqrt(eps + delta) + math.sqrt(rest) * math.sqrt(1.0 - eps)) ** 2


def g_bound(eps: float, rho, sigma) -> float:
    """Zero-error-style upper bound, valid for eps <= F(rho, sigma/Tr sigma)."""
    s = as_matrix(sigma)
    tr = float(s.trace().real)
    if tr <= 0:
        raise DomainError("sigma must have positive trace")
    f = min(fidelity(rho, s / tr), 1.0)
    if not (0.0 <= eps <= f + 1e-12):
        raise DomainError(f"eps={eps} exceeds F(rho, sigma_hat)={f}")
    g = (math.sqrt(eps) * math.sqrt(f) + math.sqrt(1.0 - f) * math.sqrt(1.0 - eps)) ** 2
    if g >= 1.0:
        return math.inf
    return -math.log2(1.0 - g) - math.log2(tr)


@dataclass(frozen=True)
class ExpansionTerms:
    first_order: float
    second_order_coeff: float  # sqrt(V) * (+/-) quantile
    n: int
    value_per_copy: float
    remainder_note: str = REMAINDER_NOTE


def _moments(rho, sigma) -> tuple[float, float]:
    if not support_contained(as_matrix(rho), as_matrix(sigma)):
        raise SupportViolation("supp(rho) is not contained in supp(sigma)")
    return relative_entropy(rho, sigma).bits, relative_entropy_variance(rho, sigma).bits


def expansion_from_moments(d: float, v: float, eps: float, n: int, sign: float = 1.0) -> ExpansionTerms:
    """d + sign * sqrt(v / n) * quantile(eps), with the pieces kept apart."""
    if not (0.0 < eps < 1.0):
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if n < 1:
        raise DomainError("n must be >= 1")
    if v < ZERO_VARIANCE:
        raise ZeroVariance(f"variance {v:.3g} vanishes; the expansion does not apply")
    coeff = sign * math.sqrt(v) * gaussian_quantile(eps)
    return ExpansionTerms(d, coeff, n, d + coeff / math.sqrt(n))


def quantile_sign(target: str, alpha: float | None = None) -> float:
    if target in ("dminf", "hypothesis"):
        return 1.0
    if target == "sandwiched":
        if alpha is None:
            raise DomainError("sandwiched target needs alpha")
        if 0.5 <= alpha < 1:
            return 1.0
        if alpha > 1:
            return -1.0
        raise DomainError(f"the expansion covers alpha in [1/2, 1) or (1, inf), got {alpha}")
    raise DomainError(f"unknown target {target!r}")


def second_order(rho, sigma, eps: float, n: int, target: str = "dminf",
                 alpha: float | None = None) -> ExpansionTerms:
    sign = quantile_sign(target, alpha)
    d, v = _moments(rho, sigma)
    return expansion_from_moments(d, v, eps, n, sign)


def moderate_deviation(rho, sigma, a_n: float, n: int, direction: str = "dminf") -> float:
    """Per-copy rate D -/+ sqrt(2V) a_n along a moderate sequence a_n."""
    if a_n < 0:
        raise DomainError("a_n must be nonnegative")
    if direction in ("dminf", "sandwiched_lt1"):
        sign = -1.0
    elif direction == "sandwiched_gt1":
        sign = 1.0
    else:
        raise DomainError(f"unknown direction {direction!r}")
    d, v = _moments(rho, sigma)
    return d + sign * math.sqrt(2.0 * v) * a_n


def moderate_error(a_n: float, n: int) -> float:
    """Error level e^{-n a_n^2} paired with a moderate sequence."""
    return math.exp(-n * a_n * a_n)
