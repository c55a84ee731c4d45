"""Independent brute-force references.

None of these call the conic solver, so they can serve as oracles for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, TooLarge

LN2 = math.log(2.0)
TIE_TOL = 1e-12


@dataclass(frozen=True)
class ClassicalDistribution:
    masses: tuple

    def __post_init__(self):
        m = tuple(float(x) for x in self.masses)
        if not m:
            raise DomainError("a distribution needs at least one outcome")
        if any(x < 0 or not math.isfinite(x) for x in m):
            raise DomainError("masses must be finite and nonnegative")
        if sum(m) > 1 + 1e-12:
            raise DomainError(f"masses sum to {sum(m)} > 1")
        object.__setattr__(self, "masses", m)

    @property
    def total(self) -> float:
        return sum(self.masses)

    def __len__(self):
        return len(self.masses)

    def array(self) -> np.ndarray:
        return np.array(self.masses)


def _dist(x) -> ClassicalDistribution:
    return x if isinstance(x, ClassicalDistribution) else ClassicalDistribution(tuple(x))


def _check(p: ClassicalDistribution, q: ClassicalDistribution, eps: float):
    if len(p) != len(q):
        raise DomainError("p and q have different alphabets")
    if abs(p.total - 1.0) > 1e-10:
        raise DomainError("p must be normalized")
    if not (0.0 <= eps < 1.0):
        raise DomainError(f"epsilon must lie in [0, 1), got {eps}")


def _ties(a: float, b: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= TIE_TOL * max(1.0, abs(b))


def _greedy(log_ratio, log_p, log_q, target):
    """Likelihood-ratio fill over classes (all arrays per class).

    Returns (log2 of the accumulated q mass, weight per class).
    """
    order = np.argsort(-log_ratio, kind="stable")
    weights = np.zeros(len(order))
    filled = 0.0
    log_q_acc = -math.inf
    i = 0
    while i < len(order) and filled < target - 1e-15:
        # merge every class whose ratio ties with the current one
        j = i + 1
        while j < len(order) and _ties(log_ratio[order[j]], log_ratio[order[i]]):
            j += 1
        group = order[i:j]
        # may underflow to 0 for far-tail classes; those are then taken whole
        mass = float(np.exp(np.logaddexp.reduce(log_p[group])))
        lq = float(np.logaddexp.reduce(log_q[group]))
        if filled + mass <= target:
            frac = 1.0
        else:
            frac = (target - filled) / mass
        weights[group] = frac
        filled += frac * mass
        if frac > 0:
            log_q_acc = np.logaddexp(log_q_acc, math.log(frac) + lq)
        i = j
    return log_q_acc / LN2, weights


def neyman_pearson(p, q, eps: float):
    """Optimal type-II exponent (bits) and test vector for commuting inputs."""
    p, q = _dist(p), _dist(q)
    _check(p, q, eps)
    pa, qa = p.array(), q.array()
    with np.errstate(divide="ignore"):
        log_p = np.log(pa)
        log_q = np.log(qa)
    keep = pa > 0
    log_ratio = log_p[keep] - log_q[keep]  # +inf where q vanishes
    lq_bits, w = _greedy(log_ratio, log_p[keep], log_q[keep], 1.0 - eps)
    test = np.zeros(len(pa))
    test[keep] = w
    return -lq_bits, test


def _types(n: int, m: int):
    """Every composition of n into m nonnegative parts."""
    for bars in combinations_with_replacement(range(n + 1), m - 1):
        prev = 0
        out = []
        for b in bars:
            out.append(b - prev)
            prev = b
        out.append(n - prev)
        yield out


def iid_neyman_pearson(p, q, n: int, eps: float) -> float:
    """Exact Neyman-Pearson exponent (bits) for p^{(x)n} versus q^{(x)n}."""
    p, q = _dist(p), _dist(q)
    _check(p, q, eps)
    m = len(p)
    if n < 1:
        raise DomainError("n must be >= 1")
    if not ((m <= 2 and n <= 5000) or (m <= 4 and n <= 12)):
        raise TooLarge(f"alphabet {m} with n={n} exceeds the enumeration budget")
    pa, qa = p.array(), q.array()
    with np.errstate(divide="ignore"):
        lp, lq = np.log(pa), np.log(qa)
    ks = np.array(list(_types(n, m)), dtype=float)  # (classes, m)
    log_count = gammaln(n + 1) - np.sum(gammaln(ks + 1), axis=1)

    def class_log(lx):
        # sum_i k_i log x_i with 0 * log 0 = 0
        t = np.where(ks > 0, ks * np.where(np.isfinite(lx), lx, 0.0), 0.0)
        dead = np.any((ks > 0) & ~np.isfinite(lx), axis=1)
        return np.where(dead, -np.inf, np.sum(t, axis=1))

    lp_seq, lq_seq = class_log(lp), class_log(lq)
    keep = np.isfinite(lp_seq)
    log_ratio = np.where(np.isfinite(lq_seq), lp_seq - lq_seq, np.inf)
    log_p_class = log_count + lp_seq
    log_q_class = log_count + lq_seq
    lq_bits, _ = _greedy(log_ratio[keep], log_p_class[keep], log_q_class[keep], 1.0 - eps)
    return -lq_bits  # total over n copies, not per copy


def diag_relative_entropy(p, q) -> float:
    p, q = np.asarray(p, float), np.asarray(q, float)
    m = p > 0
    if np.any(q[m] == 0):
        return math.inf
    return float(np.sum(p[m] * np.log2(p[m] / q[m])))


def diag_relative_entropy_variance(p, q) -> float:
    p, q = np.asarray(p, float), np.asarray(q, float)
    m = p > 0
    lr = np.log2(p[m] / q[m])
    d = float(np.sum(p[m] * lr))
    return float(np.sum(p[m] * lr * lr) - d * d)


def diag_fidelity(p, q) -> float:
    return float(np.sum(np.sqrt(np.asarray(p, float) * np.asarray(q, float))) ** 2)


def diag_renyi(p, q, alpha: float) -> float:
    p, q = np.asarray(p, float), np.asarray(q, float)
    m = p > 0
    return float(math.log2(np.sum(p[m] ** alpha * q[m] ** (1 - alpha))) / (alpha - 1))


def binary_entropy(x: float) -> float:
    if x in (0.0, 1.0):
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def shannon_entropy(probs) -> float:
    w = np.asarray(probs, float)
    w = w[w > 0]
    return float(-np.sum(w * np.log2(w)))


def _polish(r, s, eps, start, maxiter):
    """Local nonlinear refinement over tau = G G^H / Tr(G G^H).

    Minimizes F(tau, sigma) / F(tau, rho) subject to F(tau, rho) >= 1 - eps;
    the candidate is then (1 - eps) tau / F(tau, rho).  No conic solver is
    involved, so this stays independent of the seesaw.
    """
    from scipy.optimize import minimize

    from .operators import fidelity, matrix_function

    n = r.shape[0]
    g0 = matrix_function(start / np.trace(start).real, "sqrt")
    x0 = np.concatenate([g0.real.ravel(), g0.imag.ravel()])

    def tau(x):
        g = (x[:n * n] + 1j * x[n * n:]).reshape(n, n)
        m = g @ g.conj().T
        return m / np.trace(m).real

    def obj(x):
        t = tau(x)
        return math.log(max(fidelity(t, s), 1e-300)) - math.log(max(fidelity(t, r), 1e-300))

    cons = [{"type": "ineq", "fun": lambda x: fidelity(tau(x), r) - (1.0 - eps)}]
    res = minimize(obj, x0, method="SLSQP", constraints=cons,
                   options={"maxiter": maxiter, "ftol": 1e-12})
    t = tau(res.x)
    f = fidelity(t, r)
    if f < 1.0 - eps:
        # SLSQP may stop slightly outside; pull back toward the feasible start
        t0 = start / np.trace(start).real
        lo, hi = 0.0, 1.0
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            if fidelity((1 - mid) * t + mid * t0, r) >= 1.0 - eps:
                hi = mid
            else:
                lo = mid
        t = (1 - hi) * t + hi * t0
        f = fidelity(t, r)
        if f < 1.0 - eps:
            return None
    return t * ((1.0 - eps) / f)


def multistart_dminf(rho, sigma, eps: float, samples: int = 64, seed: int = 0, polish: int = 8,
                     maxiter: int = 200) -> float:
    """Certified lower bound on the smooth F-min-relative entropy by random search.

    Each sample mixes rho with a random mixed state and rescales so that
    F(rt, rho) = 1 - eps exactly; any such rt certifies -log2 F(rt, sigma).
    The best ``polish`` samples are refined by a local nonlinear optimizer.
    The first sample is always rt = (1 - eps) rho.
    """
    from .operators import fidelity, herm, random_state
    from .smoothing import _inputs

    if samples < 1:
        raise DomainError("samples must be >= 1")
    if not (0.0 <= eps < 1.0):
        raise DomainError(f"epsilon must lie in [0, 1), got {eps}")
    r, s = _inputs(rho, sigma)
    n = r.shape[0]
    rng = np.random.default_rng(seed)
    cands = [(1.0 - eps) * r]
    for _ in range(samples - 1):
        tau = random_state(n, rng)
        t = rng.uniform(0.0, 1.0)
        for _ in range(60):
            mix = (1 - t) * r + t * tau
            f = fidelity(mix, r)
            if f >= 1.0 - eps:
                break
            t /= 2
        cands.append(herm(mix * ((1.0 - eps) / f)))

    def bits(rt):
        f = fidelity(rt, s)
        return math.inf if f <= 0 else -math.log2(f)

    scored = sorted(((bits(c), i) for i, c in enumerate(cands)), key=lambda v: (-v[0], v[1]))
    best = scored[0][0]
    if eps > 0:
        for _, i in scored[:max(polish, 0)]:
            rt = _polish(r, s, eps, cands[i], maxiter)
            if rt is not None:
                best = max(best, bits(rt))
    return best
