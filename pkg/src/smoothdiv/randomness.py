"""Randomness-distillation bound evaluators.

Rates are in bits per copy.  The quantum-side upper bound replaces the
optimization over gamma-constrained operators by the product of marginals,
which is one member of that set, so the emitted number is still an upper
bound on the two-term expansion it stands in for.  Outputs carry the label
``PRODUCT_RELAXATION`` to make that visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import expansion_from_moments, gaussian_quantile
from .conic import SolverOptions
from .conic.quantities import hypothesis_testing_blockdiag
from .divergences import (mutual_information_and_variance, relative_entropy,
                          relative_entropy_variance)
from .errors import DomainError, EmptyFreeSet, NonUniformInput, TooLarge
from .operators import (BipartiteLabel, as_matrix, fidelity, herm, kron, make_density,
                        max_classically_correlated, maximally_entangled, random_state)

PRODUCT_RELAXATION = "product-state relaxation"
UNIFORM_TOL = 1e-12
ARGMIN_TOL = 1e-9
MAX_JOINT_DIM = 4096


@dataclass(frozen=True)
class CqState:
    """rho_XB = sum_x p(x) |x><x| (x) rho_B^x."""

    probs: tuple
    conditionals: tuple  # normalized states on B
    uniform: bool

    @property
    def dim_x(self) -> int:
        return len(self.probs)

    @property
    def dim_b(self) -> int:
        return self.conditionals[0].shape[0]

    @property
    def label(self) -> BipartiteLabel:
        return BipartiteLabel(self.dim_x, self.dim_b)

    def joint(self) -> np.ndarray:
        m, db = self.dim_x, self.dim_b
        out = np.zeros((m * db, m * db), dtype=complex)
        for x, (p, c) in enumerate(zip(self.probs, self.conditionals)):
            out[x * db:(x + 1) * db, x * db:(x + 1) * db] = p * c
        return out

    def marginal_b(self) -> np.ndarray:
        return sum(p * c for p, c in zip(self.probs, self.conditionals))

    def power(self, n: int) -> "CqState":
        """The n-fold tensor power, again a cq state (classical index x^n)."""
        if n < 1:
            raise DomainError("n must be >= 1")
        probs, conds = [1.0], [np.ones((1, 1), dtype=complex)]
        for _ in range(n):
            probs = [p * q for p in probs for q in self.probs]
            conds = [np.kron(a, b) for a in conds for b in self.conditionals]
        return CqState(tuple(probs), tuple(conds), self.uniform)


def make_cq(probs, conditionals) -> CqState:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or len(p) == 0 or np.any(p < 0):
        raise DomainError("probs must be a nonempty nonnegative vector")
    if abs(p.sum() - 1.0) > UNIFORM_TOL:
        raise DomainError(f"probs sum to {p.sum()!r}, not 1")
    if len(conditionals) != len(p):
        raise DomainError("need one conditional state per classical value")
    conds = tuple(make_density(c).matrix for c in conditionals)
    if len({c.shape for c in conds}) != 1:
        raise DomainError("conditionals must share one dimension")
    uniform = bool(np.all(np.abs(p - 1.0 / len(p)) <= UNIFORM_TOL))
    return CqState(tuple(float(v) for v in p), conds, uniform)


@dataclass(frozen=True)
class RateBound:
    n: int
    eps: float
    lower_bits_per_copy: float
    upper_bits_per_copy: float
    upper_source: str = ""  # "cq" or PRODUCT_RELAXATION


def isotropic_state(d: int, p: float) -> tuple[np.ndarray, BipartiteLabel]:
    """(1 - p) Phi^d + p I / d^2."""
    if d < 2:
        raise DomainError("d must be >= 2")
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"p must lie in [0, 1], got {p}")
    rho = (1 - p) * maximally_entangled(d) + p * np.eye(d * d) / (d * d)
    return herm(rho), BipartiteLabel(d, d)


def dephase_to_cq(rho_ab, label: BipartiteLabel) -> CqState:
    """Measure A in the computational basis; conditionals are renormalized."""
    r = as_matrix(rho_ab)
    label.check(r)
    da, db = label.dim_a, label.dim_b
    probs, conds = [], []
    for x in range(da):
        block = herm(r[x * db:(x + 1) * db, x * db:(x + 1) * db])
        px = float(np.trace(block).real)
        probs.append(px)
        # an outcome that never occurs gets an arbitrary conditional
        conds.append(block / px if px > 1e-15 else np.eye(db) / db)
    total = sum(probs)
    return make_cq([p / total for p in probs], conds)


def _cq_moments(cq: CqState) -> tuple[float, float]:
    return mutual_information_and_variance(cq.joint(), cq.label)


def smooth_min_mi_cq(cq: CqState, eps: float, opts: SolverOptions | None = None) -> float:
    """I^eps_min(X;B) through the block-diagonal hypothesis test."""
    rb = cq.marginal_b()
    rho_blocks = [p * c for p, c in zip(cq.probs, cq.conditionals)]
    sigma_blocks = [p * rb for p in cq.probs]
    return hypothesis_testing_blockdiag(rho_blocks, sigma_blocks, eps, opts).value_bits


def one_shot_lower(cq: CqState, eps: float, eta: float | None = None, n: int = 1,
                   opts: SolverOptions | None = None) -> float:
    """floor(I^{eps-eta}_min(X^n;B^n) - log2(4 eps / eta^2)), total bits for n copies.

    Defaults: eta = eps/2 for one copy, eta = 1/sqrt(n) otherwise.
    """
    if not cq.uniform:
        raise NonUniformInput("the position-based bound needs a uniform classical register")
    if not (0.0 < eps < 1.0):
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if eta is None:
        eta = eps / 2 if n == 1 else 1.0 / math.sqrt(n)
    if not (0.0 < eta < eps):
        raise DomainError(f"eta must lie in (0, eps), got {eta}")
    if (cq.dim_x * cq.dim_b) ** n > MAX_JOINT_DIM:
        raise TooLarge(f"joint dimension {(cq.dim_x * cq.dim_b) ** n} exceeds {MAX_JOINT_DIM}")
    state = cq if n == 1 else cq.power(n)
    value = smooth_min_mi_cq(state, eps - eta, opts) - math.log2(4 * eps / eta ** 2)
    return value if math.isinf(value) else float(math.floor(value))


def rate_curves(source, eps: float, n_list, label: BipartiteLabel | None = None) -> list[RateBound]:
    """Two-term upper and lower rate curves.

    A CqState must be uniform and gets matching curves.  A bipartite state
    gets the product-relaxation upper curve and, after dephasing A, the
    uniform-cq lower curve.
    """
    if not (0.0 < eps < 1.0):
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if isinstance(source, CqState):
        cq = source
        if not cq.uniform:
            raise NonUniformInput("matched curves need a uniform classical register")
        i_up, v_up = _cq_moments(cq)
        upper_source = "cq"
    else:
        if label is None:
            raise DomainError("a bipartite state needs a label")
        i_up, v_up = mutual_information_and_variance(source, label)
        cq = dephase_to_cq(source, label)
        if not cq.uniform:
            raise NonUniformInput("dephased register is not uniform; no lower curve")
        upper_source = PRODUCT_RELAXATION
    i_lo, v_lo = _cq_moments(cq)
    out = []
    for n in n_list:
        lo = expansion_from_moments(i_lo, v_lo, eps, int(n)).value_per_copy
        up = expansion_from_moments(i_up, v_up, eps, int(n)).value_per_copy
        out.append(RateBound(int(n), eps, lo, up, upper_source))
    return out


def asymptotes(rho_ab, label: BipartiteLabel) -> tuple[float, float]:
    """(I(X;B) after dephasing A, I(A;B)); the first-order lower and upper lines."""
    i_ab, _ = mutual_information_and_variance(rho_ab, label)
    i_xb, _ = _cq_moments(dephase_to_cq(rho_ab, label))
    return i_xb, i_ab


@dataclass(frozen=True)
class GenericBound:
    bits_per_copy: float
    first_order: float
    variance: float
    argmin: tuple = field(default_factory=tuple)  # indices into the free set


def generic_resource_bound(rho, free_states, eps: float, n: int) -> GenericBound:
    """min_sigma D(rho||sigma) + sqrt(V/n) quantile(eps) over a finite free set.

    V is taken over the near-minimizers: inf if eps >= 1/2, sup otherwise.
    """
    if not free_states:
        raise EmptyFreeSet("free set is empty")
    if not (0.0 < eps < 1.0):
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if n < 1:
        raise DomainError("n must be >= 1")
    ds = [relative_entropy(rho, s).bits for s in free_states]
    best = min(ds)
    if math.isinf(best):
        return GenericBound(math.inf, math.inf, math.nan, ())
    idx = tuple(i for i, d in enumerate(ds) if d <= best + ARGMIN_TOL)
    vs = [relative_entropy_variance(rho, free_states[i]).bits for i in idx]
    v = min(vs) if eps >= 0.5 else max(vs)
    value = best + math.sqrt(v / n) * gaussian_quantile(eps)
    return GenericBound(value, best, v, idx)


def product_fidelity_samples(d: int, samples: int = 500, seed=0) -> np.ndarray:
    """F(max classically correlated, sigma_A (x) sigma_B) for random subnormalized products.

    Half the draws are mixed, half are pure, with traces uniform in (0, 1].
    """
    rng = np.random.default_rng(seed)
    target = max_classically_correlated(d)
    out = np.empty(samples)
    for k in range(samples):
        rank = None if k % 2 == 0 else 1
        a = random_state(d, rng, rank=rank) * rng.uniform(0.0, 1.0)
        b = random_state(d, rng, rank=rank) * rng.uniform(0.0, 1.0)
        out[k] = fidelity(target, kron(a, b))
    return out
