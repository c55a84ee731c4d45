"""Acceptance criteria, one test each.

Every test records a one-line PASS/FAIL summary, printed at the end of the
run, before asserting.
"""

import math
import time

import numpy as np
import pytest

from smoothdiv.asymptotics import f_eps_delta, g_bound, second_order
from smoothdiv.conic.quantities import hypothesis_testing, root_fidelity_sdp
from smoothdiv.divergences import d_max, d_min_f, sandwiched_renyi
from smoothdiv.figures import DEFAULT_EPS_GRID, bracket_sweep, fig3, random_pair
from smoothdiv.operators import (BipartiteLabel, apply_channel, fidelity, kron, random_channel,
                                 random_psd, random_state, root_fidelity)
from smoothdiv.oracles import binary_entropy, iid_neyman_pearson, neyman_pearson
from smoothdiv.randomness import isotropic_state, product_fidelity_samples
from smoothdiv.smoothing import (bracket_dminf, default_delta_grid, dminf_upper, seesaw_dminf_lower,
                                 smooth_dmax, smooth_hmin)

from conftest import ACCEPTANCE_LINES

SLACK = 1e-6


def report(k: int, ok: bool, detail: str) -> None:
    line = f"C{k} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def penalty(eps):
    return -math.log2(1 - eps)


def test_c1_self_saturation():
    start = time.perf_counter()
    worst_lower, worst_upper = math.inf, math.inf
    for i in range(20):
        dim = (2, 3, 4)[i % 3]
        omega = random_state(dim, 100 + i)
        for eps in (0.1, 0.5):
            b = bracket_dminf(omega, omega, eps)
            worst_lower = min(worst_lower, b.lower_bits - penalty(eps))
            worst_upper = min(worst_upper, b.upper_bits - penalty(eps))
    elapsed = time.perf_counter() - start
    ok = worst_lower >= -1e-3 and worst_upper >= -1e-6 and elapsed < 60
    report(1, ok, f"lower-log2(1/(1-eps)) >= {worst_lower:.2e}, upper >= {worst_upper:.2e}, "
                  f"{elapsed:.1f}s for 40 brackets")
    assert worst_lower >= -1e-3
    assert worst_upper >= -1e-6
    assert elapsed < 60


def test_c2_strong_duality():
    rng = np.random.default_rng(2)
    gaps = {"smooth_dmax sub": 0.0, "smooth_dmax norm": 0.0, "smooth_hmin": 0.0, "root_fidelity": 0.0,
            "hypothesis": 0.0}
    for _ in range(100):
        dim = int(rng.integers(2, 5))
        rho, sigma = random_state(dim, rng), random_psd(dim, rng)
        eps = float(rng.uniform(0.01, 0.9))
        gaps["smooth_dmax sub"] = max(gaps["smooth_dmax sub"], smooth_dmax(rho, sigma, eps).gap)
        gaps["smooth_dmax norm"] = max(gaps["smooth_dmax norm"],
                                       smooth_dmax(rho, sigma, eps, "normalized").gap)
        gaps["root_fidelity"] = max(gaps["root_fidelity"], root_fidelity_sdp(rho, sigma).gap)
        gaps["hypothesis"] = max(gaps["hypothesis"], hypothesis_testing(rho, sigma, eps).gap)
        rho_ab = random_state(4, rng)
        gaps["smooth_hmin"] = max(gaps["smooth_hmin"],
                                  smooth_hmin(rho_ab, BipartiteLabel(2, 2), float(rng.uniform(0.01, 0.9))).gap)
    worst = max(gaps.values())
    report(2, worst <= 1e-6, "max relative gaps " + ", ".join(f"{k} {v:.1e}" for k, v in gaps.items()))
    for k, v in gaps.items():
        assert v <= 1e-6, k


def test_c3_fidelity_cross_check():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        dim = int(rng.integers(2, 5))
        a, b = random_psd(dim, rng), random_psd(dim, rng)
        want = root_fidelity(a, b)
        res = root_fidelity_sdp(a, b)
        worst = max(worst, abs(res.primal - want), abs(res.dual - want))
    report(3, worst <= 1e-7, f"max |SDP - spectral| root fidelity {worst:.1e} over 100 pairs")
    assert worst <= 1e-7


def test_c4_neyman_pearson():
    rng = np.random.default_rng(4)
    worst = 0.0
    for i in range(200):
        m = int(rng.integers(2, 7))
        p = rng.dirichlet(np.ones(m))
        q = rng.dirichlet(np.ones(m)) * rng.uniform(0.2, 1.0)
        if i % 4 == 0:  # some zero masses
            q[rng.integers(m)] = 0.0
            if not np.any(q[p > 0] > 0):
                continue
        eps = float(rng.uniform(0.0, 0.95))
        want, _ = neyman_pearson(p, q, eps)
        got = hypothesis_testing(np.diag(p), np.diag(q), eps).value_bits
        err = 0.0 if got == want else abs(got - want)  # both +inf counts as agreement
        worst = max(worst, err)
    report(4, worst <= 1e-6, f"max |SDP - Neyman-Pearson| {worst:.1e} bits over 200 instances")
    assert worst <= 1e-6


def test_c5_second_order_convergence():
    start = time.perf_counter()
    p, q = [0.5, 0.5], [0.9, 0.1]
    residual_ok, bounded_ok, rows = True, True, []
    for eps in (0.2, 0.8):
        def residual(n):
            exact = iid_neyman_pearson(p, q, n, eps) / n
            return abs(exact - second_order(np.diag(p), np.diag(q), eps, n, "hypothesis").value_per_copy)

        c = residual(200) * 200 / math.log2(200)
        for n in (500, 1000, 2000):
            r = residual(n)
            scaled = r * n / math.log2(n)
            residual_ok &= r <= 0.02
            bounded_ok &= scaled <= c
            rows.append(f"eps={eps} n={n} r={r:.4f} r*n/log2n={scaled:.4f} (C={c:.4f})")
    elapsed = time.perf_counter() - start
    ok = residual_ok and bounded_ok and elapsed < 120
    report(5, ok, f"residual<=0.02 {residual_ok}, scaled residual<=C(200) {bounded_ok}; " + "; ".join(rows))
    assert residual_ok
    assert elapsed < 120
    assert bounded_ok


class Draw:
    """Bracket pieces for one random instance, with cheap but valid settings."""

    RESTARTS = 2
    POINTS = 10

    def __init__(self, seed):
        rng = np.random.default_rng(seed)
        self.rng = rng
        self.rho = random_state(2, rng)
        self.sigma = random_psd(2, rng)
        self.channel = random_channel(2, rng)
        self.eps = float(rng.uniform(0.05, 0.7))

    def lower(self, rho, sigma, eps, warm=None):
        res, _ = seesaw_dminf_lower(rho, sigma, eps, restarts=self.RESTARTS, warm_start=warm)
        return res

    def upper(self, rho, sigma, eps):
        return dminf_upper(rho, sigma, eps, default_delta_grid(eps, self.POINTS)).upper_bits


def bracket_property_slacks(seed) -> dict:
    d = Draw(seed)
    rho, sigma, eps, rng = d.rho, d.sigma, d.eps, d.rng
    base = d.lower(rho, sigma, eps)
    up = d.upper(rho, sigma, eps)
    s = {}

    c = float(rng.uniform(0.2, 5.0))
    witness = base.witness_state.matrix
    shifted = -math.log2(fidelity(witness, c * sigma))
    s["scaling"] = -abs(shifted - (base.value_bits - math.log2(c)))
    rescaled = d.lower(rho, c * sigma, eps, warm=witness)
    s["scaling"] = min(s["scaling"], rescaled.value_bits - (base.value_bits - math.log2(c)),
                       up - math.log2(c) - rescaled.value_bits)

    eps2 = eps + float(rng.uniform(0, 1)) * (0.95 - eps)
    s["monotone_eps"] = d.upper(rho, sigma, eps2) - base.value_bits

    rho2, sigma2 = random_state(2, rng), random_psd(2, rng)
    e2 = float(rng.uniform(0.05, 0.5))
    joint = d.upper(kron(rho, rho2), kron(sigma, sigma2), eps + e2 - eps * e2)
    s["superadditive"] = joint - base.value_bits - d.lower(rho2, sigma2, e2).value_bits

    state = sigma / np.trace(sigma).real
    s["nonnegative"] = d.upper(rho, state, eps) - penalty(eps)

    bigger = sigma + random_psd(2, rng)
    s["anti_monotone"] = up - d.lower(rho, bigger, eps).value_bits

    zero = up - d_min_f(rho, sigma).bits
    if eps <= fidelity(rho, state):
        zero = min(zero, g_bound(eps, rho, sigma) - base.value_bits)
    s["zero_error"] = zero

    out_r, out_s = apply_channel(d.channel, rho), apply_channel(d.channel, sigma)
    s["data_processing"] = up - d.lower(out_r, out_s, eps).value_bits

    other = random_psd(2, rng)
    w = float(rng.uniform(0, 1))
    mix = w * sigma + (1 - w) * other
    s["convexity"] = w * up + (1 - w) * d.upper(rho, other, eps) - d.lower(rho, mix, eps).value_bits
    return s


def test_c6_bracket_properties():
    worst = {}
    for seed in range(100):
        for k, v in bracket_property_slacks(6000 + seed).items():
            worst[k] = min(worst.get(k, math.inf), v)
    ok = len(worst) == 8 and min(worst.values()) >= -SLACK
    report(6, ok, "min slack " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    assert len(worst) == 8
    for k, v in worst.items():
        assert v >= -SLACK, k


def cross_slacks(seed) -> dict:
    d = Draw(seed)
    rho, sigma, eps, rng = d.rho, d.sigma, d.eps, d.rng
    lower = d.lower(rho, sigma, eps).value_bits
    upper = d.upper(rho, sigma, eps)
    beta = float(rng.uniform(1.05, 3.0))
    delta = float(rng.uniform(0.01, 0.99)) * (1 - eps)
    dm = smooth_dmax(rho, sigma, 1 - eps - delta)
    dh = hypothesis_testing(rho, sigma, eps).value_bits
    return {
        "renyi_above": sandwiched_renyi(rho, sigma, beta).bits + beta / (beta - 1) * penalty(eps) - lower,
        "smooth_dmax_above": dm.value_bits - math.log2(1 - f_eps_delta(eps, delta)) - lower,
        "hypothesis_below_upper": upper + penalty(eps) - dh,
        "hypothesis_squared_eps": d.upper(rho, sigma, eps * (2 - eps)) - dh,
        "dmax_penalty": d_max(rho, sigma).bits + penalty(eps) - lower,
    }


def test_c7_cross_quantity():
    worst = {}
    for seed in range(100):
        for k, v in cross_slacks(7000 + seed).items():
            worst[k] = min(worst.get(k, math.inf), v)
    ok = min(worst.values()) >= -SLACK
    report(7, ok, "min slack " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    for k, v in worst.items():
        assert v >= -SLACK, k


def test_c8_fig3():
    rows = fig3()
    lower_line = 1 - binary_entropy(0.15)
    rho, _ = isotropic_state(2, 0.3)
    w = np.linalg.eigvalsh(rho)
    # I(A;B) = H(A) + H(B) - H(AB) with maximally mixed marginals
    upper_line = 2.0 + float(np.sum(w * np.log2(w)))
    lo = [r["lower_curve"] for r in rows]
    ns = [r["n"] for r in rows]
    checks = {
        "lower asymptote": abs(rows[0]["lower_asymptote"] - lower_line) <= 1e-6,
        "upper asymptote": abs(rows[0]["upper_asymptote"] - upper_line) <= 1e-6,
        "increasing": all(a < b for a, b in zip(lo, lo[1:])),
        "below asymptote": all(v < lower_line for v in lo),
        "range": ns[0] == 100 and ns[-1] == 10**6,
    }
    ok = all(checks.values())
    report(8, ok, f"lower {rows[0]['lower_asymptote']:.6f} (want {lower_line:.6f}), "
                  f"upper {rows[0]['upper_asymptote']:.6f} (want {upper_line:.6f}), "
                  + ", ".join(f"{k} {v}" for k, v in checks.items()))
    assert ok, checks


def test_c9_bracket_sweeps():
    start = time.perf_counter()
    worst_order, worst_mono = math.inf, math.inf
    for dim, seed in ((2, 4), (4, 5)):
        rows = bracket_sweep(*random_pair(dim, seed), DEFAULT_EPS_GRID)
        worst_order = min(worst_order, min(r["upper"] - r["lower"] for r in rows))
        lo = [r["lower"] for r in rows]
        worst_mono = min(worst_mono, min(b - a for a, b in zip(lo, lo[1:])))
    elapsed = time.perf_counter() - start
    ok = worst_order >= 0 and worst_mono >= -1e-4 and elapsed < 600
    report(9, ok, f"min(upper-lower) {worst_order:.2e}, min lower step {worst_mono:.2e}, {elapsed:.1f}s")
    assert worst_order >= 0
    assert worst_mono >= -1e-4
    assert elapsed < 600


def test_c10_product_fidelity():
    maxima = {d: float(product_fidelity_samples(d, 500, seed=d).max()) for d in (2, 3, 4)}
    ok = all(v <= 1 / d + 1e-9 for d, v in maxima.items())
    report(10, ok, "max F " + ", ".join(f"d={d} {v:.4f} (<= {1 / d:.4f})" for d, v in maxima.items()))
    assert ok
