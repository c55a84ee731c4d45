import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from smoothdiv.asymptotics import second_order
from smoothdiv.divergences import d_min_f
from smoothdiv.errors import DomainError, TooLarge
from smoothdiv.operators import random_state
from smoothdiv.oracles import (ClassicalDistribution, binary_entropy, diag_fidelity, iid_neyman_pearson,
                               multistart_dminf, neyman_pearson, shannon_entropy)

P, Q = [0.5, 0.5], [0.9, 0.1]


def lp_vertices(p, q, eps):
    """min q.t s.t. p.t >= 1 - eps, 0 <= t <= 1, by enumerating vertices."""
    m = len(p)
    best = math.inf
    for k in range(m + 1):
        for ones in combinations(range(m), k):
            base = sum(p[i] for i in ones)
            cost = sum(q[i] for i in ones)
            if base >= 1 - eps - 1e-15:
                best = min(best, cost)
            for j in range(m):
                if j in ones or p[j] == 0:
                    continue
                t = (1 - eps - base) / p[j]
                if 0 <= t <= 1:
                    best = min(best, cost + t * q[j])
    return best


class TestNeymanPearson:
    @given(st.integers(0, 10**6), st.floats(0, 0.99))
    def test_equal(self, seed, eps):
        p = np.random.default_rng(seed).dirichlet(np.ones(4))
        assert neyman_pearson(p, p, eps)[0] == pytest.approx(-math.log2(1 - eps), abs=1e-12)

    def test_example(self):
        bits, test = neyman_pearson(P, Q, 0.5)
        assert bits == pytest.approx(math.log2(10))
        assert np.allclose(test, [0.0, 1.0])

    def test_zero_eps_support(self):
        p, q = [0.6, 0.4, 0.0], [0.2, 0.3, 0.5]
        assert neyman_pearson(p, q, 0.0)[0] == pytest.approx(-math.log2(0.5))

    @given(st.integers(0, 10**6), st.integers(1, 3), st.floats(0, 0.99))
    def test_vertex_enumeration(self, seed, m, eps):
        rng = np.random.default_rng(seed)
        p, q = rng.dirichlet(np.ones(m)), rng.dirichlet(np.ones(m))
        bits, test = neyman_pearson(p, q, eps)
        assert 2 ** -bits == pytest.approx(lp_vertices(p, q, eps), rel=1e-12, abs=1e-15)
        assert test @ p >= 1 - eps - 1e-12
        assert np.all((test >= 0) & (test <= 1))

    def test_ties_merged(self):
        bits, test = neyman_pearson([0.25] * 4, [0.25] * 4, 0.5)
        assert bits == pytest.approx(1.0)
        assert np.allclose(test, 0.5)

    def test_zero_q_not_merged(self):
        bits, test = neyman_pearson([0.6, 0.4], [0.0, 0.5], 0.3)
        assert bits == pytest.approx(3.0)
        assert np.allclose(test, [1.0, 0.25])
        assert neyman_pearson([0.6, 0.4], [0.0, 0.5], 0.5)[0] == math.inf

    @given(st.integers(0, 10**6), st.integers(2, 4), st.floats(0, 0.99))
    def test_vertex_enumeration_zero_q(self, seed, m, eps):
        rng = np.random.default_rng(seed)
        p, q = rng.dirichlet(np.ones(m)), rng.dirichlet(np.ones(m))
        q[rng.integers(m)] = 0.0
        bits, _ = neyman_pearson(p, q, eps)
        assert 2 ** -bits == pytest.approx(lp_vertices(p, q, eps), rel=1e-12, abs=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            neyman_pearson([0.5, 0.4], [0.5, 0.5], 0.1)
        with pytest.raises(DomainError):
            neyman_pearson(P, Q, 1.0)
        with pytest.raises(DomainError):
            ClassicalDistribution(())
        with pytest.raises(DomainError):
            ClassicalDistribution((-0.1, 1.1))


class TestIidNeymanPearson:
    @given(st.floats(0, 0.99))
    def test_single_copy(self, eps):
        assert iid_neyman_pearson(P, Q, 1, eps) == pytest.approx(neyman_pearson(P, Q, eps)[0], abs=1e-12)

    def test_two_copies(self):
        # classes by likelihood ratio: (1,1) 25, mixed 25/9, (0,0) 25/81
        want = -math.log2(0.01 + 0.18 + 0.6 * 0.81)
        assert iid_neyman_pearson(P, Q, 2, 0.1) == pytest.approx(want, abs=1e-12)
        assert want == pytest.approx(0.56490484838, abs=1e-10)

    def test_matches_product_enumeration(self):
        p, q = [0.2, 0.3, 0.5], [0.5, 0.25, 0.25]
        pp, qq = np.kron(np.kron(p, p), p), np.kron(np.kron(q, q), q)
        assert iid_neyman_pearson(p, q, 3, 0.15) == pytest.approx(neyman_pearson(pp, qq, 0.15)[0], abs=1e-10)

    def test_residual_trend(self):
        res = {}
        for n in (200, 2000):
            exact = iid_neyman_pearson(P, Q, n, 0.2) / n
            res[n] = abs(exact - second_order(np.diag(P), np.diag(Q), 0.2, n, "hypothesis").value_per_copy)
        assert res[2000] < res[200]

    def test_too_large(self):
        with pytest.raises(TooLarge):
            iid_neyman_pearson(P, Q, 5001, 0.1)
        with pytest.raises(TooLarge):
            iid_neyman_pearson([0.2, 0.3, 0.5], [0.5, 0.25, 0.25], 13, 0.1)


class TestFormulas:
    def test_entropies(self):
        assert binary_entropy(0.5) == pytest.approx(1.0)
        assert binary_entropy(0.0) == 0.0
        assert shannon_entropy([0.25] * 4) == pytest.approx(2.0)

    def test_fidelity(self):
        assert diag_fidelity(P, Q) == pytest.approx(0.8)


class TestMultistart:
    def test_self_smoothing(self):
        rho = random_state(3, 4)
        val = multistart_dminf(rho, rho, 0.3, samples=16)
        assert val <= math.log2(1 / 0.7) + 1e-9
        assert val == pytest.approx(math.log2(1 / 0.7), abs=1e-3)

    def test_single_sample(self):
        rho, sigma = random_state(2, 1), random_state(2, 2)
        val = multistart_dminf(rho, sigma, 0.2, samples=1, polish=0)
        assert val == pytest.approx(d_min_f(rho, sigma).bits - math.log2(0.8), abs=1e-12)

    @given(st.integers(0, 10**6))
    def test_above_dminf(self, seed):
        rng = np.random.default_rng(seed)
        rho, sigma = random_state(2, rng), random_state(2, rng)
        assert multistart_dminf(rho, sigma, 0.2, samples=4, polish=1) >= d_min_f(rho, sigma).bits - 1e-9

    def test_domain(self):
        with pytest.raises(DomainError):
            multistart_dminf(np.eye(2) / 2, np.eye(2), 0.1, samples=0)
