import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from smoothdiv.conic import Affine, Program, RawResult, SolverOptions, bmat, kron, partial_trace, solve
from smoothdiv.conic.program import embed, hermitian_basis, smat, svec, unembed_dual
from smoothdiv.conic.quantities import (clip_effect, hypothesis_testing, hypothesis_testing_blockdiag,
                                        root_fidelity_sdp, smooth_min_mutual_info)
from smoothdiv.conic.solve import relative_gap
from smoothdiv.errors import DomainError, ModelError, SolverFailure
from smoothdiv.operators import (BipartiteLabel, fidelity, max_classically_correlated, random_psd,
                                 random_state)
from smoothdiv.operators import kron as okron
from smoothdiv.operators import partial_trace as optrace
from smoothdiv.oracles import neyman_pearson

seeds = st.integers(0, 10**6)


def herm_random(rng, n):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (g + g.conj().T) / 2


class TestEmbedding:
    @given(seeds, st.integers(1, 4))
    def test_spectrum_doubled(self, seed, n):
        m = herm_random(np.random.default_rng(seed), n)
        w = np.linalg.eigvalsh(m)
        assert np.allclose(np.linalg.eigvalsh(embed(m)), np.sort(np.repeat(w, 2)), atol=1e-10)

    @given(seeds, st.integers(1, 5))
    def test_svec_isometry(self, seed, n):
        rng = np.random.default_rng(seed)
        a, b = rng.standard_normal((n, n)), rng.standard_normal((n, n))
        a, b = a + a.T, b + b.T
        assert svec(a) @ svec(b) == pytest.approx(np.trace(a @ b))
        assert np.allclose(smat(svec(a), n), a)

    @given(seeds, st.integers(1, 4))
    def test_dual_unembedding(self, seed, n):
        rng = np.random.default_rng(seed)
        z = rng.standard_normal((2 * n, 2 * n))
        z = z + z.T
        m = herm_random(rng, n)
        lhs = np.sum(z * embed(m))
        assert lhs == pytest.approx(2 * np.real(np.trace(unembed_dual(z) @ m)), abs=1e-9)

    def test_hermitian_basis_size(self):
        assert hermitian_basis(3).shape == (9, 9)
        assert np.linalg.matrix_rank(hermitian_basis(3)) == 9


class TestAffine:
    def values(self, rng, n):
        p = Program()
        x = p.hermitian("X", n)
        vals = {"X": rng.standard_normal(n * n)}
        return x, vals, x.evaluate(vals)

    def test_algebra(self, rng):
        x, vals, xm = self.values(rng, 2)
        c = herm_random(rng, 2)
        e = (2 * x - c) @ c + c @ x / 3
        assert np.allclose(e.evaluate(vals), (2 * xm - c) @ c + c @ xm / 3)
        assert np.allclose(x.H.evaluate(vals), xm.conj().T)
        assert x.trace().evaluate(vals)[0, 0] == pytest.approx(np.trace(xm))

    def test_kron_and_partial_trace(self, rng):
        x, vals, xm = self.values(rng, 2)
        c = herm_random(rng, 3)
        assert np.allclose(kron(x, c).evaluate(vals), okron(xm, c))
        assert np.allclose(kron(c, x).evaluate(vals), okron(c, xm))
        big = kron(x, c)
        label = BipartiteLabel(2, 3)
        for keep in ("A", "B"):
            assert np.allclose(partial_trace(big, 2, 3, keep).evaluate(vals), optrace(okron(xm, c), label, keep))

    def test_bmat(self, rng):
        x, vals, xm = self.values(rng, 2)
        e = bmat([[x, np.eye(2)], [np.eye(2), x]])
        want = np.block([[xm, np.eye(2)], [np.eye(2), xm]])
        assert np.allclose(e.evaluate(vals), want)


class TestProgram:
    def test_lambda_max(self, rng):
        a = herm_random(rng, 3)
        p = Program("lmax")
        t = p.scalar("t")
        p.psd(t * np.eye(3) - a, "t I >= A")
        p.minimize(t)
        sol = solve(p).require()
        assert sol.primal_value == pytest.approx(np.linalg.eigvalsh(a)[-1], abs=1e-7)
        assert sol.gap <= 1e-6

    def test_dual_multiplier(self, rng):
        # min Tr[X C] s.t. X >= 0, Tr X = 1: optimum lambda_min, dual of X >= 0 is C - lambda_min I
        c = herm_random(rng, 2)
        p = Program()
        x = p.hermitian("X", 2)
        p.psd(x, "X>=0")
        p.eq(x.trace(), 1.0)
        p.minimize((x @ c).trace())
        sol = solve(p).require()
        lmin = np.linalg.eigvalsh(c)[0]
        assert sol.primal_value == pytest.approx(lmin, abs=1e-7)
        assert np.allclose(sol.duals["X>=0"], c - lmin * np.eye(2), atol=1e-6)

    def test_infeasible(self):
        p = Program()
        t = p.scalar("t")
        p.ge(t, 1.0)
        p.le(t, 0.0)
        p.minimize(t)
        sol = solve(p)
        assert sol.status == "infeasible"
        with pytest.raises(SolverFailure):
            sol.require()

    def test_unbounded(self):
        p = Program()
        t = p.scalar("t")
        p.le(t, 0.0)
        p.minimize(t)
        assert solve(p).status == "unbounded"

    def test_model_errors(self):
        p = Program()
        x = p.matrix("X", 2, 2)
        with pytest.raises(ModelError):
            p.psd(x, "not hermitian")
        with pytest.raises(ModelError):
            p.minimize(x)
        q = Program()
        with pytest.raises(ModelError):
            q.psd(x, "foreign")
        with pytest.raises(ModelError):
            Program().compile()

    def test_to_json(self):
        p = Program("dump")
        t = p.scalar("t")
        p.ge(t, 1.0)
        p.minimize(t)
        doc = json.loads(p.to_json())
        assert doc["name"] == "dump"
        assert doc["cones"] == [["nonneg", 1]]


class FakeBackend:
    def __init__(self, status="inaccurate", crash=False):
        self.status, self.crash = status, crash

    def solve(self, program, opts):
        if self.crash:
            raise SolverFailure("backend crashed")
        n = len(program.q)
        return RawResult(self.status, np.zeros(n), np.zeros(len(program.b)), 0.0, 0.0, 3, "Fake")


class TestBackendSeam:
    def program(self):
        p = Program()
        t = p.scalar("t")
        p.ge(t, 1.0)
        p.minimize(t)
        return p

    def test_status_passthrough(self):
        sol = solve(self.program(), backend=FakeBackend("inaccurate"))
        assert sol.status == "inaccurate"
        assert not sol.ok

    def test_crash(self):
        with pytest.raises(SolverFailure):
            solve(self.program(), backend=FakeBackend(crash=True))

    def test_almost_checked_independently(self):
        # an "almost solved" point that violates t >= 1 is not accepted
        sol = solve(self.program(), backend=FakeBackend("almost"))
        assert sol.status == "inaccurate"
        assert sol.lmi_violation == pytest.approx(1.0)

    def test_gap(self):
        assert relative_gap(1.0, 1.0) == 0.0
        assert relative_gap(1.0, 0.0) == pytest.approx(0.5)


class TestRootFidelity:
    @given(seeds, st.integers(1, 4))
    def test_matches_spectral(self, seed, n):
        rng = np.random.default_rng(seed)
        a, b = random_psd(n, rng), random_psd(n, rng)
        res = root_fidelity_sdp(a, b)
        assert res.primal == pytest.approx(math.sqrt(fidelity(a, b)), abs=1e-7)
        assert res.gap <= 1e-6

    def test_witness_feasible(self):
        a, b = random_state(2, 1), random_state(2, 2)
        res = root_fidelity_sdp(a, b)
        block = np.block([[a, res.X], [res.X.conj().T, b]])
        assert np.linalg.eigvalsh(block)[0] >= -1e-7

    @given(seeds, st.integers(1, 4))
    def test_dual_witness_certifies(self, seed, n):
        rng = np.random.default_rng(seed)
        a, b = random_psd(n, rng), random_psd(n, rng)
        res = root_fidelity_sdp(a, b)
        block = np.block([[res.Y, np.eye(n)], [np.eye(n), res.Z]])
        bound = np.real(np.trace(res.Y @ a) + np.trace(res.Z @ b)) / 2
        assert np.linalg.eigvalsh(block)[0] >= -1e-9 * max(1.0, np.abs(block).max())
        assert bound == pytest.approx(res.dual, abs=1e-12)
        assert res.dual >= math.sqrt(fidelity(a, b)) - 1e-9
        assert res.dual == pytest.approx(math.sqrt(fidelity(a, b)), abs=1e-7)


class TestHypothesisTesting:
    def test_equal_states(self):
        rho = random_state(3, 4)
        assert hypothesis_testing(rho, rho, 0.25).value_bits == pytest.approx(math.log2(1 / 0.75), abs=1e-7)

    def test_classical_example(self):
        # the optimal test puts full weight on the second outcome
        res = hypothesis_testing(np.diag([0.5, 0.5]), np.diag([0.9, 0.1]), 0.5)
        assert res.value_bits == pytest.approx(math.log2(10), abs=1e-6)

    @given(seeds, st.integers(2, 6), st.floats(0.0, 0.95))
    def test_matches_neyman_pearson(self, seed, m, eps):
        rng = np.random.default_rng(seed)
        p, q = rng.dirichlet(np.ones(m)), rng.dirichlet(np.ones(m))
        res = hypothesis_testing(np.diag(p), np.diag(q), eps)
        assert res.value_bits == pytest.approx(neyman_pearson(p, q, eps)[0], abs=1e-6)

    @given(seeds, st.floats(0.0, 0.9))
    def test_witness_valid(self, seed, eps):
        rng = np.random.default_rng(seed)
        rho, sigma = random_state(3, rng), random_psd(3, rng)
        res = hypothesis_testing(rho, sigma, eps)
        w = np.linalg.eigvalsh(res.witness)
        assert w[0] >= -1e-12 and w[-1] <= 1 + 1e-12
        assert np.trace(res.witness @ rho).real >= 1 - eps - 1e-6
        assert res.gap <= 1e-6

    def test_blockdiag_matches_full(self):
        rng = np.random.default_rng(8)
        r1, r2 = 0.4 * random_state(2, rng), 0.6 * random_state(2, rng)
        s1, s2 = random_psd(2, rng), random_psd(2, rng)
        full = hypothesis_testing(np.block([[r1, np.zeros((2, 2))], [np.zeros((2, 2)), r2]]),
                                  np.block([[s1, np.zeros((2, 2))], [np.zeros((2, 2)), s2]]), 0.2)
        blocks = hypothesis_testing_blockdiag([r1, r2], [s1, s2], 0.2)
        assert blocks.value_bits == pytest.approx(full.value_bits, abs=1e-6)

    def test_bad_eps(self):
        with pytest.raises(DomainError):
            hypothesis_testing(np.eye(2) / 2, np.eye(2), 1.0)

    def test_clip_effect(self):
        w = np.linalg.eigvalsh(clip_effect(np.diag([-0.2, 0.5, 1.3])))
        assert np.allclose(w, [0.0, 0.5, 1.0])


class TestSmoothMinMutualInfo:
    def test_shared_bit(self):
        # diagonal Neyman-Pearson oracle on (1/2, 0, 0, 1/2) vs uniform, eps = 0.1
        got = smooth_min_mutual_info(max_classically_correlated(2), BipartiteLabel(2, 2), 0.1)
        assert got == pytest.approx(1.152003093445, abs=1e-6)

    def test_product_state(self):
        rho = okron(random_state(2, 1), random_state(2, 2))
        got = smooth_min_mutual_info(rho, BipartiteLabel(2, 2), 0.2)
        assert got == pytest.approx(math.log2(1 / 0.8), abs=1e-6)
