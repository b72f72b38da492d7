import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amcmc import exact, replicated
from amcmc.core import FiniteDistribution, KernelMatrix, WeightFunction, tv_distance
from amcmc.errors import (BudgetError, DimensionError, DomainError,
                          StructureError)
from amcmc.models import random_kernel, two_state_kernel
from amcmc.samplers import Algorithm


class TestStationary:
    @given(st.integers(2, 7), st.integers(0, 10_000))
    @settings(max_examples=50, deadline=None)
    def test_agrees_with_power_iteration(self, size, seed):
        K = random_kernel(size, np.random.default_rng(seed))
        pi = exact.stationary_distribution(K)
        v = np.full(size, 1.0 / size)
        for _ in range(3000):
            v = v @ K.rows
        assert np.abs(pi.probs - v).max() < 1e-10

    def test_reducible_rejected(self):
        with pytest.raises(StructureError):
            exact.stationary_distribution(KernelMatrix(np.eye(3)))


class TestTwoStateClosedForms:
    def test_spectrum_and_stationary(self):
        aux = exact.TwoStateAux(a=0.2, b=0.5)
        eig = np.sort(np.linalg.eigvals(aux.kernel.rows).real)
        assert eig[-1] == pytest.approx(1.0)
        assert eig[0] == pytest.approx(1 - 0.2 - 0.5)
        # P(Y = -1) = a / (a + b) in stationarity
        assert aux.stationary[1] == pytest.approx(0.2 / 0.7)
        assert exact.stationary_distribution(aux.kernel).probs == pytest.approx(
            aux.stationary.probs)

    @pytest.mark.parametrize("a,b", [(1 / 3, 1 / 3), (0.2, 0.5), (0.7, 0.1)])
    def test_cesaro_gap_matches_direct_average(self, a, b):
        aux = exact.TwoStateAux(a=a, b=b, y0=-1)
        # direct Cesaro average of P(Y_k = -1) - pi_Y(-1), k = 1..n
        v = np.array([0.0, 1.0])
        acc = 0.0
        for n in range(1, 60):
            v = v @ aux.kernel.rows
            acc += v[1] - aux.stationary[1]
            assert exact.cesaro_gap(aux, n) == pytest.approx(acc / n, abs=1e-14)

    def test_cesaro_gap_guards(self):
        with pytest.raises(DomainError):
            exact.cesaro_gap(exact.TwoStateAux(a=0.3, b=0.3, y0=+1), 5)
        with pytest.raises(StructureError):
            exact.cesaro_gap(exact.TwoStateAux(a=0.5, b=0.5), 5)


class TestPiTheta:
    @given(st.integers(2, 6), st.integers(0, 10_000),
           st.sampled_from([0.1, 0.5, 0.9]))
    @settings(max_examples=40, deadline=None)
    def test_invariance(self, size, seed, eps):
        rng = np.random.default_rng(seed)
        P = random_kernel(size, rng)
        theta = FiniteDistribution.from_weights(rng.random(size) + 0.05)
        pt = exact.pi_theta(P, theta, eps)
        Pt = exact.p_theta_kernel(P, theta, eps)
        assert np.abs(pt.probs @ Pt.rows - pt.probs).sum() < 1e-10

    def test_eps_zero_rejected(self):
        P = two_state_kernel(0.3, 0.4)
        theta = FiniteDistribution(np.array([0.5, 0.5]))
        with pytest.raises(DomainError):
            exact.pi_theta(P, theta, 0.0)

    def test_geometric_mixing_bound(self):
        rng = np.random.default_rng(0)
        P = random_kernel(3, rng)
        theta = FiniteDistribution.from_weights(rng.random(3) + 0.05)
        for eps in (0.2, 0.6):
            for n in (1, 5, 15):
                for x in range(3):
                    tv = exact.geometric_mixing_check(P, theta, eps, x, n)
                    assert tv <= 2 * (1 - eps) ** n + 1e-10


class TestKThetaExact:
    def test_rows_and_reversibility(self):
        rng = np.random.default_rng(1)
        pi = FiniteDistribution.from_weights(rng.random(4) + 0.1)
        pi_y = FiniteDistribution.from_weights(rng.random(4) + 0.1)
        w = WeightFunction.ratio(pi, pi_y)
        K = exact.k_theta_exact(pi_y, w)
        # theta = pi_Y makes the jump kernel pi-reversible, hence pi-invariant
        flow = pi.probs[:, None] * K.rows
        assert np.abs(flow - flow.T).max() < 1e-14
        assert np.abs(pi.probs @ K.rows - pi.probs).sum() < 1e-14

    def test_zero_weight_rejected(self):
        theta = FiniteDistribution(np.array([0.5, 0.5]))
        with pytest.raises(DomainError):
            exact.k_theta_exact(theta, WeightFunction(values=[0.0, 1.0]))


class TestJointChainClosedForm:
    def test_counterexample_values(self):
        aux = exact.TwoStateAux(a=1 / 3, b=1 / 3)
        pi_x = FiniteDistribution(np.array([2 / 3, 1 / 3]))
        K = exact.ee_joint_kernel(aux, pi_x)
        solved = exact.stationary_distribution(K)
        assert solved.probs == pytest.approx([3 / 8, 1 / 4, 1 / 8, 1 / 4],
                                             abs=1e-12)
        marg = exact.joint_x_marginal(solved)
        assert marg.probs == pytest.approx([5 / 8, 3 / 8], abs=1e-12)

    @given(st.floats(0.1, 0.9), st.floats(0.1, 0.9),
           st.floats(0.05, 1.0), st.floats(0.05, 1.0))
    @settings(max_examples=60, deadline=None)
    def test_closed_form_matches_solve(self, a, b, c, d):
        K = exact.joint_kernel_from_rates(a, b, c, d)
        closed = exact.joint_stationary_closed_form(a, b, c, d)
        solved = exact.stationary_distribution(K)
        assert np.abs(closed.probs - solved.probs).max() < 1e-10


class TestEtaOracle:
    def test_eta_zero_is_point_mass(self):
        P = two_state_kernel(0.3, 0.4)
        eta = exact.eta_oracle(P, 1, WeightFunction.uniform(2), 0)
        assert eta.probs == pytest.approx([0.0, 1.0])

    def test_uniform_weight_matches_cesaro_shortcut(self):
        rng = np.random.default_rng(2)
        P = random_kernel(3, rng)
        w = WeightFunction.uniform(3)
        shortcut = exact.eta_sequence_uniform(P, 0, 8)
        for n in range(9):
            brute = exact.eta_oracle(P, 0, w, n)
            assert np.abs(brute.probs - shortcut[n].probs).max() < 1e-12

    def test_budget_error(self):
        P = random_kernel(4, np.random.default_rng(0))
        with pytest.raises(BudgetError):
            exact.eta_oracle(P, 0, WeightFunction.uniform(4), 30)


class TestExactIrmcmcLaw:
    def model(self):
        aux = two_state_kernel(0.35, 0.2)
        pi_y = exact.stationary_distribution(aux)
        pi = FiniteDistribution.from_weights(np.array([1.5, 0.8]) * pi_y.probs)
        P = random_kernel(2, np.random.default_rng(4))
        # force P stationary for pi via Metropolis
        from amcmc.models import metropolis_kernel
        P = metropolis_kernel(pi, P)
        w = WeightFunction.ratio(pi, pi_y)
        return aux, P, pi, pi_y, w

    def test_recursion_matches_unrolled_mixture(self):
        aux, P, pi, pi_y, w = self.model()
        eps, n = 0.3, 7
        etas = exact.eta_sequence(aux, 1, w, n - 1)
        law = exact.exact_irmcmc_law(P, eps, etas, 0, n)
        # unrolled: (1-eps)^n delta P^n + sum_k eps (1-eps)^{n-k} eta_{k-1} P^{n-k}
        v = (1 - eps) ** n * exact.propagate(
            FiniteDistribution.point_mass(0, 2), P, n).probs
        for k in range(1, n + 1):
            v = v + eps * (1 - eps) ** (n - k) * exact.propagate(
                etas[k - 1], P, n - k).probs
        assert np.abs(law.probs - v).max() < 1e-12

    def test_eps_to_one_limit_is_eta(self):
        aux, P, pi, pi_y, w = self.model()
        n = 5
        etas = exact.eta_sequence(aux, 1, w, n - 1)
        law = exact.exact_irmcmc_law(P, 1 - 1e-10, etas, 0, n)
        assert np.abs(law.probs - etas[n - 1].probs).max() < 1e-8

    def test_missing_etas_rejected(self):
        aux, P, pi, pi_y, w = self.model()
        etas = exact.eta_sequence(aux, 1, w, 2)
        with pytest.raises(DimensionError):
            exact.exact_irmcmc_law(P, 0.3, etas, 0, 10)

    def test_example_identity_tv_equals_eps_gap(self):
        # P(x,.) = pi, w == 1, a = b = 1/3: TV(L(X_{n+1}), pi) = eps |gap(n)|
        aux = exact.TwoStateAux(a=1 / 3, b=1 / 3, y0=-1)
        pi = FiniteDistribution(np.array([0.5, 0.5]))
        from amcmc.models import identity_kernel
        P = identity_kernel(pi)
        eps = 0.3
        etas = exact.eta_sequence_uniform(aux.kernel, aux.y0_index, 40)
        for n in (1, 5, 12, 33):
            law = exact.exact_irmcmc_law(P, eps, etas, 0, n + 1)
            assert tv_distance(law, pi) == pytest.approx(
                eps * abs(exact.cesaro_gap(aux, n)), abs=1e-12)

    def test_against_monte_carlo_marginal(self):
        # 1e6-replica Monte Carlo marginal at n = 8 on a 2-state model
        aux, P, pi, pi_y, w = self.model()
        eps, n, R = 0.4, 8, 1_000_000
        from amcmc.models import FiniteModel
        model = FiniteModel.build(pi, pi_y, P, aux)
        marg, _ = replicated.run_replicas(model, Algorithm.IRMCMC, eps, 0, 1,
                                          n, [n], R, seed=11)
        freq = marg[n] / R
        etas = exact.eta_sequence(aux, 1, w, n - 1)
        law = exact.exact_irmcmc_law(P, eps, etas, 0, n)
        sigma = np.sqrt(law.probs * (1 - law.probs) / R)
        assert np.all(np.abs(freq - law.probs) <= 3 * sigma)
