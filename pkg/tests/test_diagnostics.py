import numpy as np
import pytest

from amcmc import diagnostics, exact
from amcmc.core import FiniteDistribution, KernelMatrix, WeightFunction
from amcmc.errors import BudgetError, DomainError
from amcmc.models import identity_kernel, two_state_kernel


class TestQuadraticOnCube:
    def test_matches_brute_force(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            S = int(rng.integers(2, 6))
            A = rng.standard_normal((S, S))
            M = A @ A.T  # psd
            signs = 2.0 * ((np.arange(2 ** S)[:, None]
                            >> np.arange(S)[None, :]) & 1) - 1.0
            brute = max(float(f @ M @ f) for f in signs)
            assert diagnostics.max_quadratic_on_cube(M) == pytest.approx(brute)

    def test_budget(self):
        with pytest.raises(BudgetError):
            diagnostics.max_quadratic_on_cube(np.eye(13))


class TestBnExact:
    def test_iid_sampling_kills_bias_term(self):
        # P_Y(y, .) = pi_Y for every y: Y_1, Y_2, ... are i.i.d. pi_Y, so
        # E pihat = pi_Y exactly and only the O(1/n) second-moment term remains
        pi_y = FiniteDistribution.from_weights([2.0, 1.0, 1.0])
        P_Y = identity_kernel(pi_y)
        w = WeightFunction(values=[1.2, 0.4, 0.9])
        r20 = diagnostics.b_n_exact(P_Y, 0, w, 20)
        r40 = diagnostics.b_n_exact(P_Y, 0, w, 40)
        assert r20.first_term < 1e-12 and r40.first_term < 1e-12
        assert r20.second_term / r40.second_term == pytest.approx(2.0, rel=0.02)
        assert r20.method == "EXACT"

    def test_two_state_first_term_matches_cesaro_gap(self):
        # for the two-state chain the sign-vector sup doubles the single-state
        # Cesaro bias: n * first_term / |w|_inf = 2 n |gap(n)|
        aux = exact.TwoStateAux(a=0.3, b=0.45, y0=-1)
        w = WeightFunction(values=[1.0, 0.7])
        for n in (10, 50, 200):
            rep = diagnostics.b_n_exact(aux.kernel, aux.y0_index, w, n)
            expected = 2.0 * w.w_max * abs(exact.cesaro_gap(aux, n))
            assert rep.first_term == pytest.approx(expected, abs=1e-12)

    def test_bn_dominates_eta_bias(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            a, b = rng.uniform(0.15, 0.85, size=2)
            aux_kernel = two_state_kernel(a, b)
            pi_y = exact.stationary_distribution(aux_kernel)
            pi = FiniteDistribution.from_weights(
                rng.uniform(0.5, 2.0, size=2) * pi_y.probs)
            w = WeightFunction.ratio(pi, pi_y)
            for n in range(1, 7):
                eta = exact.eta_oracle(aux_kernel, 0, w, n)
                bound = diagnostics.b_n_exact(aux_kernel, 0, w, n).b_n
                from amcmc.core import tv_distance
                assert tv_distance(eta, pi) <= bound + 1e-10


class TestAssumptionCheck:
    N_GRID = [2 ** k for k in range(1, 10)]

    def test_identity_kernel_flagged(self):
        rep = diagnostics.assumption_y_check(
            KernelMatrix(np.eye(2)), 0, self.N_GRID,
            pi_y=FiniteDistribution(np.array([0.5, 0.5])))
        assert rep.flag == "UNBOUNDED" and not rep.bounded

    def test_ergodic_kernel_passes(self):
        rep = diagnostics.assumption_y_check(two_state_kernel(0.3, 0.6), 0,
                                             self.N_GRID)
        assert rep.bounded
        # n * sup terms settle to constants over the top of the grid
        assert rep.n_times_first[-1] == pytest.approx(rep.n_times_first[-2],
                                                      rel=0.2)


class TestPhiTail:
    def test_finite_exact_profile(self):
        # hand-computed: w = (1, 2, 3), pi_Y = (0.5, 0.3, 0.2)
        pi_y = FiniteDistribution(np.array([0.5, 0.3, 0.2]))
        w = WeightFunction(values=[1.0, 2.0, 3.0])
        prof = diagnostics.phi_tail_check(w, pi_y)
        assert prof.phi == pytest.approx([0.5, 0.8, 1.0])
        assert prof.ratio == pytest.approx([0.5, 0.2, 1.0 / 9.0])
        assert prof.sup_ratio == pytest.approx(0.5)

    @pytest.mark.parametrize("T,growing", [(0.9, False), (0.6, True)])
    def test_power_tail_regimes(self, T, growing):
        # power-law tails with alpha = 3: the ratio phi / w^2 flips from
        # decaying to growing as T crosses (1 + 2 alpha) / (3 alpha) = 7/9
        alpha = 3.0
        xs = np.logspace(0.0, 4.0, 400)
        prof = diagnostics.phi_tail_check(
            w=lambda x: x ** ((T - 1) * alpha),
            pi_y=lambda x: x ** (-T * alpha),
            grid=xs)
        assert prof.tail_growing is growing


class TestDeviationCheck:
    def test_constant_f_all_tails_zero(self):
        pi_y = FiniteDistribution(np.array([0.5, 0.5]))
        rep = diagnostics.deviation_check(identity_kernel(pi_y), 0,
                                          [1.0, 1.0], n=32,
                                          x_grid=np.linspace(0.1, 2.0, 8),
                                          replicas=2000, seed=0)
        assert np.all(rep.tail_prob == 0.0)
        assert rep.low_count_warning

    def test_iid_subgaussian_fit(self):
        # i.i.d. pi_Y draws, centered indicator: Hoeffding-type tail
        pi_y = FiniteDistribution(np.array([0.5, 0.5]))
        rep = diagnostics.deviation_check(
            identity_kernel(pi_y), 0, [-0.5, 0.5], n=64,
            x_grid=np.linspace(0.3, 1.5, 10), replicas=1_000_000, seed=1)
        assert not rep.low_count_warning
        assert rep.slope < 0 and rep.r_squared > 0.9

    def test_ergodic_chain_subgaussian_fit(self):
        rep = diagnostics.deviation_check(
            two_state_kernel(0.4, 0.3), 0, [1.0, -1.0], n=128,
            x_grid=np.linspace(0.5, 2.5, 9), replicas=400_000, seed=2)
        assert rep.slope < 0 and rep.r_squared > 0.9

    def test_f_bound_enforced(self):
        pi_y = FiniteDistribution(np.array([0.5, 0.5]))
        with pytest.raises(DomainError):
            diagnostics.deviation_check(identity_kernel(pi_y), 0, [2.0, 0.0],
                                        n=8, x_grid=[0.5], replicas=100)


class TestErgodicMse:
    def test_from_sums_deterministic(self):
        ns = np.array([2, 4])
        sums = np.array([[2.0, 4.0], [0.0, 0.0]])  # two replicas
        series = diagnostics.ergodic_mse_from_sums(ns, sums, pi_f=0.5)
        # replica 1: (2 - 1)^2/2 = 0.5, (4 - 2)^2/4 = 1; replica 2: 0.5, 1
        assert series.mse == pytest.approx([0.5, 1.0])
        assert series.low_replica_warning

    def test_from_traces_matches_sums(self):
        rng = np.random.default_rng(0)
        traces = rng.integers(0, 2, size=(50, 16))
        f = [0.0, 1.0]
        series = diagnostics.ergodic_mse(traces, f, pi_f=0.5)
        cs = np.cumsum(np.asarray(f)[traces], axis=1)
        for i, n in enumerate(series.n):
            z2 = (cs[:, n - 1] - n * 0.5) ** 2 / n
            assert series.mse[i] == pytest.approx(z2.mean())
