"""Acceptance bundles behind ``amcmc suite``.

Each check function is self-contained, deterministic given its seed, and
returns a ``CheckResult``; suites group them, serialize verdicts and series,
and render figures next to the CSV output.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import diagnostics, exact, replicated, report
from .core import FiniteDistribution, WeightFunction, tv_distance
from .errors import ConfigError, StateError
from .harness import (TvSeries, fit_rate, rate_fit_to_json, tv_curve,
                      write_json, MarginalEstimate)
from .models import (FiniteModel, identity_kernel, lazy, metropolis_kernel,
                     random_distribution, random_finite_model, random_kernel,
                     random_reversible_kernel, tempered, two_state_kernel)
from .samplers import (Algorithm, init_chain, main_transition, _step)

EXACT_TOL = 1e-12
PROP_TOL = 1e-10


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    elapsed: float = 0.0


def _timed(fn):
    def wrapper(*args, **kwargs) -> CheckResult:
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.elapsed = time.perf_counter() - t0
        return res
    return wrapper


def _rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                        spawn_key=(100 + tag,)))


# -------------------------------------------------------------- criterion 1

@_timed
def check_counterexample(seed: int = 0, out_dir: Path | None = None) -> CheckResult:
    """Stationary law of the swap-proposal joint chain has the wrong X-marginal."""
    aux = exact.TwoStateAux(a=1 / 3, b=1 / 3)
    pi_x = FiniteDistribution(np.array([2 / 3, 1 / 3]))
    kernel = exact.ee_joint_kernel(aux, pi_x)
    solved = exact.stationary_distribution(kernel)
    expected = np.array([3 / 8, 1 / 4, 1 / 8, 1 / 4])
    marginal = exact.joint_x_marginal(solved)
    err_joint = float(np.abs(solved.probs - expected).max())
    err_marg = float(np.abs(marginal.probs - np.array([5 / 8, 3 / 8])).max())
    # closed form vs linear solve over a rate grid
    err_grid = 0.0
    for a in np.linspace(0.1, 0.9, 5):
        for b in np.linspace(0.1, 0.9, 5):
            for c, d in [(0.2, 0.7), (0.5, 0.5), (0.9, 0.3), (1.0, 0.6), (0.35, 1.0)]:
                K = exact.joint_kernel_from_rates(a, b, c, d)
                closed = exact.joint_stationary_closed_form(a, b, c, d)
                err_grid = max(err_grid, float(
                    np.abs(exact.stationary_distribution(K).probs - closed.probs).max()))
    passed = err_joint <= EXACT_TOL and err_marg <= EXACT_TOL and err_grid <= EXACT_TOL
    return CheckResult("counterexample", passed, {
        "joint_stationary": solved.probs.tolist(),
        "x_marginal": marginal.probs.tolist(),
        "max_err_joint": err_joint, "max_err_marginal": err_marg,
        "max_err_grid": err_grid})


# -------------------------------------------------------------- criterion 2

@_timed
def check_irmcmc_rate(seed: int = 0, out_dir: Path | None = None) -> CheckResult:
    """Exact 1/n rate of IRMCMC on the two-state lower-bound model."""
    aux = exact.TwoStateAux(a=1 / 3, b=1 / 3, y0=-1)
    pi = FiniteDistribution(np.array([0.5, 0.5]))  # = pi_Y for this model
    P = identity_kernel(pi)
    eps = 0.3
    n_hi = 4096
    etas = exact.eta_sequence_uniform(aux.kernel, aux.y0_index, n_hi)
    ns = [2 ** k for k in range(4, 13)]  # 16 .. 4096
    tvs, max_identity_err = [], 0.0
    for n in ns:
        gap = exact.cesaro_gap(aux, n)
        law = exact.exact_irmcmc_law(P, eps, etas, 0, n + 1)
        tv = tv_distance(law, pi)
        max_identity_err = max(max_identity_err, abs(tv - eps * abs(gap)))
        tvs.append(tv)
    series = TvSeries(np.array(ns), np.array(tvs), np.zeros(len(ns)),
                      noise_floor=0.0)
    fit = fit_rate(series, (16, 4096))
    passed = max_identity_err <= EXACT_TOL and abs(fit.slope + 1.0) <= 0.05
    if out_dir is not None:
        series.to_csv(out_dir / "irmcmc_exact_tv.csv")
        report.plot_tv_series(series, out_dir / "irmcmc_exact_tv.png", fit,
                              title="IRMCMC exact TV, two-state model")
    return CheckResult("irmcmc-rate", passed, {
        "max_identity_err": max_identity_err, "fit": rate_fit_to_json(fit)})


# -------------------------------------------------------------- criterion 3

def _random_two_state_irmcmc(rng) -> tuple[FiniteModel, float, int, int]:
    a = rng.uniform(0.15, 0.85)
    b = rng.uniform(0.15, 0.85)
    aux_kernel = two_state_kernel(a, b)
    pi_y = exact.stationary_distribution(aux_kernel)
    raw_w = rng.uniform(0.5, 2.0, size=2)
    pi = FiniteDistribution.from_weights(raw_w * pi_y.probs)
    P = random_reversible_kernel(pi, rng)
    model = FiniteModel.build(pi, pi_y, P, aux_kernel)
    eps = float(rng.choice([0.2, 0.5, 0.8]))
    return model, eps, int(rng.integers(2)), int(rng.integers(2))


@_timed
def check_bn_bounds(seed: int = 0, out_dir: Path | None = None) -> CheckResult:
    """Reservoir-bias bound and the geometric-mixture marginal bound, exactly."""
    rng = _rng(seed, 3)
    n_models, n_max = 20, 10
    worst_eta = -np.inf
    worst_marg = -np.inf
    for _ in range(n_models):
        model, eps, x0, y0 = _random_two_state_irmcmc(rng)
        etas = exact.eta_sequence(model.aux_kernel, y0, model.w, n_max)
        bns = [diagnostics.b_n_exact(model.aux_kernel, y0, model.w, n,
                                     pi_y=model.pi_y).b_n
               for n in range(1, n_max + 1)]
        for n in range(1, n_max + 1):
            slack = bns[n - 1] - tv_distance(etas[n], model.pi)
            worst_eta = max(worst_eta, -slack)
            law = exact.exact_irmcmc_law(model.kernel, eps, etas, x0, n)
            bound = 0.0
            for ell in range(n + 1):
                b_prev = 1.0 if ell <= 1 else bns[ell - 2]  # B_{-1} = B_0 = 1
                bound += (1 - eps) ** (n - ell) * b_prev
            worst_marg = max(worst_marg, tv_distance(law, model.pi) - bound)
    passed = worst_eta <= 1e-10 and worst_marg <= 1e-10
    return CheckResult("bn-bounds", passed, {
        "worst_eta_bound_violation": float(worst_eta),
        "worst_marginal_bound_violation": float(worst_marg)})


# -------------------------------------------------------------- criterion 4

@_timed
def check_pi_theta(seed: int = 0, out_dir: Path | None = None) -> CheckResult:
    """Invariance of pi_theta and the 2(1-eps)^n geometric mixing bound."""
    rng = _rng(seed, 4)
    worst_inv, worst_mix = 0.0, -np.inf
    eps_cycle = [0.1, 0.5, 0.9]
    for i in range(100):
        S = int(rng.integers(2, 7))
        P = random_kernel(S, rng)
        theta = random_distribution(S, rng)
        eps = eps_cycle[i % 3]
        pt = exact.pi_theta(P, theta, eps, tol=1e-14)
        Pt = exact.p_theta_kernel(P, theta, eps)
        worst_inv = max(worst_inv,
                        float(np.abs(pt.probs @ Pt.rows - pt.probs).sum()))
        M = np.eye(S)
        for n in range(1, 21):
            M = M @ Pt.rows
            tv_rows = 0.5 * np.abs(M - pt.probs[None, :]).sum(axis=1)
            worst_mix = max(worst_mix,
                            float(tv_rows.max()) - 2 * (1 - eps) ** n)
    passed = worst_inv <= PROP_TOL and worst_mix <= PROP_TOL
    return CheckResult("pi-theta", passed, {
        "worst_invariance_l1": worst_inv,
        "worst_mixing_excess": float(worst_mix)})


# -------------------------------------------------------------- criterion 5

def ee_rate_model() -> tuple[FiniteModel, float]:
    pi = FiniteDistribution.from_weights([8.0, 1.0, 1.5, 6.0])
    pi_y = tempered(pi, 0.4)
    neighbor = two_state_ring_proposal(4)
    P = lazy(metropolis_kernel(pi, neighbor), 0.2)
    P_Y = lazy(metropolis_kernel(pi_y, neighbor), 0.85)
    return FiniteModel.build(pi, pi_y, P, P_Y), 0.3


def two_state_ring_proposal(S: int):
    rows = np.zeros((S, S))
    for x in range(S):
        rows[x, (x - 1) % S] = 0.5
        rows[x, (x + 1) % S] = 0.5
    from .core import KernelMatrix
    return KernelMatrix(rows)


@_timed
def check_ee_rate(seed: int = 0, out_dir: Path | None = None) -> CheckResult:
    """EE bias decays no slower than C / sqrt(n) once C is pinned at n = 64."""
    model, eps = ee_rate_model()
    R = 100_000
    cps = [64, 128, 256, 512, 1024, 2048, 4096]
    marg, _ = replicated.run_replicas(model, Algorithm.EE, eps, 0, 0,
                                      cps[-1], cps, R, seed)
    probs = {n: marg[n] / R for n in cps}
    stderr = {n: np.sqrt(probs[n] * (1 - probs[n]) / R) for n in cps}
    bias = {n: probs[n] - model.pi.probs for n in cps}
    C = np.abs(bias[64]) * np.sqrt(64.0)
    worst = -np.inf
    rows = []
    for n in cps[1:]:
        margin = C / np.sqrt(n) + 3 * stderr[n] - np.abs(bias[n])
        worst = max(worst, float((-margin).max()))
        rows.append((n, np.abs(bias[n]).max(), float((C / np.sqrt(n)).max())))
    passed = worst <= 0.0
    if out_dir is not None:
        ns = np.array([r[0] for r in rows])
        report.plot_bound_series(ns, [r[1] for r in rows], [r[2] for r in rows],
                                 out_dir / "ee_rate_bound.png",
                                 title="EE sampler bias vs fitted C/sqrt(n)")
    return CheckResult("ee-rate", passed, {
        "fitted_C": C.tolist(), "worst_excess": float(worst),
        "bias_at_64": bias[64].tolist()})


# -------------------------------------------------------------- criterion 6

def ladder_models():
    """m = 2 tempered four-state ladder used by the rate suite.

    Strong tempering keeps the importance-weight spread large, which makes the
    resampling-bias constants big enough to clear the noise-floor guard on the
    small-n fit window.
    """
    pi = FiniteDistribution.from_weights([50.0, 1.0, 2.0, 30.0])
    temps = [0.15, 0.55, 1.0]
    pis = [tempered(pi, t) for t in temps]
    neighbor = two_state_ring_proposal(4)
    holds = [0.8, 0.7, 0.7]
    kernels = [lazy(metropolis_kernel(p, neighbor), h) for p, h in zip(pis, holds)]
    weights = [WeightFunction.ratio(pis[l], pis[l - 1]) for l in range(1, 3)]
    return pis, kernels, weights


@_timed
def check_ladder(seed: int = 0, out_dir: Path | None = None) -> CheckResult:
    """m = 1 exact-law match and the 1/n slope on the m = 2 tempered ladder."""
    rng = _rng(seed, 6)
    # part A: m = 1 ladder equals Algorithm 1 in law at n = 8
    aux_kernel = two_state_kernel(0.35, 0.25)
    pi0 = exact.stationary_distribution(aux_kernel)
    pi1 = FiniteDistribution.from_weights(np.array([1.4, 0.7]) * pi0.probs)
    P1 = random_reversible_kernel(pi1, rng)
    w1 = WeightFunction.ratio(pi1, pi0)
    eps, R_a, n_a = 0.4, 1_000_000, 8
    marg = replicated.run_ladder_replicas(
        [aux_kernel.rows, P1.rows], [w1.values], eps, [1, 0], n_a, [n_a], R_a, seed)
    p_hat = marg[1][n_a] / R_a
    etas = exact.eta_sequence(aux_kernel, 1, w1, n_a - 1)
    law = exact.exact_irmcmc_law(P1, eps, etas, 0, n_a)
    se = np.sqrt(law.probs * (1 - law.probs) / R_a)
    part_a_excess = float((np.abs(p_hat - law.probs) - 3 * se).max())

    # part B: slope -1 +/- 0.15 at every interacting level of the m = 2 ladder
    pis, kernels, weights = ladder_models()
    eps_b, R_b = 0.7, 100_000
    cps = [8, 16, 32, 64]
    marg_b = replicated.run_ladder_replicas(
        [k.rows for k in kernels], [w.values for w in weights], eps_b,
        [1, 1, 1], cps[-1], cps, R_b, seed + 1)
    fits, slopes_ok = {}, True
    for lvl in (1, 2):
        ests = {n: MarginalEstimate(n=n, counts=marg_b[lvl][n].astype(float),
                                    replicas=R_b) for n in cps}
        series = tv_curve(ests, pis[lvl], bootstrap_seed=seed)
        try:
            fit = fit_rate(series, (cps[0], cps[-1]))
        except StateError as exc:
            slopes_ok = False
            fits[lvl] = {"error": str(exc)}
            continue
        fits[lvl] = rate_fit_to_json(fit)
        slopes_ok = slopes_ok and abs(fit.slope + 1.0) <= 0.15
        if out_dir is not None:
            series.to_csv(out_dir / f"ladder_level{lvl}_tv.csv")
            report.plot_tv_series(series, out_dir / f"ladder_level{lvl}_tv.png",
                                  fit, title=f"ladder level {lvl} TV curve")
    passed = part_a_excess <= 0.0 and slopes_ok
    return CheckResult("ladder", passed, {
        "part_a_excess": part_a_excess, "fits": fits})


# -------------------------------------------------------------- criterion 7

@_timed
def check_ergodic_mse(seed: int = 0, out_dir: Path | None = None) -> CheckResult:
    """Boundedness of the ergodic-average MSE on the two-state example model."""
    aux = exact.TwoStateAux(a=1 / 3, b=1 / 3, y0=-1)
    pi = FiniteDistribution(np.array([0.5, 0.5]))
    model = FiniteModel.build(pi, pi, identity_kernel(pi), aux.kernel)
    eps, R, n_max = 0.3, 10_000, 2 ** 14
    cps = [2 ** k for k in range(4, 15)]
    f_values = np.array([0.0, 1.0])  # indicator of the -1 state
    _, sums_at = replicated.run_replicas(model, Algorithm.IRMCMC, eps, 0, 1,
                                         n_max, cps, R, seed,
                                         f_values=f_values)
    sums = np.stack([sums_at[n] for n in cps], axis=1)
    series = diagnostics.ergodic_mse_from_sums(cps, sums, pi_f=0.5)
    top = series.n >= n_max / 100
    ratio = float(series.mse[top].max() / series.mse[top].min())
    passed = ratio < 3.0
    if out_dir is not None:
        report.plot_mse_series(series.n, series.mse, series.stderr,
                               out_dir / "ergodic_mse.png")
    return CheckResult("ergodic-mse", passed, {
        "max_min_ratio": ratio, "mse": series.mse.tolist(),
        "n": series.n.tolist()})


# -------------------------------------------------------------- criterion 8

def _frozen_expected_row(state, model, eps) -> np.ndarray:
    S = model.size
    x = int(state.x)
    theta = state.reservoir.as_distribution(S)
    if state.algorithm is Algorithm.IRMCMC:
        return (1 - eps) * model.kernel.rows[x] + eps * theta.probs
    if state.algorithm is Algorithm.EE:
        K = exact.k_theta_exact(theta, model.w)
        return (1 - eps) * model.kernel.rows[x] + eps * K.rows[x]
    wv = model.w.values
    alpha = min(1.0, wv[int(state.y)] / wv[x])
    jump = np.zeros(S)
    jump[int(state.y)] += alpha
    jump[x] += 1 - alpha
    return (1 - eps) * model.kernel.rows[x] + eps * jump


@_timed
def check_conformance(seed: int = 0, out_dir: Path | None = None) -> CheckResult:
    """Frozen-snapshot one-step frequencies match the exact mixture kernels."""
    rng = _rng(seed, 8)
    model = random_finite_model(4, rng)
    eps, warmup, draws = 0.35, 30, 100_000
    worst = -np.inf
    for algorithm in (Algorithm.IRMCMC, Algorithm.EE, Algorithm.MODIFIED_EE):
        state = init_chain(model, algorithm, eps, x0=0, y0=1)
        r_main = _rng(seed, 80)
        r_aux = _rng(seed, 81)
        for _ in range(warmup):
            _step(state, model, r_main, r_aux)
        expected = _frozen_expected_row(state, model, eps)
        r_draw = _rng(seed, 82)
        counts = np.zeros(model.size)
        for _ in range(draws):
            counts[int(main_transition(state, model, r_draw))] += 1
        freq = counts / draws
        sigma = np.sqrt(expected * (1 - expected) / draws)
        worst = max(worst, float((np.abs(freq - expected)
                                  - (3 * sigma + 2.0 / draws)).max()))
    passed = worst <= 0.0
    return CheckResult("conformance", passed, {"worst_excess": float(worst)})


# -------------------------------------------------------------- criterion 9

@_timed
def check_im_invariance(seed: int = 0, out_dir: Path | None = None) -> CheckResult:
    """pi is exactly invariant for the frozen independent-Metropolis kernel."""
    rng = _rng(seed, 9)
    worst = 0.0
    for _ in range(50):
        model = random_finite_model(int(rng.integers(2, 7)), rng)
        K = exact.k_theta_exact(model.pi_y, model.w)
        worst = max(worst, float(np.abs(model.pi.probs @ K.rows
                                        - model.pi.probs).sum()))
    passed = worst <= EXACT_TOL
    return CheckResult("im-invariance", passed, {"worst_l1_drift": worst})


# -------------------------------------------------------------- criterion 10

@_timed
def check_diagnostics(seed: int = 0, out_dir: Path | None = None) -> CheckResult:
    """Assumption checks flag the stuck chain and both tail regimes correctly."""
    from .core import KernelMatrix
    n_grid = [2 ** k for k in range(1, 12)]
    identity = KernelMatrix(np.eye(2))
    uniform = FiniteDistribution(np.array([0.5, 0.5]))
    stuck = diagnostics.assumption_y_check(identity, 0, n_grid, pi_y=uniform)
    grid_ok = True
    for a in np.linspace(0.08, 0.9, 10):
        for b in np.linspace(0.08, 0.9, 10):
            rep = diagnostics.assumption_y_check(two_state_kernel(a, b), 0, n_grid)
            grid_ok = grid_ok and rep.bounded

    alpha = 3.0
    xs = np.logspace(0.0, 4.0, 400)

    def profile(T: float):
        return diagnostics.phi_tail_check(
            w=lambda x: x ** ((T - 1) * alpha),
            pi_y=lambda x: x ** (-T * alpha),
            grid=xs)

    bounded_regime = profile(0.9)    # T above (1 + 2a) / (3a) = 7/9
    unbounded_regime = profile(0.6)  # T below the threshold
    passed = (not stuck.bounded and grid_ok
              and bounded_regime.tail_growing is False
              and unbounded_regime.tail_growing is True)
    return CheckResult("diagnostics", passed, {
        "identity_flag": stuck.flag, "ergodic_grid_ok": grid_ok,
        "tail_growing_T09": bounded_regime.tail_growing,
        "tail_growing_T06": unbounded_regime.tail_growing})


# ----------------------------------------------------------------- suites

SUITES = {
    "counterexample": [check_counterexample],
    "irmcmc-rate": [check_irmcmc_rate, check_ergodic_mse],
    "ee-rate": [check_ee_rate],
    "ladder-rate": [check_ladder],
    "exact-verify": [check_bn_bounds, check_pi_theta, check_conformance,
                     check_im_invariance],
    "diagnostics": [check_diagnostics],
}


def run_suite(suite_name: str, seed: int = 0,
              out_dir: str | Path | None = None) -> tuple[int, list[CheckResult]]:
    """Run one acceptance bundle; returns (exit_status, results)."""
    if suite_name not in SUITES:
        raise ConfigError(
            f"unknown suite {suite_name!r}; choose from {sorted(SUITES)}")
    out_path = None
    if out_dir is not None:
        out_path = Path(out_dir)
        out_path.mkdir(parents=True, exist_ok=True)
    results = [check(seed=seed, out_dir=out_path) for check in SUITES[suite_name]]
    status = 0 if all(r.passed for r in results) else 1
    if out_path is not None:
        write_json(out_path / f"{suite_name}.json", {
            "suite": suite_name, "seed": seed,
            "passed": status == 0,
            "checks": [{"name": r.name, "passed": r.passed,
                        "elapsed_s": round(r.elapsed, 3),
                        "details": r.details} for r in results]})
    return status, results
