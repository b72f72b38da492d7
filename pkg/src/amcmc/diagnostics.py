"""Computable surrogates for the assumption / bound quantities of the analysis.

``b_n_exact`` evaluates the reservoir-bias bound B_n exactly on small finite
spaces: the linear sup over |f| <= 1 is an L1 norm, and the quadratic sup is
attained at a vertex of the sign hypercube because the second-moment matrix is
positive semi-definite.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import FiniteDistribution, KernelMatrix, WeightFunction
from .errors import BudgetError, DimensionError, DomainError
from . import exact
from . import replicated

SIGN_ENUM_LIMIT = 12


@dataclass(frozen=True)
class BnReport:
    n: int
    first_term: float
    second_term: float
    b_n: float
    method: str  # EXACT or MONTE_CARLO


def _sign_vectors(size: int) -> np.ndarray:
    if size > SIGN_ENUM_LIMIT:
        raise BudgetError(f"sign-vector enumeration needs S <= {SIGN_ENUM_LIMIT}")
    k = np.arange(2 ** size)
    bits = (k[:, None] >> np.arange(size)[None, :]) & 1
    return 2.0 * bits - 1.0


def max_quadratic_on_cube(M: np.ndarray) -> float:
    """max of f' M f over f in [-1, 1]^S for M psd (attained at a vertex)."""
    F = _sign_vectors(M.shape[0])
    return float(np.einsum("ij,jk,ik->i", F, M, F).max())


def aux_moment_sups(P_Y: KernelMatrix, y0: int, n: int,
                    pi_y: FiniteDistribution | None = None) -> tuple[float, float]:
    """(sup_f E pihat(fbar), sup_f E pihat(fbar)^2) over |f| <= 1, exactly.

    Built from the marginals of Y_1..Y_n and the pairwise joint laws
    L(Y_i, Y_j) obtained by one kernel-power pass.
    """
    S = P_Y.size
    if S > SIGN_ENUM_LIMIT:
        raise BudgetError("exact moment sups need S <= 12")
    ref = (exact.stationary_distribution(P_Y) if pi_y is None else pi_y).probs
    rows = P_Y.rows
    # marginals mu_i = delta_{y0} P^i, i = 1..n
    mus = np.empty((n, S))
    v = np.zeros(S)
    v[y0] = 1.0
    for i in range(n):
        v = v @ rows
        mus[i] = v
    mean_mu = mus.mean(axis=0)
    sup1 = float(np.abs(mean_mu - ref).sum())

    # cumulative kernel powers: cum[k] = sum_{j=1..k} P^j
    cum = np.empty((n, S, S))
    Pk = rows.copy()
    cum[0] = Pk
    for k in range(1, n):
        Pk = Pk @ rows
        cum[k] = cum[k - 1] + Pk
    # E[phat phat'] from diagonal terms and sum_{i<j} diag(mu_i) cum[n-i-1]
    second = np.diag(mus.sum(axis=0))
    cross = np.zeros((S, S))
    for i in range(n - 1):
        cross += mus[i][:, None] * cum[n - i - 2]
    second = (second + cross + cross.T) / (n * n)
    M = second - np.outer(mean_mu, ref) - np.outer(ref, mean_mu) + np.outer(ref, ref)
    sup2 = max_quadratic_on_cube(M)
    return sup1, max(sup2, 0.0)


def b_n_exact(P_Y: KernelMatrix, y0: int, w: WeightFunction, n: int,
              pi_y: FiniteDistribution | None = None) -> BnReport:
    """B_n = |w|_inf sup E pihat(fbar) + 2 |w|_inf^2 sup E pihat(fbar)^2."""
    sup1, sup2 = aux_moment_sups(P_Y, y0, n, pi_y)
    first = w.w_max * sup1
    second = 2.0 * w.w_max ** 2 * sup2
    return BnReport(n=n, first_term=first, second_term=second,
                    b_n=first + second, method="EXACT")


@dataclass(frozen=True)
class AssumptionReport:
    n_grid: np.ndarray
    n_times_first: np.ndarray
    n_times_second: np.ndarray
    flag: str  # "OK" or "UNBOUNDED"

    @property
    def bounded(self) -> bool:
        return self.flag == "OK"


def _grows_over_top_decade(ns: np.ndarray, vals: np.ndarray,
                           ratio_threshold: float = 1.5,
                           noise_floor: float = 1e-8) -> bool:
    top = ns >= ns.max() / 10
    v = vals[top]
    if len(v) < 2 or v[0] <= 0 or v[-1] < noise_floor:
        return False
    return bool(np.all(np.diff(v) > 0) and v[-1] / v[0] > ratio_threshold)


def assumption_y_check(P_Y: KernelMatrix, y0: int, n_grid,
                       pi_y: FiniteDistribution | None = None) -> AssumptionReport:
    """Numerical check of the C/n moment condition on the auxiliary chain.

    Reports n * sup_f E pihat(fbar) and n * sup_f E pihat(fbar)^2 on the grid;
    flags UNBOUNDED when either sequence keeps growing over the top decade.
    """
    ns = np.asarray(sorted(n_grid), dtype=int)
    firsts = np.empty(len(ns))
    seconds = np.empty(len(ns))
    for i, n in enumerate(ns):
        s1, s2 = aux_moment_sups(P_Y, y0, int(n), pi_y)
        firsts[i] = n * s1
        seconds[i] = n * s2
    growing = (_grows_over_top_decade(ns, firsts)
               or _grows_over_top_decade(ns, seconds))
    return AssumptionReport(n_grid=ns, n_times_first=firsts,
                            n_times_second=seconds,
                            flag="UNBOUNDED" if growing else "OK")


@dataclass(frozen=True)
class PhiProfile:
    """pi_Y-mass below the current weight level, against the squared weight."""

    grid: np.ndarray
    w_values: np.ndarray
    phi: np.ndarray
    ratio: np.ndarray
    sup_ratio: float
    tail_growing: bool | None = None


def phi_tail_check(w, pi_y, grid=None) -> PhiProfile:
    """Profile of phi(x) = pi_Y({z : w(z) <= w(x)}) and phi / w^2.

    Finite case: ``w`` tabulated and ``pi_y`` a FiniteDistribution (exact).
    Continuous case: callables plus a grid; cell masses by the trapezoid rule,
    and the tail flag is the sign of the log-log ratio trend over the upper
    decades of the grid (boundary cells excluded).
    """
    if isinstance(pi_y, FiniteDistribution):
        wv = w.values if isinstance(w, WeightFunction) else np.asarray(w, float)
        if wv is None or len(wv) != len(pi_y):
            raise DimensionError("weights and pi_Y must share the state space")
        mass = pi_y.probs
        order_levels = wv[:, None] <= wv[None, :]  # [z, x]: w(z) <= w(x)
        phi = (mass[:, None] * order_levels).sum(axis=0)
        with np.errstate(divide="ignore"):
            ratio = np.where(wv > 0, phi / np.maximum(wv, 1e-300) ** 2, np.inf)
        return PhiProfile(grid=np.arange(len(wv)), w_values=wv, phi=phi,
                          ratio=ratio, sup_ratio=float(ratio.max()))

    xs = np.asarray(grid, dtype=float)
    if xs is None or len(xs) < 10:
        raise DomainError("continuous profile needs a grid")
    dens = np.array([pi_y(x) for x in xs], dtype=float)
    cell = np.zeros_like(xs)
    cell[1:-1] = (xs[2:] - xs[:-2]) / 2
    cell[0] = (xs[1] - xs[0]) / 2
    cell[-1] = (xs[-1] - xs[-2]) / 2
    mass = dens * cell
    mass = mass / mass.sum()
    wv = np.array([w(x) for x in xs], dtype=float)
    order = wv[:, None] <= wv[None, :]
    phi = (mass[:, None] * order).sum(axis=0)
    with np.errstate(divide="ignore"):
        ratio = np.where(wv > 0, phi / np.maximum(wv, 1e-300) ** 2, np.inf)
    # trend over x in [x_max/100, x_max/3]; boundary cells distort phi
    window = (xs >= xs.max() / 100) & (xs <= xs.max() / 3) & (ratio > 0) & np.isfinite(ratio)
    slope = 0.0
    if window.sum() >= 4:
        slope = float(np.polyfit(np.log(xs[window]), np.log(ratio[window]), 1)[0])
    return PhiProfile(grid=xs, w_values=wv, phi=phi, ratio=ratio,
                      sup_ratio=float(ratio[np.isfinite(ratio)].max()),
                      tail_growing=bool(slope > 0.2))


@dataclass(frozen=True)
class DeviationReport:
    x_grid: np.ndarray
    tail_prob: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    sigma2: float
    low_count_warning: bool


def deviation_check(P_Y: KernelMatrix, y0: int, f_values, n: int, x_grid,
                    replicas: int = 100_000, seed: int = 0,
                    pi_y: FiniteDistribution | None = None) -> DeviationReport:
    """Monte Carlo tail of |n^{-1/2} sum (f(Y_j) - pi_Y(f))| with a sub-Gaussian fit.

    Fits log P(|Z| > x) against x^2 by least squares over grid points that still
    have >= 100 exceedances; fewer exceedances everywhere sets the warning flag.
    """
    fv = np.asarray(f_values, dtype=float)
    if np.abs(fv).max() > 1 + 1e-12:
        raise DomainError("|f|_inf must be <= 1")
    ref = (exact.stationary_distribution(P_Y) if pi_y is None else pi_y)
    pi_f = float(ref.probs @ fv)
    sigma2 = float(ref.probs @ fv ** 2)
    sums = replicated.aux_f_sums(P_Y, y0, n, replicas, fv, seed)
    z = np.abs((sums - n * pi_f) / np.sqrt(n))
    xs = np.asarray(x_grid, dtype=float)
    exceed = (z[None, :] > xs[:, None]).sum(axis=1)
    tail = exceed / replicas
    usable = exceed >= 100
    if usable.sum() < 3:
        return DeviationReport(xs, tail, np.nan, np.nan, 0.0, sigma2, True)
    X = xs[usable] ** 2
    Yv = np.log(tail[usable])
    slope, intercept = np.polyfit(X, Yv, 1)
    pred = slope * X + intercept
    ss_res = float(((Yv - pred) ** 2).sum())
    ss_tot = float(((Yv - Yv.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DeviationReport(xs, tail, float(slope), float(intercept), r2,
                           sigma2, False)


@dataclass(frozen=True)
class MseSeries:
    n: np.ndarray
    mse: np.ndarray
    stderr: np.ndarray
    low_replica_warning: bool = False


def ergodic_mse_from_sums(ns, partial_sums: np.ndarray, pi_f: float) -> MseSeries:
    """MSE of n^{-1/2} sum_{i<=n} (f(X_i) - pi_f) from per-replica partial sums.

    ``partial_sums`` has one column per checkpoint n.
    """
    ns = np.asarray(ns, dtype=int)
    R = partial_sums.shape[0]
    z2 = (partial_sums - ns[None, :] * pi_f) ** 2 / ns[None, :]
    return MseSeries(n=ns, mse=z2.mean(axis=0), stderr=z2.std(axis=0) / np.sqrt(R),
                     low_replica_warning=R < 100)


def ergodic_mse(traces: np.ndarray, f_values, pi_f: float) -> MseSeries:
    """Same series computed from full traces (R, N) on a dyadic n-grid."""
    fv = np.asarray(f_values, dtype=float)
    vals = fv[np.asarray(traces, dtype=int)]
    cs = np.cumsum(vals, axis=1)
    N = cs.shape[1]
    ns = [2 ** k for k in range(0, N.bit_length()) if 2 ** k <= N]
    sums = np.stack([cs[:, n - 1] for n in ns], axis=1)
    return ergodic_mse_from_sums(ns, sums, pi_f)
