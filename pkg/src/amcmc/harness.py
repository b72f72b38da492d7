"""Experiment runner: replicated marginal estimates, TV curves, rate fits.

Checkpoints default to a dyadic grid so log-log regressions get uniform
leverage.  TV estimates below 5x the plug-in noise floor sqrt(S/R) are refused
by ``fit_rate``: at that level the positive bias of the plug-in TV estimator
flattens slopes and fakes convergence.
"""
from __future__ import annotations

import csv
import json

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import FiniteDistribution, KernelMatrix, tv_distance_vec
from .errors import ConfigError, StateError
from .models import FiniteModel
from .samplers import Algorithm
from . import replicated

NOISE_GUARD = 5.0
BOOTSTRAP_RESAMPLES = 200


def dyadic_checkpoints(n_lo: int, n_hi: int) -> list[int]:
    out = []
    n = n_lo
    while n <= n_hi:
        out.append(n)
        n *= 2
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    model: FiniteModel
    algorithm: Algorithm
    epsilon: float
    n_max: int
    checkpoints: tuple[int, ...]
    replicas: int
    seed: int
    x0: int = 0
    y0: int = 0
    out: str | None = None

    def __post_init__(self):
        if self.replicas < 1:
            raise ConfigError("replica count must be >= 1")
        if not (0.0 < self.epsilon < 1.0):
            raise ConfigError("epsilon must lie in (0, 1)")
        if not self.checkpoints or self.n_max < min(self.checkpoints):
            raise ConfigError("n_max must reach the smallest checkpoint")


def config_from_toml(path: str | Path) -> ExperimentConfig:
    """Load a config file with [model], [algorithm], [experiment] sections."""
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    try:
        msec = doc["model"]
        asec = doc["algorithm"]
        esec = doc["experiment"]
    except KeyError as exc:
        raise ConfigError(f"missing config section {exc}") from exc
    try:
        pi = FiniteDistribution(np.asarray(msec["pi"], dtype=float))
        pi_y = FiniteDistribution(np.asarray(msec["pi_y"], dtype=float))
        kernel = KernelMatrix(np.asarray(msec["kernel"], dtype=float))
        aux = KernelMatrix(np.asarray(msec["aux_kernel"], dtype=float))
        model = FiniteModel.build(pi, pi_y, kernel, aux)
        algorithm = Algorithm(asec["name"])
        epsilon = float(asec["epsilon"])
        n_max = int(esec["n_max"])
        cps = esec.get("checkpoints") or dyadic_checkpoints(
            int(esec.get("first_checkpoint", 8)), n_max)
        return ExperimentConfig(
            model=model, algorithm=algorithm, epsilon=epsilon, n_max=n_max,
            checkpoints=tuple(int(c) for c in cps),
            replicas=int(esec.get("replicas", 10_000)),
            seed=int(esec.get("seed", 0)),
            x0=int(esec.get("x0", 0)), y0=int(esec.get("y0", 0)),
            out=esec.get("out"))
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc


@dataclass(frozen=True)
class MarginalEstimate:
    n: int
    counts: np.ndarray
    replicas: int

    @property
    def probs(self) -> np.ndarray:
        return self.counts / self.replicas

    @property
    def stderr(self) -> np.ndarray:
        p = self.probs
        return np.sqrt(p * (1 - p) / self.replicas)

    @property
    def low_precision(self) -> bool:
        return self.replicas < 100


def estimate_marginals(config: ExperimentConfig) -> dict[int, MarginalEstimate]:
    """Monte Carlo estimates of L(X_n) at each checkpoint."""
    marg, _ = replicated.run_replicas(
        config.model, config.algorithm, config.epsilon, config.x0, config.y0,
        config.n_max, config.checkpoints, config.replicas, config.seed)
    return {n: MarginalEstimate(n=n, counts=c.astype(float), replicas=config.replicas)
            for n, c in sorted(marg.items())}


@dataclass(frozen=True)
class TvSeries:
    n: np.ndarray
    tv: np.ndarray
    stderr: np.ndarray
    noise_floor: float = 0.0

    def __post_init__(self):
        n = np.asarray(self.n, dtype=int)
        tv = np.asarray(self.tv, dtype=float)
        se = np.asarray(self.stderr, dtype=float)
        if not (len(n) == len(tv) == len(se)):
            raise ConfigError("ragged TV series")
        if np.any(np.diff(n) <= 0):
            raise ConfigError("checkpoints must be strictly increasing")
        if np.any((tv < 0) | (tv > 1)):
            raise ConfigError("tv outside [0, 1]")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "tv", tv)
        object.__setattr__(self, "stderr", se)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["n", "tv", "stderr"])
            for n, tv, se in zip(self.n, self.tv, self.stderr):
                writer.writerow([int(n), f"{tv:.17g}", f"{se:.17g}"])

    @classmethod
    def from_csv(cls, path: str | Path, noise_floor: float = 0.0) -> "TvSeries":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            rows = [(int(r["n"]), float(r["tv"]), float(r["stderr"])) for r in reader]
        ns, tvs, ses = zip(*rows)
        return cls(np.array(ns), np.array(tvs), np.array(ses), noise_floor)


def tv_curve(marginals: dict[int, MarginalEstimate],
             target: FiniteDistribution,
             bootstrap_seed: int = 0) -> TvSeries:
    """Plug-in TV against the target, bootstrap standard errors per checkpoint."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=bootstrap_seed,
                                                       spawn_key=(2,)))
    ns, tvs, ses = [], [], []
    replicas = None
    for n in sorted(marginals):
        est = marginals[n]
        replicas = est.replicas
        tvs.append(tv_distance_vec(est.probs, target.probs))
        boot = rng.multinomial(est.replicas,
                               est.probs / est.probs.sum(),
                               size=BOOTSTRAP_RESAMPLES) / est.replicas
        ses.append(float(np.abs(boot - target.probs[None, :]).sum(axis=1).std() / 2))
        ns.append(n)
    floor = float(np.sqrt(len(target) / replicas)) if replicas else 0.0
    return TvSeries(np.array(ns), np.array(tvs), np.array(ses), noise_floor=floor)


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    slope_stderr: float
    window: tuple[int, int]
    r_squared: float


def fit_rate(series: TvSeries, window: tuple[int, int]) -> RateFit:
    """OLS of log tv on log n over the window; refuses noise-floor data."""
    lo, hi = window
    mask = (series.n >= lo) & (series.n <= hi)
    if mask.sum() < 4:
        raise StateError(f"need >= 4 checkpoints in window [{lo}, {hi}]")
    tv = series.tv[mask]
    guard = NOISE_GUARD * series.noise_floor
    if np.any(tv <= guard):
        raise StateError(
            f"tv values {tv[tv <= guard]} at or below {NOISE_GUARD}x noise floor "
            f"{series.noise_floor:.3g}; rate fit would be biased")
    if np.any(tv <= 0):
        raise StateError("tv must be positive for a log-log fit")
    X = np.log(series.n[mask].astype(float))
    Y = np.log(tv)
    A = np.vstack([X, np.ones_like(X)]).T
    coef, residual, *_ = np.linalg.lstsq(A, Y, rcond=None)
    slope, intercept = coef
    pred = A @ coef
    ss_res = float(((Y - pred) ** 2).sum())
    ss_tot = float(((Y - Y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    dof = mask.sum() - 2
    if dof > 0 and ss_res > 0:
        sxx = float(((X - X.mean()) ** 2).sum())
        slope_se = float(np.sqrt(ss_res / dof / sxx))
    else:
        slope_se = 0.0
    return RateFit(slope=float(slope), intercept=float(intercept),
                   slope_stderr=slope_se, window=(int(lo), int(hi)),
                   r_squared=max(0.0, min(1.0, r2)))


def rate_fit_to_json(fit: RateFit) -> dict:
    return {"slope": fit.slope, "intercept": fit.intercept,
            "slope_stderr": fit.slope_stderr,
            "window": list(fit.window), "r_squared": fit.r_squared}


def write_json(path: str | Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
