"""Model containers: finite target/auxiliary pairs and 1-d continuous demos.

A sampler model only needs three things: ``weight(state)``, and step samplers
for the base and auxiliary kernels.  ``FiniteModel`` backs them with explicit
matrices; ``ContinuousModel`` uses random-walk Metropolis moves (or exact
draws) on the real line.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import FiniteDistribution, KernelMatrix, WeightFunction
from .errors import DomainError

STATIONARITY_TOL = 1e-9


@dataclass(frozen=True)
class FiniteModel:
    """Target pi, auxiliary pi_Y, their kernels, mixing weight material."""

    pi: FiniteDistribution
    pi_y: FiniteDistribution
    kernel: KernelMatrix       # base kernel P, stationary for pi
    aux_kernel: KernelMatrix   # auxiliary kernel P_Y, stationary for pi_Y
    w: WeightFunction          # pi / pi_Y

    def __post_init__(self):
        drift = np.abs(self.pi.probs @ self.kernel.rows - self.pi.probs).sum()
        if drift > STATIONARITY_TOL:
            raise DomainError(f"base kernel not stationary for pi (L1 drift {drift:.2e})")

    @classmethod
    def build(cls, pi, pi_y, kernel, aux_kernel) -> "FiniteModel":
        return cls(pi, pi_y, kernel, aux_kernel, WeightFunction.ratio(pi, pi_y))

    @property
    def size(self) -> int:
        return len(self.pi)

    def weight(self, state) -> float:
        return self.w(state)

    def sample_base(self, state, rng: np.random.Generator):
        return self.kernel.sample_from(int(state), rng)

    def sample_aux(self, state, rng: np.random.Generator):
        return self.aux_kernel.sample_from(int(state), rng)


@dataclass
class ContinuousModel:
    """1-d continuous model; base/aux moves are random-walk Metropolis.

    Set a step size to 0 to use exact draws via the corresponding ``draw_*``
    callable instead (the idealized P(x, .) = pi kernel).
    """

    log_pi: Callable[[float], float]
    log_pi_y: Callable[[float], float]
    w: WeightFunction
    step_size: float = 1.0
    aux_step_size: float = 1.0
    draw_pi: Callable[[np.random.Generator], float] | None = None
    draw_pi_y: Callable[[np.random.Generator], float] | None = None

    def weight(self, state) -> float:
        return self.w(state)

    def _rwm(self, state, rng, log_density, step):
        prop = state + step * rng.standard_normal()
        if np.log(rng.random() + 1e-300) < log_density(prop) - log_density(state):
            return prop
        return state

    def sample_base(self, state, rng: np.random.Generator):
        if self.step_size == 0:
            return self.draw_pi(rng)
        return self._rwm(state, rng, self.log_pi, self.step_size)

    def sample_aux(self, state, rng: np.random.Generator):
        if self.aux_step_size == 0:
            return self.draw_pi_y(rng)
        return self._rwm(state, rng, self.log_pi_y, self.aux_step_size)


def identity_kernel(pi: FiniteDistribution) -> KernelMatrix:
    """The idealized kernel P(x, .) = pi: one step reaches stationarity."""
    return KernelMatrix(np.tile(pi.probs, (len(pi), 1)))


def two_state_kernel(a: float, b: float) -> KernelMatrix:
    """[[1-a, a], [b, 1-b]] on states (+1, -1) -> indices (0, 1)."""
    if not (0 < a < 1 and 0 < b < 1):
        raise DomainError("need a, b in (0,1)")
    return KernelMatrix(np.array([[1 - a, a], [b, 1 - b]]))


def metropolis_kernel(pi: FiniteDistribution, proposal: KernelMatrix) -> KernelMatrix:
    """Metropolis-Hastings kernel for target pi with the given proposal."""
    p = pi.probs
    q = proposal.rows
    S = len(p)
    K = np.zeros((S, S))
    for x in range(S):
        for z in range(S):
            if z == x or q[x, z] == 0:
                continue
            ratio = (p[z] * q[z, x]) / (p[x] * q[x, z]) if p[x] > 0 else 1.0
            K[x, z] = q[x, z] * min(1.0, ratio)
        K[x, x] = 1.0 - K[x].sum()
    return KernelMatrix(K)


def lazy(kernel: KernelMatrix, hold: float) -> KernelMatrix:
    """Mix with the identity: stay put with probability ``hold``."""
    S = kernel.size
    return KernelMatrix((1 - hold) * kernel.rows + hold * np.eye(S))


def tempered(pi: FiniteDistribution, temperature: float) -> FiniteDistribution:
    """pi^T renormalized, T in (0, 1]; flattens the target."""
    if not (0 < temperature <= 1):
        raise DomainError("temperature must lie in (0, 1]")
    return FiniteDistribution.from_weights(np.power(pi.probs, temperature))


def random_distribution(size: int, rng: np.random.Generator,
                        floor: float = 0.05) -> FiniteDistribution:
    return FiniteDistribution.from_weights(rng.random(size) + floor)


def random_kernel(size: int, rng: np.random.Generator,
                  floor: float = 0.05) -> KernelMatrix:
    rows = rng.random((size, size)) + floor
    return KernelMatrix(rows / rows.sum(axis=1, keepdims=True))


def random_reversible_kernel(pi: FiniteDistribution,
                             rng: np.random.Generator) -> KernelMatrix:
    """Random pi-reversible kernel via Metropolis over a random proposal."""
    return metropolis_kernel(pi, random_kernel(len(pi), rng))


def random_finite_model(size: int, rng: np.random.Generator) -> FiniteModel:
    """Random ergodic model with strictly positive pi, pi_Y and bounded w."""
    pi = random_distribution(size, rng)
    pi_y = random_distribution(size, rng)
    kernel = random_reversible_kernel(pi, rng)
    aux = random_reversible_kernel(pi_y, rng)
    return FiniteModel.build(pi, pi_y, kernel, aux)


def gaussian_mixture_demo(temperature: float = 0.7,
                          step_size: float = 1.0,
                          aux_step_size: float = 2.0,
                          support: tuple[float, float] = (-8.0, 8.0),
                          grid_points: int = 4001) -> ContinuousModel:
    """Two-well demo: pi = equal mix of N(-2, 0.5^2) and N(2, 0.5^2), pi_Y prop pi^T.

    Densities are normalized on the truncation interval so that pi_Y(w) = 1 and
    |w|_inf is finite by construction.
    """
    lo, hi = support
    xs = np.linspace(lo, hi, grid_points)

    def raw_pi(x):
        return 0.5 * np.exp(-((x + 2.0) ** 2) / 0.5) + 0.5 * np.exp(-((x - 2.0) ** 2) / 0.5)

    z_pi = np.trapezoid(raw_pi(xs), xs)
    raw_y_vals = np.power(raw_pi(xs) / z_pi, temperature)
    z_y = np.trapezoid(raw_y_vals, xs)

    def pi_density(x):
        return raw_pi(x) / z_pi

    def pi_y_density(x):
        return np.power(raw_pi(x) / z_pi, temperature) / z_y

    w_vals = pi_density(xs) / pi_y_density(xs)
    w_max = float(w_vals.max()) * (1 + 1e-9)

    def log_pi(x):
        if x < lo or x > hi:
            return -np.inf
        return float(np.log(pi_density(x) + 1e-300))

    def log_pi_y(x):
        if x < lo or x > hi:
            return -np.inf
        return float(np.log(pi_y_density(x) + 1e-300))

    w = WeightFunction(func=lambda x: float(pi_density(x) / pi_y_density(x)), w_max=w_max)
    return ContinuousModel(log_pi=log_pi, log_pi_y=log_pi_y, w=w,
                           step_size=step_size, aux_step_size=aux_step_size)
