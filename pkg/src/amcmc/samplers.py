"""Step functions and run loops for the interacting samplers.

Three algorithms share one chain-state layout:

* importance resampling (IRMCMC): with probability eps, resample the main
  state from the weighted reservoir of past auxiliary samples;
* equi-energy (EE): with probability eps, propose a uniformly drawn past
  auxiliary sample and accept with probability 1 ^ w(z)/w(x);
* modified EE: as EE but the proposal is the auxiliary chain's current state.

Within one tick the main chain moves first, using the reservoir as of the
previous tick, and only then does the auxiliary chain advance and push its new
sample.  Main-chain and auxiliary randomness come from two separate generator
streams so the auxiliary path is literally independent of the main chain.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import WeightedEmpirical
from .errors import ConfigError, StateError
from .models import ContinuousModel, FiniteModel


class Algorithm(enum.Enum):
    IRMCMC = "irmcmc"
    EE = "ee"
    MODIFIED_EE = "modified-ee"


@dataclass
class ChainState:
    """Live state of one sampler run."""

    x: object
    y: object
    reservoir: WeightedEmpirical
    n: int
    epsilon: float
    algorithm: Algorithm
    seed_retired: bool = False  # IRMCMC: theta_0 = delta_{y0} drops out at n = 1


def init_chain(model, algorithm: Algorithm, epsilon: float, x0, y0) -> ChainState:
    if not (0.0 <= epsilon <= 1.0):
        raise ConfigError(f"epsilon = {epsilon} outside [0, 1]")
    res = WeightedEmpirical()
    if algorithm is Algorithm.IRMCMC:
        res.push(y0, 1.0)  # the delta_{y0} seed; weight zeroed on first push
    return ChainState(x=x0, y=y0, reservoir=res, n=0,
                      epsilon=epsilon, algorithm=algorithm)


def main_transition(state: ChainState, model, rng: np.random.Generator):
    """One main-chain update given the frozen reservoir; no mutation."""
    eps = state.epsilon
    if eps > 0 and rng.random() < eps:
        if state.algorithm is Algorithm.IRMCMC:
            if len(state.reservoir) == 0:
                raise StateError("IRMCMC reservoir was never seeded")
            return state.reservoir.sample(rng)
        if state.algorithm is Algorithm.EE:
            if len(state.reservoir) == 0:
                # no past auxiliary sample to propose yet: rejected move
                return state.x
            z = state.reservoir.sample(rng)
        else:  # MODIFIED_EE proposes the auxiliary chain's current state
            z = state.y
        wx = model.weight(state.x)
        wz = model.weight(z)
        if rng.random() * wx < wz:
            return z
        return state.x
    return model.sample_base(state.x, rng)


def _advance_aux(state: ChainState, model, rng_aux: np.random.Generator) -> None:
    y_next = model.sample_aux(state.y, rng_aux)
    if state.algorithm is Algorithm.IRMCMC:
        if not state.seed_retired:
            state.reservoir.set_weight(0, 0.0)
            state.seed_retired = True
        state.reservoir.push(y_next, model.weight(y_next))
    else:
        state.reservoir.push(y_next, 1.0)
    state.y = y_next


def _step(state: ChainState, model, rng_main, rng_aux) -> ChainState:
    state.x = main_transition(state, model, rng_main)
    _advance_aux(state, model, rng_aux)
    state.n += 1
    return state


def irmcmc_step(state: ChainState, model, rng_main, rng_aux) -> ChainState:
    if state.algorithm is not Algorithm.IRMCMC:
        raise StateError("chain state is not tagged IRMCMC")
    return _step(state, model, rng_main, rng_aux)


def ee_step(state: ChainState, model, rng_main, rng_aux) -> ChainState:
    if state.algorithm is not Algorithm.EE:
        raise StateError("chain state is not tagged EE")
    return _step(state, model, rng_main, rng_aux)


def modified_ee_step(state: ChainState, model, rng_main, rng_aux) -> ChainState:
    if state.algorithm is not Algorithm.MODIFIED_EE:
        raise StateError("chain state is not tagged MODIFIED_EE")
    return _step(state, model, rng_main, rng_aux)


@dataclass(frozen=True)
class RunConfig:
    model: object
    algorithm: Algorithm
    epsilon: float
    x0: object
    y0: object
    seed: int = 0


@dataclass(frozen=True)
class ChainTrace:
    xs: np.ndarray
    ys: np.ndarray


def run_chain(config: RunConfig, n_steps: int, seed: int | None = None) -> ChainTrace:
    """Run one chain for ``n_steps`` ticks; reproducible from the seed.

    Main-chain and auxiliary randomness are spawned as two sub-streams of the
    seed, so re-running with a different main stream leaves the auxiliary path
    unchanged.
    """
    if n_steps < 1:
        raise ConfigError("n_steps must be >= 1")
    if not isinstance(config.model, (FiniteModel, ContinuousModel)):
        raise ConfigError(f"unsupported model type {type(config.model).__name__}")
    base = np.random.SeedSequence(config.seed if seed is None else seed)
    rng_main, rng_aux = (np.random.default_rng(s) for s in base.spawn(2))
    state = init_chain(config.model, config.algorithm, config.epsilon,
                       config.x0, config.y0)
    xs, ys = [], []
    for _ in range(n_steps):
        _step(state, config.model, rng_main, rng_aux)
        xs.append(state.x)
        ys.append(state.y)
    return ChainTrace(xs=np.asarray(xs), ys=np.asarray(ys))


@dataclass
class Ladder:
    """m+1 lockstep chains; level l resamples from level l-1's history.

    Level 0 is a plain Markov chain.  Reservoir l (for level l >= 1) holds
    level l-1's samples weighted by w_l = pi_l / pi_{l-1}; it is seeded with
    level l-1's start the same way a single IRMCMC seeds theta_0.
    """

    epsilon: float
    models: list          # per level: objects with sample kernel for that level
    weight_fns: list      # index l-1 holds w_l, l = 1..m
    xs: list
    reservoirs: list[WeightedEmpirical]
    n: int = 0
    seed_retired: bool = False
    rngs: list = field(default_factory=list)

    @property
    def m(self) -> int:
        return len(self.xs) - 1


def build_ladder(kernels, weight_fns, x0s, epsilon: float, seed: int = 0) -> Ladder:
    """``kernels[l]`` moves level l; ``weight_fns[l-1]`` is w_l for l >= 1."""
    if len(kernels) != len(x0s) or len(weight_fns) != len(kernels) - 1:
        raise ConfigError("inconsistent ladder sizes")
    if not (0 < epsilon < 1):
        raise ConfigError("epsilon must lie in (0, 1)")
    reservoirs = []
    for lvl in range(1, len(kernels)):
        res = WeightedEmpirical()
        res.push(x0s[lvl - 1], 1.0)  # theta_0 seed from the feeding level
        reservoirs.append(res)
    rngs = [np.random.default_rng(s)
            for s in np.random.SeedSequence(seed).spawn(len(kernels))]
    return Ladder(epsilon=epsilon, models=list(kernels), weight_fns=list(weight_fns),
                  xs=list(x0s), reservoirs=reservoirs, rngs=rngs)


def ladder_tick(ladder: Ladder, rngs: Sequence[np.random.Generator] | None = None) -> Ladder:
    """Advance every level once; all reservoirs gain one entry."""
    rngs = ladder.rngs if rngs is None else rngs
    new_xs = list(ladder.xs)
    new_xs[0] = ladder.models[0].sample_from(int(ladder.xs[0]), rngs[0]) \
        if hasattr(ladder.models[0], "sample_from") else ladder.models[0](ladder.xs[0], rngs[0])
    for lvl in range(1, len(ladder.xs)):
        rng = rngs[lvl]
        if rng.random() < ladder.epsilon:
            new_xs[lvl] = ladder.reservoirs[lvl - 1].sample(rng)
        else:
            mdl = ladder.models[lvl]
            new_xs[lvl] = mdl.sample_from(int(ladder.xs[lvl]), rng) \
                if hasattr(mdl, "sample_from") else mdl(ladder.xs[lvl], rng)
    if not ladder.seed_retired:
        for res in ladder.reservoirs:
            res.set_weight(0, 0.0)
        ladder.seed_retired = True
    for lvl in range(1, len(ladder.xs)):
        w = ladder.weight_fns[lvl - 1](new_xs[lvl - 1])  # raises if above w_max
        ladder.reservoirs[lvl - 1].push(new_xs[lvl - 1], w)
    ladder.xs = new_xs
    ladder.n += 1
    return ladder
