"""Interacting-chain samplers with exact finite-state verification."""

from .core import (FiniteDistribution, KernelMatrix, WeightedEmpirical,
                   WeightFunction, tv_distance)
from .models import ContinuousModel, FiniteModel
from .samplers import (Algorithm, ChainState, RunConfig, build_ladder,
                       ee_step, init_chain, irmcmc_step, ladder_tick,
                       main_transition, modified_ee_step, run_chain)

__all__ = [
    "Algorithm", "ChainState", "ContinuousModel", "FiniteDistribution",
    "FiniteModel", "KernelMatrix", "RunConfig", "WeightFunction",
    "WeightedEmpirical", "build_ladder", "ee_step", "init_chain",
    "irmcmc_step", "ladder_tick", "main_transition", "modified_ee_step",
    "run_chain", "tv_distance",
]

__version__ = "0.1.0"
