"""Distributions, kernels, importance weights and the weighted empirical measure.

Finite state spaces are indexed 0..S-1.  ``FiniteDistribution`` and
``KernelMatrix`` are immutable value types; ``WeightedEmpirical`` is the
append-only resampling reservoir used by the samplers (single writer).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, DomainError, StateError

PROB_TOL = 1e-12


@dataclass(frozen=True)
class FiniteDistribution:
    """Probability mass function on an indexed finite state space."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1:
            raise DimensionError(f"expected 1-d probability vector, got shape {p.shape}")
        if np.any(p < -PROB_TOL):
            raise DomainError("negative probability entry")
        p = np.clip(p, 0.0, None)
        s = p.sum()
        if abs(s - 1.0) > max(PROB_TOL, PROB_TOL * len(p)):
            raise DomainError(f"probabilities sum to {s}, not 1")
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_weights(cls, weights: Sequence[float]) -> "FiniteDistribution":
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0):
            raise DomainError("negative weight")
        total = w.sum()
        if total <= 0:
            raise DomainError("weights sum to zero")
        return cls(w / total)

    @classmethod
    def point_mass(cls, state: int, size: int) -> "FiniteDistribution":
        p = np.zeros(size)
        p[state] = 1.0
        return cls(p)

    def __len__(self) -> int:
        return len(self.probs)

    def __getitem__(self, i: int) -> float:
        return float(self.probs[i])

    def expectation(self, f: Sequence[float]) -> float:
        f = np.asarray(f, dtype=float)
        if f.shape != self.probs.shape:
            raise DimensionError("function values do not match state space size")
        return float(self.probs @ f)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.choice(len(self.probs), size=size, p=self.probs)


@dataclass(frozen=True)
class KernelMatrix:
    """Row-stochastic transition matrix; row i is the law of the move from i."""

    rows: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.rows, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"kernel must be square, got shape {m.shape}")
        if np.any(m < -PROB_TOL):
            raise DomainError("negative transition probability")
        m = np.clip(m, 0.0, None)
        sums = m.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > max(PROB_TOL, PROB_TOL * m.shape[1])):
            raise DomainError("kernel row does not sum to 1")
        m.flags.writeable = False
        object.__setattr__(self, "rows", m)

    @property
    def size(self) -> int:
        return self.rows.shape[0]

    def row(self, i: int) -> FiniteDistribution:
        return FiniteDistribution(self.rows[i] / self.rows[i].sum())

    @property
    def _cum(self) -> np.ndarray:
        cum = getattr(self, "_cum_cache", None)
        if cum is None:
            cum = np.cumsum(self.rows, axis=1)
            object.__setattr__(self, "_cum_cache", cum)
        return cum

    def sample_from(self, state: int, rng: np.random.Generator) -> int:
        idx = int(np.searchsorted(self._cum[state], rng.random(), side="right"))
        return min(idx, self.size - 1)


class WeightFunction:
    """Importance weight w = dpi/dpi_Y, tabulated (finite case) or callable.

    ``w_max`` caches the supremum bound; evaluations above it raise, which is
    how unbounded-weight ladders are caught at run time.
    """

    def __init__(self, values: Sequence[float] | None = None,
                 func: Callable[[float], float] | None = None,
                 w_max: float | None = None):
        if (values is None) == (func is None):
            raise DomainError("provide exactly one of values / func")
        if values is not None:
            v = np.asarray(values, dtype=float)
            if np.any(v < 0):
                raise DomainError("negative importance weight")
            self.values = v
            self.values.flags.writeable = False
            self.w_max = float(v.max()) if w_max is None else float(w_max)
            self._func = None
        else:
            if w_max is None:
                raise DomainError("callable weight requires an explicit w_max")
            self.values = None
            self.w_max = float(w_max)
            self._func = func
        if not np.isfinite(self.w_max):
            raise DomainError("|w|_inf must be finite")

    def __call__(self, state) -> float:
        if self.values is not None:
            w = float(self.values[int(state)])
        else:
            w = float(self._func(state))
        if w < 0:
            raise DomainError(f"w({state}) = {w} < 0")
        if w > self.w_max * (1 + 1e-9):
            raise DomainError(f"w({state}) = {w} exceeds declared bound {self.w_max}")
        return w

    @classmethod
    def uniform(cls, size: int) -> "WeightFunction":
        return cls(values=np.ones(size))

    @classmethod
    def ratio(cls, pi: FiniteDistribution, pi_y: FiniteDistribution) -> "WeightFunction":
        if len(pi) != len(pi_y):
            raise DimensionError("pi and pi_Y live on different spaces")
        if np.any((pi.probs > 0) & (pi_y.probs <= 0)):
            raise DomainError("pi_Y vanishes where pi does not; w unbounded")
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(pi_y.probs > 0, pi.probs / np.where(pi_y.probs > 0, pi_y.probs, 1.0), 0.0)
        return cls(values=v)


class PrefixSumTree:
    """Append-only Fenwick tree over non-negative weights.

    Supports O(log n) append, point update, total, and inverse-CDF lookup.
    Capacity doubles on demand; no rebuilds.
    """

    def __init__(self, capacity: int = 1024):
        self._tree = np.zeros(capacity + 1)
        self._weights: list[float] = []

    def __len__(self) -> int:
        return len(self._weights)

    @property
    def total(self) -> float:
        return self._prefix(len(self._weights))

    def _prefix(self, i: int) -> float:
        s = 0.0
        while i > 0:
            s += self._tree[i]
            i -= i & (-i)
        return s

    def _add(self, i: int, delta: float) -> None:
        n = len(self._weights)
        while i <= n:
            self._tree[i] += delta
            i += i & (-i)

    def append(self, weight: float) -> None:
        if weight < 0:
            raise DomainError("negative weight")
        if len(self._weights) + 1 >= len(self._tree):
            grown = np.zeros(2 * len(self._tree))
            grown[: len(self._tree)] = self._tree
            self._tree = grown
        self._weights.append(float(weight))
        # new node i covers (i - lowbit(i), i]; build it from prefix sums
        i = len(self._weights)
        lo = i - (i & (-i))
        self._tree[i] = weight + (self._prefix(i - 1) - self._prefix(lo))

    def get(self, index: int) -> float:
        return self._weights[index]

    def set(self, index: int, weight: float) -> None:
        if weight < 0:
            raise DomainError("negative weight")
        delta = weight - self._weights[index]
        self._weights[index] = float(weight)
        self._add(index + 1, delta)

    def find(self, target: float) -> int:
        """Smallest 0-based index i with prefix(i+1) > target."""
        idx = 0
        n = len(self._weights)
        bit = 1 << (n.bit_length())
        while bit:
            nxt = idx + bit
            if nxt <= n and self._tree[nxt] <= target:
                target -= self._tree[nxt]
                idx = nxt
            bit >>= 1
        return idx


class WeightedEmpirical:
    """The resampling measure: atoms at pushed states, masses prop. to weights.

    Raw (unnormalized) weights are stored; normalization happens only when
    sampling.  With all weights equal this is the plain empirical measure.
    """

    __slots__ = ("_states", "_tree")

    def __init__(self):
        self._states: list = []
        self._tree = PrefixSumTree()

    def __len__(self) -> int:
        return len(self._states)

    @property
    def total_weight(self) -> float:
        return self._tree.total

    def push(self, state, weight: float) -> "WeightedEmpirical":
        if weight < 0:
            raise DomainError(f"negative weight {weight}")
        self._states.append(state)
        self._tree.append(weight)
        return self

    def set_weight(self, index: int, weight: float) -> None:
        self._tree.set(index, weight)

    def weight(self, index: int) -> float:
        return self._tree.get(index)

    def state(self, index: int):
        return self._states[index]

    def sample(self, rng: np.random.Generator):
        total = self.total_weight
        if len(self._states) == 0 or total <= 0:
            raise StateError("cannot sample from an empty or all-zero reservoir")
        idx = self._tree.find(rng.random() * total)
        return self._states[idx]

    def expectation(self, f: Callable) -> float:
        total = self.total_weight
        if len(self._states) == 0 or total <= 0:
            raise StateError("empty reservoir has no expectation")
        acc = 0.0
        for i, s in enumerate(self._states):
            w = self._tree.get(i)
            if w:
                acc += w * f(s)
        return acc / total

    def as_distribution(self, size: int) -> FiniteDistribution:
        """Exact normalized mass per state (finite state spaces only)."""
        mass = np.zeros(size)
        for i, s in enumerate(self._states):
            mass[int(s)] += self._tree.get(i)
        return FiniteDistribution.from_weights(mass)


def tv_distance(p: FiniteDistribution, q: FiniteDistribution) -> float:
    """Total variation distance (1/2) sum_i |p_i - q_i|, in [0, 1]."""
    if len(p) != len(q):
        raise DimensionError(f"length mismatch: {len(p)} vs {len(q)}")
    return 0.5 * float(np.abs(p.probs - q.probs).sum())


def tv_distance_vec(p: np.ndarray, q: np.ndarray) -> float:
    """TV on raw probability vectors (no validation); internal fast path."""
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def reservoir_push(res: WeightedEmpirical, state, weight: float) -> WeightedEmpirical:
    return res.push(state, weight)


def reservoir_sample(res: WeightedEmpirical, rng: np.random.Generator):
    return res.sample(rng)


def empirical_expectation(res: WeightedEmpirical, f: Callable) -> float:
    return res.expectation(f)
