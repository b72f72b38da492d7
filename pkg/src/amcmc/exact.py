"""Exact finite-state computations backing the samplers and the test oracles.

Everything here is deterministic linear algebra or exhaustive enumeration:
stationary solves, marginal propagation, the two-state closed forms, the
frozen-kernel invariant measure, the modified-EE joint chain, and the
brute-force expected-resampling-measure oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .core import FiniteDistribution, KernelMatrix, WeightFunction, tv_distance
from .errors import (BudgetError, DimensionError, DomainError, StructureError)

ENUMERATION_BUDGET = int(2e7)


def stationary_distribution(kernel: KernelMatrix) -> FiniteDistribution:
    """Solve pi K = pi, normalized; dense solve with a replaced constraint row."""
    K = kernel.rows
    S = kernel.size
    n_comp, _ = connected_components(K > 0, directed=True, connection="strong")
    if n_comp != 1:
        raise StructureError("kernel is reducible; stationary law not unique")
    A = K.T - np.eye(S)
    A[-1, :] = 1.0
    rhs = np.zeros(S)
    rhs[-1] = 1.0
    pi = np.linalg.solve(A, rhs)
    pi = np.clip(pi, 0.0, None)
    return FiniteDistribution(pi / pi.sum())


def propagate(p: FiniteDistribution, kernel: KernelMatrix, n: int) -> FiniteDistribution:
    """Marginal law p K^n after n steps."""
    if len(p) != kernel.size:
        raise DimensionError("distribution / kernel size mismatch")
    if n < 0:
        raise DomainError("n must be >= 0")
    v = p.probs.copy()
    for _ in range(n):
        v = v @ kernel.rows
    return FiniteDistribution(v / v.sum())


@dataclass(frozen=True)
class TwoStateAux:
    """Two-state auxiliary chain on (+1, -1) with kernel [[1-a, a], [b, 1-b]].

    State indices: 0 <-> +1, 1 <-> -1.  Second eigenvalue is 1 - a - b.
    """

    a: float
    b: float
    y0: int = -1

    def __post_init__(self):
        if not (0 < self.a < 1 and 0 < self.b < 1):
            raise DomainError("need a, b in (0, 1)")
        if self.y0 not in (+1, -1):
            raise DomainError("y0 must be +1 or -1")

    @property
    def kernel(self) -> KernelMatrix:
        return KernelMatrix(np.array([[1 - self.a, self.a], [self.b, 1 - self.b]]))

    @property
    def stationary(self) -> FiniteDistribution:
        return FiniteDistribution(np.array([self.b, self.a]) / (self.a + self.b))

    @property
    def lambda2(self) -> float:
        return 1.0 - self.a - self.b

    @property
    def y0_index(self) -> int:
        return 0 if self.y0 == +1 else 1


def cesaro_gap(aux: TwoStateAux, n: int) -> float:
    """Closed form for E pihat_{Y,n}({-1}) - pi_Y({-1}), start Y_0 = -1."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if aux.y0 != -1:
        raise DomainError("closed form assumes the chain starts at -1")
    lam = aux.lambda2
    if lam == 0.0:
        raise StructureError("a + b = 1: degenerate spectrum, use direct averaging")
    # P(Y_i = -1) - pi_Y(-1) = (b/(a+b)) lam^i; sum the geometric series
    return (aux.b / (aux.a + aux.b)) * (lam - lam ** (n + 1)) / ((1 - lam) * n)


def p_theta_kernel(P: KernelMatrix, theta: FiniteDistribution, eps: float) -> KernelMatrix:
    """(1 - eps) P(x, .) + eps theta(.), rowwise."""
    if len(theta) != P.size:
        raise DimensionError("theta / kernel size mismatch")
    if not (0.0 <= eps <= 1.0):
        raise DomainError("eps must lie in [0, 1]")
    return KernelMatrix((1 - eps) * P.rows + eps * np.tile(theta.probs, (P.size, 1)))


def k_theta_exact(theta: FiniteDistribution, w: WeightFunction) -> KernelMatrix:
    """Exact equi-energy jump kernel: K(x, z) = theta(z) (1 ^ w(z)/w(x)) off-diagonal."""
    wv = w.values
    if wv is None:
        raise DomainError("finite kernel requires tabulated weights")
    if len(theta) != len(wv):
        raise DimensionError("theta / weight size mismatch")
    if np.any((theta.probs > 0) & (wv <= 0)):
        raise DomainError("theta puts mass where w = 0")
    S = len(wv)
    K = np.zeros((S, S))
    for x in range(S):
        if wv[x] <= 0:
            raise DomainError(f"w({x}) = 0: acceptance ratio undefined")
        alpha = np.minimum(1.0, wv / wv[x])
        K[x] = theta.probs * alpha
        K[x, x] = 0.0
        K[x, x] = 1.0 - K[x].sum()
    return KernelMatrix(K)


def _truncation_length(eps: float, tol: float) -> int:
    if eps >= 1.0:
        return 1
    return max(1, math.ceil(math.log(tol) / math.log(1.0 - eps)))


def pi_theta(P: KernelMatrix, theta: FiniteDistribution, eps: float,
             tol: float = 1e-14) -> FiniteDistribution:
    """Invariant law of the frozen mixture kernel: eps sum (1-eps)^j theta P^j.

    Truncated once the geometric tail drops below ``tol``; renormalized.
    """
    if eps <= 0.0:
        raise DomainError("eps = 0: geometric series diverges")
    if eps > 1.0:
        raise DomainError("eps must lie in (0, 1]")
    J = _truncation_length(eps, tol)
    v = theta.probs.copy()
    acc = np.zeros_like(v)
    coeff = eps
    for _ in range(J + 1):
        acc += coeff * v
        v = v @ P.rows
        coeff *= (1.0 - eps)
    return FiniteDistribution(acc / acc.sum())


def geometric_mixing_check(P: KernelMatrix, theta: FiniteDistribution, eps: float,
                           x: int, n: int, tol: float = 1e-14) -> float:
    """TV(delta_x P_theta^n, pi_theta); callers assert <= 2 (1-eps)^n + slack."""
    pt = pi_theta(P, theta, eps, tol)
    Pt = p_theta_kernel(P, theta, eps)
    law = propagate(FiniteDistribution.point_mass(x, P.size), Pt, n)
    return tv_distance(law, pt)


# ---------------------------------------------------------------------------
# Modified-EE joint chain on {+1, -1} x {+1, -1}
# Product states ordered (1,1), (1,-1), (-1,1), (-1,-1); x-major, y-minor.
# ---------------------------------------------------------------------------

def joint_kernel_from_rates(a: float, b: float, c: float, d: float) -> KernelMatrix:
    """Joint (X, Y) kernel of the swap-proposal chain for raw rates (a, b, c, d).

    c and d are the acceptance probabilities of the moves 1 -> -1 and -1 -> 1.
    """
    for name, v in (("a", a), ("b", b)):
        if not (0 < v < 1):
            raise DomainError(f"{name} must lie in (0, 1)")
    for name, v in (("c", c), ("d", d)):
        if not (0 <= v <= 1):
            raise DomainError(f"{name} must lie in [0, 1]")
    return KernelMatrix(np.array([
        [1 - a,        a,            0,            0],
        [(1 - c) * b,  (1 - c) * (1 - b), c * b,   c * (1 - b)],
        [d * (1 - a),  d * a,        (1 - d) * (1 - a), (1 - d) * a],
        [0,            0,            b,            1 - b],
    ]))


def joint_stationary_closed_form(a: float, b: float, c: float, d: float) -> FiniteDistribution:
    """Closed-form stationary law of ``joint_kernel_from_rates``."""
    lam = 1 - a - b
    num = np.array([
        b * d * (b + lam * c),
        a * b * d,
        a * b * c,
        a * c * (a + lam * d),
    ])
    denom = (a + b) * (lam * c * d + a * c + b * d)
    return FiniteDistribution(num / denom)


def swap_acceptance(pi_x: FiniteDistribution, pi_y: FiniteDistribution) -> tuple[float, float]:
    """(c, d) = (alpha(1, -1), alpha(-1, 1)) for the two-state swap proposal."""
    if np.any(pi_x.probs <= 0) or np.any(pi_y.probs <= 0):
        raise DomainError("swap acceptance needs strictly positive densities")
    px, py = pi_x.probs, pi_y.probs  # index 0 <-> +1, 1 <-> -1
    c = min(1.0, (px[1] / px[0]) * (py[0] / py[1]))
    d = min(1.0, (px[0] / px[1]) * (py[1] / py[0]))
    return c, d


def ee_joint_kernel(aux: TwoStateAux, pi_x: FiniteDistribution) -> KernelMatrix:
    """Joint kernel of the modified-EE pair for auxiliary rates (a, b) and target pi_X."""
    c, d = swap_acceptance(pi_x, aux.stationary)
    return joint_kernel_from_rates(aux.a, aux.b, c, d)


def joint_x_marginal(joint: FiniteDistribution) -> FiniteDistribution:
    p = joint.probs
    if len(p) != 4:
        raise DimensionError("expected a law on the 4 product states")
    return FiniteDistribution(np.array([p[0] + p[1], p[2] + p[3]]))


# ---------------------------------------------------------------------------
# Brute-force oracle for eta_n = E theta_hat_n, and the exact IRMCMC marginal
# ---------------------------------------------------------------------------

def eta_oracle(P_Y: KernelMatrix, y0: int, w: WeightFunction, n: int) -> FiniteDistribution:
    """Exact expected resampling measure by enumerating all length-n aux paths."""
    S = P_Y.size
    if n == 0:
        return FiniteDistribution.point_mass(y0, S)
    if S ** n > ENUMERATION_BUDGET:
        raise BudgetError(f"path enumeration S^n = {S}^{n} exceeds budget")
    wv = w.values
    if wv is None:
        raise DomainError("oracle requires tabulated weights")
    rows = P_Y.rows
    out = np.zeros(S)
    counts = np.zeros(S)

    def rec(state: int, depth: int, prob: float) -> None:
        if depth == n:
            mass = counts * wv
            total = mass.sum()
            if total <= 0:
                raise DomainError("all visited states carry zero weight")
            np.add(out, prob * (mass / total), out=out)
            return
        row = rows[state]
        for z in range(S):
            pz = row[z]
            if pz == 0.0:
                continue
            counts[z] += 1
            rec(z, depth + 1, prob * pz)
            counts[z] -= 1

    rec(y0, 0, 1.0)
    return FiniteDistribution(out / out.sum())


def eta_sequence(P_Y: KernelMatrix, y0: int, w: WeightFunction,
                 n_max: int) -> list[FiniteDistribution]:
    """[eta_0, ..., eta_{n_max}] by brute force (eta_0 = delta_{y0})."""
    return [eta_oracle(P_Y, y0, w, k) for k in range(n_max + 1)]


def eta_sequence_uniform(P_Y: KernelMatrix, y0: int, n_max: int) -> list[FiniteDistribution]:
    """Same sequence for w == 1, where eta_n is the linear Cesaro average."""
    S = P_Y.size
    etas = [FiniteDistribution.point_mass(y0, S)]
    v = etas[0].probs.copy()
    acc = np.zeros(S)
    for k in range(1, n_max + 1):
        v = v @ P_Y.rows
        acc += v
        etas.append(FiniteDistribution(acc / k))
    return etas


def exact_irmcmc_law(P: KernelMatrix, eps: float, etas: list[FiniteDistribution],
                     x0: int, n: int) -> FiniteDistribution:
    """Exact marginal of X_n for IRMCMC.

    Uses the one-step recursion L_m = (1 - eps) L_{m-1} P + eps eta_{m-1},
    whose unrolled form is the regeneration mixture
    (1-eps)^n delta_{x0} P^n + sum_k eps (1-eps)^{n-k} eta_{k-1} P^{n-k}.
    """
    if not (0.0 < eps < 1.0):
        raise DomainError("eps must lie in (0, 1)")
    if len(etas) < n:
        raise DimensionError(f"need eta_0..eta_{n - 1}, got {len(etas)} entries")
    v = FiniteDistribution.point_mass(x0, P.size).probs
    for m in range(1, n + 1):
        v = (1 - eps) * (v @ P.rows) + eps * etas[m - 1].probs
    return FiniteDistribution(v / v.sum())
