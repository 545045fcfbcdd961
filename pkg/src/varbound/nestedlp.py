"""Nested-prefix linear program: greedy closed form, exact vertex oracle, limit.

Maximize sum f(k_v)*y_v subject to prefix caps sum_{v<=r} y_v <= c2*sqrt(k_{r+1})
and y >= 0.  With decreasing weights the optimum saturates every cap greedily:
y_1 = c2*sqrt(k_2), y_v = c2*(sqrt(k_{v+1}) - sqrt(k_v)).  The oracle enumerates
polytope vertices exactly (every choice of k tight constraints), so the greedy
form is testable without trusting it.  Refining the partition drives the greedy
objective to c2*(sqrt(a) f(a) + 0.5 * integral_a^1 f(t)/sqrt(t) dt), which the
weight certificates majorize a-independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np

from .domain import WeightFunction
from .errors import CapabilityError, OracleMismatchError
from .onedim import KappaPartition
from .quad import integrate_interval

FEAS_TOL = 1e-12


@dataclass(frozen=True)
class NestedLpInstance:
    """Partition, cap scale c2, objective weights, and the derived caps."""

    kp: KappaPartition
    c2: float
    weights: np.ndarray    # f(k_v), v = 1..k
    caps: np.ndarray       # c2*sqrt(k_{r+1}), r = 1..k

    @classmethod
    def build(cls, kp: KappaPartition, c2: float,
              f: Optional[WeightFunction] = None,
              weights: Optional[np.ndarray] = None) -> "NestedLpInstance":
        if c2 < 0:
            raise ValueError("c2 must be nonnegative")
        if (f is None) == (weights is None):
            raise ValueError("pass exactly one of f or explicit weights")
        w = np.asarray(f(kp.kappas[:-1]) if f is not None else weights, dtype=float)
        if w.shape != (kp.k,):
            raise ValueError("need one weight per partition interval")
        caps = c2 * np.sqrt(kp.kappas[1:])
        return cls(kp, float(c2), w, caps)

    @property
    def k(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class NestedLpSolution:
    y: np.ndarray
    objective: float
    tight_prefixes: tuple

    def feasible(self, inst: NestedLpInstance, tol: float = FEAS_TOL) -> bool:
        return bool(np.all(self.y >= -tol)
                    and np.all(np.cumsum(self.y) <= inst.caps + tol))


def _objective(weights: np.ndarray, y: np.ndarray) -> float:
    # fixed summation order regardless of any caller-side parallelism
    return math.fsum(float(w) * float(v) for w, v in zip(weights, y))


def greedy_solution(inst: NestedLpInstance) -> NestedLpSolution:
    """Saturate every prefix cap: y_1 = caps_1, y_v = caps_v - caps_{v-1}."""
    y = np.empty(inst.k)
    y[0] = inst.caps[0]
    y[1:] = np.diff(inst.caps)
    sol = NestedLpSolution(y, _objective(inst.weights, y), (True,) * inst.k)
    if not sol.feasible(inst):
        raise AssertionError("greedy point infeasible; caps not increasing?")
    return sol


def oracle_max(inst: NestedLpInstance, k_limit: int = 12) -> NestedLpSolution:
    """Exact maximum by enumerating all vertices of the feasible polytope.

    A vertex has k tight constraints among the k prefix caps and k sign
    constraints; each selection yields one candidate by solving the (here
    triangular) linear system.  Ties in the objective are broken toward the
    lexicographically smallest y.
    """
    k = inst.k
    if k > k_limit:
        raise CapabilityError(f"vertex enumeration capped at k={k_limit}, got {k}")
    best_obj = -math.inf
    best_y = None
    for tight in combinations(range(2 * k), k):
        A = np.zeros((k, k))
        b = np.zeros(k)
        for i, c in enumerate(tight):
            if c < k:
                A[i, :c + 1] = 1.0
                b[i] = inst.caps[c]
            else:
                A[i, c - k] = 1.0
        try:
            y = np.linalg.solve(A, b)
        except np.linalg.LinAlgError:
            continue
        if np.any(y < -FEAS_TOL) or np.any(np.cumsum(y) > inst.caps + FEAS_TOL):
            continue
        obj = _objective(inst.weights, y)
        if obj > best_obj + 1e-12:
            best_obj, best_y = obj, y
        elif abs(obj - best_obj) <= 1e-12 and best_y is not None:
            for a_i, b_i in zip(y, best_y):
                if a_i < b_i - 1e-15:
                    best_y = y
                    break
                if a_i > b_i + 1e-15:
                    break
    if best_y is None:
        raise AssertionError("no feasible vertex found")
    tightness = tuple(bool(abs(s - c) <= 1e-9)
                      for s, c in zip(np.cumsum(best_y), inst.caps))
    return NestedLpSolution(best_y, best_obj, tightness)


def riemann_Y(kp: KappaPartition, f: WeightFunction, c2: float) -> float:
    """Greedy objective for the partition: the pre-limit value of the bound."""
    return greedy_solution(NestedLpInstance.build(kp, c2, f=f)).objective


def limit_value(f: WeightFunction, a: float, c2: float, tol: float = 1e-10) -> float:
    """c2*(sqrt(a) f(a) + 0.5 * integral_a^1 f(t)/sqrt(t) dt).

    The integral runs by interval quadrature from the safe endpoint a > 0 and
    is cross-checked against the weight's closed-form tail when it has one.
    """
    if not (0.0 < a < 1.0):
        raise ValueError("threshold a must lie in (0, 1)")
    span = 1.0 - a
    q = integrate_interval(lambda z: f(a + z) / np.sqrt(a + z), span,
                           base_cells=128, tol=tol, max_doublings=14)
    if f.tail_integral_from is not None:
        closed = f.tail_integral_from(a)
        if abs(q.value - closed) > max(1e-7, 1e-6 * abs(closed)):
            raise OracleMismatchError(q.value, closed, f"tail integral of {f.name} from {a}")
    fa = float(f(np.asarray([a]))[0])
    return c2 * (math.sqrt(a) * fa + 0.5 * q.value)


def ledger_c3(f: WeightFunction, c2: float) -> float:
    """a-independent majorant of limit_value: c2*(B_f + I_f/2)."""
    return c2 * (f.sqrt_bound + 0.5 * f.integral_01)


def random_instance(rng: np.random.Generator, k: Optional[int] = None) -> NestedLpInstance:
    """Random partition and strictly decreasing positive weights (property runs)."""
    if k is None:
        k = int(rng.integers(1, 7))
    a = float(rng.uniform(0.05, 0.45))
    interior = np.sort(rng.uniform(a + 1e-3, 1.0 - 1e-3, size=k - 1))
    # enforce distinct, increasing interior points
    for i in range(1, interior.size):
        if interior[i] - interior[i - 1] < 1e-6:
            interior[i] = interior[i - 1] + 1e-6
    kappas = np.concatenate([[a], interior, [1.0]])
    kp = KappaPartition(kappas)
    steps = rng.uniform(1e-3, 1.0, size=k)
    weights = 0.05 + np.cumsum(steps[::-1])[::-1]   # strictly decreasing, positive
    c2 = float(rng.uniform(0.1, 2.0))
    return NestedLpInstance.build(kp, c2, weights=weights)
