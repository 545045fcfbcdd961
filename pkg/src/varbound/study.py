"""End-to-end sweeps: constant ledgers, threshold grids, scaling fits, CSV.

For each (field, weight, a) row the sweep records gamma1, gamma2, the axis
bound, and the certified bounds C1*sqrt(a) and C2 built from the ledger
constants.  Pass flags are pure functions of the numeric columns; the CSV
schema is fixed so that golden runs are byte-comparable.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .domain import ConstantLedger, ScalarField, WeightFunction, ledger_c2
from .gamma import QuadConfig, axis_reduction_sweep, band_sweep
from .nestedlp import ledger_c3

CSV_HEADER = ("name,f,a,gamma1,gamma1_err,gamma2,gamma2_err,axis_bound,"
              "C1_sqrt_a,C2,pass_g1,pass_g2")

DEFAULT_A_GRID = tuple(2.0 ** (-e) for e in range(2, 13))  # 2^-2 ... 2^-12


def constants_ledger(n: int, d: float, c1: float, f: WeightFunction) -> ConstantLedger:
    """Assemble the explicit constants for dimension n, half-side d, Hessian c1.

    c2 = d*(1+4*c1)+2 certifies the 1-D chain; c3 = c2*(B_f + I_f/2) the
    weighted one; the n-D constants multiply in the number of axes and the
    (n-1)-cube volume: C = n * (2d)^(n-1) * (1-D constant).
    """
    c2 = ledger_c2(d, c1)
    c3 = ledger_c3(f, c2)
    factor = n * (2.0 * d) ** (n - 1)
    prov = (f"c2=d(1+4c1)+2 with d={d!r}, c1={c1!r}; "
            f"c3=c2*(B+I/2) with B={f.sqrt_bound!r}, I={f.integral_01!r} ({f.name}); "
            f"C1=n(2d)^(n-1)c2, C2=n(2d)^(n-1)c3 with n={n}")
    return ConstantLedger(c1=c1, c2=c2, c3=c3, C1=factor * c2, C2=factor * c3,
                          provenance=prov)


@dataclass(frozen=True)
class SweepRow:
    name: str
    f: str
    a: float
    gamma1: float
    gamma1_err: float
    gamma2: float
    gamma2_err: float
    axis_bound: float
    axis_err: float
    C1_sqrt_a: float
    C2: float
    converged: bool

    @property
    def pass_g1(self) -> bool:
        return self.gamma1 + self.gamma1_err <= self.C1_sqrt_a

    @property
    def pass_g2(self) -> bool:
        return self.gamma2 + self.gamma2_err <= self.C2

    @property
    def pass_axis(self) -> bool:
        return self.gamma1 <= self.axis_bound + self.gamma1_err + self.axis_err

    def csv_fields(self) -> list:
        return [self.name, self.f, repr(self.a), repr(self.gamma1),
                repr(self.gamma1_err), repr(self.gamma2), repr(self.gamma2_err),
                repr(self.axis_bound), repr(self.C1_sqrt_a), repr(self.C2),
                str(int(self.pass_g1)), str(int(self.pass_g2))]


@dataclass(frozen=True)
class SweepResult:
    field: str
    rows: list
    exponent: Optional[float]   # slope of log gamma1 vs log a, noise rows excluded
    C1_star: Optional[float]    # empirical max of gamma1/sqrt(a)

    @property
    def all_pass(self) -> bool:
        return all(r.pass_g1 and r.pass_g2 for r in self.rows)


def _fit_exponent(rows: Sequence[SweepRow]) -> Optional[float]:
    # log of noise-dominated values corrupts slopes: keep rows well above the
    # quadrature error estimate, and only converged ones
    pts = [(math.log(r.a), math.log(r.gamma1)) for r in rows
           if r.converged and r.gamma1 > 10.0 * r.gamma1_err and r.gamma1 > 0.0]
    if len(pts) < 2:
        return None
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    return float(np.polyfit(xs, ys, 1)[0])


def scaling_sweep(field: ScalarField, weights: Sequence[WeightFunction],
                  a_grid: Optional[Sequence[float]] = None,
                  config: Optional[QuadConfig] = None) -> SweepResult:
    """gamma1/gamma2 over a geometric threshold grid, with bound checks and fit."""
    a = np.asarray(sorted(a_grid if a_grid is not None else DEFAULT_A_GRID))
    if np.any((a <= 0) | (a >= 0.5)):
        raise ValueError("sweep thresholds must lie in (0, 1/2)")
    cfg = config or QuadConfig.for_dimension(field.domain.n)
    weights = list(weights)

    sweep = band_sweep(field, a, weights, cfg)
    axis = axis_reduction_sweep(field, a, cfg)
    n = field.domain.n
    d = field.domain.half_side

    rows = []
    for iw, w in enumerate(weights):
        led = constants_ledger(n, d, field.hessian_bound, w)
        for j in range(a.size):
            g1 = sweep.gamma1[j]
            g2 = sweep.gamma2[iw][j]
            rows.append(SweepRow(
                name=field.name, f=w.name, a=float(a[j]),
                gamma1=g1.value, gamma1_err=g1.error_estimate,
                gamma2=g2.value, gamma2_err=g2.error_estimate,
                axis_bound=axis[j].value, axis_err=axis[j].error_estimate,
                C1_sqrt_a=led.C1 * math.sqrt(float(a[j])), C2=led.C2,
                converged=g1.converged and g2.converged))

    first = rows[:a.size] if weights else []
    exponent = _fit_exponent(first)
    c1s = [r.gamma1 / math.sqrt(r.a) for r in first
           if r.converged and r.gamma1 > 10.0 * r.gamma1_err]
    c1_star = max(c1s) if c1s else None
    return SweepResult(field.name, rows, exponent, c1_star)


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    for r in rows:
        writer.writerow(r.csv_fields())
    return buf.getvalue()


def worst_margin(rows: Sequence[SweepRow]) -> float:
    """Smallest slack across the certified bound checks (negative = violation)."""
    margins = []
    for r in rows:
        margins.append(r.C1_sqrt_a - (r.gamma1 + r.gamma1_err))
        margins.append(r.C2 - (r.gamma2 + r.gamma2_err))
    return min(margins) if margins else math.inf
