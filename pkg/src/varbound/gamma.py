"""Band integrals over the cube and the axis-reduction upper bound.

gamma1(a) integrates ||grad sigma|| over the band {|sigma| < a}; gamma2(a)
integrates ||grad sigma|| f(|sigma|) over the complement.  Both run on the
bucketed grid kernels, so a whole threshold grid costs one doubling sequence.
The axis bound replaces the gradient norm by the sum of |partials| and
evaluates the iterated integrals: an outer midpoint rule over the remaining
axes and an inner 1-D integral computed exactly by monotone segmentation of
the line restriction.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .domain import ScalarField, WeightFunction
from .errors import NonFiniteSampleError
from .quad import QuadratureResult

_BASE_CELLS = {1: 64, 2: 16, 3: 8}
_MAX_DOUBLINGS = {1: 16, 2: 9, 3: 7}


@dataclass(frozen=True)
class QuadConfig:
    """Grid-doubling parameters for the band integrals and the axis bound."""

    base_cells: int
    tol: float
    max_doublings: int
    line_scan_points: int = 65
    outer_base_cells: int = 8
    outer_max_doublings: int = 6

    @classmethod
    def for_dimension(cls, n: int, tol: float = 1e-3) -> "QuadConfig":
        base = _BASE_CELLS.get(n, 8)
        maxd = _MAX_DOUBLINGS.get(n, 6)
        return cls(base_cells=base, tol=tol, max_doublings=maxd)

    def override(self, **kw) -> "QuadConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


@dataclass(frozen=True)
class BandSweepResult:
    """Per-threshold quadrature results sharing one doubling sequence."""

    a_grid: np.ndarray
    cells_per_axis: int
    gamma1: list            # QuadratureResult per a
    gamma2: list            # list per weight of [QuadratureResult per a]
    axis_check: list        # n-D midpoint value of sum_i |partial_i| on the band


@dataclass(frozen=True)
class AxisBound:
    a: float
    value: float
    error_estimate: float
    converged: bool
    outer_cells_per_axis: int


@dataclass(frozen=True)
class GammaResult:
    a: float
    gamma1: QuadratureResult
    gamma2: QuadratureResult
    axis_bound: float
    axis_error: float


def _check_a_grid(a_grid) -> np.ndarray:
    a = np.atleast_1d(np.asarray(a_grid, dtype=float))
    if np.any((a <= 0.0) | (a >= 1.0)):
        raise ValueError("thresholds must lie in (0, 1)")
    if a.size > 1 and np.any(np.diff(a) <= 0):
        raise ValueError("threshold grid must be strictly increasing")
    return a


def _compose(sums, m: int):
    G1, W2, AX = sums
    g1 = np.cumsum(G1)[:m]
    g2 = np.sum(W2, axis=1, keepdims=True) - np.cumsum(W2, axis=1)[:, :m]
    ax = np.cumsum(AX)[:m]
    return g1, g2, ax


def _memory_error(hist: list) -> np.ndarray:
    """Trailing doubling differences with first-order decay (see quad.doubling_error)."""
    window = [hist[-1 - s] / (1 << s) for s in range(min(3, len(hist)))]
    return np.max(np.stack(window), axis=0)


def band_sweep(field: ScalarField, a_grid, weights: Sequence[WeightFunction],
               config: Optional[QuadConfig] = None, backend: str = "auto") -> BandSweepResult:
    """Evaluate gamma1/gamma2 on a whole threshold grid with shared doubling.

    Grids double until every gamma1(a) and gamma2(w, a) satisfies
    |I_2N - I_N| <= tol * max(1, |I_2N|), or max_doublings is exhausted.
    """
    a = _check_a_grid(a_grid)
    m = a.size
    cfg = config or QuadConfig.for_dimension(field.domain.n)
    if cfg.max_doublings < 1 or cfg.base_cells < 2 or cfg.tol <= 0:
        raise ValueError("need base_cells >= 2, tol > 0, max_doublings >= 1")
    weights = list(weights)
    min_comparisons = min(3, cfg.max_doublings)

    cells = cfg.base_cells
    prev = _compose(kernels.field_band_sums(field, cells, a, weights, backend), m)
    hist1, hist2, hist_ax = [], [], []
    for t in range(cfg.max_doublings):
        cells *= 2
        cur = _compose(kernels.field_band_sums(field, cells, a, weights, backend), m)
        hist1.append(np.abs(cur[0] - prev[0]))
        hist2.append(np.abs(cur[1] - prev[1]))
        hist_ax.append(np.abs(cur[2] - prev[2]))
        err1 = _memory_error(hist1)
        err2 = _memory_error(hist2)
        ok = (np.all(err1 <= cfg.tol * np.maximum(1.0, np.abs(cur[0])))
              and np.all(err2 <= cfg.tol * np.maximum(1.0, np.abs(cur[1]))))
        if t + 1 >= min_comparisons and ok:
            break
        prev = cur
    err_ax = _memory_error(hist_ax)
    conv1 = err1 <= cfg.tol * np.maximum(1.0, np.abs(cur[0]))
    conv2 = err2 <= cfg.tol * np.maximum(1.0, np.abs(cur[1]))
    total = cells ** field.domain.n

    g1 = [QuadratureResult(float(cur[0][j]), float(err1[j]), total, bool(conv1[j]))
          for j in range(m)]
    g2 = [[QuadratureResult(float(cur[1][iw, j]), float(err2[iw, j]), total, bool(conv2[iw, j]))
           for j in range(m)] for iw in range(len(weights))]
    ax = [QuadratureResult(float(cur[2][j]), float(err_ax[j]), total, True) for j in range(m)]
    return BandSweepResult(a, cells, g1, g2, ax)


def gamma1(field: ScalarField, a: float, config: Optional[QuadConfig] = None) -> QuadratureResult:
    """Riemann estimate of the band-gradient mass at one threshold."""
    return band_sweep(field, [a], [], config).gamma1[0]


def gamma2(field: ScalarField, f: WeightFunction, a: float,
           config: Optional[QuadConfig] = None) -> QuadratureResult:
    """Riemann estimate of the weighted off-band gradient mass."""
    return band_sweep(field, [a], [f], config).gamma2[0][0]


# ---------------------------------------------------------------------------
# Axis-reduction bound: outer midpoint grid x exact inner line variation
# ---------------------------------------------------------------------------

_LINE_BLOCK = 8192
_MAX_LINE_BREAKS = 64
_BISECT_ITERS = 48


def _line_band_variation(field: ScalarField, axis: int, outer_pts: np.ndarray,
                         a_grid: np.ndarray, scan_points: int) -> np.ndarray:
    """Exact band variation of sigma along axis-parallel lines.

    outer_pts has shape (L, n-1): the fixed coordinates of each line.  Returns
    (L, m): per line, the integral of |d sigma/dz| over {|sigma| < a} computed
    by monotone segmentation of the line restriction (derivative sign changes
    bisected; the band [0, a) on |sigma| is the single value interval (-a, a)).
    """
    dom = field.domain
    n = dom.n
    lo = float(dom.center[axis] - dom.half_side)
    hi = float(dom.center[axis] + dom.half_side)
    others = [j for j in range(n) if j != axis]
    L = outer_pts.shape[0]
    m = a_grid.size
    z = np.linspace(lo, hi, scan_points)
    out = np.zeros((L, m))

    for start in range(0, L, _LINE_BLOCK):
        block = outer_pts[start:start + _LINE_BLOCK]
        B = block.shape[0]
        P = np.empty((B, scan_points, n))
        for c, j in enumerate(others):
            P[:, :, j] = block[:, c][:, None]
        P[:, :, axis] = z[None, :]
        dv = np.asarray(field.grad(P), dtype=float)[..., axis]
        if not np.all(np.isfinite(dv)):
            raise NonFiniteSampleError(["line scan"], float("nan"))

        live = ~np.all(dv == 0.0, axis=1)   # silent lines have zero variation
        dvl = dv[live]
        rows_live = np.flatnonzero(live)
        if rows_live.size == 0:
            continue

        br_r, br_c = np.nonzero(dvl[:, :-1] * dvl[:, 1:] < 0.0)
        z_r, z_c = np.nonzero(dvl == 0.0)

        # vectorized bisection of the sign-change brackets
        if br_r.size:
            lo_z = z[br_c].copy()
            hi_z = z[br_c + 1].copy()
            flo = dvl[br_r, br_c].copy()
            pts = np.empty((br_r.size, n))
            for c, j in enumerate(others):
                pts[:, j] = block[rows_live[br_r], c]
            for _ in range(_BISECT_ITERS):
                mid = 0.5 * (lo_z + hi_z)
                pts[:, axis] = mid
                fm = np.asarray(field.grad(pts), dtype=float)[:, axis]
                same = (flo < 0.0) == (fm < 0.0)
                lo_z[same] = mid[same]
                flo[same] = fm[same]
                hi_z[~same] = mid[~same]
            roots_z = 0.5 * (lo_z + hi_z)
        else:
            roots_z = np.empty(0)

        cand_rows = np.concatenate([br_r, z_r])
        cand_z = np.concatenate([roots_z, z[z_c]])
        order = np.argsort(cand_rows, kind="stable")
        cand_rows, cand_z = cand_rows[order], cand_z[order]
        counts = np.bincount(cand_rows, minlength=dvl.shape[0])
        rmax = int(counts.max()) if counts.size else 0
        if rmax > _MAX_LINE_BREAKS:
            raise ValueError("too many derivative roots along a line; "
                             "raise line_scan_points or simplify the field")

        breaks = np.full((dvl.shape[0], rmax + 2), hi)
        breaks[:, 0] = lo
        if cand_rows.size:
            first = np.searchsorted(cand_rows, cand_rows, side="left")
            slot = np.arange(cand_rows.size) - first
            breaks[cand_rows, slot + 1] = cand_z
        breaks.sort(axis=1)

        Pb = np.empty(breaks.shape + (n,))
        for c, j in enumerate(others):
            Pb[:, :, j] = block[rows_live, c][:, None]
        Pb[:, :, axis] = breaks
        vals = np.asarray(field.eval(Pb), dtype=float)
        vlo = np.minimum(vals[:, :-1], vals[:, 1:])
        vhi = np.maximum(vals[:, :-1], vals[:, 1:])
        for jm in range(m):
            aa = a_grid[jm]
            seg = np.clip(np.minimum(vhi, aa) - np.maximum(vlo, -aa), 0.0, None)
            out[rows_live + start, jm] = seg.sum(axis=1)
    return out


def _axis_sum_at(field: ScalarField, outer_cells: int, a_grid: np.ndarray,
                 scan_points: int) -> np.ndarray:
    dom = field.domain
    n = dom.n
    if n == 1:
        inner = _line_band_variation(field, 0, np.zeros((1, 0)), a_grid, scan_points)
        return inner[0]
    total = np.zeros(a_grid.size)
    for axis in range(n):
        others = [j for j in range(n) if j != axis]
        step = 2.0 * dom.half_side / outer_cells
        mids = [dom.center[j] - dom.half_side + (np.arange(outer_cells) + 0.5) * step
                for j in others]
        mesh = np.meshgrid(*mids, indexing="ij")
        outer_pts = np.stack([mm.ravel() for mm in mesh], axis=-1)
        inner = _line_band_variation(field, axis, outer_pts, a_grid, scan_points)
        total += inner.sum(axis=0) * step ** (n - 1)
    return total


def axis_reduction_sweep(field: ScalarField, a_grid,
                         config: Optional[QuadConfig] = None) -> list:
    """Axis bound for every threshold, with outer-grid doubling."""
    a = _check_a_grid(a_grid)
    cfg = config or QuadConfig.for_dimension(field.domain.n)
    if field.domain.n == 1:
        vals = _axis_sum_at(field, 1, a, cfg.line_scan_points)
        return [AxisBound(float(a[j]), float(vals[j]), 0.0, True, 1) for j in range(a.size)]
    min_comparisons = min(3, cfg.outer_max_doublings)
    cells = cfg.outer_base_cells
    prev = _axis_sum_at(field, cells, a, cfg.line_scan_points)
    hist = []
    for t in range(cfg.outer_max_doublings):
        cells *= 2
        cur = _axis_sum_at(field, cells, a, cfg.line_scan_points)
        hist.append(np.abs(cur - prev))
        err = _memory_error(hist)
        if t + 1 >= min_comparisons and np.all(err <= cfg.tol * np.maximum(1.0, np.abs(cur))):
            break
        prev = cur
    conv = err <= cfg.tol * np.maximum(1.0, np.abs(cur))
    return [AxisBound(float(a[j]), float(cur[j]), float(err[j]), bool(conv[j]), cells)
            for j in range(a.size)]


def axis_reduction_bound(field: ScalarField, a: float,
                         config: Optional[QuadConfig] = None) -> float:
    """Sum over axes of the iterated band integrals of |partial_i sigma|."""
    return axis_reduction_sweep(field, [a], config)[0].value


def compute_gamma(field: ScalarField, f: WeightFunction, a: float,
                  config: Optional[QuadConfig] = None) -> GammaResult:
    """gamma1, gamma2 and the axis bound for one (field, weight, threshold)."""
    sweep = band_sweep(field, [a], [f], config)
    ab = axis_reduction_sweep(field, [a], config)[0]
    return GammaResult(a=float(a), gamma1=sweep.gamma1[0], gamma2=sweep.gamma2[0][0],
                       axis_bound=ab.value, axis_error=ab.error_estimate)
