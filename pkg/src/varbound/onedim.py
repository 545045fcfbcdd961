"""1-D variation accounting: grid decomposition, slope floor, bound chain.

For a slope threshold l the interval [0, d] is cut into cells of width
h = 0.5*l/c1.  Cells on which |dpsi/dz| <= l throughout form the low-slope
part; on the complement the slope provably exceeds 0.5*l, so psi is monotone
there and each complement interval contributes at most 2a of band variation.
Adding the parts gives d*(l + 4*c1*a/l + 2*a), and l = sqrt(a) turns that
into the square-root certificate c2*sqrt(a).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .domain import Profile, WeightFunction, Window, ledger_c2
from .quad import (MonotoneSegmentation, QuadratureResult, integrate_interval,
                   exact_windowed_variation, segment_monotone,
                   windowed_variation_between)
from .truncate import windowed_derivative


@dataclass(frozen=True)
class GridDecomposition:
    """Split of [0, d] at step h = 0.5*l/c1 into low-slope cells and the rest."""

    l: float
    h: float
    q: int                 # q*h < d <= (q+1)*h
    m_cells: tuple         # cells fully inside {|dpsi/dz| <= l}
    lambda_part: tuple     # maximal intervals of the complement
    r1: int                # number of lambda intervals

    def __post_init__(self):
        if self.r1 != len(self.lambda_part):
            raise ValueError("r1 must count the lambda intervals")


@dataclass(frozen=True)
class SlopeFloorReport:
    """Minimum sampled |dpsi/dz| over the complement part vs the 0.5*l floor."""

    passed: bool
    floor: float
    min_slope: float
    margin: float
    witness_z: Optional[float]
    samples_used: int
    vacuous: bool          # empty complement


@dataclass(frozen=True)
class Bound1D:
    """The analytic chain values for one (a, l) pair."""

    a: float
    l: float
    m_part_bound: float        # d*l
    lambda_part_bound: float   # (2*d/h + 2)*a = 4*d*c1*a/l + 2*a
    total_bound: float         # d*(l + 4*c1*a/l + 2*a)
    c2: float                  # ledger constant d*(1+4*c1)+2
    sqrt_certificate: Optional[float]  # c2*sqrt(a) when l == sqrt(a)


@dataclass(frozen=True)
class ChainReport:
    """Measured variation against every link of the bound chain."""

    profile: str
    a: float
    l: float
    measured_total: float
    measured_m: float
    measured_lambda: float
    r1: int
    link_parts: float          # d*l + 2*r1*a
    link_formula: float        # d*(l + 4*c1*a/l + 2*a)
    sqrt_certificate: Optional[float]
    per_interval_ok: bool      # each lambda interval contributes <= 2a
    passed: bool


@dataclass(frozen=True)
class KappaPartition:
    """Strictly increasing thresholds a = k_1 < ... < k_{end} = 1."""

    kappas: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kappas, dtype=float)
        if k.ndim != 1 or k.size < 2:
            raise ValueError("partition needs at least two points")
        if np.any(np.diff(k) <= 0):
            raise ValueError("partition must be strictly increasing")
        if not (0.0 < k[0] < 1.0) or k[-1] != 1.0:
            raise ValueError("partition must run from a in (0,1) to exactly 1")
        object.__setattr__(self, "kappas", k)
        k.setflags(write=False)

    @classmethod
    def uniform(cls, a: float, k: int) -> "KappaPartition":
        pts = np.linspace(a, 1.0, k + 1)
        pts[-1] = 1.0
        return cls(pts)

    @classmethod
    def geometric(cls, a: float, k: int) -> "KappaPartition":
        pts = np.geomspace(a, 1.0, k + 1)
        pts[-1] = 1.0
        return cls(pts)

    @property
    def a(self) -> float:
        return float(self.kappas[0])

    @property
    def k(self) -> int:
        return self.kappas.size - 1

    @property
    def theta(self) -> float:
        return float(np.max(np.diff(self.kappas)))


def decompose(profile: Profile, l: float, samples_per_cell: int = 32) -> GridDecomposition:
    """Classify each h-cell by whether |dpsi/dz| <= l at every sampled point."""
    if l <= 0:
        raise ValueError("slope threshold l must be positive")
    if samples_per_cell < 2:
        raise ValueError("samples_per_cell must be >= 2")
    d = profile.length
    c1 = profile.hessian_bound
    h = 0.5 * l / c1
    q = int(math.ceil(d / h - 1e-12)) - 1
    if q < 0:
        q = 0
    # guard the defining inequalities q*h < d <= (q+1)*h against fp drift
    while q * h >= d:
        q -= 1
    while (q + 1) * h < d:
        q += 1

    edges = [r * h for r in range(q + 1)] + [d]
    frac = np.linspace(0.0, 1.0, samples_per_cell)
    m_flags = []
    for r in range(q + 1):
        z = edges[r] + (edges[r + 1] - edges[r]) * frac
        m_flags.append(bool(np.all(np.abs(profile.dpsi(z)) <= l)))

    m_cells = tuple((edges[r], edges[r + 1]) for r in range(q + 1) if m_flags[r])
    lam = []
    r = 0
    while r <= q:
        if m_flags[r]:
            r += 1
            continue
        start = r
        while r <= q and not m_flags[r]:
            r += 1
        lam.append((edges[start], edges[r]))
    dec = GridDecomposition(l=l, h=h, q=q, m_cells=m_cells,
                            lambda_part=tuple(lam), r1=len(lam))
    if not dec.r1 < d / h + 1:
        raise AssertionError("lambda interval count exceeded d/h + 1")
    return dec


def check_slope_floor(dec: GridDecomposition, profile: Profile,
                      samples: int = 10_000) -> SlopeFloorReport:
    """Verify |dpsi/dz| > 0.5*l at sampled points of the complement part."""
    floor = 0.5 * dec.l
    lam = dec.lambda_part
    if not lam:
        return SlopeFloorReport(True, floor, math.inf, math.inf, None, 0, True)
    total_len = sum(b - a for a, b in lam)
    min_slope = math.inf
    witness = None
    used = 0
    for (a, b) in lam:
        ns = max(8, int(round(samples * (b - a) / total_len)))
        z = np.linspace(a, b, ns)
        sl = np.abs(profile.dpsi(z))
        i = int(np.argmin(sl))
        used += ns
        if float(sl[i]) < min_slope:
            min_slope = float(sl[i])
            witness = float(z[i])
    passed = min_slope > floor
    return SlopeFloorReport(passed, floor, min_slope, min_slope - floor,
                            None if passed else witness, used, False)


# keep the historical operation name used by the CLI subcommand
check_lemma22 = check_slope_floor


def bound_1d(profile: Profile, a: float, l: float) -> Bound1D:
    """Analytic bound values for one (a, l); certificate included when l = sqrt(a)."""
    if not (0.0 < a < 0.5):
        raise ValueError("threshold a must lie in (0, 1/2)")
    if l <= 0:
        raise ValueError("slope threshold l must be positive")
    d = profile.length
    c1 = profile.hessian_bound
    m_part = d * l
    lam_part = 4.0 * d * c1 * a / l + 2.0 * a
    total = d * (l + 4.0 * c1 * a / l + 2.0 * a)
    c2 = ledger_c2(d, c1)
    cert = c2 * math.sqrt(a) if math.isclose(l, math.sqrt(a), rel_tol=1e-12) else None
    return Bound1D(a, l, m_part, lam_part, total, c2, cert)


def chain_check(profile: Profile, a: float, l: float,
                seg: Optional[MonotoneSegmentation] = None,
                samples_per_cell: int = 32) -> ChainReport:
    """Measure the band variation and test it against every chain link.

    Links: measured <= d*l + 2*r1*a <= d*(l + 4*c1*a/l + 2*a), and at
    l = sqrt(a) additionally <= c2*sqrt(a).  The measured value is exact
    (monotone segmentation), so no quadrature slack is needed.
    """
    if seg is None:
        seg = segment_monotone(profile)
    dec = decompose(profile, l, samples_per_cell)
    bnd = bound_1d(profile, a, l)
    w = Window(0.0, a)
    measured_m = sum(windowed_variation_between(profile, w, seg, z0, z1)
                     for z0, z1 in dec.m_cells)
    lam_vals = [windowed_variation_between(profile, w, seg, z0, z1)
                for z0, z1 in dec.lambda_part]
    measured_lambda = sum(lam_vals)
    measured_total = exact_windowed_variation(profile, w, seg)

    slack = 1e-12
    per_interval_ok = all(v <= 2.0 * a + slack for v in lam_vals)
    link_parts = bnd.m_part_bound + 2.0 * dec.r1 * a
    ok = (measured_total <= link_parts + slack
          and link_parts <= bnd.total_bound + slack
          and per_interval_ok
          and measured_m <= bnd.m_part_bound + slack
          and measured_lambda <= 2.0 * dec.r1 * a + slack)
    if bnd.sqrt_certificate is not None:
        ok = ok and bnd.total_bound <= bnd.sqrt_certificate + slack
    return ChainReport(profile.name, a, l, measured_total, measured_m,
                       measured_lambda, dec.r1, link_parts, bnd.total_bound,
                       bnd.sqrt_certificate, per_interval_ok, ok)


def variation_partition(profile: Profile, kp: KappaPartition,
                        seg: Optional[MonotoneSegmentation] = None) -> np.ndarray:
    """Band variations over the partition windows [k_v, k_{v+1}), v = 1..k."""
    if seg is None:
        seg = segment_monotone(profile)
    k = kp.kappas
    return np.array([exact_windowed_variation(profile, Window(float(k[i]), float(k[i + 1])), seg)
                     for i in range(kp.k)])


@dataclass(frozen=True)
class ProfileGammaReport:
    """Weighted off-band integral vs its partition majorant and prefix caps."""

    gamma_profile: QuadratureResult
    upper: float
    deltas: np.ndarray
    prefix_ok: bool
    prefix_margin: float   # min of c2*sqrt(k_{r+1}) - prefix sum
    passed: bool


def profile_gamma_upper(profile: Profile, f: WeightFunction, kp: KappaPartition,
                        seg: Optional[MonotoneSegmentation] = None,
                        tol: float = 1e-6) -> ProfileGammaReport:
    """Compare the weighted band integral against sum f(k_v)*(delta psi)_v.

    Also verifies the prefix inequality: partial sums of the variations stay
    below c2*sqrt(k_{r+1}) with the ledger c2 of this profile.
    """
    deltas = variation_partition(profile, kp, seg)
    k = kp.kappas
    fk = np.asarray(f(k[:-1]), dtype=float)
    upper = float(np.sum(fk * deltas))

    a = kp.a
    w = Window(a, 1.0)
    gq = integrate_interval(
        lambda z: np.abs(windowed_derivative(profile, z, w)) * _safe_weight(f, profile, z, w),
        profile.length, base_cells=256, tol=tol, max_doublings=14)

    c2 = ledger_c2(profile.length, profile.hessian_bound)
    caps = c2 * np.sqrt(k[1:])
    prefix = np.cumsum(deltas)
    margin = float(np.min(caps - prefix))
    prefix_ok = bool(np.all(prefix <= caps + 1e-12))
    passed = prefix_ok and gq.value <= upper + gq.error_estimate + 1e-9
    return ProfileGammaReport(gq, upper, deltas, prefix_ok, margin, passed)


def _safe_weight(f: WeightFunction, profile: Profile, z: np.ndarray, w: Window) -> np.ndarray:
    # evaluate the weight only where the window is active (never at |psi| = 0)
    mag = np.abs(profile.psi(z))
    inside = (mag >= w.lo) & (mag < w.hi)
    out = np.zeros_like(mag)
    if np.any(inside):
        out[inside] = f(mag[inside])
    return np.where(inside, out, 1.0)
