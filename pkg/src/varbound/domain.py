"""Core objects: cube domains, scalar fields, 1-D profiles, weight functions.

Everything is immutable after construction and safe to share across threads.
Corpus entries ship with analytically exact derivative callables and certified
constants (Hessian bound, weight certificates); the verification suites lean
on those constants, so they are closed-form sups, not sampled estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .errors import OutsideDomainError

# Field/weight kind tags shared with the grid kernels (compiled and fallback).
KIND_CONST = 0
KIND_LINEAR = 1
KIND_BOWL = 2
KIND_TRIG = 3
KIND_SADDLE = 4

WEIGHT_LOG1 = 1   # 1 - ln(x)
WEIGHT_POW13 = 2  # x**(-1/3)
WEIGHT_LOG0 = 3   # -ln(x)

# Default half-sides keep |sigma| < 1 for every corpus field of that dimension
# (the 3-D bowl reaches 3*d^2/2, so d=0.9 would break the hypothesis).
DEFAULT_HALF_SIDE = {1: 0.9, 2: 0.9, 3: 0.7}
MARGIN_FRACTION = 1e-3  # evaluation slack around the cube, as a fraction of d


@dataclass(frozen=True)
class CubeDomain:
    """Axis-aligned cube {|x_j - center_j| <= half_side} with evaluation slack."""

    n: int
    center: np.ndarray
    half_side: float
    margin: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"dimension must be >= 1, got {self.n}")
        if self.half_side <= 0:
            raise ValueError("half_side must be positive")
        if self.margin <= 0:
            raise ValueError("margin must be positive")
        c = np.asarray(self.center, dtype=float).reshape(self.n)
        object.__setattr__(self, "center", c)
        c.setflags(write=False)

    @classmethod
    def centered(cls, n: int, half_side: float, margin: Optional[float] = None) -> "CubeDomain":
        if margin is None:
            margin = MARGIN_FRACTION * half_side
        return cls(n=n, center=np.zeros(n), half_side=half_side, margin=margin)

    @property
    def volume(self) -> float:
        return (2.0 * self.half_side) ** self.n

    def contains(self, x: np.ndarray, slack: float = 0.0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.all(np.abs(x - self.center) <= self.half_side + slack, axis=-1)

    def require_inside(self, x: np.ndarray) -> None:
        """Raise OutsideDomainError if any point leaves the cube+margin region."""
        ok = self.contains(x, slack=self.margin)
        if not np.all(ok):
            bad = np.asarray(x, dtype=float).reshape(-1, self.n)[~np.atleast_1d(ok).ravel()][0]
            raise OutsideDomainError(tuple(bad))


@dataclass(frozen=True)
class ScalarField:
    """Twice differentiable sigma on a cube, |sigma| < 1, with Hessian bound c1.

    ``eval`` maps arrays of shape (..., n) to (...); ``grad`` to (..., n).
    ``kernel`` (kind tag, parameter tuple) is set for corpus entries so the
    compiled grid kernel can evaluate them without Python callbacks.
    """

    domain: CubeDomain
    eval: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    hessian_bound: float
    name: str
    kernel: Optional[tuple] = None

    def __post_init__(self):
        if self.hessian_bound <= 0:
            raise ValueError("hessian_bound must be positive")

    def sigma(self, x) -> np.ndarray:
        return np.asarray(self.eval(np.asarray(x, dtype=float)))

    def gradient(self, x) -> np.ndarray:
        return np.asarray(self.grad(np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class Profile:
    """A function psi(z) on [0, length] with |psi| < 1 and |psi''| < c1."""

    length: float
    eval: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    hessian_bound: float
    name: str
    # True when sup|psi| = 1 is attained on a measure-zero set (the corpus sine
    # and ramp profiles); integrals and bounds are unaffected.
    endpoint_degenerate: bool = False

    def psi(self, z) -> np.ndarray:
        return np.asarray(self.eval(np.asarray(z, dtype=float)))

    def dpsi(self, z) -> np.ndarray:
        return np.asarray(self.deriv(np.asarray(z, dtype=float)))


@dataclass(frozen=True)
class WeightFunction:
    """Decreasing weight f on (0, 1] with certificates B_f and I_f.

    ``sqrt_bound``  : B_f with f(x)*sqrt(x) <= B_f on (0, 1]
    ``integral_01`` : I_f = integral over (0,1] of f(x)/sqrt(x) dx (closed form)
    ``tail_integral_from`` : closed form of integral over [a,1] of f/sqrt(x),
    used to cross-check quadrature; None for user-supplied weights.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    sqrt_bound: float
    integral_01: float
    name: str
    kernel_id: Optional[int] = None
    tail_integral_from: Optional[Callable[[float], float]] = None
    endpoint_degenerate: bool = False  # f(1) == 0 (admitted; bounds need f >= 0 only)

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.eval(np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class Window:
    """Half-open band [lo, hi) applied to |sigma| or |psi|."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo < self.hi <= 1.0):
            raise ValueError(f"window needs 0 <= lo < hi <= 1, got [{self.lo}, {self.hi})")

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class ConstantLedger:
    """Explicit a-independent constants certifying the bounds.

    c2, c3 are the 1-D constants (depend only on c1, d, f); C1, C2 multiply in
    the number of axes and the (n-1)-cube volume from the axis reduction.
    """

    c1: float
    c2: float
    c3: float
    C1: float
    C2: float
    provenance: str

    def __post_init__(self):
        for label in ("c1", "c2", "c3", "C1", "C2"):
            if getattr(self, label) <= 0:
                raise ValueError(f"ledger entry {label} must be positive")


def ledger_c2(d: float, c1: float) -> float:
    """1-D variation constant: d*(1 + 4*c1) + 2.

    For a < 1/2 the chain bound d*(sqrt(a) + 4*c1*sqrt(a) + 2*a) is majorized
    by this constant times sqrt(a) whenever d*sqrt(a) <= 1.
    """
    return d * (1.0 + 4.0 * c1) + 2.0


# ---------------------------------------------------------------------------
# Validation reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    passed: bool
    worst_value: float
    worst_point: tuple
    threshold: float


@dataclass(frozen=True)
class FieldValidation:
    name: str
    samples_per_axis: int
    sigma_in_range: CheckResult       # |sigma| < 1
    gradient_consistent: CheckResult  # analytic vs central difference
    hessian_bounded: CheckResult      # sampled second partials vs c1

    @property
    def passed(self) -> bool:
        return (self.sigma_in_range.passed and self.gradient_consistent.passed
                and self.hessian_bounded.passed)


@dataclass(frozen=True)
class ProfileValidation:
    name: str
    samples: int
    psi_in_range: CheckResult
    deriv_consistent: CheckResult
    second_deriv_bounded: CheckResult

    @property
    def passed(self) -> bool:
        return (self.psi_in_range.passed and self.deriv_consistent.passed
                and self.second_deriv_bounded.passed)


@dataclass(frozen=True)
class WeightValidation:
    name: str
    samples: int
    decreasing_nonneg: CheckResult
    sqrt_bound_holds: CheckResult
    integral_matches: CheckResult   # tail-refined numeric vs certified I_f

    @property
    def passed(self) -> bool:
        return (self.decreasing_nonneg.passed and self.sqrt_bound_holds.passed
                and self.integral_matches.passed)


HESSIAN_SLACK = 1e-3   # sampled second partials may exceed c1 by this relative slack
GRAD_TOL = 1e-6        # absolute mismatch allowed between analytic and FD gradient


def _sample_grid(domain: CubeDomain, samples_per_axis: int) -> np.ndarray:
    axes = [np.linspace(domain.center[j] - domain.half_side,
                        domain.center[j] + domain.half_side,
                        samples_per_axis) for j in range(domain.n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def validate_field(field: ScalarField, samples_per_axis: int) -> FieldValidation:
    """Check the standing hypotheses on a field by dense sampling.

    Checks |sigma| < 1, analytic gradient vs central differences (abs 1e-6),
    and sampled second partials vs hessian_bound (relative slack 1e-3).
    Finite-difference steps stay inside the cube's margin.
    """
    if samples_per_axis < 3:
        raise ValueError("samples_per_axis must be >= 3")
    dom = field.domain
    pts = _sample_grid(dom, samples_per_axis)
    dom.require_inside(pts)

    sig = field.sigma(pts)
    i = int(np.argmax(np.abs(sig)))
    sigma_check = CheckResult(bool(np.abs(sig[i]) < 1.0), float(np.abs(sig[i])),
                              tuple(pts[i]), 1.0)

    h_g = 1e-5 * dom.half_side
    grad = field.gradient(pts)
    fd = np.empty_like(grad)
    for j in range(dom.n):
        e = np.zeros(dom.n)
        e[j] = h_g
        fd[:, j] = (field.sigma(pts + e) - field.sigma(pts - e)) / (2.0 * h_g)
    err = np.abs(grad - fd)
    flat = int(np.argmax(err))
    i, j = divmod(flat, dom.n)
    grad_check = CheckResult(bool(err[i, j] <= GRAD_TOL), float(err[i, j]),
                             tuple(pts[i]), GRAD_TOL)

    h = 1e-4 * dom.half_side
    worst = -1.0
    worst_pt = pts[0]
    for j in range(dom.n):
        ej = np.zeros(dom.n)
        ej[j] = h
        pure = np.abs(field.sigma(pts + ej) - 2.0 * sig + field.sigma(pts - ej)) / h**2
        i = int(np.argmax(pure))
        if pure[i] > worst:
            worst, worst_pt = float(pure[i]), pts[i]
        for jj in range(j + 1, dom.n):
            ek = np.zeros(dom.n)
            ek[jj] = h
            mixed = np.abs(field.sigma(pts + ej + ek) - field.sigma(pts + ej - ek)
                           - field.sigma(pts - ej + ek) + field.sigma(pts - ej - ek)) / (4.0 * h**2)
            i = int(np.argmax(mixed))
            if mixed[i] > worst:
                worst, worst_pt = float(mixed[i]), pts[i]
    bound = field.hessian_bound * (1.0 + HESSIAN_SLACK)
    hess_check = CheckResult(worst <= bound, worst, tuple(worst_pt), bound)

    return FieldValidation(field.name, samples_per_axis, sigma_check, grad_check, hess_check)


def validate_profile(profile: Profile, samples: int = 4096) -> ProfileValidation:
    """Sampled hypothesis checks for a profile.

    |psi| < 1 is sampled at cell midpoints: corpus profiles attain |psi| = 1 on
    measure-zero sets, which no Riemann integral or bound here can see.
    """
    d = profile.length
    z_mid = (np.arange(samples) + 0.5) * (d / samples)
    psi = profile.psi(z_mid)
    i = int(np.argmax(np.abs(psi)))
    psi_check = CheckResult(bool(np.abs(psi[i]) < 1.0), float(np.abs(psi[i])),
                            (float(z_mid[i]),), 1.0)

    h = 1e-6 * d
    z_in = np.linspace(h, d - h, samples)
    fd = (profile.psi(z_in + h) - profile.psi(z_in - h)) / (2.0 * h)
    err = np.abs(profile.dpsi(z_in) - fd)
    i = int(np.argmax(err))
    deriv_check = CheckResult(bool(err[i] <= 1e-5), float(err[i]), (float(z_in[i]),), 1e-5)

    h2 = 1e-4 * d
    z2 = np.linspace(h2, d - h2, samples)
    second = np.abs(profile.psi(z2 + h2) - 2.0 * profile.psi(z2) + profile.psi(z2 - h2)) / h2**2
    i = int(np.argmax(second))
    bound = profile.hessian_bound * (1.0 + HESSIAN_SLACK)
    second_check = CheckResult(bool(second[i] <= bound), float(second[i]), (float(z2[i]),), bound)

    return ProfileValidation(profile.name, samples, psi_check, deriv_check, second_check)


def weight_integral_numeric(weight: WeightFunction, rel_piece_cut: float = 1e-12,
                            cells_per_piece: int = 512) -> float:
    """Tail-refined estimate of integral over (0,1] of f(x)/sqrt(x) dx.

    Midpoint rule on dyadic pieces [2^-k-1, 2^-k]; the geometric refinement
    toward 0 handles the integrable endpoint singularity.
    """
    total = 0.0
    for k in range(0, 2000):
        hi = 2.0 ** (-k)
        lo = hi / 2.0
        step = (hi - lo) / cells_per_piece
        x = lo + (np.arange(cells_per_piece) + 0.5) * step
        piece = float(np.sum(weight(x) / np.sqrt(x)) * step)
        total += piece
        if k > 4 and abs(piece) < rel_piece_cut * max(abs(total), 1.0):
            break
    return total


def validate_weight(weight: WeightFunction, samples: int = 4096) -> WeightValidation:
    """Check monotone decrease, the sqrt bound, and the integral certificate."""
    # geometric grid reaches far into the singular end of (0, 1]
    x = np.geomspace(1e-9, 1.0, samples)
    fx = weight(x)
    nonneg = bool(np.all(fx >= 0.0))
    decreasing = bool(np.all(np.diff(fx) <= 0.0))
    i = int(np.argmax(np.diff(fx))) if samples > 1 else 0
    dec_check = CheckResult(nonneg and decreasing, float(np.max(np.diff(fx))),
                            (float(x[i]),), 0.0)

    prod = fx * np.sqrt(x)
    i = int(np.argmax(prod))
    bound = weight.sqrt_bound * (1.0 + 1e-9)
    sqrt_check = CheckResult(bool(prod[i] <= bound), float(prod[i]), (float(x[i]),), bound)

    numeric = weight_integral_numeric(weight)
    rel = abs(numeric - weight.integral_01) / abs(weight.integral_01)
    int_check = CheckResult(bool(rel <= 5e-3), numeric, (0.0,), weight.integral_01)

    return WeightValidation(weight.name, samples, dec_check, sqrt_check, int_check)


# ---------------------------------------------------------------------------
# Built-in corpus
# ---------------------------------------------------------------------------

FIELD_NAMES = ("constant-0", "linear-x1", "bowl", "trig-k3", "saddle")
PROFILE_NAMES = ("linear", "quadratic", "sin2pi", "constant")
WEIGHT_NAMES = ("weight-log1", "weight-pow13", "weight-log0")

_SADDLE_SCALE = 0.25
_TRIG_AMP = 0.9


def _trig_factors(n: int):
    # alternate sin, cos, sin, ... across the axes
    return [np.sin if j % 2 == 0 else np.cos for j in range(n)]


def _trig_dfactors(n: int):
    return [(np.cos, 1.0) if j % 2 == 0 else (np.sin, -1.0) for j in range(n)]


def corpus_field(name: str, n: int = 2, half_side: Optional[float] = None) -> ScalarField:
    """Look up a corpus field by name for dimension n (1, 2, or 3 by default)."""
    if half_side is None:
        if n not in DEFAULT_HALF_SIDE:
            raise ValueError(f"no default cube for n={n}; pass half_side")
        half_side = DEFAULT_HALF_SIDE[n]
    dom = CubeDomain.centered(n, half_side)
    d = half_side

    if name == "constant-0":
        return ScalarField(
            dom,
            eval=lambda x: np.zeros(np.asarray(x).shape[:-1]),
            grad=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            hessian_bound=1.0, name=name, kernel=(KIND_CONST, (0.0,)))

    if name == "linear-x1":
        if d >= 1.0:
            raise ValueError("linear-x1 needs half_side < 1 to keep |sigma| < 1")

        def lin_grad(x):
            g = np.zeros_like(np.asarray(x, dtype=float))
            g[..., 0] = 1.0
            return g

        return ScalarField(dom, eval=lambda x: np.asarray(x)[..., 0], grad=lin_grad,
                           hessian_bound=1.0, name=name, kernel=(KIND_LINEAR, ()))

    if name == "bowl":
        if n * d * d / 2.0 >= 1.0:
            raise ValueError("bowl needs n*d^2/2 < 1 to keep |sigma| < 1")
        return ScalarField(
            dom,
            eval=lambda x: 0.5 * np.sum(np.asarray(x, dtype=float) ** 2, axis=-1),
            grad=lambda x: np.asarray(x, dtype=float).copy(),
            hessian_bound=1.0, name=name, kernel=(KIND_BOWL, ()))

    if name.startswith("trig-k"):
        k = float(name[len("trig-k"):])
        amp = _TRIG_AMP
        facs = _trig_factors(n)
        dfacs = _trig_dfactors(n)

        def trig_eval(x, _facs=facs, _amp=amp, _k=k):
            x = np.asarray(x, dtype=float)
            out = np.full(x.shape[:-1], _amp)
            for j, tau in enumerate(_facs):
                out = out * tau(_k * x[..., j])
            return out

        def trig_grad(x, _facs=facs, _dfacs=dfacs, _amp=amp, _k=k, _n=n):
            x = np.asarray(x, dtype=float)
            vals = [tau(_k * x[..., j]) for j, tau in enumerate(_facs)]
            g = np.empty_like(x)
            for t in range(_n):
                dtau, sign = _dfacs[t]
                comp = np.full(x.shape[:-1], _amp * _k * sign)
                comp = comp * dtau(_k * x[..., t])
                for u in range(_n):
                    if u != t:
                        comp = comp * vals[u]
                g[..., t] = comp
            return g

        # sup of every |second partial| is amp*k^2, attained once k*d >= pi/2
        if k * d < math.pi / 2.0:
            raise ValueError("trig corpus assumes k*half_side >= pi/2 so c1 is attained")
        return ScalarField(dom, eval=trig_eval, grad=trig_grad,
                           hessian_bound=amp * k * k, name=name,
                           kernel=(KIND_TRIG, (amp, k)))

    if name == "saddle":
        s = _SADDLE_SCALE
        if n >= 2:
            if 4.0 * s * d**3 >= 1.0:
                raise ValueError("saddle needs 4*s*d^3 < 1")

            def sad_eval(x, _s=s):
                x = np.asarray(x, dtype=float)
                return _s * (x[..., 0] ** 3 - 3.0 * x[..., 0] * x[..., 1] ** 2)

            def sad_grad(x, _s=s):
                x = np.asarray(x, dtype=float)
                g = np.zeros_like(x)
                g[..., 0] = _s * (3.0 * x[..., 0] ** 2 - 3.0 * x[..., 1] ** 2)
                g[..., 1] = -6.0 * _s * x[..., 0] * x[..., 1]
                return g
        else:
            def sad_eval(x, _s=s):
                return _s * np.asarray(x, dtype=float)[..., 0] ** 3

            def sad_grad(x, _s=s):
                x = np.asarray(x, dtype=float)
                g = np.zeros_like(x)
                g[..., 0] = 3.0 * _s * x[..., 0] ** 2
                return g

        return ScalarField(dom, eval=sad_eval, grad=sad_grad,
                           hessian_bound=6.0 * s * d, name=name,
                           kernel=(KIND_SADDLE, (s,)))

    raise KeyError(f"unknown corpus field {name!r} (have {FIELD_NAMES})")


def corpus_profile(name: str, length: float = 1.0) -> Profile:
    """Look up a corpus profile by name (defined on [0, length], default [0, 1])."""
    d = length
    if name == "linear":
        return Profile(d, eval=lambda z: np.asarray(z, dtype=float),
                       deriv=lambda z: np.ones_like(np.asarray(z, dtype=float)),
                       hessian_bound=1.0, name=name, endpoint_degenerate=(d >= 1.0))
    if name == "quadratic":
        return Profile(d, eval=lambda z: np.asarray(z, dtype=float) ** 2,
                       deriv=lambda z: 2.0 * np.asarray(z, dtype=float),
                       hessian_bound=2.0, name=name, endpoint_degenerate=(d >= 1.0))
    if name == "sin2pi":
        w = 2.0 * math.pi
        return Profile(d, eval=lambda z: np.sin(w * np.asarray(z, dtype=float)),
                       deriv=lambda z: w * np.cos(w * np.asarray(z, dtype=float)),
                       hessian_bound=w * w, name=name,
                       endpoint_degenerate=(d >= 0.25))
    if name == "constant":
        c = 0.5
        return Profile(d, eval=lambda z: np.full(np.asarray(z, dtype=float).shape, c),
                       deriv=lambda z: np.zeros_like(np.asarray(z, dtype=float)),
                       hessian_bound=1.0, name=name)
    raise KeyError(f"unknown corpus profile {name!r} (have {PROFILE_NAMES})")


def corpus_weight(name: str) -> WeightFunction:
    """Look up a corpus weight function by name."""
    if name == "weight-log1":
        return WeightFunction(
            eval=lambda x: 1.0 - np.log(np.asarray(x, dtype=float)),
            sqrt_bound=2.0 * math.exp(-0.5),   # max of sqrt(x)(1-ln x) at x = 1/e
            integral_01=6.0,                   # antiderivative 6 sqrt(x) - 2 sqrt(x) ln x
            name=name, kernel_id=WEIGHT_LOG1,
            tail_integral_from=lambda a: 6.0 - (6.0 * math.sqrt(a) - 2.0 * math.sqrt(a) * math.log(a)))
    if name == "weight-pow13":
        return WeightFunction(
            eval=lambda x: np.asarray(x, dtype=float) ** (-1.0 / 3.0),
            sqrt_bound=1.0,                    # sup of x^(1/6) on (0, 1]
            integral_01=6.0,                   # antiderivative 6 x^(1/6)
            name=name, kernel_id=WEIGHT_POW13,
            tail_integral_from=lambda a: 6.0 - 6.0 * a ** (1.0 / 6.0))
    if name == "weight-log0":
        return WeightFunction(
            eval=lambda x: -np.log(np.asarray(x, dtype=float)),
            sqrt_bound=2.0 / math.e,           # max of -sqrt(x) ln x at x = 1/e^2
            integral_01=4.0,                   # antiderivative 4 sqrt(x) - 2 sqrt(x) ln x
            name=name, kernel_id=WEIGHT_LOG0,
            tail_integral_from=lambda a: 4.0 - (4.0 * math.sqrt(a) - 2.0 * math.sqrt(a) * math.log(a)),
            endpoint_degenerate=True)
    raise KeyError(f"unknown corpus weight {name!r} (have {WEIGHT_NAMES})")


def builtin_corpus(n: int = 2, half_side: Optional[float] = None) -> dict:
    """The named corpus: fields for dimension n, profiles on [0,1], weights."""
    return {
        "fields": [corpus_field(nm, n=n, half_side=half_side) for nm in FIELD_NAMES],
        "profiles": [corpus_profile(nm) for nm in PROFILE_NAMES],
        "weights": [corpus_weight(nm) for nm in WEIGHT_NAMES],
    }
