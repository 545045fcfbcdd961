"""Band truncation of gradients and the windowed derivative.

The n-dimensional truncation keeps the gradient only where |sigma| < a, i.e.
on the window [0, a); the 1-D windowed derivative generalizes this to any
half-open band [alpha, beta).  Band membership is strict IEEE comparison with
no tolerance: the boundary sets have measure zero, so quadrature never cares,
and determinism is preserved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import Profile, ScalarField, WeightFunction, Window


@dataclass(frozen=True)
class TruncatedGradientSample:
    """One evaluation of the band-truncated gradient."""

    point: np.ndarray
    value: np.ndarray
    inside_band: bool

    def __post_init__(self):
        if not self.inside_band and np.any(self.value != 0.0):
            raise ValueError("value must be zero outside the band")


def _check_threshold(a: float) -> None:
    if not (0.0 < a < 1.0):
        raise ValueError(f"threshold a must lie in (0, 1), got {a}")


def truncated_gradient(field: ScalarField, x, a: float) -> np.ndarray:
    """Gradient of sigma where |sigma(x)| < a, zero vector elsewhere.

    Accepts a single point of shape (n,) or a batch (..., n).
    """
    _check_threshold(a)
    x = np.asarray(x, dtype=float)
    field.domain.require_inside(x)
    inside = np.abs(field.sigma(x)) < a
    return np.where(inside[..., None], field.gradient(x), 0.0)


def sample_truncated_gradient(field: ScalarField, x, a: float) -> TruncatedGradientSample:
    x = np.asarray(x, dtype=float)
    value = truncated_gradient(field, x, a)
    inside = bool(np.abs(field.sigma(x)) < a)
    return TruncatedGradientSample(point=x, value=value, inside_band=inside)


def windowed_derivative(profile: Profile, z, w: Window) -> np.ndarray:
    """dpsi/dz where |psi(z)| lies in [w.lo, w.hi), zero elsewhere."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0.0) or np.any(z > profile.length):
        raise ValueError(f"z must lie in [0, {profile.length}]")
    mag = np.abs(profile.psi(z))
    inside = (mag >= w.lo) & (mag < w.hi)
    return np.where(inside, profile.dpsi(z), 0.0)


def gamma2_integrand(field: ScalarField, f: WeightFunction, x, a: float) -> np.ndarray:
    """||grad sigma|| * f(|sigma|) where |sigma| >= a, else 0.

    f is never evaluated inside the band, in particular never at 0, so the
    continuity convention at sigma = 0 costs nothing.
    """
    _check_threshold(a)
    x = np.asarray(x, dtype=float)
    field.domain.require_inside(x)
    sig = field.sigma(x)
    mag = np.atleast_1d(np.abs(sig))
    outside = mag >= a
    norm = np.atleast_1d(np.linalg.norm(field.gradient(x), axis=-1))
    out = np.zeros(mag.shape)
    if np.any(outside):
        out[outside] = norm[outside] * f(mag[outside])
    return out.reshape(np.shape(sig))
