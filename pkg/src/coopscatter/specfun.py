"""Numerically stable special functions shared by the scattering models.

The spherical-mode expansions run to orders n of a few times the cloud size
sigma, with modified-Bessel arguments up to sigma^2 (= 400 at sigma = 20).
In that regime the naive recurrences either lose every significant digit
(upward j_n for n > x) or overflow (unscaled I_{n+1/2}(sigma^2)), so the
recurrence direction and the scaling are what this module is about.
Everything is plain float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

__all__ = [
    "BesselTable",
    "bessel_table",
    "spherical_j",
    "spherical_y",
    "scaled_mod_bessel_half",
    "legendre",
    "exp_integral_e1",
    "gauss_legendre",
]

_RESCALE = 1e250  # magnitude at which downward-recurrence intermediates are renormalized


@dataclass(frozen=True, eq=False)
class BesselTable:
    """Table of spherical Bessel values j_0..j_{n_max}, y_0..y_{n_max} at fixed x > 0."""

    x: float
    n_max: int
    j: np.ndarray
    y: np.ndarray


def bessel_table(n_max: int, x: float) -> BesselTable:
    if x <= 0.0:
        raise ValueError("bessel_table requires x > 0 (y_n is singular at the origin)")
    return BesselTable(x=float(x), n_max=int(n_max), j=spherical_j(n_max, x), y=spherical_y(n_max, x))


def _ratio_cf_j(n: int, x: float, tol: float = 1e-16, max_iter: int = 100_000) -> float:
    """j_{n+1}(x)/j_n(x) by the standard continued fraction (modified Lentz).

    Converges for every x > 0; the iteration count scales with x once x
    exceeds n, which is harmless at the argument sizes used here.
    """
    tiny = 1e-300
    f = tiny
    c = f
    d = 0.0
    for k in range(1, max_iter + 1):
        b = (2.0 * (n + k) + 1.0) / x
        a = 1.0 if k == 1 else -1.0
        d = b + a * d
        if d == 0.0:
            d = tiny
        c = b + a / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < tol:
            return f
    raise RuntimeError(f"spherical Bessel ratio CF did not converge for n={n}, x={x}")


def spherical_j(n_max: int, x: float) -> np.ndarray:
    """Spherical Bessel functions j_0(x)..j_{n_max}(x).

    Upward recurrence in the oscillatory regime (n_max well below x);
    otherwise Miller-style downward recurrence seeded with the continued
    fraction ratio j_{n_max+1}/j_{n_max} and normalized against the closed
    form j_0 = sin(x)/x (against j_1 when x sits near a zero of sin, where
    the j_0 anchor would destroy all accuracy).
    """
    n_max = int(n_max)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    x = float(x)
    if x < 0.0:
        raise ValueError("spherical_j requires x >= 0")

    out = np.zeros(n_max + 1)
    if x == 0.0:
        out[0] = 1.0
        return out

    j0 = math.sin(x) / x
    out[0] = j0
    if n_max == 0:
        return out
    j1 = math.sin(x) / x**2 - math.cos(x) / x
    out[1] = j1
    if n_max == 1:
        return out

    if n_max <= 0.75 * x:
        for n in range(1, n_max):
            out[n + 1] = (2 * n + 1) / x * out[n] - out[n - 1]
        return out

    work = np.zeros(n_max + 2)
    work[n_max + 1] = _ratio_cf_j(n_max, x)
    work[n_max] = 1.0
    for n in range(n_max, 0, -1):
        work[n - 1] = (2 * n + 1) / x * work[n] - work[n + 1]
        if abs(work[n - 1]) > _RESCALE:
            work[n - 1 :] /= _RESCALE
    if abs(j0) >= abs(j1):
        scale = j0 / work[0]
    else:
        scale = j1 / work[1]
    out[:] = scale * work[: n_max + 1]
    # orders whose true magnitude is below the double-precision floor come out as 0
    out[~np.isfinite(out)] = 0.0
    return out


def spherical_y(n_max: int, x: float) -> np.ndarray:
    """Spherical Bessel functions of the second kind, y_0(x)..y_{n_max}(x).

    Upward recurrence, which is the stable direction for y_n.  For n far
    above x the true values grow without bound and eventually saturate to
    +-inf in float64; callers that divide by matching j_n values are
    expected to mask those orders.
    """
    n_max = int(n_max)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    x = float(x)
    if x <= 0.0:
        raise ValueError("y_n is singular at x = 0; require x > 0")

    out = np.empty(n_max + 1)
    out[0] = -math.cos(x) / x
    if n_max == 0:
        return out
    out[1] = -math.cos(x) / x**2 - math.sin(x) / x
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, n_max):
            out[n + 1] = (2 * n + 1) / x * out[n] - out[n - 1]
    return out


def _ratio_cf_i_half(n: int, x: float, tol: float = 1e-16, max_iter: int = 100_000) -> float:
    """I_{n+3/2}(x)/I_{n+1/2}(x) by the Gautschi continued fraction (all terms positive)."""
    nu = n + 0.5
    tiny = 1e-300
    f = tiny
    c = f
    d = 0.0
    for k in range(1, max_iter + 1):
        b = 2.0 * (nu + k) / x
        d = b + d
        if d == 0.0:
            d = tiny
        c = b + 1.0 / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < tol:
            return f
    raise RuntimeError(f"modified Bessel ratio CF did not converge for n={n}, x={x}")


def scaled_mod_bessel_half(n_max: int, x: float) -> np.ndarray:
    """Scaled half-integer modified Bessel values e^{-x} I_{n+1/2}(x), n = 0..n_max.

    Only the scaled form is ever exposed: the unscaled I_{1/2}(sigma^2)
    overflows float64 already at sigma ~ 27.  Downward recurrence on the
    scaled values (stable: every term is positive, no cancellation), seeded
    by the continued-fraction ratio at the top order and normalized against
    the closed form e^{-x} I_{1/2}(x) = (1 - e^{-2x}) / sqrt(2 pi x).
    """
    n_max = int(n_max)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    x = float(x)
    if x <= 0.0:
        raise ValueError("scaled_mod_bessel_half requires x > 0")

    anchor = (1.0 - math.exp(-2.0 * x)) / math.sqrt(2.0 * math.pi * x)
    if n_max == 0:
        return np.array([anchor])

    work = np.zeros(n_max + 2)
    work[n_max + 1] = _ratio_cf_i_half(n_max, x)
    work[n_max] = 1.0
    for n in range(n_max, 0, -1):
        work[n - 1] = work[n + 1] + (2 * n + 1) / x * work[n]
        if work[n - 1] > _RESCALE:
            work[n - 1 :] /= _RESCALE
    return anchor / work[0] * work[: n_max + 1]


def legendre(n_max: int, u: float) -> np.ndarray:
    """Legendre polynomials P_0(u)..P_{n_max}(u) by the three-term recurrence."""
    n_max = int(n_max)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    u = float(u)
    if abs(u) > 1.0:
        raise ValueError("legendre requires |u| <= 1")

    out = np.empty(n_max + 1)
    out[0] = 1.0
    if n_max == 0:
        return out
    out[1] = u
    for n in range(1, n_max):
        out[n + 1] = ((2 * n + 1) * u * out[n] - n * out[n - 1]) / (n + 1)
    return out


def exp_integral_e1(x: float) -> float:
    """Exponential integral E_1(x) = int_x^inf e^{-u}/u du for x > 0."""
    x = float(x)
    if x <= 0.0:
        raise ValueError("exp_integral_e1 requires x > 0")
    return float(_sp.exp1(x))


def gauss_legendre(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]; exact for degree <= 2m - 1."""
    m = int(m)
    if m < 1:
        raise ValueError("gauss_legendre requires m >= 1")
    nodes, weights = np.polynomial.legendre.leggauss(m)
    return nodes, weights
