"""Special functions for the eigenbasis.

Gegenbauer polynomials through the standard three-term recurrence and
orthonormal spherical harmonics through the stable normalized
associated-Legendre recurrences.  Upward recurrence in degree is used
throughout; the supported envelope is degree <= ~50, far above what the
basis construction needs.

References
----------
Abramowitz & Stegun 22.7 (Gegenbauer recurrence); the normalized
Legendre scheme follows the GSL technical report convention with the
Condon-Shortley phase kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True, eq=False)
class PolyEval:
    """Value and first derivative of a polynomial evaluation."""

    value: np.ndarray | float
    derivative: np.ndarray | float


def _gegenbauer_value(alpha: float, k: int, x):
    """C_k^(alpha) via k C_k = 2x(k + alpha - 1) C_{k-1} - (k + 2 alpha - 2) C_{k-2}."""
    x = np.asarray(x, dtype=float)
    c_prev = np.ones_like(x)
    if k == 0:
        return c_prev
    c_curr = 2.0 * alpha * x
    for j in range(2, k + 1):
        c_next = (2.0 * x * (j + alpha - 1.0) * c_curr
                  - (j + 2.0 * alpha - 2.0) * c_prev) / j
        c_prev, c_curr = c_curr, c_next
    return c_curr


def gegenbauer(alpha: float, k: int, x) -> PolyEval:
    """Gegenbauer polynomial C_k^(alpha)(x) with its derivative.

    Parameters
    ----------
    alpha : float
        Index, must be positive.
    k : int
        Degree, non-negative.
    x : float or array
        Argument in [-1, 1] (a tiny overshoot is tolerated).

    The derivative uses d/dx C_k^(alpha) = 2 alpha C_{k-1}^(alpha+1).
    """
    if alpha <= 0.0:
        raise DomainError(f"Gegenbauer index must be positive, got {alpha}")
    if k < 0 or int(k) != k:
        raise DomainError(f"degree must be a non-negative integer, got {k}")
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1.0 + 1e-12):
        raise DomainError("argument outside [-1, 1]")
    value = _gegenbauer_value(alpha, int(k), xa)
    if k == 0:
        deriv = np.zeros_like(xa)
    else:
        deriv = 2.0 * alpha * _gegenbauer_value(alpha + 1.0, int(k) - 1, xa)
    if np.isscalar(x):
        return PolyEval(float(value), float(deriv))
    return PolyEval(value, deriv)


def gegenbauer_series_coefficients(alpha: float, k: int) -> list[float]:
    """Exact expansion coefficients of C_k^(alpha) in powers of x.

    Independent of the recurrence: uses the closed summation
    sum_i (-1)^i Gamma(k - i + alpha) / (Gamma(alpha) i! (k - 2i)!) (2x)^(k - 2i),
    returned as coefficients of x^0 .. x^k.  Serves as the test oracle.
    """
    coeffs = [0.0] * (k + 1)
    for i in range(k // 2 + 1):
        power = k - 2 * i
        term = ((-1.0) ** i) * math.gamma(k - i + alpha) / (
            math.gamma(alpha) * math.factorial(i) * math.factorial(power))
        coeffs[power] += term * (2.0 ** power)
    return coeffs


def _legendre_normalized(l: int, m: int, x: np.ndarray) -> np.ndarray:
    """Fully normalized associated Legendre P-bar_l^m(x), m >= 0.

    Normalized so that Y_lm = P-bar_l^m(cos theta) e^{i m phi} is unit
    on the 2-sphere; carries the Condon-Shortley phase.
    """
    x = np.asarray(x, dtype=float)
    sin_th = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    # seed: P-bar_0^0 = 1 / sqrt(4 pi)
    pmm = np.full_like(x, 1.0 / math.sqrt(4.0 * math.pi))
    for mm in range(1, m + 1):
        pmm = -math.sqrt((2.0 * mm + 1.0) / (2.0 * mm)) * sin_th * pmm
    if l == m:
        return pmm
    pm1 = math.sqrt(2.0 * m + 3.0) * x * pmm
    if l == m + 1:
        return pm1
    for ll in range(m + 2, l + 1):
        a = math.sqrt((4.0 * ll * ll - 1.0) / (ll * ll - m * m))
        b = math.sqrt(((ll - 1.0) ** 2 - m * m) / (4.0 * (ll - 1.0) ** 2 - 1.0))
        pmm, pm1 = pm1, a * (x * pm1 - b * pmm)
    return pm1


def spherical_harmonic(l: int, m_z: int, theta, phi):
    """Orthonormal spherical harmonic Y_l^m(theta, phi), Condon-Shortley phase.

    Accepts scalars or arrays; integrates to unit norm against
    sin(theta) d theta d phi.  Conjugation symmetry
    Y_{l,-m} = (-1)^m conj(Y_{l,m}) holds by construction.
    """
    if l < 0 or int(l) != l:
        raise DomainError(f"degree must be a non-negative integer, got {l}")
    if abs(m_z) > l or int(m_z) != m_z:
        raise DomainError(f"order m_z = {m_z} invalid for degree l = {l}")
    th = np.asarray(theta, dtype=float)
    ph = np.asarray(phi, dtype=float)
    m = abs(int(m_z))
    pbar = _legendre_normalized(int(l), m, np.cos(th))
    val = pbar * np.exp(1j * m * ph)
    if m_z < 0:
        val = ((-1.0) ** m) * np.conj(val)
    if np.isscalar(theta) and np.isscalar(phi):
        return complex(val)
    return val
