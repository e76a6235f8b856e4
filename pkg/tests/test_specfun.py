import math
from fractions import Fraction

import numpy as np
import pytest

from s3sigma import DomainError, gegenbauer, spherical_harmonic
from s3sigma.specfun import gegenbauer_series_coefficients


# ---------------------------------------------------------------------------
# Gegenbauer polynomials

def test_degree_zero_is_one():
    for alpha in (0.5, 1.0, 2.5):
        for x in (-1.0, -0.3, 0.0, 0.9, 1.0):
            assert gegenbauer(alpha, 0, x).value == 1.0


def test_degree_one_is_linear():
    for alpha in (1.0, 2.0, 3.5):
        for x in (-0.7, 0.1, 1.0):
            assert gegenbauer(alpha, 1, x).value == pytest.approx(2 * alpha * x,
                                                                  rel=1e-15)


def _recurrence_fraction(alpha: int, k: int, x: Fraction) -> Fraction:
    # the same three-term recurrence run in exact rational arithmetic
    c_prev, c_curr = Fraction(1), 2 * alpha * x
    if k == 0:
        return c_prev
    for j in range(2, k + 1):
        c_next = (2 * x * (j + alpha - 1) * c_curr
                  - (j + 2 * alpha - 2) * c_prev) / j
        c_prev, c_curr = c_curr, c_next
    return c_curr


def _series_fraction(alpha: int, k: int, x: Fraction) -> Fraction:
    # independent summation formula, exact for integer alpha
    total = Fraction(0)
    for i in range(k // 2 + 1):
        num = Fraction(math.factorial(k - i + alpha - 1),
                       math.factorial(alpha - 1) * math.factorial(i)
                       * math.factorial(k - 2 * i))
        total += (-1) ** i * num * (2 * x) ** (k - 2 * i)
    return total


@pytest.mark.parametrize("alpha", [1, 2, 3, 4])
@pytest.mark.parametrize("k", [0, 1, 2, 3, 4, 5, 6])
def test_recurrence_matches_series_exactly(alpha, k):
    for x in (Fraction(-3, 4), Fraction(0), Fraction(1, 3), Fraction(1)):
        assert _recurrence_fraction(alpha, k, x) == _series_fraction(alpha, k, x)
        got = gegenbauer(float(alpha), k, float(x)).value
        assert got == pytest.approx(float(_series_fraction(alpha, k, x)),
                                    rel=1e-13, abs=1e-13)


def test_series_coefficients_match_evaluation():
    coeffs = gegenbauer_series_coefficients(3.0, 4)
    x = 0.37
    direct = sum(c * x ** p for p, c in enumerate(coeffs))
    assert gegenbauer(3.0, 4, x).value == pytest.approx(direct, rel=1e-13)


@pytest.mark.parametrize("alpha", [1.0, 2.0, 3.0])
def test_orthogonality_under_weight(alpha):
    # substitute x = cos(chi): the weighted integral becomes a smooth
    # trigonometric integrand handled exactly by Gauss-Legendre in chi
    nodes, weights = np.polynomial.legendre.leggauss(120)
    chi = 0.5 * math.pi * (nodes + 1.0)
    w = 0.5 * math.pi * weights * np.sin(chi) ** (2.0 * alpha)
    x = np.cos(chi)
    for j in range(0, 9):
        for k in range(j + 1, 9):
            val = float(np.sum(w * gegenbauer(alpha, j, x).value
                               * gegenbauer(alpha, k, x).value))
            assert abs(val) < 1e-10


def test_derivative_identity_against_central_differences(rng):
    for alpha in (1.0, 2.0, 4.0):
        for k in (1, 3, 6):
            for x in rng.uniform(-0.8, 0.8, size=5):
                h = 1e-5
                fd = (gegenbauer(alpha, k, x - 2 * h).value
                      - 8 * gegenbauer(alpha, k, x - h).value
                      + 8 * gegenbauer(alpha, k, x + h).value
                      - gegenbauer(alpha, k, x + 2 * h).value) / (12 * h)
                assert gegenbauer(alpha, k, x).derivative == pytest.approx(
                    fd, rel=1e-8, abs=1e-8)


def test_gegenbauer_domain_errors():
    with pytest.raises(DomainError):
        gegenbauer(0.0, 2, 0.5)
    with pytest.raises(DomainError):
        gegenbauer(-1.0, 2, 0.5)
    with pytest.raises(DomainError):
        gegenbauer(1.0, 2, 1.5)


# ---------------------------------------------------------------------------
# spherical harmonics

def test_y00_constant():
    for th, ph in ((0.0, 0.0), (1.2, 2.3), (math.pi, 5.0)):
        assert spherical_harmonic(0, 0, th, ph) == pytest.approx(
            1.0 / (2.0 * math.sqrt(math.pi)))


def test_low_order_closed_forms():
    th, ph = 0.83, 2.17
    assert spherical_harmonic(1, 0, th, ph) == pytest.approx(
        math.sqrt(3 / (4 * math.pi)) * math.cos(th), rel=1e-14)
    expected = -math.sqrt(3 / (8 * math.pi)) * math.sin(th) * np.exp(1j * ph)
    assert spherical_harmonic(1, 1, th, ph) == pytest.approx(expected, rel=1e-14)


def test_orthonormality_on_two_sphere():
    # Gauss-Legendre in cos(theta) and the uniform rule in phi integrate
    # the products exactly for l <= 6
    n_th, n_ph = 16, 32
    u, wu = np.polynomial.legendre.leggauss(n_th)
    theta = np.arccos(u)
    phi = 2 * math.pi * np.arange(n_ph) / n_ph
    tg, pg = np.meshgrid(theta, phi, indexing="ij")
    wg = np.broadcast_to((wu * 2 * math.pi / n_ph)[:, None], tg.shape)
    labels = [(l, m) for l in range(7) for m in range(-l, l + 1)]
    vals = {lm: spherical_harmonic(lm[0], lm[1], tg, pg) for lm in labels}
    for a in labels:
        for b in labels:
            inner = np.sum(wg * np.conj(vals[a]) * vals[b])
            expected = 1.0 if a == b else 0.0
            assert abs(inner - expected) < 1e-10


def test_conjugation_symmetry(rng):
    for _ in range(20):
        l = int(rng.integers(0, 7))
        m = int(rng.integers(0, l + 1))
        th = float(rng.uniform(0, math.pi))
        ph = float(rng.uniform(0, 2 * math.pi))
        lhs = spherical_harmonic(l, -m, th, ph)
        rhs = (-1.0) ** m * np.conj(spherical_harmonic(l, m, th, ph))
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_finite_at_poles():
    for l in range(7):
        for m in range(-l, l + 1):
            for th in (0.0, math.pi):
                v = spherical_harmonic(l, m, th, 0.7)
                assert np.isfinite(v.real) and np.isfinite(v.imag)
                bound = math.sqrt((2 * l + 1) / (4 * math.pi))
                assert abs(v) <= bound + 1e-12
                if m != 0:
                    assert abs(v) < 1e-14


def test_scipy_cross_check():
    scipy_special = pytest.importorskip("scipy.special")
    th, ph = 1.1, 0.6
    for l in range(5):
        for m in range(-l, l + 1):
            if hasattr(scipy_special, "sph_harm_y"):
                ref = scipy_special.sph_harm_y(l, m, th, ph)
            else:
                ref = scipy_special.sph_harm(m, l, ph, th)
            assert spherical_harmonic(l, m, th, ph) == pytest.approx(
                complex(ref), abs=1e-12)


def test_invalid_order_rejected():
    with pytest.raises(DomainError):
        spherical_harmonic(2, 3, 0.3, 0.4)
