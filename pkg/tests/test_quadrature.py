import math
from fractions import Fraction

import numpy as np
import pytest

from s3sigma import QuadratureError, build_grid, integrate
from s3sigma.quadrature import exact_volume, integrate_values, volume


def test_total_weight_is_invariant_volume(cfg_odd):
    grid = build_grid(24, 16, 32, cfg_odd)
    rel = abs(volume(grid) - exact_volume(cfg_odd)) / exact_volume(cfg_odd)
    assert rel < 1e-12


def test_normalized_constant_integrates_to_one(cfg):
    grid = build_grid(24, 16, 32, cfg)
    val = integrate(lambda c, t, p: np.full_like(c, 1.0 / exact_volume(cfg)),
                    grid)
    assert val == pytest.approx(1.0, abs=1e-13)


def test_rho_squared_mean_value(cfg_odd):
    # 1-D oracle: mean of cos^2(chi) under sin^2(chi) d chi is exactly 1/4
    grid = build_grid(24, 16, 32, cfg_odd)
    val = integrate(lambda c, t, p: np.cos(c) ** 2, grid)
    assert val == pytest.approx(exact_volume(cfg_odd) / 4.0, rel=1e-13)


def test_zero_function(cfg):
    grid = build_grid(8, 8, 8, cfg)
    assert integrate(lambda c, t, p: np.zeros_like(c), grid) == 0.0


def test_phi_odd_function_vanishes(cfg):
    grid = build_grid(12, 8, 16, cfg)
    val = integrate(lambda c, t, p: np.cos(p), grid)
    assert abs(val) < 1e-14


def test_minimum_orders_enforced(cfg):
    with pytest.raises(QuadratureError):
        build_grid(1, 8, 8, cfg)
    with pytest.raises(QuadratureError):
        build_grid(8, 8, 3, cfg)


def test_nonfinite_integrand_names_node(cfg):
    grid = build_grid(4, 4, 4, cfg)

    def bad(c, t, p):
        out = np.ones_like(c)
        out[5] = np.nan
        return out

    with pytest.raises(QuadratureError, match="node 5"):
        integrate(bad, grid)


def _wallis(k: int) -> Fraction:
    # integral of cos^k over [0, pi]: pi (k-1)!!/k!! for even k, else 0
    if k % 2 == 1:
        return Fraction(0)
    num, den = 1, 1
    for j in range(k, 0, -2):
        num *= j - 1 if j - 1 > 0 else 1
        den *= j
    return Fraction(num, den)


def test_chi_rule_exact_for_polynomials(cfg):
    # The chi rule is Gauss-Legendre in the angle, so products
    # cos^k(chi) sin^2(chi) are trigonometric rather than algebraic
    # polynomials; machine agreement with the closed-form reference holds
    # for k up to about 1.2 n_chi - 4, which covers every grid the
    # package uses (basis products need k <= 2 n_max + 2).
    n_chi = 24
    grid = build_grid(n_chi, 4, 4, cfg)
    surface = 4.0 * math.pi * cfg.R ** 3
    for k in range(0, 15):
        got = integrate(lambda c, t, p, k=k: np.cos(c) ** k, grid) / surface
        w_k = _wallis(k) - _wallis(k + 2)
        expected = float(w_k) * math.pi
        assert got == pytest.approx(expected, abs=1e-13)


def test_volume_error_decreases_under_refinement(cfg):
    errs = []
    for order in (4, 8, 16, 32):
        grid = build_grid(order, order, 2 * order, cfg)
        errs.append(abs(volume(grid) - exact_volume(cfg)) / exact_volume(cfg))
    assert all(a >= b or a < 1e-13 for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-12


def test_node_accessor_and_positive_weights(cfg):
    grid = build_grid(6, 4, 8, cfg)
    assert len(grid) == 6 * 4 * 8
    node = grid.node(17)
    assert 0.0 <= node.chi <= math.pi
    assert 0.0 <= node.theta <= math.pi
    assert 0.0 <= node.phi < 2.0 * math.pi
    assert np.all(grid.weight > 0.0)


def test_grid_csv_dump(tmp_path, cfg):
    grid = build_grid(4, 4, 4, cfg)
    path = tmp_path / "grid.csv"
    grid.to_csv(str(path))
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "chi,theta,phi,weight"
    assert len(lines) == 1 + len(grid)


def test_integrate_values_complex(cfg):
    grid = build_grid(8, 6, 8, cfg)
    vals = np.exp(1j * grid.phi)
    total = integrate_values(vals, grid)
    assert isinstance(total, complex)
    assert abs(total) < 1e-13
