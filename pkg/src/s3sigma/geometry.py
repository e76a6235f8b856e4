"""Chart and chart-free geometry of the 3-sphere as a group manifold.

Points are stored globally as unit quaternions (4-vectors q with
|q| = 1); the chart uses the first three embedded Cartesian coordinates
eps_i = R q_i together with the hemisphere label rho_sign = sign(q_0).
Every tensor below is expressed in that chart.

Matrix layout convention, used consistently by the chart tensors:
rows index the frame label (i), columns index the chart coordinate.
With that layout the invariant-frame matrices satisfy the literal
matrix identities

    one_form(side) @ dual_field(side) = identity
    one_form(side).T @ one_form(side) = metric

at every chart-interior point, for both sides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numdiff
from .config import SpaceConfig
from .errors import ChartBoundaryError, DomainError, StencilError

#: Levi-Civita symbol, LEVI_CIVITA[i, j, k] = +1 for (0,1,2) and cyclic.
LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k, _s in ((0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0),
                       (0, 2, 1, -1.0), (2, 1, 0, -1.0), (1, 0, 2, -1.0)):
    LEVI_CIVITA[_i, _j, _k] = _s

#: |rho| below this floor counts as "on the equator" for 1/rho formulas.
RHO_FLOOR = 1e-10

_UNIT_TOL = 1e-12


def cross_matrix(v: np.ndarray) -> np.ndarray:
    """Matrix M[i, j] = sum_k eps_{ijk} v_k, so that M @ w = w x v."""
    v = np.asarray(v, dtype=float)
    return np.array([
        [0.0, v[2], -v[1]],
        [-v[2], 0.0, v[0]],
        [v[1], -v[0], 0.0],
    ])


@dataclass(frozen=True, eq=False)
class ChartCoords:
    """Chart point: eps in the closed ball |eps| <= R plus hemisphere sign."""

    eps: np.ndarray
    rho_sign: int = +1

    def __post_init__(self) -> None:
        e = np.array(self.eps, dtype=float).reshape(3)
        object.__setattr__(self, "eps", e)
        if self.rho_sign not in (-1, +1):
            raise DomainError(f"rho_sign must be +1 or -1, got {self.rho_sign!r}")
        if not np.all(np.isfinite(e)):
            raise DomainError("chart coordinates must be finite")

    def validate(self, cfg: SpaceConfig) -> None:
        r = float(np.linalg.norm(self.eps))
        if r > cfg.R * (1.0 + _UNIT_TOL):
            raise DomainError(f"|eps| = {r} exceeds the chart radius R = {cfg.R}")


@dataclass(frozen=True, eq=False)
class S3Point:
    """Global point of the sphere held as a unit quaternion (q0, q1, q2, q3)."""

    q: np.ndarray

    def __post_init__(self) -> None:
        q = np.array(self.q, dtype=float).reshape(4)
        n = float(np.linalg.norm(q))
        if not np.isfinite(n) or n == 0.0:
            raise DomainError("quaternion must be finite and nonzero")
        # Renormalize after arithmetic; reject inputs that are badly off the sphere.
        if abs(n - 1.0) > 1e-6:
            raise DomainError(f"|q| = {n} is too far from 1 to renormalize safely")
        object.__setattr__(self, "q", q / n)

    @classmethod
    def from_chart(cls, c: ChartCoords, cfg: SpaceConfig) -> "S3Point":
        c.validate(cfg)
        r = rho(c, cfg)
        return cls(np.concatenate(([r], c.eps / cfg.R)))

    def to_chart(self, cfg: SpaceConfig) -> ChartCoords:
        sign = +1 if self.q[0] >= 0.0 else -1
        return ChartCoords(cfg.R * self.q[1:], sign)


def rho(c: ChartCoords, cfg: SpaceConfig) -> float:
    """Signed height rho = rho_sign * sqrt(1 - |eps|^2 / R^2)."""
    s2 = float(np.dot(c.eps, c.eps)) / (cfg.R * cfg.R)
    if s2 > 1.0 + _UNIT_TOL:
        raise DomainError(
            f"|eps|^2/R^2 = {s2} exceeds 1; the point is outside the chart ball")
    return c.rho_sign * math.sqrt(max(0.0, 1.0 - s2))


def _rho_checked(c: ChartCoords, cfg: SpaceConfig) -> float:
    r = rho(c, cfg)
    if abs(r) < RHO_FLOOR:
        raise ChartBoundaryError(
            "point sits on the chart equator (|rho| < 1e-10); "
            "use the opposite-hemisphere chart")
    return r


def metric(c: ChartCoords, cfg: SpaceConfig) -> np.ndarray:
    """Induced metric g_ij = delta_ij + eps_i eps_j / (R^2 rho^2)."""
    r = _rho_checked(c, cfg)
    e = c.eps
    return np.eye(3) + np.outer(e, e) / (cfg.R * cfg.R * r * r)


def metric_inverse(c: ChartCoords, cfg: SpaceConfig) -> np.ndarray:
    """Inverse metric g^ij = delta^ij - eps^i eps^j / R^2 (regular everywhere)."""
    e = c.eps
    return np.eye(3) - np.outer(e, e) / (cfg.R * cfg.R)


def _side_sign(side: str) -> float:
    s = side.lower()
    if s in ("right", "r"):
        return +1.0
    if s in ("left", "l"):
        return -1.0
    raise DomainError(f"side must be 'left' or 'right', got {side!r}")


def canonical_one_form(c: ChartCoords, side: str, cfg: SpaceConfig) -> np.ndarray:
    """Invariant frame of 1-forms, T[i, j] = rho d^i_j + eps^i eps_j/(R^2 rho) +- eps_{ijk} eps^k / R.

    The right frame carries the + antisymmetric term, the left frame
    the - term.  Rows are frame labels, columns chart coordinates.
    """
    s = _side_sign(side)
    r = _rho_checked(c, cfg)
    e = c.eps
    R = cfg.R
    return r * np.eye(3) + np.outer(e, e) / (R * R * r) + (s / R) * cross_matrix(e)


def dual_field(c: ChartCoords, side: str, cfg: SpaceConfig) -> np.ndarray:
    """Invariant frame of vector fields, Z[i, k] = rho d^k_i +- eps_{kij} eps^j / R.

    Rows are frame labels, columns chart coordinates, so Z[i] is the
    component vector of the i-th field.  Polynomial in eps and rho, so
    no chart-boundary error is possible.
    """
    s = _side_sign(side)
    r = rho(c, cfg)
    e = c.eps
    # Z[i, k] = rho delta + s/R * eps_{kij} e_j = rho delta - s/R * cross_matrix(e)[i, k]
    return r * np.eye(3) - (s / cfg.R) * cross_matrix(e)


def killing_residual(c: ChartCoords, field_fn, cfg: SpaceConfig,
                     h: float | None = None) -> float:
    """Max-norm of the metric Lie derivative along a chart vector field.

    field_fn maps a ChartCoords to a 3-vector of components.  A zero
    residual (up to the difference-stencil error) certifies the field
    as an isometry generator.
    """
    if h is None:
        h = numdiff.DEFAULT_REL_STEP * cfg.R
    e = np.asarray(c.eps, dtype=float)
    if float(np.linalg.norm(e)) + 2.0 * h > cfg.R * (1.0 - 1e-8):
        raise StencilError(
            "difference stencil would leave the chart; move the evaluation "
            "point away from the equator")

    sign = c.rho_sign

    def field_at(x: np.ndarray) -> np.ndarray:
        return np.asarray(field_fn(ChartCoords(x, sign)), dtype=float)

    def metric_at(x: np.ndarray) -> np.ndarray:
        return metric(ChartCoords(x, sign), cfg)

    lie = numdiff.metric_lie_derivative(field_at, metric_at, e, h)
    return float(np.max(np.abs(lie)))


def dual_field_function(i: int, side: str, cfg: SpaceConfig, rho_sign: int = +1):
    """Closure returning the i-th invariant field's components at eps."""
    def f(c: ChartCoords | np.ndarray) -> np.ndarray:
        if not isinstance(c, ChartCoords):
            c = ChartCoords(np.asarray(c, dtype=float), rho_sign)
        return dual_field(c, side, cfg)[i]
    return f


def sample_chart_points(rng: np.random.Generator, cfg: SpaceConfig, count: int,
                        max_radius_fraction: float = 0.9,
                        both_hemispheres: bool = True) -> list[ChartCoords]:
    """Uniformly scattered chart points with |eps| <= fraction * R."""
    pts = []
    for _ in range(count):
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        radius = cfg.R * max_radius_fraction * rng.uniform() ** (1.0 / 3.0)
        sign = int(rng.choice([-1, 1])) if both_hemispheres else +1
        pts.append(ChartCoords(radius * v, sign))
    return pts
