"""Deterministic quadrature over the 3-sphere in hyperspherical coordinates.

The invariant measure is R^3 sin^2(chi) sin(theta) d chi d theta d phi
with chi, theta in [0, pi] and phi in [0, 2 pi).  Gauss-Legendre rules
handle chi (with the sin^2 factor folded into the weights) and
cos(theta); the phi direction uses the uniform rule, which is exact for
trigonometric polynomials below the node count.  The weights sum to the
invariant volume 2 pi^2 R^3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .config import SpaceConfig
from .errors import QuadratureError


@dataclass(frozen=True, eq=False)
class HypersphericalNode:
    """One node with the full measure factor folded into the weight."""

    chi: float
    theta: float
    phi: float
    weight: float


@dataclass(frozen=True, eq=False)
class QuadGrid:
    """Tensor-product grid; arrays are flattened over all nodes."""

    chi: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    weight: np.ndarray
    orders: tuple[int, int, int]
    R: float

    def __len__(self) -> int:
        return self.chi.size

    def node(self, i: int) -> HypersphericalNode:
        return HypersphericalNode(float(self.chi[i]), float(self.theta[i]),
                                  float(self.phi[i]), float(self.weight[i]))

    @cached_property
    def q(self) -> np.ndarray:
        """Unit quaternions (N, 4) of the nodes: (cos chi, sin chi n_hat)."""
        schi = np.sin(self.chi)
        sth = np.sin(self.theta)
        return np.stack([
            np.cos(self.chi),
            schi * sth * np.cos(self.phi),
            schi * sth * np.sin(self.phi),
            schi * np.cos(self.theta),
        ], axis=-1)

    def to_csv(self, path: str) -> None:
        """Debug dump with columns chi, theta, phi, weight."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("chi,theta,phi,weight\n")
            for i in range(len(self)):
                fh.write(f"{self.chi[i]!r},{self.theta[i]!r},"
                         f"{self.phi[i]!r},{self.weight[i]!r}\n")


def build_grid(n_chi: int, n_theta: int, n_phi: int, cfg: SpaceConfig) -> QuadGrid:
    """Tensor-product rule with orders (n_chi, n_theta, n_phi).

    Gauss-Legendre nodes in chi over [0, pi] carry the sin^2(chi)
    factor; Gauss-Legendre nodes in cos(theta) absorb sin(theta); the
    phi rule is uniform with weight 2 pi / n_phi.  The weights sum to
    the invariant volume 2 pi^2 R^3 to rule accuracy.
    """
    if n_chi < 2 or n_theta < 2 or n_phi < 4:
        raise QuadratureError(
            f"orders too small: need at least (2, 2, 4), got "
            f"({n_chi}, {n_theta}, {n_phi})")

    x_chi, w_chi = np.polynomial.legendre.leggauss(n_chi)
    chi = 0.5 * math.pi * (x_chi + 1.0)
    w_chi = 0.5 * math.pi * w_chi * np.sin(chi) ** 2

    u, w_u = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(u)

    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    w_phi = np.full(n_phi, 2.0 * math.pi / n_phi)

    cg, tg, pg = np.meshgrid(chi, theta, phi, indexing="ij")
    wc, wt, wp = np.meshgrid(w_chi, w_u, w_phi, indexing="ij")
    weight = (cfg.R ** 3) * wc * wt * wp
    return QuadGrid(cg.ravel(), tg.ravel(), pg.ravel(), weight.ravel(),
                    (n_chi, n_theta, n_phi), cfg.R)


def integrate(f, grid: QuadGrid) -> complex:
    """Sum f(chi, theta, phi) against the node weights.

    f must accept the grid's coordinate arrays and return an array of
    values; a non-finite value aborts with the offending node named.
    """
    vals = np.asarray(f(grid.chi, grid.theta, grid.phi))
    return integrate_values(vals, grid)


def integrate_values(vals: np.ndarray, grid: QuadGrid) -> complex:
    vals = np.asarray(vals)
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.flatnonzero(bad.reshape(-1))[0])
        node = grid.node(i)
        raise QuadratureError(
            f"non-finite integrand value at node {i}: chi={node.chi}, "
            f"theta={node.theta}, phi={node.phi}")
    total = np.sum(vals * grid.weight)
    if np.iscomplexobj(vals):
        return complex(total)
    return float(total)


def volume(grid: QuadGrid) -> float:
    """Total measure carried by the grid."""
    return float(np.sum(grid.weight))


def exact_volume(cfg: SpaceConfig) -> float:
    return 2.0 * math.pi ** 2 * cfg.R ** 3
