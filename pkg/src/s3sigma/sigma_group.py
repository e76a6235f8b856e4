"""The centrally extended 7-parameter symmetry group of the sphere particle.

Elements carry (eps, rho_sign; nu; z; zeta): a quaternion-tracked SU(2)
part, two velocity-type translation blocks nu and z, and a U(1) phase
zeta.  Composition, inversion, both invariant frames, the quantization
1-form dual to the central generator, its Noether invariants, and the
numerical machinery that verifies the commutator table live here.

Coordinate order for all 8-component objects: (eps1, eps2, eps3,
nu1, nu2, nu3, z, phi) with zeta = exp(i phi).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import numdiff
from .config import SpaceConfig
from .errors import ChartBoundaryError, DomainError
from .geometry import ChartCoords, LEVI_CIVITA, dual_field, rho

_PHASE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SigmaGroupElement:
    """One group element; nu and z carry velocity units, zeta is a phase."""

    eps: np.ndarray
    rho_sign: int
    nu: np.ndarray
    z: float
    zeta: complex

    def __post_init__(self) -> None:
        e = np.array(self.eps, dtype=float).reshape(3)
        n = np.array(self.nu, dtype=float).reshape(3)
        object.__setattr__(self, "eps", e)
        object.__setattr__(self, "nu", n)
        object.__setattr__(self, "zeta", complex(self.zeta))
        if self.rho_sign not in (-1, +1):
            raise DomainError("rho_sign must be +1 or -1")
        if abs(abs(self.zeta) - 1.0) > 1e-9:
            raise DomainError(f"|zeta| = {abs(self.zeta)} is not 1")
        # keep the phase exactly unimodular after arithmetic
        object.__setattr__(self, "zeta", self.zeta / abs(self.zeta))

    @property
    def phi(self) -> float:
        return math.atan2(self.zeta.imag, self.zeta.real)

    def chart(self) -> ChartCoords:
        return ChartCoords(self.eps, self.rho_sign)


@dataclass(frozen=True, eq=False)
class GroupTangent:
    """Tangent 8-vector in the (eps, nu, z, phi) coordinate basis."""

    components: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.components, dtype=float).reshape(8)
        object.__setattr__(self, "components", v)
        if not np.all(np.isfinite(v)):
            raise DomainError("tangent components must be finite")


def identity(cfg: SpaceConfig) -> SigmaGroupElement:
    return SigmaGroupElement(np.zeros(3), +1, np.zeros(3), 0.0, 1.0 + 0.0j)


def _quat(g: SigmaGroupElement, cfg: SpaceConfig) -> np.ndarray:
    c = g.chart()
    c.validate(cfg)
    return np.concatenate(([rho(c, cfg)], g.eps / cfg.R))


def _quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    w = a[0] * b[0] - float(np.dot(a[1:], b[1:]))
    v = a[0] * b[1:] + b[0] * a[1:] + np.cross(a[1:], b[1:])
    return np.concatenate(([w], v))


def element_from_coords(x: np.ndarray, rho_sign: int = +1) -> SigmaGroupElement:
    """Build an element from the 8 coordinates (eps, nu, z, phi)."""
    x = np.asarray(x, dtype=float)
    return SigmaGroupElement(x[0:3], rho_sign, x[3:6], float(x[6]),
                             cmath.exp(1j * float(x[7])))


def element_coords(g: SigmaGroupElement) -> np.ndarray:
    return np.concatenate((g.eps, g.nu, [g.z], [g.phi]))


def compose(gp: SigmaGroupElement, g: SigmaGroupElement,
            cfg: SpaceConfig) -> SigmaGroupElement:
    """Group law gp * g (gp acts from the left).

    The eps sector is quaternion multiplication in the embedding, so
    products are defined on both hemispheres; nu, z and the phase follow
    the closed composition rules of the extension, with the nu block
    rotated by the left-frame matrix of gp.
    """
    qp = _quat(gp, cfg)
    q = _quat(g, cfg)
    qq = _quat_mul(qp, q)
    eps2 = cfg.R * qq[1:]
    sign2 = +1 if qq[0] >= 0.0 else -1

    rho_p = qp[0]
    R = cfg.R
    nu2 = gp.nu + rho_p * g.nu + np.cross(gp.eps, g.nu) / R + gp.eps * (g.z / R)
    z2 = gp.z + rho_p * g.z - float(np.dot(gp.eps, g.nu)) / R
    phase = -cfg.m * (R * (rho_p - 1.0) * g.z - float(np.dot(gp.eps, g.nu)))
    zeta2 = gp.zeta * g.zeta * cmath.exp(1j * phase)
    return SigmaGroupElement(eps2, sign2, nu2, z2, zeta2)


def inverse(g: SigmaGroupElement, cfg: SpaceConfig) -> SigmaGroupElement:
    """Two-sided inverse, solved in closed form from the group law."""
    c = g.chart()
    c.validate(cfg)
    r = rho(c, cfg)
    R = cfg.R
    eps_i = -g.eps
    nu_i = -r * g.nu + np.cross(g.eps, g.nu) / R + g.eps * (g.z / R)
    z_i = -r * g.z - float(np.dot(g.eps, g.nu)) / R
    phase = cfg.m * (R * (r - 1.0) * g.z + float(np.dot(g.eps, g.nu)))
    zeta_i = g.zeta.conjugate() * cmath.exp(1j * phase)
    return SigmaGroupElement(eps_i, g.rho_sign, nu_i, z_i, zeta_i)


def element_distance(a: SigmaGroupElement, b: SigmaGroupElement,
                     cfg: SpaceConfig) -> float:
    """Componentwise distance with eps measured in units of R.

    The signed height enters so hemisphere disagreements register even
    when the eps components coincide.
    """
    return max(
        float(np.max(np.abs(a.eps - b.eps))) / cfg.R,
        abs(rho(a.chart(), cfg) - rho(b.chart(), cfg)),
        float(np.max(np.abs(a.nu - b.nu))),
        abs(a.z - b.z),
        abs(a.zeta - b.zeta),
    )


# ---------------------------------------------------------------------------
# invariant frames

def left_fields(g: SigmaGroupElement, cfg: SpaceConfig) -> np.ndarray:
    """Components of the 8 left-invariant fields at g, rows per generator.

    Row order matches the coordinate order: the three eps-type
    generators, the three nu-type ones, the z generator and the central
    generator (which is plain d/dphi).
    """
    c = g.chart()
    r = rho(c, cfg)
    zl3 = dual_field(c, "left", cfg)
    R = cfg.R
    m = cfg.m
    out = np.zeros((8, 8))
    out[0:3, 0:3] = zl3
    for i in range(3):
        out[3 + i, 3:6] = zl3[i]
        out[3 + i, 6] = -g.eps[i] / R
        out[3 + i, 7] = m * g.eps[i]
    out[6, 3:6] = g.eps / R
    out[6, 6] = r
    out[6, 7] = -m * R * (r - 1.0)
    out[7, 7] = 1.0
    return out


def right_fields(g: SigmaGroupElement, cfg: SpaceConfig) -> np.ndarray:
    """Components of the 8 right-invariant fields at g, rows per generator."""
    c = g.chart()
    zr3 = dual_field(c, "right", cfg)
    R = cfg.R
    m = cfg.m
    out = np.zeros((8, 8))
    out[0:3, 0:3] = zr3
    for i in range(3):
        for j in range(3):
            out[i, 3 + j] = float(LEVI_CIVITA[j, i] @ g.nu) / R
        out[i, 3 + i] += g.z / R
        out[i, 6] = -g.nu[i] / R
        out[i, 7] = m * g.nu[i]
        out[3 + i, 3 + i] = 1.0
    out[6, 6] = 1.0
    out[7, 7] = 1.0
    return out


def quantization_form(g: SigmaGroupElement, cfg: SpaceConfig) -> np.ndarray:
    """Components of the invariant 1-form dual to the central generator.

    Theta = -m eps_i d nu^i - m R (rho - 1) d z + d phi, returned as an
    8-covector in the (eps, nu, z, phi) basis.
    """
    c = g.chart()
    r = rho(c, cfg)
    out = np.zeros(8)
    out[3:6] = -cfg.m * g.eps
    out[6] = -cfg.m * cfg.R * (r - 1.0)
    out[7] = 1.0
    return out


def noether_invariants(g: SigmaGroupElement, cfg: SpaceConfig) -> np.ndarray:
    """The seven conserved pairings of Theta with the right frame.

    Order: the three eps-type invariants m (Z[i, k] nu_k - z eps_i / R),
    the three nu-type ones -m eps_i, then -m R (rho - 1).
    """
    c = g.chart()
    r = rho(c, cfg)
    zr3 = dual_field(c, "right", cfg)
    m, R = cfg.m, cfg.R
    out = np.empty(7)
    out[0:3] = m * (zr3 @ g.nu - (g.z / R) * g.eps)
    out[3:6] = -m * g.eps
    out[6] = -m * R * (r - 1.0)
    return out


# ---------------------------------------------------------------------------
# numerical differential machinery on the group

_COORD_SCALES = np.array([1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0])


def _coord_steps(cfg: SpaceConfig, rel: float = numdiff.DEFAULT_REL_STEP) -> np.ndarray:
    s = _COORD_SCALES.copy()
    s[0:3] = cfg.R
    return rel * s


def theta_function(g: SigmaGroupElement, cfg: SpaceConfig):
    """Theta components as a function of the 8 coordinates near g."""
    sign = g.rho_sign

    def f(x: np.ndarray) -> np.ndarray:
        return quantization_form(element_from_coords(x, sign), cfg)

    return f


def dtheta_matrix(g: SigmaGroupElement, cfg: SpaceConfig) -> np.ndarray:
    """Exterior derivative dTheta[a, b] by antisymmetrized differentiation."""
    f = theta_function(g, cfg)
    x0 = element_coords(g)
    jac = numdiff.jacobian(f, x0, _coord_steps(cfg))  # jac[b, a] = d Theta_b / d x^a
    return jac.T - jac


def dtheta_exact(g: SigmaGroupElement, cfg: SpaceConfig) -> np.ndarray:
    """Closed-form dTheta for the chart interior, used as a cross-check."""
    c = g.chart()
    r = rho(c, cfg)
    if abs(r) < 1e-10:
        raise ChartBoundaryError("closed-form dTheta needs the chart interior")
    out = np.zeros((8, 8))
    m, R = cfg.m, cfg.R
    for k in range(3):
        out[k, 3 + k] = -m
        out[3 + k, k] = +m
        out[k, 6] = m * g.eps[k] / (R * r)
        out[6, k] = -m * g.eps[k] / (R * r)
    return out


def field_functions(side: str, cfg: SpaceConfig, rho_sign: int = +1):
    """List of 8 closures giving each invariant field's components at x."""
    builder = left_fields if side == "left" else right_fields

    def make(i):
        def f(x: np.ndarray) -> np.ndarray:
            return builder(element_from_coords(x, rho_sign), cfg)[i]
        return f

    return [make(i) for i in range(8)]


def numerical_bracket(fa, fb, g: SigmaGroupElement, cfg: SpaceConfig) -> GroupTangent:
    """[F_a, F_b] at g via 4th-order differences of the component functions."""
    x0 = element_coords(g)
    h = _coord_steps(cfg)
    val = numdiff.vector_field_bracket(fa, fb, x0, h)
    return GroupTangent(val)


def expected_right_bracket_coefficients(cfg: SpaceConfig) -> dict:
    """Structure-constant table of the right frame, keyed (a, b) -> 8-vector.

    Indices 0-2 are the eps generators, 3-5 the nu ones, 6 the z
    generator, 7 the central one.  Only nonzero entries appear.
    """
    R, m = cfg.R, cfg.m
    table: dict = {}
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            c = np.zeros(8)
            for k in range(3):
                c[k] = -(2.0 / R) * LEVI_CIVITA[k, i, j]
            table[(i, j)] = c
    for i in range(3):
        for j in range(3):
            c = np.zeros(8)
            for k in range(3):
                c[3 + k] = -(1.0 / R) * LEVI_CIVITA[k, i, j]
            if i == j:
                c[6] = 1.0 / R
                c[7] = -m
            table[(i, 3 + j)] = c
    for i in range(3):
        c = np.zeros(8)
        c[3 + i] = -1.0 / R
        table[(i, 6)] = c
    return table


def measured_right_bracket_coefficients(g: SigmaGroupElement,
                                        cfg: SpaceConfig) -> dict:
    """Expand each numerical right-frame bracket back in the right frame.

    Returns (a, b) -> 8-vector of measured structure constants for all
    pairs a < b over the 8 generators.
    """
    fields = field_functions("right", cfg, g.rho_sign)
    frame = right_fields(g, cfg)
    out = {}
    for a in range(8):
        for b in range(a + 1, 8):
            w = numerical_bracket(fields[a], fields[b], g, cfg).components
            coeffs = np.linalg.solve(frame.T, w)
            out[(a, b)] = coeffs
    return out


def bracket_table_report(g: SigmaGroupElement, cfg: SpaceConfig) -> dict:
    """Measured vs expected right-frame structure constants at one element."""
    measured = measured_right_bracket_coefficients(g, cfg)
    expected = expected_right_bracket_coefficients(cfg)
    worst = 0.0
    rows = {}
    for (a, b), coeffs in measured.items():
        exp = expected.get((a, b), np.zeros(8))
        dev = float(np.max(np.abs(coeffs - exp)))
        worst = max(worst, dev)
        if np.max(np.abs(exp)) > 0.0 or dev > 1e-9:
            rows[f"{a},{b}"] = {
                "measured": [float(v) for v in coeffs],
                "expected": [float(v) for v in exp],
                "max_deviation": dev,
            }
    return {"max_coefficient_deviation": worst, "pairs": rows}


def mixed_bracket_residual(g: SigmaGroupElement, cfg: SpaceConfig) -> float:
    """Max norm over all [left, right] numerical brackets (should vanish)."""
    lf = field_functions("left", cfg, g.rho_sign)
    rf = field_functions("right", cfg, g.rho_sign)
    worst = 0.0
    for a in range(8):
        for b in range(8):
            w = numerical_bracket(lf[a], rf[b], g, cfg).components
            worst = max(worst, float(np.max(np.abs(w))))
    return worst


def characteristic_check(g: SigmaGroupElement, cfg: SpaceConfig) -> dict:
    """Contractions certifying the characteristic direction of Theta.

    The z-type left generator must annihilate both Theta and dTheta;
    the central generator is degenerate in dTheta; a nu-type left
    generator annihilates Theta but not dTheta (symplectic contrast).
    """
    theta = quantization_form(g, cfg)
    dth = dtheta_matrix(g, cfg)
    lf = left_fields(g, cfg)
    rf = right_fields(g, cfg)
    zl_z = lf[6]
    xi = rf[7]
    zl_nu1 = lf[3]
    zl_eps1 = lf[0]
    return {
        "theta_on_central": float(theta @ xi),
        "theta_on_zl_z": float(theta @ zl_z),
        "dtheta_on_zl_z": float(np.max(np.abs(zl_z @ dth))),
        "dtheta_on_central": float(np.max(np.abs(xi @ dth))),
        "theta_on_zl_nu1": float(theta @ zl_nu1),
        "theta_on_zl_eps1": float(theta @ zl_eps1),
        "dtheta_on_zl_nu1": float(np.max(np.abs(zl_nu1 @ dth))),
    }


def sample_elements(rng: np.random.Generator, cfg: SpaceConfig, count: int,
                    radius_fraction: float | None = None) -> list[SigmaGroupElement]:
    """Random elements with |eps| <= R sin(pi/8) unless told otherwise.

    That radius bound keeps pairwise and triple products away from the
    chart equator, where single-chart comparisons are made.
    """
    if radius_fraction is None:
        radius_fraction = math.sin(math.pi / 8.0)
    out = []
    for _ in range(count):
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        radius = cfg.R * radius_fraction * rng.uniform() ** (1.0 / 3.0)
        nu = rng.normal(size=3)
        z = float(rng.normal())
        zeta = cmath.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
        out.append(SigmaGroupElement(radius * v, +1, nu, z, zeta))
    return out


def group_axiom_residuals(rng: np.random.Generator, cfg: SpaceConfig,
                          samples: int) -> dict:
    """Worst associativity / inverse / identity residuals over random draws."""
    e = identity(cfg)
    worst_assoc = 0.0
    worst_inv = 0.0
    worst_id = 0.0
    triples = sample_elements(rng, cfg, 3 * samples)
    for k in range(samples):
        a, b, c = triples[3 * k: 3 * k + 3]
        lhs = compose(compose(a, b, cfg), c, cfg)
        rhs = compose(a, compose(b, c, cfg), cfg)
        worst_assoc = max(worst_assoc, element_distance(lhs, rhs, cfg))
        ai = inverse(a, cfg)
        worst_inv = max(worst_inv,
                        element_distance(compose(ai, a, cfg), e, cfg),
                        element_distance(compose(a, ai, cfg), e, cfg))
        worst_id = max(worst_id,
                       element_distance(compose(e, a, cfg), a, cfg),
                       element_distance(compose(a, e, cfg), a, cfg))
    return {
        "samples": samples,
        "max_associativity_residual": worst_assoc,
        "max_inverse_residual": worst_inv,
        "max_identity_residual": worst_id,
    }
