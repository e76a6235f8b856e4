"""Classical dynamics of the free particle on the 3-sphere.

Closed-form geodesics, a constraint-preserving one-step integrator,
the transformation onto the solution manifold (constants of motion),
and numerical Poisson-bracket verification of the basic 7-function
algebra {eps^i, theta_j, rho}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import numdiff
from .config import SpaceConfig
from .errors import ChartBoundaryError, DomainError, StencilError
from .geometry import (ChartCoords, LEVI_CIVITA, canonical_one_form, dual_field,
                       metric, metric_inverse, rho, sample_chart_points)

_REST_OMEGA = 1e-300


@dataclass(frozen=True, eq=False)
class PhaseState:
    """Chart point plus chart velocity (eps, deps/dt)."""

    point: ChartCoords
    vel: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.vel, dtype=float).reshape(3)
        object.__setattr__(self, "vel", v)
        if not np.all(np.isfinite(v)):
            raise DomainError("velocity must be finite")


@dataclass(frozen=True, eq=False)
class SolutionPoint:
    """Solution-manifold coordinates: the constants of motion of one geodesic.

    eps0 and theta0 are the position-type and velocity-type invariants;
    pi0 is the conjugate Darboux momentum pi_i = m T[k, i](eps0) theta0_k
    with T the right one-form frame.  rho_sign tags the hemisphere of
    eps0 so the coordinates stay global.
    """

    eps0: np.ndarray
    theta0: np.ndarray
    pi0: np.ndarray
    rho_sign: int = +1

    def __post_init__(self) -> None:
        for name in ("eps0", "theta0", "pi0"):
            v = np.array(getattr(self, name), dtype=float).reshape(3)
            object.__setattr__(self, name, v)
            if not np.all(np.isfinite(v)):
                raise DomainError(f"{name} must be finite")
        if self.rho_sign not in (-1, +1):
            raise DomainError("rho_sign must be +1 or -1")


@dataclass(eq=False)
class Trajectory:
    """Sampled geodesic run with per-sample conserved quantities."""

    times: np.ndarray
    states: list[PhaseState]
    energy: np.ndarray
    theta_right: np.ndarray
    theta_left: np.ndarray
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if len(self.states) != len(self.times):
            raise DomainError("times and states must have equal length")
        if np.any(np.diff(self.times) <= 0.0):
            raise DomainError("times must be strictly increasing")


# ---------------------------------------------------------------------------
# embedding helpers

def _embed(state: PhaseState, cfg: SpaceConfig) -> tuple[np.ndarray, np.ndarray]:
    """Lift a chart state to the embedded pair (X, V), |X| = R, X.V = 0.

    The fourth velocity component is v0 = -eps.vel / (R rho), which
    needs the chart interior.
    """
    c = state.point
    c.validate(cfg)
    r = rho(c, cfg)
    if abs(r) < 1e-10:
        raise ChartBoundaryError(
            "embedded lift of the velocity needs |rho| > 0; the state sits "
            "on the chart equator")
    x = np.concatenate(([cfg.R * r], c.eps))
    v0 = -float(np.dot(c.eps, state.vel)) / (cfg.R * r)
    v = np.concatenate(([v0], state.vel))
    return x, v


def _project(x: np.ndarray, v: np.ndarray, cfg: SpaceConfig) -> PhaseState:
    sign = +1 if x[0] >= 0.0 else -1
    return PhaseState(ChartCoords(x[1:].copy(), sign), v[1:].copy())


def _theta_from_embedding(x: np.ndarray, v: np.ndarray,
                          cfg: SpaceConfig) -> tuple[np.ndarray, np.ndarray]:
    """Both conserved frame-velocity triples, regular across the equator.

    theta(side)_i = rho vel_i - (v0/R) eps_i +- (vel x eps)_i / R equals
    the contraction of the side's one-form frame with the chart velocity.
    """
    r = x[0] / cfg.R
    eps = x[1:]
    vel = v[1:]
    v0 = v[0]
    base = r * vel - (v0 / cfg.R) * eps
    cross = np.cross(vel, eps) / cfg.R
    return base + cross, base - cross


# ---------------------------------------------------------------------------
# energy functions

def lagrangian(s: PhaseState, cfg: SpaceConfig) -> float:
    """Kinetic Lagrangian (m/2) g_ij(eps) vel^i vel^j."""
    g = metric(s.point, cfg)
    return 0.5 * cfg.m * float(s.vel @ g @ s.vel)


def momentum(s: PhaseState, cfg: SpaceConfig) -> np.ndarray:
    """Canonical momentum p_i = m g_ij vel^j."""
    g = metric(s.point, cfg)
    return cfg.m * (g @ s.vel)


def hamiltonian(s: PhaseState, cfg: SpaceConfig, route: str = "velocity") -> float:
    """Energy of the state, computable through three equivalent routes.

    route = 'velocity'  : (m/2) g_ij vel^i vel^j
    route = 'momentum'  : (1/2m) g^ij p_i p_j
    route = 'frame'     : (m/2) delta_ij theta^i theta^j
    """
    if route == "velocity":
        return lagrangian(s, cfg)
    if route == "momentum":
        p = momentum(s, cfg)
        ginv = metric_inverse(s.point, cfg)
        return float(p @ ginv @ p) / (2.0 * cfg.m)
    if route == "frame":
        th = canonical_one_form(s.point, "right", cfg) @ s.vel
        return 0.5 * cfg.m * float(th @ th)
    raise DomainError(f"unknown Hamiltonian route {route!r}")


def invariant_velocities(s: PhaseState, cfg: SpaceConfig) -> tuple[np.ndarray, np.ndarray]:
    """The conserved (right, left) frame-velocity triples of the state."""
    x, v = _embed(s, cfg)
    return _theta_from_embedding(x, v, cfg)


# ---------------------------------------------------------------------------
# geodesics

def angular_frequency(s: PhaseState, cfg: SpaceConfig) -> float:
    """omega = (1/R) sqrt(g_ij vel^i vel^j); the great-circle rate."""
    g = metric(s.point, cfg)
    return math.sqrt(max(0.0, float(s.vel @ g @ s.vel))) / cfg.R


def geodesic_exact(init: PhaseState, t: float, cfg: SpaceConfig) -> PhaseState:
    """Closed-form geodesic flow, valid globally via the embedded great circle.

    In chart components this is eps(t) = eps0 cos(w t) + vel0 sin(w t)/w
    and vel(t) = vel0 cos(w t) - w eps0 sin(w t), with w the angular
    frequency above; the hemisphere sign is tracked by the embedding.
    """
    x0, v0 = _embed(init, cfg)
    w = float(np.linalg.norm(v0)) / cfg.R
    if w < _REST_OMEGA:
        return init
    c, s = math.cos(w * t), math.sin(w * t)
    x = x0 * c + (v0 / w) * s
    v = v0 * c - (w * x0) * s
    return _project(x, v, cfg)


def closed_form_chart(init: PhaseState, t: float, omega: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Chart-form solution (eps, vel, acc) at time t for an explicit omega.

    Used by the residual oracle, which also probes wrong frequencies.
    """
    e0 = init.point.eps
    v0 = init.vel
    c, s = math.cos(omega * t), math.sin(omega * t)
    e = e0 * c + v0 * s / omega
    v = v0 * c - omega * e0 * s
    a = -(omega * omega) * e
    return e, v, a


def christoffel(c: ChartCoords, cfg: SpaceConfig, h: float | None = None) -> np.ndarray:
    """Christoffel symbols Gamma[j, k, l] from central differences of g."""
    if h is None:
        h = numdiff.DEFAULT_REL_STEP * cfg.R
    sign = c.rho_sign

    def g_at(x: np.ndarray) -> np.ndarray:
        return metric(ChartCoords(x, sign), cfg)

    e = np.asarray(c.eps, dtype=float)
    if float(np.linalg.norm(e)) + 2.0 * h > cfg.R * (1.0 - 1e-8):
        raise StencilError("Christoffel stencil would leave the chart")
    dg = np.stack([numdiff.partial(g_at, e, k, h) for k in range(3)], axis=0)
    ginv = metric_inverse(c, cfg)
    gamma = 0.5 * np.einsum("jm,kml->jkl", ginv, dg)
    gamma += 0.5 * np.einsum("jm,lmk->jkl", ginv, dg)
    gamma -= 0.5 * np.einsum("jm,mkl->jkl", ginv, dg)
    return gamma


def geodesic_equation_residual(init: PhaseState, times, cfg: SpaceConfig,
                               omega: float | None = None) -> float:
    """Max norm of acc^j + Gamma^j_kl vel^k vel^l along the closed form.

    With the metric frequency the residual vanishes to stencil accuracy;
    probing a different omega quantifies how badly that frequency fails.
    """
    if omega is None:
        omega = angular_frequency(init, cfg)
    if omega == 0.0:
        return 0.0
    worst = 0.0
    for t in np.atleast_1d(times):
        e, v, a = closed_form_chart(init, float(t), omega)
        point = ChartCoords(e, +1 if rho_of(e, cfg) >= 0 else -1)
        gamma = christoffel(ChartCoords(e, point.rho_sign), cfg)
        res = a + np.einsum("jkl,k,l->j", gamma, v, v)
        worst = max(worst, float(np.max(np.abs(res))))
    return worst


def rho_of(eps: np.ndarray, cfg: SpaceConfig) -> float:
    """Unsigned chart height for raw eps arrays (sign handled by caller)."""
    return math.sqrt(max(0.0, 1.0 - float(np.dot(eps, eps)) / (cfg.R * cfg.R)))


def geodesic_integrate(init: PhaseState, t_end: float, steps: int,
                       cfg: SpaceConfig) -> Trajectory:
    """Classic one-step 4th-order run of the embedded geodesic equation.

    The embedded acceleration is X'' = -(|V|^2/R^2) X; after every step
    the position is renormalized onto the sphere and the velocity is
    projected back onto the tangent plane.  Energy and both invariant
    triples are logged at every sample.
    """
    if steps < 10:
        raise DomainError("steps must be at least 10")
    x, v = _embed(init, cfg)
    w = float(np.linalg.norm(v)) / cfg.R
    dt = t_end / steps
    warnings: list[str] = []
    if w * abs(dt) > 0.5:
        warnings.append(
            f"step too coarse: omega*dt = {w * abs(dt):.3g} > 0.5, expect "
            "degraded accuracy")

    R2 = cfg.R * cfg.R

    def accel(xx: np.ndarray, vv: np.ndarray) -> np.ndarray:
        return -(float(vv @ vv) / R2) * xx

    times = np.empty(steps + 1)
    states: list[PhaseState] = []
    energy = np.empty(steps + 1)
    th_r = np.empty((steps + 1, 3))
    th_l = np.empty((steps + 1, 3))

    def log(idx: int, t: float, xx: np.ndarray, vv: np.ndarray) -> None:
        times[idx] = t
        states.append(_project(xx, vv, cfg))
        energy[idx] = 0.5 * cfg.m * float(vv @ vv)
        tr, tl = _theta_from_embedding(xx, vv, cfg)
        th_r[idx] = tr
        th_l[idx] = tl

    log(0, 0.0, x, v)
    filled = 1
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(steps):
            k1x, k1v = v, accel(x, v)
            x2, v2 = x + 0.5 * dt * k1x, v + 0.5 * dt * k1v
            k2x, k2v = v2, accel(x2, v2)
            x3, v3 = x + 0.5 * dt * k2x, v + 0.5 * dt * k2v
            k3x, k3v = v3, accel(x3, v3)
            x4, v4 = x + dt * k3x, v + dt * k3v
            k4x, k4v = v4, accel(x4, v4)
            x = x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            v = v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
                warnings.append(
                    f"integration diverged at step {k + 1}; trajectory truncated")
                break
            # Constraint maintenance: |X| = R and V tangent.
            x *= cfg.R / float(np.linalg.norm(x))
            v -= (float(x @ v) / R2) * x
            log(k + 1, (k + 1) * dt, x, v)
            filled += 1

    return Trajectory(times[:filled], states, energy[:filled],
                      th_r[:filled], th_l[:filled], warnings)


# ---------------------------------------------------------------------------
# solution manifold

def hj_transform(s: PhaseState, t: float, cfg: SpaceConfig) -> SolutionPoint:
    """Map the state observed at time t to its constants of motion."""
    init = geodesic_exact(s, -t, cfg)
    th_r, _ = invariant_velocities(init, cfg)
    pi0 = momentum(init, cfg)
    return SolutionPoint(init.point.eps, th_r, pi0, init.point.rho_sign)


def hj_inverse(sp: SolutionPoint, t: float, cfg: SpaceConfig) -> PhaseState:
    """Exact inverse of hj_transform: rebuild the state at time t.

    The frame matrices satisfy one_form @ dual_field = identity, so the
    chart velocity is the dual-field matrix applied to theta0.
    """
    c0 = ChartCoords(sp.eps0, sp.rho_sign)
    zmat = dual_field(c0, "right", cfg)
    vel0 = zmat @ sp.theta0
    return geodesic_exact(PhaseState(c0, vel0), t, cfg)


def theta_of_darboux(eps: np.ndarray, pi: np.ndarray, cfg: SpaceConfig,
                     rho_sign: int = +1) -> np.ndarray:
    """Velocity-type invariants from Darboux coordinates.

    theta_j = (1/m) Z[j, k](eps) pi_k, the inverse of the defining
    relation pi_i = m T[k, i] theta_k.
    """
    zmat = dual_field(ChartCoords(np.asarray(eps, dtype=float), rho_sign), "right", cfg)
    return (zmat @ np.asarray(pi, dtype=float)) / cfg.m


def poisson_bracket(f, g, at: SolutionPoint, cfg: SpaceConfig,
                    h_eps: float | None = None, h_pi: float | None = None) -> float:
    """Canonical bracket {f, g} = df/deps . dg/dpi - df/dpi . dg/deps.

    f and g take (eps, pi) arrays and return scalars; all derivatives
    are 4th-order central differences taken at the solution point.
    """
    if h_eps is None:
        h_eps = numdiff.DEFAULT_REL_STEP * cfg.R
    if h_pi is None:
        h_pi = numdiff.DEFAULT_REL_STEP * max(1.0, float(np.linalg.norm(at.pi0)))
    e0 = at.eps0
    p0 = at.pi0
    if float(np.linalg.norm(e0)) + 2.0 * h_eps > cfg.R * (1.0 - 1e-8):
        raise StencilError("bracket stencil would leave the chart")

    def df(func):
        de = np.array([numdiff.partial(lambda x: func(x, p0), e0, i, h_eps)
                       for i in range(3)])
        dp = np.array([numdiff.partial(lambda y: func(e0, y), p0, i, h_pi)
                       for i in range(3)])
        return de, dp

    fe, fp = df(f)
    ge, gp = df(g)
    return float(fe @ gp - fp @ ge)


def _basis_functions(cfg: SpaceConfig, rho_sign: int = +1) -> dict:
    """The seven functions closing the basic algebra, as (eps, pi) closures."""
    funcs = {}
    for i in range(3):
        funcs[f"eps{i + 1}"] = (lambda i=i: lambda e, p: float(e[i]))()
        funcs[f"theta{i + 1}"] = (
            lambda i=i: lambda e, p: float(theta_of_darboux(e, p, cfg, rho_sign)[i]))()
    funcs["rho"] = lambda e, p: rho_of(np.asarray(e), cfg) * rho_sign
    return funcs


def _sample_solution_points(rng: np.random.Generator, cfg: SpaceConfig,
                            count: int, radius_fraction: float = 0.7) -> list[SolutionPoint]:
    pts = []
    for c in sample_chart_points(rng, cfg, count, radius_fraction,
                                 both_hemispheres=False):
        pi = cfg.m * rng.normal(size=3)
        th = theta_of_darboux(c.eps, pi, cfg, c.rho_sign)
        pts.append(SolutionPoint(c.eps, th, pi, c.rho_sign))
    return pts


def jacobi_residual(names: tuple[str, str, str], at: SolutionPoint,
                    cfg: SpaceConfig, outer_h_scale: float = 10.0) -> float:
    """|{f,{g,h}} + {g,{h,f}} + {h,{f,g}}| via nested numerical brackets.

    The outer bracket uses a step 10x the inner one so the inner
    roundoff noise is not amplified above the 1e-6 target.
    """
    funcs = _basis_functions(cfg, at.rho_sign)
    f, g, h = (funcs[n] for n in names)
    h_eps = numdiff.DEFAULT_REL_STEP * cfg.R
    h_pi = numdiff.DEFAULT_REL_STEP * max(1.0, float(np.linalg.norm(at.pi0)))

    def nested(a, b):
        def inner(e, p):
            pt = SolutionPoint(e, theta_of_darboux(e, p, cfg, at.rho_sign), p,
                               at.rho_sign)
            return poisson_bracket(a, b, pt, cfg, h_eps, h_pi)
        return inner

    he, hp = outer_h_scale * h_eps, outer_h_scale * h_pi
    total = poisson_bracket(f, nested(g, h), at, cfg, he, hp)
    total += poisson_bracket(g, nested(h, f), at, cfg, he, hp)
    total += poisson_bracket(h, nested(f, g), at, cfg, he, hp)
    return abs(total)


def verify_basic_algebra(sample_count: int, cfg: SpaceConfig, seed: int = 0,
                         jacobi_points: int = 0) -> dict:
    """Measure all five bracket families of the basic algebra at random points.

    Returns per-family worst-case residuals against the unit-mass table
    plus fitted coefficients for the two families whose mass dependence
    is measured rather than asserted: {theta_i, theta_j} = c eta theta_k
    with c = 2/(m R), and {theta_i, rho} = c' eps_i with c' = 1/(m R^2).
    """
    rng = np.random.default_rng(seed)
    pts = _sample_solution_points(rng, cfg, sample_count)
    funcs_proto = _basis_functions(cfg)

    res_ee = res_erho = 0.0
    res_eth = 0.0
    thth_num = thth_den = 0.0
    thrho_num = thrho_den = 0.0
    res_antisym = 0.0

    for sp in pts:
        funcs = _basis_functions(cfg, sp.rho_sign)
        e0, p0 = sp.eps0, sp.pi0
        r0 = rho_of(e0, cfg) * sp.rho_sign
        th0 = sp.theta0
        for i in range(3):
            for j in range(3):
                b = poisson_bracket(funcs[f"eps{i+1}"], funcs[f"eps{j+1}"], sp, cfg)
                res_ee = max(res_ee, abs(b))
                b = poisson_bracket(funcs[f"eps{i+1}"], funcs[f"theta{j+1}"], sp, cfg)
                expected = (LEVI_CIVITA[i, j] @ e0) / cfg.R + (r0 if i == j else 0.0)
                res_eth = max(res_eth, abs(b - expected / cfg.m))
                if i < j:
                    bij = poisson_bracket(funcs[f"theta{i+1}"], funcs[f"theta{j+1}"],
                                          sp, cfg)
                    bji = poisson_bracket(funcs[f"theta{j+1}"], funcs[f"theta{i+1}"],
                                          sp, cfg)
                    res_antisym = max(res_antisym, abs(bij + bji))
                    basis = float(LEVI_CIVITA[i, j] @ th0)
                    thth_num += bij * basis
                    thth_den += basis * basis
            b = poisson_bracket(funcs[f"eps{i+1}"], funcs["rho"], sp, cfg)
            res_erho = max(res_erho, abs(b))
            b = poisson_bracket(funcs[f"theta{i+1}"], funcs["rho"], sp, cfg)
            thrho_num += b * e0[i]
            thrho_den += e0[i] * e0[i]

    coef_thth = thth_num / thth_den if thth_den else float("nan")
    coef_thrho = thrho_num / thrho_den if thrho_den else float("nan")

    report = {
        "samples": sample_count,
        "max_residual_eps_eps": res_ee,
        "max_residual_eps_theta_model": res_eth,
        "max_residual_eps_rho": res_erho,
        "max_residual_theta_antisymmetry": res_antisym,
        "theta_theta_coefficient_measured": coef_thth,
        "theta_theta_coefficient_model": 2.0 / (cfg.m * cfg.R),
        "theta_theta_coefficient_nominal": 2.0 * cfg.m / cfg.R,
        "theta_rho_coefficient_measured": coef_thrho,
        "theta_rho_coefficient_model": 1.0 / (cfg.m * cfg.R * cfg.R),
        "theta_rho_coefficient_nominal": 1.0 / (cfg.R * cfg.R),
    }

    if jacobi_points > 0:
        names = sorted(funcs_proto.keys())
        triples = [(a, b, c)
                   for ia, a in enumerate(names)
                   for ib, b in enumerate(names[ia + 1:], ia + 1)
                   for c in names[ib + 1:]]
        worst = 0.0
        jpts = _sample_solution_points(rng, cfg, jacobi_points, 0.6)
        for sp in jpts:
            for tr in triples:
                worst = max(worst, jacobi_residual(tr, sp, cfg))
        report["jacobi_triples"] = len(triples)
        report["jacobi_points"] = jacobi_points
        report["max_jacobi_residual"] = worst

    return report
