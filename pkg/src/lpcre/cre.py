"""Conformal relative equilibria: solvers, closed forms and certificates.

A CRE for the standard scaling is a pair (x, xi) with Pi(x) grad H(x) = xi x.
Solutions come in rays, so :func:`find_cre` works on the unit sphere, solving
the square system

    F(x, xi) = (Pi(x) grad H(x) - xi x, |x|^2 - 1) = 0

by damped Newton from many seeded starts.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import DEFAULT_SEED, StructureConstants, coadjoint_matrix
from .errors import HypothesisViolation, InvalidParameter, NoConvergence, NumericalFailure
from .poisson import (
    LiePoisson,
    LinearHamiltonian,
    QuadraticHamiltonian,
    ScalarFunction,
    StandardScaling,
    _rng,
    casimir_residual,
    hamiltonian_field,
    sample_points,
)
from .spectrum import EPS_IM, EPS_RE, spectrum

log = logging.getLogger(__name__)

CERT_TOL = 1e-10
TRIVIAL_XI = 1e-8


@dataclass(frozen=True)
class ConformalRelativeEquilibrium:
    x_e: np.ndarray
    xi: float
    residual: float
    trivial: bool
    ray_pair: int | None = None

    def to_dict(self) -> dict:
        return {
            "x": [float(v) for v in self.x_e],
            "xi": float(self.xi),
            "residual": float(self.residual),
            "trivial": bool(self.trivial),
        }


def cre_residual(P, H, x, xi: float) -> float:
    x = np.asarray(x, float)
    return float(np.linalg.norm(hamiltonian_field(P, H, x) - xi * x))


def ray_point(cre: ConformalRelativeEquilibrium, t: float, degree: int) -> tuple[np.ndarray, float]:
    """(t x_e, t^(b-1) xi), again a CRE for t > 0."""
    return t * cre.x_e, t ** (degree - 1) * cre.xi


def conformal_field(P, H, xi: float, action, x, J: ScalarFunction | None = None) -> np.ndarray:
    """Pi grad H - xi Pi grad J - c xi D.

    ``J=None`` stands for any Casimir momentum map; functions flagged as
    Casimirs take the same path, so the result does not depend on which one
    is passed.
    """
    x = np.asarray(x, float)
    out = hamiltonian_field(P, H, x)
    if J is not None and not J.casimir:
        out = out - xi * (P.matrix(x) @ J.gradient(x))
    return out - action.degree * xi * action.liouville(x)


# ---------------------------------------------------------------- solver

@dataclass(frozen=True)
class FindCREConfig:
    seeds: int = 512
    rng_seed: int = DEFAULT_SEED
    tol: float = CERT_TOL
    max_iter: int = 100
    max_halvings: int = 30
    step_tol: float = 1e-14
    residual_tol: float = 1e-12
    dedup_angle: float = 1e-6
    dedup_xi: float = 1e-6
    trivial_xi: float = TRIVIAL_XI
    continuum_threshold: int = 50

    def __post_init__(self):
        if self.seeds < 1:
            raise InvalidParameter("seeds must be positive")
        for name in ("tol", "step_tol", "residual_tol", "dedup_angle", "dedup_xi", "trivial_xi"):
            if not getattr(self, name) > 0:
                raise InvalidParameter(f"{name} must be positive")


class CRESolutions(list):
    """List of certified CREs plus solver diagnostics."""

    def __init__(self, items=(), continuum_suspected: bool = False, stats: dict | None = None):
        super().__init__(items)
        self.continuum_suspected = continuum_suspected
        self.stats = stats or {}

    @property
    def nontrivial(self) -> list[ConformalRelativeEquilibrium]:
        return [s for s in self if not s.trivial]


def _batched_system(c, H, z):
    n = c.shape[0]
    x, xi = z[:, :n], z[:, n]
    pi = np.einsum("nk,kij->nij", x, c)
    if isinstance(H, QuadraticHamiltonian):
        g = x @ H.q
        hess = H.q
    else:
        g = np.broadcast_to(H.zeta, x.shape)
        hess = np.zeros((n, n))
    X = np.einsum("nij,nj->ni", pi, g)
    F = np.concatenate([X - xi[:, None] * x, (np.sum(x * x, axis=1) - 1.0)[:, None]], axis=1)
    return F, pi, g, hess


def _batched_jacobian(c, z, pi, g, hess):
    N, m = z.shape
    n = m - 1
    x, xi = z[:, :n], z[:, n]
    dX = np.einsum("lij,nj->nil", c, g) + np.einsum("nij,jl->nil", pi, hess)
    J = np.zeros((N, m, m))
    J[:, :n, :n] = dX - xi[:, None, None] * np.eye(n)
    J[:, :n, n] = -x
    J[:, n, :n] = 2.0 * x
    return J


def _newton(c, H, z, config: FindCREConfig):
    N = z.shape[0]
    active = np.ones(N, bool)
    converged = np.zeros(N, bool)
    iterations = 0
    F, pi, g, hess = _batched_system(c, H, z)
    fn = np.linalg.norm(F, axis=1)
    for it in range(config.max_iter):
        done = fn < config.residual_tol
        converged |= done & active
        active &= ~done
        if not active.any():
            break
        iterations = it + 1
        idx = np.nonzero(active)[0]
        J = _batched_jacobian(c, z[idx], pi[idx], g[idx], hess)
        step = -np.einsum("nij,nj->ni", np.linalg.pinv(J), F[idx])
        alpha = np.ones(idx.size)
        pending = np.ones(idx.size, bool)
        new_z = z[idx].copy()
        new_F = F[idx].copy()
        new_fn = fn[idx].copy()
        for _ in range(config.max_halvings + 1):
            trial = z[idx] + alpha[:, None] * step
            Ft = _batched_system(c, H, trial)[0]
            ft = np.linalg.norm(Ft, axis=1)
            ok = pending & (ft < fn[idx])
            new_z[ok], new_F[ok], new_fn[ok] = trial[ok], Ft[ok], ft[ok]
            pending &= ~ok
            if not pending.any():
                break
            alpha[pending] *= 0.5
        moved = ~pending
        step_norm = np.where(moved, alpha * np.linalg.norm(step, axis=1), 0.0)
        z[idx] = new_z
        F[idx] = new_F
        fn[idx] = new_fn
        _, pi_new, g_new, _ = _batched_system(c, H, z[idx])
        pi[idx], g[idx] = pi_new, g_new
        small = moved & (step_norm < config.step_tol)
        converged[idx[small]] = True
        active[idx[small | pending]] = False
    else:
        iterations = config.max_iter
    # polish: plain Newton steps kept only where they lower the residual
    for _ in range(2):
        J = _batched_jacobian(c, z, pi, g, hess)
        trial = z - np.einsum("nij,nj->ni", np.linalg.pinv(J), F)
        Ft, pit, gt, _ = _batched_system(c, H, trial)
        ft = np.linalg.norm(Ft, axis=1)
        better = np.isfinite(ft) & (ft < fn)
        z[better], F[better], fn[better] = trial[better], Ft[better], ft[better]
        pi[better], g[better] = pit[better], gt[better]
    stalled = int(np.sum(~converged & ~active))
    return z, converged, {"iterations": iterations, "stalled": stalled,
                          "unfinished": int(np.sum(active))}


def _angle(u, v) -> float:
    return 2.0 * math.asin(min(1.0, float(np.linalg.norm(u - v)) / 2.0))


def find_cre(P, H, action=None, config: FindCREConfig | None = None) -> CRESolutions:
    config = config or FindCREConfig()
    if not isinstance(P, LiePoisson):
        raise InvalidParameter("find_cre needs a Lie-Poisson structure")
    if not isinstance(H, (QuadraticHamiltonian, LinearHamiltonian)):
        raise InvalidParameter("find_cre needs a quadratic or linear Hamiltonian")
    action = action or StandardScaling(P.dim)
    if not isinstance(action, StandardScaling):
        raise InvalidParameter("find_cre supports the standard scaling only")
    if H.dim != P.dim:
        raise InvalidParameter("Hamiltonian and Poisson structure dimensions differ")

    n = P.dim
    c = np.asarray(P.constants.c)
    rng = np.random.default_rng(config.rng_seed)
    seeds = rng.standard_normal((config.seeds, n))
    seeds /= np.linalg.norm(seeds, axis=1, keepdims=True)
    z = np.concatenate([seeds, np.zeros((config.seeds, 1))], axis=1)
    z, converged, stats = _newton(c, H, z, config)

    accepted: list[tuple[np.ndarray, float, float]] = []
    certified = 0
    for k in range(config.seeds):
        x = z[k, :n]
        nx = float(np.linalg.norm(x))
        if not np.all(np.isfinite(z[k])) or nx == 0.0:
            continue
        x = x / nx
        xi = float(z[k, n])
        res = cre_residual(P, H, x, xi)
        if res >= config.tol:
            continue
        certified += 1
        if any(_angle(x, y) < config.dedup_angle and abs(xi - e) < config.dedup_xi
               for y, e, _ in accepted):
            continue
        accepted.append((x, xi, res))

    stats.update({"seeds": config.seeds, "converged": int(np.sum(converged)),
                  "certified": certified, "distinct": len(accepted)})
    if not accepted:
        raise NoConvergence("no seed produced a certified CRE", stats)

    def key(item):
        x, xi, _ = item
        return tuple(float(np.round(v, 8)) + 0.0 for v in x) + (float(np.round(xi, 8)) + 0.0,)

    accepted.sort(key=key)
    parity = (-1.0) ** (H.degree + 1)
    pairs: list[int | None] = [None] * len(accepted)
    for i, (x, xi, _) in enumerate(accepted):
        for j, (y, e, _) in enumerate(accepted):
            if j != i and _angle(-x, y) < config.dedup_angle and abs(parity * xi - e) < config.dedup_xi:
                pairs[i] = j
                break
    sols = [
        ConformalRelativeEquilibrium(x, xi, res, abs(xi) < config.trivial_xi, pairs[i])
        for i, (x, xi, res) in enumerate(accepted)
    ]
    continuum = len(sols) > config.continuum_threshold
    if continuum:
        log.warning("%d distinct CREs survive deduplication; a continuum is likely", len(sols))
    return CRESolutions(sols, continuum, stats)


# ----------------------------------------------------------- closed form

@dataclass(frozen=True)
class RayDescriptor:
    """Ray t (1, s2 p, s3 q) with velocity xi = xi_per_t * t."""

    direction: np.ndarray
    xi_per_t: float
    sigma2: int
    sigma3: int
    h_residual: float = 0.0
    c_residual: float = 0.0

    @property
    def p(self) -> float:
        return abs(float(self.direction[1]))

    @property
    def q(self) -> float:
        return abs(float(self.direction[2]))

    def unit_points(self) -> list[tuple[np.ndarray, float]]:
        """Both unit-sphere points on the line, t = +-1/|direction|."""
        t = 1.0 / float(np.linalg.norm(self.direction))
        return [(s * t * self.direction, s * t * self.xi_per_t) for s in (1.0, -1.0)]

    def to_dict(self) -> dict:
        return {"direction": self.direction.tolist(), "xi_per_t": self.xi_per_t,
                "sigma2": self.sigma2, "sigma3": self.sigma3}


def so21_hypothesis(alpha: float, beta: float, gamma: float) -> bool:
    return beta - gamma > 0 and alpha + beta > 0 and alpha + gamma < 0


def closed_form_so21(alpha: float, beta: float, gamma: float) -> list[RayDescriptor]:
    """The four CRE rays of H = (alpha x1^2 + beta x2^2 + gamma x3^2)/2 on so(2,1)*."""
    if not so21_hypothesis(alpha, beta, gamma):
        raise HypothesisViolation(
            f"need -beta < alpha < -gamma, got alpha={alpha}, beta={beta}, gamma={gamma}"
        )
    p = math.sqrt(-(alpha + gamma) / (beta - gamma))
    q = math.sqrt((alpha + beta) / (beta - gamma))
    speed = math.sqrt(-(alpha + gamma) * (alpha + beta))
    scale = max(1.0, abs(alpha), abs(beta), abs(gamma))
    rays = []
    for s2 in (1, -1):
        for s3 in (1, -1):
            d = np.array([1.0, s2 * p, s3 * q])
            hr = 0.5 * abs(alpha * d[0] ** 2 + beta * d[1] ** 2 + gamma * d[2] ** 2)
            cr = abs(-d[0] ** 2 + d[1] ** 2 + d[2] ** 2)
            if hr > 1e-12 * scale or cr > 1e-12:
                raise NumericalFailure(f"ray ({s2}, {s3}) is off the light cone: H={hr:.3e}, C={cr:.3e}")
            rays.append(RayDescriptor(d, s2 * s3 * speed, s2, s3, hr, cr))
    return rays


# ------------------------------------------------------ linear Hamiltonians

def linear_hamiltonian_cre(alg: StructureConstants, zeta) -> list[ConformalRelativeEquilibrium]:
    """CREs of H(x) = <x, zeta> from the real eigenvectors of A_zeta."""
    zeta = np.asarray(zeta, float)
    A = coadjoint_matrix(alg, zeta)
    rep = spectrum(A)
    lams: list[float] = []
    for z in rep.eigenvalues:
        if abs(z.imag) < EPS_IM and abs(z.real) > EPS_RE:
            if not any(abs(z.real - l) < 1e-9 for l in lams):
                lams.append(z.real)
    lams.sort(reverse=True)
    scale = max(1.0, float(np.linalg.norm(A)))
    out = []
    P = LiePoisson(alg)
    H = LinearHamiltonian(zeta)
    for lam in lams:
        _, s, vt = np.linalg.svd(A - lam * np.eye(alg.dim))
        vecs = [vt[k] for k in range(alg.dim) if s[k] < 1e-8 * scale] or [vt[-1]]
        for v in vecs:
            v = v / np.linalg.norm(v)
            lead = v[np.argmax(np.abs(v) > 1e-12)]
            if lead < 0:
                v = -v
            v = v + 0.0
            dot = float(v @ zeta)
            if abs(dot) > 1e-10 * max(1.0, float(np.linalg.norm(zeta))):
                raise NumericalFailure(f"H_zeta does not vanish at the eigenvector: {dot:.3e}")
            res = cre_residual(P, H, v, lam)
            out.append(ConformalRelativeEquilibrium(v, lam, res, abs(lam) < TRIVIAL_XI))
    return out


# ----------------------------------------------------------- momentum maps

@dataclass(frozen=True)
class MomentumMapCheck:
    action: object
    j: ScalarFunction
    c: float
    defining_residual: float
    is_casimir: bool
    casimir_residual: float
    samples: int

    def to_dict(self) -> dict:
        return {
            "check": "momentum_map",
            "function": self.j.name,
            "action": type(self.action).__name__,
            "degree": self.c,
            "defining_residual": self.defining_residual,
            "is_casimir": self.is_casimir,
            "casimir_residual": self.casimir_residual,
            "samples": self.samples,
        }


def verify_momentum_map(P, action, J: ScalarFunction, c: float = 1.0, samples: int = 200, rng=None) -> MomentumMapCheck:
    """Check xi_M = xi Pi grad J + c xi D at xi = 1.

    Residuals are divided by max(1, |grad J|) so that large but exact
    gradients near a domain boundary do not register as failures.
    """
    rng = _rng(rng)
    pts = sample_points(P.dim, samples, rng, J.domain)
    worst = 0.0
    for x in pts:
        g = J.gradient(x)
        r = action.generator(1.0, x) - P.matrix(x) @ g - c * action.liouville(x)
        worst = max(worst, float(np.linalg.norm(r)) / max(1.0, float(np.linalg.norm(g))))
    cas = casimir_residual(P, J, pts).residual
    return MomentumMapCheck(action, J, c, worst, cas < 1e-10, cas, len(pts))
