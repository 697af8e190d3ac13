"""Fixed-step RK4 integration of Hamiltonian flows and conservation checks."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import Blowup, InvalidParameter
from .poisson import LiePoisson, QuadraticHamiltonian

log = logging.getLogger(__name__)

ESCAPE_NORM = 1e12
MONOTONE_WINDOW = 10


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    method: str
    step: float
    escaped: bool = False

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class DriftReport:
    energy_drift: float
    casimir_drift: float
    per_casimir: dict

    def to_dict(self) -> dict:
        return {"energy_drift": self.energy_drift, "casimir_drift": self.casimir_drift,
                "per_casimir": dict(self.per_casimir)}


def _vector_field(P, H):
    if isinstance(P, LiePoisson) and isinstance(H, QuadraticHamiltonian):
        c = np.asarray(P.constants.c)
        q = H.q
        return lambda x: np.tensordot(x, c, axes=(0, 0)) @ (q @ x)
    return lambda x: P.matrix(x) @ H.gradient(x)


def integrate(P, H, x0, t_end: float, dt: float, escape: float = ESCAPE_NORM) -> Trajectory:
    """Classical RK4; the last step is shortened to land on t_end.

    If |x| passes ``escape`` while the norm has grown monotonically over the
    preceding steps, the trajectory is truncated and flagged as escaped;
    any other crossing raises :class:`Blowup`.
    """
    if not dt > 0 or not t_end > 0:
        raise InvalidParameter("dt and t_end must be positive")
    x = np.array(x0, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidParameter("x0 must be finite")
    f = _vector_field(P, H)
    n_full = int(np.floor(t_end / dt + 1e-9))
    steps = [dt] * n_full
    rest = t_end - n_full * dt
    if rest > 1e-12 * dt:
        steps.append(rest)
    times = np.empty(len(steps) + 1)
    states = np.empty((len(steps) + 1, x.size))
    times[0], states[0] = 0.0, x
    norms = [float(np.linalg.norm(x))]
    t = 0.0
    for k, h in enumerate(steps, start=1):
        k1 = f(x)
        k2 = f(x + 0.5 * h * k1)
        k3 = f(x + 0.5 * h * k2)
        k4 = f(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = k * dt if k <= n_full else t_end
        nx = float(np.linalg.norm(x))
        if not np.isfinite(nx) or nx > escape:
            recent = norms[-MONOTONE_WINDOW:] + [nx]
            if np.isfinite(nx) and all(a < b for a, b in zip(recent, recent[1:])):
                log.info("trajectory escaped along a ray at t=%g", t)
                return Trajectory(times[:k].copy(), states[:k].copy(), "rk4", dt, True)
            raise Blowup(f"|x| = {nx:.3e} exceeds {escape:g} at t = {t:g}")
        times[k], states[k] = t, x
        norms.append(nx)
    return Trajectory(times, states, "rk4", dt, False)


def drift_report(traj: Trajectory, H, casimirs=()) -> DriftReport:
    def rel(fn):
        vals = np.array([fn(x) for x in traj.states])
        return float(np.max(np.abs(vals - vals[0])) / max(1.0, abs(vals[0])))

    energy = rel(H)
    per = {C.name: rel(C) for C in casimirs}
    return DriftReport(energy, max(per.values(), default=0.0), per)


def ray_radius(t, xi: float, degree: int = 1) -> np.ndarray:
    """Scale factor r(t) of the exact motion x(t) = r(t) x0 along a CRE ray.

    On the ray the velocity grows like r^(b-1), so r' = xi r^(b-1) with
    r(0) = 1: exponential for b = 1, otherwise r^(2-b) = 1 + (2-b) xi t.
    """
    t = np.asarray(t, float)
    if degree == 1:
        return np.exp(xi * t)
    if degree == 2:
        base = 1.0 - xi * t
        with np.errstate(divide="ignore"):
            return np.where(base > 0, 1.0 / np.where(base > 0, base, 1.0), np.inf)
    base = 1.0 + (2 - degree) * xi * t
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(base > 0, np.abs(base) ** (1.0 / (2 - degree)), np.inf)


def ray_motion_check(traj: Trajectory, x0, xi: float, degree: int = 1) -> float:
    """Max relative deviation of the trajectory from the exact ray motion."""
    x0 = np.asarray(x0, float)
    r = ray_radius(traj.times, xi, degree)
    if not np.all(np.isfinite(r)):
        raise InvalidParameter("the exact ray motion leaves every bounded set before t_end")
    exact = r[:, None] * x0[None, :]
    dev = np.linalg.norm(traj.states - exact, axis=1) / np.linalg.norm(exact, axis=1)
    return float(np.max(dev))
