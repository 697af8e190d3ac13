"""Poisson tensors, Hamiltonians, scaling actions and identity checks.

Every check returns a :class:`VerificationReport` that records the residual,
the evaluation path (analytic Jacobians or central finite differences) and
the number of sample points.  Samples come from the cube [-2, 2]^n drawn by a
seeded generator, so repeated runs give identical residuals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import DEFAULT_SEED, StructureConstants
from .errors import DomainViolation, InvalidParameter, ParseError, SchemaError

SAMPLE_BOX = 2.0
RESAMPLE_CAP = 100
FD_STEP = 1e-6
ANALYTIC_TOL = 1e-12
FD_TOL = 1e-5


# ------------------------------------------------------------ structures

@dataclass(frozen=True)
class LiePoisson:
    """Linear structure Pi_ij(x) = C^k_ij x_k."""

    constants: StructureConstants

    @property
    def dim(self) -> int:
        return self.constants.dim

    def matrix(self, x) -> np.ndarray:
        return np.tensordot(np.asarray(x, float), self.constants.c, axes=(0, 0))

    def derivative(self, x=None) -> np.ndarray:
        """d[k, i, j] = dPi_ij / dx_k."""
        return np.asarray(self.constants.c)


@dataclass(frozen=True)
class ConstantPoisson:
    """Constant antisymmetric tensor."""

    constant: np.ndarray

    def __post_init__(self):
        m = np.array(self.constant, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidParameter("constant Poisson tensor must be square")
        if not np.array_equal(m, -m.T):
            raise InvalidParameter("constant Poisson tensor must be antisymmetric")
        m.setflags(write=False)
        object.__setattr__(self, "constant", m)

    @property
    def dim(self) -> int:
        return self.constant.shape[0]

    def matrix(self, x=None) -> np.ndarray:
        return self.constant.copy()

    def derivative(self, x=None) -> np.ndarray:
        return np.zeros((self.dim,) * 3)


PoissonStructure = LiePoisson | ConstantPoisson


def eval_poisson(P: PoissonStructure, x) -> np.ndarray:
    return P.matrix(x)


# ----------------------------------------------------------- scalar maps

@dataclass(frozen=True)
class ScalarFunction:
    """A differentiable function with an optional domain guard.

    ``casimir`` marks functions known analytically to be Casimirs of the
    structure they are attached to; conformal fields drop their Hamiltonian
    contribution exactly.
    """

    name: str
    f: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray] | None = None
    domain: Callable[[np.ndarray], bool] | None = None
    casimir: bool = False
    domain_text: str = "all x"

    def in_domain(self, x) -> bool:
        return self.domain is None or bool(self.domain(np.asarray(x, float)))

    def _guard(self, x):
        x = np.asarray(x, float)
        if not self.in_domain(x):
            raise DomainViolation(f"{self.name}: {x.tolist()} outside domain ({self.domain_text})")
        return x

    def __call__(self, x) -> float:
        return float(self.f(self._guard(x)))

    def gradient(self, x) -> np.ndarray:
        x = self._guard(x)
        if self.grad is not None:
            return np.asarray(self.grad(x), float)
        return fd_gradient(self.f, x)

    @property
    def analytic(self) -> bool:
        return self.grad is not None


def fd_gradient(f, x) -> np.ndarray:
    x = np.asarray(x, float)
    h = FD_STEP * max(1.0, float(np.linalg.norm(x)))
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def zero_function(n: int) -> ScalarFunction:
    return ScalarFunction("0", lambda x: 0.0, lambda x: np.zeros(n), casimir=True)


def linear_function(v, name: str | None = None, casimir: bool = False) -> ScalarFunction:
    v = np.array(v, dtype=float)
    v.setflags(write=False)
    return ScalarFunction(
        name or f"<{v.tolist()}, x>",
        lambda x: float(v @ x),
        lambda x: v.copy(),
        casimir=casimir,
    )


def quadratic_function(q, name: str | None = None, casimir: bool = False) -> ScalarFunction:
    """x -> 1/2 x^T q x."""
    q = np.array(q, dtype=float)
    q = 0.5 * (q + q.T)
    q.setflags(write=False)
    return ScalarFunction(
        name or "1/2 x^T q x",
        lambda x: 0.5 * float(x @ q @ x),
        lambda x: q @ x,
        casimir=casimir,
    )


# ---------------------------------------------------------- Hamiltonians

@dataclass(frozen=True)
class QuadraticHamiltonian:
    q: np.ndarray
    degree: int = 2

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise InvalidParameter("q must be square")
        if not np.array_equal(q, q.T):
            raise InvalidParameter("q must be symmetric")
        if not np.all(np.isfinite(q)):
            raise InvalidParameter("q must be finite")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @classmethod
    def diagonal(cls, coeffs) -> "QuadraticHamiltonian":
        return cls(np.diag(np.asarray(coeffs, float)))

    @property
    def dim(self) -> int:
        return self.q.shape[0]

    def __call__(self, x) -> float:
        x = np.asarray(x, float)
        return 0.5 * float(x @ self.q @ x)

    def gradient(self, x) -> np.ndarray:
        return self.q @ np.asarray(x, float)

    def hessian(self, x=None) -> np.ndarray:
        return self.q.copy()

    def to_json_dict(self) -> dict:
        return {"type": "quadratic", "q": self.q.tolist()}


@dataclass(frozen=True)
class LinearHamiltonian:
    zeta: np.ndarray
    degree: int = 1

    def __post_init__(self):
        z = np.array(self.zeta, dtype=float).reshape(-1)
        if not np.all(np.isfinite(z)):
            raise InvalidParameter("zeta must be finite")
        z.setflags(write=False)
        object.__setattr__(self, "zeta", z)

    @property
    def dim(self) -> int:
        return self.zeta.size

    def __call__(self, x) -> float:
        return float(np.asarray(x, float) @ self.zeta)

    def gradient(self, x=None) -> np.ndarray:
        return self.zeta.copy()

    def hessian(self, x=None) -> np.ndarray:
        return np.zeros((self.dim, self.dim))

    def to_json_dict(self) -> dict:
        return {"type": "linear", "zeta": self.zeta.tolist()}


Hamiltonian = QuadraticHamiltonian | LinearHamiltonian


def hamiltonian_from_json_dict(obj) -> Hamiltonian:
    if not isinstance(obj, dict) or "type" not in obj:
        raise SchemaError("Hamiltonian JSON needs a 'type' key")
    kind = obj["type"]
    try:
        if kind == "quadratic":
            if set(obj) != {"type", "q"}:
                raise SchemaError("quadratic Hamiltonian needs exactly 'type' and 'q'")
            q = np.array(obj["q"], dtype=float)
            if q.ndim != 2:
                raise SchemaError("'q' must be a square matrix")
            return QuadraticHamiltonian(q)
        if kind == "linear":
            if set(obj) != {"type", "zeta"}:
                raise SchemaError("linear Hamiltonian needs exactly 'type' and 'zeta'")
            z = np.array(obj["zeta"], dtype=float)
            if z.ndim != 1:
                raise SchemaError("'zeta' must be a vector")
            return LinearHamiltonian(z)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"bad Hamiltonian values: {exc}") from exc
    raise SchemaError(f"unknown Hamiltonian type {kind!r}")


def hamiltonian_from_json(text: str) -> Hamiltonian:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return hamiltonian_from_json_dict(obj)


def hamiltonian_field(P: PoissonStructure, H, x) -> np.ndarray:
    x = np.asarray(x, float)
    return P.matrix(x) @ H.gradient(x)


# --------------------------------------------------------------- actions

@dataclass(frozen=True)
class StandardScaling:
    """Phi_s(x) = s x with Liouville field D(x) = x."""

    dim: int
    degree: int = 1

    def apply(self, s: float, x) -> np.ndarray:
        return s * np.asarray(x, float)

    def jacobian(self, s: float, x=None) -> np.ndarray:
        return s * np.eye(self.dim)

    def liouville(self, x) -> np.ndarray:
        return np.asarray(x, float).copy()

    def liouville_jacobian(self, x=None) -> np.ndarray:
        return np.eye(self.dim)

    def generator(self, xi: float, x) -> np.ndarray:
        """Infinitesimal generator xi_M(x) for the velocity xi."""
        return xi * np.asarray(x, float)


@dataclass(frozen=True)
class ShiftedScaling:
    """Phi_s(x) = (s(x1 + 1) - 1, x2, s x3) on R^3.

    The generator is xi (x1 + 1, 0, x3); the Liouville field D(x) = (x1, 0, x3)
    differs from it by a constant vector.
    """

    dim: int = 3
    degree: int = 1

    def apply(self, s: float, x) -> np.ndarray:
        x = np.asarray(x, float)
        return np.array([s * (x[0] + 1.0) - 1.0, x[1], s * x[2]])

    def jacobian(self, s: float, x=None) -> np.ndarray:
        return np.diag([s, 1.0, s])

    def liouville(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        return np.array([x[0], 0.0, x[2]])

    def liouville_jacobian(self, x=None) -> np.ndarray:
        return np.diag([1.0, 0.0, 1.0])

    def generator(self, xi: float, x) -> np.ndarray:
        x = np.asarray(x, float)
        return xi * np.array([x[0] + 1.0, 0.0, x[2]])


ScalingAction = StandardScaling | ShiftedScaling


# --------------------------------------------------------------- samples

def sample_points(n: int, count: int, rng=None, domain=None, box: float = SAMPLE_BOX) -> np.ndarray:
    """Uniform points of [-box, box]^n, resampling each until ``domain`` holds."""
    rng = np.random.default_rng(DEFAULT_SEED) if rng is None else rng
    pts = np.empty((count, n))
    for idx in range(count):
        for _ in range(RESAMPLE_CAP):
            x = rng.uniform(-box, box, n)
            if domain is None or domain(x):
                pts[idx] = x
                break
        else:
            raise DomainViolation(f"no in-domain sample after {RESAMPLE_CAP} attempts")
    return pts


def _rng(seed_or_rng):
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(DEFAULT_SEED if seed_or_rng is None else seed_or_rng)


# ---------------------------------------------------------------- checks

@dataclass(frozen=True)
class VerificationReport:
    check: str
    residual: float
    path: str
    samples: int
    tolerance: float = ANALYTIC_TOL
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.residual < self.tolerance

    def to_dict(self) -> dict:
        d = {
            "check": self.check,
            "residual": self.residual,
            "path": self.path,
            "samples": self.samples,
        }
        d.update(self.details)
        return d


def check_conformal_poisson(
    P: PoissonStructure,
    action,
    c: float = 1.0,
    sample_count: int = 200,
    s_values=(0.5, 2.0, 10.0),
    rng=None,
) -> VerificationReport:
    """max |J Pi(x) J^T - s^c Pi(Phi_s x)| with J the Jacobian of Phi_s at x."""
    rng = _rng(rng)
    pts = sample_points(P.dim, sample_count, rng)
    worst = 0.0
    for s in s_values:
        if s <= 0:
            raise InvalidParameter("s values must be positive")
        for x in pts:
            jac = action.jacobian(s, x)
            lhs = jac @ P.matrix(x) @ jac.T
            rhs = s**c * P.matrix(action.apply(s, x))
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return VerificationReport("conformal_poisson", worst, "analytic", len(pts) * len(s_values))


def lie_derivative(P: PoissonStructure, action, x, path: str = "analytic") -> np.ndarray:
    """(L_D Pi)^ij = D^k d_k Pi^ij - Pi^kj d_k D^i - Pi^ik d_k D^j."""
    x = np.asarray(x, float)
    D = action.liouville(x)
    if path == "analytic":
        dpi = P.derivative(x)
        dD = action.liouville_jacobian(x)
    else:
        h = FD_STEP * max(1.0, float(np.linalg.norm(x)))
        n = x.size
        dpi = np.empty((n, n, n))
        dD = np.empty((n, n))
        for k in range(n):
            e = np.zeros(n)
            e[k] = h
            dpi[k] = (P.matrix(x + e) - P.matrix(x - e)) / (2 * h)
            dD[:, k] = (action.liouville(x + e) - action.liouville(x - e)) / (2 * h)
    pi = P.matrix(x)
    return np.tensordot(D, dpi, axes=(0, 0)) - dD @ pi - pi @ dD.T


def check_exactness(
    P: PoissonStructure, action, sample_count: int = 200, rng=None, path: str = "analytic"
) -> VerificationReport:
    if path not in ("analytic", "finite-difference"):
        raise InvalidParameter(f"unknown path {path!r}")
    rng = _rng(rng)
    pts = sample_points(P.dim, sample_count, rng)
    worst = 0.0
    for x in pts:
        res = lie_derivative(P, action, x, path) + P.matrix(x)
        worst = max(worst, float(np.max(np.abs(res))))
    tol = ANALYTIC_TOL if path == "analytic" else FD_TOL
    return VerificationReport("exactness", worst, path, len(pts), tol)


def check_field_conformal(
    P: PoissonStructure,
    H,
    action,
    c: float = 1.0,
    b: float | None = None,
    s_values=(0.5, 2.0, 10.0),
    samples: int = 200,
    rng=None,
) -> VerificationReport:
    """max |J X_H(x) - s^(c-b) X_H(Phi_s x)|."""
    b = H.degree if b is None else b
    rng = _rng(rng)
    pts = sample_points(P.dim, samples, rng)
    worst = 0.0
    for s in s_values:
        for x in pts:
            lhs = action.jacobian(s, x) @ hamiltonian_field(P, H, x)
            rhs = s ** (c - b) * hamiltonian_field(P, H, action.apply(s, x))
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return VerificationReport(
        "field_conformal", worst, "analytic", len(pts) * len(s_values), 1e-10,
        {"degree": c - b},
    )


def casimir_residual(P: PoissonStructure, C: ScalarFunction, samples) -> VerificationReport:
    """max |Pi(x) grad C(x)| / max(1, |grad C(x)|) over the given points.

    ``samples`` is either an array of points or an integer count drawn from
    C's domain with the default seed.
    """
    if isinstance(samples, (int, np.integer)):
        pts = sample_points(P.dim, int(samples), _rng(None), C.domain)
    else:
        pts = np.atleast_2d(np.asarray(samples, float))
    worst = 0.0
    for x in pts:
        g = C.gradient(x)
        r = float(np.linalg.norm(P.matrix(x) @ g)) / max(1.0, float(np.linalg.norm(g)))
        worst = max(worst, r)
    path = "analytic" if C.analytic else "finite-difference"
    tol = 1e-10 if C.analytic else FD_TOL
    return VerificationReport("casimir", worst, path, len(pts), tol, {"function": C.name})
