"""Eigenvalues of small dense real matrices.

For n <= 3 the characteristic polynomial is solved in closed form (Cardano
with a trigonometric branch for three real roots); clusters that are double
or triple to working precision are snapped to exact multiple roots so that
Jordan-type operators report their multiplicity instead of a sqrt(eps) split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, NumericalFailure

EPS_RE = 1e-6
EPS_IM = 1e-9
RESIDUAL_FAIL = 1e-7

# Discriminant / cluster thresholds in the unit-scaled depressed cubic.
_TRIPLE_TOL = 1e-14
_DOUBLE_TOL = 1e-13


@dataclass(frozen=True)
class SpectrumReport:
    operator_matrix: np.ndarray
    eigenvalues: list[complex]
    max_real_nonzero: float | None = None
    residuals: list[float] = field(default_factory=list)

    @property
    def real_nonzero(self) -> list[float]:
        return [
            z.real
            for z in self.eigenvalues
            if abs(z.imag) < EPS_IM and abs(z.real) > EPS_RE
        ]

    def to_dict(self) -> dict:
        return {
            "matrix": self.operator_matrix.tolist(),
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "max_real_nonzero": self.max_real_nonzero,
            "residuals": list(self.residuals),
        }


def charpoly(a: np.ndarray) -> np.ndarray:
    """Monic characteristic polynomial coefficients, highest degree first.

    Closed form for n <= 3, Faddeev-LeVerrier otherwise.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n == 1:
        return np.array([1.0, -a[0, 0]])
    if n == 2:
        tr = a[0, 0] + a[1, 1]
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        return np.array([1.0, -tr, det])
    if n == 3:
        tr = a[0, 0] + a[1, 1] + a[2, 2]
        m2 = (
            (a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
            + (a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0])
            + (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        )
        det = math.fsum(
            (
                a[0, 0] * a[1, 1] * a[2, 2],
                a[0, 1] * a[1, 2] * a[2, 0],
                a[0, 2] * a[1, 0] * a[2, 1],
                -a[0, 2] * a[1, 1] * a[2, 0],
                -a[0, 1] * a[1, 0] * a[2, 2],
                -a[0, 0] * a[1, 2] * a[2, 1],
            )
        )
        return np.array([1.0, -tr, m2, -det])
    coeffs = [1.0]
    m = np.zeros_like(a)
    eye = np.eye(n)
    for k in range(1, n + 1):
        m = a @ m + coeffs[-1] * eye
        coeffs.append(-np.trace(a @ m) / k)
    return np.array(coeffs)


def _polyval(coeffs, z):
    acc = 0.0 * z
    for c in coeffs:
        acc = acc * z + c
    return acc


def _polish(coeffs, r: float, iters: int = 3) -> float:
    dcoeffs = np.polyder(coeffs)
    best, best_val = r, abs(_polyval(coeffs, r))
    for _ in range(iters):
        d = _polyval(dcoeffs, r)
        if d == 0.0:
            break
        r = r - _polyval(coeffs, r) / d
        val = abs(_polyval(coeffs, r))
        if val < best_val:
            best, best_val = r, val
        else:
            break
    return best


def solve_quadratic(b: float, c: float) -> list[complex]:
    """Roots of x**2 + b x + c, cancellation-free."""
    disc = b * b - 4.0 * c
    if disc >= 0.0:
        s = math.sqrt(disc)
        if s == 0.0:
            return [complex(-b / 2.0), complex(-b / 2.0)]
        q = -0.5 * (b + math.copysign(s, b))
        r1, r2 = q, c / q
        return sorted([complex(r1), complex(r2)], key=lambda z: z.real)
    im = math.sqrt(-disc) / 2.0
    return [complex(-b / 2.0, -im), complex(-b / 2.0, im)]


def solve_cubic(b: float, c: float, d: float) -> list[complex]:
    """All three roots of x**3 + b x**2 + c x + d with multiplicity."""
    scale = max(abs(b), math.sqrt(abs(c)), abs(d) ** (1.0 / 3.0))
    if scale == 0.0:
        return [0j, 0j, 0j]
    # divide stepwise so tiny scales do not underflow to 0/0
    bb, cc, dd = b / scale, c / scale / scale, d / scale / scale / scale
    shift = -bb / 3.0
    p = cc - bb * bb / 3.0
    q = 2.0 * bb**3 / 27.0 - bb * cc / 3.0 + dd
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    coeffs = np.array([1.0, b, c, d])

    if abs(p) < _TRIPLE_TOL and abs(q) < _TRIPLE_TOL:
        r = scale * shift
        return [complex(r)] * 3

    if abs(disc) < _DOUBLE_TOL:
        simple = scale * (3.0 * q / p + shift)
        double = scale * (-3.0 * q / (2.0 * p) + shift)
        simple = _polish(coeffs, simple)
        # a double root is a simple root of the derivative
        dq = solve_quadratic(2.0 * b / 3.0, c / 3.0)
        cands = [z.real for z in dq if abs(z.imag) == 0.0]
        if cands:
            double = min(cands, key=lambda r: abs(r - double))
        roots = [simple, double, double]
        return [complex(r) for r in sorted(roots)]

    if disc > 0.0:
        sq = math.sqrt(disc)
        if q >= 0.0:
            u = -np.cbrt(q / 2.0 + sq)
        else:
            u = np.cbrt(-q / 2.0 + sq)
        v = -p / (3.0 * u)
        r = scale * (u + v + shift)
        r = _polish(coeffs, r)
        # deflate: x^3 + b x^2 + c x + d = (x - r)(x^2 + e x + f)
        e = b + r
        f = c + e * r
        if abs(r) > 1.0 and r != 0.0:
            f = -d / r
        pair = solve_quadratic(e, f)
        if all(abs(z.imag) == 0.0 for z in pair):
            # rounding pushed the pair real; fall back to Cardano's imaginary part
            im = scale * math.sqrt(3.0) / 2.0 * abs(u - v)
            pair = [complex(-e / 2.0, -im), complex(-e / 2.0, im)]
        return [complex(r)] + pair

    rad = 2.0 * math.sqrt(-p / 3.0)
    arg = (3.0 * q / (2.0 * p)) * math.sqrt(-3.0 / p)
    phi = math.acos(max(-1.0, min(1.0, arg))) / 3.0
    roots = [
        scale * (rad * math.cos(phi - 2.0 * math.pi * k / 3.0) + shift)
        for k in range(3)
    ]
    roots = [_polish(coeffs, r) for r in roots]
    return [complex(r) for r in sorted(roots)]


def _sort_key(z: complex):
    return (round(z.real, 12), z.imag)


def spectrum(matrix) -> SpectrumReport:
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidParameter("spectrum needs a square matrix")
    if not np.all(np.isfinite(a)):
        raise InvalidParameter("matrix has non-finite entries")
    n = a.shape[0]
    coeffs = charpoly(a)
    if n == 1:
        eig = [complex(a[0, 0])]
    elif n == 2:
        eig = solve_quadratic(coeffs[1], coeffs[2])
    elif n == 3:
        eig = solve_cubic(coeffs[1], coeffs[2], coeffs[3])
    else:
        eig = [complex(z) for z in np.linalg.eigvals(a)]
    eig = sorted(eig, key=_sort_key)

    norm = max(1.0, float(np.linalg.norm(a)))
    residuals = [float(abs(_polyval(coeffs, z))) / norm**n for z in eig]
    worst = max(residuals)
    if worst > RESIDUAL_FAIL:
        raise NumericalFailure(
            f"eigenvalue residual {worst:.3e} exceeds {RESIDUAL_FAIL:g}"
        )

    reals = [z.real for z in eig if abs(z.imag) < EPS_IM and abs(z.real) > EPS_RE]
    best = None
    if reals:
        best = max(reals, key=lambda r: (abs(r), r))
    return SpectrumReport(a.copy(), eig, best, residuals)
