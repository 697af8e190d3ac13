"""Mesh and curve data for the rigid-body examples on so(3)* and so(2,1)*.

Output is plain JSON-ready dictionaries: vertex lists, triangle index lists
and polylines.  Plotting is left to external tools.
"""

from __future__ import annotations

import math

import numpy as np

from .continuation import Intersection, trace_all
from .cre import closed_form_so21, so21_hypothesis
from .errors import HypothesisViolation

STEP = 1e-2
TOL = 1e-10


def _grid_triangles(rows: int, cols: int, wrap: bool) -> list[list[int]]:
    tris = []
    ncol = cols if wrap else cols - 1
    for i in range(rows - 1):
        for j in range(ncol):
            a = i * cols + j
            b = i * cols + (j + 1) % cols
            c = (i + 1) * cols + j
            d = (i + 1) * cols + (j + 1) % cols
            tris += [[a, b, d], [a, d, c]]
    return tris


def ellipsoid_mesh(radii, n_lat: int = 24, n_lon: int = 48) -> dict:
    """UV mesh of sum (x_i / r_i)^2 = 1 with single pole vertices."""
    r = np.asarray(radii, float)
    verts = [[0.0, 0.0, r[2]]]
    for i in range(1, n_lat):
        th = math.pi * i / n_lat
        for j in range(n_lon):
            ph = 2 * math.pi * j / n_lon
            verts.append([r[0] * math.sin(th) * math.cos(ph), r[1] * math.sin(th) * math.sin(ph),
                          r[2] * math.cos(th)])
    verts.append([0.0, 0.0, -r[2]])
    south = len(verts) - 1
    tris = []
    for j in range(n_lon):
        tris.append([0, 1 + j, 1 + (j + 1) % n_lon])
    body = _grid_triangles(n_lat - 1, n_lon, True)
    tris += [[v + 1 for v in t] for t in body]
    last = 1 + (n_lat - 2) * n_lon
    for j in range(n_lon):
        tris.append([last + j, south, last + (j + 1) % n_lon])
    return {"vertices": verts, "triangles": tris}


def _quadric(coeffs, level):
    a = np.asarray(coeffs, float)
    return (lambda x: 0.5 * float(a @ (x * x)) - level), (lambda x: a * x)


def _casimir(signs, level):
    s = np.asarray(signs, float)
    return (lambda x: float(s @ (x * x)) - level), (lambda x: 2 * s * x)


def so3_default_levels(alpha, beta, gamma) -> list[float]:
    a = sorted([alpha, beta, gamma])
    lo, mid, hi = 2 / a[2], 2 / a[1], 2 / a[0]
    below = [lo + f * (mid - lo) for f in (0.2, 0.5, 0.8)]
    above = [mid + f * (hi - mid) for f in (0.2, 0.5, 0.8)]
    return below + [mid] + above


def so3_figure(alpha: float, beta: float, gamma: float, levels=None,
               n_lat: int = 24, n_lon: int = 48) -> dict:
    """Ellipsoid H = 1, curves H = 1 and |x|^2 = c, and the six equilibria."""
    coeffs = [alpha, beta, gamma]
    if min(coeffs) <= 0 or len(set(coeffs)) < 3:
        raise HypothesisViolation("so3 figure needs distinct positive alpha, beta, gamma")
    radii = [math.sqrt(2 / a) for a in coeffs]
    mesh = ellipsoid_mesh(radii, n_lat, n_lon)
    equilibria = []
    for i in range(3):
        for s in (1.0, -1.0):
            p = [0.0, 0.0, 0.0]
            p[i] = s * radii[i]
            equilibria.append(p)
    levels = so3_default_levels(*coeffs) if levels is None else list(levels)
    cands = np.array(ellipsoid_mesh(radii, 12, 24)["vertices"])
    f1, g1 = _quadric(coeffs, 1.0)
    curves = []
    for c in levels:
        f2, g2 = _casimir([1, 1, 1], c)
        on_level = [p for p in equilibria if abs(sum(v * v for v in p) - c) < 1e-12]
        lines = trace_all(Intersection(f1, g1, f2, g2), cands, STEP, TOL, None, on_level)
        curves.append({"level": c, "polylines": [ln.to_dict() for ln in lines]})
    return {
        "example": "so3",
        "parameters": {"alpha": alpha, "beta": beta, "gamma": gamma},
        "surface": {"equation": "H = 1", **mesh},
        "casimir": "x1**2 + x2**2 + x3**2",
        "curves": curves,
        "equilibria": equilibria,
    }


def cone_mesh(coeffs, box: float, n_r: int = 24, n_th: int = 48) -> dict:
    """Mesh of sum a_i x_i^2 = 0 (mixed signs) inside [-box, box]^3."""
    a = np.asarray(coeffs, float)
    zeros = [i for i in range(3) if a[i] == 0]
    verts, tris = [], []
    if zeros:
        i = zeros[0]
        j, k = [m for m in range(3) if m != i]
        slope = math.sqrt(-a[j] / a[k])
        lim = box / max(1.0, slope)
        us = np.linspace(-box, box, n_r)
        vs = np.linspace(-lim, lim, n_r)
        for sgn in (1.0, -1.0):
            base = len(verts)
            for u in us:
                for v in vs:
                    p = [0.0, 0.0, 0.0]
                    p[i], p[j], p[k] = u, v, sgn * slope * v
                    verts.append(p)
            tris += [[base + t for t in tri] for tri in _grid_triangles(n_r, n_r, False)]
        return {"vertices": verts, "triangles": tris}
    pos = a > 0
    k = int(np.argmax(pos)) if pos.sum() == 1 else int(np.argmin(pos))
    i, j = [m for m in range(3) if m != k]
    ri, rj = math.sqrt(-a[k] / a[i]), math.sqrt(-a[k] / a[j])
    rmax = box / max(1.0, ri, rj)
    for sgn in (1.0, -1.0):
        base = len(verts)
        for r in np.linspace(0.0, rmax, n_r):
            for m in range(n_th):
                th = 2 * math.pi * m / n_th
                p = [0.0, 0.0, 0.0]
                p[k] = sgn * r
                p[i], p[j] = r * ri * math.cos(th), r * rj * math.sin(th)
                verts.append(p)
        tris += [[base + t for t in tri] for tri in _grid_triangles(n_r, n_th, True)]
    return {"vertices": verts, "triangles": tris}


def _ray_polyline(direction, box: float, samples: int = 64) -> list[list[float]]:
    d = np.asarray(direction, float)
    tmax = box / float(np.max(np.abs(d)))
    return [(t * d).tolist() for t in np.linspace(0.0, tmax, samples)]


def so21_figure(alpha: float, beta: float, gamma: float, levels=(-3.0, -1.0, 1.0, 3.0),
                box: float = 3.0) -> dict:
    """Cone H = 0, curves H = 0 and C = c, and the four CRE rays (t > 0)."""
    if not so21_hypothesis(alpha, beta, gamma):
        raise HypothesisViolation("so21 figure needs -beta < alpha < -gamma")
    coeffs = [alpha, beta, gamma]
    mesh = cone_mesh(coeffs, box)
    rays = closed_form_so21(alpha, beta, gamma)
    ray_data = [
        {"direction": r.direction.tolist(), "xi_per_t": r.xi_per_t,
         "points": _ray_polyline(r.direction, box)}
        for r in rays
    ]
    cands = np.array(mesh["vertices"], float)
    cands = cands[np.linalg.norm(cands, axis=1) > 1e-9]
    f1, g1 = _quadric(coeffs, 0.0)
    curves = []
    for c in levels:
        if c == 0:
            lines = [{"points": rd["points"], "closed": False} for rd in ray_data]
            curves.append({"level": 0.0, "polylines": lines, "degenerate": "rays"})
            continue
        f2, g2 = _casimir([-1, 1, 1], c)
        found = trace_all(Intersection(f1, g1, f2, g2), cands, STEP, TOL, box)
        curves.append({"level": c, "polylines": [ln.to_dict() for ln in found]})
    return {
        "example": "so21",
        "parameters": {"alpha": alpha, "beta": beta, "gamma": gamma, "box": box},
        "surface": {"equation": "H = 0", **mesh},
        "casimir": "-x1**2 + x2**2 + x3**2",
        "curves": curves,
        "rays": ray_data,
    }


def figure_data(example: str, alpha: float, beta: float, gamma: float, levels=None, box: float = 3.0) -> dict:
    if example == "so3":
        return so3_figure(alpha, beta, gamma, levels)
    if example == "so21":
        return so21_figure(alpha, beta, gamma, (-3.0, -1.0, 1.0, 3.0) if levels is None else levels, box)
    raise HypothesisViolation(f"unknown example {example!r}")
