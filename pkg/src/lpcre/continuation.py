"""Predictor-corrector tracing of curves {F1 = 0} and {F2 = 0} in R^3."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

Fn = Callable[[np.ndarray], float]
Grad = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Polyline:
    points: np.ndarray
    closed: bool

    def to_dict(self) -> dict:
        return {"points": self.points.tolist(), "closed": self.closed}


@dataclass(frozen=True)
class Intersection:
    f1: Fn
    g1: Grad
    f2: Fn
    g2: Grad

    def residual(self, y) -> np.ndarray:
        return np.array([self.f1(y), self.f2(y)])

    def jac(self, y) -> np.ndarray:
        return np.vstack([self.g1(y), self.g2(y)])

    def tangent(self, y):
        t = np.cross(self.g1(y), self.g2(y))
        n = float(np.linalg.norm(t))
        return None if n < 1e-12 else t / n

    def correct(self, y, tol: float = 1e-10, max_iter: int = 20):
        """Minimum-norm Newton projection onto the curve."""
        y = np.array(y, float)
        for _ in range(max_iter):
            r = self.residual(y)
            if np.max(np.abs(r)) < tol:
                return y
            J = self.jac(y)
            y = y - np.linalg.lstsq(J, r, rcond=None)[0]
            if not np.all(np.isfinite(y)):
                return None
        return y if np.max(np.abs(self.residual(y))) < tol else None


def _inside(y, box) -> bool:
    return box is None or bool(np.all(np.abs(y) <= box))


def _march(curve: Intersection, start, direction, step, tol, box, max_steps):
    pts = [start]
    y = start
    prev = direction
    for k in range(max_steps):
        t = curve.tangent(y)
        if t is None:
            return pts, False
        if t @ prev < 0:
            t = -t
        y_new = None
        h = step
        for _ in range(6):
            cand = curve.correct(y + h * t, tol)
            if cand is not None and np.linalg.norm(cand - y) < 2.0 * h:
                y_new = cand
                break
            h *= 0.5
        if y_new is None:
            return pts, False
        if not _inside(y_new, box):
            return pts, False
        if k >= 3 and np.linalg.norm(y_new - start) < 0.75 * step:
            return pts, True
        prev = t
        pts.append(y_new)
        y = y_new
    return pts, False


def trace(curve: Intersection, seed, step: float = 1e-2, tol: float = 1e-10,
          box: float | None = None, max_steps: int = 20000) -> Polyline | None:
    start = curve.correct(seed, tol)
    if start is None or not _inside(start, box):
        return None
    t0 = curve.tangent(start)
    if t0 is None:
        return None
    fwd, closed = _march(curve, start, t0, step, tol, box, max_steps)
    if closed:
        return Polyline(np.array(fwd), True)
    back, _ = _march(curve, start, -t0, step, tol, box, max_steps)
    pts = back[::-1] + fwd[1:]
    return Polyline(np.array(pts), False)


def insert_anchors(line: Polyline, anchors, max_dist: float) -> Polyline:
    """Insert exact points (e.g. equilibria on the level) into the polyline."""
    pts = [p for p in line.points]
    for a in anchors:
        a = np.asarray(a, float)
        n = len(pts)
        segs = n if line.closed else n - 1
        best, best_k = np.inf, None
        for k in range(segs):
            p, q = pts[k], pts[(k + 1) % n]
            d = q - p
            s = 0.0 if not d.any() else float(np.clip((a - p) @ d / (d @ d), 0, 1))
            dist = float(np.linalg.norm(p + s * d - a))
            if dist < best:
                best, best_k = dist, k
        if best_k is not None and best < max_dist and best > 0:
            pts.insert(best_k + 1, a)
    return Polyline(np.array(pts), line.closed)


def trace_all(curve: Intersection, candidates, step: float = 1e-2, tol: float = 1e-10,
              box: float | None = None, anchors=(), max_curves: int = 16) -> list[Polyline]:
    """Trace every component reached by correcting the candidate points."""
    pool = []
    for c in candidates:
        y = curve.correct(c, tol)
        if y is not None and _inside(y, box) and curve.tangent(y) is not None:
            pool.append(y)
    pool = np.array(pool).reshape(-1, 3)
    lines: list[Polyline] = []
    while len(pool) and len(lines) < max_curves:
        line = trace(curve, pool[0], step, tol, box)
        if line is None or len(line.points) < 2:
            pool = pool[1:]
            continue
        line = insert_anchors(line, anchors, 2 * step)
        lines.append(line)
        d = np.min(np.linalg.norm(pool[:, None, :] - line.points[None, :, :], axis=2), axis=1)
        pool = pool[d > 3 * step]
    return lines
