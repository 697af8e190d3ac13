from __future__ import annotations

import math

import numpy as np
import pytest

from lpcre.continuation import Intersection, insert_anchors, trace, trace_all, Polyline
from lpcre.errors import HypothesisViolation
from lpcre.figures import cone_mesh, ellipsoid_mesh, figure_data, so3_default_levels


def sphere_plane(z0=0.3):
    return Intersection(lambda x: float(x @ x) - 1.0, lambda x: 2 * x, lambda x: x[2] - z0,
                        lambda x: np.array([0.0, 0.0, 1.0]))


@pytest.fixture(scope="module")
def so3_fig():
    return figure_data("so3", 1.0, 2.0, 3.0)


@pytest.fixture(scope="module")
def so21_fig():
    return figure_data("so21", 1.0, 3.0, -2.0)


def test_trace_circle_closes():
    line = trace(sphere_plane(), np.array([1.0, 0.0, 0.3]), step=1e-2)
    assert line.closed
    r = math.sqrt(1 - 0.09)
    length = np.sum(np.linalg.norm(np.diff(np.vstack([line.points, line.points[:1]]), axis=0), axis=1))
    assert abs(length - 2 * math.pi * r) < 1e-2
    assert np.max(np.abs(np.linalg.norm(line.points[:, :2], axis=1) - r)) < 1e-10


def test_trace_stops_at_box():
    cyl = Intersection(lambda x: x[0] ** 2 + x[1] ** 2 - 1, lambda x: np.array([2 * x[0], 2 * x[1], 0]),
                       lambda x: x[1], lambda x: np.array([0.0, 1.0, 0]))
    line = trace(cyl, np.array([1.0, 0.0, 0.0]), box=1.5)
    assert line is not None and not line.closed
    assert np.max(np.abs(line.points[:, 2])) <= 1.5 + 1e-12
    assert line.points[0, 2] < -1.4 and line.points[-1, 2] > 1.4


def test_insert_anchor():
    line = Polyline(np.array([[0.0, 0, 0], [1.0, 0, 0]]), False)
    out = insert_anchors(line, [np.array([0.5, 1e-3, 0])], 0.01)
    assert len(out.points) == 3 and out.points[1][1] == 1e-3


def test_trace_all_finds_two_components():
    # sphere meets the cone x3^2 = x1^2 + x2^2 in two circles
    cone = Intersection(lambda x: float(x @ x) - 2.0, lambda x: 2 * x,
                        lambda x: x[0] ** 2 + x[1] ** 2 - x[2] ** 2, lambda x: np.array([2 * x[0], 2 * x[1], -2 * x[2]]))
    cands = np.array(ellipsoid_mesh([1.4, 1.4, 1.4], 8, 16)["vertices"])
    lines = trace_all(cone, cands)
    assert len(lines) == 2 and all(l.closed for l in lines)


def test_meshes_lie_on_surfaces():
    mesh = ellipsoid_mesh([1.0, 2.0, 0.5], 10, 20)
    v = np.array(mesh["vertices"])
    assert np.max(np.abs((v[:, 0]) ** 2 + (v[:, 1] / 2) ** 2 + (v[:, 2] / 0.5) ** 2 - 1)) < 1e-12
    assert max(max(t) for t in mesh["triangles"]) == len(v) - 1
    cone = cone_mesh([1.0, 3.0, -2.0], 3.0)
    w = np.array(cone["vertices"])
    assert np.max(np.abs(w @ np.diag([1.0, 3.0, -2.0]) @ w.T).diagonal()) < 1e-12
    assert np.max(np.abs(w)) <= 3.0 + 1e-12


def test_so3_curves_on_both_surfaces(so3_fig):
    assert len(so3_fig["curves"]) == 7
    for c in so3_fig["curves"]:
        assert c["polylines"]
        for pl in c["polylines"]:
            p = np.array(pl["points"])
            h = 0.5 * (p[:, 0] ** 2 + 2 * p[:, 1] ** 2 + 3 * p[:, 2] ** 2)
            assert np.max(np.abs(h - 1)) < 1e-10
            assert np.max(np.abs(np.sum(p * p, axis=1) - c["level"])) < 1e-10


def test_so3_separatrix_through_saddles(so3_fig):
    level1 = next(c for c in so3_fig["curves"] if c["level"] == 1.0)
    pts = np.vstack([np.array(pl["points"]) for pl in level1["polylines"]])
    for target in ([0.0, 1.0, 0.0], [0.0, -1.0, 0.0]):
        assert np.min(np.linalg.norm(pts - target, axis=1)) < 1e-6


def test_so3_equilibria(so3_fig):
    eq = np.array(so3_fig["equilibria"])
    assert eq.shape == (6, 3)
    assert np.allclose(np.sort(np.abs(eq).max(axis=1)), np.sort(np.repeat(np.sqrt([2, 1, 2 / 3]), 2)))


def test_default_levels_bracket_separatrix():
    lv = so3_default_levels(1.0, 2.0, 3.0)
    assert lv[3] == 1.0 and all(2 / 3 < v < 2 for v in lv)


def test_so21_figure(so21_fig):
    assert len(so21_fig["rays"]) == 4
    levels = [c["level"] for c in so21_fig["curves"]]
    assert levels == [-3.0, -1.0, 1.0, 3.0]
    for c in so21_fig["curves"]:
        assert c["polylines"]
        for pl in c["polylines"]:
            p = np.array(pl["points"])
            assert np.max(np.abs(0.5 * (p[:, 0] ** 2 + 3 * p[:, 1] ** 2 - 2 * p[:, 2] ** 2))) < 1e-10
            assert np.max(np.abs(-p[:, 0] ** 2 + p[:, 1] ** 2 + p[:, 2] ** 2 - c["level"])) < 1e-10
            assert np.max(np.abs(p)) <= 3.0 + 1e-9


def test_so21_level_zero_is_the_rays():
    fig = figure_data("so21", 1.0, 3.0, -2.0, levels=[0.0])
    (c,) = fig["curves"]
    assert c["degenerate"] == "rays" and len(c["polylines"]) == 4
    for pl in c["polylines"]:
        p = np.array(pl["points"])
        assert np.max(np.abs(p[:, 0] ** 2 + 3 * p[:, 1] ** 2 - 2 * p[:, 2] ** 2)) < 1e-12
        assert np.max(np.abs(-p[:, 0] ** 2 + p[:, 1] ** 2 + p[:, 2] ** 2)) < 1e-12


def test_empty_levels():
    fig = figure_data("so3", 1.0, 2.0, 3.0, levels=[])
    assert fig["curves"] == [] and len(fig["equilibria"]) == 6 and fig["surface"]["vertices"]
    fig = figure_data("so21", 1.0, 3.0, -2.0, levels=[])
    assert fig["curves"] == [] and len(fig["rays"]) == 4


@pytest.mark.parametrize("example,abc", [("so3", (1.0, 1.0, 3.0)), ("so3", (-1.0, 2.0, 3.0)),
                                         ("so21", (1.0, 1.0, -1.0)), ("torus", (1.0, 2.0, 3.0))])
def test_hypothesis_violations(example, abc):
    with pytest.raises(HypothesisViolation):
        figure_data(example, *abc)
