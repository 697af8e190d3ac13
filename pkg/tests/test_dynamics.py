from __future__ import annotations

import math

import numpy as np
import pytest

from lpcre.bianchi import BianchiType, catalog
from lpcre.cre import find_cre, linear_hamiltonian_cre
from lpcre.dynamics import drift_report, integrate, ray_motion_check, ray_radius
from lpcre.errors import InvalidParameter
from lpcre.poisson import LinearHamiltonian, QuadraticHamiltonian

import oracles

IX = catalog(BianchiType("IX"))
VIII = catalog(BianchiType("VIII"))
SO3, SO21 = IX.poisson, VIII.poisson
H123 = QuadraticHamiltonian.diagonal([1.0, 2.0, 3.0])
H_CONE = QuadraticHamiltonian.diagonal([1.0, 3.0, -2.0])
X0_SO3 = 4.0 * np.array([1.0, 0.6, 0.3])
X0_SO21 = 3.0 * np.array([0.3, 1.0, 0.5])


def test_matches_reference_integrator():
    traj = integrate(SO3, H123, X0_SO3, 2.0, 1e-3)
    ref = oracles.reference_orbit(oracles.table_pi("IX"), (1, 2, 3), X0_SO3, traj.times)
    assert np.max(np.abs(traj.states - ref)) < 1e-8


def test_final_step_lands_on_t_end():
    traj = integrate(SO3, H123, X0_SO3, 0.0105, 1e-3)
    assert len(traj) == 12
    assert traj.times[-1] == 0.0105
    assert traj.step == 1e-3 and traj.method == "rk4"


@pytest.mark.parametrize("axis", range(3))
def test_axis_is_stationary(axis):
    x0 = np.zeros(3)
    x0[axis] = 1.7
    traj = integrate(SO3, H123, x0, 10.0, 1e-3)
    assert np.max(np.linalg.norm(traj.states - x0, axis=1)) < 1e-10


@pytest.mark.parametrize("P,H,x0,cas", [(SO3, H123, X0_SO3, IX.casimirs),
                                        (SO21, H123, X0_SO21, VIII.casimirs)], ids=["so3", "so21"])
def test_conservation_and_fourth_order(P, H, x0, cas):
    d1 = drift_report(integrate(P, H, x0, 10.0, 1e-3), H, cas)
    d2 = drift_report(integrate(P, H, x0, 10.0, 5e-4), H, cas)
    assert d1.energy_drift < 1e-8 and d1.casimir_drift < 1e-8
    assert d1.energy_drift / d2.energy_drift >= 8
    assert d1.casimir_drift / d2.casimir_drift >= 8


def test_so21_unit_leaf_orbit():
    x0 = np.array([0.3, 1.0, 0.5])
    x0 = x0 / math.sqrt(-x0[0] ** 2 + x0[1] ** 2 + x0[2] ** 2)
    C = VIII.casimirs[0]
    assert abs(C(x0) - 1.0) < 1e-15
    d = drift_report(integrate(SO21, H123, x0, 10.0, 1e-3), H123, [C])
    assert d.casimir_drift < 1e-8 and d.energy_drift < 1e-8


@pytest.fixture(scope="module")
def rays():
    return find_cre(SO21, H_CONE).nontrivial


def test_ray_motion_linear_hamiltonian():
    # degree-1 H: the field is linear and the ray motion is exactly exponential
    H = LinearHamiltonian([0.0, 1.0, 0.0])
    cres = linear_hamiltonian_cre(VIII.algebra, [0.0, 1.0, 0.0])
    assert sorted(c.xi for c in cres) == [-1.0, 1.0]
    for c in cres:
        for t_end in (1.0, 5.0):
            traj = integrate(SO21, H, c.x_e, t_end, 1e-3)
            assert ray_motion_check(traj, c.x_e, c.xi) < 1e-6


def test_ray_motion_quadratic_hamiltonian(rays):
    # degree-2 H: r' = xi r, so r(t) = 1 / (1 - xi t)
    for s in rays:
        t_end = 5.0 if s.xi < 0 else 0.5 / s.xi
        traj = integrate(SO21, H_CONE, s.x_e, t_end, 1e-3)
        assert ray_motion_check(traj, s.x_e, s.xi, degree=2) < 1e-6
        with pytest.raises(InvalidParameter):
            ray_motion_check(traj, s.x_e, 1.0 / t_end * 2, degree=2)


def test_ray_radius_laws():
    t = np.array([0.0, 0.5, 1.0])
    assert np.allclose(ray_radius(t, 0.7, 1), np.exp(0.7 * t), rtol=1e-15)
    assert np.allclose(ray_radius(t, -2.0, 2), 1 / (1 + 2 * t), rtol=1e-15)
    assert np.allclose(ray_radius(t, -1.0, 3), 1 / (1 + t), rtol=1e-15)
    assert np.allclose(ray_radius(t, -1.0, 4), 1 / np.sqrt(1 + 2 * t), rtol=1e-15)


def test_escape_truncates(rays):
    s = next(r for r in rays if r.xi > 0)
    traj = integrate(SO21, H_CONE, s.x_e, 25.0, 1e-2)
    assert traj.escaped
    assert traj.times[-1] < 25.0
    assert np.all(np.isfinite(traj.states))


def test_scaling_covariance():
    s = 2.0
    x = integrate(SO3, H123, X0_SO3, 4.0, 1e-3)
    y = integrate(SO3, H123, s * X0_SO3, 2.0, 5e-4)
    # y(t) = s x(s t): y's grid t_k = k dt / 2 maps onto x's grid s t_k = k dt
    assert np.max(np.abs(y.states - s * x.states)) < 1e-6


def test_bad_parameters():
    with pytest.raises(InvalidParameter):
        integrate(SO3, H123, X0_SO3, 1.0, 0.0)
    with pytest.raises(InvalidParameter):
        integrate(SO3, H123, [np.nan, 0, 0], 1.0, 1e-3)


def test_generic_path_matches_fast_path():
    class Wrapped:
        def __init__(self, P):
            self.P = P
            self.dim = P.dim

        def matrix(self, x):
            return self.P.matrix(x)

    a = integrate(SO3, H123, X0_SO3, 0.5, 1e-3)
    b = integrate(Wrapped(SO3), H123, X0_SO3, 0.5, 1e-3)
    assert np.max(np.abs(a.states - b.states)) < 1e-12


def test_drift_report_dict():
    d = drift_report(integrate(SO3, H123, X0_SO3, 0.1, 1e-3), H123, IX.casimirs).to_dict()
    assert set(d) == {"energy_drift", "casimir_drift", "per_casimir"}
    assert list(d["per_casimir"]) == ["x1**2 + x2**2 + x3**2"]
