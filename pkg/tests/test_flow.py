"""Tracer integration, distances, and displacement certificates."""

import numpy as np
import pytest

from hoferlab import expr as E
from hoferlab import flow as F
from hoferlab import hampath as hp
from hoferlab.errors import BlowUp, CloudMismatch, GradientUnavailable
from hoferlab.grid import Grid

GRID = Grid.box([-4.0, -4.0], [4.0, 4.0], (8, 8))


def apath(src):
    return hp.autonomous_path(E.parse(src), 2, GRID)


def test_shift_example_exact():
    # H = 2*x1 moves every point by 2t along y1
    f = apath("2*x1")
    cloud = F.TracerCloud(np.array([[0.5, -1.0], [1.0, 2.0], [-2.0, 0.3]]))
    fm = F.integrate(f, cloud, 64)
    assert np.abs(fm.final.points - (cloud.points + [0.0, 2.0])).max() < 1e-10


def test_zero_hamiltonian_is_identity():
    f = apath("0")
    cloud = F.TracerCloud(np.array([[0.1, 0.2]]))
    fm = F.integrate(f, cloud, 16)
    assert np.array_equal(fm.final.points, cloud.points)


def test_oscillator_rotation_and_rk4_order():
    f = apath("(x1*x1 + y1*y1)/2")
    cloud = F.TracerCloud(np.array([[1.0, 0.0], [0.3, -0.7], [0.0, 1.0]]))
    th = 1.0
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    exact = cloud.points @ rot.T
    err256 = np.abs(F.integrate(f, cloud, 256).final.points - exact).max()
    err128 = np.abs(F.integrate(f, cloud, 128).final.points - exact).max()
    assert err256 < 1e-8
    assert np.log2(err128 / err256) > 3.7


def test_piecewise_path_integration():
    # first half shifts by 2t along y1 at doubled rate, second half undoes it
    f = hp.concatenate(apath("2*x1"), apath("-2*x1"))
    cloud = F.TracerCloud(np.array([[1.0, 0.0]]))
    fm = F.integrate(f, cloud, 64)
    assert np.abs(fm.final.points - cloud.points).max() < 1e-12


def test_c0_distance_examples():
    cloud = F.TracerCloud(np.array([[0.0, 0.0], [1.0, 1.0]]))
    a = F.integrate(apath("2*x1"), cloud, 16)
    b = F.integrate(apath("0"), cloud, 16)
    assert F.c0_distance(a, a) == 0.0
    assert F.c0_distance(a, b) == pytest.approx(2.0, abs=1e-12)
    # rotation vs identity on the unit circle: chord length 2 sin(1/2)
    angles = np.linspace(0.0, 2 * np.pi, 128, endpoint=False)
    circle = F.TracerCloud(np.stack([np.cos(angles), np.sin(angles)], axis=1))
    rot = F.integrate(apath("(x1*x1 + y1*y1)/2"), circle, 256)
    ident = F.integrate(apath("0"), circle, 8)
    assert F.c0_distance(rot, ident) == pytest.approx(2 * np.sin(0.5), rel=1e-6)


def test_c0_distance_cloud_mismatch():
    a = F.integrate(apath("0"), F.TracerCloud(np.array([[0.0, 0.0]])), 8)
    b = F.integrate(apath("0"), F.TracerCloud(np.array([[1.0, 0.0]])), 8)
    with pytest.raises(CloudMismatch):
        F.c0_distance(a, b)


def _ball_cloud(radius, n=300, seed=0):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-radius, radius, (4 * n, 2))
    pts = pts[np.linalg.norm(pts, axis=1) < radius][:n]
    return F.TracerCloud(pts)


def test_displaced_identity_false():
    cloud = _ball_cloud(0.5)
    fm = F.integrate(apath("0"), cloud, 8)
    cert = F.displaced(fm, F.ball_region([0.0, 0.0], 0.5))
    assert not cert.displaced and cert.margin == 0.0


def test_displaced_shifted_ball():
    cloud = _ball_cloud(0.5)
    fm = F.integrate(apath("2*x1"), cloud, 16)   # shift by 2 along y1
    cert = F.displaced(fm, F.ball_region([0.0, 0.0], 0.5))
    assert cert.displaced and cert.margin >= 1.0
    assert cert.samples == cloud.points.shape[0]


def test_blow_up_guard():
    f = apath("-100*y1")      # dx/dt = +100
    cloud = F.TracerCloud(np.array([[0.0, 0.0]]))
    with pytest.raises(BlowUp):
        F.integrate(f, cloud, 64, safety_radius=10.0)


def test_error_estimate_and_auto_doubling():
    f = apath("(x1*x1 + y1*y1)/2 + x1^4/8")
    cloud = F.TracerCloud(np.array([[1.2, 0.0], [0.5, 0.9]]))
    fm = F.integrate(f, cloud, 16, tol=1e-10)
    assert fm.stats["steps_per_piece"] > 16
    assert fm.stats["max_step_error"] <= 1e-10


def test_area_conservation_nonlinear():
    # evolved polygonal loop keeps its enclosed area within 1e-6 at 256 steps;
    # the loop needs enough vertices that its own discretization stays below
    # the tolerance (the deficit is O(1/vertices^2), not integrator drift)
    f = apath("(x1*x1 + y1*y1)/2 + x1^4/8")
    angles = np.linspace(0.0, 2 * np.pi, 2048, endpoint=False)
    loop = F.TracerCloud(np.stack([np.cos(angles), np.sin(angles)], axis=1))
    fm = F.integrate(f, loop, 256)
    a0 = F.polygon_area(loop.points)
    a1 = F.polygon_area(fm.final.points)
    assert abs(a1 - a0) < 1e-6 * abs(a0)


def test_conjugated_flow_equivariance():
    f = apath("(x1*x1 + y1*y1)/2")
    theta = hp.AffineSymplectic(np.array([[0.0, -1.0], [1.0, 0.0]]),
                                np.array([0.4, -0.2]))
    g = hp.conjugate(f, theta)
    rng = np.random.default_rng(2)
    cloud = F.TracerCloud(rng.uniform(-1.0, 1.0, (30, 2)))
    lhs = F.integrate(g, cloud, 256).final.points
    pulled = F.TracerCloud(theta.inverse().apply(cloud.points))
    rhs = theta.apply(F.integrate(f, pulled, 256).final.points)
    assert np.abs(lhs - rhs).max() < 1e-7


def test_gradient_unavailable_on_foreign_node():
    class Foreign(E.Expression):
        pass

    with pytest.raises(GradientUnavailable):
        E.diff(Foreign(), "x1")


def test_cloud_csv_roundtrip():
    cloud = F.TracerCloud(np.array([[0.125, -2.5], [3.75, 0.0625]]))
    back = F.TracerCloud.from_csv(cloud.to_csv())
    assert np.array_equal(back.points, cloud.points)


def test_flow_stats_and_hash_stable():
    f = apath("2*x1")
    cloud = F.TracerCloud(np.array([[0.0, 0.0]]))
    a = F.integrate(f, cloud, 32)
    b = F.integrate(f, cloud, 32)
    assert a.path_hash == b.path_hash
    assert a.stats == b.stats
