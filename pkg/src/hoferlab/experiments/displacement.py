"""Explicit displacement constructions with numerical certificates.

``square_displacement`` builds an autonomous planar Hamiltonian depending
only on y1 whose time-1 flow translates the open square (0,a) x (0,a) of
area c = a^2 off itself while the path length stays within 2% of c. The
profile is a linear ramp of slope -a(1+eps) across a slightly widened
window, glued to zero by a plateau cutoff; the flow shifts x1 by exactly
a(1+eps) for every tracer with y1 in the window, so the translate clears
the square with margin a*eps, and the oscillation of the profile is
c(1+eps) plus the small window widening.

``half_space_shift`` builds the non-compactly-supported conjugator whose
flow fixes the half-space x1 <= -eps and translates x1 >= 0 by +v. With
the sign convention dx/dt = -dH/dy fixed by the flow module, the
generating function must be H = -eta(x1) * v * y1 for a rightward shift.
The ramp eta is realized inside the DSL as a wide plateau cutoff equal to
1 on [0, 2*window] and 0 left of -eps; certificates only sample the
working window, far from the artificial right-hand falloff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import expr as ex
from .. import flow as fl
from .. import lengths as ln
from ..errors import CertificateFailed
from ..grid import Grid
from ..hampath import AffineSymplectic, HamiltonianPath, autonomous_path, conjugate


@dataclass(frozen=True)
class SquareCertificate:
    area: float
    lengths: dict          # k -> measured length
    displaced: bool
    margin: float
    tolerance: float

    def ok(self):
        return self.displaced and all(
            abs(v - self.area) <= self.tolerance * self.area for v in self.lengths.values())

    def to_json(self):
        return {"area": self.area, "lengths": {str(k): v for k, v in self.lengths.items()},
                "displaced": self.displaced, "margin": self.margin,
                "tolerance": self.tolerance, "ok": self.ok()}


def square_displacement(area: float, k_max: int = 5, eps: float = 0.004,
                        window: float = 0.002, y_resolution: int = 4096,
                        tracers: int = 512, tolerance: float = 0.02,
                        seed: int = 0):
    """Autonomous path displacing the open square of the given area.

    Returns (path, certificate); raises CertificateFailed when either the
    displacement or the length budget fails.
    """
    if area <= 0:
        raise ValueError("area must be positive")
    a = math.sqrt(area)
    v = a * (1.0 + eps)
    mu = window * a
    y1 = ex.Var("y1")
    # ramp v*(a/2 - y1) on [-mu, a+mu], cut to zero outside [-2mu, a+2mu];
    # the cutoff argument is scaled by 1/mu so the glue sees a unit-width
    # transition and cannot underflow for small windows
    cutoff = ex.step(ex.div(ex.sub(y1, ex.const(a / 2.0)), ex.const(mu)),
                     a / (2.0 * mu) + 1.0, a / (2.0 * mu) + 2.0)
    h = ex.mul(ex.mul(ex.const(v), ex.sub(ex.const(a / 2.0), y1)), cutoff)
    lo = min(-4.0 * mu - 0.5 * a, -0.5)
    hi = max(a + 4.0 * mu + 0.5 * a, a + 0.5)
    grid = Grid.box([lo - a, lo], [hi + a + v, hi], (3, y_resolution))
    path = autonomous_path(h, 2, grid)

    lengths = {}
    for k in range(k_max + 1):
        rep = ln.length_k(path, k, grid, time_samples=10, check_support=False)
        lengths[k] = rep.total

    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, a, (tracers, 2))
    cloud = fl.TracerCloud(pts)
    fm = fl.integrate(path, cloud, steps_per_piece=32)
    cert_flow = fl.displaced(fm, fl.box_region([0.0, 0.0], [a, a]))
    cert = SquareCertificate(area, lengths, cert_flow.displaced,
                             cert_flow.margin, tolerance)
    if not cert.ok():
        raise CertificateFailed(f"square displacement certificate failed: {cert.to_json()}")
    return path, cert


@dataclass(frozen=True)
class ShiftCertificate:
    v: float
    eps: float
    fixed_error: float     # max drift of tracers left of -eps
    shift_error: float     # max deviation from (+v, 0, ...) right of 0
    window: float

    def ok(self, fixed_tol=1e-8, shift_tol=1e-6):
        return self.fixed_error < fixed_tol and self.shift_error < shift_tol

    def to_json(self):
        return {"v": self.v, "eps": self.eps, "fixed_error": self.fixed_error,
                "shift_error": self.shift_error, "window": self.window,
                "ok": self.ok()}


def half_space_shift(v: float, eps: float, window: float = 16.0,
                     grid: Grid = None) -> HamiltonianPath:
    """Path generated by H = -eta(x1) * v * y1 shifting {x1 >= 0} by +v."""
    if v <= 0 or eps <= 0:
        raise ValueError("v and eps must be positive")
    x1, y1 = ex.Var("x1"), ex.Var("y1")
    # unit-width transition in the scaled argument: eta = 1 on [0, 2*window],
    # 0 left of -eps and right of 2*window + eps
    eta = ex.step(ex.div(ex.sub(x1, ex.const(window)), ex.const(eps)),
                  window / eps, window / eps + 1.0)
    h = ex.neg(ex.mul(ex.mul(eta, ex.const(v)), y1))
    if grid is None:
        grid = Grid.box([-window, -window], [window, window], (16, 16))
    return autonomous_path(h, 2, grid)


def shift_certificate(v: float, eps: float, window: float = 16.0,
                      probes: int = 64, seed: int = 0,
                      steps: int = 128) -> ShiftCertificate:
    """Integrate probe tracers on both sides of the transition zone."""
    path = half_space_shift(v, eps, window)
    rng = np.random.default_rng(seed)
    span = min(window / 2.0, 8.0)
    fixed_pts = np.column_stack([rng.uniform(-span, -2.0 * eps, probes),
                                 rng.uniform(-span, span, probes)])
    moved_pts = np.column_stack([rng.uniform(1e-9, span, probes),
                                 rng.uniform(-span, span, probes)])
    fm_fixed = fl.integrate(path, fl.TracerCloud(fixed_pts), steps)
    fm_moved = fl.integrate(path, fl.TracerCloud(moved_pts), steps)
    fixed_err = float(np.abs(fm_fixed.final.points - fixed_pts).max())
    shift_err = float(np.abs(fm_moved.final.points - (moved_pts + [v, 0.0])).max())
    return ShiftCertificate(v, eps, fixed_err, shift_err, window)


def shift_conjugator(v: float, dimension: int = 2) -> AffineSymplectic:
    """The affine restriction of the half-space shift on {x1 > 0}."""
    shift = np.zeros(dimension)
    shift[0] = v
    return AffineSymplectic.translation(shift)


def conjugate_by_shift(path: HamiltonianPath, v: float) -> HamiltonianPath:
    """Conjugated path S g S^{-1} for g supported in {x1 > 0}, where the
    conjugator acts there as the affine translation by (v, 0, ...)."""
    return conjugate(path, shift_conjugator(v, path.dimension))
