"""Tracer-point integration of the Hamiltonian ODE.

The vector field convention is fixed by contracting the symplectic form
sum dx_i ^ dy_i against the field and equating with -dH, which gives

    dx_i/dt = -dH/dy_i,      dy_i/dt = +dH/dx_i.

Under this convention H = 2*x1 moves points by (0, 2t): a shift by 2t along
y1, which is the validation example wired into the tests.

Integration is classical RK4 with fixed steps per piece. RK4 is not
symplectic; a step-doubling error estimate is recorded and, when a target
tolerance is supplied, the step count doubles until the estimate meets it.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .errors import BlowUp, CloudMismatch
from .hampath import HamiltonianPath

DEFAULT_SAFETY_RADIUS = 1e6


@dataclass(frozen=True)
class TracerCloud:
    points: np.ndarray            # (N, 2n)
    labels: tuple = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] % 2 != 0:
            raise ValueError("points must be a nonempty (N, 2n) array")
        object.__setattr__(self, "points", pts)

    @staticmethod
    def from_csv(text):
        rows = [ln for ln in text.strip().splitlines() if ln.strip()]
        data = [list(map(float, ln.split(","))) for ln in rows[1:]]
        return TracerCloud(np.array(data))

    def to_csv(self):
        dim = self.points.shape[1]
        names = []
        for i in range(dim // 2):
            names += [f"x{i + 1}", f"y{i + 1}"]
        out = io.StringIO()
        out.write(",".join(names) + "\n")
        for row in self.points:
            out.write(",".join(repr(float(c)) for c in row) + "\n")
        return out.getvalue()


@dataclass(frozen=True)
class FlowMap:
    initial: TracerCloud
    final: TracerCloud
    path_hash: str
    stats: dict

    def __post_init__(self):
        if self.initial.points.shape != self.final.points.shape:
            raise ValueError("initial and final clouds must have equal shape")

    def stats_json(self):
        return json.dumps(self.stats, sort_keys=True)


def _gradient_field(piece_hamiltonian, dimension):
    """Per-coordinate velocity expressions (-dH/dy_i, +dH/dx_i)."""
    vel = []
    for i in range(dimension // 2):
        vel.append(ex.neg(ex.diff(piece_hamiltonian, f"y{i + 1}")))
        vel.append(ex.diff(piece_hamiltonian, f"x{i + 1}"))
    return vel


def _velocity(vel_exprs, pts, t):
    env = ex.point_env(pts, t)
    out = np.empty_like(pts)
    for j, e in enumerate(vel_exprs):
        v = ex.eval_env(e, env)
        out[:, j] = v if np.ndim(v) else float(v)
    return out


def _rk4(vel_exprs, pts, t0, t1, steps, safety_radius):
    h = (t1 - t0) / steps
    x = pts.copy()
    for n in range(steps):
        t = t0 + n * h
        k1 = _velocity(vel_exprs, x, t)
        k2 = _velocity(vel_exprs, x + 0.5 * h * k1, t + 0.5 * h)
        k3 = _velocity(vel_exprs, x + 0.5 * h * k2, t + 0.5 * h)
        k4 = _velocity(vel_exprs, x + h * k3, t + h)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if np.abs(x).max() > safety_radius:
            raise BlowUp(f"tracer left the safety box (radius {safety_radius:g})")
    return x


def integrate(f: HamiltonianPath, cloud: TracerCloud, steps_per_piece: int = 256,
              safety_radius: float = DEFAULT_SAFETY_RADIUS, tol: float = None,
              max_doublings: int = 6) -> FlowMap:
    """Time-1 images of the tracers under the piecewise Hamiltonian flow.

    The error estimate compares against a half-step integration. With ``tol``
    set, steps double (up to ``max_doublings``) until the estimate passes.
    """
    pts0 = cloud.points
    dim = pts0.shape[1]
    if dim < f.dimension:
        raise ValueError("cloud dimension below the path dimension")
    fields = [(p.t_start, p.t_end, _gradient_field(p.hamiltonian, dim)) for p in f.pieces]

    def run(steps):
        x = pts0
        for t0, t1, vel in fields:
            x = _rk4(vel, x, t0, t1, steps, safety_radius)
        return x

    steps = steps_per_piece
    while True:
        final = run(steps)
        half = run(max(steps // 2, 1))
        err = float(np.abs(final - half).max())
        if tol is None or err <= tol or steps >= steps_per_piece * 2 ** max_doublings:
            break
        steps *= 2
    stats = {"steps_per_piece": steps, "pieces": len(f.pieces),
             "max_step_error": err}
    path_hash = _hash_path(f)
    return FlowMap(cloud, TracerCloud(final, cloud.labels), path_hash, stats)


def _hash_path(f):
    import hashlib
    return hashlib.sha256(json.dumps(f.to_json(), sort_keys=True).encode()).hexdigest()[:16]


def c0_distance(a: FlowMap, b: FlowMap) -> float:
    """Max tracer displacement between two flows of the same cloud.

    A sampled lower bound for the true sup-distance between the maps.
    """
    if a.initial.points.shape != b.initial.points.shape or \
            not np.array_equal(a.initial.points, b.initial.points):
        raise CloudMismatch("flow maps do not share an initial cloud")
    return float(np.linalg.norm(a.final.points - b.final.points, axis=1).max())


@dataclass(frozen=True)
class DisplacementCertificate:
    displaced: bool
    margin: float
    samples: int

    def to_json(self):
        return {"displaced": self.displaced, "margin": self.margin,
                "samples": self.samples,
                "note": "sampled certificate, not a rigorous displacement proof"}


def displaced(flow: FlowMap, region_test) -> DisplacementCertificate:
    """Sampled certificate that the flow moves region A off itself.

    ``region_test`` maps an (N, 2n) array to a boolean membership mask. The
    margin is the smallest distance from any displaced A-tracer back to the
    initial A-sample set.
    """
    init = flow.initial.points
    mask = np.asarray(region_test(init), dtype=bool)
    if not mask.any():
        raise ValueError("no tracers sample the region")
    a0 = init[mask]
    a1 = flow.final.points[mask]
    still_inside = bool(np.asarray(region_test(a1), dtype=bool).any())
    # pairwise distances without scipy; clouds are desk-scale
    d2 = np.sum((a1[:, None, :] - a0[None, :, :]) ** 2, axis=-1)
    margin = float(np.sqrt(d2.min()))
    return DisplacementCertificate(displaced=(not still_inside) and margin > 0.0,
                                   margin=margin if not still_inside else 0.0,
                                   samples=int(mask.sum()))


def box_region(lower, upper):
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)

    def test(pts):
        pts = np.asarray(pts, dtype=float)
        return np.all((pts > lower) & (pts < upper), axis=1)

    return test


def ball_region(center, radius):
    center = np.asarray(center, dtype=float)

    def test(pts):
        pts = np.asarray(pts, dtype=float)
        return np.linalg.norm(pts - center, axis=1) < radius

    return test


def polygon_area(loop_points):
    """Shoelace area of a polygon in the (x1, y1) plane; flows preserve it."""
    x = loop_points[:, 0]
    y = loop_points[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
