"""Length functionals on piecewise-smooth Hamiltonian paths.

Four variants are computed, each with a per-derivative-order breakdown:

* ``length_k``          sum over orders i <= k of the time integral of the
                        spatial oscillation of the i-th time derivative;
* ``coarse_length_k``   time suprema instead of time integrals;
* ``length_kp``         L_p spatial norms instead of oscillations;
* ``hofer_like_length_k``  flat-torus variant splitting a symplectic path
                        into constant-form coefficients plus an exact
                        potential, with the l^1 size of the coefficients.

Every number produced here is the length of the *given* path: a certified
upper bound for the associated infimum-over-paths metric, never the metric
itself. Reports carry that disclaimer.

Time quadrature is composite 5-point Gauss-Legendre per piece. The coarse
functional is sampled on a global uniform closed lattice, which makes it
exactly invariant under division refinements whose new breakpoints lie on
the lattice.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, replace

import numpy as np

from . import expr as ex
from . import grid as gridmod
from .errors import GeometryError
from .grid import Field, Grid
from .hampath import HamiltonianPath, Piece

UPPER_BOUND_NOTE = ("path length only: an upper bound for the infimum-over-paths "
                    "(quasi)metric, which is not computed")

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)


@dataclass(frozen=True)
class LengthReport:
    total: float
    per_order: tuple               # indexed i = 0..k
    per_piece: tuple               # per_piece[l][i]
    quadrature: dict
    kind: str = "k"
    note: str = UPPER_BOUND_NOTE

    def __post_init__(self):
        if abs(self.total - sum(self.per_order)) > 1e-12 * max(1.0, abs(self.total)):
            raise ValueError("total must equal the sum of per-order terms")

    def to_json(self):
        return {"total": self.total, "per_order": list(self.per_order),
                "per_piece": [list(r) for r in self.per_piece],
                "quadrature": self.quadrature, "kind": self.kind, "note": self.note}

    def to_csv(self):
        out = io.StringIO()
        out.write("piece," + ",".join(f"order_{i}" for i in range(len(self.per_order))) + "\n")
        for l, row in enumerate(self.per_piece):
            out.write(f"{l}," + ",".join(repr(v) for v in row) + "\n")
        out.write("all," + ",".join(repr(v) for v in self.per_order) + "\n")
        return out.getvalue()


def _gl_panels(a, b, n_nodes):
    """Composite Gauss-Legendre nodes/weights on [a, b], 5 nodes per panel."""
    panels = max(2, int(np.ceil(n_nodes / 5)))
    edges = np.linspace(a, b, panels + 1)
    nodes, weights = [], []
    for lo, hi in zip(edges, edges[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(0.5 * (lo + hi) + half * _GL_NODES)
        weights.append(half * _GL_WEIGHTS)
    return np.concatenate(nodes), np.concatenate(weights)


def _time_derivatives(piece: Piece, k: int):
    out = [piece.hamiltonian]
    for _ in range(k):
        out.append(ex.diff(out[-1], "t"))
    return out


def _spatial_values(expression, env, n_points):
    vals = ex.eval_env(expression, env)
    if np.ndim(vals) == 0:
        return np.full(n_points, float(vals))
    return vals


def length_k(f: HamiltonianPath, k: int, grid: Grid = None,
             time_samples: int = 10, check_support=True) -> LengthReport:
    """Sum_{i<=k} integral of osc_x(d^i H / dt^i) dt over each piece."""
    return _integral_length(f, k, grid, time_samples, norm="osc",
                            check_support=check_support)


def length_kp(f: HamiltonianPath, k: int, p: float, grid: Grid = None,
              time_samples: int = 10) -> LengthReport:
    """Sum_{i<=k} integral of the spatial L_p norm of d^i H / dt^i."""
    if p <= 0:
        raise ValueError("p must be > 0")
    return _integral_length(f, k, grid, time_samples, norm="lp", p=p)


def _integral_length(f, k, grid, time_samples, norm, p=None, check_support=False):
    if k < 0:
        raise ValueError("k must be >= 0")
    if time_samples < 8:
        raise ValueError("need at least 8 time samples per piece")
    grid = grid or f.domain
    pts = grid.points()
    n_pts = pts.shape[0]
    vol = grid.cell_volume
    per_piece = []
    for piece in f.pieces:
        derivs = _time_derivatives(piece, k)
        nodes, weights = _gl_panels(piece.t_start, piece.t_end, time_samples)
        if check_support:
            mid_env = ex.point_env(pts, 0.5 * (piece.t_start + piece.t_end))
            gridmod.check_support_margin(
                Field(_spatial_values(piece.hamiltonian, mid_env, n_pts), grid))
        row = np.zeros(k + 1)
        for t, w in zip(nodes, weights):
            env = ex.point_env(pts, t)
            for i, d in enumerate(derivs):
                vals = _spatial_values(d, env, n_pts)
                if norm == "osc":
                    size = vals.max() - vals.min()
                else:
                    size = (float(np.sum(np.abs(vals) ** p)) * vol) ** (1.0 / p)
                row[i] += w * size
        per_piece.append(tuple(float(v) for v in row))
    per_order = tuple(float(s) for s in np.sum(per_piece, axis=0))
    kind = "kp" if norm == "lp" else "k"
    quad = {"time_samples": int(time_samples), "scheme": "gauss-legendre-5"}
    if p is not None:
        quad["p"] = p
    return LengthReport(float(sum(per_order)), per_order,
                        tuple(per_piece), quad, kind=kind)


def two_resolution(f: HamiltonianPath, k: int, grid: Grid, time_samples: int = 10):
    """Richardson-style bracket for the grid-sampling error of length_k.

    Sampled oscillation under-estimates the true sup - inf by O(h^2); the
    same functional on a doubled grid plus the second-order extrapolation
    brackets the converged value.
    """
    fine_grid = Grid(grid.dimension, grid.geometry, grid.lower, grid.upper,
                     tuple(2 * r for r in grid.resolution))
    coarse = length_k(f, k, grid, time_samples, check_support=False)
    fine = length_k(f, k, fine_grid, time_samples, check_support=False)
    extrapolated = fine.total + (fine.total - coarse.total) / 3.0
    return {"coarse": coarse.total, "fine": fine.total,
            "extrapolated": extrapolated,
            "sampling_error_estimate": abs(fine.total - coarse.total)}


def coarse_length_k(f: HamiltonianPath, k: int, grid: Grid = None,
                    time_samples: int = 129) -> LengthReport:
    """Sum_{i<=k} of the supremum over pieces and times of the oscillation.

    Sampled on the global closed lattice {j/(S-1)}; lattice breakpoints are
    evaluated from both adjacent pieces, so refining a division at a lattice
    point cannot change the result.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if time_samples < 8:
        raise ValueError("need at least 8 time samples")
    grid = grid or f.domain
    pts = grid.points()
    n_pts = pts.shape[0]
    lattice = np.linspace(0.0, 1.0, time_samples)
    per_piece = []
    for piece in f.pieces:
        derivs = _time_derivatives(piece, k)
        sel = lattice[(lattice >= piece.t_start) & (lattice <= piece.t_end)]
        ts = np.unique(np.concatenate([[piece.t_start], sel, [piece.t_end]]))
        row = np.zeros(k + 1)
        for t in ts:
            env = ex.point_env(pts, t)
            for i, d in enumerate(derivs):
                vals = _spatial_values(d, env, n_pts)
                row[i] = max(row[i], vals.max() - vals.min())
        per_piece.append(tuple(float(v) for v in row))
    per_order = tuple(float(v) for v in np.max(per_piece, axis=0))
    return LengthReport(float(sum(per_order)), per_order, tuple(per_piece),
                        {"time_samples": int(time_samples), "scheme": "closed-lattice-sup"},
                        kind="coarse")


# --- flat-torus paths split into constant-form + exact parts ---

@dataclass(frozen=True)
class TorusPiece:
    t_start: float
    t_end: float
    harmonic: tuple        # 2n coefficient Expressions, functions of t only
    exact: ex.Expression   # potential U(x, t); mean is irrelevant to osc

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ValueError("piece needs t_start < t_end")
        for lam in self.harmonic:
            if ex.variables(lam) - {"t"}:
                raise ValueError("harmonic coefficients must depend on t only")


@dataclass(frozen=True)
class TorusSymplecticPath:
    pieces: tuple
    dimension: int
    domain: Grid

    def __post_init__(self):
        if self.domain.geometry != "torus":
            raise GeometryError("symplectic paths with a harmonic part live on a torus")
        if self.pieces[0].t_start != 0.0 or self.pieces[-1].t_end != 1.0:
            raise ValueError("pieces must tile [0, 1]")
        for a, b in zip(self.pieces, self.pieces[1:]):
            if a.t_end != b.t_start:
                raise ValueError("pieces must tile [0, 1] without gaps")
        for p in self.pieces:
            if len(p.harmonic) != self.dimension:
                raise ValueError("need one coefficient per constant 1-form, i.e. 2n")

    def to_json(self):
        return {
            "dimension": self.dimension,
            "pieces": [{"t0": p.t_start, "t1": p.t_end,
                        "harmonic": [ex.to_source(l) for l in p.harmonic],
                        "exact": ex.to_source(p.exact)} for p in self.pieces],
            "domain": self.domain.to_json(),
        }

    @staticmethod
    def from_json(spec):
        pieces = tuple(
            TorusPiece(float(p["t0"]), float(p["t1"]),
                       tuple(ex.parse(l) for l in p["harmonic"]),
                       ex.parse(p["exact"]))
            for p in spec["pieces"])
        return TorusSymplecticPath(pieces, int(spec["dimension"]),
                                   Grid.from_json(spec["domain"]))


def hofer_like_length_k(phi: TorusSymplecticPath, k: int, grid: Grid = None,
                        time_samples: int = 10) -> LengthReport:
    """Sum_{i<=k} integral of (l^1 of coefficient derivatives + osc of the
    potential's derivative)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    grid = grid or phi.domain
    pts = grid.points()
    n_pts = pts.shape[0]
    per_piece = []
    for piece in phi.pieces:
        coeff_derivs = []           # coeff_derivs[j][i] = i-th derivative of lambda_j
        for lam in piece.harmonic:
            chain = [lam]
            for _ in range(k):
                chain.append(ex.diff(chain[-1], "t"))
            coeff_derivs.append(chain)
        u_derivs = [piece.exact]
        for _ in range(k):
            u_derivs.append(ex.diff(u_derivs[-1], "t"))
        nodes, weights = _gl_panels(piece.t_start, piece.t_end, time_samples)
        row = np.zeros(k + 1)
        for t, w in zip(nodes, weights):
            env = ex.point_env(pts, t)
            t_env = {"t": float(t)}
            for i in range(k + 1):
                harm = sum(abs(float(ex.eval_env(chain[i], t_env)))
                           for chain in coeff_derivs)
                vals = _spatial_values(u_derivs[i], env, n_pts)
                row[i] += w * (harm + (vals.max() - vals.min()))
        per_piece.append(tuple(float(v) for v in row))
    per_order = tuple(float(s) for s in np.sum(per_piece, axis=0))
    return LengthReport(float(sum(per_order)), per_order, tuple(per_piece),
                        {"time_samples": int(time_samples), "scheme": "gauss-legendre-5"},
                        kind="hl")


def flux_harmonic(phi: TorusSymplecticPath, time_samples: int = 20) -> np.ndarray:
    """Componentwise time integral of the constant-form coefficients."""
    out = np.zeros(phi.dimension)
    for piece in phi.pieces:
        nodes, weights = _gl_panels(piece.t_start, piece.t_end, time_samples)
        for j, lam in enumerate(piece.harmonic):
            vals = np.array([float(ex.eval_env(lam, {"t": float(t)})) for t in nodes])
            out[j] += float(np.dot(weights, vals))
    return out


def reparametrize_torus(phi: TorusSymplecticPath, s: ex.Expression,
                        s_prime: ex.Expression = None) -> TorusSymplecticPath:
    """Replay a torus path along a smooth monotone time change fixing 0 and 1."""
    sp = s_prime if s_prime is not None else ex.diff(s, "t")
    if len(phi.pieces) > 1:
        raise ValueError("torus reparametrization supports single-piece paths")
    out = []
    for piece in phi.pieces:
        harm = tuple(ex.mul(sp, ex.substitute_time(lam, s)) for lam in piece.harmonic)
        exact = ex.mul(sp, ex.substitute_time(piece.exact, s))
        out.append(TorusPiece(piece.t_start, piece.t_end, harm, exact))
    return replace(phi, pieces=tuple(out))
