"""Piecewise-smooth Hamiltonian paths and their algebra.

A path is an ordered list of pieces tiling [0, 1] exactly, each carrying a
Hamiltonian expression. The algebra mirrors how paths of diffeomorphisms
compose: time reversal (negate and flip time), two-speed concatenation
(each half replayed at double speed with doubled Hamiltonian),
reparametrization by a monotone time change, conjugation by an affine
symplectic map (substituted into the expression), and pointwise sums of
disjointly supported families.

Continuity of the underlying flow at piece boundaries is deliberately not
part of the data model; the flow module checks it where experiments care.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from . import expr as ex
from .errors import NotMonotone, SupportOverlap
from .grid import Grid


@dataclass(frozen=True)
class Piece:
    t_start: float
    t_end: float
    hamiltonian: ex.Expression

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise ValueError(f"piece needs t_start < t_end, got [{self.t_start}, {self.t_end}]")


@dataclass(frozen=True)
class HamiltonianPath:
    pieces: tuple
    dimension: int
    domain: Grid

    def __post_init__(self):
        if not self.pieces:
            raise ValueError("path needs at least one piece")
        if self.pieces[0].t_start != 0.0 or self.pieces[-1].t_end != 1.0:
            raise ValueError("pieces must start at 0 and end at 1")
        for a, b in zip(self.pieces, self.pieces[1:]):
            if a.t_end != b.t_start:
                raise ValueError(f"gap/overlap at t={a.t_end} vs {b.t_start}")
        for p in self.pieces:
            if ex.spatial_dimension(p.hamiltonian) > self.dimension:
                raise ValueError("piece references coordinates beyond the declared dimension")

    @property
    def breakpoints(self):
        return [p.t_start for p in self.pieces] + [1.0]

    def piece_at(self, t):
        for p in self.pieces:
            if p.t_start <= t <= p.t_end:
                return p
        raise ValueError(f"t={t} outside [0,1]")

    def hamiltonian_at(self, t):
        return self.piece_at(t).hamiltonian

    def to_json(self):
        return {
            "dimension": self.dimension,
            "pieces": [{"t0": p.t_start, "t1": p.t_end,
                        "expr": ex.to_source(p.hamiltonian)} for p in self.pieces],
            "domain": self.domain.to_json(),
        }

    @staticmethod
    def from_json(spec):
        pieces = tuple(Piece(float(p["t0"]), float(p["t1"]), ex.parse(p["expr"]))
                       for p in spec["pieces"])
        return HamiltonianPath(pieces, int(spec["dimension"]),
                               Grid.from_json(spec["domain"]))

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)

    @staticmethod
    def read(path):
        with open(path, "r", encoding="utf-8") as fh:
            return HamiltonianPath.from_json(json.load(fh))


def autonomous_path(expression, dimension, domain) -> HamiltonianPath:
    return HamiltonianPath((Piece(0.0, 1.0, expression),), dimension, domain)


@dataclass(frozen=True)
class AffineSymplectic:
    """x -> linear @ x + shift with linear^T J linear = J (coordinates x1,y1,...)."""

    linear: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        L = np.asarray(self.linear, dtype=float)
        b = np.asarray(self.shift, dtype=float)
        object.__setattr__(self, "linear", L)
        object.__setattr__(self, "shift", b)
        d = L.shape[0]
        if L.shape != (d, d) or b.shape != (d,) or d % 2 != 0:
            raise ValueError("linear must be 2n x 2n and shift length 2n")
        J = standard_symplectic_matrix(d)
        if np.abs(L.T @ J @ L - J).max() > 1e-10:
            raise ValueError("linear part is not symplectic")

    @staticmethod
    def identity(dimension):
        return AffineSymplectic(np.eye(dimension), np.zeros(dimension))

    @staticmethod
    def translation(shift):
        shift = np.asarray(shift, dtype=float)
        return AffineSymplectic(np.eye(len(shift)), shift)

    def inverse(self):
        Linv = np.linalg.inv(self.linear)
        return AffineSymplectic(Linv, -Linv @ self.shift)

    def apply(self, points):
        return np.asarray(points, dtype=float) @ self.linear.T + self.shift

    def as_substitution(self):
        """Variable map realizing x -> self(x), i.e. x_j := (L x + b)_j."""
        d = self.linear.shape[0]
        names = []
        for i in range(d // 2):
            names += [f"x{i + 1}", f"y{i + 1}"]
        mapping = {}
        for row, out_name in enumerate(names):
            acc = ex.const(self.shift[row])
            for col, in_name in enumerate(names):
                c = self.linear[row, col]
                if c != 0.0:
                    acc = ex.add(acc, ex.mul(ex.const(c), ex.Var(in_name)))
            mapping[out_name] = acc
        return mapping


def standard_symplectic_matrix(dimension):
    """J for the 2-form sum dx_i ^ dy_i in interleaved coordinates."""
    J = np.zeros((dimension, dimension))
    for i in range(dimension // 2):
        J[2 * i, 2 * i + 1] = 1.0
        J[2 * i + 1, 2 * i] = -1.0
    return J


# --- the path algebra ---

def reverse(f: HamiltonianPath) -> HamiltonianPath:
    """Time-reversed path: piece [a,b] becomes [1-b,1-a] carrying -H(x, 1-t)."""
    one_minus_t = ex.sub(ex.const(1.0), ex.Var("t"))
    pieces = []
    for p in reversed(f.pieces):
        flipped = ex.neg(ex.substitute_time(p.hamiltonian, one_minus_t))
        pieces.append(Piece(1.0 - p.t_end, 1.0 - p.t_start, flipped))
    return replace(f, pieces=tuple(pieces))


def concatenate(f: HamiltonianPath, g: HamiltonianPath) -> HamiltonianPath:
    """Two-speed splice: f replayed on [0,1/2], then g on [1/2,1].

    Each half carries twice its Hamiltonian at double speed, so the spliced
    family generates "f's endpoint, then g's flow applied after it".
    """
    if f.dimension != g.dimension:
        raise ValueError("paths must share a dimension")
    t = ex.Var("t")
    pieces = []
    for p in f.pieces:
        h = ex.mul(ex.const(2.0), ex.substitute_time(p.hamiltonian, ex.mul(ex.const(2.0), t)))
        pieces.append(Piece(p.t_start / 2.0, p.t_end / 2.0, h))
    for p in g.pieces:
        h = ex.mul(ex.const(2.0), ex.substitute_time(
            p.hamiltonian, ex.sub(ex.mul(ex.const(2.0), t), ex.const(1.0))))
        pieces.append(Piece((p.t_start + 1.0) / 2.0, (p.t_end + 1.0) / 2.0, h))
    return replace(f, pieces=tuple(pieces))


def _invert_monotone(s_piece, target, lo, hi, tol=1e-14):
    """Solve s(t) = target for t in [lo, hi] by bisection (s monotone)."""
    f = lambda t: float(ex.eval_env(s_piece, {"t": t})) - target
    a, b = lo, hi
    fa = f(a)
    if fa > tol:
        raise NotMonotone(f"reparametrization leaves no preimage for {target}")
    for _ in range(200):
        m = 0.5 * (a + b)
        if b - a < tol:
            break
        if f(m) < 0:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def reparametrize(f: HamiltonianPath, s, s_prime=None, samples=257) -> HamiltonianPath:
    """Replay f along a monotone time change s: [0,1] -> [0,1].

    ``s`` is an Expression in t, or a list of Pieces for a piecewise-smooth
    change; derivatives are taken symbolically when not supplied. New pieces
    carry s'(t) * H(x, s(t)); the identity change returns f itself.
    """
    if isinstance(s, ex.Expression) and s == ex.Var("t"):
        return f
    if isinstance(s, ex.Expression):
        s_pieces = [Piece(0.0, 1.0, s)]
    else:
        s_pieces = list(s)
    d_pieces = ([Piece(p.t_start, p.t_end, ex.diff(p.hamiltonian, "t")) for p in s_pieces]
                if s_prime is None else
                ([Piece(0.0, 1.0, s_prime)] if isinstance(s_prime, ex.Expression) else list(s_prime)))

    # validate endpoints and monotonicity by sampling
    first, last = s_pieces[0], s_pieces[-1]
    s0 = float(ex.eval_env(first.hamiltonian, {"t": 0.0}))
    s1 = float(ex.eval_env(last.hamiltonian, {"t": 1.0}))
    if abs(s0) > 1e-12 or abs(s1 - 1.0) > 1e-12:
        raise NotMonotone(f"time change must fix 0 and 1, got s(0)={s0}, s(1)={s1}")
    for sp, dp in zip(s_pieces, d_pieces):
        ts = np.linspace(sp.t_start, sp.t_end, samples)
        dv = ex.eval_env(dp.hamiltonian, {"t": ts})
        if np.ndim(dv) == 0:
            dv = np.full_like(ts, float(dv))
        if dv.min() < -1e-12:
            raise NotMonotone(f"s' reaches {dv.min()} on [{sp.t_start}, {sp.t_end}]")

    # split at every preimage of an f-breakpoint, then substitute
    out = []
    for sp, dp in zip(s_pieces, d_pieces):
        lo, hi = sp.t_start, sp.t_end
        s_lo = float(ex.eval_env(sp.hamiltonian, {"t": lo}))
        s_hi = float(ex.eval_env(sp.hamiltonian, {"t": hi}))
        cuts = [lo]
        for b in f.breakpoints:
            if s_lo + 1e-15 < b < s_hi - 1e-15:
                cuts.append(_invert_monotone(sp.hamiltonian, b, lo, hi))
        cuts.append(hi)
        for a, b in zip(cuts, cuts[1:]):
            if b - a <= 1e-15:
                continue
            mid_s = float(ex.eval_env(sp.hamiltonian, {"t": 0.5 * (a + b)}))
            base = f.piece_at(min(max(mid_s, 0.0), 1.0)).hamiltonian
            h = ex.mul(dp.hamiltonian, ex.substitute_time(base, sp.hamiltonian))
            out.append(Piece(a, b, h))
    out[0] = replace(out[0], t_start=0.0)
    out[-1] = replace(out[-1], t_end=1.0)
    fixed = [out[0]]
    for p in out[1:]:
        fixed.append(replace(p, t_start=fixed[-1].t_end))
    return replace(f, pieces=tuple(fixed))


def conjugate(f: HamiltonianPath, theta: AffineSymplectic) -> HamiltonianPath:
    """Path of theta . f_t . theta^{-1}: each piece becomes H(theta^{-1}(x), t)."""
    mapping = theta.inverse().as_substitution()
    pieces = tuple(replace(p, hamiltonian=ex.substitute(p.hamiltonian, mapping))
                   for p in f.pieces)
    return replace(f, pieces=pieces)


def right_compose(f: HamiltonianPath, _fixed_map=None) -> HamiltonianPath:
    """Right composition with a fixed map keeps the Hamiltonian family; no-op."""
    return f


def _common_division(paths):
    cuts = sorted({b for f in paths for b in f.breakpoints})
    merged = [cuts[0]]
    for c in cuts[1:]:
        if c - merged[-1] > 1e-15:
            merged.append(c)
    return merged


def validate_disjoint_supports(paths, boxes, grid, rel_tol=1e-9, t_samples=5):
    """Sampling check that each path's Hamiltonian vanishes outside its box."""
    pts = grid.points()
    for f, box in zip(paths, boxes):
        lo, hi = np.asarray(box[0], float), np.asarray(box[1], float)
        outside = np.any((pts < lo) | (pts > hi), axis=1)
        if not outside.any():
            continue
        for tq in np.linspace(0.0, 1.0, t_samples):
            h = f.hamiltonian_at(min(tq, 1.0 - 1e-12))
            vals = ex.eval_env(h, ex.point_env(pts, tq))
            if np.ndim(vals) == 0:
                vals = np.full(pts.shape[0], float(vals))
            scale = max(vals.max() - vals.min(), 1e-300)
            if np.abs(vals[outside]).max() > rel_tol * scale:
                raise SupportOverlap(
                    f"path support leaks outside its declared box at t={tq}")
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            lo_i, hi_i = boxes[i]
            lo_j, hi_j = boxes[j]
            if all(l < h for l, h in zip(np.maximum(lo_i, lo_j), np.minimum(hi_i, hi_j))):
                raise SupportOverlap(f"declared boxes {i} and {j} intersect")


def disjoint_product(paths, boxes=None, grid=None) -> HamiltonianPath:
    """Pointwise sum of disjointly supported paths on a common division.

    The sum generates the simultaneous (= composed, by disjointness) flow.
    Supports are validated by sampling when boxes are supplied.
    """
    paths = list(paths)
    if len(paths) == 1 and boxes is None:
        return paths[0]
    base = paths[0]
    if boxes is not None:
        validate_disjoint_supports(paths, boxes, grid or base.domain)
    division = _common_division(paths)
    pieces = []
    for a, b in zip(division, division[1:]):
        mid = 0.5 * (a + b)
        total = None
        for f in paths:
            h = f.piece_at(mid).hamiltonian
            total = h if total is None else ex.add(total, h)
        pieces.append(Piece(a, b, total))
    return replace(base, pieces=tuple(pieces))
