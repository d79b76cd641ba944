"""Uniform grids on boxes in R^{2n} and flat tori, with the spatial norms
used by the length functionals: oscillation (max - min), sup, and L_p with
the Euclidean volume form.

Quadrature is the midpoint rule: box axes sample cell centers, torus axes
sample j*h (every point is a cell center under periodicity). Box grids
stand for "compactly supported inside this box"; fields are expected to
vanish near the boundary and a support-margin warning is emitted when they
do not.
"""

from __future__ import annotations

import io
import json
import warnings
from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .errors import GeometryError


class SupportMarginWarning(UserWarning):
    """Field does not vanish in the outermost cell layer of a box grid."""


@dataclass(frozen=True)
class Grid:
    dimension: int
    geometry: str                  # "box" | "torus"
    lower: tuple                   # per-axis lower bound (torus: zeros)
    upper: tuple                   # per-axis upper bound (torus: period)
    resolution: tuple

    def __post_init__(self):
        if self.geometry not in ("box", "torus"):
            raise GeometryError(f"unknown geometry {self.geometry!r}")
        if self.dimension % 2 != 0 or self.dimension <= 0:
            raise ValueError("dimension must be a positive even integer 2n")
        for field in ("lower", "upper", "resolution"):
            if len(getattr(self, field)) != self.dimension:
                raise ValueError(f"{field} must have one entry per axis")
        if any(r < 2 for r in self.resolution):
            raise ValueError("resolution must be >= 2 per axis")
        if any(u <= l for l, u in zip(self.lower, self.upper)):
            raise ValueError("upper must exceed lower on every axis")

    @staticmethod
    def box(lower, upper, resolution):
        lower, upper = tuple(map(float, lower)), tuple(map(float, upper))
        if isinstance(resolution, int):
            resolution = (resolution,) * len(lower)
        return Grid(len(lower), "box", lower, upper, tuple(map(int, resolution)))

    @staticmethod
    def torus(periods, resolution):
        periods = tuple(map(float, periods))
        if isinstance(resolution, int):
            resolution = (resolution,) * len(periods)
        return Grid(len(periods), "torus", (0.0,) * len(periods), periods,
                    tuple(map(int, resolution)))

    @property
    def spacings(self):
        return tuple((u - l) / r for l, u, r in
                     zip(self.lower, self.upper, self.resolution))

    @property
    def cell_volume(self):
        vol = 1.0
        for h in self.spacings:
            vol *= h
        return vol

    def axis_points(self, axis):
        l, h, r = self.lower[axis], self.spacings[axis], self.resolution[axis]
        if self.geometry == "box":
            return l + h * (np.arange(r) + 0.5)
        return l + h * np.arange(r)   # duplicate endpoint excluded

    def points(self):
        """(N, dimension) array of sample points, C-ordered over axes."""
        axes = [self.axis_points(i) for i in range(self.dimension)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def point_env(self, t):
        return ex.point_env(self.points(), t)

    def to_json(self):
        spec = {"dim": self.dimension, "geometry": self.geometry,
                "resolution": list(self.resolution)}
        if self.geometry == "box":
            spec["bounds"] = [list(self.lower), list(self.upper)]
        else:
            spec["periods"] = list(self.upper)
        return spec

    @staticmethod
    def from_json(spec):
        res = spec["resolution"]
        if isinstance(res, int):
            res = [res] * spec["dim"]
        if spec["geometry"] == "box":
            lo, hi = spec["bounds"]
            return Grid.box(lo, hi, tuple(res))
        if spec["geometry"] == "torus":
            return Grid.torus(spec["periods"], tuple(res))
        raise GeometryError(f"unknown geometry {spec['geometry']!r}")


@dataclass(frozen=True)
class Field:
    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        n = int(np.prod(self.grid.resolution))
        if self.values.shape != (n,):
            raise ValueError(f"values must be flat of length {n}")


def sample(expression, grid, t):
    """Evaluate an expression on every grid point at time t."""
    env = grid.point_env(t)
    vals = ex.eval_env(expression, env)
    n = int(np.prod(grid.resolution))
    if np.ndim(vals) == 0:
        vals = np.full(n, float(vals))
    return Field(np.asarray(vals, dtype=float), grid)


def oscillation(f: Field) -> float:
    """max - min over the sampled points; the L_infty size of a normalized field."""
    v = f.values
    return float(v.max() - v.min())


def sup_norm(f: Field) -> float:
    return float(np.abs(f.values).max())


def lp_norm(f: Field, p: float) -> float:
    """(sum |v|^p * cell_volume)^(1/p); a quasinorm for 0 < p < 1."""
    if p <= 0:
        raise ValueError("p must be > 0")
    total = float(np.sum(np.abs(f.values) ** p)) * f.grid.cell_volume
    return total ** (1.0 / p)


def mean(f: Field) -> float:
    return float(f.values.mean())


def mean_zero_normalize(f: Field) -> Field:
    """Subtract the volume-weighted mean; torus grids only."""
    if f.grid.geometry != "torus":
        raise GeometryError("mean-zero normalization is defined on torus grids")
    return Field(f.values - f.values.mean(), f.grid)


def boundary_mask(grid: Grid) -> np.ndarray:
    """Flat boolean mask of the outermost cell layer of a box grid."""
    shape = grid.resolution
    mask = np.zeros(shape, dtype=bool)
    for axis in range(grid.dimension):
        idx_lo = [slice(None)] * grid.dimension
        idx_lo[axis] = 0
        idx_hi = [slice(None)] * grid.dimension
        idx_hi[axis] = shape[axis] - 1
        mask[tuple(idx_lo)] = True
        mask[tuple(idx_hi)] = True
    return mask.ravel()


def check_support_margin(f: Field, rel_tol=1e-9) -> bool:
    """Warn (never fail) when a box field is not numerically supported inside."""
    if f.grid.geometry != "box":
        return True
    osc = oscillation(f)
    if osc == 0.0:
        return True
    edge = np.abs(f.values[boundary_mask(f.grid)]).max()
    if edge >= rel_tol * osc:
        warnings.warn(
            f"field reaches {edge:.3e} on the boundary layer "
            f"(oscillation {osc:.3e}); box may truncate its support",
            SupportMarginWarning, stacklevel=2)
        return False
    return True


# --- CSV interchange: header of coordinate names, then "value" ---

def field_to_csv(f: Field) -> str:
    pts = f.grid.points()
    names = []
    for i in range(f.grid.dimension // 2):
        names += [f"x{i + 1}", f"y{i + 1}"]
    out = io.StringIO()
    out.write(",".join(names + ["value"]) + "\n")
    for row, v in zip(pts, f.values):
        out.write(",".join(repr(float(c)) for c in row) + f",{float(v)!r}\n")
    return out.getvalue()


def field_from_csv(text: str, grid: Grid) -> Field:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    vals = np.array([float(ln.rsplit(",", 1)[1]) for ln in lines[1:]])
    return Field(vals, grid)


def grid_from_file(path) -> Grid:
    with open(path, "r", encoding="utf-8") as fh:
        return Grid.from_json(json.load(fh))
