"""Degenerating family of shell-supported Hamiltonians.

For a sharpness parameter m, the Hamiltonian equals 2*x1 times a plateau
cutoff of the distance to the unit sphere centered at the moving point
(0, 2t), with the cutoff collapsing at rate 1/m:

    H_m(x, y, t) = 2 x1 * step(m*(r - 1), 1/4, 3/4),
    r = sqrt(x1^2 + (y1 - 2t)^2)            (planar case).

The time-1 flow displaces the unit disc for every m, while the spatial L_p
size of the i-th time derivative scales like m^{(i*p - 1)/p}: the p-power
picks up m^{i*p} from differentiating the cutoff and a shell volume ~ 2/m.
For i*p < 1 that decays, which is the degeneracy mechanism this module
measures. A closed-domain variant adds a mirrored negated copy on a
disjoint shell so the family stays mean-zero.

Spatial integrals use polar quadrature around the moving center: radial
Gauss-Legendre panels no wider than 1/(8m) resolve the shell, uniform
angular samples handle the smooth periodic direction.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .. import expr as ex
from ..errors import ShellUnresolved
from ..grid import Grid
from ..hampath import HamiltonianPath, autonomous_path

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)


@dataclass(frozen=True)
class ShellFamilySpec:
    m: int
    closed_mode: bool = False
    mirror_offset: float = 8.0      # x1 distance to the mirrored copy
    inner: float = 0.25
    outer: float = 0.75

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")

    @property
    def shell_bounds(self):
        return (1.0 - self.outer / self.m, 1.0 + self.outer / self.m)

    def hamiltonian(self) -> ex.Expression:
        x1, y1, t = ex.Var("x1"), ex.Var("y1"), ex.Var("t")
        r = ex.call("sqrt", x1 ** 2 + (y1 - 2.0 * t) ** 2)
        h = 2.0 * x1 * ex.step(float(self.m) * (r - 1.0), self.inner, self.outer)
        if self.closed_mode:
            shifted = ex.substitute(h, {"x1": ex.sub(x1, ex.const(self.mirror_offset))})
            h = ex.sub(h, shifted)
        return h

    def path(self, grid: Grid = None) -> HamiltonianPath:
        if grid is None:
            hi = 2.0 + self.mirror_offset if self.closed_mode else 2.0
            grid = Grid.box([-2.0, -2.0], [hi, 4.0], (32, 32))
        return autonomous_path(self.hamiltonian(), 2, grid)


def _radial_rule(spec: ShellFamilySpec, panels: int):
    lo, hi = spec.shell_bounds
    width = (hi - lo) / panels
    if width > 1.0 / (8.0 * spec.m) + 1e-15:
        raise ShellUnresolved(
            f"radial panel width {width:.3g} exceeds 1/(8m) = {1.0 / (8 * spec.m):.3g}")
    edges = np.linspace(lo, hi, panels + 1)
    nodes, weights = [], []
    for a, b in zip(edges, edges[1:]):
        half = 0.5 * (b - a)
        nodes.append(0.5 * (a + b) + half * _GL_NODES)
        weights.append(half * _GL_WEIGHTS)
    return np.concatenate(nodes), np.concatenate(weights)


def shell_lp_norm(spec: ShellFamilySpec, derivative: ex.Expression, p: float,
                  t: float, radial_panels: int = 16, theta_samples: int = 256) -> float:
    """L_p norm of a shell-supported expression at time t, by polar quadrature."""
    rho, w_rho = _radial_rule(spec, radial_panels)
    theta = np.linspace(0.0, 2.0 * np.pi, theta_samples, endpoint=False)
    w_theta = 2.0 * np.pi / theta_samples
    centers_x = [0.0] + ([spec.mirror_offset] if spec.closed_mode else [])
    total = 0.0
    for cx in centers_x:
        R, TH = np.meshgrid(rho, theta, indexing="ij")
        X = cx + R * np.cos(TH)
        Y = 2.0 * t + R * np.sin(TH)
        env = {"x1": X.ravel(), "y1": Y.ravel(), "t": float(t)}
        vals = ex.eval_env(derivative, env)
        if np.ndim(vals) == 0:
            vals = np.full(X.size, float(vals))
        integrand = (np.abs(vals) ** p).reshape(R.shape) * R
        total += float(np.einsum("r,rt->", w_rho, integrand)) * w_theta
    return total ** (1.0 / p)


@dataclass(frozen=True)
class ShellDecayReport:
    m_values: tuple
    p: float
    k: int
    max_norms: dict          # order -> tuple of max-over-t norms per m
    integrals: dict          # order -> tuple of time integrals per m
    totals: tuple            # full (k,p)-length of the path per m
    slopes: dict             # order -> fitted log-log slope of max_norms
    expected_slopes: dict    # order -> (i*p - 1)/p

    def to_csv(self):
        out = io.StringIO()
        orders = sorted(self.max_norms)
        out.write("m," + ",".join(f"max_norm_i{i},integral_i{i}" for i in orders)
                  + ",total_kp\n")
        for j, m in enumerate(self.m_values):
            cells = []
            for i in orders:
                cells += [repr(float(self.max_norms[i][j])), repr(float(self.integrals[i][j]))]
            out.write(f"{m}," + ",".join(cells) + f",{self.totals[j]!r}\n")
        return out.getvalue()

    def to_dat(self):
        """log-log columns for plotting: log m then log max-norm per order."""
        out = io.StringIO()
        orders = sorted(self.max_norms)
        out.write("# log_m " + " ".join(f"log_norm_i{i}" for i in orders) + "\n")
        for j, m in enumerate(self.m_values):
            row = [np.log(m)] + [np.log(self.max_norms[i][j]) for i in orders]
            out.write(" ".join(repr(float(v)) for v in row) + "\n")
        return out.getvalue()

    def to_json(self):
        return {"m_values": list(self.m_values), "p": self.p, "k": self.k,
                "max_norms": {str(i): list(v) for i, v in self.max_norms.items()},
                "integrals": {str(i): list(v) for i, v in self.integrals.items()},
                "totals": list(self.totals),
                "slopes": {str(i): v for i, v in self.slopes.items()},
                "expected_slopes": {str(i): v for i, v in self.expected_slopes.items()}}


def shell_decay_report(m_values, k: int, p: float, orders=None,
                       closed_mode: bool = False, t_samples=(0.25, 0.5, 0.75),
                       time_integral_nodes: int = 10, radial_panels: int = 16,
                       theta_samples: int = 256) -> ShellDecayReport:
    """Decay table and fitted log-log slopes for the shell family.

    For each m and derivative order i <= k, tabulates the max over sampled t
    of the spatial L_p norm and its time integral; fits the slope of the max
    norm against m; the full (k,p)-length of the path is the sum of the
    per-order time integrals.
    """
    if p <= 0:
        raise ValueError("p must be > 0")
    orders = list(range(k + 1)) if orders is None else sorted(orders)
    m_values = tuple(int(m) for m in m_values)
    max_norms = {i: [] for i in orders}
    integrals = {i: [] for i in orders}
    totals = []
    gl_t, gl_w = np.polynomial.legendre.leggauss(time_integral_nodes)
    t_nodes = 0.5 + 0.5 * gl_t
    t_weights = 0.5 * gl_w
    for m in m_values:
        spec = ShellFamilySpec(m, closed_mode=closed_mode)
        h = spec.hamiltonian()
        derivs = [h]
        for _ in range(max(orders)):
            derivs.append(ex.diff(derivs[-1], "t"))
        total = 0.0
        for i in orders:
            norm_at = lambda t: shell_lp_norm(spec, derivs[i], p, t,
                                              radial_panels, theta_samples)
            max_norms[i].append(max(norm_at(t) for t in t_samples))
            integral = float(sum(w * norm_at(t) for t, w in zip(t_nodes, t_weights)))
            integrals[i].append(integral)
            total += integral
        totals.append(total)
    slopes = {}
    expected = {}
    logs_m = np.log(np.array(m_values, dtype=float))
    for i in orders:
        logs_v = np.log(np.array(max_norms[i]))
        dm = logs_m - logs_m.mean()
        slopes[i] = float(np.dot(dm, logs_v - logs_v.mean()) / np.dot(dm, dm))
        expected[i] = (i * p - 1.0) / p
    return ShellDecayReport(m_values, p, k,
                            {i: tuple(v) for i, v in max_norms.items()},
                            {i: tuple(v) for i, v in integrals.items()},
                            tuple(totals), slopes, expected)
