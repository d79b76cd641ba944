"""Commutator paths built from the splice-reverse-conjugate calculus.

For a path f ending at the map A and a conjugator theta (the time-1 map of
the second path, assumed affine symplectic on the support of f), the spliced
path

    conjugate(reverse(f), theta)  then  f

ends at A * theta * A^{-1} * theta^{-1}: the group commutator. Splicing
multiplies the per-order length terms by 2^i, and conjugation/reversal
preserve them, so the construction's length is bounded by 2^{k+1} times the
length of f, matching the commutator bound the constants ledger tabulates.

When the second map is not affine, the commutator is still certified at
tracer level by integrating the four stages in sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import flow as fl
from .. import lengths as ln
from ..errors import ConjugationUnsupported
from ..hampath import AffineSymplectic, HamiltonianPath, concatenate, conjugate, reverse


def commutator_path(f: HamiltonianPath, theta: AffineSymplectic,
                    check_against: HamiltonianPath = None,
                    check_cloud: fl.TracerCloud = None,
                    check_tol: float = 1e-6) -> HamiltonianPath:
    """Path for the commutator of f's endpoint with the affine map theta.

    With ``check_against`` (a path whose time-1 map should be theta) and a
    cloud, the conjugator is validated by integration before use.
    """
    if not isinstance(theta, AffineSymplectic):
        raise ConjugationUnsupported("conjugator must be an affine symplectic map")
    if check_against is not None and check_cloud is not None:
        fm = fl.integrate(check_against, check_cloud, 256)
        err = float(np.abs(fm.final.points - theta.apply(check_cloud.points)).max())
        if err > check_tol:
            raise ConjugationUnsupported(
                f"declared affine map deviates from the path's flow by {err:.3e}")
    return concatenate(conjugate(reverse(f), theta), f)


@dataclass(frozen=True)
class CommutatorBoundReport:
    k: int
    length_f: float
    length_commutator: float
    bound: float               # 2^{k+1} * length_f

    def ok(self, tol=1e-9):
        return self.length_commutator <= self.bound * (1.0 + tol) + tol

    def to_json(self):
        return {"k": self.k, "length_f": self.length_f,
                "length_commutator": self.length_commutator,
                "bound": self.bound, "ok": self.ok()}


def commutator_bound_report(f: HamiltonianPath, theta: AffineSymplectic, k: int,
                            grid=None, time_samples: int = 10) -> CommutatorBoundReport:
    comm = commutator_path(f, theta)
    lf = ln.length_k(f, k, grid or f.domain, time_samples, check_support=False).total
    lc = ln.length_k(comm, k, grid or f.domain, time_samples, check_support=False).total
    return CommutatorBoundReport(k, lf, lc, 2.0 ** (k + 1) * lf)


def commutator_tracer_flow(f: HamiltonianPath, g: HamiltonianPath,
                           cloud: fl.TracerCloud, steps: int = 256,
                           tol: float = None) -> fl.FlowMap:
    """Tracer images under the commutator of the two time-1 maps.

    Integrates the stages in composition order: reverse(g), reverse(f),
    then g, then f, so the final positions realize f g f^{-1} g^{-1} applied
    to the initial points. Cutoff-built Hamiltonians have steep local
    gradients; pass ``tol`` to let each stage refine its step count.
    """
    stages = [reverse(g), reverse(f), g, f]
    pts = cloud
    for stage in stages:
        pts = fl.integrate(stage, pts, steps, tol=tol).final
    return fl.FlowMap(cloud, pts, "commutator", {"steps_per_stage": steps})
