"""Coarse-length bound for products of disjointly supported paths.

When paths H_1, ..., H_m have pairwise disjoint supports, their sum
generates the composition of the individual flows, and at every time the
oscillation of the sum is at most max_j sup H_j - min_j inf H_j, hence at
most twice the largest individual oscillation. Summing over derivative
orders 0..k gives

    coarse_length_k(sum) <= 2 (k+1) max_j coarse_length_k(H_j),

which this module measures, together with the per-order structure of the
max/min over the family that drives the bound.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

from .. import lengths as ln
from ..hampath import disjoint_product


@dataclass(frozen=True)
class DisjointBoundReport:
    k: int
    product_per_order: tuple
    member_totals: tuple
    product_total: float
    bound: float                  # 2(k+1) * max member total
    ratio: float

    def ok(self, tol=1e-9):
        return self.product_total <= self.bound * (1.0 + tol) + tol

    def to_json(self):
        return {"k": self.k, "product_per_order": list(self.product_per_order),
                "member_totals": list(self.member_totals),
                "product_total": self.product_total, "bound": self.bound,
                "ratio": self.ratio, "ok": self.ok()}

    def to_csv(self):
        out = io.StringIO()
        out.write("quantity,value\n")
        out.write(f"product_total,{self.product_total!r}\n")
        for j, v in enumerate(self.member_totals):
            out.write(f"member_{j},{v!r}\n")
        out.write(f"bound,{self.bound!r}\nratio,{self.ratio!r}\n")
        return out.getvalue()


def disjoint_bound_check(paths, boxes, k: int, grid=None,
                         time_samples: int = 65) -> DisjointBoundReport:
    """Validate supports, form the product path, and measure the bound."""
    grid = grid or paths[0].domain
    product = disjoint_product(paths, boxes=boxes, grid=grid)
    prod_rep = ln.coarse_length_k(product, k, grid, time_samples)
    member_totals = tuple(
        ln.coarse_length_k(f, k, grid, time_samples).total for f in paths)
    bound = 2.0 * (k + 1) * max(member_totals)
    ratio = prod_rep.total / bound if bound > 0 else 0.0
    return DisjointBoundReport(k, prod_rep.per_order, member_totals,
                               prod_rep.total, bound, ratio)
