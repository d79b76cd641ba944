"""Quasinorm-to-norm snowflake transform on finite groups.

Given a weight psi >= 0 on a finite group with psi(a*b) <= C(psi(a)+psi(b)),
set alpha = 1/(1 + log2 C). The transformed weight

    psi_sharp(a) = inf over factorizations a = a_1 * ... * a_N of
                   (sum psi(a_i)^alpha)^(1/alpha)

has a subadditive alpha-th power, stays within [(2C)^-2 psi, psi], keeps
psi's zero set, and inherits symmetry and conjugate invariance.

On a finite group the infimum is a shortest-path distance in the complete
Cayley graph whose step costs are psi(s)^alpha; ``sharp`` computes it with
Dijkstra and ``brute_force_sharp`` re-derives it by exhaustive word
enumeration (dynamic programming over word length, which enumerates every
word cost implicitly and exactly). An optimal word never revisits a prefix
product, so words of length |G| - 1 suffice on a group of order |G|.
"""

from __future__ import annotations

import heapq
import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, InputNotQuasiSubadditive, QuasiTriangleViolated

ENUMERATION_BUDGET = 10 ** 7


@dataclass(frozen=True)
class WeightedGroup:
    order: int
    table: np.ndarray              # table[a, b] = index of a*b
    identity: int
    inverse: np.ndarray
    weights: np.ndarray            # psi >= 0, +inf allowed
    norm_mode: bool = False        # require psi(identity) = 0

    def __post_init__(self):
        table = np.asarray(self.table, dtype=int)
        inv = np.asarray(self.inverse, dtype=int)
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "inverse", inv)
        object.__setattr__(self, "weights", w)
        n = self.order
        if table.shape != (n, n) or inv.shape != (n,) or w.shape != (n,):
            raise ValueError("table/inverse/weights sizes do not match the order")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if n <= 64:
            self._validate_group()
        if self.norm_mode and w[self.identity] != 0.0:
            raise ValueError("norm mode requires zero weight at the identity")

    def _validate_group(self):
        n, e, T = self.order, self.identity, self.table
        if not (np.array_equal(T[e, :], np.arange(n)) and
                np.array_equal(T[:, e], np.arange(n))):
            raise ValueError("identity row/column malformed")
        if np.any(T[np.arange(n), self.inverse] != e) or \
                np.any(T[self.inverse, np.arange(n)] != e):
            raise ValueError("inverse table malformed")
        # associativity: T[T[a,b], c] == T[a, T[b,c]] for all triples
        if not np.array_equal(T[T, :], T[:, T]):
            raise ValueError("multiplication table is not associative")

    def with_weights(self, weights, norm_mode=None):
        return WeightedGroup(self.order, self.table, self.identity, self.inverse,
                             np.asarray(weights, dtype=float),
                             self.norm_mode if norm_mode is None else norm_mode)

    def conjugacy_classes(self):
        n, T, inv = self.order, self.table, self.inverse
        seen = np.zeros(n, dtype=bool)
        classes = []
        for a in range(n):
            if seen[a]:
                continue
            orbit = sorted({int(T[T[b, a], inv[b]]) for b in range(n)})
            for x in orbit:
                seen[x] = True
            classes.append(tuple(orbit))
        return classes

    def to_json(self):
        return {"order": self.order, "table": self.table.tolist(),
                "identity": self.identity, "inverse": self.inverse.tolist(),
                "weights": ["inf" if math.isinf(v) else v for v in self.weights]}

    @staticmethod
    def from_json(spec):
        w = [float("inf") if v == "inf" else float(v) for v in spec["weights"]]
        return WeightedGroup(int(spec["order"]), np.array(spec["table"]),
                             int(spec.get("identity", 0)), np.array(spec["inverse"]),
                             np.array(w))


@dataclass(frozen=True)
class SharpResult:
    C: float
    alpha: float
    psi_sharp: np.ndarray
    witnesses: tuple               # per element, an optimal factorization word

    def __post_init__(self):
        if np.any(self.psi_sharp < 0):
            raise ValueError("transformed weights must be nonnegative")


def quasi_constant(g: WeightedGroup) -> float:
    """Smallest C >= 1 with psi(a*b) <= C(psi(a)+psi(b)); inf when none exists."""
    w = g.weights
    prod_w = w[g.table]
    sums = w[:, None] + w[None, :]
    finite = np.isfinite(prod_w) & (sums > 0) & np.isfinite(sums)
    C = 1.0
    if finite.any():
        C = max(C, float((prod_w[finite] / sums[finite]).max()))
    impossible = (prod_w > 0) & (sums == 0)
    impossible |= np.isinf(prod_w) & np.isfinite(sums)
    if impossible.any():
        return float("inf")
    return C


def generic_alpha(C: float) -> float:
    return 1.0 / (1.0 + math.log2(C))


def _dijkstra(g: WeightedGroup, costs):
    """Shortest word-cost from the identity under right multiplication."""
    n, T, e = g.order, g.table, g.identity
    dist = np.full(n, np.inf)
    dist[e] = 0.0
    pred = [None] * n
    heap = [(0.0, e)]
    done = np.zeros(n, dtype=bool)
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for s in range(n):
            c = costs[s]
            if not np.isfinite(c):
                continue
            v = int(T[u, s])
            nd = d + c
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = (u, s)
                heapq.heappush(heap, (nd, v))
    return dist, pred


def _witness(pred, v, identity):
    word = []
    while v != identity or word == []:
        if pred[v] is None:
            return tuple()        # unreachable or the identity itself
        v, s = pred[v]
        word.append(s)
    return tuple(reversed(word))


def sharp(g: WeightedGroup, alpha: float = None) -> SharpResult:
    """Snowflake transform computed exactly as a Cayley-graph shortest path.

    The identity needs words of length >= 1, so its value is the cheapest
    closed word: min over b of dist(b) + cost(b^{-1}).
    """
    C = quasi_constant(g)
    if not np.isfinite(C):
        raise InputNotQuasiSubadditive("no finite subadditivity constant exists")
    if alpha is None:
        alpha = generic_alpha(C)
    costs = np.where(np.isfinite(g.weights), g.weights ** alpha, np.inf)
    dist, pred = _dijkstra(g, costs)
    e = g.identity
    # close the loop for the identity element
    back = dist + costs[g.inverse]
    b_star = int(np.argmin(back))
    identity_cost = float(back[b_star])
    values = dist.copy()
    values[e] = identity_cost
    witnesses = []
    for a in range(g.order):
        if a == e:
            witnesses.append(_witness(pred, b_star, e) + (int(g.inverse[b_star]),))
        else:
            witnesses.append(_witness(pred, a, e))
    psi_sharp = np.where(np.isfinite(values), values ** (1.0 / alpha), np.inf)
    return SharpResult(C, alpha, psi_sharp, tuple(witnesses))


def brute_force_sharp(g: WeightedGroup, max_n: int, alpha: float = None) -> np.ndarray:
    """Exact infimum over words of length <= max_n, by enumeration.

    Dynamic programming over word length: best cost of reaching each element
    with exactly N factors, minimized over N. Enumerates the same sums as
    raw product iteration, without the exponential blowup; the budget guard
    keeps the promised work bound explicit.
    """
    if g.order ** max_n > ENUMERATION_BUDGET:
        raise BudgetExceeded(f"{g.order}^{max_n} words exceed the enumeration budget")
    if alpha is None:
        alpha = generic_alpha(quasi_constant(g))
    costs = np.where(np.isfinite(g.weights), g.weights ** alpha, np.inf)
    n = g.order
    best = np.full(n, np.inf)
    layer = np.full(n, np.inf)     # cheapest word of length exactly N
    layer[g.identity] = 0.0
    for _ in range(max_n):
        nxt = np.full(n, np.inf)
        for s in range(n):
            if not np.isfinite(costs[s]):
                continue
            targets = g.table[:, s]
            np.minimum.at(nxt, targets, layer + costs[s])
        layer = nxt
        best = np.minimum(best, layer)
    return np.where(np.isfinite(best), best ** (1.0 / alpha), np.inf)


def raw_word_enumeration(g: WeightedGroup, max_n: int, alpha: float = None) -> np.ndarray:
    """Literal product iteration over all words; tiny groups only."""
    if g.order ** max_n > 10 ** 6:
        raise BudgetExceeded("raw enumeration is reserved for tiny groups")
    if alpha is None:
        alpha = generic_alpha(quasi_constant(g))
    costs = np.where(np.isfinite(g.weights), g.weights ** alpha, np.inf)
    best = np.full(g.order, np.inf)
    for n_fac in range(1, max_n + 1):
        for word in itertools.product(range(g.order), repeat=n_fac):
            prod = word[0]
            cost = costs[word[0]]
            for s in word[1:]:
                prod = int(g.table[prod, s])
                cost += costs[s]
            if cost < best[prod]:
                best[prod] = cost
    return np.where(np.isfinite(best), best ** (1.0 / alpha), np.inf)


def sharp_fixed_exponent(g: WeightedGroup, k: int) -> SharpResult:
    """Snowflake transform with exponent alpha = 1/(k+1).

    Valid for weights obeying the 2^k-relaxed triangle inequality; the
    resulting transform then satisfies 4^-(k+1) * psi <= psi_sharp <= psi.
    """
    C = quasi_constant(g)
    if not (np.isfinite(C) and C <= 2 ** k * (1 + 1e-12)):
        raise QuasiTriangleViolated(
            f"weight has subadditivity constant {C}, above the allowed 2^{k}")
    result = sharp(g, alpha=1.0 / (k + 1))
    lower = 4.0 ** (-(k + 1)) * g.weights
    if np.any(result.psi_sharp < lower - 1e-12) or \
            np.any(result.psi_sharp > g.weights + 1e-12):
        raise QuasiTriangleViolated("sandwich bound failed; input weight inconsistent")
    return result


# --- built-in groups ---

def _table_from_elements(elements, compose):
    index = {el: i for i, el in enumerate(elements)}
    n = len(elements)
    table = np.zeros((n, n), dtype=int)
    for i, a in enumerate(elements):
        for j, b in enumerate(elements):
            table[i, j] = index[compose(a, b)]
    inv = np.zeros(n, dtype=int)
    e = index[elements[0]]
    for i in range(n):
        inv[i] = int(np.where(table[i] == e)[0][0])
    return table, inv, e


def cyclic_group(n, weights=None):
    table = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    inv = (-np.arange(n)) % n
    w = np.zeros(n) if weights is None else np.asarray(weights, dtype=float)
    return WeightedGroup(n, table, 0, inv, w)


def symmetric_group(n, weights=None):
    elements = sorted(itertools.permutations(range(n)))
    elements.remove(tuple(range(n)))
    elements.insert(0, tuple(range(n)))
    compose = lambda a, b: tuple(a[b[i]] for i in range(n))
    table, inv, e = _table_from_elements(elements, compose)
    w = np.zeros(len(elements)) if weights is None else np.asarray(weights, dtype=float)
    return WeightedGroup(len(elements), table, e, inv, w)


def dihedral_group(n, weights=None):
    """Symmetries of the regular n-gon, order 2n, as pairs (rotation, flip)."""
    elements = [(r, f) for f in (0, 1) for r in range(n)]

    def compose(a, b):
        r1, f1 = a
        r2, f2 = b
        # (r1,f1)*(r2,f2): apply b first, then a
        r = (r1 + (r2 if f1 == 0 else -r2)) % n
        return (r, (f1 + f2) % 2)

    table, inv, e = _table_from_elements(elements, compose)
    w = np.zeros(len(elements)) if weights is None else np.asarray(weights, dtype=float)
    return WeightedGroup(len(elements), table, e, inv, w)


def builtin_group(name):
    name = name.strip()
    if name.upper().startswith("Z") and name[1:].isdigit():
        return cyclic_group(int(name[1:]))
    if name.upper() == "S3":
        return symmetric_group(3)
    if name.upper() == "S4":
        return symmetric_group(4)
    if name.upper() == "D4":
        return dihedral_group(4)
    raise ValueError(f"unknown built-in group {name!r}")


def group_from_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        return WeightedGroup.from_json(json.load(fh))
