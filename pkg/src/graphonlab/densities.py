"""Homomorphism-density calculus: t, t_inj, t_ind, conversions, embeddings.

Exact values are arbitrary-precision rationals (fractions.Fraction); the
inclusion-exclusion identities and multiplicativity over disjoint unions
hold exactly, not approximately. Floats appear only in Monte Carlo
estimates and at the CLI boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, NamedTuple, Sequence, Union

import numpy as np

from .errors import CapacityError, InputError, InvariantError
from .graphs import (
    GraphEnumeration,
    LabelledGraph,
    UnlabelledGraph,
    disjoint_union,
    pair_order,
)

PATTERN_CAP = 8

GraphLike = Union[LabelledGraph, UnlabelledGraph]


def _as_labelled(f: GraphLike) -> LabelledGraph:
    return f.canon if isinstance(f, UnlabelledGraph) else f


def _check_pattern(f: LabelledGraph) -> None:
    if f.n > PATTERN_CAP:
        raise CapacityError(f"pattern capped at {PATTERN_CAP} vertices, got {f.n}")


def falling(n: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= n - i
    return out


def _search_order(rows: Sequence[int]) -> list[int]:
    """Order pattern vertices so each one touches as many predecessors as
    possible; keeps the backtracking candidate sets tight."""
    n = len(rows)
    order: list[int] = []
    chosen = 0
    for _ in range(n):
        best = max(
            (v for v in range(n) if not chosen >> v & 1),
            key=lambda v: ((rows[v] & chosen).bit_count(), rows[v].bit_count(), -v),
        )
        order.append(best)
        chosen |= 1 << best
    return order


def _count_maps(f: LabelledGraph, g: LabelledGraph, injective: bool, induced: bool) -> int:
    """Count maps [k]->[v(g)] preserving f's edges; optionally injective,
    optionally also reflecting non-edges (induced)."""
    k, n = f.n, g.n
    full = (1 << n) - 1
    order = _search_order(f.rows)
    adj_pred = [[(e, bool(f.rows[order[d]] >> order[e] & 1)) for e in range(d)] for d in range(k)]
    grows = g.rows
    assigned = [0] * k

    def rec(d: int, used: int) -> int:
        cand = full
        for e, adjacent in adj_pred[d]:
            if adjacent:
                cand &= grows[assigned[e]]
            elif induced:
                cand &= full ^ grows[assigned[e]]
        if injective:
            cand &= full ^ used
        if d == k - 1:
            return cand.bit_count()
        total = 0
        while cand:
            low = cand & -cand
            cand ^= low
            assigned[d] = low.bit_length() - 1
            total += rec(d + 1, used | low)
        return total

    return rec(0, 0)


def hom_count(f: GraphLike, g: LabelledGraph) -> int:
    f = _as_labelled(f)
    _check_pattern(f)
    return _count_maps(f, g, injective=False, induced=False)


def inj_count(f: GraphLike, g: LabelledGraph) -> int:
    f = _as_labelled(f)
    _check_pattern(f)
    if f.n > g.n:
        return 0
    return _count_maps(f, g, injective=True, induced=False)


def ind_count(f: GraphLike, g: LabelledGraph) -> int:
    f = _as_labelled(f)
    _check_pattern(f)
    if f.n > g.n:
        return 0
    return _count_maps(f, g, injective=True, induced=True)


def t(f: GraphLike, g: LabelledGraph) -> Fraction:
    """Probability that a uniform map V(f)->V(g) is a homomorphism."""
    f = _as_labelled(f)
    _check_pattern(f)
    return Fraction(_count_maps(f, g, False, False), g.n ** f.n)


def t_inj(f: GraphLike, g: LabelledGraph) -> Fraction:
    """Containment probability over a uniform sequence of distinct vertices;
    0 by convention when v(f) > v(g)."""
    f = _as_labelled(f)
    _check_pattern(f)
    if f.n > g.n:
        return Fraction(0)
    return Fraction(_count_maps(f, g, True, False), falling(g.n, f.n))


def t_ind(f: GraphLike, g: LabelledGraph) -> Fraction:
    """Probability that distinct sampled vertices induce exactly f;
    0 by convention when v(f) > v(g)."""
    f = _as_labelled(f)
    _check_pattern(f)
    if f.n > g.n:
        return Fraction(0)
    return Fraction(_count_maps(f, g, True, True), falling(g.n, f.n))


def supergraphs(f: LabelledGraph) -> list[LabelledGraph]:
    """All labelled graphs on f's vertex set whose edge set contains f's."""
    missing = [(u, v) for u, v in ((i + 1, j + 1) for i, j in pair_order(f.n)) if not f.has_edge(u, v)]
    base = f.edges()
    out = []
    for mask in range(1 << len(missing)):
        extra = [missing[i] for i in range(len(missing)) if mask >> i & 1]
        out.append(LabelledGraph.from_edges(f.n, base + extra))
    return out


def inj_from_ind(f: LabelledGraph, ind_table: Mapping[LabelledGraph, Fraction]) -> Fraction:
    """Containment density as the sum of induced densities over supergraphs."""
    total = Fraction(0)
    for sup in supergraphs(f):
        if sup not in ind_table:
            raise InputError(f"table missing supergraph with edges {sup.edges()}")
        total += ind_table[sup]
    return total


def ind_from_inj(f: LabelledGraph, inj_table: Mapping[LabelledGraph, Fraction]) -> Fraction:
    """Induced density by inclusion-exclusion over supergraph containment."""
    total = Fraction(0)
    e0 = f.num_edges
    for sup in supergraphs(f):
        if sup not in inj_table:
            raise InputError(f"table missing supergraph with edges {sup.edges()}")
        total += (-1) ** (sup.num_edges - e0) * inj_table[sup]
    return total


@dataclass(frozen=True)
class BoundCheck:
    gap: Fraction
    bound: Fraction
    ok: bool


def sampling_bound_check(f: GraphLike, g: LabelledGraph) -> BoundCheck:
    """|t - t_inj| against the repeated-vertex bound v(f)^2 / (2 v(g))."""
    f = _as_labelled(f)
    gap = abs(t(f, g) - t_inj(f, g))
    bound = Fraction(f.n ** 2, 2 * g.n)
    return BoundCheck(gap, bound, gap <= bound)


def disjoint_union_density(parts: Sequence[GraphLike], g: LabelledGraph) -> Fraction:
    """t of the disjoint union of parts; asserts multiplicativity en route."""
    labelled = [_as_labelled(p) for p in parts]
    whole = t(disjoint_union(labelled), g)
    product = math.prod((t(p, g) for p in labelled), start=Fraction(1))
    if whole != product:
        raise InvariantError(
            f"disjoint-union density {whole} != product of part densities {product}"
        )
    return whole


def hoeffding_halfwidth(samples: int, alpha: float = 0.01) -> float:
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * samples))


@dataclass(frozen=True)
class DensityEstimate:
    point: float
    samples: int
    confidence_halfwidth: float
    alpha: float = 0.01

    def covers(self, exact: Fraction | float) -> bool:
        return abs(self.point - float(exact)) <= self.confidence_halfwidth


def _adjacency_matrix(g: LabelledGraph) -> np.ndarray:
    a = np.zeros((g.n, g.n), dtype=bool)
    for u, v in g.edges():
        a[u - 1, v - 1] = True
        a[v - 1, u - 1] = True
    return a


def mc_containment_hits(f: GraphLike, g: LabelledGraph, count: int, rng: np.random.Generator) -> int:
    """Number of uniform with-replacement k-samples whose pattern contains f."""
    f = _as_labelled(f)
    a = _adjacency_matrix(g)
    draws = rng.integers(0, g.n, size=(count, f.n))
    ok = np.ones(count, dtype=bool)
    for u, v in f.edges():
        vi, vj = draws[:, u - 1], draws[:, v - 1]
        ok &= (vi != vj) & a[vi, vj]
    return int(ok.sum())


def mc_t(
    f: GraphLike,
    g: LabelledGraph,
    samples: int,
    rng: np.random.Generator,
    alpha: float = 0.01,
) -> DensityEstimate:
    """Unbiased Monte Carlo estimate of t with a Hoeffding interval."""
    if samples < 1:
        raise InputError("samples must be >= 1")
    hits = mc_containment_hits(f, g, samples, rng)
    return DensityEstimate(hits / samples, samples, hoeffding_halfwidth(samples, alpha), alpha)


@dataclass(frozen=True)
class DensityVector:
    """t(F, .) over a finite enumeration, aligned with enumeration.graphs."""

    enumeration: GraphEnumeration
    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.values) != len(self.enumeration.graphs):
            raise InputError("value count does not match enumeration length")
        if any(v < 0 or v > 1 for v in self.values):
            raise InputError("density values must lie in [0,1]")


class TauPlus(NamedTuple):
    vector: DensityVector
    inv_size: Fraction


def tau_vector(g: LabelledGraph, enumeration: GraphEnumeration) -> DensityVector:
    return DensityVector(enumeration, tuple(t(f, g) for f in enumeration.graphs))


def tau_plus(g: LabelledGraph, enumeration: GraphEnumeration) -> TauPlus:
    """Density vector plus 1/v(g); the pair separates non-isomorphic graphs."""
    return TauPlus(tau_vector(g, enumeration), Fraction(1, g.n))


def metric_d(x: DensityVector | TauPlus, y: DensityVector | TauPlus) -> Fraction:
    """Weighted l1 distance sum_i 2^-(i+1) |x_i - y_i| over the enumeration.

    For TauPlus arguments the 1/v coordinate enters with weight 1 (it is
    the extra point of the augmented index set). Truncation error of the
    infinite sum is below the smallest included weight.
    """
    if isinstance(x, TauPlus) != isinstance(y, TauPlus):
        raise InputError("cannot mix plain density vectors with augmented ones")
    inv_term = Fraction(0)
    if isinstance(x, TauPlus):
        inv_term = abs(x.inv_size - y.inv_size)
        x, y = x.vector, y.vector
    if x.enumeration.max_n != y.enumeration.max_n:
        raise InputError("density vectors use different enumerations")
    total = inv_term
    for i, (a, b) in enumerate(zip(x.values, y.values)):
        total += x.enumeration.weight(i) * abs(a - b)
    return total
