"""Bipartite graphs with an explicit bipartition and nonsymmetric kernels.

Patterns carry their own bipartition; maps respect parts. Sampling uses
independent latent sequences for the two sides, so nothing here assumes
kernel symmetry.
"""
from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .densities import BoundCheck, falling
from .errors import CapacityError, InputError
from .exact import Number, format_number, to_fraction
from .graphon import TERM_CAP, _normalized_measures

BIP_PATTERN_CAP = 6
BIP_CANON_CAP = 6


@dataclass(frozen=True)
class BipartiteGraph:
    """Vertex sets [n1] and [n2]; edges only across parts, as bitmask rows."""

    n1: int
    n2: int
    rows: tuple[int, ...]

    @classmethod
    def from_edges(cls, n1: int, n2: int, edges: Iterable[tuple[int, int]]) -> "BipartiteGraph":
        if n1 < 1 or n2 < 1:
            raise InputError("both parts need at least one vertex")
        rows = [0] * n1
        seen = set()
        for u, v in edges:
            if not (1 <= u <= n1 and 1 <= v <= n2):
                raise InputError(f"edge ({u},{v}) out of range for parts {n1},{n2}")
            if (u, v) in seen:
                raise InputError(f"duplicate edge ({u},{v})")
            seen.add((u, v))
            rows[u - 1] |= 1 << (v - 1)
        return cls(n1, n2, tuple(rows))

    @classmethod
    def complete(cls, n1: int, n2: int) -> "BipartiteGraph":
        return cls(n1, n2, tuple((1 << n2) - 1 for _ in range(n1)))

    @classmethod
    def empty(cls, n1: int, n2: int) -> "BipartiteGraph":
        return cls(n1, n2, tuple(0 for _ in range(n1)))

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u - 1] >> (v - 1) & 1)

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for i in range(self.n1):
            r = self.rows[i]
            j = 0
            while r:
                if r & 1:
                    out.append((i + 1, j + 1))
                r >>= 1
                j += 1
        return out

    @property
    def num_edges(self) -> int:
        return sum(r.bit_count() for r in self.rows)

    def to_text(self) -> str:
        edges = self.edges()
        lines = [f"{self.n1} {self.n2} {len(edges)}"]
        lines += [f"{u} {v}" for u, v in edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BipartiteGraph":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise InputError("empty bipartite graph file")
        head = lines[0].split()
        if len(head) != 3:
            raise InputError(f"expected 'n1 n2 m' header, got {lines[0]!r}")
        n1, n2, m = (int(x) for x in head)
        if len(lines) - 1 != m:
            raise InputError(f"header declares {m} edges, file has {len(lines) - 1}")
        edges = []
        for ln in lines[1:]:
            parts = ln.split()
            if len(parts) != 2:
                raise InputError(f"bad edge line {ln!r}")
            edges.append((int(parts[0]), int(parts[1])))
        return cls.from_edges(n1, n2, edges)


def bip_canonical_rows(g: BipartiteGraph) -> tuple[int, ...]:
    """Minimum row tuple over independent row and column permutations;
    equal exactly for graphs isomorphic as bipartite graphs."""
    if g.n1 > BIP_CANON_CAP or g.n2 > BIP_CANON_CAP:
        raise CapacityError(f"bipartite canonical form capped at {BIP_CANON_CAP} per part")
    best: tuple[int, ...] | None = None
    for cperm in itertools.permutations(range(g.n2)):
        remapped = []
        for r in g.rows:
            bits = 0
            for new_j, old_j in enumerate(cperm):
                bits |= (r >> old_j & 1) << new_j
            remapped.append(bits)
        remapped.sort()
        cand = tuple(remapped)
        if best is None or cand < best:
            best = cand
    return best


def _check_bip_pattern(f: BipartiteGraph) -> None:
    if f.n1 > BIP_PATTERN_CAP or f.n2 > BIP_PATTERN_CAP:
        raise CapacityError(f"bipartite pattern capped at {BIP_PATTERN_CAP} per part")


def _count_bip_maps(f: BipartiteGraph, g: BipartiteGraph, injective: bool, induced: bool) -> int:
    """Part-respecting maps preserving f's edges (optionally injective per
    part, optionally reflecting non-edges)."""
    full1 = (1 << g.n1) - 1
    full2 = (1 << g.n2) - 1
    assign1 = [0] * f.n1

    def rec_side2(d: int, used2: int) -> int:
        # map side-2 vertices one by one given a completed side-1 assignment
        cand = full2
        for i in range(f.n1):
            if f.rows[i] >> d & 1:
                cand &= g.rows[assign1[i]]
            elif induced:
                cand &= full2 ^ g.rows[assign1[i]]
        if injective:
            cand &= full2 ^ used2
        if d == f.n2 - 1:
            return cand.bit_count()
        total = 0
        while cand:
            low = cand & -cand
            cand ^= low
            total += rec_side2(d + 1, used2 | low)
        return total

    def rec_side1(d: int, used1: int) -> int:
        if d == f.n1:
            return rec_side2(0, 0)
        cand = full1 ^ used1 if injective else full1
        total = 0
        while cand:
            low = cand & -cand
            cand ^= low
            assign1[d] = low.bit_length() - 1
            total += rec_side1(d + 1, used1 | low)
        return total

    return rec_side1(0, 0)


def bip_t(f: BipartiteGraph, g: BipartiteGraph) -> Fraction:
    """Density over part-respecting maps drawn uniformly with replacement."""
    _check_bip_pattern(f)
    return Fraction(_count_bip_maps(f, g, False, False), g.n1**f.n1 * g.n2**f.n2)


def bip_t_inj(f: BipartiteGraph, g: BipartiteGraph) -> Fraction:
    """Containment density over distinct vertices per part; 0 when a part
    of f outnumbers the matching part of g."""
    _check_bip_pattern(f)
    if f.n1 > g.n1 or f.n2 > g.n2:
        return Fraction(0)
    return Fraction(_count_bip_maps(f, g, True, False), falling(g.n1, f.n1) * falling(g.n2, f.n2))


def bip_t_ind(f: BipartiteGraph, g: BipartiteGraph) -> Fraction:
    """Probability the sampled distinct vertices induce exactly f."""
    _check_bip_pattern(f)
    if f.n1 > g.n1 or f.n2 > g.n2:
        return Fraction(0)
    return Fraction(_count_bip_maps(f, g, True, True), falling(g.n1, f.n1) * falling(g.n2, f.n2))


def bip_sampling_bound_check(f: BipartiteGraph, g: BipartiteGraph) -> BoundCheck:
    """|t - t_inj| against the two-part repeated-vertex bound."""
    gap = abs(bip_t(f, g) - bip_t_inj(f, g))
    bound = Fraction(f.n1**2, 2 * g.n1) + Fraction(f.n2**2, 2 * g.n2)
    return BoundCheck(gap, bound, gap <= bound)


@dataclass(frozen=True)
class BipartiteKernel:
    """Step kernel on [0,1]^2 with independent block structures per side;
    no symmetry requirement."""

    mu1: tuple[Fraction, ...]
    mu2: tuple[Fraction, ...]
    w: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        mu1 = _normalized_measures(self.mu1)
        mu2 = _normalized_measures(self.mu2)
        w = tuple(tuple(to_fraction(x) for x in row) for row in self.w)
        if len(w) != len(mu1) or any(len(row) != len(mu2) for row in w):
            raise InputError(f"value matrix must be {len(mu1)}x{len(mu2)}")
        if any(not 0 <= x <= 1 for row in w for x in row):
            raise InputError("kernel values must lie in [0,1]")
        object.__setattr__(self, "mu1", mu1)
        object.__setattr__(self, "mu2", mu2)
        object.__setattr__(self, "w", w)

    @property
    def m1(self) -> int:
        return len(self.mu1)

    @property
    def m2(self) -> int:
        return len(self.mu2)

    @classmethod
    def constant(cls, p: Number) -> "BipartiteKernel":
        return cls((Fraction(1),), (Fraction(1),), ((to_fraction(p),),))

    def to_text(self) -> str:
        lines = [f"{self.m1} {self.m2}"]
        lines.append(" ".join(format_number(x) for x in self.mu1))
        lines.append(" ".join(format_number(x) for x in self.mu2))
        lines += [" ".join(format_number(x) for x in row) for row in self.w]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BipartiteKernel":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if len(lines) < 3:
            raise InputError("bipartite kernel file too short")
        head = lines[0].split()
        if len(head) != 2:
            raise InputError(f"expected 'm1 m2' header, got {lines[0]!r}")
        m1, m2 = int(head[0]), int(head[1])
        if len(lines) != 3 + m1:
            raise InputError(f"expected {m1} matrix rows, got {len(lines) - 3}")
        mu1 = tuple(to_fraction(tok) for tok in lines[1].split())
        mu2 = tuple(to_fraction(tok) for tok in lines[2].split())
        if len(mu1) != m1 or len(mu2) != m2:
            raise InputError("measure line lengths do not match the header")
        w = []
        for ln in lines[3:]:
            row = tuple(to_fraction(tok) for tok in ln.split())
            if len(row) != m2:
                raise InputError(f"matrix row {ln!r} has wrong length")
            w.append(row)
        return cls(mu1, mu2, tuple(w))


def bip_graph_as_kernel(g: BipartiteGraph) -> BipartiteKernel:
    """Adjacency kernel of a bipartite graph: uniform measures per side,
    0/1 values; reproduces bip_t(F, g) exactly for every pattern."""
    mu1 = tuple(Fraction(1, g.n1) for _ in range(g.n1))
    mu2 = tuple(Fraction(1, g.n2) for _ in range(g.n2))
    w = tuple(
        tuple(Fraction(1 if g.rows[i] >> j & 1 else 0) for j in range(g.n2)) for i in range(g.n1)
    )
    return BipartiteKernel(mu1, mu2, w)


def bip_exact_density(f: BipartiteGraph, w: BipartiteKernel) -> Fraction:
    """Exact block-assignment sum for the bipartite density integral."""
    _check_bip_pattern(f)
    if w.m1**f.n1 * w.m2**f.n2 > TERM_CAP:
        raise CapacityError("assignment terms exceed cap")
    total = Fraction(0)
    for z1 in itertools.product(range(w.m1), repeat=f.n1):
        mass1 = math.prod((w.mu1[b] for b in z1), start=Fraction(1))
        if not mass1:
            continue
        for z2 in itertools.product(range(w.m2), repeat=f.n2):
            weight = mass1 * math.prod((w.mu2[b] for b in z2), start=Fraction(1))
            for u, v in f.edges():
                weight *= w.w[z1[u - 1]][z2[v - 1]]
                if not weight:
                    break
            total += weight
    return total


def bip_exact_ind_density(f: BipartiteGraph, w: BipartiteKernel) -> Fraction:
    """Exact probability that the sampled prefix equals f: kernel value per
    edge, complement per non-edge."""
    _check_bip_pattern(f)
    if w.m1**f.n1 * w.m2**f.n2 > TERM_CAP:
        raise CapacityError("assignment terms exceed cap")
    total = Fraction(0)
    for z1 in itertools.product(range(w.m1), repeat=f.n1):
        mass1 = math.prod((w.mu1[b] for b in z1), start=Fraction(1))
        for z2 in itertools.product(range(w.m2), repeat=f.n2):
            weight = mass1 * math.prod((w.mu2[b] for b in z2), start=Fraction(1))
            for u in range(1, f.n1 + 1):
                for v in range(1, f.n2 + 1):
                    p = w.w[z1[u - 1]][z2[v - 1]]
                    weight *= p if f.has_edge(u, v) else 1 - p
                    if not weight:
                        break
                if not weight:
                    break
            total += weight
    return total


def sample_bip_w_random(
    w: BipartiteKernel, n1: int, n2: int, rng: np.random.Generator
) -> BipartiteGraph:
    """G(n1, n2, W): independent latent labels per side, then independent
    edges with the kernel's probabilities."""
    if n1 < 1 or n2 < 1:
        raise InputError("both parts need at least one vertex")
    x = rng.choice(w.m1, size=n1, p=np.array([float(v) for v in w.mu1]))
    y = rng.choice(w.m2, size=n2, p=np.array([float(v) for v in w.mu2]))
    wf = np.array([[float(v) for v in row] for row in w.w])
    probs = wf[np.repeat(x, n2), np.tile(y, n1)].reshape(n1, n2)
    bits = rng.random((n1, n2)) < probs
    rows = []
    for i in range(n1):
        packed = np.packbits(bits[i], bitorder="little").tobytes()
        rows.append(int.from_bytes(packed, "little"))
    return BipartiteGraph(n1, n2, tuple(rows))


def bip_cell_bits_batch(
    w: BipartiteKernel, k1: int, k2: int, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Boolean array (count, k1*k2): edge indicators of iid (k1,k2)-prefixes,
    cells in row-major order."""
    x = rng.choice(w.m1, size=(count, k1), p=np.array([float(v) for v in w.mu1]))
    y = rng.choice(w.m2, size=(count, k2), p=np.array([float(v) for v in w.mu2]))
    wf = np.array([[float(v) for v in row] for row in w.w])
    cols = []
    for i in range(k1):
        for j in range(k2):
            probs = wf[x[:, i], y[:, j]]
            cols.append(rng.random(count) < probs)
    return np.column_stack(cols)


def read_bipartite_graph(path: str) -> BipartiteGraph:
    with io.open(path, "r", encoding="ascii") as fh:
        return BipartiteGraph.from_text(fh.read())


def read_bipartite_kernel(path: str) -> BipartiteKernel:
    with io.open(path, "r", encoding="ascii") as fh:
        return BipartiteKernel.from_text(fh.read())
