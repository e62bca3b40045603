"""Simple labelled/unlabelled graphs, canonical forms, vertex sampling, enumeration.

Vertices are labelled 1..n at the API surface. Internally each graph
stores one bitmask row per vertex (bit j-1 of rows[i-1] set iff i~j),
which keeps neighbourhood intersection at one word op per 64 vertices.
All graph values are immutable and hashable.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import CapacityError, InputError

CANON_CAP = 10
ENUM_CAP = 7


def pair_order(k: int) -> list[tuple[int, int]]:
    """0-based vertex pairs (i, j), i < j, ordered (0,1),(0,2),(1,2),(0,3),...

    This colex order matches the chunk layout of canonical codes: pairs
    involving vertex j as the larger endpoint form one contiguous chunk.
    """
    return [(i, j) for j in range(1, k) for i in range(j)]


@dataclass(frozen=True)
class LabelledGraph:
    """Finite simple graph on vertex set {1..n}; adjacency as bitmask rows."""

    n: int
    rows: tuple[int, ...]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "LabelledGraph":
        if n < 1:
            raise InputError(f"vertex count must be >= 1, got {n}")
        rows = [0] * n
        seen = set()
        for u, v in edges:
            if not (1 <= u <= n and 1 <= v <= n):
                raise InputError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise InputError(f"self edge at vertex {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InputError(f"duplicate edge {key}")
            seen.add(key)
            rows[u - 1] |= 1 << (v - 1)
            rows[v - 1] |= 1 << (u - 1)
        return cls(n, tuple(rows))

    @classmethod
    def empty(cls, n: int) -> "LabelledGraph":
        return cls.from_edges(n, [])

    @classmethod
    def complete(cls, n: int) -> "LabelledGraph":
        full = (1 << n) - 1
        return cls(n, tuple(full ^ (1 << i) for i in range(n)))

    @classmethod
    def path(cls, n: int) -> "LabelledGraph":
        return cls.from_edges(n, [(i, i + 1) for i in range(1, n)])

    @classmethod
    def cycle(cls, n: int) -> "LabelledGraph":
        if n < 3:
            raise InputError("cycle needs at least 3 vertices")
        return cls.from_edges(n, [(i, i + 1) for i in range(1, n)] + [(1, n)])

    @classmethod
    def complete_bipartite(cls, a: int, b: int) -> "LabelledGraph":
        return cls.from_edges(a + b, [(i, a + j) for i in range(1, a + 1) for j in range(1, b + 1)])

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u - 1] >> (v - 1) & 1)

    def degree(self, u: int) -> int:
        return self.rows[u - 1].bit_count()

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for i in range(self.n):
            r = self.rows[i] >> (i + 1)
            j = i + 1
            while r:
                if r & 1:
                    out.append((i + 1, j + 1))
                r >>= 1
                j += 1
        return out

    @property
    def num_edges(self) -> int:
        return sum(r.bit_count() for r in self.rows) // 2

    def permuted(self, perm: Sequence[int]) -> "LabelledGraph":
        """Relabel: vertex u becomes perm[u-1] (perm is 1-based values)."""
        if sorted(perm) != list(range(1, self.n + 1)):
            raise InputError("not a permutation of 1..n")
        rows = [0] * self.n
        for u, v in self.edges():
            a, b = perm[u - 1] - 1, perm[v - 1] - 1
            rows[a] |= 1 << b
            rows[b] |= 1 << a
        return LabelledGraph(self.n, tuple(rows))

    def code(self) -> tuple[int, ...]:
        """Adjacency code in identity order: chunk j holds the bits towards
        vertices 1..j of vertex j+1, earliest vertex most significant."""
        return _code_for_order(self.rows, range(self.n))

    def to_text(self) -> str:
        edges = self.edges()
        lines = [f"{self.n} {len(edges)}"]
        lines += [f"{u} {v}" for u, v in edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "LabelledGraph":
        return _parse_graph_text(text)


def _code_for_order(rows: Sequence[int], order: Iterable[int]) -> tuple[int, ...]:
    order = list(order)
    chunks = []
    for d in range(1, len(order)):
        v = order[d]
        bits = 0
        for u in order[:d]:
            bits = bits << 1 | (rows[u] >> v & 1)
        chunks.append(bits)
    return tuple(chunks)


def _parse_graph_text(text: str) -> LabelledGraph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InputError("empty graph file")
    head = lines[0].split()
    if len(head) != 2:
        raise InputError(f"expected 'n m' header, got {lines[0]!r}")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError as exc:
        raise InputError(f"bad header {lines[0]!r}") from exc
    if len(lines) - 1 != m:
        raise InputError(f"header declares {m} edges, file has {len(lines) - 1}")
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise InputError(f"bad edge line {ln!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise InputError(f"bad edge line {ln!r}") from exc
        if not u < v:
            raise InputError(f"edge line {ln!r} must satisfy u < v")
        edges.append((u, v))
    return LabelledGraph.from_edges(n, edges)


def induced_pattern(g: LabelledGraph, verts: Sequence[int]) -> LabelledGraph:
    """Pattern on [k] pulled back along verts (1-based, repeats allowed).

    Edge {i,j} iff verts[i] != verts[j] and they are adjacent in g; a
    repeated vertex never yields an edge since g is loopless.
    """
    k = len(verts)
    for v in verts:
        if not 1 <= v <= g.n:
            raise InputError(f"vertex id {v} out of range 1..{g.n}")
    rows = [0] * k
    for i in range(k):
        for j in range(i + 1, k):
            a, b = verts[i], verts[j]
            if a != b and g.has_edge(a, b):
                rows[i] |= 1 << j
                rows[j] |= 1 << i
    return LabelledGraph(k, tuple(rows))


def sample_with_replacement(g: LabelledGraph, k: int, rng: np.random.Generator) -> LabelledGraph:
    """Pattern of k vertices drawn uniformly with replacement."""
    if k < 1:
        raise InputError("k must be >= 1")
    verts = rng.integers(1, g.n + 1, size=k)
    return induced_pattern(g, [int(v) for v in verts])


def sample_without_replacement(g: LabelledGraph, k: int, rng: np.random.Generator) -> LabelledGraph:
    """Pattern of k distinct vertices in uniform random order; requires k <= v(g)."""
    if k < 1:
        raise InputError("k must be >= 1")
    if k > g.n:
        raise InputError(f"k={k} exceeds vertex count {g.n}")
    verts = rng.permutation(g.n)[:k] + 1
    return induced_pattern(g, [int(v) for v in verts])


def random_relabel(g: LabelledGraph, rng: np.random.Generator) -> LabelledGraph:
    """g with vertices renamed by a uniform random permutation of [v(g)]."""
    perm = [int(x) + 1 for x in rng.permutation(g.n)]
    return g.permuted(perm)


def _twins(rows: Sequence[int], u: int, v: int) -> bool:
    # identical neighbourhoods outside {u, v}: swapping u,v is an automorphism
    mask = ~((1 << u) | (1 << v))
    return (rows[u] ^ rows[v]) & mask == 0


def _min_code_order(rows: tuple[int, ...]) -> list[int]:
    """Vertex order minimising the adjacency code, by branch and bound."""
    n = len(rows)
    best_code: list[int] | None = None
    best_order: list[int] | None = None

    def rec(order: list[int], code: list[int], used: int) -> None:
        nonlocal best_code, best_order
        depth = len(order)
        if depth == n:
            if best_code is None or code < best_code:
                best_code = list(code)
                best_order = list(order)
            return
        cands = []
        for v in range(n):
            if used >> v & 1:
                continue
            bits = 0
            for u in order:
                bits = bits << 1 | (rows[u] >> v & 1)
            cands.append((bits, v))
        cands.sort()
        kept: list[tuple[int, int]] = []
        for bits, v in cands:
            if any(b == bits and _twins(rows, u, v) for b, u in kept):
                continue
            kept.append((bits, v))
        for bits, v in kept:
            code.append(bits)
            if best_code is not None and code > best_code[: depth + 1]:
                code.pop()
                break  # candidates are sorted; everything later is larger too
            order.append(v)
            rec(order, code, used | 1 << v)
            order.pop()
            code.pop()

    rec([], [], 0)
    assert best_order is not None
    return best_order


@dataclass(frozen=True)
class UnlabelledGraph:
    """Isomorphism class, represented by its canonical labelled form."""

    canon: LabelledGraph

    @property
    def n(self) -> int:
        return self.canon.n

    @property
    def code(self) -> tuple[int, ...]:
        return self.canon.code()

    def __repr__(self) -> str:
        return f"UnlabelledGraph(n={self.n}, edges={self.canon.edges()})"


def canonicalize(g: LabelledGraph) -> UnlabelledGraph:
    """Canonical form: minimum adjacency code over all vertex orders.

    Isomorphic inputs map to identical outputs. Capped at v <= 10;
    pattern graphs are small and hosts never need canonicalising.
    """
    if g.n > CANON_CAP:
        raise CapacityError(f"canonicalization capped at {CANON_CAP} vertices, got {g.n}")
    order = _min_code_order(g.rows)
    # position d in `order` becomes vertex d+1 of the canonical graph
    rows = [0] * g.n
    for i in range(g.n):
        for j in range(i + 1, g.n):
            if g.rows[order[i]] >> order[j] & 1:
                rows[i] |= 1 << j
                rows[j] |= 1 << i
    return UnlabelledGraph(LabelledGraph(g.n, tuple(rows)))


def is_isomorphic(a: LabelledGraph, b: LabelledGraph) -> bool:
    return a.n == b.n and canonicalize(a) == canonicalize(b)


@dataclass(frozen=True)
class GraphEnumeration:
    """All isomorphism classes with v <= max_n in a fixed deterministic order:
    by vertex count, then canonical code."""

    max_n: int
    graphs: tuple[UnlabelledGraph, ...]

    def index_of(self, g: UnlabelledGraph) -> int:
        try:
            return _enum_index(self.max_n)[g]
        except KeyError as exc:
            raise InputError(f"graph on {g.n} vertices not in enumeration (max_n={self.max_n})") from exc

    def weight(self, i: int) -> Fraction:
        """Metric weight 2^-(i+1) of the i-th graph (0-based)."""
        return Fraction(1, 2 ** (i + 1))

    def __len__(self) -> int:
        return len(self.graphs)

    def __iter__(self) -> Iterator[UnlabelledGraph]:
        return iter(self.graphs)


@lru_cache(maxsize=None)
def _enum_levels(max_n: int) -> tuple[tuple[UnlabelledGraph, ...], ...]:
    levels: list[tuple[UnlabelledGraph, ...]] = [
        (UnlabelledGraph(LabelledGraph.empty(1)),)
    ]
    for n in range(2, max_n + 1):
        seen: dict[tuple[int, ...], UnlabelledGraph] = {}
        for parent in levels[-1]:
            base = parent.canon.rows
            # attach a new vertex n with every possible neighbourhood
            for nbhd in range(1 << (n - 1)):
                rows = [base[i] | ((nbhd >> i & 1) << (n - 1)) for i in range(n - 1)]
                rows.append(nbhd)
                cg = canonicalize(LabelledGraph(n, tuple(rows)))
                seen.setdefault(cg.code, cg)
        levels.append(tuple(seen[c] for c in sorted(seen)))
    return tuple(levels[:max_n])


@lru_cache(maxsize=None)
def enumerate_unlabelled(max_n: int, cap: int = ENUM_CAP) -> GraphEnumeration:
    """Complete duplicate-free enumeration of unlabelled graphs up to max_n.

    Every n-vertex class arises by deleting a vertex from nothing, i.e. by
    augmenting some (n-1)-vertex class with one new vertex, so level-wise
    augmentation plus canonical dedup is exhaustive.
    """
    if max_n < 1:
        raise InputError("max_n must be >= 1")
    if max_n > cap:
        raise CapacityError(f"enumeration capped at {cap} vertices, got {max_n}")
    graphs = tuple(g for level in _enum_levels(max_n) for g in level)
    return GraphEnumeration(max_n, graphs)


@lru_cache(maxsize=None)
def _enum_index(max_n: int) -> dict[UnlabelledGraph, int]:
    return {g: i for i, g in enumerate(enumerate_unlabelled(max_n).graphs)}


def pair_index(u: int, v: int) -> int:
    """Position of the 1-based pair {u, v} in the colex pair order; depends
    only on the pair, not on the ambient vertex count."""
    if u == v:
        raise InputError("no pairs on the diagonal")
    i, j = (u - 1, v - 1) if u < v else (v - 1, u - 1)
    return j * (j - 1) // 2 + i


def pair_bits_of(g: LabelledGraph) -> int:
    """Edge set packed into an int, bit pair_index(u,v) per edge."""
    bits = 0
    for u, v in g.edges():
        bits |= 1 << pair_index(u, v)
    return bits


def graph_from_pair_bits(k: int, bits: int) -> LabelledGraph:
    rows = [0] * k
    for idx, (i, j) in enumerate(pair_order(k)):
        if bits >> idx & 1:
            rows[i] |= 1 << j
            rows[j] |= 1 << i
    return LabelledGraph(k, tuple(rows))


def restrict_prefix(g: LabelledGraph, n: int) -> LabelledGraph:
    """Induced subgraph on the first n vertices."""
    if not 1 <= n <= g.n:
        raise InputError(f"prefix size {n} out of range 1..{g.n}")
    mask = (1 << n) - 1
    return LabelledGraph(n, tuple(r & mask for r in g.rows[:n]))


def disjoint_union(parts: Sequence[LabelledGraph]) -> LabelledGraph:
    if not parts:
        raise InputError("disjoint union of nothing")
    n = sum(p.n for p in parts)
    edges = []
    offset = 0
    for p in parts:
        edges += [(u + offset, v + offset) for u, v in p.edges()]
        offset += p.n
    return LabelledGraph.from_edges(n, edges)


def graph_from_bool_matrix(a: np.ndarray) -> LabelledGraph:
    """Build a graph from a symmetric boolean matrix with empty diagonal."""
    n = a.shape[0]
    rows = []
    for i in range(n):
        packed = np.packbits(a[i], bitorder="little").tobytes()
        rows.append(int.from_bytes(packed, "little"))
    return LabelledGraph(n, tuple(rows))


def read_graph(path: str) -> LabelledGraph:
    with io.open(path, "r", encoding="ascii") as fh:
        return _parse_graph_text(fh.read())


def write_graph(g: LabelledGraph, path: str) -> None:
    with io.open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(g.to_text())
