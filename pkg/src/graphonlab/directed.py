"""Directed graphs with loops, quintuple/quadruple kernels, and samplers.

A pair of vertices can carry up to two opposite edges whose indicators
are typically dependent, so the kernel is a quintuple: four functions
giving the joint law of the two indicators per unordered pair, plus a
0/1 loop function. The quadruple-plus-p variant moves the loop flag
into the latent space with an iid Bernoulli(p) coordinate.
"""
from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

from .densities import falling
from .errors import CapacityError, InputError
from .exact import Number, format_number, to_fraction
from .graphon import TERM_CAP, _normalized_measures
from .graphs import pair_order

DIR_PATTERN_CAP = 6
DIR_CANON_CAP = 8

PAIR_STATES = ((0, 0), (0, 1), (1, 0), (1, 1))  # (alpha, beta) = (X_ij, X_ji), i < j


@dataclass(frozen=True)
class DirectedGraph:
    """Directed graph on [n] with loops allowed; rows[i] bit j set iff
    there is an edge (i+1) -> (j+1)."""

    n: int
    rows: tuple[int, ...]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "DirectedGraph":
        if n < 1:
            raise InputError("vertex count must be >= 1")
        rows = [0] * n
        seen = set()
        for u, v in edges:
            if not (1 <= u <= n and 1 <= v <= n):
                raise InputError(f"edge ({u},{v}) out of range for n={n}")
            if (u, v) in seen:
                raise InputError(f"duplicate edge ({u},{v})")
            seen.add((u, v))
            rows[u - 1] |= 1 << (v - 1)
        return cls(n, tuple(rows))

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u - 1] >> (v - 1) & 1)

    def has_loop(self, u: int) -> bool:
        return self.has_edge(u, u)

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for i in range(self.n):
            r = self.rows[i]
            j = 0
            while r:
                if r & 1:
                    out.append((i + 1, j + 1))
                r >>= 1
                j += 1
        return out

    def loops(self) -> list[int]:
        return [i + 1 for i in range(self.n) if self.has_loop(i + 1)]

    def to_text(self) -> str:
        edges = self.edges()
        lines = [f"{self.n} {len(edges)}"]
        lines += [f"{u} {v}" for u, v in edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DirectedGraph":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise InputError("empty directed graph file")
        head = lines[0].split()
        if len(head) != 2:
            raise InputError(f"expected 'n m' header, got {lines[0]!r}")
        n, m = int(head[0]), int(head[1])
        if len(lines) - 1 != m:
            raise InputError(f"header declares {m} edges, file has {len(lines) - 1}")
        edges = []
        for ln in lines[1:]:
            parts = ln.split()
            if len(parts) != 2:
                raise InputError(f"bad edge line {ln!r}")
            edges.append((int(parts[0]), int(parts[1])))
        return cls.from_edges(n, edges)


def directed_canonical_rows(g: DirectedGraph) -> tuple[int, ...]:
    """Minimum row tuple over vertex permutations of the full adjacency
    matrix, diagonal included."""
    if g.n > DIR_CANON_CAP:
        raise CapacityError(f"directed canonical form capped at {DIR_CANON_CAP} vertices")
    best: tuple[int, ...] | None = None
    for perm in itertools.permutations(range(g.n)):
        cand = tuple(
            sum((g.rows[perm[i]] >> perm[j] & 1) << j for j in range(g.n)) for i in range(g.n)
        )
        if best is None or cand < best:
            best = cand
    return best


@dataclass(frozen=True)
class QuintupleVerdict:
    ok: bool
    detail: str | None


@dataclass(frozen=True)
class DirectedKernelQuintuple:
    """Blocks with measures mu; per block pair, w00..w11 give the joint law
    of the two directed indicators; loop_flags is a 0/1 vector."""

    mu: tuple[Fraction, ...]
    w00: tuple[tuple[Fraction, ...], ...]
    w01: tuple[tuple[Fraction, ...], ...]
    w10: tuple[tuple[Fraction, ...], ...]
    w11: tuple[tuple[Fraction, ...], ...]
    loop_flags: tuple[int, ...]

    def __post_init__(self) -> None:
        mu = _normalized_measures(self.mu)
        m = len(mu)
        mats = []
        for name in ("w00", "w01", "w10", "w11"):
            mat = tuple(tuple(to_fraction(x) for x in row) for row in getattr(self, name))
            if len(mat) != m or any(len(row) != m for row in mat):
                raise InputError(f"{name} must be {m}x{m}")
            if any(not 0 <= x <= 1 for row in mat for x in row):
                raise InputError(f"{name} values must lie in [0,1]")
            mats.append(mat)
        flags = tuple(int(x) for x in self.loop_flags)
        if len(flags) != m or any(x not in (0, 1) for x in flags):
            raise InputError("loop flags must be a 0/1 vector of length m")
        object.__setattr__(self, "mu", mu)
        for name, mat in zip(("w00", "w01", "w10", "w11"), mats):
            object.__setattr__(self, name, mat)
        object.__setattr__(self, "loop_flags", flags)

    @property
    def m(self) -> int:
        return len(self.mu)

    def pair_matrix(self, alpha: int, beta: int) -> tuple[tuple[Fraction, ...], ...]:
        return (self.w00, self.w01, self.w10, self.w11)[2 * alpha + beta]

    def to_text(self) -> str:
        lines = [str(self.m), " ".join(format_number(x) for x in self.mu)]
        for name in ("W00", "W01", "W10", "W11"):
            lines.append(name)
            mat = getattr(self, name.lower())
            lines += [" ".join(format_number(x) for x in row) for row in mat]
        lines.append("w")
        lines.append(" ".join(str(x) for x in self.loop_flags))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DirectedKernelQuintuple":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if len(lines) < 2:
            raise InputError("quintuple file too short")
        m = int(lines[0])
        mu = tuple(to_fraction(tok) for tok in lines[1].split())
        if len(mu) != m:
            raise InputError(f"expected {m} measures")
        pos = 2
        mats = {}
        for name in ("W00", "W01", "W10", "W11"):
            if pos >= len(lines) or lines[pos] != name:
                raise InputError(f"expected block label {name!r} at line {pos + 1}")
            pos += 1
            rows = []
            for _ in range(m):
                if pos >= len(lines):
                    raise InputError(f"block {name} truncated")
                rows.append(tuple(to_fraction(tok) for tok in lines[pos].split()))
                pos += 1
            mats[name] = tuple(rows)
        if pos >= len(lines) or lines[pos] != "w":
            raise InputError("expected loop vector label 'w'")
        pos += 1
        if pos >= len(lines):
            raise InputError("missing loop vector")
        flags = tuple(int(tok) for tok in lines[pos].split())
        kernel = cls(mu, mats["W00"], mats["W01"], mats["W10"], mats["W11"], flags)
        verdict = validate_quintuple(kernel)
        if not verdict.ok:
            raise InputError(f"invalid quintuple: {verdict.detail}")
        return kernel


def validate_quintuple(k: DirectedKernelQuintuple) -> QuintupleVerdict:
    """Check normalisation (the four values sum to 1 per block pair) and the
    transpose symmetry W_ab(x,y) = W_ba(y,x); reports the first violation."""
    for a in range(k.m):
        for b in range(k.m):
            total = k.w00[a][b] + k.w01[a][b] + k.w10[a][b] + k.w11[a][b]
            if total != 1:
                return QuintupleVerdict(
                    False, f"pair law at blocks ({a},{b}) sums to {total}, not 1"
                )
    for alpha, beta in PAIR_STATES:
        mat = k.pair_matrix(alpha, beta)
        mat_t = k.pair_matrix(beta, alpha)
        for a in range(k.m):
            for b in range(k.m):
                if mat[a][b] != mat_t[b][a]:
                    return QuintupleVerdict(
                        False,
                        f"W{alpha}{beta}({a},{b}) = {mat[a][b]} != W{beta}{alpha}({b},{a}) = {mat_t[b][a]}",
                    )
    return QuintupleVerdict(True, None)


def tournament_kernel() -> DirectedKernelQuintuple:
    """One block; each pair gets exactly one edge with fair direction; no loops."""
    half = Fraction(1, 2)
    zero = Fraction(0)
    return DirectedKernelQuintuple(
        (Fraction(1),), ((zero,),), ((half,),), ((half,),), ((zero,),), (0,)
    )


@dataclass(frozen=True)
class DirectedKernelQuadruplePlusP:
    """Quadruple over the extended latent space (block, loop flag) plus the
    loop probability p. Extended index e = 2*block + flag."""

    mu: tuple[Fraction, ...]
    p: Fraction
    w00: tuple[tuple[Fraction, ...], ...]
    w01: tuple[tuple[Fraction, ...], ...]
    w10: tuple[tuple[Fraction, ...], ...]
    w11: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        mu = _normalized_measures(self.mu)
        p = to_fraction(self.p)
        if not 0 <= p <= 1:
            raise InputError("loop probability must lie in [0,1]")
        ext = 2 * len(mu)
        mats = []
        for name in ("w00", "w01", "w10", "w11"):
            mat = tuple(tuple(to_fraction(x) for x in row) for row in getattr(self, name))
            if len(mat) != ext or any(len(row) != ext for row in mat):
                raise InputError(f"{name} must be {ext}x{ext} over (block, flag) states")
            if any(not 0 <= x <= 1 for row in mat for x in row):
                raise InputError(f"{name} values must lie in [0,1]")
            mats.append(mat)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "p", p)
        for name, mat in zip(("w00", "w01", "w10", "w11"), mats):
            object.__setattr__(self, name, mat)

    @property
    def m(self) -> int:
        return len(self.mu)

    def pair_matrix(self, alpha: int, beta: int):
        return (self.w00, self.w01, self.w10, self.w11)[2 * alpha + beta]

    def ext_measure(self, e: int) -> Fraction:
        block, flag = divmod(e, 2)
        return self.mu[block] * (self.p if flag else 1 - self.p)


def validate_quadruple(k: DirectedKernelQuadruplePlusP) -> QuintupleVerdict:
    """Same constraint families as the quintuple, over the extended index."""
    ext = 2 * k.m
    for a in range(ext):
        for b in range(ext):
            total = k.w00[a][b] + k.w01[a][b] + k.w10[a][b] + k.w11[a][b]
            if total != 1:
                return QuintupleVerdict(
                    False, f"pair law at extended states ({a},{b}) sums to {total}, not 1"
                )
    for alpha, beta in PAIR_STATES:
        mat = k.pair_matrix(alpha, beta)
        mat_t = k.pair_matrix(beta, alpha)
        for a in range(ext):
            for b in range(ext):
                if mat[a][b] != mat_t[b][a]:
                    return QuintupleVerdict(
                        False, f"W{alpha}{beta}({a},{b}) != W{beta}{alpha}({b},{a})"
                    )
    return QuintupleVerdict(True, None)


def quadruple_from_quintuple(k: DirectedKernelQuintuple, p: Number) -> DirectedKernelQuadruplePlusP:
    """Lift a quintuple's pair law to the extended space (ignoring its loop
    vector) and attach an independent loop probability."""
    ext = 2 * k.m

    def lift(mat):
        return tuple(tuple(mat[a // 2][b // 2] for b in range(ext)) for a in range(ext))

    return DirectedKernelQuadruplePlusP(
        k.mu, to_fraction(p), lift(k.w00), lift(k.w01), lift(k.w10), lift(k.w11)
    )


DirectedKernel = Union[DirectedKernelQuintuple, DirectedKernelQuadruplePlusP]


def sample_directed_pair_codes(
    kernel: DirectedKernel, n: int, count: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised sampler core: (loops, codes) for `count` iid n-prefixes.

    loops is (count, n) in {0,1}; codes is (count, npairs) in 0..3 over the
    colex pair order, encoding (X_ij, X_ji) as 2*X_ij + X_ji for i < j.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    verdict = (
        validate_quintuple(kernel)
        if isinstance(kernel, DirectedKernelQuintuple)
        else validate_quadruple(kernel)
    )
    if not verdict.ok:
        raise InputError(f"invalid kernel: {verdict.detail}")
    mu = np.array([float(x) for x in kernel.mu])
    blocks = rng.choice(kernel.m, size=(count, n), p=mu)
    if isinstance(kernel, DirectedKernelQuintuple):
        loops = np.array(kernel.loop_flags, dtype=np.int8)[blocks]
        states = blocks
    else:
        flags = (rng.random((count, n)) < float(kernel.p)).astype(np.int8)
        loops = flags
        states = 2 * blocks + flags
    mats = [
        np.array([[float(x) for x in row] for row in kernel.pair_matrix(a, b)])
        for a, b in PAIR_STATES
    ]
    pairs = pair_order(n)
    ii = np.array([i for i, _ in pairs], dtype=np.intp)
    jj = np.array([j for _, j in pairs], dtype=np.intp)
    si, sj = states[:, ii], states[:, jj]  # (count, npairs) each
    c1 = mats[0][si, sj]
    c2 = c1 + mats[1][si, sj]
    c3 = c2 + mats[2][si, sj]
    u = rng.random((count, len(pairs)))
    codes = ((u >= c1).astype(np.int8) + (u >= c2) + (u >= c3)).astype(np.int8)
    return loops, codes


def _graph_from_codes(n: int, loops: np.ndarray, codes: np.ndarray) -> DirectedGraph:
    rows = [0] * n
    for i in range(n):
        if loops[i]:
            rows[i] |= 1 << i
    for idx, (i, j) in enumerate(pair_order(n)):
        c = int(codes[idx])
        if c >> 1 & 1:  # X_ij = 1
            rows[i] |= 1 << j
        if c & 1:  # X_ji = 1
            rows[j] |= 1 << i
    return DirectedGraph(n, tuple(rows))


def sample_directed(
    kernel: DirectedKernelQuintuple, n: int, rng: np.random.Generator
) -> DirectedGraph:
    """One draw of the n-prefix: loops from the 0/1 loop function of the
    latent block, pair indicators jointly from the quintuple law."""
    loops, codes = sample_directed_pair_codes(kernel, n, 1, rng)
    return _graph_from_codes(n, loops[0], codes[0])


def sample_directed_qp(
    kernel: DirectedKernelQuadruplePlusP, n: int, rng: np.random.Generator
) -> DirectedGraph:
    """One draw under the quadruple-plus-p model: loops iid Bernoulli(p)."""
    loops, codes = sample_directed_pair_codes(kernel, n, 1, rng)
    return _graph_from_codes(n, loops[0], codes[0])


def loop_sequence_law(kernel: DirectedKernel, n: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Diagonal of one sampled graph: a binary exchangeable sequence.

    The off-diagonal indicators are conditionally independent of the
    diagonal given the latents, so only latents and loop flags are drawn.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    mu = np.array([float(x) for x in kernel.mu])
    blocks = rng.choice(kernel.m, size=n, p=mu)
    if isinstance(kernel, DirectedKernelQuintuple):
        flags = np.array(kernel.loop_flags, dtype=np.int8)[blocks]
    else:
        flags = (rng.random(n) < float(kernel.p)).astype(np.int8)
    return tuple(int(x) for x in flags)


def _check_dir_pattern(f: DirectedGraph) -> None:
    if f.n > DIR_PATTERN_CAP:
        raise CapacityError(f"directed pattern capped at {DIR_PATTERN_CAP} vertices")


def _count_dir_maps(f: DirectedGraph, g: DirectedGraph, injective: bool, induced: bool) -> int:
    """Maps [k]->[n] pulling g's edge indicators back onto f's requirements.

    Containment asks every f-edge (u,v), loops included, to be present at
    (phi(u), phi(v)); induced asks for exact equality of the pulled-back
    indicator matrix.
    """
    k, n = f.n, g.n
    full = (1 << n) - 1
    succ = g.rows
    pred = [0] * n
    loop_mask = 0
    for i in range(n):
        r = succ[i]
        j = 0
        while r:
            if r & 1:
                pred[j] |= 1 << i
            r >>= 1
            j += 1
        if succ[i] >> i & 1:
            loop_mask |= 1 << i
    assigned = [0] * k

    def rec(d: int, used: int) -> int:
        cand = full
        if f.has_edge(d + 1, d + 1):
            cand &= loop_mask
        elif induced:
            cand &= full ^ loop_mask
        for e in range(d):
            ge = assigned[e]
            if f.has_edge(d + 1, e + 1):
                cand &= pred[ge]
            elif induced:
                cand &= full ^ pred[ge]
            if f.has_edge(e + 1, d + 1):
                cand &= succ[ge]
            elif induced:
                cand &= full ^ succ[ge]
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


def _kernel_pair_factor(
    kernel: DirectedKernel, req_ij: int, req_ji: int, si: int, sj: int, induced: bool
) -> Fraction:
    if induced:
        return kernel.pair_matrix(req_ij, req_ji)[si][sj]
    total = Fraction(0)
    for alpha, beta in PAIR_STATES:
        if alpha >= req_ij and beta >= req_ji:
            total += kernel.pair_matrix(alpha, beta)[si][sj]
    return total


def _dir_kernel_density(f: DirectedGraph, kernel: DirectedKernel, induced: bool) -> Fraction:
    """Block-assignment sum: one latent state per pattern vertex, a loop
    factor per vertex, a joint pair factor per unordered pair."""
    _check_dir_pattern(f)
    k = f.n
    if isinstance(kernel, DirectedKernelQuintuple):
        states = range(kernel.m)
        measures = {s: kernel.mu[s] for s in states}
        loop_of = {s: kernel.loop_flags[s] for s in states}
    else:
        states = range(2 * kernel.m)
        measures = {s: kernel.ext_measure(s) for s in states}
        loop_of = {s: s % 2 for s in states}
    if len(measures) ** k > TERM_CAP:
        raise CapacityError("assignment terms exceed cap")
    total = Fraction(0)
    for z in itertools.product(states, repeat=k):
        weight = math.prod((measures[s] for s in z), start=Fraction(1))
        if not weight:
            continue
        for v in range(1, k + 1):
            has = f.has_edge(v, v)
            flag = loop_of[z[v - 1]]
            if has and not flag:
                weight = Fraction(0)
            elif induced and not has and flag:
                weight = Fraction(0)
            if not weight:
                break
        if not weight:
            continue
        for i, j in pair_order(k):
            weight *= _kernel_pair_factor(
                kernel, int(f.has_edge(i + 1, j + 1)), int(f.has_edge(j + 1, i + 1)),
                z[i], z[j], induced,
            )
            if not weight:
                break
        total += weight
    return total


DirectedHost = Union[DirectedGraph, DirectedKernelQuintuple, DirectedKernelQuadruplePlusP]


def directed_t(f: DirectedGraph, host: DirectedHost) -> Fraction:
    """Containment density of a directed pattern in a finite host or the
    limit object of a kernel."""
    if isinstance(host, DirectedGraph):
        _check_dir_pattern(f)
        return Fraction(_count_dir_maps(f, host, False, False), host.n**f.n)
    return _dir_kernel_density(f, host, induced=False)


def directed_t_inj(f: DirectedGraph, g: DirectedGraph) -> Fraction:
    _check_dir_pattern(f)
    if f.n > g.n:
        return Fraction(0)
    return Fraction(_count_dir_maps(f, g, True, False), falling(g.n, f.n))


def directed_t_ind(f: DirectedGraph, host: DirectedHost) -> Fraction:
    """Induced density: exact equality of the pulled-back indicator matrix
    (finite host) or the prefix-law mass of f (kernel)."""
    if isinstance(host, DirectedGraph):
        _check_dir_pattern(f)
        if f.n > host.n:
            return Fraction(0)
        return Fraction(_count_dir_maps(f, host, True, True), falling(host.n, f.n))
    return _dir_kernel_density(f, host, induced=True)


def read_directed_graph(path: str) -> DirectedGraph:
    with io.open(path, "r", encoding="ascii") as fh:
        return DirectedGraph.from_text(fh.read())


def read_quintuple(path: str) -> DirectedKernelQuintuple:
    with io.open(path, "r", encoding="ascii") as fh:
        return DirectedKernelQuintuple.from_text(fh.read())
