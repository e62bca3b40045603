"""Prefix laws of exchangeable random graphs and the tests they support.

An infinite random graph never materialises here: everything goes
through the law of its restriction to the first k vertices. Exact
prefix laws come from step kernels; empirical ones from seeded
samplers. The exchangeability check and the extremality (product
criterion) check are finite-sample bridges to the corresponding
structural properties of the infinite law.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy import stats as sps

from .densities import _as_labelled, t_ind
from .errors import CapacityError, InputError
from .exact import Number, to_fraction
from .graphon import GeneralGraphon, StepGraphon, TERM_CAP, exact_density, sample_w_random
from .graphs import (
    LabelledGraph,
    UnlabelledGraph,
    graph_from_pair_bits,
    pair_bits_of,
    pair_index,
    pair_order,
    restrict_prefix,
)
from .rng import CHUNK

PREFIX_CAP = 16
CLASS_CAP = 7  # isomorphism-class grouping enumerates k! relabellings


@dataclass(frozen=True)
class PrefixLaw:
    """Distribution of the first-k restriction, over labelled graphs on [k].

    Exact laws store rational probabilities; empirical laws store counts
    with their total. Graphs absent from the mapping have probability 0.
    """

    k: int
    probs: dict[LabelledGraph, Fraction] | None
    counts: dict[LabelledGraph, int] | None
    total: int | None

    @classmethod
    def exact(cls, k: int, probs: Mapping[LabelledGraph, Fraction]) -> "PrefixLaw":
        clean = {g: Fraction(p) for g, p in probs.items() if p != 0}
        if any(p < 0 or p > 1 for p in clean.values()):
            raise InputError("probabilities must lie in [0,1]")
        if sum(clean.values()) != 1:
            raise InputError("exact prefix law must sum to exactly 1")
        return cls(k, clean, None, None)

    @classmethod
    def empirical(cls, k: int, counts: Mapping[LabelledGraph, int]) -> "PrefixLaw":
        clean = {g: int(c) for g, c in counts.items() if c}
        total = sum(clean.values())
        if total < 1:
            raise InputError("empirical law needs at least one sample")
        return cls(k, None, clean, total)

    @property
    def is_empirical(self) -> bool:
        return self.counts is not None

    def probability(self, g: LabelledGraph) -> Fraction:
        if g.n != self.k:
            raise InputError(f"graph on {g.n} vertices queried against a {self.k}-prefix law")
        if self.probs is not None:
            return self.probs.get(g, Fraction(0))
        assert self.counts is not None and self.total is not None
        return Fraction(self.counts.get(g, 0), self.total)

    def support(self) -> Iterable[LabelledGraph]:
        return (self.probs or self.counts or {}).keys()


def prefix_law_exact(w: StepGraphon, k: int) -> PrefixLaw:
    """Exact law of the k-prefix of the W-random graph: per block
    assignment, each pair contributes its kernel value or its complement."""
    if k < 1:
        raise InputError("k must be >= 1")
    npairs = k * (k - 1) // 2
    if w.m**k * 2**npairs > TERM_CAP:
        raise CapacityError(f"{w.m}^{k} * 2^{npairs} terms exceed cap {TERM_CAP}")
    pairs = pair_order(k)
    acc: dict[int, Fraction] = {}
    for z in itertools.product(range(w.m), repeat=k):
        mass = math.prod((w.mu[b] for b in z), start=Fraction(1))
        dist = {0: mass}
        for idx, (i, j) in enumerate(pairs):
            p = w.w[z[i]][z[j]]
            nxt: dict[int, Fraction] = {}
            for code, weight in dist.items():
                if p:
                    nxt[code | 1 << idx] = nxt.get(code | 1 << idx, Fraction(0)) + weight * p
                if p != 1:
                    nxt[code] = nxt.get(code, Fraction(0)) + weight * (1 - p)
            dist = nxt
        for code, weight in dist.items():
            acc[code] = acc.get(code, Fraction(0)) + weight
    return PrefixLaw.exact(k, {graph_from_pair_bits(k, c): p for c, p in acc.items()})


@dataclass(frozen=True)
class GraphSource:
    """Sampler of prefixes of an exchangeable infinite graph.

    Kinds: a fixed kernel, a finite mixture of kernels (the kernel is
    redrawn once per sampled prefix, not per edge), or an external
    sampler hook (n, rng) -> LabelledGraph.
    """

    kind: str
    graphon: StepGraphon | GeneralGraphon | None = None
    components: tuple[tuple[Fraction, StepGraphon | GeneralGraphon], ...] | None = None
    sampler: Callable[[int, np.random.Generator], LabelledGraph] | None = None

    @classmethod
    def w_random(cls, w: StepGraphon | GeneralGraphon) -> "GraphSource":
        return cls("w_random", graphon=w)

    @classmethod
    def mixture(cls, parts: Sequence[tuple[Number, StepGraphon | GeneralGraphon]]) -> "GraphSource":
        weights = [to_fraction(wt) for wt, _ in parts]
        if not weights or any(x <= 0 for x in weights):
            raise InputError("mixture weights must be positive")
        total = sum(weights)
        if abs(total - 1) > Fraction(1, 10**12):
            raise InputError("mixture weights must sum to 1")
        comps = tuple((wt / total, w) for wt, (_, w) in zip(weights, parts))
        return cls("mixture", components=comps)

    @classmethod
    def from_sampler(cls, fn: Callable[[int, np.random.Generator], LabelledGraph]) -> "GraphSource":
        return cls("sampler", sampler=fn)

    def sample_prefix(self, n: int, rng: np.random.Generator) -> LabelledGraph:
        if self.kind == "w_random":
            return sample_w_random(self.graphon, n, rng)
        if self.kind == "mixture":
            weights = np.array([float(wt) for wt, _ in self.components])
            idx = int(rng.choice(len(self.components), p=weights))
            return sample_w_random(self.components[idx][1], n, rng)
        return self.sampler(n, rng)

    def pair_bits_batch(self, k: int, count: int, rng: np.random.Generator) -> np.ndarray:
        """Boolean array (count, k*(k-1)/2): edge indicators of iid k-prefixes,
        columns in colex pair order."""
        if self.kind == "w_random":
            return _kernel_pair_bits(self.graphon, k, count, rng)
        if self.kind == "mixture":
            weights = np.array([float(wt) for wt, _ in self.components])
            comp = rng.choice(len(self.components), size=count, p=weights)
            out = np.zeros((count, k * (k - 1) // 2), dtype=bool)
            for c, (_, w) in enumerate(self.components):
                mask = comp == c
                n_c = int(mask.sum())
                if n_c:
                    out[mask] = _kernel_pair_bits(w, k, n_c, rng)
            return out
        rows = [pair_bits_of(restrict_prefix(self.sampler(k, rng), k)) for _ in range(count)]
        npairs = k * (k - 1) // 2
        return np.array([[code >> i & 1 for i in range(npairs)] for code in rows], dtype=bool)


def _kernel_pair_bits(
    w: StepGraphon | GeneralGraphon, k: int, count: int, rng: np.random.Generator
) -> np.ndarray:
    if isinstance(w, StepGraphon):
        latents = rng.choice(w.m, size=(count, k), p=w.mu_floats())
        wf = w.w_floats()
    else:
        latents = rng.random((count, k))
        wf = None
    cols = []
    for i, j in pair_order(k):
        if wf is not None:
            probs = wf[latents[:, i], latents[:, j]]
        else:
            probs = w.values(latents[:, i], latents[:, j])
        cols.append(rng.random(count) < probs)
    return np.column_stack(cols)


def _codes_of_bits(bits: np.ndarray) -> np.ndarray:
    powers = 1 << np.arange(bits.shape[1], dtype=np.int64)
    return bits @ powers


def prefix_law_empirical(
    src: GraphSource, k: int, samples: int, rng: np.random.Generator
) -> PrefixLaw:
    """Empirical distribution of the k-prefix over seeded iid samples."""
    if samples < 1:
        raise InputError("samples must be >= 1")
    if k < 1 or k > PREFIX_CAP:
        raise InputError(f"prefix size must be in 1..{PREFIX_CAP}")
    counts: dict[int, int] = {}
    remaining = samples
    while remaining:
        batch = min(remaining, CHUNK)
        codes = _codes_of_bits(src.pair_bits_batch(k, batch, rng))
        vals, cnts = np.unique(codes, return_counts=True)
        for v, c in zip(vals, cnts):
            counts[int(v)] = counts.get(int(v), 0) + int(c)
        remaining -= batch
    return PrefixLaw.empirical(k, {graph_from_pair_bits(k, c): n for c, n in counts.items()})


def isomorphism_class(g: LabelledGraph) -> list[LabelledGraph]:
    """All distinct labelled variants of g on its own vertex set."""
    if g.n > CLASS_CAP:
        raise CapacityError(f"class enumeration capped at {CLASS_CAP} vertices")
    seen = {}
    for perm in itertools.permutations(range(1, g.n + 1)):
        h = g.permuted(perm)
        seen[h.rows] = h
    return list(seen.values())


def chi_square_uniformity(observed: Sequence[int]) -> tuple[float, float]:
    """Chi-square statistic and p-value for uniformity over the cells."""
    c = len(observed)
    n = sum(observed)
    expected = n / c
    stat = sum((o - expected) ** 2 / expected for o in observed)
    return stat, float(sps.chi2.sf(stat, c - 1))


@dataclass(frozen=True)
class ExchangeabilityVerdict:
    consistent: bool
    detail: str | None
    p_min: float | None
    classes_tested: int


def exchangeability_test(law: PrefixLaw, alpha: float = 0.01) -> ExchangeabilityVerdict:
    """Check that the prefix law depends only on isomorphism type.

    Exact laws are checked for exact equality within each class; empirical
    laws get a chi-square homogeneity test per class with a Bonferroni
    correction across classes.
    """
    classes: dict[tuple[int, ...], list[LabelledGraph]] = {}
    for g in law.support():
        members = isomorphism_class(g)
        key = min(m.rows for m in members)
        classes.setdefault(key, members)
    if not law.is_empirical:
        for members in classes.values():
            values = {law.probability(m) for m in members}
            if len(values) > 1:
                bad = members[0]
                return ExchangeabilityVerdict(
                    False,
                    f"class of graph with edges {bad.edges()} has unequal probabilities",
                    None,
                    len(classes),
                )
        return ExchangeabilityVerdict(True, None, None, len(classes))
    testable = [m for m in classes.values() if len(m) > 1]
    if not testable:
        return ExchangeabilityVerdict(True, None, None, 0)
    p_min, worst = 1.0, None
    for members in testable:
        observed = [law.counts.get(m, 0) for m in members]
        if sum(observed) == 0:
            continue
        _, p = chi_square_uniformity(observed)
        if p < p_min:
            p_min, worst = p, members[0]
    threshold = alpha / len(testable)
    if p_min < threshold:
        return ExchangeabilityVerdict(
            False,
            f"class of graph with edges {worst.edges()} fails homogeneity (p={p_min:.3g})",
            p_min,
            len(testable),
        )
    return ExchangeabilityVerdict(True, None, p_min, len(testable))


@dataclass(frozen=True)
class PatternPair:
    """Two edge sets on disjoint vertex supports inside a common prefix."""

    edges1: tuple[tuple[int, int], ...]
    edges2: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        for edges in (self.edges1, self.edges2):
            if not edges:
                raise InputError("each pattern needs at least one edge")
            for u, v in edges:
                if u == v or u < 1 or v < 1:
                    raise InputError(f"bad edge ({u},{v})")
        if self.support(1) & self.support(2):
            raise InputError("pattern vertex sets must be disjoint")
        if self.k() > PREFIX_CAP:
            raise CapacityError(f"combined pattern size exceeds prefix cap {PREFIX_CAP}")

    def support(self, which: int) -> frozenset[int]:
        edges = self.edges1 if which == 1 else self.edges2
        return frozenset(v for e in edges for v in e)

    def k(self) -> int:
        return max(v for e in self.edges1 + self.edges2 for v in e)

    def columns(self, which: int) -> list[int]:
        edges = self.edges1 if which == 1 else self.edges2
        return [pair_index(u, v) for u, v in edges]


def covariance_ztest(n: int, sum_a: int, sum_b: int, sum_ab: int) -> tuple[float, float, float]:
    """Two-sided z-test of P(A and B) = P(A) P(B) for paired indicators.

    Returns (cov_hat, z, p_value). The variance of the plug-in covariance
    uses the exact Bernoulli moment identity, so only the three sums are
    needed and chunked results merge exactly.
    """
    p1, p2, p12 = sum_a / n, sum_b / n, sum_ab / n
    cov = p12 - p1 * p2
    second = (
        p12 * (1 - 2 * p1) * (1 - 2 * p2)
        + p1 * (1 - 2 * p1) * p2**2
        + p2 * (1 - 2 * p2) * p1**2
        + p1**2 * p2**2
    )
    var = max(second - cov**2, 0.0)
    if var == 0.0:
        return (cov, 0.0, 1.0) if cov == 0.0 else (cov, math.inf, 0.0)
    z = cov / math.sqrt(var / n)
    return cov, z, math.erfc(abs(z) / math.sqrt(2.0))


@dataclass(frozen=True)
class PairStat:
    p1: float
    p2: float
    p12: float
    z: float
    p_value: float


@dataclass(frozen=True)
class ExtremalityVerdict:
    extreme_consistent: bool
    pair_stats: tuple[PairStat, ...]
    p_min: float


def _pair_sums_chunk(
    src: GraphSource, pairs: Sequence[PatternPair], k: int, count: int, rng: np.random.Generator
) -> np.ndarray:
    bits = src.pair_bits_batch(k, count, rng)
    sums = np.zeros((len(pairs), 3), dtype=np.int64)
    for idx, pair in enumerate(pairs):
        a = bits[:, pair.columns(1)].all(axis=1)
        b = bits[:, pair.columns(2)].all(axis=1)
        sums[idx] = (int(a.sum()), int(b.sum()), int((a & b).sum()))
    return sums


def extremality_test(
    src: GraphSource,
    pairs: Sequence[PatternPair],
    samples: int,
    alpha: float = 0.01,
    *,
    rng: np.random.Generator | None = None,
    seed: int | None = None,
    threads: int = 1,
) -> ExtremalityVerdict:
    """Product-criterion test: containment of vertex-disjoint patterns must
    be uncorrelated under an extreme (single-kernel) law.

    All patterns of all pairs are evaluated on one common prefix sample.
    Per pair, a delta-method z-test of P(both) = P(first) P(second), with
    Bonferroni correction across pairs. Pass either an rng (single
    stream) or a seed (fixed-chunk streams, thread-count independent).
    """
    if not pairs:
        raise InputError("need at least one pattern pair")
    if samples < 1:
        raise InputError("samples must be >= 1")
    if (rng is None) == (seed is None):
        raise InputError("pass exactly one of rng or seed")
    k = max(p.k() for p in pairs)
    if rng is not None:
        sums = np.zeros((len(pairs), 3), dtype=np.int64)
        remaining = samples
        while remaining:
            batch = min(remaining, CHUNK)
            sums += _pair_sums_chunk(src, pairs, k, batch, rng)
            remaining -= batch
    else:
        from .rng import run_chunked

        parts = run_chunked(
            lambda _i, count, gen: _pair_sums_chunk(src, pairs, k, count, gen),
            samples,
            seed,
            threads,
        )
        sums = np.sum(parts, axis=0)
    stats = []
    for sa, sb, sab in sums:
        _, z, p = covariance_ztest(samples, int(sa), int(sb), int(sab))
        stats.append(PairStat(sa / samples, sb / samples, sab / samples, z, p))
    p_min = min(s.p_value for s in stats)
    consistent = p_min >= alpha / len(pairs)
    return ExtremalityVerdict(consistent, tuple(stats), p_min)


@dataclass(frozen=True)
class CorrespondenceResult:
    lhs: Fraction
    rhs: Fraction
    gap: Fraction


def correspondence_check(
    w: StepGraphon, f: LabelledGraph | UnlabelledGraph, k: int
) -> CorrespondenceResult:
    """Exact identity: the kernel density of f equals the prefix-law mass of
    all k-vertex labelled graphs containing f."""
    fl = _as_labelled(f)
    if not fl.n <= k:
        raise InputError(f"pattern on {fl.n} vertices does not fit in prefix of {k}")
    lhs = exact_density(fl, w)
    law = prefix_law_exact(w, k)
    f_mask = pair_bits_of(fl)
    rhs = Fraction(0)
    for g in law.support():
        if pair_bits_of(g) & f_mask == f_mask:
            rhs += law.probability(g)
    return CorrespondenceResult(lhs, rhs, abs(lhs - rhs))


def martingale_trace(
    src: GraphSource,
    f: LabelledGraph | UnlabelledGraph,
    n_grid: Sequence[int],
    rng: np.random.Generator,
) -> list[Fraction]:
    """Induced density of f along nested restrictions of one sampled prefix.

    One path, restricted downward; never independent resamples, so the
    trace is a single realisation of the reverse martingale.
    """
    fl = _as_labelled(f)
    grid = list(n_grid)
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InputError("n_grid must be strictly increasing")
    if grid[0] < fl.n:
        raise InputError(f"grid starts below the pattern size {fl.n}")
    top = src.sample_prefix(grid[-1], rng)
    return [t_ind(fl, restrict_prefix(top, n)) for n in grid]
