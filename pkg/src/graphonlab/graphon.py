"""Step graphons, W-random sampling, exact kernel densities, cut norms.

Step functions are the exact computational class: the density integral
over a step kernel is a finite sum over block assignments, evaluated in
rational arithmetic. General kernels are sampled and integrated by
Monte Carlo only.
"""
from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .densities import (
    DensityEstimate,
    GraphLike,
    _as_labelled,
    _check_pattern,
    _search_order,
    hoeffding_halfwidth,
)
from .errors import CapacityError, InputError
from .exact import Number, format_number, to_fraction
from .graphs import LabelledGraph, graph_from_bool_matrix

TERM_CAP = 10**7
CUT_NORM_CAP = 16
CUT_DIST_CAP = 8
MEASURE_TOL = Fraction(1, 10**12)


def _normalized_measures(raw: Sequence[Number]) -> tuple[Fraction, ...]:
    mu = tuple(to_fraction(x) for x in raw)
    if not mu:
        raise InputError("need at least one block")
    if any(x <= 0 for x in mu):
        raise InputError("block measures must be positive")
    total = sum(mu)
    if abs(total - 1) > MEASURE_TOL:
        raise InputError(f"block measures sum to {float(total)}, not 1")
    # renormalise exactly so downstream laws sum to exactly 1
    return tuple(x / total for x in mu)


@dataclass(frozen=True)
class StepGraphon:
    """Symmetric step kernel: block measures mu and value matrix w."""

    mu: tuple[Fraction, ...]
    w: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        mu = _normalized_measures(self.mu)
        w = tuple(tuple(to_fraction(x) for x in row) for row in self.w)
        m = len(mu)
        if len(w) != m or any(len(row) != m for row in w):
            raise InputError(f"value matrix must be {m}x{m}")
        for a in range(m):
            for b in range(m):
                if not 0 <= w[a][b] <= 1:
                    raise InputError(f"kernel value w[{a}][{b}] outside [0,1]")
                if w[a][b] != w[b][a]:
                    raise InputError(f"kernel not symmetric at blocks ({a},{b})")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "w", w)

    @property
    def m(self) -> int:
        return len(self.mu)

    @classmethod
    def constant(cls, p: Number) -> "StepGraphon":
        return cls((Fraction(1),), ((to_fraction(p),),))

    def mu_floats(self) -> np.ndarray:
        return np.array([float(x) for x in self.mu])

    def w_floats(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.w])

    def to_text(self) -> str:
        lines = [str(self.m), " ".join(format_number(x) for x in self.mu)]
        lines += [" ".join(format_number(x) for x in row) for row in self.w]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "StepGraphon":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if len(lines) < 2:
            raise InputError("step-graphon file needs a block count and measures")
        try:
            m = int(lines[0])
        except ValueError as exc:
            raise InputError(f"bad block count {lines[0]!r}") from exc
        if len(lines) != 2 + m:
            raise InputError(f"expected {m} matrix rows, got {len(lines) - 2}")
        mu = [to_fraction(tok) for tok in lines[1].split()]
        if len(mu) != m:
            raise InputError(f"expected {m} measures, got {len(mu)}")
        w = []
        for ln in lines[2:]:
            row = [to_fraction(tok) for tok in ln.split()]
            if len(row) != m:
                raise InputError(f"matrix row {ln!r} has wrong length")
            w.append(tuple(row))
        return cls(tuple(mu), tuple(w))


@dataclass(frozen=True)
class GeneralGraphon:
    """Arbitrary symmetric kernel given by a callable; Monte Carlo only."""

    eval: Callable[[float, float], float]

    def __post_init__(self) -> None:
        grid = [0.05, 0.3, 0.55, 0.8, 0.95]
        for x in grid:
            for y in grid:
                a, b = float(self.eval(x, y)), float(self.eval(y, x))
                if not (0.0 <= a <= 1.0):
                    raise InputError(f"kernel value {a} at ({x},{y}) outside [0,1]")
                if abs(a - b) > 1e-9:
                    raise InputError(f"kernel asymmetric at ({x},{y}): {a} vs {b}")

    def values(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        try:
            out = np.asarray(self.eval(xs, ys), dtype=float)
            if out.shape == xs.shape:
                return out
        except Exception:
            pass
        return np.array([self.eval(float(a), float(b)) for a, b in zip(xs, ys)])


def boys_girls(theta: Number, p: Number, p_prime: Number, p_dblprime: Number) -> StepGraphon:
    """Two-type kernel: within-type densities p and p', cross density p''.

    Degenerate theta in {0,1} collapses to a single block.
    """
    th, a, b, c = (to_fraction(x) for x in (theta, p, p_prime, p_dblprime))
    for name, val in (("theta", th), ("p", a), ("p_prime", b), ("p_dblprime", c)):
        if not 0 <= val <= 1:
            raise InputError(f"{name}={float(val)} outside [0,1]")
    if th == 1:
        return StepGraphon((Fraction(1),), ((a,),))
    if th == 0:
        return StepGraphon((Fraction(1),), ((b,),))
    return StepGraphon((th, 1 - th), ((a, c), (c, b)))


def graph_as_graphon(g: LabelledGraph) -> StepGraphon:
    """Adjacency-matrix kernel: uniform blocks, 0/1 values; has the same
    density t(F, .) as g for every pattern F."""
    mu = tuple(Fraction(1, g.n) for _ in range(g.n))
    w = tuple(
        tuple(Fraction(1 if g.rows[i] >> j & 1 else 0) for j in range(g.n)) for i in range(g.n)
    )
    return StepGraphon(mu, w)


def exact_density(f: GraphLike, w: StepGraphon) -> Fraction:
    """Exact pattern density of the step kernel: the block-assignment sum
    of mu-weights times edge factors, in rational arithmetic."""
    fl = _as_labelled(f)
    _check_pattern(fl)
    k, m = fl.n, w.m
    if m**k > TERM_CAP:
        raise CapacityError(f"{m}^{k} assignment terms exceed cap {TERM_CAP}")
    order = _search_order(fl.rows)
    adj_pred = [[e for e in range(d) if fl.rows[order[d]] >> order[e] & 1] for d in range(k)]
    mu, mat = w.mu, w.w
    assigned = [0] * k

    def rec(d: int, weight: Fraction) -> Fraction:
        if d == k:
            return weight
        total = Fraction(0)
        for b in range(m):
            wgt = weight * mu[b]
            for e in adj_pred[d]:
                wgt *= mat[assigned[e]][b]
                if not wgt:
                    break
            if wgt:
                assigned[d] = b
                total += rec(d + 1, wgt)
        return total

    return rec(0, Fraction(1))


def _pair_probs(w: StepGraphon | GeneralGraphon, latents: np.ndarray, iu: np.ndarray, ju: np.ndarray) -> np.ndarray:
    if isinstance(w, StepGraphon):
        return w.w_floats()[latents[iu], latents[ju]]
    return w.values(latents[iu], latents[ju])


def _draw_latents(w: StepGraphon | GeneralGraphon, n: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(w, StepGraphon):
        return rng.choice(w.m, size=n, p=w.mu_floats())
    return rng.random(n)


def sample_w_random(w: StepGraphon | GeneralGraphon, n: int, rng: np.random.Generator) -> LabelledGraph:
    """G(n, W): iid latent labels, then conditionally independent edges."""
    if n < 1:
        raise InputError("n must be >= 1")
    latents = _draw_latents(w, n, rng)
    iu, ju = np.triu_indices(n, k=1)
    probs = _pair_probs(w, latents, iu, ju)
    bits = rng.random(len(iu)) < probs
    a = np.zeros((n, n), dtype=bool)
    a[iu[bits], ju[bits]] = True
    a |= a.T
    return graph_from_bool_matrix(a)


def mc_density_product_sum(
    f: GraphLike, w: StepGraphon | GeneralGraphon, count: int, rng: np.random.Generator
) -> float:
    """Sum over iid uniform tuples of the product of kernel values along
    f's edges; chunk-mergeable core of mc_density."""
    fl = _as_labelled(f)
    _check_pattern(fl)
    latents = (
        rng.choice(w.m, size=(count, fl.n), p=w.mu_floats())
        if isinstance(w, StepGraphon)
        else rng.random((count, fl.n))
    )
    wf = w.w_floats() if isinstance(w, StepGraphon) else None
    prod = np.ones(count)
    for u, v in fl.edges():
        xi, xj = latents[:, u - 1], latents[:, v - 1]
        prod *= wf[xi, xj] if wf is not None else w.values(xi, xj)
    return float(prod.sum())


def mc_density(
    f: GraphLike,
    w: StepGraphon | GeneralGraphon,
    samples: int,
    rng: np.random.Generator,
    alpha: float = 0.01,
) -> DensityEstimate:
    """Monte Carlo quadrature of the density integral: the average over iid
    uniform tuples of the product of kernel values along f's edges."""
    if samples < 1:
        raise InputError("samples must be >= 1")
    total = mc_density_product_sum(f, w, samples, rng)
    return DensityEstimate(total / samples, samples, hoeffding_halfwidth(samples, alpha), alpha)


@dataclass(frozen=True)
class BlockMap:
    """Measure-preserving block refinement/relabelling.

    Each entry (source_block, measure) defines one block of the refined
    graphon mapping into `source_block`. Against a given graphon the total
    measure assigned to each source block must equal that block's measure.
    """

    source_m: int
    assignments: tuple[tuple[int, Fraction], ...]

    def __post_init__(self) -> None:
        if self.source_m < 1:
            raise InputError("source block count must be >= 1")
        assignments = tuple((int(b), to_fraction(m)) for b, m in self.assignments)
        for b, meas in assignments:
            if not 0 <= b < self.source_m:
                raise InputError(f"source block {b} out of range")
            if meas <= 0:
                raise InputError("assigned measures must be positive")
        object.__setattr__(self, "assignments", assignments)

    @classmethod
    def permutation(cls, perm: Sequence[int], mu: Sequence[Fraction]) -> "BlockMap":
        """New block a maps to source block perm[a] (0-based)."""
        m = len(mu)
        if sorted(perm) != list(range(m)):
            raise InputError("not a permutation of block indices")
        return cls(m, tuple((perm[a], to_fraction(mu[perm[a]])) for a in range(m)))

    @classmethod
    def identity(cls, mu: Sequence[Fraction]) -> "BlockMap":
        return cls.permutation(list(range(len(mu))), mu)

    @classmethod
    def split(cls, mu: Sequence[Fraction], block: int, parts: Sequence[Number]) -> "BlockMap":
        """Split one block into the given positive measures (summing to it)."""
        m = len(mu)
        if not 0 <= block < m:
            raise InputError(f"block {block} out of range")
        part_meas = [to_fraction(x) for x in parts]
        if sum(part_meas) != to_fraction(mu[block]):
            raise InputError("split parts must sum to the block measure exactly")
        entries: list[tuple[int, Fraction]] = []
        for b in range(m):
            if b == block:
                entries += [(b, x) for x in part_meas]
            else:
                entries.append((b, to_fraction(mu[b])))
        return cls(m, tuple(entries))

    @classmethod
    def equal_refinement(cls, mu: Sequence[Fraction]) -> "BlockMap":
        """Refine all blocks to a common equal-measure grid."""
        meas = [to_fraction(x) for x in mu]
        lcm = 1
        for x in meas:
            lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
        cell = Fraction(1, lcm)
        entries = []
        for b, x in enumerate(meas):
            entries += [(b, cell)] * int(x / cell)
        return cls(len(meas), tuple(entries))


def pushforward(w: StepGraphon, bm: BlockMap) -> StepGraphon:
    """W composed with the block map; all pattern densities are unchanged."""
    if bm.source_m != w.m:
        raise InputError(f"block map expects {bm.source_m} source blocks, graphon has {w.m}")
    pushed = [Fraction(0)] * w.m
    for b, meas in bm.assignments:
        pushed[b] += meas
    if pushed != list(w.mu):
        raise InputError("block map is not measure-preserving for this graphon")
    mu = tuple(meas for _, meas in bm.assignments)
    mat = tuple(
        tuple(w.w[src_a][src_b] for src_b, _ in bm.assignments) for src_a, _ in bm.assignments
    )
    return StepGraphon(mu, mat)


@dataclass(frozen=True)
class SignedStepKernel:
    """Step kernel with values in [-1, 1]; typically a graphon difference."""

    mu: tuple[Fraction, ...]
    values: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        mu = _normalized_measures(self.mu)
        vals = tuple(tuple(to_fraction(x) for x in row) for row in self.values)
        m = len(mu)
        if len(vals) != m or any(len(row) != m for row in vals):
            raise InputError(f"value matrix must be {m}x{m}")
        if any(abs(x) > 1 for row in vals for x in row):
            raise InputError("signed kernel values must lie in [-1,1]")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "values", vals)

    @property
    def m(self) -> int:
        return len(self.mu)


def kernel_difference(w1: StepGraphon, w2: StepGraphon) -> SignedStepKernel:
    if w1.m != w2.m or w1.mu != w2.mu:
        raise InputError("kernels must share block structure to be subtracted")
    vals = tuple(
        tuple(w1.w[a][b] - w2.w[a][b] for b in range(w1.m)) for a in range(w1.m)
    )
    return SignedStepKernel(w1.mu, vals)


def cut_norm(d: SignedStepKernel) -> Fraction:
    """Exact cut norm: max over block-set pairs S,T of |sum mu_a mu_b d(a,b)|.

    Enumerates S (Gray code, one row update per step); for fixed S the
    optimal T collects the positive or the negative column sums, so the
    inner maximisation is closed-form. Equivalent to the full S,T search.
    """
    m = d.m
    if m > CUT_NORM_CAP:
        raise CapacityError(f"cut norm capped at {CUT_NORM_CAP} blocks, got {m}")
    q = [[d.mu[a] * d.mu[b] * d.values[a][b] for b in range(m)] for a in range(m)]
    col = [Fraction(0)] * m
    best = Fraction(0)
    prev_gray = 0
    for i in range(1, 1 << m):
        gray = i ^ (i >> 1)
        flipped = (gray ^ prev_gray).bit_length() - 1
        sign = 1 if gray >> flipped & 1 else -1
        row = q[flipped]
        for b in range(m):
            col[b] += row[b] if sign > 0 else -row[b]
        pos = sum((c for c in col if c > 0), Fraction(0))
        neg = -sum((c for c in col if c < 0), Fraction(0))
        best = max(best, pos, neg)
        prev_gray = gray
    return best


def _measure_preserving_perms(mu: Sequence[Fraction]) -> Sequence[tuple[int, ...]]:
    m = len(mu)
    return [p for p in itertools.permutations(range(m)) if all(mu[p[a]] == mu[a] for a in range(m))]


def cut_distance_upper(w1: StepGraphon, w2: StepGraphon) -> Fraction:
    """Upper bound on the cut distance: min cut norm of w1 - w2 over block
    permutations. Exact whenever an optimal overlay is a permutation."""
    if w1.m != w2.m or w1.mu != w2.mu:
        raise InputError("cut distance needs matching block counts and measures")
    if w1.m > CUT_DIST_CAP:
        raise CapacityError(f"cut distance capped at {CUT_DIST_CAP} blocks, got {w1.m}")
    best: Fraction | None = None
    for perm in _measure_preserving_perms(w1.mu):
        permuted = StepGraphon(
            w1.mu, tuple(tuple(w2.w[perm[a]][perm[b]] for b in range(w2.m)) for a in range(w2.m))
        )
        val = cut_norm(kernel_difference(w1, permuted))
        if best is None or val < best:
            best = val
        if best == 0:
            break
    assert best is not None
    return best


def read_step_graphon(path: str) -> StepGraphon:
    with io.open(path, "r", encoding="ascii") as fh:
        return StepGraphon.from_text(fh.read())


def write_step_graphon(w: StepGraphon, path: str) -> None:
    with io.open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(w.to_text())
