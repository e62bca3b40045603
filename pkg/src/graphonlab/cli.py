"""Command-line surface: one binary, deterministic output given a seed.

Subcommands: density, sample, converge, test-exchangeable, test-extreme,
cutdist, trace-martingale. Exit codes: 0 success, 1 rejected test
verdict, 2 input error, 3 capacity, 4 internal invariant violation.
Randomized commands are byte-reproducible for a fixed --seed regardless
of --threads.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import bipartite as bip
from . import directed as dg
from .densities import (
    DensityEstimate,
    DensityVector,
    TauPlus,
    hoeffding_halfwidth,
    mc_containment_hits,
    metric_d,
    sampling_bound_check,
    t,
    t_ind,
    t_inj,
    tau_plus,
)
from .errors import CapacityError, InputError, InvariantError
from .exact import fraction_to_decimal, to_fraction
from .exchangeable import (
    GraphSource,
    PatternPair,
    exchangeability_test,
    extremality_test,
    isomorphism_class,
    martingale_trace,
    prefix_law_empirical,
    prefix_law_exact,
)
from .graphon import (
    StepGraphon,
    cut_distance_upper,
    exact_density,
    mc_density_product_sum,
    read_step_graphon,
    sample_w_random,
)
from .graphs import enumerate_unlabelled, pair_bits_of, read_graph
from .rng import run_chunked, stream, thread_count

DEC = fraction_to_decimal


def _stem(path: str) -> str:
    return Path(path).stem


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="ascii") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def load_source(path: str) -> GraphSource:
    """Source file: 'wrandom FILE' or 'mixture' followed by 'WEIGHT FILE'
    lines. Kernel paths resolve relative to the source file."""
    base = Path(path).parent
    lines = [ln.strip() for ln in _read_text(path).splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise InputError(f"empty source file {path}")
    head = lines[0].split()
    if head[0] == "wrandom":
        if len(head) != 2 or len(lines) != 1:
            raise InputError("wrandom source takes exactly one kernel file")
        return GraphSource.w_random(read_step_graphon(str(base / head[1])))
    if head[0] == "mixture":
        parts = []
        for ln in lines[1:]:
            toks = ln.split()
            if len(toks) != 2:
                raise InputError(f"bad mixture line {ln!r}")
            parts.append((to_fraction(toks[0]), read_step_graphon(str(base / toks[1]))))
        if not parts:
            raise InputError("mixture source needs at least one component")
        return GraphSource.mixture(parts)
    raise InputError(f"unknown source kind {head[0]!r}")


def load_pairs(path: str) -> list[PatternPair]:
    """Pattern-pair file: one pair per line, 'u-v u-v ... | u-v ...'."""
    pairs = []
    for ln in _read_text(path).splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        halves = ln.split("|")
        if len(halves) != 2:
            raise InputError(f"pair line {ln!r} needs exactly one '|'")
        sides = []
        for half in halves:
            edges = []
            for tok in half.split():
                uv = tok.split("-")
                if len(uv) != 2:
                    raise InputError(f"bad edge token {tok!r}")
                edges.append((int(uv[0]), int(uv[1])))
            sides.append(tuple(edges))
        pairs.append(PatternPair(sides[0], sides[1]))
    if not pairs:
        raise InputError(f"no pattern pairs in {path}")
    return pairs


def _parse_grid(text: str) -> list[int]:
    try:
        grid = [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise InputError(f"bad grid {text!r}") from exc
    return grid


ROW_STRIDE = 1 << 20  # stream indices per CSV row; chunks never collide


def _mc_t_row(f, g, samples: int, seed: int, threads: int, row: int) -> DensityEstimate:
    hits = sum(
        run_chunked(
            lambda _i, count, gen: mc_containment_hits(f, g, count, gen),
            samples,
            seed,
            threads,
            stream_base=row * ROW_STRIDE,
        )
    )
    return DensityEstimate(hits / samples, samples, hoeffding_halfwidth(samples))


def _mc_density_row(f, w, samples: int, seed: int, threads: int, row: int) -> DensityEstimate:
    total = sum(
        run_chunked(
            lambda _i, count, gen: mc_density_product_sum(f, w, count, gen),
            samples,
            seed,
            threads,
            stream_base=row * ROW_STRIDE,
        )
    )
    return DensityEstimate(total / samples, samples, hoeffding_halfwidth(samples))


def cmd_density(args) -> tuple[list[str], int]:
    if not args.patterns:
        raise InputError("density needs at least one -F pattern file")
    if bool(args.hosts) == bool(args.kernel):
        raise InputError("density needs -G host files or a -W kernel, not both")
    mc = args.mc
    kind = args.kind
    lines = ["pattern_id,host_id,t,t_inj,t_ind,bound,bound_check"]
    if mc:
        lines[0] += ",hoeffding_halfwidth"
    row = 0
    threads = thread_count(args.threads)

    def emit(pid, hid, tv, tiv, tdv, bound, ok, halfwidth=None):
        cells = [pid, hid, DEC(tv), DEC(tiv), DEC(tdv), DEC(bound),
                 "bound_ok" if ok else "bound_violated"]
        if mc:
            cells.append("" if halfwidth is None else DEC(halfwidth))
        lines.append(",".join(cells))

    if kind == "simple":
        patterns = [(p, read_graph(p)) for p in args.patterns]
        if args.hosts:
            for hpath in args.hosts:
                host = read_graph(hpath)
                for ppath, pat in patterns:
                    tiv, tdv = t_inj(pat, host), t_ind(pat, host)
                    check = sampling_bound_check(pat, host)
                    if mc:
                        est = _mc_t_row(pat, host, mc, args.seed, threads, row)
                        gap = abs(to_fraction(est.point) - tiv)
                        emit(_stem(ppath), _stem(hpath), to_fraction(est.point), tiv, tdv,
                             check.bound, gap <= check.bound, est.confidence_halfwidth)
                    else:
                        emit(_stem(ppath), _stem(hpath), t(pat, host), tiv, tdv,
                             check.bound, check.ok)
                    row += 1
        else:
            w = read_step_graphon(args.kernel)
            for ppath, pat in patterns:
                law = prefix_law_exact(w, pat.n)
                tdv = law.probability(pat)
                if mc:
                    est = _mc_density_row(pat, w, mc, args.seed, threads, row)
                    tv = to_fraction(est.point)
                    emit(_stem(ppath), _stem(args.kernel), tv, tv, tdv, Fraction(0),
                         True, est.confidence_halfwidth)
                else:
                    tv = exact_density(pat, w)
                    emit(_stem(ppath), _stem(args.kernel), tv, tv, tdv, Fraction(0), True)
                row += 1
    elif kind == "bipartite":
        if mc:
            raise InputError("--mc is only available for simple graphs and kernels")
        patterns = [(p, bip.BipartiteGraph.from_text(_read_text(p))) for p in args.patterns]
        if args.hosts:
            for hpath in args.hosts:
                host = bip.BipartiteGraph.from_text(_read_text(hpath))
                for ppath, pat in patterns:
                    check = bip.bip_sampling_bound_check(pat, host)
                    emit(_stem(ppath), _stem(hpath), bip.bip_t(pat, host),
                         bip.bip_t_inj(pat, host), bip.bip_t_ind(pat, host),
                         check.bound, check.ok)
        else:
            w = bip.BipartiteKernel.from_text(_read_text(args.kernel))
            for ppath, pat in patterns:
                tv = bip.bip_exact_density(pat, w)
                emit(_stem(ppath), _stem(args.kernel), tv, tv,
                     bip.bip_exact_ind_density(pat, w), Fraction(0), True)
    else:  # directed
        if mc:
            raise InputError("--mc is only available for simple graphs and kernels")
        patterns = [(p, dg.DirectedGraph.from_text(_read_text(p))) for p in args.patterns]
        if args.hosts:
            for hpath in args.hosts:
                host = dg.DirectedGraph.from_text(_read_text(hpath))
                for ppath, pat in patterns:
                    tv, tiv = dg.directed_t(pat, host), dg.directed_t_inj(pat, host)
                    bound = Fraction(pat.n**2, 2 * host.n)
                    gap = abs(tv - tiv)
                    emit(_stem(ppath), _stem(hpath), tv, tiv,
                         dg.directed_t_ind(pat, host), bound, gap <= bound)
        else:
            w = dg.DirectedKernelQuintuple.from_text(_read_text(args.kernel))
            for ppath, pat in patterns:
                tv = dg.directed_t(pat, w)
                emit(_stem(ppath), _stem(args.kernel), tv, tv,
                     dg.directed_t_ind(pat, w), Fraction(0), True)
    return lines, 0


def cmd_sample(args) -> tuple[list[str], int]:
    rng = stream(args.seed, 0)
    if args.kind == "simple":
        w = read_step_graphon(args.kernel)
        g = sample_w_random(w, args.n, rng)
        text = g.to_text()
    elif args.kind == "bipartite":
        w = bip.BipartiteKernel.from_text(_read_text(args.kernel))
        if args.n2 is None:
            raise InputError("bipartite sampling needs --n2")
        text = bip.sample_bip_w_random(w, args.n, args.n2, rng).to_text()
    else:
        w = dg.DirectedKernelQuintuple.from_text(_read_text(args.kernel))
        text = dg.sample_directed(w, args.n, rng).to_text()
    return text.splitlines(), 0


def cmd_converge(args) -> tuple[list[str], int]:
    if not args.graphs:
        raise InputError("converge needs at least one -G graph file")
    enum = enumerate_unlabelled(args.max_pattern)
    if args.ref_graphon:
        w = read_step_graphon(args.ref_graphon)
        ref = TauPlus(
            DensityVector(enum, tuple(exact_density(f, w) for f in enum.graphs)), Fraction(0)
        )
        ref_id = _stem(args.ref_graphon)
    else:
        ref_path = args.ref if args.ref else args.graphs[-1]
        ref = tau_plus(read_graph(ref_path), enum)
        ref_id = _stem(ref_path)
    lines = [f"# reference: {ref_id}", "graph_id,d"]
    for path in args.graphs:
        emb = tau_plus(read_graph(path), enum)
        lines.append(f"{_stem(path)},{DEC(metric_d(emb, ref))}")
    return lines, 0


def cmd_test_exchangeable(args) -> tuple[list[str], int]:
    src = load_source(args.src)
    if args.samples:
        law = prefix_law_empirical(src, args.k, args.samples, stream(args.seed, 0))
    else:
        if src.kind != "w_random" or not isinstance(src.graphon, StepGraphon):
            raise InputError("exact mode needs a single step-graphon source")
        law = prefix_law_exact(src.graphon, args.k)
    verdict = exchangeability_test(law, args.alpha)
    lines = ["class_code,cells,count,probability"]
    classes = {}
    for g in sorted(law.support(), key=pair_bits_of):
        members = isomorphism_class(g)
        key = min(pair_bits_of(m) for m in members)
        if key in classes:
            continue
        classes[key] = members
        count = sum(law.counts.get(m, 0) for m in members) if law.is_empirical else ""
        prob = sum((law.probability(m) for m in members), Fraction(0))
        lines.append(f"{key},{len(members)},{count},{DEC(prob)}")
    p_txt = "" if verdict.p_min is None else format(verdict.p_min, ".6g")
    if verdict.consistent:
        lines.append(f"VERDICT consistent p_min={p_txt}")
        return lines, 0
    lines.append(f"VERDICT rejected p_min={p_txt} detail={verdict.detail!r}")
    return lines, 1


def cmd_test_extreme(args) -> tuple[list[str], int]:
    src = load_source(args.src)
    pairs = load_pairs(args.pairs)
    verdict = extremality_test(
        src, pairs, args.samples, args.alpha,
        seed=args.seed, threads=thread_count(args.threads),
    )
    lines = ["pair_id,p1,p2,p12,z,p_value"]
    for i, s in enumerate(verdict.pair_stats):
        lines.append(
            f"{i},{DEC(s.p1)},{DEC(s.p2)},{DEC(s.p12)},{format(s.z, '.6g')},{format(s.p_value, '.6g')}"
        )
    label = "extreme-consistent" if verdict.extreme_consistent else "non-extreme"
    lines.append(f"VERDICT {label} p_min={format(verdict.p_min, '.6g')}")
    return lines, 0 if verdict.extreme_consistent else 1


def cmd_cutdist(args) -> tuple[list[str], int]:
    w1 = read_step_graphon(args.kernel)
    w2 = read_step_graphon(args.kernel2)
    val = cut_distance_upper(w1, w2)
    return [f"METRIC cutdist_upper={DEC(val)}"], 0


def cmd_trace_martingale(args) -> tuple[list[str], int]:
    src = load_source(args.src)
    pattern = read_graph(args.pattern)
    grid = _parse_grid(args.grid)
    trace = martingale_trace(src, pattern, grid, stream(args.seed, 0))
    lines = ["n,t_ind"]
    lines += [f"{n},{DEC(x)}" for n, x in zip(grid, trace)]
    return lines, 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphonlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seeded=True):
        p.add_argument("-o", "--output", help="write the report here instead of stdout")
        if seeded:
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--threads", type=int, default=None,
                           help="worker cap; results do not depend on it")

    p = sub.add_parser("density", help="pattern densities against hosts or a kernel")
    p.add_argument("-F", dest="patterns", action="append", default=[], metavar="PATTERN")
    p.add_argument("-G", dest="hosts", action="append", default=[], metavar="HOST")
    p.add_argument("-W", dest="kernel", metavar="KERNEL")
    p.add_argument("--kind", choices=["simple", "bipartite", "directed"], default="simple")
    p.add_argument("--mc", "--samples", dest="mc", type=int, default=None, metavar="N",
                   help="Monte Carlo samples instead of exact t")
    common(p)
    p.set_defaults(fn=cmd_density)

    p = sub.add_parser("sample", help="draw one W-random graph")
    p.add_argument("-W", dest="kernel", required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--n2", type=int, default=None, help="second part size (bipartite)")
    p.add_argument("--kind", choices=["simple", "bipartite", "directed"], default="simple")
    common(p)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("converge", help="metric distance of graph embeddings to a reference")
    p.add_argument("-G", dest="graphs", action="append", default=[], metavar="GRAPH")
    p.add_argument("--ref", default=None, help="reference graph file (default: last -G)")
    p.add_argument("--ref-graphon", default=None, help="step-graphon reference instead")
    p.add_argument("--max-pattern", type=int, default=3,
                   help="enumeration depth; exact counting of dense 4/5-vertex "
                        "patterns is slow on hosts beyond a few hundred vertices")
    common(p, seeded=False)
    p.set_defaults(fn=cmd_converge)

    p = sub.add_parser("test-exchangeable", help="isomorphism-class homogeneity of a prefix law")
    p.add_argument("-src", dest="src", required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--samples", type=int, default=None,
                   help="empirical mode sample count (omit for exact mode)")
    p.add_argument("--alpha", type=float, default=0.01)
    common(p)
    p.set_defaults(fn=cmd_test_exchangeable)

    p = sub.add_parser("test-extreme", help="product-criterion extremality test")
    p.add_argument("-src", dest="src", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.01)
    common(p)
    p.set_defaults(fn=cmd_test_extreme)

    p = sub.add_parser("cutdist", help="cut-distance upper bound between step graphons")
    p.add_argument("-W", dest="kernel", required=True)
    p.add_argument("-W2", dest="kernel2", required=True)
    common(p, seeded=False)
    p.set_defaults(fn=cmd_cutdist)

    p = sub.add_parser("trace-martingale", help="induced-density trace along one nested prefix")
    p.add_argument("-src", dest="src", required=True)
    p.add_argument("-F", dest="pattern", required=True)
    p.add_argument("--grid", required=True, help="comma-separated prefix sizes")
    common(p)
    p.set_defaults(fn=cmd_trace_martingale)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        lines, code = args.fn(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 4
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
