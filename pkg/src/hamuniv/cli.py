"""Command line interface.

Exit codes: 0 success, 1 verified absence or failure, 2 usage error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import math
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .absorber import CoverConfig, CoverError, cover_set
from .core import (
    ColoredPath,
    ColorPattern,
    EdgeOrderedCycle,
    GraphTuple,
    Params,
    PositionOverflow,
    check_colored_cycle,
    sample_tuple,
    verify_colored_path,
)
from .coupling import check_coupling_inequality, coupling_sweep, parse_family, parse_probabilities
from .diagnostics import DIAG_HEADER, diag_lower_bounds
from .expanders import (
    check_c_expander,
    check_color_expander,
    check_property_A,
    check_property_B,
    check_property_C,
    max_bad_colorset_W,
    max_bad_set_X,
)
from .experiments import CSV_COLUMNS, load_config, sweep
from .hamilton import InvariantViolation, Status, colored_connector, exact_colored_hamilton_cycle
from .io import format_pattern, format_tuple, read_pattern, read_tuple, read_vertex_set, read_witness, write_witness
from .pipeline import CHI_CLASSES, PipelineConfig, find_colored_cycle, sample_pattern

EXIT_OK, EXIT_ABSENT, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _pattern(args, t: GraphTuple) -> ColorPattern:
    return read_pattern(args.chi, k=t.k)


# --------------------------------------------------------------------------
# subcommands


def cmd_gen(args) -> int:
    if args.complete:
        t = GraphTuple.complete(args.n, args.k)
    else:
        if (args.p is None) == (args.C is None):
            raise UsageError("give exactly one of --p, --C or --complete")
        p = args.p if args.p is not None else min(1.0, args.C * math.log(args.n) / args.n)
        t = sample_tuple(args.n, p, args.seed, args.k)
    _emit(args, format_tuple(t))
    if args.chi_out:
        chi = sample_pattern(args.chi_class, t.n, t.k, random.Random(args.seed))
        Path(args.chi_out).write_text(format_pattern(chi))
    return EXIT_OK


def cmd_verify(args) -> int:
    t = read_tuple(args.tuple)
    chi = _pattern(args, t)
    order = read_witness(args.witness)
    if args.path:
        try:
            ok = verify_colored_path(t, chi, ColoredPath(tuple(order), args.start))
        except PositionOverflow as exc:
            raise UsageError(str(exc)) from exc
        _emit(args, f"path,{str(ok).lower()}\n")
    else:
        res = check_colored_cycle(t, chi, EdgeOrderedCycle.from_vertices(order))
        ok = res.ok
        _emit(args, f"cycle,{str(ok).lower()},{res.reason}\n")
    return EXIT_OK if ok else EXIT_ABSENT


def cmd_coupling(args) -> int:
    if args.sweep:
        s = coupling_sweep(args.max_ground, args.max_n, args.max_family)
        _emit(args, "instances,violations,monotonicity_violations,equal_cases\n"
                    f"{s.instances},{s.violations},{s.monotonicity_violations},{s.equal_cases}\n")
        return EXIT_OK if s.violations == 0 else EXIT_INVARIANT
    if not (args.family and args.probs and args.pattern):
        raise UsageError("coupling needs --family, --probs and --pattern (or --sweep)")
    fam = parse_family(Path(args.family).read_text())
    probs = parse_probabilities(Path(args.probs).read_text())
    chi = ColorPattern(tuple(int(x) for x in Path(args.pattern).read_text().split()))
    rep = check_coupling_inequality(fam, probs, chi)
    _emit(args, "single,multi,holds\n" + rep.csv_row() + "\n")
    return EXIT_OK if rep.holds else EXIT_INVARIANT


def cmd_expander(args) -> int:
    t = read_tuple(args.tuple)
    if args.kind == "color-expander":
        A = [(v, c) for v in range(t.n) for c in range(1, t.k + 1)]
        cert = check_color_expander(t, args.m, args.D, A, mode=args.mode, seed=args.seed)
    elif args.kind == "c-expander":
        cert = check_c_expander(t.layer(args.layer), args.C, mode=args.mode, seed=args.seed)
    elif args.kind == "property-A":
        cert = check_property_A(t, args.sigma, args.size_u, args.size_y, mode=args.mode, seed=args.seed)
    elif args.kind == "property-B":
        cert = check_property_B(t, args.size_w, args.size_u, mode=args.mode, seed=args.seed)
    elif args.kind == "property-C":
        cert = check_property_C(t, args.s_size, mode=args.mode, seed=args.seed)
    elif args.kind == "bad-X":
        bx = max_bad_set_X(t.layer(args.layer), args.K, args.bound, args.search_depth, t.vertices.R_mask)
        _emit(args, f"bad-X,K={args.K};bound={args.bound};depth={args.search_depth},{len(bx.vertices)}\n")
        if args.witness:
            write_witness(args.witness, sorted(bx.vertices))
        return EXIT_OK
    else:  # bad-W
        X = read_vertex_set(args.X) if args.X else frozenset()
        cap = args.cap if args.cap is not None else t.n // 3
        bw = max_bad_colorset_W(t, X, args.D, cap, args.search_depth)
        _emit(args, f"bad-W,D={args.D};cap={cap};depth={args.search_depth},{len(bw.pairs)}\n")
        if args.witness:
            Path(args.witness).write_text("".join(f"{v} {c}\n" for v, c in bw.pairs))
        return EXIT_OK
    _emit(args, cert.csv_row() + "\n")
    if args.witness and cert.witness is not None:
        Path(args.witness).write_text(repr(cert.witness) + "\n")
    return EXIT_OK if cert.verdict else EXIT_ABSENT


def cmd_cover(args) -> int:
    t = read_tuple(args.tuple)
    chi = _pattern(args, t)
    X = read_vertex_set(args.X)
    p = Params.derive(t.n, args.sigma, args.eps, seed=args.seed)
    cfg = CoverConfig.from_params(p, budget=args.budget)
    head = "n,|X|,success,stage,steps,path_len\n"
    try:
        res = cover_set(t, chi, X, cfg)
    except CoverError as exc:
        _emit(args, head + f"{t.n},{len(X)},false,{exc.stage},0,0\n")
        return EXIT_ABSENT
    write_witness(args.witness or f"{args.tuple}.path", res.path)
    _emit(args, head + res.csv_row(t.n, len(X)) + "\n")
    return EXIT_OK


def _posa_cycle(t, chi, budget, seed):
    """Close a heuristic path: start at 0, end at a layer-chi(n) neighbour of 0."""
    n = t.n
    for v in range(1, n):
        if not t.has_edge(chi[n], v, 0):
            continue
        res = colored_connector(t, chi, 1, 0, v, strategy="colored-posa", budget=budget, seed=seed)
        if res.found:
            return res.witness
    return None


def cmd_cycle(args) -> int:
    t = read_tuple(args.tuple)
    chi = _pattern(args, t)
    if args.strategy == "exact":
        res = exact_colored_hamilton_cycle(t, chi)
        order = res.witness
        status = res.status.value
    elif args.strategy == "pipeline":
        rep = find_colored_cycle(t, chi, PipelineConfig(params=Params.derive(t.n, seed=args.seed), split=not args.no_split))
        order = rep.order
        status = Status.FOUND.value if order else f"failed:{rep.stage_failed or 'fallback'}"
    else:
        order = _posa_cycle(t, chi, args.budget, args.seed)
        status = Status.FOUND.value if order else Status.GAVE_UP.value
    if order is not None:
        if not check_colored_cycle(t, chi, EdgeOrderedCycle.from_vertices(order)).ok:
            raise InvariantViolation("cycle witness failed verification")
        write_witness(args.witness or f"{args.tuple}.cycle", order)
    _emit(args, f"strategy,status\n{args.strategy},{status}\n")
    return EXIT_OK if order is not None else EXIT_ABSENT


def cmd_pipeline(args) -> int:
    rows = []
    if args.tuple:
        t = read_tuple(args.tuple)
        instances = [(t, _pattern(args, t), args.seed, "file", args.p, None)]
    else:
        if args.n is None or (args.p is None and args.C is None):
            raise UsageError("give --tuple/--chi or --n with --p or --C")
        p = args.p if args.p is not None else min(1.0, args.C * math.log(args.n) / args.n)
        instances = []
        for i in range(args.trials):
            s = args.seed + i
            t = sample_tuple(args.n, p, s)
            chi = sample_pattern(args.chi_class, args.n, args.n, random.Random(s))
            instances.append((t, chi, s, args.chi_class, p, args.C))
    wins = 0
    for t, chi, s, cls, p, C in instances:
        cfg = PipelineConfig(params=Params.derive(t.n, args.sigma, seed=s), p=p, split=not args.no_split,
                             fallback=not args.no_fallback, budget=args.budget)
        rep = find_colored_cycle(t, chi, cfg)
        wins += rep.success
        ms = f"{rep.runtime_ms:.3f}" if args.timing else ""
        p_s = "" if p is None else f"{p:.6g}"
        c_s = "" if C is None else f"{C:g}"
        conn = "fallback-exact" if rep.via_fallback else rep.connector
        rows.append(f"{t.n},{p_s},{c_s},{s},{cls},{str(rep.success).lower()},{rep.stage_failed},{ms},{rep.path_len},{conn}")
        if args.tuple and rep.order:
            write_witness(args.witness or f"{args.tuple}.cycle", rep.order)
    _emit(args, CSV_COLUMNS + "\n" + "".join(r + "\n" for r in rows))
    return EXIT_OK if wins else EXIT_ABSENT


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.out:
        cfg.out = args.out
    if args.seed_given:
        cfg.seed = args.seed
    cfg.timing = cfg.timing or args.timing
    rows = sweep(cfg, threads=args.threads)
    if not args.out and not args.quiet:
        sys.stdout.write(f"wrote {len(rows)} rows to {cfg.out}\n")
    return EXIT_OK


def cmd_diag(args) -> int:
    grid = [float(Fraction(x)) for x in args.p_grid.split(",")]
    rows = diag_lower_bounds(args.n, grid, mode=args.mode, trials=args.trials, seed=args.seed)
    _emit(args, DIAG_HEADER + "\n" + "".join(r + "\n" for r in rows))
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # suppressed defaults let the flags appear before or after the subcommand
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS, help="output file (default: stdout)")

    ap = argparse.ArgumentParser(prog="hamuniv", description="Pattern-colored Hamilton cycles in graph tuples.",
                                 parents=[common])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, help=help_, parents=[common])

    g = add("gen", "sample a graph tuple")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, default=None, help="number of layers (default n)")
    g.add_argument("--p", type=float)
    g.add_argument("--C", type=float, help="p = C ln n / n")
    g.add_argument("--complete", action="store_true")
    g.add_argument("--chi-out", help="also write a sampled pattern here")
    g.add_argument("--chi-class", choices=CHI_CLASSES, default="uniform")
    g.set_defaults(func=cmd_gen)

    v = add("verify", "check a cycle or path witness")
    v.add_argument("--tuple", required=True)
    v.add_argument("--chi", required=True)
    v.add_argument("--witness", required=True)
    v.add_argument("--path", action="store_true", help="witness is a path, not a cycle")
    v.add_argument("--start", type=int, default=1, help="position of the path's first edge")
    v.set_defaults(func=cmd_verify)

    c = add("coupling", "exact coupling inequality check")
    c.add_argument("--family")
    c.add_argument("--probs")
    c.add_argument("--pattern")
    c.add_argument("--sweep", action="store_true", help="run the exhaustive small-case sweep")
    c.add_argument("--max-ground", type=int, default=3)
    c.add_argument("--max-n", type=int, default=3)
    c.add_argument("--max-family", type=int, default=4)
    c.set_defaults(func=cmd_coupling)

    e = add("expander", "expansion certificates and bad sets")
    e.add_argument("--tuple", required=True)
    e.add_argument("--kind", required=True,
                   choices=["color-expander", "c-expander", "property-A", "property-B", "property-C", "bad-X", "bad-W"])
    e.add_argument("--m", type=int, default=1)
    e.add_argument("--D", type=int, default=2)
    e.add_argument("--C", type=float, default=2.0)
    e.add_argument("--K", type=float, default=2.0)
    e.add_argument("--bound", type=int, default=2)
    e.add_argument("--cap", type=int, default=None)
    e.add_argument("--layer", type=int, default=1)
    e.add_argument("--sigma", type=int, default=2)
    e.add_argument("--size-u", type=int, default=1)
    e.add_argument("--size-y", type=int, default=1)
    e.add_argument("--size-w", type=int, default=1)
    e.add_argument("--s-size", type=int, default=2)
    e.add_argument("--X")
    e.add_argument("--mode", default="auto", choices=["auto", "exhaustive", "sampled"])
    e.add_argument("--search-depth", type=int, default=1)
    e.add_argument("--witness")
    e.set_defaults(func=cmd_expander)

    cv = add("cover", "cover a vertex set by a chi-colored path")
    cv.add_argument("--tuple", required=True)
    cv.add_argument("--chi", required=True)
    cv.add_argument("--X", required=True)
    cv.add_argument("--sigma", type=int, default=3)
    cv.add_argument("--eps", type=float, default=1e-4)
    cv.add_argument("--budget", type=int, default=10_000)
    cv.add_argument("--witness")
    cv.set_defaults(func=cmd_cover)

    cy = add("cycle", "find a chi-colored Hamilton cycle")
    cy.add_argument("--tuple", required=True)
    cy.add_argument("--chi", required=True)
    cy.add_argument("--strategy", choices=["exact", "pipeline", "posa"], default="exact")
    cy.add_argument("--no-split", action="store_true")
    cy.add_argument("--budget", type=int, default=200_000)
    cy.add_argument("--witness")
    cy.set_defaults(func=cmd_cycle)

    pl = add("pipeline", "run the split/cover/connect pipeline")
    pl.add_argument("--tuple")
    pl.add_argument("--chi")
    pl.add_argument("--n", type=int)
    pl.add_argument("--p", type=float)
    pl.add_argument("--C", type=float)
    pl.add_argument("--trials", type=int, default=1)
    pl.add_argument("--chi-class", choices=CHI_CLASSES, default="uniform")
    pl.add_argument("--sigma", type=int, default=3)
    pl.add_argument("--budget", type=int, default=200_000)
    pl.add_argument("--no-split", action="store_true")
    pl.add_argument("--no-fallback", action="store_true")
    pl.add_argument("--timing", action="store_true", help="fill runtime_ms (breaks byte-identical reruns)")
    pl.add_argument("--witness")
    pl.set_defaults(func=cmd_pipeline)

    sw = add("sweep", "threshold sweep from a key = value config file")
    sw.add_argument("--config", required=True)
    sw.add_argument("--timing", action="store_true")
    sw.add_argument("--quiet", action="store_true")
    sw.set_defaults(func=cmd_sweep)

    d = add("diag", "lower-bound diagnostics")
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--p-grid", required=True, help="comma separated, fractions allowed")
    d.add_argument("--mode", choices=["exact", "mc"], default=None)
    d.add_argument("--trials", type=int, default=100_000)
    d.set_defaults(func=cmd_diag)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    args.seed_given = hasattr(args, "seed")
    args.seed = getattr(args, "seed", 0)
    args.threads = getattr(args, "threads", 1)
    args.out = getattr(args, "out", None)
    try:
        return args.func(args)
    except (UsageError, ValueError, FileNotFoundError) as exc:
        print(f"hamuniv {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvariantViolation, AssertionError) as exc:
        print(f"hamuniv {args.command}: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
