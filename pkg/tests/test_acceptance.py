"""The ten acceptance criteria. Each test records one PASS/FAIL line."""

import filecmp
import math
import random
import time
from fractions import Fraction

import pytest

from hamuniv import cli
from hamuniv.absorber import CoverConfig, cover_is_valid, cover_set
from hamuniv.core import (
    ColorPattern,
    EdgeOrderedCycle,
    GraphTuple,
    Params,
    check_colored_cycle,
    count_edge_ordered_cycles,
    sample_tuple,
)
from hamuniv.coupling import TupleFamily, check_coupling_inequality, coupling_sweep, uniform_probabilities
from hamuniv.diagnostics import expected_rainbow_count, half_isolated_exact
from hamuniv.expanders import check_c_expander, check_color_expander
from hamuniv.experiments import ExperimentConfig, success_fractions, sweep
from hamuniv.fp import deficiency, empty_embedding, extend_leaf, rollback_leaf
from hamuniv.fp import ForestEmbedding, OrientedColoredForest
from hamuniv.hamilton import exact_colored_hamilton_cycle, hamilton_connected_check
from hamuniv.pipeline import PipelineConfig, find_colored_cycle, sample_pattern

from oracles import brute_colored_cycle, brute_good, naive_deficiency

pytestmark = pytest.mark.acceptance


def _cycle(n):
    return tuple((1 << (v - 1) % n) | (1 << (v + 1) % n) for v in range(n))


def _complete(n):
    full = (1 << n) - 1
    return tuple(full & ~(1 << v) for v in range(n))


def test_criterion_1_coupling_sweep(record):
    t0 = time.perf_counter()
    s = coupling_sweep(max_ground=3, max_n=3, max_family=4)
    dt = time.perf_counter() - t0
    ok = s.instances > 0 and s.violations == 0 and dt < 120
    record(1, ok, f"{s.instances} instances, {s.violations} violations, {dt:.1f}s")
    assert ok


def test_criterion_2_spot_values(record):
    checks = {f"|C(K{n})|=n!": count_edge_ordered_cycles(n) == math.factorial(n) for n in range(3, 7)}
    fam = TupleFamily(("a", "b"), 2, frozenset({("a", "b"), ("b", "a")}))
    rep = check_coupling_inequality(fam, uniform_probabilities(("a", "b"), Fraction(1, 2)), ColorPattern((1, 2), k=2))
    checks["coupling pair"] = (rep.single, rep.multi) == (Fraction(1, 4), Fraction(7, 16))
    checks["rainbow(4,1/2)"] = expected_rainbow_count(4, 0.5).value == 1.5
    checks["half-isolated boundary"] = all(
        half_isolated_exact(n, 0) == 1 and half_isolated_exact(n, 1) == 0 for n in (2, 3, 4)
    )
    bad = [k for k, v in checks.items() if not v]
    ok = not bad
    record(2, ok, f"{len(checks) - len(bad)}/{len(checks)} spot values" + (f", wrong: {bad}" if bad else ""))
    assert ok


def _random_embedding(rng):
    n = rng.randint(2, 8)
    k = rng.randint(1, 3)
    t = sample_tuple(n, rng.uniform(0.3, 1.0), rng.randrange(2**31), k)
    size = rng.randint(1, min(6, n))
    verts = rng.sample(range(n), size)
    phi = {0: verts[0]}
    edges = set()
    for w in range(1, size):
        phi[w] = verts[w]
        # hang w from an earlier vertex when some layer allows it
        opts = [(v, c) for v in range(w) for c in range(1, k + 1) if t.has_edge(c, phi[v], phi[w])]
        if opts and rng.random() < 0.8:
            v, c = rng.choice(opts)
            edges.add((v, w, c) if rng.random() < 0.5 else (w, v, c))
    forest = OrientedColoredForest(frozenset(phi), frozenset(edges))
    D = rng.randint(1, 4)
    return ForestEmbedding(forest, t, phi, 3, D, frozenset())


def test_criterion_3_submodularity(record):
    rng = random.Random(3)
    t0 = time.perf_counter()
    violations = mismatches = 0
    for _ in range(10_000):
        emb = _random_embedding(rng)
        universe = [(x, c) for x in range(emb.target.n) for c in range(1, emb.target.k + 1)]
        S = frozenset(a for a in universe if rng.random() < 0.4)
        T = frozenset(a for a in universe if rng.random() < 0.4)
        f = {name: deficiency(emb, Z) for name, Z in (("S", S), ("T", T), ("u", S | T), ("i", S & T))}
        if f["u"] + f["i"] > f["S"] + f["T"]:
            violations += 1
        if rng.random() < 0.05 and f["S"] != naive_deficiency(emb, S):
            mismatches += 1
    dt = time.perf_counter() - t0
    ok = violations == 0 and mismatches == 0 and dt < 60
    record(3, ok, f"10000 instances, {violations} violations, {mismatches} oracle mismatches, {dt:.1f}s")
    assert ok


def _extension_instance(rng):
    n = rng.randint(10, 12)
    k = rng.randint(1, 3)
    m, D = rng.choice([(1, 2), (1, 3), (2, 1), (2, 2), (3, 1), (3, 2)])
    t = sample_tuple(n, rng.uniform(0.8, 1.0), rng.randrange(2**31), k)
    universe = [(x, c) for x in range(n) for c in range(1, k + 1)]
    A = frozenset(rng.sample(universe, rng.randint(1, min(8, len(universe)))))
    return t, m, D, A


def test_criterion_4_extension_rollback(record):
    rng = random.Random(4)
    t0 = time.perf_counter()
    extensions = rollbacks = failures = 0
    while extensions < 1000:
        t, m, D, A = _extension_instance(rng)
        # preconditions: expander target, good start, forest small enough
        if not check_color_expander(t, 2 * m, 2 * D + 1, A).verdict:
            continue
        roots = sorted({x for x, _ in A})[: max(1, m * D - 1)]
        emb = empty_embedding(t, dict(enumerate(roots)), m, D, A)
        if not brute_good(emb):
            continue
        nxt = len(roots)
        while len(emb.phi) < m * D:
            opts = [(v, c) for v, x in sorted(emb.phi.items()) for c in range(1, t.k + 1)
                    if (x, c) in A and emb.forest.degree(v) <= D - 1]
            if not opts:
                break
            v, c = rng.choice(opts)
            try:
                new = extend_leaf(emb, v, nxt, c)
            except Exception:
                failures += 1
                break
            extensions += 1
            if not brute_good(new):
                failures += 1
                break
            emb, nxt = new, nxt + 1
            for _, b, _ in emb.forest.edges:
                if emb.forest.degree(b) == 1:
                    rollbacks += 1
                    failures += not brute_good(rollback_leaf(emb, b))
    dt = time.perf_counter() - t0
    ok = failures == 0 and dt < 300
    record(4, ok, f"{extensions} extensions, {rollbacks} rollbacks, {failures} failures, {dt:.1f}s")
    assert ok


def test_criterion_5_exact_vs_brute(record):
    rng = random.Random(5)
    t0 = time.perf_counter()
    disagree = bad_witness = found = 0
    for _ in range(500):
        n = rng.choice((5, 6, 7))
        k = rng.randint(1, n)
        t = sample_tuple(n, rng.uniform(0.3, 0.9), rng.randrange(2**31), k)
        chi = ColorPattern(tuple(rng.randint(1, k) for _ in range(n)), k=k)
        res = exact_colored_hamilton_cycle(t, chi)
        if res.found != brute_colored_cycle(t, chi):
            disagree += 1
        if res.found:
            found += 1
            if not check_colored_cycle(t, chi, EdgeOrderedCycle.from_vertices(res.witness)).ok:
                bad_witness += 1
    dt = time.perf_counter() - t0
    ok = disagree == 0 and bad_witness == 0 and dt < 120
    record(5, ok, f"500 instances ({found} positive), {disagree} disagreements, {bad_witness} bad witnesses, {dt:.1f}s")
    assert ok


def test_criterion_6_expander_instances(record):
    k8, c8, c4 = _complete(8), _cycle(8), _cycle(4)
    checks = {
        "K8 is a 2-expander": check_c_expander(k8, 2).verdict,
        "K8 Hamilton-connected": hamilton_connected_check(k8),
        "C8 not a 2-expander": not check_c_expander(c8, 2).verdict,
        "C4 not Hamilton-connected": not hamilton_connected_check(c4),
    }
    bad = [k for k, v in checks.items() if not v]
    ok = not bad
    record(6, ok, "; ".join(f"{k}={v}" for k, v in checks.items()))
    assert ok


def test_criterion_7_absorber(record):
    n, sigma = 64, 3
    p = min(1.0, 20 * math.log(n) / n)  # 1.2995, clamped: every layer is complete
    params = Params.derive(n, sigma)
    cfg = CoverConfig.from_params(params)
    t0 = time.perf_counter()
    wins = 0
    for seed in range(100):
        rng = random.Random(seed)
        t = sample_tuple(n, p, seed)
        X = frozenset(rng.sample(sorted(t.vertices.R), 5))
        chi = sample_pattern("uniform", n, n, rng)
        try:
            res = cover_set(t, chi, X, cfg)
        except Exception:
            continue
        wins += cover_is_valid(t, chi, X, res.path)
    dt = time.perf_counter() - t0
    ok = wins >= 90 and dt < 300
    record(7, ok, f"{wins}/100 verified covers at p={p:.3g}, {dt:.1f}s")
    assert ok


def test_criterion_8_pipeline_vs_exact(record):
    rng = random.Random(8)
    t0 = time.perf_counter()
    disagree = positive = constructive = 0
    for i in range(200):
        t = sample_tuple(12, 0.75, rng.randrange(2**31))
        chi = sample_pattern("uniform", 12, 12, rng)
        rep = find_colored_cycle(t, chi, PipelineConfig(params=Params.derive(12, seed=i), p=0.75))
        truth = exact_colored_hamilton_cycle(t, chi).found
        disagree += rep.success != truth
        positive += truth
        constructive += rep.success and not rep.via_fallback
    dt = time.perf_counter() - t0
    ok = disagree == 0 and dt < 300
    record(8, ok, f"200 instances ({positive} positive, {constructive} without fallback), {disagree} disagreements, {dt:.1f}s")
    assert ok


def test_criterion_9_threshold_trend(record, tmp_path):
    cfg = ExperimentConfig(n_grid=[12], c_grid=[0.2, 1, 4], trials=200, strategy="exact", seed=9,
                           out=str(tmp_path / "trend.csv"))
    t0 = time.perf_counter()
    fr = success_fractions(sweep(cfg))
    dt = time.perf_counter() - t0
    series = [fr[key] for key in sorted(fr, key=lambda k: float(k[1]))]
    fracs = [s / n for s, n in series]
    ses = [math.sqrt(f * (1 - f) / n) for f, (_, n) in zip(fracs, series)]
    ok = all(b >= a - 2 * math.hypot(sa, sb) for a, b, sa, sb in zip(fracs, fracs[1:], ses, ses[1:])) and dt < 600
    record(9, ok, "fractions " + ", ".join(f"{f:.3f}" for f in fracs) + f", {dt:.1f}s")
    assert ok


def _run_twice(tmp_path, name, argv_of):
    outs = []
    for r in (1, 2):
        d = tmp_path / f"{name}{r}"
        d.mkdir()
        code = cli.main(argv_of(d))
        outs.append((code, d))
    (c1, d1), (c2, d2) = outs
    cmp = filecmp.dircmp(d1, d2)
    files = sorted(p.name for p in d1.rglob("*") if p.is_file())
    same = c1 == c2 and not cmp.left_only and not cmp.right_only and files and all(
        (d1 / f).read_bytes() == (d2 / f).read_bytes() for f in (str(p.relative_to(d1)) for p in d1.rglob("*") if p.is_file())
    )
    return same


def test_criterion_10_determinism(record, tmp_path):
    tup = tmp_path / "t.tuple"
    chi = tmp_path / "chi.txt"
    cli.main(["--seed", "7", "--out", str(tup), "gen", "--n", "10", "--p", "0.8"])
    chi.write_text(" ".join(str(random.Random(1).randint(1, 10)) for _ in range(10)) + "\n")
    conf = tmp_path / "sweep.conf"
    conf.write_text("n_grid = 8\np_grid = 0.5, 0.9\ntrials = 3\nstrategy = pipeline\nseed = 2\n")
    X = tmp_path / "x.txt"
    X.write_text("7\n")
    wit = tmp_path / "w.cycle"
    cli.main(["--out", str(tmp_path / "exact.csv"), "cycle", "--tuple", str(tup), "--chi", str(chi),
              "--witness", str(wit)])
    commands = {
        "gen": lambda d: ["--seed", "7", "--out", str(d / "o"), "gen", "--n", "10", "--p", "0.7",
                          "--chi-out", str(d / "chi")],
        "verify": lambda d: ["--out", str(d / "o"), "verify", "--tuple", str(tup), "--chi", str(chi),
                             "--witness", str(wit)],
        "coupling": lambda d: ["--out", str(d / "o"), "coupling", "--sweep", "--max-ground", "2", "--max-n", "2",
                               "--max-family", "3"],
        "expander": lambda d: ["--seed", "5", "--out", str(d / "o"), "expander", "--tuple", str(tup),
                               "--kind", "color-expander", "--m", "2", "--D", "3", "--mode", "sampled",
                               "--witness", str(d / "w")],
        "cover": lambda d: ["--seed", "3", "--out", str(d / "o"), "cover", "--tuple", str(tup), "--chi", str(chi),
                            "--X", str(X), "--witness", str(d / "w")],
        "cycle": lambda d: ["--seed", "3", "--out", str(d / "o"), "cycle", "--tuple", str(tup), "--chi", str(chi),
                            "--strategy", "pipeline", "--witness", str(d / "w")],
        "pipeline": lambda d: ["--seed", "3", "--out", str(d / "o"), "pipeline", "--n", "10", "--p", "0.8",
                               "--trials", "3"],
        "sweep": lambda d: ["--out", str(d / "o.csv"), "sweep", "--config", str(conf)],
        "diag": lambda d: ["--seed", "1", "--out", str(d / "o"), "diag", "--n", "5", "--p-grid", "0.3,1/2",
                           "--trials", "2000"],
    }
    results = {name: _run_twice(tmp_path, name, argv) for name, argv in commands.items()}
    bad = [k for k, v in results.items() if not v]
    ok = not bad
    record(10, ok, f"{len(results) - len(bad)}/{len(results)} subcommands byte-identical" + (f", differing: {bad}" if bad else ""))
    assert ok
