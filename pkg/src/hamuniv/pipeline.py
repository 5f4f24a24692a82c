"""End-to-end search for chi-colored Hamilton cycles: split, absorb, connect, verify."""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field

from .absorber import CoverConfig, CoverError, cover_set
from .core import (
    ColorPattern,
    EdgeOrderedCycle,
    GraphTuple,
    Params,
    check_colored_cycle,
    split_tuple,
)
from .expanders import max_bad_set_X
from .hamilton import MAX_CYCLE_DP, SizeBoundExceeded, colored_connector, exact_colored_hamilton_cycle

CHI_CLASSES = ("uniform", "bijection", "constant", "blocks")


@dataclass
class PipelineConfig:
    params: Params = field(default_factory=Params)
    p: float | None = None  # edge probability used for the split; estimated when None
    split: bool = True
    K: float = 2.0
    x_bound: int | None = None  # default max(1, n // 16)
    x_depth: int = 1
    connector: str = "auto"  # exact | colored-posa | auto
    budget: int = 200_000
    fallback: bool = True
    cover: CoverConfig | None = None


@dataclass(frozen=True)
class StageRecord:
    name: str
    status: str
    ms: float = 0.0
    detail: str = ""


@dataclass
class PipelineReport:
    stages: list[StageRecord] = field(default_factory=list)
    X: frozenset = frozenset()
    cycle: EdgeOrderedCycle | None = None
    order: tuple[int, ...] | None = None
    path_len: int = 0
    connector: str = ""
    via_fallback: bool = False

    @property
    def success(self) -> bool:
        return self.cycle is not None

    @property
    def stage_failed(self) -> str:
        return next((s.name for s in self.stages if s.status == "failed"), "")

    @property
    def runtime_ms(self) -> float:
        return sum(s.ms for s in self.stages)


def edge_density(t: GraphTuple) -> float:
    n = t.n
    pairs = n * (n - 1) // 2 * t.k
    return sum(len(t.edges(c)) for c in range(1, t.k + 1)) / pairs if pairs else 0.0


def _stage(report: PipelineReport, name: str, start: float, status: str, detail: str = "") -> None:
    report.stages.append(StageRecord(name, status, (time.perf_counter() - start) * 1000, detail))


def _union_rows(t: GraphTuple, colors) -> tuple[int, ...]:
    rows = [0] * t.n
    for c in set(colors):
        for v, r in enumerate(t.layer(c)):
            rows[v] |= r
    return tuple(rows)


def find_colored_cycle(t: GraphTuple, chi: ColorPattern, cfg: PipelineConfig | None = None) -> PipelineReport:
    """Look for a Hamilton cycle whose ``i``-th edge lies in layer ``chi(i)``; never returns an unverified cycle."""
    cfg = cfg or PipelineConfig()
    n = t.n
    if len(chi) != n:
        raise ValueError("pattern length must equal n")
    report = PipelineReport()
    seed = cfg.params.seed
    try:
        report_cycle = _constructive(t, chi, cfg, report, seed)
    except _StageFailure:
        report_cycle = None
    if report_cycle is None and cfg.fallback and n <= MAX_CYCLE_DP:
        t0 = time.perf_counter()
        res = exact_colored_hamilton_cycle(t, chi)
        _stage(report, "fallback", t0, res.status.value)
        if res.found:
            report_cycle = res.witness
            report.via_fallback = True
    if report_cycle is not None:
        cyc = EdgeOrderedCycle.from_vertices(report_cycle)
        if not check_colored_cycle(t, chi, cyc).ok:
            raise AssertionError("pipeline produced an invalid cycle")
        report.cycle, report.order = cyc, tuple(report_cycle)
    return report


class _StageFailure(Exception):
    pass


def _constructive(t, chi, cfg: PipelineConfig, report: PipelineReport, seed: int):
    n = t.n
    t0 = time.perf_counter()
    if cfg.split:
        p = cfg.p if cfg.p is not None else edge_density(t)
        G, H = split_tuple(t, min(1.0, max(0.0, p)), seed)
    else:
        G = H = t
    _stage(report, "split", t0, "ok")

    t0 = time.perf_counter()
    bound = cfg.x_bound if cfg.x_bound is not None else max(1, n // 16)
    aux = _union_rows(H, chi.assignment)
    X = max_bad_set_X(aux, cfg.K, bound, cfg.x_depth, t.vertices.R_mask).vertices
    report.X = X
    _stage(report, "bad-set", t0, "ok", f"|X|={len(X)}")

    t0 = time.perf_counter()
    try:
        cov = cover_set(G, chi, X, cfg.cover or CoverConfig.from_params(cfg.params))
    except (CoverError, ValueError) as exc:
        _stage(report, "cover", t0, "failed", str(exc))
        raise _StageFailure from exc
    P = cov.path
    report.path_len = len(P)
    _stage(report, "cover", t0, "ok", f"len={len(P)}")

    t0 = time.perf_counter()
    u, v = P[0], P[-1]
    interior = set(P[1:-1])
    rest = [x for x in range(n) if x not in interior]
    strategy = cfg.connector
    if strategy == "auto":
        strategy = "exact" if len(rest) <= MAX_CYCLE_DP else "colored-posa"
    report.connector = strategy
    try:
        res = colored_connector(H, chi, len(P), v, u, rest, strategy=strategy, budget=cfg.budget, seed=seed)
    except (SizeBoundExceeded, ValueError) as exc:
        _stage(report, "connector", t0, "failed", str(exc))
        raise _StageFailure from exc
    if not res.found:
        _stage(report, "connector", t0, "failed", res.status.value)
        raise _StageFailure
    _stage(report, "connector", t0, "ok")
    return tuple(P) + tuple(res.witness[1:-1])


# --------------------------------------------------------------------------
# universality stress


def sample_pattern(kind: str, n: int, k: int, rng: random.Random) -> ColorPattern:
    if kind == "uniform":
        a = [rng.randint(1, k) for _ in range(n)]
    elif kind == "bijection":
        if k < n:
            raise ValueError("bijections need at least n colors")
        a = rng.sample(range(1, k + 1), n)
    elif kind == "constant":
        a = [rng.randint(1, k)] * n
    elif kind == "blocks":
        # long monochromatic runs concentrate demand on few layers
        b = max(2, int(math.isqrt(n)))
        a = []
        while len(a) < n:
            a.extend([rng.randint(1, k)] * b)
        a = a[:n]
    else:
        raise ValueError(f"unknown pattern class {kind!r}")
    return ColorPattern(tuple(a), k=k)


@dataclass(frozen=True)
class StressRow:
    chi_class: str
    trials: int
    successes: int

    @property
    def fraction(self) -> float:
        return self.successes / self.trials

    @property
    def stderr(self) -> float:
        f = self.fraction
        return math.sqrt(f * (1 - f) / self.trials)

    def csv(self) -> str:
        return f"{self.chi_class},{self.trials},{self.successes},{self.fraction:.6f},{self.stderr:.6f}"


def universality_stress(t: GraphTuple, trials: int, seed: int = 0, classes=CHI_CLASSES,
                        cfg: PipelineConfig | None = None) -> list[StressRow]:
    """Run the pipeline on sampled patterns of each class; tabulate successes."""
    if trials < 1:
        raise ValueError("trials must be positive")
    cfg = cfg or PipelineConfig()
    rows = []
    for ci, kind in enumerate(classes):
        rng = random.Random(seed * 1_000_003 + ci)
        wins = 0
        for _ in range(trials):
            chi = sample_pattern(kind, t.n, t.k, rng)
            wins += find_colored_cycle(t, chi, cfg).success
        rows.append(StressRow(kind, trials, wins))
    return rows


STRESS_HEADER = "chi_class,trials,successes,fraction,stderr"
