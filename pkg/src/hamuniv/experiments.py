"""Seeded threshold sweeps with CSV output and persisted witnesses."""

from __future__ import annotations

import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import GraphTuple, Params, sample_tuple
from .hamilton import exact_colored_hamilton_cycle
from .io import format_pattern, format_tuple
from .pipeline import CHI_CLASSES, PipelineConfig, find_colored_cycle, sample_pattern

CSV_VERSION = 1
CSV_COLUMNS = "n,p,C,seed,chi_class,success,stage_failed,runtime_ms,path_len,connector_strategy"
STRATEGIES = ("exact", "pipeline", "pipeline-nofallback")


@dataclass
class ExperimentConfig:
    n_grid: list[int] = field(default_factory=lambda: [12])
    p_grid: list[float] = field(default_factory=list)
    c_grid: list[float] = field(default_factory=list)  # p = C ln n / n
    trials: int = 10
    sigma: int = 3
    epsilon: float = 1e-4
    strategy: str = "exact"
    chi_class: str = "uniform"
    seed: int = 0
    out: str = "sweep.csv"
    complete: bool = False  # ignore p and use complete layers
    witness_dir: str | None = None
    timing: bool = False

    def __post_init__(self):
        if not self.n_grid:
            raise ValueError("n grid is empty")
        if not self.p_grid and not self.c_grid:
            if not self.complete:
                raise ValueError("need a p grid or a C grid")
        if any(not 0 <= p <= 1 for p in self.p_grid):
            raise ValueError("p values must lie in [0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if self.chi_class not in CHI_CLASSES:
            raise ValueError(f"chi class must be one of {CHI_CLASSES}")

    def points(self) -> list[tuple[int, float, float | None]]:
        """Grid points ``(n, p, C)``; C-grid probabilities are clamped to 1."""
        pts = []
        for n in self.n_grid:
            if self.complete and not self.p_grid and not self.c_grid:
                pts.append((n, 1.0, None))
            for p in self.p_grid:
                pts.append((n, float(p), None))
            for c in self.c_grid:
                pts.append((n, min(1.0, c * math.log(n) / n), float(c)))
        return pts


_LIST_KEYS = {"n_grid": int, "p_grid": float, "c_grid": float}
_SCALAR_KEYS = {"trials": int, "sigma": int, "epsilon": float, "strategy": str, "chi_class": str,
                "seed": int, "out": str, "witness_dir": str}
_BOOL_KEYS = ("complete", "timing")


def parse_config(text: str) -> ExperimentConfig:
    """``key = value`` lines; lists are comma separated, ``#`` starts a comment."""
    kw = {}
    for ln in text.splitlines():
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        if "=" not in ln:
            raise ValueError(f"bad config line {ln!r}")
        key, val = (s.strip() for s in ln.split("=", 1))
        key = key.replace("-", "_")
        if key in _LIST_KEYS:
            kw[key] = [_LIST_KEYS[key](x) for x in val.split(",") if x.strip()]
        elif key in _SCALAR_KEYS:
            kw[key] = _SCALAR_KEYS[key](val)
        elif key in _BOOL_KEYS:
            kw[key] = val.lower() in ("1", "true", "yes", "on")
        else:
            raise ValueError(f"unknown config key {key!r}")
    return ExperimentConfig(**kw)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def trial_seed(seed: int, point: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, point, trial]).generate_state(1)[0])


@dataclass(frozen=True)
class TrialOutcome:
    row: str
    witness: tuple[int, ...] | None
    tuple_text: str
    chi_text: str


def run_trial(cfg: ExperimentConfig, point: int, trial: int) -> TrialOutcome:
    n, p, C = cfg.points()[point]
    s = trial_seed(cfg.seed, point, trial)
    t = GraphTuple.complete(n) if cfg.complete else sample_tuple(n, p, s)
    chi = sample_pattern(cfg.chi_class, n, n, random.Random(s))
    t0 = time.perf_counter()
    stage_failed, path_len, connector, witness = "", 0, "", None
    if cfg.strategy == "exact":
        res = exact_colored_hamilton_cycle(t, chi)
        witness = res.witness
        connector = "exact"
        if not res.found:
            stage_failed = "exact"
    else:
        pc = PipelineConfig(params=Params.derive(n, cfg.sigma, cfg.epsilon, seed=s % (2**31)), p=p,
                            fallback=cfg.strategy == "pipeline")
        rep = find_colored_cycle(t, chi, pc)
        witness, stage_failed, path_len, connector = rep.order, rep.stage_failed, rep.path_len, rep.connector
        if rep.via_fallback:
            connector = "fallback-exact"
        if witness is None and not stage_failed:
            stage_failed = "fallback"
    ms = f"{(time.perf_counter() - t0) * 1000:.3f}" if cfg.timing else ""
    c_s = "" if C is None else f"{C:g}"
    row = f"{n},{p:.6g},{c_s},{s},{cfg.chi_class},{str(witness is not None).lower()},{stage_failed},{ms},{path_len},{connector}"
    return TrialOutcome(row, witness, format_tuple(t), format_pattern(chi))


def _run(args):
    return run_trial(*args)


def sweep(cfg: ExperimentConfig, threads: int = 1) -> list[str]:
    """Run every (grid point, trial), write the CSV and witnesses, return the data rows."""
    jobs = [(cfg, i, j) for i in range(len(cfg.points())) for j in range(cfg.trials)]
    if threads > 1:
        with ProcessPoolExecutor(threads) as ex:
            outcomes = list(ex.map(_run, jobs, chunksize=8))
    else:
        outcomes = [_run(j) for j in jobs]
    out = Path(cfg.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    header = f"# hamuniv sweep csv v{CSV_VERSION}; log is natural; p = C ln n / n for C-grid rows\n{CSV_COLUMNS}\n"
    out.write_text(header + "".join(o.row + "\n" for o in outcomes))
    wdir = Path(cfg.witness_dir) if cfg.witness_dir else out.with_name(out.stem + "_witnesses")
    for (_, i, j), o in zip(jobs, outcomes):
        if o.witness is None:
            continue
        wdir.mkdir(parents=True, exist_ok=True)
        stem = wdir / f"point{i}_trial{j}"
        stem.with_suffix(".tuple").write_text(o.tuple_text)
        stem.with_suffix(".chi").write_text(o.chi_text)
        stem.with_suffix(".cycle").write_text(" ".join(map(str, o.witness)) + "\n")
    return [o.row for o in outcomes]


def success_fractions(rows: list[str]) -> dict[tuple[str, str], tuple[int, int]]:
    """(p, C) -> (successes, trials) from data rows."""
    out: dict[tuple[str, str], list[int]] = {}
    for r in rows:
        f = r.split(",")
        acc = out.setdefault((f[1], f[2]), [0, 0])
        acc[0] += f[5] == "true"
        acc[1] += 1
    return {k: (a, b) for k, (a, b) in out.items()}
