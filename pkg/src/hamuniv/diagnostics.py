"""Lower-bound diagnostics: the rainbow first-moment count and the half-isolated vertex event."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

MAX_EXACT_N = 4


@dataclass(frozen=True)
class RainbowCount:
    log_value: float
    value: float | None  # None when exp overflows

    def __iter__(self):
        return iter((self.log_value, self.value))


def expected_rainbow_count(n: int, p: float) -> RainbowCount:
    """Expected number of Hamilton cycles with a fixed rainbow pattern, ``n! p^n``, in log space."""
    if n < 1:
        raise ValueError("n must be positive")
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    log_fact = math.fsum(math.log(k) for k in range(2, n + 1))
    log_val = log_fact + n * math.log(p)
    value = None
    if log_val < 709:
        # direct product is exact for dyadic p and small n
        value = float(math.factorial(n)) * p**n if n <= 170 else math.exp(log_val)
    return RainbowCount(log_val, value)


def _isolated_mask_distribution(n: int, p: Fraction) -> dict[int, Fraction]:
    """Distribution of the set of isolated vertices of one G(n, p) layer."""
    pairs = list(itertools.combinations(range(n), 2))
    dist: dict[int, Fraction] = {}
    for present in itertools.product((False, True), repeat=len(pairs)):
        prob = Fraction(1)
        touched = 0
        for (u, v), on in zip(pairs, present):
            if on:
                prob *= p
                touched |= 1 << u | 1 << v
            else:
                prob *= 1 - p
        if prob:
            iso = ((1 << n) - 1) & ~touched
            dist[iso] = dist.get(iso, 0) + prob
    return dist


def half_isolated_exact(n: int, p) -> Fraction:
    """Exact probability that some vertex is isolated in more than ``n/2`` of ``n`` independent layers."""
    if n > MAX_EXACT_N:
        raise ValueError(f"exact mode supports n <= {MAX_EXACT_N}")
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    layer = _isolated_mask_distribution(n, p)
    # state: per-vertex isolation counts, capped once past the threshold
    cap = n // 2 + 1
    states: dict[tuple[int, ...], Fraction] = {(0,) * n: Fraction(1)}
    for _ in range(n):
        nxt: dict[tuple[int, ...], Fraction] = {}
        for st, pr in states.items():
            for iso, q in layer.items():
                key = tuple(min(cap, c + (iso >> v & 1)) for v, c in enumerate(st))
                nxt[key] = nxt.get(key, 0) + pr * q
        states = nxt
    return sum((pr for st, pr in states.items() if max(st) >= cap), Fraction(0))


def half_isolated_mc(n: int, p: float, trials: int = 100_000, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo estimate and its standard error."""
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, 1)
    inc = np.zeros((len(iu[0]), n), dtype=bool)
    inc[np.arange(len(iu[0])), iu[0]] = True
    inc[np.arange(len(iu[0])), iu[1]] = True
    hits = 0
    chunk = max(1, min(trials, 2_000_000 // max(1, n * len(iu[0]))))
    done = 0
    while done < trials:
        b = min(chunk, trials - done)
        edges = rng.random((b, n, len(iu[0]))) < p
        touched = (edges.astype(np.int32) @ inc.astype(np.int32)) > 0  # (b, layers, n)
        counts = (~touched).sum(axis=1)
        hits += int((counts > n / 2).any(axis=1).sum())
        done += b
    est = hits / trials
    return est, math.sqrt(est * (1 - est) / trials)


def half_isolated_probability(n: int, p, mode: str = "exact", trials: int = 100_000, seed: int = 0):
    if mode == "exact":
        return half_isolated_exact(n, p)
    if mode == "mc":
        return half_isolated_mc(n, float(p), trials, seed)
    raise ValueError(f"unknown mode {mode!r}")


DIAG_HEADER = "n,p,log_expected_rainbow,expected_rainbow,half_isolated,half_isolated_stderr"


def diag_lower_bounds(n: int, p_grid, mode: str | None = None, trials: int = 100_000, seed: int = 0) -> list[str]:
    """One CSV row per grid point comparing the two lower-bound mechanisms."""
    mode = mode or ("exact" if n <= MAX_EXACT_N else "mc")
    rows = []
    for p in p_grid:
        rc = expected_rainbow_count(n, float(p))
        if mode == "exact":
            hi, se = half_isolated_exact(n, Fraction(p)), 0.0
            hi_s = f"{float(hi):.12g}"
        else:
            hi, se = half_isolated_mc(n, float(p), trials, seed)
            hi_s = f"{hi:.12g}"
        lin = "" if rc.value is None else f"{rc.value:.12g}"
        rows.append(f"{n},{float(p):g},{rc.log_value:.12g},{lin},{hi_s},{se:.6g}")
    return rows
