"""Exact and Monte Carlo oracles for the shared-set vs independent-sets hit probability.

A family of ordered n-tuples over ``E + {STAR}`` is *hit* by a product of sets
when some tuple has each coordinate in the matching set; ``STAR`` lies in every
set. The coupling inequality says that the product of one shared random set
``S0 x ... x S0`` is never more likely to be hit than ``S_chi(1) x ... x S_chi(n)``
built from independent copies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .core import ColorPattern, GraphTuple, edge_ordered_cycles


class _Star:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "*"

    def __reduce__(self):
        return (_Star, ())


STAR = _Star()


class EnumerationBoundExceeded(ValueError):
    pass


@dataclass(frozen=True)
class TupleFamily:
    ground_set: tuple[Hashable, ...]
    n: int
    tuples: frozenset[tuple]

    def __post_init__(self):
        object.__setattr__(self, "ground_set", tuple(self.ground_set))
        object.__setattr__(self, "tuples", frozenset(tuple(f) for f in self.tuples))
        ground = set(self.ground_set)
        if len(ground) != len(self.ground_set):
            raise ValueError("duplicate ground-set element")
        if STAR in ground:
            raise ValueError("STAR cannot be a ground-set element")
        for f in self.tuples:
            if len(f) != self.n:
                raise ValueError(f"tuple {f} has length {len(f)}, expected {self.n}")
            real = [x for x in f if x is not STAR]
            if any(x not in ground for x in real):
                raise ValueError(f"tuple {f} uses an element outside the ground set")
            if len(set(real)) != len(real):
                raise ValueError(f"tuple {f} repeats an element")

    def index(self) -> dict:
        return {e: i for i, e in enumerate(self.ground_set)}


def uniform_probabilities(ground_set: Iterable[Hashable], p) -> dict:
    p = Fraction(p)
    return {e: p for e in ground_set}


def _check_probs(fam: TupleFamily, probs: Mapping) -> list[Fraction]:
    out = []
    for e in fam.ground_set:
        q = Fraction(probs[e])
        if not 0 <= q <= 1:
            raise ValueError(f"probability {q} for {e!r} outside [0, 1]")
        out.append(q)
    return out


def exact_hit_probability_single(fam: TupleFamily, probs: Mapping) -> Fraction:
    """Sum over all ``2^|E|`` outcomes of ``S'_0`` the weight of those that hit ``fam``."""
    m = len(fam.ground_set)
    if m > 12:
        raise EnumerationBoundExceeded(f"|E|={m} exceeds 12")
    ps = _check_probs(fam, probs)
    idx = fam.index()
    reqs = {sum(1 << idx[x] for x in f if x is not STAR) for f in fam.tuples}
    outcomes = [(0, Fraction(1))]
    for i, q in enumerate(ps):
        outcomes = [o for mask, w in outcomes for o in ((mask, w * (1 - q)), (mask | 1 << i, w * q))]
    total = Fraction(0)
    for mask, w in outcomes:
        if w and any(r & ~mask == 0 for r in reqs):
            total += w
    return total


def _minimal(reqs: Iterable[int]) -> frozenset[int]:
    ordered = sorted(set(reqs), key=int.bit_count)
    kept: list[int] = []
    for r in ordered:
        if not any(k & ~r == 0 for k in kept):
            kept.append(r)
    return frozenset(kept)


@lru_cache(maxsize=1 << 18)
def _expand(state: frozenset[int], ps: tuple[Fraction, ...]) -> Fraction:
    if 0 in state:
        return Fraction(1)
    if not state:
        return Fraction(0)
    union = 0
    for r in state:
        union |= r
    b = (union & -union).bit_length() - 1
    bit = 1 << b
    q = ps[b]
    hit = _expand(_minimal(r & ~bit for r in state), ps) if q else 0
    miss = _expand(frozenset(r for r in state if not r & bit), ps) if q != 1 else 0
    return q * hit + (1 - q) * miss


def _conditioned_probability(reqs: Iterable[int], ps: Sequence[Fraction]) -> Fraction:
    """P(some requirement mask is fully present) with independent bits, by Shannon expansion."""
    return _expand(_minimal(reqs), tuple(ps))


def _multi_requirements(fam: TupleFamily, chi: ColorPattern):
    if len(chi) != fam.n:
        raise ValueError(f"pattern length {len(chi)} != tuple length {fam.n}")
    colors = sorted(set(chi.assignment))
    m = len(fam.ground_set)
    if m * len(colors) > 24:
        raise EnumerationBoundExceeded(f"|E| x colors = {m * len(colors)} exceeds 24")
    idx = fam.index()
    slot = {c: j for j, c in enumerate(colors)}
    reqs = []
    for f in fam.tuples:
        r = 0
        for pos, x in enumerate(f, start=1):
            if x is not STAR:
                r |= 1 << (slot[chi[pos]] * m + idx[x])
        reqs.append(r)
    return reqs, colors


def exact_hit_probability_multi(fam: TupleFamily, probs: Mapping, chi: ColorPattern) -> Fraction:
    """Exact hit probability of ``S_chi(1) x ... x S_chi(n)`` over the referenced independent sets."""
    ps = _check_probs(fam, probs)
    reqs, colors = _multi_requirements(fam, chi)
    return _conditioned_probability(reqs, ps * len(colors))


@dataclass(frozen=True)
class CouplingReport:
    single: Fraction
    multi: Fraction

    @property
    def holds(self) -> bool:
        return self.single <= self.multi

    def csv_row(self) -> str:
        return f"{self.single},{self.multi},{str(self.holds).lower()}"


def check_coupling_inequality(fam: TupleFamily, probs: Mapping, chi: ColorPattern) -> CouplingReport:
    return CouplingReport(exact_hit_probability_single(fam, probs), exact_hit_probability_multi(fam, probs, chi))


def hybrid_sequence(fam: TupleFamily, chi: ColorPattern, realization: Mapping[int, Iterable]) -> list[tuple[frozenset, ...]]:
    """Interpolate between ``(S'_0,...,S'_0)`` and ``(S'_chi(1),...,S'_chi(n))``.

    ``realization[0]`` is ``S'_0`` and ``realization[c]`` is ``S'_c``. In the
    ``i``-th tuple the first ``i`` ground elements follow the per-position sets
    and the rest follow ``S'_0``.
    """
    n = len(chi)
    sets = {c: frozenset(s) for c, s in realization.items()}
    for c in {0, *chi.assignment}:
        if c not in sets:
            raise ValueError(f"realization lacks set for color {c}")
    seq = []
    elems = fam.ground_set
    for i in range(len(elems) + 1):
        comps = []
        for k in range(1, n + 1):
            own = sets[chi[k]]
            comps.append(frozenset(e for j, e in enumerate(elems) if (e in own if j < i else e in sets[0])))
        seq.append(tuple(comps))
    return seq


def build_hamilton_family(base: GraphTuple, chi: ColorPattern) -> TupleFamily:
    """Edge-ordered Hamilton cycles of K_n with edges already in layer chi(i) replaced by STAR."""
    n = base.n
    if not 3 <= n <= 8:
        raise ValueError(f"n={n} outside 3..8")
    if len(chi) != n:
        raise ValueError("pattern length must equal n")
    ground = tuple((u, v) for u in range(n) for v in range(u + 1, n))
    present = [None] + [base.layer(chi[i]) for i in range(1, n + 1)]
    tuples = set()
    for cyc in edge_ordered_cycles(n):
        tuples.add(tuple(STAR if present[i][e[0]] >> e[1] & 1 else e for i, e in enumerate(cyc, start=1)))
    return TupleFamily(ground, n, frozenset(tuples))


def monte_carlo_hit_probability(
    fam: TupleFamily, probs: Mapping, chi: ColorPattern | None, trials: int, seed: int
) -> tuple[float, float]:
    """Frequency estimate and binomial standard error; ``chi=None`` samples the shared-set side."""
    if trials < 1:
        raise ValueError("trials must be positive")
    ps = np.array([float(q) for q in _check_probs(fam, probs)])
    m = len(ps)
    idx = fam.index()
    colors = [0] if chi is None else sorted(set(chi.assignment))
    slot = {c: j for j, c in enumerate(colors)}
    rng = np.random.default_rng(seed)
    sample = rng.random((trials, m * len(colors))) < np.tile(ps, len(colors))
    hit = np.zeros(trials, dtype=bool)
    for f in fam.tuples:
        cols = [slot[0 if chi is None else chi[pos]] * m + idx[x] for pos, x in enumerate(f, start=1) if x is not STAR]
        hit |= sample[:, cols].all(axis=1) if cols else True
    est = float(hit.mean())
    return est, float(np.sqrt(est * (1 - est) / trials))


# --------------------------------------------------------------------------
# exhaustive sweep


def valid_tuples(ground: Sequence, n: int) -> list[tuple]:
    symbols = [STAR, *ground]
    out = []
    for f in itertools.product(symbols, repeat=n):
        real = [x for x in f if x is not STAR]
        if len(real) == len(set(real)):
            out.append(f)
    return out


def all_patterns(n: int, k: int | None = None):
    k = n if k is None else k
    for a in itertools.product(range(1, k + 1), repeat=n):
        yield ColorPattern(a, k=k)


def pattern_kernel(chi: ColorPattern) -> tuple[int, ...]:
    """Relabel colors by first occurrence; independent sets make this a sufficient key."""
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(c, len(seen) + 1) for c in chi.assignment)


@dataclass
class SweepSummary:
    instances: int = 0
    violations: int = 0
    monotonicity_violations: int = 0
    equal_cases: int = 0


def coupling_sweep(
    max_ground: int = 3,
    max_n: int = 3,
    max_family: int = 4,
    p_grid: Sequence = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)),
) -> SweepSummary:
    """Check the inequality on every family of at most ``max_family`` tuples and every pattern."""
    p_grid = sorted(Fraction(p) for p in p_grid)
    summary = SweepSummary()
    for size_e in range(0, max_ground + 1):
        ground = tuple("abcdefghijkl"[:size_e])
        for n in range(1, max_n + 1):
            tuples = valid_tuples(ground, n)
            pats = list(all_patterns(n))
            kernels = {pattern_kernel(c): c for c in pats}
            for size_f in range(0, max_family + 1):
                for family in itertools.combinations(tuples, size_f):
                    fam = TupleFamily(ground, n, frozenset(family))
                    singles, multis = [], {}
                    for p in p_grid:
                        probs = uniform_probabilities(ground, p)
                        single = exact_hit_probability_single(fam, probs)
                        singles.append(single)
                        for key, rep in kernels.items():
                            multis.setdefault(key, []).append(exact_hit_probability_multi(fam, probs, rep))
                    for chi in pats:
                        vals = multis[pattern_kernel(chi)]
                        for single, multi in zip(singles, vals):
                            summary.instances += 1
                            if single > multi:
                                summary.violations += 1
                            elif single == multi:
                                summary.equal_cases += 1
                    for series in (singles, *multis.values()):
                        if any(a > b for a, b in zip(series, series[1:])):
                            summary.monotonicity_violations += 1
    return summary


# --------------------------------------------------------------------------
# file format


def _token(e) -> str:
    if isinstance(e, tuple):
        return "-".join(map(str, e))
    return str(e)


def format_family(fam: TupleFamily) -> str:
    lines = [f"{len(fam.ground_set)} {fam.n}", " ".join(_token(e) for e in fam.ground_set)]
    rows = sorted(" ".join("*" if x is STAR else _token(x) for x in f) for f in fam.tuples)
    return "\n".join(lines + rows) + "\n"


def parse_family(text: str) -> TupleFamily:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    size_e, n = map(int, lines[0].split())
    ground = tuple(lines[1].split()) if size_e else ()
    body = lines[2:] if size_e else lines[1:]
    if len(ground) != size_e:
        raise ValueError(f"header declares {size_e} elements, found {len(ground)}")
    tuples = frozenset(tuple(STAR if tok == "*" else tok for tok in ln.split()) for ln in body)
    return TupleFamily(ground, n, tuples)


def parse_probabilities(text: str) -> dict[str, Fraction]:
    out = {}
    for ln in text.splitlines():
        if ln.strip():
            tok, val = ln.split()
            out[tok] = Fraction(val)
    return out
