"""Expansion certificates and maximal bad sets.

Exhaustive checks are proofs; sampled checks only ever report
"no violation found in k samples". A false verdict always carries a witness.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Sequence

from .core import ColorSet, GraphTuple, bits, mask_of

EXHAUSTIVE_SUBSET_CAP = 250_000


class ExhaustiveBoundExceeded(ValueError):
    pass


@dataclass(frozen=True)
class ExpanderCertificate:
    kind: str
    parameters: dict
    verdict: bool
    witness: object = None
    exhaustive: bool = True
    samples: int = 0

    @property
    def label(self) -> str:
        if not self.verdict:
            return "violation"
        if self.exhaustive:
            return "proof"
        return f"no violation found in {self.samples} samples"

    def csv_row(self) -> str:
        params = ";".join(f"{k}={v}" for k, v in sorted(self.parameters.items()))
        mode = "exhaustive" if self.exhaustive else "sampled"
        return f"{self.kind},{params},{mode},{str(self.verdict).lower()},{self.label}"


def color_neighborhood(t: GraphTuple, S: Iterable[tuple[int, int]], within: int | None = None) -> int:
    """Union of the per-color neighbourhoods ``N_{G_i}(u)`` over ``(u, i)`` in ``S``."""
    out = 0
    for v, c in S:
        out |= t.layers[c - 1][v]
    return out if within is None else out & within


def _subset_count(size: int, m: int) -> int:
    return sum(comb(size, k) for k in range(0, min(m, size) + 1))


def exhaustive_feasible(size: int, m: int) -> bool:
    return (size <= 20 and m <= 6) or _subset_count(size, m) <= EXHAUSTIVE_SUBSET_CAP


# --------------------------------------------------------------------------
# (m, D, A)-color expanders


def check_color_expander(
    t: GraphTuple,
    m: int,
    D: int,
    A: ColorSet | Iterable,
    mode: str = "exhaustive",
    samples: int = 2000,
    seed: int = 0,
    within: int | None = None,
) -> ExpanderCertificate:
    """Every ``S`` within ``A`` of size at most ``m`` has ``|N(S)| >= D|S|`` (neighbours restricted to ``within``)."""
    pairs = sorted(A.pairs if isinstance(A, ColorSet) else set(A))
    params = {"m": m, "D": D, "A": len(pairs)}
    nb = [color_neighborhood(t, [a], within) for a in pairs]
    if mode == "auto":
        mode = "exhaustive" if exhaustive_feasible(len(pairs), m) else "sampled"
    if mode == "exhaustive":
        if not exhaustive_feasible(len(pairs), m):
            raise ExhaustiveBoundExceeded(f"|A|={len(pairs)}, m={m} beyond exhaustive bound")
        for k in range(1, min(m, len(pairs)) + 1):
            for combo in itertools.combinations(range(len(pairs)), k):
                u = 0
                for i in combo:
                    u |= nb[i]
                if u.bit_count() < D * k:
                    return ExpanderCertificate("color-expander", params, False, tuple(pairs[i] for i in combo))
        return ExpanderCertificate("color-expander", params, True)
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    rng = random.Random(seed)
    checked = 0
    for i, a in enumerate(pairs):
        checked += 1
        if nb[i].bit_count() < D:
            return ExpanderCertificate("color-expander", params, False, (a,), exhaustive=False, samples=checked)
    # greedy attack from each singleton, then random subsets
    if m >= 2:
        for i in range(len(pairs)):
            chosen, u = [i], nb[i]
            while len(chosen) < min(m, len(pairs)):
                j = min((j for j in range(len(pairs)) if j not in chosen), key=lambda j: (u | nb[j]).bit_count())
                chosen.append(j)
                u |= nb[j]
                checked += 1
                if u.bit_count() < D * len(chosen):
                    return ExpanderCertificate("color-expander", params, False, tuple(pairs[x] for x in chosen),
                                               exhaustive=False, samples=checked)
            if checked > samples:
                break
        for _ in range(samples):
            k = rng.randint(2, min(m, len(pairs)))
            combo = rng.sample(range(len(pairs)), k)
            u = 0
            for j in combo:
                u |= nb[j]
            checked += 1
            if u.bit_count() < D * k:
                return ExpanderCertificate("color-expander", params, False, tuple(pairs[x] for x in sorted(combo)),
                                           exhaustive=False, samples=checked)
    return ExpanderCertificate("color-expander", params, True, exhaustive=False, samples=checked)


# --------------------------------------------------------------------------
# C-expanders (single graph)


def _external(G: Sequence[int], U: int) -> int:
    out = 0
    for v in bits(U):
        out |= G[v]
    return out & ~U


def check_c_expander(G: Sequence[int], C: float, mode: str = "auto", samples: int = 5000, seed: int = 0) -> ExpanderCertificate:
    """Both hypotheses: small sets expand by ``C``; sets of size ``n/2C`` are joined by an edge."""
    n = len(G)
    params = {"C": C, "n": n}
    if mode == "auto":
        mode = "exhaustive" if n <= 20 else "sampled"
    small = [k for k in range(1, n + 1) if k < n / (2 * C)]
    big = math.ceil(n / (2 * C))
    if mode == "exhaustive":
        if n > 20:
            raise ExhaustiveBoundExceeded(f"n={n} beyond exhaustive bound 20")
        for k in small:
            for U in itertools.combinations(range(n), k):
                if _external(G, mask_of(U)).bit_count() < C * k:
                    return ExpanderCertificate("c-expander", params, False, ("small-set", frozenset(U)))
        if 2 * big <= n:
            for U in itertools.combinations(range(n), big):
                um = mask_of(U)
                rest = ((1 << n) - 1) & ~um & ~_external(G, um)
                if rest.bit_count() >= big:
                    W = frozenset(list(bits(rest))[:big])
                    return ExpanderCertificate("c-expander", params, False, ("no-edge", (frozenset(U), W)))
        return ExpanderCertificate("c-expander", params, True)
    rng = random.Random(seed)
    checked = 0
    for _ in range(samples):
        checked += 1
        if small:
            k = rng.choice(small)
            U = rng.sample(range(n), k)
            if _external(G, mask_of(U)).bit_count() < C * k:
                return ExpanderCertificate("c-expander", params, False, ("small-set", frozenset(U)), False, checked)
        if 2 * big <= n:
            U = rng.sample(range(n), big)
            um = mask_of(U)
            rest = ((1 << n) - 1) & ~um & ~_external(G, um)
            if rest.bit_count() >= big:
                W = frozenset(list(bits(rest))[:big])
                return ExpanderCertificate("c-expander", params, False, ("no-edge", (frozenset(U), W)), False, checked)
    return ExpanderCertificate("c-expander", params, True, exhaustive=False, samples=checked)


# --------------------------------------------------------------------------
# maximal bad sets


@dataclass(frozen=True)
class BadSetX:
    vertices: frozenset[int]
    K: float
    bound: int
    search_depth: int

    def satisfies(self, G: Sequence[int], R_mask: int) -> bool:
        return len(self.vertices) <= self.bound and _bad_x(G, mask_of(self.vertices), R_mask, self.K)


def _bad_x(G, X: int, R_mask: int, K: float) -> bool:
    nb = 0
    for v in bits(X):
        nb |= G[v]
    return (nb & R_mask).bit_count() <= K * X.bit_count()


def max_bad_set_X(G: Sequence[int], K: float, bound: int, search_depth: int, R_mask: int | None = None) -> BadSetX:
    """Grow ``X`` from the empty set while ``|N(X) & R| <= K|X|`` and ``|X| <= bound``.

    Each round adds the first (largest, then lexicographic) set of at most
    ``search_depth`` new vertices that keeps the invariant, so the result
    admits no augmentation of that size.
    """
    if search_depth < 1:
        raise ValueError("search depth must be positive")
    n = len(G)
    if R_mask is None:
        R_mask = ((1 << n) - 1) & ~((1 << (n // 2)) - 1)
    X = 0
    while True:
        room = min(search_depth, bound - X.bit_count())
        grown = False
        outside = [v for v in range(n) if not X >> v & 1]
        for k in range(room, 0, -1):
            for Z in itertools.combinations(outside, k):
                cand = X | mask_of(Z)
                if _bad_x(G, cand, R_mask, K):
                    X = cand
                    grown = True
                    break
            if grown:
                break
        if not grown:
            return BadSetX(frozenset(bits(X)), K, bound, search_depth)


@dataclass(frozen=True)
class BadColorSetW:
    pairs: ColorSet
    D: int
    capA: int
    X: frozenset[int]
    search_depth: int
    certificate: ExpanderCertificate | None = None

    def measure(self, t: GraphTuple) -> int:
        return _w_measure(t, self.pairs.pairs, _lx_mask(t, self.X))

    def satisfies(self, t: GraphTuple) -> bool:
        return self.measure(t) <= min(3 * self.D * len(self.pairs), self.capA)


def _lx_mask(t: GraphTuple, X) -> int:
    return t.vertices.L_mask & ~mask_of(X)


def _w_measure(t: GraphTuple, pairs, lx: int) -> int:
    """``|(V(W) | N(W)) & (L \\ X)|``."""
    m = 0
    for v, c in pairs:
        m |= (1 << v) | t.layers[c - 1][v]
    return (m & lx).bit_count()


def max_bad_colorset_W(
    t: GraphTuple,
    X: Iterable[int],
    D: int,
    capA: int,
    search_depth: int = 1,
    m: int | None = None,
    certify_mode: str = "auto",
    seed: int = 0,
) -> BadColorSetW:
    """Grow ``W`` over ``(X | L) x colors`` while ``|(V(W) | N(W)) & (L \\ X)| <= min(3D|W|, capA)``.

    Stops when no color-set of at most ``search_depth`` pairs can be added.
    With ``m`` given, the residual ``A = (V' x colors) \\ W`` is certified to
    satisfy ``|N(S) & L'| >= (2D+1)|S|`` for ``|S| <= 2m``.
    """
    if search_depth < 1:
        raise ValueError("search depth must be positive")
    X = frozenset(X)
    lx = _lx_mask(t, X)
    vprime = t.vertices.L_mask | mask_of(X)
    universe = [(v, c) for v in bits(vprime) for c in range(1, t.k + 1)]
    own = {a: ((1 << a[0]) | t.layers[a[1] - 1][a[0]]) & lx for a in universe}
    W: list[tuple[int, int]] = []
    inW: set = set()
    cover = 0
    while True:
        grown = False
        for k in range(1, search_depth + 1):
            limit = min(3 * D * (len(W) + k), capA)
            cands = [a for a in universe if a not in inW and (cover | own[a]).bit_count() <= limit]
            for Z in itertools.combinations(cands, k):
                new = cover
                for a in Z:
                    new |= own[a]
                if new.bit_count() <= limit:
                    W.extend(Z)
                    inW.update(Z)
                    cover = new
                    grown = True
                    break
            if grown:
                break
        if not grown:
            break
    result = BadColorSetW(ColorSet(frozenset(W)), D, capA, X, search_depth)
    if m is None:
        return result
    lprime = lx & ~mask_of(v for v, _ in W)
    residual = [a for a in universe if a not in inW]
    cert = check_color_expander(t, 2 * m, 2 * D + 1, residual, mode=certify_mode, seed=seed, within=lprime)
    return BadColorSetW(result.pairs, D, capA, X, search_depth, cert)


# --------------------------------------------------------------------------
# properties (A), (B), (C)


@dataclass(frozen=True)
class Star:
    center: int
    star_color: int
    assigned_color: int
    leaves: frozenset[int]


def star_system_valid(t: GraphTuple, stars: Sequence[Star], sigma: int) -> bool:
    used = 0
    for s in stars:
        if len(s.leaves) != sigma:
            return False
        vs = mask_of(s.leaves) | 1 << s.center
        if used & vs or s.center in s.leaves:
            return False
        used |= vs
        if any(not t.has_edge(s.star_color, s.center, x) for x in s.leaves):
            return False
    return True


def violates_property_A(t: GraphTuple, stars: Sequence[Star], Y: Iterable[int], sigma: int) -> bool:
    """True when ``(stars, Y)`` is a valid star-system/set pair with no crossing edge of any assigned color."""
    Y = frozenset(Y)
    if not star_system_valid(t, stars, sigma):
        return False
    if any(s.center in Y or s.leaves & Y for s in stars):
        return False
    return all(not t.has_edge(s.assigned_color, x, y) for s in stars for x in s.leaves for y in Y)


def _pack_stars(t, Y_mask, size_u, sigma, rng=None):
    """Find ``size_u`` disjoint stars avoiding ``Y`` whose leaves see no assigned-color edge into ``Y``."""
    n, k = t.n, t.k
    free = []
    for j in range(1, k + 1):
        nbY = 0
        for y in bits(Y_mask):
            nbY |= t.layers[j - 1][y]
        free.append(((1 << n) - 1) & ~Y_mask & ~nbY)
    options = []
    for u in range(n):
        if Y_mask >> u & 1:
            continue
        for i in range(1, k + 1):
            for j in range(1, k + 1):
                pool = t.layers[i - 1][u] & free[j - 1] & ~(1 << u)
                if pool.bit_count() >= sigma:
                    options.append((u, i, j, pool))
    if rng is not None:
        rng.shuffle(options)

    def search(start, used, acc):
        if len(acc) == size_u:
            return list(acc)
        for idx in range(start, len(options)):
            u, i, j, pool = options[idx]
            if used >> u & 1:
                continue
            avail = pool & ~used
            if avail.bit_count() < sigma:
                continue
            leaf_choices = itertools.combinations(list(bits(avail)), sigma) if rng is None else [tuple(list(bits(avail))[:sigma])]
            for leaves in leaf_choices:
                acc.append(Star(u, i, j, frozenset(leaves)))
                got = search(idx + 1, used | 1 << u | mask_of(leaves), acc)
                if got:
                    return got
                acc.pop()
        return None

    return search(0, 0, [])


def check_property_A(
    t: GraphTuple, sigma: int, size_u: int, size_y: int, mode: str = "auto", samples: int = 500, seed: int = 0
) -> ExpanderCertificate:
    """Every star-system with ``size_u`` stars and set ``Y`` of ``size_y`` disjoint vertices sees a crossing edge."""
    n = t.n
    params = {"sigma": sigma, "size_u": size_u, "size_y": size_y}
    if sigma < 1:
        raise ValueError("stars need at least one leaf")
    if mode == "auto":
        mode = "exhaustive" if n <= 14 else "sampled"
    if mode == "exhaustive":
        if n > 14:
            raise ExhaustiveBoundExceeded(f"n={n} beyond exhaustive bound 14")
        for Y in itertools.combinations(range(n), size_y):
            stars = _pack_stars(t, mask_of(Y), size_u, sigma)
            if stars:
                return ExpanderCertificate("property-A", params, False, (tuple(stars), frozenset(Y)))
        return ExpanderCertificate("property-A", params, True)
    rng = random.Random(seed)
    for s in range(1, samples + 1):
        Y = rng.sample(range(n), size_y)
        stars = _pack_stars(t, mask_of(Y), size_u, sigma, rng)
        if stars:
            return ExpanderCertificate("property-A", params, False, (tuple(stars), frozenset(Y)), False, s)
    return ExpanderCertificate("property-A", params, True, exhaustive=False, samples=samples)


def check_property_C(t: GraphTuple, s_size: int, mode: str = "auto", samples: int = 2000, seed: int = 0) -> ExpanderCertificate:
    """Each layer has an edge between every two disjoint sets of ``s_size`` vertices."""
    n = t.n
    full = (1 << n) - 1
    params = {"s_size": s_size}
    if mode == "auto":
        mode = "exhaustive" if n <= 16 else "sampled"
    if 2 * s_size > n:
        return ExpanderCertificate("property-C", params, True, exhaustive=True)

    def probe(c, S):
        sm = mask_of(S)
        rest = full & ~sm & ~_external(t.layers[c - 1], sm)
        if rest.bit_count() >= s_size:
            return (c, frozenset(S), frozenset(list(bits(rest))[:s_size]))
        return None

    if mode == "exhaustive":
        if n > 16:
            raise ExhaustiveBoundExceeded(f"n={n} beyond exhaustive bound 16")
        for c in range(1, t.k + 1):
            for S in itertools.combinations(range(n), s_size):
                w = probe(c, S)
                if w:
                    return ExpanderCertificate("property-C", params, False, w)
        return ExpanderCertificate("property-C", params, True)
    rng = random.Random(seed)
    for s in range(1, samples + 1):
        w = probe(rng.randint(1, t.k), rng.sample(range(n), s_size))
        if w:
            return ExpanderCertificate("property-C", params, False, w, False, s)
    return ExpanderCertificate("property-C", params, True, exhaustive=False, samples=samples)


def check_property_B(t: GraphTuple, w_size: int, u_size: int, mode: str = "auto", samples: int = 2000, seed: int = 0) -> ExpanderCertificate:
    """Every color-set ``W`` of ``w_size`` pairs has ``N(W)`` meeting every vertex set of ``u_size``.

    This is the common strengthening that implies properties (B) and (C).
    """
    n = t.n
    full = (1 << n) - 1
    params = {"w_size": w_size, "u_size": u_size}
    universe = [(v, c) for v in range(n) for c in range(1, t.k + 1)]
    if mode == "auto":
        mode = "exhaustive" if comb(len(universe), w_size) <= EXHAUSTIVE_SUBSET_CAP else "sampled"

    def probe(W):
        rest = full & ~color_neighborhood(t, W)
        if rest.bit_count() >= u_size:
            return (frozenset(W), frozenset(list(bits(rest))[:u_size]))
        return None

    if mode == "exhaustive":
        if comb(len(universe), w_size) > EXHAUSTIVE_SUBSET_CAP:
            raise ExhaustiveBoundExceeded("too many color-sets for exhaustive mode")
        for W in itertools.combinations(universe, w_size):
            w = probe(W)
            if w:
                return ExpanderCertificate("property-B", params, False, w)
        return ExpanderCertificate("property-B", params, True)
    rng = random.Random(seed)
    for s in range(1, samples + 1):
        w = probe(rng.sample(universe, w_size))
        if w:
            return ExpanderCertificate("property-B", params, False, w, False, s)
    return ExpanderCertificate("property-B", params, True, exhaustive=False, samples=samples)
