"""Colorful Friedman-Pippenger embeddings: deficiency, goodness, extension and rollback.

An embedding is good when every color-set ``S`` inside ``A`` with at most
``m`` pairs has nonnegative deficiency. Extending by a leaf only lowers the
deficiency of sets whose neighbourhood contains the new image vertex, which
is what makes the per-candidate check cheap.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from .core import GraphTuple, bits, mask_of
from .expanders import ExhaustiveBoundExceeded, exhaustive_feasible


class EmbeddingError(RuntimeError):
    pass


class NoCandidate(EmbeddingError):
    """The parent's image has no unused neighbour in the required layer."""


class NoGoodExtension(EmbeddingError):
    """Every candidate image breaks goodness."""


class NotALeaf(ValueError):
    pass


@dataclass(frozen=True)
class OrientedColoredForest:
    vertices: frozenset[int]
    edges: frozenset[tuple[int, int, int]]  # (tail, head, color)

    def __post_init__(self):
        object.__setattr__(self, "vertices", frozenset(self.vertices))
        object.__setattr__(self, "edges", frozenset(self.edges))
        parent = {v: v for v in self.vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b, c in self.edges:
            if a not in parent or b not in parent:
                raise ValueError(f"edge {(a, b, c)} leaves the vertex set")
            if c < 1:
                raise ValueError("colors are 1-indexed")
            ra, rb = find(a), find(b)
            if ra == rb:
                raise ValueError("edges contain a cycle")
            parent[ra] = rb

    @classmethod
    def isolated(cls, vertices: Iterable[int]) -> "OrientedColoredForest":
        return cls(frozenset(vertices), frozenset())

    @cached_property
    def incident(self) -> dict[int, list[tuple[int, int, int]]]:
        inc = {v: [] for v in self.vertices}
        for e in self.edges:
            inc[e[0]].append(e)
            inc[e[1]].append(e)
        return inc

    def degree(self, v: int) -> int:
        return len(self.incident[v])

    def in_edge(self, w: int) -> tuple[int, int] | None:
        for a, b, c in self.incident[w]:
            if b == w:
                return a, c
        return None

    def add_leaf(self, v: int, w: int, color: int) -> "OrientedColoredForest":
        if v not in self.vertices or w in self.vertices:
            raise ValueError("leaf must hang from an existing vertex and be new")
        return OrientedColoredForest(self.vertices | {w}, self.edges | {(v, w, color)})

    def remove_leaf(self, w: int) -> "OrientedColoredForest":
        inc = self.incident.get(w)
        if inc is None or len(inc) != 1 or inc[0][1] != w:
            raise NotALeaf(f"{w} is not a leaf with an in-edge")
        return OrientedColoredForest(self.vertices - {w}, self.edges - {inc[0]})


@dataclass(frozen=True)
class ForestEmbedding:
    forest: OrientedColoredForest
    target: GraphTuple
    phi: Mapping[int, int]
    m: int
    D: int
    A: frozenset
    host: int | None = None  # neighbourhoods are counted inside this vertex mask

    def __post_init__(self):
        object.__setattr__(self, "phi", dict(self.phi))
        object.__setattr__(self, "A", frozenset(self.A))
        if self.host is None:
            object.__setattr__(self, "host", self.target.vertices.full_mask)
        if set(self.phi) != set(self.forest.vertices):
            raise ValueError("phi must be defined exactly on the forest's vertices")
        if len(set(self.phi.values())) != len(self.phi):
            raise ValueError("phi is not injective")
        for a, b, c in self.forest.edges:
            if not self.target.has_edge(c, self.phi[a], self.phi[b]):
                raise ValueError(f"forest edge {(a, b, c)} not present in layer {c}")

    @cached_property
    def image(self) -> int:
        return mask_of(self.phi.values())

    @cached_property
    def inverse(self) -> dict[int, int]:
        return {x: v for v, x in self.phi.items()}

    @cached_property
    def in_pairs(self) -> frozenset[tuple[int, int]]:
        """``(phi(u), i)`` for every forest vertex ``u`` with an in-edge of color ``i``."""
        return frozenset((self.phi[b], c) for _, b, c in self.forest.edges)

    @cached_property
    def color_degree(self) -> dict[tuple[int, int], int]:
        deg: dict[tuple[int, int], int] = {}
        for a, b, c in self.forest.edges:
            for x in (self.phi[a], self.phi[b]):
                deg[(x, c)] = deg.get((x, c), 0) + 1
        return deg

    def weight(self, pair) -> int:
        """The modular part of the deficiency for one pair."""
        return (pair in self.in_pairs) + self.D - self.color_degree.get(pair, 0)

    def free_neighbors(self, pair) -> int:
        x, c = pair
        return self.target.layers[c - 1][x] & self.host & ~self.image

    def with_params(self, m=None, D=None, A=None) -> "ForestEmbedding":
        return ForestEmbedding(self.forest, self.target, self.phi, self.m if m is None else m,
                               self.D if D is None else D, self.A if A is None else A, self.host)


def deficiency(emb: ForestEmbedding, S: Iterable[tuple[int, int]]) -> int:
    nb = 0
    total = 0
    for pair in S:
        nb |= emb.free_neighbors(pair)
        total += emb.weight(pair)
    return nb.bit_count() - total


def empty_embedding(target: GraphTuple, placements: Mapping[int, int], m: int, D: int, A, host=None) -> ForestEmbedding:
    """Edgeless forest on ``placements``' keys embedded as given."""
    return ForestEmbedding(OrientedColoredForest.isolated(placements), target, placements, m, D, A, host)


# --------------------------------------------------------------------------
# goodness


@dataclass(frozen=True)
class GoodnessResult:
    good: bool
    violation: tuple | None = None
    exhaustive: bool = True

    def __bool__(self) -> bool:
        return self.good


def _resolve_mode(mode: str, size: int, m: int) -> str:
    if mode == "auto":
        return "exhaustive" if exhaustive_feasible(size, m) else "descent"
    if mode == "exhaustive" and not exhaustive_feasible(size, m):
        raise ExhaustiveBoundExceeded(f"|A|={size}, m={m} beyond exhaustive bound")
    if mode not in ("exhaustive", "descent"):
        raise ValueError(f"unknown mode {mode!r}")
    return mode


def is_good_embedding(emb: ForestEmbedding, mode: str = "auto", touching: int | None = None) -> GoodnessResult:
    """Check deficiency >= 0 for all ``S`` in ``A`` with ``|S| <= m``.

    ``touching`` restricts the search to sets with a pair adjacent to that
    vertex; the extension step uses it, since no other set can have lost
    deficiency.
    """
    pairs = sorted(emb.A)
    nb = [emb.free_neighbors(a) for a in pairs]
    wt = [emb.weight(a) for a in pairs]
    mode = _resolve_mode(mode, len(pairs), emb.m)
    tbit = 0 if touching is None else 1 << touching
    # adjacency to ``touching`` is read off the raw layers: it is in the image now
    near = [bool(emb.target.layers[c - 1][x] & tbit) for x, c in pairs]
    hot = [i for i in range(len(pairs)) if touching is None or near[i]]
    if mode == "exhaustive":
        if emb.m <= 1:
            for i in hot:
                if nb[i].bit_count() < wt[i]:
                    return GoodnessResult(False, (pairs[i],))
            return GoodnessResult(True)
        cold = [j for j in range(len(pairs)) if tbit and not near[j]]
        for pos, i in enumerate(hot):
            # i is the first touching member; the rest avoid earlier touching pairs
            rest = sorted(cold + hot[pos + 1:]) if tbit else list(range(i + 1, len(pairs)))
            found = _search(i, rest, nb, wt, emb.m)
            if found is not None:
                return GoodnessResult(False, tuple(pairs[j] for j in found))
        return GoodnessResult(True)
    # descent: greedy from each singleton, every step re-evaluated in full
    for i in hot:
        chosen, u, w = [i], nb[i], wt[i]
        while True:
            if u.bit_count() - w < 0:
                return GoodnessResult(False, tuple(pairs[j] for j in sorted(chosen)), exhaustive=False)
            if len(chosen) >= emb.m:
                break
            best, best_val = None, u.bit_count() - w
            for j in range(len(pairs)):
                if j in chosen:
                    continue
                val = (u | nb[j]).bit_count() - w - wt[j]
                if val < best_val:
                    best, best_val = j, val
            if best is None:
                break
            chosen.append(best)
            u |= nb[best]
            w += wt[best]
    return GoodnessResult(True, exhaustive=False)


def _search(first, rest, nb, wt, m):
    if nb[first].bit_count() < wt[first]:
        return (first,)
    if m <= 1:
        return None

    def dfs(chosen, u, w, start):
        for idx in range(start, len(rest)):
            j = rest[idx]
            u2, w2 = u | nb[j], w + wt[j]
            if u2.bit_count() < w2:
                return chosen + (j,)
            if len(chosen) + 1 < m:
                got = dfs(chosen + (j,), u2, w2, idx + 1)
                if got is not None:
                    return got
        return None

    return dfs((first,), nb[first], wt[first], 0)


# --------------------------------------------------------------------------
# extension and rollback


def extend_leaf(emb: ForestEmbedding, v: int, w: int, color: int, mode: str = "auto") -> ForestEmbedding:
    """Embed a new leaf ``w`` hanging from ``v`` by an edge of ``color``.

    Candidates are tried in ascending id; the first that keeps the embedding
    good wins. Assumes ``emb`` is good; only sets touching the candidate are
    rechecked.
    """
    if v not in emb.phi:
        raise ValueError(f"{v} is not embedded")
    if w in emb.phi:
        raise ValueError(f"{w} is already in the forest")
    x = emb.phi[v]
    if (x, color) not in emb.A:
        raise ValueError(f"({x}, {color}) is not in A")
    if emb.forest.degree(v) > emb.D - 1:
        raise ValueError(f"{v} already has degree {emb.forest.degree(v)} >= D")
    cand = emb.target.layers[color - 1][x] & emb.host & ~emb.image
    if not cand:
        raise NoCandidate(f"no unused layer-{color} neighbour of {x}")
    forest = emb.forest.add_leaf(v, w, color)
    for y in bits(cand):
        phi = dict(emb.phi)
        phi[w] = y
        new = ForestEmbedding(forest, emb.target, phi, emb.m, emb.D, emb.A, emb.host)
        if is_good_embedding(new, mode, touching=y):
            return new
    raise NoGoodExtension(f"all {cand.bit_count()} candidates for ({v}->{w}, color {color}) break goodness")


def rollback_leaf(emb: ForestEmbedding, w: int) -> ForestEmbedding:
    """Drop a leaf; goodness is preserved because its parent's pair now sees ``phi(w)`` again."""
    inc = emb.forest.in_edge(w)
    forest = emb.forest.remove_leaf(w)
    v, c = inc
    assert emb.target.has_edge(c, emb.phi[v], emb.phi[w])
    phi = {a: b for a, b in emb.phi.items() if a != w}
    return ForestEmbedding(forest, emb.target, phi, emb.m, emb.D, emb.A, emb.host)


def rollback_subtree(emb: ForestEmbedding, root: int) -> ForestEmbedding:
    """Roll back ``root`` and everything below it (outgoing edges), leaves first."""
    out: dict[int, list[int]] = {}
    for a, b, _ in emb.forest.edges:
        out.setdefault(a, []).append(b)
    order, stack = [], [root]
    while stack:
        x = stack.pop()
        order.append(x)
        stack.extend(out.get(x, ()))
    for x in reversed(order):
        emb = rollback_leaf(emb, x)
    return emb


class EmbeddingFailed(EmbeddingError):
    def __init__(self, edge, cause):
        super().__init__(f"edge {edge}: {cause}")
        self.edge = edge
        self.cause = cause


def embed_forest(
    forest: OrientedColoredForest,
    target: GraphTuple,
    m: int,
    D: int,
    A,
    roots: Mapping[int, int],
    host: int | None = None,
    mode: str = "auto",
) -> ForestEmbedding:
    """Place ``roots`` then add the remaining vertices by repeated leaf extension in BFS order."""
    if any(r not in forest.vertices for r in roots):
        raise ValueError("roots must be forest vertices")
    emb = empty_embedding(target, roots, m, D, A, host)
    queue = deque(sorted(roots))
    seen = set(roots)
    while queue:
        v = queue.popleft()
        for a, b, c in sorted(forest.incident[v]):
            other = b if a == v else a
            if other in seen:
                continue
            if a != v:
                raise ValueError(f"edge {(a, b, c)} points towards an already placed vertex")
            try:
                emb = extend_leaf(emb, v, b, c, mode)
            except EmbeddingError as exc:
                raise EmbeddingFailed((a, b, c), exc) from exc
            seen.add(b)
            queue.append(b)
    if seen != set(forest.vertices):
        raise ValueError("some forest components have no root")
    return emb
