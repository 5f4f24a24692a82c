"""Shared domain types, tuple sampling/splitting and colored path/cycle checks.

Vertices are 0-indexed. Colors (layers) and positions along a path are
1-indexed, so ``chi[i]`` for ``i`` in ``1..n`` names the layer that must
carry the ``i``-th edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np


def bits(mask: int) -> Iterator[int]:
    """Yield the set bit positions of ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


@dataclass(frozen=True)
class VertexSet:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("vertex count must be positive")

    @property
    def L(self) -> frozenset[int]:
        return frozenset(range(self.n // 2))

    @property
    def R(self) -> frozenset[int]:
        return frozenset(range(self.n // 2, self.n))

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @property
    def L_mask(self) -> int:
        return (1 << (self.n // 2)) - 1

    @property
    def R_mask(self) -> int:
        return self.full_mask & ~self.L_mask


@dataclass(frozen=True)
class GraphTuple:
    """Layers of simple graphs on a shared vertex set, stored as adjacency bitsets.

    ``layers[c - 1][v]`` is the neighbourhood mask of ``v`` in color ``c``.
    """

    vertices: VertexSet
    layers: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = self.vertices.n
        full = self.vertices.full_mask
        for c, rows in enumerate(self.layers, start=1):
            if len(rows) != n:
                raise ValueError(f"layer {c} has {len(rows)} rows, expected {n}")
            for v, row in enumerate(rows):
                if row & ~full:
                    raise ValueError(f"layer {c}: vertex {v} has out-of-range neighbour")
                if row >> v & 1:
                    raise ValueError(f"layer {c}: loop at vertex {v}")
                for u in bits(row):
                    if not rows[u] >> v & 1:
                        raise ValueError(f"layer {c}: asymmetric edge {v}-{u}")

    @property
    def n(self) -> int:
        return self.vertices.n

    @property
    def k(self) -> int:
        return len(self.layers)

    @classmethod
    def from_edges(cls, n: int, edge_lists: Sequence[Iterable[tuple[int, int]]]) -> "GraphTuple":
        layers = []
        for edges in edge_lists:
            rows = [0] * n
            for u, v in edges:
                if u == v:
                    raise ValueError(f"loop at vertex {u}")
                rows[u] |= 1 << v
                rows[v] |= 1 << u
            layers.append(tuple(rows))
        return cls(VertexSet(n), tuple(layers))

    @classmethod
    def complete(cls, n: int, k: int | None = None) -> "GraphTuple":
        full = (1 << n) - 1
        rows = tuple(full & ~(1 << v) for v in range(n))
        return cls(VertexSet(n), (rows,) * (n if k is None else k))

    @classmethod
    def empty(cls, n: int, k: int | None = None) -> "GraphTuple":
        return cls(VertexSet(n), ((0,) * n,) * (n if k is None else k))

    def layer(self, color: int) -> tuple[int, ...]:
        if not 1 <= color <= self.k:
            raise IndexError(f"color {color} outside 1..{self.k}")
        return self.layers[color - 1]

    def has_edge(self, color: int, u: int, v: int) -> bool:
        return bool(self.layer(color)[u] >> v & 1)

    def neighbors(self, color: int, v: int) -> int:
        return self.layer(color)[v]

    def edges(self, color: int) -> list[tuple[int, int]]:
        rows = self.layer(color)
        return [(u, v) for u in range(self.n) for v in bits(rows[u] >> (u + 1) << (u + 1))]

    def union(self, other: "GraphTuple") -> "GraphTuple":
        if other.n != self.n or other.k != self.k:
            raise ValueError("tuples differ in shape")
        return GraphTuple(
            self.vertices,
            tuple(tuple(a | b for a, b in zip(la, lb)) for la, lb in zip(self.layers, other.layers)),
        )

    def with_layer(self, color: int, rows: Sequence[int]) -> "GraphTuple":
        layers = list(self.layers)
        layers[color - 1] = tuple(rows)
        return GraphTuple(self.vertices, tuple(layers))


@dataclass(frozen=True)
class ColorPattern:
    assignment: tuple[int, ...]
    k: int | None = None  # number of available colors; defaults to len(assignment)

    def __post_init__(self):
        k = len(self.assignment) if self.k is None else self.k
        object.__setattr__(self, "assignment", tuple(int(c) for c in self.assignment))
        object.__setattr__(self, "k", k)
        for c in self.assignment:
            if not 1 <= c <= k:
                raise ValueError(f"color {c} outside 1..{k}")

    def __len__(self) -> int:
        return len(self.assignment)

    def __getitem__(self, position: int) -> int:
        """1-indexed position lookup."""
        if not 1 <= position <= len(self.assignment):
            raise IndexError(f"position {position} outside 1..{len(self.assignment)}")
        return self.assignment[position - 1]

    @property
    def bijective(self) -> bool:
        return sorted(self.assignment) == list(range(1, len(self.assignment) + 1))

    @classmethod
    def identity(cls, n: int) -> "ColorPattern":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def constant(cls, n: int, c: int) -> "ColorPattern":
        return cls((c,) * n, k=max(n, c))


@dataclass(frozen=True)
class EdgeOrderedCycle:
    edges: tuple[tuple[int, int], ...]

    @classmethod
    def from_vertices(cls, order: Sequence[int]) -> "EdgeOrderedCycle":
        """Edges ``(x0,x1), (x1,x2), ..., (x_{n-1},x0)`` of a cyclic vertex order."""
        k = len(order)
        return cls(tuple((order[i], order[(i + 1) % k]) for i in range(k)))

    def vertex_order(self) -> list[int] | None:
        """Recover ``x0..x_{n-1}`` with ``e_i = {x_{i-1}, x_i}``; None when malformed."""
        return _walk_cycle(self.edges)


@dataclass(frozen=True)
class ColoredPath:
    vertices: tuple[int, ...]
    start_position: int = 1

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))

    @property
    def num_edges(self) -> int:
        return max(0, len(self.vertices) - 1)


@dataclass(frozen=True)
class ColorSet:
    pairs: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "pairs", frozenset((int(v), int(c)) for v, c in self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __contains__(self, pair) -> bool:
        return pair in self.pairs

    @property
    def vertex_mask(self) -> int:
        return mask_of(v for v, _ in self.pairs)


@dataclass(frozen=True)
class Params:
    epsilon: float = 1e-4
    C: float = 1.0
    sigma: int = 3
    m: int = 1
    D: int = 4
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.epsilon <= 1e-4:
            raise ValueError("epsilon must lie in (0, 1e-4]")
        if self.C < 1:
            raise ValueError("C must be at least 1")
        if self.sigma < 1:
            raise ValueError("sigma must be at least 1")
        if self.m < 1 or self.D < 2:
            raise ValueError("need m >= 1 and D >= 2")

    @classmethod
    def derive(cls, n: int, sigma: int = 3, epsilon: float = 1e-4, C: float = 1.0, seed: int = 0) -> "Params":
        # m is clamped to 1: n // (20 sigma) vanishes for every desk-scale n
        return cls(epsilon=epsilon, C=C, sigma=sigma, m=max(1, n // (20 * sigma)), D=sigma + 1, seed=seed)


# --------------------------------------------------------------------------
# sampling


def _rows_from_matrix(adj: np.ndarray) -> tuple[int, ...]:
    packed = np.packbits(adj, axis=1, bitorder="little")
    return tuple(int.from_bytes(row.tobytes(), "little") for row in packed)


def sample_tuple(n: int, p: float, seed: int, k: int | None = None) -> GraphTuple:
    """``k`` (default ``n``) independent G(n, p) layers, reproducible from ``seed``."""
    if n < 1:
        raise ValueError("n must be positive")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, 1)
    layers = []
    for _ in range(n if k is None else k):
        adj = np.zeros((n, n), dtype=bool)
        adj[iu] = rng.random(len(iu[0])) < p
        adj |= adj.T
        layers.append(_rows_from_matrix(adj))
    return GraphTuple(VertexSet(n), tuple(layers))


def sample_graph(n: int, p: float, seed: int) -> tuple[int, ...]:
    return sample_tuple(n, p, seed, k=1).layers[0]


def half_probability(p: float) -> float:
    """``p'`` with ``1 - (1 - p')**2 == p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    return 1.0 - math.sqrt(1.0 - p)


def split_probabilities(p: float) -> tuple[float, float, float]:
    """Conditional (first only, second only, both) given the edge is present.

    From ``p = 2p' - p'^2``: ``p'(1-p')/p = (1-p')/(2-p')`` and ``p'^2/p = p'/(2-p')``.
    """
    q = half_probability(p)
    single = (1.0 - q) / (2.0 - q)
    return single, single, q / (2.0 - q)


def split_tuple(t: GraphTuple, p: float, seed: int) -> tuple[GraphTuple, GraphTuple]:
    """Split every edge into the first half, the second half or both.

    If each layer of ``t`` is G(n, p), the halves are independent G(n, p') layers
    with ``p' = 1 - sqrt(1 - p)``. The union of the halves is ``t``.
    """
    single, _, _ = split_probabilities(p)
    rng = np.random.default_rng(seed)
    n = t.n
    iu = np.triu_indices(n, 1)
    first, second = [], []
    for rows in t.layers:
        present = np.array([rows[u] >> v & 1 for u, v in zip(*iu)], dtype=bool)
        u = rng.random(len(present))
        to_first = present & ((u < single) | (u >= 2 * single))
        to_second = present & (u >= single)
        for flags, out in ((to_first, first), (to_second, second)):
            adj = np.zeros((n, n), dtype=bool)
            adj[iu] = flags
            adj |= adj.T
            out.append(_rows_from_matrix(adj))
    return GraphTuple(t.vertices, tuple(first)), GraphTuple(t.vertices, tuple(second))


# --------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class CycleCheck:
    ok: bool
    malformed: bool
    reason: str = ""


def _walk_cycle(edges: Sequence[tuple[int, int]]) -> list[int] | None:
    k = len(edges)
    if k < 3:
        return None
    es = [tuple(e) for e in edges]
    if any(len(e) != 2 or e[0] == e[1] for e in es):
        return None
    if len({frozenset(e) for e in es}) != k:
        return None
    common = set(es[0]) & set(es[1])
    if len(common) != 1:
        return None
    (x1,) = common
    x0 = es[0][0] if es[0][1] == x1 else es[0][1]
    order = [x0, x1]
    for e in es[1:]:
        a, b = e
        cur = order[-1]
        if cur == a:
            order.append(b)
        elif cur == b:
            order.append(a)
        else:
            return None
    if order[-1] != x0:
        return None
    order.pop()
    if len(set(order)) != k:
        return None
    return order


def check_colored_cycle(t: GraphTuple, chi: ColorPattern, c: EdgeOrderedCycle) -> CycleCheck:
    n = t.n
    if len(c.edges) != n:
        return CycleCheck(False, True, f"expected {n} edges, got {len(c.edges)}")
    if len(chi) != n:
        return CycleCheck(False, True, f"pattern length {len(chi)} != {n}")
    if any(not (0 <= x < n) for e in c.edges for x in e):
        return CycleCheck(False, True, "vertex id out of range")
    order = _walk_cycle(c.edges)
    if order is None:
        return CycleCheck(False, True, "edges do not form an edge-ordered Hamilton cycle")
    for i, (a, b) in enumerate(c.edges, start=1):
        if not t.has_edge(chi[i], a, b):
            return CycleCheck(False, False, f"edge {i} ({a},{b}) missing from layer {chi[i]}")
    return CycleCheck(True, False)


def verify_colored_cycle(t: GraphTuple, chi: ColorPattern, c: EdgeOrderedCycle) -> bool:
    return check_colored_cycle(t, chi, c).ok


class PositionOverflow(IndexError):
    pass


def verify_colored_path(t: GraphTuple, chi: ColorPattern, path: ColoredPath) -> bool:
    vs = path.vertices
    if not vs:
        raise ValueError("path must be nonempty")
    last = path.start_position + path.num_edges - 1
    if path.num_edges and (path.start_position < 1 or last > len(chi)):
        raise PositionOverflow(f"positions {path.start_position}..{last} exceed pattern length {len(chi)}")
    if any(not (0 <= v < t.n) for v in vs) or len(set(vs)) != len(vs):
        return False
    for i in range(path.num_edges):
        if not t.has_edge(chi[path.start_position + i], vs[i], vs[i + 1]):
            return False
    return True


def edge_ordered_cycles(n: int) -> Iterator[tuple[tuple[int, int], ...]]:
    """Every edge sequence of K_n that traverses a Hamilton cycle in order.

    Edges are reported as sorted pairs. Enumerates a first edge with an
    orientation, then every way to walk through the remaining vertices.
    """
    if n < 3:
        return
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            rest = [v for v in range(n) if v not in (a, b)]
            yield from _extend_walk(a, [a, b], rest)


def _extend_walk(start, walk, rest):
    if not rest:
        seq = list(zip(walk, walk[1:])) + [(walk[-1], start)]
        yield tuple((min(e), max(e)) for e in seq)
        return
    for i, v in enumerate(rest):
        walk.append(v)
        yield from _extend_walk(start, walk, rest[:i] + rest[i + 1:])
        walk.pop()


def count_edge_ordered_cycles(n: int) -> int:
    if not 3 <= n <= 8:
        raise ValueError(f"n={n} outside enumeration range 3..8")
    return sum(1 for _ in edge_ordered_cycles(n))
