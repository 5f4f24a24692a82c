"""Hamiltonicity oracles: exact subset DP and Pósa rotation-extension heuristics.

The exact solvers share one dynamic program over (visited set, last vertex):
a path that has visited ``j`` vertices is about to place its ``j``-th edge,
which is what lets position-dependent colors ride along for free.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .core import (
    ColoredPath,
    ColorPattern,
    EdgeOrderedCycle,
    GraphTuple,
    bits,
    check_colored_cycle,
    verify_colored_path,
)

MAX_PATH_DP = 20
MAX_CONNECTED_DP = 16
MAX_CYCLE_DP = 18


class Status(str, Enum):
    FOUND = "found"
    NONE = "exhausted-none"
    GAVE_UP = "heuristic-gave-up"


class SizeBoundExceeded(ValueError):
    pass


class InvariantViolation(AssertionError):
    """A solver produced a witness its own verifier rejects."""


@dataclass(frozen=True)
class SolveResult:
    status: Status
    witness: tuple[int, ...] | None = None
    steps: int = 0
    notes: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.status is Status.FOUND


# --------------------------------------------------------------------------
# subset DP


@lru_cache(maxsize=8)
def _masks_by_size(size: int) -> tuple[np.ndarray, ...]:
    masks = np.arange(1 << size, dtype=np.int64)
    pc = np.zeros(1 << size, dtype=np.int64)
    for b in range(size):
        pc += (masks >> b) & 1
    return tuple(masks[pc == k] for k in range(size + 1))


def _reach_table(size: int, step_rows: Sequence[Sequence[int]], start: int) -> np.ndarray:
    """``reach[mask]`` = bitset of last vertices of paths from ``start`` visiting exactly ``mask``.

    ``step_rows[j]`` (1-based, ``j < size``) is the adjacency used by the ``j``-th edge.
    """
    reach = np.zeros(1 << size, dtype=np.int64)
    reach[1 << start] = 1 << start
    groups = _masks_by_size(size)
    for j in range(1, size):
        layer = groups[j]
        layer = layer[((layer >> start) & 1) == 1]
        cur = reach[layer]
        live = cur != 0
        layer, cur = layer[live], cur[live]
        if not len(layer):
            break
        rows = step_rows[j]
        for y in range(size):
            if not rows[y]:
                continue
            sel = (((layer >> y) & 1) == 0) & ((cur & rows[y]) != 0)
            if sel.any():
                np.bitwise_or.at(reach, layer[sel] | (1 << y), 1 << y)
    return reach


def _trace(reach: np.ndarray, step_rows, start: int, size: int, last: int) -> list[int]:
    mask = (1 << size) - 1
    order = [last]
    for j in range(size - 1, 0, -1):
        mask ^= 1 << order[-1]
        cand = int(reach[mask]) & step_rows[j][order[-1]]
        order.append(next(bits(cand)))
    assert order[-1] == start
    return order[::-1]


def _restrict(rows: Sequence[int], keep: Sequence[int]) -> tuple[int, ...]:
    """Adjacency rows re-indexed onto ``keep`` (local ids in list order)."""
    local = {v: i for i, v in enumerate(keep)}
    out = []
    for v in keep:
        r = 0
        for w in bits(rows[v]):
            i = local.get(w)
            if i is not None:
                r |= 1 << i
        out.append(r)
    return tuple(out)


# --------------------------------------------------------------------------
# single graph


def exact_hamilton_path(G: Sequence[int], u: int, v: int) -> SolveResult:
    n = len(G)
    if n > MAX_PATH_DP:
        raise SizeBoundExceeded(f"n={n} exceeds DP bound {MAX_PATH_DP}")
    if u == v:
        raise ValueError("endpoints must differ")
    steps = [None] + [tuple(G)] * (n - 1)
    reach = _reach_table(n, steps, u)
    full = (1 << n) - 1
    if not int(reach[full]) >> v & 1:
        return SolveResult(Status.NONE)
    order = _trace(reach, steps, u, n, v)
    if not _is_path(G, order) or order[-1] != v:
        raise InvariantViolation("hamilton path witness failed verification")
    return SolveResult(Status.FOUND, tuple(order))


def _is_path(G, order) -> bool:
    return len(set(order)) == len(order) == len(G) and all(G[a] >> b & 1 for a, b in zip(order, order[1:]))


def hamilton_connected_pairs(G: Sequence[int]) -> list[tuple[int, int]]:
    """Pairs ``u < v`` with no Hamilton path between them."""
    n = len(G)
    if n > MAX_CONNECTED_DP:
        raise SizeBoundExceeded(f"n={n} exceeds bound {MAX_CONNECTED_DP}")
    full = (1 << n) - 1
    steps = [None] + [tuple(G)] * (n - 1)
    bad = []
    for u in range(n):
        ends = int(_reach_table(n, steps, u)[full])
        bad.extend((u, v) for v in range(u + 1, n) if not ends >> v & 1)
    return bad


def hamilton_connected_check(G: Sequence[int]) -> bool:
    return not hamilton_connected_pairs(G)


def exact_hamilton_cycle(G: Sequence[int]) -> SolveResult:
    """Uncolored Hamilton cycle; the one-layer special case of the colored solver."""
    n = len(G)
    return exact_colored_hamilton_cycle(GraphTuple.from_edges(n, [[(a, b) for a in range(n) for b in bits(G[a]) if a < b]]),
                                        ColorPattern((1,) * n, k=1))


# --------------------------------------------------------------------------
# colored


def exact_colored_hamilton_cycle(t: GraphTuple, chi: ColorPattern) -> SolveResult:
    """Decide whether some Hamilton cycle has its ``i``-th edge in layer ``chi(i)``.

    One DP per choice of the vertex shared by the last and first edge.
    """
    n = t.n
    if n > MAX_CYCLE_DP:
        raise SizeBoundExceeded(f"n={n} exceeds DP bound {MAX_CYCLE_DP}")
    if len(chi) != n:
        raise ValueError("pattern length must equal n")
    if n < 3:
        return SolveResult(Status.NONE)
    steps = [None] + [t.layer(chi[j]) for j in range(1, n)]
    closing = t.layer(chi[n])
    full = (1 << n) - 1
    for s in range(n):
        reach = _reach_table(n, steps, s)
        ends = int(reach[full]) & closing[s]
        if ends:
            order = _trace(reach, steps, s, n, next(bits(ends)))
            cyc = EdgeOrderedCycle.from_vertices(order)
            if not check_colored_cycle(t, chi, cyc).ok:
                raise InvariantViolation("colored cycle witness failed verification")
            return SolveResult(Status.FOUND, tuple(order))
    return SolveResult(Status.NONE)


def colored_connector(
    t: GraphTuple,
    chi: ColorPattern,
    start_pos: int,
    u: int,
    v: int,
    vertices=None,
    strategy: str = "exact",
    budget: int = 200_000,
    seed: int = 0,
) -> SolveResult:
    """Hamilton path on ``vertices`` from ``u`` to ``v`` whose ``i``-th edge is in layer ``chi(start_pos+i-1)``."""
    keep = sorted(range(t.n) if vertices is None else set(vertices))
    if u not in keep or v not in keep or u == v:
        raise ValueError("endpoints must be distinct members of the vertex set")
    size = len(keep)
    if start_pos < 1 or start_pos + size - 2 > len(chi):
        raise ValueError("positions run past the pattern")
    local = {x: i for i, x in enumerate(keep)}
    steps = [None] + [_restrict(t.layer(chi[start_pos + j - 1]), keep) for j in range(1, size)]
    if strategy == "exact":
        if size > MAX_CYCLE_DP:
            raise SizeBoundExceeded(f"{size} vertices exceed DP bound {MAX_CYCLE_DP}")
        reach = _reach_table(size, steps, local[u])
        if not int(reach[(1 << size) - 1]) >> local[v] & 1:
            return SolveResult(Status.NONE)
        order = [keep[i] for i in _trace(reach, steps, local[u], size, local[v])]
        res = SolveResult(Status.FOUND, tuple(order))
    elif strategy in ("colored-posa", "posa"):
        found, order, used = _rotate_extend(size, lambda j: steps[j], local[u], local[v], budget, random.Random(seed), colored=True)
        if not found:
            return SolveResult(Status.GAVE_UP, steps=used)
        res = SolveResult(Status.FOUND, tuple(keep[i] for i in order), steps=used)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    if not verify_colored_path(t, chi, ColoredPath(res.witness, start_pos)) or res.witness[-1] != v:
        raise InvariantViolation("connector witness failed verification")
    return res


# --------------------------------------------------------------------------
# rotation-extension


def _rotate_extend(
    size: int,
    rows_at: Callable[[int], Sequence[int]],
    u: int,
    v: int,
    budget: int,
    rng: random.Random,
    colored: bool,
    restart_every: int | None = None,
):
    """Grow a path from ``u`` by extensions and Pósa rotations until it is Hamiltonian and ends at ``v``.

    ``rows_at(j)`` is the adjacency the ``j``-th edge must use. With ``colored``
    each rotation re-validates the reversed segment against its new positions.
    Returns ``(found, order, steps_used)``.
    """
    if size == 1:
        return u == v, [u], 0
    restart_every = restart_every or max(50 * size, 1000)
    steps = 0
    vbit = 1 << v
    while steps < budget:
        path = [u]
        used = 1 << u
        local_steps = 0
        while steps < budget and local_steps < restart_every:
            steps += 1
            local_steps += 1
            ell = len(path)
            end = path[-1]
            if ell == size:
                return True, path, steps
            cand = rows_at(ell)[end] & ~used
            if ell < size - 1:
                cand &= ~vbit
            if cand:
                choices = list(bits(cand))
                y = rng.choice(choices)
                path.append(y)
                used |= 1 << y
                continue
            # rotate: new edge joins path[i] and end at position i+1
            options = []
            for i in range(ell - 2):
                if rows_at(i + 1)[end] >> path[i] & 1:
                    options.append(i)
            rng.shuffle(options)
            rotated = False
            for i in options:
                seg = path[i + 1:]
                new = path[: i + 1] + seg[::-1]
                if colored and not all(rows_at(j + 1)[new[j]] >> new[j + 1] & 1 for j in range(i + 1, ell - 1)):
                    continue
                path = new
                rotated = True
                break
            if not rotated:
                if ell == 1:
                    return False, path, steps
                break
    return False, None, steps


def posa_hamilton_path(G: Sequence[int], u: int, v: int, budget: int = 200_000, seed: int = 0) -> SolveResult:
    n = len(G)
    if u == v:
        raise ValueError("endpoints must differ")
    rows = tuple(G)
    found, order, used = _rotate_extend(n, lambda j: rows, u, v, budget, random.Random(seed), colored=False)
    if not found:
        return SolveResult(Status.GAVE_UP, steps=used)
    if not _is_path(G, order) or order[0] != u or order[-1] != v:
        raise InvariantViolation("rotation witness failed verification")
    return SolveResult(Status.FOUND, tuple(order), steps=used)
