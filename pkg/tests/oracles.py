"""Independent brute-force oracles. Deliberately naive: no bitsets, no DP."""

from __future__ import annotations

import itertools


def has_edge(t, color, u, v) -> bool:
    return (min(u, v), max(u, v)) in set(t.edges(color))


def brute_colored_cycle(t, chi) -> bool:
    n = t.n
    for perm in itertools.permutations(range(n)):
        if all(has_edge(t, chi[i + 1], perm[i], perm[(i + 1) % n]) for i in range(n)):
            return True
    return False


def brute_colored_path(t, chi, start, u, v, vertices) -> bool:
    inner = [x for x in vertices if x not in (u, v)]
    for perm in itertools.permutations(inner):
        order = (u, *perm, v)
        if all(has_edge(t, chi[start + i], order[i], order[i + 1]) for i in range(len(order) - 1)):
            return True
    return False


def brute_hamilton_path(G, u, v) -> bool:
    n = len(G)
    inner = [x for x in range(n) if x not in (u, v)]
    for perm in itertools.permutations(inner):
        order = (u, *perm, v)
        if all(G[a] >> b & 1 for a, b in zip(order, order[1:])):
            return True
    return False


def naive_deficiency(emb, S) -> int:
    """Straight from the definition, recomputed from the forest."""
    t, phi, D = emb.target, emb.phi, emb.D
    image = set(phi.values())
    inv = {x: v for v, x in phi.items()}
    host = {x for x in range(t.n) if emb.host >> x & 1}
    nb = set()
    for x, c in S:
        nb |= {y for y in range(t.n) if has_edge(t, c, x, y)}
    first = len((nb & host) - image)
    second = 0
    third = 0
    for x, c in S:
        if x in inv:
            u = inv[x]
            if any(b == u and col == c for _, b, col in emb.forest.edges):
                second += 1
            deg = sum(1 for a, b, col in emb.forest.edges if col == c and u in (a, b))
        else:
            deg = 0
        third += D - deg
    return first - second - third


def brute_good(emb) -> bool:
    A = sorted(emb.A)
    for k in range(1, emb.m + 1):
        for S in itertools.combinations(A, k):
            if naive_deficiency(emb, S) < 0:
                return False
    return True


def brute_color_expander(t, m, D, A, within=None) -> bool:
    A = sorted(A)
    for k in range(1, m + 1):
        for S in itertools.combinations(A, k):
            nb = set()
            for x, c in S:
                nb |= {y for y in range(t.n) if has_edge(t, c, x, y)}
            if within is not None:
                nb &= within
            if len(nb) < D * k:
                return False
    return True
