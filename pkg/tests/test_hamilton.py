import math
import random

import pytest

from hamuniv.core import ColorPattern, EdgeOrderedCycle, GraphTuple, check_colored_cycle, sample_graph, sample_tuple
from hamuniv.hamilton import (
    SizeBoundExceeded,
    Status,
    colored_connector,
    exact_colored_hamilton_cycle,
    exact_hamilton_cycle,
    exact_hamilton_path,
    hamilton_connected_check,
    hamilton_connected_pairs,
    posa_hamilton_path,
)

from oracles import brute_colored_cycle, brute_colored_path, brute_hamilton_path


def complete(n):
    return GraphTuple.complete(n, 1).layers[0]


def cycle(n):
    return tuple((1 << (v - 1) % n) | (1 << (v + 1) % n) for v in range(n))


def relabel(t, perm):
    return GraphTuple.from_edges(t.n, [[(perm[a], perm[b]) for a, b in t.edges(c)] for c in range(1, t.k + 1)])


def test_hamilton_path_examples():
    assert all(exact_hamilton_path(complete(4), u, v).found for u in range(4) for v in range(4) if u != v)
    assert exact_hamilton_path(cycle(4), 0, 2).status is Status.NONE
    p4 = (0b10, 0b101, 0b1010, 0b100)
    assert exact_hamilton_path(p4, 0, 3).witness == (0, 1, 2, 3)
    with pytest.raises(ValueError):
        exact_hamilton_path(p4, 1, 1)
    with pytest.raises(SizeBoundExceeded):
        exact_hamilton_path(complete(21), 0, 1)


def test_hamilton_path_matches_brute_force():
    rng = random.Random(0)
    for _ in range(150):
        n = rng.randint(3, 7)
        G = sample_graph(n, rng.uniform(0.3, 0.8), rng.randrange(2**31))
        u, v = rng.sample(range(n), 2)
        assert exact_hamilton_path(G, u, v).found == brute_hamilton_path(G, u, v)


def test_hamilton_connected():
    assert hamilton_connected_check(complete(5))
    assert hamilton_connected_check(complete(8))
    assert not hamilton_connected_check(cycle(4))
    assert hamilton_connected_pairs(cycle(4)) == [(0, 2), (1, 3)]


def test_colored_cycle_examples():
    t = GraphTuple.complete(7)
    rng = random.Random(1)
    for _ in range(10):
        chi = ColorPattern(tuple(rng.randint(1, 7) for _ in range(7)))
        assert exact_colored_hamilton_cycle(t, chi).found
    chi = ColorPattern((2, 1, 1, 1, 1, 1, 1))
    assert exact_colored_hamilton_cycle(t.with_layer(2, (0,) * 7), chi).status is Status.NONE
    with pytest.raises(SizeBoundExceeded):
        exact_colored_hamilton_cycle(GraphTuple.complete(19, 1), ColorPattern((1,) * 19))


def test_colored_cycle_needs_every_start_vertex():
    # layer 1 has the single edge 1-2, so no cycle can start its pattern at vertex 0
    t = GraphTuple.from_edges(4, [[(1, 2)], [(2, 3), (0, 3), (0, 1)]])
    chi = ColorPattern((1, 2, 2, 2), k=2)
    assert exact_colored_hamilton_cycle(t, chi).found == brute_colored_cycle(t, chi) is True


def test_uncolored_cycle():
    assert exact_hamilton_cycle(cycle(6)).found
    star = (0b11110, 1, 1, 1, 1)
    assert exact_hamilton_cycle(star).status is Status.NONE


def test_relabel_and_rotation_symmetry():
    rng = random.Random(2)
    for _ in range(60):
        n = rng.randint(5, 8)
        k = rng.randint(1, 3)
        t = sample_tuple(n, rng.uniform(0.4, 0.8), rng.randrange(2**31), k)
        chi = ColorPattern(tuple(rng.randint(1, k) for _ in range(n)), k=k)
        base = exact_colored_hamilton_cycle(t, chi).found
        perm = list(range(n))
        rng.shuffle(perm)
        assert exact_colored_hamilton_cycle(relabel(t, perm), chi).found == base
        r = rng.randrange(n)
        shifted = ColorPattern(chi.assignment[r:] + chi.assignment[:r], k=k)
        assert exact_colored_hamilton_cycle(t, shifted).found == base
        mirrored = ColorPattern(tuple(reversed(chi.assignment)), k=k)
        assert exact_colored_hamilton_cycle(t, mirrored).found == base


def test_witness_mutations_are_rejected():
    rng = random.Random(3)
    tested = 0
    while tested < 50:
        n = rng.randint(5, 7)
        t = sample_tuple(n, 0.6, rng.randrange(2**31), 2)
        chi = ColorPattern(tuple(rng.randint(1, 2) for _ in range(n)), k=2)
        res = exact_colored_hamilton_cycle(t, chi)
        if not res.found:
            continue
        order = list(res.witness)
        dup = order[:]
        dup[rng.randrange(1, n)] = order[0]  # a repeated vertex
        assert not check_colored_cycle(t, chi, EdgeOrderedCycle.from_vertices(dup)).ok
        assert not check_colored_cycle(t, chi, EdgeOrderedCycle.from_vertices(order[:-1])).ok
        i, j = rng.sample(range(n), 2)
        swapped = order[:]
        swapped[i], swapped[j] = swapped[j], swapped[i]
        edges = EdgeOrderedCycle.from_vertices(swapped).edges
        truth = all(t.has_edge(chi[q + 1], *e) for q, e in enumerate(edges))
        assert check_colored_cycle(t, chi, EdgeOrderedCycle(edges)).ok == truth
        tested += 1


def test_posa_examples():
    res = posa_hamilton_path(complete(20), 3, 11)
    assert res.found and res.witness[0] == 3 and res.witness[-1] == 11
    assert posa_hamilton_path((0,) * 6, 0, 1).status is Status.GAVE_UP


def test_posa_on_sparse_random_graphs():
    n = 200
    p = 3 * math.log(n) / n
    found = 0
    for seed in range(50):
        G = sample_graph(n, p, seed)
        u, v = random.Random(seed).sample(range(n), 2)
        res = posa_hamilton_path(G, u, v, seed=seed)
        if res.found:
            order = res.witness
            assert sorted(order) == list(range(n)) and (order[0], order[-1]) == (u, v)
            assert all(G[a] >> b & 1 for a, b in zip(order, order[1:]))
            found += 1
    assert found >= 45


def test_connector_examples():
    t = GraphTuple.complete(8)
    chi = ColorPattern(tuple(range(1, 9)))
    res = colored_connector(t, chi, 2, 0, 5)
    assert res.found and res.witness[0] == 0 and res.witness[-1] == 5
    res = colored_connector(t, chi, 1, 0, 5, strategy="colored-posa")
    assert res.found
    dead = t.with_layer(3, (0,) * 8)
    assert colored_connector(dead, chi, 1, 0, 5).status is Status.NONE
    with pytest.raises(ValueError):
        colored_connector(t, chi, 3, 0, 5)  # positions 3..9 overflow


def test_connector_matches_brute_force():
    rng = random.Random(4)
    for _ in range(200):
        n = rng.randint(4, 7)
        k = rng.randint(1, 3)
        t = sample_tuple(n, rng.uniform(0.4, 0.9), rng.randrange(2**31), k)
        chi = ColorPattern(tuple(rng.randint(1, k) for _ in range(n)), k=k)
        verts = sorted(rng.sample(range(n), rng.randint(2, n)))
        u, v = rng.sample(verts, 2)
        start = rng.randint(1, n - len(verts) + 2)
        got = colored_connector(t, chi, start, u, v, verts).found
        assert got == brute_colored_path(t, chi, start, u, v, verts)
