"""Plain-text file formats.

Tuple file::

    n k
    graph 1 e
    u v            (e lines, 0 <= u < v < n, sorted)
    graph 2 e
    ...

Pattern file: n whitespace-separated colors. Witness file: one line of vertex ids.
"""

from __future__ import annotations

from pathlib import Path

from .core import ColorPattern, GraphTuple


def format_tuple(t: GraphTuple) -> str:
    out = [f"{t.n} {t.k}"]
    for c in range(1, t.k + 1):
        edges = t.edges(c)
        out.append(f"graph {c} {len(edges)}")
        out.extend(f"{u} {v}" for u, v in edges)
    return "\n".join(out) + "\n"


def parse_tuple(text: str) -> GraphTuple:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty tuple file")
    n, k = map(int, lines[0].split())
    pos = 1
    edge_lists = []
    for c in range(1, k + 1):
        head = lines[pos].split()
        if len(head) != 3 or head[0] != "graph" or int(head[1]) != c:
            raise ValueError(f"expected 'graph {c} e' header, got {lines[pos]!r}")
        e = int(head[2])
        edges = []
        for ln in lines[pos + 1: pos + 1 + e]:
            u, v = map(int, ln.split())
            if not 0 <= u < v < n:
                raise ValueError(f"bad edge line {ln!r}")
            edges.append((u, v))
        if len(edges) != e:
            raise ValueError(f"layer {c}: expected {e} edges")
        if edges != sorted(edges):
            raise ValueError(f"layer {c}: edges not sorted")
        edge_lists.append(edges)
        pos += 1 + e
    if pos != len(lines):
        raise ValueError("trailing content after last layer")
    return GraphTuple.from_edges(n, edge_lists)


def write_tuple(path, t: GraphTuple) -> None:
    Path(path).write_text(format_tuple(t))


def read_tuple(path) -> GraphTuple:
    return parse_tuple(Path(path).read_text())


def format_pattern(chi: ColorPattern) -> str:
    return " ".join(map(str, chi.assignment)) + "\n"


def read_pattern(path, k: int | None = None) -> ColorPattern:
    return ColorPattern(tuple(int(x) for x in Path(path).read_text().split()), k=k)


def write_pattern(path, chi: ColorPattern) -> None:
    Path(path).write_text(format_pattern(chi))


def write_witness(path, vertices) -> None:
    Path(path).write_text(" ".join(map(str, vertices)) + "\n")


def read_witness(path) -> list[int]:
    return [int(x) for x in Path(path).read_text().split()]


def read_vertex_set(path) -> frozenset[int]:
    return frozenset(read_witness(path))
