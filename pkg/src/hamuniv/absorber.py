"""Cover a small set X by a chi-colored path living inside X and L.

Stage 1 grows an alternating path through X (via stars hung at its head)
and banks stars that fail to reach uncovered X vertices. Stage 2 ties in
the leftover vertices one by one: each join grows two small trees with
matching level colors and looks for a crossing edge between their leaves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .core import ColoredPath, ColorPattern, ColorSet, GraphTuple, Params, bits, mask_of, verify_colored_path
from .expanders import Star, max_bad_colorset_W
from .fp import EmbeddingError, ForestEmbedding, empty_embedding, extend_leaf, rollback_leaf, rollback_subtree
from .hamilton import InvariantViolation


class CoverError(RuntimeError):
    def __init__(self, stage: str, reason: str, witness=None):
        super().__init__(f"[{stage}] {reason}")
        self.stage = stage
        self.reason = reason
        self.witness = witness


class WindowExhausted(CoverError):
    def __init__(self, reason: str):
        super().__init__("indices", reason)


@dataclass
class CoverConfig:
    sigma: int = 3
    epsilon: float = 1e-4
    m: int = 1
    D: int = 4
    target_M: int | None = None  # default max(1, ceil(eps n / sigma))
    cap_A: int | None = None  # default n // 3
    offset: int = 6  # tree depth s = max(1, sigma - offset)
    branching: int = 2
    window_hi: int | None = None
    search_depth: int = 1
    budget: int = 10_000
    length_cap: int | None = None
    mode: str = "auto"

    @classmethod
    def from_params(cls, p: Params, **kw) -> "CoverConfig":
        return cls(sigma=p.sigma, epsilon=p.epsilon, m=p.m, D=p.D, **kw)

    @property
    def depth(self) -> int:
        return max(1, self.sigma - self.offset)

    @property
    def spacing(self) -> int:
        return max(2 * self.sigma, 2 * self.depth + 1)


@dataclass(frozen=True)
class StarSystem:
    stars: tuple[Star, ...] = ()

    @property
    def centers(self) -> frozenset[int]:
        return frozenset(s.center for s in self.stars)

    @property
    def vertices(self) -> frozenset[int]:
        out = set(self.centers)
        for s in self.stars:
            out |= s.leaves
        return frozenset(out)

    def __len__(self) -> int:
        return len(self.stars)

    def valid(self, t: GraphTuple) -> bool:
        seen: set[int] = set()
        for s in self.stars:
            if s.center in seen or s.leaves & seen or s.center in s.leaves:
                return False
            seen |= s.leaves | {s.center}
            if any(not t.has_edge(s.star_color, s.center, x) for x in s.leaves):
                return False
        return True


def is_alternating(t: GraphTuple, chi: ColorPattern, P: Sequence[int], Xp, Lp) -> bool:
    """Odd positions in ``Lp \\ Xp``, even positions in ``Xp``, edge ``i`` in layer ``chi(i)``."""
    if len(P) % 2:
        return False
    for i, v in enumerate(P, start=1):
        if (v in Xp) != (i % 2 == 0) or (i % 2 and v not in Lp):
            return False
    return verify_colored_path(t, chi, ColoredPath(tuple(P))) if P else True


@dataclass
class _State:
    """Mutable search state threaded through the two stages."""

    t: GraphTuple
    chi: ColorPattern
    cfg: CoverConfig
    emb: ForestEmbedding
    W: ColorSet
    X: frozenset
    Xp: frozenset
    Lp: frozenset
    next_id: int
    P: list = field(default_factory=list)
    M: list = field(default_factory=list)
    steps: int = 0

    def fresh(self) -> int:
        self.next_id += 1
        return self.next_id - 1

    def fv(self, x: int) -> int:
        return self.emb.inverse[x]

    def extend(self, x: int, color: int, stage: str) -> tuple[int, int]:
        """Hang a new leaf off target vertex ``x``; returns (forest id, image)."""
        w = self.fresh()
        try:
            self.emb = extend_leaf(self.emb, self.fv(x), w, color, self.cfg.mode)
        except (EmbeddingError, ValueError) as exc:
            raise CoverError(stage, f"extension at {x} in color {color} failed: {exc}") from exc
        return w, self.emb.phi[w]


def _setup(t: GraphTuple, chi: ColorPattern, X, cfg: CoverConfig) -> _State:
    n = t.n
    X = frozenset(X)
    L = t.vertices.L
    if not all(0 <= x < n for x in X):
        raise ValueError("X must be a set of vertices")
    cap = n // 3 if cfg.cap_A is None else cfg.cap_A
    W = max_bad_colorset_W(t, X, cfg.D, cap, cfg.search_depth).pairs
    vw = frozenset(v for v, _ in W.pairs)
    vprime = X | L
    A = frozenset((v, c) for v in vprime for c in range(1, t.k + 1)) - W.pairs
    base = sorted(X | vw)
    emb = empty_embedding(t, {v: v for v in base}, cfg.m, cfg.D, A, host=mask_of(vprime))
    return _State(t, chi, cfg, emb, W, X, X - vw, frozenset(L - X - vw), n)


# --------------------------------------------------------------------------
# stage 1


def stage1_cover(state: _State) -> frozenset[int]:
    """Run the grow/bank loop; returns the leftover ``Y = X \\ V(P)``."""
    t, chi, cfg = state.t, state.chi, state.cfg
    target = cfg.target_M or max(1, math.ceil(cfg.epsilon * t.n / cfg.sigma))
    P, M = state.P, state.M
    while True:
        banked = mask_of(s.center for s in M)
        uncovered = mask_of(state.Xp) & ~mask_of(P) & ~banked
        if len(M) >= target or not uncovered:
            break
        state.steps += 1
        if state.steps > cfg.budget:
            raise CoverError("stage1", f"step budget {cfg.budget} exhausted")
        if not P:
            starts = [v for v in sorted(state.Xp) if not banked >> v & 1 and (v, chi[1]) not in state.W]
            if not starts:
                break
            _, v1 = state.extend(starts[0], chi[1], "stage1")
            P.extend([v1, starts[0]])
            continue
        ell = len(P)
        if ell + 1 > len(chi):
            break
        head = P[-1]
        leaves = [state.extend(head, chi[ell], "stage1") for _ in range(cfg.sigma)]
        nxt = t.layer(chi[ell + 1])
        hit = next(((w, u, nxt[u] & uncovered) for w, u in sorted(leaves, key=lambda p: p[1]) if nxt[u] & uncovered), None)
        if hit is not None:
            w, u, cand = hit
            for w2, _ in leaves:
                if w2 != w:
                    state.emb = rollback_leaf(state.emb, w2)
            P.extend([u, next(bits(cand))])
        else:
            M.append(Star(head, chi[ell], chi[ell + 1], frozenset(u for _, u in leaves)))
            state.emb = rollback_leaf(state.emb, state.fv(P[-2]))
            del P[-2:]
    return frozenset(state.X - set(P))


# --------------------------------------------------------------------------
# stage 2


@dataclass(frozen=True)
class IndexAssignment:
    pairs: tuple[tuple[int, int], ...]  # (y, k) sorted by k
    ell: int
    spacing: int
    window: tuple[int, int]

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(k for _, k in self.pairs)

    def valid(self, W: ColorSet, chi: ColorPattern) -> bool:
        ks = self.indices
        lo, hi = self.window
        return (
            all(lo <= k <= hi for k in ks)
            and all(b - a >= self.spacing for a, b in zip(ks, ks[1:]))
            and all((y, chi[k - 1]) not in W and (y, chi[k]) not in W for y, k in self.pairs)
        )


def select_join_indices(Y, W: ColorSet, chi: ColorPattern, ell: int, spacing: int, window_hi: int | None = None) -> IndexAssignment:
    """Greedy left-to-right slots for the leftover vertices."""
    lo = ell + spacing
    hi = len(chi) if window_hi is None else window_hi
    chosen: list[tuple[int, int]] = []
    for y in sorted(Y):
        k = next(
            (x for x in range(lo, hi + 1)
             if all(abs(x - k2) >= spacing for _, k2 in chosen)
             and (y, chi[x - 1]) not in W and (y, chi[x]) not in W),
            None,
        )
        if k is None:
            raise WindowExhausted(f"no admissible slot for {y} in [{lo}, {hi}]")
        chosen.append((y, k))
    return IndexAssignment(tuple(sorted(chosen, key=lambda p: p[1])), ell, spacing, (lo, hi))


def _grow_tree(state: _State, root_fv: int, colors: Sequence[int], stage: str):
    """Level-uniform tree below ``root_fv``; returns (children map, leaves)."""
    children: dict[int, list[int]] = {}
    level = [root_fv]
    for c in colors:
        nxt = []
        for v in level:
            kids = []
            for _ in range(state.cfg.branching):
                w, _img = state.extend(state.emb.phi[v], c, stage)
                kids.append(w)
            children[v] = kids
            nxt.extend(kids)
        level = nxt
    return children, level


def _prune_to(state: _State, children, root_fv: int, leaf: int) -> list[int]:
    """Roll back every subtree off the root-to-``leaf`` path; returns that path (forest ids)."""
    parent = {w: v for v, ks in children.items() for w in ks}
    chain = [leaf]
    while chain[-1] != root_fv:
        chain.append(parent[chain[-1]])
    chain.reverse()
    keep = set(chain)
    for v in chain:
        for w in children.get(v, ()):
            if w not in keep:
                state.emb = rollback_subtree(state.emb, w)
    return chain


def build_and_embed_join(state: _State, y_prev: int, k_prev: int, y: int, k: int) -> list[int]:
    """Colored segment from ``y_prev`` (position ``k_prev``) to ``y`` (position ``k``), endpoints included."""
    chi, s = state.chi, state.cfg.depth
    stage = "join"
    tail_len = k - k_prev - s - 1
    if tail_len < s:
        raise CoverError(stage, f"slots {k_prev} and {k} too close for depth {s}")
    chain = [state.fv(y)]
    for i in range(1, tail_len - s + 1):
        w, _ = state.extend(state.emb.phi[chain[-1]], chi[k - i], stage)
        chain.append(w)
    z = chain[-1]
    root1 = state.fv(y_prev)
    kids1, leaves1 = _grow_tree(state, root1, [chi[k_prev + i - 1] for i in range(1, s + 1)], stage)
    kids2, leaves2 = _grow_tree(state, z, [chi[k_prev + 2 * s + 1 - i] for i in range(1, s + 1)], stage)
    phi = state.emb.phi
    layer = state.t.layer(chi[k_prev + s])
    crossing = next(
        ((a, b) for a in sorted(leaves1, key=phi.get) for b in sorted(leaves2, key=phi.get) if layer[phi[a]] >> phi[b] & 1),
        None,
    )
    if crossing is None:
        raise CoverError(stage, f"no layer-{chi[k_prev + s]} edge between tree leaves",
                         (frozenset(phi[a] for a in leaves1), frozenset(phi[b] for b in leaves2)))
    a, b = crossing
    path1 = _prune_to(state, kids1, root1, a)
    path2 = _prune_to(state, kids2, z, b)
    phi = state.emb.phi
    seg = [phi[x] for x in path1] + [phi[x] for x in reversed(path2)] + [phi[x] for x in reversed(chain[:-1])]
    assert len(seg) - 1 == k - k_prev
    return seg


@dataclass(frozen=True)
class CoverResult:
    path: tuple[int, ...]
    stage1_path: tuple[int, ...]
    stars: StarSystem
    leftover: frozenset[int]
    indices: IndexAssignment | None
    W: ColorSet
    steps: int

    def csv_row(self, n: int, x_size: int) -> str:
        return f"{n},{x_size},true,done,{self.steps},{len(self.path)}"


def _empty_cover(t: GraphTuple, chi: ColorPattern) -> tuple[int, ...]:
    L = sorted(t.vertices.L)
    layer = t.layer(chi[1])
    for a in L:
        for b in L:
            if a < b and layer[a] >> b & 1:
                return (a, b)
    raise CoverError("stage1", f"no layer-{chi[1]} edge inside L")


def cover_set(t: GraphTuple, chi: ColorPattern, X, cfg: CoverConfig | None = None) -> CoverResult:
    """chi-colored path P with X inside V(P) inside X | L and both endpoints outside X."""
    cfg = cfg or CoverConfig()
    X = frozenset(X)
    if len(chi) != t.n:
        raise ValueError("pattern length must equal n")
    if not X:
        path = _empty_cover(t, chi)
        return CoverResult(path, path, StarSystem(), frozenset(), None, ColorSet(), 0)
    state = _setup(t, chi, X, cfg)
    Y = stage1_cover(state)
    stage1_path = tuple(state.P)
    for star in state.M:
        for leaf in star.leaves:
            state.emb = rollback_leaf(state.emb, state.fv(leaf))
    P = state.P
    if not P:
        starts = [y for y in sorted(Y) if (y, chi[1]) not in state.W and (y, chi[2]) not in state.W]
        if not starts:
            raise CoverError("join", "no leftover vertex can start the path")
        _, v1 = state.extend(starts[0], chi[1], "join")
        P.extend([v1, starts[0]])
        Y = Y - {starts[0]}
    ell = len(P)
    hi = cfg.window_hi if cfg.window_hi is not None else min(len(chi), len(X | t.vertices.L) - 1)
    idx = select_join_indices(Y, state.W, chi, ell, cfg.spacing, hi)
    path = list(P)
    y_prev, k_prev = P[-1], ell
    for y, k in idx.pairs:
        seg = build_and_embed_join(state, y_prev, k_prev, y, k)
        path.extend(seg[1:])
        y_prev, k_prev = y, k
    if path[-1] in X:
        if k_prev > len(chi):
            raise CoverError("endpoint", "no color left for the endpoint fix")
        _, end = state.extend(path[-1], chi[k_prev], "endpoint")
        path.append(end)
    result = CoverResult(tuple(path), stage1_path, StarSystem(tuple(state.M)), Y, idx, state.W, state.steps)
    if not cover_is_valid(t, chi, X, result.path):
        raise InvariantViolation("cover failed its own verification")
    if cfg.length_cap is not None and len(path) > cfg.length_cap:
        raise CoverError("endpoint", f"path has {len(path)} vertices, cap {cfg.length_cap}")
    return result


def cover_is_valid(t: GraphTuple, chi: ColorPattern, X, path: Sequence[int]) -> bool:
    X = frozenset(X)
    vs = set(path)
    allowed = X | t.vertices.L
    return (
        len(path) >= 2
        and verify_colored_path(t, chi, ColoredPath(tuple(path)))
        and X <= vs
        and vs <= allowed
        and path[0] not in X
        and path[-1] not in X
    )
