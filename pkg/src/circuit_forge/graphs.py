"""Weighted multigraphs, their graphic and cographic matroids, and cut machinery.

Vertices are ``0..n-1``.  Edges carry a globally unique integer label (the
matroid element) and a positive integer weight.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import accumulate
from typing import Iterable, NamedTuple

import numpy as np

from .errors import (
    DisconnectedError,
    EmptySelectionError,
    LabelError,
    OracleSizeError,
    PreconditionError,
    UnsupportedLoopError,
)
from .gf2 import BinaryMatroid, dual, sort_circuits

CUT_ORACLE_CAP = 16


class Edge(NamedTuple):
    u: int
    v: int
    label: int
    weight: int = 1


@dataclass(frozen=True)
class WeightedGraph:
    n: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(Edge(*e) for e in self.edges))
        labels = set()
        for e in self.edges:
            if not (0 <= e.u < self.n and 0 <= e.v < self.n):
                raise ValueError(f"edge {e.label} has an endpoint outside 0..{self.n - 1}")
            if e.label in labels:
                raise LabelError(f"duplicate edge label {e.label}")
            if e.label < 0:
                raise LabelError(f"edge label {e.label} is negative")
            if int(e.weight) != e.weight or e.weight < 1:
                raise ValueError(f"edge {e.label} has non-positive or non-integer weight")
            labels.add(e.label)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple]) -> "WeightedGraph":
        return cls(n, tuple(Edge(*e) for e in edges))

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def by_label(self) -> dict[int, Edge]:
        return {e.label: e for e in self.edges}

    @property
    def has_loops(self) -> bool:
        return any(e.u == e.v for e in self.edges)

    def weight(self, labels: Iterable[int]) -> int:
        return sum(self.by_label[x].weight for x in labels)

    def weights(self) -> dict[int, int]:
        return {e.label: e.weight for e in self.edges}

    @cached_property
    def adjacency_masks(self) -> tuple[int, ...]:
        adj = [0] * self.n
        for e in self.edges:
            adj[e.u] |= 1 << e.v
            adj[e.v] |= 1 << e.u
        return tuple(adj)

    def is_connected(self) -> bool:
        return self.n <= 1 or _connected((1 << self.n) - 1, self.adjacency_masks)

    def _check_labels(self, labels: Iterable[int]) -> frozenset:
        labels = frozenset(labels)
        for x in labels:
            if x not in self.by_label:
                raise LabelError(f"unknown edge label {x}")
        return labels


def _connected(mask: int, adj: tuple[int, ...]) -> bool:
    if not mask:
        return False
    seen = frontier = mask & -mask
    while frontier:
        nb = 0
        bits = frontier
        while bits:
            low = bits & -bits
            nb |= adj[low.bit_length() - 1]
            bits ^= low
        nb &= mask & ~seen
        seen |= nb
        frontier = nb
    return seen == mask


def _reject_loops(G: WeightedGraph) -> None:
    if G.has_loops:
        raise UnsupportedLoopError("graph has a self-loop")


# --- matroids ----------------------------------------------------------------


def graphic_matroid(G: WeightedGraph) -> BinaryMatroid:
    """Vertex-edge incidence matrix over GF(2)."""
    _reject_loops(G)
    cols = {e.label: (1 << e.u) | (1 << e.v) for e in G.edges}
    return BinaryMatroid.from_columns(cols, G.n).reduced()


def cographic_matroid(G: WeightedGraph) -> BinaryMatroid:
    return dual(graphic_matroid(G))


# --- cycles ------------------------------------------------------------------


def enumerate_cycles(
    G: WeightedGraph, R: Iterable[int] = (), weight_cap: int | None = None
) -> list[frozenset]:
    """All simple cycles C with R ⊆ C and w(C) <= weight_cap, by pruned DFS."""
    _reject_loops(G)
    R = G._check_labels(R)
    cap = sum(e.weight for e in G.edges) if weight_cap is None else weight_cap
    adj: list[list[Edge]] = [[] for _ in range(G.n)]
    for e in sorted(G.edges, key=lambda e: e.label):
        adj[e.u].append(e)
        if e.v != e.u:
            adj[e.v].append(e)

    found: set[frozenset] = set()
    path: list[int] = []

    def other(e: Edge, x: int) -> int:
        return e.v if e.u == x else e.u

    def extend(x: int, target: int, budget: int, visited: int, lowest: int, first: int) -> None:
        for e in adj[x]:
            if e.label == first or e.weight > budget:
                continue
            y = other(e, x)
            if y == target:
                cyc = frozenset(path) | {e.label}
                if R <= cyc:
                    found.add(cyc)
            elif y > lowest and not visited >> y & 1:
                path.append(e.label)
                extend(y, target, budget - e.weight, visited | 1 << y, lowest, first)
                path.pop()

    if R:
        r0 = G.by_label[min(R)]
        path.append(r0.label)
        extend(r0.v, r0.u, cap - r0.weight, (1 << r0.u) | (1 << r0.v), -1, r0.label)
        path.pop()
    else:
        for s in range(G.n):
            for e in adj[s]:
                y = other(e, s)
                if y <= s or e.weight > cap:
                    continue
                path.append(e.label)
                extend(y, s, cap - e.weight, (1 << s) | (1 << y), s, e.label)
                path.pop()
    return sort_circuits(found)


# --- cuts --------------------------------------------------------------------


class _CutTable:
    """Cut-set and bond flag for every vertex bipartition; vertex 0 stays on side A."""

    def __init__(self, G: WeightedGraph):
        self.G = G
        n = G.n
        size = 1 << (n - 1) if n else 1
        sides = np.arange(size, dtype=np.int64) << 1  # side B, never contains vertex 0
        cut = np.zeros(size, dtype=np.int64)
        weight = np.zeros(size, dtype=np.int64)
        self.labels = [e.label for e in G.edges]
        for i, e in enumerate(G.edges):
            crosses = ((sides >> e.u) ^ (sides >> e.v)) & 1
            cut |= crosses << i
            weight += crosses * e.weight
        self.sides = sides
        self.cut = cut
        self.weight = weight
        self._bond: dict[int, bool] = {}

    def is_bond(self, side_b: int) -> bool:
        """Both sides nonempty and connected, i.e. the cut-set is inclusion-minimal."""
        hit = self._bond.get(side_b)
        if hit is None:
            full = (1 << self.G.n) - 1
            adj = self.G.adjacency_masks
            hit = bool(side_b) and _connected(side_b, adj) and _connected(full & ~side_b, adj)
            self._bond[side_b] = hit
        return hit

    def labels_of(self, cut_mask: int) -> frozenset:
        return frozenset(self.labels[i] for i in range(len(self.labels)) if cut_mask >> i & 1)

    def mask_of(self, labels: Iterable[int]) -> int:
        pos = {lab: i for i, lab in enumerate(self.labels)}
        out = 0
        for x in labels:
            out |= 1 << pos[x]
        return out


@lru_cache(maxsize=64)
def _cut_table(G: WeightedGraph) -> _CutTable:
    return _CutTable(G)


def _require_cut_input(G: WeightedGraph, cap: int) -> None:
    _reject_loops(G)
    if G.n > cap:
        raise OracleSizeError(f"{G.n} vertices exceed the cut oracle cap {cap}")
    if not G.is_connected():
        raise DisconnectedError("graph is not connected")


def enumerate_min_cutsets(
    G: WeightedGraph,
    R: Iterable[int] = (),
    weight_cap: int | None = None,
    cap: int = CUT_ORACLE_CAP,
) -> list[frozenset]:
    """All minimal cut-sets C with R ⊆ C and w(C) <= weight_cap."""
    R = G._check_labels(R)
    _require_cut_input(G, cap)
    if G.n < 2:
        return []
    table = _cut_table(G)
    rmask = table.mask_of(R)
    ok = (table.cut & rmask) == rmask
    ok[0] = False
    if weight_cap is not None:
        ok &= table.weight <= weight_cap
    out = []
    for idx in np.flatnonzero(ok).tolist():
        if table.is_bond(int(table.sides[idx])):
            out.append(table.labels_of(int(table.cut[idx])))
    return sort_circuits(out)


def is_min_cutset(G: WeightedGraph, C: Iterable[int]) -> bool:
    """Independent check that C is an inclusion-minimal cut-set of a connected G."""
    C = G._check_labels(C)
    if not C:
        return False
    adj = [0] * G.n
    for e in G.edges:
        if e.label not in C:
            adj[e.u] |= 1 << e.v
            adj[e.v] |= 1 << e.u
    full = (1 << G.n) - 1
    comp = 0
    seen = frontier = 1
    while frontier:
        nb = 0
        for v in range(G.n):
            if frontier >> v & 1:
                nb |= adj[v]
        nb &= ~seen
        seen |= nb
        frontier = nb
    comp = seen
    if comp == full:
        return False
    # every edge of C must cross between the two sides, and the other side connected
    for x in C:
        e = G.by_label[x]
        if (comp >> e.u & 1) == (comp >> e.v & 1):
            return False
    return _connected(full & ~comp, tuple(adj)) and _connected(comp, tuple(adj))


def small_cut(G: WeightedGraph, R: Iterable[int], alpha: int, seed: int) -> frozenset:
    """One run of the randomized Small Cut algorithm.

    Contracts ``n - 2*alpha - |R|`` weight-proportionally chosen edges that are
    not parallel to R, then picks uniformly among the vertex bipartitions of the
    contracted graph whose cut-set in G is a minimal cut-set containing R.
    """
    R = G._check_labels(R)
    if int(alpha) != alpha or alpha < 1:
        raise PreconditionError("alpha must be a positive integer")
    alpha = int(alpha)
    _reject_loops(G)
    if not G.is_connected():
        raise DisconnectedError("graph is not connected")
    if G.n > CUT_ORACLE_CAP:
        raise OracleSizeError(f"{G.n} vertices exceed the cut oracle cap")
    keep = 2 * alpha + len(R)
    if G.n < keep:
        raise PreconditionError(f"need n >= 2*alpha + |R| = {keep}, got n = {G.n}")
    rng = np.random.default_rng(seed)
    comp = list(range(G.n))
    edges = sorted(G.edges, key=lambda e: e.label)
    r_edges = [G.by_label[x] for x in sorted(R)]

    def pair(e: Edge) -> tuple[int, int]:
        a, b = comp[e.u], comp[e.v]
        return (a, b) if a < b else (b, a)

    for _ in range(G.n - keep):
        protected = {pair(e) for e in r_edges}
        cand = [e for e in edges if comp[e.u] != comp[e.v] and pair(e) not in protected]
        if not cand:
            raise PreconditionError("no contractible edge left")
        prefix = list(accumulate(e.weight for e in cand))
        pick = cand[bisect_right(prefix, int(rng.integers(prefix[-1])))]
        a, b = sorted((comp[pick.u], comp[pick.v]))
        comp = [a if c == b else c for c in comp]

    table = _cut_table(G)
    reps = sorted(set(comp))
    groups = [sum(1 << v for v in range(G.n) if comp[v] == rep) for rep in reps]
    rmask = table.mask_of(R)
    options = []
    for bits in range(1, 1 << (len(reps) - 1)):
        side_b = 0
        for i in range(1, len(reps)):
            if bits >> (i - 1) & 1:
                side_b |= groups[i]
        # vertex 0 lies in groups[0] because rep 0 is the smallest label there
        idx = side_b >> 1
        if int(table.cut[idx]) & rmask == rmask and table.is_bond(side_b):
            options.append(idx)
    if not options:
        raise EmptySelectionError("no minimal cut-set containing R survives contraction")
    chosen = options[int(rng.integers(len(options)))]
    return table.labels_of(int(table.cut[chosen]))


def graphic_set_bound(alpha: int, r_size: int, m: int) -> int:
    """(4*alpha + 2|R|)^|R| * (2m)^(2*alpha) as an exact integer."""
    if int(alpha) != alpha or alpha < 1 or m < 2 or r_size < 0:
        raise PreconditionError("need integer alpha >= 1, m >= 2, |R| >= 0")
    alpha = int(alpha)
    return (4 * alpha + 2 * r_size) ** r_size * (2 * m) ** (2 * alpha)


def survival_lower_bound(n: int, r_size: int, alpha: int) -> float:
    """1 / (2^|R| (n-|R|)^(2 alpha)), the per-run output probability floor."""
    return 1.0 / (2**r_size * (n - r_size) ** (2 * alpha))


# --- generation --------------------------------------------------------------


def random_graph(
    n: int,
    m: int,
    seed: int,
    max_weight: int = 1,
    allow_parallel: bool = False,
    first_label: int = 0,
) -> WeightedGraph:
    """Random connected multigraph: a random spanning tree plus extra edges."""
    if n < 1 or m < n - 1:
        raise ValueError("need n >= 1 and m >= n - 1")
    if not allow_parallel and m > n * (n - 1) // 2:
        raise ValueError("too many edges for a simple graph")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n).tolist()
    pairs = []
    for i in range(1, n):
        j = int(rng.integers(i))
        pairs.append((order[j], order[i]))
    present = {frozenset(p) for p in pairs}
    while len(pairs) < m:
        a, b = (int(x) for x in rng.choice(n, size=2, replace=False))
        if not allow_parallel and frozenset((a, b)) in present:
            continue
        present.add(frozenset((a, b)))
        pairs.append((a, b))
    edges = []
    for i, (a, b) in enumerate(pairs):
        w = int(rng.integers(1, max_weight + 1))
        edges.append(Edge(min(a, b), max(a, b), first_label + i, w))
    return WeightedGraph(n, tuple(edges))
