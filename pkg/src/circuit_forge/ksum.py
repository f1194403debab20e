"""k-sums of binary matroids and unordered decomposition trees.

The sum M1 Δ M2 lives on E1 Δ E2; its cycles are the sets Z1 Δ Z2 with Zi a
cycle of Mi that happen to avoid the shared set S = E1 ∩ E2.  We build a
representation with exactly that cycle space and read everything else off it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import combinations, permutations
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import (
    GenerationError,
    NotCircuitError,
    PreconditionError,
    SumShapeError,
    SumValidityError,
)
from .gf2 import (
    BinaryMatroid,
    _reduce,
    builtin,
    cycle_space_basis,
    dual,
    enumerate_circuits,
    is_circuit,
    nullspace_masks,
)

LEAF_TYPES = ("graphic", "cographic", "R10", "F7", "other")

_KIND_BY_SIZE = {0: "one_sum", 1: "two_sum", 3: "three_sum"}


@dataclass(frozen=True)
class SumKind:
    kind: str
    shared: frozenset

    @property
    def k(self) -> int:
        return {"one_sum": 1, "two_sum": 2, "three_sum": 3}[self.kind]


def _contains_cocircuit(M: BinaryMatroid, S: frozenset) -> bool:
    D = dual(M)
    return any(
        is_circuit(D, sub) for size in range(1, len(S) + 1) for sub in combinations(sorted(S), size)
    )


def sum_kind(M1: BinaryMatroid, M2: BinaryMatroid, validate: bool = True) -> SumKind:
    """Classify M1 Δ M2 and check the side conditions of its k-sum."""
    S = M1.ground_set & M2.ground_set
    if len(S) not in _KIND_BY_SIZE:
        raise SumShapeError(f"shared set has {len(S)} elements; need 0, 1 or 3")
    kind = SumKind(_KIND_BY_SIZE[len(S)], frozenset(S))
    if not validate or kind.kind == "one_sum":
        return kind
    for name, M in (("M1", M1), ("M2", M2)):
        if kind.kind == "two_sum":
            if M.m < 3:
                raise SumValidityError(f"2-sum needs |E| >= 3 in {name}", f"|E({name})| >= 3")
            if is_circuit(M, S):
                raise SumValidityError(f"shared element is a loop of {name}", f"S not a circuit of {name}")
            if is_circuit(dual(M), S):
                raise SumValidityError(
                    f"shared element is a coloop of {name}", f"S not a circuit of {name}*"
                )
        else:
            if M.m < 7:
                raise SumValidityError(f"3-sum needs |E| >= 7 in {name}", f"|E({name})| >= 7")
            if not is_circuit(M, S):
                raise SumValidityError(f"shared triple is not a circuit of {name}", f"S is a circuit of {name}")
            if _contains_cocircuit(M, S):
                raise SumValidityError(
                    f"shared triple contains a cocircuit of {name}", f"S contains no circuit of {name}*"
                )
    return kind


def delta_sum(
    M1: BinaryMatroid, M2: BinaryMatroid, validate: bool = True
) -> tuple[BinaryMatroid, SumKind]:
    """The sum M1 Δ M2 together with the kind of k-sum it is."""
    kind = sum_kind(M1, M2, validate)
    S = kind.shared
    private = sorted(M1.ground_set ^ M2.ground_set)
    # private elements on the low bits, shared ones above them, so echelon
    # vectors led by a low bit have no shared part at all
    order = private + sorted(S)
    pos = {lab: i for i, lab in enumerate(order)}
    k = len(private)

    basis: dict[int, int] = {}
    for M in (M1, M2):
        for z in cycle_space_basis(M):
            v = 0
            for j, lab in enumerate(M.labels):
                if z >> j & 1:
                    v |= 1 << pos[lab]
            v = _reduce(v, basis)
            if v:
                basis[v.bit_length() - 1] = v
    cycles = [v for v in basis.values() if v < 1 << k]

    # rows of the representation span the orthogonal complement of the cycle space
    b_columns = [sum(1 << i for i, z in enumerate(cycles) if z >> j & 1) for j in range(k)]
    rows = nullspace_masks(b_columns)
    cols = tuple(sum(1 << i for i, y in enumerate(rows) if y >> j & 1) for j in range(k))
    return BinaryMatroid(tuple(private), cols, len(rows)), kind


def sum_circuits_by_definition(M1: BinaryMatroid, M2: BinaryMatroid) -> set[frozenset]:
    """Minimal nonempty C1 Δ C2 ⊆ E1 Δ E2 over cycles Ci of Mi, by brute force.

    Independent of :func:`delta_sum`; used to certify it on small instances.
    """
    target = M1.ground_set ^ M2.ground_set
    cyc = []
    for M in (M1, M2):
        vals = {frozenset()}
        for z in cycle_space_basis(M):
            zs = frozenset(M.labels[j] for j in range(M.m) if z >> j & 1)
            vals |= {v ^ zs for v in vals}
        cyc.append(vals)
    sets = {a ^ b for a in cyc[0] for b in cyc[1]}
    sets = [s for s in sets if s and s <= target]
    return {s for s in sets if not any(t < s for t in sets)}


# --- circuit classification ---------------------------------------------------------


class CircuitCase(NamedTuple):
    case: int
    element: int | None
    c1: frozenset
    c2: frozenset


def circuit_cases(
    M1: BinaryMatroid, M2: BinaryMatroid, kind: SumKind, C: Iterable[int]
) -> list[CircuitCase]:
    """Every description of C that fits one of the three cases (normally one)."""
    C = frozenset(C)
    S = kind.shared
    E1, E2 = M1.ground_set - S, M2.ground_set - S
    out = []
    if C <= E1 and is_circuit(M1, C):
        out.append(CircuitCase(1, None, C, frozenset()))
    if C <= E2 and is_circuit(M2, C):
        out.append(CircuitCase(2, None, frozenset(), C))
    for e in sorted(S):
        c1 = (C & E1) | {e}
        c2 = (C & E2) | {e}
        if C & E1 and C & E2 and is_circuit(M1, c1) and is_circuit(M2, c2):
            out.append(CircuitCase(3, e, c1, c2))
    return out


def classify_circuit(
    M1: BinaryMatroid, M2: BinaryMatroid, kind: SumKind, C: Iterable[int],
    total: BinaryMatroid | None = None,
) -> CircuitCase:
    C = frozenset(C)
    if total is None:
        total, _ = delta_sum(M1, M2, validate=False)
    if not C <= total.ground_set or not is_circuit(total, C):
        raise NotCircuitError(f"{sorted(C)} is not a circuit of the sum")
    cases = circuit_cases(M1, M2, kind, C)
    if len(cases) != 1:
        raise NotCircuitError(f"{sorted(C)} matches {len(cases)} cases instead of exactly one")
    return cases[0]


def check_associativity(M1: BinaryMatroid, M3: BinaryMatroid, M4: BinaryMatroid) -> bool:
    """Compare M1 Δ (M3 Δ M4) with the re-associated sum, circuit set against circuit set."""
    E1, E3, E4 = M1.ground_set, M3.ground_set, M4.ground_set
    S1 = E3 & E4
    S2 = E1 & (E3 ^ E4)
    if E1 & S1:
        raise PreconditionError("an element of E3 ∩ E4 also lies in E1")
    if S2 <= E3:
        inner, outer = M3, M4
    elif S2 <= E4:
        inner, outer = M4, M3
    else:
        raise PreconditionError("S2 is split across E3 and E4")
    try:
        M2, _ = delta_sum(M3, M4)
        left, _ = delta_sum(M1, M2)
        first, _ = delta_sum(M1, inner)
        right, _ = delta_sum(first, outer)
    except (SumShapeError, SumValidityError) as exc:
        clause = getattr(exc, "clause", "") or str(exc)
        raise PreconditionError(f"sum precondition failed: {clause}") from exc
    if left.ground_set != right.ground_set:
        return False
    return set(enumerate_circuits(left)) == set(enumerate_circuits(right))


# --- unordered decomposition trees ----------------------------------------------------


class Leaf(NamedTuple):
    id: int
    kind: str
    matroid: BinaryMatroid


class TreeEdge(NamedTuple):
    u: int
    v: int
    shared: frozenset


def _edge_key(e: TreeEdge) -> tuple[int, int]:
    return (min(e.u, e.v), max(e.u, e.v))


@dataclass(frozen=True, eq=False)
class Udt:
    """A tree of binary matroids glued along shared element sets."""

    leaves: tuple[Leaf, ...]
    edges: tuple[TreeEdge, ...]

    def __post_init__(self):
        leaves = tuple(sorted((Leaf(*x) for x in self.leaves), key=lambda x: x.id))
        edges = tuple(
            sorted(
                (TreeEdge(min(e[0], e[1]), max(e[0], e[1]), frozenset(e[2])) for e in self.edges),
                key=_edge_key,
            )
        )
        object.__setattr__(self, "leaves", leaves)
        object.__setattr__(self, "edges", edges)
        self._validate()

    def __eq__(self, other):
        return isinstance(other, Udt) and self._key == other._key

    def __hash__(self):
        return self._hash

    @cached_property
    def _key(self):
        return (self.leaves, self.edges)

    @cached_property
    def _hash(self):
        return hash(self._key)

    def _validate(self) -> None:
        ids = [x.id for x in self.leaves]
        if not ids:
            raise PreconditionError("a decomposition tree needs at least one vertex")
        if len(set(ids)) != len(ids):
            raise PreconditionError("duplicate vertex ids")
        for x in self.leaves:
            if x.kind not in LEAF_TYPES:
                raise PreconditionError(f"unknown vertex type {x.kind!r}")
        idset = set(ids)
        seen_pairs = set()
        for e in self.edges:
            if e.u not in idset or e.v not in idset or e.u == e.v:
                raise PreconditionError(f"bad edge {e.u}-{e.v}")
            if (e.u, e.v) in seen_pairs:
                raise PreconditionError(f"repeated edge {e.u}-{e.v}")
            seen_pairs.add((e.u, e.v))
        if len(self.edges) != len(ids) - 1 or not self._is_connected():
            raise PreconditionError("edge relation is not a tree")
        adjacent = {(e.u, e.v): e.shared for e in self.edges}
        for a, b in combinations(ids, 2):
            common = self.ground(a) & self.ground(b)
            if (a, b) in adjacent:
                if common != adjacent[(a, b)]:
                    raise PreconditionError(
                        f"edge {a}-{b} lists {sorted(adjacent[(a, b)])} but the ground sets share {sorted(common)}"
                    )
                if len(common) not in _KIND_BY_SIZE:
                    raise SumShapeError(f"edge {a}-{b} shares {len(common)} elements")
            elif common:
                raise PreconditionError(f"non-adjacent vertices {a} and {b} share elements")

    def _is_connected(self) -> bool:
        start = self.leaves[0].id
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in self.neighbors[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == len(self.leaves)

    @cached_property
    def vertex_ids(self) -> tuple[int, ...]:
        return tuple(x.id for x in self.leaves)

    @cached_property
    def _by_id(self) -> dict[int, Leaf]:
        return {x.id: x for x in self.leaves}

    def matroid(self, v: int) -> BinaryMatroid:
        return self._by_id[v].matroid

    def kind(self, v: int) -> str:
        return self._by_id[v].kind

    def ground(self, v: int) -> frozenset:
        return self._by_id[v].matroid.ground_set

    @cached_property
    def neighbors(self) -> dict[int, tuple[int, ...]]:
        nb: dict[int, list[int]] = {x.id: [] for x in self.leaves}
        for e in self.edges:
            nb[e.u].append(e.v)
            nb[e.v].append(e.u)
        return {k: tuple(sorted(v)) for k, v in nb.items()}

    def shared(self, u: int, v: int) -> frozenset:
        return self._shared[(min(u, v), max(u, v))]

    @cached_property
    def _shared(self) -> dict[tuple[int, int], frozenset]:
        return {(e.u, e.v): e.shared for e in self.edges}

    @cached_property
    def ground_set(self) -> frozenset:
        """E_T: elements lying in exactly one vertex ground set."""
        out: frozenset = frozenset()
        for x in self.leaves:
            out = out ^ x.matroid.ground_set
        return out

    @property
    def m(self) -> int:
        return len(self.ground_set)

    def subtree_ground(self, verts: Iterable[int]) -> frozenset:
        out: frozenset = frozenset()
        for v in verts:
            out = out ^ self.ground(v)
        return out

    def components(self, removed: Iterable[int], within: Iterable[int] | None = None) -> list[frozenset]:
        """Vertex sets of the subtrees left after deleting ``removed``."""
        removed = set(removed)
        pool = set(self.vertex_ids if within is None else within) - removed
        out = []
        while pool:
            start = min(pool)
            comp = {start}
            stack = [start]
            while stack:
                x = stack.pop()
                for y in self.neighbors[x]:
                    if y in pool and y not in comp:
                        comp.add(y)
                        stack.append(y)
            pool -= comp
            out.append(frozenset(comp))
        return sorted(out, key=min)

    def side(self, u: int, v: int) -> frozenset:
        """Vertices on u's side once the tree edge u-v is removed."""
        return _side(self, u, v)

    def induced(self, verts: Iterable[int]) -> "Udt":
        verts = frozenset(verts)
        return Udt(
            tuple(x for x in self.leaves if x.id in verts),
            tuple(e for e in self.edges if e.u in verts and e.v in verts),
        )


@lru_cache(maxsize=4096)
def _side(T: Udt, u: int, v: int) -> frozenset:
    seen = {u}
    stack = [u]
    while stack:
        x = stack.pop()
        for y in T.neighbors[x]:
            if y not in seen and not (x == u and y == v):
                seen.add(y)
                stack.append(y)
    return frozenset(seen)


def default_order(T: Udt) -> list[tuple[int, int]]:
    return [(e.u, e.v) for e in T.edges]


def _evaluate(T: Udt, verts: frozenset, order: Sequence[tuple[int, int]], validate: bool) -> BinaryMatroid:
    if len(verts) == 1:
        return T.matroid(next(iter(verts)))
    for u, v in order:
        if u in verts and v in verts:
            break
    else:
        raise PreconditionError("removal order does not cover the tree")
    side_u = _side(T, u, v) & verts
    side_v = verts - side_u
    M1 = _evaluate(T, side_u, order, validate)
    M2 = _evaluate(T, side_v, order, validate)
    try:
        M, _ = delta_sum(M1, M2, validate)
    except SumValidityError as exc:
        raise SumValidityError(f"edge {u}-{v}: {exc}", exc.clause, (u, v)) from exc
    return M


def evaluate_udt(
    T: Udt, removal_order: Sequence[tuple[int, int]] | None = None, validate: bool = True
) -> BinaryMatroid:
    """The matroid M_T, splitting at the first listed edge inside each subtree."""
    if removal_order is None:
        return subtree_matroid(T, frozenset(T.vertex_ids), validate)
    order = [(min(u, v), max(u, v)) for u, v in removal_order]
    if sorted(order) != sorted(default_order(T)):
        raise PreconditionError("removal order must list every tree edge exactly once")
    return _evaluate(T, frozenset(T.vertex_ids), order, validate)


@lru_cache(maxsize=4096)
def subtree_matroid(T: Udt, verts: frozenset, validate: bool = True) -> BinaryMatroid:
    """M_{T'} for the subtree induced on ``verts`` (lexicographic removal order)."""
    return _evaluate(T, frozenset(verts), default_order(T), validate)


def all_removal_orders(T: Udt) -> list[list[tuple[int, int]]]:
    return [list(p) for p in permutations(default_order(T))]


# --- projections -------------------------------------------------------------------


@dataclass(frozen=True)
class Projection:
    """Per-vertex pieces C_v with C = Δ_v C_v."""

    tree: Udt
    circuit: frozenset
    parts: Mapping[int, frozenset]
    crossing: Mapping[tuple[int, int], int | None] = field(default_factory=dict)

    def part(self, v: int) -> frozenset:
        return self.parts.get(v, frozenset())

    def gamma(self, v: int) -> int:
        """|C ∩ E_v|: the circuit elements owned by vertex v."""
        return len(self.circuit & self.tree.ground(v))

    def gammas(self) -> dict[int, int]:
        return {v: self.gamma(v) for v in self.tree.vertex_ids}

    def gamma_subtree(self, verts: Iterable[int]) -> int:
        return sum(self.gamma(v) for v in verts)

    def support(self) -> frozenset:
        return frozenset(v for v, p in self.parts.items() if p)

    def subtree_part(self, verts: Iterable[int]) -> frozenset:
        """C_{T'} = Δ_{v in T'} C_v."""
        out: frozenset = frozenset()
        for v in verts:
            out = out ^ self.part(v)
        return out

    def reassemble(self) -> frozenset:
        return self.subtree_part(self.tree.vertex_ids)


def project_circuit(T: Udt, C: Iterable[int], check: bool = True) -> Projection:
    """Split a circuit of M_T into its per-vertex projections."""
    C = frozenset(C)
    if check:
        M = evaluate_udt(T)
        if not C <= M.ground_set or not is_circuit(M, C):
            raise NotCircuitError(f"{sorted(C)} is not a circuit of M_T")
    parts = {v: set(C & T.ground(v)) for v in T.vertex_ids}
    crossing: dict[tuple[int, int], int | None] = {}
    for e in T.edges:
        crossing[(e.u, e.v)] = None
        if not e.shared:
            continue
        side_u = _side(T, e.u, e.v)
        side_v = frozenset(T.vertex_ids) - side_u
        Ma, Mb = subtree_matroid(T, side_u), subtree_matroid(T, side_v)
        ca, cb = C & Ma.ground_set, C & Mb.ground_set
        if not ca or not cb:
            continue
        hits = [s for s in sorted(e.shared) if is_circuit(Ma, ca | {s}) and is_circuit(Mb, cb | {s})]
        if len(hits) != 1:
            raise NotCircuitError(
                f"circuit crosses edge {e.u}-{e.v} with {len(hits)} admissible shared elements"
            )
        crossing[(e.u, e.v)] = hits[0]
        parts[e.u].add(hits[0])
        parts[e.v].add(hits[0])
    return Projection(T, C, {v: frozenset(p) for v, p in parts.items()}, crossing)


# --- random instances --------------------------------------------------------------


def _random_leaf(kind: str, size_range: tuple[int, int], rng: np.random.Generator) -> BinaryMatroid:
    from .graphs import cographic_matroid, graphic_matroid, random_graph

    if kind in ("R10", "F7"):
        return builtin(kind)
    lo, hi = size_range
    m = int(rng.integers(lo, hi + 1))
    # pick a vertex count that leaves room for a few cycles
    if kind == "graphic":
        n = max(2, min(m, int(rng.integers(max(2, m // 2), max(3, (2 * m) // 3 + 2)))))
    else:
        n = max(2, min(m, int(rng.integers(max(2, m // 3 + 1), max(3, m // 2 + 2)))))
    n = min(n, m + 1)
    simple_max = n * (n - 1) // 2
    G = random_graph(n, m, int(rng.integers(2**31)), allow_parallel=m > simple_max)
    return graphic_matroid(G) if kind == "graphic" else cographic_matroid(G)


def _free_triangles(M: BinaryMatroid, used: frozenset) -> list[frozenset]:
    return [c for c in enumerate_circuits(M, weight_cap=3) if len(c) == 3 and not c & used]


def random_udt(
    leaf_count: int,
    leaf_size_range: tuple[int, int] = (5, 8),
    leaf_types: Sequence[str] = ("graphic",),
    seed: int = 0,
    max_m: int | None = None,
    three_sum_prob: float = 0.5,
    one_sum_prob: float = 0.0,
    retries: int = 200,
) -> Udt:
    """Random valid decomposition tree, deterministic per seed."""
    if leaf_count < 1 or leaf_size_range[0] < 1 or leaf_size_range[0] > leaf_size_range[1]:
        raise PreconditionError("leaf_count and leaf sizes must be positive")
    bad = set(leaf_types) - {"graphic", "cographic", "R10", "F7"}
    if bad or not leaf_types:
        raise PreconditionError(f"unsupported leaf types {sorted(bad)}")
    rng = np.random.default_rng(seed)
    for _ in range(retries):
        try:
            T = _attempt_udt(leaf_count, leaf_size_range, list(leaf_types), rng, three_sum_prob, one_sum_prob)
        except _Retry:
            continue
        if max_m is not None and T.m > max_m:
            continue
        try:
            evaluate_udt(T)
        except SumValidityError:
            continue
        return T
    raise GenerationError(f"no valid decomposition tree after {retries} attempts")


class _Retry(Exception):
    pass


def _attempt_udt(
    leaf_count: int,
    size_range: tuple[int, int],
    leaf_types: list[str],
    rng: np.random.Generator,
    three_sum_prob: float,
    one_sum_prob: float,
) -> Udt:
    next_label = 0
    leaves: list[Leaf] = []
    used: dict[int, frozenset] = {}
    edges: list[TreeEdge] = []

    def fresh(M: BinaryMatroid) -> BinaryMatroid:
        nonlocal next_label
        mapping = {lab: next_label + i for i, lab in enumerate(M.labels)}
        next_label += M.m
        return M.relabel(mapping)

    for vid in range(leaf_count):
        kind = leaf_types[int(rng.integers(len(leaf_types)))]
        M = fresh(_random_leaf(kind, size_range, rng))
        if vid == 0:
            leaves.append(Leaf(0, kind, M))
            used[0] = frozenset()
            continue
        parent = int(rng.integers(vid))
        P = leaves[parent].matroid
        roll = rng.random()
        if roll < one_sum_prob:
            shared: frozenset = frozenset()
        elif roll < one_sum_prob + three_sum_prob and P.m >= 7 and M.m >= 7:
            tp = _free_triangles(P, used[parent])
            tm = _free_triangles(M, frozenset())
            tp = [t for t in tp if not _contains_cocircuit(P, t)]
            tm = [t for t in tm if not _contains_cocircuit(M, t)]
            if not tp or not tm:
                raise _Retry
            a = sorted(tp[int(rng.integers(len(tp)))])
            b = sorted(tm[int(rng.integers(len(tm)))])
            perm = rng.permutation(3).tolist()
            M = M.relabel({b[i]: a[perm[i]] for i in range(3)})
            shared = frozenset(a)
        else:
            D_P, D_M = dual(P), dual(M)
            okp = [x for x in P.labels if x not in used[parent]
                   and not is_circuit(P, {x}) and not is_circuit(D_P, {x})]
            okm = [x for x in M.labels if not is_circuit(M, {x}) and not is_circuit(D_M, {x})]
            if not okp or not okm or P.m < 3 or M.m < 3:
                raise _Retry
            a1 = okp[int(rng.integers(len(okp)))]
            b1 = okm[int(rng.integers(len(okm)))]
            M = M.relabel({b1: a1})
            shared = frozenset({a1})
        leaves.append(Leaf(vid, kind, M))
        used[parent] = used[parent] | shared
        used[vid] = shared
        edges.append(TreeEdge(parent, vid, shared))
    return Udt(tuple(leaves), tuple(edges))
