"""Near-minimum circuit enumeration on a decomposition tree by signature classes.

A circuit C of size at most alpha*r picks out a small set U of center vertices
whose removal leaves subtrees carrying at most r/2 of C.  Circuits sharing U
and the shared elements through which C passes between centers form a class.
Inside a class, the pieces on subtrees are forced by the girth promise and
the pieces on centers are circuits of a reweighted leaf matroid.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import ceil, lcm, log
from typing import Hashable, Iterable, Mapping

import numpy as np

from .errors import (
    GirthViolationError,
    NotCircuitError,
    PreconditionError,
    SizeError,
    UniquenessViolationError,
)
from .exact import floor_times, power_value, within_power
from .gf2 import (
    BinaryMatroid,
    cycle_space_basis,
    enumerate_circuits,
    is_circuit,
    sort_circuits,
    span_enumerate,
)
from .ksum import Projection, Udt, _side, evaluate_udt, project_circuit, subtree_matroid

# internal leaf and subtree enumerations are bounded by nullity, not by m
_INNER_CAP = 64


# --- tree division -----------------------------------------------------------------


def _adjacency(tree) -> Mapping[Hashable, Iterable[Hashable]]:
    return tree.neighbors if isinstance(tree, Udt) else tree


def _components(adj, verts: frozenset) -> list[frozenset]:
    pool = set(verts)
    out = []
    while pool:
        start = min(pool)
        comp = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y in pool and y not in comp:
                    comp.add(y)
                    stack.append(y)
        pool -= comp
        out.append(frozenset(comp))
    return sorted(out, key=min)


def find_center(tree, gamma: Mapping, verts: Iterable | None = None):
    """A vertex whose removal leaves pieces of weight at most half the total.

    Walks from the lowest id toward the unique over-heavy piece, if any.
    """
    adj = _adjacency(tree)
    verts = frozenset(adj if verts is None else verts)
    if not verts:
        raise PreconditionError("tree has no vertices")
    q = sum(gamma.get(v, 0) for v in verts)
    v = min(verts)
    while True:
        heavy = None
        for comp in _components(adj, verts - {v}):
            if 2 * sum(gamma.get(x, 0) for x in comp) > q:
                heavy = comp
                break
        if heavy is None:
            return v
        v = next(y for y in sorted(adj[v]) if y in heavy)


def balanced_division(tree, gamma: Mapping, p: int, r: int, verts: Iterable | None = None) -> frozenset:
    """Centers U after p+1 halving rounds; every piece of T - U weighs at most r/2."""
    adj = _adjacency(tree)
    verts = frozenset(adj if verts is None else verts)
    total = sum(gamma.get(v, 0) for v in verts)
    if p < 0 or r < 0:
        raise PreconditionError("p and r must be nonnegative")
    if total > 2**p * r:
        raise PreconditionError(f"total weight {total} exceeds 2^p * r = {2**p * r}")
    U: set = set()
    pieces = [verts]
    for i in range(p + 1):
        nxt = []
        for piece in pieces:
            # heavy means weight > 2^(p-i-1) r
            if 2 ** (i + 1) * sum(gamma.get(v, 0) for v in piece) > 2**p * r:
                c = find_center(adj, gamma, piece)
                U.add(c)
                nxt.extend(_components(adj, piece - {c}))
            else:
                nxt.append(piece)
        pieces = nxt
    return frozenset(U)


def choose_p(alpha) -> int:
    """Smallest p with 2^p >= 2 alpha."""
    alpha = Fraction(alpha)
    p = 0
    while 2**p < 2 * alpha:
        p += 1
    return p


def max_centers(alpha) -> int:
    """Largest possible |U|: strictly fewer than 4 alpha."""
    return ceil(4 * Fraction(alpha)) - 1


# --- signatures --------------------------------------------------------------------


@dataclass(frozen=True)
class Signature:
    centers: frozenset
    pins: frozenset = frozenset()

    def pins_of(self, u: int) -> frozenset:
        return frozenset(e for v, e in self.pins if v == u)

    def key(self) -> tuple:
        return (tuple(sorted(self.centers)), tuple(sorted(self.pins)))

    def __str__(self) -> str:
        pins = " ".join(f"{u}:{e}" for u, e in sorted(self.pins))
        return f"U={sorted(self.centers)} pins=[{pins}]"


def star_neighbors(T: Udt, U: frozenset, u: int) -> tuple[int, ...]:
    """N*(u): neighbors of u lying on a path from u to another center."""
    others = U - {u}
    return tuple(v for v in T.neighbors[u] if _side(T, v, u) & others)


def _edge(u: int, v: int) -> tuple[int, int]:
    return (min(u, v), max(u, v))


def signature_of(
    T: Udt, C: Iterable[int], alpha, r: int, projection: Projection | None = None
) -> Signature:
    C = frozenset(C)
    alpha = Fraction(alpha)
    if len(C) > floor_times(alpha, r):
        raise SizeError(f"circuit of size {len(C)} exceeds alpha*r = {alpha * r}")
    P = projection if projection is not None else project_circuit(T, C)
    U = balanced_division(T, P.gammas(), choose_p(alpha), r)
    pins = set()
    for u in U:
        for v in star_neighbors(T, U, u):
            e = P.crossing[_edge(u, v)]
            if e is None:
                raise NotCircuitError(f"circuit does not cross edge {u}-{v} between centers")
            pins.add((u, e))
    return Signature(U, frozenset(pins))


# --- class enumeration -------------------------------------------------------------


@dataclass
class ClassEnumeration:
    signature: Signature
    circuits: list = field(default_factory=list)
    per_center_counts: dict = field(default_factory=dict)
    weights: dict = field(default_factory=dict)
    t0_subtrees: dict = field(default_factory=dict)
    t1_projections: dict = field(default_factory=dict)
    center_candidates: dict = field(default_factory=dict)


class _Engine:
    """Caches shared by all classes of one (tree, r, alpha) run."""

    def __init__(self, T: Udt, r: int, alpha):
        self.T = T
        self.r = r
        self.alpha = Fraction(alpha)
        self.cap = floor_times(self.alpha, r)
        self.M = evaluate_udt(T)
        self.E = self.M.ground_set
        self._pinned: dict = {}
        self._signatures: dict = {}

    def boundary(self, verts: frozenset, u: int) -> frozenset:
        """Shared elements between the subtree ``verts`` and the adjacent vertex u."""
        out: frozenset = frozenset()
        for v in self.T.neighbors[u]:
            if v in verts:
                out |= self.T.shared(u, v)
        return out

    def pinned_circuit(self, verts: frozenset, allowed: frozenset, boundary: frozenset):
        """The unique circuit of M_{T'} meeting its boundary exactly in ``allowed``
        with at most r/2 elements elsewhere, or None."""
        key = (verts, allowed, boundary)
        if key not in self._pinned:
            M = subtree_matroid(self.T, verts, False)
            found = enumerate_circuits(
                M,
                weight_cap=self.r // 2 + len(allowed),
                required=allowed,
                forbidden=boundary - allowed,
                cap=_INNER_CAP,
            )
            if len(found) > 1:
                raise UniquenessViolationError(
                    f"subtree {sorted(verts)} has {len(found)} small circuits through {sorted(allowed)}",
                    witness=found[0] ^ found[1],
                )
            self._pinned[key] = found[0] if found else None
        return self._pinned[key]

    def signature(self, C: frozenset) -> Signature:
        if C not in self._signatures:
            self._signatures[C] = signature_of(self.T, C, self.alpha, self.r)
        return self._signatures[C]

    def run_class(self, S: Signature) -> ClassEnumeration:
        T, r = self.T, self.r
        out = ClassEnumeration(S)
        U = frozenset(S.centers)
        if not U:
            return out
        if not U <= set(T.vertex_ids):
            raise PreconditionError("signature names vertices outside the tree")
        pins = {u: S.pins_of(u) for u in U}
        pieces = _components(T.neighbors, frozenset(T.vertex_ids) - U)
        touching = {piece: sorted(u for u in U if any(v in piece for v in T.neighbors[u])) for piece in pieces}

        # subtrees between two or more centers: one forced projection each
        fixed: frozenset = frozenset()
        for piece in pieces:
            adj_centers = touching[piece]
            if len(adj_centers) < 2:
                continue
            boundary: frozenset = frozenset()
            chosen: frozenset = frozenset()
            for u in adj_centers:
                b = self.boundary(piece, u)
                boundary |= b
                chosen |= b & pins[u]
            c = self.pinned_circuit(piece, chosen, boundary)
            if c is None:
                return out
            out.t1_projections[piece] = c
            fixed = fixed ^ c

        # per center: reweighted leaf, required pins, girth check
        options: list[list[tuple[frozenset, int]]] = []
        for u in sorted(U):
            Mu = T.matroid(u)
            drop: set = set()
            weights: dict[int, int] = {}
            expand: dict[int, frozenset] = {}
            t0 = []
            for v in T.neighbors[u]:
                s_uv = T.shared(u, v)
                if v in U:
                    drop |= s_uv - pins[u]
                    continue
                piece = next(p for p in pieces if v in p)
                if len(touching[piece]) >= 2:
                    drop |= s_uv - pins[u]
                    continue
                t0.append(piece)
                for s in sorted(s_uv):
                    c = self.pinned_circuit(piece, frozenset({s}), s_uv)
                    if c is None:
                        drop.add(s)
                    else:
                        weights[s] = len(c) - 1
                        expand[s] = c
            R = pins[u]
            if R & drop or not R <= Mu.ground_set:
                return out
            out.weights[u] = {e: weights.get(e, 1) for e in Mu.labels if e not in drop}
            out.t0_subtrees[u] = t0
            Mbar = Mu.restrict(Mu.ground_set - drop)
            w = out.weights[u]
            if any(x < 1 for x in w.values()):
                raise GirthViolationError(f"a subtree at center {u} carries a one-element circuit")

            light = enumerate_circuits(Mbar, w, weight_cap=r, forbidden=R, cap=_INNER_CAP)
            if light:
                D = light[0]
                for s in D:
                    if s in expand:
                        D = D ^ expand[s]
                raise GirthViolationError(
                    f"center {u} admits a cycle of weight <= {r} avoiding its pins", witness=D
                )
            cands = []
            for Du in enumerate_circuits(Mbar, w, weight_cap=self.cap + len(R), required=R, cap=_INNER_CAP):
                X = Du
                for s in Du:
                    if s in expand:
                        X = X ^ expand[s]
                cands.append((X, len(X & self.E)))
            cands.sort(key=lambda t: (t[1], sorted(t[0])))
            out.center_candidates[u] = [x for x, _ in cands]
            options.append(cands)

        base = len(fixed & self.E)
        found: set = set()
        centers = sorted(U)

        def compose(i: int, acc: frozenset, size: int) -> None:
            if i == len(options):
                if acc <= self.E and acc and is_circuit(self.M, acc):
                    found.add(acc)
                return
            for X, sz in options[i]:
                if size + sz > self.cap:
                    break
                compose(i + 1, acc ^ X, size + sz)

        compose(0, fixed, base)
        members = [C for C in found if self.signature(C) == S]
        out.circuits = sort_circuits(members)
        for u in centers:
            parts = set()
            for C in out.circuits:
                P = project_circuit(T, C, check=False)
                X = P.part(u)
                for piece in out.t0_subtrees[u]:
                    X = X ^ P.subtree_part(piece)
                parts.add(X)
            out.per_center_counts[u] = len(parts)
        return out


def enumerate_class(T: Udt, S: Signature, alpha, r: int) -> ClassEnumeration:
    """All circuits of size at most alpha*r whose canonical signature is S."""
    return _Engine(T, r, alpha).run_class(S)


def candidate_signatures(T: Udt, alpha) -> list[Signature]:
    """Every signature shape the division can produce for this alpha."""
    ids = T.vertex_ids
    out = []
    for k in range(1, min(max_centers(alpha), len(ids)) + 1):
        for U in combinations(ids, k):
            U = frozenset(U)
            slots = []
            for u in sorted(U):
                for v in star_neighbors(T, U, u):
                    slots.append((u, v))
            choices = [sorted(T.shared(u, v)) for u, v in slots]
            if any(not c for c in choices):
                continue
            for pick in product(*choices):
                chosen = dict(zip(slots, pick))
                # both ends of a center-center edge see the same crossing element
                if any((v, u) in chosen and chosen[(v, u)] != e for (u, v), e in chosen.items()):
                    continue
                out.append(Signature(U, frozenset((u, e) for (u, _), e in chosen.items())))
    return sorted(out, key=Signature.key)


def check_girth(M: BinaryMatroid, r: int, cap: int = 24) -> bool:
    """Raise if M has a circuit of size <= r; False when M is too big to check."""
    if M.m > cap:
        return False
    small = enumerate_circuits(M, weight_cap=r, cap=cap)
    if small:
        raise GirthViolationError(f"circuit of size {len(small[0])} <= r = {r}", witness=small[0])
    return True


@dataclass
class NearMinResult:
    circuits: list
    classes: dict
    girth_verified: bool


def near_min_classes(T: Udt, r: int, alpha, verify_girth: bool = True, cap: int = 24) -> NearMinResult:
    alpha = Fraction(alpha)
    if r < 0:
        raise PreconditionError("r must be nonnegative")
    eng = _Engine(T, r, alpha)
    verified = check_girth(eng.M, r, cap) if verify_girth else False
    classes = {}
    union: set = set()
    for S in candidate_signatures(T, alpha):
        res = eng.run_class(S)
        if res.circuits:
            classes[S] = res
            union.update(res.circuits)
    return NearMinResult(sort_circuits(union), classes, verified)


def enumerate_near_min_circuits(T: Udt, r: int, alpha, verify_girth: bool = True, cap: int = 24) -> list:
    """All circuits of M_T with at most alpha*r elements, assuming none has <= r."""
    return near_min_classes(T, r, alpha, verify_girth, cap).circuits


# --- light codewords ---------------------------------------------------------------


def enumerate_light_codewords(T_or_M, d: int, alpha) -> list[frozenset]:
    """Disjoint unions of circuits with total size at most alpha*d.

    These are the codewords of weight <= alpha*d of the binary code whose
    parity-check matrix represents the matroid.
    """
    alpha = Fraction(alpha)
    if d < 1:
        raise PreconditionError("minimum distance d must be positive")
    cap = floor_times(alpha, d)
    if isinstance(T_or_M, Udt):
        if d < 2:
            raise PreconditionError("tree route needs d >= 2")
        circuits = enumerate_near_min_circuits(T_or_M, d - 1, alpha * d / (d - 1))
    else:
        M = T_or_M
        small = enumerate_circuits(M, weight_cap=d - 1, cap=_INNER_CAP)
        if small:
            raise GirthViolationError(f"circuit of size {len(small[0])} < d = {d}", witness=small[0])
        circuits = enumerate_circuits(M, weight_cap=cap, cap=_INNER_CAP)
    circuits = sorted(circuits, key=lambda c: (len(c), sorted(c)))
    out: set = set()

    def grow(start: int, acc: frozenset) -> None:
        for i in range(start, len(circuits)):
            c = circuits[i]
            if len(acc) + len(c) > cap:
                break
            if c & acc:
                continue
            nxt = acc | c
            out.add(nxt)
            grow(i + 1, nxt)

    grow(0, frozenset())
    return sort_circuits(out)


def codeword_oracle(M: BinaryMatroid, weight_cap: int) -> list[frozenset]:
    """Nonzero cycle-space vectors of weight <= weight_cap, by full span enumeration."""
    masks = span_enumerate(cycle_space_basis(M))[1:]
    masks = masks[np.bitwise_count(masks) <= weight_cap]
    return sort_circuits(M.labels_of(int(x)) for x in masks.tolist())


# --- bound report ------------------------------------------------------------------

REPORT_FIELDS = ("m", "r", "alpha", "circuits_observed", "signatures_observed", "bound_9m", "bound_class", "pass")


@dataclass
class BoundReport:
    m: int
    r: int
    alpha: Fraction
    circuits_observed: int
    signatures_observed: int
    bound_9m: int | float
    bound_class: int | float
    passed: bool
    max_class: int = 0
    max_center: int = 0
    bound_center: int | float = 0
    max_pins: int = 0
    bound_graphic: int | float = 0
    girth_verified: bool = False
    exponent_fit: float | None = None
    warnings: tuple = ()

    def row(self) -> dict:
        return {
            "m": self.m,
            "r": self.r,
            "alpha": str(self.alpha),
            "circuits_observed": self.circuits_observed,
            "signatures_observed": self.signatures_observed,
            "bound_9m": self.bound_9m,
            "bound_class": self.bound_class,
            "pass": "true" if self.passed else "false",
        }


def write_reports(reports: Iterable[BoundReport], fmt: str = "csv") -> str:
    rows = [rep.row() for rep in reports]
    if fmt == "jsonl":
        return "".join(json.dumps(row) + "\n" for row in rows)
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=REPORT_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def bound_report(T: Udt, r: int, alpha, verify_girth: bool = True, cap: int = 24) -> BoundReport:
    alpha = Fraction(alpha)
    res = near_min_classes(T, r, alpha, verify_girth, cap)
    m = T.m
    b9 = power_value(9 * m, 4 * alpha)
    # (12 alpha)^(4 alpha) (2m)^(2 alpha), and its 4 alpha-th power per class
    b_center = _product_power([(12 * alpha, 4 * alpha), (2 * m, 2 * alpha)])
    b_class = _product_power([(12 * alpha, 16 * alpha * alpha), (2 * m, 8 * alpha * alpha)])
    max_class = max((len(c.circuits) for c in res.classes.values()), default=0)
    max_center = max((n for c in res.classes.values() for n in c.per_center_counts.values()), default=0)
    max_pins = max((len(c.signature.pins_of(u)) for c in res.classes.values() for u in c.signature.centers), default=0)
    b_graphic = _product_power([(4 * alpha + 2 * max_pins, max_pins), (2 * m, 2 * alpha)])
    ok = (
        within_power(len(res.classes), 9 * m, 4 * alpha)
        and _within_product(max_class, [(12 * alpha, 16 * alpha * alpha), (2 * m, 8 * alpha * alpha)])
        and _within_product(max_center, [(12 * alpha, 4 * alpha), (2 * m, 2 * alpha)])
    )
    count = len(res.circuits)
    fit = log(count) / (alpha * alpha * log(m)) if count > 1 and m > 1 else None
    warnings = () if res.girth_verified or not verify_girth else ("girth promise trusted, not verified",)
    return BoundReport(
        m, r, alpha, count, len(res.classes), b9, b_class, ok,
        max_class, max_center, b_center, max_pins, b_graphic, res.girth_verified,
        fit if fit is None else float(fit), warnings,
    )


def _product_power(terms):
    vals = [power_value(b, e) for b, e in terms]
    out = 1
    for v in vals:
        out = out * v
    return out


def _within_product(count: int, terms) -> bool:
    """count <= prod base_i ^ exp_i, decided exactly."""
    if count <= 0:
        return True
    # split rational exponents over a common denominator q: count^q <= prod base^(p_i)
    q = lcm(*(Fraction(e).denominator for _, e in terms))
    lhs = Fraction(count) ** q
    rhs = Fraction(1)
    for b, e in terms:
        rhs *= Fraction(b) ** int(Fraction(e) * q)
    return lhs <= rhs
