"""Totally unimodular matrices, their signed circuits and short kernel vectors.

Vectors are plain tuples of ints.  Norms are squared and compared exactly.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import gcd, isqrt, lcm
from typing import Iterable, Sequence

import numpy as np

from .errors import EntryError, GirthViolationError, OracleSizeError, ShapeError, TUViolationError

TU_CAP = 8

Vector = tuple


def as_matrix(A) -> np.ndarray:
    """Integer matrix with entries in {-1, 0, 1}, as a 2-D int64 array."""
    arr = np.asarray(A, dtype=object)
    if arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, 0)
    if arr.ndim != 2:
        raise ShapeError("matrix must be two-dimensional")
    for (i, j), x in np.ndenumerate(arr):
        if x not in (-1, 0, 1) or isinstance(x, bool):
            raise EntryError(f"entry ({i}, {j}) = {x!r} is not in {{-1, 0, 1}}")
    return arr.astype(np.int64)


def norm2(v: Sequence[int]) -> int:
    return sum(x * x for x in v)


def in_kernel(A, v: Sequence[int]) -> bool:
    A = np.asarray(A, dtype=np.int64)
    return not np.any(A @ np.asarray(v, dtype=np.int64))


def is_totally_unimodular(A, cap: int = TU_CAP) -> bool:
    """Check every square minor; brute force, so min(n, m) is capped."""
    A = as_matrix(A)
    n, m = A.shape
    if min(n, m) > cap:
        raise OracleSizeError(f"min(n, m) = {min(n, m)} exceeds the TU cap {cap}")
    return find_bad_minor(A) is None


def find_bad_minor(A) -> tuple | None:
    """(rows, cols, det) of some square submatrix with |det| > 1, or None."""
    A = as_matrix(A)
    n, m = A.shape
    Af = A.astype(float)
    for k in range(2, min(n, m) + 1):
        rows = np.array(list(combinations(range(n), k)))
        cols = np.array(list(combinations(range(m), k)))
        for r in rows:
            sub = Af[r][:, cols]  # (k, len(cols), k)
            dets = np.rint(np.linalg.det(np.transpose(sub, (1, 0, 2))))
            bad = np.flatnonzero(np.abs(dets) > 1)
            if bad.size:
                j = int(bad[0])
                return tuple(int(x) for x in r), tuple(int(x) for x in cols[j]), int(dets[j])
    return None


# --- exact rational kernels --------------------------------------------------------


def _rref(rows: list[list[Fraction]], width: int) -> tuple[list[list[Fraction]], list[int]]:
    rows = [list(r) for r in rows]
    pivots = []
    lead = 0
    for c in range(width):
        piv = next((i for i in range(lead, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[lead], rows[piv] = rows[piv], rows[lead]
        inv = 1 / rows[lead][c]
        rows[lead] = [x * inv for x in rows[lead]]
        for i in range(len(rows)):
            if i != lead and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[lead])]
        pivots.append(c)
        lead += 1
    return rows[:lead], pivots


def kernel_basis(A) -> list[tuple[Fraction, ...]]:
    """Rational basis of {x : A x = 0}, one vector per free column."""
    A = np.asarray(A, dtype=np.int64)
    n, m = A.shape
    rows, pivots = _rref([[Fraction(int(x)) for x in row] for row in A], m)
    free = [c for c in range(m) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * m
        x[f] = Fraction(1)
        for r, p in zip(rows, pivots):
            x[p] = -r[f]
        basis.append(tuple(x))
    return basis


def _primitive(x: Sequence[Fraction]) -> tuple[int, ...]:
    den = lcm(*(q.denominator for q in x))
    ints = [int(q * den) for q in x]
    g = 0
    for v in ints:
        g = gcd(g, v)
    ints = [v // g for v in ints]
    first = next(v for v in ints if v)
    return tuple(-v for v in ints) if first < 0 else tuple(ints)


def matrix_circuits(A, norm2_cap: int | None = None) -> list[Vector]:
    """One representative per ± pair of circuits, first nonzero entry positive.

    A circuit is a kernel vector with inclusion-minimal support; we find the
    supports whose column submatrix has a one-dimensional kernel with full
    support, and recover signs from that kernel exactly.
    """
    A = as_matrix(A)
    n, m = A.shape
    rank = np.linalg.matrix_rank(A.astype(float)) if n and m else 0
    out = []
    dependent_found: list[int] = []
    for k in range(1, min(m, rank + 1) + 1):
        if norm2_cap is not None and k > norm2_cap:
            break
        for S in combinations(range(m), k):
            mask = sum(1 << j for j in S)
            if any(d & mask == d for d in dependent_found):
                continue
            ker = kernel_basis(A[:, S])
            if len(ker) != 1:
                continue
            x = ker[0]
            if any(q == 0 for q in x):
                continue
            dependent_found.append(mask)
            prim = _primitive(x)
            if any(abs(v) > 1 for v in prim):
                raise TUViolationError(
                    f"support {list(S)} has primitive kernel vector {list(prim)} outside {{-1, 0, 1}}"
                )
            full = [0] * m
            for j, v in zip(S, prim):
                full[j] = v
            out.append(tuple(full))
    return sorted(out, key=_support_key)


def _support_key(v: Vector) -> tuple:
    return (tuple(i for i, x in enumerate(v) if x), tuple(-x for x in v))


def is_conformal(u: Sequence[int], v: Sequence[int]) -> bool:
    """u ⊑ v: same sign wherever u is nonzero and |u_i| <= |v_i|."""
    if len(u) != len(v):
        raise ShapeError(f"lengths {len(u)} and {len(v)} differ")
    return all(a * b >= 0 and abs(a) <= abs(b) for a, b in zip(u, v))


def conformal_decompose(A, v: Sequence[int], circuits: Iterable[Vector] | None = None) -> list[Vector]:
    """Greedy split of a lattice vector into circuits conformal to it."""
    A = as_matrix(A)
    v = tuple(int(x) for x in v)
    if len(v) != A.shape[1]:
        raise ShapeError(f"vector has length {len(v)}, matrix has {A.shape[1]} columns")
    if not in_kernel(A, v):
        raise TUViolationError("vector is not in the kernel lattice")
    reps = list(circuits) if circuits is not None else matrix_circuits(A)
    signed = sorted(reps + [tuple(-x for x in u) for u in reps], key=_support_key)
    rest = list(v)
    parts = []
    while any(rest):
        u = next((c for c in signed if is_conformal(c, rest)), None)
        if u is None:
            raise TUViolationError(f"no circuit conformal to remainder {rest}")
        parts.append(u)
        rest = [a - b for a, b in zip(rest, u)]
    if sum(norm2(u) for u in parts) > norm2(v):
        raise TUViolationError("conformal parts are longer than the vector")
    return parts


def _within(n2: int, lambda2: int, alpha: Fraction) -> bool:
    """n2 <= alpha^2 * lambda2, exactly."""
    return n2 * alpha.denominator**2 <= alpha.numerator**2 * lambda2


def enumerate_short_vectors(A, lambda2: int, alpha) -> list[Vector]:
    """Nonzero v in L(A) with ||v||^2 <= alpha^2 * lambda2.

    Promise: every nonzero lattice vector has squared norm > lambda2.  Each
    short vector is a sign-compatible sum of fewer than alpha^2 circuits.
    """
    A = as_matrix(A)
    alpha = Fraction(alpha)
    if alpha < 1 or lambda2 < 0:
        raise ValueError("need alpha >= 1 and lambda2 >= 0")
    reps = matrix_circuits(A)
    for u in reps:
        if norm2(u) <= lambda2:
            raise GirthViolationError(f"circuit of squared norm {norm2(u)} <= {lambda2}", witness=u)
    signed = [u for u in reps if _within(norm2(u), lambda2, alpha)]
    signed = sorted(signed + [tuple(-x for x in u) for u in signed], key=_support_key)
    m = A.shape[1]
    found: set = set()

    def grow(start: int, acc: list[int], used: int) -> None:
        for i in range(start, len(signed)):
            u = signed[i]
            total = used + norm2(u)
            if not _within(total, lambda2, alpha):
                continue
            if any(a * b < 0 for a, b in zip(acc, u)):
                continue
            nxt = [a + b for a, b in zip(acc, u)]
            if _within(norm2(nxt), lambda2, alpha):
                found.add(tuple(nxt))
            grow(i, nxt, total)

    grow(0, [0] * m, 0)
    out = [v for v in found if in_kernel(A, v)]
    return sorted(out, key=_support_key)


def short_vector_oracle(A, norm2_cap: int) -> list[Vector]:
    """Nonzero integer kernel vectors with ||v||^2 <= norm2_cap, by box search.

    Enumerates the free coordinates of the reduced echelon form inside the norm
    ball and solves for the pivot coordinates; does not assume A is TU.
    """
    A = np.asarray(A, dtype=np.int64)
    n, m = A.shape
    rows, pivots = _rref([[Fraction(int(x)) for x in row] for row in A], m)
    free = [c for c in range(m) if c not in pivots]
    if not free:
        return []
    den = lcm(*(x.denominator for r in rows for x in r)) if rows else 1
    coef = np.array([[int(r[f] * den) for f in free] for r in rows], dtype=np.int64).reshape(len(rows), len(free))
    radius = isqrt(norm2_cap)
    # free coordinate vectors inside the ball, built one coordinate at a time
    vecs = np.zeros((1, 0), dtype=np.int64)
    for _ in free:
        vals = np.arange(-radius, radius + 1, dtype=np.int64)
        vecs = np.concatenate(
            [np.repeat(vecs, len(vals), axis=0), np.tile(vals, len(vecs))[:, None]], axis=1
        )
        vecs = vecs[(vecs * vecs).sum(axis=1) <= norm2_cap]
    dep = -(vecs @ coef.T) if len(rows) else np.zeros((len(vecs), 0), dtype=np.int64)
    ok = np.all(dep % den == 0, axis=1)
    vecs, dep = vecs[ok], dep[ok] // den
    full = np.zeros((len(vecs), m), dtype=np.int64)
    full[:, free] = vecs
    if pivots:
        full[:, pivots] = dep
    keep = ((full * full).sum(axis=1) <= norm2_cap) & np.any(full != 0, axis=1)
    return sorted((tuple(int(x) for x in row) for row in full[keep]), key=_support_key)


# --- TU instance generators --------------------------------------------------------


def bipartite_incidence(left: int, right: int, edges: Iterable[tuple[int, int]]) -> np.ndarray:
    """Vertex-edge incidence matrix of a bipartite graph (rows: left then right)."""
    edges = list(edges)
    A = np.zeros((left + right, len(edges)), dtype=np.int64)
    for j, (a, b) in enumerate(edges):
        A[a, j] = 1
        A[left + b, j] = 1
    return A


def directed_incidence(n: int, arcs: Iterable[tuple[int, int]]) -> np.ndarray:
    """Node-arc incidence matrix: +1 at the tail, -1 at the head."""
    arcs = list(arcs)
    A = np.zeros((n, len(arcs)), dtype=np.int64)
    for j, (a, b) in enumerate(arcs):
        A[a, j] += 1
        A[b, j] -= 1
    return A


def network_matrix(n: int, tree_arcs: Sequence[tuple[int, int]], arcs: Sequence[tuple[int, int]]) -> np.ndarray:
    """Network matrix of a directed spanning tree: column j records the signed
    tree path from the tail to the head of arc j."""
    adj: dict[int, list[tuple[int, int, int]]] = {v: [] for v in range(n)}
    for i, (a, b) in enumerate(tree_arcs):
        adj[a].append((b, i, 1))
        adj[b].append((a, i, -1))
    N = np.zeros((len(tree_arcs), len(arcs)), dtype=np.int64)
    for j, (s, t) in enumerate(arcs):
        prev = {s: None}
        stack = [s]
        while stack:
            x = stack.pop()
            for y, i, sign in adj[x]:
                if y not in prev:
                    prev[y] = (x, i, sign)
                    stack.append(y)
        if t not in prev:
            raise ValueError("tree arcs do not span the vertices")
        x = t
        while prev[x] is not None:
            x, i, sign = prev[x]
            N[i, j] = sign
    return N


def random_tu_matrix(kind: str, seed: int, max_cols: int = 12) -> np.ndarray:
    """Random TU matrix of the given family: bipartite, digraph or network."""
    if max_cols < 4:
        raise ValueError("max_cols must be at least 4")
    rng = np.random.default_rng(seed)
    if kind == "bipartite":
        left, right = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        pairs = [(a, b) for a in range(left) for b in range(right)]
        k = int(rng.integers(min(len(pairs), 3), min(len(pairs), max_cols) + 1))
        pick = rng.choice(len(pairs), size=k, replace=False)
        return bipartite_incidence(left, right, [pairs[i] for i in sorted(pick)])
    if kind == "digraph":
        n = int(rng.integers(3, min(7, max_cols + 1)))
        k = int(rng.integers(n, max_cols + 1))
        arcs = []
        while len(arcs) < k:
            a, b = rng.choice(n, size=2, replace=False)
            arcs.append((int(a), int(b)))
        return directed_incidence(n, arcs)
    if kind == "network":
        # leave room for at least two non-tree arcs
        n = int(rng.integers(3, min(7, max_cols)))
        tree = []
        for v in range(1, n):
            p = int(rng.integers(v))
            tree.append((p, v) if rng.random() < 0.5 else (v, p))
        k = int(rng.integers(2, max_cols - (n - 1) + 1))
        arcs = []
        while len(arcs) < k:
            a, b = rng.choice(n, size=2, replace=False)
            arcs.append((int(a), int(b)))
        N = network_matrix(n, tree, arcs)
        return np.concatenate([np.eye(n - 1, dtype=np.int64), N], axis=1)
    raise ValueError(f"unknown TU family {kind!r}")
