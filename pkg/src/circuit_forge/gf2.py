"""Binary matroids represented by GF(2) matrices with bitset columns.

Columns are Python ints whose bit ``i`` is the entry in row ``i``.  Ground-set
elements carry integer labels that survive every operation unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    LabelError,
    NotCycleSpaceError,
    OracleSizeError,
    PreconditionError,
    UnknownBuiltinError,
)

ORACLE_CAP = 24
MAX_TOTAL_WEIGHT = 2**62

Circuit = frozenset


def circuit_key(c: Iterable[int]) -> tuple[int, ...]:
    """Canonical sort key: the sorted label tuple."""
    return tuple(sorted(c))


def sort_circuits(circuits: Iterable[frozenset]) -> list[frozenset]:
    return sorted(circuits, key=circuit_key)


# --- bitset linear algebra -------------------------------------------------


def _reduce(v: int, basis: dict[int, int]) -> int:
    while v:
        b = basis.get(v.bit_length() - 1)
        if b is None:
            return v
        v ^= b
    return 0


def gf2_rank(vectors: Iterable[int]) -> int:
    """Rank over GF(2) of a collection of int bitsets."""
    basis: dict[int, int] = {}
    for v in vectors:
        v = _reduce(v, basis)
        if v:
            basis[v.bit_length() - 1] = v
    return len(basis)


def nullspace_masks(columns: Sequence[int]) -> list[int]:
    """Basis of {x : sum_j x_j * columns[j] = 0}, each x as a position mask."""
    basis: dict[int, tuple[int, int]] = {}
    out = []
    for j, c in enumerate(columns):
        combo = 1 << j
        while c:
            h = c.bit_length() - 1
            entry = basis.get(h)
            if entry is None:
                basis[h] = (c, combo)
                break
            c ^= entry[0]
            combo ^= entry[1]
        else:
            out.append(combo)
    return out


def rref_rows(rows: Sequence[int], width: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form of int-bitset rows; pivots scanned from column 0."""
    work = [r for r in rows if r]
    pivots: list[int] = []
    top = 0
    for col in range(width):
        bit = 1 << col
        pivot = next((i for i in range(top, len(work)) if work[i] & bit), None)
        if pivot is None:
            continue
        work[top], work[pivot] = work[pivot], work[top]
        for i in range(len(work)):
            if i != top and work[i] & bit:
                work[i] ^= work[top]
        pivots.append(col)
        top += 1
        if top == len(work):
            break
    return work[:top], pivots


def span_enumerate(basis: Sequence[int]) -> np.ndarray:
    """All 2^k XOR combinations of ``basis`` as an int64 array (index 0 is 0)."""
    arr = np.zeros(1, dtype=np.int64)
    for b in basis:
        arr = np.concatenate([arr, arr ^ np.int64(b)])
    return arr


def _byte_tables(values: Sequence[int]) -> list[np.ndarray]:
    tables = []
    for start in range(0, len(values), 8):
        chunk = values[start : start + 8]
        t = np.zeros(256, dtype=np.int64)
        for x in range(256):
            t[x] = sum(chunk[i] for i in range(len(chunk)) if x >> i & 1)
        tables.append(t)
    return tables


def masked_sums(masks: np.ndarray, values: Sequence[int]) -> np.ndarray:
    """For each position mask, the sum of ``values`` over its set bits."""
    total = np.zeros(masks.shape, dtype=np.int64)
    for b, t in enumerate(_byte_tables(values)):
        total += t[(masks >> (8 * b)) & 255]
    return total


# --- the matroid value ----------------------------------------------------


@dataclass(frozen=True)
class BinaryMatroid:
    """A binary matroid M(A); ``columns[i]`` represents element ``labels[i]``."""

    labels: tuple[int, ...]
    columns: tuple[int, ...]
    height: int

    def __post_init__(self):
        if len(self.labels) != len(self.columns):
            raise ValueError("labels and columns differ in length")
        if self.height < 0:
            raise ValueError("height must be nonnegative")
        if len(set(self.labels)) != len(self.labels):
            raise LabelError("duplicate element labels")
        for lab in self.labels:
            if not isinstance(lab, (int, np.integer)) or lab < 0:
                raise LabelError(f"labels must be nonnegative integers, got {lab!r}")
        bound = 1 << self.height
        for c in self.columns:
            if c < 0 or c >= bound:
                raise ValueError(f"column {c:#b} does not fit height {self.height}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], labels: Sequence[int] | None = None):
        """Build from a dense 0/1 matrix given row by row."""
        height = len(rows)
        m = len(rows[0]) if rows else (len(labels) if labels is not None else 0)
        if any(len(r) != m for r in rows):
            raise ValueError("ragged matrix")
        cols = []
        for j in range(m):
            c = 0
            for i in range(height):
                if rows[i][j] not in (0, 1):
                    raise ValueError(f"entry ({i},{j}) is not 0/1")
                if rows[i][j]:
                    c |= 1 << i
            cols.append(c)
        labels = tuple(range(m)) if labels is None else tuple(int(x) for x in labels)
        return cls(labels, tuple(cols), height)

    @classmethod
    def from_columns(cls, columns: Mapping[int, int], height: int):
        items = sorted(columns.items())
        return cls(tuple(k for k, _ in items), tuple(v for _, v in items), height)

    @property
    def m(self) -> int:
        return len(self.labels)

    @cached_property
    def index(self) -> dict[int, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    @cached_property
    def ground_set(self) -> frozenset:
        return frozenset(self.labels)

    @cached_property
    def full_rank(self) -> int:
        return gf2_rank(self.columns)

    def column(self, label: int) -> tuple[int, ...]:
        c = self.columns[self._pos(label)]
        return tuple(c >> i & 1 for i in range(self.height))

    def _pos(self, label: int) -> int:
        try:
            return self.index[label]
        except KeyError:
            raise LabelError(f"unknown element label {label}") from None

    def mask(self, labels: Iterable[int]) -> int:
        out = 0
        for lab in labels:
            out |= 1 << self._pos(lab)
        return out

    def labels_of(self, mask: int) -> frozenset:
        out = []
        i = 0
        while mask:
            if mask & 1:
                out.append(self.labels[i])
            mask >>= 1
            i += 1
        return frozenset(out)

    def rows(self) -> list[int]:
        """Rows as bitsets over column positions."""
        out = []
        for i in range(self.height):
            r = 0
            for j, c in enumerate(self.columns):
                if c >> i & 1:
                    r |= 1 << j
            out.append(r)
        return out

    def matrix(self) -> list[list[int]]:
        return [[c >> i & 1 for c in self.columns] for i in range(self.height)]

    def relabel(self, mapping: Mapping[int, int]) -> "BinaryMatroid":
        labels = tuple(mapping.get(x, x) for x in self.labels)
        return BinaryMatroid(labels, self.columns, self.height)

    def restrict(self, keep: Iterable[int]) -> "BinaryMatroid":
        """The deletion of every element outside ``keep``."""
        keep = set(keep)
        for lab in keep:
            self._pos(lab)
        idx = [i for i, lab in enumerate(self.labels) if lab in keep]
        return BinaryMatroid(
            tuple(self.labels[i] for i in idx), tuple(self.columns[i] for i in idx), self.height
        )

    def reduced(self) -> "BinaryMatroid":
        """Same matroid with the representation trimmed to full row rank."""
        rows, _ = rref_rows(self.rows(), self.m)
        cols = [0] * self.m
        for i, r in enumerate(rows):
            for j in range(self.m):
                if r >> j & 1:
                    cols[j] |= 1 << i
        return BinaryMatroid(self.labels, tuple(cols), len(rows))


def cycle_space_basis(M: BinaryMatroid) -> list[int]:
    """Basis of the cycle space (GF(2) kernel) as position masks."""
    return nullspace_masks(M.columns)


# --- operations -------------------------------------------------------------


def rank(M: BinaryMatroid, S: Iterable[int]) -> int:
    return gf2_rank(M.columns[M._pos(e)] for e in set(S))


def is_cycle(M: BinaryMatroid, S: Iterable[int]) -> bool:
    """True iff the columns of S sum to zero (S is a disjoint union of circuits)."""
    acc = 0
    for e in set(S):
        acc ^= M.columns[M._pos(e)]
    return acc == 0


def is_circuit(M: BinaryMatroid, S: Iterable[int]) -> bool:
    S = set(S)
    for e in S:
        M._pos(e)
    if not S:
        return False
    k = len(S)
    if rank(M, S) >= k:
        return False
    return all(rank(M, S - {e}) == k - 1 for e in S)


def enumerate_circuits(
    M: BinaryMatroid,
    weights: Mapping[int, int] | None = None,
    weight_cap: int | None = None,
    required: Iterable[int] = (),
    forbidden: Iterable[int] = (),
    cap: int = ORACLE_CAP,
) -> list[frozenset]:
    """All circuits C with required ⊆ C, C ∩ forbidden = ∅ and w(C) <= weight_cap.

    Works on the cycle space of M with the forbidden columns deleted, so the
    cost is 2^(nullity) rather than 2^m.  Output is in canonical order.
    """
    required = frozenset(required)
    forbidden = frozenset(forbidden)
    for e in required | forbidden:
        M._pos(e)
    if required & forbidden:
        raise PreconditionError("required and forbidden sets intersect")
    if M.m > cap:
        raise OracleSizeError(f"ground set of size {M.m} exceeds oracle cap {cap}")
    w = [1] * M.m
    if weights is not None:
        for lab, val in weights.items():
            if lab not in M.index:
                continue
            if int(val) != val or val < 1:
                raise ValueError(f"weight of {lab} must be a positive integer")
            w[M.index[lab]] = int(val)
    if sum(w) >= MAX_TOTAL_WEIGHT:
        raise OverflowError("total weight overflows the 62-bit accumulator")

    keep = [i for i, lab in enumerate(M.labels) if lab not in forbidden]
    cols = [M.columns[i] for i in keep]
    kw = [w[i] for i in keep]
    req_mask = 0
    for e in required:
        req_mask |= 1 << keep.index(M.index[e])

    masks = span_enumerate(nullspace_masks(cols))[1:]
    if req_mask:
        masks = masks[(masks & req_mask) == req_mask]
    if weight_cap is not None:
        masks = masks[masked_sums(masks, kw) <= weight_cap]
    sizes = np.bitwise_count(masks)

    out = []
    for mask, size in zip(masks.tolist(), sizes.tolist()):
        vecs = []
        bits = mask
        while bits:
            low = bits & -bits
            vecs.append(cols[low.bit_length() - 1])
            bits ^= low
        if gf2_rank(vecs) == size - 1:
            out.append(frozenset(M.labels[keep[j]] for j in range(len(keep)) if mask >> j & 1))
    return sort_circuits(out)


def delete(M: BinaryMatroid, e: int) -> BinaryMatroid:
    M._pos(e)
    return M.restrict(lab for lab in M.labels if lab != e)


def add_parallel(M: BinaryMatroid, e: int, e_new: int) -> BinaryMatroid:
    c = M.columns[M._pos(e)]
    if e_new in M.index:
        raise LabelError(f"label {e_new} already present")
    return BinaryMatroid(M.labels + (e_new,), M.columns + (c,), M.height)


def dual(M: BinaryMatroid) -> BinaryMatroid:
    """Representation of M* from the standard form [I | D] -> [D^T | I]."""
    rows, pivots = rref_rows(M.rows(), M.m)
    pivot_set = set(pivots)
    free = [j for j in range(M.m) if j not in pivot_set]
    cols = [0] * M.m
    for i, j in enumerate(free):
        cols[j] |= 1 << i
        for r, p in zip(rows, pivots):
            if r >> j & 1:
                cols[p] |= 1 << i
    return BinaryMatroid(M.labels, tuple(cols), len(free))


def decompose_symmetric_difference(M: BinaryMatroid, S: Iterable[int]) -> list[frozenset]:
    """Split a cycle into disjoint circuits, always taking the smallest remaining one."""
    rest = set(S)
    for e in rest:
        M._pos(e)
    if not is_cycle(M, rest):
        raise NotCycleSpaceError("set is not a disjoint union of circuits")
    out = []
    while rest:
        inside = enumerate_circuits(M.restrict(rest))
        first = inside[0]
        out.append(first)
        rest -= first
    return out


_R10 = [
    [1, 1, 0, 0, 1, 1, 0, 0, 0, 0],
    [1, 1, 1, 0, 0, 0, 1, 0, 0, 0],
    [0, 1, 1, 1, 0, 0, 0, 1, 0, 0],
    [0, 0, 1, 1, 1, 0, 0, 0, 1, 0],
    [1, 0, 0, 1, 1, 0, 0, 0, 0, 1],
]

_F7 = [
    [1, 0, 0, 0, 1, 1, 1],
    [0, 1, 0, 1, 0, 1, 1],
    [0, 0, 1, 1, 1, 0, 1],
]


def builtin(name: str) -> BinaryMatroid:
    """The R10 or F7 matroid with labels 0..m-1."""
    table = {"R10": _R10, "F7": _F7}
    key = name.upper()
    if key not in table:
        raise UnknownBuiltinError(f"no built-in matroid named {name!r}")
    return BinaryMatroid.from_rows(table[key])
