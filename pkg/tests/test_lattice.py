from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from circuit_forge.errors import (
    EntryError,
    GirthViolationError,
    OracleSizeError,
    ShapeError,
    TUViolationError,
)
from circuit_forge.lattice import (
    bipartite_incidence,
    conformal_decompose,
    directed_incidence,
    enumerate_short_vectors,
    find_bad_minor,
    in_kernel,
    is_conformal,
    is_totally_unimodular,
    kernel_basis,
    matrix_circuits,
    norm2,
    random_tu_matrix,
    short_vector_oracle,
)

ONE_ROW = np.array([[1, 1, 1]])


def brute_tu(A):
    A = np.asarray(A)
    n, m = A.shape
    for k in range(1, min(n, m) + 1):
        for rows in combinations(range(n), k):
            for cols in combinations(range(m), k):
                if abs(oracles.integer_det(A[np.ix_(rows, cols)])) > 1:
                    return False
    return True


small_matrices = st.integers(1, 4).flatmap(
    lambda n: st.integers(1, 5).flatmap(
        lambda m: st.lists(st.lists(st.integers(-1, 1), min_size=m, max_size=m), min_size=n, max_size=n)
    )
)


class TestTU:
    def test_identity(self):
        assert is_totally_unimodular(np.eye(5, dtype=int))

    def test_two_by_two(self):
        assert not is_totally_unimodular([[1, 1], [1, -1]])
        rows, cols, det = find_bad_minor([[1, 1], [1, -1]])
        assert abs(det) == 2

    def test_bipartite(self):
        A = bipartite_incidence(2, 3, [(0, 0), (0, 1), (1, 1), (1, 2), (0, 2)])
        assert is_totally_unimodular(A) and brute_tu(A)

    def test_bad_entry(self):
        with pytest.raises(EntryError):
            is_totally_unimodular([[2, 0]])

    def test_cap(self):
        with pytest.raises(OracleSizeError):
            is_totally_unimodular(np.eye(9, dtype=int))

    @settings(max_examples=150, deadline=None)
    @given(small_matrices)
    def test_matches_bareiss(self, rows):
        assert is_totally_unimodular(rows) == brute_tu(rows)

    @pytest.mark.parametrize("kind", ["bipartite", "digraph", "network"])
    def test_generators(self, kind):
        for seed in range(10):
            A = random_tu_matrix(kind, seed)
            assert A.shape[1] <= 12 and brute_tu(A)


class TestCircuits:
    def test_pair(self):
        assert matrix_circuits([[1, 1]]) == [(1, -1)]

    def test_one_row(self):
        got = matrix_circuits(ONE_ROW)
        assert len(got) == 3 and all(sum(map(abs, u)) == 2 for u in got)

    def test_identity(self):
        assert matrix_circuits(np.eye(3, dtype=int)) == []

    def test_not_tu(self):
        with pytest.raises(TUViolationError):
            matrix_circuits([[1, 1, 0], [1, -1, 1]])

    def test_norm_cap(self):
        A = directed_incidence(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)])
        assert all(norm2(u) <= 3 for u in matrix_circuits(A, 3))
        assert len(matrix_circuits(A, 3)) == 2

    @pytest.mark.parametrize("seed", range(15))
    def test_correspondence(self, seed):
        A = random_tu_matrix(("bipartite", "digraph", "network")[seed % 3], seed)
        reps = matrix_circuits(A)
        supports = {frozenset(np.flatnonzero(u).tolist()) for u in reps}
        assert supports == oracles.circuits_from_columns(oracles.rows_to_columns(A), list(range(A.shape[1])))
        for u in reps:
            assert set(u) <= {-1, 0, 1} and in_kernel(A, u)
            assert next(x for x in u if x) > 0

    def test_kernel_basis(self):
        basis = kernel_basis(ONE_ROW)
        assert len(basis) == 2
        assert all(sum(x) == 0 for x in basis) and all(isinstance(x[0], Fraction) for x in basis)


class TestConformal:
    def test_examples(self):
        assert is_conformal((1, 0, -1), (2, 0, -1))
        assert not is_conformal((1, 0, 1), (2, 0, -1))
        assert is_conformal((0, 0, 0), (5, -3, 0))

    def test_shape(self):
        with pytest.raises(ShapeError):
            is_conformal((1,), (1, 2))

    def test_one_row_decomposition(self):
        parts = conformal_decompose(ONE_ROW, (2, -1, -1))
        assert sorted(parts) == [(1, -1, 0), (1, 0, -1)]

    def test_circuit_is_itself(self):
        assert conformal_decompose(ONE_ROW, (0, 1, -1)) == [(0, 1, -1)]

    def test_not_in_kernel(self):
        with pytest.raises(TUViolationError):
            conformal_decompose(ONE_ROW, (1, 1, 0))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 500), st.data())
    def test_random_lattice_vectors(self, seed, data):
        A = random_tu_matrix(("bipartite", "digraph", "network")[seed % 3], seed, max_cols=9)
        reps = matrix_circuits(A)
        if not reps:
            return
        coeffs = data.draw(st.lists(st.integers(-2, 2), min_size=len(reps), max_size=len(reps)))
        v = tuple(int(x) for x in np.array(coeffs) @ np.array(reps))
        if not any(v):
            return
        parts = conformal_decompose(A, v, reps)
        assert tuple(int(x) for x in np.sum(parts, axis=0)) == v
        assert all(is_conformal(p, v) for p in parts)
        assert sum(norm2(p) for p in parts) <= norm2(v)


class TestShortVectors:
    def test_identity(self):
        assert enumerate_short_vectors(np.eye(3, dtype=int), 5, 2) == []

    def test_one_row(self):
        got = set(enumerate_short_vectors(ONE_ROW, 1, 3))
        assert got == oracles.box_short_vectors(ONE_ROW, 9)
        assert (2, -1, -1) in got and (0, 1, -1) in got and (0, -1, 1) in got

    def test_small_max_cols(self):
        for seed in range(30):
            for kind in ("bipartite", "digraph", "network"):
                assert random_tu_matrix(kind, seed, max_cols=4).shape[1] <= 4

    def test_promise_violation(self):
        with pytest.raises(GirthViolationError):
            enumerate_short_vectors(ONE_ROW, 2, 1)

    @pytest.mark.parametrize("seed", range(12))
    def test_box_oracle(self, seed):
        A = random_tu_matrix(("bipartite", "digraph", "network")[seed % 3], 40 + seed, max_cols=6)
        reps = matrix_circuits(A)
        if not reps:
            return
        lam2 = min(map(norm2, reps)) - 1
        for alpha in (1, Fraction(3, 2), 2):
            cap = int(alpha * alpha * lam2)
            got = set(enumerate_short_vectors(A, lam2, alpha))
            assert got == oracles.box_short_vectors(A, cap) == set(short_vector_oracle(A, cap))
            assert all(in_kernel(A, v) for v in got)
