from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from circuit_forge.errors import (
    LabelError,
    NotCycleSpaceError,
    OracleSizeError,
    PreconditionError,
    UnknownBuiltinError,
)
from circuit_forge.exact import floor_times, parse_alpha, within_power
from circuit_forge.gf2 import (
    BinaryMatroid,
    add_parallel,
    builtin,
    decompose_symmetric_difference,
    delete,
    dual,
    enumerate_circuits,
    is_circuit,
    is_cycle,
    nullspace_masks,
    rank,
)
from circuit_forge.graphs import WeightedGraph, graphic_matroid

TRIANGLE = BinaryMatroid.from_rows([[1, 0, 1], [1, 1, 0], [0, 1, 1]])


def parallel_pair():
    return BinaryMatroid((0, 1), (1, 1), 1)


@st.composite
def matroids(draw, max_m=10, max_h=5):
    h = draw(st.integers(0, max_h))
    m = draw(st.integers(0, max_m))
    cols = draw(st.lists(st.integers(0, (1 << h) - 1), min_size=m, max_size=m))
    labels = draw(st.permutations(range(3 * m + 1)))[:m]
    return BinaryMatroid(tuple(labels), tuple(cols), h)


class TestRank:
    def test_identity(self):
        assert rank(BinaryMatroid.from_rows(np.eye(3, dtype=int).tolist()), {0, 1, 2}) == 3

    def test_empty_set(self):
        assert rank(builtin("R10"), set()) == 0

    def test_parallel(self):
        assert rank(parallel_pair(), {0, 1}) == 1

    def test_unknown_label(self):
        with pytest.raises(LabelError):
            rank(TRIANGLE, {7})


class TestCircuits:
    def test_parallel_pair_is_circuit(self):
        assert is_circuit(parallel_pair(), {0, 1})

    def test_empty_is_not_circuit(self):
        assert not is_circuit(TRIANGLE, set())

    def test_r10_singletons(self):
        R10 = builtin("R10")
        assert not any(is_circuit(R10, {e}) for e in R10.labels)

    def test_triangle(self):
        assert enumerate_circuits(TRIANGLE) == [frozenset({0, 1, 2})]

    def test_r10_matches_oracle(self):
        R10 = builtin("R10")
        got = enumerate_circuits(R10)
        assert set(got) == oracles.matroid_circuits(R10)
        assert all(len(c) % 2 == 0 and len(c) >= 4 for c in got)

    def test_independent_singleton_with_rest_forbidden(self):
        R10 = builtin("R10")
        assert enumerate_circuits(R10, required={0}, forbidden=set(R10.labels) - {0}) == []

    def test_required_forbidden_overlap(self):
        with pytest.raises(PreconditionError):
            enumerate_circuits(TRIANGLE, required={0}, forbidden={0})

    def test_oracle_cap(self):
        M = BinaryMatroid(tuple(range(25)), (1,) * 25, 1)
        with pytest.raises(OracleSizeError):
            enumerate_circuits(M)

    def test_weights_and_cap(self):
        got = enumerate_circuits(builtin("F7"), weights={0: 5}, weight_cap=3)
        assert got and all(0 not in c and len(c) == 3 for c in got)

    @settings(max_examples=80, deadline=None)
    @given(matroids())
    def test_equals_oracle(self, M):
        assert set(enumerate_circuits(M)) == oracles.matroid_circuits(M)

    @settings(max_examples=60, deadline=None)
    @given(matroids(max_m=9), st.data())
    def test_filters_equal_oracle_filter(self, M, data):
        if not M.m:
            return
        w = {lab: data.draw(st.integers(1, 4)) for lab in M.labels}
        cap = data.draw(st.integers(0, 20))
        R = set(data.draw(st.lists(st.sampled_from(M.labels), max_size=2)))
        F = set(data.draw(st.lists(st.sampled_from(M.labels), max_size=2))) - R
        want = {
            c for c in oracles.matroid_circuits(M)
            if R <= c and not c & F and sum(w[e] for e in c) <= cap
        }
        assert set(enumerate_circuits(M, w, cap, R, F)) == want

    @settings(max_examples=60, deadline=None)
    @given(matroids())
    def test_circuit_predicate(self, M):
        for c in oracles.matroid_circuits(M):
            assert is_circuit(M, c) and is_cycle(M, c)
            assert rank(M, c) == len(c) - 1


class TestEditing:
    def test_delete_triangle(self):
        for e in TRIANGLE.labels:
            assert enumerate_circuits(delete(TRIANGLE, e)) == []

    def test_delete_r10_counts(self):
        R10 = builtin("R10")
        for e in R10.labels:
            D = delete(R10, e)
            assert set(enumerate_circuits(D)) == oracles.matroid_circuits(D)

    def test_deleted_label_gone(self):
        with pytest.raises(LabelError):
            rank(delete(TRIANGLE, 1), {1})

    def test_add_parallel_free(self):
        M = BinaryMatroid((4,), (1,), 1)
        assert enumerate_circuits(add_parallel(M, 4, 9)) == [frozenset({4, 9})]

    def test_add_parallel_triangle(self):
        got = set(enumerate_circuits(add_parallel(TRIANGLE, 0, 5)))
        assert got == {frozenset({0, 5}), frozenset({0, 1, 2}), frozenset({5, 1, 2})}

    def test_add_parallel_duplicate(self):
        with pytest.raises(LabelError):
            add_parallel(TRIANGLE, 0, 1)


class TestDual:
    def test_free_matroid(self):
        free = BinaryMatroid.from_rows(np.eye(4, dtype=int).tolist())
        D = dual(free)
        assert set(enumerate_circuits(D)) == {frozenset({e}) for e in range(4)}

    @settings(max_examples=60, deadline=None)
    @given(matroids(max_m=9))
    def test_cocircuits_are_minimal_row_space_supports(self, M):
        rows = M.rows()
        span = {0}
        for r in rows:
            span |= {s ^ r for s in span}
        supports = [s for s in span if s]
        minimal = {M.labels_of(s) for s in supports if not any(t != s and t & s == t for t in supports)}
        assert set(enumerate_circuits(dual(M))) == minimal

    @settings(max_examples=40, deadline=None)
    @given(matroids(max_m=9))
    def test_double_dual(self, M):
        assert set(enumerate_circuits(dual(dual(M)))) == oracles.matroid_circuits(M)


class TestDecompose:
    def test_empty(self):
        assert decompose_symmetric_difference(TRIANGLE, set()) == []

    def test_two_triangles(self):
        G = WeightedGraph.from_edges(5, [(0, 1, 0), (1, 2, 1), (0, 2, 2), (2, 3, 3), (3, 4, 4), (2, 4, 5)])
        parts = decompose_symmetric_difference(graphic_matroid(G), set(range(6)))
        assert sorted(map(sorted, parts)) == [[0, 1, 2], [3, 4, 5]]

    def test_not_a_cycle(self):
        with pytest.raises(NotCycleSpaceError):
            decompose_symmetric_difference(TRIANGLE, {0})

    @settings(max_examples=50, deadline=None)
    @given(matroids(max_m=9), st.data())
    def test_random_cycles(self, M, data):
        basis = nullspace_masks(M.columns)
        pick = data.draw(st.lists(st.booleans(), min_size=len(basis), max_size=len(basis)))
        mask = 0
        for b, on in zip(basis, pick):
            if on:
                mask ^= b
        parts = decompose_symmetric_difference(M, M.labels_of(mask))
        assert all(is_circuit(M, c) for c in parts)
        union = frozenset().union(*parts) if parts else frozenset()
        assert union == M.labels_of(mask) and sum(map(len, parts)) == len(union)


class TestBuiltin:
    def test_sizes(self):
        assert builtin("R10").m == 10 and builtin("F7").m == 7

    def test_r10_first_column(self):
        assert builtin("R10").column(0) == (1, 1, 0, 0, 1)

    def test_unknown(self):
        with pytest.raises(UnknownBuiltinError):
            builtin("K5")

    def test_f7_is_fano(self):
        lines = [c for c in enumerate_circuits(builtin("F7")) if len(c) == 3]
        assert len(lines) == 7


class TestExact:
    def test_parse_alpha(self):
        assert parse_alpha("3/2") == Fraction(3, 2) and parse_alpha("1.5") == Fraction(3, 2)
        with pytest.raises(ValueError):
            parse_alpha("1/2")

    def test_floor_times(self):
        assert floor_times(Fraction(3, 2), 5) == 7

    @given(st.integers(0, 10**6), st.integers(1, 30), st.integers(1, 3), st.integers(0, 8), st.integers(1, 3))
    def test_within_power(self, count, a, b, p, q):
        base, exponent = Fraction(a, b), Fraction(p, q)
        assert within_power(count, base, exponent) == (count**q <= base**p)
