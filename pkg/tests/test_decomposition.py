import csv
import io
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from circuit_forge.decomposition import (
    REPORT_FIELDS,
    balanced_division,
    bound_report,
    candidate_signatures,
    check_girth,
    choose_p,
    codeword_oracle,
    enumerate_class,
    enumerate_light_codewords,
    enumerate_near_min_circuits,
    find_center,
    max_centers,
    near_min_classes,
    signature_of,
    write_reports,
)
from circuit_forge.errors import GirthViolationError, PreconditionError, SizeError
from circuit_forge.gf2 import BinaryMatroid, builtin, enumerate_circuits
from circuit_forge.ksum import Leaf, TreeEdge, Udt, evaluate_udt, project_circuit, random_udt

TYPES = ("graphic", "cographic", "R10", "F7")


def tri(a, b, c):
    return BinaryMatroid((a, b, c), (1, 2, 3), 2)


def two_triangles():
    return Udt(
        (Leaf(0, "graphic", tri(0, 1, 9)), Leaf(1, "graphic", tri(2, 3, 9))),
        (TreeEdge(0, 1, frozenset({9})),),
    )


def random_tree(rng, n):
    adj = {0: []}
    for v in range(1, n):
        u = int(rng.integers(v))
        adj[v] = [u]
        adj[u].append(v)
    return adj


def residual_pieces(adj, U):
    pool = set(adj) - set(U)
    out = []
    while pool:
        comp, stack = set(), [pool.pop()]
        while stack:
            x = stack.pop()
            comp.add(x)
            for y in adj[x]:
                if y in pool:
                    pool.discard(y)
                    stack.append(y)
        out.append(comp)
    return out


def suite_trees(count, max_m=20, start=0):
    out, seed = [], start
    while len(out) < count:
        T = random_udt(2 + seed % 3, (5, 8), TYPES, seed=seed, max_m=max_m)
        seed += 1
        circuits = oracles.matroid_circuits(evaluate_udt(T))
        if circuits and min(map(len, circuits)) >= 2:
            out.append((T, circuits, min(map(len, circuits))))
    return out


class TestCenter:
    def test_single(self):
        assert find_center({5: []}, {5: 3}) == 5

    def test_path(self):
        assert find_center({0: [1], 1: [0, 2], 2: [1]}, {0: 1, 1: 1, 2: 1}) == 1

    def test_star_hub(self):
        adj = {0: [1, 2, 3], 1: [0], 2: [0], 3: [0]}
        assert find_center(adj, {0: 10}) == 0

    def test_empty(self):
        with pytest.raises(PreconditionError):
            find_center({}, {})

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 30), st.integers(0, 2**31))
    def test_halves(self, n, seed):
        rng = np.random.default_rng(seed)
        adj = random_tree(rng, n)
        gamma = {v: int(rng.integers(0, 6)) for v in adj}
        c = find_center(adj, gamma)
        total = sum(gamma.values())
        assert all(2 * sum(gamma[v] for v in piece) <= total for piece in residual_pieces(adj, {c}))


class TestDivision:
    def test_light_tree(self):
        assert balanced_division({0: [1], 1: [0]}, {0: 1, 1: 0}, 0, 2) == frozenset()

    def test_path(self):
        adj = {0: [1], 1: [0, 2], 2: [1]}
        U = balanced_division(adj, {0: 1, 1: 1, 2: 1}, 1, 2)
        assert all(sum(1 for _ in piece) <= 1 for piece in residual_pieces(adj, U))

    def test_too_heavy(self):
        with pytest.raises(PreconditionError):
            balanced_division({0: []}, {0: 5}, 1, 2)

    def test_random_trees(self):
        rng = np.random.default_rng(1000)
        for _ in range(1000):
            n = int(rng.integers(1, 40))
            adj = random_tree(rng, n)
            gamma = {v: int(rng.integers(0, 5)) for v in adj}
            p = int(rng.integers(0, 4))
            total = sum(gamma.values())
            r = max(1, -(-total // 2**p)) + int(rng.integers(0, 3))
            U = balanced_division(adj, gamma, p, r)
            assert len(U) <= 2 ** (p + 2)
            for piece in residual_pieces(adj, U):
                assert 2 * sum(gamma[v] for v in piece) <= r

    def test_choose_p(self):
        assert [choose_p(a) for a in (1, Fraction(3, 2), 2, 3)] == [1, 2, 2, 3]
        assert max_centers(1) == 3 and max_centers(Fraction(3, 2)) == 5


class TestSignature:
    def test_size_error(self):
        with pytest.raises(SizeError):
            signature_of(two_triangles(), {0, 1, 2, 3}, 1, 3)

    def test_two_triangle_signature(self):
        S = signature_of(two_triangles(), {0, 1, 2, 3}, 2, 3)
        assert S.centers and len(S.centers) <= 8

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 5000), st.sampled_from([1, Fraction(3, 2), 2]))
    def test_pins_bounded(self, seed, alpha):
        ((T, circuits, g),) = suite_trees(1, start=seed)
        r = g - 1
        for C in circuits:
            if len(C) <= alpha * r:
                S = signature_of(T, C, alpha, r)
                assert len(S.centers) <= 4 * alpha
                assert len(S.pins) <= 2 * len(S.centers)
                for u, e in S.pins:
                    assert any(e in T.shared(u, v) for v in T.neighbors[u])


class TestEnumeration:
    def test_two_triangles(self):
        T = two_triangles()
        assert enumerate_near_min_circuits(T, 3, 2) == [frozenset({0, 1, 2, 3})]

    def test_union_of_classes(self):
        T = two_triangles()
        res = near_min_classes(T, 3, 2)
        union = set().union(*(c.circuits for c in res.classes.values()))
        assert union == {frozenset({0, 1, 2, 3})}

    def test_girth_violation(self):
        with pytest.raises(GirthViolationError) as info:
            enumerate_near_min_circuits(two_triangles(), 4, 1)
        assert info.value.witness == frozenset({0, 1, 2, 3})

    def test_nothing_small_enough(self):
        assert enumerate_near_min_circuits(two_triangles(), 1, 2) == []

    def test_classes_are_signature_exact(self):
        for T, circuits, g in suite_trees(10, start=300):
            r = g - 1
            for S in candidate_signatures(T, 2):
                res = enumerate_class(T, S, 2, r)
                for C in res.circuits:
                    assert signature_of(T, C, 2, r) == S

    def test_per_class_bound(self):
        for T, circuits, g in suite_trees(10, start=600):
            rep = bound_report(T, g - 1, 1)
            assert rep.passed
            assert rep.max_class <= rep.bound_class

    def test_check_girth_cap(self):
        big = BinaryMatroid(tuple(range(30)), tuple(range(1, 31)), 5)
        assert check_girth(big, 1, cap=24) is False


class TestLightCodewords:
    def test_alpha_one_is_circuits_of_size_d(self):
        R10 = builtin("R10")
        got = enumerate_light_codewords(R10, 4, 1)
        assert set(got) == {c for c in enumerate_circuits(R10) if len(c) == 4}

    def test_matroid_route_matches_oracle(self):
        for name in ("R10", "F7"):
            M = builtin(name)
            d = min(map(len, enumerate_circuits(M)))
            for a in (1, 2, 3):
                got = set(enumerate_light_codewords(M, d, a))
                assert got == oracles.codewords(M, a * d) == set(codeword_oracle(M, a * d))

    def test_union_bound(self):
        for T, circuits, d in suite_trees(15, max_m=18, start=900):
            for a in (1, 2):
                words = enumerate_light_codewords(T, d, a)
                light = [c for c in circuits if len(c) <= a * d]
                assert len(words) <= max(1, len(light)) ** a

    def test_small_d(self):
        with pytest.raises(GirthViolationError):
            enumerate_light_codewords(builtin("F7"), 4, 1)


class TestReports:
    def test_csv_and_jsonl_agree(self):
        reps = [bound_report(T, g - 1, Fraction(3, 2)) for T, _, g in suite_trees(4, start=50)]
        rows = list(csv.DictReader(io.StringIO(write_reports(reps, "csv"))))
        js = [json.loads(line) for line in write_reports(reps, "jsonl").splitlines()]
        assert list(rows[0]) == list(REPORT_FIELDS)
        assert len(rows) == len(js) == 4
        for a, b in zip(rows, js):
            assert {k: str(v) for k, v in b.items()} == a

    def test_signature_bound(self):
        T, _, g = suite_trees(1, start=70)[0]
        rep = bound_report(T, g - 1, 2)
        assert rep.signatures_observed <= rep.bound_9m and rep.passed

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            write_reports([], "xml")


def test_projection_sizes_add_up():
    for T, circuits, _ in suite_trees(5, start=1200):
        for C in circuits:
            assert sum(project_circuit(T, C).gammas().values()) == len(C)
