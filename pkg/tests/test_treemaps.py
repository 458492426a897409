from __future__ import annotations

import random
from fractions import Fraction

import pytest
from frozen import STEFAN_PERIODS, TENT_FIX_COUNTS, TRUNCATION_HEIGHTS
from oracles import bisection_fixed_points, tent_cycle_height

from lamdyn.errors import BoundExceeded, ParseError
from lamdyn.treemaps import (
    TWO_INF,
    center_vs_periodic_closure,
    exact_periods,
    fixed_points_on_edge,
    fixed_set,
    format_map,
    interval_map,
    outward_edges,
    parse_map,
    parse_shark,
    random_interval_map,
    rational_samples,
    sh_set,
    sh_set_contains,
    sharkovskiy_less,
    stefan_map,
    stefan_permutation,
    tent_map,
    tree_map,
    truncated_tent,
    truncated_tent_for,
    truncation_height,
)

F = Fraction


def test_sharkovskiy_examples():
    assert sharkovskiy_less(3, 5)
    assert sharkovskiy_less(7, 6)
    assert sharkovskiy_less(6, 12)
    assert sharkovskiy_less(12, TWO_INF)
    assert sharkovskiy_less(TWO_INF, 8)
    assert sharkovskiy_less(4, 2) and sharkovskiy_less(2, 1)
    assert not sharkovskiy_less(1, 1)


def test_sh_sets():
    assert sh_set(1, 10) == {1}
    assert sh_set(4, 10) == {1, 2, 4}
    assert sh_set(3, 10) == set(range(1, 11))
    assert sh_set(5, 10) == set(range(1, 11)) - {3}
    assert sh_set(TWO_INF, 20) == {1, 2, 4, 8, 16}
    assert not sh_set_contains(TWO_INF, 3)
    assert parse_shark("2^inf") is TWO_INF and parse_shark("6") == 6


def test_identity_map_has_only_fixed_points():
    f = interval_map([0, F(1, 2), 1], [0, F(1, 2), 1])
    rep = exact_periods(f, 8)
    assert rep.realized == (1,) and rep.shark_classification == 1


def test_tent_realizes_every_period():
    T = tent_map()
    rep = exact_periods(T, 10)
    assert rep.realized == tuple(range(1, 11)) and rep.shark_classification == 3
    for p, want in enumerate(TENT_FIX_COUNTS[:6], start=1):
        assert len(fixed_set(T, p).points) == want


@pytest.mark.parametrize("k", [3, 5, 7])
def test_stefan_map_periods(k):
    f = stefan_map(k)
    assert set(exact_periods(f, 10).realized) == STEFAN_PERIODS[k]
    assert exact_periods(f, 10).shark_classification == k


def test_stefan_permutation_is_one_cycle():
    for k in (3, 5, 7, 9):
        perm = stefan_permutation(k)
        seen, x = [], 0
        while x not in seen:
            seen.append(x)
            x = perm[x]
        assert len(seen) == k
    with pytest.raises(ValueError):
        stefan_permutation(4)


@pytest.mark.parametrize("k", range(0, 4))
def test_truncated_tent_heights(k):
    h = truncation_height(k)
    assert h == TRUNCATION_HEIGHTS[k] == tent_cycle_height(k)
    rep = exact_periods(truncated_tent_for(k), 2 ** (k + 1))
    assert rep.shark_classification == 2**k


def test_truncated_tent_range():
    with pytest.raises(ValueError):
        truncated_tent(F(3, 2))
    assert exact_periods(truncated_tent(0), 4).realized == (1,)


def test_bound_exceeded():
    with pytest.raises(BoundExceeded):
        exact_periods(tent_map(), 17)


def test_exact_fixed_points_are_fixed():
    rng = random.Random(11)
    for _ in range(10):
        f = random_interval_map(rng)
        for p in (1, 2, 3):
            for pt in fixed_set(f, p).points:
                assert f.iterate(pt, p) == pt


def test_fixed_points_match_bisection_on_stefan5():
    f = stefan_map(5)
    xs = list(f.coords)
    ys = [f.coords[i] for i in f.vertex_image]
    for p in (1, 2, 4):
        got = sorted(float(f.coordinate(pt)) for pt in fixed_set(f, p).points)
        want = bisection_fixed_points(xs, ys, p)
        assert len(got) == len(want)
        assert all(abs(a - b) < 1e-12 for a, b in zip(got, want))


def test_map_text_round_trip():
    for f in (stefan_map(5), truncated_tent_for(2), tent_map()):
        text = format_map(f)
        g = parse_map(text)
        assert format_map(g) == text
        assert g.vertex_image == f.vertex_image


HEAD = "vertex a 0\nvertex b 1\nedge e0 a b 1\nimage a b\nimage b a\n"


@pytest.mark.parametrize("tail", [
    "",  # no pieces: edge not covered
    "piece e0 0 1 -> e0- slope 2\n",  # wrong slope
    "piece e0 0 1/2 -> e0- slope -2\n",  # gap in coverage
])
def test_parse_map_rejects_invalid_maps(tail):
    with pytest.raises(ParseError):
        parse_map(HEAD + tail)


def test_parse_map_locates_bad_record():
    with pytest.raises(ParseError) as info:
        parse_map(HEAD + "piece e0 0 1 => e0- slope -1\n")
    assert info.value.line == 6
    with pytest.raises(ParseError):
        parse_map("vertex a 0\nvertex b 1\nedge e0 a b 1\nimage a b\n")
    assert parse_map(HEAD + "piece e0 0 1 -> e0- slope -1\n").vertex_image == (1, 0)


def test_tree_map_on_a_tripod():
    # centre c with legs a, b, e; rotate the legs, fix the centre
    f = tree_map(["c", "a", "b", "e"], [(0, 1, 1), (0, 2, 1), (0, 3, 1)], [0, 2, 3, 1])
    assert f(("e", 0, F(1, 2))) == ("e", 1, F(1, 2))
    rep = exact_periods(f, 6)
    # period 3 without period 2: on trees the interval forcing order breaks down
    assert set(rep.realized) == {1, 3}
    assert not rep.is_down_set and not f.is_interval()


def test_outward_edges_contain_fixed_points():
    # a flip of the interval sends each end across the middle
    f = interval_map([0, F(1, 2), 1], [1, F(1, 2), 0])
    rng = random.Random(5)
    maps = [f] + [random_interval_map(rng) for _ in range(30)]
    for g in maps:
        for j in outward_edges(g):
            assert fixed_points_on_edge(g, j)


def test_center_of_identity_is_zero():
    f = interval_map([0, 1], [0, 1])
    rep = center_vs_periodic_closure(f, rational_samples(f, 10), F(1, 256), bounds=(1, 2))
    assert all(v == 0 for v in rep.max_distance.values()) and rep.passed


def test_center_of_stefan5_decreases():
    f = stefan_map(5)
    rep = center_vs_periodic_closure(f, rational_samples(f, 20, seed=2), F(1, 256), bounds=(4, 8))
    seq = [rep.max_distance[P] for P in rep.bounds]
    assert seq[1] <= seq[0] and rep.passed
