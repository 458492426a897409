from __future__ import annotations

from fractions import Fraction

import pytest
from conftest import LEAF, TRIANGLE, zi
from frozen import ZI_ANGLE_COUNTS, ZI_CLASS_COUNTS, ZI_DEPTH1, ZI_LEAF_CYCLE
from oracles import brute_cycle, closure_angles, linked_pairs_numpy

from lamdyn.errors import AmbiguousPullback, ForwardOrbitDiverges, PreconditionFailed
from lamdyn.circle import SturmianDigits, sigma
from lamdyn.lamination import (
    Class,
    Lamination,
    check_axioms,
    class_image,
    classify_class,
    forward_closure,
    holes,
    is_critical,
    naive_linked_pairs,
    orbit_portrait,
    pullback_closure,
)

F = Fraction


def test_class_image_examples():
    assert class_image(Class.of(F(1, 3), F(2, 3)), 2) == Class.of(F(1, 3), F(2, 3))
    assert class_image(LEAF, 2) == Class.of(F(1, 6))
    assert class_image(TRIANGLE, 2) == TRIANGLE


def test_is_critical_examples():
    assert is_critical(LEAF, 2)
    assert not is_critical(TRIANGLE, 2)
    assert not is_critical(Class.of(F(0)), 2)


def test_holes_examples():
    (only,) = holes(Class.of(F(0)))
    assert only.start == only.end == 0
    assert [(h.start, h.end) for h in holes(Class.of(F(1, 3), F(2, 3)))] == [
        (F(1, 3), F(2, 3)), (F(2, 3), F(1, 3))]
    assert len(holes(TRIANGLE)) == 3


def test_classify_class_examples():
    assert classify_class(Class.of(F(1, 6))) == "bud"
    assert classify_class(LEAF) == "leaf-class"
    assert classify_class(TRIANGLE) == "gap"


def test_orbit_portrait_examples():
    assert orbit_portrait(TRIANGLE, 2)[:2] == (0, 1)
    assert orbit_portrait(Class.of(F(0)), 2)[:2] == (0, 1)
    # the worked value in the example text reads (1, 2); iterating gives preperiod 2
    pre, per, orbit = orbit_portrait(LEAF, 2)
    assert (pre, per) == (2, 2)
    assert {frozenset(c.angles) for c in orbit[pre:]} == ZI_LEAF_CYCLE


def test_orbit_portrait_rejects_streams():
    with pytest.raises(ForwardOrbitDiverges):
        orbit_portrait((SturmianDigits(F(2, 5), F(0)),), 2)


def test_orbit_portrait_matches_brute_iteration():
    for c in zi(4).classes[::4]:
        pre, per, orbit = orbit_portrait(c, 2)
        assert {frozenset(x.angles) for x in orbit[pre:]} == brute_cycle(c.angles, 2)
        assert len(orbit) == pre + per


def test_check_axioms_missing_image_fails_d1():
    lam = Lamination.from_classes(2, [Class.of(F(1, 3), F(2, 3)), LEAF, Class.of(F(1, 6))])
    report = check_axioms(lam)
    assert "D1" in report.tags()
    assert any(v.witnesses[0] == Class.of(F(1, 6)) for v in report.violations if v.tag == "D1")


def test_check_axioms_linked_leaves_fail_e2():
    lam = Lamination.from_classes(2, [Class.of(F(0), F(1, 2)), Class.of(F(1, 4), F(3, 4))])
    report = check_axioms(lam)
    e2 = [v for v in report.violations if v.tag == "E2"]
    assert len(e2) == 1
    assert set(e2[0].witnesses) == {Class.of(F(0), F(1, 2)), Class.of(F(1, 4), F(3, 4))}


def test_check_axioms_d3_hole_order():
    # {1/8, 3/8, 5/8} maps onto the diameter {1/4, 3/4} twice around: holes do not map onto holes
    bad = Class.of(F(1, 8), F(3, 8), F(5, 8))
    lam = Lamination.from_classes(2, forward_closure(2, [bad]))
    assert "D3" in check_axioms(lam).tags()


def test_pullback_depth6_passes_and_matches_naive_scan():
    lam = zi(6)
    assert check_axioms(lam).passed
    assert naive_linked_pairs(zi(4).classes) == []
    assert linked_pairs_numpy([c.angles for c in lam.classes]) == set()


def test_numpy_linkage_oracle_detects_crossings():
    classes = [(F(0), F(1, 2)), (F(1, 4), F(3, 4)), (F(1, 8),)]
    assert linked_pairs_numpy(classes) == {(0, 1)}


def test_pullback_depth1_classes():
    lam = zi(1)
    assert sorted(c.angles for c in lam.classes) == sorted(ZI_DEPTH1)


@pytest.mark.parametrize("depth", range(0, 8))
def test_pullback_counts_match_closure_recount(depth):
    lam = zi(depth)
    assert len(lam) == ZI_CLASS_COUNTS[depth]
    angles = {a for c in lam.classes for a in c.angles}
    assert len(angles) == ZI_ANGLE_COUNTS[depth]
    assert angles == closure_angles(2, [LEAF.angles, TRIANGLE.angles], depth)


def test_siblings_map_onto_parent():
    lam = zi(5)
    for c in lam.classes:
        if lam.depth_of(c) > 0:
            parent = class_image(c, 2)
            assert parent in lam
            assert lam.depth_of(parent) == lam.depth_of(c) - 1
    for c in lam.classes:
        if lam.depth_of(c) < lam.depth:
            pre = {y for a in c.angles for y in (a / 2, (a + 1) / 2)}
            owners = {lam.owner(y) for y in pre}
            assert {y for o in owners for y in o.angles} == pre
            assert len(owners) <= 2


def test_pullback_fixed_bud_is_ambiguous():
    with pytest.raises(AmbiguousPullback) as info:
        pullback_closure(2, [Class.of(F(0))], 2)
    assert "{1/4,3/4}" in str(info.value)


def test_pullback_fixed_leaf_depth0():
    lam = pullback_closure(2, [Class.of(F(1, 3), F(2, 3))], 0)
    assert lam.classes == (Class.of(F(1, 3), F(2, 3)),)


def test_pullback_rejects_linked_generators():
    with pytest.raises(PreconditionFailed):
        pullback_closure(2, [Class.of(F(0), F(1, 2)), Class.of(F(1, 4), F(3, 4))], 1)


def test_pullback_rejects_stream_generator():
    with pytest.raises(ForwardOrbitDiverges):
        pullback_closure(2, [(SturmianDigits(F(2, 5), F(0)),)], 1)


def test_criticality_count_is_soft():
    lam = Lamination.from_classes(2, forward_closure(2, [LEAF, Class.of(F(1, 4), F(3, 4))]))
    report = check_axioms(lam)
    assert report.warnings and "criticality" in report.warnings[0]


def test_class_rejects_empty_and_dedups():
    with pytest.raises(ValueError):
        Class(())
    assert Class.of(F(1, 3), F(4, 3)) == Class.of(F(1, 3))
    assert sigma(2, F(4, 3)) == F(2, 3)
