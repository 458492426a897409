from __future__ import annotations

import random
from fractions import Fraction

import networkx as nx
import pytest
from conftest import LEAF, TRIANGLE, cheb, dendrite, zi

from lamdyn.dendrite import (
    arc_between,
    build_dendrite,
    export_tree,
    is_persistent_cutpoint,
    point_kind,
    separates,
    separates_by_holes,
)
from lamdyn.dynamics import sturmian_seed
from lamdyn.errors import ForwardOrbitDiverges, NotATree
from lamdyn.lamination import Class, Lamination, class_image, forward_closure

F = Fraction


def as_graph(D):
    G = nx.Graph()
    G.add_nodes_from(D.vertices)
    G.add_edges_from(D.edges)
    return G


def test_single_class_has_no_edges():
    D = build_dendrite(Lamination.from_classes(2, [Class.of(F(0))]))
    assert D.vertices == (Class.of(F(0)),) and D.edges == []


def test_forward_closure_of_leaf_alone_is_not_a_tree():
    # {1/6}, {1/3} and the leaf border one region with nothing separating them:
    # the branch point (the fixed triangle) is missing
    lam = Lamination.from_classes(2, forward_closure(2, [LEAF]))
    with pytest.raises(NotATree):
        build_dendrite(lam)


def test_depth0_edges():
    D = dendrite(zi(0))
    got = {frozenset(e) for e in D.edges}
    want = {
        frozenset({Class.of(F(1, 6)), TRIANGLE}),
        frozenset({Class.of(F(1, 3)), TRIANGLE}),
        frozenset({Class.of(F(2, 3)), LEAF}),
        frozenset({LEAF, TRIANGLE}),
    }
    assert got == want


@pytest.mark.parametrize("depth", [0, 3, 6, 8])
def test_tree_shape_and_valence(depth):
    D = dendrite(zi(depth))
    G = as_graph(D)
    assert nx.is_tree(G)
    assert len(D.edges) == len(D.vertices) - 1
    for v in D.vertices:
        assert D.degree(v) <= len(v)
        kind = point_kind(v)
        assert kind.valence == len(v)


def test_point_kind_examples():
    assert point_kind(Class.of(F(1, 6))).kind == "endpoint"
    assert point_kind(LEAF).kind == "cutpoint" and point_kind(LEAF).valence == 2
    assert point_kind(TRIANGLE).kind == "branchpoint" and point_kind(TRIANGLE).valence == 3


def test_arc_between_examples():
    D = dendrite(zi(6))
    u = Class.of(F(1, 6))
    assert arc_between(D, u, u) == [u]
    v = D.adjacency[u][0]
    assert arc_between(D, u, v) == [u, v]
    far = Class.of(F(2, 3))
    path = arc_between(D, u, far)
    G = as_graph(D)
    assert path == nx.shortest_path(G, u, far)
    for w in path[1:-1]:
        assert separates(D, w, u, far)


def test_separates_hole_example():
    D = dendrite(zi(2))
    assert separates(D, LEAF, Class.of(F(1, 6)), Class.of(F(2, 3)))
    # 1/6 and 1/3 both lie in the hole (1/12, 7/12); 2/3 lies in the other one
    assert not separates_by_holes(LEAF, Class.of(F(1, 6)), Class.of(F(1, 3)))
    assert separates_by_holes(LEAF, Class.of(F(1, 6)), Class.of(F(2, 3)))


def test_separates_agrees_with_graph_oracle():
    D = dendrite(zi(8))
    G = as_graph(D)
    rng = random.Random(7)
    vs = list(D.vertices)
    checked = 0
    while checked < 300:
        x, y, z = rng.sample(vs, 3)
        H = nx.restricted_view(G, [x], [])
        want = not nx.has_path(H, y, z)
        assert separates(D, x, y, z) == want
        checked += 1


def test_separates_rejects_equal_points():
    D = dendrite(zi(1))
    with pytest.raises(ValueError):
        separates(D, LEAF, LEAF, TRIANGLE)


def test_triangle_degree_three_at_depth6():
    assert dendrite(zi(6)).degree(TRIANGLE) == 3


def test_chebyshev_quotient_is_an_arc():
    D = dendrite(cheb(5))
    assert max(D.degree(v) for v in D.vertices) == 2
    assert nx.is_tree(as_graph(D))


def test_dynamics_agree_with_class_image():
    D = dendrite(zi(5))
    for v in D.vertices:
        img = D.dynamics[v]
        assert img is None or img == class_image(v, 2)


def test_images_of_edges_are_connected():
    lam = zi(6)
    D = dendrite(lam)
    for u, v in D.edges:
        fu, fv = D.dynamics[u], D.dynamics[v]
        if fu is None or fv is None or fu == fv:
            continue
        for w in arc_between(D, fu, fv)[1:-1]:
            assert w in lam
            # every interior class of the image arc is either an image or a boundary vertex
            assert class_image(w, 2) in lam or D.is_boundary(w)


def test_persistent_cutpoint_examples():
    assert is_persistent_cutpoint(TRIANGLE, 2)
    assert not is_persistent_cutpoint(LEAF, 2)
    assert not is_persistent_cutpoint(Class.of(F(0)), 2)
    with pytest.raises(ForwardOrbitDiverges):
        is_persistent_cutpoint(sturmian_seed(F(2, 5)).angles, 2)


def test_export_tree_lines():
    D = dendrite(zi(0))
    text = export_tree(D)
    assert "vertex {1/7,2/7,4/7}; branchpoint; 3; 0; {1/7,2/7,4/7}" in text
    assert text.count("\nedge ") == 4
