"""Finite tree model of the quotient of the circle by a lamination.

Vertices are the stored classes.  Two classes are joined when no third
stored class separates them, i.e. when they border a common complementary
region of the union of class hulls.  For a lamination whose stored classes
contain the branch point of any three of them this is a tree; otherwise the
region bordered by three or more classes produces a cycle and the build
fails with ``NotATree``.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field

from .circle import DigitProgram
from .errors import ForwardOrbitDiverges, NotATree
from .lamination import Class, Lamination, NestingIndex, orbit_portrait


@dataclass(frozen=True)
class PointKind:
    kind: str
    valence: int


def point_kind(c) -> PointKind:
    """Valence of a point of the quotient is the number of holes of its class."""
    n = len(c)
    if n == 1:
        return PointKind("endpoint", 1)
    if n == 2:
        return PointKind("cutpoint", 2)
    return PointKind("branchpoint", n)


@dataclass
class DendriteApprox:
    lamination: Lamination
    vertices: tuple[Class, ...]
    adjacency: dict[Class, tuple[Class, ...]]
    depth: int
    dynamics: dict[Class, Class | None]
    _parent: dict = field(default_factory=dict, repr=False)
    _level: dict = field(default_factory=dict, repr=False)
    _tin: dict = field(default_factory=dict, repr=False)
    _tout: dict = field(default_factory=dict, repr=False)
    _children: dict = field(default_factory=dict, repr=False)

    @property
    def edges(self) -> list[tuple[Class, Class]]:
        order = {v: i for i, v in enumerate(self.vertices)}
        out = []
        for u in self.vertices:
            for v in self.adjacency[u]:
                if order[u] < order[v]:
                    out.append((u, v))
        return out

    def degree(self, v: Class) -> int:
        return len(self.adjacency[v])

    def is_frontier(self, v: Class) -> bool:
        """Image of v is not stored."""
        return self.dynamics.get(v) is None

    def is_boundary(self, v: Class) -> bool:
        """Preimages of v are not stored."""
        return self.lamination.depth_of(v) >= self.depth

    def is_ancestor(self, a: Class, b: Class) -> bool:
        return self._tin[a] <= self._tin[b] <= self._tout[a]

    def neighbor_toward(self, v: Class, target: Class) -> Class:
        """The neighbor of v on the tree path from v to target (v != target)."""
        if v == target:
            raise ValueError("target must differ from v")
        if not self.is_ancestor(v, target):
            return self._parent[v]
        kids = self._children[v]
        k = bisect.bisect_right([self._tin[c] for c in kids], self._tin[target]) - 1
        return kids[k]


def build_dendrite(lam: Lamination) -> DendriteApprox:
    classes = list(lam.classes)
    index = NestingIndex(classes)
    if index.crossings or index.overlaps:
        raise NotATree("stored classes are linked or overlap; check_axioms fails upstream")
    adjacency: dict[Class, list[Class]] = {c: [] for c in classes}
    if index.root is None:
        if len(classes) > 2:
            raise NotATree(
                "three or more buds with no separating class border one region: "
                + " ".join(str(c) for c in classes[:4])
            )
        if len(classes) == 2:
            adjacency[classes[0]].append(classes[1])
            adjacency[classes[1]].append(classes[0])
    else:
        for (k, hole), members in sorted(index.regions().items()):
            if len(members) > 1:
                shown = " ".join(str(classes[i]) for i in members[:4])
                raise NotATree(
                    f"hole {hole} of {classes[k]} borders several unseparated classes "
                    f"({shown}); their common branch point is not stored",
                    region=(classes[k], hole),
                    members=[classes[i] for i in members],
                )
            child = classes[members[0]]
            adjacency[classes[k]].append(child)
            adjacency[child].append(classes[k])
    n_edges = sum(len(v) for v in adjacency.values()) // 2
    dynamics = {c: lam.image(c) for c in classes}
    order = {c: i for i, c in enumerate(classes)}
    D = DendriteApprox(
        lam,
        tuple(classes),
        {c: tuple(sorted(v, key=order.__getitem__)) for c, v in adjacency.items()},
        lam.depth,
        dynamics,
    )
    _root_tree(D)
    if classes and (n_edges != len(classes) - 1 or len(D._level) != len(classes)):
        raise NotATree(f"{len(classes)} vertices, {n_edges} edges, {len(D._level)} reachable")
    return D


def _root_tree(D: DendriteApprox):
    if not D.vertices:
        return
    root = D.vertices[0]
    D._parent[root] = None
    D._level[root] = 0
    clock = 0
    stack = [(root, iter(D.adjacency[root]))]
    D._tin[root] = clock
    D._children[root] = []
    while stack:
        u, it = stack[-1]
        for v in it:
            if v not in D._level:
                D._level[v] = D._level[u] + 1
                D._parent[v] = u
                D._children[u].append(v)
                D._children[v] = []
                clock += 1
                D._tin[v] = clock
                stack.append((v, iter(D.adjacency[v])))
                break
        else:
            D._tout[u] = clock
            stack.pop()


def arc_between(D: DendriteApprox, u: Class, v: Class) -> list[Class]:
    """The unique tree path from u to v, both included."""
    left, right = [u], [v]
    a, b = u, v
    while D._level[a] > D._level[b]:
        a = D._parent[a]
        left.append(a)
    while D._level[b] > D._level[a]:
        b = D._parent[b]
        right.append(b)
    while a != b:
        a = D._parent[a]
        b = D._parent[b]
        left.append(a)
        right.append(b)
    return left + right[-2::-1]


def separates_in_tree(D: DendriteApprox, x: Class, y: Class, z: Class) -> bool:
    if x == y or x == z:
        return False
    above_y, above_z = D.is_ancestor(x, y), D.is_ancestor(x, z)
    if above_y != above_z:
        return True
    if not above_y:
        return False
    # x is a common ancestor; it lies on the path only if it is the lowest one
    return D.neighbor_toward(x, y) != D.neighbor_toward(x, z)


def separates_by_holes(x: Class, y: Class, z: Class) -> bool:
    return x.hole_of(y.angles[0]) != x.hole_of(z.angles[0])


def separates(D: DendriteApprox, x: Class, y: Class, z: Class) -> bool:
    """True iff y and z lie in different components of the tree minus x."""
    if x == y or x == z:
        raise ValueError("separator must differ from both points")
    by_tree = separates_in_tree(D, x, y, z)
    by_holes = separates_by_holes(x, y, z)
    if by_tree != by_holes:
        raise RuntimeError(f"tree and hole separation disagree for {x}, {y}, {z}")
    return by_tree


def component_toward(D: DendriteApprox, e: Class, target: Class) -> Class | None:
    """Neighbor of e whose branch contains target; None if target == e."""
    if target == e:
        return None
    return D.neighbor_toward(e, target)


def is_persistent_cutpoint(c, d: int) -> bool:
    """Every class in the forward orbit has at least two angles."""
    if any(isinstance(a, DigitProgram) for a in c):
        raise ForwardOrbitDiverges(
            "stream classes need the bounded-horizon check in dynamics.persistence_at_horizon"
        )
    _, _, orbit = orbit_portrait(c, d)
    return all(len(o) >= 2 for o in orbit)


def vertex_line(D: DendriteApprox, v: Class) -> str:
    pk = point_kind(v)
    img = D.dynamics.get(v)
    return f"{v}; {pk.kind}; {pk.valence}; {D.lamination.depth_of(v)}; {img if img is not None else 'FRONTIER'}"


def export_tree(D: DendriteApprox) -> str:
    lines = ["# vertex: class; kind; valence; depth; image-class-or-FRONTIER"]
    lines += [f"vertex {vertex_line(D, v)}" for v in D.vertices]
    lines.append("# edge: class; class")
    lines += [f"edge {u}; {v}" for u, v in D.edges]
    return "\n".join(lines) + "\n"
