"""Equivalence classes on the circle, invariant laminations and pullback.

A ``Class`` is a finite set of exact angles.  A ``Lamination`` is a finite
collection of pairwise disjoint, pairwise unlinked classes together with the
degree of the covering map and the number of pullback generations stored.

Unlinkedness of many classes is decided with a single sweep around the
circle (``NestingIndex``): classes are unlinked exactly when their points,
read counterclockwise, form a non-crossing partition.  The same sweep
yields the complementary regions of the union of class hulls, which the
pullback and the dendrite builder both use.
"""
from __future__ import annotations

import bisect
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction

from .circle import (
    DigitProgram,
    OrientedArc,
    exact,
    format_angle,
    frac_mod1,
    preimages,
    sigma,
)
from .errors import AmbiguousPullback, ForwardOrbitDiverges, PreconditionFailed

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Class:
    """Finite nonempty set of exact angles, kept in ascending order."""

    angles: tuple[Fraction, ...]

    def __post_init__(self):
        values = sorted({exact(a) for a in self.angles})
        if not values:
            raise ValueError("a class must be nonempty")
        object.__setattr__(self, "angles", tuple(values))

    @classmethod
    def of(cls, *angles) -> Class:
        return cls(tuple(angles))

    def __len__(self):
        return len(self.angles)

    def __iter__(self):
        return iter(self.angles)

    def __contains__(self, x):
        return x in self.angles

    def __lt__(self, other):
        return (len(self.angles), self.angles) < (len(other.angles), other.angles)

    def __str__(self):
        return "{" + ",".join(format_angle(a) for a in self.angles) + "}"

    def hole_of(self, x) -> int | None:
        """Index j of the hole (a_j, a_{j+1}) containing ``x``; None if x is in the class."""
        x = exact(x)
        k = bisect.bisect_left(self.angles, x)
        if k < len(self.angles) and self.angles[k] == x:
            return None
        return (k - 1) % len(self.angles)


def class_image(c: Class, d: int) -> Class:
    return Class(tuple(sigma(d, a) for a in c.angles))


def is_critical(c: Class, d: int) -> bool:
    return len(class_image(c, d)) < len(c)


def holes(c: Class) -> list[OrientedArc]:
    a = c.angles
    n = len(a)
    return [OrientedArc(a[i], a[(i + 1) % n]) for i in range(n)]


def classify_class(c: Class) -> str:
    if len(c) == 1:
        return "bud"
    if len(c) == 2:
        return "leaf-class"
    return "gap"


def classes_unlinked(u: Class, v: Class) -> bool:
    """Disjoint classes are unlinked iff one sits inside a single hole of the other."""
    if set(u.angles) & set(v.angles):
        return False
    if len(u) == 1 or len(v) == 1:
        return True
    return len({u.hole_of(x) for x in v.angles}) == 1


def orbit_portrait(c, d: int, max_steps: int = 10**6) -> tuple[int, int, list[Class]]:
    """Preperiod, period and the orbit (through one full cycle) of a class."""
    if not isinstance(c, Class):
        if any(isinstance(a, DigitProgram) for a in c):
            raise ForwardOrbitDiverges("digit-program angles have no exact forward orbit")
        c = Class(tuple(c))
    seen = {}
    orbit = []
    current = c
    while current not in seen:
        if len(orbit) > max_steps:
            raise ForwardOrbitDiverges(f"orbit of {c} did not repeat in {max_steps} steps")
        seen[current] = len(orbit)
        orbit.append(current)
        current = class_image(current, d)
    preperiod = seen[current]
    return preperiod, len(orbit) - preperiod, orbit


# ---------------------------------------------------------------------------
# nesting sweep


class NestingIndex:
    """One counterclockwise sweep over the points of a class collection.

    For every class it records the region it first appears in, where a region
    is named ``(k, j)``: the part of hole j of class k (a class with at least
    two points) that is visible from k.  Buds never bound a region.  Classes
    bordering a common region are exactly the pairs no third class separates.
    """

    def __init__(self, classes):
        self.classes = list(classes)
        pts = sorted((a, i) for i, c in enumerate(self.classes) for a in c.angles)
        self.points = [a for a, _ in pts]
        self.labels = [i for _, i in pts]
        self.crossings: list[tuple[int, int]] = []
        self.overlaps: list[tuple[int, int]] = []
        n = len(pts)
        for k in range(1, n):
            if self.points[k] == self.points[k - 1]:
                self.overlaps.append((self.labels[k - 1], self.labels[k]))
        self.region_of_class: list = [None] * len(self.classes)
        self.gap_region: list = [None] * n
        sizes = [len(c) for c in self.classes]
        start = next((k for k in range(n) if sizes[self.labels[k]] > 1), None)
        self.root = None if start is None else self.labels[start]
        if start is None:
            return
        root = self.root
        seen = [0] * len(self.classes)
        stack: list[int] = []

        def current():
            if stack:
                top = stack[-1]
                return (top, seen[top] - 1)
            return (root, sizes[root] - 1)

        for step in range(n):
            k = (start + step) % n
            lab = self.labels[k]
            if sizes[lab] == 1:
                self.region_of_class[lab] = current()
            elif seen[lab] == 0:
                if lab != root:
                    self.region_of_class[lab] = current()
                stack.append(lab)
                seen[lab] = 1
            elif stack and stack[-1] == lab:
                seen[lab] += 1
                if seen[lab] == sizes[lab]:
                    stack.pop()
            else:
                self.crossings.append((stack[-1] if stack else root, lab))
                seen[lab] += 1
                if lab in stack and seen[lab] == sizes[lab]:
                    stack.remove(lab)
            self.gap_region[k] = current()

    def region_at(self, x):
        """Region containing an angle that is not one of the indexed points."""
        if not self.points or self.root is None:
            return None
        k = bisect.bisect_right(self.points, x) - 1
        return self.gap_region[k % len(self.points)]

    def regions(self) -> dict:
        """Region -> indices of the classes that first appear in it."""
        out: dict = {}
        for i, region in enumerate(self.region_of_class):
            if region is not None:
                out.setdefault(region, []).append(i)
        return out


# ---------------------------------------------------------------------------
# laminations


@dataclass(frozen=True)
class Lamination:
    degree: int
    classes: tuple[Class, ...]
    depth: int = 0
    generators: tuple[Class, ...] = ()
    class_depth: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if self.degree < 2:
            raise ValueError("degree must be at least 2")
        owner = {}
        for c in self.classes:
            for a in c.angles:
                owner.setdefault(a, c)
        object.__setattr__(self, "_owner", owner)
        object.__setattr__(self, "_members", frozenset(self.classes))

    @classmethod
    def from_classes(cls, degree, classes, depth=0, generators=()) -> Lamination:
        classes = tuple(sorted({c if isinstance(c, Class) else Class(tuple(c)) for c in classes}))
        return cls(degree, classes, depth, tuple(generators), {c: 0 for c in classes})

    def __len__(self):
        return len(self.classes)

    def __contains__(self, c):
        return c in self._members

    def owner(self, x) -> Class | None:
        return self._owner.get(exact(x))

    def depth_of(self, c: Class) -> int:
        return self.class_depth.get(c, 0)

    def image(self, c: Class) -> Class | None:
        """The stored image class, or None when it is not stored."""
        img = class_image(c, self.degree)
        return img if img in self._members else None

    def critical_classes(self) -> list[Class]:
        return [c for c in self.classes if is_critical(c, self.degree)]


@dataclass
class Violation:
    tag: str
    witnesses: tuple
    note: str = ""

    def __str__(self):
        items = ", ".join(str(w) for w in self.witnesses)
        return f"{self.tag}: {items}" + (f" ({self.note})" if self.note else "")


@dataclass
class AxiomReport:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def tags(self) -> set[str]:
        return {v.tag for v in self.violations}

    def lines(self) -> list[str]:
        out = [f"passed: {str(self.passed).lower()}"]
        out += [f"violation {v}" for v in self.violations]
        out += [f"warning {w}" for w in self.warnings]
        out += [f"note {n}" for n in self.notes]
        return out


def check_axioms(lam: Lamination) -> AxiomReport:
    """Check unlinkedness, closedness surrogate and D1-D3 on stored classes."""
    report = AxiomReport()
    d = lam.degree
    classes = list(lam.classes)
    index = NestingIndex(classes)
    report.notes.append(
        "E1-finite: closedness is checked only as 'stored classes are pairwise disjoint'"
    )
    for i, j in index.overlaps:
        report.violations.append(
            Violation("E1-finite", (classes[i], classes[j]), "classes share an angle")
        )
    for i, j in index.crossings:
        report.violations.append(Violation("E2", (classes[i], classes[j]), "linked classes"))
    # D4 / E3: stored classes are finite sets of points, nothing to find.
    for c in classes:
        img = class_image(c, d)
        if img not in lam:
            report.violations.append(Violation("D1", (c, img), "image class not stored"))
        if len(img) > 1:
            for hole in holes(c):
                a, b = sigma(d, hole.start), sigma(d, hole.end)
                j = img.angles.index(a)
                if img.angles[(j + 1) % len(img)] != b:
                    report.violations.append(
                        Violation("D3", (c, img), f"hole ({format_angle(hole.start)}, "
                                  f"{format_angle(hole.end)}) does not map onto a hole")
                    )
                    break
        if lam.depth_of(c) < lam.depth:
            owners = set()
            missing = []
            for a in c.angles:
                for y in preimages(d, a):
                    o = lam.owner(y)
                    if o is None:
                        missing.append(y)
                    else:
                        owners.add(o)
            if missing:
                report.violations.append(
                    Violation("D2", (c, *missing[:3]), "preimage angles not stored")
                )
            if len(owners) > d:
                report.violations.append(
                    Violation("D2", (c,), f"preimage splits into {len(owners)} > {d} classes")
                )
            for o in owners:
                if class_image(o, d) != c:
                    report.violations.append(
                        Violation("D2", (c, o), "preimage class maps elsewhere")
                    )
    excess = sum(len(c) - len(class_image(c, d)) for c in classes)
    if excess > d - 1:
        report.warnings.append(
            f"criticality count {excess} exceeds {d - 1} (not a polynomial-model lamination)"
        )
    return report


def naive_linked_pairs(classes) -> list[tuple[Class, Class]]:
    """All-pairs chord scan; quadratic, kept as an independent check."""
    from .circle import Chord, chords_linked

    chords = []
    for c in classes:
        for a, b in itertools.combinations(c.angles, 2):
            chords.append((c, Chord(a, b)))
    out = set()
    for (c1, p), (c2, q) in itertools.combinations(chords, 2):
        if c1 != c2 and chords_linked(p, q):
            out.add((min(c1, c2), max(c1, c2)))
    return sorted(out)


# ---------------------------------------------------------------------------
# pullback


def forward_closure(d: int, classes) -> list[Class]:
    out = {}
    for c in classes:
        _, _, orbit = orbit_portrait(c, d)
        for o in orbit:
            out.setdefault(o, None)
    return list(out)


def _blocks_unlinked(blocks) -> bool:
    return not NestingIndex([Class(tuple(b)) for b in blocks]).crossings


def sibling_partitions(d, g: Class, remaining, regions, n_existing, limit=2):
    """Admissible ways to group ``remaining`` preimage angles of ``g`` into classes.

    Every block maps onto g with the same multiplicity over each point and
    sends holes to holes; all of a block lies in one complementary region of
    the stored classes; blocks are mutually unlinked; together with the
    ``n_existing`` stored preimage classes there are at most ``d`` of them.
    Stops after ``limit`` solutions.
    """
    m = len(g)
    pos = {a: j for j, a in enumerate(g.angles)}
    target = {p: pos[sigma(d, p)] for p in remaining}
    region = {p: regions(p) for p in remaining}
    solutions = []

    def admissible(block):
        if m == 1:
            return True
        n = len(block)
        return all(target[block[(i + 1) % n]] == (target[block[i]] + 1) % m for i in range(n))

    def rec(unassigned, blocks):
        if len(solutions) >= limit:
            return
        if not unassigned:
            if _blocks_unlinked(blocks):
                solutions.append([tuple(b) for b in blocks])
            return
        if n_existing + len(blocks) >= d:
            return
        p0 = unassigned[0]
        pool = [q for q in unassigned[1:] if region[q] == region[p0]]
        by_target = {j: [q for q in pool if target[q] == j] for j in range(m)}
        for k in range(1, d + 1):
            choices = []
            for j in range(m):
                need = k - 1 if j == target[p0] else k
                if len(by_target[j]) < need:
                    choices = None
                    break
                choices.append(list(itertools.combinations(by_target[j], need)))
            if choices is None:
                continue
            for combo in itertools.product(*choices):
                block = sorted([p0, *itertools.chain.from_iterable(combo)])
                if not admissible(block):
                    continue
                if blocks and not _blocks_unlinked([*blocks, block]):
                    continue
                taken = set(block)
                rec([q for q in unassigned if q not in taken], [*blocks, block])
                if len(solutions) >= limit:
                    return

    rec(sorted(remaining), [])
    return solutions


def pullback_closure(d: int, generators, depth: int) -> Lamination:
    """Forward closure of the generators plus ``depth`` generations of preimages."""
    for g in generators:
        if any(isinstance(a, DigitProgram) for a in g):
            raise ForwardOrbitDiverges(f"generator {g} is not eventually periodic")
    gens = [g if isinstance(g, Class) else Class(tuple(g)) for g in generators]
    if NestingIndex(gens).crossings:
        i, j = NestingIndex(gens).crossings[0]
        raise PreconditionFailed(f"generators {gens[i]} and {gens[j]} are linked")
    placed: dict[Class, int] = {}
    owner: dict[Fraction, Class] = {}
    for c in forward_closure(d, gens):
        for a in c.angles:
            if a in owner and owner[a] != c:
                raise PreconditionFailed(f"classes {owner[a]} and {c} overlap")
            owner[a] = c
        placed[c] = 0
    index = NestingIndex(list(placed))
    if index.crossings:
        i, j = index.crossings[0]
        raise PreconditionFailed(
            f"forward images {index.classes[i]} and {index.classes[j]} are linked"
        )
    frontier = sorted(placed)
    for level in range(1, depth + 1):
        index = NestingIndex(list(placed))
        new = []
        for g in frontier:
            pts = [y for a in g.angles for y in preimages(d, a)]
            existing = {owner[y] for y in pts if y in owner}
            for e in existing:
                if class_image(e, d) != g:
                    raise PreconditionFailed(f"stored class {e} meets the preimage of {g}")
            remaining = [y for y in pts if y not in owner]
            if not remaining:
                continue
            options = sibling_partitions(d, g, remaining, index.region_at, len(existing))
            if not options:
                raise PreconditionFailed(
                    f"no unlinked sibling partition for the preimage of {g} at depth {level}"
                )
            if len(options) > 1:
                shown = [" ".join(str(Class(b)) for b in opt) for opt in options]
                raise AmbiguousPullback(
                    f"preimage of {g} at depth {level} splits in more than one unlinked way: "
                    + " | ".join(shown),
                    cls=g,
                    depth=level,
                )
            for block in options[0]:
                c = Class(block)
                placed[c] = level
                for a in c.angles:
                    owner[a] = c
                new.append(c)
        crossings = NestingIndex(list(placed)).crossings
        if crossings:
            every = list(placed)
            i, j = crossings[0]
            raise AmbiguousPullback(
                f"siblings placed at depth {level} are linked: {every[i]} and {every[j]}",
                depth=level,
            )
        frontier = sorted(new)
        log.debug("pullback depth %d: %d new classes", level, len(new))
    classes = tuple(sorted(placed, key=lambda c: (placed[c], c)))
    return Lamination(d, classes, depth, tuple(gens), dict(placed))


def angle_distance(c1, c2) -> Fraction:
    """Smallest circle distance between an angle of one class and one of the other."""
    from .circle import circle_distance

    return min(circle_distance(a, b) for a in c1 for b in c2)


__all__ = [
    "AxiomReport",
    "Class",
    "Lamination",
    "NestingIndex",
    "Violation",
    "angle_distance",
    "check_axioms",
    "class_image",
    "classes_unlinked",
    "classify_class",
    "forward_closure",
    "frac_mod1",
    "holes",
    "is_critical",
    "naive_linked_pairs",
    "orbit_portrait",
    "pullback_closure",
    "sibling_partitions",
]
