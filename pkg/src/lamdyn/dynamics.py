"""Orbits and limit sets on a finite dendrite model, plus the derived checks.

Exact seeds are stored classes whose angles are rational; their orbits are
eventually periodic and every answer here is exact.  Stream seeds are classes
of digit-program angles; their orbits are followed for a bounded number of
steps, limit points are the prefix cylinders the orbit keeps returning to,
and every verdict about them carries the label ``at-budget``.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .circle import (
    Chord,
    DigitProgram,
    SturmianDigits,
    circle_distance,
    format_angle,
    sigma,
)
from .dendrite import DendriteApprox, arc_between, separates_in_tree
from .errors import Frontier, InsufficientWitnesses, PreconditionFailed, UndecidedAtPrecision
from .lamination import Class, Lamination, class_image, is_critical, orbit_portrait, pullback_closure


# ---------------------------------------------------------------------------
# stream seeds


@dataclass(frozen=True)
class StreamClass:
    """A class of digit-stream angles followed only to a finite horizon."""

    angles: tuple

    def shift(self, d: int) -> StreamClass:
        return StreamClass(tuple(sigma(d, a) for a in self.angles))

    def __len__(self):
        return len(self.angles)

    def __str__(self):
        return "{" + ",".join(format_angle(a) for a in self.angles) + "}"


# Slopes with denominators far above any iterate budget used with them.
DEFAULT_SLOPES = (Fraction(10946, 17711), Fraction(5741, 13860), Fraction(7953, 10864))


def sturmian_seed(alpha, rho=Fraction(0)) -> StreamClass:
    """The leaf {x, 1-x} of the Chebyshev lamination, x a mechanical word."""
    alpha, rho = Fraction(alpha), Fraction(rho)
    return StreamClass((SturmianDigits(alpha, rho), SturmianDigits(alpha, rho, flip=True)))


def chebyshev_lamination(depth: int) -> Lamination:
    """Pullbacks of the critical diameter {1/4, 3/4}; the quotient is an arc."""
    return pullback_closure(2, [Class.of(Fraction(1, 4), Fraction(3, 4))], depth)


def _digit_words(seed: StreamClass, length: int):
    return [[a.digit(i) for i in range(length)] for a in seed.angles]


def _windows(word, base: int, k: int, count: int) -> list[int]:
    """Integer value of word[n:n+k] for n < count, by a sliding window."""
    top = base ** (k - 1)
    value = 0
    for digit in word[:k]:
        value = value * base + digit
    out = [value]
    for n in range(1, count):
        value = (value - word[n - 1] * top) * base + word[n + k - 1]
        out.append(value)
    return out


def persistence_at_horizon(seed: StreamClass, d: int, horizon: int, precision: int) -> bool:
    """Angles of every image up to ``horizon`` stay pairwise distinct at ``precision`` digits."""
    words = _digit_words(seed, horizon + precision)
    cols = [_windows(w, d, precision, horizon) for w in words]
    for n in range(horizon):
        row = [c[n] for c in cols]
        if len(set(row)) < len(row):
            raise UndecidedAtPrecision(f"angles of image {n} agree on {precision} digits", step=n)
    return len(seed) >= 2


# ---------------------------------------------------------------------------
# limit points


@dataclass
class LimitPointRecord:
    target: Class
    witnesses: tuple[int, ...]
    type: str | None = None  # "arc" or "non_separating"
    side_edge: Chord | None = None
    label: str = "at-budget"  # "landing", "periodic" or "at-budget"
    chain: tuple[int, ...] = ()
    images: tuple = field(default=(), repr=False)


def _require_stored(L: Lamination, c: Class):
    if c not in L:
        raise Frontier(f"class {c} is not stored at depth {L.depth}", cls=c)


def omega_limit(L: Lamination, seed, budget: int = 2000, precision: int = 20) -> list[LimitPointRecord]:
    """Limit points of the orbit of ``seed``: exact cycle classes or recurring cylinders."""
    if isinstance(seed, StreamClass):
        return _stream_omega(L, seed, budget, precision)
    _require_stored(L, seed)
    pre, per, orbit = orbit_portrait(seed, L.degree)
    for c in orbit:
        _require_stored(L, c)
    label = "periodic" if pre == 0 else "landing"
    records = []
    for k, target in enumerate(orbit[pre:]):
        first = pre + k
        wit = tuple(range(first, budget + 1, per))
        records.append(LimitPointRecord(target, wit, "arc", None, label, wit[:3]))
    return records


def _stream_omega(L, seed: StreamClass, budget: int, precision: int):
    d = L.degree
    for a in seed.angles:
        if not isinstance(a, DigitProgram) or a.base != d:
            raise PreconditionFailed(f"stream angles must be base-{d} digit programs")
    # returns into one cylinder are ordered on budget + precision digits, enough
    # to tell apart every orbit point inside the horizon
    fine = budget + precision
    words = _digit_words(seed, budget + fine + 1)
    coarse = [_windows(w, d, precision, budget + 1) for w in words]
    detail = [_windows(w, d, fine, budget + 1) for w in words]
    clusters: dict[tuple, list[int]] = {}
    start = budget // 2
    for n in range(start, budget + 1):
        key = tuple(sorted(v[n] for v in coarse))
        clusters.setdefault(key, []).append(n)
    records = []
    scale = d ** (fine - precision)
    for key, visits in sorted(clusters.items()):
        if len(visits) < 2:
            continue
        target = Class(tuple(Fraction(2 * v + 1, 2 * d**precision) for v in key))
        mid = tuple(v * scale + scale // 2 for v in key)
        images = tuple(tuple(sorted(v[n] for v in detail)) for n in visits)
        records.append(LimitPointRecord(target, tuple(visits), images=(mid, images)))
    return records


def _hole(angles, x) -> int | None:
    k = bisect.bisect_left(angles, x)
    if k < len(angles) and angles[k] == x:
        return None
    return (k - 1) % len(angles)


def _int_separates(x, y, z) -> bool:
    hy, hz = _hole(x, y[0]), _hole(x, z[0])
    return hy is not None and hz is not None and hy != hz and not set(x) & set(y)


def classify_limit_point(L: Lamination, seed, record: LimitPointRecord) -> LimitPointRecord:
    """Arc type when three or more witnesses approach the target monotonically."""
    if record.label in ("landing", "periodic"):
        record.type = "arc"
        return record
    if len(record.witnesses) < 3:
        raise InsufficientWitnesses(
            f"{len(record.witnesses)} witnesses for {record.target}; raise the budget"
        )
    mid, imgs = record.images
    n = len(imgs)
    # longest chain in time order, each image separating its predecessor from the target
    best = [1] * n
    prev = [-1] * n
    for j in range(n):
        for i in range(j):
            if best[i] + 1 > best[j] and _int_separates(imgs[j], imgs[i], mid):
                best[j], prev[j] = best[i] + 1, i
    end = max(range(n), key=lambda k: (best[k], -k))
    chain = []
    while end >= 0:
        chain.append(end)
        end = prev[end]
    chain.reverse()
    record.chain = tuple(record.witnesses[k] for k in chain)
    T = record.target
    if len(chain) >= 3:
        record.type = "arc"
        j = _hole(mid, imgs[chain[-1]][0])
        a = T.angles
        record.side_edge = Chord(a[j], a[(j + 1) % len(a)])
    else:
        record.type = "non_separating"
    return record


# ---------------------------------------------------------------------------
# periodic cutpoints


@dataclass
class PeriodicCutpoints:
    max_period: int
    stored: list[Class]
    candidates_beyond_depth: list[Fraction]
    _angles: list | None = field(default=None, repr=False)

    def angles(self) -> list[Fraction]:
        """Sorted angles of stored cutpoints and candidates together."""
        if self._angles is None:
            pts = {a for c in self.stored for a in c.angles}
            pts.update(self.candidates_beyond_depth)
            self._angles = sorted(pts)
        return self._angles


def periodic_cutpoints(L: Lamination, max_period: int) -> PeriodicCutpoints:
    return _periodic_table(L, max_period)


@lru_cache(maxsize=64)
def _periodic_table(L: Lamination, max_period: int) -> PeriodicCutpoints:
    d = L.degree
    stored = []
    for c in L.classes:
        if len(c) < 2:
            continue
        pre, per, _ = orbit_portrait(c, d)
        if pre == 0 and per <= max_period:
            stored.append(c)
    candidates = set()
    for q in range(1, max_period + 1):
        den = d**q - 1
        for k in range(den):
            x = Fraction(k, den)
            if L.owner(x) is None:
                candidates.add(x)
    return PeriodicCutpoints(max_period, stored, sorted(candidates))


def nearest_distance(target: Class, points: list[Fraction]) -> Fraction:
    """Smallest circle distance from an angle of ``target`` to a sorted point list."""
    if not points:
        raise ValueError("no periodic cutpoints to measure against")
    best = None
    for a in target.angles:
        k = bisect.bisect_left(points, a)
        for idx in (k - 1, k % len(points)):
            dist = circle_distance(a, points[idx])
            if best is None or dist < best:
                best = dist
    return best


# ---------------------------------------------------------------------------
# theorem verification


@dataclass
class VerificationReport:
    tag: str
    params: dict
    rows: list = field(default_factory=list)
    passed: bool = True
    exact_failures: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [f"theorem: {self.tag}"]
        out += [f"{k}: {v}" for k, v in sorted(self.params.items())]
        out.append("# seed; target; label; type; " + "; ".join(f"d(p={p})" for p in self.params["p_list"]))
        for row in self.rows:
            dists = "; ".join(str(x) for x in row["distances"])
            out.append(f"{row['seed']}; {row['target']}; {row['label']}; {row['type']}; {dists}")
        out += [f"note: {n}" for n in self.notes]
        out += [f"exact-failure: {f}" for f in self.exact_failures]
        out.append(f"passed: {str(self.passed).lower()}")
        return out


def first_endpoint_image(c: Class, d: int) -> Class | None:
    _, _, orbit = orbit_portrait(c, d)
    for img in orbit:
        if len(img) < 2:
            return img
    return None


def verify_recurrence_theorems(L: Lamination, seeds, p_list=(4, 8, 12), budget: int = 2000,
                               precision: int = 20, tag: str = "limdend") -> VerificationReport:
    """Distances from limit classes to periodic cutpoints, per period bound."""
    p_list = tuple(sorted(p_list))
    report = VerificationReport(tag, {"depth": L.depth, "p_list": p_list, "budget": budget,
                                      "precision": precision, "degree": L.degree})
    tables = {}

    def table(p):
        if p not in tables:
            tables[p] = periodic_cutpoints(L, p)
        return tables[p]

    for seed in seeds:
        if isinstance(seed, StreamClass):
            persistence_at_horizon(seed, L.degree, budget + 1, precision)
            records = omega_limit(L, seed, budget, precision)
            seq_ok = True
            for rec in records:
                try:
                    classify_limit_point(L, seed, rec)
                except InsufficientWitnesses as exc:
                    report.notes.append(str(exc))
                dists = [nearest_distance(rec.target, table(p).angles()) for p in p_list]
                seq_ok &= all(b <= a for a, b in zip(dists, dists[1:]))
                report.rows.append(dict(seed=_seed_name(seed), target=rec.target, label=rec.label,
                                        type=rec.type, distances=dists))
            if not seq_ok:
                report.passed = False
                report.notes.append(f"distances not weakly decreasing for {_seed_name(seed)} (at-budget)")
            continue
        bad = first_endpoint_image(seed, L.degree)
        if bad is not None:
            raise PreconditionFailed(
                f"seed {seed} is not a persistent cutpoint: its orbit reaches the endpoint {bad}",
                endpoint=bad,
            )
        _, per, _ = orbit_portrait(seed, L.degree)
        for rec in omega_limit(L, seed, budget, precision):
            classify_limit_point(L, seed, rec)
            dists = []
            for p in p_list:
                stored = table(max(p, per)).stored
                dists.append(Fraction(0) if rec.target in stored else
                             nearest_distance(rec.target, table(max(p, per)).angles()))
            if rec.target not in table(per).stored:
                report.passed = False
                report.exact_failures.append(f"{seed}: limit class {rec.target} is not a periodic cutpoint")
            report.rows.append(dict(seed=str(seed), target=rec.target, label=rec.label,
                                    type=rec.type, distances=dists))
    return report


def _seed_name(seed: StreamClass) -> str:
    a = seed.angles[0]
    if isinstance(a, SturmianDigits):
        return f"sturmian(alpha={a.alpha},rho={a.rho})"
    return str(seed)


def stream_verdict(L: Lamination, seed: StreamClass, budget: int, precision: int, p_list=(4, 8, 12)):
    """Summary used for the stability comparison: (has arc-type targets, distances decrease)."""
    rep = verify_recurrence_theorems(L, [seed], p_list, budget, precision)
    has_arc = any(r["type"] == "arc" for r in rep.rows)
    return has_arc, rep.passed


def persistent_seeds(L: Lamination, max_count: int | None = None) -> list[Class]:
    """Stored classes whose whole forward orbit consists of cutpoint classes."""
    out = [c for c in L.classes if len(c) >= 2 and first_endpoint_image(c, L.degree) is None]
    return out[:max_count] if max_count else out


# ---------------------------------------------------------------------------
# fixed points on subtrees


def stored_map(D: DendriteApprox, power: int = 1):
    """Vertex map f^power, returning None once an image is not stored."""
    def F(c):
        for _ in range(power):
            c = D.dynamics.get(c)
            if c is None:
                return None
        return c

    return F


def is_subtree(D: DendriteApprox, vertices) -> bool:
    vs = set(vertices)
    if not vs:
        return False
    base = next(iter(vs))
    return all(set(arc_between(D, base, v)) <= vs for v in vs)


def hull(D: DendriteApprox, vertices) -> set:
    vs = list(vertices)
    if not vs:
        return set()
    out = set()
    for v in vs:
        out.update(arc_between(D, vs[0], v))
    return out


def invariant_hull(D: DendriteApprox, vertices, F=None) -> tuple[set, set]:
    """Smallest subtree containing ``vertices`` and closed under F, and frontier vertices met."""
    F = F or stored_map(D)
    current = hull(D, vertices)
    frontier = set()
    while True:
        images = set()
        for v in current:
            w = F(v)
            if w is None:
                frontier.add(v)
            else:
                images.add(w)
        bigger = hull(D, current | images)
        if bigger == current:
            return current, frontier
        current = bigger


@dataclass
class ScramblingResult:
    passed: bool
    attachment: list
    violations: list
    frontier: list


def boundary_scrambling_check(D1_vertices, D2: DendriteApprox, F=None) -> ScramblingResult:
    """Each non-fixed attachment point must map into a branch that meets D1."""
    F = F or stored_map(D2)
    D1 = set(D1_vertices)
    if not is_subtree(D2, D1):
        raise PreconditionFailed("D1 vertices do not span a subtree of D2")
    E = [e for e in D2.vertices if e in D1 and any(n not in D1 for n in D2.adjacency[e])]
    violations, frontier = [], []
    for e in E:
        fe = F(e)
        if fe is None:
            frontier.append(e)
            continue
        if fe == e or fe in D1:
            continue
        if D2.neighbor_toward(e, fe) not in D1:
            violations.append(e)
    return ScramblingResult(not violations and not frontier, E, violations, frontier)


@dataclass
class FixedPointResult:
    status: str  # FIXED-VERTEX, FIXED-POINT-BELOW-DEPTH, NO-FIXED-POINT-FOUND
    vertex: Class | None = None
    edge: tuple | None = None
    flags: tuple[str, ...] = ()
    note: str = ""

    def line(self) -> str:
        where = str(self.vertex) if self.vertex is not None else (
            f"{self.edge[0]} -- {self.edge[1]}" if self.edge else "-")
        extra = f" [{', '.join(self.flags)}]" if self.flags else ""
        return f"{self.status}: {where}{extra} {self.note}".rstrip()


def outward_edge(D: DendriteApprox, a: Class, b: Class, F) -> bool:
    """f(a) is separated from b by a, and f(b) from a by b."""
    fa, fb = F(a), F(b)
    if fa is None or fb is None or fa == a or fb == b:
        return False
    return separates_in_tree(D, a, fa, b) and separates_in_tree(D, b, fb, a)


def fixed_cutpoint_search(D1_vertices, D2: DendriteApprox, F=None) -> FixedPointResult:
    F = F or stored_map(D2)
    scr = boundary_scrambling_check(D1_vertices, D2, F)
    if not scr.passed and scr.violations:
        raise PreconditionFailed(
            "boundary scrambling fails at " + " ".join(str(e) for e in scr.violations)
        )
    D1 = [v for v in D2.vertices if v in set(D1_vertices)]
    fixed = [v for v in D1 if F(v) == v]
    cut = [v for v in fixed if len(v) >= 2]
    if cut:
        return FixedPointResult("FIXED-VERTEX", vertex=cut[0])
    inside = set(D1)
    for u, v in D2.edges:
        if u in inside and v in inside and outward_edge(D2, u, v, F):
            return FixedPointResult("FIXED-POINT-BELOW-DEPTH", edge=(u, v),
                                    note="endpoints map outward; the fixed point lies between them")
    if fixed:
        return FixedPointResult("FIXED-VERTEX", vertex=fixed[0], flags=("no-cutpoint-available",))
    unknown = [v for v in D1 if F(v) is None]
    note = "FRONTIER: " + (
        f"images of {len(unknown)} vertices are not stored" if unknown
        else f"no stored vertex or edge of D1 at depth {D2.depth} carries the fixed point"
    )
    return FixedPointResult("NO-FIXED-POINT-FOUND", note=note, flags=("FRONTIER",))


# ---------------------------------------------------------------------------
# dynamical core


@dataclass
class CoreResult:
    vertices: set
    critical: list
    dropped: list
    iterations: int
    frontier: set
    status: str = "ok"  # or "no-critical-core"


def _core_step(D, crit, F):
    K, frontier = invariant_hull(D, crit, F)
    images = {F(v) for v in K} - {None}
    inner, more = invariant_hull(D, images, F) if images else (set(), set())
    kept = [c for c in crit if c in inner]
    return K, kept, frontier | more


def dynamical_core(L: Lamination, D: DendriteApprox | None = None) -> CoreResult:
    """Smallest invariant stored subtree spanned by the critical classes that survive in it."""
    from .dendrite import build_dendrite

    D = D or build_dendrite(L)
    F = stored_map(D)
    crit = [c for c in D.vertices if is_critical(c, L.degree)]
    if not crit:
        return CoreResult(set(), [], [], 0, set(), "no-critical-core")
    dropped = []
    frontier = set()
    iterations = 0
    while True:
        iterations += 1
        K, kept, fr = _core_step(D, crit, F)
        frontier |= fr
        if kept == crit:
            return CoreResult(K, crit, dropped, iterations, frontier)
        dropped += [c for c in crit if c not in kept]
        crit = kept
        if not crit:
            return CoreResult(set(), [], dropped, iterations, frontier, "no-critical-core")


def core_is_stable(L: Lamination, core: CoreResult, D: DendriteApprox | None = None) -> bool:
    """One further closure step reproduces the same core."""
    from .dendrite import build_dendrite

    if core.status == "no-critical-core":
        return True
    D = D or build_dendrite(L)
    F = stored_map(D)
    K, kept, _ = _core_step(D, core.critical, F)
    return K == core.vertices and kept == core.critical


@dataclass
class AbsorptionRow:
    cls: Class
    steps: int | None
    status: str  # "absorbed", "FRONTIER" or "FAIL"


def absorption_check(L: Lamination, core: CoreResult, budget: int | None = None) -> list[AbsorptionRow]:
    """Every stored cutpoint class eventually maps into the core."""
    budget = budget if budget is not None else L.depth + len(L.classes) + 1
    rows = []
    for c in L.classes:
        if len(c) < 2:
            continue
        cur, steps = c, 0
        status = "FAIL"
        while steps <= budget:
            if cur in core.vertices:
                status = "absorbed"
                break
            nxt = class_image(cur, L.degree)
            if nxt not in L:
                status = "FRONTIER"
                break
            cur, steps = nxt, steps + 1
        rows.append(AbsorptionRow(c, steps if status == "absorbed" else None, status))
    return rows
