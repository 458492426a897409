"""Piecewise-linear Markov maps of finite trees, exactly.

A map is described edge by edge.  Every edge is parametrised by s in [0, 1]
(from its first to its second endpoint) and cut into pieces; each piece is
either constant (its image is a vertex) or maps linearly onto one whole edge,
possibly reversed.  Iterates are composed symbolically with ``Fraction``
arithmetic, so fixed points of f^p are found by solving one linear equation
per piece.

Points of the tree are tuples: ``("v", i)`` for vertex i, ``("e", j, s)`` for
the interior point with parameter 0 < s < 1 on edge j.
"""
from __future__ import annotations

import bisect
import heapq
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import count

from .errors import BoundExceeded, ParseError

MAX_PERIOD_BOUND = 16
MAX_PIECES = 4_000_000


# ---------------------------------------------------------------------------
# Sharkovskiy ordering


class TwoInfinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "2^inf"

    def __reduce__(self):
        return (TwoInfinity, ())


TWO_INF = TwoInfinity()


def _shark_rank(k):
    """Sort key: earlier in 3 > 5 > ... > 2*3 > ... > 2^inf > ... > 4 > 2 > 1 sorts first."""
    if k is TWO_INF:
        return (1, 0, 0)
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"not a Sharkovskiy type: {k!r}")
    a = (k & -k).bit_length() - 1
    odd = k >> a
    if odd > 1:
        return (0, a, odd)
    return (2, -a, 0)


def sharkovskiy_less(m, n) -> bool:
    """True iff m comes strictly before n in the Sharkovskiy ordering (m forces n)."""
    return _shark_rank(m) < _shark_rank(n)


def sh_set_contains(k, n: int) -> bool:
    if k is not TWO_INF and n == k:
        return True
    return sharkovskiy_less(k, n)


def sh_set(k, bound: int) -> set[int]:
    return {n for n in range(1, bound + 1) if sh_set_contains(k, n)}


def parse_shark(text: str):
    text = text.strip()
    if text in ("2^inf", "2^infinity", "two_infinity"):
        return TWO_INF
    return int(text)


# ---------------------------------------------------------------------------
# maps


@dataclass(frozen=True)
class Piece:
    lo: Fraction
    hi: Fraction
    target: int | None = None  # edge covered linearly, or None when constant
    reverse: bool = False
    value: tuple | None = None  # image point of a constant piece

    def image(self, s: Fraction, tree) -> tuple:
        if self.target is None:
            return self.value
        t = (s - self.lo) / (self.hi - self.lo)
        if self.reverse:
            t = 1 - t
        return tree.point(self.target, t)


@dataclass(frozen=True)
class MarkovTreeMap:
    vertices: tuple[str, ...]
    edges: tuple[tuple[int, int, Fraction], ...]
    vertex_image: tuple[int, ...]
    pieces: tuple[tuple[Piece, ...], ...]
    coords: tuple[Fraction, ...] | None = None
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        self.validate()

    # -- geometry

    def point(self, edge: int, s: Fraction) -> tuple:
        u, v, _ = self.edges[edge]
        if s == 0:
            return ("v", u)
        if s == 1:
            return ("v", v)
        return ("e", edge, Fraction(s))

    def is_interval(self) -> bool:
        return self.coords is not None

    def coordinate(self, p) -> Fraction:
        """Position on the line for interval maps."""
        if p[0] == "v":
            return self.coords[p[1]]
        u, v, _ = self.edges[p[1]]
        return self.coords[u] + p[2] * (self.coords[v] - self.coords[u])

    def neighbors(self, i: int):
        out = []
        for j, (u, v, length) in enumerate(self.edges):
            if u == i:
                out.append((v, j, length))
            elif v == i:
                out.append((u, j, length))
        return out

    def vertex_path(self, a: int, b: int) -> list[int]:
        """Edge indices along the tree path from vertex a to vertex b."""
        prev = {a: None}
        stack = [a]
        while stack:
            x = stack.pop()
            for y, j, _ in self.neighbors(x):
                if y not in prev:
                    prev[y] = (x, j)
                    stack.append(y)
        path = []
        x = b
        while prev[x] is not None:
            x, j = prev[x]
            path.append(j)
        return path[::-1]

    # -- evaluation

    def validate(self):
        n = len(self.vertices)
        if len(self.edges) != n - 1 or len(self.vertex_image) != n:
            raise ValueError("a tree needs |edges| = |vertices| - 1 and one image per vertex")
        for u, v, length in self.edges:
            if length <= 0:
                raise ValueError("edge lengths must be positive")
        for j, plist in enumerate(self.pieces):
            if not plist or plist[0].lo != 0 or plist[-1].hi != 1:
                raise ValueError(f"pieces of edge {j} must cover [0, 1]")
            for a, b in zip(plist, plist[1:]):
                if a.hi != b.lo:
                    raise ValueError(f"pieces of edge {j} are not contiguous")
                if a.image(a.hi, self) != b.image(b.lo, self):
                    raise ValueError(f"map is discontinuous on edge {j} at {a.hi}")
            u, v, _ = self.edges[j]
            if plist[0].image(Fraction(0), self) != ("v", self.vertex_image[u]):
                raise ValueError(f"edge {j} does not start at the image of its first vertex")
            if plist[-1].image(Fraction(1), self) != ("v", self.vertex_image[v]):
                raise ValueError(f"edge {j} does not end at the image of its second vertex")
            for p in plist:
                if p.lo >= p.hi:
                    raise ValueError("empty piece")

    def __call__(self, p):
        if p[0] == "v":
            return ("v", self.vertex_image[p[1]])
        _, j, s = p
        plist = self.pieces[j]
        k = bisect.bisect_right([q.lo for q in plist], s) - 1
        return plist[k].image(s, self)

    def iterate(self, p, n: int):
        for _ in range(n):
            p = self(p)
        return p

    def slope(self, edge: int, piece: Piece) -> Fraction:
        """Metric slope of a piece (signed by orientation, 0 when constant)."""
        if piece.target is None:
            return Fraction(0)
        length = self.edges[edge][2] * (piece.hi - piece.lo)
        s = self.edges[piece.target][2] / length
        return -s if piece.reverse else s

    def edge_path(self, edge: int) -> list[tuple[int, bool]]:
        return [(p.target, p.reverse) for p in self.pieces[edge] if p.target is not None]

    # -- metric

    def vertex_distances(self, sources: dict[int, Fraction]) -> dict[int, Fraction]:
        """Multi-source shortest distances along the tree."""
        dist = dict(sources)
        tie = count()
        heap = [(dv, next(tie), v) for v, dv in sources.items()]
        heapq.heapify(heap)
        while heap:
            dv, _, v = heapq.heappop(heap)
            if dv > dist.get(v, dv):
                continue
            for w, _, length in self.neighbors(v):
                nd = dv + length
                if w not in dist or nd < dist[w]:
                    dist[w] = nd
                    heapq.heappush(heap, (nd, next(tie), w))
        return dist

    def distance(self, p, q) -> Fraction:
        if p == q:
            return Fraction(0)
        if p[0] == "e" and q[0] == "e" and p[1] == q[1]:
            return abs(p[2] - q[2]) * self.edges[p[1]][2]
        dist = self.vertex_distances(self._anchors(q))
        return min(self._anchors_dist(p, dist))

    def _anchors(self, p) -> dict[int, Fraction]:
        if p[0] == "v":
            return {p[1]: Fraction(0)}
        u, v, length = self.edges[p[1]]
        return {u: p[2] * length, v: (1 - p[2]) * length}

    def _anchors_dist(self, p, dist):
        for vtx, off in self._anchors(p).items():
            if vtx in dist:
                yield dist[vtx] + off


def interval_map(xs, ys, names=None) -> MarkovTreeMap:
    """Connect-the-dots map of [xs[0], xs[-1]] with f(xs[i]) = ys[i] in xs."""
    xs = [Fraction(x) for x in xs]
    ys = [Fraction(y) for y in ys]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("vertex coordinates must increase")
    pos = {x: i for i, x in enumerate(xs)}
    if any(y not in pos for y in ys):
        raise ValueError("Markov condition: every vertex image must be a vertex")
    n = len(xs)
    names = tuple(names or (f"v{i}" for i in range(n)))
    edges = tuple((i, i + 1, xs[i + 1] - xs[i]) for i in range(n - 1))
    pieces = []
    for i in range(n - 1):
        a, b = pos[ys[i]], pos[ys[i + 1]]
        if a == b:
            pieces.append((Piece(Fraction(0), Fraction(1), value=("v", a)),))
            continue
        span = ys[i + 1] - ys[i]
        cuts = []
        step = 1 if b > a else -1
        for k in range(a, b, step):
            e = min(k, k + step)
            s0 = (xs[k] - ys[i]) / span
            s1 = (xs[k + step] - ys[i]) / span
            cuts.append(Piece(s0, s1, target=e, reverse=step < 0))
        pieces.append(tuple(cuts))
    return MarkovTreeMap(names, edges, tuple(pos[y] for y in ys), tuple(pieces), tuple(xs))


def tree_map(names, edges, vertex_image) -> MarkovTreeMap:
    """Map each edge linearly (by arc length) onto the tree path between the images."""
    skeleton = MarkovTreeMap.__new__(MarkovTreeMap)
    object.__setattr__(skeleton, "vertices", tuple(names))
    object.__setattr__(skeleton, "edges", tuple((u, v, Fraction(l)) for u, v, l in edges))
    pieces = []
    for u, v, _ in skeleton.edges:
        a, b = vertex_image[u], vertex_image[v]
        if a == b:
            pieces.append((Piece(Fraction(0), Fraction(1), value=("v", a)),))
            continue
        path = skeleton.vertex_path(a, b)
        total = sum(skeleton.edges[j][2] for j in path)
        run = Fraction(0)
        cur = a
        cuts = []
        for j in path:
            eu, ev, length = skeleton.edges[j]
            cuts.append(Piece(run / total, (run + length) / total, target=j, reverse=cur != eu))
            run += length
            cur = ev if cur == eu else eu
        pieces.append(tuple(cuts))
    return MarkovTreeMap(tuple(names), skeleton.edges, tuple(vertex_image), tuple(pieces))


# ---------------------------------------------------------------------------
# iterates and periods


def _compose(f: MarkovTreeMap, first, rest, value_of):
    """Pieces of rest o first, where ``first`` are f's pieces on one edge."""
    out = []
    for p in first:
        if p.target is None:
            out.append(Piece(p.lo, p.hi, value=value_of(p.value)))
            continue
        width = p.hi - p.lo
        sub = rest[p.target]
        seq = reversed(sub) if p.reverse else sub
        for q in seq:
            if p.reverse:
                a, b = p.lo + (1 - q.hi) * width, p.lo + (1 - q.lo) * width
            else:
                a, b = p.lo + q.lo * width, p.lo + q.hi * width
            if q.target is None:
                out.append(Piece(a, b, value=q.value))
            else:
                out.append(Piece(a, b, target=q.target, reverse=p.reverse != q.reverse))
    return tuple(out)


def iterate_pieces(f: MarkovTreeMap, p: int):
    """Pieces of f^p on every edge (cached per map)."""
    cache = f._cache.setdefault("iter", {1: f.pieces})
    if p in cache:
        return cache[p]
    prev = iterate_pieces(f, p - 1)
    if sum(len(x) for x in prev) * max(len(x) for x in f.pieces) > MAX_PIECES:
        raise BoundExceeded(f"f^{p} has too many linear pieces")

    def value_of(point):
        return f.iterate(point, p - 1)

    cache[p] = tuple(_compose(f, f.pieces[j], prev, value_of) for j in range(len(f.edges)))
    return cache[p]


@dataclass
class FixedSet:
    """Solutions of f^p(x) = x: isolated points plus whole edges fixed pointwise."""

    points: set
    edges: set

    def __contains__(self, pt):
        if pt in self.points:
            return True
        if pt[0] == "e":
            return pt[1] in self.edges
        return False


def fixed_set(f: MarkovTreeMap, p: int) -> FixedSet:
    cache = f._cache.setdefault("fix", {})
    if p in cache:
        return cache[p]
    pieces = iterate_pieces(f, p)
    points = set()
    fixed_edges = set()
    vimg = list(range(len(f.vertices)))
    for _ in range(p):
        vimg = [f.vertex_image[i] for i in vimg]
    for i, image in enumerate(vimg):
        if image == i:
            points.add(("v", i))
    for j, plist in enumerate(pieces):
        for q in plist:
            if q.target is None:
                val = q.value
                if val[0] == "e" and val[1] == j and q.lo <= val[2] <= q.hi:
                    points.add(val)
                continue
            if q.target != j:
                continue
            w = q.hi - q.lo
            if q.reverse:
                s = (w + q.lo) / (1 + w)
            elif w == 1:
                fixed_edges.add(j)
                continue
            else:
                s = q.lo / (1 - w)
            if q.lo <= s <= q.hi and 0 < s < 1:
                points.add(("e", j, s))
    for j in fixed_edges:
        points = {pt for pt in points if not (pt[0] == "e" and pt[1] == j)}
    cache[p] = FixedSet(points, fixed_edges)
    return cache[p]


def _divisors(n):
    return [k for k in range(1, n) if n % k == 0]


def least_period_points(f: MarkovTreeMap, p: int) -> set:
    """Isolated points of least period exactly p."""
    fs = fixed_set(f, p)
    lower = [fixed_set(f, q) for q in _divisors(p)]
    return {pt for pt in fs.points if not any(pt in other for other in lower)}


def least_period_edges(f: MarkovTreeMap, p: int) -> set:
    """Edges whose generic points have least period exactly p."""
    lower = set()
    for q in _divisors(p):
        lower |= fixed_set(f, q).edges
    return fixed_set(f, p).edges - lower


@dataclass
class PeriodSet:
    realized: tuple[int, ...]
    bound: int
    shark_classification: object  # int, TWO_INF, None or "not-a-down-set"
    counts: dict[int, int]

    @property
    def is_down_set(self) -> bool:
        return self.shark_classification != "not-a-down-set"


def classify_periods(realized, bound: int):
    if not realized:
        return None
    top = min(realized, key=_shark_rank)
    if set(realized) == sh_set(top, bound):
        return top
    return "not-a-down-set"


def exact_periods(f: MarkovTreeMap, bound: int) -> PeriodSet:
    """Least periods up to ``bound`` and their Sharkovskiy type."""
    if bound > MAX_PERIOD_BOUND:
        raise BoundExceeded(f"period bound {bound} exceeds {MAX_PERIOD_BOUND}")
    realized = []
    counts = {}
    for p in range(1, bound + 1):
        pts = least_period_points(f, p)
        edges = least_period_edges(f, p)
        counts[p] = len(pts) if not edges else -1  # -1: a continuum of such points
        if pts or edges:
            realized.append(p)
    return PeriodSet(tuple(realized), bound, classify_periods(realized, bound), counts)


def periodic_points(f: MarkovTreeMap, bound: int) -> FixedSet:
    """All points of period at most ``bound``."""
    pts, edges = set(), set()
    for p in range(1, bound + 1):
        fs = fixed_set(f, p)
        pts |= fs.points
        edges |= fs.edges
    return FixedSet(pts, edges)


# ---------------------------------------------------------------------------
# constructions


def stefan_permutation(k: int) -> list[int]:
    """Image index of each cycle point 0..k-1 for the Stefan cycle of odd period k."""
    if k < 3 or k % 2 == 0:
        raise ValueError("Stefan cycles have odd period at least 3")
    m = (k - 1) // 2
    order = [m]
    for i in range(1, m + 1):
        order += [m + i, m - i]
    perm = [0] * k
    for a, b in zip(order, order[1:] + order[:1]):
        perm[a] = b
    return perm


def stefan_map(k: int) -> MarkovTreeMap:
    xs = [Fraction(i, k - 1) for i in range(k)]
    perm = stefan_permutation(k)
    return interval_map(xs, [xs[perm[i]] for i in range(k)])


def tent(x: Fraction) -> Fraction:
    return 2 * x if x <= Fraction(1, 2) else 2 - 2 * x


def tent_map() -> MarkovTreeMap:
    half = Fraction(1, 2)
    return interval_map([0, half, 1], [0, 1, 0])


def truncated_tent(h) -> MarkovTreeMap:
    """min(h, tent(x)) for a height h with finite orbit, as a Markov map."""
    h = Fraction(h)
    if not 0 <= h <= 1:
        raise ValueError("height must lie in [0, 1]")

    def g(x):
        return min(h, tent(x))

    pts = {Fraction(0), Fraction(1), h / 2, 1 - h / 2}
    if h == 1:
        pts.add(Fraction(1, 2))
    todo = list(pts)
    while todo:
        y = g(todo.pop())
        if y not in pts:
            if len(pts) > 10_000:
                raise ValueError("height has an infinite orbit; not a Markov truncation")
            pts.add(y)
            todo.append(y)
    xs = sorted(pts)
    return interval_map(xs, [g(x) for x in xs])


def cycles_of(f: MarkovTreeMap, points) -> list[list]:
    out, seen = [], set()
    for pt in sorted(points, key=repr):
        if pt in seen:
            continue
        cyc = [pt]
        nxt = f(pt)
        while nxt != pt:
            cyc.append(nxt)
            nxt = f(nxt)
        seen.update(cyc)
        out.append(cyc)
    return out


def truncation_height(k: int) -> Fraction:
    """Smallest cutoff at which the truncated tent map gains a cycle of period 2^k.

    It is the least maximum over the period-2^k cycles of the full tent map;
    the full-tent fixed-point solver supplies the cycles.
    """
    T = tent_map()
    p = 2**k
    best = None
    for cyc in cycles_of(T, least_period_points(T, p)):
        top = max(T.coordinate(pt) for pt in cyc)
        if best is None or top < best:
            best = top
    return best


def truncated_tent_for(k: int) -> MarkovTreeMap:
    return truncated_tent(truncation_height(k))


def random_interval_map(rng: random.Random, n_vertices: int = 5, max_den: int = 12) -> MarkovTreeMap:
    """Random connect-the-dots Markov map on [0, 1] with rational vertices."""
    inner = set()
    while len(inner) < n_vertices - 2:
        den = rng.randint(2, max_den)
        inner.add(Fraction(rng.randint(1, den - 1), den))
    xs = [Fraction(0), *sorted(inner), Fraction(1)]
    ys = [rng.choice(xs) for _ in xs]
    return interval_map(xs, ys)


# ---------------------------------------------------------------------------
# arcs with outward-mapped ends


def separates_vertex(f: MarkovTreeMap, a: int, x: int, y: int) -> bool:
    """Vertex a lies strictly between vertices x and y."""
    if a in (x, y):
        return False
    path_vertices = {x}
    cur = x
    for j in f.vertex_path(x, y):
        u, v, _ = f.edges[j]
        cur = v if cur == u else u
        path_vertices.add(cur)
    return a in path_vertices


def outward_edges(f: MarkovTreeMap) -> list[int]:
    """Edges (a, b) with f(a) separated from b by a and f(b) from a by b."""
    out = []
    for j, (a, b, _) in enumerate(f.edges):
        fa, fb = f.vertex_image[a], f.vertex_image[b]
        if separates_vertex(f, a, fa, b) and separates_vertex(f, b, fb, a):
            out.append(j)
    return out


def fixed_points_on_edge(f: MarkovTreeMap, edge: int) -> list:
    fs = fixed_set(f, 1)
    if edge in fs.edges:
        return [("e", edge, Fraction(1, 2))]
    return sorted((pt for pt in fs.points if pt[0] == "e" and pt[1] == edge), key=lambda p: p[2])


# ---------------------------------------------------------------------------
# centre versus periodic closure


@dataclass
class CenterReport:
    bounds: tuple[int, ...]
    max_distance: dict[int, Fraction]
    eps: Fraction
    budget: int
    samples: int
    exact_cycles: int
    at_budget: int
    passed: bool
    rows: list = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [f"budget: {self.budget}", f"samples: {self.samples}",
               f"exact-cycles: {self.exact_cycles}", f"at-budget: {self.at_budget}",
               f"eps: {self.eps}"]
        for P in self.bounds:
            out.append(f"P={P} max-distance={self.max_distance[P]} (~{float(self.max_distance[P]):.3e})")
        out.append(f"passed: {str(self.passed).lower()}")
        return out


def omega_cluster(f: MarkovTreeMap, pt, budget: int):
    """Exact cycle reached by the orbit, or the tail half of the orbit at budget."""
    seen = {}
    orbit = []
    for n in range(budget + 1):
        if pt in seen:
            return orbit[seen[pt]:], True
        seen[pt] = n
        orbit.append(pt)
        pt = f(pt)
    return orbit[len(orbit) // 2:], False


def distance_to_set(f: MarkovTreeMap, fixed: FixedSet):
    """Function giving the tree distance from a point to a closed point/edge set."""
    per_edge: dict[int, list[Fraction]] = {}
    sources: dict[int, Fraction] = {}
    for pt in fixed.points:
        if pt[0] == "v":
            sources[pt[1]] = Fraction(0)
        else:
            per_edge.setdefault(pt[1], []).append(pt[2])
    for j in fixed.edges:
        u, v, _ = f.edges[j]
        sources[u] = sources[v] = Fraction(0)
    for j, lst in per_edge.items():
        lst.sort()
        u, v, length = f.edges[j]
        for vtx, off in ((u, lst[0] * length), (v, (1 - lst[-1]) * length)):
            if vtx not in sources or off < sources[vtx]:
                sources[vtx] = off
    dist = f.vertex_distances(sources) if sources else {}

    def measure(pt) -> Fraction:
        best = []
        if pt[0] == "v":
            if pt[1] in dist:
                best.append(dist[pt[1]])
        else:
            _, j, s = pt
            u, v, length = f.edges[j]
            if j in fixed.edges:
                return Fraction(0)
            lst = per_edge.get(j, [])
            k = bisect.bisect_left(lst, s)
            for idx in (k - 1, k):
                if 0 <= idx < len(lst):
                    best.append(abs(lst[idx] - s) * length)
            if u in dist:
                best.append(dist[u] + s * length)
            if v in dist:
                best.append(dist[v] + (1 - s) * length)
        if not best:
            raise ValueError("periodic set is empty")
        return min(best)

    return measure


def center_vs_periodic_closure(f: MarkovTreeMap, samples, eps, bounds=(4, 8, 12), budget: int = 2000) -> CenterReport:
    """Distance from sampled omega-limit clusters to the periodic points of period <= P."""
    bounds = tuple(sorted(bounds))
    clusters = []
    exact_count = 0
    for pt in samples:
        cluster, exact_cycle = omega_cluster(f, pt, budget)
        exact_count += exact_cycle
        clusters.append((pt, cluster, exact_cycle))
    max_distance = {}
    rows = []
    for P in bounds:
        measure = distance_to_set(f, periodic_points(f, P))
        worst = Fraction(0)
        for pt, cluster, exact_cycle in clusters:
            dmax = max(measure(q) for q in cluster)
            rows.append((P, pt, dmax, "exact" if exact_cycle else "at-budget"))
            worst = max(worst, dmax)
        max_distance[P] = worst
    eps = Fraction(eps)
    seq = [max_distance[P] for P in bounds]
    decreasing = all(b <= a for a, b in zip(seq, seq[1:]))
    passed = seq[-1] <= eps or decreasing
    return CenterReport(bounds, max_distance, eps, budget, len(clusters), exact_count,
                        len(clusters) - exact_count, passed, rows)


def rational_samples(f: MarkovTreeMap, n: int, seed: int = 0, max_den: int = 997) -> list:
    """Deterministic rational sample points spread over the edges of f."""
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        j = rng.randrange(len(f.edges))
        den = rng.randint(3, max_den)
        num = rng.randint(1, den - 1)
        out.append(f.point(j, Fraction(num, den)))
    return out


# ---------------------------------------------------------------------------
# text format

_LINE = re.compile(r"\s+")


def format_map(f: MarkovTreeMap) -> str:
    lines = ["# markov tree map"]
    for i, name in enumerate(f.vertices):
        coord = f" {f.coords[i]}" if f.coords is not None else ""
        lines.append(f"vertex {name}{coord}")
    for j, (u, v, length) in enumerate(f.edges):
        path = " ".join(f"e{t}{'-' if r else '+'}" for t, r in f.edge_path(j)) or "const"
        lines.append(f"edge e{j} {f.vertices[u]} {f.vertices[v]} {length} path {path}")
    for i, img in enumerate(f.vertex_image):
        lines.append(f"image {f.vertices[i]} {f.vertices[img]}")
    for j, plist in enumerate(f.pieces):
        for p in plist:
            slope = f.slope(j, p)
            if p.target is None:
                lines.append(f"piece e{j} {p.lo} {p.hi} -> @{_format_point(f, p.value)} slope 0")
            else:
                sign = "-" if p.reverse else "+"
                lines.append(f"piece e{j} {p.lo} {p.hi} -> e{p.target}{sign} slope {slope}")
    return "\n".join(lines) + "\n"


def _format_point(f, pt):
    if pt[0] == "v":
        return f.vertices[pt[1]]
    return f"e{pt[1]}:{pt[2]}"


def parse_map(text: str) -> MarkovTreeMap:
    names, coords, edges, images, pieces = [], [], [], {}, {}
    paths = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = _LINE.split(line)
        try:
            if tok[0] == "vertex":
                names.append(tok[1])
                coords.append(Fraction(tok[2]) if len(tok) > 2 else None)
            elif tok[0] == "edge":
                idx = int(tok[1].lstrip("e"))
                if idx != len(edges):
                    raise ValueError("edges must be listed in order e0, e1, ...")
                edges.append((names.index(tok[2]), names.index(tok[3]), Fraction(tok[4])))
                if len(tok) > 5 and tok[5] == "path":
                    paths[idx] = tok[6:]
            elif tok[0] == "image":
                images[names.index(tok[1])] = names.index(tok[2])
            elif tok[0] == "piece":
                j = int(tok[1].lstrip("e"))
                lo, hi = Fraction(tok[2]), Fraction(tok[3])
                if tok[4] != "->":
                    raise ValueError("expected '->'")
                dest = tok[5]
                if dest.startswith("@"):
                    piece = Piece(lo, hi, value=_parse_point(names, dest[1:]))
                else:
                    piece = Piece(lo, hi, target=int(dest[1:-1]), reverse=dest.endswith("-"))
                pieces.setdefault(j, []).append((piece, Fraction(tok[7]) if len(tok) > 7 else None))
            else:
                raise ValueError(f"unknown record {tok[0]!r}")
        except (ValueError, IndexError, ZeroDivisionError) as exc:
            raise ParseError(f"{exc}", line=lineno, column=1, token=raw.strip()) from None
    if any(c is None for c in coords):
        coords = None
    plists = tuple(tuple(p for p, _ in pieces.get(j, [])) for j in range(len(edges)))
    missing = [names[i] for i in range(len(names)) if i not in images]
    if missing:
        raise ParseError(f"no image line for vertex {missing[0]}")
    try:
        f = MarkovTreeMap(tuple(names), tuple(edges), tuple(images[i] for i in range(len(names))),
                          plists, tuple(coords) if coords else None)
    except (ValueError, IndexError) as exc:
        raise ParseError(f"invalid map: {exc}") from None
    for j, lst in pieces.items():
        for piece, slope in lst:
            if slope is not None and slope != f.slope(j, piece):
                raise ParseError(f"slope {slope} on edge e{j} disagrees with the piece geometry")
    for j, tokens in paths.items():
        listed = [] if tokens == ["const"] else [(int(t[1:-1]), t.endswith("-")) for t in tokens]
        if listed != f.edge_path(j):
            raise ParseError(f"edge path of e{j} disagrees with its pieces")
    return f


def _parse_point(names, text):
    if ":" in text:
        e, s = text.split(":")
        return ("e", int(e.lstrip("e")), Fraction(s))
    return ("v", names.index(text))
