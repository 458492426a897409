"""Exact arithmetic on the circle R/Z.

Angles come in three flavours:

* ``Fraction`` in [0, 1) -- the exact, canonical form;
* ``PeriodicDigits`` -- an eventually periodic base-d expansion, convertible
  to and from ``Fraction`` without loss;
* digit programs (``SturmianDigits``, ``SubstitutionDigits``) -- deterministic
  streams known only digit by digit.

Comparisons involving streams are decided on a finite digit prefix; when the
prefix is not enough, ``UndecidedAtPrecision`` is raised instead of guessing.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor

from .errors import ParseError, UndecidedAtPrecision

DEFAULT_PRECISION = 64
_DIGIT_CHARS = "0123456789abcdefghijklmnopqrstuvwxyz"


def frac_mod1(x) -> Fraction:
    x = Fraction(x)
    return x - floor(x)


# ---------------------------------------------------------------------------
# digit streams


@dataclass(frozen=True)
class PeriodicDigits:
    """Eventually periodic expansion 0.pre(per)(per)... in the given base."""

    base: int
    pre: tuple[int, ...]
    per: tuple[int, ...]

    def __post_init__(self):
        if self.base < 2 or self.base > len(_DIGIT_CHARS):
            raise ValueError(f"unsupported base {self.base}")
        if not self.per:
            raise ValueError("period part must be nonempty")
        for digit in self.pre + self.per:
            if not 0 <= digit < self.base:
                raise ValueError(f"digit {digit} out of range for base {self.base}")

    def digit(self, n: int) -> int:
        if n < len(self.pre):
            return self.pre[n]
        return self.per[(n - len(self.pre)) % len(self.per)]

    def to_fraction(self) -> Fraction:
        b = self.base
        head = 0
        for digit in self.pre:
            head = head * b + digit
        cycle = 0
        for digit in self.per:
            cycle = cycle * b + digit
        k, p = len(self.pre), len(self.per)
        value = Fraction(head, b**k) + Fraction(cycle, b**k * (b**p - 1))
        return frac_mod1(value)

    @classmethod
    def from_fraction(cls, x, base: int) -> PeriodicDigits:
        """Canonical expansion: shortest preperiod, then shortest period."""
        x = frac_mod1(x)
        num, den = x.numerator, x.denominator
        digits = []
        seen = {}
        while num not in seen:
            seen[num] = len(digits)
            num *= base
            digits.append(num // den)
            num %= den
        start = seen[num]
        return cls(base, tuple(digits[:start]), tuple(digits[start:]))

    def shift(self) -> PeriodicDigits:
        if self.pre:
            return PeriodicDigits(self.base, self.pre[1:], self.per)
        return PeriodicDigits(self.base, (), self.per[1:] + self.per[:1])


class DigitProgram:
    """A deterministic digit generator; subclasses implement ``_raw_digit``."""

    base: int
    offset: int

    def digit(self, n: int) -> int:
        return self._raw_digit(n + self.offset)

    def prefix(self, n: int) -> int:
        value = 0
        for i in range(n):
            value = value * self.base + self.digit(i)
        return value

    def shift(self, k: int = 1):
        raise NotImplementedError


@dataclass(frozen=True)
class SturmianDigits(DigitProgram):
    """Mechanical word  s_n = floor((n+1)alpha + rho) - floor(n alpha + rho).

    With a rational slope p/q the word is periodic with period q, so pick q
    larger than any iterate budget the stream is used with.
    """

    alpha: Fraction
    rho: Fraction
    base: int = 2
    flip: bool = False
    offset: int = 0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("sturmian slope must lie in (0, 1)")
        if self.base < 2:
            raise ValueError("base must be at least 2")

    def _raw_digit(self, n: int) -> int:
        a, r = self.alpha, self.rho
        digit = floor((n + 1) * a + r) - floor(n * a + r)
        return 1 - digit if self.flip else digit

    def shift(self, k: int = 1) -> SturmianDigits:
        return SturmianDigits(self.alpha, self.rho, self.base, self.flip, self.offset + k)


@dataclass(frozen=True)
class SubstitutionDigits(DigitProgram):
    """Fixed point of a substitution, started from its first rule's letter."""

    rules: tuple[tuple[int, tuple[int, ...]], ...]
    base: int = 2
    offset: int = 0
    _cache: list = field(default_factory=list, compare=False, hash=False, repr=False)

    def __post_init__(self):
        table = dict(self.rules)
        start = self.rules[0][0]
        image = table.get(start, ())
        if len(image) < 2 or image[0] != start:
            raise ValueError("substitution must extend its start letter (a -> a...)")
        for letter, word in self.rules:
            for digit in (letter, *word):
                if not 0 <= digit < self.base:
                    raise ValueError(f"letter {digit} out of range for base {self.base}")
            if not word:
                raise ValueError("substitution images must be nonempty")

    def _raw_digit(self, n: int) -> int:
        cache = self._cache
        if len(cache) <= n:
            table = dict(self.rules)
            word = cache[:] or [self.rules[0][0]]
            while len(word) <= n:
                word = [c for letter in word for c in table.get(letter, (letter,))]
            cache[:] = word
        return cache[n]

    def shift(self, k: int = 1) -> SubstitutionDigits:
        shifted = SubstitutionDigits(self.rules, self.base, self.offset + k)
        shifted._cache[:] = self._cache
        return shifted


STREAM_TYPES = (PeriodicDigits, SturmianDigits, SubstitutionDigits)


def is_exact(a) -> bool:
    return isinstance(a, (Fraction, int, PeriodicDigits))


def exact(a) -> Fraction:
    """Exact value of an eventually periodic angle."""
    if isinstance(a, PeriodicDigits):
        return a.to_fraction()
    if isinstance(a, (Fraction, int)):
        return frac_mod1(a)
    raise TypeError(f"{a!r} has no exact rational value")


# ---------------------------------------------------------------------------
# the map sigma_d


def sigma(d: int, a):
    """Multiply by d modulo 1; on digit streams this is the left shift."""
    if d < 2:
        raise ValueError("degree must be at least 2")
    if isinstance(a, (Fraction, int)):
        return frac_mod1(d * Fraction(a))
    if isinstance(a, PeriodicDigits):
        if a.base != d:
            return sigma(d, a.to_fraction())
        return a.shift()
    if isinstance(a, DigitProgram):
        if a.base != d:
            raise ValueError(f"stream in base {a.base} cannot be shifted by sigma_{d}")
        return a.shift()
    raise TypeError(f"not an angle: {a!r}")


def sigma_iter(d: int, a, n: int):
    for _ in range(n):
        a = sigma(d, a)
    return a


def preimages(d: int, x) -> list[Fraction]:
    """The d solutions of sigma_d(y) = x, ascending."""
    x = exact(x)
    return [(x + k) / d for k in range(d)]


# ---------------------------------------------------------------------------
# comparisons


def _bounds(a, precision: int) -> tuple[Fraction, Fraction, bool]:
    """Closed interval containing ``a`` and whether it is exact."""
    if is_exact(a):
        x = exact(a)
        return x, x, True
    b = a.base
    scale = b**precision
    p = a.prefix(precision)
    return Fraction(p, scale), Fraction(p + 1, scale), False


def compare(a, b, precision: int = DEFAULT_PRECISION) -> int:
    """Linear comparison of two angles as numbers in [0, 1).

    Streams are compared on their first ``precision`` digits; an expansion
    ending in an infinite run of top digits is not distinguished from the
    next cylinder, which is the usual lexicographic convention.
    """
    if a is b:
        return 0
    alo, ahi, aex = _bounds(a, precision)
    blo, bhi, bex = _bounds(b, precision)
    if aex and bex:
        return (alo > blo) - (alo < blo)
    if ahi < blo or (ahi == blo and not aex):
        return -1
    if bhi < alo or (bhi == alo and not bex):
        return 1
    if ahi == blo and aex:
        # exact point on the lower edge of b's cylinder
        return -1 if not bex else 0
    if bhi == alo and bex:
        return 1
    if not aex and not bex and type(a) is type(b) and a == b:
        return 0
    raise UndecidedAtPrecision(
        f"angles {format_angle(a)} and {format_angle(b)} agree to {precision} digits",
        precision=precision,
    )


def angles_equal(a, b, precision: int = DEFAULT_PRECISION) -> bool:
    return compare(a, b, precision) == 0


def circular_order(a, b, c, precision: int = DEFAULT_PRECISION) -> bool:
    """True iff a, b, c are distinct and occur counterclockwise in this order."""
    ab = compare(a, b, precision)
    bc = compare(b, c, precision)
    ca = compare(c, a, precision)
    if ab == 0 or bc == 0 or ca == 0:
        return False
    # exactly one of the three cyclic steps wraps past 0
    return (ab < 0) + (bc < 0) + (ca < 0) == 2


@dataclass(frozen=True)
class OrientedArc:
    """Open arc traversed counterclockwise from ``start`` to ``end``.

    ``start == end`` denotes the whole circle minus that point.
    """

    start: object
    end: object

    def length(self) -> Fraction:
        if self.start == self.end:
            return Fraction(1)
        return frac_mod1(exact(self.end) - exact(self.start))


def in_open_arc(x, arc: OrientedArc, precision: int = DEFAULT_PRECISION) -> bool:
    if compare(arc.start, arc.end, precision) == 0:
        return compare(x, arc.start, precision) != 0
    return circular_order(arc.start, x, arc.end, precision)


@dataclass(frozen=True)
class Chord:
    """Unordered pair of angles, stored with the smaller representative first."""

    a: object
    b: object

    def __post_init__(self):
        if compare(self.a, self.b) > 0:
            first, second = self.b, self.a
            object.__setattr__(self, "a", first)
            object.__setattr__(self, "b", second)

    @property
    def degenerate(self) -> bool:
        return compare(self.a, self.b) == 0


def chords_linked(p: Chord, q: Chord, precision: int = DEFAULT_PRECISION) -> bool:
    """True iff the open chords cross; chords sharing an endpoint never do."""
    ends = (p.a, p.b, q.a, q.b)
    for i in range(4):
        for j in range(i + 1, 4):
            if compare(ends[i], ends[j], precision) == 0:
                return False
    arc = OrientedArc(p.a, p.b)
    return in_open_arc(q.a, arc, precision) != in_open_arc(q.b, arc, precision)


def circle_distance(a, b) -> Fraction:
    """Exact arc-length distance on R/Z, in [0, 1/2]."""
    delta = frac_mod1(exact(a) - exact(b))
    return min(delta, 1 - delta)


def multiplicative_order(d: int, q: int) -> int:
    if q == 1:
        return 1
    k, r = 1, d % q
    while r != 1:
        r = r * d % q
        k += 1
        if k > q:
            raise ValueError(f"{d} is not invertible modulo {q}")
    return k


def to_float(a, precision: int = 53) -> float:
    """Approximate value for rendering only."""
    if is_exact(a):
        return float(exact(a))
    return a.prefix(precision) / a.base**precision


# ---------------------------------------------------------------------------
# text syntax

_RATIONAL = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+)\s*)?$")
_PERIODIC = re.compile(
    r"^\s*base\s*=\s*(\d+)\s*;\s*pre\s*=\s*([0-9a-z]*)\s*;\s*per\s*=\s*([0-9a-z]+)\s*$"
)
_CALL = re.compile(r"^\s*([a-z_]+)\s*\((.*)\)\s*$", re.S)


def _parse_digits(text: str, base: int, token: str) -> tuple[int, ...]:
    digits = []
    for ch in text:
        value = _DIGIT_CHARS.find(ch)
        if value < 0 or value >= base:
            raise ParseError(f"bad digit {ch!r} in angle {token!r}", token=token)
        digits.append(value)
    return tuple(digits)


def _parse_fraction(text: str, token: str) -> Fraction:
    m = _RATIONAL.match(text)
    if not m:
        raise ParseError(f"malformed rational {text!r} in angle {token!r}", token=token)
    num, den = int(m.group(1)), int(m.group(2) or 1)
    if den == 0:
        raise ParseError(f"zero denominator in angle {token!r}", token=token)
    return Fraction(num, den)


def parse_angle(token: str):
    """Parse ``p/q``, ``base=d;pre=..;per=..``, ``sturmian(..)`` or ``substitution(..)``."""
    if not isinstance(token, str):
        raise ParseError(f"angle must be a string, got {token!r}", token=str(token))
    m = _RATIONAL.match(token)
    if m:
        return frac_mod1(_parse_fraction(token, token))
    m = _PERIODIC.match(token)
    if m:
        base = int(m.group(1))
        if not 2 <= base <= len(_DIGIT_CHARS):
            raise ParseError(f"unsupported base in angle {token!r}", token=token)
        return PeriodicDigits(
            base, _parse_digits(m.group(2), base, token), _parse_digits(m.group(3), base, token)
        )
    m = _CALL.match(token)
    if m:
        name, body = m.group(1), m.group(2)
        pairs = []
        for item in filter(None, (s.strip() for s in body.split(","))):
            if "=" not in item:
                raise ParseError(f"expected key=value in angle {token!r}, got {item!r}", token=token)
            key, value = (s.strip() for s in item.split("=", 1))
            pairs.append((key, value))
        try:
            if name == "sturmian":
                return _sturmian_from_pairs(pairs, token)
            if name == "substitution":
                return _substitution_from_pairs(pairs, token)
        except ValueError as exc:
            raise ParseError(f"{exc} in angle {token!r}", token=token) from None
    raise ParseError(f"unrecognised angle {token!r}", token=token)


def _sturmian_from_pairs(pairs, token):
    opts = dict(pairs)
    unknown = set(opts) - {"alpha", "rho", "base", "flip", "shift"}
    if unknown or "alpha" not in opts or "rho" not in opts:
        raise ParseError(f"sturmian needs alpha and rho (got {sorted(opts)}) in {token!r}", token=token)
    return SturmianDigits(
        alpha=_parse_fraction(opts["alpha"], token),
        rho=_parse_fraction(opts["rho"], token),
        base=int(opts.get("base", 2)),
        flip=opts.get("flip", "0") == "1",
        offset=int(opts.get("shift", 0)),
    )


def _substitution_from_pairs(pairs, token):
    base, offset, rules = 2, 0, []
    for key, value in pairs:
        if key == "base":
            base = int(value)
        elif key == "shift":
            offset = int(value)
        else:
            rules.append((key, value))
    if not rules:
        raise ParseError(f"substitution without rules in {token!r}", token=token)
    parsed = tuple(
        (_parse_digits(k, base, token)[0], _parse_digits(v, base, token)) for k, v in rules
    )
    return SubstitutionDigits(parsed, base, offset)


def format_angle(a) -> str:
    if isinstance(a, (Fraction, int)):
        x = frac_mod1(a)
        return f"{x.numerator}/{x.denominator}"
    if isinstance(a, PeriodicDigits):
        pre = "".join(_DIGIT_CHARS[d] for d in a.pre)
        per = "".join(_DIGIT_CHARS[d] for d in a.per)
        return f"base={a.base};pre={pre};per={per}"
    if isinstance(a, SturmianDigits):
        parts = [f"alpha={format_angle_value(a.alpha)}", f"rho={format_angle_value(a.rho)}"]
        if a.base != 2:
            parts.append(f"base={a.base}")
        if a.flip:
            parts.append("flip=1")
        if a.offset:
            parts.append(f"shift={a.offset}")
        return f"sturmian({','.join(parts)})"
    if isinstance(a, SubstitutionDigits):
        parts = [
            f"{_DIGIT_CHARS[k]}={''.join(_DIGIT_CHARS[c] for c in v)}" for k, v in a.rules
        ]
        if a.base != 2:
            parts.append(f"base={a.base}")
        if a.offset:
            parts.append(f"shift={a.offset}")
        return f"substitution({','.join(parts)})"
    raise TypeError(f"not an angle: {a!r}")


def format_angle_value(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"
