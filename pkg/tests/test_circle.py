from __future__ import annotations

from fractions import Fraction

import pytest

from lamdyn.circle import (
    Chord,
    OrientedArc,
    PeriodicDigits,
    SturmianDigits,
    SubstitutionDigits,
    chords_linked,
    circle_distance,
    circular_order,
    compare,
    format_angle,
    in_open_arc,
    multiplicative_order,
    parse_angle,
    preimages,
    sigma,
    sigma_iter,
)
from lamdyn.errors import ParseError, UndecidedAtPrecision

F = Fraction


def test_sigma_examples():
    assert sigma(2, F(0)) == 0
    assert sigma(2, F(1, 3)) == F(2, 3)
    assert sigma(3, F(1, 4)) == F(3, 4)
    third = PeriodicDigits(2, (), (0, 1))
    image = sigma(2, third)
    assert image.per == (1, 0)
    assert image.to_fraction() == F(2, 3)


def test_sigma_rejects_degree_one():
    with pytest.raises(ValueError):
        sigma(1, F(1, 3))


def test_periodic_digits_round_trip():
    for x in (F(0), F(1, 3), F(1, 12), F(5, 7), F(3, 8)):
        p = PeriodicDigits.from_fraction(x, 2)
        assert p.to_fraction() == x
    assert PeriodicDigits(3, (), (1,)).to_fraction() == F(1, 2)
    assert PeriodicDigits(3, (1,), (2,)).to_fraction() == F(2, 3)


def test_circular_order_examples():
    assert circular_order(F(0), F(1, 3), F(2, 3))
    assert not circular_order(F(0), F(2, 3), F(1, 3))
    assert circular_order(F(1, 7), F(2, 7), F(4, 7))


def test_in_open_arc_examples():
    arc = OrientedArc(F(1, 3), F(2, 3))
    assert in_open_arc(F(1, 2), arc)
    assert not in_open_arc(F(0), arc)
    assert not in_open_arc(F(1, 3), arc)
    full = OrientedArc(F(0), F(0))
    assert in_open_arc(F(1, 2), full) and not in_open_arc(F(0), full)


def test_chords_linked_examples():
    assert chords_linked(Chord(F(0), F(1, 2)), Chord(F(1, 4), F(3, 4)))
    assert not chords_linked(Chord(F(0), F(1, 4)), Chord(F(1, 2), F(3, 4)))
    assert not chords_linked(Chord(F(0), F(1, 2)), Chord(F(0), F(1, 4)))


def test_chord_is_canonical():
    assert Chord(F(3, 4), F(1, 4)) == Chord(F(1, 4), F(3, 4))


def test_preimages_and_distance():
    assert preimages(2, F(1, 3)) == [F(1, 6), F(2, 3)]
    assert all(sigma(3, y) == F(1, 5) for y in preimages(3, F(1, 5)))
    assert circle_distance(F(1, 10), F(9, 10)) == F(1, 5)


def test_eventual_period_is_multiplicative_order():
    for q in (3, 5, 7, 9, 11, 13, 21, 25):
        x = F(1, q)
        seen = {}
        n = 0
        while x not in seen:
            seen[x] = n
            x = sigma(2, x)
            n += 1
        assert n - seen[x] == multiplicative_order(2, q)


def test_sturmian_digits_are_balanced():
    s = SturmianDigits(F(2, 5), F(0))
    word = [s.digit(i) for i in range(20)]
    assert word[:5] == word[5:10]
    assert sum(word[:5]) == 2
    assert sigma(2, s).digit(0) == s.digit(1)


def test_substitution_digits_fibonacci_word():
    t = SubstitutionDigits(((0, (0, 1)), (1, (0,))))
    assert [t.digit(i) for i in range(8)] == [0, 1, 0, 0, 1, 0, 1, 0]


def test_compare_streams_needs_precision():
    s = SturmianDigits(F(10946, 17711), F(0))
    t = SturmianDigits(F(10946, 17711), F(0))
    with pytest.raises(UndecidedAtPrecision):
        compare(s, sigma_iter(2, t, 17711), precision=40)
    assert compare(s, s.shift(1), precision=40) != 0


def test_parse_and_format_round_trip():
    for token in ("1/3", "0/1", "5/12", "sturmian(alpha=2/5,rho=1/7)",
                  "sturmian(alpha=2/5,rho=0/1,flip=1)", "substitution(0=01,1=0)"):
        assert format_angle(parse_angle(token)) == token
    p = parse_angle("base=2;pre=1;per=01")
    assert p.to_fraction() == F(2, 3)
    assert format_angle(parse_angle("7/6")) == "1/6"


@pytest.mark.parametrize("token", ["1/0", "abc", "sturmian(alpha=2/5)", "base=2;pre=;per=2"])
def test_parse_rejects_malformed(token):
    with pytest.raises(ParseError) as info:
        parse_angle(token)
    assert token in str(info.value)
