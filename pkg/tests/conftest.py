from __future__ import annotations

import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lamdyn.dendrite import build_dendrite  # noqa: E402
from lamdyn.dynamics import chebyshev_lamination  # noqa: E402
from lamdyn.lamination import Class, pullback_closure  # noqa: E402

LEAF = Class.of(Fraction(1, 12), Fraction(7, 12))
TRIANGLE = Class.of(Fraction(1, 7), Fraction(2, 7), Fraction(4, 7))
QUARTER_LEAF = Class.of(Fraction(1, 8), Fraction(5, 8))
DATA = Path(__file__).parent.parent / "data"

_cache = {}


def zi(depth):
    key = ("zi", depth)
    if key not in _cache:
        _cache[key] = pullback_closure(2, [LEAF, TRIANGLE], depth)
    return _cache[key]


def quarter(depth):
    key = ("quarter", depth)
    if key not in _cache:
        _cache[key] = pullback_closure(2, [QUARTER_LEAF, TRIANGLE], depth)
    return _cache[key]


def cheb(depth):
    key = ("cheb", depth)
    if key not in _cache:
        _cache[key] = chebyshev_lamination(depth)
    return _cache[key]


def dendrite(lam):
    key = ("D", id(lam))
    if key not in _cache:
        _cache[key] = build_dendrite(lam)
    return _cache[key]


@pytest.fixture
def data_dir():
    return DATA
