"""Exact laminations, dendrite quotients and Markov tree maps."""
from .circle import Chord, OrientedArc, PeriodicDigits, SturmianDigits, parse_angle, sigma
from .dendrite import build_dendrite, point_kind, separates
from .lamination import Class, Lamination, check_axioms, pullback_closure
from .treemaps import exact_periods, sharkovskiy_less, stefan_map

__all__ = [
    "Chord",
    "Class",
    "Lamination",
    "OrientedArc",
    "PeriodicDigits",
    "SturmianDigits",
    "build_dendrite",
    "check_axioms",
    "exact_periods",
    "parse_angle",
    "point_kind",
    "pullback_closure",
    "separates",
    "sharkovskiy_less",
    "sigma",
    "stefan_map",
]
