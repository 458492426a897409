"""Lamination spec files.

A spec is a JSON object with keys ``degree``, ``generators`` (a list of
classes, each a list of angle strings) and ``depth``.  A written lamination
adds ``classes``: every stored class with its depth tag, preperiod and
period.  Key order does not matter on input; output is sorted so equal
laminations produce identical files.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .circle import DigitProgram, format_angle, parse_angle
from .errors import ParseError
from .lamination import Class, Lamination, orbit_portrait


@dataclass(frozen=True)
class LaminationSpec:
    degree: int
    generators: tuple
    depth: int
    classes: tuple = ()  # (Class, depth tag) pairs when the file lists a built lamination


def _locate(text: str, token: str) -> tuple[int | None, int | None]:
    pos = text.find(json.dumps(token))
    if pos < 0:
        return None, None
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def _parse_class(text: str, raw, where: str):
    if not isinstance(raw, list) or not raw:
        raise ParseError(f"{where} must be a nonempty list of angle strings", token=str(raw))
    angles = []
    for tok in raw:
        if not isinstance(tok, str):
            tok = str(tok)
        try:
            angles.append(parse_angle(tok))
        except ParseError as exc:
            line, col = _locate(text, tok)
            raise ParseError(exc.args[0], line=line, column=col, token=tok) from None
    if any(isinstance(a, DigitProgram) for a in angles):
        return tuple(angles)
    return Class(tuple(angles))


def parse_lamination_spec(text: str) -> LaminationSpec:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno,
                         token=text[exc.pos:exc.pos + 12]) from None
    if not isinstance(data, dict):
        raise ParseError("a lamination spec is a JSON object", line=1, column=1)
    missing = [k for k in ("degree", "generators") if k not in data]
    if missing:
        raise ParseError(f"missing key(s): {', '.join(missing)}", line=1, column=1)
    degree = data["degree"]
    depth = data.get("depth", 0)
    if not isinstance(degree, int) or degree < 2:
        raise ParseError("degree must be an integer >= 2", token=str(degree))
    if not isinstance(depth, int) or depth < 0:
        raise ParseError("depth must be a nonnegative integer", token=str(depth))
    gens = tuple(_parse_class(text, g, "generator") for g in data["generators"])
    classes = tuple(
        (_parse_class(text, item["angles"], "class"), int(item.get("depth", 0)))
        for item in data.get("classes", ())
    )
    return LaminationSpec(degree, gens, depth, classes)


def read_lamination_spec(path) -> LaminationSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_lamination_spec(fh.read())


def stored_lamination(spec: LaminationSpec) -> Lamination:
    """The lamination listed in a written file, with its depth tags."""
    classes = tuple(sorted({c for c, _ in spec.classes}, key=lambda c: (dict(spec.classes)[c], c)))
    tags = dict(spec.classes)
    return Lamination(spec.degree, classes, spec.depth, spec.generators, tags)


def format_lamination(L: Lamination) -> str:
    rows = []
    for c in L.classes:
        pre, per, _ = orbit_portrait(c, L.degree)
        rows.append({"angles": [format_angle(a) for a in c.angles], "depth": L.depth_of(c),
                     "preperiod": pre, "period": per})
    data = {
        "degree": L.degree,
        "depth": L.depth,
        "generators": [[format_angle(a) for a in g.angles] for g in L.generators],
        "classes": rows,
    }
    return json.dumps(data, indent=1, sort_keys=True) + "\n"


def format_spec(degree: int, generators, depth: int) -> str:
    data = {"degree": degree, "depth": depth,
            "generators": [[format_angle(a) for a in g] for g in generators]}
    return json.dumps(data, indent=1, sort_keys=True) + "\n"
