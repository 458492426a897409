"""Command line entry point.

Exit status is 0 on success, 1 when an exact invariant fails (or a pullback
is ambiguous) and 2 for unreadable input.  Heuristic stream verdicts never
change the exit status.
"""
from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from .circle import DigitProgram, format_angle, parse_angle
from .dendrite import build_dendrite, export_tree
from .dynamics import (
    StreamClass,
    absorption_check,
    classify_limit_point,
    core_is_stable,
    dynamical_core,
    omega_limit,
    periodic_cutpoints,
    persistent_seeds,
    verify_recurrence_theorems,
)
from .errors import InsufficientWitnesses, LamdynError, ParseError
from .io import format_lamination, read_lamination_spec, stored_lamination
from .lamination import (
    Class,
    Lamination,
    check_axioms,
    forward_closure,
    orbit_portrait,
    pullback_closure,
)
from .render import disk_svg, tree_svg
from .treemaps import (
    center_vs_periodic_closure,
    exact_periods,
    format_map,
    parse_map,
    rational_samples,
    sh_set,
    stefan_map,
    tent_map,
    truncated_tent_for,
)


def split_class(text: str) -> list[str]:
    """Split "{a,b,...}" at top-level commas; stream tokens keep their own commas."""
    text = text.strip()
    if text.startswith("{") and text.endswith("}"):
        text = text[1:-1]
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if cur:
        parts.append("".join(cur).strip())
    return [p for p in parts if p]


def parse_class(text: str):
    angles = [parse_angle(tok) for tok in split_class(text)]
    if not angles:
        raise ParseError(f"empty class {text!r}", token=text)
    if any(isinstance(a, DigitProgram) for a in angles):
        return StreamClass(tuple(angles))
    return Class(tuple(angles))


def header(args) -> list[str]:
    keys = ("command", "theorem", "spec", "depth", "budget", "precision", "max_period", "seed", "out")
    out = ["# run-config"]
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            out.append(f"# {k}: {v if not isinstance(v, list) else ' | '.join(v)}")
    return out


def emit(args, lines: list[str], name: str = "report.txt"):
    text = "\n".join(header(args) + lines) + "\n"
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, name), "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)


def load_lamination(args) -> Lamination:
    spec = read_lamination_spec(args.spec)
    if spec.classes:
        return stored_lamination(spec)
    depth = spec.depth if args.depth is None else args.depth
    return pullback_closure(spec.degree, spec.generators, depth)


def cmd_validate(args) -> int:
    spec = read_lamination_spec(args.spec)
    if spec.classes:
        report = check_axioms(stored_lamination(spec))
        emit(args, report.lines())
        return 0 if report.passed else 1
    base = Lamination.from_classes(spec.degree, forward_closure(spec.degree, spec.generators))
    report = check_axioms(base)
    if report.passed:
        depth = spec.depth if args.depth is None else args.depth
        report = check_axioms(pullback_closure(spec.degree, spec.generators, depth))
    emit(args, report.lines())
    return 0 if report.passed else 1


def cmd_build(args) -> int:
    L = load_lamination(args)
    D = build_dendrite(L)
    lines = [f"classes: {len(L)}", f"edges: {len(D.edges)}", f"depth: {L.depth}"]
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        files = {"lamination.json": format_lamination(L), "tree.txt": export_tree(D),
                 "disk.svg": disk_svg(L), "tree.svg": tree_svg(D)}
        for name, text in files.items():
            with open(os.path.join(args.out, name), "w", encoding="utf-8") as fh:
                fh.write(text)
        lines += [f"wrote: {name}" for name in sorted(files)]
    emit(args, lines, "build.txt")
    return 0


def cmd_render(args) -> int:
    L = load_lamination(args)
    D = build_dendrite(L)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    for name, text in (("disk.svg", disk_svg(L)), ("tree.svg", tree_svg(D))):
        with open(os.path.join(out, name), "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(f"wrote {os.path.join(out, 'disk.svg')} and {os.path.join(out, 'tree.svg')}\n")
    return 0


def cmd_orbit(args) -> int:
    spec = read_lamination_spec(args.spec)
    c = parse_class(args.cls)
    if isinstance(c, StreamClass):
        lines = [f"class: {c}", "FORWARD-ORBIT-DIVERGES: stream class; use classify for limit points"]
        emit(args, lines)
        return 0
    pre, per, orbit = orbit_portrait(c, spec.degree)
    lines = [f"class: {c}", f"preperiod: {pre}", f"period: {per}"]
    lines += [f"{n}: {x}" for n, x in enumerate(orbit)]
    emit(args, lines)
    return 0


def cmd_classify(args) -> int:
    L = load_lamination(args)
    seed = parse_class(args.cls)
    lines = [f"seed: {seed}", "# target; label; type; witnesses; side-edge"]
    for rec in omega_limit(L, seed, args.budget, args.precision):
        try:
            classify_limit_point(L, seed, rec)
        except InsufficientWitnesses as exc:
            lines.append(f"{rec.target}; {rec.label}; {exc}")
            continue
        edge = f"{{{format_angle(rec.side_edge.a)},{format_angle(rec.side_edge.b)}}}" if rec.side_edge else "-"
        lines.append(f"{rec.target}; {rec.label}; {rec.type}; {len(rec.witnesses)}; {edge}")
    emit(args, lines)
    return 0


def cmd_periodic(args) -> int:
    L = load_lamination(args)
    p = args.max_period or 1
    pc = periodic_cutpoints(L, p) if p > 0 else None
    lines = [f"max-period: {p}"]
    if pc is not None:
        lines += [f"stored {c}" for c in pc.stored]
        lines.append(f"candidates-beyond-depth: {len(pc.candidates_beyond_depth)}")
    emit(args, lines)
    return 0


def _load_map(args):
    if args.map_file:
        with open(args.map_file, encoding="utf-8") as fh:
            return parse_map(fh.read())
    if args.stefan:
        return stefan_map(args.stefan)
    if args.truncated is not None:
        return truncated_tent_for(args.truncated)
    return tent_map()


def cmd_map(args) -> int:
    f = _load_map(args)
    text = format_map(f)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "map.txt"), "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0


def _seeds(args, L):
    if args.seed:
        return [parse_class(s) for s in args.seed]
    return persistent_seeds(L)


def cmd_verify(args) -> int:
    tag = args.theorem
    if tag in ("limdend", "recdend"):
        L = load_lamination(args)
        seeds = _seeds(args, L)
        if tag == "recdend":
            seeds = [s for s in seeds if isinstance(s, StreamClass) or orbit_portrait(s, L.degree)[0] == 0]
        p_list = (4, 8, 12) if args.max_period is None else tuple(range(4, args.max_period + 1, 4)) or (args.max_period,)
        rep = verify_recurrence_theorems(L, seeds, p_list, args.budget, args.precision, tag)
        emit(args, rep.lines())
        return 1 if rep.exact_failures else 0
    if tag == "core":
        L = load_lamination(args)
        D = build_dendrite(L)
        core = dynamical_core(L, D)
        stable = core_is_stable(L, core, D)
        rows = absorption_check(L, core, args.budget if args.budget_given else None)
        lines = [f"status: {core.status}", f"core-size: {len(core.vertices)}",
                 f"critical: {' '.join(str(c) for c in core.critical)}",
                 f"stable: {str(stable).lower()}", "# class; steps; status"]
        lines += [f"{r.cls}; {r.steps if r.steps is not None else '-'}; {r.status}" for r in rows]
        fails = [r for r in rows if r.status == "FAIL"]
        lines.append(f"failures: {len(fails)}")
        emit(args, lines)
        return 1 if fails or not stable else 0
    f = _load_map(args)
    P = args.max_period or 12
    if tag == "sharkovskiy":
        ps = exact_periods(f, P)
        lines = [f"bound: {P}", f"realized: {' '.join(map(str, ps.realized))}",
                 f"classification: {ps.shark_classification}"]
        if ps.is_down_set and ps.shark_classification is not None:
            lines.append(f"sh-set: {' '.join(map(str, sorted(sh_set(ps.shark_classification, P))))}")
        emit(args, lines)
        return 0 if ps.is_down_set else 1
    bounds = tuple(b for b in (4, 8, 12, 16) if b <= P) or (P,)
    samples = rational_samples(f, 100, seed=int(args.seed[0]) if args.seed else 0)
    rep = center_vs_periodic_closure(f, samples, Fraction(1, 256), bounds, args.budget)
    emit(args, rep.lines())
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--depth", type=int)
    common.add_argument("--budget", type=int)
    common.add_argument("--precision", type=int, default=20)
    common.add_argument("--max-period", type=int, dest="max_period")
    common.add_argument("--seed", action="append")
    common.add_argument("--out")

    parser = argparse.ArgumentParser(prog="lamdyn", description="Laminations, dendrites and Markov maps.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "validate": "check the invariance axioms",
        "build": "pull back and write lamination, tree and pictures",
        "render": "write disk.svg and tree.svg",
        "periodic-cutpoints": "list periodic cutpoints up to --max-period",
        "orbit": "preperiod, period and orbit of a class",
        "classify": "limit points of a seed and their type",
    }
    for name in ("validate", "build", "render", "periodic-cutpoints"):
        p = sub.add_parser(name, parents=[common], help=helps[name])
        p.add_argument("spec")
    for name in ("orbit", "classify"):
        p = sub.add_parser(name, parents=[common], help=helps[name])
        p.add_argument("spec")
        p.add_argument("cls", metavar="CLASS", help='e.g. "{1/12,7/12}"')
    m = sub.add_parser("map", parents=[common], help="print a Markov map in text form")
    v = sub.add_parser("verify", parents=[common], help="run one of the verification checks")
    v.add_argument("theorem", choices=("limdend", "recdend", "core", "sharkovskiy", "center"))
    v.add_argument("spec", nargs="?", help="lamination spec, or Markov map file for sharkovskiy/center")
    for p in (m, v):
        p.add_argument("--stefan", type=int)
        p.add_argument("--truncated", type=int, metavar="K")
        p.add_argument("--map", dest="map_file")
    return parser


COMMANDS = {"validate": cmd_validate, "build": cmd_build, "render": cmd_render,
            "orbit": cmd_orbit, "classify": cmd_classify, "periodic-cutpoints": cmd_periodic,
            "verify": cmd_verify, "map": cmd_map}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.budget_given = args.budget is not None
    if args.budget is None:
        args.budget = 2000
    if args.command == "verify" and args.theorem in ("sharkovskiy", "center") and args.spec and not args.map_file:
        args.map_file = args.spec
    try:
        return COMMANDS[args.command](args)
    except ParseError as exc:
        sys.stderr.write(f"{exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"cannot read input: {exc}\n")
        return 2
    except LamdynError as exc:
        sys.stderr.write(f"{exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
