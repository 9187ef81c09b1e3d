"""tanglefloer command line.

Exit codes: 0 ok, 1 validation failure, 2 theorem violation, 3 I/O or format error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import chain, homology as hom, moves, tangle as tg, tracer
from .grading import GradingError, resolve_grading, validate_grading
from .moduli import ModuliError

OK, INVALID, VIOLATION, IOERR = 0, 1, 2, 3


@dataclass
class CommandResult:
    exit_code: int = OK
    lines: list = field(default_factory=list)
    machine: dict = field(default_factory=dict)
    output: str | None = None  # tangle text or svg destined for -o / stdout

    def text(self, machine=False):
        out = list(self.lines)
        if machine and self.machine:
            out.append("--- machine")
            out.append(json.dumps(self.machine, sort_keys=True))
        return "\n".join(out)


def _groups_block(groups, prefix="H"):
    return {str(k): {"rank": g.free_rank, "torsion": [str(d) for d in g.torsion]}
            for k, g in sorted(groups.items(), reverse=True)}


def _all_degrees(groups):
    # report every degree in the +-1..3 band, zero groups included
    full = {k: hom.zero_group() for k in (3, 2, 1, -1, -2, -3)}
    full.update(groups)
    return full


def _load(path):
    return tg.load(path, strict=True)


def _emit(result, text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        result.lines.append(f"wrote {path}")
    else:
        result.output = text


# ------------------------------------------------------------------ commands

def cmd_validate(args):
    t = tg.load(args.file, strict=False)
    report = tg.validate(t)
    res = CommandResult()
    for e in report.errors:
        res.lines.append(f"error: {e}")
    for w in report.warnings:
        res.lines.append(f"warning: {w}")
    grading = []
    if not report.errors:
        for orbit, kind in sorted(report.classification.items()):
            res.lines.append(f"{orbit}: {kind}")
        res.lines.append(f"csi: {'yes' if report.csi else 'no'}")
        try:
            g = resolve_grading(t)
            grading = validate_grading(t, g).findings()
            res.lines.append(f"grading: {g.source}")
        except GradingError as exc:
            grading = [str(exc)]
        for f in grading:
            res.lines.append(f"grading: {f}")
    res.machine = {"errors": report.errors, "warnings": report.warnings, "csi": report.csi,
                   "classification": report.classification, "grading": grading}
    res.exit_code = INVALID if report.errors or grading else OK
    return res


def _signs(args):
    return "m" if args.signs == "m" else args.orientation


def cmd_homology(args):
    t = _load(args.file)
    res = CommandResult()
    if args.equivariant:
        c = chain.equivariant_boundary(t)
        groups = c.homology()
        prefix = "h"
    else:
        c = chain.quotient_boundary(t, "primary", _signs(args))
        prefix = "H"
    bad = chain.square_defects(c)
    if bad:
        res.lines.append(f"boundary does not square to zero in degrees {bad}")
        res.exit_code = VIOLATION
        return res
    if not args.equivariant:
        groups = _all_degrees(c.homology())
    if c.coefficient_ring != "Z":
        res.lines.append(f"coefficients: {c.coefficient_ring}")
    res.lines.extend(hom.format_groups(groups, prefix))
    if args.dump:
        res.lines.append(c.dump())
    res.machine = {"homology": _groups_block(groups), "ring": c.coefficient_ring, "signs": c.signs}
    return res


def cmd_semi(args):
    t = _load(args.file)
    c = chain.quotient_boundary(t, "semi_primary", "m", args.power)
    res = CommandResult()
    groups = _all_degrees(c.homology())
    res.lines.extend(hom.format_groups(groups, "H~"))
    res.machine = {"homology": _groups_block(groups), "power": args.power}
    return res


def cmd_chaotic(args):
    t = _load(args.file)
    c = chain.quotient_boundary(t, "chaotic", "m", args.n)
    res = CommandResult()
    groups = _all_degrees(c.homology())
    res.lines.extend(hom.format_groups(groups, "Hc"))
    if args.dump:
        res.lines.append(c.dump())
    res.machine = {"homology": _groups_block(groups), "n": args.n}
    return res


def cmd_zeta(args):
    t = _load(args.file)
    chi, series = hom.zeta_sequence(t, args.N)
    res = CommandResult()
    res.lines.append("chi = " + " ".join(str(v) for v in chi))
    res.lines.append("zeta = " + " ".join(str(Fraction(v)) for v in series))
    res.machine = {"chi": chi, "series": [str(Fraction(v)) for v in series]}
    return res


def cmd_cohomology(args):
    t = _load(args.file)
    groups = _all_degrees(hom.cohomology_of(t))
    res = CommandResult()
    res.lines.extend(f"H^{k} = {g}" for k, g in sorted(groups.items(), reverse=True))
    res.lines.append("matches the homology of the inverse map")
    res.machine = {"cohomology": _groups_block(groups)}
    return res


def cmd_iterate(args):
    t = _load(args.file)
    res = CommandResult()
    _emit(res, tg.emit_tangle(tg.iterate(t, args.n)), args.output)
    return res


def cmd_move(args):
    t = _load(args.file)
    with open(args.script, encoding="utf-8") as fh:
        script = moves.parse_script(fh.read())
    res = CommandResult()
    log = []
    for spec in script:
        after = moves.apply_move(t, spec)
        cls = moves.classify_move(t, after, spec)
        res.lines.append(f"{spec}: {cls}")
        log.append({"move": str(spec), "kind": cls.kind, "flipped": list(cls.flipped)})
        t = after
    res.machine = {"moves": log}
    _emit(res, tg.emit_tangle(t), args.output)
    return res


def cmd_invariance(args):
    a, b = _load(args.before), _load(args.after)
    if not (tg.csi(a) and tg.csi(b)):
        note = "warning: input is not csi; homology may legitimately differ"
    else:
        note = None
    report = moves.invariance_check(a, b)
    res = CommandResult()
    if note:
        res.lines.append(note)
    res.lines.append(str(report))
    for k, g in sorted(_all_degrees(report.before).items(), reverse=True):
        res.lines.append(f"H_{k}: {g} -> {report.after.get(k, hom.zero_group())}")
    res.machine = {"kind": report.classification.kind, "equal": report.equal, "details": report.details,
                   "before": _groups_block(report.before), "after": _groups_block(report.after)}
    res.exit_code = OK if report.equal else VIOLATION
    return res


def cmd_trace(args):
    m = tracer.builtin_map(args.map, tau=args.tau, eps=args.eps)
    result = tracer.trace(m, budget=args.budget, max_chord=args.lmax, max_turn=args.thetamax,
                          window=args.window, min_angle=args.min_angle)
    t = result.tangle
    res = CommandResult()
    kinds = tg.classify_orbits(t)
    res.lines.append(f"saddle {tuple(round(float(v), 12) for v in result.saddle.point)}, "
                     f"{len(result.crossings)} crossings, {len(t.orbits)} orbits "
                     f"({sum(k == 'primary' for k in kinds.values())} primary)")
    res.lines.append("intersecting pairs: " + (" ".join(tg.intersecting_pairs(t)) or "none"))
    res.machine = {"crossings": len(result.crossings), "orbits": kinds, "pairs": tg.intersecting_pairs(t),
                   "dropped": result.dropped}
    _emit(res, tg.emit_tangle(t), args.output)
    return res


def _svg(t, size=480):
    pad = 20
    if t.geometry is not None:
        lines = {b: t.geometry.polyline(b) for b, _ in t.geometry.branches}
        pts = [v for line in lines.values() for v in line]
        marks = []
        from .grading import point_xy
        kinds = tg.classify_orbits(t)
        for p in t.points:
            try:
                marks.append((point_xy(t.geometry, p.t_u, "u"), kinds.get(p.orbit) == "primary", p.name))
            except GradingError:
                continue
    else:
        # schematic: signed log parameters
        def f(v):
            return math.copysign(math.log1p(abs(v)), v)
        lines = {}
        kinds = tg.classify_orbits(t)
        marks = [((f(p.t_u), f(p.t_s)), kinds.get(p.orbit) == "primary", p.name) for p in t.points]
        pts = [m[0] for m in marks] or [(0.0, 0.0)]
    xs = [float(v[0]) for v in pts] + [0.0]
    ys = [float(v[1]) for v in pts] + [0.0]
    lo_x, hi_x, lo_y, hi_y = min(xs), max(xs), min(ys), max(ys)
    span = max(hi_x - lo_x, hi_y - lo_y) or 1.0

    def to(v):
        return (pad + (float(v[0]) - lo_x) / span * (size - 2 * pad),
                size - pad - (float(v[1]) - lo_y) / span * (size - 2 * pad))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">', f'<rect width="{size}" height="{size}" fill="white"/>']
    colours = {"u+": "#c0392b", "u-": "#e67e22", "s+": "#2471a3", "s-": "#17a589"}
    for b, line in sorted(lines.items()):
        path = " ".join(f"{x:.2f},{y:.2f}" for x, y in map(to, line))
        out.append(f'<polyline points="{path}" fill="none" stroke="{colours[b]}" stroke-width="1"/>')
    x0, y0 = to((0.0, 0.0))
    out.append(f'<circle cx="{x0:.2f}" cy="{y0:.2f}" r="4" fill="black"><title>x</title></circle>')
    for xy, primary, name in marks:
        x, y = to(xy)
        fill = "black" if primary else "none"
        out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" fill="{fill}" stroke="black">'
                   f'<title>{name}</title></circle>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_sketch(args):
    t = _load(args.file)
    res = CommandResult()
    _emit(res, _svg(t), args.output)
    return res


# ------------------------------------------------------------------- parser

class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # bad flags are a format error (exit 3), not argparse's default 2
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser():
    ap = _Parser(prog="tanglefloer", description="Floer homology of homoclinic tangles")
    ap.add_argument("--machine", action="store_true", help="append a JSON block to the report")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a tangle file and classify its points")
    p.add_argument("file")

    p = sub.add_parser("homology", help="primary homology")
    p.add_argument("file")
    p.add_argument("--signs", choices=("m", "n"), default="m")
    p.add_argument("--orientation", choices=chain.ORIENTATIONS, default="u_plus",
                   help="orientation used by n-signs")
    p.add_argument("--equivariant", action="store_true", help="Laurent complex before taking orbits")
    p.add_argument("--dump", action="store_true", help="print boundary matrices")

    p = sub.add_parser("semi", help="semi-primary homology of a power of the map")
    p.add_argument("file")
    p.add_argument("--power", type=int, default=1)

    p = sub.add_parser("chaotic", help="chaotic homology of the n-th power")
    p.add_argument("file")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--dump", action="store_true")

    p = sub.add_parser("zeta", help="Euler characteristics of chaotic homology and the zeta series")
    p.add_argument("file")
    p.add_argument("--N", type=int, default=3)

    p = sub.add_parser("cohomology", help="cohomology, checked against the inverse map")
    p.add_argument("file")

    p = sub.add_parser("iterate", help="tangle of a power of the map")
    p.add_argument("file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("-o", "--output")

    p = sub.add_parser("move", help="apply a move script")
    p.add_argument("file")
    p.add_argument("script")
    p.add_argument("-o", "--output")

    p = sub.add_parser("invariance", help="compare homology before and after a move")
    p.add_argument("before")
    p.add_argument("after")

    p = sub.add_parser("trace", help="trace a built-in map and extract its tangle")
    p.add_argument("--map", default="henon")
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--eps", type=float, default=0.3)
    p.add_argument("--budget", type=float, default=3.3, help="arclength per branch")
    p.add_argument("--lmax", type=float, default=0.01)
    p.add_argument("--thetamax", type=float, default=0.2)
    p.add_argument("--window", type=int, default=2)
    p.add_argument("--min-angle", type=float, default=tracer.MIN_CROSSING_ANGLE,
                   help="crossings at smaller angles are rejected as tangencies")
    p.add_argument("-o", "--output")

    p = sub.add_parser("sketch", help="SVG drawing of a tangle")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    return ap


COMMANDS = {
    "validate": cmd_validate, "homology": cmd_homology, "semi": cmd_semi, "chaotic": cmd_chaotic,
    "zeta": cmd_zeta, "cohomology": cmd_cohomology, "iterate": cmd_iterate, "move": cmd_move,
    "invariance": cmd_invariance, "trace": cmd_trace, "sketch": cmd_sketch,
}


def run(argv):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return CommandResult(IOERR, [f"error: {exc}"])
    try:
        res = COMMANDS[args.command](args)
    except (OSError, tg.TangleError) as exc:
        res = CommandResult(IOERR, [f"error: {exc}"])
    except (hom.TheoremViolation, moves.TheoremViolation) as exc:
        res = CommandResult(VIOLATION, [f"theorem violation: {exc}"])
    except chain.ChainError as exc:
        code = VIOLATION if "square" in str(exc) else INVALID
        res = CommandResult(code, [f"error: {exc}"])
    except (tg.TangleInvalid, GradingError, ModuliError, moves.MoveError, tracer.TracerError, ValueError) as exc:
        res = CommandResult(INVALID, [f"error: {exc}"])
    res.machine_flag = args.machine
    return res


def main(argv=None):
    res = run(sys.argv[1:] if argv is None else argv)
    text = res.text(getattr(res, "machine_flag", False))
    if res.output is not None:
        sys.stdout.write(res.output)
        if text:
            sys.stderr.write(text + "\n")
    elif text:
        print(text)
    return res.exit_code


if __name__ == "__main__":
    sys.exit(main())
