"""Combinatorial homoclinic tangles.

A tangle stores a finite window of homoclinic points.  Each point carries its
parameters along the unstable and stable manifold (the sign of a parameter
names the branch, 0 is the fixed point), its crossing sign, abelianized
homotopy increments and an optional Maslov grade.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Optional

import numpy as np

SURFACE_RANK = {"plane": 0, "cylinder": 1, "torus": 2}
PAIRS = ("u+s+", "u+s-", "u-s+", "u-s-")
NAME_RE = re.compile(r"^[A-Za-z0-9_~^']+$")
BIGON_RE = re.compile(r"^bigon:([A-Za-z0-9_~^']+)\.(-?\d+)-([A-Za-z0-9_~^']+)\.(-?\d+)$")


class TangleError(Exception):
    """Malformed tangle text.  Carries the offending line and column."""

    def __init__(self, message, line=None, column=None):
        self.message, self.line, self.column = message, line, column
        where = f"line {line}" + (f", column {column}" if column else "") if line else ""
        super().__init__(f"{where}: {message}" if where else message)


class TangleInvalid(Exception):
    """A parsed tangle violates a structural invariant."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def pair_of(t_u, t_s):
    return ("u+" if t_u > 0 else "u-") + ("s+" if t_s > 0 else "s-")


@dataclass(frozen=True)
class Point:
    orbit: str
    iterate: int
    t_u: float
    t_s: float
    sign: int
    a_u: tuple = ()
    a_s: tuple = ()
    mu: Optional[int] = None

    @property
    def key(self):
        return (self.orbit, self.iterate)

    @property
    def label(self):
        return tuple(u - s for u, s in zip(self.a_u, self.a_s))

    @property
    def contractible(self):
        return not any(self.label)

    @property
    def pair(self):
        return pair_of(self.t_u, self.t_s)

    @property
    def name(self):
        return f"{self.orbit}.{self.iterate}"


@dataclass(frozen=True)
class MarkedPoint:
    """A periodic point used to exclude bigons in the chaotic complex.

    ``inside`` lists bigons (as key pairs) whose interior contains the point.
    The list is read modulo the period: shifting both ends of a listed bigon by
    a multiple of the period gives another bigon that contains it.  ``table``
    is set when the list was given explicitly, even if it is empty.
    """

    name: str
    period: int
    coords: Optional[tuple] = None
    inside: tuple = ()
    table: bool = False

    def in_table(self, p, q):
        for (po, pi), (qo, qj) in self.inside:
            if po != p[0] or qo != q[0]:
                continue
            shift = p[1] - pi
            if shift % self.period == 0 and q[1] - qj == shift:
                return True
        return False


@dataclass(frozen=True)
class Geometry:
    """Polylines of the four branches, each starting at the fixed point.

    Point parameters are signed arclengths along these polylines.
    """

    branches: tuple  # ((name, ((x, y[, t]), ...)), ...)

    def _verts(self, branch):
        for name, verts in self.branches:
            if name == branch:
                return verts
        return None

    def polyline(self, branch):
        verts = self._verts(branch)
        if verts is None:
            return None
        return np.asarray([v[:2] for v in verts], dtype=float)

    def params(self, branch):
        """Explicit vertex parameters, or None when the parameter is arclength."""
        verts = self._verts(branch)
        if not verts or len(verts[0]) < 3:
            return None
        return np.asarray([v[2] for v in verts], dtype=float)

    @property
    def origin(self):
        for _, verts in self.branches:
            if verts:
                return tuple(verts[0])
        return (0.0, 0.0)


def parse_bigon_id(token):
    m = BIGON_RE.match(token)
    if not m:
        raise ValueError(f"bad bigon identifier {token!r}")
    return ((m.group(1), int(m.group(2))), (m.group(3), int(m.group(4))))


def bigon_id(p, q):
    return f"bigon:{p[0]}.{p[1]}-{q[0]}.{q[1]}"


@dataclass(frozen=True)
class Tangle:
    surface: str = "plane"
    reversing: bool = False
    window: int = 4
    points: tuple = ()
    marked: tuple = ()
    geometry: Optional[Geometry] = None
    sigma01: Optional[int] = None
    scale: Optional[float] = None

    @property
    def h_rank(self):
        return SURFACE_RANK[self.surface]

    @property
    def step(self):
        """Iterate distance that returns a point to its own branch pair."""
        return 2 if self.reversing else 1

    @cached_property
    def index(self):
        return {p.key: i for i, p in enumerate(self.points)}

    def point(self, key):
        return self.points[self.index[key]]

    def has(self, key):
        return key in self.index

    @cached_property
    def orbits(self):
        return tuple(sorted({p.orbit for p in self.points}))

    def orbit_points(self, orbit):
        return sorted((p for p in self.points if p.orbit == orbit), key=lambda p: p.iterate)

    def rep(self, orbit):
        return self.point((orbit, 0))

    @cached_property
    def arrays(self):
        """Numpy views used by the order queries: t_u, t_s, label ids."""
        tu = np.array([p.t_u for p in self.points], dtype=float)
        ts = np.array([p.t_s for p in self.points], dtype=float)
        labels = {}
        lab = np.array([labels.setdefault(p.label, len(labels)) for p in self.points], dtype=int)
        zero = labels.get(tuple([0] * self.h_rank), -1)
        return tu, ts, lab, labels, zero

    def with_points(self, points, **kw):
        return replace(self, points=tuple(sorted(points, key=lambda p: (p.orbit, p.iterate))), **kw)


# ---------------------------------------------------------------- order queries

def strictly_between(a, b, values):
    lo, hi = (a, b) if a < b else (b, a)
    return (values > lo) & (values < hi)


def label_id(t, label):
    return t.arrays[3].get(tuple(label), -2)


def between_both(t, a, b, label=None):
    """Mask of stored points strictly between a and b in both orders.

    ``a`` and ``b`` are (t_u, t_s) pairs; the fixed point is (0, 0).  With a
    label, only points lifting to the same deck translate are kept.
    """
    tu, ts, lab, _, _ = t.arrays
    mask = strictly_between(a[0], b[0], tu) & strictly_between(a[1], b[1], ts)
    if label is not None:
        mask &= lab == label_id(t, label)
    return mask


def x_between_both(a, b):
    if a == (0.0, 0.0) or b == (0.0, 0.0):
        return False
    return (a[0] > 0) != (b[0] > 0) and (a[1] > 0) != (b[1] > 0)


# ------------------------------------------------------------------ classifying

def is_semi_primary(t, p):
    return not between_both(t, (0.0, 0.0), (p.t_u, p.t_s)).any()


def is_primary(t, p):
    if not p.contractible:
        return False
    return not between_both(t, (0.0, 0.0), (p.t_u, p.t_s), label=p.label).any()


def classify_point(t, p):
    if is_primary(t, p):
        return "primary"
    if is_semi_primary(t, p):
        return "semi_primary" if p.contractible else "noncontractible"
    return "secondary"


def classify_orbits(t):
    """Classification of each orbit, read off its iterate-0 representative."""
    return {o: classify_point(t, t.rep(o)) for o in t.orbits if t.has((o, 0))}


def primary_orbits(t):
    return [o for o, k in classify_orbits(t).items() if k == "primary"]


def semi_primary_orbits(t):
    return [o for o in t.orbits if t.has((o, 0)) and is_semi_primary(t, t.rep(o))]


def csi(t):
    seen = {p.pair for p in t.points if p.contractible}
    return all(pair in seen for pair in PAIRS)


def intersecting_pairs(t):
    return sorted({p.pair for p in t.points})


@dataclass
class ValidationReport:
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    csi: bool = False
    classification: dict = field(default_factory=dict)

    @property
    def ok(self):
        return not self.errors


def structural_errors(t):
    errors, warnings = [], []
    if t.surface not in SURFACE_RANK:
        errors.append(f"unknown surface {t.surface!r}")
        return errors, warnings
    if t.window < 0:
        errors.append("negative window")
    seen_u, seen_s, keys = {}, {}, set()
    for p in t.points:
        if not NAME_RE.match(p.orbit):
            errors.append(f"bad orbit name {p.orbit!r}")
        if p.key in keys:
            errors.append(f"duplicate point {p.name}")
        keys.add(p.key)
        if p.t_u == 0 or p.t_s == 0:
            errors.append(f"{p.name}: zero parameter is reserved for the fixed point")
        if p.t_u in seen_u:
            errors.append(f"duplicate unstable parameter {p.t_u!r} ({seen_u[p.t_u]}, {p.name})")
        if p.t_s in seen_s:
            errors.append(f"duplicate stable parameter {p.t_s!r} ({seen_s[p.t_s]}, {p.name})")
        seen_u.setdefault(p.t_u, p.name)
        seen_s.setdefault(p.t_s, p.name)
        if p.sign not in (1, -1):
            errors.append(f"{p.name}: crossing sign must be +1 or -1")
        if len(p.a_u) != t.h_rank or len(p.a_s) != t.h_rank:
            errors.append(f"{p.name}: label length differs from {t.h_rank}")
    for o in t.orbits:
        pts = t.orbit_points(o)
        have = {p.iterate for p in pts}
        missing = [n for n in range(-t.window, t.window + 1) if n not in have]
        if missing:
            errors.append(f"orbit {o}: missing iterate(s) {missing} in window")
        for a, b in zip(pts, pts[1:]):
            if b.iterate != a.iterate + 1:
                continue
            if not abs(b.t_u) > abs(a.t_u):
                errors.append(f"orbit {o}: unstable parameter does not expand at {b.name}")
            if not abs(b.t_s) < abs(a.t_s):
                errors.append(f"orbit {o}: stable parameter does not contract at {b.name}")
            same = not t.reversing
            if ((b.t_u > 0) == (a.t_u > 0)) != same or ((b.t_s > 0) == (a.t_s > 0)) != same:
                errors.append(f"orbit {o}: branch change at {b.name} contradicts orientation behaviour")
            if b.label != a.label:
                errors.append(f"orbit {o}: homotopy label changes at {b.name}")
            if b.sign != a.sign:
                msg = f"orbit {o}: crossing sign changes at {b.name}"
                (warnings if t.reversing else errors).append(msg)
            if (a.mu is None) != (b.mu is None) or a.mu != b.mu:
                errors.append(f"orbit {o}: grading differs along the orbit at {b.name}")
    for m in t.marked:
        if m.period < 1:
            errors.append(f"marked point {m.name}: period must be positive")
        if m.coords is None and not m.table:
            errors.append(f"marked point {m.name}: needs coordinates or a containment table")
    return errors, warnings


def validate(t):
    errors, warnings = structural_errors(t)
    report = ValidationReport(errors=errors, warnings=warnings)
    if errors:
        return report
    report.csi = csi(t)
    report.classification = classify_orbits(t)
    if not report.csi:
        missing = [pair for pair in PAIRS if pair not in {p.pair for p in t.points if p.contractible}]
        report.warnings.append("no contractible intersection on " + ", ".join(missing))
    return report


def check(t):
    errors, _ = structural_errors(t)
    if errors:
        raise TangleInvalid(errors)
    return t


# ------------------------------------------------------------------------ frame

@dataclass(frozen=True)
class Frame:
    anchor: Point
    end: Point
    u_segment: tuple
    s_segment: tuple
    interior: tuple


def frame(t, p):
    if isinstance(p, tuple):
        p = t.point(p)
    if not is_primary(t, p):
        raise ValueError(f"{p.name} is not primary")
    end_key = (p.orbit, p.iterate + t.step)
    if not t.has(end_key):
        raise ValueError(f"window too small: {end_key} not stored")
    e = t.point(end_key)
    tu, ts, *_ = t.arrays
    in_u = strictly_between(p.t_u, e.t_u, tu)
    in_s = strictly_between(p.t_s, e.t_s, ts)
    pts = t.points
    u_seg = sorted((pts[i] for i in np.flatnonzero(in_u)), key=lambda r: abs(r.t_u - p.t_u))
    s_seg = sorted((pts[i] for i in np.flatnonzero(in_s)), key=lambda r: abs(r.t_s - p.t_s))
    inside = [pts[i] for i in np.flatnonzero(in_u & in_s)]
    return Frame(p, e, tuple(u_seg), tuple(s_seg), tuple(sorted(inside, key=lambda r: abs(r.t_u - p.t_u))))


# --------------------------------------------------------------- windows, iterates

def restrict_window(t, k):
    if k > t.window:
        return extend_window(t, k)
    pts = [p for p in t.points if abs(p.iterate) <= k]
    return t.with_points(pts, window=k)


def extend_window(t, k):
    """Regenerate iterates -k..k from the iterate-0 representatives.

    Only possible when the tangle is scale-homogeneous: iterate n sits at
    (t_u * s**n, t_s * s**-n), with a sign flip per step for reversing maps.
    """
    if k <= t.window:
        return restrict_window(t, k)
    if not t.points:
        return t.with_points([], window=k)
    if not t.scale:
        raise ValueError(f"window {t.window} cannot be extended to {k}: tangle has no scale")
    lam = -t.scale if t.reversing else t.scale
    pts = []
    for o in t.orbits:
        r = t.rep(o)
        for n in range(-k, k + 1):
            pts.append(replace(r, iterate=n, t_u=r.t_u * lam ** n, t_s=r.t_s * lam ** -n))
    return t.with_points(pts, window=k)


def _split(i, n):
    return i % n, i // n


def _relabel(name, j, n):
    return name if n == 1 else f"{name}^{j}"


def iterate(t, n):
    """The tangle of the n-th power of the map.

    Every orbit splits into |n| orbits; for negative n the two manifolds swap
    roles, which negates crossing signs and gradings.
    """
    if n == 0:
        raise ValueError("iterate needs a nonzero power")
    if n < 0:
        t = invert(t)
        n = -n
    if n == 1:
        return t
    if t.scale:
        t = extend_window(t, n * t.window + n - 1)
    new_window = (t.window - (n - 1)) // n
    if new_window < 0 and t.points:
        raise ValueError(f"window {t.window} too small for power {n}")
    pts = []
    for p in t.points:
        j, k = _split(p.iterate, n)
        pts.append(replace(p, orbit=_relabel(p.orbit, j, n), iterate=k))
    marked = []
    for m in t.marked:
        lcm = m.period * n // math.gcd(m.period, n)
        inside = []
        for (po, pi), (qo, qj) in m.inside:
            for s in range(0, lcm, m.period):
                a, b = _split(pi + s, n), _split(qj + s, n)
                inside.append(((_relabel(po, a[0], n), a[1]), (_relabel(qo, b[0], n), b[1])))
        marked.append(replace(m, period=m.period // math.gcd(m.period, n), inside=tuple(inside)))
    # powers of a reversing map reverse only for odd exponents
    reversing = t.reversing and n % 2 == 1
    scale = t.scale ** n if t.scale else None
    return t.with_points(pts, window=max(new_window, 0), marked=tuple(marked), reversing=reversing, scale=scale)


def invert(t):
    """The tangle of the inverse map: stable and unstable manifolds swap."""
    pts = [
        replace(p, iterate=-p.iterate, t_u=p.t_s, t_s=p.t_u, a_u=p.a_s, a_s=p.a_u,
                sign=-p.sign, mu=None if p.mu is None else -p.mu)
        for p in t.points
    ]
    marked = []
    for m in t.marked:
        inside = tuple(((qo, -qj), (po, -pi)) for (po, pi), (qo, qj) in m.inside)
        marked.append(replace(m, inside=inside))
    geometry = None
    if t.geometry is not None:
        swap = {"u+": "s+", "u-": "s-", "s+": "u+", "s-": "u-"}
        geometry = Geometry(tuple((swap[b], v) for b, v in t.geometry.branches))
    sigma = None if t.sigma01 is None else -t.sigma01
    return t.with_points(pts, marked=tuple(marked), geometry=geometry, sigma01=sigma)


# -------------------------------------------------------------------- text form

def _tuple(token, line, col):
    if token in ("()", "-"):
        return ()
    body = token[1:-1] if token.startswith("(") and token.endswith(")") else token
    try:
        return tuple(int(v) for v in body.split(","))
    except ValueError:
        raise TangleError(f"bad label tuple {token!r}", line, col) from None


def _fmt_tuple(values):
    return ",".join(str(v) for v in values) if values else "()"


def _number(token, line, col, kind=float):
    try:
        return kind(token)
    except ValueError:
        raise TangleError(f"expected a number, got {token!r}", line, col) from None


def parse_tangle(text, strict=True):
    header = {}
    points, marked, branches = [], [], []
    current = None
    lines = text.splitlines()
    for lineno, raw in enumerate(lines, 1):
        body = raw.split("#", 1)[0]
        tokens = body.split()
        if not tokens:
            continue
        cols = [m.start() + 1 for m in re.finditer(r"\S+", body)]
        head = tokens[0]
        if current is not None:
            if head == "v" and len(tokens) in (3, 4):
                current[1].append(tuple(_number(tok, lineno, col) for tok, col in zip(tokens[1:], cols[1:])))
                continue
            if head == "end" and len(tokens) == 1:
                branches.append((current[0], tuple(current[1])))
                current = None
                continue
            raise TangleError("expected 'v <x> <y>' or 'end' inside polyline", lineno, 1)
        if head == "surface":
            if len(tokens) != 2 or tokens[1] not in SURFACE_RANK:
                raise TangleError("expected 'surface <plane|cylinder|torus>'", lineno, 1)
            header["surface"] = tokens[1]
        elif head == "orientation":
            if len(tokens) != 2 or tokens[1] not in ("preserving", "reversing"):
                raise TangleError("expected 'orientation <preserving|reversing>'", lineno, 1)
            header["reversing"] = tokens[1] == "reversing"
        elif head == "window":
            if len(tokens) != 2:
                raise TangleError("expected 'window <K>'", lineno, 1)
            header["window"] = _number(tokens[1], lineno, cols[1], int)
        elif head == "sigma01":
            header["sigma01"] = _number(tokens[1], lineno, cols[1], int)
        elif head == "scale":
            header["scale"] = _number(tokens[1], lineno, cols[1])
        elif head == "pt":
            if len(tokens) not in (8, 9):
                raise TangleError("point line needs 7 fields and an optional mu=", lineno, 1)
            mu = None
            if len(tokens) == 9:
                if not tokens[8].startswith("mu="):
                    raise TangleError(f"unexpected token {tokens[8]!r}", lineno, cols[8])
                mu = _number(tokens[8][3:], lineno, cols[8], int)
            sign = _number(tokens[5], lineno, cols[5], int)
            if not NAME_RE.match(tokens[1]):
                raise TangleError(f"bad orbit name {tokens[1]!r}", lineno, cols[1])
            points.append(Point(
                orbit=tokens[1],
                iterate=_number(tokens[2], lineno, cols[2], int),
                t_u=_number(tokens[3], lineno, cols[3]),
                t_s=_number(tokens[4], lineno, cols[4]),
                sign=sign,
                a_u=_tuple(tokens[6], lineno, cols[6]),
                a_s=_tuple(tokens[7], lineno, cols[7]),
                mu=mu,
            ))
        elif head == "fix":
            if len(tokens) < 3:
                raise TangleError("expected 'fix <name> <period> ...'", lineno, 1)
            name, period = tokens[1], _number(tokens[2], lineno, cols[2], int)
            coords, inside, table, i = None, (), False, 3
            while i < len(tokens):
                if tokens[i] == "at" and i + 2 < len(tokens):
                    coords = (_number(tokens[i + 1], lineno, cols[i + 1]), _number(tokens[i + 2], lineno, cols[i + 2]))
                    i += 3
                elif tokens[i] == "in" and i + 1 < len(tokens):
                    table = True
                    try:
                        inside = () if tokens[i + 1] == "none" else \
                            tuple(parse_bigon_id(tok) for tok in tokens[i + 1].split(","))
                    except ValueError as exc:
                        raise TangleError(str(exc), lineno, cols[i + 1]) from None
                    i += 2
                else:
                    raise TangleError(f"unexpected token {tokens[i]!r}", lineno, cols[i])
            marked.append(MarkedPoint(name, period, coords, inside, table))
        elif head == "polyline":
            if len(tokens) != 2 or tokens[1] not in ("u+", "u-", "s+", "s-"):
                raise TangleError("expected 'polyline <u+|u-|s+|s->'", lineno, 1)
            current = (tokens[1], [])
        else:
            raise TangleError(f"unknown directive {head!r}", lineno, 1)
    if current is not None:
        raise TangleError("polyline block not terminated by 'end'", len(lines), 1)
    for key in ("surface", "reversing", "window"):
        if key not in header:
            name = {"reversing": "orientation"}.get(key, key)
            raise TangleError(f"missing '{name}' line")
    t = Tangle(
        surface=header["surface"],
        reversing=header["reversing"],
        window=header["window"],
        points=tuple(sorted(points, key=lambda p: (p.orbit, p.iterate))),
        marked=tuple(marked),
        geometry=Geometry(tuple(branches)) if branches else None,
        sigma01=header.get("sigma01"),
        scale=header.get("scale"),
    )
    return check(t) if strict else t


def emit_tangle(t):
    out = [
        f"surface {t.surface}",
        f"orientation {'reversing' if t.reversing else 'preserving'}",
        f"window {t.window}",
    ]
    if t.sigma01 is not None:
        out.append(f"sigma01 {t.sigma01}")
    if t.scale is not None:
        out.append(f"scale {t.scale!r}")
    for p in t.points:
        line = (f"pt {p.orbit} {p.iterate} {p.t_u!r} {p.t_s!r} {p.sign:+d} "
                f"{_fmt_tuple(p.a_u)} {_fmt_tuple(p.a_s)}")
        if p.mu is not None:
            line += f" mu={p.mu}"
        out.append(line)
    for m in t.marked:
        line = f"fix {m.name} {m.period}"
        if m.coords is not None:
            line += f" at {m.coords[0]!r} {m.coords[1]!r}"
        if m.table:
            line += " in " + (",".join(bigon_id(p, q) for p, q in m.inside) or "none")
        out.append(line)
    if t.geometry is not None:
        for branch, verts in t.geometry.branches:
            out.append(f"polyline {branch}")
            out.extend("v " + " ".join(repr(c) for c in v) for v in verts)
            out.append("end")
    return "\n".join(out) + "\n"


def load(path, strict=True):
    with open(path, encoding="utf-8") as fh:
        return parse_tangle(fh.read(), strict=strict)


def points_named(t, names: Iterable[str]):
    """Look up points by 'orbit.iterate' names."""
    out = []
    for name in names:
        orbit, _, it = name.rpartition(".")
        out.append(t.point((orbit, int(it))))
    return out


def from_representatives(reps, window=4, scale=2.0, surface="plane", reversing=False,
                         marked=(), sigma01=None):
    """Scale-homogeneous tangle generated by iterate-0 representatives."""
    seed = Tangle(surface=surface, reversing=reversing, window=0, scale=scale,
                  marked=tuple(marked), sigma01=sigma01,
                  points=tuple(replace(p, iterate=0) for p in reps))
    return check(extend_window(seed, window)) if window else check(seed)
