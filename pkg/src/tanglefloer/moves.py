"""(r, s)-moves: creating or annihilating a Z-family of adjacent point pairs.

A move is written against iterate 0 of the family.  The new pair sits in the
open gap right after ``after_u`` along the unstable branch and right after
``after_s`` along the stable branch; the nearer point of the pair sits at one
third of each gap, the other at two thirds.  Moved tangles lose their
geometry, so any geometric grades are written onto the points first.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field, replace

from .chain import ChainError, quotient_boundary, raw_differential, square_defects
from .grading import resolve_grading, validate_grading
from .homology import Laurent
from .tangle import PAIRS, Point, TangleInvalid, csi, primary_orbits, structural_errors

MOVE_RE = re.compile(r"^mv\s+(create|annihilate)\s+(\S+)((?:\s+\S+=\S+)*)\s*$")


class MoveError(Exception):
    pass


class TheoremViolation(Exception):
    """An identity that must hold for primary moves failed."""

    def __init__(self, identity, generator):
        self.identity, self.generator = identity, generator
        super().__init__(f"{identity} fails at generator {generator}")


@dataclass(frozen=True)
class MoveSpec:
    direction: str  # create | annihilate
    pair: str
    after_u: str  # point name "orbit.k" or "x"
    after_s: str
    sign: int = 1
    label: tuple = ()
    names: tuple = ()
    order: str = "same"  # s-order of the pair relative to its u-order
    mu: tuple = ()

    def __str__(self):
        parts = [f"mv {self.direction} {self.pair}", f"after_u={self.after_u}", f"after_s={self.after_s}"]
        if self.direction == "create":
            parts.append(f"sign={self.sign:+d}")
            parts.append("label=(" + ",".join(str(v) for v in self.label) + ")")
            if self.names:
                parts.append("names=" + ",".join(self.names))
            if self.order != "same":
                parts.append(f"order={self.order}")
            if self.mu:
                parts.append("mu=" + ",".join(str(v) for v in self.mu))
        return " ".join(parts)


def _ints(text):
    text = text.strip("()")
    return tuple(int(v) for v in text.split(",")) if text else ()


def parse_move(line):
    m = MOVE_RE.match(line.strip())
    if not m:
        raise MoveError(f"cannot parse move {line.strip()!r}")
    direction, pair, rest = m.groups()
    if pair not in PAIRS:
        raise MoveError(f"unknown branch pair {pair!r}")
    fields = dict(kv.split("=", 1) for kv in rest.split())
    unknown = set(fields) - {"after_u", "after_s", "sign", "label", "names", "order", "mu"}
    if unknown:
        raise MoveError(f"unknown move field(s) {sorted(unknown)}")
    for key in ("after_u", "after_s"):
        if key not in fields:
            raise MoveError(f"move needs {key}")
    try:
        sign = int(fields.get("sign", "1"))
        label = _ints(fields.get("label", "()"))
        mu = _ints(fields.get("mu", ""))
    except ValueError as exc:
        raise MoveError(f"bad number in move: {exc}") from None
    if sign not in (1, -1):
        raise MoveError("sign must be +1 or -1")
    order = fields.get("order", "same")
    if order not in ("same", "reversed"):
        raise MoveError("order must be same or reversed")
    names = tuple(fields["names"].split(",")) if "names" in fields else ()
    if names and len(names) != 2:
        raise MoveError("names needs exactly two orbit names")
    if mu and len(mu) != 2:
        raise MoveError("mu needs exactly two grades")
    return MoveSpec(direction, pair, fields["after_u"], fields["after_s"], sign, label, names, order, mu)


def parse_script(text):
    moves = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            moves.append(parse_move(line))
    return moves


# ------------------------------------------------------------------ slots

def _key(name):
    orbit, _, k = name.rpartition(".")
    if not orbit:
        raise MoveError(f"bad point name {name!r}")
    return orbit, int(k)


def _axis(p, axis):
    return p.t_u if axis == "u" else p.t_s


def _gap(t, pair, axis, after, shift=0):
    """Open parameter interval right after a point (or x) on the pair's branch.

    Returns (lo, hi) as signed parameters; hi is None when nothing follows.
    """
    branch_sign = 1 if pair[1 if axis == "u" else 3] == "+" else -1
    if after == "x":
        lo = 0.0
    else:
        orbit, k = _key(after)
        key = (orbit, k + shift)
        if not t.has(key):
            raise MoveError(f"window too small: {orbit}.{k + shift} not stored")
        lo = _axis(t.point(key), axis)
        if (lo > 0) != (branch_sign > 0):
            raise MoveError(f"{after} does not lie on the {axis}{'+' if branch_sign > 0 else '-'} branch")
    ahead = [_axis(p, axis) for p in t.points
             if (_axis(p, axis) > 0) == (branch_sign > 0) and abs(_axis(p, axis)) > abs(lo)]
    hi = min(ahead, key=abs) if ahead else None
    return lo, hi


def _thirds(lo, hi):
    if hi is None:
        # nothing beyond: step out by a third of the distance from x
        hi = lo * 1.5 if lo else None
        if hi is None:
            raise MoveError("cannot place a pair after x on an empty branch")
    return lo + (hi - lo) / 3, lo + 2 * (hi - lo) / 3


def _fresh(t, base):
    taken = set(t.orbits)
    if base not in taken:
        return base
    i = 1
    while f"{base}{i}" in taken:
        i += 1
    return f"{base}{i}"


def _baked(t):
    """The tangle with grades stored on every point and geometry dropped."""
    if t.geometry is None:
        return t
    g = resolve_grading(t)
    pts = [p if p.mu is not None or g.get(p.orbit) is None else replace(p, mu=g[p.orbit]) for p in t.points]
    return t.with_points(pts, geometry=None)


def _inherit(t, pair, sign, near_u):
    """Grade of the graded point of the same pair and sign nearest in u-order."""
    best = None
    for p in t.points:
        if p.pair == pair and p.sign == sign and p.mu is not None:
            d = abs(abs(p.t_u) - abs(near_u))
            if best is None or d < best[0]:
                best = (d, p.mu)
    return None if best is None else best[1]


def _zero(t):
    return tuple([0] * t.h_rank)


def _a_s(t, after):
    return _zero(t) if after == "x" else t.point(_key(after)).a_s


def _anchor_iterate(spec):
    for name in (spec.after_u, spec.after_s):
        if name != "x":
            return _key(name)[1]
    return 0


def apply_move(t, spec):
    if spec.direction == "annihilate":
        return _annihilate(t, spec)
    t = _baked(t)
    label = spec.label or _zero(t)
    if len(label) != t.h_rank:
        raise MoveError(f"label length {len(label)} differs from {t.h_rank}")
    a_s = _a_s(t, spec.after_s)
    a_u = tuple(x + y for x, y in zip(label, a_s))
    first = _fresh(t, spec.names[0] if spec.names else "r")
    second = _fresh(t.with_points(list(t.points) + [Point(first, 0, 1.0, 1.0, 1)]),
                    spec.names[1] if spec.names else "s")
    if first == second:
        raise MoveError("the two new orbits need different names")
    k0 = _anchor_iterate(spec)

    def place(shift):
        u = _thirds(*_gap(t, spec.pair, "u", spec.after_u, shift))
        s = _thirds(*_gap(t, spec.pair, "s", spec.after_s, shift))
        return u, s if spec.order == "same" else (s[1], s[0])

    (u1, u2), (s1, s2) = place(0)
    for v, axis in ((u1, "u"), (u2, "u"), (s1, "s"), (s2, "s")):
        if any(_axis(p, axis) == v for p in t.points):
            raise MoveError("position occupied")
    if spec.mu:
        mu1, mu2 = spec.mu
    else:
        mu1 = _inherit(t, spec.pair, spec.sign, u1)
        mu2 = _inherit(t, spec.pair, -spec.sign, u2)
    new = []
    if t.scale:
        lam = -t.scale if t.reversing else t.scale
        for n in range(-t.window, t.window + 1):
            e = n - k0
            new.append(Point(first, n, u1 * lam ** e, s1 * lam ** -e, spec.sign, a_u, a_s, mu1))
            new.append(Point(second, n, u2 * lam ** e, s2 * lam ** -e, -spec.sign, a_u, a_s, mu2))
    else:
        if spec.after_u == "x" or spec.after_s == "x":
            raise MoveError("slots at x need a scale-homogeneous tangle")
        for n in range(-t.window, t.window + 1):
            (v1, v2), (w1, w2) = place(n - k0)
            new.append(Point(first, n, v1, w1, spec.sign, a_u, a_s, mu1))
            new.append(Point(second, n, v2, w2, -spec.sign, a_u, a_s, mu2))
    out = t.with_points(list(t.points) + new)
    errors, _ = structural_errors(out)
    if errors:
        raise MoveError("move would overlap frame iterates: " + errors[0])
    return out


def _annihilate(t, spec):
    t = _baked(t)
    k0 = _anchor_iterate(spec)

    def next_two(axis, after):
        lo, _ = _gap(t, spec.pair, axis, after)
        sign = 1 if spec.pair[1 if axis == "u" else 3] == "+" else -1
        ahead = sorted((p for p in t.points
                        if (_axis(p, axis) > 0) == (sign > 0) and abs(_axis(p, axis)) > abs(lo)),
                       key=lambda p: abs(_axis(p, axis)))
        return ahead[:2]

    u_pts, s_pts = next_two("u", spec.after_u), next_two("s", spec.after_s)
    if len(u_pts) < 2 or {p.key for p in u_pts} != {p.key for p in s_pts}:
        raise MoveError("annihilation target is not an adjacent pair")
    a, b = u_pts
    if a.orbit == b.orbit or a.sign == b.sign or a.label != b.label:
        raise MoveError("annihilation target is not an adjacent pair")
    if a.iterate != k0 or b.iterate != k0:
        raise MoveError("annihilation target is not aligned with the named iterate")
    return t.with_points([p for p in t.points if p.orbit not in (a.orbit, b.orbit)])


def apply_script(t, moves):
    for spec in moves:
        t = apply_move(t, spec)
    return t


# ----------------------------------------------------------- classification

@dataclass(frozen=True)
class MoveClassification:
    kind: str  # primary | mixed | secondary
    flipped: tuple = ()
    created: tuple = ()

    @property
    def flips(self):
        return len(self.flipped)

    def __str__(self):
        if self.kind == "mixed":
            return f"mixed ({self.flips} flip{'s' if self.flips != 1 else ''}: {', '.join(self.flipped)})"
        return self.kind


def _new_orbits(before, after):
    return tuple(sorted(set(after.orbits) ^ set(before.orbits)))


def classify_move(t_before, t_after, spec=None):
    """Compare primary sets; the move orbits themselves are not flips."""
    moved = _new_orbits(t_before, t_after)
    old, new = set(primary_orbits(t_before)), set(primary_orbits(t_after))
    flipped = tuple(sorted((old ^ new) - set(moved)))
    if flipped:
        return MoveClassification("mixed", flipped, moved)
    if set(moved) <= (old | new):
        return MoveClassification("primary", (), moved)
    return MoveClassification("secondary", (), moved)


# ------------------------------------------------------- primary move maps

class LMap:
    """Sparse Z[T, 1/T]-linear map between graded orbit modules."""

    def __init__(self, source, target, entries=None, degree=0):
        self.source, self.target = dict(source), dict(target)  # orbit -> grade
        self.entries = {k: v for k, v in (entries or {}).items() if v}
        self.degree = degree

    @classmethod
    def identity(cls, gens):
        return cls(gens, gens, {(o, o): Laurent.monomial(1) for o in gens})

    def __matmul__(self, other):
        out = {}
        by_src = {}
        for (q, p), v in self.entries.items():
            by_src.setdefault(p, []).append((q, v))
        for (q, p), v in other.entries.items():
            for r, w in by_src.get(q, ()):
                out[(r, p)] = out.get((r, p), Laurent()) + w * v
        return LMap(other.source, self.target, out, self.degree + other.degree)

    def __add__(self, other):
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, Laurent()) + v
        return LMap(self.source, self.target, out, self.degree)

    def __neg__(self):
        return LMap(self.source, self.target, {k: -v for k, v in self.entries.items()}, self.degree)

    def __sub__(self, other):
        return self + (-other)

    def column(self, p):
        return {q: v for (q, src), v in self.entries.items() if src == p}

    def first_difference(self, other):
        """A source generator where the two maps differ, or None."""
        for k in set(self.entries) | set(other.entries):
            if self.entries.get(k, Laurent()) != other.entries.get(k, Laurent()):
                return k[1]
        return None


def differential_map(t, g=None):
    if g is None:
        g = resolve_grading(t)
    degree, entries = raw_differential(t, "primary", "m", g)
    return LMap(degree, degree, entries, -1)


@dataclass
class MoveMaps:
    f: LMap
    g: LMap
    h: LMap
    r: str
    s: str
    m_rs: int
    checks: dict = field(default_factory=dict)  # identity -> offending generator or None

    @property
    def ok(self):
        return all(v is None for v in self.checks.values())


def primary_move_maps(t_before, t_after, strict=True):
    """Chain maps f: C' -> C, g: C -> C' and homotopy h for a primary creation.

    C is the Laurent orbit complex before the move, C' after.  r is the new
    orbit one grade above s.  The four identities are checked exactly.
    """
    cls = classify_move(t_before, t_after)
    if cls.kind != "primary" or len(cls.created) != 2:
        raise MoveError(f"not a primary creation ({cls})")
    if set(t_after.orbits) < set(t_before.orbits):
        raise MoveError("pass the tangles in creation order")
    ga, gb = resolve_grading(t_after), resolve_grading(t_before)
    a, b = cls.created
    if ga[a] - ga[b] == 1:
        r, s = a, b
    elif ga[b] - ga[a] == 1:
        r, s = b, a
    else:
        raise MoveError(f"new orbits {a}, {b} do not differ by one in grade")
    d_new, d_old = differential_map(t_after, ga), differential_map(t_before, gb)
    rs = d_new.entries.get((s, r), Laurent())
    stray = sorted(e for e in rs.c if e != 0)
    if stray:
        raise TheoremViolation(f"m'(r^0, s^{stray[0]}) = 0", r)
    m = rs.c.get(0, 0)
    if m not in (1, -1):
        raise MoveError(f"no di-gon from {r} to {s}")
    new, old = d_new.source, d_old.source
    one = Laurent.monomial(1)
    f = {(o, o): one for o in old}
    for q, v in d_new.column(r).items():
        if q != s:
            f[(q, s)] = f.get((q, s), Laurent()) + v * (-m)
    g = {(o, o): one for o in old}
    for p in old:
        c = d_new.entries.get((s, p))
        if c:
            g[(r, p)] = c * (-m)
    f, g = LMap(new, old, f), LMap(old, new, g)
    h = LMap(new, new, {(r, s): Laurent.monomial(-m)}, 1)
    checks = {
        "f d' = d f": (f @ d_new).first_difference(d_old @ f),
        "g d = d' g": (g @ d_old).first_difference(d_new @ g),
        "f g = id": (f @ g).first_difference(LMap.identity(old)),
        "g f - id = h d' + d' h": ((g @ f) - LMap.identity(new)).first_difference((h @ d_new) + (d_new @ h)),
    }
    out = MoveMaps(f, g, h, r, s, m, checks)
    if strict:
        for name, bad in checks.items():
            if bad is not None:
                raise TheoremViolation(name, bad)
    return out


# --------------------------------------------------------------- invariance

@dataclass
class InvarianceReport:
    classification: MoveClassification
    before: dict
    after: dict
    equal: bool
    details: list = field(default_factory=list)

    def __str__(self):
        head = f"{self.classification}: homology {'unchanged' if self.equal else 'CHANGED'}"
        return "\n".join([head] + [f"  {d}" for d in self.details])


def _homology(t):
    c = quotient_boundary(t, "primary", "m")
    bad = square_defects(c)
    if bad:
        raise ChainError(f"boundary does not square to zero in degrees {bad}")
    return c, c.homology()


def _signed_relabel_equal(c1, c2, rename):
    """Do the boundary matrices agree after renaming generators, up to basis signs?"""
    if {k: sorted(rename.get(o, o) for o in v) for k, v in c1.generators.items()} != \
            {k: sorted(v) for k, v in c2.generators.items()}:
        return False
    entries1, entries2 = {}, {}
    for c, store, ren in ((c1, entries1, rename), (c2, entries2, {})):
        for k, mat in c.boundaries.items():
            rows, cols = c.generators[k - 1], c.generators[k]
            for i, row in enumerate(mat):
                for j, v in enumerate(row):
                    if v:
                        store[(ren.get(rows[i], rows[i]), ren.get(cols[j], cols[j]))] = v
    if set(entries1) != set(entries2):
        return False
    flips = {}
    # the renamed generators may change sign; solve for consistent signs
    for key in entries1:
        a, b = entries1[key], entries2[key]
        if abs(a) != abs(b):
            return False
    gens = sorted({o for k in entries1 for o in k})
    for o in gens:
        flips.setdefault(o, 1)
    for (q, p), v in entries1.items():
        want = entries2[(q, p)]
        need = 1 if v == want else -1
        if q in rename.values() and p not in rename.values():
            flips[q] = need
        elif p in rename.values() and q not in rename.values():
            flips[p] = need
    return all(flips[q] * flips[p] * v == entries2[(q, p)] for (q, p), v in entries1.items())


def invariance_check(t_before, t_after):
    """Compare graded primary homology across a move.

    When the two tangles differ by one created pair, the move-specific
    certificate is checked as well: identical matrices for a secondary move,
    the chain maps for a primary one, a relabeling for a one-flip mixed one.
    """
    cls = classify_move(t_before, t_after)
    c1, h1 = _homology(t_before)
    c2, h2 = _homology(t_after)
    degrees = set(h1) | set(h2)
    zero = {k: (h1[k].free_rank, h1[k].torsion) if k in h1 else (0, ()) for k in degrees}
    other = {k: (h2[k].free_rank, h2[k].torsion) if k in h2 else (0, ()) for k in degrees}
    equal = all(zero[k] == other[k] for k in degrees)
    details = []
    if len(cls.created) != 2:
        cls = MoveClassification("unrelated", cls.flipped, cls.created)
        details.append("tangles do not differ by a single move")
    elif cls.kind == "secondary":
        same = c1.generators == c2.generators and c1.boundaries == c2.boundaries
        details.append("boundary matrices identical" if same else "boundary matrices differ")
        equal = equal and same
    elif cls.kind == "primary":
        forward = set(t_after.orbits) > set(t_before.orbits)
        maps = primary_move_maps(t_before, t_after, strict=False) if forward else \
            primary_move_maps(t_after, t_before, strict=False)
        for name, bad in maps.checks.items():
            details.append(f"{name}: {'ok' if bad is None else 'fails at ' + bad}")
        equal = equal and maps.ok
    elif cls.flips == 1:
        (flip,) = cls.flipped
        gone_before = flip in primary_orbits(t_before)
        src, dst = (c1, c2) if gone_before else (c2, c1)
        tb, ta = (t_before, t_after) if gone_before else (t_after, t_before)
        g_src = resolve_grading(tb)
        cand = [o for o in cls.created if o in primary_orbits(ta)
                and resolve_grading(ta).get(o) == g_src.get(flip)]
        iso = any(_signed_relabel_equal(src, dst, {flip: o}) for o in cand)
        details.append(f"relabeling {flip} to {'/'.join(cand) or '?'}: "
                       f"{'chain isomorphism' if iso else 'no isomorphism'}")
    return InvarianceReport(cls, h1, h2, equal, details)


# ------------------------------------------------------------ random moves

def corner_fingers(t):
    """Creation moves pushing a finger across the corner at a stored point.

    For each iterate-0 point z and each of its four quadrants the new pair
    sits in the gaps next to z; the point adjacent to z in both orders gets
    the opposite crossing sign.
    """
    lines = {}
    for axis in ("u", "s"):
        for p in t.points:
            lines.setdefault((axis, _axis(p, axis) > 0), []).append(p)
    for (axis, _), pts in lines.items():
        pts.sort(key=lambda p: abs(_axis(p, axis)))
    out = []
    for z in t.points:
        if z.iterate != 0:
            continue
        before = {}
        for axis in ("u", "s"):
            line = lines[(axis, _axis(z, axis) > 0)]
            i = line.index(z)
            before[axis] = "x" if i == 0 else line[i - 1].name
        for u_side in ("after", "before"):
            for s_side in ("after", "before"):
                au = z.name if u_side == "after" else before["u"]
                as_ = z.name if s_side == "after" else before["s"]
                order = "same" if u_side == s_side else "reversed"
                sign = -z.sign if u_side == "after" else z.sign
                out.append(MoveSpec("create", z.pair, au, as_, sign, z.label, (), order))
    return out


def admissible(t, spec):
    """Apply a move if it keeps the tangle graded, csi and d^2 = 0."""
    try:
        out = apply_move(t, spec)
    except (MoveError, TangleInvalid):
        return None
    if t.scale is None and (spec.after_u == "x" or spec.after_s == "x"):
        return None
    try:
        g = resolve_grading(out)
        if not validate_grading(out, g).ok or not csi(out):
            return None
        c = quotient_boundary(out, "primary", "m")
        if square_defects(c):
            return None
    except Exception:
        return None
    return out


def random_moves(t, rng=None, kinds=("primary", "mixed", "secondary"), steps=1, attempts=200):
    """A random sequence of admissible creations and annihilations.

    Yields (spec, tangle_before, tangle_after).
    """
    rng = rng or random.Random(0)
    created = []
    for _ in range(steps):
        for _ in range(attempts):
            if created and rng.random() < 0.3:
                spec, before = created.pop()
                try:
                    after = apply_move(t, replace(spec, direction="annihilate"))
                except MoveError:
                    continue
                yield replace(spec, direction="annihilate"), t, after
                t = after
                break
            options = corner_fingers(t)
            if not options:
                return
            spec = rng.choice(options)
            after = admissible(t, spec)
            if after is None:
                continue
            if classify_move(t, after).kind not in kinds:
                continue
            created.append((spec, t))
            yield spec, t, after
            t = after
            break
        else:
            return


__all__ = [
    "MoveError", "TheoremViolation", "MoveSpec", "parse_move", "parse_script", "apply_move",
    "apply_script", "MoveClassification", "classify_move", "primary_move_maps", "MoveMaps",
    "invariance_check", "InvarianceReport", "corner_fingers", "random_moves", "admissible",
]
