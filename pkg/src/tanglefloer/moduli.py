"""Di-gons, hearts, gluing and cutting, decided from the two orders.

A di-gon from p to q exists iff the grades drop by one, the fixed point is
not between p and q in both orders, and no point on the same deck translate
as p lies strictly between them in both orders.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grading import branch_prefix, cumulative_length, resolve_grading
from .tangle import Point, between_both, x_between_both

ON_LOOP_TOL = 1e-9


class ModuliError(Exception):
    pass


def fixed_point(t):
    """The fixed point as a pseudo point with zero parameters and grade 0."""
    zero = tuple([0] * t.h_rank)
    return Point("x", 0, 0.0, 0.0, 0, zero, zero, mu=0)


def is_fixed(p):
    return p.t_u == 0.0 and p.t_s == 0.0


# ------------------------------------------------------------------- winding

def winding_index(loop, z):
    """Signed winding number of a closed polyline around z."""
    pts = np.asarray(loop, dtype=float)
    if len(pts) and np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    if len(pts) < 2:
        raise ModuliError("loop needs at least two vertices")
    z = np.asarray(z, dtype=float)
    a = pts - z
    b = np.roll(pts, -1, axis=0) - z
    seg = b - a
    # distance from z to each edge
    t = np.clip(-(a * seg).sum(1) / np.maximum((seg * seg).sum(1), 1e-300), 0.0, 1.0)
    closest = a + t[:, None] * seg
    if np.hypot(closest[:, 0], closest[:, 1]).min() <= ON_LOOP_TOL:
        raise ModuliError("point lies on the loop")
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    dot = (a * b).sum(1)
    total = np.arctan2(cross, dot).sum()
    return int(round(total / (2 * math.pi)))


# ------------------------------------------------------------------- di-gons

@dataclass(frozen=True)
class BigonCertificate:
    source: Point
    target: Point
    u_span: tuple
    s_span: tuple
    blocked_by: tuple = ()


@dataclass(frozen=True)
class HeartCertificate:
    source: Point
    target: Point
    concave_vertex: str  # "at_p" or "at_r"
    shape: str  # "b" (concave at p) or "c" (concave at r)
    middle: Point
    middle_kind: str  # which cutting point the middle is: "u" or "s"
    globally_injective: bool = True


def _grade(g, p):
    if is_fixed(p):
        return 0
    if p.mu is not None:
        return p.mu
    return g.get(p.orbit) if g is not None else None


def bigon_obstruction(t, p, q, g=None):
    """Why there is no di-gon from p to q, or None if there is one."""
    if p.label != q.label and not (is_fixed(p) or is_fixed(q)):
        return "endpoints on different deck translates"
    mp, mq = _grade(g, p), _grade(g, q)
    if mp is None or mq is None:
        return "ungraded endpoint"
    if mp - mq != 1:
        return f"index difference {mp - mq}"
    ref = q if is_fixed(p) else p
    if not any(ref.label) and x_between_both((p.t_u, p.t_s), (q.t_u, q.t_s)):
        return "fixed point between in both orders"
    mask = between_both(t, (p.t_u, p.t_s), (q.t_u, q.t_s), label=ref.label)
    if mask.any():
        names = ", ".join(t.points[i].name for i in np.flatnonzero(mask)[:4])
        return f"blocked by {names}"
    return None


def bigon(t, p, q, g=None):
    if g is None:
        g = resolve_grading(t)
    if bigon_obstruction(t, p, q, g) is not None:
        return None
    return BigonCertificate(p, q, tuple(sorted((p.t_u, q.t_u))), tuple(sorted((p.t_s, q.t_s))))


def bigons_from(t, p, g=None, targets=None):
    """All di-gons starting at p among the stored points (and the fixed point)."""
    if g is None:
        g = resolve_grading(t)
    pool = t.points if targets is None else targets
    out = []
    mp = _grade(g, p)
    if mp is None:
        return out
    for q in pool:
        if _grade(g, q) == mp - 1 and bigon_obstruction(t, p, q, g) is None:
            out.append(BigonCertificate(p, q, tuple(sorted((p.t_u, q.t_u))), tuple(sorted((p.t_s, q.t_s)))))
    return out


# ------------------------------------------------------------------ gluing

def _between(a, b, c):
    """Is b strictly between a and c (scalars)?"""
    return min(a, c) < b < max(a, c)


def glue(t, b1, b2, g=None):
    p, q = b1.source, b1.target
    if b2.source != q:
        raise ModuliError(f"cannot glue: {q.name} is not the start of the second di-gon")
    r = b2.target
    if g is None:
        g = resolve_grading(t)
    if _grade(g, p) - _grade(g, q) != 1 or _grade(g, q) - _grade(g, r) != 1:
        raise ModuliError("gluing needs two index-one di-gons")
    for vertex, other, name in ((p, r, "at_p"), (r, p, "at_r")):
        if _between(other.t_u, vertex.t_u, q.t_u) and _between(other.t_s, q.t_s, vertex.t_s):
            kind = "u"
        elif _between(other.t_s, vertex.t_s, q.t_s) and _between(other.t_u, q.t_u, vertex.t_u):
            kind = "s"
        else:
            continue
        return HeartCertificate(p, r, name, "b" if name == "at_p" else "c", q, kind,
                                globally_injective=not is_fixed(q))
    raise ModuliError(f"di-gons {p.name}->{q.name}->{r.name} do not glue to a heart")


def heart(t, p, r, g=None):
    if g is None:
        g = resolve_grading(t)
    mp, mr = _grade(g, p), _grade(g, r)
    if mp is None or mr is None or mp - mr != 2:
        return None
    candidates = list(t.points)
    if not any(p.label):
        candidates.append(fixed_point(t))
    for b1 in bigons_from(t, p, g, candidates):
        b2 = bigon(t, b1.target, r, g)
        if b2 is None:
            continue
        h = glue(t, b1, b2, g)
        # a heart cut at the fixed point is not globally injective
        try:
            cuts = cut(t, h)
        except ModuliError:
            return h  # cutting points beyond the window; keep the gluing verdict
        return HeartCertificate(h.source, h.target, h.concave_vertex, h.shape, h.middle, h.middle_kind,
                                globally_injective=not any(is_fixed(c) for c in cuts))
    return None


def cut(t, h):
    """Cutting points (q_u, q_s) of a heart.

    From the concave vertex, follow the unstable manifold away from the other
    vertex; q_u is the first point on the same deck translate that lies
    strictly between the two vertices on the stable manifold.  q_s likewise
    with the roles swapped.
    """
    concave, other = (h.source, h.target) if h.concave_vertex == "at_p" else (h.target, h.source)
    pool = list(t.points)
    if not any(concave.label):
        pool.append(fixed_point(t))
    found = []
    for axis in ("u", "s"):
        along = (lambda r: r.t_u) if axis == "u" else (lambda r: r.t_s)
        across = (lambda r: r.t_s) if axis == "u" else (lambda r: r.t_u)
        direction = 1.0 if along(concave) > along(other) else -1.0
        best = None
        for r in pool:
            if r == concave or r == other:
                continue
            if not is_fixed(r) and r.label != concave.label:
                continue
            ahead = (along(r) - along(concave)) * direction
            if ahead <= 0:
                continue
            if not _between(across(other), across(r), across(concave)):
                continue
            if best is None or ahead < best[0]:
                best = (ahead, r)
        if best is None:
            raise ModuliError(f"window too small: no {axis}-cutting point for the heart at {concave.name}")
        found.append(best[1])
    return tuple(found)


# ------------------------------------------------------------ marked points

def bigon_loop(t, b, samples=None):
    """Closed boundary polyline of a di-gon: [p,q] on W^u then back on W^s."""
    if t.geometry is None:
        raise ModuliError("no geometry attached")
    u = _segment(t, "u", b.source.t_u, b.target.t_u)
    s = _segment(t, "s", b.target.t_s, b.source.t_s)
    return np.vstack([u, s[1:]])


def _segment(t, axis, a, c):
    """Polyline of the manifold between signed parameters a and c, from a to c."""
    geo = t.geometry

    def half(v):
        branch = axis + ("+" if v > 0 else "-")
        return branch_prefix(geo.polyline(branch), abs(v), geo.params(branch))

    if a == 0:
        return half(c)
    if c == 0:
        return half(a)[::-1]
    if (a > 0) != (c > 0):
        return np.vstack([half(a)[::-1], half(c)[1:]])
    near, far = (a, c) if abs(a) < abs(c) else (c, a)
    branch = axis + ("+" if far > 0 else "-")
    line = geo.polyline(branch)
    cum = cumulative_length(line, geo.params(branch))
    inner = (cum > abs(near)) & (cum < abs(far))
    path = np.vstack([half(near)[-1:], line[inner], half(far)[-1:]])
    return path if abs(a) < abs(c) else path[::-1]


def interior_contains(t, b, m):
    if m.table:
        return m.in_table(b.source.key, b.target.key)
    if m.coords is not None and t.geometry is not None:
        return winding_index(bigon_loop(t, b), m.coords) >= 1
    raise ModuliError(f"no containment information for {m.name}")
