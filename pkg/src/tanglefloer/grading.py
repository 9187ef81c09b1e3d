"""Maslov grading of homoclinic points.

The geometric grade of p is the rotation, in half turns, of the tangent line
along the loop that runs from p to the fixed point on the unstable manifold and
back on the stable one.  At the fixed point the line turns counterclockwise
from the unstable to the stable direction, at p it turns clockwise back.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tangle import classify_orbits

SNAP_TOL = 1e-6


class GradingError(Exception):
    pass


@dataclass(frozen=True)
class GradingTable:
    mu: dict
    source: str  # "supplied" or "geometric"

    def __getitem__(self, orbit):
        return self.mu[orbit]

    def get(self, orbit, default=None):
        return self.mu.get(orbit, default)

    def of(self, p):
        return self.mu.get(p.orbit)


def cumulative_length(polyline, params=None):
    if params is not None:
        return np.asarray(params, dtype=float)
    seg = np.diff(polyline, axis=0)
    return np.concatenate([[0.0], np.cumsum(np.hypot(seg[:, 0], seg[:, 1]))])


def branch_prefix(polyline, length, params=None):
    """Vertices of a polyline from its start up to the given parameter.

    The parameter is arclength unless explicit vertex parameters are given.
    """
    seg = np.diff(polyline, axis=0)
    cum = cumulative_length(polyline, params)
    if length > cum[-1] + 1e-12:
        raise GradingError(f"arclength {length} beyond polyline end {cum[-1]}")
    k = int(np.searchsorted(cum, length, side="right")) - 1
    k = min(k, len(seg) - 1)
    frac = (length - cum[k]) / (cum[k + 1] - cum[k])
    end = polyline[k] + frac * seg[k]
    out = np.vstack([polyline[: k + 1], end[None, :]])
    if np.hypot(*(out[-1] - out[-2])) < 1e-15:
        out = out[:-1]
    return out


def point_xy(geometry, t, which):
    branch = ("u" if which == "u" else "s") + ("+" if t > 0 else "-")
    line = geometry.polyline(branch)
    if line is None:
        raise GradingError(f"no polyline for branch {branch}")
    return branch_prefix(line, abs(t), geometry.params(branch))[-1]


def _turning(path):
    d = np.diff(path, axis=0)
    keep = np.hypot(d[:, 0], d[:, 1]) > 0
    d = d[keep]
    if len(d) == 0:
        raise GradingError("degenerate polyline")
    cross = d[:-1, 0] * d[1:, 1] - d[:-1, 1] * d[1:, 0]
    dot = (d[:-1] * d[1:]).sum(axis=1)
    return d[0], d[-1], float(np.arctan2(cross, dot).sum())


def _angle(v):
    return math.atan2(v[1], v[0])


def line_rotation_index(u_path, s_path):
    """Maslov index of the loop u_path (p to x) followed by s_path (x to p)."""
    du0, du1, turn_u = _turning(u_path)
    ds0, ds1, turn_s = _turning(s_path)
    theta0 = _angle(du0)
    theta = theta0 + turn_u
    theta += (_angle(ds0) - theta) % math.pi  # counterclockwise at x
    theta += turn_s
    theta -= (theta - theta0) % math.pi  # clockwise at p
    value = (theta - theta0) / math.pi
    k = round(value)
    if abs(value - k) > SNAP_TOL:
        raise GradingError(f"rotation {value} does not snap to an integer")
    return int(k)


def maslov_abs_geometric(t, p):
    if t.geometry is None:
        raise GradingError("tangle has no geometry")
    if isinstance(p, tuple):
        p = t.point(p)
    ub, sb = ("u+" if p.t_u > 0 else "u-"), ("s+" if p.t_s > 0 else "s-")
    u_line, s_line = t.geometry.polyline(ub), t.geometry.polyline(sb)
    if u_line is None or s_line is None:
        raise GradingError(f"missing polyline for {p.name}")
    u_path = branch_prefix(u_line, abs(p.t_u), t.geometry.params(ub))[::-1]
    s_path = branch_prefix(s_line, abs(p.t_s), t.geometry.params(sb))
    return line_rotation_index(u_path, s_path)


def supplied_grading(t):
    mu = {}
    for p in t.points:
        if p.mu is not None:
            mu.setdefault(p.orbit, p.mu)
    return mu


def geometric_grading(t, orbits=None):
    if orbits is None:
        orbits = [o for o, kind in classify_orbits(t).items() if kind == "primary"]
    return {o: maslov_abs_geometric(t, t.rep(o)) for o in orbits}


def resolve_grading(t):
    supplied = supplied_grading(t)
    if t.geometry is not None:
        geometric = geometric_grading(t)
        clash = sorted(o for o in geometric if o in supplied and supplied[o] != geometric[o])
        if clash:
            raise GradingError("supplied and geometric grades disagree at " + ", ".join(
                f"{o} ({supplied[o]} vs {geometric[o]})" for o in clash))
        if not supplied:
            return GradingTable(geometric, "geometric")
        merged = dict(supplied)
        merged.update(geometric)
        return GradingTable(merged, "supplied")
    if supplied or not t.points:
        return GradingTable(supplied, "supplied")
    raise GradingError("tangle carries neither grades nor geometry")


def relative_index(g, p, q):
    return g.of(p) - g.of(q)


@dataclass
class GradingReport:
    alternation: list = field(default_factory=list)
    invariance: list = field(default_factory=list)
    range: list = field(default_factory=list)
    balance: list = field(default_factory=list)

    @property
    def ok(self):
        return not (self.alternation or self.invariance or self.range or self.balance)

    def findings(self):
        return self.alternation + self.invariance + self.range + self.balance


def validate_grading(t, g):
    report = GradingReport()
    primary = {o for o, kind in classify_orbits(t).items() if kind == "primary"}
    for o in sorted(primary):
        m = g.get(o)
        if m is None:
            report.range.append(f"{o}: primary orbit without grade")
        elif m not in (-3, -2, -1, 1, 2, 3):
            report.range.append(f"{o}: grade {m} outside +-1, +-2, +-3")
    for p in t.points:
        if p.mu is not None and g.get(p.orbit) is not None and p.mu != g[p.orbit]:
            report.invariance.append(f"{p.name}: grade {p.mu} differs from orbit grade {g[p.orbit]}")
    # along each branch pair, consecutive primary points alternate by +1, -1
    by_pair = {}
    for p in t.points:
        if p.orbit in primary and g.get(p.orbit) is not None:
            by_pair.setdefault(p.pair, []).append(p)
    for pair, pts in sorted(by_pair.items()):
        # near the window edges some orbits are cut off; check the common span
        span = {}
        for r in pts:
            lo, hi = span.get(r.orbit, (math.inf, 0.0))
            span[r.orbit] = (min(lo, abs(r.t_u)), max(hi, abs(r.t_u)))
        lo = max(v[0] for v in span.values())
        hi = min(v[1] for v in span.values())
        pts = sorted((r for r in pts if lo <= abs(r.t_u) <= hi), key=lambda r: abs(r.t_u))
        steps = [g[b.orbit] - g[a.orbit] for a, b in zip(pts, pts[1:])]
        for i, d in enumerate(steps):
            if abs(d) != 1:
                report.alternation.append(f"{pair}: {pts[i].name} -> {pts[i + 1].name} jumps by {d}")
            elif i and d == steps[i - 1]:
                report.alternation.append(f"{pair}: two consecutive jumps of {d:+d} ending at {pts[i + 1].name}")
    counts = {}
    for o in primary:
        if g.get(o) is not None:
            counts[g[o]] = counts.get(g[o], 0) + 1
    for s in (1, -1):
        c1, c2, c3 = (counts.get(s * k, 0) for k in (1, 2, 3))
        if c2 != c1 + c3:
            report.balance.append(f"rank balance fails in sign {s:+d}: {c2} != {c1} + {c3}")
    return report
