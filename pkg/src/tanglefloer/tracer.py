"""Numerical tracing of the stable and unstable manifolds of a saddle.

Each branch is grown level by level from a fundamental segment next to the
fixed point: level k is the k-th image of that segment, and the polyline is
kept adaptive by bisecting the segment parameter wherever a chord is too long
or the polyline turns too sharply.  Every vertex remembers (level, sigma), so
crossings can be refined on the smooth curves rather than on the chords.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .grading import GradingError, maslov_abs_geometric
from .tangle import Geometry, Point, Tangle, classify_orbits

SEED_DISTANCE = 1e-6
MATCH_TOL = 1e-6
MIN_CROSSING_ANGLE = 1e-8
MAX_REFINE_ROUNDS = 60
CHUNK = 256
BRANCHES = ("u+", "u-", "s+", "s-")


class TracerError(Exception):
    pass


@dataclass(frozen=True)
class MapHandle:
    name: str
    params: dict
    forward: object  # (..., 2) -> (..., 2)
    inverse: object
    jacobian: object  # (..., 2) -> (..., 2, 2)

    def inverse_jacobian(self, P):
        return np.linalg.inv(self.jacobian(self.inverse(P)))


def _cubic_pieces(tau):
    def f(x):
        return -tau * x ** 3 - (1 - tau) * x ** 2 + x

    def df(x):
        return -3 * tau * x ** 2 - 2 * (1 - tau) * x + 1

    return f, df


def henon_like(tau=0.0, eps=0.3):
    """(x, y) -> (x + y + eps f(x), y + eps f(x)), f(x) = -tau x^3 - (1-tau) x^2 + x."""
    f, df = _cubic_pieces(tau)

    def forward(P):
        x, y = P[..., 0], P[..., 1]
        fx = eps * f(x)
        return np.stack([x + y + fx, y + fx], axis=-1)

    def inverse(P):
        X, Y = P[..., 0], P[..., 1]
        x = X - Y
        return np.stack([x, Y - eps * f(x)], axis=-1)

    def jacobian(P):
        d = eps * df(P[..., 0])
        one = np.ones_like(d)
        return np.stack([np.stack([1 + d, one], -1), np.stack([d, one], -1)], -2)

    return MapHandle("henon", {"tau": tau, "eps": eps}, forward, inverse, jacobian)


def builtin_map(name, **params):
    if name not in ("henon", "henon_family"):
        raise TracerError(f"unknown map {name!r}")
    tau, eps = params.get("tau", 0.0), params.get("eps", 0.3)
    if not 0.0 <= tau <= 1.0:
        raise TracerError(f"tau must lie in [0, 1], got {tau}")
    if eps <= 0:
        raise TracerError(f"eps must be positive, got {eps}")
    return henon_like(tau, eps)


@dataclass(frozen=True)
class Saddle:
    point: np.ndarray
    unstable_value: float
    stable_value: float
    unstable_dir: np.ndarray
    stable_dir: np.ndarray

    @property
    def reversing(self):
        return self.unstable_value < 0


def _orient(v):
    v = v / np.hypot(*v)
    if v[0] < 0 or (v[0] == 0 and v[1] < 0):
        v = -v
    return v


def find_fixed_point(m, guess=(0.0, 0.0), tol=1e-13, max_iter=50):
    P = np.asarray(guess, dtype=float)
    for _ in range(max_iter):
        r = m.forward(P) - P
        if np.hypot(*r) < tol:
            break
        P = P - np.linalg.solve(m.jacobian(P) - np.eye(2), r)
    else:
        raise TracerError("Newton iteration for the fixed point did not converge")
    w, V = np.linalg.eig(m.jacobian(P))
    if np.iscomplexobj(w) and np.abs(w.imag).max() > 0:
        raise TracerError("fixed point is not a saddle (complex eigenvalues)")
    w, V = w.real, V.real
    i = int(np.argmax(np.abs(w)))
    if not (abs(w[i]) > 1 > abs(w[1 - i])):
        raise TracerError(f"fixed point is not a saddle (eigenvalues {w})")
    return Saddle(P, float(w[i]), float(w[1 - i]), _orient(V[:, i]), _orient(V[:, 1 - i]))


# -------------------------------------------------------------------- growth

@dataclass
class Branch:
    name: str  # "u+", "u-", "s+", "s-"
    seed: tuple  # (a, b) with b the image of a under the growing map
    vertices: np.ndarray  # (N, 2), vertex 0 is the fixed point
    levels: np.ndarray  # level of each vertex (-1 for the fixed point)
    sigmas: np.ndarray
    params: np.ndarray = None  # curvature-corrected arclength
    complete_levels: int = 0  # levels fully contained in the polyline


def _steps(m, which):
    if which == "u":
        return m.forward, m.jacobian
    return m.inverse, m.inverse_jacobian


def evaluate(m, branch, levels, sigmas, with_tangent=False):
    """Points (and d/dsigma) at the given (level, sigma) on a branch."""
    step, dstep = _steps(m, branch.name[0])
    a, b = branch.seed
    levels = np.asarray(levels)
    sigmas = np.asarray(sigmas, dtype=float)
    P = a + (b - a) * sigmas[:, None]
    V = np.broadcast_to(b - a, P.shape).copy()
    for k in range(int(levels.max(initial=0))):
        live = levels > k
        if not live.any():
            break
        if with_tangent:
            V[live] = np.einsum("nij,nj->ni", dstep(P[live]), V[live])
        P[live] = step(P[live])
    return (P, V) if with_tangent else P


def grow_branch(m, saddle, name, budget, max_chord=0.01, max_turn=0.2, seed_distance=SEED_DISTANCE):
    """Adaptive polyline of one branch, truncated at the arclength budget."""
    which, sign = name[0], (1.0 if name[1] == "+" else -1.0)
    step, _ = _steps(m, which)
    direction = saddle.unstable_dir if which == "u" else saddle.stable_dir
    a = saddle.point + sign * seed_distance * direction
    # a reversing map sends the + branch to the - branch; use the square
    b = step(a)
    if np.dot(b - saddle.point, direction) * sign < 0:
        raise TracerError("orientation-reversing branch: trace the square of the map")
    branch = Branch(name, (a, b), None, None, None)
    sig = np.linspace(0.0, 1.0, 5)
    P = evaluate(m, branch, np.zeros(len(sig), int), sig)
    verts, levs, sigs = [saddle.point[None, :]], [np.array([-1])], [np.array([0.0])]
    total, level = 0.0, 0
    while True:
        for _ in range(MAX_REFINE_ROUNDS):
            d = np.diff(P, axis=0)
            with np.errstate(invalid="ignore", over="ignore"):
                ln = np.hypot(d[:, 0], d[:, 1])
            ln[~np.isfinite(ln)] = np.inf
            # chords only grow under refinement, so cutting at the budget is safe
            beyond = int(np.searchsorted(np.cumsum(ln), budget - total, side="right"))
            if beyond + 2 < len(P):
                P, sig, d, ln = P[:beyond + 2], sig[:beyond + 2], d[:beyond + 1], ln[:beyond + 1]
            bad = ln > max_chord
            cr = d[:-1, 0] * d[1:, 1] - d[:-1, 1] * d[1:, 0]
            turn = np.abs(np.arctan2(cr, (d[:-1] * d[1:]).sum(1)))
            sharp = np.zeros_like(bad)
            sharp[1:] |= turn > max_turn
            sharp[:-1] |= turn > max_turn
            bad |= sharp & (ln > 1e-4 * max_chord) & (np.diff(sig) > 1e-14)
            if not bad.any():
                break
            idx = np.flatnonzero(bad)
            mid = 0.5 * (sig[idx] + sig[idx + 1])
            Pm = evaluate(m, branch, np.full(len(mid), level), mid)
            sig = np.insert(sig, idx + 1, mid)
            P = np.insert(P, idx + 1, Pm, axis=0)
        else:
            raise TracerError(f"refinement of {name} stalled at level {level}")
        # from level 1 on, sigma = 0 repeats the previous level's last vertex
        first = 0 if level == 0 else 1
        verts.append(P[first:])
        levs.append(np.full(len(sig) - first, level))
        sigs.append(sig[first:])
        total += ln.sum()
        if total >= budget:
            break
        P = step(P)
        level += 1
    V = np.vstack(verts)
    L = np.concatenate(levs)
    S = np.concatenate(sigs)
    seg = np.diff(V, axis=0)
    cum = np.concatenate([[0.0], np.cumsum(np.hypot(seg[:, 0], seg[:, 1]))])
    keep = int(np.searchsorted(cum, budget, side="right"))
    keep = min(max(keep, 2), len(V))
    branch.vertices, branch.levels, branch.sigmas = V[:keep], L[:keep], S[:keep]
    branch.complete_levels = int(L[keep - 1]) if keep < len(V) else level + 1
    branch.params = arclength_params(m, branch)
    return branch


def _segment_frames(branch):
    """Level and sigma interval of each chord (chord 0 joins the fixed point to the seed)."""
    lev = branch.levels[1:].copy()
    lo = np.where(branch.levels[:-1] == lev, branch.sigmas[:-1], 0.0)
    hi = branch.sigmas[1:].copy()
    return lev, lo, hi


def _simpson(m, branch, lev, lo, hi):
    """Arclength of the smooth curve over sigma in [lo, hi] at the given levels."""
    n = len(lev)
    if n == 0:
        return np.zeros(0)
    levels = np.concatenate([lev, lev, lev])
    sig = np.concatenate([lo, 0.5 * (lo + hi), hi])
    _, V = evaluate(m, branch, levels, sig, with_tangent=True)
    speed = np.hypot(V[:, 0], V[:, 1])
    return (hi - lo) / 6.0 * (speed[:n] + 4.0 * speed[n:2 * n] + speed[2 * n:])


def arclength_params(m, branch):
    lev, lo, hi = _segment_frames(branch)
    lengths = np.empty(len(lev))
    lengths[0] = np.hypot(*(branch.vertices[1] - branch.vertices[0]))
    lengths[1:] = _simpson(m, branch, lev[1:], lo[1:], hi[1:])
    return np.concatenate([[0.0], np.cumsum(lengths)])


# ----------------------------------------------------------------- crossings

@dataclass(frozen=True)
class Crossing:
    u_branch: str
    s_branch: str
    t_u: float  # signed
    t_s: float
    xy: tuple
    sign: int
    angle: float
    u_at: tuple = field(default=(0, 0.0), compare=False)  # (level, sigma) on the unstable branch
    s_at: tuple = field(default=(0, 0.0), compare=False)


def _orientation(a, b, c):
    return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])


def segment_crossings(U, S, band=0.0, skip_first=True):
    """Chord pairs (i, j) that may hold a crossing.

    Without a band this is the proper-crossing test, with a zero orientation
    counted as positive so a crossing through a shared vertex is reported
    once.  With a band, every pair whose chords come within the band is kept,
    because near-parallel curves can cross without their chords doing so.
    """
    A0, A1, B0, B1 = U[:-1], U[1:], S[:-1], S[1:]
    blo, bhi = np.minimum(B0, B1) - band, np.maximum(B0, B1) + band
    out = []
    for start in range(0, len(A0), CHUNK):
        a0, a1 = A0[start:start + CHUNK, None, :], A1[start:start + CHUNK, None, :]
        alo, ahi = np.minimum(a0, a1), np.maximum(a0, a1)
        near = np.all((alo <= bhi[None]) & (blo[None] <= ahi), axis=-1)
        ii, jj = np.nonzero(near)
        if not len(ii):
            continue
        a0, a1 = A0[start + ii], A1[start + ii]
        b0, b1 = B0[jj], B1[jj]
        o1, o2 = _orientation(a0, a1, b0), _orientation(a0, a1, b1)
        o3, o4 = _orientation(b0, b1, a0), _orientation(b0, b1, a1)
        hit = ((o1 >= 0) != (o2 >= 0)) & ((o3 >= 0) != (o4 >= 0))
        if band > 0:
            la = np.hypot(*(a1 - a0).T)
            lb = np.hypot(*(b1 - b0).T)
            close = (np.minimum(np.abs(o1), np.abs(o2)) <= band * la) | \
                    (np.minimum(np.abs(o3), np.abs(o4)) <= band * lb)
            hit |= close
        out.extend(zip((start + ii[hit]).tolist(), jj[hit].tolist()))
    if skip_first:
        out = [(i, j) for i, j in out if i > 0 and j > 0]
    return out


def _start_fractions(U, S, ii, jj):
    a0, a1, b0, b1 = U[ii], U[ii + 1], S[jj], S[jj + 1]
    da, db = a1 - a0, b1 - b0
    det = -da[:, 0] * db[:, 1] + da[:, 1] * db[:, 0]
    r = b0 - a0
    ok = np.abs(det) > 1e-14 * np.hypot(*da.T) * np.hypot(*db.T)
    safe = np.where(ok, det, 1.0)
    alpha = (-r[:, 0] * db[:, 1] + r[:, 1] * db[:, 0]) / safe
    beta = (da[:, 0] * r[:, 1] - da[:, 1] * r[:, 0]) / safe
    alpha = np.where(ok, np.clip(alpha, 0.0, 1.0), 0.5)
    # fall back to the foot of the chord midpoint
    foot = ((a0 + 0.5 * da - b0) * db).sum(1) / np.maximum((db * db).sum(1), 1e-300)
    beta = np.where(ok, np.clip(beta, 0.0, 1.0), np.clip(foot, 0.0, 1.0))
    return alpha, beta


def refine_crossings(m, ub, sb, pairs, tol=1e-13, max_iter=40):
    """Newton solve on the smooth curves, one start per chord pair.

    Returns the solutions that land inside their own chord pair, as arrays
    (i, j, level_u, sigma_u, level_s, sigma_s, point, tangent_u, tangent_s).
    """
    lev_u, lo_u, hi_u = _segment_frames(ub)
    lev_s, lo_s, hi_s = _segment_frames(sb)
    ii = np.array([i for i, _ in pairs], dtype=int)
    jj = np.array([j for _, j in pairs], dtype=int)
    alpha, beta = _start_fractions(ub.vertices, sb.vertices, ii, jj)
    Lu, Ls = lev_u[ii], lev_s[jj]
    wu, ws = hi_u[ii] - lo_u[ii], hi_s[jj] - lo_s[jj]
    su = lo_u[ii] + alpha * wu
    ss = lo_s[jj] + beta * ws
    # keep each solve within a few chord widths of its starting chord
    box_u = (lo_u[ii] - 2 * wu, hi_u[ii] + 2 * wu)
    box_s = (lo_s[jj] - 2 * ws, hi_s[jj] + 2 * ws)
    for _ in range(max_iter):
        Pu, Vu = evaluate(m, ub, Lu, su, with_tangent=True)
        Ps, Vs = evaluate(m, sb, Ls, ss, with_tangent=True)
        r = Pu - Ps
        res = np.abs(r).max(axis=1)
        if res.max(initial=0.0) < tol:
            break
        J = np.stack([Vu, -Vs], axis=-1)
        with np.errstate(all="ignore"):
            d = np.linalg.solve(J, -r[..., None])[..., 0]
        d[~np.isfinite(d)] = 0.0
        su = np.clip(su + d[:, 0], *box_u)
        ss = np.clip(ss + d[:, 1], *box_s)
    slack_u, slack_s = 1e-9 * wu, 1e-9 * ws
    inside = (res < 1e-10 * np.maximum(np.hypot(*Pu.T), 1.0)) \
        & (su >= lo_u[ii] - slack_u) & (su <= hi_u[ii] + slack_u) \
        & (ss >= lo_s[jj] - slack_s) & (ss <= hi_s[jj] + slack_s)
    k = np.flatnonzero(inside)
    return ii[k], jj[k], Lu[k], su[k], Ls[k], ss[k], Pu[k], Vu[k], Vs[k], lo_u[ii][k], lo_s[jj][k]


def _dedupe(P, tol=1e-9):
    keep = []
    for k in np.lexsort((P[:, 1], P[:, 0])):
        if all(np.hypot(*(P[k] - P[j])) > tol for j in keep[-8:]):
            keep.append(k)
    return np.array(sorted(keep), dtype=int)


def find_crossings(m, ub, sb, band=None, min_angle=MIN_CROSSING_ANGLE):
    """Transverse crossings of an unstable and a stable branch."""
    if band is None:
        band = _sag_band(ub, sb)
    pairs = segment_crossings(ub.vertices, sb.vertices, band)
    if not pairs:
        return []
    ii, jj, Lu, su, Ls, ss, P, Vu, Vs, lou, los = refine_crossings(m, ub, sb, pairs)
    if not len(ii):
        return []
    keep = _dedupe(P)
    ii, jj, Lu, su, Ls, ss, P, Vu, Vs, lou, los = (a[keep] for a in (ii, jj, Lu, su, Ls, ss, P, Vu, Vs, lou, los))
    tu = ub.params[ii] + _simpson(m, ub, Lu, lou, su)
    ts = sb.params[jj] + _simpson(m, sb, Ls, los, ss)
    cross = Vu[:, 0] * Vs[:, 1] - Vu[:, 1] * Vs[:, 0]
    norms = np.hypot(Vu[:, 0], Vu[:, 1]) * np.hypot(Vs[:, 0], Vs[:, 1])
    angle = np.abs(np.arcsin(np.clip(cross / norms, -1.0, 1.0)))
    su_sign = 1.0 if ub.name[1] == "+" else -1.0
    ss_sign = 1.0 if sb.name[1] == "+" else -1.0
    out = []
    for k in np.argsort(tu):
        if angle[k] < min_angle:
            raise TracerError(f"near-tangency between {ub.name} and {sb.name} at {P[k].tolist()} "
                              f"(angle {angle[k]:.1e} rad)")
        out.append(Crossing(ub.name, sb.name, su_sign * float(tu[k]), ss_sign * float(ts[k]),
                            (float(P[k, 0]), float(P[k, 1])), 1 if cross[k] * su_sign * ss_sign > 0 else -1,
                            float(angle[k]), (int(Lu[k]), float(su[k])), (int(Ls[k]), float(ss[k]))))
    return out


def _sag_band(ub, sb):
    """How far a chord can stray from its curve: L^2 kappa / 8 with kappa <= turn / L."""
    longest = max(np.hypot(*np.diff(b.vertices, axis=0).T).max(initial=0.0) for b in (ub, sb))
    return 4.0 * longest * 0.2 / 8.0


# -------------------------------------------------------------------- orbits

PAIR_TAGS = {"u+s+": "a", "u+s-": "b", "u-s+": "c", "u-s-": "d"}


def _inside(branch, level, sigma):
    """Is (level, sigma) within the traced part of the branch?"""
    return (level, sigma) < (int(branch.levels[-1]), float(branch.sigmas[-1])) and (level, sigma) > (0, 0.0)


def _chains(m, crossings, branches):
    xy = np.array([c.xy for c in crossings])
    image = m.forward(xy)
    succ = {}
    for k, z in enumerate(image):
        dist = np.hypot(*(xy - z).T)
        j = int(np.argmin(dist))
        if dist[j] < MATCH_TOL:
            succ[k] = j
            continue
        c = crossings[k]
        (lu, su), (ls, ss) = c.u_at, c.s_at
        if _inside(branches[c.u_branch], lu + 1, su) and _inside(branches[c.s_branch], ls - 1, ss):
            raise TracerError(f"unmatched forward image of the crossing at {c.xy} (nearest {dist[j]:.1e})")
    heads = set(range(len(crossings))) - set(succ.values())
    chains = []
    for h in sorted(heads):
        chain, k = [h], h
        while k in succ and len(chain) <= len(crossings):
            k = succ[k]
            chain.append(k)
        chains.append(chain)
    return chains


def _centre(crossings, chain):
    balance = [abs(math.log(abs(crossings[k].t_u)) - math.log(abs(crossings[k].t_s))) for k in chain]
    return int(np.argmin(balance))


@dataclass
class TraceResult:
    tangle: Tangle
    saddle: Saddle
    branches: dict
    crossings: list
    dropped: int = 0  # chains too short for the window


def extract_tangle(m, saddle, branches, window=2, crossings=None, min_angle=MIN_CROSSING_ANGLE):
    """Assemble a geometric tangle from traced branches."""
    if crossings is None:
        crossings = []
        for u in ("u+", "u-"):
            for s in ("s+", "s-"):
                if u in branches and s in branches:
                    crossings.extend(find_crossings(m, branches[u], branches[s], min_angle=min_angle))
    chains = _chains(m, crossings, branches) if crossings else []
    orbits, dropped = [], 0
    for chain in chains:
        c = _centre(crossings, chain)
        if c < window or len(chain) - 1 - c < window:
            dropped += 1
            continue
        orbits.append((chain, c))
    orbits.sort(key=lambda oc: (PAIR_TAGS[crossings[oc[0][oc[1]]].u_branch + crossings[oc[0][oc[1]]].s_branch],
                                abs(crossings[oc[0][oc[1]]].t_u)))
    counters, points = {}, []
    for chain, c in orbits:
        rep = crossings[chain[c]]
        tag = PAIR_TAGS[rep.u_branch + rep.s_branch]
        name = f"{tag}{counters.setdefault(tag, 0)}"
        counters[tag] += 1
        for pos, k in enumerate(chain):
            x = crossings[k]
            points.append(Point(name, pos - c, x.t_u, x.t_s, x.sign))
    geometry = Geometry(tuple((name, _with_crossings(m, b, crossings)) for name, b in sorted(branches.items())))
    vu, vs = saddle.unstable_dir, saddle.stable_dir
    sigma01 = 1 if vu[0] * vs[1] - vu[1] * vs[0] > 0 else -1
    t = Tangle("plane", False, window, (), (), geometry, sigma01)
    t = t.with_points(points)
    t = _attach_grades(t)
    return TraceResult(t, saddle, branches, crossings, dropped)


TANGENT_STEP = 1e-8


def _with_crossings(m, branch, crossings):
    """Polyline vertices (x, y, t) with every crossing and two close neighbours inserted.

    The neighbours pin the chord directions at a crossing to the true tangent,
    which the corner rule of the grading needs when the crossing angle is tiny.
    """
    axis = branch.name[0]
    extra_lev, extra_sig, extra_t = [], [], []
    for c in crossings:
        if (c.u_branch if axis == "u" else c.s_branch) != branch.name:
            continue
        level, sigma = c.u_at if axis == "u" else c.s_at
        t = abs(c.t_u if axis == "u" else c.t_s)
        _, V = evaluate(m, branch, np.array([level]), np.array([sigma]), with_tangent=True)
        dsig = TANGENT_STEP / np.hypot(*V[0])
        k = int(np.searchsorted(branch.params, t))
        lo = branch.params[k - 1] if k > 0 else -np.inf
        hi = branch.params[k] if k < len(branch.params) else np.inf
        for off in (-1, 0, 1):
            tt = t + off * TANGENT_STEP
            if lo < tt < hi:
                extra_lev.append(level)
                extra_sig.append(sigma + off * dsig)
                extra_t.append(tt)
    verts, params = branch.vertices, branch.params
    if extra_t:
        P = evaluate(m, branch, np.array(extra_lev), np.array(extra_sig))
        verts = np.vstack([verts, P])
        params = np.concatenate([params, extra_t])
        order = np.argsort(params, kind="stable")
        verts, params = verts[order], params[order]
    return tuple((float(v[0]), float(v[1]), float(t)) for v, t in zip(verts, params))


def _attach_grades(t):
    kinds = classify_orbits(t)
    mu = {}
    for o, kind in kinds.items():
        if kind == "primary":
            try:
                mu[o] = maslov_abs_geometric(t, t.rep(o))
            except GradingError as exc:
                raise TracerError(f"cannot grade {o}: {exc}") from exc
    return t.with_points([Point(p.orbit, p.iterate, p.t_u, p.t_s, p.sign, p.a_u, p.a_s, mu.get(p.orbit))
                          for p in t.points])


def trace(m, budget=3.3, max_chord=0.01, max_turn=0.2, window=2, guess=(0.0, 0.0), branches=BRANCHES,
          min_angle=MIN_CROSSING_ANGLE):
    saddle = find_fixed_point(m, guess)
    if saddle.reversing:
        raise TracerError("orientation-reversing saddle: trace the square of the map")
    workers = max(1, int(os.environ.get("TANGLEFLOER_THREADS", "1")))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {b: pool.submit(grow_branch, m, saddle, b, budget, max_chord, max_turn) for b in branches}
        grown = {b: f.result() for b, f in futures.items()}
    return extract_tangle(m, saddle, grown, window, min_angle=min_angle)
