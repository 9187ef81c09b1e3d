"""Sign systems and boundary matrices of the Floer complexes."""
from __future__ import annotations

from dataclasses import dataclass

from .grading import resolve_grading
from .homology import Laurent, homology_from_matrices
from .moduli import bigon_obstruction, interior_contains, BigonCertificate
from .tangle import classify_orbits, iterate, is_primary, semi_primary_orbits

ORIENTATIONS = ("u_plus", "u_minus", "s_plus", "s_minus")


class ChainError(Exception):
    pass


def _sign(v):
    return 1 if v > 0 else -1


def jump_sign(p, q):
    """+1 iff running from p to q along the shared branch follows its jump.

    Unstable branches jump away from the fixed point, stable ones toward it.
    When p and q share an unstable branch that branch decides.
    """
    if (p.t_u > 0) == (q.t_u > 0):
        return 1 if abs(q.t_u) > abs(p.t_u) else -1
    return 1 if abs(q.t_s) < abs(p.t_s) else -1


def orientation_sign(p, q, orient):
    if orient == "u_plus":
        return _sign(q.t_u - p.t_u)
    if orient == "u_minus":
        return -_sign(q.t_u - p.t_u)
    if orient == "s_plus":
        return _sign(q.t_s - p.t_s)
    if orient == "s_minus":
        return -_sign(q.t_s - p.t_s)
    raise ValueError(f"unknown orientation {orient!r}")


def m_sign(t, p, q, g=None):
    if g is None:
        g = resolve_grading(t)
    for r in (p, q):
        if not is_primary(t, r):
            raise ChainError(f"{r.name} is not primary")
    if bigon_obstruction(t, p, q, g) is not None:
        return 0
    return jump_sign(p, q)


def n_sign(t, p, q, orient="u_plus", g=None):
    if g is None:
        g = resolve_grading(t)
    if bigon_obstruction(t, p, q, g) is not None:
        return 0
    return orientation_sign(p, q, orient)


def nu_sign(t, n, p, q, g=None):
    """m-sign of the di-gon p -> q as a di-gon of the n-th power.

    Zero when a marked point fixed by the n-th power lies inside it.
    """
    if g is None:
        g = resolve_grading(t)
    if bigon_obstruction(t, p, q, g) is not None:
        return 0
    b = BigonCertificate(p, q, (), ())
    for m in t.marked:
        if n % m.period == 0 and interior_contains(t, b, m):
            return 0
    return jump_sign(p, q)


@dataclass
class ChainComplexData:
    variant: str
    generators: dict  # degree -> list of orbit names
    boundaries: dict  # degree k -> matrix C_k -> C_{k-1}, rows are C_{k-1}
    coefficient_ring: str = "Z"
    signs: str = "m"

    @property
    def dims(self):
        return {k: len(v) for k, v in self.generators.items()}

    def matrix(self, k):
        rows = self.generators.get(k - 1, [])
        cols = self.generators.get(k, [])
        return self.boundaries.get(k, [[0] * len(cols) for _ in rows])

    def homology(self):
        return homology_from_matrices(self.dims, {k: m for k, m in self.boundaries.items() if m and m[0]},
                                      self.coefficient_ring)

    def dump(self):
        lines = []
        for k in sorted(self.boundaries, reverse=True):
            rows, cols = self.generators.get(k - 1, []), self.generators.get(k, [])
            lines.append(f"deg {k}: rows={','.join(rows)} cols={','.join(cols)}")
            for row in self.boundaries[k]:
                lines.append("  " + " ".join(str(v) for v in row))
        return "\n".join(lines)


def generator_orbits(t, variant, g):
    kinds = classify_orbits(t)
    if variant in ("primary", "chaotic", "equivariant"):
        orbits = [o for o, k in kinds.items() if k == "primary"]
    elif variant == "semi_primary":
        orbits = [o for o in semi_primary_orbits(t) if t.rep(o).contractible]
    else:
        raise ValueError(f"unknown variant {variant!r}")
    missing = [o for o in orbits if g.get(o) is None]
    if missing:
        raise ChainError("ungraded generators: " + ", ".join(missing))
    return orbits


def raw_differential(t, variant="primary", signs="m", g=None, period_filter=None):
    """Equivariant differential: {(q_orbit, p_orbit): Laurent} plus generator degrees.

    The entry sums sign(p^0, q^k) T^k over the stored iterates q^k.
    """
    if g is None:
        g = resolve_grading(t)
    orbits = generator_orbits(t, variant, g)
    gens = set(orbits)
    degree = {o: g[o] for o in orbits}
    pool = {}
    for q in t.points:
        if q.orbit in gens:
            pool.setdefault(degree[q.orbit], []).append(q)
    fixed_marks = [m for m in t.marked if m.period == 1] if variant == "chaotic" else []
    entries = {}
    for o in orbits:
        p = t.rep(o)
        for q in pool.get(degree[o] - 1, []):
            if bigon_obstruction(t, p, q, g) is not None:
                continue
            if signs == "m":
                s = jump_sign(p, q)
            elif signs in ORIENTATIONS or signs == "n":
                s = orientation_sign(p, q, "u_plus" if signs == "n" else signs)
            else:
                raise ValueError(f"unknown sign system {signs!r}")
            if fixed_marks:
                b = BigonCertificate(p, q, (), ())
                if any(interior_contains(t, b, m) for m in fixed_marks):
                    continue
            key = (q.orbit, o)
            entries[key] = entries.get(key, Laurent()) + Laurent.monomial(s, q.iterate)
    return degree, entries


def _assemble(degree, entries, ring, value):
    gens = {}
    for o, d in degree.items():
        gens.setdefault(d, []).append(o)
    for d in gens:
        gens[d].sort()
    boundaries = {}
    for k, cols in gens.items():
        rows = gens.get(k - 1)
        if not rows:
            continue
        boundaries[k] = [[value(entries.get((r, c), Laurent())) for c in cols] for r in rows]
    return gens, boundaries


def quotient_boundary(t, variant="primary", signs="m", n=1, g=None):
    """Boundary matrices of the orbit complex.

    ``variant`` is primary, semi_primary or chaotic; for chaotic the complex is
    that of the n-th power with marked points of period dividing n excluded.
    """
    if variant == "chaotic" or n != 1:
        t = iterate(t, n) if n != 1 else t
        g = None
    if g is None:
        g = resolve_grading(t)
    degree, entries = raw_differential(t, variant, signs, g)
    ring = "Z"
    if signs != "m" and t.reversing:
        ring = "Z2"
    gens, boundaries = _assemble(degree, entries, ring, lambda lp: lp.at_one())
    return ChainComplexData(variant if variant != "chaotic" else f"chaotic({n})", gens, boundaries, ring, signs)


def equivariant_boundary(t, g=None, variant="primary"):
    if g is None:
        g = resolve_grading(t)
    degree, entries = raw_differential(t, variant, "m", g)
    gens, boundaries = _assemble(degree, entries, "LaurentQ", lambda lp: lp)
    return ChainComplexData("equivariant", gens, boundaries, "LaurentQ", "m")


def specialize(c):
    """Set T = 1 in an equivariant complex."""
    boundaries = {k: [[e.at_one() for e in row] for row in m] for k, m in c.boundaries.items()}
    return ChainComplexData("primary", c.generators, boundaries, "Z", c.signs)


def _matmul(A, B, zero):
    if not A or not B:
        return []
    out = []
    for row in A:
        new = []
        for j in range(len(B[0])):
            acc = zero
            for i, a in enumerate(row):
                if a and B[i][j]:
                    acc = acc + a * B[i][j]
            new.append(acc)
        out.append(new)
    return out


def square_defects(c):
    """Degrees k where d_{k-1} d_k is not zero."""
    zero = Laurent() if c.coefficient_ring == "LaurentQ" else 0
    bad = []
    for k in c.boundaries:
        if k - 1 in c.boundaries:
            prod = _matmul(c.boundaries[k - 1], c.boundaries[k], zero)
            if c.coefficient_ring == "Z2":
                nonzero = any(v % 2 for row in prod for v in row)
            else:
                nonzero = any(v for row in prod for v in row)
            if nonzero:
                bad.append(k)
    return bad


def homology(t, variant="primary", signs="m", n=1):
    c = quotient_boundary(t, variant, signs, n)
    bad = square_defects(c)
    if bad:
        raise ChainError(f"boundary does not square to zero in degrees {bad}")
    return c.homology()
