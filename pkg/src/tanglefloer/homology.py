"""Exact homology of the Floer complexes.

Integer Smith normal form, ranks over Z/2, and Smith form over Q[T] for the
equivariant complex, whose entries are Laurent polynomials in T.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


# ---------------------------------------------------------------- integer SNF

def _copy(A):
    return [list(row) for row in A]


def _identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


@dataclass
class SNFResult:
    U: list
    D: list
    V: list

    @property
    def diagonal(self):
        return [self.D[i][i] for i in range(min(len(self.D), len(self.D[0]) if self.D else 0))]

    @property
    def invariant_factors(self):
        return [d for d in self.diagonal if d != 0]


def smith_normal_form(A):
    """Return U, D, V with U*A*V = D, U and V unimodular, D diagonal.

    The nonzero diagonal entries are positive and each divides the next.
    Pivots are chosen by smallest absolute value.
    """
    D = _copy(A)
    m = len(D)
    n = len(D[0]) if m else 0
    U, V = _identity(m), _identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, c):  # row dst += c * row src
        D[dst] = [a + c * b for a, b in zip(D[dst], D[src])]
        U[dst] = [a + c * b for a, b in zip(U[dst], U[src])]

    def add_col(src, dst, c):
        for row in D:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]

    for t in range(min(m, n)):
        while True:
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    if D[i][j] and (best is None or abs(D[i][j]) < abs(D[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                return SNFResult(U, D, V)
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            p = D[t][t]
            dirty = False
            for i in range(t + 1, m):
                q = D[i][t] // p
                if q:
                    add_row(t, i, -q)
                dirty |= D[i][t] != 0
            for j in range(t + 1, n):
                q = D[t][j] // p
                if q:
                    add_col(t, j, -q)
                dirty |= D[t][j] != 0
            if dirty:
                continue
            # divisibility: fold a bad row into row t and go again
            bad = next((i for i in range(t + 1, m) for j in range(t + 1, n) if D[i][j] % p), None)
            if bad is None:
                break
            add_row(bad, t, 1)
        if D[t][t] < 0:
            D[t] = [-a for a in D[t]]
            U[t] = [-a for a in U[t]]
    return SNFResult(U, D, V)


def rank_mod2(A):
    rows = [[a % 2 for a in row] for row in A]
    rank, ncols = 0, len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][c]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][c]:
                rows[r] = [(a + b) % 2 for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


# ------------------------------------------------------------ polynomial rings

class Laurent:
    """Integer Laurent polynomial in T, stored as {exponent: coefficient}."""

    __slots__ = ("c",)

    def __init__(self, coeffs=None):
        self.c = {e: v for e, v in (coeffs or {}).items() if v}

    @classmethod
    def monomial(cls, coeff, exp=0):
        return cls({exp: coeff})

    def __add__(self, other):
        out = dict(self.c)
        for e, v in other.c.items():
            out[e] = out.get(e, 0) + v
        return Laurent(out)

    def __neg__(self):
        return Laurent({e: -v for e, v in self.c.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return Laurent({e: v * other for e, v in self.c.items()})
        out = {}
        for e1, v1 in self.c.items():
            for e2, v2 in other.c.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + v1 * v2
        return Laurent(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, int):
            other = Laurent({0: other})
        return isinstance(other, Laurent) and self.c == other.c

    def __hash__(self):
        return hash(tuple(sorted(self.c.items())))

    def __bool__(self):
        return bool(self.c)

    def at_one(self):
        return sum(self.c.values())

    def shift(self, k):
        return Laurent({e + k: v for e, v in self.c.items()})

    def __repr__(self):
        return f"Laurent({self})"

    def __str__(self):
        if not self.c:
            return "0"
        terms = []
        for e in sorted(self.c):
            v = self.c[e]
            terms.append(f"{v}" if e == 0 else f"{v}*T^{e}")
        return " + ".join(terms).replace("+ -", "- ")


class Poly:
    """Polynomial over Q, coefficients low to high, trailing zeros stripped."""

    __slots__ = ("c",)

    def __init__(self, coeffs=()):
        c = [Fraction(v) for v in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.c = tuple(c)

    @classmethod
    def from_laurent(cls, lp, shift=0):
        if not lp.c:
            return cls()
        lo = min(lp.c) + shift
        if lo < 0:
            raise ValueError("negative exponent after shift")
        top = max(lp.c) + shift
        coeffs = [0] * (top + 1)
        for e, v in lp.c.items():
            coeffs[e + shift] = v
        return cls(coeffs)

    @property
    def degree(self):
        return len(self.c) - 1

    def __bool__(self):
        return bool(self.c)

    def __add__(self, o):
        n = max(len(self.c), len(o.c))
        a = self.c + (0,) * (n - len(self.c))
        b = o.c + (0,) * (n - len(o.c))
        return Poly([x + y for x, y in zip(a, b)])

    def __neg__(self):
        return Poly([-x for x in self.c])

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o):
        if not self.c or not o.c:
            return Poly()
        out = [Fraction(0)] * (len(self.c) + len(o.c) - 1)
        for i, a in enumerate(self.c):
            for j, b in enumerate(o.c):
                out[i + j] += a * b
        return Poly(out)

    def __eq__(self, o):
        return isinstance(o, Poly) and self.c == o.c

    def __hash__(self):
        return hash(self.c)

    def divmod(self, o):
        if not o.c:
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.c)
        q = [Fraction(0)] * max(len(r) - len(o.c) + 1, 1)
        lead = o.c[-1]
        while len(r) >= len(o.c) and any(r):
            k = len(r) - len(o.c)
            f = r[-1] / lead
            q[k] = f
            for i, b in enumerate(o.c):
                r[i + k] -= f * b
            while r and r[-1] == 0:
                r.pop()
        return Poly(q), Poly(r)

    def monic(self):
        if not self.c:
            return self
        lead = self.c[-1]
        return Poly([x / lead for x in self.c])

    def strip_t(self):
        """Divide out powers of T, which are units among Laurent polynomials."""
        c = list(self.c)
        while c and c[0] == 0:
            c.pop(0)
        return Poly(c)

    def is_unit(self):
        return self.degree == 0

    def __str__(self):
        if not self.c:
            return "0"
        terms = []
        for e in range(len(self.c) - 1, -1, -1):
            v = self.c[e]
            if v == 0:
                continue
            mag = abs(v)
            coef = str(mag.numerator) if mag.denominator == 1 else str(mag)
            if e == 0:
                body = coef
            else:
                body = ("" if mag == 1 else coef + "*") + ("T" if e == 1 else f"T^{e}")
            terms.append(("-" if v < 0 else "+", body))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out

    __repr__ = __str__


def poly_smith_diagonal(A):
    """Invariant factors (monic, T-free) of a matrix over Q[T]; unit factors dropped."""
    D = [list(row) for row in A]
    m = len(D)
    n = len(D[0]) if m else 0
    factors = []
    for t in range(min(m, n)):
        while True:
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    if D[i][j] and (best is None or D[i][j].degree < D[best[0]][best[1]].degree):
                        best = (i, j)
            if best is None:
                return factors
            i0, j0 = best
            D[t], D[i0] = D[i0], D[t]
            for row in D:
                row[t], row[j0] = row[j0], row[t]
            p = D[t][t]
            dirty = False
            for i in range(t + 1, m):
                if D[i][t]:
                    q, _ = D[i][t].divmod(p)
                    D[i] = [a - q * b for a, b in zip(D[i], D[t])]
                    dirty |= bool(D[i][t])
            for j in range(t + 1, n):
                if D[t][j]:
                    q, _ = D[t][j].divmod(p)
                    for row in D:
                        row[j] = row[j] - q * row[t]
                    dirty |= bool(D[t][j])
            if dirty:
                continue
            bad = next((i for i in range(t + 1, m) for j in range(t + 1, n)
                        if D[i][j] and D[i][j].divmod(p)[1]), None)
            if bad is None:
                break
            D[t] = [a + b for a, b in zip(D[t], D[bad])]
        factors.append(D[t][t].monic().strip_t())
    return factors


# ------------------------------------------------------------------ groups

@dataclass(frozen=True)
class AbelianGroup:
    free_rank: int = 0
    torsion: tuple = ()

    def __str__(self):
        parts = []
        if self.free_rank:
            parts.append("Z" if self.free_rank == 1 else f"Z^{self.free_rank}")
        parts.extend(f"Z/{d}" for d in self.torsion)
        return " + ".join(parts) if parts else "0"

    @property
    def is_zero(self):
        return not self.free_rank and not self.torsion


@dataclass(frozen=True)
class LaurentModule:
    """Finitely generated module over Q[T, 1/T]: free part plus cyclic torsion."""

    free_rank: int = 0
    torsion: tuple = ()

    def __str__(self):
        parts = []
        if self.free_rank:
            parts.append("L" if self.free_rank == 1 else f"L^{self.free_rank}")
        parts.extend(f"L/({d})" for d in self.torsion)
        return " + ".join(parts) if parts else "0"

    @property
    def is_zero(self):
        return not self.free_rank and not self.torsion


def _shape(M):
    return len(M), (len(M[0]) if M else 0)


def integer_rank(M):
    if not M or not M[0]:
        return 0
    return len(smith_normal_form(M).invariant_factors)


def homology_from_matrices(dims, boundaries, ring="Z"):
    """Homology of a graded complex.

    ``dims`` maps degree -> rank of the chain group, ``boundaries`` maps degree
    k -> matrix of d_k : C_k -> C_{k-1} (rows indexed by C_{k-1}).
    """
    out = {}
    for k, dim in dims.items():
        if ring == "Z":
            dk = boundaries.get(k)
            dk1 = boundaries.get(k + 1)
            r_out = integer_rank(dk) if dk else 0
            snf_in = smith_normal_form(dk1).invariant_factors if dk1 and dk1[0] else []
            torsion = tuple(d for d in snf_in if d > 1)
            out[k] = AbelianGroup(dim - r_out - len(snf_in), torsion)
        elif ring == "Z2":
            dk = boundaries.get(k)
            dk1 = boundaries.get(k + 1)
            r_out = rank_mod2(dk) if dk else 0
            r_in = rank_mod2(dk1) if dk1 else 0
            out[k] = AbelianGroup(dim - r_out - r_in)
        elif ring == "LaurentQ":
            dk = boundaries.get(k)
            dk1 = boundaries.get(k + 1)
            r_out = len(_laurent_factors(dk)) if dk else 0
            f_in = _laurent_factors(dk1) if dk1 else []
            torsion = tuple(str(f) for f in f_in if not f.is_unit())
            out[k] = LaurentModule(dim - r_out - len(f_in), torsion)
        else:
            raise ValueError(f"unknown coefficient ring {ring!r}")
    return out


def _laurent_factors(M):
    if not M or not M[0]:
        return []
    lo = min((min(e.c) for row in M for e in row if e.c), default=0)
    shifted = [[Poly.from_laurent(e, -lo) for e in row] for row in M]
    return poly_smith_diagonal(shifted)


def euler_characteristic(groups):
    return sum((-1) ** (k % 2) * g.free_rank for k, g in groups.items())


def exp_series(chi, n_terms):
    """Coefficients of exp(sum chi_n z^n / n), n = 1.., up to z^n_terms."""
    a = [Fraction(1)]
    for k in range(1, n_terms + 1):
        a.append(sum((Fraction(chi[j - 1]) * a[k - j] for j in range(1, k + 1)), Fraction(0)) / k)
    return a


def format_groups(groups, prefix="H"):
    sep = "" if prefix.endswith("^") else "_"
    lines = []
    for k in sorted(groups, reverse=True):
        lines.append(f"{prefix}{sep}{k} = {groups[k]}")
    return lines


def zero_group():
    return AbelianGroup()


# ------------------------------------------------------- tangle-level checks

class TheoremViolation(Exception):
    pass


def _transpose(M):
    return [list(col) for col in zip(*M)] if M and M[0] else []


def _ranks(groups):
    return {k: g.free_rank for k, g in groups.items()}


def _same_groups(a, b):
    keys = set(a) | set(b)
    zero = AbelianGroup()
    return all(a.get(k, zero) == b.get(k, zero) for k in keys)


def cochain_homology(c):
    """H^k from the transposed differential, keyed by k."""
    dims = {-k: n for k, n in c.dims.items()}
    coboundaries = {}
    for k, M in c.boundaries.items():
        # delta^{k-1}: C^{k-1} -> C^k is the transpose of d_k
        if M and M[0]:
            coboundaries[-(k - 1)] = _transpose(M)
    dual = homology_from_matrices(dims, coboundaries, c.coefficient_ring)
    return {-k: g for k, g in dual.items()}


def cohomology_of(t, variant="primary", signs="m"):
    """H^*(phi), checked against H_{-*} of the inverse map."""
    from .chain import quotient_boundary, square_defects
    from .tangle import invert

    c = quotient_boundary(t, variant, signs)
    if square_defects(c):
        raise TheoremViolation("boundary does not square to zero")
    co = cochain_homology(c)
    inv = quotient_boundary(invert(t), variant, signs).homology()
    flipped = {-k: g for k, g in inv.items()}
    if not _same_groups(co, flipped):
        raise TheoremViolation("cohomology differs from the homology of the inverse map")
    return co


def zeta_sequence(t, N):
    """Euler characteristics of chaotic homology of the first N powers, and exp of their sum."""
    from .chain import quotient_boundary

    if N <= 0:
        return [], []
    chi = []
    for n in range(1, N + 1):
        c = quotient_boundary(t, "chaotic", "m", n)
        chi.append(euler_characteristic(c.homology()))
    return chi, exp_series(chi, N)


@dataclass
class RankGrowthReport:
    n: int
    base: dict
    power: dict
    kernel: dict
    violations: list

    @property
    def ok(self):
        return not self.violations


def _orbit_root(name):
    return name.rpartition("^")[0] if "^" in name else name


def _qmat_equal(A, B):
    return all(a == b for ra, rb in zip(A, B) for a, b in zip(ra, rb)) and len(A) == len(B)


def rank_growth_check(t, n, variant="primary"):
    """Compare H(phi) with H(phi^n) through the projection f and averaging g.

    f sends every class of the power to the class it splits off from, g sends
    a class to the average of its n pieces.  Both must be chain maps with f g
    the identity, and the ranks of H(phi) cannot exceed those of H(phi^n).
    """
    from .chain import quotient_boundary

    if n < 1:
        raise ValueError("n must be positive")
    base = quotient_boundary(t, variant, "m")
    power = quotient_boundary(t, variant, "m", n) if n > 1 else base
    violations = []
    hb, hp = base.homology(), power.homology()
    for k in set(hb) | set(hp):
        rb = hb[k].free_rank if k in hb else 0
        rp = hp[k].free_rank if k in hp else 0
        if rb > rp:
            violations.append(f"degree {k}: rank {rb} for the map exceeds {rp} for its power {n}")
    degrees = sorted(set(base.generators) | set(power.generators))

    def f_mat(k):
        rows, cols = base.generators.get(k, []), power.generators.get(k, [])
        return [[Fraction(int(_orbit_root(c) == r)) for c in cols] for r in rows]

    def g_mat(k):
        rows, cols = power.generators.get(k, []), base.generators.get(k, [])
        return [[Fraction(int(_orbit_root(r) == c), n) for c in cols] for r in rows]

    def mat(c, k):
        return [[Fraction(v) for v in row] for row in c.matrix(k)]

    def mul(A, B):
        if not A or not B:
            return [[Fraction(0)] * (len(B[0]) if B else 0) for _ in A]
        return [[sum((a * B[i][j] for i, a in enumerate(row)), Fraction(0)) for j in range(len(B[0]))]
                for row in A]

    for k in degrees:
        fg = mul(f_mat(k), g_mat(k))
        if any(fg[i][j] != (i == j) for i in range(len(fg)) for j in range(len(fg[i]))):
            violations.append(f"degree {k}: f g is not the identity")
        if n > 1 and not _qmat_equal(mul(f_mat(k - 1), mat(power, k)), mul(mat(base, k), f_mat(k))):
            violations.append(f"degree {k}: f is not a chain map")
        if n > 1 and not _qmat_equal(mul(g_mat(k - 1), mat(base, k)), mul(mat(power, k), g_mat(k))):
            violations.append(f"degree {k}: g is not a chain map")
    # ker f has basis p^j - p^0 (j >= 1); coordinates are the entries with j >= 1
    kernel_dims, kernel_maps = {}, {}
    for k in degrees:
        cols = power.generators.get(k, [])
        kernel_dims[k] = sum(1 for c in cols if not c.endswith("^0")) if n > 1 else 0
        rows = power.generators.get(k - 1, [])
        if n > 1 and cols and rows:
            M = power.matrix(k)
            basis = []
            for j, c in enumerate(cols):
                if c.endswith("^0"):
                    continue
                zero = cols.index(_orbit_root(c) + "^0")
                basis.append([M[i][j] - M[i][zero] for i in range(len(rows))])
            keep = [i for i, r in enumerate(rows) if not r.endswith("^0")]
            kernel_maps[k] = [[basis[j][i] for j in range(len(basis))] for i in keep]
        cb = len(base.generators.get(k, []))
        if len(cols) != kernel_dims[k] + cb:
            violations.append(f"degree {k}: chain ranks do not split as ker f plus the base")
    kernel = homology_from_matrices(kernel_dims, {k: m for k, m in kernel_maps.items() if m and m[0]}) \
        if n > 1 else {}
    if euler_characteristic(kernel) - euler_characteristic(hp) + euler_characteristic(hb) != 0:
        violations.append("Euler characteristics of 0 -> ker f -> C(phi^n) -> C(phi) -> 0 do not add up")
    return RankGrowthReport(n, _ranks(hb), _ranks(hp), _ranks(kernel), violations)
