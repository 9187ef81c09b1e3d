"""Reference computations that share no code with the package."""
from fractions import Fraction
from itertools import combinations
from math import gcd


def det(M):
    """Exact determinant by Gaussian elimination over the rationals."""
    n = len(M)
    A = [[Fraction(v) for v in row] for row in M]
    sign = 1
    for c in range(n):
        pivot = next((r for r in range(c, n) if A[r][c] != 0), None)
        if pivot is None:
            return 0
        if pivot != c:
            A[c], A[pivot] = A[pivot], A[c]
            sign = -sign
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            for k in range(c, n):
                A[r][k] -= f * A[c][k]
    out = Fraction(sign)
    for i in range(n):
        out *= A[i][i]
    assert out.denominator == 1
    return int(out)


def invariant_factors(M):
    """Invariant factors from determinantal divisors: d_k / d_{k-1}, d_k = gcd of k x k minors."""
    rows = len(M)
    cols = len(M[0]) if rows else 0
    divisors = [1]
    for k in range(1, min(rows, cols) + 1):
        d = 0
        for ri in combinations(range(rows), k):
            for ci in combinations(range(cols), k):
                d = gcd(d, det([[M[i][j] for j in ci] for i in ri]))
        if d == 0:
            break
        divisors.append(d)
    return [divisors[k] // divisors[k - 1] for k in range(1, len(divisors))]


def matmul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]))] for i in range(len(A))]


def rank_over_q(M):
    A = [[Fraction(v) for v in row] for row in M]
    rank = 0
    cols = len(A[0]) if A else 0
    for c in range(cols):
        pivot = next((r for r in range(rank, len(A)) if A[r][c] != 0), None)
        if pivot is None:
            continue
        A[rank], A[pivot] = A[pivot], A[rank]
        for r in range(len(A)):
            if r != rank and A[r][c] != 0:
                f = A[r][c] / A[rank][c]
                A[r] = [a - f * b for a, b in zip(A[r], A[rank])]
        rank += 1
    return rank


def betti(dims, boundaries):
    """Free ranks of homology from ranks over Q."""
    out = {}
    for k, n in dims.items():
        out_rank = rank_over_q(boundaries[k]) if boundaries.get(k) else 0
        in_rank = rank_over_q(boundaries[k + 1]) if boundaries.get(k + 1) else 0
        out[k] = n - out_rank - in_rank
    return out


def check_snf(A, result):
    """U A V = D, U and V unimodular, D diagonal with dividing nonnegative entries."""
    U, D, V = result.U, result.D, result.V
    assert matmul(matmul(U, A), V) == D
    assert abs(det(U)) == 1 and abs(det(V)) == 1
    for i, row in enumerate(D):
        for j, v in enumerate(row):
            assert i == j or v == 0
    diag = [D[i][i] for i in range(min(len(D), len(D[0])))]
    nonzero = [d for d in diag if d]
    assert all(d > 0 for d in nonzero)
    assert diag[:len(nonzero)] == nonzero
    assert all(b % a == 0 for a, b in zip(nonzero, nonzero[1:]))
    return nonzero
