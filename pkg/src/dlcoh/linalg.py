"""Exact linear algebra over the rationals.

Matrices are lists of lists of python ints or Fractions.  Rank is computed by
fraction-free (Bareiss) elimination so that all intermediate values stay
integral when the input is integral; no floating point anywhere.
"""
from __future__ import annotations

from fractions import Fraction


def mat_mul(A, B):
    if not A or not B:
        return []
    rb = len(B)
    cb = len(B[0]) if B else 0
    out = []
    for row in A:
        new = [0] * cb
        for k, a in enumerate(row):
            if a:
                brow = B[k]
                for j in range(cb):
                    if brow[j]:
                        new[j] += a * brow[j]
        out.append(new)
    return out


def mat_scale(A, c):
    return [[c * x for x in row] for row in A]


def mat_add(A, B):
    return [[x + y for x, y in zip(r1, r2)] for r1, r2 in zip(A, B)]


def identity_matrix(k):
    return [[1 if i == j else 0 for j in range(k)] for i in range(k)]


def zero_matrix(rows, cols):
    return [[0] * cols for _ in range(rows)]


def is_zero_matrix(A) -> bool:
    return all(x == 0 for row in A for x in row)


def _to_integer_matrix(A):
    """Clear denominators row by row; rank is unchanged."""
    out = []
    for row in A:
        if any(isinstance(x, Fraction) for x in row):
            lcm = 1
            for x in row:
                if isinstance(x, Fraction) and x.denominator != 1:
                    g = lcm * x.denominator
                    # lcm(a,b) = a*b/gcd
                    from math import gcd

                    lcm = g // gcd(lcm, x.denominator)
            out.append([int(x * lcm) for x in row])
        else:
            out.append(list(row))
    return out


def rank(A) -> int:
    """Rank over the rationals by fraction-free Gaussian elimination."""
    if not A or not A[0]:
        return 0
    M = _to_integer_matrix(A)
    rows, cols = len(M), len(M[0])
    r = 0
    prev = 1
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if M[i][c]:
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            M[r], M[piv] = M[piv], M[r]
        pivval = M[r][c]
        for i in range(r + 1, rows):
            mic = M[i][c]
            rowi, rowr = M[i], M[r]
            if mic:
                for j in range(c + 1, cols):
                    rowi[j] = (pivval * rowi[j] - mic * rowr[j]) // prev
            elif pivval != prev:
                for j in range(c + 1, cols):
                    rowi[j] = (pivval * rowi[j]) // prev
            rowi[c] = 0
        prev = pivval
        r += 1
        if r == rows:
            break
    return r


def column_space_basis(A):
    """Indices of a maximal independent set of columns, plus the basis matrix."""
    if not A or not A[0]:
        return [], []
    rows, cols = len(A), len(A[0])
    M = [[Fraction(x) for x in row] for row in A]
    pivots = []
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if M[i][c]:
                piv = i
                break
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        pv = M[r][c]
        M[r] = [x / pv for x in M[r]]
        for i in range(rows):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    basis = [[A[i][c] for c in pivots] for i in range(rows)]
    return pivots, basis


def solve_exact(B, Y):
    """Solve B X = Y for X where B has full column rank; exact Fractions.

    B is rows x k, Y is rows x m; returns k x m or raises if inconsistent.
    """
    rows = len(B)
    k = len(B[0]) if B else 0
    m = len(Y[0]) if Y and Y[0] else (0 if not Y else len(Y[0]))
    aug = [
        [Fraction(B[i][j]) for j in range(k)] + [Fraction(Y[i][j]) for j in range(m)]
        for i in range(rows)
    ]
    r = 0
    pivots = []
    for c in range(k):
        piv = None
        for i in range(r, rows):
            if aug[i][c]:
                piv = i
                break
        if piv is None:
            raise ValueError("matrix does not have full column rank")
        aug[r], aug[piv] = aug[piv], aug[r]
        pv = aug[r][c]
        aug[r] = [x / pv for x in aug[r]]
        for i in range(rows):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
    for i in range(r, rows):
        if any(aug[i][k + j] for j in range(m)):
            raise ValueError("inconsistent system: Y not in column space of B")
    X = [[aug[i][k + j] for j in range(m)] for i in range(len(pivots))]
    return X
