"""Small GF(2) helpers.

Vectors over Z/2 are Python ints used as bitmasks, and polynomials in
Z/2[t] are ints whose bit k is the coefficient of t^k.
"""

from __future__ import annotations

from collections.abc import Iterable


def rank(rows: Iterable[int]) -> int:
    """Rank of a set of GF(2) row vectors."""
    pivots: dict[int, int] = {}
    r = 0
    for row in rows:
        while row:
            top = row.bit_length() - 1
            if top in pivots:
                row ^= pivots[top]
            else:
                pivots[top] = row
                r += 1
                break
    return r


def poly_mul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_divmod(a: int, b: int) -> tuple[int, int]:
    if b == 0:
        raise ZeroDivisionError("division by the zero polynomial")
    q = 0
    db = b.bit_length()
    while a and a.bit_length() >= db:
        shift = a.bit_length() - db
        q |= 1 << shift
        a ^= b << shift
    return q, a


def poly_coeff(a: int, k: int) -> int:
    return (a >> k) & 1 if k >= 0 else 0


def poly_str(a: int, var: str = "t") -> str:
    if a == 0:
        return "0"
    parts = []
    for k in range(a.bit_length()):
        if (a >> k) & 1:
            parts.append("1" if k == 0 else var if k == 1 else f"{var}^{k}")
    return " + ".join(parts)


def poly_det(matrix: list[list[int]]) -> int:
    """Determinant over Z/2[t] by fraction-free (Bareiss) elimination."""
    m = [list(row) for row in matrix]
    n = len(m)
    if n == 0:
        return 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = poly_mul(m[i][j], m[k][k]) ^ poly_mul(m[i][k], m[k][j])
                quo, rem = poly_divmod(num, prev)
                assert rem == 0
                m[i][j] = quo
        prev = m[k][k]
    return m[n - 1][n - 1]
