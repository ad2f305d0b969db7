"""Reference computations written without the library's algorithms.

Everything here works from explicit monomial lists: a module element is a
basis monomial of one summand, and rho / tau send monomials to monomials
(or to zero), so ranks are counts of surviving images.
"""

from __future__ import annotations


def m2_monomials(bound: int):
    """Explicit M2 monomials with exponents below ``bound``: (kind, a, b, p, q)."""
    out = []
    for a in range(bound):
        for b in range(bound):
            out.append(("top", a, b, a, a + b))
            out.append(("bot", a, b, -a, -2 - a - b))
    return out


def m2_count(p: int, q: int, bound: int = 24) -> int:
    return sum(1 for m in m2_monomials(bound) if (m[3], m[4]) == (p, q))


def _m2_basis(p, q):
    if 0 <= p <= q:
        return [("top", p, q - p)]
    if p <= 0 and q <= p - 2:
        return [("bot", -p, p - 2 - q)]
    return []


def basis(free, antipodal, p, q):
    """free: list of (a, b) shifts; antipodal: list of (s, r)."""
    out = []
    for i, (a, b) in enumerate(free):
        out += [("F", i, m) for m in _m2_basis(p - a, q - b)]
    for i, (s, r) in enumerate(antipodal):
        a = p - s
        if 0 <= a <= r:
            out.append(("A", i, (a, q - a)))
    return out


def _rho(key, antipodal):
    kind, i, m = key
    if kind == "A":
        a, b = m
        return ("A", i, (a + 1, b)) if a + 1 <= antipodal[i][1] else None
    if m[0] == "top":
        return ("F", i, ("top", m[1] + 1, m[2]))
    return ("F", i, ("bot", m[1] - 1, m[2])) if m[1] >= 1 else None


def _tau(key, antipodal):
    kind, i, m = key
    if kind == "A":
        return ("A", i, (m[0], m[1] + 1))
    if m[0] == "top":
        return ("F", i, ("top", m[1], m[2] + 1))
    return ("F", i, ("bot", m[1], m[2] - 1)) if m[2] >= 1 else None


def dim(free, antipodal, p, q) -> int:
    return len(basis(free, antipodal, p, q))


def rho_rank(free, antipodal, p, q) -> int:
    return len({k for k in (_rho(x, antipodal) for x in basis(free, antipodal, p, q)) if k})


def tau_rank(free, antipodal, p, q) -> int:
    return len({k for k in (_tau(x, antipodal) for x in basis(free, antipodal, p, q)) if k})


def les_total(free, antipodal, p, q) -> tuple[int, int]:
    """(coker of rho into (p, q+1), ker of rho out of (p, q))."""
    coker = dim(free, antipodal, p, q + 1) - rho_rank(free, antipodal, p - 1, q)
    ker = dim(free, antipodal, p, q) - rho_rank(free, antipodal, p, q)
    return coker, ker


def gf2_rank(rows: list[list[int]]) -> int:
    rows = [r[:] for r in rows]
    rank, ncols = 0, len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][c]:
                rows[i] = [x ^ y for x, y in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def slice_is_iso(matrix, source, target, q, d) -> bool:
    """Degree-d slice of a map of graded free Z/2[t]-modules, entries as exponent or None.

    matrix[i][j] is None (zero) or the exponent e with entry t^e.
    Basis of degree d: t^(d - g) alpha for every generator of degree g <= d.
    """
    src = [j for j, g in enumerate(source) if g <= d]
    tgt = [i for i, g in enumerate(target) if g <= d + q]
    rows = []
    for j in src:
        row = [0] * len(tgt)
        for col, i in enumerate(tgt):
            e = matrix[i][j]
            if e is not None:
                # t^(d - source_j) alpha_j -> t^(d - source_j + e) b_i; lands on the basis vector of b_i
                row[col] = 1
        rows.append(row)
    r = gf2_rank(rows) if rows and tgt else 0
    return len(src) == len(tgt) == r


def u_module_barcode(dims: dict[int, int], u_rank: dict[tuple[int, int], int]) -> list[tuple[int, int]]:
    """Cyclic pieces (start, length) of a graded Z/2[u]-module from ranks of u^k.

    u_rank[(d, k)] is the rank of u^k from degree d; dims[d] = u_rank[(d, 0)].
    """
    def r(d, k):
        if k < 0:
            return 0
        return u_rank.get((d, k), 0)

    pieces = []
    for d in sorted(dims):
        for length in range(1, 8):
            # bars starting at d of length exactly `length`
            n = (r(d, length - 1) - r(d - 1, length) - r(d, length) + r(d - 1, length + 1))
            pieces += [(d, length)] * n
    return pieces
