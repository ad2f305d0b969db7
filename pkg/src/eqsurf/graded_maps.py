"""Graded linear algebra: free Z/2[t]-modules and maps of nice modules.

Part one handles homogeneous maps between graded free Z/2[t]-modules of
equal rank.  ``poly_basis_reduce`` follows the inductive basis-change
argument: look at the image of the first source generator, single out the
target generator of largest degree that appears, replace it by the
t-divided image, pass to the quotient and repeat.  The result is a new
target basis whose degrees are bounded by the source degrees plus the shift.

Part two handles maps of nice M2-modules given by generator images, the
torsion and free-quotient functors, and the transfer of a decomposition
across a map that is an isomorphism in the range weight >= dimension.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from ._gf2 import poly_det, poly_mul, rank
from .coeff_ring import BOT, TOP, Bidegree, M2Monomial, Top
from .nice_modules import (
    AntipodalSummand,
    FreeSummand,
    Key,
    ModuleElement,
    NiceModule,
    Window,
    act,
    act_laurent,
    basis_at,
    element_bidegrees,
    generator,
    key_element,
    vectorize,
)


class NotIsomorphicError(ValueError):
    def __init__(self, degree: int, detail: str = ""):
        self.degree = degree
        msg = f"map is not an isomorphism in degree {degree}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class IllFormedMapError(ValueError):
    pass


# ------------------------------------------------------- graded Z/2[t] maps


@dataclass(frozen=True)
class GradedFreeModule:
    degrees: tuple[int, ...]

    def dim_at(self, d: int) -> int:
        return sum(1 for g in self.degrees if g <= d)


@dataclass(frozen=True)
class PolyMap:
    """matrix[i][j] is the coefficient of target b_i in the image of alpha_j.

    Polynomials are ints (bit k = coefficient of t^k).  A nonzero entry must
    be the single monomial t^(source[j] + q - target[i]).
    """

    matrix: tuple[tuple[int, ...], ...]
    source: tuple[int, ...]
    target: tuple[int, ...]
    q: int = 0

    def __post_init__(self):
        object.__setattr__(self, "matrix", tuple(tuple(r) for r in self.matrix))
        object.__setattr__(self, "source", tuple(self.source))
        object.__setattr__(self, "target", tuple(self.target))
        m, n = len(self.target), len(self.source)
        if len(self.matrix) != m or any(len(r) != n for r in self.matrix):
            raise ValueError("matrix shape does not match the basis sizes")
        for i in range(m):
            for j in range(n):
                e = self.matrix[i][j]
                if not e:
                    continue
                d = self.source[j] + self.q - self.target[i]
                if d < 0 or e != 1 << d:
                    raise ValueError(f"entry ({i},{j}) is not homogeneous of degree {d}")

    @staticmethod
    def from_columns(columns: Iterable[Iterable[int]], source, target, q: int = 0) -> "PolyMap":
        cols = [list(c) for c in columns]
        rows = [tuple(c[i] for c in cols) for i in range(len(target))]
        return PolyMap(tuple(rows), tuple(source), tuple(target), q)

    @staticmethod
    def identity(degrees: Iterable[int]) -> "PolyMap":
        degs = tuple(degrees)
        m = len(degs)
        return PolyMap(
            tuple(tuple(int(i == j) for j in range(m)) for i in range(m)), degs, degs, 0
        )

    def column(self, j: int) -> list[int]:
        return [row[j] for row in self.matrix]

    def determinant(self) -> int:
        if len(self.source) != len(self.target):
            return 0
        return poly_det([list(r) for r in self.matrix])

    def degree_rank(self, d: int) -> tuple[int, int, int]:
        """(source dim, target dim, rank) of the slice from degree d to d + q."""
        src = [j for j, g in enumerate(self.source) if g <= d]
        tgt = [i for i, g in enumerate(self.target) if g <= d + self.q]
        index = {i: n for n, i in enumerate(tgt)}
        rows = []
        for j in src:
            v = 0
            for i in range(len(self.target)):
                if self.matrix[i][j]:
                    v |= 1 << index[i]
            rows.append(v)
        return len(src), len(tgt), rank(rows)


def verify_poly_iso(f: PolyMap, degrees: Iterable[int]) -> dict[int, bool]:
    out = {}
    for d in degrees:
        s, t, r = f.degree_rank(d)
        out[d] = s == t == r
    return out


def stable_degree(f: PolyMap) -> int | None:
    """A degree from which f is an isomorphism, or None if det(f) = 0.

    If det(f) = t^k then t^k kills the cokernel, so every target slice of
    degree >= max(target) + k is hit; injectivity holds since det != 0.
    """
    det = f.determinant()
    if det == 0 or det & (det - 1):
        return None
    k = det.bit_length() - 1
    return max(f.target, default=0) + k - f.q


@dataclass(frozen=True)
class ReducedBasis:
    degrees: tuple[int, ...]
    vectors: tuple[tuple[int, ...], ...]  # beta_j in coordinates of the old target basis
    pivots: tuple[int, ...]  # index of the old basis element replaced by beta_j

    def change_of_basis(self, target: Iterable[int]) -> PolyMap:
        return PolyMap.from_columns(self.vectors, self.degrees, tuple(target), 0)


def poly_basis_reduce(f: PolyMap, g0: int) -> ReducedBasis:
    m = len(f.source)
    if m != len(f.target):
        raise NotIsomorphicError(g0, "source and target ranks differ")
    g_star = stable_degree(f)
    if g_star is None:
        for d in range(g0, g0 + 4 * (m + 1) + max(f.source + f.target, default=0) + abs(f.q)):
            if not verify_poly_iso(f, [d])[d]:
                raise NotIsomorphicError(d, "determinant is not a power of t")
        raise NotIsomorphicError(g0, "determinant is not a power of t")
    for d, ok in verify_poly_iso(f, range(g0, max(g0, g_star) + 1)).items():
        if not ok:
            raise NotIsomorphicError(d)

    cols = [f.column(j) for j in range(m)]
    active = list(range(m))
    degrees, vectors, pivots = [], [], []
    for j in range(m):
        v = cols[j]
        support = [i for i in active if v[i]]
        if not support:
            raise NotIsomorphicError(g0, f"image of generator {j} vanishes in the quotient")
        k = max(support, key=lambda i: (f.target[i], -i))
        jk = v[k].bit_length() - 1
        beta = [0] * m
        for i in support:
            beta[i] = v[i] >> jk
        degrees.append(f.target[k])
        vectors.append(tuple(beta))
        pivots.append(k)
        # in the quotient by beta, b_k = sum over the other support of beta_i b_i
        for later in cols[j + 1:]:
            c = later[k]
            if not c:
                continue
            for i in support:
                if i != k:
                    later[i] ^= poly_mul(c, beta[i])
            later[k] = 0
        active.remove(k)
    return ReducedBasis(tuple(degrees), tuple(vectors), tuple(pivots))


# ----------------------------------------------------------- nice-module maps


@dataclass(frozen=True)
class NiceMap:
    source: NiceModule
    target: NiceModule
    shift: Bidegree
    images: tuple = ()  # sorted (summand id, ModuleElement) pairs

    def __post_init__(self):
        if isinstance(self.images, Mapping):
            object.__setattr__(self, "images", tuple(sorted(self.images.items())))
        if not isinstance(self.shift, Bidegree):
            object.__setattr__(self, "shift", Bidegree(*self.shift))
        self._validate()

    def image(self, sid: str) -> ModuleElement:
        return dict(self.images).get(sid, ModuleElement())

    def _validate(self) -> None:
        known = set(self.source.ids())
        for sid, _ in self.images:
            if sid not in known:
                raise IllFormedMapError(f"no source summand {sid}")
        for sid, summand in self.source.items():
            img = self.image(sid)
            if not img:
                continue
            if isinstance(summand, FreeSummand):
                want = summand.shift + self.shift
            else:
                want = Bidegree(summand.s, 0) + self.shift
            degs = element_bidegrees(self.target, img)
            if degs != {want}:
                raise IllFormedMapError(
                    f"image of {sid} has bidegrees {sorted(map(str, degs))}, expected {want}"
                )
            if isinstance(summand, FreeSummand):
                continue
            for tid, c in img.terms:
                tgt = self.target.summand(tid)
                if isinstance(tgt, FreeSummand):
                    for mono in c.monomials:
                        if mono.kind != BOT or mono.a > summand.r:
                            raise IllFormedMapError(
                                f"image of {sid} on {tid} is not killed by rho^{summand.r + 1}"
                                " or not tau-divisible"
                            )
                else:
                    for a, _ in c.monomials:
                        if a + summand.r + 1 <= tgt.r:
                            raise IllFormedMapError(
                                f"image of {sid} on {tid} is not killed by rho^{summand.r + 1}"
                            )

    def apply_key(self, key: Key) -> ModuleElement:
        sid, mono = key
        img = self.image(sid)
        if isinstance(mono, M2Monomial):
            return act(mono, img)
        return act_laurent(mono[0], mono[1], img)

    def rank_at(self, p: int, q: int) -> tuple[int, int, int]:
        src = basis_at(self.source, p, q)
        tgt = basis_at(self.target, p + self.shift.p, q + self.shift.q)
        r = rank(vectorize(self.apply_key(k), tgt) for k in src) if src else 0
        return len(src), len(tgt), r

    @staticmethod
    def identity(M: NiceModule) -> "NiceMap":
        return NiceMap(M, M, Bidegree(0, 0), {sid: generator(M, sid) for sid in M.ids()})

    @staticmethod
    def scalar(M: NiceModule, s: M2Monomial) -> "NiceMap":
        return NiceMap(M, M, s.bidegree, {sid: act(s, generator(M, sid)) for sid in M.ids()})

    @staticmethod
    def shift_map(M: NiceModule, n: int, q: int) -> "NiceMap":
        """The exact (n, q)-shift M -> Sigma^{n,q} M on generators."""
        N = M.shifted(n, q)
        images = {}
        for sid, summand in M.items():
            g = generator(N, sid)
            # antipodal generators sit in weight 0, so multiply by tau^q
            images[sid] = g if isinstance(summand, FreeSummand) else act_laurent(0, q, g)
        return NiceMap(M, N, Bidegree(n, q), images)


@dataclass(frozen=True)
class IsoReport:
    check: str
    records: tuple
    window: Window
    stabilized: bool
    columns: tuple = ()

    @property
    def passed(self) -> bool:
        return all(r["pass"] for r in self.records)

    def failures(self) -> list[dict]:
        return [r for r in self.records if not r["pass"]]

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "pass": self.passed,
            "stabilized": self.stabilized,
            "window": [self.window.pmin, self.window.pmax, self.window.qmin, self.window.qmax],
            "records": list(self.records),
        }

    def table(self) -> str:
        lines = [f"{self.check}: {'PASS' if self.passed else 'FAIL'} ({self.window})"]
        lines.append("  bidegree   dims    rank  ok")
        for r in self.records:
            p, q = r["bidegree"]
            s, t = r["expected"]
            lines.append(f"  ({p},{q})".ljust(12) + f"{s}->{t}".ljust(8) + f"{r['rank']}".ljust(6)
                         + ("yes" if r["pass"] else "NO"))
        return "\n".join(lines)


def _stabilize_top(rows_of, window: Window, cap: int = 48) -> Window:
    """Raise qmax until each column's last two rows agree."""
    qmax = window.qmax
    for _ in range(cap):
        if all(rows_of(p, qmax) == rows_of(p, qmax - 1) for p in range(window.pmin, window.pmax + 1)):
            break
        qmax += 1
    return Window(window.pmin, window.pmax, window.qmin, qmax)


def verify_nice_iso_range(f: NiceMap, window: Window | tuple, full: bool = False) -> IsoReport:
    """Check bijectivity of f cell by cell (cells with q >= p unless full)."""
    if not isinstance(window, Window):
        window = Window(*window)
    r_max = max(f.source.max_r, f.target.max_r)
    need = window.pmax + r_max + 2
    window = Window(window.pmin, window.pmax, window.qmin, max(window.qmax, need))
    window = _stabilize_top(f.rank_at, window)
    stable = all(
        f.rank_at(p, window.qmax) == f.rank_at(p, window.qmax - 1)
        for p in range(window.pmin, window.pmax + 1)
    )
    records = []
    for p, q in window.cells():
        if q < p and not full:
            continue
        s, t, r = f.rank_at(p, q)
        records.append({"bidegree": [p, q], "expected": [s, t], "rank": r, "pass": s == t == r})
    return IsoReport("nice-iso", tuple(records), window, stable)


# ------------------------------------------------- torsion and free quotient


@dataclass(frozen=True)
class TorsionView:
    """The rho-power torsion T(M): antipodal summands plus bottom cones."""

    module: NiceModule

    @property
    def antipodal(self) -> tuple[AntipodalSummand, ...]:
        return self.module.antipodal

    def basis_at(self, p: int, q: int) -> list[Key]:
        return [k for k in basis_at(self.module, p, q)
                if not (isinstance(k[1], M2Monomial) and k[1].kind == TOP)]

    def dim_at(self, p: int, q: int) -> int:
        return len(self.basis_at(p, q))

    def rho_power_rank(self, k: int, p: int, q: int) -> int:
        src = self.basis_at(p, q)
        if not src:
            return 0
        tgt = self.basis_at(p + k, q + k)
        s = Top(k, 0)
        return rank(vectorize(act(s, key_element(self.module, key)), tgt) for key in src)

    def recover_antipodal(self) -> list[AntipodalSummand]:
        """Read off the antipodal summands from rho-power ranks at high weight."""
        M = self.module
        if not M.antipodal and not M.free:
            return []
        cols = [a.s for a in M.antipodal] + [a.end for a in M.antipodal] + [0]
        lo, hi = min(cols), max(cols)
        # above this weight no bottom cone reaches the columns lo..hi
        qh = max([f.q - f.p for f in M.free] + [0]) + hi + 2

        def r(a: int, b: int) -> int:
            if a < lo or b > hi or a > b:
                return 0
            return self.rho_power_rank(b - a, a, qh)

        out = []
        for a in range(lo, hi + 1):
            for b in range(a, hi + 1):
                mult = r(a, b) - r(a - 1, b) - r(a, b + 1) + r(a - 1, b + 1)
                out += [AntipodalSummand(a, b - a)] * mult
        return out


def torsion_part(M: NiceModule) -> TorsionView:
    return TorsionView(M)


def _top_keys(M: NiceModule, p: int, q: int) -> list[Key]:
    return [k for k in basis_at(M, p, q) if isinstance(k[1], M2Monomial) and k[1].kind == TOP]


def _quotient_dim(M: NiceModule, p: int, q: int) -> int:
    """dim of (top cones / image of rho) at (p, q)."""
    tgt = _top_keys(M, p, q)
    src = _top_keys(M, p - 1, q - 1)
    rho = Top(1, 0)
    im = rank(vectorize(act(rho, key_element(M, k)), tgt) for k in src) if src else 0
    return len(tgt) - im


def free_quotient_rank(M: NiceModule, p: int) -> list[int]:
    """Weights of the Z/2[tau]-generators of M/T(M) modulo rho in column p."""
    if not M.free:
        return []
    lo = min(f.q for f in M.free) - 1
    hi = max(f.q for f in M.free) + 1
    out = []
    prev = _quotient_dim(M, p, lo)
    for ell in range(lo + 1, hi + 1):
        cur = _quotient_dim(M, p, ell)
        out += [ell] * (cur - prev)
        prev = cur
    return out


def reconstruct(M: NiceModule) -> NiceModule:
    """Rebuild M from the torsion functor and the free quotient alone."""
    ps = sorted({f.p for f in M.free})
    free = [FreeSummand(p, ell) for p in ps for ell in free_quotient_rank(M, p)]
    return NiceModule(tuple(free), tuple(torsion_part(M).recover_antipodal()))


# ------------------------------------------------------------ structure transfer


@dataclass(frozen=True)
class TransferredDecomposition:
    antipodal: tuple[AntipodalSummand, ...]
    free: tuple[tuple[int, tuple[int, int]], ...]  # (topological degree, (lo, hi))
    exact: bool

    def admits(self, M: NiceModule) -> bool:
        """Is M one of the decompositions allowed by this data?"""
        if Counter(M.antipodal) != Counter(self.antipodal):
            return False
        if len(M.free) != len(self.free):
            return False
        for k in {k for k, _ in self.free} | {f.p for f in M.free}:
            intervals = sorted((iv for kk, iv in self.free if kk == k), key=lambda iv: iv[1])
            weights = sorted(f.q for f in M.free if f.p == k)
            if len(intervals) != len(weights):
                return False
            for lo, hi in intervals:
                pick = next((w for w in weights if lo <= w <= hi), None)
                if pick is None:
                    return False
                weights.remove(pick)
        return True

    def candidates(self) -> Iterator[NiceModule]:
        def rec(i: int, acc: list) -> Iterator[NiceModule]:
            if i == len(self.free):
                yield NiceModule(tuple(acc), self.antipodal)
                return
            k, (lo, hi) = self.free[i]
            for w in range(lo, hi + 1):
                yield from rec(i + 1, acc + [FreeSummand(k, w)])

        yield from rec(0, [])

    def to_json(self) -> dict:
        return {
            "antipodal": [{"s": a.s, "r": a.r} for a in self.antipodal],
            "free": [{"p": k, "q": [lo, hi]} for k, (lo, hi) in self.free],
            "exact": self.exact,
        }

    def render(self) -> str:
        parts = [f"S({k},{lo})M2" if lo == hi else f"S({k},{lo}..{hi})M2"
                 for k, (lo, hi) in self.free]
        parts += [a.label() for a in self.antipodal]
        return " + ".join(parts) if parts else "0"


def transfer_decomposition(src: NiceModule, n: int, q: int, uniform: bool = False
                           ) -> TransferredDecomposition:
    if q < 0:
        raise ValueError("the weight shift q must be nonnegative")
    for f in src.free:
        if not f.p >= f.q >= 0:
            raise ValueError(f"free summand {f.label()} violates p >= q >= 0")
    antipodal = tuple(AntipodalSummand(a.s + n, a.r) for a in src.antipodal)
    if uniform:
        free = tuple((f.p + n, (f.q + q, f.q + q)) for f in src.free)
    else:
        free = tuple((f.p + n, (0, f.q + q)) for f in src.free)
    return TransferredDecomposition(antipodal, free, uniform)
