"""C2-surfaces built by equivariant surgery, their invariants and cohomology.

A descriptor is a small AST.  Leaves are the spheres S(2,0), S(2,1),
S(2,2) and the antipodal sphere S2a, trivial actions on a surface, free
double covers given by a class w in H^1 of the quotient, and doubling
spaces.  Inner nodes are equivariant connected sum with a nonequivariant
surface and the three surgeries S10AT, S11AT and FM.

The nonfree cohomology comes from closed formulas in (F, C, beta).  Free
surfaces go through the Borel route: H^*(quotient) as a Z/2[u]-module with
u acting by cup product with w, split into cyclic pieces; a piece
Z/2[u]/(u^len) starting in degree s gives the antipodal summand
S(s,0)A_(len-1).

The H^1 basis of M_g is a1, b1, ..., ag, bg with a_i b_i = top; the basis of
N_k is c1, ..., ck with c_i^2 = top.  Bit strings for w list coefficients in
that order.  The free torus T1anti is the cover of the Klein bottle N2 given
by w = c1 + c2, the unique nonzero class with w^2 = 0 whose product with c1
is the top class.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Union

from .nice_modules import AntipodalSummand, NiceModule


class SurfaceError(ValueError):
    """A descriptor that breaks the grammar's side conditions."""


# ------------------------------------------------------- nonequivariant data


@dataclass(frozen=True, order=True)
class NoneqSurface:
    orientable: bool
    genus: int

    def __post_init__(self):
        if self.genus < 0 or (not self.orientable and self.genus < 1):
            raise SurfaceError(f"invalid genus {self.genus}")

    @property
    def beta(self) -> int:
        return 2 * self.genus if self.orientable else self.genus

    @property
    def euler(self) -> int:
        return 2 - self.beta

    @property
    def name(self) -> str:
        return f"{'M' if self.orientable else 'N'}{self.genus}"

    def __str__(self) -> str:
        return self.name


def M(g: int) -> NoneqSurface:
    return NoneqSurface(True, g)


def N(k: int) -> NoneqSurface:
    return NoneqSurface(False, k)


@dataclass(frozen=True)
class SingularRing:
    """H^*(S; Z/2) = span{1, x_1..x_beta, top}; x_i x_j = pairing[i][j] top."""

    labels: tuple[str, ...]
    pairing: tuple[tuple[int, ...], ...]

    @property
    def beta(self) -> int:
        return len(self.labels)

    def basis(self) -> list[str]:
        return ["1", *self.labels, "top"]

    def degree(self, i: int) -> int:
        return 0 if i == 0 else 2 if i == self.beta + 1 else 1

    def cup(self, v: tuple[int, ...], w: tuple[int, ...]) -> int:
        """Product of two degree-one classes, as a multiple of top."""
        total = 0
        for i, vi in enumerate(v):
            if vi:
                for j, wj in enumerate(w):
                    if wj:
                        total ^= self.pairing[i][j]
        return total

    def product(self, x: str, y: str) -> str | None:
        """Multiplication table on basis labels (None for zero)."""
        if x == "1":
            return y
        if y == "1":
            return x
        if x == "top" or y == "top":
            return None
        i, j = self.labels.index(x), self.labels.index(y)
        return "top" if self.pairing[i][j] else None

    def connected_sum(self, other: "SingularRing", tag: str = "'") -> "SingularRing":
        n, m = self.beta, other.beta
        rows = [tuple(r) + (0,) * m for r in self.pairing]
        rows += [(0,) * n + tuple(r) for r in other.pairing]
        return SingularRing(self.labels + tuple(l + tag for l in other.labels), tuple(rows))


def sing_ring(s: NoneqSurface) -> SingularRing:
    b = s.beta
    if s.orientable:
        labels = tuple(f"{c}{i}" for i in range(1, s.genus + 1) for c in "ab")
        pairing = [[0] * b for _ in range(b)]
        for i in range(s.genus):
            pairing[2 * i][2 * i + 1] = pairing[2 * i + 1][2 * i] = 1
    else:
        labels = tuple(f"c{i}" for i in range(1, b + 1))
        pairing = [[int(i == j) for j in range(b)] for i in range(b)]
    return SingularRing(labels, tuple(tuple(r) for r in pairing))


@dataclass(frozen=True)
class UPiece:
    start: int
    length: int
    generator: str  # basis label of the chosen starting element

    def summand(self) -> AntipodalSummand:
        return AntipodalSummand(self.start, self.length - 1)


def u_module_pieces(ring: SingularRing, w: tuple[int, ...]) -> list[UPiece]:
    """Split H^* into cyclic Z/2[u]-modules, u = cup with w.

    Greedy: in the current quotient pick a homogeneous element whose u-orbit
    is longest (lowest degree, then lowest index on ties), split its cyclic
    span off and continue.  A cyclic submodule of maximal length is a direct
    summand, so the quotient carries the rest of the decomposition.
    """
    w = tuple(w)
    if len(w) != ring.beta:
        raise SurfaceError(f"w has {len(w)} bits, H^1 has dimension {ring.beta}")
    if not any(w):
        raise SurfaceError("w must be nonzero")
    n = ring.beta + 2
    top_bit = 1 << (n - 1)
    w_vec = sum(1 << (i + 1) for i, wi in enumerate(w) if wi)

    def u(v: int) -> int:
        out = 0
        if v & 1:
            out ^= w_vec
        coords = tuple((v >> (i + 1)) & 1 for i in range(ring.beta))
        if ring.cup(coords, w):
            out ^= top_bit
        return out

    span: dict[int, int] = {}  # leading bit -> reduced vector

    def reduce(v: int) -> int:
        while v:
            t = v.bit_length() - 1
            if t not in span:
                return v
            v ^= span[t]
        return 0

    def add(v: int) -> None:
        v = reduce(v)
        if v:
            span[v.bit_length() - 1] = v

    def orbit_length(v: int) -> int:
        k = 0
        while reduce(v):
            k += 1
            v = u(v)
        return k

    pieces = []
    labels = ring.basis()
    while len(span) < n:
        best = None
        for i in range(n):
            length = orbit_length(1 << i)
            if length == 0:
                continue
            key = (-length, ring.degree(i), i)
            if best is None or key < best[0]:
                best = (key, i, length)
        _, i, length = best
        v = 1 << i
        for _ in range(length):
            add(v)
            v = u(v)
        pieces.append(UPiece(ring.degree(i), length, labels[i]))
    if sum(p.length for p in pieces) != n:
        raise AssertionError("cyclic pieces do not add up to H^*")
    return sorted(pieces, key=lambda p: (p.start, p.length, p.generator))


def decompose_u_module(s: NoneqSurface | SingularRing, w) -> list[AntipodalSummand]:
    ring = s if isinstance(s, SingularRing) else sing_ring(s)
    return [p.summand() for p in u_module_pieces(ring, tuple(w))]


# ------------------------------------------------------------------ the AST

SPHERES = ("S20", "S21", "S22", "S2a")
DOUBLINGS = ("S10", "S11")
SURGERIES = ("S10AT", "S11AT", "FM")


@dataclass(frozen=True)
class TrivialSurface:
    surface: NoneqSurface

    def dsl(self) -> str:
        return f"triv({self.surface})"


@dataclass(frozen=True)
class Sphere:
    kind: str

    def __post_init__(self):
        if self.kind not in SPHERES:
            raise SurfaceError(f"unknown sphere {self.kind}")

    def dsl(self) -> str:
        return "S2a" if self.kind == "S2a" else f"S({self.kind[1]},{self.kind[2]})"


@dataclass(frozen=True)
class FreeCover:
    quotient: NoneqSurface
    w: tuple[int, ...]
    alias: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "w", tuple(self.w))

    def dsl(self) -> str:
        if self.alias:
            return self.alias
        return f"free({self.quotient},{''.join(map(str, self.w))})"


@dataclass(frozen=True)
class Doubling:
    base: NoneqSurface
    kind: str

    def __post_init__(self):
        if self.kind not in DOUBLINGS:
            raise SurfaceError(f"unknown doubling kind {self.kind}")

    def dsl(self) -> str:
        return f"doub({self.base},{self.kind})"


@dataclass(frozen=True)
class ConnSum:
    inner: "Descriptor"
    piece: NoneqSurface

    def dsl(self) -> str:
        return f"{self.inner.dsl()}#{self.piece}"


@dataclass(frozen=True)
class Surgery:
    inner: "Descriptor"
    kind: str

    def __post_init__(self):
        if self.kind not in SURGERIES:
            raise SurfaceError(f"unknown surgery {self.kind}")

    def dsl(self) -> str:
        return f"{self.inner.dsl()}+{self.kind}"


Descriptor = Union[TrivialSurface, Sphere, FreeCover, Doubling, ConnSum, Surgery]

S20, S21, S22, S2a = (Sphere(k) for k in SPHERES)
T1ANTI = FreeCover(N(2), (1, 1), alias="T1anti")


@dataclass(frozen=True)
class Invariants:
    F: int
    C: int
    beta: int
    is_free: bool = False
    is_trivial: bool = False

    def to_json(self) -> dict:
        return {"F": self.F, "C": self.C, "beta": self.beta,
                "free": self.is_free, "trivial": self.is_trivial}


def invariants(d: Descriptor) -> Invariants:
    if isinstance(d, TrivialSurface):
        return Invariants(0, 0, d.surface.beta, is_trivial=True)
    if isinstance(d, Sphere):
        return {
            "S20": Invariants(0, 0, 0, is_trivial=True),
            "S21": Invariants(0, 1, 0),
            "S22": Invariants(2, 0, 0),
            "S2a": Invariants(0, 0, 0, is_free=True),
        }[d.kind]
    if isinstance(d, FreeCover):
        q = d.quotient
        if len(d.w) != q.beta:
            raise SurfaceError(f"w needs {q.beta} bits for {q}, got {len(d.w)}")
        if not any(d.w):
            raise SurfaceError("free cover needs a nonzero class w")
        return Invariants(0, 0, 2 * q.beta - 2, is_free=True)
    if isinstance(d, Doubling):
        if d.kind == "S11":
            return Invariants(2, 0, 2 * d.base.beta)
        return Invariants(0, 1, 2 * d.base.beta)
    inner = invariants(d.inner)
    if inner.is_trivial:
        what = "connected sum" if isinstance(d, ConnSum) else d.kind
        raise SurfaceError(f"{what} needs a nontrivial action, got {d.inner.dsl()}")
    if isinstance(d, ConnSum):
        return Invariants(inner.F, inner.C, inner.beta + 2 * d.piece.beta, inner.is_free)
    if d.kind == "S10AT":
        return Invariants(inner.F, inner.C + 1, inner.beta + 2)
    if d.kind == "S11AT":
        return Invariants(inner.F + 2, inner.C, inner.beta + 2)
    if inner.F == 0:
        raise SurfaceError(f"FM surgery needs an isolated fixed point; {d.inner.dsl()} has none")
    return Invariants(inner.F - 1, inner.C + 1, inner.beta + 1)


def free_data(d: Descriptor) -> tuple[SingularRing, tuple[int, ...]]:
    """(H^* of the quotient, w) for a free descriptor."""
    if isinstance(d, Sphere) and d.kind == "S2a":
        return sing_ring(N(1)), (1,)
    if isinstance(d, FreeCover):
        invariants(d)
        return sing_ring(d.quotient), d.w
    if isinstance(d, ConnSum):
        ring, w = free_data(d.inner)
        extra = sing_ring(d.piece)
        # w restricts to zero on the attached piece
        return ring.connected_sum(extra, f"_{_depth(d)}"), tuple(w) + (0,) * extra.beta
    raise SurfaceError(f"{d.dsl()} is not free")


def _depth(d: Descriptor) -> int:
    n = 0
    while isinstance(d, (ConnSum, Surgery)):
        n += 1
        d = d.inner
    return n


def _free_summands(inv: Invariants) -> tuple[list, list]:
    F, C, b = inv.F, inv.C, inv.beta
    if (b - F) % 2:
        raise SurfaceError(f"parity failure: beta={b} and F={F} differ mod 2")
    if C == 0:
        exps = {"S11": F - 2, "A0": (b - F) // 2 + 1}
        top = (2, 2)
    else:
        exps = {"S11": F + C - 1, "S10": C - 1, "A0": (b - F) // 2 + 1 - C}
        top = (2, 1)
    for name, e in exps.items():
        if e < 0:
            raise SurfaceError(f"negative exponent for {name} (F={F}, C={C}, beta={b})")
    free = [(0, 0)] + [(1, 1)] * exps["S11"] + [(1, 0)] * exps.get("S10", 0) + [top]
    return free, [(1, 0)] * exps["A0"]


def cohomology(d: Descriptor) -> NiceModule:
    inv = invariants(d)
    if inv.is_trivial:
        return NiceModule.build(free=[(0, 0)] + [(1, 0)] * inv.beta + [(2, 0)])
    if inv.is_free:
        ring, w = free_data(d)
        return NiceModule((), tuple(decompose_u_module(ring, w)))
    free, antipodal = _free_summands(inv)
    return NiceModule.build(free=free, antipodal=antipodal)


def singular_betti(d: Descriptor) -> tuple[int, int, int]:
    return (1, invariants(d).beta, 1)


# ---------------------------------------------------------------- sampling


def random_noneq(rng: random.Random, min_beta: int = 0, max_genus: int = 3) -> NoneqSurface:
    while True:
        if rng.random() < 0.5:
            s = M(rng.randint(0, max_genus))
        else:
            s = N(rng.randint(1, max_genus))
        if s.beta >= min_beta:
            return s


def random_descriptor(rng: random.Random, depth: int, trivial_rate: float = 0.05) -> Descriptor:
    """A random well-formed descriptor with at most ``depth`` operations."""
    if rng.random() < trivial_rate:
        return rng.choice([S20, TrivialSurface(random_noneq(rng))])
    roll = rng.randrange(6)
    if roll == 0:
        d: Descriptor = rng.choice([S21, S22])
    elif roll == 1:
        d = rng.choice([S2a, T1ANTI])
    elif roll == 2:
        q = random_noneq(rng, min_beta=1)
        w = [0] * q.beta
        while not any(w):
            w = [rng.randint(0, 1) for _ in range(q.beta)]
        d = FreeCover(q, tuple(w))
    else:
        d = Doubling(random_noneq(rng), rng.choice(DOUBLINGS))
    for _ in range(rng.randint(0, depth)):
        inv = invariants(d)
        ops = ["S10AT", "S11AT", "#"] + (["FM"] if inv.F > 0 else [])
        op = rng.choice(ops)
        d = ConnSum(d, random_noneq(rng, max_genus=2)) if op == "#" else Surgery(d, op)
    return d
