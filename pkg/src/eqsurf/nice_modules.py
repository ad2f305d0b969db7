"""Nice M2-modules: finite sums of shifted free modules and antipodal modules.

A free summand ``S(p,q)M2`` is a copy of M2 shifted to start at (p, q).  An
antipodal summand ``S(s,0)A_r`` is Lambda_r shifted to start in topological
degree s; since tau acts invertibly on it, every weight shift is isomorphic
to weight 0 and we always store it that way.

Elements are maps from summand identifiers (``F0, F1, ...`` for free
summands, ``A0, A1, ...`` for antipodal ones) to coefficients.  Rank
computations enumerate the monomial basis of a bidegree and use GF(2)
elimination, so they double as a brute-force oracle.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from ._gf2 import rank
from .coeff_ring import (
    TOP,
    Bidegree,
    Bot,
    LambdaElt,
    M2Elt,
    M2Monomial,
    ONE,
    Top,
    m2_act_on_lambda,
    m2_basis_at,
    m2_dim_at,
    m2_mul,
    render_top,
)


class NotDivisibleError(ValueError):
    """Raised when dividing by tau is not possible inside a top cone."""


@dataclass(frozen=True, order=True)
class FreeSummand:
    p: int
    q: int

    @property
    def shift(self) -> Bidegree:
        return Bidegree(self.p, self.q)

    def label(self) -> str:
        return "M2" if (self.p, self.q) == (0, 0) else f"S({self.p},{self.q})M2"


@dataclass(frozen=True, order=True)
class AntipodalSummand:
    s: int
    r: int

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("antipodal torsion length must be nonnegative")

    @staticmethod
    def of(s: int, r: int, weight: int = 0) -> "AntipodalSummand":
        # tau is invertible on A_r, so the weight shift is forgotten
        return AntipodalSummand(s, r)

    @property
    def end(self) -> int:
        return self.s + self.r

    def label(self) -> str:
        return f"A{self.r}" if self.s == 0 else f"S({self.s},0)A{self.r}"


Summand = Union[FreeSummand, AntipodalSummand]
Key = tuple  # (summand id, M2Monomial | (a, b))


@dataclass(frozen=True)
class NiceModule:
    free: tuple[FreeSummand, ...] = ()
    antipodal: tuple[AntipodalSummand, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "free", tuple(self.free))
        object.__setattr__(self, "antipodal", tuple(self.antipodal))

    @staticmethod
    def build(free: Iterable = (), antipodal: Iterable = ()) -> "NiceModule":
        """Build from (p, q) pairs and (s, r) or (s, weight, r) tuples."""
        fs = [f if isinstance(f, FreeSummand) else FreeSummand(*f) for f in free]
        ans = []
        for a in antipodal:
            if isinstance(a, AntipodalSummand):
                ans.append(a)
            elif len(a) == 3:
                ans.append(AntipodalSummand.of(a[0], a[2], weight=a[1]))
            else:
                ans.append(AntipodalSummand(*a))
        return NiceModule(tuple(fs), tuple(ans))

    # identifiers -------------------------------------------------------

    def ids(self) -> list[str]:
        return [f"F{i}" for i in range(len(self.free))] + [
            f"A{j}" for j in range(len(self.antipodal))
        ]

    def summand(self, sid: str) -> Summand:
        idx = int(sid[1:])
        if sid[0] == "F":
            return self.free[idx]
        if sid[0] == "A":
            return self.antipodal[idx]
        raise KeyError(sid)

    def items(self) -> list[tuple[str, Summand]]:
        return [(sid, self.summand(sid)) for sid in self.ids()]

    # constructions -----------------------------------------------------

    def __add__(self, other: "NiceModule") -> "NiceModule":
        return NiceModule(self.free + other.free, self.antipodal + other.antipodal)

    def shifted(self, n: int, q: int) -> "NiceModule":
        return NiceModule(
            tuple(FreeSummand(f.p + n, f.q + q) for f in self.free),
            tuple(AntipodalSummand(a.s + n, a.r) for a in self.antipodal),
        )

    def canonical(self) -> "NiceModule":
        return NiceModule(tuple(sorted(self.free)), tuple(sorted(self.antipodal)))

    @property
    def max_r(self) -> int:
        return max((a.r for a in self.antipodal), default=0)

    # text and json -----------------------------------------------------

    def summands_text(self) -> str:
        def order(x: Summand):
            if isinstance(x, FreeSummand):
                return (x.p, 0, x.q)
            return (x.s, 1, x.r)

        counts = Counter(list(self.free) + list(self.antipodal))
        if not counts:
            return "0"
        parts = []
        for summand in sorted(counts, key=order):
            n = counts[summand]
            parts.append(summand.label() if n == 1 else f"{n}*{summand.label()}")
        return " + ".join(parts)

    def __str__(self) -> str:
        return self.summands_text()

    def to_json(self) -> dict:
        m = self.canonical()
        return {
            "free": [{"p": f.p, "q": f.q} for f in m.free],
            "antipodal": [{"s": a.s, "r": a.r} for a in m.antipodal],
        }

    @staticmethod
    def from_json(doc: Mapping | str) -> "NiceModule":
        if isinstance(doc, str):
            doc = json.loads(doc)
        return NiceModule.build(
            free=[(f["p"], f["q"]) for f in doc.get("free", [])],
            antipodal=[(a["s"], a["r"]) for a in doc.get("antipodal", [])],
        )


# ------------------------------------------------------------------ elements


@dataclass(frozen=True)
class ModuleElement:
    terms: tuple = field(default=())

    @staticmethod
    def from_dict(d: Mapping[str, object]) -> "ModuleElement":
        return ModuleElement(tuple(sorted((k, v) for k, v in d.items() if v)))

    def as_dict(self) -> dict:
        return dict(self.terms)

    def __add__(self, other: "ModuleElement") -> "ModuleElement":
        d = self.as_dict()
        for k, v in other.terms:
            d[k] = d[k] + v if k in d else v
        return ModuleElement.from_dict(d)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for sid, c in self.terms:
            for m in c.sorted():
                mono = m.render(True) if isinstance(m, M2Monomial) else render_top(*m, True)
                parts.append(sid if mono == "1" else f"{mono}*{sid}")
        return " + ".join(parts)


ZERO_ELEMENT = ModuleElement()


def generator(M: NiceModule, sid: str) -> ModuleElement:
    summand = M.summand(sid)
    if isinstance(summand, FreeSummand):
        return ModuleElement(((sid, ONE),))
    return ModuleElement(((sid, LambdaElt.unit(summand.r)),))


def element_bidegrees(M: NiceModule, x: ModuleElement) -> set[Bidegree]:
    out = set()
    for sid, c in x.terms:
        summand = M.summand(sid)
        base = summand.shift if isinstance(summand, FreeSummand) else Bidegree(summand.s, 0)
        out |= {base + d for d in c.bidegrees()}
    return out


def act(s: M2Monomial | M2Elt, x: ModuleElement) -> ModuleElement:
    """Scalar action of an M2 monomial (or element) on a module element."""
    if isinstance(s, M2Elt):
        out = ZERO_ELEMENT
        for m in s.monomials:
            out = out + act(m, x)
        return out
    d = {}
    for sid, c in x.terms:
        if isinstance(c, LambdaElt):
            d[sid] = m2_act_on_lambda(s, c)
        else:
            d[sid] = m2_mul(M2Elt.of(s), c)
    return ModuleElement.from_dict(d)


def act_laurent(a: int, b: int, x: ModuleElement) -> ModuleElement:
    """Multiply by rho^a tau^b where b may be negative.

    tau-division is defined on antipodal coefficients and on bottom cones;
    in a top cone it needs enough powers of tau to cancel.
    """
    d = {}
    for sid, c in x.terms:
        if isinstance(c, LambdaElt):
            d[sid] = LambdaElt.of(c.r, *((u + a, v + b) for u, v in c.monomials))
            continue
        monos = []
        for m in c.monomials:
            if m.kind == TOP:
                if m.b + b < 0:
                    raise NotDivisibleError(f"{m} is not divisible by tau^{-b}")
                monos.append(Top(m.a + a, m.b + b))
            elif m.a >= a and m.b - b >= 0:
                monos.append(Bot(m.a - a, m.b - b))
        d[sid] = M2Elt.of(*monos)
    return ModuleElement.from_dict(d)


# ------------------------------------------------------------ dimension data


def _antipodal_basis(s: AntipodalSummand, p: int, q: int) -> list[tuple[int, int]]:
    a = p - s.s
    if 0 <= a <= s.r:
        return [(a, q - a)]
    return []


def basis_at(M: NiceModule, p: int, q: int) -> list[Key]:
    """Monomial basis of M in bidegree (p, q) as (summand id, monomial) keys."""
    keys: list[Key] = []
    for sid, summand in M.items():
        if isinstance(summand, FreeSummand):
            keys += [(sid, m) for m in m2_basis_at(p - summand.p, q - summand.q)]
        else:
            keys += [(sid, m) for m in _antipodal_basis(summand, p, q)]
    return keys


def key_element(M: NiceModule, key: Key) -> ModuleElement:
    sid, mono = key
    summand = M.summand(sid)
    if isinstance(summand, FreeSummand):
        return ModuleElement(((sid, M2Elt.of(mono)),))
    return ModuleElement(((sid, LambdaElt.of(summand.r, mono)),))


def vectorize(x: ModuleElement, keys: list[Key]) -> int:
    index = {k: i for i, k in enumerate(keys)}
    v = 0
    for sid, c in x.terms:
        for m in c.monomials:
            if (sid, m) not in index:
                raise ValueError(f"term {m} on {sid} is outside the given basis")
            v ^= 1 << index[(sid, m)]
    return v


def dim_at(M: NiceModule, p: int, q: int) -> int:
    total = sum(m2_dim_at(p - f.p, q - f.q) for f in M.free)
    return total + sum(1 for a in M.antipodal if a.s <= p <= a.end)


def multiplication_rank(M: NiceModule, s: M2Monomial, p: int, q: int) -> int:
    """Rank of x -> s*x from bidegree (p, q) to (p, q) + |s|."""
    src = basis_at(M, p, q)
    if not src:
        return 0
    d = s.bidegree
    tgt = basis_at(M, p + d.p, q + d.q)
    return rank(vectorize(act(s, key_element(M, k)), tgt) for k in src)


def rho_rank_at(M: NiceModule, p: int, q: int) -> int:
    return multiplication_rank(M, Top(1, 0), p, q)


def tau_rank_at(M: NiceModule, p: int, q: int) -> int:
    return multiplication_rank(M, Top(0, 1), p, q)


def iso_equal(M: NiceModule, N: NiceModule) -> bool:
    return Counter(M.free) == Counter(N.free) and Counter(M.antipodal) == Counter(
        N.antipodal
    )


@dataclass(frozen=True)
class Window:
    pmin: int
    pmax: int
    qmin: int
    qmax: int

    def __post_init__(self):
        if self.pmin > self.pmax or self.qmin > self.qmax:
            raise ValueError(f"empty or inverted window {self}")

    def cells(self) -> Iterable[tuple[int, int]]:
        for p in range(self.pmin, self.pmax + 1):
            for q in range(self.qmin, self.qmax + 1):
                yield p, q

    def __str__(self) -> str:
        return f"p in [{self.pmin},{self.pmax}], q in [{self.qmin},{self.qmax}]"


DEFAULT_WINDOW = Window(-1, 4, -4, 5)


def render_grid(M: NiceModule, window: Window | tuple = DEFAULT_WINDOW) -> str:
    if not isinstance(window, Window):
        window = Window(*window)
    ps = list(range(window.pmin, window.pmax + 1))
    rows = [["q\\p"] + [str(p) for p in ps]]
    for q in range(window.qmax, window.qmin - 1, -1):
        cells = [str(dim_at(M, p, q)) for p in ps]
        rows.append([str(q)] + [c if c != "0" else "." for c in cells])
    width = max(len(c) for row in rows for c in row)
    lines = [" ".join(c.rjust(width) for c in row) for row in rows]
    lines.append(f"summands: {M.summands_text()}")
    return "\n".join(lines)
