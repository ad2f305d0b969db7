"""Arithmetic in the bigraded coefficient ring M2 and in the rings Lambda_r.

M2 is the mod 2 Bredon cohomology of a point.  As a Z/2-vector space it has
one basis monomial in each spot of two cones:

* the top cone ``rho^a tau^b`` (a, b >= 0) in bidegree (a, a + b);
* the bottom cone ``theta/(rho^a tau^b)`` in bidegree (-a, -2 - a - b).

theta = theta/(rho^0 tau^0) sits in (0, -2).  Top monomials multiply as
polynomials, a top monomial divides a bottom one when the exponents allow,
and the product of two bottom monomials is zero.

Lambda_r = tau^{-1} M2 / (rho^{r+1}) has Z/2-basis rho^a tau^b with
0 <= a <= r and b any integer.

Elements are finite sets of monomials; addition is symmetric difference.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Union

TOP = "top"
BOT = "bot"


@dataclass(frozen=True, order=True)
class Bidegree:
    p: int
    q: int

    def __add__(self, other: "Bidegree") -> "Bidegree":
        return Bidegree(self.p + other.p, self.q + other.q)

    def __sub__(self, other: "Bidegree") -> "Bidegree":
        return Bidegree(self.p - other.p, self.q - other.q)

    def __iter__(self):
        yield self.p
        yield self.q

    def __str__(self) -> str:
        return f"({self.p},{self.q})"


ZERO_DEGREE = Bidegree(0, 0)


@dataclass(frozen=True, order=True)
class M2Monomial:
    kind: str
    a: int
    b: int

    def __post_init__(self):
        if self.kind not in (TOP, BOT):
            raise ValueError(f"unknown monomial kind {self.kind!r}")
        if self.a < 0 or self.b < 0:
            raise ValueError("monomial exponents must be nonnegative")

    @property
    def bidegree(self) -> Bidegree:
        if self.kind == TOP:
            return Bidegree(self.a, self.a + self.b)
        return Bidegree(-self.a, -2 - self.a - self.b)

    def render(self, star: bool = False) -> str:
        return _render_monomial(self, star)

    def __str__(self) -> str:
        return self.render()


def Top(a: int, b: int) -> M2Monomial:
    return M2Monomial(TOP, a, b)


def Bot(a: int, b: int) -> M2Monomial:
    return M2Monomial(BOT, a, b)


def monomial_mul(x: M2Monomial, y: M2Monomial) -> M2Monomial | None:
    """Product of two monomials, or None when it vanishes."""
    if x.kind == TOP and y.kind == TOP:
        return Top(x.a + y.a, x.b + y.b)
    if x.kind == BOT and y.kind == BOT:
        return None
    t, d = (x, y) if x.kind == TOP else (y, x)
    if d.a >= t.a and d.b >= t.b:
        return Bot(d.a - t.a, d.b - t.b)
    return None


@dataclass(frozen=True)
class M2Elt:
    monomials: frozenset = frozenset()

    @staticmethod
    def of(*monos: M2Monomial) -> "M2Elt":
        out: set = set()
        for m in monos:
            out ^= {m}
        return M2Elt(frozenset(out))

    def __add__(self, other: "M2Elt") -> "M2Elt":
        return M2Elt(self.monomials ^ other.monomials)

    def __mul__(self, other: "M2Elt | M2Monomial") -> "M2Elt":
        if isinstance(other, M2Monomial):
            other = M2Elt.of(other)
        return m2_mul(self, other)

    def __bool__(self) -> bool:
        return bool(self.monomials)

    def is_zero(self) -> bool:
        return not self.monomials

    def sorted(self) -> list[M2Monomial]:
        return sorted(self.monomials, key=lambda m: (m.kind == BOT, m.a, m.b))

    def bidegrees(self) -> set[Bidegree]:
        return {m.bidegree for m in self.monomials}

    @property
    def bidegree(self) -> Bidegree:
        degs = self.bidegrees()
        if len(degs) != 1:
            raise ValueError("element is zero or not homogeneous")
        return next(iter(degs))

    def is_homogeneous(self) -> bool:
        return len(self.bidegrees()) <= 1

    def render(self, star: bool = False) -> str:
        if not self.monomials:
            return "0"
        return " + ".join(m.render(star) for m in self.sorted())

    def __str__(self) -> str:
        return self.render()


ONE = M2Elt.of(Top(0, 0))
ZERO = M2Elt()
RHO = M2Elt.of(Top(1, 0))
TAU = M2Elt.of(Top(0, 1))
THETA = M2Elt.of(Bot(0, 0))


def m2_mul(x: M2Elt, y: M2Elt) -> M2Elt:
    out: set = set()
    for m in x.monomials:
        for n in y.monomials:
            prod = monomial_mul(m, n)
            if prod is not None:
                out ^= {prod}
    return M2Elt(frozenset(out))


def m2_dim_at(p: int, q: int) -> int:
    return int((0 <= p <= q) or (p <= 0 and q <= p - 2))


def m2_basis_at(p: int, q: int) -> list[M2Monomial]:
    """The (at most one) monomial in bidegree (p, q)."""
    if 0 <= p <= q:
        return [Top(p, q - p)]
    if p <= 0 and q <= p - 2:
        return [Bot(-p, p - 2 - q)]
    return []


@dataclass(frozen=True)
class LambdaElt:
    r: int
    monomials: frozenset = frozenset()

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("torsion bound r must be nonnegative")
        for a, _ in self.monomials:
            if not 0 <= a <= self.r:
                raise ValueError(f"rho exponent {a} outside [0, {self.r}]")

    @staticmethod
    def of(r: int, *monos: tuple[int, int]) -> "LambdaElt":
        out: set = set()
        for a, b in monos:
            if 0 <= a <= r:
                out ^= {(a, b)}
        return LambdaElt(r, frozenset(out))

    @staticmethod
    def unit(r: int) -> "LambdaElt":
        return LambdaElt(r, frozenset({(0, 0)}))

    def __add__(self, other: "LambdaElt") -> "LambdaElt":
        _check_r(self, other)
        return LambdaElt(self.r, self.monomials ^ other.monomials)

    def __mul__(self, other: "LambdaElt") -> "LambdaElt":
        return lambda_mul(self, other)

    def __bool__(self) -> bool:
        return bool(self.monomials)

    def is_zero(self) -> bool:
        return not self.monomials

    def sorted(self) -> list[tuple[int, int]]:
        return sorted(self.monomials)

    def bidegrees(self) -> set[Bidegree]:
        return {Bidegree(a, a + b) for a, b in self.monomials}

    @property
    def bidegree(self) -> Bidegree:
        degs = self.bidegrees()
        if len(degs) != 1:
            raise ValueError("element is zero or not homogeneous")
        return next(iter(degs))

    def is_homogeneous(self) -> bool:
        return len(self.bidegrees()) <= 1

    def render(self, star: bool = False) -> str:
        if not self.monomials:
            return "0"
        return " + ".join(render_top(a, b, star) for a, b in self.sorted())

    def __str__(self) -> str:
        return self.render()


def _check_r(x: LambdaElt, y: LambdaElt) -> None:
    if x.r != y.r:
        raise ValueError(f"mismatched torsion bounds {x.r} and {y.r}")


def lambda_mul(x: LambdaElt, y: LambdaElt) -> LambdaElt:
    _check_r(x, y)
    out: set = set()
    for a, b in x.monomials:
        for c, d in y.monomials:
            if a + c <= x.r:
                out ^= {(a + c, b + d)}
    return LambdaElt(x.r, frozenset(out))


def m2_act_on_lambda(s: M2Monomial, x: LambdaElt) -> LambdaElt:
    if s.kind == BOT:
        return LambdaElt(x.r)
    return lambda_mul(LambdaElt.of(x.r, (s.a, s.b)), x)


Scalar = Union[M2Elt, LambdaElt]


def forget_scalar(x: Scalar) -> int:
    """Image under the forgetful map to Z/2 = H^0_sing(pt)."""
    if not x.is_homogeneous():
        raise ValueError("forget_scalar needs a homogeneous element")
    total = 0
    if isinstance(x, LambdaElt):
        for a, _ in x.monomials:
            total ^= int(a == 0)
        return total
    for m in x.monomials:
        # bottom-cone classes are rho-divisible, hence forget to zero
        total ^= int(m.kind == TOP and m.a == 0)
    return total


# ---------------------------------------------------------------- text forms


def _pow(name: str, e: int) -> str:
    return name if e == 1 else f"{name}^{e}"


def render_top(a: int, b: int, star: bool = False) -> str:
    parts = []
    if a:
        parts.append(_pow("rho", a))
    if b:
        parts.append(_pow("tau", b))
    if not parts:
        return "1"
    return ("*" if star else " ").join(parts)


def _render_monomial(m: M2Monomial, star: bool = False) -> str:
    if m.kind == TOP:
        return render_top(m.a, m.b, star)
    if m.a == 0 and m.b == 0:
        return "theta"
    den = render_top(m.a, m.b, star)
    if m.a and m.b:
        den = f"({den})"
    return f"theta/{den}"


_FACTOR = re.compile(r"\s*\*?\s*(rho|tau)(?:\s*\^\s*(-?\d+))?\s*")


def _parse_top(text: str) -> tuple[int, int]:
    text = text.strip()
    if text == "1":
        return 0, 0
    a = b = 0
    pos = 0
    seen: set[str] = set()
    while pos < len(text):
        m = _FACTOR.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse monomial {text!r}")
        name, exp = m.group(1), int(m.group(2) or 1)
        if name in seen:
            raise ValueError(f"repeated factor {name} in {text!r}")
        seen.add(name)
        if name == "rho":
            a = exp
        else:
            b = exp
        pos = m.end()
    return a, b


def _split_sum(text: str) -> list[str]:
    terms = [t.strip() for t in text.split("+")]
    if any(not t for t in terms):
        raise ValueError(f"empty term in {text!r}")
    return terms


def parse_m2(text: str) -> M2Elt:
    """Inverse of ``M2Elt.render`` (either style)."""
    text = text.strip()
    if text == "0":
        return ZERO
    monos = []
    for term in _split_sum(text):
        if term.startswith("theta"):
            rest = term[len("theta"):].strip()
            if not rest:
                monos.append(Bot(0, 0))
                continue
            if not rest.startswith("/"):
                raise ValueError(f"cannot parse monomial {term!r}")
            den = rest[1:].strip()
            if den.startswith("(") and den.endswith(")"):
                den = den[1:-1]
            a, b = _parse_top(den)
            monos.append(Bot(a, b))
        else:
            a, b = _parse_top(term)
            monos.append(Top(a, b))
    return M2Elt.of(*monos)


def parse_lambda(text: str, r: int) -> LambdaElt:
    text = text.strip()
    if text == "0":
        return LambdaElt(r)
    return LambdaElt.of(r, *(_parse_top(t) for t in _split_sum(text)))


def monomials_up_to(n: int) -> Iterable[M2Monomial]:
    """All monomials with exponents at most n (both cones)."""
    for kind in (TOP, BOT):
        for a in range(n + 1):
            for b in range(n + 1):
                yield M2Monomial(kind, a, b)
