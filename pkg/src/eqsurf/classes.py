"""Thom classes, fundamental classes and ring presentations.

Bookkeeping rules:

* A bundle of dimension n over a nonfree base whose fixed components carry
  normal representations of weights q_i has a Thom class in (n, max q_i).
  Restricted to component i it is tau^(q - q_i) rho^(q_i) times the Thom
  class there.  Over a free base there is one class in every weight,
  linked by tau.
* A submanifold Y of codimension k has a fundamental class [Y] in (k, q_Y)
  with q_Y the maximal normal weight over the fixed set; a free
  submanifold has a tau-linked family [Y]_q.
* For transverse Y, Z with W = Y n Z, [Y][Z] is [W] up to a power of tau
  (nonfree case) or the member of the family in the summed weight.

The catalog holds full ring presentations for a few small surfaces.  Each
presentation comes with a module basis (words in the generators) and a
multiplication table of basis words by generators; ``normalize`` evaluates
an expression in that basis.  Free family generators take Lambda
coefficients, so negative powers of tau are allowed on them.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import cached_property
from itertools import permutations, combinations_with_replacement
from typing import Iterable, Mapping, Union

from .coeff_ring import (
    BOT,
    TOP,
    Bidegree,
    Bot,
    LambdaElt,
    M2Elt,
    M2Monomial,
    Top,
    forget_scalar,
    m2_dim_at,
    render_top,
)
from .nice_modules import NiceModule, NotDivisibleError
from .surfaces import (
    ConnSum,
    Descriptor,
    Doubling,
    M,
    N,
    S2a,
    S20,
    S21,
    S22,
    SingularRing,
    Sphere,
    Surgery,
    T1ANTI,
    TrivialSurface,
    cohomology,
    free_data,
    invariants,
    sing_ring,
    u_module_pieces,
)

# free family coefficients live in Lambda_r; on a surface rho^3 kills them
FREE_R = 2


class ClassError(ValueError):
    pass


class UndefinedProductError(ClassError):
    pass


class CatalogError(ClassError):
    pass


# --------------------------------------------------------------- Thom classes


@dataclass(frozen=True)
class TauFamily:
    """The family {(codim, q) : q in Z} linked by multiplication with tau."""

    codim: int

    def at(self, q: int) -> Bidegree:
        return Bidegree(self.codim, q)

    def __str__(self) -> str:
        return f"({self.codim},q)"


@dataclass(frozen=True)
class FamilySelector:
    """The member of weight ``weight`` in a tau-linked family."""

    weight: int

    def __str__(self) -> str:
        return f"u_{self.weight}"


@dataclass(frozen=True)
class ThomBundleData:
    base_free: bool
    n: int
    fixed_weights: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "fixed_weights", tuple(self.fixed_weights))
        if self.n < 0:
            raise ClassError("bundle dimension must be nonnegative")
        if self.base_free != (not self.fixed_weights):
            raise ClassError("fixed weights must be given exactly when the base is nonfree")
        if any(not 0 <= q <= self.n for q in self.fixed_weights):
            raise ClassError(f"weights {self.fixed_weights} outside [0, {self.n}]")

    @property
    def weight(self) -> int:
        return max(self.fixed_weights)


def thom_bidegree(b: ThomBundleData) -> Bidegree | TauFamily:
    if b.base_free:
        return TauFamily(b.n)
    return Bidegree(b.n, b.weight)


def thom_restrict_fixed(b: ThomBundleData) -> list[M2Monomial]:
    if b.base_free:
        raise ClassError("a free base has no fixed components")
    q = b.weight
    return [Top(qi, q - qi) for qi in b.fixed_weights]


def thom_pullback_coeff(src_max_q: int, pulled_max_q: int, target_free: bool
                        ) -> M2Monomial | FamilySelector:
    if target_free:
        return FamilySelector(src_max_q)
    if pulled_max_q > src_max_q:
        raise ClassError(f"pulled-back weight {pulled_max_q} exceeds source weight {src_max_q}")
    return Top(0, src_max_q - pulled_max_q)


# --------------------------------------------------------- fundamental classes


@dataclass(frozen=True)
class ClassDescriptor:
    """[Y] for a submanifold Y; ``weights`` is None for free Y."""

    name: str
    codim: int
    weights: tuple[int, ...] | None = None
    ambient: Descriptor | None = field(default=None, compare=False, repr=False)
    components: tuple[str, ...] = ()
    weight: int = 0  # selected member of a free family

    def __post_init__(self):
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(self.weights))
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def is_free(self) -> bool:
        return self.weights is None

    def at(self, q: int) -> "ClassDescriptor":
        if not self.is_free:
            raise ClassError(f"[{self.name}] is not a free family")
        return replace(self, weight=q)

    @property
    def q(self) -> int:
        """Weight of the class (selected member for a family)."""
        if self.is_free:
            return self.weight
        if not self.weights:
            raise ClassError(f"[{self.name}] has no fixed components")
        return max(self.weights)

    @property
    def bidegree(self) -> Bidegree:
        return Bidegree(self.codim, self.q)

    def component_names(self) -> tuple[str, ...]:
        if self.components:
            return self.components
        return tuple(f"{self.name}_{i}" for i in range(len(self.weights or ())))

    def label(self) -> str:
        if self.is_free:
            return f"[{self.name}]_q ({self.codim},q)"
        return f"[{self.name}] {self.bidegree}"


def class_bidegree(c: ClassDescriptor) -> Bidegree | TauFamily:
    if c.is_free:
        return TauFamily(c.codim)
    if not c.weights:
        raise ClassError(f"[{c.name}] is nonfree but has no fixed components")
    if c.ambient is not None and invariants(c.ambient).is_free:
        raise ClassError(f"[{c.name}] is nonfree but its ambient surface is free")
    return Bidegree(c.codim, max(c.weights))


Coefficient = Union[M2Elt, LambdaElt]


@dataclass(frozen=True)
class ClassExpression:
    """Z/2-combination of named generators with M2 or Lambda coefficients."""

    terms: tuple = ()

    @staticmethod
    def from_dict(d: Mapping[str, Coefficient]) -> "ClassExpression":
        return ClassExpression(tuple(sorted((k, v) for k, v in d.items() if v)))

    @staticmethod
    def single(name: str, coeff: Coefficient) -> "ClassExpression":
        return ClassExpression.from_dict({name: coeff})

    def as_dict(self) -> dict:
        return dict(self.terms)

    def __add__(self, other: "ClassExpression") -> "ClassExpression":
        d = self.as_dict()
        for k, v in other.terms:
            d[k] = d[k] + v if k in d else v
        return ClassExpression.from_dict(d)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def coefficient(self, name: str) -> Coefficient | None:
        return self.as_dict().get(name)

    def render(self, order: Iterable[str] | None = None, brackets: bool = False) -> str:
        if not self.terms:
            return "0"
        d = self.as_dict()
        names = [n for n in (order or []) if n in d] + sorted(n for n in d if n not in set(order or []))
        parts = []
        for name in names:
            c = d[name]
            if isinstance(c, LambdaElt):
                for a, b in c.sorted():
                    if brackets:
                        s = render_top(a, 0, True)
                        gen = f"[{name}]_{b}"
                        parts.append(gen if s == "1" else f"{s}*{gen}")
                    else:
                        parts.append(_term(render_top(a, b, True), name))
            else:
                gen = f"[{name}]" if brackets else name
                for m in c.sorted():
                    parts.append(_term(m.render(True), gen))
        return " + ".join(parts)

    def __str__(self) -> str:
        return self.render(brackets=True)


def _term(scalar: str, word: str) -> str:
    if word == "1":
        return scalar
    return word if scalar == "1" else f"{scalar}*{word}"


ZERO_EXPR = ClassExpression()


def product(y: ClassDescriptor, z: ClassDescriptor, w: ClassDescriptor | None) -> ClassExpression:
    """[Y][Z] for transverse Y, Z with intersection W (None if empty)."""
    if w is None:
        return ZERO_EXPR
    if w.codim != y.codim + z.codim:
        raise ClassError(
            f"codimensions do not add: {y.codim} + {z.codim} != {w.codim} for [{w.name}]"
        )
    if y.is_free or z.is_free:
        if not w.is_free:
            raise ClassError(f"[{w.name}] must be free: it lies in a free submanifold")
        return ClassExpression.single(w.name, LambdaElt.of(FREE_R, (0, y.q + z.q)))
    if w.is_free:
        return ClassExpression.single(w.name, LambdaElt.of(FREE_R, (0, y.q + z.q)))
    j = y.q + z.q - w.q
    if j < 0:
        raise ClassError(f"weights {y.q} + {z.q} < {w.q}: impossible intersection data")
    return ClassExpression.single(w.name, M2Elt.of(Top(0, j)))


def expression_bidegrees(e: ClassExpression, classes: Mapping[str, ClassDescriptor]) -> set:
    out = set()
    for name, c in e.terms:
        cls = classes[name]
        if isinstance(c, LambdaElt):
            out |= {Bidegree(cls.codim + a, a + b) for a, b in c.monomials}
        else:
            out |= {cls.bidegree + m.bidegree for m in c.monomials}
    return out


def restrict_to_fixed(c: ClassDescriptor) -> ClassExpression:
    if c.is_free:
        raise ClassError(f"[{c.name}] is free and misses the fixed set")
    q = c.q
    return ClassExpression.from_dict({
        comp: M2Elt.of(Top(qi, q - qi)) for comp, qi in zip(c.component_names(), c.weights)
    })


@dataclass(frozen=True)
class SingularExpression:
    classes: frozenset

    def render(self) -> str:
        if not self.classes:
            return "0"
        return " + ".join(f"[{n}]_sing" for n in sorted(self.classes))


def forget(e: ClassExpression) -> SingularExpression:
    out: set = set()
    for name, c in e.terms:
        if forget_scalar(c):
            out ^= {name}
    return SingularExpression(frozenset(out))


def conjugate_point_class(ambient: Descriptor, q: int) -> ClassExpression:
    """[x, sigma x]_q for a non-fixed point x."""
    inv = invariants(ambient)
    if inv.is_trivial:
        raise ClassError("a trivial action has no conjugate point pairs")
    if inv.is_free:
        return ClassExpression.single("x,sx", LambdaElt.of(FREE_R, (0, q)))
    k = 1 if inv.C > 0 else 2
    if q > k - 2:
        return ZERO_EXPR
    # bidegree (2, q) forces theta / tau^(k - 2 - q) on the class [p] in (2, k)
    return ClassExpression.single("p", M2Elt.of(Bot(0, k - 2 - q)))


# ------------------------------------------------------------ generator lists


def _nonfree(name: str, codim: int, weights, comps: Iterable[str] = ()) -> ClassDescriptor:
    return ClassDescriptor(name, codim, tuple(weights), components=tuple(comps))


def _family(name: str, codim: int) -> ClassDescriptor:
    return ClassDescriptor(name, codim, None)


@dataclass
class _Gens:
    unit: ClassDescriptor
    curves: list
    top: ClassDescriptor | None
    step: int = 0  # surgery/connected-sum steps taken so far


def _free_generators(d: Descriptor) -> list[ClassDescriptor]:
    ring, w = free_data(d)
    out = []
    for piece in u_module_pieces(ring, w):
        name = {"1": "X", "top": "pi*pt"}.get(piece.generator, f"pi*{piece.generator}")
        out.append(_family(name, piece.start))
    return out


def _gens(d: Descriptor) -> _Gens | list[ClassDescriptor]:
    """Generator bookkeeping; free surfaces return their family list."""
    inv = invariants(d)
    if inv.is_free:
        return _free_generators(d)
    unit = _nonfree("X", 0, [0])
    if inv.is_trivial:
        surf = d.surface if isinstance(d, TrivialSurface) else M(0)
        curves = [_nonfree(lab, 1, [0]) for lab in sing_ring(surf).labels]
        return _Gens(unit, curves, _nonfree("p", 2, [0]))
    if isinstance(d, Sphere):
        return _Gens(unit, [], _nonfree("p", 2, [1] if d.kind == "S21" else [2]))
    if isinstance(d, Doubling):
        curves = [_family(f"{lab}+s{lab}", 1) for lab in sing_ring(d.base).labels]
        return _Gens(unit, curves, _nonfree("p", 2, [2] if d.kind == "S11" else [1]))
    if isinstance(d, ConnSum):
        base = _gens(d.inner)
        step = base.step + 1
        curves = base.curves + [
            _family(f"{lab}.{step}+s{lab}.{step}", 1) for lab in sing_ring(d.piece).labels
        ]
        return _Gens(base.unit, curves, base.top, step)
    return _surgery_gens(d)


def _surgery_gens(d: Surgery) -> _Gens:
    inner = invariants(d.inner)
    base = _gens(d.inner)
    if isinstance(base, list):
        # a free base: its codimension-one pullback families generate the
        # antipodal summands, the new fixed set supplies the top class
        ring, _ = free_data(d.inner)
        curves = [_family(f"pi*{lab}", 1) for lab in ring.labels]
        top = _nonfree("p", 2, [1] if d.kind == "S10AT" else [2])
        return _Gens(_nonfree("X", 0, [0]), curves, top, 1)
    j = base.step + 1
    curves = list(base.curves)
    top = base.top
    if d.kind == "S10AT":
        curves.append(_nonfree(f"C{j}", 1, [1]))
        if inner.C >= 1:
            curves.append(_nonfree(f"G{j}", 1, [0, 0]))
        else:
            curves.append(_nonfree(f"G{j}", 1, [0, 1]))
            top = _nonfree("p", 2, [1])
    elif d.kind == "S11AT":
        curves.append(_nonfree(f"E{j}", 1, [1, 1]))
        curves.append(_nonfree(f"G{j}", 1, [1, 1]))
    elif inner.C >= 1:
        curves.append(_nonfree(f"G{j}", 1, [0, 0]))
    else:
        curves.append(_nonfree(f"K{j}", 1, [1]))
        top = _nonfree("p", 2, [1])
    return _Gens(base.unit, curves, top, j)


def module_generators(d: Descriptor) -> list[ClassDescriptor]:
    g = _gens(d)
    out = g if isinstance(g, list) else [g.unit, *g.curves, g.top]
    return [replace(c, ambient=d) for c in out]


def generator_coverage(d: Descriptor) -> tuple[bool, str]:
    """Do the generators match the summand generators of the cohomology?"""
    gens = module_generators(d)
    H = cohomology(d)
    have_free = Counter((c.codim, c.q) for c in gens if not c.is_free)
    want_free = Counter((f.p, f.q) for f in H.free)
    have_anti = Counter(c.codim for c in gens if c.is_free)
    want_anti = Counter(a.s for a in H.antipodal)
    ok = have_free == want_free and have_anti == want_anti
    detail = ""
    if not ok:
        detail = (f"free generators {sorted(have_free.elements())} vs summands "
                  f"{sorted(want_free.elements())}; families {sorted(have_anti.elements())} vs "
                  f"antipodal starts {sorted(want_anti.elements())}")
    return ok, detail


def generator_product(d: Descriptor, a: str, b: str) -> ClassExpression:
    """Products among surgery generators, where the constructions fix them.

    The new fixed circle C_j of an S10AT step misses every older generator
    and meets the path circle G_j in one point.  Other products are not
    determined by the generation argument and raise.
    """
    gens = {c.name: c for c in module_generators(d)}
    for n in (a, b):
        if n not in gens:
            raise ClassError(f"no generator [{n}] for {d.dsl()}")
    if a == "X" or b == "X":
        other = gens[b if a == "X" else a]
        return product(gens["X"], other, other)
    for c, other in ((a, b), (b, a)):
        m = re.fullmatch(r"C(\d+)", c)
        if not m:
            continue
        j = int(m.group(1))
        if other == f"G{j}":
            return product(gens[c], gens[other], gens["p"])
        mo = re.fullmatch(r"[CEGK](\d+)", other)
        if other != c and (mo is None or int(mo.group(1)) < j):
            return ZERO_EXPR
    raise UndefinedProductError(f"the product [{a}][{b}] is not determined for {d.dsl()}")


# ----------------------------------------------------------- ring presentations

Mono = tuple  # (kind, a, b); b may be negative for top monomials


def _smul(s: Mono, t: Mono) -> Mono | None:
    if s[0] == TOP and t[0] == TOP:
        return (TOP, s[1] + t[1], s[2] + t[2])
    if s[0] == BOT and t[0] == BOT:
        return None
    top, bot = (s, t) if s[0] == TOP else (t, s)
    a, b = bot[1] - top[1], bot[2] - top[2]
    return (BOT, a, b) if a >= 0 and b >= 0 else None


@dataclass(frozen=True)
class RingPresentation:
    key: str
    base: str  # "M2" or "tau^-1 M2"
    generators: tuple  # (name, (p, q))
    relations: tuple  # (lhs, rhs) as text
    basis: tuple  # (word, (p, q), r or None for a free summand)
    table: tuple  # ((basis word, generator), rhs as a basis combination)
    classes: tuple = ()  # (ClassDescriptor, polynomial at weight 0)
    intersections: tuple = ()  # (y, z, w or None)
    singular: tuple = ()  # (class name, tuple of singular labels)
    sing: SingularRing | None = None
    module: NiceModule | None = None
    descriptor: Descriptor | None = field(default=None, compare=False)

    @property
    def families(self) -> list[str]:
        kinds = {w: r for w, _, r in self.basis}
        return [g for g, _ in self.generators if kinds.get(g) is not None and self.base == "M2"]

    def text(self) -> str:
        gens = ",".join(g for g, _ in self.generators)
        rels = ", ".join(f"{l} = {r}" for l, r in self.relations)
        head = f"{self.base}[{gens}]/({rels})" if gens else f"{self.base}/({rels})"
        degs = " ".join(f"|{g}|=({p},{q})" for g, (p, q) in self.generators)
        out = f"{head}; {degs}" if degs else head
        if self.families:
            out += "; tau-divisible: " + " ".join(self.families)
        return out

    def to_json(self) -> dict:
        return {
            "key": self.key,
            "base": self.base,
            "generators": [{"name": g, "bidegree": list(d)} for g, d in self.generators],
            "relations": [{"lhs": l, "rhs": r} for l, r in self.relations],
            "basis": [{"word": w, "bidegree": list(d), "r": r} for w, d, r in self.basis],
            "text": self.text(),
        }

    @cached_property
    def model(self) -> "_Model":
        return _Model(self)

    def class_map(self) -> dict[str, ClassDescriptor]:
        return {c.name: c for c, _ in self.classes}

    def evaluate(self, text: str) -> dict:
        return self.model.evaluate(text)


class _Model:
    """Normal-form arithmetic for one presentation."""

    def __init__(self, pres: RingPresentation):
        self.pres = pres
        self.order = [w for w, _, _ in pres.basis]
        self.kind = {w: r for w, _, r in pres.basis}
        self.deg = {w: Bidegree(*d) for w, d, _ in pres.basis}
        self.gens = [g for g, _ in pres.generators]
        self.polys = {c.name: poly for c, poly in pres.classes}
        self.cls = {c.name: c for c, _ in pres.classes}
        self.table = {k: self.combination(rhs) for k, rhs in pres.table}
        for w in self.order:
            for g in self.gens:
                if (w, g) not in self.table:
                    raise CatalogError(f"{pres.key}: table misses {w} * {g}")

    # elements are dicts basis word -> frozenset of monomials

    def clean(self, d: dict) -> dict:
        out = {}
        for w, monos in d.items():
            r = self.kind[w]
            keep = set()
            for m in monos:
                if r is not None:
                    if m[0] == BOT or not 0 <= m[1] <= r:
                        continue
                elif m[0] == TOP and m[2] < 0:
                    raise NotDivisibleError(f"tau^{m[2]} on the free class {w}")
                keep ^= {m}
            if keep:
                out[w] = frozenset(keep)
        return out

    def add(self, x: dict, y: dict) -> dict:
        out = dict(x)
        for w, m in y.items():
            out[w] = out.get(w, frozenset()) ^ m
        return {w: m for w, m in out.items() if m}

    def scale(self, s: Mono, x: dict) -> dict:
        out: dict = {}
        for w, monos in x.items():
            acc: set = set()
            for m in monos:
                p = _smul(s, m)
                if p is not None:
                    acc ^= {p}
            out[w] = frozenset(acc)
        return self.clean(out)

    def unit(self) -> dict:
        return self.clean({"1": frozenset({(TOP, 0, 0)})})

    def word(self, w: str) -> dict:
        return {w: frozenset({(TOP, 0, 0)})}

    def times_gen(self, x: dict, g: str) -> dict:
        out: dict = {}
        for w, monos in x.items():
            for m in monos:
                out = self.add(out, self.scale(m, self.table[(w, g)]))
        return out

    def mul(self, x: dict, y: dict) -> dict:
        out: dict = {}
        for v, tmonos in y.items():
            gens = [] if v == "1" else v.split("*")
            for u, smonos in x.items():
                prod = self.word(u)
                for g in gens:
                    prod = self.times_gen(prod, g)
                for s in smonos:
                    for t in tmonos:
                        st = _smul(s, t)
                        if st is not None:
                            out = self.add(out, self.scale(st, prod))
        return out

    def combination(self, text: str) -> dict:
        """Parse 'scalar*word + ...' where every word is a basis word."""
        out: dict = {}
        text = text.strip()
        if text == "0":
            return out
        for term in text.split("+"):
            scalars, words = [], []
            for f in _split_factors(term):
                (scalars if _is_scalar(f) else words).append(f)
            w = "*".join(words) or "1"
            if w not in self.kind:
                raise CatalogError(f"{self.pres.key}: {w} is not a basis word")
            s = (TOP, 0, 0)
            for f in scalars:
                s = _smul(s, _scalar_mono(f))
                if s is None:
                    break
            if s is not None:
                out = self.add(out, self.clean({w: frozenset({s})}))
        return out

    def evaluate(self, text: str) -> dict:
        return _ExprParser(text, self).parse()

    def to_expression(self, x: dict) -> ClassExpression:
        d = {}
        for w, monos in x.items():
            r = self.kind[w]
            if r is None:
                d[w] = M2Elt.of(*(M2Monomial(k, a, b) for k, a, b in monos))
            else:
                d[w] = LambdaElt.of(r, *((a, b) for _, a, b in monos))
        return ClassExpression.from_dict(d)

    def from_expression(self, e: ClassExpression) -> dict:
        out: dict = {}
        for name, c in e.terms:
            if name in self.polys:
                base = self.evaluate(self.polys[name])
            else:
                base = self.unit()
                for g in ([] if name == "1" else name.split("*")):
                    if g not in self.gens:
                        raise CatalogError(f"{self.pres.key}: unknown generator or class {g}")
                    base = self.times_gen(base, g)
            if isinstance(c, LambdaElt):
                monos = [(TOP, a, b) for a, b in c.monomials]
            else:
                monos = [(m.kind, m.a, m.b) for m in c.monomials]
            for m in monos:
                out = self.add(out, self.scale(m, base))
        return out

    def dims(self, p: int, q: int) -> int:
        """Number of normal-form monomials in bidegree (p, q)."""
        total = 0
        for w in self.order:
            d, r = self.deg[w], self.kind[w]
            if r is None:
                total += m2_dim_at(p - d.p, q - d.q)
            else:
                total += int(0 <= p - d.p <= r)
        return total


_SCALAR = re.compile(r"^(rho|tau)(\^-?\d+)?$|^theta(/.*)?$|^1$")


def _split_factors(term: str) -> list[str]:
    return [f.strip() for f in term.replace(" ", "").split("*") if f.strip()]


def _is_scalar(f: str) -> bool:
    return bool(_SCALAR.match(f))


def _scalar_mono(f: str) -> Mono:
    if f == "1":
        return (TOP, 0, 0)
    if f.startswith("theta"):
        den = f[len("theta"):].lstrip("/").strip("()")
        a = b = 0
        for part in filter(None, den.split("*")):
            name, _, e = part.partition("^")
            if name == "rho":
                a = int(e or 1)
            else:
                b = int(e or 1)
        return (BOT, a, b)
    name, _, e = f.partition("^")
    e = int(e or 1)
    return (TOP, e, 0) if name == "rho" else (TOP, 0, e)


class ExpressionSyntaxError(ClassError):
    pass


_TOKEN = re.compile(r"\s*(?:(\[[^\]]*\])|(-?\d+)|([A-Za-z][A-Za-z0-9_']*)|(.))")


class _ExprParser:
    """expr := term ('+' term)*; term := factor ('*' factor)*;
    factor := atom ('^' int)?; atom := scalar | generator | [class]('_' int)? | '(' expr ')'
    """

    def __init__(self, text: str, model: _Model):
        self.text = text
        self.model = model
        self.toks = []
        for m in _TOKEN.finditer(text):
            if m.group(0).strip() == "":
                continue
            kind = "class" if m.group(1) else "int" if m.group(2) else "name" if m.group(3) else "sym"
            self.toks.append((kind, m.group(m.lastindex), m.start(m.lastindex)))
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("end", "", len(self.text))

    def take(self, value=None):
        tok = self.peek()
        if value is not None and tok[1] != value:
            raise ExpressionSyntaxError(f"expected {value!r} at position {tok[2]} in {self.text!r}")
        self.i += 1
        return tok

    def parse(self) -> dict:
        x = self.expr()
        if self.peek()[0] != "end":
            tok = self.peek()
            raise ExpressionSyntaxError(f"unexpected {tok[1]!r} at position {tok[2]}")
        return x

    def expr(self) -> dict:
        x = self.term()
        while self.peek()[1] == "+":
            self.take()
            x = self.model.add(x, self.term())
        return x

    def term(self) -> dict:
        scalar: Mono | None = (TOP, 0, 0)
        elem = None
        while True:
            kind, val = self.factor()
            if kind == "scalar":
                scalar = _smul(scalar, val) if (scalar is not None and val is not None) else None
            else:
                elem = val if elem is None else self.model.mul(elem, val)
            if self.peek()[1] != "*":
                break
            self.take()
        if scalar is None:
            return {}
        if elem is None:
            elem = self.model.unit()
        return self.model.scale(scalar, elem)

    def exponent(self) -> int:
        if self.peek()[1] == "^":
            self.take()
            kind, val, pos = self.take()
            if kind != "int":
                raise ExpressionSyntaxError(f"expected an integer exponent at position {pos}")
            return int(val)
        return 1

    def factor(self):
        kind, val, pos = self.take()
        if kind == "name" and val in ("rho", "tau"):
            e = self.exponent()
            if val == "rho" and e < 0:
                raise ExpressionSyntaxError(f"negative power of rho at position {pos}")
            return "scalar", (TOP, e, 0) if val == "rho" else (TOP, 0, e)
        if kind == "name" and val == "theta":
            a = b = 0
            if self.peek()[1] == "/":
                self.take()
                paren = self.peek()[1] == "("
                if paren:
                    self.take()
                while True:
                    k2, v2, p2 = self.take()
                    if v2 not in ("rho", "tau"):
                        raise ExpressionSyntaxError(f"expected rho or tau at position {p2}")
                    e = self.exponent()
                    if e < 0:
                        raise ExpressionSyntaxError(f"negative divisor at position {p2}")
                    if v2 == "rho":
                        a = e
                    else:
                        b = e
                    if not paren or self.peek()[1] == ")":
                        break
                    if self.peek()[1] == "*":
                        self.take()
                if paren:
                    self.take(")")
            e = self.exponent()
            return "scalar", (BOT, a, b) if e == 1 else None
        if kind == "int":
            if val == "1":
                return "scalar", (TOP, 0, 0)
            if val == "0":
                return "scalar", None
            raise ExpressionSyntaxError(f"only 0 and 1 are allowed as constants (position {pos})")
        if kind == "name":
            if val not in self.model.gens:
                raise ExpressionSyntaxError(f"unknown generator {val!r} at position {pos}")
            x = self.model.times_gen(self.model.unit(), val)
            return "elem", self._power(x, self.exponent())
        if kind == "class":
            name = val[1:-1].strip()
            if name not in self.model.polys:
                raise ExpressionSyntaxError(f"unknown class [{name}] at position {pos}")
            x = self.model.evaluate(self.model.polys[name])
            if self.peek()[1] == "_" or (self.peek()[0] == "name" and self.peek()[1].startswith("_")):
                q = self._subscript()
                if not self.model.cls[name].is_free:
                    raise ExpressionSyntaxError(f"[{name}] is not a free family")
                x = self.model.scale((TOP, 0, q), x)
            return "elem", self._power(x, self.exponent())
        if val == "(":
            x = self.expr()
            self.take(")")
            return "elem", self._power(x, self.exponent())
        raise ExpressionSyntaxError(f"unexpected {val!r} at position {pos}")

    def _subscript(self) -> int:
        kind, val, pos = self.take()
        if kind == "name":  # tokenizer glued "_2" into a name
            try:
                return int(val[1:])
            except ValueError:
                raise ExpressionSyntaxError(f"bad weight subscript at position {pos}")
        kind, val, pos = self.take()
        if kind != "int":
            raise ExpressionSyntaxError(f"expected a weight after '_' at position {pos}")
        return int(val)

    def _power(self, x: dict, e: int) -> dict:
        if e < 0:
            raise ExpressionSyntaxError("negative powers of classes are not defined")
        out = self.model.unit()
        for _ in range(e):
            out = self.model.mul(out, x)
        return out


def normalize(e: ClassExpression | str, pres: RingPresentation) -> ClassExpression:
    model = pres.model
    x = model.evaluate(e) if isinstance(e, str) else model.from_expression(e)
    return model.to_expression(x)


def render_normal(e: ClassExpression, pres: RingPresentation) -> str:
    return e.render(order=pres.model.order)


def relation_pairs(pres: RingPresentation) -> list[tuple[ClassExpression, ClassExpression]]:
    return [(normalize(l, pres), normalize(r, pres)) for l, r in pres.relations]


def confluence_check(pres: RingPresentation, max_len: int = 4) -> list[str]:
    """Every ordering of every generator word of length <= max_len agrees."""
    model = pres.model
    bad = []
    for n in range(1, max_len + 1):
        for word in combinations_with_replacement(model.gens, n):
            results = set()
            for order in set(permutations(word)):
                x = model.unit()
                for g in order:
                    x = model.times_gen(x, g)
                results.add(tuple(sorted((w, tuple(sorted(m))) for w, m in x.items())))
            if len(results) > 1:
                bad.append("*".join(word))
    return bad


# ----------------------------------------------------------------- catalog


def _c(name, codim, weights=None, **kw) -> ClassDescriptor:
    return ClassDescriptor(name, codim, None if weights is None else tuple(weights), **kw)


def _catalog() -> dict[str, RingPresentation]:
    cat = {}

    def add(p: RingPresentation):
        ambient = p.descriptor
        p = replace(p, classes=tuple((replace(c, ambient=ambient), poly) for c, poly in p.classes))
        cat[p.key] = p

    M2_ = "M2"
    add(RingPresentation(
        key="S(1,1)", base=M2_,
        generators=(("x", (1, 1)),),
        relations=(("x^2", "rho*x"),),
        basis=(("1", (0, 0), None), ("x", (1, 1), None)),
        table=((("1", "x"), "x"), (("x", "x"), "rho*x")),
        classes=((_c("X", 0, [0]), "1"), (_c("a", 1, [1]), "x"), (_c("b", 1, [1]), "x + rho")),
        intersections=(("a", "b", None),),
        singular=(("X", ("1",)), ("a", ("pt",)), ("b", ("pt",))),
        sing=SingularRing(("pt",), ((0,),)),
        module=NiceModule.build(free=[(0, 0), (1, 1)]),
    ))
    for key, d, w in (("S(2,0)", S20, 0), ("S(2,1)", S21, 1)):
        add(RingPresentation(
            key=key, base=M2_, descriptor=d,
            generators=(("y", (2, w)),),
            relations=(("y^2", "0"),),
            basis=(("1", (0, 0), None), ("y", (2, w), None)),
            table=((("1", "y"), "y"), (("y", "y"), "0")),
            classes=((_c("X", 0, [0]), "1"), (_c("p", 2, [w]), "y"), (_c("p'", 2, [w]), "y")),
            intersections=(("p", "p'", None),),
            singular=(("X", ("1",)), ("p", ("top",)), ("p'", ("top",))),
            sing=sing_ring(M(0)),
        ))
    add(RingPresentation(
        key="S(2,2)", base=M2_, descriptor=S22,
        generators=(("y", (2, 2)),),
        relations=(("y^2", "rho^2*y"),),
        basis=(("1", (0, 0), None), ("y", (2, 2), None)),
        table=((("1", "y"), "y"), (("y", "y"), "rho^2*y")),
        classes=((_c("X", 0, [0]), "1"), (_c("a", 2, [2]), "y"), (_c("b", 2, [2]), "y + rho^2")),
        intersections=(("a", "b", None),),
        singular=(("X", ("1",)), ("a", ("top",)), ("b", ("top",))),
        sing=sing_ring(M(0)),
    ))
    add(RingPresentation(
        key="S2a", base="tau^-1 M2", descriptor=S2a,
        generators=(),
        relations=(("rho^3*1", "0"),),
        basis=(("1", (0, 0), 2),),
        table=(),
        classes=((_c("X", 0), "1"), (_c("E", 1), "rho*tau^-1"), (_c("E'", 1), "rho*tau^-1"),
                 (_c("x,sx", 2), "rho^2*tau^-2")),
        intersections=(("E", "E'", "x,sx"),),
        singular=(("X", ("1",)), ("E", ()), ("E'", ()), ("x,sx", ())),
        sing=sing_ring(M(0)),
    ))
    add(RingPresentation(
        key="S(2,1)+S10AT", base=M2_, descriptor=Surgery(S21, "S10AT"),
        generators=(("x", (1, 1)), ("y", (1, 0))),
        relations=(("x^2", "rho*x"), ("y^2", "0")),
        basis=(("1", (0, 0), None), ("x", (1, 1), None), ("y", (1, 0), None),
               ("x*y", (2, 1), None)),
        table=((("1", "x"), "x"), (("1", "y"), "y"), (("x", "x"), "rho*x"),
               (("x", "y"), "x*y"), (("y", "x"), "x*y"), (("y", "y"), "0"),
               (("x*y", "x"), "rho*x*y"), (("x*y", "y"), "0")),
        classes=((_c("X", 0, [0]), "1"), (_c("C", 1, [1]), "x"), (_c("C'", 1, [1]), "x + rho"),
                 (_c("D", 1, [0, 0], components=("a", "b")), "y"),
                 (_c("a", 2, [1]), "x*y"), (_c("b", 2, [1]), "x*y + rho*y")),
        intersections=(("C", "D", "a"), ("C'", "D", "b"), ("C", "C'", None)),
        singular=(("X", ("1",)), ("C", ("a1",)), ("C'", ("a1",)), ("D", ("b1",)),
                  ("a", ("top",)), ("b", ("top",))),
        sing=sing_ring(M(1)),
    ))
    add(RingPresentation(
        key="S(2,2)+FM", base=M2_, descriptor=Surgery(S22, "FM"),
        generators=(("x", (1, 1)), ("y", (2, 1))),
        relations=(("x^2", "tau*y + rho*x"), ("y^2", "0"), ("x*y", "0")),
        basis=(("1", (0, 0), None), ("x", (1, 1), None), ("y", (2, 1), None)),
        table=((("1", "x"), "x"), (("1", "y"), "y"), (("x", "x"), "tau*y + rho*x"),
               (("x", "y"), "0"), (("y", "x"), "0"), (("y", "y"), "0")),
        classes=((_c("X", 0, [0]), "1"), (_c("C", 1, [1]), "x + rho"),
                 (_c("C'", 1, [0, 1], components=("p", "q")), "x"),
                 (_c("C''", 1, [0, 1], components=("p", "q")), "x"),
                 (_c("p", 2, [1]), "y"), (_c("q", 2, [2]), "tau*y + rho*x")),
        intersections=(("C", "C'", "p"), ("C'", "C''", "q"), ("p", "C'", None),
                       ("p", "C''", None)),
        singular=(("X", ("1",)), ("C", ("c1",)), ("C'", ("c1",)), ("C''", ("c1",)),
                  ("p", ("top",)), ("q", ("top",))),
        sing=sing_ring(N(1)),
    ))
    add(RingPresentation(
        key="T1anti", base="tau^-1 M2", descriptor=T1ANTI,
        generators=(("x", (1, 1)),),
        relations=(("rho^2*1", "0"), ("x^2", "0")),
        basis=(("1", (0, 0), 1), ("x", (1, 1), 1)),
        table=((("1", "x"), "x"), (("x", "x"), "0")),
        classes=((_c("Z", 0), "1"), (_c("C_a", 1), "tau^-1*x"), (_c("CsC", 1), "rho*tau^-1"),
                 (_c("C'sC'", 1), "rho*tau^-1"), (_c("psp", 2), "rho*tau^-2*x")),
        intersections=(("C_a", "CsC", "psp"), ("CsC", "C'sC'", None)),
        singular=(("Z", ("1",)), ("C_a", ("a1",)), ("CsC", ()), ("C'sC'", ()), ("psp", ())),
        sing=sing_ring(M(1)),
    ))
    add(RingPresentation(
        key="S(2,2)#M1", base=M2_, descriptor=ConnSum(S22, M(1)),
        generators=(("c1", (1, 0)), ("c2", (1, 0)), ("w", (2, 2))),
        relations=(("c1^2", "0"), ("c2^2", "0"), ("c1*c2", "theta*w"), ("w^2", "rho^2*w"),
                   ("c1*w", "0"), ("c2*w", "0"), ("rho*c1", "0"), ("rho*c2", "0")),
        basis=(("1", (0, 0), None), ("c1", (1, 0), 0), ("c2", (1, 0), 0), ("w", (2, 2), None)),
        table=((("1", "c1"), "c1"), (("1", "c2"), "c2"), (("1", "w"), "w"),
               (("c1", "c1"), "0"), (("c1", "c2"), "theta*w"), (("c1", "w"), "0"),
               (("c2", "c1"), "theta*w"), (("c2", "c2"), "0"), (("c2", "w"), "0"),
               (("w", "c1"), "0"), (("w", "c2"), "0"), (("w", "w"), "rho^2*w")),
        classes=((_c("X", 0, [0]), "1"), (_c("D", 1, [1, 1]), "rho"),
                 (_c("x", 2, [2]), "w"), (_c("y", 2, [2]), "w + rho^2"),
                 (_c("CsC", 1), "c1"), (_c("C'sC'", 1), "c2"), (_c("zsz", 2), "theta*w")),
        intersections=(("CsC", "C'sC'", "zsz"),),
        singular=(("X", ("1",)), ("D", ()), ("x", ("top",)), ("y", ("top",)),
                  ("CsC", ("a1", "a2")), ("C'sC'", ("b1", "b2")), ("zsz", ())),
        sing=sing_ring(M(2)),
    ))
    return cat


CATALOG: dict[str, RingPresentation] = _catalog()


def catalog_key(d: Descriptor | str) -> str:
    return d.replace(" ", "") if isinstance(d, str) else d.dsl()


def present_ring(d: Descriptor | str) -> RingPresentation:
    key = catalog_key(d)
    if key not in CATALOG:
        raise CatalogError(f"{key} is outside the presentation catalog")
    return CATALOG[key]


def catalog_module(pres: RingPresentation) -> NiceModule:
    if pres.module is not None:
        return pres.module
    return cohomology(pres.descriptor)


def singular_product(pres: RingPresentation, a: tuple, b: tuple) -> tuple:
    """Product of two singular classes given as sums of basis labels."""
    out: Counter = Counter()
    for x in a:
        for y in b:
            z = pres.sing.product(x, y)
            if z is not None:
                out[z] += 1
    return tuple(sorted(k for k, v in out.items() if v % 2))
