"""The ``eqsurf`` command line.

Surface expressions use a small suffix grammar::

    surface := base ( "#" noneq | "+S10AT" | "+S11AT" | "+FM" )*
    base    := "S(2,0)" | "S(2,1)" | "S(2,2)" | "S2a" | "T1anti"
             | "triv(" noneq ")" | "free(" noneq "," bits ")"
             | "doub(" noneq "," ("S10" | "S11") ")"
    noneq   := "M" int | "N" int

Whitespace is ignored.  Exit status: 0 success, 1 bad input or domain
error, 2 a verification check failed.
"""

from __future__ import annotations

import argparse
import json
import sys

from .classes import (
    CATALOG,
    ClassError,
    ThomBundleData,
    catalog_key,
    catalog_module,
    conjugate_point_class,
    generator_product,
    module_generators,
    normalize,
    present_ring,
    render_normal,
    thom_bidegree,
    thom_restrict_fixed,
)
from .graded_maps import transfer_decomposition
from .nice_modules import DEFAULT_WINDOW, NiceModule, Window, render_grid
from .surfaces import (
    ConnSum,
    Descriptor,
    Doubling,
    FreeCover,
    M,
    N,
    S2a,
    S20,
    S21,
    S22,
    SurfaceError,
    Surgery,
    T1ANTI,
    TrivialSurface,
    cohomology,
    free_data,
    invariants,
    u_module_pieces,
)
from .verification import fuzz_surfaces, verify_surface

SCHEMA = "eqsurf/1"


class DSLError(ValueError):
    def __init__(self, text: str, pos: int, message: str, expected: tuple = ()):
        self.text, self.pos, self.expected = text, pos, tuple(expected)
        detail = message
        if expected:
            detail += "; expected " + " or ".join(repr(e) for e in expected)
        super().__init__(f"{detail} at position {pos}\n  {text}\n  {' ' * pos}^")


_BASES = {"S(2,0)": S20, "S(2,1)": S21, "S(2,2)": S22, "S2a": S2a, "T1anti": T1ANTI}
_SUFFIXES = ("+S10AT", "+S11AT", "+FM")


class _SurfaceParser:
    def __init__(self, text: str):
        self.text = text
        # compacted characters with their positions in the original text
        self.chars = [(c, i) for i, c in enumerate(text) if not c.isspace()]
        self.src = "".join(c for c, _ in self.chars)
        self.i = 0

    def pos(self, i: int | None = None) -> int:
        i = self.i if i is None else i
        return self.chars[i][1] if i < len(self.chars) else len(self.text)

    def fail(self, message: str, expected=(), at: int | None = None):
        raise DSLError(self.text, self.pos(at), message, expected)

    def accept(self, lit: str) -> bool:
        if self.src.startswith(lit, self.i):
            self.i += len(lit)
            return True
        return False

    def expect(self, lit: str) -> None:
        if not self.accept(lit):
            self.fail("syntax error", (lit,))

    def integer(self) -> int:
        j = self.i
        while j < len(self.src) and self.src[j].isdigit():
            j += 1
        if j == self.i:
            self.fail("syntax error", ("integer",))
        n = int(self.src[self.i:j])
        self.i = j
        return n

    def noneq(self):
        start = self.i
        if self.accept("M"):
            return M(self.integer())
        if self.accept("N"):
            k = self.integer()
            if k < 1:
                self.fail("a nonorientable surface needs genus at least 1", at=start)
            return N(k)
        self.fail("syntax error", ("M<genus>", "N<genus>"))

    def base(self) -> Descriptor:
        for lit, d in _BASES.items():
            if self.accept(lit):
                return d
        start = self.i
        if self.accept("triv("):
            s = self.noneq()
            self.expect(")")
            return TrivialSurface(s)
        if self.accept("free("):
            s = self.noneq()
            self.expect(",")
            j = self.i
            while j < len(self.src) and self.src[j] in "01":
                j += 1
            if j == self.i:
                self.fail("syntax error", ("bit string",))
            bits = tuple(int(c) for c in self.src[self.i:j])
            self.i = j
            self.expect(")")
            d = FreeCover(s, bits)
            self.check(d, start)
            return d
        if self.accept("doub("):
            s = self.noneq()
            self.expect(",")
            for kind in ("S10", "S11"):
                if self.accept(kind):
                    break
            else:
                self.fail("syntax error", ("S10", "S11"))
            self.expect(")")
            return Doubling(s, kind)
        self.fail("syntax error", (*_BASES, "triv(", "free(", "doub("))

    def check(self, d: Descriptor, start: int) -> None:
        try:
            invariants(d)
        except SurfaceError as e:
            self.fail(f"invalid surface: {e}", at=start)

    def parse(self) -> Descriptor:
        d = self.base()
        while self.i < len(self.src):
            start = self.i
            if self.accept("#"):
                d = ConnSum(d, self.noneq())
            else:
                for lit in _SUFFIXES:
                    if self.accept(lit):
                        d = Surgery(d, lit[1:])
                        break
                else:
                    self.fail("syntax error", ("#", *_SUFFIXES, "end of input"))
            self.check(d, start)
        return d


def parse_surface(text: str) -> Descriptor:
    return _SurfaceParser(text).parse()


def print_surface(d: Descriptor) -> str:
    return d.dsl()


# ------------------------------------------------------------------ commands


def _window(args) -> Window:
    return Window(*args.window) if args.window else DEFAULT_WINDOW


def _grid_lines(M: NiceModule, w: Window) -> list[str]:
    return render_grid(M, w).splitlines()


def _generators_json(d: Descriptor) -> list[dict]:
    out = []
    for c in module_generators(d):
        entry = {"name": c.name, "codim": c.codim, "free": c.is_free}
        if not c.is_free:
            entry["weights"] = list(c.weights)
            entry["bidegree"] = list(c.bidegree)
        out.append(entry)
    return out


def cmd_invariants(args):
    d = parse_surface(args.surface)
    inv = invariants(d)
    doc = {"surface": d.dsl(), "invariants": inv.to_json()}
    text = (f"surface: {d.dsl()}\nF = {inv.F}\nC = {inv.C}\nbeta = {inv.beta}\n"
            f"free: {str(inv.is_free).lower()}\ntrivial: {str(inv.is_trivial).lower()}")
    return 0, text, doc


def cmd_cohom(args):
    d = parse_surface(args.surface)
    H = cohomology(d)
    w = _window(args)
    doc = {"surface": d.dsl(), "summands": H.summands_text(), "grid": _grid_lines(H, w)}
    return 0, render_grid(H, w), doc


def cmd_decompose(args):
    d = parse_surface(args.surface)
    H = cohomology(d)
    lines = [f"surface: {d.dsl()}", f"summands: {H.summands_text()}"]
    for sid, s in H.items():
        lines.append(f"  {sid}: {s.label()}")
    doc = {"surface": d.dsl(), "summands": H.summands_text(), "module": H.to_json()}
    if invariants(d).is_free:
        ring, wbits = free_data(d)
        pieces = u_module_pieces(ring, wbits)
        lines.append("u-module pieces (start, length, generator):")
        lines += [f"  ({p.start}, {p.length}, {p.generator})" for p in pieces]
        doc["pieces"] = [{"start": p.start, "length": p.length, "generator": p.generator}
                         for p in pieces]
    return 0, "\n".join(lines), doc


def _resolve_catalog(text: str):
    key = catalog_key(text)
    if key in CATALOG:
        return CATALOG[key]
    d = parse_surface(text)
    return present_ring(d)


def cmd_ring(args):
    pres = _resolve_catalog(args.surface)
    lines = [pres.text(), "basis: " + ", ".join(f"{w} ({d[0]},{d[1]})" for w, d, _ in pres.basis)]
    lines.append("classes:")
    for c, poly in pres.classes:
        lines.append(f"  {c.label()} = {poly}")
    return 0, "\n".join(lines), {"surface": pres.key, "ring": pres.to_json()}


def cmd_generators(args):
    d = parse_surface(args.surface)
    gens = module_generators(d)
    lines = [f"surface: {d.dsl()}"] + [f"  {c.label()}" for c in gens]
    return 0, "\n".join(lines), {"surface": d.dsl(), "generators": _generators_json(d)}


def cmd_product(args):
    if _in_catalog(args.surface):
        pres = _resolve_catalog(args.surface)
        out = render_normal(normalize(args.expression, pres), pres)
        return 0, f"{args.expression} = {out}", {"surface": pres.key, "expression": args.expression,
                                                   "normal_form": out}
    d = parse_surface(args.surface)
    names = [t.strip().strip("[]") for t in args.expression.split("*")]
    if len(names) != 2:
        raise ClassError("outside the catalog only products [A]*[B] of two generators are supported")
    e = generator_product(d, *names)
    return 0, f"{args.expression} = {e}", {"surface": d.dsl(), "expression": args.expression,
                                            "normal_form": str(e)}


def _in_catalog(text: str) -> bool:
    if catalog_key(text) in CATALOG:
        return True
    try:
        return parse_surface(text).dsl() in CATALOG
    except (DSLError, SurfaceError):
        return False


def cmd_thom(args):
    weights = () if args.free else tuple(int(x) for x in args.weights.split(",") if x.strip())
    data = ThomBundleData(args.free, args.dim, weights)
    deg = thom_bidegree(data)
    lines = [f"thom class: {deg}"]
    doc = {"bundle": {"free": data.base_free, "dim": data.n, "weights": list(weights)},
           "bidegree": str(deg)}
    if not data.base_free:
        restr = thom_restrict_fixed(data)
        lines.append("restrictions: " + ", ".join(m.render(True) for m in restr))
        doc["restrictions"] = [m.render(True) for m in restr]
    if args.base:
        if _in_catalog(args.base):
            base = catalog_module(_resolve_catalog(args.base))
        else:
            base = cohomology(parse_surface(args.base))
        q = deg.q if not data.base_free else 0
        td = transfer_decomposition(base, data.n, q, uniform=args.uniform or data.base_free)
        lines.append(f"transfer of {base.summands_text()}: {td.render()}")
        doc["transfer"] = td.to_json()
    return 0, "\n".join(lines), doc


def cmd_conjpt(args):
    d = parse_surface(args.surface)
    qs = [args.weight] if args.weight is not None else list(range(_window(args).qmin,
                                                                  _window(args).qmax + 1))
    lines, rows = [], []
    for q in qs:
        e = conjugate_point_class(d, q)
        lines.append(f"q={q}: {e}")
        rows.append({"q": q, "class": str(e)})
    return 0, "\n".join(lines), {"surface": d.dsl(), "conjugate_point": rows}


def cmd_verify(args):
    d = parse_surface(args.surface)
    reports = verify_surface(d, _window(args) if args.window else None)
    ok = all(r.passed for r in reports)
    text = "\n".join(r.summary() for r in reports) + f"\n{'PASS' if ok else 'FAIL'} {d.dsl()}"
    doc = {"surface": d.dsl(), "pass": ok, "reports": [r.to_json() for r in reports]}
    return (0 if ok else 2), text, doc


def cmd_fuzz(args):
    rep = fuzz_surfaces(args.seed, args.depth, args.count)
    return (0 if rep.passed else 2), rep.summary(), rep.to_json()


def export_json(d: Descriptor, window: Window = DEFAULT_WINDOW, with_reports: bool = False) -> dict:
    H = cohomology(d)
    doc = {
        "surface": d.dsl(),
        "invariants": invariants(d).to_json(),
        "summands": H.summands_text(),
        "module": H.to_json(),
        "grid": _grid_lines(H, window),
        "generators": _generators_json(d),
    }
    if d.dsl() in CATALOG:
        doc["ring"] = CATALOG[d.dsl()].to_json()
    if with_reports:
        doc["reports"] = [r.to_json() for r in verify_surface(d)]
    return doc


def cmd_export(args):
    d = parse_surface(args.surface)
    doc = export_json(d, _window(args), args.reports)
    return 0, None, doc


# ---------------------------------------------------------------- plumbing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are input errors; 2 is reserved for failed checks
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="eqsurf", description="Bredon cohomology of C2-surfaces.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help, surface=True):
        sp = sub.add_parser(name, help=help)
        if surface:
            sp.add_argument("surface", help="surface expression")
        sp.add_argument("--json", action="store_true", help="emit JSON")
        sp.add_argument("--window", nargs=4, type=int, metavar=("PMIN", "PMAX", "QMIN", "QMAX"))
        sp.set_defaults(func=func)
        return sp

    add("invariants", cmd_invariants, "print F, C, beta and flags")
    add("cohom", cmd_cohom, "print the cohomology grid and summands")
    add("decompose", cmd_decompose, "list summands")
    add("ring", cmd_ring, "print a catalog ring presentation")
    add("generators", cmd_generators, "list module generators")
    sp = add("product", cmd_product, "normalize a class expression")
    sp.add_argument("expression")
    sp = add("thom", cmd_thom, "Thom class bookkeeping", surface=False)
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--weights", default="")
    sp.add_argument("--free", action="store_true")
    sp.add_argument("--uniform", action="store_true")
    sp.add_argument("--base", help="base surface or catalog key for the structure transfer")
    sp = add("conjpt", cmd_conjpt, "conjugate-point classes")
    sp.add_argument("--weight", type=int)
    add("verify", cmd_verify, "run every consistency check")
    sp = add("fuzz", cmd_fuzz, "random descriptors through every check", surface=False)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--depth", type=int, default=10)
    sp.add_argument("--count", type=int, default=200)
    sp = add("export-json", cmd_export, "full JSON export")
    sp.add_argument("--reports", action="store_true", help="include verification reports")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.window:
            Window(*args.window)
        code, text, doc = args.func(args)
    except (DSLError, SurfaceError, ClassError, ValueError) as e:
        print(f"eqsurf: error: {e}", file=sys.stderr)
        return 1
    if args.json or text is None:
        doc = {"schema": SCHEMA, "command": args.command, **doc}
        print(json.dumps(doc, sort_keys=True, indent=2))
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
