"""Consistency checks tying computed modules to the general theorems.

Each check returns a ``VerificationReport`` whose records are per bidegree
(or per summand); a report passes iff every record does.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .classes import CATALOG, catalog_module, confluence_check, generator_coverage, relation_pairs
from .nice_modules import DEFAULT_WINDOW, NiceModule, Window, dim_at, rho_rank_at, tau_rank_at
from .surfaces import Descriptor, SurfaceError, cohomology, invariants, random_descriptor, singular_betti


@dataclass
class VerificationReport:
    check: str
    records: list = field(default_factory=list)
    window: Window | None = None
    note: str = ""

    @property
    def passed(self) -> bool:
        return all(r["pass"] for r in self.records)

    def add(self, bidegree, expected, actual, ok: bool | None = None) -> None:
        self.records.append({
            "bidegree": list(bidegree) if bidegree is not None else None,
            "expected": expected,
            "actual": actual,
            "pass": bool(expected == actual if ok is None else ok),
        })

    def failures(self) -> list[dict]:
        return [r for r in self.records if not r["pass"]]

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "pass": self.passed,
            "window": None if self.window is None else list(self.window.__dict__.values()),
            "records": self.records,
            "note": self.note,
        }

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        line = f"{status} {self.check}: {len(self.records)} records, {len(self.failures())} failed"
        if self.note:
            line += f" ({self.note})"
        for r in self.failures()[:5]:
            line += f"\n    at {r['bidegree']}: expected {r['expected']}, got {r['actual']}"
        return line


def check_structure_theorem(M: NiceModule) -> VerificationReport:
    rep = VerificationReport("structure_theorem")
    for f in M.free:
        rep.add((f.p, f.q), "p>=q>=0", f"({f.p},{f.q})", f.p >= f.q >= 0)
    for a in M.antipodal:
        # weights are normalized to 0 on construction since tau is invertible
        rep.add((a.s, 0), "s>=0", f"s={a.s}", a.s >= 0)
    return rep


def _as_window(window) -> Window:
    if window is None:
        return DEFAULT_WINDOW
    return window if isinstance(window, Window) else Window(*window)


def stabilized_window(M: NiceModule, window=None, cap: int = 64) -> Window:
    """Grow q in both directions until every column is constant for two steps."""
    w = _as_window(window)
    pmin, pmax = min(w.pmin, 0), max(w.pmax, 3)
    qmin, qmax = w.qmin, w.qmax
    span = max([abs(f.p) + abs(f.q) for f in M.free] + [0])
    qmax = max(qmax, pmax + span + 2)
    qmin = min(qmin, pmin - span - 4)

    def flat(qs) -> bool:
        return all(len({dim_at(M, p, q) for q in qs}) == 1 for p in range(pmin - 1, pmax + 2))

    for _ in range(cap):
        if flat((qmax - 2, qmax - 1, qmax)):
            break
        qmax += 1
    for _ in range(cap):
        if flat((qmin, qmin + 1, qmin + 2)):
            break
        qmin -= 1
    return Window(pmin, pmax, qmin, qmax)


def check_forgetful_les(M: NiceModule, betti: tuple[int, int, int], window=None) -> VerificationReport:
    """coker(rho into (p,q+1)) + ker(rho out of (p,q)) = b_p at every cell."""
    w = stabilized_window(M, window)
    rep = VerificationReport("forgetful_les", window=w)
    for p, q in w.cells():
        coker = dim_at(M, p, q + 1) - rho_rank_at(M, p - 1, q)
        ker = dim_at(M, p, q) - rho_rank_at(M, p, q)
        b = betti[p] if 0 <= p <= 2 else 0
        rep.add((p, q), b, coker + ker)
    return rep


def check_tau_iso(M: NiceModule, window=None) -> VerificationReport:
    w = stabilized_window(M, window)
    rep = VerificationReport("tau_iso", window=w)
    for p, q in w.cells():
        if q < p:
            continue
        src, tgt = dim_at(M, p, q), dim_at(M, p, q + 1)
        rank = tau_rank_at(M, p, q)
        rep.add((p, q), [src, tgt], rank, rank == src == tgt)
    return rep


def check_topm2(d: Descriptor) -> VerificationReport:
    inv = invariants(d)
    if inv.is_free or inv.is_trivial:
        raise SurfaceError(f"{d.dsl()}: the top-class check needs a nonfree nontrivial action")
    expected = (2, 1) if inv.C > 0 else (2, 2)
    tops = [(f.p, f.q) for f in cohomology(d).free if f.p >= 2]
    rep = VerificationReport("topm2")
    rep.add(expected, [list(expected)], [list(t) for t in tops])
    return rep


def check_generators(d: Descriptor) -> VerificationReport:
    ok, detail = generator_coverage(d)
    rep = VerificationReport("generator_coverage", note=detail)
    rep.add(None, "exact match", "exact match" if ok else "mismatch", ok)
    return rep


def check_catalog(key: str) -> VerificationReport:
    """Relations, confluence and dimension count of a catalog presentation."""
    pres = CATALOG[key]
    rep = VerificationReport("ring_presentation", note=key)
    for (lhs, rhs), (nl, nr) in zip(pres.relations, relation_pairs(pres)):
        rep.add(None, f"{lhs} = {rhs}", "holds" if nl == nr else "fails", nl == nr)
    bad = confluence_check(pres)
    rep.add(None, [], bad)
    H = catalog_module(pres)
    for p in range(0, 4):
        for q in range(-3, 5):
            rep.add((p, q), dim_at(H, p, q), pres.model.dims(p, q))
    return rep


def verify_surface(d: Descriptor, window=None) -> list[VerificationReport]:
    """Every check that applies to ``d``."""
    M = cohomology(d)
    inv = invariants(d)
    reports = [
        check_structure_theorem(M),
        check_forgetful_les(M, singular_betti(d), window),
        check_tau_iso(M, window),
    ]
    if not (inv.is_free or inv.is_trivial):
        reports.append(check_topm2(d))
    reports.append(check_generators(d))
    if d.dsl() in CATALOG:
        reports.append(check_catalog(d.dsl()))
    return reports


@dataclass
class FuzzReport:
    seed: int
    depth: int
    count: int
    cases: list = field(default_factory=list)  # (dsl, [failed check names])

    @property
    def passed(self) -> bool:
        return all(not failed for _, failed in self.cases)

    def failures(self) -> list[tuple[str, list[str]]]:
        return [(dsl, failed) for dsl, failed in self.cases if failed]

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "depth": self.depth,
            "count": self.count,
            "pass": self.passed,
            "failures": [{"surface": dsl, "checks": failed} for dsl, failed in self.failures()],
        }

    def summary(self) -> str:
        head = (f"{'PASS' if self.passed else 'FAIL'} fuzz seed={self.seed} depth={self.depth} "
                f"count={self.count}: {len(self.failures())} failing descriptors")
        lines = [head] + [f"  {dsl}: {', '.join(failed)}" for dsl, failed in self.failures()]
        return "\n".join(lines)


def _parity_report(d: Descriptor) -> VerificationReport:
    inv = invariants(d)
    rep = VerificationReport("beta_parity")
    if not (inv.is_free or inv.is_trivial):
        rep.add(None, inv.beta % 2, inv.F % 2)
    return rep


def fuzz_surfaces(seed: int, depth: int, count: int) -> FuzzReport:
    rng = random.Random(seed)
    out = FuzzReport(seed, depth, count)
    for _ in range(count):
        d = random_descriptor(rng, depth)
        failed = [r.check for r in [_parity_report(d), *verify_surface(d)] if not r.passed]
        out.cases.append((d.dsl(), failed))
    return out
