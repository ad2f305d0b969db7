import pytest

from eqsurf.nice_modules import NiceModule
from eqsurf.surfaces import ConnSum, M, S2a, S20, S21, S22, SurfaceError, Surgery
from eqsurf.surfaces import cohomology
from eqsurf.verification import (
    check_forgetful_les,
    check_structure_theorem,
    check_tau_iso,
    check_topm2,
    fuzz_surfaces,
    stabilized_window,
    verify_surface,
)
import oracles

GENUS2 = ConnSum(S22, M(1))


def test_structure_theorem_examples():
    assert check_structure_theorem(NiceModule.build(free=[(0, 0), (2, 1)])).passed
    assert not check_structure_theorem(NiceModule.build(free=[(1, 2)])).passed
    assert check_structure_theorem(NiceModule.build(antipodal=[(1, 0)])).passed


def test_les_for_a_point():
    rep = check_forgetful_les(NiceModule.build(free=[(0, 0)]), (1, 0, 0), (-2, 2, -2, 2))
    assert rep.passed


def test_les_genus2_at_1_0():
    H = cohomology(GENUS2)
    rep = check_forgetful_les(H, (1, 4, 1))
    assert rep.passed
    free = [(f.p, f.q) for f in H.free]
    anti = [(a.s, a.r) for a in H.antipodal]
    assert oracles.les_total(free, anti, 1, 0) == (2, 2)
    (rec,) = [r for r in rep.records if r["bidegree"] == [1, 0]]
    assert rec["actual"] == 4


def test_les_torus_reflection():
    assert check_forgetful_les(cohomology(Surgery(S21, "S10AT")), (1, 2, 1)).passed


def test_les_detects_missing_summand():
    H = cohomology(GENUS2)
    broken = NiceModule(H.free, H.antipodal[:1])
    rep = check_forgetful_les(broken, (1, 4, 1))
    assert not rep.passed
    assert {r["bidegree"][0] for r in rep.failures()} == {1}


def test_les_window_covers_high_columns():
    w = stabilized_window(NiceModule.build(free=[(0, 0)]), (1, 1, 0, 0))
    assert w.pmin <= 0 and w.pmax >= 3 and w.qmin < 0 < w.qmax


def test_tau_iso():
    assert check_tau_iso(cohomology(GENUS2)).passed
    assert not check_tau_iso(NiceModule.build(free=[(0, 0), (1, 2)])).passed


@pytest.mark.parametrize("d,where", [
    (Surgery(S22, "FM"), [2, 1]),
    (GENUS2, [2, 2]),
    (Surgery(S21, "S10AT"), [2, 1]),
])
def test_topm2_location(d, where):
    rep = check_topm2(d)
    assert rep.passed
    assert rep.records[0]["bidegree"] == where


def test_topm2_needs_nonfree_nontrivial():
    for d in (S2a, S20):
        with pytest.raises(SurfaceError):
            check_topm2(d)


def test_verify_surface_includes_catalog_check():
    names = [r.check for r in verify_surface(Surgery(S21, "S10AT"))]
    assert names[-1] == "ring_presentation"
    assert all(r.passed for r in verify_surface(Surgery(S21, "S10AT")))


def test_report_json_shape():
    rep = check_tau_iso(NiceModule.build(free=[(0, 0)]))
    doc = rep.to_json()
    assert doc["pass"] is True
    assert set(doc["records"][0]) == {"bidegree", "expected", "actual", "pass"}


def test_fuzz_depth_zero():
    rep = fuzz_surfaces(5, 0, 25)
    assert rep.passed and len(rep.cases) == 25


def test_fuzz_is_deterministic():
    assert fuzz_surfaces(11, 4, 15).cases == fuzz_surfaces(11, 4, 15).cases
