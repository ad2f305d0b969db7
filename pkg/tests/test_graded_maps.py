import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from eqsurf.coeff_ring import Bidegree, Bot, M2Elt, Top
from eqsurf.graded_maps import (
    IllFormedMapError,
    NiceMap,
    NotIsomorphicError,
    PolyMap,
    free_quotient_rank,
    poly_basis_reduce,
    reconstruct,
    stable_degree,
    torsion_part,
    transfer_decomposition,
    verify_nice_iso_range,
    verify_poly_iso,
)
from eqsurf.nice_modules import ModuleElement, NiceModule, Window, dim_at, generator, iso_equal
import oracles
from strategies import nice_modules


def _exponents(f: PolyMap):
    return [[None if e == 0 else e.bit_length() - 1 for e in row] for row in f.matrix]


def _oracle_iso(f: PolyMap, d: int) -> bool:
    return oracles.slice_is_iso(_exponents(f), f.source, f.target, f.q, d)


@st.composite
def poly_maps(draw, max_size=5):
    m = draw(st.integers(1, max_size))
    target = draw(st.lists(st.integers(0, 4), min_size=m, max_size=m))
    q = draw(st.integers(0, 2))
    source = []
    for _ in range(m):
        source.append(draw(st.integers(max(0, max(target) - 4 - q), 4)))
    rows = []
    for i in range(m):
        row = []
        for j in range(m):
            e = source[j] + q - target[i]
            keep = 0 <= e <= 4 and draw(st.booleans())
            row.append(1 << e if keep else 0)
        rows.append(tuple(row))
    return PolyMap(tuple(rows), tuple(source), tuple(target), q)


@st.composite
def nonsingular_poly_maps(draw, max_size=5):
    """Triangular with a monomial diagonal, columns shuffled: det != 0 by construction."""
    m = draw(st.integers(1, max_size))
    q = draw(st.integers(0, 2))
    target = draw(st.lists(st.integers(0, 4), min_size=m, max_size=m))
    diag = draw(st.lists(st.integers(0, 3), min_size=m, max_size=m))
    source = [max(0, target[i] - q + diag[i]) for i in range(m)]
    rows = []
    for i in range(m):
        row = []
        for j in range(m):
            e = source[j] + q - target[i]
            if j == i:
                row.append(1 << e)
            elif j < i and 0 <= e <= 4 and draw(st.booleans()):
                row.append(1 << e)
            else:
                row.append(0)
        rows.append(row)
    perm = draw(st.permutations(range(m)))
    rows = tuple(tuple(r[k] for k in perm) for r in rows)
    return PolyMap(rows, tuple(source[k] for k in perm), tuple(target), q)


def test_spec_style_example():
    f = PolyMap.from_columns([[1, 0], [0b100, 0b10]], source=(0, 2), target=(0, 1))
    assert stable_degree(f) == 2
    checks = verify_poly_iso(f, range(0, 5))
    for d in range(0, 5):
        assert checks[d] == _oracle_iso(f, d)
    assert checks[2] and checks[3] and not checks[1]
    basis = poly_basis_reduce(f, 2)
    assert basis.degrees == (0, 1)
    assert basis.vectors == ((1, 0), (0, 1))


def test_identity_reduces_to_itself():
    f = PolyMap.identity((0, 3, 1))
    b = poly_basis_reduce(f, 0)
    assert b.degrees == (0, 3, 1)
    assert all(verify_poly_iso(f, range(-1, 6)).values())


def test_zero_map_is_not_iso():
    f = PolyMap(((0,),), (0,), (0,), 0)
    assert verify_poly_iso(f, [0, 1]) == {0: False, 1: False}
    with pytest.raises(NotIsomorphicError):
        poly_basis_reduce(f, 0)


def test_singular_determinant_raises_with_degree():
    f = PolyMap.from_columns([[0b10, 1], [0b10, 1]], source=(1, 1), target=(0, 1))
    assert f.determinant() == 0
    with pytest.raises(NotIsomorphicError) as err:
        poly_basis_reduce(f, 0)
    assert err.value.degree >= 0


def test_iso_failure_reports_degree():
    f = PolyMap.from_columns([[1, 0], [0b100, 0b10]], source=(0, 2), target=(0, 1))
    with pytest.raises(NotIsomorphicError) as err:
        poly_basis_reduce(f, 1)
    assert err.value.degree == 1


def test_inhomogeneous_entry_rejected():
    with pytest.raises(ValueError):
        PolyMap(((0b11,),), (1,), (0,), 0)


@given(poly_maps())
def test_slice_ranks_match_oracle(f):
    for d in range(0, 10):
        assert verify_poly_iso(f, [d])[d] == _oracle_iso(f, d)


@given(nonsingular_poly_maps())
def test_reduced_basis_bounds_and_is_a_basis(f):
    g = stable_degree(f)
    assume(g is not None and g <= 12)
    basis = poly_basis_reduce(f, g)
    for beta, alpha in zip(basis.degrees, f.source):
        assert beta <= alpha + f.q
    change = basis.change_of_basis(f.target)
    assert change.determinant() == 1
    for d in range(-1, 13):
        assert _oracle_iso(change, d)


# ------------------------------------------------------------ nice maps


def test_identity_map_is_iso_everywhere():
    M = NiceModule.build(free=[(0, 0), (2, 1)], antipodal=[(1, 1)])
    rep = verify_nice_iso_range(NiceMap.identity(M), Window(-1, 3, -3, 3), full=True)
    assert rep.passed and rep.stabilized


def test_tau_on_m2_is_iso_only_above_diagonal():
    M = NiceModule.build(free=[(0, 0)])
    f = NiceMap.scalar(M, Top(0, 1))
    assert verify_nice_iso_range(f, Window(-1, 3, -4, 3)).passed
    rep = verify_nice_iso_range(f, Window(-1, 3, -4, 3), full=True)
    assert not rep.passed
    assert [0, -2] in [r["bidegree"] for r in rep.failures()]


def test_rho_on_antipodal_zero_module_fails():
    M = NiceModule.build(antipodal=[(0, 0)])
    rep = verify_nice_iso_range(NiceMap.scalar(M, Top(1, 0)), Window(0, 1, 0, 2))
    assert not rep.passed


@given(nice_modules, st.integers(0, 2), st.integers(0, 2))
def test_exact_shift_is_iso(M, n, q):
    f = NiceMap.shift_map(M, n, q)
    assert verify_nice_iso_range(f, Window(-2, 4, -4, 4), full=True).passed


def test_antipodal_image_must_be_rho_torsion():
    A = NiceModule.build(antipodal=[(0, 0)])
    F = NiceModule.build(free=[(0, 0)])
    (a,) = A.ids()
    (fid,) = F.ids()
    # theta / tau^2 has bidegree (0,-4): a legal image of the generator after a (0,-4) shift
    NiceMap(A, F, Bidegree(0, -4), {a: ModuleElement(((fid, M2Elt.of(Bot(0, 2))),))})
    with pytest.raises(IllFormedMapError):
        NiceMap(A, F, Bidegree(0, 0), {a: generator(F, fid)})


def test_wrong_bidegree_rejected():
    M = NiceModule.build(free=[(0, 0)])
    (f,) = M.ids()
    with pytest.raises(IllFormedMapError):
        NiceMap(M, M, Bidegree(1, 0), {f: generator(M, f)})


def test_report_json_and_table():
    M = NiceModule.build(free=[(0, 0)])
    rep = verify_nice_iso_range(NiceMap.identity(M), Window(0, 1, 0, 1))
    doc = rep.to_json()
    assert doc["pass"] is True
    assert set(doc["records"][0]) == {"bidegree", "expected", "rank", "pass"}
    assert "PASS" in rep.table()


# ------------------------------------------------------ torsion and quotient


def test_free_quotient_rank_example():
    M = NiceModule.build(free=[(1, 0), (1, 1)], antipodal=[(1, 0)])
    assert free_quotient_rank(M, 1) == [0, 1]


@given(nice_modules)
def test_reconstruct_recovers_summands(M):
    assert iso_equal(reconstruct(M), M)


def test_torsion_dims():
    M = NiceModule.build(free=[(0, 0)], antipodal=[(1, 1)])
    T = torsion_part(M)
    assert T.dim_at(0, -2) == 1  # theta
    assert T.dim_at(0, 0) == 0
    assert T.dim_at(2, 5) == 1


# ------------------------------------------------------ structure transfer


def test_moebius_over_s11_transfer():
    base = NiceModule.build(free=[(0, 0), (1, 1)])
    td = transfer_decomposition(base, 1, 1)
    assert td.admits(NiceModule.build(free=[(1, 1), (2, 1)]))
    assert not td.admits(NiceModule.build(free=[(1, 1), (2, 3)]))
    assert td.render() == "S(1,0..1)M2 + S(2,0..2)M2"


def test_uniform_transfer_is_exact_shift():
    base = NiceModule.build(free=[(0, 0), (1, 1)], antipodal=[(0, 1)])
    td = transfer_decomposition(base, 2, 1, uniform=True)
    (only,) = list(td.candidates())
    assert iso_equal(only, base.shifted(2, 1))


@given(nice_modules, st.integers(0, 2), st.integers(0, 2))
def test_transfer_preserves_counts_and_high_weight_dims(M, n, q):
    td = transfer_decomposition(M, n, q)
    for cand in list(td.candidates())[:6]:
        assert td.admits(cand)
        assert len(cand.free) == len(M.free)
        assert len(cand.antipodal) == len(M.antipodal)
        # free shifts satisfy l <= k, so on and above the diagonal no weight
        # ambiguity is visible
        for p in range(-1, 5):
            for w in range(p, p + 4):
                assert dim_at(M, p, w) == dim_at(cand, p + n, w + q)


def test_transfer_rejects_negative_weight():
    with pytest.raises(ValueError):
        transfer_decomposition(NiceModule.build(free=[(0, 0)]), 1, -1)
