import pytest
from hypothesis import given
from hypothesis import strategies as st

from eqsurf.coeff_ring import Bidegree, Bot, LambdaElt, M2Elt, Top
from eqsurf.nice_modules import (
    AntipodalSummand,
    ModuleElement,
    NiceModule,
    NotDivisibleError,
    Window,
    act,
    act_laurent,
    basis_at,
    dim_at,
    element_bidegrees,
    generator,
    iso_equal,
    key_element,
    render_grid,
    rho_rank_at,
    tau_rank_at,
)
import oracles
from strategies import nice_modules

CELLS = [(p, q) for p in range(-3, 5) for q in range(-5, 6)]


def _raw(M):
    return [(f.p, f.q) for f in M.free], [(a.s, a.r) for a in M.antipodal]


@given(nice_modules)
def test_dims_match_oracle(M):
    free, anti = _raw(M)
    for p, q in CELLS:
        assert dim_at(M, p, q) == oracles.dim(free, anti, p, q)


@given(nice_modules)
def test_rho_tau_ranks_match_oracle(M):
    free, anti = _raw(M)
    for p, q in CELLS:
        assert rho_rank_at(M, p, q) == oracles.rho_rank(free, anti, p, q)
        assert tau_rank_at(M, p, q) == oracles.tau_rank(free, anti, p, q)


def test_antipodal_module_column():
    A2 = NiceModule.build(antipodal=[(0, 2)])
    assert [dim_at(A2, p, 7) for p in range(-1, 4)] == [0, 1, 1, 1, 0]
    assert [dim_at(A2, 1, q) for q in range(-3, 4)] == [1] * 7


def test_free_summand_shift():
    M = NiceModule.build(free=[(2, 1)])
    assert dim_at(M, 2, 1) == 1
    assert dim_at(M, 2, 0) == 0
    assert dim_at(M, 2, -1) == 1  # theta lands in (2,-1)


def test_weight_is_normalized():
    a = AntipodalSummand.of(1, 2, weight=5)
    assert a == AntipodalSummand(1, 2)


def test_build_accepts_weighted_triples():
    M = NiceModule.build(antipodal=[(1, 3, 0)])
    assert M.antipodal == (AntipodalSummand(1, 0),)


@given(nice_modules)
def test_json_roundtrip(M):
    # the export is canonically ordered
    assert NiceModule.from_json(M.to_json()) == M.canonical()


@given(nice_modules)
def test_iso_equal_is_order_independent(M):
    rev = NiceModule(tuple(reversed(M.free)), tuple(reversed(M.antipodal)))
    assert iso_equal(M, rev)
    assert iso_equal(M, M.canonical())


def test_iso_equal_detects_difference():
    assert not iso_equal(NiceModule.build(free=[(1, 0)]), NiceModule.build(free=[(1, 1)]))


@given(nice_modules)
def test_basis_keys_live_in_their_bidegree(M):
    for p, q in [(0, 0), (1, 0), (1, 1), (2, 1), (0, -3)]:
        for key in basis_at(M, p, q):
            assert element_bidegrees(M, key_element(M, key)) == {Bidegree(p, q)}


def test_action_on_generators():
    M = NiceModule.build(free=[(1, 1)], antipodal=[(1, 1)])
    f, a = M.ids()
    assert act(Top(1, 0), generator(M, f)) == ModuleElement(((f, M2Elt.of(Top(1, 0))),))
    # rho^2 kills the generator of A1
    assert not act(Top(2, 0), generator(M, a))
    assert not act(Bot(0, 0), generator(M, a))


def test_laurent_action():
    M = NiceModule.build(free=[(0, 0)], antipodal=[(0, 1)])
    f, a = M.ids()
    x = act_laurent(0, -3, generator(M, a))
    assert x.as_dict()[a] == LambdaElt.of(1, (0, -3))
    y = act_laurent(0, -2, ModuleElement(((f, M2Elt.of(Bot(0, 0))),)))
    assert y.as_dict()[f] == M2Elt.of(Bot(0, 2))
    with pytest.raises(NotDivisibleError):
        act_laurent(0, -1, generator(M, f))


def test_summands_text_multiplicity():
    M = NiceModule.build(free=[(0, 0), (2, 2)], antipodal=[(1, 0), (1, 0)])
    assert M.summands_text() == "M2 + 2*S(1,0)A0 + S(2,2)M2"


def test_shifted():
    M = NiceModule.build(free=[(0, 0)], antipodal=[(1, 2)]).shifted(1, 1)
    assert [(f.p, f.q) for f in M.free] == [(1, 1)]
    assert M.antipodal == (AntipodalSummand(2, 2),)


def test_window_validation():
    with pytest.raises(ValueError):
        Window(3, 1, 0, 0)


def test_grid_render():
    M = NiceModule.build(free=[(0, 0)])
    text = render_grid(M, Window(0, 1, -2, 1))
    assert text.splitlines() == [
        "q\\p   0   1",
        "  1   1   1",
        "  0   1   .",
        " -1   .   .",
        " -2   1   .",
        "summands: M2",
    ]


@given(st.integers(0, 3), st.integers(0, 3))
def test_antipodal_rho_rank_truncates(s, r):
    M = NiceModule.build(antipodal=[(s, r)])
    assert rho_rank_at(M, s + r, 0) == 0
    assert rho_rank_at(M, s, 0) == int(r > 0)
