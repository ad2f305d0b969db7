import json
import os
import subprocess
import sys
from pathlib import Path

import pytest
from hypothesis import given

from eqsurf.cli import DSLError, main, parse_surface, print_surface
from eqsurf.surfaces import ConnSum, M, S21, S22, Surgery, T1ANTI
from strategies import descriptors

GOLDEN = Path(__file__).parent / "golden"
FIXTURES = json.loads((GOLDEN / "fixtures.json").read_text())


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_examples():
    assert parse_surface("S(2,1)+S10AT") == Surgery(S21, "S10AT")
    assert parse_surface(" S(2,2) # M1 ") == ConnSum(S22, M(1))
    assert parse_surface("T1anti") == T1ANTI


def test_semantic_error_at_third_fm():
    text = "S(2,2)+FM+FM+FM"
    with pytest.raises(DSLError) as err:
        parse_surface(text)
    assert err.value.pos == text.rindex("+FM")
    assert "isolated fixed point" in str(err.value)


@pytest.mark.parametrize("text,pos", [("S(2,2)+F", 6), ("S(3,1)", 0), ("doub(M1,S12)", 8),
                                      ("free(N2,)", 8), ("S(2,1)#", 7)])
def test_syntax_errors_report_position(text, pos):
    with pytest.raises(DSLError) as err:
        parse_surface(text)
    assert err.value.pos == pos
    assert err.value.expected


def test_surgery_on_trivial_is_rejected():
    with pytest.raises(DSLError):
        parse_surface("triv(M1)+S10AT")
    with pytest.raises(DSLError):
        parse_surface("free(N2,00)")


@given(descriptors)
def test_parse_print_roundtrip(d):
    assert parse_surface(print_surface(d)) == d


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_golden_outputs(name, capsys):
    argv = FIXTURES[name]
    code, out, _ = run(argv, capsys)
    assert code == 0
    path = GOLDEN / f"{name}.txt"
    if os.environ.get("EQSURF_UPDATE_GOLDEN"):
        path.write_text(out)
    assert out == path.read_text()


def test_outputs_are_byte_stable(capsys):
    argv = ["export-json", "S(2,2)#M1"]
    _, first, _ = run(argv, capsys)
    _, second, _ = run(argv, capsys)
    assert first == second


def test_module_entry_point_matches_main(capsys):
    _, expected, _ = run(["cohom", "S(2,2)#M1"], capsys)
    proc = subprocess.run([sys.executable, "-m", "eqsurf", "cohom", "S(2,2)#M1"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout == expected


def test_cohom_summands_line(capsys):
    _, out, _ = run(["cohom", "S(2,2)#M1"], capsys)
    assert out.splitlines()[-1] == "summands: M2 + 2*S(1,0)A0 + S(2,2)M2"


def test_ring_line(capsys):
    _, out, _ = run(["ring", "S(2,2)+FM"], capsys)
    assert out.startswith("M2[x,y]/(x^2 = tau*y + rho*x, y^2 = 0, x*y = 0)")


def test_exit_codes(capsys):
    assert run(["verify", "S(2,1)+S10AT"], capsys)[0] == 0
    assert run(["invariants", "S(2,2)+FM+FM+FM"], capsys)[0] == 1
    assert run(["ring", "S(2,1)+S11AT"], capsys)[0] == 1
    assert run(["cohom", "S(2,1)", "--window", "3", "1", "0", "0"], capsys)[0] == 1
    assert run(["fuzz", "--count", "3", "--depth", "2"], capsys)[0] == 0
    with pytest.raises(SystemExit) as err:
        main(["no-such-command"])
    assert err.value.code == 1


def test_verify_failure_exits_2(monkeypatch, capsys):
    import eqsurf.cli as cli
    from eqsurf.verification import VerificationReport

    def broken(d, window=None):
        rep = VerificationReport("forced")
        rep.add((0, 0), 1, 0)
        return [rep]

    monkeypatch.setattr(cli, "verify_surface", broken)
    code, out, _ = run(["verify", "S(2,1)"], capsys)
    assert code == 2
    assert "FAIL" in out


def test_json_schema(capsys):
    _, out, _ = run(["export-json", "S(2,1)+S10AT"], capsys)
    doc = json.loads(out)
    assert doc["schema"] == "eqsurf/1"
    assert {"surface", "invariants", "summands", "grid", "ring", "generators"} <= set(doc)


def test_product_outside_catalog(capsys):
    code, out, _ = run(["product", "S(2,1)+S10AT+S10AT", "[C2]*[G2]"], capsys)
    assert code == 0 and out.strip() == "[C2]*[G2] = [p]"
    code, _, err = run(["product", "S(2,1)+S10AT+S10AT", "[G1]*[G2]"], capsys)
    assert code == 1 and "not determined" in err
