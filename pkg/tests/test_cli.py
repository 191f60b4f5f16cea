import json

import jsonschema
import pytest

from destab import cli
from destab.report import Report
from destab.serialization import load, load_schema
from cli_contract import FIXTURES, cases, check_all, run

REPORT_SCHEMA = load_schema("report")


@pytest.fixture(scope="module")
def contract():
    return {name: (expected, actual, out) for name, expected, actual, out in check_all()}


def test_contract_cases(contract, tmp_path):
    names = [name for name, _, _ in cases(tmp_path)]
    assert sorted(contract) == sorted(names)
    wrong = {name: got[:2] for name, got in contract.items() if got[0] != got[1]}
    assert not wrong


def test_destab_prints_dimension(contract):
    assert "dim C = 4" in contract["destab amplified M_2"][2]


def test_fuzz_prints_summary_table(contract):
    out = contract["fuzz 1..25"][2]
    assert out.splitlines()[0].split()[:2] == ["kind", "pass"]
    assert "FAILED" not in out


def test_json_reports_match_schema(tmp_path):
    for args in (
        ["validate", str(FIXTURES / "kalgebra_seed1.json")],
        ["destab", str(FIXTURES / "kalgebra_amplified_m2.json"), "-o", str(tmp_path / "c.json")],
        ["roundtrip", str(FIXTURES / "morphism_broken_seed7.json")],
        ["validate", str(FIXTURES / "bad" / "not_json.json")],
        ["fuzz", "--seeds", "1..2", "--profile", "kalgebra,broken"],
    ):
        for placement in ("before", "after"):
            argv = ["--json"] + args if placement == "before" else args + ["--json"]
            proc = run(argv)
            doc = json.loads(proc.stdout)
            jsonschema.validate(doc, REPORT_SCHEMA)
            assert doc["exit_code"] == proc.returncode


def test_destab_output_is_commutant(tmp_path):
    out = tmp_path / "c.json"
    assert cli.main(["destab", str(FIXTURES / "kalgebra_amplified_m2.json"), "-o", str(out)]) == 0
    assert load(out).dim == 4


def test_stab_output_is_kalgebra(tmp_path):
    out = tmp_path / "k.json"
    assert cli.main(["stab", str(FIXTURES / "algebra_c_plus_m2.json"), "-n", "3", "-o", str(out)]) == 0
    KA = load(out)
    assert KA.N == 9 and KA.A.dim == 45 and KA.validate().passed


def test_theorem_failures_get_their_own_code(monkeypatch, capsys):
    def failing(value, tol):
        return [Report("planted_failure", residuals={"r": 1.0}, threshold=1e-8)]

    monkeypatch.setattr(cli, "roundtrip_reports", lambda value, n, tol: failing(value, tol))
    assert cli.main(["roundtrip", str(FIXTURES / "linking_zero_bimodule.json")]) == 3
    assert "roundtrip failed" in capsys.readouterr().err


def test_tolerance_flag_and_environment(monkeypatch):
    args = cli.build_parser().parse_args(["validate", "x", "--tol", "1e-6"])
    assert cli._tolerance(args) == 1e-6
    monkeypatch.setenv("DESTAB_TOL", "1e-5")
    args = cli.build_parser().parse_args(["validate", "x"])
    assert cli._tolerance(args) == 1e-5
    monkeypatch.delenv("DESTAB_TOL")
    assert cli._tolerance(args) == 1e-9


def test_seed_and_profile_parsing():
    assert cli.parse_seeds("3..5") == range(3, 6)
    assert cli.parse_seeds("7") == range(7, 8)
    prof = cli.parse_profile("kalgebra,n=3,ambient=12,blocks=2x1+1x2")
    assert prof == {"kinds": ["kalgebra"], "n": (3,), "ambient": 12, "blocks": ((2, 1), (1, 2))}


def test_outputs_are_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        cli.main(["--seed", "4", "destab", str(FIXTURES / "kalgebra_seed1.json"), "-o", str(out)])
    assert a.read_bytes() == b.read_bytes()
    first = run(["--json", "validate", str(FIXTURES / "linking_seed2.json")]).stdout
    assert run(["--json", "validate", str(FIXTURES / "linking_seed2.json")]).stdout == first
