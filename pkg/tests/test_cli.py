import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from main import app

TESTS_DIR = Path(__file__).resolve().parent

runner = CliRunner()


def _json(args):
    result = runner.invoke(app, args + ["--json"])
    assert result.exit_code == 0, result.output
    return json.loads(result.stdout)


def test_analyze_reports_fixed_space_and_duality():
    document = _json(["analyze", "wu-factor"])
    assert document["schema"] == 1
    assert document["command"] == "analyze"
    payload = document["payload"]
    assert payload["signature"] == [2, 2]
    assert payload["fixed_dim"] == 2
    assert payload["fixed_isotropic"] is True
    assert payload["duality"] is True
    assert payload["fixed_space"] == payload["moved_span"] == [["1", "0", "1", "0"], ["0", "1", "0", "1"]]


def test_decompose_json_is_byte_identical_across_runs():
    first = runner.invoke(app, ["decompose", "wu-product", "--json", "--seed", "7"])
    second = runner.invoke(app, ["decompose", "wu-product", "--json", "--seed", "7"])
    assert first.exit_code == second.exit_code == 0
    assert first.stdout == second.stdout


def test_decompose_instance_file():
    payload = _json(["decompose", str(TESTS_DIR / "wu_product.json")])["payload"]
    assert (payload["p1"], payload["p2"]) == (0, 2)
    assert [s["dim"] for s in payload["summands"]] == [4, 4]
    assert payload["trivial_part"]["dim"] == 0


def test_decompose_text_output():
    result = runner.invoke(app, ["decompose", "rotation-z"])
    assert result.exit_code == 0
    assert "rotation-z" in result.stdout
    assert "p1" in result.stdout


def test_phi_reports_violation_and_uniqueness():
    payload = _json(["phi", "wu-factor"])["payload"]
    assert payload["status"] == "violated"
    assert payload["bad_summands"] == [0]
    assert payload["summands"][0]["isotropic_pair"] is not None
    assert payload["uniqueness"]["verdict"] == "unique_one_bad_factor"


def test_compare_named_decompositions():
    payload = _json(["compare", "wu-product", "E/F", "W"])["payload"]
    assert payload["verdict"] == "equivalent_up_to_isometry"
    assert payload["counts_equal"] == [True, True]
    assert payload["decompositions"] == ["E/F", "W"]
    assert payload["isometry"] is not None


def test_compare_computed_with_itself():
    payload = _json(["compare", "two-planes", "computed", "planes"])["payload"]
    assert payload["verdict"] == "identical"


def test_oracle_reports_finite_field_evidence():
    payload = _json(["oracle", "wu-factor", "--oracle-primes", "5"])["payload"]
    assert payload["primes_used"] == [5]
    assert payload["sound"] is True
    entry = payload["entries"][0]
    assert entry["selfadjoint_idempotents"] == 0
    assert entry["nondegenerate_invariant"] is False
    assert len(entry["invariant_subspaces"]) == 3


def test_demo_product_witnesses_second_decomposition():
    payload = _json(["demo", "wu-product"])["payload"]
    assert payload["uniqueness"]["verdict"] == "nonunique_witnessed"
    assert payload["known"]["E/F"]["ok"] and payload["known"]["W"]["ok"]
    failing = [c["clause"] for c in payload["printed"]["W-printed"]["failing"]]
    assert "pairwise_orthogonal" in failing
    assert payload["comparison"]["verdict"] == "equivalent_up_to_isometry"


def test_export_then_analyze_file(tmp_path):
    target = tmp_path / "lorentz.json"
    result = runner.invoke(app, ["export", "lorentz-null", "-o", str(target)])
    assert result.exit_code == 0, result.output
    payload = _json(["analyze", str(target)])["payload"]
    assert payload["dimension"] == 3
    assert payload["fixed_dim"] == 1


@pytest.mark.parametrize("args,code", [
    (["analyze", str(TESTS_DIR / "malformed.json")], 2),
    (["analyze", "no-such-instance"], 2),
    (["phi", "wu-factor", "--oracle-primes", "five"], 2),
    (["compare", "wu-product", "E/F", "missing"], 4),
    (["demo", "no-such-instance"], 4),
])
def test_errors_map_to_exit_codes(args, code):
    result = runner.invoke(app, args)
    assert result.exit_code == code


def test_invalid_representation_exits_with_invariant_code(tmp_path):
    path = tmp_path / "not_skew.json"
    path.write_text(json.dumps({
        "name": "not-skew",
        "dimension": 2,
        "gram": [[1, 0], [0, 1]],
        "generators": [{"kind": "infinitesimal", "matrix": [[1, 0], [0, 0]]}],
    }), encoding="utf-8")
    result = runner.invoke(app, ["analyze", str(path)])
    assert result.exit_code == 3
