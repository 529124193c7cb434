import json
from pathlib import Path

import pytest

from corpus import all_instances, get_instance, instance_names, phi_suite, summarize
from derham_decompose import verify_decomposition
from errors import UnknownReference

GOLDEN_PATH = Path(__file__).resolve().parent / "golden" / "corpus_expectations.json"


@pytest.fixture(scope="module")
def golden():
    assert GOLDEN_PATH.exists(), f"Golden expectations not found: {GOLDEN_PATH}"
    with GOLDEN_PATH.open("r", encoding="utf-8") as f:
        return json.load(f)


def test_golden_file_covers_every_instance(golden):
    assert sorted(golden) == sorted(instance_names())


@pytest.mark.parametrize("name", instance_names())
def test_summary_matches_golden(golden, name):
    assert summarize(get_instance(name)) == golden[name]


@pytest.mark.parametrize("name", instance_names())
def test_summary_matches_declared_expectations(name):
    instance = get_instance(name)
    summary = summarize(instance)
    expected = instance.expected
    assert summary["trivial_dim"] == expected.trivial_dim
    assert (summary["p1"], summary["p2"]) == (expected.p1, expected.p2)
    assert summary["kinds"] == list(expected.kinds)
    assert summary["dims"] == list(expected.dims)
    assert summary["phi"] == expected.phi_status.value
    assert summary["uniqueness"] == expected.uniqueness.value


@pytest.mark.parametrize("instance", all_instances(), ids=lambda i: i.name)
def test_known_decompositions_are_valid(instance):
    for name, parts in instance.known_decompositions.items():
        validity = verify_decomposition(instance.rep, parts)
        assert validity.ok, (instance.name, name, [c.name for c in validity.failing()])


@pytest.mark.parametrize("seed", [0, 11])
def test_phi_suite_summaries_do_not_depend_on_seed(golden, seed):
    for instance in phi_suite():
        assert summarize(instance, seed=seed) == golden[instance.name]


def test_unknown_instance_name():
    with pytest.raises(UnknownReference) as excinfo:
        get_instance("wu")
    assert excinfo.value.exit_code == 4
