import numpy as np
import pytest

from corpus import J, all_instances, get_instance, wu_factor
from exact_linalg import RatMatrix
from holonomy_action import Generator, Representation
from oracle import (
    InvalidReduction,
    OracleBoundExceeded,
    RationalVerdicts,
    crosscheck,
    enumerate_idempotents_mod_p,
    enumerate_invariant_subspaces_mod_p,
    gaussian_binomial,
    rational_verdicts,
    reduce_mod_p,
)
from quadratic_space import QuadraticSpace

IDENTITY_PLANE = Representation(QuadraticSpace.diagonal([1, 1]), ())
ROTATION_PLANE = Representation(QuadraticSpace.diagonal([1, 1]), (Generator.infinitesimal(J),))


def test_gaussian_binomial_counts_subspaces():
    assert gaussian_binomial(2, 1, 3) == 4
    assert gaussian_binomial(4, 2, 5) == 806
    assert gaussian_binomial(3, 0, 7) == 1


def test_reduction_rejects_denominators_divisible_by_p():
    rep = Representation(QuadraticSpace.diagonal(["1/5", 1]), ())
    reduction = reduce_mod_p(rep, 5)
    assert not reduction.valid
    assert "denominator" in reduction.reason
    assert reduce_mod_p(rep, 7).valid
    with pytest.raises(InvalidReduction):
        enumerate_idempotents_mod_p(rep, 5)


def test_reduction_rejects_vanishing_determinant():
    rep = Representation(QuadraticSpace.diagonal([3, 1]), ())
    assert not reduce_mod_p(rep, 3).valid


def test_identity_action_has_every_idempotent():
    count = enumerate_idempotents_mod_p(IDENTITY_PLANE, 3)
    assert count.commutant_dim == 4
    # 0, I and the 12 rank-one idempotents of 2x2 matrices over GF(3)
    assert count.total == 14
    assert count.nontrivial == 12
    for w in count.witnesses:
        assert np.array_equal((w @ w) % 3, w)


def test_identity_action_leaves_every_line_invariant():
    lines = enumerate_invariant_subspaces_mod_p(IDENTITY_PLANE, 3, 1)
    assert len(lines) == 4
    # -1 is not a square mod 3
    assert all(line.nondegenerate and not line.isotropic for line in lines)


def test_rotation_plane_is_irreducible_mod_7():
    count = enumerate_idempotents_mod_p(ROTATION_PLANE, 7)
    assert (count.total, count.nontrivial) == (2, 0)
    assert enumerate_invariant_subspaces_mod_p(ROTATION_PLANE, 7, 1) == []


def test_rotation_plane_splits_mod_5():
    assert enumerate_idempotents_mod_p(ROTATION_PLANE, 5).nontrivial > 0
    assert len(enumerate_invariant_subspaces_mod_p(ROTATION_PLANE, 5, 1)) == 2


def test_single_factor_mod_5():
    rep = wu_factor().rep
    assert enumerate_idempotents_mod_p(rep, 5).nontrivial > 0
    assert enumerate_idempotents_mod_p(rep, 5, self_adjoint=True).nontrivial == 0
    planes = {s.basis: s for s in enumerate_invariant_subspaces_mod_p(rep, 5, 2)}
    for basis in (
        ((1, 0, 1, 0), (0, 1, 0, 1)),
        ((1, 0, 0, 1), (0, 1, 1, 0)),
        ((1, 0, 0, 4), (0, 1, 4, 0)),
    ):
        assert basis in planes
        assert planes[basis].isotropic


def test_search_bound_is_enforced():
    with pytest.raises(OracleBoundExceeded):
        enumerate_idempotents_mod_p(wu_factor().rep, 11)
    with pytest.raises(OracleBoundExceeded):
        enumerate_invariant_subspaces_mod_p(wu_factor().rep, 5, 2, bound=100)
    assert OracleBoundExceeded("x").exit_code == 3


def test_crosscheck_agrees_on_single_factor():
    rep = wu_factor().rep
    report = crosscheck(rep, rational_verdicts(rep))
    assert report.sound
    by_prime = {e.prime: e for e in report.entries}
    assert by_prime[5].module_idempotents > 0
    assert by_prime[5].selfadjoint_idempotents == 0
    assert by_prime[11].module_idempotents is None
    assert all(by_prime[5].witnesses_reduce)


def test_crosscheck_reports_unsound_witness():
    rep = wu_factor().rep
    verdicts = RationalVerdicts(module_decomposable=True, witnesses=(RatMatrix.identity(4).scale(2),))
    report = crosscheck(rep, verdicts, primes=(5,))
    assert not report.sound
    assert not report.agreement


def test_crosscheck_flags_probabilistic_verdict_contradicted_everywhere():
    verdicts = RationalVerdicts(module_decomposable=False, module_certified=False)
    report = crosscheck(ROTATION_PLANE, verdicts, primes=(5, 13))
    assert report.sound
    assert report.review_flags


@pytest.mark.parametrize("instance", all_instances(), ids=lambda i: i.name)
def test_crosscheck_is_sound_on_corpus(instance):
    report = crosscheck(instance.rep, rational_verdicts(instance.rep))
    assert report.sound, report.soundness_violations


def test_crosscheck_replaces_primes_with_bad_reduction():
    rep = Representation(QuadraticSpace.diagonal(["1/5", 1]), ())
    report = crosscheck(rep, RationalVerdicts(), primes=(5, 7))
    assert [(e.prime, e.valid) for e in report.entries] == [(5, False), (7, True), (11, True)]
    assert report.primes_used == (7, 11)
    assert "denominator" in report.entries[0].reason
    assert not report.review_flags


def test_crosscheck_counts_invariant_subspaces_on_single_factor():
    rep = wu_factor().rep
    evidence = crosscheck(rep, rational_verdicts(rep), primes=(5,)).entries[0]
    assert len(evidence.invariant_subspaces) == 3
    # the fixed plane and the two isotropic planes, at least
    assert evidence.invariant_subspaces[1] >= 3
    assert evidence.nondegenerate_invariant is False
    assert evidence.selfadjoint_idempotents == 0


def test_crosscheck_finds_nondegenerate_planes_of_two_planes():
    rep = get_instance("two-planes").rep
    verdicts = rational_verdicts(rep)
    assert verdicts.orthogonally_decomposable
    report = crosscheck(rep, verdicts)
    assert report.primes_used == (5, 7, 11)
    assert all(e.nondegenerate_invariant for e in report.entries)
    assert all(e.selfadjoint_idempotents > 0 for e in report.entries)
    assert report.agreement
