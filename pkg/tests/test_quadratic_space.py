import pytest

from errors import DegenerateFormError, InvariantViolation, NotSquareError, PreconditionError
from exact_linalg import RatMatrix, Subspace, determinant
from quadratic_space import (
    QuadraticSpace,
    adapted_basis,
    are_orthogonal,
    diagonalize_form,
    is_nondegenerate,
    is_totally_isotropic,
    orth_complement,
    orth_complement_within,
    orthogonal_basis,
    orthogonal_projection,
    radical,
    signature,
    signature_of,
)

NEUTRAL = QuadraticSpace.diagonal([1, 1, -1, -1])
HYPERBOLIC = QuadraticSpace(RatMatrix([[0, 1], [1, 0]]))
LORENTZ_NULL = QuadraticSpace(RatMatrix([[0, 0, 1], [0, 1, 0], [1, 0, 0]]))


def test_space_rejects_bad_gram_matrices():
    with pytest.raises(NotSquareError):
        QuadraticSpace(RatMatrix([[1, 0]]))
    with pytest.raises(InvariantViolation):
        QuadraticSpace(RatMatrix([[1, 1], [0, 1]]))
    with pytest.raises(DegenerateFormError):
        QuadraticSpace(RatMatrix([[1, 1], [1, 1]]))


@pytest.mark.parametrize("space,expected", [
    (NEUTRAL, (2, 2)),
    (HYPERBOLIC, (1, 1)),
    (LORENTZ_NULL, (2, 1)),
    (QuadraticSpace.diagonal([3, "1/2", -5]), (2, 1)),
])
def test_signature(space, expected):
    assert signature(space) == expected


def _random_invertible(rng, n):
    while True:
        p = RatMatrix([[int(x) for x in rng.integers(-2, 3, size=n)] for _ in range(n)])
        if determinant(p) != 0:
            return p


@pytest.mark.parametrize("space", [NEUTRAL, HYPERBOLIC, LORENTZ_NULL], ids=["neutral", "hyperbolic", "lorentz-null"])
def test_signature_is_a_congruence_invariant(rng, space):
    for _ in range(10):
        p = _random_invertible(rng, space.dim)
        assert signature(QuadraticSpace(p.T @ space.gram @ p)) == signature(space)


@pytest.mark.parametrize("space", [NEUTRAL, HYPERBOLIC, LORENTZ_NULL], ids=["neutral", "hyperbolic", "lorentz-null"])
def test_double_orthogonal_complement(rng, space):
    n = space.dim
    for _ in range(15):
        count = int(rng.integers(1, n))
        s = Subspace.span([[int(x) for x in rng.integers(-2, 3, size=n)] for _ in range(count)], n)
        assert orth_complement(space, orth_complement(space, s)) == s
        assert orth_complement(space, s).dim == n - s.dim


def test_diagonalize_form_is_a_congruence():
    gram = RatMatrix([[0, 1, 2], [1, 0, 0], [2, 0, 1]])
    rows, values = diagonalize_form(gram)
    assert rows @ gram @ rows.T == RatMatrix.diagonal(values)
    assert all(v != 0 for v in values)


def test_signature_of_degenerate_subspace_counts_radical():
    isotropic_line = Subspace.span([(1, 0, 1, 0)], 4)
    assert signature_of(NEUTRAL, isotropic_line) == (0, 0, 1)
    mixed = Subspace.span([(1, 0, 1, 0), (0, 1, 0, 0)], 4)
    assert signature_of(NEUTRAL, mixed) == (1, 0, 1)
    assert signature_of(NEUTRAL, Subspace.zero(4)) == (0, 0, 0)


def test_orthogonal_basis_diagonalizes_restriction():
    s = Subspace.span([(1, 1, 0, 0), (0, 1, 1, 0), (0, 0, 1, 1)], 4)
    basis, values = orthogonal_basis(NEUTRAL, s)
    gram = NEUTRAL.gram_of(basis, basis)
    assert gram == RatMatrix.diagonal(values)
    assert Subspace.span(basis, 4) == s


def test_orth_complement_and_radical():
    plane = Subspace.span([(1, 0, 1, 0), (0, 1, 0, 1)], 4)
    assert orth_complement(NEUTRAL, plane) == plane
    assert radical(NEUTRAL, plane) == plane
    assert is_totally_isotropic(NEUTRAL, plane)
    assert not is_nondegenerate(NEUTRAL, plane)
    assert orth_complement(NEUTRAL, Subspace.zero(4)).is_full()


def test_orth_complement_within_subspace():
    v = Subspace.span([(1, 0, 0, 0), (0, 0, 1, 0)], 4)
    line = Subspace.span([(1, 0, 1, 0)], 4)
    assert orth_complement_within(NEUTRAL, line, v) == line


def test_are_orthogonal():
    e = Subspace.span([(1, 0, 0, 0), (0, 1, 0, 0)], 4)
    f = Subspace.span([(0, 0, 1, 0), (0, 0, 0, 1)], 4)
    assert are_orthogonal(NEUTRAL, e, f)
    assert not are_orthogonal(NEUTRAL, e, Subspace.span([(1, 0, 1, 0)], 4))


def test_orthogonal_projection_of_a_definite_line():
    line = Subspace.span([(1, 0, 1, 1)], 4)  # norm 1 - 1 - 1 = -1
    p = orthogonal_projection(NEUTRAL, line)
    assert p @ p == p
    assert p.apply((1, 0, 1, 1)) == (1, 0, 1, 1)
    for v in orth_complement(NEUTRAL, line).vectors:
        assert all(c == 0 for c in p.apply(v))


def test_orthogonal_projection_needs_nondegenerate_target():
    with pytest.raises(DegenerateFormError):
        orthogonal_projection(NEUTRAL, Subspace.span([(1, 0, 1, 0)], 4))


def _expected_block_gram(r, q, diagonal):
    size = q + r
    rows = [[0] * size for _ in range(size)]
    for i in range(r):
        rows[i][q + i] = rows[q + i][i] = 1
    for k, a in enumerate(diagonal):
        rows[r + k][r + k] = a
    return RatMatrix(rows)


def test_adapted_basis_on_neutral_factor():
    fixed = Subspace.span([(1, 0, 1, 0), (0, 1, 0, 1)], 4)
    adapted = adapted_basis(NEUTRAL, Subspace.full(4), fixed, fixed)
    assert (adapted.r, adapted.q) == (2, 2)
    assert adapted.a_diagonal == []
    rows = adapted.basis.row_list()
    assert NEUTRAL.gram_of(rows, rows) == _expected_block_gram(2, 2, [])
    assert Subspace.span(rows[:2], 4) == fixed


def test_adapted_basis_with_middle_block():
    fixed = Subspace.span([(1, 0, 0)], 3)
    moved = orth_complement(LORENTZ_NULL, fixed)
    adapted = adapted_basis(LORENTZ_NULL, Subspace.full(3), fixed, moved)
    assert (adapted.r, adapted.q) == (1, 2)
    assert adapted.signs == [1]
    rows = adapted.basis.row_list()
    assert LORENTZ_NULL.gram_of(rows, rows) == _expected_block_gram(1, 2, adapted.a_diagonal)
    assert Subspace.span(rows[:2], 3) == moved


@pytest.mark.parametrize("fixed_vectors,moved_vectors,clause", [
    ([(1, 0, 0, 0)], [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 0, 1)], "fixed_part totally isotropic"),
    ([(1, 0, 1, 0)], [(0, 1, 0, 1)], "fixed_part in moved_part"),
    ([(1, 0, 1, 0)], [(1, 0, 1, 0), (0, 1, 0, 0)], "moved_part = fixed_part^perp in v"),
])
def test_adapted_basis_names_failing_clause(fixed_vectors, moved_vectors, clause):
    fixed = Subspace.span(fixed_vectors, 4)
    moved = Subspace.span(moved_vectors, 4)
    with pytest.raises(PreconditionError) as excinfo:
        adapted_basis(NEUTRAL, Subspace.full(4), fixed, moved)
    assert excinfo.value.clause == clause
