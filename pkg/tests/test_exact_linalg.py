import pytest
from sympy.polys.domains import QQ

from corpus import wu_generator
from errors import DimensionMismatch, NotNilpotentError, NotSquareError, SingularMatrixError
from exact_linalg import (
    RatMatrix,
    Subspace,
    coefficients,
    column_space,
    coprime_factors,
    characteristic_polynomial,
    determinant,
    eval_poly,
    extend_to_complement,
    fitting_split,
    format_rational,
    inverse,
    is_power_of_irreducible,
    kernel_basis,
    minimal_polynomial,
    nilpotent_exp,
    parse_rational,
    polynomial,
    projection_onto,
    rank,
    rref,
    solve_linear,
    sum_of,
)


@pytest.mark.parametrize("text,expected", [
    ("3", QQ(3)),
    ("-1/2", QQ(-1, 2)),
    ("4/6", QQ(2, 3)),
    (" 7 / -14 ", QQ(-1, 2)),
])
def test_parse_rational_normalizes(text, expected):
    assert parse_rational(text) == expected


@pytest.mark.parametrize("text", ["1/0", "abc", "1.5", "", "1/2/3"])
def test_parse_rational_rejects_malformed(text):
    with pytest.raises(ValueError):
        parse_rational(text)


def test_format_rational_drops_unit_denominator():
    assert format_rational(QQ(6, 3)) == "2"
    assert format_rational(QQ(-3, 6)) == "-1/2"


def test_matrix_rejects_floats_and_ragged_rows():
    with pytest.raises(TypeError):
        RatMatrix([[0.5]])
    with pytest.raises(DimensionMismatch):
        RatMatrix([[1, 2], [3]])


def test_matrix_product_and_inverse_are_exact():
    m = RatMatrix([[2, 1], [1, 1]])
    assert m @ inverse(m) == RatMatrix.identity(2)
    assert inverse(RatMatrix([[3]])) == RatMatrix([["1/3"]])
    assert determinant(m) == 1


def test_inverse_of_singular_matrix_raises():
    with pytest.raises(SingularMatrixError):
        inverse(RatMatrix([[1, 2], [2, 4]]))


def test_determinant_requires_square():
    with pytest.raises(NotSquareError):
        determinant(RatMatrix([[1, 2]]))


def test_rref_reports_pivots_and_rank():
    reduced, pivots, r = rref(RatMatrix([[0, 2, 4], [0, 1, 2], [1, 0, 1]]))
    assert pivots == [0, 1]
    assert r == 2
    assert reduced.row(0) == (1, 0, 1)
    assert reduced.row(1) == (0, 1, 2)


def _random_matrix(rng, rows, cols, bound=3):
    return RatMatrix([[int(x) for x in rng.integers(-bound, bound + 1, size=cols)] for _ in range(rows)])


def test_rref_is_idempotent(rng):
    for _ in range(25):
        m = _random_matrix(rng, int(rng.integers(1, 5)), int(rng.integers(1, 5)))
        once = rref(m)
        twice = rref(once.reduced)
        assert twice.reduced == once.reduced
        assert twice.pivot_columns == once.pivot_columns


def test_kernel_of_zero_rows_is_everything():
    assert kernel_basis(RatMatrix.zeros(0, 3)) == Subspace.full(3)
    assert kernel_basis(RatMatrix.zeros(2, 3)) == Subspace.full(3)


def test_kernel_and_column_space_dimensions_add_up():
    m = RatMatrix([[1, 1, 0, 0], [0, 0, 1, 1], [1, 1, 1, 1]])
    kernel = kernel_basis(m)
    assert kernel.dim + rank(m) == 4
    for v in kernel.vectors:
        assert all(c == 0 for c in m.apply(v))
    assert column_space(m).dim == 2


def test_subspace_canonical_form_ignores_spanning_set():
    a = Subspace.span([(1, 1, 0), (0, 1, 1)], 3)
    b = Subspace.span([(1, 2, 1), (1, 0, -1), (2, 2, 0)], 3)
    assert a == b
    assert a.contains_vector((1, 0, -1))
    assert not a.contains_vector((1, 0, 0))


def test_subspace_sum_and_intersection():
    xy = Subspace.span([(1, 0, 0), (0, 1, 0)], 3)
    yz = Subspace.span([(0, 1, 0), (0, 0, 1)], 3)
    assert (xy + yz).is_full()
    assert xy.intersect(yz) == Subspace.span([(0, 1, 0)], 3)
    assert sum_of([], 3).is_zero()


def test_subspace_coordinates_reconstruct_vector():
    s = Subspace.span([(1, 0, 2), (0, 1, -1)], 3)
    assert s.coordinates((3, -2, 8)) == (3, -2)
    with pytest.raises(DimensionMismatch):
        s.coordinates((0, 0, 1))


def test_subspaces_of_different_spaces_cannot_mix():
    with pytest.raises(DimensionMismatch):
        Subspace.full(2) + Subspace.full(3)


def test_extend_to_complement_is_greedy():
    base = Subspace.span([(1, 0, 0)], 3)
    picked = extend_to_complement(base, [(2, 0, 0), (0, 1, 0), (1, 1, 0), (0, 0, 1)])
    assert picked == [(0, 1, 0), (0, 0, 1)]


def test_projection_onto_along_complement():
    image = Subspace.span([(1, 0)], 2)
    along = Subspace.span([(1, 1)], 2)
    p = projection_onto(image, along)
    assert p @ p == p
    assert p.apply((1, 1)) == (0, 0)
    assert p.apply((1, 0)) == (1, 0)


def test_solve_linear_particular_solution_or_none():
    a = RatMatrix([[1, 1], [2, 2]])
    solution = solve_linear(a, [QQ(2), QQ(4)])
    assert a.apply(solution) == (2, 4)
    assert solve_linear(a, [QQ(1), QQ(3)]) is None


def test_characteristic_and_minimal_polynomial():
    m = RatMatrix.diagonal([2, 2, 3])
    assert coefficients(characteristic_polynomial(m)) == [-12, 16, -7, 1]
    assert coefficients(minimal_polynomial(m)) == [6, -5, 1]
    assert eval_poly(minimal_polynomial(m), m).is_zero()


def test_minimal_polynomial_annihilates_and_divides_characteristic(rng):
    samples = [_random_matrix(rng, 3, 3) for _ in range(15)]
    samples += [RatMatrix.diagonal([1, 1, 1]), RatMatrix([[2, 1, 0], [0, 2, 0], [0, 0, 2]]), wu_generator()]
    for m in samples:
        mu = minimal_polynomial(m)
        assert eval_poly(mu, m).is_zero()
        assert characteristic_polynomial(m).rem(mu).is_zero
        assert mu.LC() == 1


def test_coprime_factors_groups_prime_powers():
    p = polynomial([-4, 8, -5, 1])  # (x - 1)(x - 2)^2
    factors = coprime_factors(p)
    assert [coefficients(f) for f in factors] == [[-1, 1], [4, -4, 1]]
    assert not is_power_of_irreducible(p)
    assert is_power_of_irreducible(polynomial([1, 0, 1]))


def test_nilpotent_exp_sums_finite_series():
    n = RatMatrix([[0, 1, 0], [0, 0, 1], [0, 0, 0]])
    assert nilpotent_exp(n, 2) == RatMatrix([[1, 2, 2], [0, 1, 2], [0, 0, 1]])
    with pytest.raises(NotNilpotentError):
        nilpotent_exp(RatMatrix.identity(2), 1)


def test_nilpotent_exp_of_neutral_generator_at_one():
    h = nilpotent_exp(wu_generator(), 1)
    assert h == RatMatrix([
        [1, -1, 0, 1],
        [1, 1, -1, 0],
        [0, -1, 1, 1],
        [1, 0, -1, 1],
    ])
    assert rank(h - RatMatrix.identity(4)) == 2
    assert kernel_basis(h - RatMatrix.identity(4)) == Subspace.span([(1, 0, 1, 0), (0, 1, 0, 1)], 4)
    assert h @ nilpotent_exp(wu_generator(), -1) == RatMatrix.identity(4)


NULL_ROTATION = RatMatrix([[0, 1, 0], [0, 0, -1], [0, 0, 0]])


@pytest.mark.parametrize("n", [wu_generator(), NULL_ROTATION], ids=["neutral", "null-rotation"])
def test_nilpotent_exp_is_a_one_parameter_group(rng, n):
    for _ in range(50):
        s = QQ(int(rng.integers(-9, 10)), int(rng.integers(1, 7)))
        t = QQ(int(rng.integers(-9, 10)), int(rng.integers(1, 7)))
        assert nilpotent_exp(n, s) @ nilpotent_exp(n, t) == nilpotent_exp(n, s + t)


@pytest.mark.parametrize("n,gram", [
    (wu_generator(), RatMatrix.diagonal([1, 1, -1, -1])),
    (NULL_ROTATION, RatMatrix([[0, 0, 1], [0, 1, 0], [1, 0, 0]])),
], ids=["neutral", "null-rotation"])
def test_nilpotent_exp_of_skew_adjoint_preserves_form(n, gram):
    assert (gram @ n).T == -(gram @ n)
    for t in (QQ(1), QQ(-2), QQ(3, 7)):
        h = nilpotent_exp(n, t)
        assert h.T @ gram @ h == gram


def test_fitting_split_separates_nilpotent_and_invertible_parts():
    x = RatMatrix([[0, 1, 0], [0, 0, 0], [0, 0, 5]])
    kernel_part, image_part = fitting_split(x)
    assert kernel_part == Subspace.span([(1, 0, 0), (0, 1, 0)], 3)
    assert image_part == Subspace.span([(0, 0, 1)], 3)
