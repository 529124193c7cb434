"""Symmetric bilinear forms of arbitrary signature.

A ``QuadraticSpace`` is always nondegenerate; subspaces of it may not be, and
the helpers here answer the radical / complement / isotropy questions the
decomposition pipeline asks about them.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Sequence, Tuple

from sympy.polys.domains import QQ

from errors import DegenerateFormError, DimensionMismatch, InternalInconsistency, InvariantViolation, NotSquareError, PreconditionError
from exact_linalg import (
    RatMatrix,
    Rational,
    Subspace,
    Vector,
    add_vectors,
    extend_to_complement,
    inverse,
    kernel_basis,
    rank,
    scale_vector,
    unit_vector,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadraticSpace:
    gram: RatMatrix

    def __post_init__(self) -> None:
        if not self.gram.is_square:
            raise NotSquareError(f"gram matrix must be square, got {self.gram.rows}x{self.gram.cols}")
        if self.gram != self.gram.T:
            raise InvariantViolation("gram matrix is not symmetric")
        if rank(self.gram) != self.gram.rows:
            raise DegenerateFormError(f"gram matrix is degenerate (rank {rank(self.gram)} < {self.gram.rows})")

    @classmethod
    def diagonal(cls, values: Sequence) -> "QuadraticSpace":
        return cls(RatMatrix.diagonal(values))

    @property
    def dim(self) -> int:
        return self.gram.rows

    def pair(self, u: Sequence[Rational], v: Sequence[Rational]) -> Rational:
        """The bilinear form ⟨u, v⟩."""
        return sum((a * b for a, b in zip(u, self.gram.apply(v))), QQ(0))

    def gram_of(self, left: Sequence[Sequence[Rational]], right: Sequence[Sequence[Rational]]) -> RatMatrix:
        return RatMatrix([[self.pair(u, v) for v in right] for u in left], len(right))

    def adjoint(self, m: RatMatrix) -> RatMatrix:
        """The form adjoint G⁻¹ mᵀ G."""
        return inverse(self.gram) @ m.T @ self.gram


def _check_ambient(qs: QuadraticSpace, s: Subspace) -> None:
    if s.ambient_dim != qs.dim:
        raise DimensionMismatch(f"subspace of a {s.ambient_dim}-dimensional space used in a {qs.dim}-dimensional form")


def _diagonalize(pair: Callable[[Vector, Vector], Rational], vectors: Sequence[Vector]) -> Tuple[List[Vector], List[Rational]]:
    # Symmetric Gram-Schmidt; an all-isotropic remainder with a nonzero
    # pairing u, v is handled by trading u for u + v.
    remaining = [tuple(v) for v in vectors]
    basis: List[Vector] = []
    diagonal: List[Rational] = []
    while remaining:
        index = next((i for i, v in enumerate(remaining) if pair(v, v) != 0), None)
        if index is None:
            hyperbolic = next(
                ((i, j) for i in range(len(remaining)) for j in range(i + 1, len(remaining)) if pair(remaining[i], remaining[j]) != 0),
                None,
            )
            if hyperbolic is None:
                basis.extend(remaining)
                diagonal.extend(QQ(0) for _ in remaining)
                break
            i, j = hyperbolic
            remaining[i] = add_vectors(remaining[i], remaining[j])
            index = i
        w = remaining.pop(index)
        c = pair(w, w)
        remaining = [add_vectors(v, scale_vector(-pair(v, w) / c, w)) for v in remaining]
        basis.append(w)
        diagonal.append(c)
    return basis, diagonal


def diagonalize_form(gram: RatMatrix) -> Tuple[RatMatrix, List[Rational]]:
    """Congruence diagonalization: rows P with P·gram·Pᵀ = diag(values)."""
    if not gram.is_square:
        raise NotSquareError("gram matrix must be square")
    n = gram.rows

    def pair(u: Vector, v: Vector) -> Rational:
        return sum((a * b for a, b in zip(u, gram.apply(v))), QQ(0))

    basis, diagonal = _diagonalize(pair, [unit_vector(n, i) for i in range(n)])
    return RatMatrix(basis, n), diagonal


def _count_signs(values: Sequence[Rational]) -> Tuple[int, int, int]:
    return (
        sum(1 for v in values if v > 0),
        sum(1 for v in values if v < 0),
        sum(1 for v in values if v == 0),
    )


def signature(qs: QuadraticSpace) -> Tuple[int, int]:
    n_plus, n_minus, _ = _count_signs(diagonalize_form(qs.gram)[1])
    return n_plus, n_minus


def restrict_form(qs: QuadraticSpace, s: Subspace) -> RatMatrix:
    _check_ambient(qs, s)
    return qs.gram_of(s.vectors, s.vectors)


def signature_of(qs: QuadraticSpace, s: Subspace) -> Tuple[int, int, int]:
    """(n_plus, n_minus, n_zero) of the form restricted to ``s``."""
    if s.is_zero():
        return 0, 0, 0
    return _count_signs(diagonalize_form(restrict_form(qs, s))[1])


def orthogonal_basis(qs: QuadraticSpace, s: Subspace) -> Tuple[List[Vector], List[Rational]]:
    """Basis of ``s`` (ambient coordinates) that is orthogonal for the form, with the self-pairings."""
    _check_ambient(qs, s)
    return _diagonalize(qs.pair, s.vectors)


def orth_complement(qs: QuadraticSpace, s: Subspace) -> Subspace:
    _check_ambient(qs, s)
    if s.is_zero():
        return Subspace.full(qs.dim)
    return kernel_basis(s.basis @ qs.gram)


def orth_complement_within(qs: QuadraticSpace, s: Subspace, v: Subspace) -> Subspace:
    return v.intersect(orth_complement(qs, s))


def radical(qs: QuadraticSpace, s: Subspace) -> Subspace:
    return s.intersect(orth_complement(qs, s))


def is_totally_isotropic(qs: QuadraticSpace, s: Subspace) -> bool:
    return restrict_form(qs, s).is_zero()


def is_nondegenerate(qs: QuadraticSpace, s: Subspace) -> bool:
    return s.is_zero() or rank(restrict_form(qs, s)) == s.dim


def are_orthogonal(qs: QuadraticSpace, s: Subspace, t: Subspace) -> bool:
    _check_ambient(qs, s)
    _check_ambient(qs, t)
    return qs.gram_of(s.vectors, t.vectors).is_zero()


class AdaptedBasis(NamedTuple):
    basis: RatMatrix
    r: int
    q: int
    a_diagonal: List[Rational]
    signs: List[int]


def adapted_basis(qs: QuadraticSpace, v: Subspace, fixed_part: Subspace, moved_part: Subspace) -> AdaptedBasis:
    """Basis of ``v`` whose Gram matrix has the block form [[0,0,I],[0,A,0],[I,0,0]].

    The first r vectors span ``fixed_part``, the first q span ``moved_part``,
    and A is diagonal with nonzero rational entries whose signs are reported
    separately.

    Raises:
        PreconditionError: naming the first failing clause.
    """
    for s in (v, fixed_part, moved_part):
        _check_ambient(qs, s)
    if not is_nondegenerate(qs, v):
        raise PreconditionError("v nondegenerate", "the enclosing subspace is degenerate")
    if not moved_part.contains(fixed_part):
        raise PreconditionError("fixed_part in moved_part", "fixed part is not contained in the moved part")
    if not v.contains(moved_part):
        raise PreconditionError("moved_part in v", "moved part is not contained in v")
    if not is_totally_isotropic(qs, fixed_part):
        raise PreconditionError("fixed_part totally isotropic", "fixed part is not totally isotropic")
    if orth_complement_within(qs, fixed_part, v) != moved_part:
        raise PreconditionError("moved_part = fixed_part^perp in v", "moved part is not the complement of the fixed part in v")

    r = fixed_part.dim
    q = moved_part.dim
    isotropic = fixed_part.vectors

    middle_candidates = extend_to_complement(fixed_part, moved_part.vectors)
    middle, a_diagonal = _diagonalize(qs.pair, middle_candidates)
    if any(a == 0 for a in a_diagonal):
        raise InternalInconsistency("moved part modulo the fixed part is degenerate")

    outer = extend_to_complement(moved_part, v.vectors)
    pairing_inverse = inverse(qs.gram_of(isotropic, outer))
    duals = []
    for j in range(r):
        w = tuple(QQ(0) for _ in range(qs.dim))
        for k, d in enumerate(outer):
            w = add_vectors(w, scale_vector(pairing_inverse[k, j], d))
        for y, a in zip(middle, a_diagonal):
            w = add_vectors(w, scale_vector(-qs.pair(w, y) / a, y))
        duals.append(w)
    corrected = []
    for w in duals:
        for i, u in enumerate(isotropic):
            w = add_vectors(w, scale_vector(-qs.pair(w, duals[i]) / 2, u))
        corrected.append(w)

    basis = RatMatrix(list(isotropic) + list(middle) + corrected, qs.dim)
    expected = RatMatrix.zeros(q + r, q + r)
    rows = [list(expected.row(i)) for i in range(q + r)]
    for i in range(r):
        rows[i][q + i] = QQ(1)
        rows[q + i][i] = QQ(1)
    for k, a in enumerate(a_diagonal):
        rows[r + k][r + k] = a
    if qs.gram_of(basis.row_list(), basis.row_list()) != RatMatrix(rows, q + r):
        raise InternalInconsistency("adapted basis failed the block Gram check")
    signs = [1 if a > 0 else -1 for a in a_diagonal]
    logger.debug("adapted basis with r=%d q=%d signs=%s", r, q, signs)
    return AdaptedBasis(basis, r, q, list(a_diagonal), signs)


def orthogonal_projection(qs: QuadraticSpace, s: Subspace) -> RatMatrix:
    """Projection onto a nondegenerate ``s`` along its orthogonal complement: Bᵀ(B G Bᵀ)⁻¹ B G."""
    _check_ambient(qs, s)
    if s.is_zero():
        return RatMatrix.zeros(qs.dim, qs.dim)
    if not is_nondegenerate(qs, s):
        raise DegenerateFormError("cannot project orthogonally onto a degenerate subspace")
    return s.basis.T @ inverse(restrict_form(qs, s)) @ s.basis @ qs.gram
