"""Form-preserving matrix actions given by generators.

A generator is either a group element ``g`` (with gᵀ G g = G) or an
infinitesimal skew-adjoint element ``n`` (with nᵀ G + G n = 0) standing for
the one-parameter group exp(t n). Everything the engine needs about the action
is expressed through the displacement of a generator: ``g - I`` or ``n``.

Only the generators are seen. Whether they generate the intended closed group
is the caller's responsibility; fixed spaces, moved spans and invariance are
exact statements about the group the generators do generate.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Sequence, Tuple

from sympy.polys.domains import QQ

from errors import DegenerateFormError, DimensionMismatch, InvariantViolation, PreconditionError
from exact_linalg import (
    RatMatrix,
    Rational,
    Subspace,
    Vector,
    column_space,
    determinant,
    kernel_basis,
    sum_of,
)
from quadratic_space import QuadraticSpace, are_orthogonal, is_nondegenerate, orth_complement, orthogonal_projection, restrict_form

logger = logging.getLogger(__name__)


class GeneratorKind(str, Enum):
    GROUP = "group"
    INFINITESIMAL = "infinitesimal"


@dataclass(frozen=True)
class Generator:
    kind: GeneratorKind
    matrix: RatMatrix

    @classmethod
    def group(cls, matrix: RatMatrix) -> "Generator":
        return cls(GeneratorKind.GROUP, matrix)

    @classmethod
    def infinitesimal(cls, matrix: RatMatrix) -> "Generator":
        return cls(GeneratorKind.INFINITESIMAL, matrix)

    def displacement(self) -> RatMatrix:
        if self.kind is GeneratorKind.GROUP:
            return self.matrix - RatMatrix.identity(self.matrix.rows)
        return self.matrix

    def with_displacement(self, displacement: RatMatrix) -> "Generator":
        """A generator of the same kind whose displacement is ``displacement``."""
        if self.kind is GeneratorKind.GROUP:
            return Generator.group(displacement + RatMatrix.identity(displacement.rows))
        return Generator.infinitesimal(displacement)


@dataclass(frozen=True)
class Representation:
    space: QuadraticSpace
    generators: Tuple[Generator, ...] = ()
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "generators", tuple(self.generators))
        gram = self.space.gram
        for index, generator in enumerate(self.generators):
            m = generator.matrix
            if m.shape != gram.shape:
                raise DimensionMismatch(f"generator {index} is {m.rows}x{m.cols} in a {self.space.dim}-dimensional space")
            if generator.kind is GeneratorKind.GROUP:
                if determinant(m) == 0:
                    raise InvariantViolation(f"group generator {index} is not invertible")
                if m.T @ gram @ m != gram:
                    raise InvariantViolation(f"group generator {index} does not preserve the form")
            elif not (m.T @ gram + gram @ m).is_zero():
                raise InvariantViolation(f"infinitesimal generator {index} is not skew-adjoint for the form")

    @property
    def dim(self) -> int:
        return self.space.dim

    def displacements(self) -> List[RatMatrix]:
        return [g.displacement() for g in self.generators]


@dataclass(frozen=True)
class Factor:
    summand: Subspace
    generators: Tuple[Generator, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class FactorDecomposition:
    factors: Tuple[Factor, ...]

    def verify(self, rep: Representation) -> bool:
        """Every factor generator moves nothing outside its own summand."""
        for i, factor in enumerate(self.factors):
            for generator in factor.generators:
                d = generator.displacement()
                for j, other in enumerate(self.factors):
                    if j != i and any(any(a != 0 for a in d.apply(v)) for v in other.summand.vectors):
                        return False
                rest = orth_complement(rep.space, sum_of([f.summand for f in self.factors], rep.dim))
                if any(any(a != 0 for a in d.apply(v)) for v in rest.vectors):
                    return False
        return True


def _check_ambient(rep: Representation, s: Subspace) -> None:
    if s.ambient_dim != rep.dim:
        raise DimensionMismatch(f"subspace of a {s.ambient_dim}-dimensional space for a {rep.dim}-dimensional representation")


def fixed_space(rep: Representation) -> Subspace:
    displacements = rep.displacements()
    if not displacements:
        return Subspace.full(rep.dim)
    return kernel_basis(RatMatrix.vstack(*displacements))


def moved_span(rep: Representation) -> Subspace:
    return sum_of([column_space(d) for d in rep.displacements()], rep.dim)


def duality_holds(rep: Representation) -> bool:
    """The fixed space is the orthogonal complement of the moved span."""
    return fixed_space(rep) == orth_complement(rep.space, moved_span(rep))


def is_invariant(rep: Representation, s: Subspace) -> bool:
    _check_ambient(rep, s)
    return all(s.contains_vector(d.apply(v)) for d in rep.displacements() for v in s.vectors)


def fixed_space_on(rep: Representation, s: Subspace) -> Subspace:
    """Fixed vectors inside ``s``, in ambient coordinates."""
    return s.intersect(fixed_space(rep))


def moved_span_on(rep: Representation, s: Subspace) -> Subspace:
    """Moved span of the action restricted to an invariant ``s``, in ambient coordinates."""
    _check_ambient(rep, s)
    return Subspace.span([d.apply(v) for d in rep.displacements() for v in s.vectors], rep.dim)


def local_matrix(s: Subspace, m: RatMatrix) -> RatMatrix:
    """Matrix of ``m`` on an ``m``-invariant ``s`` in the canonical basis of ``s``."""
    return RatMatrix.from_columns([s.coordinates(m.apply(v)) for v in s.vectors], s.dim)


def embed(s: Subspace, local: Sequence[Rational]) -> Vector:
    """Ambient vector with coordinates ``local`` in the canonical basis of ``s``."""
    result = [QQ(0)] * s.ambient_dim
    for c, row in zip(local, s.vectors):
        for j, a in enumerate(row):
            result[j] += c * a
    return tuple(result)


def embed_subspace(s: Subspace, local: Subspace) -> Subspace:
    return Subspace.span([embed(s, v) for v in local.vectors], s.ambient_dim)


def restrict(rep: Representation, s: Subspace) -> Representation:
    _check_ambient(rep, s)
    if not is_invariant(rep, s):
        raise PreconditionError("s invariant", "cannot restrict to a subspace that is not invariant")
    if not is_nondegenerate(rep.space, s):
        raise DegenerateFormError("cannot restrict to a subspace with a degenerate form")
    generators = [Generator(g.kind, local_matrix(s, g.matrix)) for g in rep.generators]
    return Representation(QuadraticSpace(restrict_form(rep.space, s)), tuple(generators), rep.label)


# ---------------------------------------------------------------------------
# commutants
# ---------------------------------------------------------------------------

def commutation_equations(displacements: Sequence[RatMatrix], n: int) -> List[List[Rational]]:
    """Rows of the linear system X d = d X on the unknowns X[a][b] at index a*n + b."""
    rows = []
    for d in displacements:
        for i in range(n):
            for j in range(n):
                row = [QQ(0)] * (n * n)
                for k in range(n):
                    row[i * n + k] += d[k, j]
                    row[k * n + j] -= d[i, k]
                rows.append(row)
    return rows


def adjointness_equations(gram: RatMatrix, sign: int) -> List[List[Rational]]:
    """Rows of G X - sign * Xᵀ G = 0 (sign +1 self-adjoint, -1 skew-adjoint)."""
    n = gram.rows
    rows = []
    for i in range(n):
        for j in range(n):
            row = [QQ(0)] * (n * n)
            for k in range(n):
                row[k * n + j] += gram[i, k]
                row[k * n + i] -= sign * gram[k, j]
            rows.append(row)
    return rows


def _solution_matrices(rows: List[List[Rational]], n: int) -> List[RatMatrix]:
    solutions = kernel_basis(RatMatrix(rows, n * n)) if rows else Subspace.full(n * n)
    return [RatMatrix([v[a * n:(a + 1) * n] for a in range(n)], n) for v in solutions.vectors]


def commutant(rep: Representation) -> List[RatMatrix]:
    n = rep.dim
    return _solution_matrices(commutation_equations(rep.displacements(), n), n)


def selfadjoint_commutant(rep: Representation) -> List[RatMatrix]:
    n = rep.dim
    rows = commutation_equations(rep.displacements(), n) + adjointness_equations(rep.space.gram, 1)
    return _solution_matrices(rows, n)


def skewadjoint_commutant(rep: Representation) -> List[RatMatrix]:
    n = rep.dim
    rows = commutation_equations(rep.displacements(), n) + adjointness_equations(rep.space.gram, -1)
    return _solution_matrices(rows, n)


def commutes_with_action(rep: Representation, x: RatMatrix) -> bool:
    return all(x @ d == d @ x for d in rep.displacements())


# ---------------------------------------------------------------------------
# group factors
# ---------------------------------------------------------------------------

def factor_generators(rep: Representation, summands: Sequence[Subspace]) -> FactorDecomposition:
    """Split each generator into pieces acting on one summand and trivially elsewhere."""
    space = rep.space
    for index, s in enumerate(summands):
        _check_ambient(rep, s)
        if not is_invariant(rep, s):
            raise PreconditionError("summands invariant", f"summand {index} is not invariant")
        if not is_nondegenerate(space, s):
            raise PreconditionError("summands nondegenerate", f"summand {index} is degenerate")
        for other_index in range(index):
            if not are_orthogonal(space, s, summands[other_index]):
                raise PreconditionError("summands pairwise orthogonal", f"summands {other_index} and {index} are not orthogonal")
    rest = orth_complement(space, sum_of(list(summands), rep.dim))
    if not all(d.apply(v) == tuple(QQ(0) for _ in v) for d in rep.displacements() for v in rest.vectors):
        raise PreconditionError("summands cover the moved part", "the action is not trivial on the complement of the summands")

    factors = []
    for s in summands:
        projector = orthogonal_projection(space, s)
        pieces = []
        for generator in rep.generators:
            piece = generator.displacement() @ projector
            if not piece.is_zero():
                pieces.append(generator.with_displacement(piece))
        factors.append(Factor(s, tuple(pieces)))
    logger.debug("factored %d generators over %d summands", len(rep.generators), len(summands))
    return FactorDecomposition(tuple(factors))
