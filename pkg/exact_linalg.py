"""Exact rational matrices, subspaces and polynomials.

Every value here is immutable. Heavy lifting (row reduction, inverses,
determinants, characteristic polynomials, factorization) is delegated to
sympy's ``DomainMatrix`` and ``Poly`` over ``QQ``; this module only fixes the
canonical forms the rest of the engine relies on.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from math import factorial
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

from sympy import Poly, Symbol
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError

from errors import DimensionMismatch, NotNilpotentError, NotSquareError, SingularMatrixError

logger = logging.getLogger(__name__)

Rational = QQ.dtype
Vector = Tuple[Rational, ...]

X = Symbol("x")

_RATIONAL_PATTERN = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*([+-]?\d+)\s*)?$")


# ---------------------------------------------------------------------------
# scalars
# ---------------------------------------------------------------------------

def parse_rational(text: str) -> Rational:
    """Parse ``"p/q"`` or ``"p"`` into an exact rational.

    Raises:
        ValueError: on malformed text or a zero denominator.
    """
    match = _RATIONAL_PATTERN.match(text)
    if match is None:
        raise ValueError(f"not a rational literal: {text!r}")
    numerator = int(match.group(1))
    denominator = int(match.group(2)) if match.group(2) is not None else 1
    if denominator == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return QQ(numerator, denominator)


def to_rational(value) -> Rational:
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, tuple):
        return QQ(*value)
    if isinstance(value, float):
        raise TypeError("floating point values are not accepted; use 'p/q' strings")
    return QQ.convert(value)


def format_rational(value: Rational) -> str:
    numerator = int(value.numerator)
    denominator = int(value.denominator)
    if denominator == 1:
        return str(numerator)
    return f"{numerator}/{denominator}"


def vector(values: Iterable) -> Vector:
    return tuple(to_rational(v) for v in values)


def unit_vector(n: int, index: int) -> Vector:
    return tuple(QQ(1) if i == index else QQ(0) for i in range(n))


def add_vectors(u: Sequence[Rational], v: Sequence[Rational]) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def scale_vector(c: Rational, v: Sequence[Rational]) -> Vector:
    return tuple(c * a for a in v)


def is_zero_vector(v: Sequence[Rational]) -> bool:
    return all(a == 0 for a in v)


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

class RatMatrix:
    """Dense immutable matrix of exact rationals, row-major."""

    __slots__ = ("rows", "cols", "_entries")

    def __init__(self, entries: Sequence[Sequence], cols: Optional[int] = None) -> None:
        converted = tuple(tuple(to_rational(v) for v in row) for row in entries)
        if cols is None:
            cols = len(converted[0]) if converted else 0
        for index, row in enumerate(converted):
            if len(row) != cols:
                raise DimensionMismatch(f"row {index} has {len(row)} entries, expected {cols}")
        self.rows = len(converted)
        self.cols = cols
        self._entries = converted

    # construction -----------------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        return cls([[0] * cols for _ in range(rows)], cols)

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], n)

    @classmethod
    def diagonal(cls, values: Sequence) -> "RatMatrix":
        n = len(values)
        return cls([[values[i] if i == j else 0 for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_domain(cls, dm: DomainMatrix) -> "RatMatrix":
        rows, cols = dm.shape
        if rows == 0 or cols == 0:
            return cls.zeros(rows, cols)
        return cls(dm.convert_to(QQ).to_list(), cols)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: Optional[int] = None) -> "RatMatrix":
        if not columns:
            return cls.zeros(rows or 0, 0)
        return cls([list(col) for col in columns]).T

    @classmethod
    def block_diagonal(cls, *blocks: "RatMatrix") -> "RatMatrix":
        size = sum(b.rows for b in blocks)
        width = sum(b.cols for b in blocks)
        out = [[QQ(0)] * width for _ in range(size)]
        r0 = c0 = 0
        for block in blocks:
            for i in range(block.rows):
                for j in range(block.cols):
                    out[r0 + i][c0 + j] = block[i, j]
            r0 += block.rows
            c0 += block.cols
        return cls(out, width)

    @staticmethod
    def vstack(*blocks: "RatMatrix") -> "RatMatrix":
        cols = {b.cols for b in blocks if b.rows}
        if len(cols) > 1:
            raise DimensionMismatch(f"cannot stack blocks with column counts {sorted(cols)}")
        width = cols.pop() if cols else (blocks[0].cols if blocks else 0)
        return RatMatrix([row for b in blocks for row in b.row_list()], width)

    @staticmethod
    def hstack(*blocks: "RatMatrix") -> "RatMatrix":
        return RatMatrix.vstack(*(b.T for b in blocks)).T

    # access -----------------------------------------------------------------

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, index: Tuple[int, int]) -> Rational:
        i, j = index
        return self._entries[i][j]

    def row(self, i: int) -> Vector:
        return self._entries[i]

    def column(self, j: int) -> Vector:
        return tuple(row[j] for row in self._entries)

    def row_list(self) -> List[Vector]:
        return list(self._entries)

    def flatten(self) -> Vector:
        return tuple(v for row in self._entries for v in row)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "RatMatrix":
        return RatMatrix([[self._entries[i][j] for j in cols] for i in rows], len(cols))

    def to_domain(self) -> DomainMatrix:
        return DomainMatrix([list(row) for row in self._entries], self.shape, QQ)

    def to_strings(self) -> List[List[str]]:
        return [[format_rational(v) for v in row] for row in self._entries]

    # arithmetic -------------------------------------------------------------

    @property
    def T(self) -> "RatMatrix":
        return RatMatrix([list(col) for col in zip(*self._entries)], self.rows) if self.rows else RatMatrix.zeros(self.cols, 0)

    def _check_same_shape(self, other: "RatMatrix", op: str) -> None:
        if self.shape != other.shape:
            raise DimensionMismatch(f"shape mismatch: {self.shape} {op} {other.shape}")

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        self._check_same_shape(other, "+")
        return RatMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self._entries, other._entries)], self.cols)

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        self._check_same_shape(other, "-")
        return RatMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self._entries, other._entries)], self.cols)

    def __neg__(self) -> "RatMatrix":
        return RatMatrix([[-a for a in r] for r in self._entries], self.cols)

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise DimensionMismatch(f"shape mismatch: {self.shape} @ {other.shape}")
        if self.rows == 0 or other.cols == 0 or self.cols == 0:
            return RatMatrix.zeros(self.rows, other.cols)
        return RatMatrix.from_domain(self.to_domain() * other.to_domain())

    def scale(self, c) -> "RatMatrix":
        c = to_rational(c)
        return RatMatrix([[c * a for a in r] for r in self._entries], self.cols)

    def apply(self, v: Sequence[Rational]) -> Vector:
        """Matrix times column vector."""
        if len(v) != self.cols:
            raise DimensionMismatch(f"vector of length {len(v)} for a {self.shape} matrix")
        return tuple(sum((a * b for a, b in zip(row, v)), QQ(0)) for row in self._entries)

    def power(self, k: int) -> "RatMatrix":
        _require_square(self)
        result = RatMatrix.identity(self.rows)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def trace(self) -> Rational:
        _require_square(self)
        return sum((self._entries[i][i] for i in range(self.rows)), QQ(0))

    def is_zero(self) -> bool:
        return all(a == 0 for row in self._entries for a in row)

    # comparison -------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RatMatrix):
            return NotImplemented
        return self.shape == other.shape and self._entries == other._entries

    def __hash__(self) -> int:
        return hash((self.shape, self._entries))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(format_rational(v) for v in row) for row in self._entries)
        return f"RatMatrix({self.rows}x{self.cols}: [{body}])"


def _require_square(m: RatMatrix) -> None:
    if not m.is_square:
        raise NotSquareError(f"expected a square matrix, got {m.rows}x{m.cols}")


class RrefResult(NamedTuple):
    reduced: RatMatrix
    pivot_columns: List[int]
    rank: int


def rref(m: RatMatrix) -> RrefResult:
    if m.rows == 0 or m.cols == 0:
        return RrefResult(m, [], 0)
    reduced, pivots = m.to_domain().rref()
    pivots = list(pivots)
    return RrefResult(RatMatrix.from_domain(reduced), pivots, len(pivots))


def rank(m: RatMatrix) -> int:
    return rref(m).rank


def determinant(m: RatMatrix) -> Rational:
    _require_square(m)
    if m.rows == 0:
        return QQ(1)
    return m.to_domain().det()


def inverse(m: RatMatrix) -> RatMatrix:
    _require_square(m)
    if m.rows == 0:
        return m
    try:
        return RatMatrix.from_domain(m.to_domain().inv())
    except DMNonInvertibleMatrixError as exc:
        raise SingularMatrixError("matrix is not invertible") from exc


def solve_linear(a: RatMatrix, b: Sequence[Rational]) -> Optional[Vector]:
    """Return one exact solution of ``a x = b`` (free variables set to 0), or None."""
    if len(b) != a.rows:
        raise DimensionMismatch(f"right-hand side of length {len(b)} for {a.rows} equations")
    if a.rows == 0:
        return tuple(QQ(0) for _ in range(a.cols))
    augmented = RatMatrix([list(row) + [rhs] for row, rhs in zip(a.row_list(), b)], a.cols + 1)
    reduced, pivots, _ = rref(augmented)
    if a.cols in pivots:
        return None
    solution = [QQ(0)] * a.cols
    for i, column in enumerate(pivots):
        solution[column] = reduced[i, a.cols]
    return tuple(solution)


# ---------------------------------------------------------------------------
# subspaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Subspace:
    """Linear subspace stored by the reduced row echelon form of its basis."""

    ambient_dim: int
    basis: RatMatrix

    @classmethod
    def span(cls, vectors: Iterable[Sequence], ambient_dim: int) -> "Subspace":
        rows = [vector(v) for v in vectors]
        for v in rows:
            if len(v) != ambient_dim:
                raise DimensionMismatch(f"vector of length {len(v)} in a {ambient_dim}-dimensional space")
        if not rows:
            return cls.zero(ambient_dim)
        reduced, _, r = rref(RatMatrix(rows, ambient_dim))
        return cls(ambient_dim, reduced.submatrix(range(r), range(ambient_dim)))

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, RatMatrix.zeros(0, ambient_dim))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, RatMatrix.identity(ambient_dim))

    @property
    def dim(self) -> int:
        return self.basis.rows

    @property
    def vectors(self) -> List[Vector]:
        return self.basis.row_list()

    @property
    def pivots(self) -> List[int]:
        return [next(j for j, a in enumerate(row) if a != 0) for row in self.basis.row_list()]

    def is_zero(self) -> bool:
        return self.dim == 0

    def is_full(self) -> bool:
        return self.dim == self.ambient_dim

    def coordinates(self, v: Sequence[Rational]) -> Vector:
        """Coordinates of ``v`` in the canonical basis (read off at the pivots)."""
        v = vector(v)
        coords = tuple(v[p] for p in self.pivots)
        rebuilt = [QQ(0)] * self.ambient_dim
        for c, row in zip(coords, self.basis.row_list()):
            for j, a in enumerate(row):
                rebuilt[j] += c * a
        if tuple(rebuilt) != v:
            raise DimensionMismatch("vector does not lie in the subspace")
        return coords

    def contains_vector(self, v: Sequence[Rational]) -> bool:
        try:
            self.coordinates(v)
        except DimensionMismatch:
            return False
        return True

    def contains(self, other: "Subspace") -> bool:
        _require_same_ambient(self, other)
        return all(self.contains_vector(v) for v in other.vectors)

    def __add__(self, other: "Subspace") -> "Subspace":
        _require_same_ambient(self, other)
        return Subspace.span(self.vectors + other.vectors, self.ambient_dim)

    def intersect(self, other: "Subspace") -> "Subspace":
        _require_same_ambient(self, other)
        return annihilator(annihilator(self) + annihilator(other))

    def sort_key(self) -> Tuple:
        return (self.dim, tuple(self.pivots), tuple(-a for a in self.basis.flatten()))

    def to_strings(self) -> List[List[str]]:
        return self.basis.to_strings()

    def __repr__(self) -> str:
        inner = ", ".join("(" + " ".join(format_rational(a) for a in row) + ")" for row in self.vectors)
        return f"Subspace(dim={self.dim}/{self.ambient_dim}: {inner})"


def _require_same_ambient(s: Subspace, t: Subspace) -> None:
    if s.ambient_dim != t.ambient_dim:
        raise DimensionMismatch(f"subspaces of {s.ambient_dim}- and {t.ambient_dim}-dimensional spaces")


def sum_of(subspaces: Sequence[Subspace], ambient_dim: int) -> Subspace:
    return Subspace.span([v for s in subspaces for v in s.vectors], ambient_dim)


def kernel_basis(m: RatMatrix) -> Subspace:
    """Null space ``{x : m x = 0}`` in canonical form."""
    if m.rows == 0:
        return Subspace.full(m.cols)
    reduced, pivots, _ = rref(m)
    free = [j for j in range(m.cols) if j not in pivots]
    basis = []
    for f in free:
        v = [QQ(0)] * m.cols
        v[f] = QQ(1)
        for i, p in enumerate(pivots):
            v[p] = -reduced[i, f]
        basis.append(v)
    return Subspace.span(basis, m.cols)


def column_space(m: RatMatrix) -> Subspace:
    return Subspace.span(m.T.row_list(), m.rows)


def annihilator(s: Subspace) -> Subspace:
    """Vectors with zero dot product against every basis row of ``s``."""
    return kernel_basis(s.basis)


def extend_to_complement(base: Subspace, candidates: Iterable[Sequence[Rational]]) -> List[Vector]:
    """Greedy pivot: keep each candidate not already in the span of ``base`` and earlier picks."""
    chosen: List[Vector] = []
    current = base
    for candidate in candidates:
        if not current.contains_vector(candidate):
            chosen.append(vector(candidate))
            current = current + Subspace.span([candidate], base.ambient_dim)
    return chosen


def projection_onto(image: Subspace, along: Subspace) -> RatMatrix:
    """Idempotent with range ``image`` and kernel ``along`` (complementary subspaces)."""
    n = image.ambient_dim
    if image.dim + along.dim != n:
        raise DimensionMismatch(f"parts of dimension {image.dim} and {along.dim} do not fill {n}")
    change = RatMatrix.from_columns(image.vectors + along.vectors, n)
    keep = RatMatrix.diagonal([1] * image.dim + [0] * along.dim)
    return change @ keep @ inverse(change)


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

def polynomial(coefficients_low_first: Sequence) -> Poly:
    coeffs = [QQ.to_sympy(to_rational(c)) for c in reversed(list(coefficients_low_first))]
    return Poly(coeffs or [0], X, domain=QQ)


def coefficients(p: Poly) -> List[Rational]:
    """Coefficients lowest degree first."""
    if p.is_zero:
        return []
    return [QQ.convert(c) for c in reversed(p.all_coeffs())]


def characteristic_polynomial(m: RatMatrix) -> Poly:
    _require_square(m)
    if m.rows == 0:
        return Poly(1, X, domain=QQ)
    return Poly([QQ.to_sympy(c) for c in m.to_domain().charpoly()], X, domain=QQ)


def minimal_polynomial(m: RatMatrix) -> Poly:
    """Monic least-degree annihilating polynomial, found on the Krylov sequence of powers."""
    _require_square(m)
    n = m.rows
    if n == 0:
        return Poly(1, X, domain=QQ)
    powers = [RatMatrix.identity(n)]
    while True:
        nxt = powers[-1] @ m
        system = RatMatrix.from_columns([p.flatten() for p in powers], n * n)
        solution = solve_linear(system, nxt.flatten())
        if solution is not None:
            low_first = [-c for c in solution] + [QQ(1)]
            return polynomial(low_first)
        powers.append(nxt)


def eval_poly(p: Poly, m: RatMatrix) -> RatMatrix:
    _require_square(m)
    identity = RatMatrix.identity(m.rows)
    result = RatMatrix.zeros(m.rows, m.rows)
    for c in p.all_coeffs():
        result = result @ m + identity.scale(QQ.convert(c))
    return result


def coprime_factors(p: Poly) -> List[Poly]:
    """Pairwise coprime prime-power factors of ``p`` (monic), sorted by degree then text."""
    _, factors = p.factor_list()
    powers = [(f ** k).monic() for f, k in factors]
    return sorted(powers, key=lambda f: (f.degree(), str(f.as_expr())))


def is_power_of_irreducible(p: Poly) -> bool:
    _, factors = p.factor_list()
    return len(factors) == 1


# ---------------------------------------------------------------------------
# spectral primitives
# ---------------------------------------------------------------------------

def nilpotent_exp(n: RatMatrix, t) -> RatMatrix:
    """``exp(t n)`` as the finite sum over powers of a nilpotent ``n``."""
    _require_square(n)
    dim = n.rows
    if not n.power(dim).is_zero():
        raise NotNilpotentError(f"matrix is not nilpotent: its {dim}-th power is nonzero")
    t = to_rational(t)
    result = RatMatrix.identity(dim)
    term = RatMatrix.identity(dim)
    for k in range(1, dim):
        term = term @ n
        if term.is_zero():
            break
        result = result + term.scale(t ** k / factorial(k))
    return result


def fitting_split(x: RatMatrix) -> Tuple[Subspace, Subspace]:
    """``(ker xⁿ, im xⁿ)``: complementary parts invariant under everything commuting with ``x``."""
    _require_square(x)
    stable = x.power(x.rows)
    return kernel_basis(stable), column_space(stable)
