"""Comparing decompositions and deciding whether the computed one is unique.

Two decompositions of the same representation always agree on the counts of
fixed-zero and fixed-isotropic summands, their dimensions and their moved
spans; the summands themselves may differ. When they do, ``build_isometry``
constructs an exact form-preserving map carrying one onto the other.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ

import config
from derham_decompose import DecompositionReport, Summand, SummandKind, SplitOptions, verify_decomposition
from errors import InternalInconsistency, IsometryConstructionError, PreconditionError
from exact_linalg import RatMatrix, Rational, Subspace, Vector, add_vectors, determinant, inverse, scale_vector, solve_linear
from holonomy_action import (
    FactorDecomposition,
    GeneratorKind,
    Representation,
    factor_generators,
    fixed_space_on,
    moved_span_on,
)
from phi_analysis import ModuleVerdict, PhiStatus, PhiVerdict
from quadratic_space import QuadraticSpace, adapted_basis, orthogonal_projection

logger = logging.getLogger(__name__)

MIXING_SCALES = (1, -1, 2, -2)


class ComparisonVerdict(str, Enum):
    IDENTICAL = "identical"
    EQUIVALENT_UP_TO_ISOMETRY = "equivalent_up_to_isometry"
    DISTINCT = "distinct"


class Uniqueness(str, Enum):
    UNIQUE_UP_TO_ORDER = "unique_up_to_order"
    UNIQUE_ONE_BAD_FACTOR = "unique_one_bad_factor"
    NONUNIQUE_WITNESSED = "nonunique_witnessed"
    UNKNOWN = "unknown"


# ---------------------------------------------------------------------------
# matching
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SummandPairing:
    """Pairs (i, j) of summand indices; the trivial parts are always paired with each other."""

    pairs: Tuple[Tuple[int, int], ...]
    failure: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.failure is None

    def inverse(self) -> "SummandPairing":
        return SummandPairing(tuple(sorted((j, i) for i, j in self.pairs)), self.failure)


def _check_reports(rep: Representation, *reports: DecompositionReport) -> None:
    for report in reports:
        if report.ambient_dim != rep.dim:
            raise PreconditionError("reports valid for rep", f"report of a {report.ambient_dim}-dimensional space for a {rep.dim}-dimensional representation")


def _partners(x: Summand, y: Summand) -> bool:
    if x.kind is not y.kind or x.dim != y.dim:
        return False
    if x.kind is SummandKind.FIXED_ZERO:
        return x.subspace == y.subspace
    return not x.moved_span_local.intersect(y.moved_span_local).is_zero()


def match_summands(rep: Representation, a: DecompositionReport, b: DecompositionReport) -> SummandPairing:
    _check_reports(rep, a, b)
    if a.trivial_part.dim != b.trivial_part.dim:
        return SummandPairing((), f"trivial parts have dimensions {a.trivial_part.dim} and {b.trivial_part.dim}")
    if len(a.summands) != len(b.summands):
        return SummandPairing((), f"{len(a.summands)} summands against {len(b.summands)}")
    unused = list(range(len(b.summands)))
    pairs = []
    for i, summand in enumerate(a.summands):
        j = next((j for j in unused if _partners(summand, b.summands[j])), None)
        if j is None:
            return SummandPairing(tuple(pairs), f"summand {i} ({summand.kind.value}, dim {summand.dim}) has no partner")
        unused.remove(j)
        pairs.append((i, j))
    return SummandPairing(tuple(pairs))


# ---------------------------------------------------------------------------
# isometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IsometryBlock:
    source: Subspace
    target: Subspace
    corrected: bool = False
    equivariant: bool = True


@dataclass(frozen=True)
class IsometryMap:
    space: QuadraticSpace
    matrix: RatMatrix
    block_structure: Tuple[IsometryBlock, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        gram = self.space.gram
        if self.matrix.shape != gram.shape or determinant(self.matrix) == 0:
            raise InternalInconsistency("isometry matrix is not an invertible map of the ambient space")
        if self.matrix.T @ gram @ self.matrix != gram:
            raise InternalInconsistency("isometry matrix does not preserve the form")
        for index, block in enumerate(self.block_structure):
            image = Subspace.span([self.matrix.apply(v) for v in block.source.vectors], self.space.dim)
            if image != block.target:
                raise InternalInconsistency(f"block {index} is not mapped onto its target")

    @property
    def equivariant(self) -> bool:
        return all(block.equivariant for block in self.block_structure)

    @classmethod
    def identity(cls, space: QuadraticSpace, parts: Sequence[Subspace] = ()) -> "IsometryMap":
        return cls(space, RatMatrix.identity(space.dim), tuple(IsometryBlock(p, p) for p in parts))


def _preserves(space: QuadraticSpace, basis: Sequence[Vector], images: Sequence[Vector]) -> bool:
    return space.gram_of(basis, basis) == space.gram_of(images, images)


def _corrected_images(
    space: QuadraticSpace,
    basis: Sequence[Vector],
    raw: Sequence[Vector],
    positions: Sequence[int],
    kernel: Sequence[Vector],
) -> Optional[List[Vector]]:
    """Add vectors of the totally isotropic ``kernel`` to the images at ``positions`` so all pairings are restored.

    With the corrections C isotropic the conditions are linear:
    ⟨Πa, Cb⟩ + ⟨Ca, Πb⟩ = ⟨a, b⟩ - ⟨Πa, Πb⟩.
    """
    positions = list(positions)
    if not positions or not kernel:
        return None
    width = len(kernel)
    slot = {p: k for k, p in enumerate(positions)}
    rows: List[List[Rational]] = []
    rhs: List[Rational] = []
    for a in range(len(basis)):
        for b in range(a, len(basis)):
            row = [QQ(0)] * (len(positions) * width)
            if a in slot:
                for m, kappa in enumerate(kernel):
                    row[slot[a] * width + m] += space.pair(kappa, raw[b])
            if b in slot:
                for m, kappa in enumerate(kernel):
                    row[slot[b] * width + m] += space.pair(raw[a], kappa)
            rows.append(row)
            rhs.append(space.pair(basis[a], basis[b]) - space.pair(raw[a], raw[b]))
    solution = solve_linear(RatMatrix(rows, len(positions) * width), rhs)
    if solution is None:
        return None
    images = list(raw)
    for p, k in slot.items():
        for m, kappa in enumerate(kernel):
            coefficient = solution[k * width + m]
            if coefficient:
                images[p] = add_vectors(images[p], scale_vector(coefficient, kappa))
    return images


def _block_images(rep: Representation, source: Subspace, target: Subspace, kind: SummandKind) -> Tuple[List[Vector], List[Vector], IsometryBlock]:
    space = rep.space
    projector = orthogonal_projection(space, target)
    dual_positions: Sequence[int] = ()
    if kind is SummandKind.FIXED_ISOTROPIC:
        adapted = adapted_basis(space, source, fixed_space_on(rep, source), moved_span_on(rep, source))
        basis = adapted.basis.row_list()
        dual_positions = range(adapted.q, adapted.q + adapted.r)
    else:
        basis = source.vectors
    raw = [projector.apply(v) for v in basis]
    if _preserves(space, basis, raw):
        return basis, raw, IsometryBlock(source, target)

    kernel = fixed_space_on(rep, target).vectors if kind is SummandKind.FIXED_ISOTROPIC else []
    # corrections on the dual vectors only keep the map equivariant
    for positions, equivariant in ((dual_positions, True), (range(len(basis)), False)):
        images = _corrected_images(space, basis, raw, positions, kernel)
        if images is not None and _preserves(space, basis, images):
            logger.debug("corrected %d-dimensional block (equivariant=%s)", source.dim, equivariant)
            return basis, images, IsometryBlock(source, target, True, equivariant)
    raise IsometryConstructionError(
        "no isotropic correction restores the form",
        detail=f"{kind.value} summand of dimension {source.dim}",
    )


def build_isometry(rep: Representation, a: DecompositionReport, b: DecompositionReport, pairing: SummandPairing) -> IsometryMap:
    """Form-preserving map sending each summand of ``a`` onto its partner in ``b``."""
    _check_reports(rep, a, b)
    if not pairing.ok:
        raise PreconditionError("pairing valid", pairing.failure)
    blocks = [(a.trivial_part.subspace, b.trivial_part.subspace, SummandKind.TRIVIAL_FLAT)]
    for i, j in pairing.pairs:
        x, y = a.summands[i], b.summands[j]
        if x.dim != y.dim or x.moved_span_local != y.moved_span_local:
            raise PreconditionError("paired dims and moved spans equal", f"summands {i} and {j} differ in dimension or moved span")
        blocks.append((x.subspace, y.subspace, x.kind))

    sources: List[Vector] = []
    images: List[Vector] = []
    structure = []
    for source, target, kind in blocks:
        if source.is_zero():
            continue
        basis, mapped, block = _block_images(rep, source, target, kind)
        sources.extend(basis)
        images.extend(mapped)
        structure.append(block)
    if len(sources) != rep.dim:
        raise PreconditionError("pairing covers the space", f"paired parts span {len(sources)} of {rep.dim} dimensions")
    matrix = RatMatrix(images, rep.dim).T @ inverse(RatMatrix(sources, rep.dim).T)
    return IsometryMap(rep.space, matrix, tuple(structure))


# ---------------------------------------------------------------------------
# group factors
# ---------------------------------------------------------------------------

def _word_span(factor_generators_: Sequence, n: int) -> Subspace:
    matrices = [g.matrix for g in factor_generators_]
    words = {RatMatrix.identity(n)}
    frontier = set(words)
    for _ in range(config.FACTOR_WORD_LENGTH):
        frontier = {w @ m for w in frontier for m in matrices} - words
        words |= frontier
    return Subspace.span([w.flatten() for w in words], n * n)


def _generator_span(factor, n: int) -> Tuple[Optional[GeneratorKind], Subspace]:
    kinds = {g.kind for g in factor.generators}
    if len(kinds) > 1:
        return None, Subspace.zero(n * n)
    if kinds == {GeneratorKind.GROUP}:
        return GeneratorKind.GROUP, _word_span(factor.generators, n)
    return GeneratorKind.INFINITESIMAL, Subspace.span([g.matrix.flatten() for g in factor.generators], n * n)


def factors_equal(rep: Representation, fa: FactorDecomposition, fb: FactorDecomposition, pairing: SummandPairing) -> Tuple[bool, ...]:
    """Per matched pair: do the factor generators span the same matrices.

    Group factors are compared through the span of all words up to the
    configured length, a bounded comparison.
    """
    n = rep.dim
    results = []
    for i, j in pairing.pairs:
        if i >= len(fa.factors) or j >= len(fb.factors):
            raise PreconditionError("pairing aligns factors", f"pair ({i}, {j}) is outside the factor lists")
        kind_a, span_a = _generator_span(fa.factors[i], n)
        kind_b, span_b = _generator_span(fb.factors[j], n)
        results.append(kind_a is not None and kind_a is kind_b and span_a == span_b)
    return tuple(results)


def report_factors(rep: Representation, report: DecompositionReport) -> FactorDecomposition:
    return factor_generators(rep, [s.subspace for s in report.summands])


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonReport:
    matching: SummandPairing
    counts_equal: Tuple[bool, bool]
    dims_equal: Tuple[bool, ...]
    moved_spans_equal: Tuple[bool, ...]
    subspace_identical: Tuple[bool, ...]
    trivial_identical: bool
    isometry: Optional[IsometryMap]
    factors_equal: Tuple[bool, ...]
    verdict: ComparisonVerdict
    diagnostics: Tuple[str, ...] = ()


def compare(rep: Representation, a: DecompositionReport, b: DecompositionReport) -> ComparisonReport:
    _check_reports(rep, a, b)
    diagnostics: List[str] = []
    matching = match_summands(rep, a, b)
    counts = (a.p1 == b.p1, a.p2 == b.p2)
    pairs = matching.pairs
    dims = tuple(a.summands[i].dim == b.summands[j].dim for i, j in pairs)
    moved = tuple(a.summands[i].moved_span_local == b.summands[j].moved_span_local for i, j in pairs)
    identical = tuple(a.summands[i].subspace == b.summands[j].subspace for i, j in pairs)
    trivial_identical = a.trivial_part.subspace == b.trivial_part.subspace

    factors: Tuple[bool, ...] = ()
    if matching.ok:
        try:
            factors = factors_equal(rep, report_factors(rep, a), report_factors(rep, b), matching)
        except PreconditionError as exc:
            diagnostics.append(f"factors not compared: {exc}")
        if any(g.kind is GeneratorKind.GROUP for g in rep.generators):
            diagnostics.append("group factors compared on words of bounded length")
    else:
        diagnostics.append(matching.failure)

    isometry = None
    if not matching.ok:
        verdict = ComparisonVerdict.DISTINCT
    elif trivial_identical and all(identical):
        verdict = ComparisonVerdict.IDENTICAL
        isometry = IsometryMap.identity(rep.space, a.parts())
    else:
        try:
            isometry = build_isometry(rep, a, b, matching)
            verdict = ComparisonVerdict.EQUIVALENT_UP_TO_ISOMETRY
            if not isometry.equivariant:
                diagnostics.append("isometry does not commute with the action")
        except (IsometryConstructionError, PreconditionError) as exc:
            verdict = ComparisonVerdict.DISTINCT
            diagnostics.append(f"isometry construction failed: {exc}")
    logger.info("comparison verdict: %s", verdict.value)
    return ComparisonReport(matching, counts, dims, moved, identical, trivial_identical, isometry, factors, verdict, tuple(diagnostics))


# ---------------------------------------------------------------------------
# mixing and the uniqueness verdict
# ---------------------------------------------------------------------------

def mix_summands(rep: Representation, report: DecompositionReport, i: int, j: int, scale: int = 1) -> List[Subspace]:
    """Shear summands i and j into each other along their fixed vectors.

    With a the first fixed vector of summand i and u = -b for b the first
    fixed vector of summand j, summand i becomes {x + s⟨x, a⟩u} and summand j
    becomes {y - s⟨y, u⟩a}. Invariance, orthogonality and the restricted
    forms are preserved. Returns the parts in ``report.parts()`` order.
    """
    count = len(report.summands)
    if not (0 <= i < count and 0 <= j < count) or i == j:
        raise PreconditionError("two distinct summands", f"cannot mix summands {i} and {j} of {count}")
    if scale == 0:
        raise PreconditionError("nonzero scale", "mixing with scale 0 changes nothing")
    first, second = report.summands[i], report.summands[j]
    if first.kind is not SummandKind.FIXED_ISOTROPIC or second.kind is not SummandKind.FIXED_ISOTROPIC:
        raise PreconditionError("summands with isotropic fixed space", "both summands need a nonzero fixed space")
    space = rep.space
    a = fixed_space_on(rep, first.subspace).vectors[0]
    u = scale_vector(-1, fixed_space_on(rep, second.subspace).vectors[0])
    mixed_first = Subspace.span([add_vectors(x, scale_vector(scale * space.pair(x, a), u)) for x in first.subspace.vectors], rep.dim)
    mixed_second = Subspace.span([add_vectors(y, scale_vector(-scale * space.pair(y, u), a)) for y in second.subspace.vectors], rep.dim)
    parts = report.parts()
    offset = len(parts) - count
    parts[offset + i] = mixed_first
    parts[offset + j] = mixed_second
    return parts


@dataclass(frozen=True)
class UniquenessResult:
    verdict: Uniqueness
    certified: bool
    witness: Optional[Tuple[Subspace, ...]] = None
    bad_summands: Tuple[int, ...] = ()
    note: str = ""


def _canonical(parts: Sequence[Subspace]) -> Tuple[Subspace, ...]:
    return tuple(sorted((p for p in parts if not p.is_zero()), key=Subspace.sort_key))


def uniqueness_verdict(
    rep: Representation,
    report: DecompositionReport,
    phi: PhiVerdict,
    seed: int = 0,
    avoid: Sequence[Sequence[Subspace]] = (),
) -> UniquenessResult:
    """Decide uniqueness from the condition-phi evidence, building a second decomposition when two summands are bad."""
    _check_reports(rep, report)
    bad = tuple(phi.bad_summands())
    if phi.satisfied:
        certified = phi.status is PhiStatus.SATISFIED_CERTIFIED
        return UniquenessResult(Uniqueness.UNIQUE_UP_TO_ORDER, certified, note="condition phi holds")
    if len(bad) == 1:
        certified = all(
            w.module is None or w.module.verdict is not ModuleVerdict.INDECOMPOSABLE_PROBABILISTIC for w in phi.witnesses
        )
        return UniquenessResult(Uniqueness.UNIQUE_ONE_BAD_FACTOR, certified, bad_summands=bad, note="exactly one summand splits as a module")
    if len(bad) >= 2:
        seen = {_canonical(report.parts())} | {_canonical(parts) for parts in avoid}
        for scale in MIXING_SCALES:
            parts = mix_summands(rep, report, bad[0], bad[1], scale)
            canonical = _canonical(parts)
            if canonical in seen:
                continue
            validity = verify_decomposition(rep, parts, seed=seed, options=SplitOptions())
            if validity.ok:
                logger.info("second decomposition built by mixing summands %d and %d with scale %d", bad[0], bad[1], scale)
                return UniquenessResult(
                    Uniqueness.NONUNIQUE_WITNESSED,
                    True,
                    canonical,
                    bad,
                    f"summands {bad[0]} and {bad[1]} mixed with scale {scale}",
                )
            logger.debug("mixing with scale %d failed: %s", scale, [c.name for c in validity.failing()])
        return UniquenessResult(Uniqueness.UNKNOWN, False, bad_summands=bad, note="no valid mixed decomposition found")
    return UniquenessResult(Uniqueness.UNKNOWN, False, note=f"condition phi is {phi.status.value}")
