"""Orthogonal decomposition of a representation into indecomposable summands.

The pipeline first peels off the flat part (a maximal nondegenerate subspace
of the fixed space), then splits the rest recursively. A split is found as an
idempotent in the self-adjoint commutant, or as a polynomial in a self-adjoint
commutant element (Fitting split, coprime split of its minimal polynomial);
either way the projector is self-adjoint, so its image and kernel are
orthogonal, invariant and nondegenerate.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

import config
from errors import InternalInconsistency, PreconditionError
from exact_linalg import (
    RatMatrix,
    Subspace,
    column_space,
    coprime_factors,
    eval_poly,
    extend_to_complement,
    fitting_split,
    inverse,
    kernel_basis,
    minimal_polynomial,
    projection_onto,
    rank,
    sum_of,
)
from holonomy_action import (
    Representation,
    commutes_with_action,
    embed_subspace,
    fixed_space,
    fixed_space_on,
    is_invariant,
    moved_span_on,
    restrict,
    selfadjoint_commutant,
)
from quadratic_space import (
    QuadraticSpace,
    are_orthogonal,
    is_nondegenerate,
    is_totally_isotropic,
    orth_complement,
    radical,
    restrict_form,
    signature_of,
)

logger = logging.getLogger(__name__)


class SummandKind(str, Enum):
    TRIVIAL_FLAT = "trivial_flat"
    FIXED_ZERO = "fixed_zero"
    FIXED_ISOTROPIC = "fixed_isotropic"


_KIND_ORDER = {SummandKind.TRIVIAL_FLAT: 0, SummandKind.FIXED_ZERO: 1, SummandKind.FIXED_ISOTROPIC: 2}


@dataclass(frozen=True)
class Indecomposability:
    certified: bool
    retries: int = 0
    applicable: bool = True

    @classmethod
    def certify(cls) -> "Indecomposability":
        return cls(True)

    @classmethod
    def probabilistic(cls, retries: int) -> "Indecomposability":
        return cls(False, retries)

    @classmethod
    def not_applicable(cls) -> "Indecomposability":
        return cls(True, 0, applicable=False)

    def __str__(self) -> str:
        if not self.applicable:
            return "n/a"
        return "certified" if self.certified else f"probabilistic({self.retries})"


@dataclass(frozen=True)
class Summand:
    subspace: Subspace
    kind: SummandKind
    signature: Tuple[int, int]
    fixed_dim: int
    moved_span_local: Subspace
    indecomposability: Indecomposability

    @property
    def dim(self) -> int:
        return self.subspace.dim


@dataclass(frozen=True)
class SplitCertificate:
    """Ambient projector that separated ``parent`` into its image and kernel parts."""

    parent: Subspace
    projector: RatMatrix
    method: str


@dataclass(frozen=True)
class DecompositionReport:
    trivial_part: Summand
    summands: Tuple[Summand, ...]
    certificates: Tuple[SplitCertificate, ...] = ()
    seed: int = 0

    @property
    def p1(self) -> int:
        return sum(1 for s in self.summands if s.kind is SummandKind.FIXED_ZERO)

    @property
    def p2(self) -> int:
        return sum(1 for s in self.summands if s.kind is SummandKind.FIXED_ISOTROPIC)

    @property
    def ambient_dim(self) -> int:
        return self.trivial_part.subspace.ambient_dim

    def parts(self) -> List[Subspace]:
        """Trivial part (when nonzero) followed by the summands."""
        head = [] if self.trivial_part.subspace.is_zero() else [self.trivial_part.subspace]
        return head + [s.subspace for s in self.summands]

    def canonical_parts(self) -> Tuple[Subspace, ...]:
        return tuple(sorted(self.parts(), key=Subspace.sort_key))


@dataclass
class SplitOptions:
    attempts: int = None
    coefficient_range: int = None
    pairwise: bool = True

    def __post_init__(self) -> None:
        if self.attempts is None:
            self.attempts = config.SPLIT_ATTEMPTS
        if self.coefficient_range is None:
            self.coefficient_range = config.COEFFICIENT_RANGE


class OrthogonalSplit(NamedTuple):
    u: Subspace
    u_perp: Subspace
    certificate: RatMatrix
    method: str


class SplitFinding(NamedTuple):
    image: Subspace
    kernel: Subspace
    projector: RatMatrix
    method: str


# ---------------------------------------------------------------------------
# splitting search, shared with the module search in phi_analysis
# ---------------------------------------------------------------------------

def _is_nontrivial_idempotent(x: RatMatrix) -> bool:
    return x @ x == x and not x.is_zero() and x != RatMatrix.identity(x.rows)


def splitting_projector(x: RatMatrix) -> Optional[SplitFinding]:
    """A nontrivial idempotent that is a polynomial in ``x``, if ``x`` exhibits one."""
    n = x.rows
    if _is_nontrivial_idempotent(x):
        return SplitFinding(column_space(x), kernel_basis(x), x, "idempotent")
    kernel_part, image_part = fitting_split(x)
    if 0 < kernel_part.dim < n:
        return SplitFinding(kernel_part, image_part, projection_onto(kernel_part, image_part), "fitting")
    factors = coprime_factors(minimal_polynomial(x))
    if len(factors) >= 2:
        kernel_part, image_part = fitting_split(eval_poly(factors[0], x))
        if 0 < kernel_part.dim < n:
            return SplitFinding(kernel_part, image_part, projection_onto(kernel_part, image_part), "coprime")
    return None


def deterministic_split(basis: Sequence[RatMatrix], pairwise: bool = True) -> Optional[SplitFinding]:
    """Idempotents among basis elements and pairwise sums, then splits of single basis elements."""
    candidates = list(basis)
    if pairwise:
        candidates += [a + b for a, b in combinations(basis, 2)]
    for x in candidates:
        if _is_nontrivial_idempotent(x):
            return SplitFinding(column_space(x), kernel_basis(x), x, "idempotent")
    for x in basis:
        found = splitting_projector(x)
        if found is not None:
            return found
    return None


def random_split(basis: Sequence[RatMatrix], rng: np.random.Generator, attempts: int, coefficient_range: int) -> Optional[SplitFinding]:
    if not basis:
        return None
    n = basis[0].rows
    for attempt in range(attempts):
        coefficients = rng.integers(-coefficient_range, coefficient_range + 1, size=len(basis))
        if not coefficients.any():
            continue
        x = RatMatrix.zeros(n, n)
        for c, b in zip(coefficients, basis):
            if c:
                x = x + b.scale(int(c))
        found = splitting_projector(x)
        if found is not None:
            logger.debug("random combination %d split by %s", attempt, found.method)
            return found
    return None


def _verify_orthogonal_certificate(rep: Representation, projector: RatMatrix) -> None:
    gram = rep.space.gram
    if projector @ projector != projector:
        raise InternalInconsistency("split certificate is not idempotent")
    if not commutes_with_action(rep, projector):
        raise InternalInconsistency("split certificate does not commute with the generators")
    if gram @ projector != projector.T @ gram:
        raise InternalInconsistency("split certificate is not self-adjoint")


def _search_orthogonal_split(rep: Representation, options: SplitOptions, rng: np.random.Generator) -> Tuple[Optional[OrthogonalSplit], Indecomposability]:
    if rep.dim == 0:
        return None, Indecomposability.certify()
    basis = selfadjoint_commutant(rep)
    if len(basis) <= 1:
        return None, Indecomposability.certify()
    found = deterministic_split(basis, options.pairwise)
    if found is None:
        found = random_split(basis, rng, options.attempts, options.coefficient_range)
    if found is None:
        logger.debug("no orthogonal split in a %d-dimensional self-adjoint commutant", len(basis))
        return None, Indecomposability.probabilistic(options.attempts)
    _verify_orthogonal_certificate(rep, found.projector)
    return OrthogonalSplit(found.image, found.kernel, found.projector, found.method), Indecomposability.certify()


def orthogonal_split_once(rep: Representation, options: Optional[SplitOptions] = None, rng: Optional[np.random.Generator] = None) -> Optional[OrthogonalSplit]:
    """Split ``rep`` once into two orthogonal invariant nondegenerate parts, or return None.

    The trivial part must already be removed: the fixed space of ``rep`` has to
    be zero or totally isotropic.
    """
    if not is_totally_isotropic(rep.space, fixed_space(rep)):
        raise PreconditionError("fixed space totally isotropic", "extract the trivial part before splitting")
    options = options or SplitOptions()
    rng = rng if rng is not None else np.random.default_rng(config.DEFAULT_SEED)
    found, _ = _search_orthogonal_split(rep, options, rng)
    return found


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

def split_trivial_part(rep: Representation) -> Tuple[Subspace, Subspace]:
    """(m0, w): a maximal nondegenerate part of the fixed space and its orthogonal complement."""
    fixed = fixed_space(rep)
    flat = Subspace.span(extend_to_complement(radical(rep.space, fixed), fixed.vectors), rep.dim)
    return flat, orth_complement(rep.space, flat)


def _ambient_projector(rep: Representation, part: Subspace, local_projector: RatMatrix) -> RatMatrix:
    # acts as local_projector on part and as zero on its orthogonal complement
    basis = part.basis
    return basis.T @ local_projector @ inverse(restrict_form(rep.space, part)) @ basis @ rep.space.gram


def _split_recursively(
    rep: Representation,
    part: Subspace,
    seed_sequence: np.random.SeedSequence,
    options: SplitOptions,
    leaves: List[Tuple[Subspace, Indecomposability]],
    certificates: List[SplitCertificate],
) -> None:
    if part.is_zero():
        return
    local = restrict(rep, part)
    found, evidence = _search_orthogonal_split(local, options, np.random.default_rng(seed_sequence))
    if found is None:
        leaves.append((part, evidence))
        return
    projector = _ambient_projector(rep, part, found.certificate)
    certificates.append(SplitCertificate(part, projector, found.method))
    children = sorted([embed_subspace(part, found.u), embed_subspace(part, found.u_perp)], key=Subspace.sort_key)
    logger.debug("split %d-dimensional part into %s via %s", part.dim, [c.dim for c in children], found.method)
    for child, child_seed in zip(children, seed_sequence.spawn(2)):
        _split_recursively(rep, child, child_seed, options, leaves, certificates)


def classify_summand(rep: Representation, part: Subspace, evidence: Indecomposability) -> Summand:
    fixed_here = fixed_space_on(rep, part)
    n_plus, n_minus, _ = signature_of(rep.space, part)
    if fixed_here.is_zero():
        kind = SummandKind.FIXED_ZERO
    elif is_totally_isotropic(rep.space, fixed_here):
        kind = SummandKind.FIXED_ISOTROPIC
    else:
        raise InternalInconsistency(f"summand of dimension {part.dim} carries a nondegenerate fixed vector")
    return Summand(part, kind, (n_plus, n_minus), fixed_here.dim, moved_span_on(rep, part), evidence)


def trivial_summand(rep: Representation, flat: Subspace) -> Summand:
    n_plus, n_minus, _ = signature_of(rep.space, flat)
    return Summand(flat, SummandKind.TRIVIAL_FLAT, (n_plus, n_minus), flat.dim, Subspace.zero(rep.dim), Indecomposability.not_applicable())


def _summand_key(summand: Summand) -> Tuple:
    return (_KIND_ORDER[summand.kind], summand.dim, summand.subspace.sort_key())


def check_report(rep: Representation, report: DecompositionReport) -> None:
    """Raise InternalInconsistency unless the report is an orthogonal invariant decomposition."""
    parts = report.parts()
    if sum(p.dim for p in parts) != rep.dim or sum_of(parts, rep.dim).dim != rep.dim:
        raise InternalInconsistency("summands do not span the ambient space")
    for i, part in enumerate(parts):
        if not is_nondegenerate(rep.space, part) or not is_invariant(rep, part):
            raise InternalInconsistency(f"part {i} is degenerate or not invariant")
        for j in range(i):
            if not are_orthogonal(rep.space, part, parts[j]):
                raise InternalInconsistency(f"parts {j} and {i} are not orthogonal")
    for certificate in report.certificates:
        _verify_orthogonal_certificate(rep, certificate.projector)


def decompose(rep: Representation, seed: int = 0, options: Optional[SplitOptions] = None) -> DecompositionReport:
    options = options or SplitOptions()
    flat, rest = split_trivial_part(rep)
    leaves: List[Tuple[Subspace, Indecomposability]] = []
    certificates: List[SplitCertificate] = []
    _split_recursively(rep, rest, np.random.SeedSequence(seed), options, leaves, certificates)
    summands = sorted((classify_summand(rep, part, evidence) for part, evidence in leaves), key=_summand_key)
    report = DecompositionReport(trivial_summand(rep, flat), tuple(summands), tuple(certificates), seed)
    check_report(rep, report)
    for summand in report.summands:
        if not summand.indecomposability.certified:
            logger.warning("summand of dimension %d is only %s indecomposable", summand.dim, summand.indecomposability)
    logger.info("decomposed %s: trivial dim %d, p1=%d, p2=%d", rep.label or "representation", flat.dim, report.p1, report.p2)
    return report


def report_from_parts(rep: Representation, parts: Sequence[Subspace], seed: int = 0, options: Optional[SplitOptions] = None) -> DecompositionReport:
    """Classify a given orthogonal decomposition; parts on which the action is trivial form the flat part."""
    validity = verify_decomposition(rep, parts, seed=seed, options=options)
    for name in ("pairwise_orthogonal", "spans_ambient", "disjoint"):
        if not validity.clause(name).holds:
            raise PreconditionError(name, f"parts do not form a decomposition: {validity.clause(name).detail}")
    for clause in validity.clauses:
        if clause.name.startswith(("invariant", "nondegenerate")) and not clause.holds:
            raise PreconditionError(clause.name, clause.detail or "part check failed")
    options = options or SplitOptions()
    fixed = fixed_space(rep)
    flat_parts = [p for p in parts if not p.is_zero() and fixed.contains(p)]
    flat = sum_of(flat_parts, rep.dim)
    rng = np.random.default_rng(seed)
    summands = []
    for part in parts:
        if part.is_zero() or fixed.contains(part):
            continue
        _, evidence = _search_orthogonal_split(restrict(rep, part), options, rng)
        summands.append(classify_summand(rep, part, evidence))
    summands.sort(key=_summand_key)
    return DecompositionReport(trivial_summand(rep, flat), tuple(summands), (), seed)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Clause:
    name: str
    holds: bool
    detail: str = ""
    applicable: bool = True


@dataclass(frozen=True)
class ValidityReport:
    clauses: Tuple[Clause, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return all(c.holds for c in self.clauses)

    def clause(self, name: str) -> Clause:
        for c in self.clauses:
            if c.name == name:
                return c
        raise KeyError(name)

    def failing(self) -> List[Clause]:
        return [c for c in self.clauses if not c.holds]


def _indecomposability_clause(rep: Representation, index: int, part: Subspace, fixed: Subspace, options: SplitOptions, rng: np.random.Generator) -> Clause:
    name = f"indecomposable[{index}]"
    if not is_invariant(rep, part) or not is_nondegenerate(rep.space, part):
        return Clause(name, False, "part is not an invariant nondegenerate subspace", applicable=False)
    if fixed.contains(part):
        return Clause(name, True, "flat part", applicable=False)
    local = restrict(rep, part)
    if not is_totally_isotropic(local.space, fixed_space(local)):
        return Clause(name, False, "decomposable: contains a nondegenerate fixed subspace")
    found, evidence = _search_orthogonal_split(local, options, rng)
    if found is not None:
        return Clause(name, False, f"decomposable: {found.method} split into dimensions {found.u.dim}+{found.u_perp.dim}")
    return Clause(name, True, str(evidence))


def _orthogonality_forced_clause(space: QuadraticSpace, parts: List[Subspace], fixed: Subspace, clauses: List[Clause], non_orthogonal: List[Tuple[int, int]]) -> Clause:
    """With a nondegenerate fixed space as first part, orthogonal to the rest,
    and indecomposable remaining parts, the decomposition has to be orthogonal."""
    name = "orthogonality_forced"
    if not is_nondegenerate(space, fixed):
        return Clause(name, True, "fixed space is degenerate", applicable=False)
    flat_first = bool(parts) and parts[0] == fixed
    if not fixed.is_zero() and not flat_first:
        return Clause(name, True, "first part is not the fixed space", applicable=False)
    by_name = {c.name: c for c in clauses}
    structural = [c for c in clauses if c.name.split("[")[0] in ("invariant", "nondegenerate")]
    structural += [by_name["spans_ambient"], by_name["disjoint"]]
    if not all(c.holds for c in structural):
        return Clause(name, True, "parts do not form a decomposition into nondegenerate invariant subspaces", applicable=False)
    start = 1 if flat_first else 0
    if flat_first and not all(are_orthogonal(space, parts[0], other) for other in parts[1:]):
        return Clause(name, True, "fixed space is not orthogonal to the rest", applicable=False)
    undecided = [i for i in range(start, len(parts)) if not by_name[f"indecomposable[{i}]"].holds]
    if undecided:
        return Clause(name, True, f"parts {undecided} are not indecomposable", applicable=False)
    if non_orthogonal:
        return Clause(name, False, f"hypothesis met but pairs {non_orthogonal} are not orthogonal")
    return Clause(name, True, f"hypothesis met; {len(parts) - start} indecomposable parts are pairwise orthogonal")


def verify_decomposition(rep: Representation, parts: Sequence[Subspace], seed: int = 0, options: Optional[SplitOptions] = None) -> ValidityReport:
    """Check a proposed decomposition clause by clause; never raises on bad parts."""
    options = options or SplitOptions()
    space = rep.space
    parts = list(parts)
    clauses: List[Clause] = []
    for i, part in enumerate(parts):
        clauses.append(Clause(f"invariant[{i}]", is_invariant(rep, part)))
    for i, part in enumerate(parts):
        clauses.append(Clause(f"nondegenerate[{i}]", is_nondegenerate(space, part)))

    non_orthogonal = [(i, j) for i in range(len(parts)) for j in range(i + 1, len(parts)) if not are_orthogonal(space, parts[i], parts[j])]
    clauses.append(Clause("pairwise_orthogonal", not non_orthogonal, "" if not non_orthogonal else f"non-orthogonal pairs {non_orthogonal}"))

    total = sum_of(parts, rep.dim)
    clauses.append(Clause("spans_ambient", total.dim == rep.dim, f"span has dimension {total.dim} of {rep.dim}"))
    clauses.append(Clause("disjoint", sum(p.dim for p in parts) == total.dim, f"dimensions sum to {sum(p.dim for p in parts)}"))

    fixed = fixed_space(rep)
    rng = np.random.default_rng(seed)
    for i, part in enumerate(parts):
        clauses.append(_indecomposability_clause(rep, i, part, fixed, options, rng))

    clauses.append(_orthogonality_forced_clause(space, parts, fixed, clauses, non_orthogonal))
    return ValidityReport(tuple(clauses))
