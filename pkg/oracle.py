"""Brute-force evidence over small prime fields.

The representation is reduced modulo p, the commutant is solved over GF(p),
and then every element of it (or every k-dimensional subspace) is enumerated
with vectorized numpy arithmetic. Results are evidence only: splitting mod p
does not imply splitting over the rationals.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from sympy import nextprime
from sympy.polys.domains import GF
from sympy.polys.matrices import DomainMatrix

import config
from derham_decompose import decompose
from errors import HolonomyError, InvariantViolation
from exact_linalg import RatMatrix, Rational, determinant
from holonomy_action import GeneratorKind, Representation
from phi_analysis import ModuleVerdict, module_indecomposable

logger = logging.getLogger(__name__)

_CHUNK = 1 << 15
_MAX_REPLACEMENTS = 16


class OracleBoundExceeded(HolonomyError):
    exit_code = 3


class InvalidReduction(InvariantViolation):
    pass


@dataclass(frozen=True)
class FieldReduction:
    prime: int
    gram: Optional[np.ndarray]
    reduced_generators: Tuple[np.ndarray, ...]
    kinds: Tuple[GeneratorKind, ...]
    valid: bool
    reason: str = ""

    @property
    def dim(self) -> int:
        return 0 if self.gram is None else self.gram.shape[0]

    def displacements(self) -> List[np.ndarray]:
        identity = np.eye(self.dim, dtype=np.int64)
        return [
            (m - identity) % self.prime if kind is GeneratorKind.GROUP else m
            for m, kind in zip(self.reduced_generators, self.kinds)
        ]


def _reduce_scalar(value: Rational, p: int) -> Optional[int]:
    denominator = int(value.denominator) % p
    if denominator == 0:
        return None
    return (int(value.numerator) * pow(denominator, -1, p)) % p


def reduce_matrix(m: RatMatrix, p: int) -> Optional[np.ndarray]:
    out = np.zeros(m.shape, dtype=np.int64)
    for i in range(m.rows):
        for j in range(m.cols):
            value = _reduce_scalar(m[i, j], p)
            if value is None:
                return None
            out[i, j] = value
    return out


def reduce_mod_p(rep: Representation, p: int) -> FieldReduction:
    kinds = tuple(g.kind for g in rep.generators)
    gram = reduce_matrix(rep.space.gram, p)
    if gram is None:
        return FieldReduction(p, None, (), kinds, False, f"a gram denominator vanishes mod {p}")
    if _reduce_scalar(determinant(rep.space.gram), p) in (None, 0):
        return FieldReduction(p, gram, (), kinds, False, f"the gram determinant vanishes mod {p}")
    generators = []
    for index, g in enumerate(rep.generators):
        reduced = reduce_matrix(g.matrix, p)
        if reduced is None:
            return FieldReduction(p, gram, (), kinds, False, f"generator {index} has a denominator divisible by {p}")
        generators.append(reduced)
    return FieldReduction(p, gram, tuple(generators), kinds, True)


# ---------------------------------------------------------------------------
# linear algebra over GF(p)
# ---------------------------------------------------------------------------

def _kernel_mod_p(rows: np.ndarray, unknowns: int, p: int) -> np.ndarray:
    """Basis (as rows) of the null space of ``rows`` over GF(p)."""
    if rows.shape[0] == 0:
        return np.eye(unknowns, dtype=np.int64)
    field_ = GF(p)
    dm = DomainMatrix([[field_(int(v)) for v in row] for row in rows], rows.shape, field_)
    reduced, pivots = dm.rref()
    reduced = np.array([[int(v) % p for v in row] for row in reduced.to_list()], dtype=np.int64)
    free = [j for j in range(unknowns) if j not in pivots]
    basis = np.zeros((len(free), unknowns), dtype=np.int64)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, pivot in enumerate(pivots):
            basis[k, pivot] = (-reduced[i, f]) % p
    return basis


def _rank_mod_p(m: np.ndarray, p: int) -> int:
    if m.size == 0:
        return 0
    field_ = GF(p)
    dm = DomainMatrix([[field_(int(v)) for v in row] for row in m], m.shape, field_)
    return len(dm.rref()[1])


def _commutant_mod_p(reduction: FieldReduction, self_adjoint: bool) -> np.ndarray:
    n, p = reduction.dim, reduction.prime
    rows = []
    for d in reduction.displacements():
        for i in range(n):
            for j in range(n):
                row = np.zeros(n * n, dtype=np.int64)
                for k in range(n):
                    row[i * n + k] += d[k, j]
                    row[k * n + j] -= d[i, k]
                rows.append(row % p)
    if self_adjoint:
        g = reduction.gram
        for i in range(n):
            for j in range(n):
                row = np.zeros(n * n, dtype=np.int64)
                for k in range(n):
                    row[k * n + j] += g[i, k]
                    row[k * n + i] -= g[k, j]
                rows.append(row % p)
    system = np.array(rows, dtype=np.int64).reshape(len(rows), n * n)
    return _kernel_mod_p(system, n * n, p).reshape(-1, n, n)


# ---------------------------------------------------------------------------
# idempotents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IdempotentCount:
    prime: int
    commutant_dim: int
    total: int
    nontrivial: int
    witnesses: Tuple[np.ndarray, ...] = field(default_factory=tuple)


def _require_valid(rep: Representation, p: int) -> FieldReduction:
    reduction = reduce_mod_p(rep, p)
    if not reduction.valid:
        raise InvalidReduction(f"reduction mod {p} is not usable", detail=reduction.reason)
    return reduction


def enumerate_idempotents_mod_p(rep: Representation, p: int, self_adjoint: bool = False, bound: Optional[int] = None) -> IdempotentCount:
    """Count idempotents among all p^d elements of the (self-adjoint) commutant mod p."""
    bound = config.ORACLE_SEARCH_BOUND if bound is None else bound
    reduction = _require_valid(rep, p)
    basis = _commutant_mod_p(reduction, self_adjoint)
    d, n = basis.shape[0], reduction.dim
    size = p ** d
    if size > bound:
        raise OracleBoundExceeded(f"{p}^{d} commutant elements exceed the search bound {bound}")
    identity = np.eye(n, dtype=np.int64)
    total = nontrivial = 0
    witnesses: List[np.ndarray] = []
    place_values = p ** np.arange(d, dtype=np.int64)
    for start in range(0, size, _CHUNK):
        index = np.arange(start, min(start + _CHUNK, size), dtype=np.int64)
        digits = (index[:, None] // place_values[None, :]) % p
        elements = np.tensordot(digits, basis, axes=(1, 0)) % p
        squares = np.matmul(elements, elements) % p
        hits = elements[np.all(squares == elements, axis=(1, 2))]
        total += len(hits)
        for e in hits:
            if e.any() and not np.array_equal(e, identity):
                nontrivial += 1
                if len(witnesses) < config.ORACLE_WITNESS_CAP:
                    witnesses.append(e)
    logger.debug("mod %d: %d idempotents (%d nontrivial) among %d elements", p, total, nontrivial, size)
    return IdempotentCount(p, d, total, nontrivial, tuple(witnesses))


# ---------------------------------------------------------------------------
# invariant subspaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InvariantSubspaceModP:
    basis: Tuple[Tuple[int, ...], ...]
    isotropic: bool
    nondegenerate: bool


def gaussian_binomial(n: int, k: int, p: int) -> int:
    numerator = denominator = 1
    for i in range(k):
        numerator *= p ** (n - i) - 1
        denominator *= p ** (i + 1) - 1
    return numerator // denominator


def _echelon_forms(n: int, k: int, p: int) -> Iterator[Tuple[Tuple[int, ...], np.ndarray]]:
    """All k x n reduced row echelon matrices over GF(p), one array per pivot pattern."""
    for pivots in combinations(range(n), k):
        free = [(i, j) for i, pivot in enumerate(pivots) for j in range(pivot + 1, n) if j not in pivots]
        count = p ** len(free)
        index = np.arange(count, dtype=np.int64)
        forms = np.zeros((count, k, n), dtype=np.int64)
        for i, pivot in enumerate(pivots):
            forms[:, i, pivot] = 1
        for position, (i, j) in enumerate(free):
            forms[:, i, j] = (index // p ** position) % p
        yield pivots, forms


def enumerate_invariant_subspaces_mod_p(rep: Representation, p: int, k: int, bound: Optional[int] = None) -> List[InvariantSubspaceModP]:
    bound = config.ORACLE_SEARCH_BOUND if bound is None else bound
    reduction = _require_valid(rep, p)
    n = reduction.dim
    if not 0 <= k <= n:
        raise InvariantViolation(f"no {k}-dimensional subspaces in dimension {n}")
    if gaussian_binomial(n, k, p) > bound:
        raise OracleBoundExceeded(f"{gaussian_binomial(n, k, p)} subspaces exceed the search bound {bound}")
    displacements = reduction.displacements()
    gram = reduction.gram
    found: List[InvariantSubspaceModP] = []
    for pivots, forms in _echelon_forms(n, k, p):
        keep = np.ones(len(forms), dtype=bool)
        for d in displacements:
            images = np.matmul(forms, d.T) % p
            residual = (images - np.matmul(images[:, :, list(pivots)], forms)) % p
            keep &= ~residual.any(axis=(1, 2))
        for w in forms[keep]:
            restricted = (w @ gram @ w.T) % p
            found.append(
                InvariantSubspaceModP(
                    tuple(tuple(int(v) for v in row) for row in w),
                    not restricted.any(),
                    _rank_mod_p(restricted, p) == k,
                )
            )
    return found


# ---------------------------------------------------------------------------
# crosscheck
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalVerdicts:
    module_decomposable: Optional[bool] = None
    module_certified: bool = False
    orthogonally_decomposable: Optional[bool] = None
    witnesses: Tuple[RatMatrix, ...] = ()


@dataclass(frozen=True)
class PrimeEvidence:
    prime: int
    valid: bool
    reason: str = ""
    module_idempotents: Optional[int] = None
    selfadjoint_idempotents: Optional[int] = None
    # per dimension 1..n-1; None where the Grassmannian is over the subspace bound
    invariant_subspaces: Tuple[Optional[int], ...] = ()
    nondegenerate_invariant: Optional[bool] = None
    witnesses_reduce: Tuple[bool, ...] = ()
    agrees: Optional[bool] = None


@dataclass(frozen=True)
class CrosscheckReport:
    entries: Tuple[PrimeEvidence, ...]
    soundness_violations: Tuple[str, ...] = ()
    review_flags: Tuple[str, ...] = ()

    @property
    def sound(self) -> bool:
        return not self.soundness_violations

    @property
    def agreement(self) -> bool:
        return self.sound and all(e.agrees is not False for e in self.entries)

    @property
    def primes_used(self) -> Tuple[int, ...]:
        return tuple(e.prime for e in self.entries if e.valid)


def _witness_reduces(witness: RatMatrix, p: int) -> Optional[bool]:
    reduced = reduce_matrix(witness, p)
    if reduced is None:
        return None
    return bool(np.array_equal((reduced @ reduced) % p, reduced))


def _count_or_none(rep: Representation, p: int, self_adjoint: bool) -> Optional[int]:
    try:
        return enumerate_idempotents_mod_p(rep, p, self_adjoint=self_adjoint).nontrivial
    except OracleBoundExceeded:
        logger.info("mod %d %s search skipped: bound exceeded", p, "self-adjoint" if self_adjoint else "module")
        return None


def _subspace_evidence(rep: Representation, p: int) -> Tuple[Tuple[Optional[int], ...], Optional[bool]]:
    counts: List[Optional[int]] = []
    nondegenerate = False
    for k in range(1, rep.dim):
        try:
            found = enumerate_invariant_subspaces_mod_p(rep, p, k, bound=config.ORACLE_SUBSPACE_BOUND)
        except OracleBoundExceeded:
            logger.info("mod %d invariant %d-subspaces skipped: bound exceeded", p, k)
            counts.append(None)
            continue
        counts.append(len(found))
        nondegenerate = nondegenerate or any(s.nondegenerate for s in found)
    if not nondegenerate and None in counts:
        return tuple(counts), None
    return tuple(counts), nondegenerate


def _agreement(*pairs: Tuple[Optional[bool], Optional[bool]]) -> Optional[bool]:
    compared = [rational == modular for rational, modular in pairs if rational is not None and modular is not None]
    return all(compared) if compared else None


def _evidence_at(rep: Representation, verdicts: RationalVerdicts, p: int, violations: List[str]) -> PrimeEvidence:
    reductions = []
    for index, witness in enumerate(verdicts.witnesses):
        reduces = _witness_reduces(witness, p)
        if reduces is False:
            violations.append(f"witness {index} is not idempotent mod {p}")
        reductions.append(bool(reduces))
    module_count = _count_or_none(rep, p, self_adjoint=False)
    selfadjoint_count = _count_or_none(rep, p, self_adjoint=True)
    subspaces, nondegenerate = _subspace_evidence(rep, p)
    # a nondegenerate invariant subspace and its complement are the image and
    # kernel of a self-adjoint idempotent, so the two searches must agree
    if selfadjoint_count is not None and nondegenerate is not None and (selfadjoint_count > 0) != nondegenerate:
        violations.append(f"mod {p}: self-adjoint idempotents and nondegenerate invariant subspaces disagree")
    agrees = _agreement(
        (verdicts.module_decomposable, None if module_count is None else module_count > 0),
        (verdicts.orthogonally_decomposable, None if selfadjoint_count is None else selfadjoint_count > 0),
        (verdicts.orthogonally_decomposable, nondegenerate),
    )
    return PrimeEvidence(p, True, "", module_count, selfadjoint_count, subspaces, nondegenerate, tuple(reductions), agrees)


def crosscheck(rep: Representation, verdicts: RationalVerdicts, primes: Optional[Sequence[int]] = None) -> CrosscheckReport:
    """Compare rational verdicts with exhaustive searches modulo as many valid primes as requested.

    A prime with bad reduction is recorded and replaced by the next prime above
    everything tried so far.
    """
    requested = config.ORACLE_PRIMES if primes is None else tuple(primes)
    # 유효한 소수가 요청 개수만큼 모일 때까지 다음 소수로 대체
    pending = list(requested)
    entries: List[PrimeEvidence] = []
    violations: List[str] = []
    flags: List[str] = []
    used = replacements = 0
    while pending and used < len(requested):
        p = pending.pop(0)
        reduction = reduce_mod_p(rep, p)
        if not reduction.valid:
            entries.append(PrimeEvidence(p, False, reduction.reason))
            if replacements < _MAX_REPLACEMENTS:
                replacement = nextprime(max([e.prime for e in entries] + pending))
                logger.info("prime %d unusable (%s); trying %d", p, reduction.reason, replacement)
                pending.append(replacement)
                replacements += 1
            continue
        entries.append(_evidence_at(rep, verdicts, p, violations))
        used += 1
    if used < len(requested):
        flags.append(f"only {used} of {len(requested)} primes had a valid reduction")

    # 유리수 쪽 판정과 비교
    enumerated = [e for e in entries if e.valid and e.module_idempotents is not None]
    if verdicts.module_decomposable and enumerated and all(e.module_idempotents == 0 for e in enumerated):
        violations.append("rational module splitting has no idempotent modulo any prime")
    if verdicts.module_decomposable is False and not verdicts.module_certified and enumerated and all(e.module_idempotents > 0 for e in enumerated):
        flags.append("probabilistic module indecomposability but idempotents modulo every prime")
    selfadjoint = [e for e in entries if e.valid and e.selfadjoint_idempotents is not None]
    if verdicts.orthogonally_decomposable is False and selfadjoint and all(e.selfadjoint_idempotents > 0 for e in selfadjoint):
        flags.append("orthogonally indecomposable but self-adjoint idempotents modulo every prime")
    for message in violations:
        logger.error("oracle soundness violation: %s", message)
    for message in flags:
        logger.warning("oracle review flag: %s", message)
    return CrosscheckReport(tuple(entries), tuple(violations), tuple(flags))


def rational_verdicts(rep: Representation, seed: int = 0) -> RationalVerdicts:
    """Exact verdicts (and their witnesses) for ``crosscheck`` to test."""
    module = module_indecomposable(rep, seed=seed)
    report = decompose(rep, seed=seed)
    orthogonal = len(report.parts()) > 1 or report.trivial_part.dim > 1
    witnesses = tuple(c.projector for c in report.certificates)
    if module.witness is not None:
        witnesses = (module.witness,) + witnesses
    return RationalVerdicts(
        module_decomposable=module.decomposable,
        module_certified=module.verdict is not ModuleVerdict.INDECOMPOSABLE_PROBABILISTIC,
        orthogonally_decomposable=orthogonal,
        witnesses=witnesses,
    )
