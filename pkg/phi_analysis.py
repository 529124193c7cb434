"""Condition Φ on a computed decomposition.

Every summand with a nonzero fixed space must be indecomposable as a module,
not merely orthogonally. The check runs an idempotent search in the full
commutant of each such summand. A summand whose signature is not neutral
cannot split (a splitting would yield two totally isotropic halves), so it is
certified without search.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations, product
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from sympy import integer_nthroot
from sympy.polys.domains import QQ

import config
from derham_decompose import (
    DecompositionReport,
    Summand,
    SummandKind,
    deterministic_split,
    random_split,
)
from errors import InternalInconsistency, PreconditionError
from exact_linalg import RatMatrix, Rational, Subspace, column_space, is_power_of_irreducible, kernel_basis, minimal_polynomial, rank
from holonomy_action import (
    Representation,
    commutant,
    commutes_with_action,
    embed_subspace,
    is_invariant,
    restrict,
    skewadjoint_commutant,
)
from quadratic_space import is_totally_isotropic

logger = logging.getLogger(__name__)


class ModuleVerdict(str, Enum):
    INDECOMPOSABLE_CERTIFIED = "indecomposable_certified"
    INDECOMPOSABLE_PROBABILISTIC = "indecomposable_probabilistic"
    DECOMPOSABLE = "decomposable"


class PhiStatus(str, Enum):
    SATISFIED_CERTIFIED = "satisfied_certified"
    SATISFIED_PROBABILISTIC = "satisfied_probabilistic"
    VIOLATED = "violated"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ModuleIndecomposability:
    verdict: ModuleVerdict
    witness: Optional[RatMatrix] = None
    method: str = ""
    attempts: int = 0
    review: bool = False

    @property
    def decomposable(self) -> bool:
        return self.verdict is ModuleVerdict.DECOMPOSABLE


@dataclass(frozen=True)
class SummandEvidence:
    index: int
    summand: Summand
    neutral: bool
    module: Optional[ModuleIndecomposability] = None
    parts: Optional[Tuple[Subspace, Subspace]] = None
    isotropic_pair: Optional[Tuple[Subspace, Subspace]] = None
    note: str = ""


@dataclass(frozen=True)
class PhiVerdict:
    status: PhiStatus
    witnesses: Tuple[SummandEvidence, ...] = field(default_factory=tuple)

    @property
    def satisfied(self) -> bool:
        return self.status in (PhiStatus.SATISFIED_CERTIFIED, PhiStatus.SATISFIED_PROBABILISTIC)

    def bad_summands(self) -> List[int]:
        return [w.index for w in self.witnesses if w.module is not None and w.module.decomposable]


def _is_nontrivial_idempotent(p: RatMatrix) -> bool:
    return p @ p == p and 0 < rank(p) < p.rows


def _verify_module_witness(rep: Representation, witness: RatMatrix) -> None:
    if not _is_nontrivial_idempotent(witness):
        raise InternalInconsistency("module witness is not a nontrivial idempotent")
    if not commutes_with_action(rep, witness):
        raise InternalInconsistency("module witness does not commute with the generators")


def _rational_sqrt(c: Rational) -> Optional[Rational]:
    if c <= 0:
        return None
    num, num_exact = integer_nthroot(int(c.numerator), 2)
    den, den_exact = integer_nthroot(int(c.denominator), 2)
    if not (num_exact and den_exact):
        return None
    return QQ(int(num), int(den))


def _sparse_sign_vectors(size: int, limit: int) -> Iterator[Tuple[int, ...]]:
    """Coefficient vectors over {-1, 0, 1}, sparsest first, at most ``limit`` of them."""
    produced = 0
    for weight in range(1, size + 1):
        for positions in combinations(range(size), weight):
            for signs in product((1, -1), repeat=weight):
                if produced >= limit:
                    return
                coefficients = [0] * size
                for position, sign in zip(positions, signs):
                    coefficients[position] = sign
                produced += 1
                yield tuple(coefficients)


def involution_split(rep: Representation, limit: Optional[int] = None) -> Optional[RatMatrix]:
    """Idempotent (I + J)/2 for a skew-adjoint commuting J with J² = I, if the sparse search meets one.

    Its image and kernel are the ±1 eigenspaces of J, both totally isotropic.
    """
    limit = config.INVOLUTION_SEARCH_LIMIT if limit is None else limit
    basis = skewadjoint_commutant(rep)
    n = rep.dim
    identity = RatMatrix.identity(n)
    for coefficients in _sparse_sign_vectors(len(basis), limit):
        k = RatMatrix.zeros(n, n)
        for c, b in zip(coefficients, basis):
            if c:
                k = k + b.scale(c)
        square = k @ k
        c = square[0, 0]
        if c == 0 or square != identity.scale(c):
            continue
        root = _rational_sqrt(c)
        if root is None:
            continue
        logger.debug("involution found with coefficients %s", coefficients)
        return (identity + k.scale(1 / root)).scale(QQ(1, 2))
    return None


def module_indecomposable(
    rep: Representation,
    seed: int = 0,
    attempts: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    oracle_primes: Optional[Sequence[int]] = None,
) -> ModuleIndecomposability:
    """Search the full commutant for a nontrivial idempotent.

    Order: totally isotropic involutions, idempotents and splits of basis
    elements, then splits of seeded random combinations. With ``oracle_primes``
    the finite-field search runs on every indecomposable outcome: it can
    upgrade a probabilistic verdict, and it only sets ``review`` on a
    certified one, since a local commutant is a proof over the rationals.
    """
    attempts = config.MODULE_ATTEMPTS if attempts is None else attempts
    rng = rng if rng is not None else np.random.default_rng(seed)
    if rep.dim <= 1:
        return ModuleIndecomposability(ModuleVerdict.INDECOMPOSABLE_CERTIFIED, method="dimension")
    basis = commutant(rep)
    if len(basis) == 1:
        return ModuleIndecomposability(ModuleVerdict.INDECOMPOSABLE_CERTIFIED, method="scalar commutant")

    witness = involution_split(rep)
    method = "isotropic involution"
    if witness is None:
        found = deterministic_split(basis) or random_split(basis, rng, attempts, config.COEFFICIENT_RANGE)
        if found is not None:
            witness, method = found.projector, found.method
    if witness is not None:
        _verify_module_witness(rep, witness)
        logger.debug("module split of rank %d via %s", rank(witness), method)
        return ModuleIndecomposability(ModuleVerdict.DECOMPOSABLE, witness, method, attempts)

    if all(is_power_of_irreducible(minimal_polynomial(b)) for b in basis):
        result = ModuleIndecomposability(ModuleVerdict.INDECOMPOSABLE_CERTIFIED, method="local commutant", attempts=attempts)
    else:
        result = ModuleIndecomposability(ModuleVerdict.INDECOMPOSABLE_PROBABILISTIC, method="search exhausted", attempts=attempts)
    if oracle_primes:
        result = _apply_oracle(rep, result, oracle_primes)
    if result.verdict is ModuleVerdict.INDECOMPOSABLE_PROBABILISTIC:
        logger.warning("module indecomposability of a %d-dimensional representation is probabilistic", rep.dim)
    return result


def _oracle_tally(rep: Representation, primes: Sequence[int]) -> Tuple[int, int]:
    """Primes without and with nontrivial idempotents, skipping unusable ones."""
    from oracle import OracleBoundExceeded, enumerate_idempotents_mod_p, reduce_mod_p

    clean = split = 0
    for p in primes:
        if not reduce_mod_p(rep, p).valid:
            continue
        try:
            count = enumerate_idempotents_mod_p(rep, p, self_adjoint=False)
        except OracleBoundExceeded:
            continue
        if count.nontrivial:
            split += 1
        else:
            clean += 1
    return clean, split


def _apply_oracle(rep: Representation, result: ModuleIndecomposability, primes: Sequence[int]) -> ModuleIndecomposability:
    clean, split = _oracle_tally(rep, primes)
    if result.verdict is ModuleVerdict.INDECOMPOSABLE_CERTIFIED:
        if split and clean == 0:
            logger.warning("certified indecomposable but idempotents exist modulo every usable prime")
            return ModuleIndecomposability(result.verdict, method=result.method, attempts=result.attempts, review=True)
        return result
    if clean >= 3 and split == 0:
        return ModuleIndecomposability(ModuleVerdict.INDECOMPOSABLE_CERTIFIED, method="oracle", attempts=result.attempts)
    if split and clean == 0:
        logger.warning("idempotents exist modulo every usable prime; flagged for review")
        return ModuleIndecomposability(result.verdict, method=result.method, attempts=result.attempts, review=True)
    return result


def neutral_signature_screen(report: DecompositionReport) -> Tuple[bool, ...]:
    """Per summand: fixed part isotropic and signature neutral."""
    return tuple(s.kind is SummandKind.FIXED_ISOTROPIC and s.signature[0] == s.signature[1] for s in report.summands)


def isotropic_pair_split(rep: Representation, witness: Optional[RatMatrix] = None, seed: int = 0) -> Optional[Tuple[Subspace, Subspace]]:
    """Two complementary invariant totally isotropic subspaces, when the search finds them."""
    if witness is None:
        result = module_indecomposable(rep, seed=seed)
        if not result.decomposable:
            raise PreconditionError("module decomposable", "the representation has no module splitting witness")
        witness = result.witness
    elif not (_is_nontrivial_idempotent(witness) and commutes_with_action(rep, witness)):
        raise PreconditionError("module decomposable", "witness is not a commuting nontrivial idempotent")

    space = rep.space
    image, kernel = column_space(witness), kernel_basis(witness)
    if is_totally_isotropic(space, image) and is_totally_isotropic(space, kernel):
        return image, kernel
    involution = involution_split(rep)
    if involution is None:
        return None
    return column_space(involution), kernel_basis(involution)


def _check_report_matches(rep: Representation, report: DecompositionReport) -> None:
    if report.ambient_dim != rep.dim:
        raise PreconditionError("report from rep", "report and representation have different dimensions")
    for index, summand in enumerate(report.summands):
        if not is_invariant(rep, summand.subspace):
            raise PreconditionError("report from rep", f"summand {index} is not invariant under this representation")


def phi_check(rep: Representation, report: DecompositionReport, seed: int = 0, oracle_primes: Optional[Sequence[int]] = None) -> PhiVerdict:
    _check_report_matches(rep, report)
    neutral = neutral_signature_screen(report)
    streams = np.random.SeedSequence(seed).spawn(max(len(report.summands), 1))
    evidence: List[SummandEvidence] = []
    for index, summand in enumerate(report.summands):
        if summand.fixed_dim == 0:
            evidence.append(SummandEvidence(index, summand, neutral[index], note="fixed space is zero"))
            continue
        if not neutral[index]:
            module = ModuleIndecomposability(ModuleVerdict.INDECOMPOSABLE_CERTIFIED, method="non-neutral signature")
            evidence.append(SummandEvidence(index, summand, False, module, note="signature is not neutral"))
            continue
        local = restrict(rep, summand.subspace)
        module = module_indecomposable(local, rng=np.random.default_rng(streams[index]), oracle_primes=oracle_primes)
        if module.decomposable:
            parts = (
                embed_subspace(summand.subspace, column_space(module.witness)),
                embed_subspace(summand.subspace, kernel_basis(module.witness)),
            )
            pair = isotropic_pair_split(local, module.witness)
            ambient_pair = None if pair is None else tuple(embed_subspace(summand.subspace, s) for s in pair)
            evidence.append(SummandEvidence(index, summand, True, module, parts, ambient_pair, note=module.method))
        else:
            evidence.append(SummandEvidence(index, summand, True, module, note=module.method))

    verdicts = [e.module for e in evidence if e.module is not None]
    if any(m.decomposable for m in verdicts):
        status = PhiStatus.VIOLATED
    elif any(m.review for m in verdicts):
        status = PhiStatus.INCONCLUSIVE
    elif all(m.verdict is ModuleVerdict.INDECOMPOSABLE_CERTIFIED for m in verdicts):
        status = PhiStatus.SATISFIED_CERTIFIED
    else:
        status = PhiStatus.SATISFIED_PROBABILISTIC
    logger.info("condition phi: %s", status.value)
    return PhiVerdict(status, tuple(evidence))
