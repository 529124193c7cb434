"""Built-in instances with known decompositions and expected verdicts."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

from derham_decompose import DecompositionReport, decompose
from errors import UnknownReference
from exact_linalg import RatMatrix, Subspace
from holonomy_action import Generator, Representation
from phi_analysis import PhiStatus, phi_check
from quadratic_space import QuadraticSpace, orth_complement
from uniqueness import Uniqueness, uniqueness_verdict

logger = logging.getLogger(__name__)

# 2x2 rotation generator of a definite plane
J = RatMatrix([[0, -1], [1, 0]])


@dataclass(frozen=True)
class ExpectedVerdicts:
    trivial_dim: int
    p1: int
    p2: int
    kinds: Tuple[str, ...]
    dims: Tuple[int, ...]
    phi_status: PhiStatus
    uniqueness: Uniqueness


@dataclass(frozen=True)
class CorpusInstance:
    name: str
    rep: Representation
    known_decompositions: Dict[str, Tuple[Subspace, ...]]
    expected: ExpectedVerdicts
    printed_decompositions: Dict[str, Tuple[Subspace, ...]] = field(default_factory=dict)
    module_splittings: Dict[str, Tuple[Subspace, ...]] = field(default_factory=dict)
    description: str = ""


def _span(n: int, *vectors: Sequence[int]) -> Subspace:
    return Subspace.span(vectors, n)


def _coordinates(n: int, indices: Sequence[int]) -> Subspace:
    return Subspace.span([[1 if j == i else 0 for j in range(n)] for i in indices], n)


def wu_generator() -> RatMatrix:
    """Nilpotent skew-adjoint N on (+,+,-,-): N e1 = e2+e4, N e2 = -(e1+e3), N e3 = -(e2+e4), N e4 = e1+e3."""
    return RatMatrix([
        [0, -1, 0, 1],
        [1, 0, -1, 0],
        [0, -1, 0, 1],
        [1, 0, -1, 0],
    ])


def _neutral_gram(blocks: int) -> List[int]:
    return [1, 1, -1, -1] * blocks


def wu_factor() -> CorpusInstance:
    rep = Representation(
        QuadraticSpace.diagonal(_neutral_gram(1)),
        (Generator.infinitesimal(wu_generator()),),
        "wu-factor",
    )
    return CorpusInstance(
        "wu-factor",
        rep,
        {"whole": (Subspace.full(4),)},
        ExpectedVerdicts(0, 0, 1, ("fixed_isotropic",), (4,), PhiStatus.VIOLATED, Uniqueness.UNIQUE_ONE_BAD_FACTOR),
        module_splittings={
            "isotropic-pair": (_span(4, (1, 0, 0, 1), (0, 1, 1, 0)), _span(4, (1, 0, 0, -1), (0, 1, -1, 0))),
            # printed pair at t = 1; the second plane is not invariant
            "V-printed": (_span(4, (1, 0, 1, 0), (0, 1, 0, 1)), _span(4, (1, 1, -1, 1), (1, 1, 1, -1))),
        },
        description="neutral 4-space with one nilpotent generator; indecomposable but splits as a module",
    )


def wu_product() -> CorpusInstance:
    n = wu_generator()
    zero = RatMatrix.zeros(4, 4)
    rep = Representation(
        QuadraticSpace.diagonal(_neutral_gram(2)),
        (
            Generator.infinitesimal(RatMatrix.block_diagonal(n, zero)),
            Generator.infinitesimal(RatMatrix.block_diagonal(zero, n)),
        ),
        "wu-product",
    )
    e_block, f_block = _coordinates(8, range(4)), _coordinates(8, range(4, 8))
    w1 = _span(8, (1, 0, 0, 0, -1, 0, -1, 0), (0, 1, 0, 0, 0, 0, 0, 0), (0, 0, 1, 0, 1, 0, 1, 0), (0, 0, 0, 1, 0, 0, 0, 0))
    w2 = _span(8, (1, 0, 1, 0, 1, 0, 0, 0), (0, 0, 0, 0, 0, 1, 0, 0), (-1, 0, -1, 0, 0, 0, 1, 0), (0, 0, 0, 0, 0, 0, 0, 1))
    w2_printed = _span(8, (-1, 0, -1, 0, 1, 0, 0, 0), (0, 0, 0, 0, 0, 1, 0, 0), (1, 0, 1, 0, 0, 0, 1, 0), (0, 0, 0, 0, 0, 0, 0, 1))
    return CorpusInstance(
        "wu-product",
        rep,
        {"E/F": (e_block, f_block), "W": (w1, w2)},
        ExpectedVerdicts(0, 0, 2, ("fixed_isotropic", "fixed_isotropic"), (4, 4), PhiStatus.VIOLATED, Uniqueness.NONUNIQUE_WITNESSED),
        printed_decompositions={"W-printed": (w1, w2_printed)},
        description="product of two copies of wu-factor; the summands can be sheared into each other",
    )


def rotation_z() -> CorpusInstance:
    quarter_turn = RatMatrix([[0, -1, 0], [1, 0, 0], [0, 0, 1]])
    rep = Representation(QuadraticSpace.diagonal([1, 1, 1]), (Generator.group(quarter_turn),), "rotation-z")
    return CorpusInstance(
        "rotation-z",
        rep,
        {"axis": (_coordinates(3, [2]), _coordinates(3, [0, 1]))},
        ExpectedVerdicts(1, 1, 0, ("fixed_zero",), (2,), PhiStatus.SATISFIED_CERTIFIED, Uniqueness.UNIQUE_UP_TO_ORDER),
        description="Euclidean 3-space with a quarter turn about the z axis",
    )


def two_planes() -> CorpusInstance:
    zero = RatMatrix.zeros(2, 2)
    rep = Representation(
        QuadraticSpace.diagonal([1, 1, 1, 1]),
        (
            Generator.infinitesimal(RatMatrix.block_diagonal(J, zero)),
            Generator.infinitesimal(RatMatrix.block_diagonal(zero, J)),
        ),
        "two-planes",
    )
    return CorpusInstance(
        "two-planes",
        rep,
        {"planes": (_coordinates(4, [0, 1]), _coordinates(4, [2, 3]))},
        ExpectedVerdicts(0, 2, 0, ("fixed_zero", "fixed_zero"), (2, 2), PhiStatus.SATISFIED_CERTIFIED, Uniqueness.UNIQUE_UP_TO_ORDER),
        description="Euclidean 4-space rotated independently in two planes",
    )


def wu_plane() -> CorpusInstance:
    rep = Representation(
        QuadraticSpace.diagonal(_neutral_gram(1) + [1, 1]),
        (
            Generator.infinitesimal(RatMatrix.block_diagonal(wu_generator(), RatMatrix.zeros(2, 2))),
            Generator.infinitesimal(RatMatrix.block_diagonal(RatMatrix.zeros(4, 4), J)),
        ),
        "wu-plane",
    )
    return CorpusInstance(
        "wu-plane",
        rep,
        {"blocks": (_coordinates(6, range(4)), _coordinates(6, [4, 5]))},
        ExpectedVerdicts(0, 1, 1, ("fixed_zero", "fixed_isotropic"), (2, 4), PhiStatus.VIOLATED, Uniqueness.UNIQUE_ONE_BAD_FACTOR),
        description="wu-factor next to an irreducible definite rotation plane",
    )


def wu_line() -> CorpusInstance:
    space = QuadraticSpace.diagonal(_neutral_gram(1) + [1])
    rep = Representation(
        space,
        (Generator.infinitesimal(RatMatrix.block_diagonal(wu_generator(), RatMatrix.zeros(1, 1))),),
        "wu-line",
    )
    line = _coordinates(5, [4])
    shifted = _span(5, (1, 0, 1, 0, 1))
    return CorpusInstance(
        "wu-line",
        rep,
        {
            "line": (line, orth_complement(space, line)),
            "shifted-line": (shifted, orth_complement(space, shifted)),
        },
        ExpectedVerdicts(1, 0, 1, ("fixed_isotropic",), (4,), PhiStatus.VIOLATED, Uniqueness.UNIQUE_ONE_BAD_FACTOR),
        description="wu-factor next to a definite line with trivial action; two choices of flat part",
    )


def hyperbolic_trivial() -> CorpusInstance:
    rep = Representation(QuadraticSpace(RatMatrix([[0, 1], [1, 0]])), (), "hyperbolic-trivial")
    return CorpusInstance(
        "hyperbolic-trivial",
        rep,
        {"whole": (Subspace.full(2),)},
        ExpectedVerdicts(2, 0, 0, (), (), PhiStatus.SATISFIED_CERTIFIED, Uniqueness.UNIQUE_UP_TO_ORDER),
        description="hyperbolic plane without generators; everything is flat",
    )


def lorentz_null() -> CorpusInstance:
    gram = RatMatrix([[0, 0, 1], [0, 1, 0], [1, 0, 0]])
    null_rotation = RatMatrix([[0, 1, 0], [0, 0, -1], [0, 0, 0]])
    rep = Representation(QuadraticSpace(gram), (Generator.infinitesimal(null_rotation),), "lorentz-null")
    return CorpusInstance(
        "lorentz-null",
        rep,
        {"whole": (Subspace.full(3),)},
        ExpectedVerdicts(0, 0, 1, ("fixed_isotropic",), (3,), PhiStatus.SATISFIED_CERTIFIED, Uniqueness.UNIQUE_UP_TO_ORDER),
        description="Lorentzian 3-space with a null rotation fixing an isotropic line",
    )


_BUILDERS = {
    "wu-factor": wu_factor,
    "wu-product": wu_product,
    "rotation-z": rotation_z,
    "two-planes": two_planes,
    "wu-plane": wu_plane,
    "wu-line": wu_line,
    "hyperbolic-trivial": hyperbolic_trivial,
    "lorentz-null": lorentz_null,
}


def instance_names() -> List[str]:
    return list(_BUILDERS)


def get_instance(name: str) -> CorpusInstance:
    builder = _BUILDERS.get(name)
    if builder is None:
        raise UnknownReference(f"unknown instance '{name}'", detail=f"known: {', '.join(_BUILDERS)}")
    return builder()


def all_instances() -> List[CorpusInstance]:
    return [builder() for builder in _BUILDERS.values()]


def phi_suite() -> List[CorpusInstance]:
    """Instances covering each uniqueness branch apart from the two-bad-summand one."""
    return [get_instance(name) for name in ("rotation-z", "two-planes", "wu-plane", "wu-line", "hyperbolic-trivial", "lorentz-null")]


def summarize(instance: CorpusInstance, seed: int = 0) -> Dict[str, Any]:
    """Computed verdicts of an instance in the shape of the golden expectations."""
    report: DecompositionReport = decompose(instance.rep, seed=seed)
    phi = phi_check(instance.rep, report, seed=seed)
    verdict = uniqueness_verdict(instance.rep, report, phi, seed=seed)
    return {
        "trivial_dim": report.trivial_part.dim,
        "p1": report.p1,
        "p2": report.p2,
        "kinds": [s.kind.value for s in report.summands],
        "dims": [s.dim for s in report.summands],
        "signatures": [list(s.signature) for s in report.summands],
        "fixed_dims": [s.fixed_dim for s in report.summands],
        "phi": phi.status.value,
        "uniqueness": verdict.verdict.value,
    }
