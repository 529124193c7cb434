import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import typer
from rich.console import Console
from rich.table import Table

import config
from corpus import CorpusInstance, get_instance, instance_names
from derham_decompose import DecompositionReport, Summand, decompose, report_from_parts, verify_decomposition
from errors import HolonomyError, InstanceParseError, InternalInconsistency, UnknownReference
from exact_linalg import Subspace
from holonomy_action import Representation, duality_holds, fixed_space, moved_span
from instance_file import dump_instance, export_instance, load_instance
from oracle import CrosscheckReport, crosscheck, rational_verdicts
from phi_analysis import PhiVerdict, phi_check
from quadratic_space import is_totally_isotropic, signature
from uniqueness import ComparisonReport, UniquenessResult, compare, uniqueness_verdict

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

console = Console()
error_console = Console(stderr=True)


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------

def load_source(source: str) -> Tuple[str, Representation, Dict[str, List[Subspace]]]:
    """An instance file path, or the name of a built-in instance."""
    # 파일 경로가 우선, 없으면 내장 인스턴스 이름으로 조회
    path = Path(source)
    if path.exists():
        instance = load_instance(path)
        decompositions = {name: instance.decomposition(name) for name in instance.decompositions}
        return instance.name, instance.representation(), decompositions
    if source in instance_names():
        builtin = get_instance(source)
        return builtin.name, builtin.rep, _corpus_decompositions(builtin)
    raise InstanceParseError(f"no instance file or built-in instance named '{source}'")


def _corpus_decompositions(instance: CorpusInstance) -> Dict[str, List[Subspace]]:
    merged = {name: list(parts) for name, parts in instance.known_decompositions.items()}
    merged.update({name: list(parts) for name, parts in instance.printed_decompositions.items()})
    return merged


def _parse_primes(raw: Optional[str]) -> Optional[Tuple[int, ...]]:
    if raw is None:
        return None
    try:
        return tuple(int(part) for part in raw.split(",") if part.strip())
    except ValueError as exc:
        raise InstanceParseError(f"invalid prime list '{raw}'", field_path="--oracle-primes") from exc


# ---------------------------------------------------------------------------
# payloads
# ---------------------------------------------------------------------------

def analysis_payload(rep: Representation) -> Dict[str, Any]:
    fixed, moved = fixed_space(rep), moved_span(rep)
    return {
        "dimension": rep.dim,
        "generators": len(rep.generators),
        "signature": list(signature(rep.space)),
        "fixed_space": fixed.to_strings(),
        "fixed_dim": fixed.dim,
        "fixed_isotropic": is_totally_isotropic(rep.space, fixed),
        "moved_span": moved.to_strings(),
        "moved_dim": moved.dim,
        "duality": duality_holds(rep),
    }


def summand_payload(summand: Summand) -> Dict[str, Any]:
    return {
        "kind": summand.kind.value,
        "dim": summand.dim,
        "basis": summand.subspace.to_strings(),
        "signature": list(summand.signature),
        "fixed_dim": summand.fixed_dim,
        "moved_span": summand.moved_span_local.to_strings(),
        "indecomposability": str(summand.indecomposability),
    }


def report_payload(report: DecompositionReport) -> Dict[str, Any]:
    return {
        "seed": report.seed,
        "p1": report.p1,
        "p2": report.p2,
        "trivial_part": summand_payload(report.trivial_part),
        "summands": [summand_payload(s) for s in report.summands],
        "certificates": [{"method": c.method, "parent_dim": c.parent.dim} for c in report.certificates],
    }


def phi_payload(verdict: PhiVerdict) -> Dict[str, Any]:
    summands = []
    for evidence in verdict.witnesses:
        module = evidence.module
        summands.append({
            "index": evidence.index,
            "neutral": evidence.neutral,
            "verdict": None if module is None else module.verdict.value,
            "method": None if module is None else module.method,
            "review": False if module is None else module.review,
            "witness": None if module is None or module.witness is None else module.witness.to_strings(),
            "parts": None if evidence.parts is None else [s.to_strings() for s in evidence.parts],
            "isotropic_pair": None if evidence.isotropic_pair is None else [s.to_strings() for s in evidence.isotropic_pair],
            "note": evidence.note,
        })
    return {"status": verdict.status.value, "bad_summands": verdict.bad_summands(), "summands": summands}


def comparison_payload(report: ComparisonReport) -> Dict[str, Any]:
    isometry = report.isometry
    return {
        "verdict": report.verdict.value,
        "matching": [list(pair) for pair in report.matching.pairs],
        "matching_failure": report.matching.failure,
        "counts_equal": list(report.counts_equal),
        "dims_equal": list(report.dims_equal),
        "moved_spans_equal": list(report.moved_spans_equal),
        "subspace_identical": list(report.subspace_identical),
        "trivial_identical": report.trivial_identical,
        "factors_equal": list(report.factors_equal),
        "isometry": None if isometry is None else isometry.matrix.to_strings(),
        "isometry_equivariant": None if isometry is None else isometry.equivariant,
        "diagnostics": list(report.diagnostics),
    }


def oracle_payload(report: CrosscheckReport) -> Dict[str, Any]:
    entries = [
        {
            "prime": e.prime,
            "valid": e.valid,
            "reason": e.reason,
            "module_idempotents": e.module_idempotents,
            "selfadjoint_idempotents": e.selfadjoint_idempotents,
            "invariant_subspaces": list(e.invariant_subspaces),
            "nondegenerate_invariant": e.nondegenerate_invariant,
            "agrees": e.agrees,
        }
        for e in report.entries
    ]
    return {
        "primes_used": list(report.primes_used),
        "sound": report.sound,
        "agreement": report.agreement,
        "soundness_violations": list(report.soundness_violations),
        "review_flags": list(report.review_flags),
        "entries": entries,
    }


def uniqueness_payload(result: UniquenessResult) -> Dict[str, Any]:
    return {
        "verdict": result.verdict.value,
        "certified": result.certified,
        "bad_summands": list(result.bad_summands),
        "witness": None if result.witness is None else [s.to_strings() for s in result.witness],
        "note": result.note,
    }


def validity_payload(rep: Representation, parts: Sequence[Subspace], seed: int) -> Dict[str, Any]:
    validity = verify_decomposition(rep, parts, seed=seed)
    return {"ok": validity.ok, "failing": [{"clause": c.name, "detail": c.detail} for c in validity.failing()]}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def envelope(instance: str, command: str, payload: Dict[str, Any]) -> str:
    return json.dumps({"schema": SCHEMA_VERSION, "instance": instance, "command": command, "payload": payload}, indent=2, sort_keys=True)


def _cell(value: Any) -> str:
    if isinstance(value, list) and value and all(isinstance(row, list) for row in value):
        return "\n".join("[" + " ".join(str(v) for v in row) + "]" for row in value)
    return json.dumps(value) if isinstance(value, (dict, list)) else str(value)


def _render_text(instance: str, command: str, payload: Dict[str, Any]) -> None:
    console.rule(f"{command}: {instance}")
    summands = payload.get("summands") if command == "decompose" else None
    scalars = Table(show_header=False, box=None)
    for key, value in payload.items():
        if key in ("summands", "trivial_part") and summands is not None:
            continue
        scalars.add_row(f"[bold]{key}[/bold]", _cell(value))
    console.print(scalars)
    if summands is not None:
        table = Table("kind", "dim", "signature", "fixed", "indecomposable", "basis")
        for summand in [payload["trivial_part"]] + summands:
            table.add_row(
                summand["kind"],
                str(summand["dim"]),
                str(tuple(summand["signature"])),
                str(summand["fixed_dim"]),
                summand["indecomposability"],
                _cell(summand["basis"]),
            )
        console.print(table)


def emit(instance: str, command: str, payload: Dict[str, Any], as_json: bool) -> None:
    if as_json:
        typer.echo(envelope(instance, command, payload))
    else:
        _render_text(instance, command, payload)


def _guarded(action: Callable[[], None]) -> None:
    try:
        action()
    except HolonomyError as exc:
        logger.debug("command failed", exc_info=True)
        error_console.print(f"[red]error:[/red] {exc}")
        raise typer.Exit(code=exc.exit_code)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

JSON_OPTION = typer.Option(False, "--json/--text", help="Machine-readable JSON instead of text.")
SEED_OPTION = typer.Option(config.DEFAULT_SEED, "--seed", help="Seed for every randomized search.")
PRIMES_OPTION = typer.Option(None, "--oracle-primes", help="Comma separated primes for finite-field evidence.")


def analyze(source: str = typer.Argument(..., help="Instance file or built-in name."), as_json: bool = JSON_OPTION):
    """Signature, fixed space, moved span and their duality."""
    def action() -> None:
        name, rep, _ = load_source(source)
        emit(name, "analyze", analysis_payload(rep), as_json)

    _guarded(action)


def decompose_command(source: str = typer.Argument(...), seed: int = SEED_OPTION, as_json: bool = JSON_OPTION):
    """Orthogonal decomposition into indecomposable invariant summands."""
    def action() -> None:
        name, rep, _ = load_source(source)
        emit(name, "decompose", report_payload(decompose(rep, seed=seed)), as_json)

    _guarded(action)


def phi(source: str = typer.Argument(...), seed: int = SEED_OPTION, oracle_primes: Optional[str] = PRIMES_OPTION, as_json: bool = JSON_OPTION):
    """Check that summands with fixed vectors are indecomposable as modules."""
    def action() -> None:
        name, rep, _ = load_source(source)
        report = decompose(rep, seed=seed)
        verdict = phi_check(rep, report, seed=seed, oracle_primes=_parse_primes(oracle_primes))
        payload = phi_payload(verdict)
        payload["uniqueness"] = uniqueness_payload(uniqueness_verdict(rep, report, verdict, seed=seed))
        emit(name, "phi", payload, as_json)

    _guarded(action)


def oracle(source: str = typer.Argument(...), seed: int = SEED_OPTION, oracle_primes: Optional[str] = PRIMES_OPTION, as_json: bool = JSON_OPTION):
    """Cross-check the rational verdicts by exhaustive search modulo small primes."""
    def action() -> None:
        name, rep, _ = load_source(source)
        report = crosscheck(rep, rational_verdicts(rep, seed=seed), primes=_parse_primes(oracle_primes))
        emit(name, "oracle", oracle_payload(report), as_json)
        # 출력은 남기고 종료 코드로 실패 표시
        if not report.sound:
            raise InternalInconsistency("finite-field evidence contradicts a rational witness", detail="; ".join(report.soundness_violations))

    _guarded(action)


def _named_report(rep: Representation, decompositions: Dict[str, List[Subspace]], key: str, seed: int) -> DecompositionReport:
    if key == "computed":
        return decompose(rep, seed=seed)
    if key not in decompositions:
        raise UnknownReference(f"unknown decomposition '{key}'", detail=f"known: {', '.join(['computed'] + list(decompositions))}")
    return report_from_parts(rep, decompositions[key], seed=seed)


def compare_command(
    source: str = typer.Argument(...),
    first: str = typer.Argument(..., help="Decomposition name, or 'computed'."),
    second: str = typer.Argument(..., help="Decomposition name, or 'computed'."),
    seed: int = SEED_OPTION,
    as_json: bool = JSON_OPTION,
):
    """Compare two decompositions and build an isometry between them."""
    def action() -> None:
        name, rep, decompositions = load_source(source)
        a = _named_report(rep, decompositions, first, seed)
        b = _named_report(rep, decompositions, second, seed)
        payload = comparison_payload(compare(rep, a, b))
        payload["decompositions"] = [first, second]
        emit(name, "compare", payload, as_json)

    _guarded(action)


def demo_payload(instance: CorpusInstance, seed: int, primes: Optional[Tuple[int, ...]] = None) -> Dict[str, Any]:
    rep = instance.rep
    report = decompose(rep, seed=seed)
    verdict = phi_check(rep, report, seed=seed, oracle_primes=primes)
    known = list(instance.known_decompositions.values())
    uniqueness = uniqueness_verdict(rep, report, verdict, seed=seed, avoid=known)
    payload: Dict[str, Any] = {
        "description": instance.description,
        "analysis": analysis_payload(rep),
        "decomposition": report_payload(report),
        "phi": phi_payload(verdict),
        "uniqueness": uniqueness_payload(uniqueness),
        "known": {key: validity_payload(rep, parts, seed) for key, parts in instance.known_decompositions.items()},
        "printed": {key: validity_payload(rep, parts, seed) for key, parts in instance.printed_decompositions.items()},
    }
    if len(instance.known_decompositions) >= 2:
        first, second = list(instance.known_decompositions)[:2]
        a = report_from_parts(rep, instance.known_decompositions[first], seed=seed)
        b = report_from_parts(rep, instance.known_decompositions[second], seed=seed)
        payload["comparison"] = {"decompositions": [first, second], **comparison_payload(compare(rep, a, b))}
    return payload


def demo(name: str = typer.Argument(..., help="Built-in instance name."), seed: int = SEED_OPTION, oracle_primes: Optional[str] = PRIMES_OPTION, as_json: bool = JSON_OPTION):
    """Run a built-in instance end to end."""
    def action() -> None:
        instance = get_instance(name)
        emit(instance.name, "demo", demo_payload(instance, seed, _parse_primes(oracle_primes)), as_json)

    _guarded(action)


def export(name: str = typer.Argument(..., help="Built-in instance name."), output: Optional[Path] = typer.Option(None, "--output", "-o")):
    """Write a built-in instance as an instance file."""
    def action() -> None:
        instance = get_instance(name)
        data = export_instance(instance.rep, _corpus_decompositions(instance), instance.name)
        if output is None:
            typer.echo(json.dumps(data, indent=2, sort_keys=True))
        else:
            dump_instance(data, output)
            logger.info("wrote %s to %s", instance.name, output)

    _guarded(action)


def add_commands_to_app(app: typer.Typer) -> None:
    app.command("analyze")(analyze)
    app.command("decompose")(decompose_command)
    app.command("phi")(phi)
    app.command("compare")(compare_command)
    app.command("oracle")(oracle)
    app.command("demo")(demo)
    app.command("export")(export)
