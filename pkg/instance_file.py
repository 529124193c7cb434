import json
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Mapping, Optional, Sequence, Union

from pydantic import AfterValidator, BaseModel, BeforeValidator, Field, ValidationError

from errors import InstanceParseError
from exact_linalg import RatMatrix, Subspace, format_rational, parse_rational
from holonomy_action import Generator, GeneratorKind, Representation
from quadratic_space import QuadraticSpace


def _as_text(value: Any) -> Any:
    # integers are accepted as a shorthand for "n"; floats are not exact
    if isinstance(value, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        raise ValueError(f"floating point value {value!r}; write rationals as \"p/q\" strings")
    return value


def _normalized_rational(text: str) -> str:
    return format_rational(parse_rational(text))


RationalString = Annotated[str, BeforeValidator(_as_text), AfterValidator(_normalized_rational)]
Matrix = List[List[RationalString]]


class GeneratorSpec(BaseModel):
    kind: Literal["group", "infinitesimal"]
    matrix: Matrix


class InstanceFile(BaseModel):
    name: str
    dimension: int = Field(ge=0)
    gram: Matrix
    generators: List[GeneratorSpec] = Field(default_factory=list)
    decompositions: Dict[str, List[Matrix]] = Field(default_factory=dict)

    def representation(self) -> Representation:
        generators = tuple(Generator(GeneratorKind(g.kind), RatMatrix(g.matrix, self.dimension)) for g in self.generators)
        return Representation(QuadraticSpace(RatMatrix(self.gram, self.dimension)), generators, self.name)

    def decomposition(self, name: str) -> List[Subspace]:
        return [Subspace.span(basis, self.dimension) for basis in self.decompositions[name]]


def _check_square(matrix: Matrix, n: int, path: str) -> None:
    if len(matrix) != n:
        raise InstanceParseError(f"expected {n} rows, found {len(matrix)}", field_path=path)
    for i, row in enumerate(matrix):
        if len(row) != n:
            raise InstanceParseError(f"expected {n} entries, found {len(row)}", field_path=f"{path}.{i}")


def _check_shapes(instance: InstanceFile) -> None:
    n = instance.dimension
    _check_square(instance.gram, n, "gram")
    for index, generator in enumerate(instance.generators):
        _check_square(generator.matrix, n, f"generators.{index}.matrix")
    for name, parts in instance.decompositions.items():
        for p, basis in enumerate(parts):
            for r, row in enumerate(basis):
                if len(row) != n:
                    raise InstanceParseError(f"basis vector of length {len(row)} in dimension {n}", field_path=f"decompositions.{name}.{p}.{r}")


def load_instance(source: Union[str, Path, Mapping[str, Any]]) -> InstanceFile:
    """
    Read an instance from a JSON file path or an already decoded dict.

    Raises:
        InstanceParseError: with the JSON line number or the failing field path.
    """
    if isinstance(source, Mapping):
        data = dict(source)
    else:
        # 파일 읽기 실패와 JSON 문법 오류는 모두 파싱 오류로 처리
        path = Path(source)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise InstanceParseError(f"cannot read {path}: {exc.strerror}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InstanceParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc

    # 첫 번째 검증 오류의 필드 경로만 보고
    try:
        instance = InstanceFile.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        field_path = ".".join(str(part) for part in first["loc"])
        raise InstanceParseError(first["msg"], field_path=field_path) from exc
    _check_shapes(instance)
    return instance


def load_representation(source: Union[str, Path, Mapping[str, Any]]) -> Representation:
    return load_instance(source).representation()


def export_instance(
    rep: Representation,
    decompositions: Optional[Mapping[str, Sequence[Subspace]]] = None,
    name: Optional[str] = None,
) -> Dict[str, Any]:
    return {
        "name": name or rep.label or "instance",
        "dimension": rep.dim,
        "gram": rep.space.gram.to_strings(),
        "generators": [{"kind": g.kind.value, "matrix": g.matrix.to_strings()} for g in rep.generators],
        "decompositions": {key: [s.to_strings() for s in parts] for key, parts in (decompositions or {}).items()},
    }


def dump_instance(data: Mapping[str, Any], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    return path
