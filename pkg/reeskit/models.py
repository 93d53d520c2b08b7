"""Job file and report models."""

from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from reeskit import constants
from reeskit.services.polycore import parse_rational, rational_json

Rational = Union[int, str]

# Verdicts that make a command exit with status 1
NEGATIVE_VERDICTS = frozenset({"violation", "witness", "fail", "mismatch"})


def _canonical(value: Rational) -> Rational:
    return rational_json(parse_rational(value))


def _canonical_vector(values: list[Rational]) -> list[Rational]:
    return [_canonical(v) for v in values]


class RingBlock(BaseModel):
    vars: list[str]
    grading: Optional[list[Union[int, list[int]]]] = None

    @field_validator("vars")
    @classmethod
    def _vars_not_empty(cls, value: list[str]) -> list[str]:
        if not value:
            raise ValueError("ring.vars must declare at least one variable")
        return value

    @field_validator("grading")
    @classmethod
    def _single_grading(
        cls, value: Optional[list[Union[int, list[int]]]]
    ) -> Optional[list[Union[int, list[int]]]]:
        if value is None:
            return None
        flat: list[Union[int, list[int]]] = []
        for entry in value:
            if isinstance(entry, list):
                if len(entry) != 1:
                    raise ValueError(
                        "Multigraded rings (grading vectors with s > 1) are not supported"
                    )
                entry = entry[0]
            if entry <= 0:
                raise ValueError(f"Variable degrees must be positive, got {entry}")
            flat.append(entry)
        return flat


class WindowBlock(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    degree_bound: int = Field(alias="N", ge=0)
    index_window: list[Union[int, list[int]]] = Field(alias="W")

    @field_validator("index_window")
    @classmethod
    def _box_shape(cls, value: list[Union[int, list[int]]]) -> list[Union[int, list[int]]]:
        if len(value) == 2 and all(isinstance(x, int) for x in value):
            return value
        for pair in value:
            if not isinstance(pair, list) or len(pair) != 2:
                raise ValueError("W must be [lo, hi] or a list of [lo, hi] pairs")
        return value


class TableCell(BaseModel):
    n: int = Field(ge=0)
    m: list[int]
    rows: list[list[Rational]]

    @field_validator("rows")
    @classmethod
    def _rational_rows(cls, value: list[list[Rational]]) -> list[list[Rational]]:
        return [_canonical_vector(row) for row in value]


class SubspaceTableBlock(BaseModel):
    ambient_dim: int = Field(ge=0)
    r: int = Field(ge=1)
    degree_bound: int = Field(ge=0)
    cells: list[TableCell] = []


class ToricBlock(BaseModel):
    rays: list[list[Rational]]
    overlattice: Optional[list[list[Rational]]] = None
    divisors: list[list[int]] = []
    alphas: list[list[Rational]] = []
    lambdas: list[Rational] = []
    box: Union[int, list[list[int]]] = 5

    @field_validator("rays", "overlattice", "alphas")
    @classmethod
    def _rational_matrix(
        cls, value: Optional[list[list[Rational]]]
    ) -> Optional[list[list[Rational]]]:
        if value is None:
            return None
        return [_canonical_vector(row) for row in value]

    @field_validator("lambdas")
    @classmethod
    def _rational_levels(cls, value: list[Rational]) -> list[Rational]:
        return _canonical_vector(value)


class JobSpec(BaseModel):
    """A job file; every field has a default so reports can echo the resolved job."""

    model_config = ConfigDict(populate_by_name=True)

    ring: Optional[RingBlock] = None
    relations: list[str] = []
    generators: Optional[list[str]] = None
    order: Literal["grevlex", "lex"] = "grevlex"
    weight: Optional[list[Rational]] = None
    cutters: list[str] = []
    alphas: list[list[Rational]] = []
    window: Optional[WindowBlock] = None
    ord_window: Optional[Union[int, list[int]]] = None
    domain_degree: int = Field(default=constants.DEFAULT_DOMAIN_DEGREE, ge=0)
    multiplicativity_pairs: int = Field(
        default=constants.DEFAULT_MULTIPLICATIVITY_PAIRS, ge=0
    )
    multiplicativity_degree: int = Field(
        default=constants.DEFAULT_MULTIPLICATIVITY_DEGREE, ge=1
    )
    subspace_table: Optional[SubspaceTableBlock] = None
    toric: Optional[ToricBlock] = None
    seed: int = constants.DEFAULT_SEED

    @field_validator("weight")
    @classmethod
    def _rational_weight(cls, value: Optional[list[Rational]]) -> Optional[list[Rational]]:
        return None if value is None else _canonical_vector(value)

    @field_validator("alphas")
    @classmethod
    def _rational_alphas(cls, value: list[list[Rational]]) -> list[list[Rational]]:
        return [_canonical_vector(alpha) for alpha in value]

    def echo(self) -> dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True, exclude_none=True)


class CheckResult(BaseModel):
    """One report line."""

    check: str
    params: dict[str, Any] = {}
    verdict: str
    data: dict[str, Any] = {}
    witness: Optional[Any] = None

    @property
    def negative(self) -> bool:
        return self.verdict in NEGATIVE_VERDICTS


class Report(BaseModel):
    command: str
    lines: list[CheckResult] = []

    def add(self, line: CheckResult) -> CheckResult:
        self.lines.append(line)
        return line

    @property
    def exit_code(self) -> int:
        return 1 if any(line.negative for line in self.lines) else 0

    def render(self) -> str:
        return "".join(
            line.model_dump_json(exclude_none=True) + "\n" for line in self.lines
        )
