from __future__ import annotations
from typing import Any, Dict, List, Optional
from pydantic import BaseModel, ConfigDict, Field, model_validator

SCHEMA_VERSION = 1


class Payload(BaseModel):
    """Versioned JSON artifact; dumped by alias so the version key reads `schema`."""
    model_config = ConfigDict(populate_by_name=True)
    schema_version: int = Field(default=SCHEMA_VERSION, alias="schema")


class CoefficientsDTO(Payload):
    coefficients: str = Field(..., description="Literal k:a_k,k:a_k")
    entries: Dict[str, int]


class CongruenceDTO(Payload):
    index: List[int]
    ok: bool
    n: Optional[int] = None
    residue: Optional[int] = None


class IndexRowDTO(BaseModel):
    n: int
    numeric: int
    combinatorial: int
    target: int
    agree: bool
    samples: int
    depth: int
    curve: Optional[List[List[float]]] = Field(default=None, description="(θ, v_x, v_y) samples")


class IndexReportDTO(Payload):
    coefficients: str
    N: int
    agree: bool
    rows: List[IndexRowDTO]


class WordCheckDTO(BaseModel):
    check: str
    n_max: int
    ok: bool
    n: Optional[int] = None
    word: Optional[str] = None
    position: Optional[int] = None


class WordsReportDTO(Payload):
    checks: List[WordCheckDTO]


class StreamsDTO(Payload):
    n_max: int
    streams: Dict[str, List[str]] = Field(..., description="n -> generators of A in rotation order")


class SeparationRowDTO(BaseModel):
    beta: str
    period: int
    floor: Optional[str] = None
    flagged: bool
    distances: List[Optional[float]]


class EscapeReportDTO(BaseModel):
    samples: int
    steps: int
    band: float
    escaped_up: int
    escaped_down: int
    escaped_fraction: float
    min_fraction: float
    ok: bool
    suspects: List[List[float]]


class SeparationReportDTO(Payload):
    n_max: int
    probe_period: int
    ok: bool
    rows: List[SeparationRowDTO]
    escape: Optional[EscapeReportDTO] = None


class MapDumpDTO(Payload):
    coefficients: str
    lambda_: Dict[str, List[str]] = Field(..., alias="lambda")
    base_width: str
    width: str
    intervals: List[Dict[str, str]]
    sector_params: Dict[str, Dict[str, Any]]
    pieces: List[Dict[str, Any]]
    kernels: Dict[str, List[str]]


def to_json_dict(model: BaseModel) -> Dict[str, Any]:
    return model.model_dump(mode="json", by_alias=True)


class RunConfig(BaseModel):
    """One CLI run: a command, at most one input form and its bounds."""
    command: str = Field(..., description="realize | validate | invert | words | map-dump | separation")
    coeffs: Optional[str] = Field(default=None, description="Literal k:a_k,k:a_k")
    index: Optional[str] = Field(default=None, description="Literal i1,i2,...")
    max_n: Optional[int] = Field(default=None, ge=1)
    samples: Optional[int] = Field(default=None, ge=1)
    max_depth: Optional[int] = Field(default=None, ge=0)
    n_jobs: Optional[int] = None
    seed: Optional[int] = None
    out: Optional[str] = None
    dump_curve: bool = False
    log_level: Optional[str] = None

    check: str = "all"
    n_max: int = Field(default=64, ge=1)
    conjugates: Optional[str] = None
    prefix: Optional[int] = Field(default=None, ge=1)
    dump_a: Optional[int] = Field(default=None, ge=1)
    source: Optional[str] = None
    probe_period: int = Field(default=3, ge=0)

    @model_validator(mode="after")
    def one_input_form(self) -> "RunConfig":
        if self.coeffs is not None and self.index is not None:
            raise ValueError("give either coefficients or an index sequence, not both")
        return self
