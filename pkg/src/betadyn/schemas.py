"""Request and response models for the HTTP service and the CLI."""

from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class Request(BaseModel):
    model_config = ConfigDict(extra="forbid")


class BetaRequest(Request):
    beta: str = Field(description="dec:<decimal>, poly:<c0,c1,...>@[lo,hi], golden or tribonacci")


class ExpandRequest(BetaRequest):
    x: str
    n: int = Field(ge=0)


class EpsStarRequest(BetaRequest):
    n: int = Field(ge=1)


class AdmissibleRequest(BetaRequest):
    word: str


class EnumerateRequest(BetaRequest):
    n: int = Field(ge=0)
    count_only: bool = False


class BetaNRequest(BetaRequest):
    N: int = Field(ge=1)
    digits: int = 30


class CylinderRequest(BetaRequest):
    word: str
    digits: int = 30
    full_extension: Optional[int] = Field(default=None, ge=0)


class PartitionRequest(BetaRequest):
    n: int = Field(ge=0)
    digits: int = 30


class OrbitRequest(BetaRequest):
    x: str
    n: int = Field(ge=1)
    digits: int = 30


class HitsRequest(BetaRequest):
    x: str
    psi: str
    horizon: int = Field(ge=1)


class UniformRequest(BetaRequest):
    x: str
    psi: str
    n_from: int = Field(default=0, ge=0)
    n_to: int = Field(ge=0)


class ExponentsRequest(Request):
    kind: Literal["periodic", "scheduled", "geometric", "psi_a", "expansion"]
    params: dict[str, str] = Field(default_factory=dict)
    beta: Optional[str] = None
    x: Optional[str] = None
    horizon: int = Field(default=100_000, ge=1)


class PsiExpRequest(Request):
    psi: str
    mode: Literal["exact", "numeric"] = "exact"
    horizon: int = Field(default=10_000, ge=2)
    beta: Optional[str] = None


class ClassifyRequest(Request):
    q: str = Field(description="v1_lo,v1_hi,v2_lo,v2_hi; 'inf' allowed")


class ClassifyUniformRequest(Request):
    v2_lo: str
    v2_hi: str


class BLRequest(Request):
    v: str
    v_hat: str


class SWRequest(Request):
    v: str


class S0Request(Request):
    v: str
    v2_lo: str


class ScheduleRequest(Request):
    v: str
    v_hat: str
    delta: str = "0"
    N: int = Field(default=8, ge=1)
    K: int = Field(default=4, ge=1)


class TemplateRequest(ScheduleRequest):
    beta: str = "dec:2"
    layout: Literal["padded", "claim"] = "padded"


class CantorGenRequest(TemplateRequest):
    depth: int = Field(ge=0)
    cap: int = Field(default=1 << 18, ge=1)
    digits: int = 30


class CantorMeasureRequest(TemplateRequest):
    word: str


class LocalDimRequest(TemplateRequest):
    pass


class BoxcountRequest(TemplateRequest):
    levels: list[int] = Field(default_factory=lambda: [2, 3, 4, 5])
    synthetic: Optional[Literal["middle-thirds", "binary"]] = None


class VerifyRequest(TemplateRequest):
    psi1: str
    psi2: str
    count: int = Field(default=100, ge=0)
    seed: int = 0
    start: int = Field(default=10, ge=0)
    layout: Literal["padded", "claim"] = "claim"


class ExamplesRequest(Request):
    pass


class Result(BaseModel):
    """Payload for JSON output plus a flat table for csv/table output."""

    command: str
    payload: Any
    columns: list[str] = Field(default_factory=list)
    rows: list[list[Any]] = Field(default_factory=list)


class ErrorOut(BaseModel):
    error: str
    message: str
    exit_code: int = 1


class VerdictOut(BaseModel):
    kind: Literal["countable", "empty", "full_dimension", "interval"]
    lower: str
    upper: str
    active_case: str
