"""
tnnflag Report Models
=====================
Pydantic models shared by the CLI and the HTTP surface. Matrices and scalars
travel as canonical strings so reports are exact and byte-stable.
"""

import json
from typing import Any, Dict, List, Optional
from pydantic import BaseModel, Field, ConfigDict
from datetime import datetime, timezone
from enum import Enum


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


# ===========================================
# ENUMS
# ===========================================

class CaseStatus(str, Enum):
    """Outcome of one verification case"""
    PASS = "pass"
    FAIL = "fail"
    ERROR = "error"
    SKIPPED = "skipped"


# ===========================================
# SWEEP REPORTS
# ===========================================

class CaseResult(BaseModel):
    """
    One verification case.

    Example:
        {"key": "n4.k2.u3412.v1324.w3412", "n": 4, "k": 2, "u": "[1,4,2,3]",
         "v": "[1,3,2,4]", "w": "[3,4,1,2]", "status": "pass", "millis": 3.1}
    """
    key: str = Field(..., description="Canonical sort key of the case")
    n: int = Field(..., ge=1)
    k: int = Field(..., ge=0)
    u: Optional[str] = Field(default=None, description="u in one-line notation")
    v: Optional[str] = Field(default=None, description="v in one-line notation")
    w: Optional[str] = Field(default=None, description="w in one-line notation")
    status: CaseStatus
    millis: float = Field(default=0.0, ge=0)
    detail: Optional[str] = Field(default=None, description="Failure or error message")
    values: Dict[str, Any] = Field(default={}, description="Raw values recorded by the check")


class RunSummary(BaseModel):
    total: int = 0
    passed: int = 0
    failed: int = 0
    errored: int = 0
    skipped: int = 0


class RunReport(BaseModel):
    """
    Result of a verification sweep.

    Cases are kept sorted by key, so two runs with the same parameters and
    seed serialize identically once timings are stripped.
    """
    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "command": "verify conjecture",
                "parameters": {"nmax": 3},
                "seed": 0,
                "cases": [],
                "summary": {"total": 0, "passed": 0, "failed": 0, "errored": 0, "skipped": 0},
                "wall_time_ms": 12.0,
                "budget_exhausted": False
            }
        }
    )

    command: str
    parameters: Dict[str, Any] = Field(default={})
    seed: int = 0
    cases: List[CaseResult] = Field(default=[])
    summary: RunSummary = Field(default_factory=RunSummary)
    wall_time_ms: float = Field(default=0.0, ge=0)
    budget_exhausted: bool = False

    @classmethod
    def from_cases(cls, command: str, parameters: Dict[str, Any], seed: int, cases: List[CaseResult],
                   wall_time_ms: float = 0.0, budget_exhausted: bool = False) -> "RunReport":
        ordered = sorted(cases, key=lambda c: c.key)
        summary = RunSummary(
            total=len(ordered),
            passed=sum(c.status == CaseStatus.PASS for c in ordered),
            failed=sum(c.status == CaseStatus.FAIL for c in ordered),
            errored=sum(c.status == CaseStatus.ERROR for c in ordered),
            skipped=sum(c.status == CaseStatus.SKIPPED for c in ordered),
        )
        return cls(command=command, parameters=parameters, seed=seed, cases=ordered, summary=summary,
                   wall_time_ms=wall_time_ms, budget_exhausted=budget_exhausted)

    @property
    def ok(self) -> bool:
        return self.summary.failed == 0 and self.summary.errored == 0

    def to_json(self, include_timings: bool = True) -> str:
        payload = self.model_dump(mode="json")
        if not include_timings:
            payload["wall_time_ms"] = 0.0
            for case in payload["cases"]:
                case["millis"] = 0.0
        return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False)


# ===========================================
# ALGEBRA PAYLOADS
# ===========================================

class MatrixModel(BaseModel):
    """Exact matrix; entries are canonical scalar strings"""
    rows: int = Field(..., ge=0)
    cols: int = Field(..., ge=0)
    entries: List[List[str]]


class LaurentMatrixModel(BaseModel):
    """Loop-group element; each entry maps a z-degree to its coefficient"""
    n: int = Field(..., ge=1)
    entries: List[List[Dict[str, str]]]


# ===========================================
# COMMAND REPORTS
# ===========================================

class PosetElementModel(BaseModel):
    v: str
    w: str
    f: str = Field(..., description="Bounded affine permutation in window notation")
    rank: int


class PosetReport(BaseModel):
    """
    The cell poset Q_J of Gr(k, n) and its analytics.
    Covers are index pairs [lower, upper] into elements.
    """
    n: int
    k: int
    elements: List[PosetElementModel]
    covers: List[List[int]]
    graded: bool
    thin: bool
    eulerian: bool


class CellListReport(BaseModel):
    """Bounded affine permutations of Bound(k, n), sorted by window"""
    n: int
    k: int
    count: int
    cells: List[str]


class NecklaceReport(BaseModel):
    h: str
    n: int
    k: int
    necklace: List[List[int]]


class LeDiagramReport(BaseModel):
    n: int
    k: int
    v: str
    w: str
    shape: List[int]
    dots: List[List[int]] = Field(..., description="Dotted boxes as [row, column], 1-based")
    plus: List[List[int]] = Field(..., description="Boxes of J+ letters")
    ascii: str


class MRReport(BaseModel):
    """Marsh-Rietsch matrix g_{v,w}(t) of a Richardson cell"""
    n: int
    v: str
    w: str
    word: List[int]
    plus_positions: List[int]
    circle_positions: List[int]
    variables: List[str]
    matrix: MatrixModel


class SniderReport(BaseModel):
    """Image of the generic u[k]-echelon point of a cell under the Snider map"""
    n: int
    k: int
    u: str
    g: str
    echelon: MatrixModel
    snider: LaurentMatrixModel
    necklace: List[List[int]]
    truncated_minors: List[str]
    located: Optional[str] = Field(default=None, description="h with y in the affine Schubert cell of h")


class FSReport(BaseModel):
    """Fomin-Shapiro chart of a point near the stratum g"""
    n: int
    k: int
    u: str
    g: str
    cell_point: MatrixModel
    coordinates: Dict[str, str]
    cone_norm: str
    support_ok: bool


# ===========================================
# ERROR MODELS
# ===========================================

class ErrorDetail(BaseModel):
    """Error detail model"""
    code: str = Field(..., description="Error code")
    message: str = Field(..., description="Error message")
    field: Optional[str] = Field(default=None, description="Parameter that caused the error")
    context: Dict[str, Any] = Field(default={}, description="Values attached to the error")


class ErrorResponse(BaseModel):
    """
    Standard error response of the HTTP surface.
    """
    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "error": True,
                "status_code": 422,
                "message": "Invalid input",
                "details": [
                    {
                        "code": "INVALID_INPUT",
                        "message": "not a permutation: [1,1,2]",
                        "field": "v",
                        "context": {}
                    }
                ],
                "request_id": "req_abc123",
                "timestamp": "2026-01-15T10:30:00Z"
            }
        }
    )

    error: bool = Field(default=True)
    status_code: int = Field(..., description="HTTP status code")
    message: str = Field(..., description="Human-readable error message")
    details: List[ErrorDetail] = Field(default=[], description="Detailed error information")
    request_id: Optional[str] = Field(default=None, description="Request ID for tracking")
    timestamp: datetime = Field(default_factory=_utcnow)
