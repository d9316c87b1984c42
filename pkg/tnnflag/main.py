"""
tnnflag HTTP API
================
A read-only FastAPI mirror of the command line for small n: cell lists,
the cell poset, necklaces, Le-diagrams, Marsh-Rietsch matrices and Snider
images. Verification sweeps are CLI-only.

- Structured logging with request IDs and timing
- Security headers
- Library errors returned as ErrorResponse bodies
"""

import time
import uuid
from contextlib import asynccontextmanager
from typing import Optional

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
import uvicorn

from tnnflag.config import settings
from tnnflag.errors import InvalidInputError, TnnFlagError
from tnnflag.logger import get_logger, setup_logging
from tnnflag.models import (
    CellListReport, ErrorDetail, ErrorResponse, LeDiagramReport,
    MRReport, NecklaceReport, PosetReport, SniderReport,
)
from tnnflag.positroid import le_report, necklace_report
from tnnflag.reports import cells_report, mr_report, poset_report, snider_report
from tnnflag.weyl import Permutation, parse_affine, parse_permutation

setup_logging()
logger = get_logger(__name__)


# ===========================================
# LIFESPAN MANAGEMENT
# ===========================================

@asynccontextmanager
async def lifespan(app: FastAPI):
    logger.info("Starting tnnflag API server")
    logger.info(f"Environment: {settings.environment}, max n: {settings.api_max_n}")
    yield
    logger.info("Shutting down tnnflag API server")


# ===========================================
# FASTAPI APPLICATION
# ===========================================

app = FastAPI(
    title=settings.app_name,
    version=settings.app_version,
    description="""
## tnnflag API

Exact combinatorics of totally nonnegative Grassmannians.

### Endpoints
- **cells / poset**: Bound(k, n) and the cell poset Q_J
- **necklace / lediagram**: labels of a single cell
- **mr / snider**: Marsh-Rietsch matrices and their loop-group images

Every entry is an exact rational function rendered as a string.
    """,
    openapi_tags=[
        {"name": "Cells", "description": "Cell enumeration and labels"},
        {"name": "Matrices", "description": "Parametrizations and loop-group images"},
        {"name": "Health", "description": "Health check endpoints"},
    ],
    docs_url="/docs",
    redoc_url="/redoc",
    lifespan=lifespan,
)


# ===========================================
# MIDDLEWARE
# ===========================================

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.cors_origins,
    allow_methods=settings.cors_allow_methods,
    allow_headers=settings.cors_allow_headers,
)


@app.middleware("http")
async def request_middleware(request: Request, call_next):
    """Request ID, timing and access logging."""
    request_id = request.headers.get("X-Request-ID", str(uuid.uuid4()))
    request.state.request_id = request_id
    logger.info(f"Incoming request: {request.method} {request.url.path}", extra={"request_id": request_id})
    start_time = time.time()
    try:
        response = await call_next(request)
    except Exception as e:
        duration_ms = (time.time() - start_time) * 1000
        logger.error(f"Request failed: {e}", extra={"request_id": request_id, "duration_ms": duration_ms})
        raise
    duration_ms = (time.time() - start_time) * 1000
    response.headers["X-Request-ID"] = request_id
    response.headers["X-Response-Time-Ms"] = f"{duration_ms:.2f}"
    logger.info(f"Request completed: {response.status_code}",
                extra={"request_id": request_id, "duration_ms": duration_ms})
    return response


@app.middleware("http")
async def security_headers_middleware(request: Request, call_next):
    response = await call_next(request)
    response.headers["X-Content-Type-Options"] = "nosniff"
    response.headers["X-Frame-Options"] = "DENY"
    response.headers["Referrer-Policy"] = "strict-origin-when-cross-origin"
    return response


# ===========================================
# EXCEPTION HANDLERS
# ===========================================

def _error_response(request: Request, status_code: int, message: str, details=None) -> JSONResponse:
    return JSONResponse(
        status_code=status_code,
        content=ErrorResponse(
            status_code=status_code,
            message=message,
            details=details or [],
            request_id=getattr(request.state, "request_id", None),
        ).model_dump(mode="json"),
    )


@app.exception_handler(TnnFlagError)
async def library_exception_handler(request: Request, exc: TnnFlagError):
    """InvalidInputError -> 422, every other library error -> 400."""
    status_code = 422 if isinstance(exc, InvalidInputError) else 400
    detail = ErrorDetail(code=exc.code, message=exc.message, context={k: str(v) for k, v in exc.details.items()})
    logger.info(f"{exc.code}: {exc.message}", extra={"request_id": getattr(request.state, "request_id", None)})
    return _error_response(request, status_code, exc.message, [detail])


@app.exception_handler(HTTPException)
async def http_exception_handler(request: Request, exc: HTTPException):
    return _error_response(request, exc.status_code, str(exc.detail))


@app.exception_handler(Exception)
async def general_exception_handler(request: Request, exc: Exception):
    logger.error(f"Unhandled exception: {exc}",
                 extra={"request_id": getattr(request.state, "request_id", None)}, exc_info=True)
    return _error_response(request, 500, "An internal error occurred.")


# ===========================================
# HELPERS
# ===========================================

def _check_n(n: int) -> None:
    if n > settings.api_max_n:
        raise InvalidInputError(f"n={n} exceeds the API limit {settings.api_max_n}; use the command line")


def _permutation(text: str, n: Optional[int]) -> Permutation:
    p = parse_permutation(text, n)
    _check_n(p.n)
    return p


# ===========================================
# API ENDPOINTS
# ===========================================

@app.get(f"{settings.api_prefix}/cells", response_model=CellListReport, tags=["Cells"],
         summary="List Bound(k, n)")
def cells(n: int = Query(..., ge=2), k: int = Query(..., ge=1)) -> CellListReport:
    _check_n(n)
    return cells_report(k, n)


@app.get(f"{settings.api_prefix}/poset", response_model=PosetReport, tags=["Cells"],
         summary="The cell poset Q_J with its analytics")
def poset(n: int = Query(..., ge=2), k: int = Query(..., ge=1)) -> PosetReport:
    _check_n(n)
    return poset_report(n, k)


@app.get(f"{settings.api_prefix}/necklace", response_model=NecklaceReport, tags=["Cells"],
         summary="Grassmann necklace of a bounded affine permutation")
def necklace(h: str = Query(..., description='Window notation, e.g. "[2,4,5,7]"')) -> NecklaceReport:
    f = parse_affine(h)
    _check_n(f.n)
    return necklace_report(f)


@app.get(f"{settings.api_prefix}/lediagram", response_model=LeDiagramReport, tags=["Cells"],
         summary="Le-diagram of the cell (v, w)")
def lediagram(v: str, w: str, k: int = Query(..., ge=1), n: Optional[int] = None) -> LeDiagramReport:
    v_perm = _permutation(v, n)
    return le_report(v_perm, _permutation(w, n or v_perm.n), k)


@app.get(f"{settings.api_prefix}/mr", response_model=MRReport, tags=["Matrices"],
         summary="Marsh-Rietsch matrix of (v, w)")
def mr(v: str, w: str, n: Optional[int] = None) -> MRReport:
    v_perm = _permutation(v, n)
    return mr_report(v_perm, _permutation(w, n or v_perm.n))


@app.get(f"{settings.api_prefix}/snider", response_model=SniderReport, tags=["Matrices"],
         summary="Snider image of the cell (v, w) in the chart of u")
def snider(u: str, v: str, w: str, k: int = Query(..., ge=1), n: Optional[int] = None) -> SniderReport:
    u_perm = _permutation(u, n)
    return snider_report(u_perm, k, _permutation(v, u_perm.n), _permutation(w, u_perm.n))


@app.get(f"{settings.api_prefix}/health/live", tags=["Health"], summary="Liveness check")
async def liveness():
    return {"status": "alive"}


@app.get("/", tags=["Health"], summary="Service info")
async def root():
    return {
        "name": settings.app_name,
        "version": settings.app_version,
        "status": "online",
        "docs": "/docs",
        "health": f"{settings.api_prefix}/health/live",
    }


# ===========================================
# MAIN ENTRY POINT
# ===========================================

if __name__ == "__main__":
    uvicorn.run(
        "tnnflag.main:app",
        host=settings.api_host,
        port=settings.api_port,
        workers=settings.workers,
        reload=settings.debug,
        log_level=settings.log_level.lower(),
    )
