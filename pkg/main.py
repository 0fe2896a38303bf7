"""
Backend API for hyperstab
Serves subdivisions, degenerations, strata and homology checks over HTTP
"""

import logging
from typing import Any, Dict, List, Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from config import get_run_config
from exact_geom import (
    CapExceededError,
    DegenerateFamilyError,
    DomainMismatchError,
    NotMatroidError,
    ParameterError,
    StructuralError,
    coherence_certificate,
    lower_envelope_subdivision,
)
from hypersimplex import (
    FacetLabel,
    hypersimplex_vertices,
    is_matroid_subdivision,
    matroid_subdivision_witness,
    restrict_to_facet,
)
from degeneration import general_position_check, valuation_lifting
from stable_pair import strata_poset
from homology_lab import canonical_basis_kernel, cohomology_dims, euler_characteristic, strata_cochain_complex
from file_formats import (
    MatrixFile,
    SubdivisionFile,
    WeightsFile,
    lifting_from_file,
    matrix_from_file,
    rational_str,
    subdivision_from_file,
    subdivision_to_file,
    weights_to_file,
)

# Set up logging
logging.basicConfig(level=get_run_config().log_level)
logger = logging.getLogger(__name__)

INPUT_ERRORS = (
    DomainMismatchError,
    StructuralError,
    ParameterError,
    CapExceededError,
    DegenerateFamilyError,
    NotMatroidError,
)

# Initialize FastAPI app
app = FastAPI(title="hyperstab API", version="1.0.0")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)


class MatroidVerdict(BaseModel):
    matroid: bool
    cell: Optional[List[List[int]]] = None
    witness: Optional[List[List[int]]] = None


class FromMatrixResponse(BaseModel):
    lifting: WeightsFile
    subdivision: SubdivisionFile
    matroid: bool
    general_position: bool


class CoherenceResponse(BaseModel):
    feasible: bool
    margin: str
    constraints: int
    certificate: Optional[Dict[str, str]] = None


class StratumModel(BaseModel):
    vertices: List[List[int]]
    stratum_dim: int
    divisor_labels: List[int]


class StrataResponse(BaseModel):
    k: int
    n: int
    strata: List[StratumModel]
    covering: List[List[int]]


class RestrictRequest(BaseModel):
    subdivision: SubdivisionFile
    facet: str


class RestrictResponse(BaseModel):
    facet: str
    degenerate: bool
    subdivision: Optional[SubdivisionFile] = None


class HomologyResponse(BaseModel):
    sizes: List[int]
    cohomology: List[int]
    euler: int
    vanishing: bool


class CanonicalDimResponse(BaseModel):
    k: int
    n: int
    dimension: int
    expected: int
    coincides: bool


def _failed(action: str, e: Exception):
    """Map library errors onto HTTP errors: bad input 400, anything else 500"""
    if isinstance(e, HTTPException):
        raise e
    if isinstance(e, INPUT_ERRORS):
        logger.warning(f"⚠️ {action} rejected: {e}")
        detail: Any = str(e)
        if isinstance(e, NotMatroidError) and e.witness:
            detail = {"message": str(e), "witness": [list(x) for x in e.witness]}
        raise HTTPException(status_code=400, detail=detail)
    logger.error(f"❌ {action} failed: {e}")
    raise HTTPException(status_code=500, detail=f"{action} failed: {str(e)}")


@app.get("/")
async def root():
    return {"message": "hyperstab API", "status": "running"}


@app.get("/health")
async def health_check():
    run = get_run_config()
    return {"status": "healthy", "threads": run.threads, "seed": run.seed}


@app.post("/api/subdivide", response_model=SubdivisionFile)
def subdivide(request: WeightsFile):
    """Lower envelope of a weights file"""
    try:
        cfg = hypersimplex_vertices(request.k, request.n)
        s = lower_envelope_subdivision(cfg, lifting_from_file(request))
        logger.info(f"✅ Δ({request.k},{request.n}) subdivided into {len(s)} cells")
        return subdivision_to_file(s)
    except Exception as e:
        _failed("Subdivision", e)


@app.post("/api/from-matrix", response_model=FromMatrixResponse)
def from_matrix(request: MatrixFile):
    try:
        m = matrix_from_file(request)
        lift = valuation_lifting(m)
        cfg = hypersimplex_vertices(m.k, m.n)
        s = lower_envelope_subdivision(cfg, lift)
        return FromMatrixResponse(
            lifting=weights_to_file(cfg, lift),
            subdivision=subdivision_to_file(s),
            matroid=is_matroid_subdivision(s),
            general_position=general_position_check(m).general,
        )
    except Exception as e:
        _failed("Degeneration", e)


@app.post("/api/check-matroid", response_model=MatroidVerdict)
def check_matroid(request: SubdivisionFile):
    try:
        s = subdivision_from_file(request)
        found = matroid_subdivision_witness(s)
        if found is None:
            return MatroidVerdict(matroid=True)
        cell, (a, b) = found
        return MatroidVerdict(
            matroid=False,
            cell=[list(s.config.subsets[v].elements) for v in cell.vertices],
            witness=[list(a.elements), list(b.elements)],
        )
    except Exception as e:
        _failed("Matroid check", e)


@app.post("/api/coherence", response_model=CoherenceResponse)
def coherence(request: SubdivisionFile):
    try:
        s = subdivision_from_file(request)
        result = coherence_certificate(s)
        return CoherenceResponse(
            feasible=result.feasible,
            margin=rational_str(result.margin),
            constraints=result.constraints,
            certificate=weights_to_file(s.config, result.lifting).weights if result.feasible else None,
        )
    except Exception as e:
        _failed("Coherence", e)


@app.post("/api/strata", response_model=StrataResponse)
def strata(request: SubdivisionFile):
    try:
        s = subdivision_from_file(request)
        poset = strata_poset(s)
        return StrataResponse(
            k=poset.k,
            n=poset.n,
            strata=[
                StratumModel(
                    vertices=[list(s.config.subsets[v].elements) for v in stratum.face.vertices],
                    stratum_dim=stratum.stratum_dim,
                    divisor_labels=sorted(stratum.divisor_labels),
                )
                for stratum in poset.strata
            ],
            covering=[list(pair) for pair in poset.covering],
        )
    except Exception as e:
        _failed("Strata", e)


@app.post("/api/restrict", response_model=RestrictResponse)
def restrict(request: RestrictRequest):
    try:
        s = subdivision_from_file(request.subdivision)
        result = restrict_to_facet(s, FacetLabel.parse(request.facet))
        return RestrictResponse(
            facet=str(result.label),
            degenerate=result.degenerate,
            subdivision=None if result.degenerate else subdivision_to_file(result.subdivision),
        )
    except Exception as e:
        _failed("Restriction", e)


@app.post("/api/homology", response_model=HomologyResponse)
def homology(request: SubdivisionFile):
    try:
        complex_ = strata_cochain_complex(subdivision_from_file(request))
        dims = cohomology_dims(complex_)
        return HomologyResponse(
            sizes=complex_.sizes,
            cohomology=dims,
            euler=euler_characteristic(complex_),
            vanishing=dims == [1] + [0] * (len(dims) - 1),
        )
    except Exception as e:
        _failed("Homology", e)


@app.get("/api/canonical-dim", response_model=CanonicalDimResponse)
def canonical_dim(k: int, n: int):
    try:
        kernel = canonical_basis_kernel(k, n)
        return CanonicalDimResponse(
            k=k, n=n, dimension=kernel.dimension, expected=kernel.expected, coincides=kernel.coincides
        )
    except Exception as e:
        _failed("Canonical dimension", e)


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=10000)
