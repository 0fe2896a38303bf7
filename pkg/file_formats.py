"""
File Formats - JSON schemas and DOT emitters for subdivisions, weights and families
Exact, human-diffable encodings shared by the CLI, the inventory and the HTTP surface
"""

import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Type, TypeVar

from pydantic import BaseModel, Field, field_validator, model_validator

from exact_geom import Lifting, Subdivision, to_fraction
from hypersimplex import (
    HypersimplexConfig,
    KSubset,
    hypersimplex_vertices,
    lifting_from_weights,
    require_hypersimplex,
    subdivision_from_cells,
    weights_of,
)
from degeneration import TMatrix, TPolynomial
from stable_pair import DualComplex, StrataPoset

logger = logging.getLogger(__name__)

Model = TypeVar("Model", bound=BaseModel)


def rational_str(value) -> str:
    """Fraction as "p/q", integers as "p" """
    return str(to_fraction(value))


def _check_shape(k: int, n: int):
    if not n > k >= 1:
        raise ValueError(f"hypersimplex needs n > k >= 1, got k={k}, n={n}")


class SubdivisionFile(BaseModel):
    """subdivision.json: cells as lists of ascending k-subsets"""
    k: int = Field(..., ge=1)
    n: int = Field(..., ge=2)
    cells: List[List[List[int]]]

    @model_validator(mode="after")
    def check_subsets(self):
        _check_shape(self.k, self.n)
        if not self.cells:
            raise ValueError("subdivision has no cells")
        for cell in self.cells:
            if not cell:
                raise ValueError("empty cell")
            for subset in cell:
                if len(subset) != self.k or len(set(subset)) != self.k:
                    raise ValueError(f"{subset} is not a {self.k}-subset")
                if not all(1 <= i <= self.n for i in subset):
                    raise ValueError(f"{subset} is not a subset of [1, {self.n}]")
        return self


class WeightsFile(BaseModel):
    """weights.json: one rational string per k-subset label"""
    k: int = Field(..., ge=1)
    n: int = Field(..., ge=2)
    weights: Dict[str, str]

    @field_validator("weights")
    @classmethod
    def check_rationals(cls, weights: Dict[str, str]) -> Dict[str, str]:
        for label, value in weights.items():
            try:
                Fraction(value)
            except (ValueError, ZeroDivisionError):
                raise ValueError(f"weight of {label} is not a rational: {value!r}")
        return weights

    @model_validator(mode="after")
    def check_shape(self):
        _check_shape(self.k, self.n)
        return self


class MatrixFile(BaseModel):
    """matrix.json: k×n entries, each a coefficient list lowest degree first"""
    k: int = Field(..., ge=1)
    n: int = Field(..., ge=2)
    entries: List[List[List[str]]]

    @model_validator(mode="after")
    def check_entries(self):
        _check_shape(self.k, self.n)
        if len(self.entries) != self.k or any(len(row) != self.n for row in self.entries):
            raise ValueError(f"entries do not form a {self.k}x{self.n} array")
        for row in self.entries:
            for entry in row:
                for c in entry:
                    try:
                        Fraction(c)
                    except (ValueError, ZeroDivisionError):
                        raise ValueError(f"coefficient {c!r} is not a rational")
        return self


class InventoryRecord(BaseModel):
    file: str
    cells: int
    matroid: bool
    certificate: Dict[str, str]


class InventoryIndex(BaseModel):
    """index.json of an inventory directory"""
    k: int
    n: int
    grid: List[int]
    sampled: bool = False
    seed: Optional[int] = None
    entries: List[InventoryRecord]


def subdivision_to_file(s: Subdivision) -> SubdivisionFile:
    cfg = require_hypersimplex(s)
    cells = sorted(
        sorted(list(cfg.subsets[v].elements) for v in cell.vertices)
        for cell in s.maximal_cells
    )
    return SubdivisionFile(k=cfg.k, n=cfg.n, cells=cells)


def subdivision_from_file(model: SubdivisionFile) -> Subdivision:
    return subdivision_from_cells(hypersimplex_vertices(model.k, model.n), model.cells)


def weights_to_file(cfg: HypersimplexConfig, lift: Lifting) -> WeightsFile:
    weights = {subset.label: rational_str(value) for subset, value in weights_of(cfg, lift).items()}
    return WeightsFile(k=cfg.k, n=cfg.n, weights=weights)


def lifting_from_file(model: WeightsFile) -> Lifting:
    return lifting_from_weights(hypersimplex_vertices(model.k, model.n), model.weights)


def matrix_to_file(m: TMatrix) -> MatrixFile:
    entries = [
        [[rational_str(c) for c in (p.coefficients or (0,))] for p in row]
        for row in m.entries
    ]
    return MatrixFile(k=m.k, n=m.n, entries=entries)


def matrix_from_file(model: MatrixFile) -> TMatrix:
    return TMatrix.of(
        [TPolynomial(tuple(Fraction(c) for c in entry)) for entry in row]
        for row in model.entries
    )


def dump_json(payload) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, trailing newline"""
    if isinstance(payload, BaseModel):
        payload = payload.model_dump()
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def load_model(path, model: Type[Model]) -> Model:
    return model.model_validate_json(Path(path).read_text())


def write_model(path, payload):
    Path(path).write_text(dump_json(payload))


def _quote(text: str) -> str:
    return '"' + text.replace('"', '\\"') + '"'


def strata_dot(poset: StrataPoset, cfg: HypersimplexConfig) -> str:
    """Strata poset as DOT: one rank cluster per stratum dimension, labels as attributes"""
    graph = poset.to_networkx()
    nodes = sorted(graph.nodes(data=True))
    lines = [f"digraph strata_{cfg.k}_{cfg.n} {{", "  rankdir=BT;"]
    for dim in sorted({data["stratum_dim"] for _, data in nodes}):
        lines.append(f"  subgraph cluster_dim{dim} {{")
        lines.append(f"    label={_quote(f'dim {dim}')};")
        lines.append("    rank=same;")
        for node, data in nodes:
            if data["stratum_dim"] != dim:
                continue
            vertices = "|".join(cfg.subsets[v].label.replace(",", "") for v in data["vertices"])
            labels = ",".join(map(str, data["labels"]))
            lines.append(
                f"    s{node} [label={_quote(vertices)}, stratum_dim={dim}, divisor_labels={_quote(labels)}];"
            )
        lines.append("  }")
    for big, small in sorted(graph.edges()):
        lines.append(f"  s{small} -> s{big};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def dual_complex_dot(dc: DualComplex) -> str:
    """Σ as DOT, boundary cells of ∂Σ drawn dashed"""
    graph = dc.to_networkx()
    nodes = sorted(graph.nodes(data=True))
    lines = [f"graph dual_{dc.k}_{dc.n} {{"]
    for dim in sorted({data["dim"] for _, data in nodes}):
        lines.append(f"  subgraph cluster_cells{dim} {{")
        lines.append(f"    label={_quote(f'{dim}-cells')};")
        lines.append("    rank=same;")
        for node, data in nodes:
            if data["dim"] != dim:
                continue
            name = f"σ{data['stratum']}"
            labels = ",".join(map(str, data["labels"]))
            style = "dashed" if data["boundary"] else "solid"
            lines.append(
                f"    c{node} [label={_quote(name)}, dim={dim}, "
                f"boundary={str(data['boundary']).lower()}, labels={_quote(labels)}, style={style}];"
            )
        lines.append("  }")
    for face, coface in sorted(graph.edges()):
        lines.append(f"  c{face} -- c{coface};")
    lines.append("}")
    return "\n".join(lines) + "\n"
