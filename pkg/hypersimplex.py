"""
Hypersimplex - Δ(k,n), its facets and the matroid subdivision criterion
Vertex indexing, facet restriction, duality and split liftings
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from exact_geom import (
    Cell,
    DomainMismatchError,
    InternalConsistencyError,
    Lifting,
    NotMatroidError,
    ParameterError,
    PointConfig,
    Subdivision,
    geometry,
    make_cell,
    make_subdivision,
    polytope_edges,
    to_fraction,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class KSubset:
    """Strictly increasing 1-based subset of [n]"""
    elements: Tuple[int, ...]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.elements, self.elements[1:])):
            raise ParameterError(f"subset {self.elements} is not strictly increasing")

    @classmethod
    def of(cls, elements: Iterable[int]) -> "KSubset":
        items = [int(x) for x in elements]
        if len(set(items)) != len(items):
            raise ParameterError(f"subset {items} repeats an element")
        return cls(tuple(sorted(items)))

    @classmethod
    def parse(cls, text: str) -> "KSubset":
        """Read the "i1,i2,...,ik" form used by weights files"""
        text = text.strip()
        if not text:
            return cls(())
        try:
            return cls.of(int(part) for part in text.split(","))
        except ValueError:
            raise ParameterError(f"malformed subset label {text!r}")

    @property
    def label(self) -> str:
        return ",".join(str(x) for x in self.elements)

    def complement(self, n: int) -> "KSubset":
        return KSubset(tuple(i for i in range(1, n + 1) if i not in self.elements))

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, i: int) -> bool:
        return i in self.elements

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class HypersimplexConfig(PointConfig):
    """Indicator vectors of the k-subsets of [n] in lexicographic order"""
    k: int
    n: int
    subsets: Tuple[KSubset, ...]

    @cached_property
    def _positions(self) -> Dict[KSubset, int]:
        return {subset: i for i, subset in enumerate(self.subsets)}

    def index_of(self, subset) -> int:
        key = subset if isinstance(subset, KSubset) else KSubset.of(subset)
        try:
            return self._positions[key]
        except KeyError:
            raise DomainMismatchError(f"{key.elements} is not a vertex of Δ({self.k},{self.n})")

    def subset_of(self, index: int) -> KSubset:
        return self.subsets[index]

    @property
    def name(self) -> str:
        return f"Δ({self.k},{self.n})"


@lru_cache(maxsize=None)
def _build_config(k: int, n: int) -> HypersimplexConfig:
    subsets = tuple(KSubset(c) for c in combinations(range(1, n + 1), k))
    points = tuple(tuple(int(i in s) for i in range(1, n + 1)) for s in subsets)
    return HypersimplexConfig(points, k, n, subsets)


def hypersimplex_vertices(k: int, n: int) -> HypersimplexConfig:
    if not (n > k >= 1):
        raise ParameterError(f"hypersimplex needs n > k >= 1, got k={k}, n={n}")
    return _build_config(k, n)


def require_hypersimplex(s: Subdivision) -> HypersimplexConfig:
    if not isinstance(s.config, HypersimplexConfig):
        raise DomainMismatchError("subdivision is not over a hypersimplex")
    return s.config


class FacetSign(str, Enum):
    PLUS = "+"
    MINUS = "-"


@dataclass(frozen=True)
class FacetLabel:
    """Facet Γ_i^+ = {x_i = 1} or Γ_i^- = {x_i = 0} of Δ(k,n)"""
    sign: FacetSign
    i: int

    @classmethod
    def plus(cls, i: int) -> "FacetLabel":
        return cls(FacetSign.PLUS, i)

    @classmethod
    def minus(cls, i: int) -> "FacetLabel":
        return cls(FacetSign.MINUS, i)

    @classmethod
    def parse(cls, text: str) -> "FacetLabel":
        text = text.strip()
        if len(text) < 2 or text[0] not in "+-" or not text[1:].isdigit():
            raise ParameterError(f"facet label must look like +i or -i, got {text!r}")
        return cls(FacetSign(text[0]), int(text[1:]))

    def __str__(self) -> str:
        return f"{self.sign.value}{self.i}"


def _check_label(cfg: HypersimplexConfig, f: FacetLabel):
    if not 1 <= f.i <= cfg.n:
        raise ParameterError(f"facet index {f.i} outside [1, {cfg.n}]")


def facet_vertex_set(cfg: HypersimplexConfig, f: FacetLabel) -> Cell:
    _check_label(cfg, f)
    inside = f.sign is FacetSign.PLUS
    return make_cell(cfg, [j for j, s in enumerate(cfg.subsets) if (f.i in s) == inside])


def cell_subsets(cell: Cell, cfg: HypersimplexConfig) -> List[KSubset]:
    return [cfg.subsets[i] for i in cell.vertices]


def _is_root_direction(a: Tuple[int, ...], b: Tuple[int, ...]) -> bool:
    diff = [x - y for x, y in zip(a, b)]
    nonzero = sorted(x for x in diff if x)
    return nonzero == [-1, 1]


def matroid_witness(cell: Cell, cfg: HypersimplexConfig) -> Optional[Tuple[KSubset, KSubset]]:
    """First edge of the cell not parallel to some e_i - e_j, or None"""
    for edge in polytope_edges(cell, cfg):
        a, b = edge.vertices
        if not _is_root_direction(cfg.points[a], cfg.points[b]):
            return cfg.subsets[a], cfg.subsets[b]
    return None


def is_matroid_polytope(cell: Cell, cfg: HypersimplexConfig) -> bool:
    return matroid_witness(cell, cfg) is None


def matroid_subdivision_witness(s: Subdivision) -> Optional[Tuple[Cell, Tuple[KSubset, KSubset]]]:
    cfg = require_hypersimplex(s)
    for cell in s.maximal_cells:
        witness = matroid_witness(cell, cfg)
        if witness is not None:
            return cell, witness
    return None


def is_matroid_subdivision(s: Subdivision) -> bool:
    return matroid_subdivision_witness(s) is None


def require_matroid(s: Subdivision) -> HypersimplexConfig:
    """Reject subdivisions with a non-matroid cell, naming the failing edge"""
    cfg = require_hypersimplex(s)
    found = matroid_subdivision_witness(s)
    if found is not None:
        _, (a, b) = found
        raise NotMatroidError(
            f"edge {a.elements}-{b.elements} is not parallel to a root e_i - e_j",
            witness=(a.elements, b.elements),
        )
    return cfg


@dataclass(frozen=True)
class RestrictionResult:
    """Induced subdivision on a facet; degenerate when the facet is a single point"""
    subdivision: Subdivision
    degenerate: bool
    label: FacetLabel


def _relabel(subset: KSubset, f: FacetLabel) -> KSubset:
    kept = [j for j in subset if j != f.i]
    return KSubset(tuple(j - 1 if j > f.i else j for j in kept))


def restrict_to_facet(s: Subdivision, f: FacetLabel) -> RestrictionResult:
    cfg = require_hypersimplex(s)
    _check_label(cfg, f)
    target_k = cfg.k - 1 if f.sign is FacetSign.PLUS else cfg.k
    target = _build_config(target_k, cfg.n - 1)
    if target_k == 0 or target_k == cfg.n - 1:
        logger.debug(f"⚠️ facet {f} of {cfg.name} is a point")
        return RestrictionResult(Subdivision(target, (Cell((0,), 0),)), True, f)

    oracle = geometry(cfg)
    facet = facet_vertex_set(cfg, f).vertex_set
    facet_dim = oracle.affine_dim(facet)
    pieces = set()
    for cell in s.maximal_cells:
        common = cell.vertex_set & facet
        if not common or oracle.affine_dim(common) != facet_dim:
            continue
        if common not in oracle.faces(cell.vertex_set):
            raise InternalConsistencyError(
                f"cell {cell.vertices} meets facet {f} outside a face"
            )
        pieces.add(frozenset(target.index_of(_relabel(cfg.subsets[v], f)) for v in common))
    return RestrictionResult(make_subdivision(target, pieces), False, f)


def complement_subdivision(s: Subdivision) -> Subdivision:
    """Image under I -> [n] minus I, a subdivision of Δ(n-k,n)"""
    cfg = require_hypersimplex(s)
    dual = hypersimplex_vertices(cfg.n - cfg.k, cfg.n)
    return make_subdivision(dual, (
        [dual.index_of(cfg.subsets[v].complement(cfg.n)) for v in cell.vertices]
        for cell in s.maximal_cells
    ))


def complement_label(f: FacetLabel) -> FacetLabel:
    flipped = FacetSign.MINUS if f.sign is FacetSign.PLUS else FacetSign.PLUS
    return FacetLabel(flipped, f.i)


def subdivision_from_cells(cfg: HypersimplexConfig, cells: Iterable[Iterable[Iterable[int]]]) -> Subdivision:
    return make_subdivision(cfg, ([cfg.index_of(KSubset.of(v)) for v in cell] for cell in cells))


def weight_polytope(support: Iterable[KSubset], cfg: HypersimplexConfig) -> Cell:
    indices = [cfg.index_of(subset) for subset in support]
    if not indices:
        raise ParameterError("weight polytope of an empty support")
    return make_cell(cfg, indices)


def trivial_subdivision(cfg: HypersimplexConfig) -> Subdivision:
    return make_subdivision(cfg, [range(len(cfg.subsets))])


def split_lifting(cfg: HypersimplexConfig, part: Iterable[int], r: int) -> Lifting:
    """Lifting max(0, |I ∩ part| - r), bent along the split hyperplane Σ_{i∈part} x_i = r"""
    chosen = set(part)
    return Lifting.of(max(0, len(chosen.intersection(s)) - r) for s in cfg.subsets)


def lifting_from_weights(cfg: HypersimplexConfig, weights: Dict) -> Lifting:
    values = {}
    for key, value in weights.items():
        subset = key if isinstance(key, KSubset) else KSubset.parse(str(key))
        values[cfg.index_of(subset)] = to_fraction(value)
    missing = [cfg.subsets[i].elements for i in range(len(cfg.subsets)) if i not in values]
    if missing:
        raise DomainMismatchError(f"weights missing for {len(missing)} subsets, first {missing[0]}")
    return Lifting(tuple(values[i] for i in range(len(cfg.subsets))))


def weights_of(cfg: HypersimplexConfig, lift: Lifting) -> Dict[KSubset, object]:
    if len(lift) != len(cfg.subsets):
        raise DomainMismatchError("lifting does not match the hypersimplex")
    return dict(zip(cfg.subsets, lift.values))


def lattice_points(k: int, n: int, m: int) -> np.ndarray:
    """Integer points of m·Δ(k,n): 0 <= x_i <= m with Σ x_i = k·m"""
    if m < 0:
        raise ParameterError(f"level must be non-negative, got {m}")
    grid = np.indices((m + 1,) * n).reshape(n, -1).T
    return grid[grid.sum(axis=1) == k * m]
