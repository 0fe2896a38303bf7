"""
Stable Pair Combinatorics - Strata, divisors and dual complexes of a matroid subdivision
The combinatorial shadow of a degenerate stable pair (X, D) read off Δ(k,n)
"""

import logging
from dataclasses import dataclass
from functools import reduce
from itertools import combinations
from math import comb
from typing import Dict, FrozenSet, List, Optional, Tuple

import networkx as nx

from exact_geom import (
    Cell,
    FacePoset,
    ParameterError,
    Subdivision,
    faces_of_subdivision,
    geometry,
    interior_faces,
)
from hypersimplex import (
    FacetLabel,
    HypersimplexConfig,
    lattice_points,
    require_hypersimplex,
    require_matroid,
    restrict_to_facet,
)
from homology_lab import reduced_betti_numbers

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Stratum:
    """Face of the subdivision visible in X, with its dimension and divisor labels"""
    face: Cell
    stratum_dim: int
    divisor_labels: FrozenSet[int]


@dataclass(frozen=True)
class StrataPoset:
    """Strata ordered by face containment; covering pairs are (larger, smaller)"""
    k: int
    n: int
    strata: Tuple[Stratum, ...]
    covering: Tuple[Tuple[int, int], ...]

    def of_dim(self, d: int) -> List[Stratum]:
        return [s for s in self.strata if s.stratum_dim == d]

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        for i, stratum in enumerate(self.strata):
            graph.add_node(
                i,
                stratum_dim=stratum.stratum_dim,
                labels=tuple(sorted(stratum.divisor_labels)),
                vertices=stratum.face.vertices,
            )
        graph.add_edges_from(self.covering)
        return graph


def _stratum_of(face: Cell, cfg: HypersimplexConfig) -> Optional[Stratum]:
    subsets = [set(cfg.subsets[v]) for v in face.vertices]
    if set().union(*subsets) != set(range(1, cfg.n + 1)):
        return None  # face lies in some Γ_i^-
    labels = frozenset(reduce(set.intersection, subsets))
    return Stratum(face, face.affine_dim - (cfg.n - cfg.k), labels)


def _poset_from(cfg: HypersimplexConfig, poset: FacePoset, keep=lambda stratum: True) -> StrataPoset:
    index: Dict[int, int] = {}
    strata: List[Stratum] = []
    for i, face in enumerate(poset.faces):
        stratum = _stratum_of(face, cfg)
        if stratum is not None and keep(stratum):
            index[i] = len(strata)
            strata.append(stratum)
    covering = tuple(sorted(
        (index[big], index[small])
        for big, small in poset.covering_relation
        if big in index and small in index
    ))
    return StrataPoset(cfg.k, cfg.n, tuple(strata), covering)


def strata_poset(s: Subdivision) -> StrataPoset:
    cfg = require_matroid(s)
    result = _poset_from(cfg, faces_of_subdivision(s))
    logger.debug(f"📊 {len(result.strata)} strata on {len(s)} components")
    return result


def components(s: Subdivision) -> List[Cell]:
    return list(s.maximal_cells)


def divisor_strata(s: Subdivision, i: int) -> StrataPoset:
    """Strata of the divisor D_i: those whose face lies in Γ_i^+"""
    cfg = require_matroid(s)
    if not 1 <= i <= cfg.n:
        raise ParameterError(f"divisor index {i} outside [1, {cfg.n}]")
    return _poset_from(cfg, faces_of_subdivision(s), keep=lambda stratum: i in stratum.divisor_labels)


def divisor_consistency(s: Subdivision, i: int) -> bool:
    """D_i's strata poset matches the strata poset of the Γ_i^+ restriction"""
    divisor = divisor_strata(s, i).to_networkx()
    restricted = restrict_to_facet(s, FacetLabel.plus(i))
    if restricted.degenerate:
        return divisor.number_of_nodes() == 1
    facet = strata_poset(restricted.subdivision).to_networkx()

    def shifted(labels):
        return tuple(j - 1 if j > i else j for j in labels if j != i)

    for _, data in divisor.nodes(data=True):
        data["relabelled"] = shifted(data["labels"])
    for _, data in facet.nodes(data=True):
        data["relabelled"] = data["labels"]
    return nx.is_isomorphic(
        divisor,
        facet,
        node_match=lambda a, b: a["stratum_dim"] == b["stratum_dim"] and a["relabelled"] == b["relabelled"],
    )


@dataclass(frozen=True)
class ComponentMeeting:
    """Two components and the stratum along which they meet"""
    first: int
    second: int
    face: Cell
    stratum_dim: int


def components_meeting(s: Subdivision) -> List[ComponentMeeting]:
    cfg = require_matroid(s)
    oracle = geometry(cfg)
    cells = s.maximal_cells
    meetings = []
    for a, b in combinations(range(len(cells)), 2):
        common = cells[a].vertex_set & cells[b].vertex_set
        if not common:
            continue
        face = Cell(tuple(sorted(common)), oracle.affine_dim(common))
        stratum = _stratum_of(face, cfg)
        if stratum is not None:
            meetings.append(ComponentMeeting(a, b, face, stratum.stratum_dim))
    return meetings


def component_fingerprint(cell: Cell, cfg: HypersimplexConfig) -> Tuple[int, int, int]:
    """(vertex count, facet count, divisor facet count) of a component"""
    oracle = geometry(cfg)
    facets = [facet for facet, _ in oracle.facets(cell.vertex_set)]
    divisors = sum(
        1 for facet in facets
        if len(frozenset.intersection(*(frozenset(cfg.subsets[v]) for v in facet))) > 0
    )
    return len(cell.vertices), len(facets), divisors


def graded_dimension(k: int, n: int, m: int) -> int:
    """Dimension of the degree-m piece of the semigroup ring of Δ(k,n)"""
    return int(len(lattice_points(k, n, m)))


def face_lattice_count(face: Cell, cfg: HypersimplexConfig, m: int) -> int:
    oracle = geometry(cfg)
    return sum(1 for x in lattice_points(cfg.k, cfg.n, m) if oracle.contains(face.vertices, x, m))


def graded_dimension_from_subdivision(s: Subdivision, m: int) -> int:
    """Alternating count of lattice points of m·F over the interior faces F"""
    cfg = require_hypersimplex(s)
    top = cfg.affine_dim
    return sum(
        (-1) ** (top - face.affine_dim) * face_lattice_count(face, cfg, m)
        for face in interior_faces(s)
    )


@dataclass(frozen=True)
class DualCell:
    """Cell σ_Y of Σ, or σ^∂_Y of ∂Σ when boundary is set"""
    stratum: int
    dim: int
    boundary: bool
    labels: FrozenSet[int]


@dataclass(frozen=True)
class DualComplex:
    """Σ with its boundary subcomplex ∂Σ; incidences are (face, coface) covering pairs"""
    k: int
    n: int
    cells: Tuple[DualCell, ...]
    incidences: Tuple[Tuple[int, int], ...]

    def boundary_cells(self) -> List[DualCell]:
        return [c for c in self.cells if c.boundary]

    def to_networkx(self, boundary_only: bool = False) -> nx.DiGraph:
        graph = nx.DiGraph()
        for i, cell in enumerate(self.cells):
            if cell.boundary or not boundary_only:
                graph.add_node(
                    i, dim=cell.dim, boundary=cell.boundary, labels=tuple(sorted(cell.labels)), stratum=cell.stratum
                )
        graph.add_edges_from((a, b) for a, b in self.incidences if a in graph and b in graph)
        return graph

    def order_complex(self, boundary_only: bool = False) -> List[Tuple[int, ...]]:
        """Chains of the cell poset, the simplices of its barycentric subdivision"""
        closure = nx.transitive_closure_dag(self.to_networkx(boundary_only))
        chains: List[Tuple[int, ...]] = []

        def extend(chain):
            chains.append(chain)
            for nxt in sorted(closure.successors(chain[-1])):
                extend(chain + (nxt,))

        for node in sorted(closure.nodes):
            extend((node,))
        return chains

    def reduced_betti(self, boundary_only: bool = False) -> List[int]:
        return reduced_betti_numbers(self.order_complex(boundary_only))

    def tree(self) -> nx.Graph:
        """For k = 2: components and labelled endpoints joined by the one-cells"""
        if self.k != 2:
            raise ParameterError("the dual tree exists only for k = 2")
        graph = nx.Graph()
        for i, cell in enumerate(self.cells):
            if cell.dim == 0:
                leaf = min(cell.labels) if cell.boundary else None
                graph.add_node(i, leaf=leaf)
        faces: Dict[int, List[int]] = {}
        for a, b in self.incidences:
            faces.setdefault(b, []).append(a)
        for i, cell in enumerate(self.cells):
            if cell.dim == 1:
                ends = faces.get(i, [])
                if len(ends) != 2:
                    raise ParameterError(f"one-cell {i} has {len(ends)} endpoints")
                graph.add_edge(*ends)
        return graph


def dual_complex(s: Subdivision) -> DualComplex:
    poset = strata_poset(s)
    k = poset.k
    cells: List[DualCell] = []
    interior_of: Dict[int, int] = {}
    boundary_of: Dict[int, int] = {}
    for i, stratum in enumerate(poset.strata):
        interior_of[i] = len(cells)
        cells.append(DualCell(i, (k - 1) - stratum.stratum_dim, False, stratum.divisor_labels))
        if stratum.divisor_labels:
            boundary_of[i] = len(cells)
            cells.append(DualCell(i, (k - 2) - stratum.stratum_dim, True, stratum.divisor_labels))
    incidences = set()
    for big, small in poset.covering:
        incidences.add((interior_of[big], interior_of[small]))
        if big in boundary_of and small in boundary_of:
            incidences.add((boundary_of[big], boundary_of[small]))
    for i, j in boundary_of.items():
        incidences.add((j, interior_of[i]))
    return DualComplex(poset.k, poset.n, tuple(cells), tuple(sorted(incidences)))


def tree_splits(tree: nx.Graph) -> FrozenSet[FrozenSet[FrozenSet[int]]]:
    """Leaf bipartitions cut by the internal edges of a labelled tree"""
    leaves = {node: data["leaf"] for node, data in tree.nodes(data=True) if data.get("leaf") is not None}
    splits = set()
    for a, b in tree.edges:
        if a in leaves or b in leaves:
            continue
        pruned = tree.copy()
        pruned.remove_edge(a, b)
        side = frozenset(leaves[v] for v in nx.node_connected_component(pruned, a) if v in leaves)
        other = frozenset(leaves.values()) - side
        splits.add(frozenset([side, other]))
    return frozenset(splits)


def check_dual_tree(dc: DualComplex) -> bool:
    """Σ is a tree whose leaves are exactly the n labelled endpoints"""
    tree = dc.tree()
    if not nx.is_tree(tree):
        return False
    leaves = sorted(data["leaf"] for node, data in tree.nodes(data=True) if tree.degree(node) == 1)
    marked = sorted(data["leaf"] for _, data in tree.nodes(data=True) if data.get("leaf") is not None)
    return leaves == marked == list(range(1, dc.n + 1))


def boundary_label_census(dc: DualComplex) -> Dict[int, int]:
    """Distinct label sets of size j + 1 carried by boundary cells of dimension j"""
    census: Dict[int, int] = {}
    for j in range(dc.k - 1):
        label_sets = {c.labels for c in dc.cells if c.boundary and c.dim == j and len(c.labels) == j + 1}
        census[j] = len(label_sets)
    return census


def check_boundary_skeleton(dc: DualComplex) -> bool:
    """∂Σ carries the (k-2)-skeleton of the (n-1)-simplex"""
    census = boundary_label_census(dc)
    if any(census[j] != comb(dc.n, j + 1) for j in census):
        return False
    betti = dc.reduced_betti(boundary_only=True)
    expected = [0] * len(betti)
    if dc.k - 2 < len(expected):
        expected[dc.k - 2] = comb(dc.n - 1, dc.k - 1)
    return betti == expected


def check_dual_contractible(dc: DualComplex) -> bool:
    return all(b == 0 for b in dc.reduced_betti())
