"""
Local Germs - Quotient fans of a matroid subdivision around its strata
Canonical germ keys, germ catalogs and the point lemma
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import reduce
from itertools import combinations, permutations
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import hermite_normal_form, smith_normal_decomp
from tqdm import tqdm

from config import get_run_config
from exact_geom import (
    Cell,
    ConeZ,
    DomainMismatchError,
    GermSearchBoundError,
    Subdivision,
    Vector,
    VertexSet,
    _primitive,
    faces_of_subdivision,
    geometry,
)
from hypersimplex import HypersimplexConfig, KSubset, require_matroid
from stable_pair import strata_poset

logger = logging.getLogger(__name__)

MAX_PERMUTED_RAYS = 6


@dataclass(frozen=True)
class Germ:
    """Quotient fan at a face: rays, one cone per maximal cell, divisor-marked cone facets"""
    face: Cell
    vertex: int
    quotient_dim: int
    rays: Tuple[Vector, ...]
    cones: Tuple[FrozenSet[int], ...]
    cone_facets: Tuple[FrozenSet[int], ...]
    marked: Tuple[FrozenSet[int], ...]
    canonical_key: tuple
    kind: str

    def local_cones(self) -> List[ConeZ]:
        return [ConeZ(tuple(self.rays[r] for r in sorted(cone))) for cone in self.cones]


def _quotient_map(cfg: HypersimplexConfig, face: VertexSet, vertex: int):
    """Map v -> coordinates of v - e_I in M / span(face), M = Z^n ∩ {Σx = 0} ≅ Z^(n-1)"""
    points = cfg.points
    base = points[vertex]
    width = cfg.n - 1
    generators = [[a - b for a, b in zip(points[j], base)][:width] for j in sorted(face) if j != vertex]
    rank = geometry(cfg).affine_dim(face)
    if rank == 0:
        transform = Matrix.eye(width)
    else:
        _, _, transform = smith_normal_decomp(Matrix(generators), domain=ZZ)

    def project(j: int) -> Vector:
        row = Matrix([[a - b for a, b in zip(points[j], base)][:width]])
        image = row * transform
        return tuple(int(x) for x in image[rank:])

    return project, width - rank


def _cone_walks(count: int, cones: Sequence[FrozenSet[int]]) -> Optional[List[Tuple[int, ...]]]:
    """Orderings of rays that follow a two-dimensional fan around its path or cycle"""
    graph = nx.Graph()
    graph.add_nodes_from(range(count))
    for cone in cones:
        if len(cone) != 2:
            return None
        graph.add_edge(*sorted(cone))
    if count < 2 or not nx.is_connected(graph) or max(d for _, d in graph.degree) > 2:
        return None
    ends = [v for v, d in graph.degree if d == 1]
    starts = [(v, next(iter(graph[v]))) for v in ends] if ends else [
        (v, w) for v in range(count) for w in graph[v]
    ]
    walks = []
    for start, first in starts:
        order = [start, first]
        while len(order) < count:
            step = [v for v in graph[order[-1]] if v != order[-2]]
            if not step or step[0] == start:
                break
            order.append(step[0])
        walks.append(tuple(order))
    return walks


def _orderings(quotient_dim: int, count: int, cones: Sequence[FrozenSet[int]]) -> Iterable[Tuple[int, ...]]:
    if quotient_dim == 2:
        walks = _cone_walks(count, cones)
        if walks is not None:
            return walks
    if count <= MAX_PERMUTED_RAYS:
        return permutations(range(count))
    raise GermSearchBoundError(f"{count} rays in a {quotient_dim}-dimensional quotient exceed the search bound")


def _canonical_key(quotient_dim: int, rays: Sequence[Vector], cones, marked) -> tuple:
    best = None
    for order in _orderings(quotient_dim, len(rays), cones):
        position = {ray: p for p, ray in enumerate(order)}
        hnf = ()
        if rays and quotient_dim:
            normal = hermite_normal_form(Matrix([list(rays[r]) for r in order]))
            hnf = (normal.shape, tuple(int(x) for x in normal))
        key = (
            quotient_dim,
            len(rays),
            hnf,
            tuple(sorted(tuple(sorted(position[r] for r in cone)) for cone in cones)),
            tuple(sorted(tuple(sorted(position[r] for r in facet)) for facet in marked)),
        )
        if best is None or key < best:
            best = key
    return best


def _kind(quotient_dim: int, rays, cones, marked) -> str:
    if quotient_dim == 0:
        return "smooth"
    if len(cones) == 1:
        cone = ConeZ(tuple(rays[r] for r in sorted(cones[0])))
        unimodular = cone.is_simplicial() and len(cone.generators) == quotient_dim and abs(
            int(Matrix([list(g) for g in cone.generators]).det())
        ) == 1
        if not unimodular:
            return "other"
        if not marked:
            return "smooth"
        return "divisor" if len(marked) == 1 else "normal_crossing"
    if quotient_dim == 1 and len(cones) == 2:
        return "node"
    if len(cones) == 2:
        return "double_curve"
    return "other"


def local_germ(s: Subdivision, face: Cell, vertex: Union[int, KSubset]) -> Germ:
    """Germ of (X, D) along the stratum of face, seen from the vertex e_I of face.

    The anchor is a vertex index or the k-subset I itself.
    """
    cfg = require_matroid(s)
    if isinstance(vertex, KSubset):
        vertex = cfg.index_of(vertex)
    oracle = geometry(cfg)
    gamma = face.vertex_set
    if vertex not in gamma:
        raise DomainMismatchError(f"vertex {vertex} is not in face {face.vertices}")
    hosts = [cell.vertex_set for cell in s.maximal_cells if gamma <= cell.vertex_set]
    if not hosts or not any(gamma in oracle.faces(host) for host in hosts):
        raise DomainMismatchError(f"{face.vertices} is not a face of the subdivision")

    project, quotient_dim = _quotient_map(cfg, gamma, vertex)
    dim = oracle.affine_dim(gamma)
    ray_faces: Dict[VertexSet, Vector] = {}
    for host in hosts:
        for sub in oracle.faces(host):
            if gamma < sub and oracle.affine_dim(sub) == dim + 1 and sub not in ray_faces:
                ray_faces[sub] = _primitive(project(min(sub - gamma)))
    ordered = sorted(ray_faces, key=sorted)
    rays = tuple(ray_faces[f] for f in ordered)

    def rays_in(region: VertexSet) -> FrozenSet[int]:
        return frozenset(r for r, f in enumerate(ordered) if f <= region)

    cones = tuple(sorted((rays_in(host) for host in hosts), key=sorted))
    facet_faces = set()
    for host in hosts:
        top = oracle.affine_dim(host)
        facet_faces |= {
            sub for sub in oracle.faces(host)
            if gamma <= sub and oracle.affine_dim(sub) == top - 1
        }
    cone_facets, marked = [], []
    for sub in sorted(facet_faces, key=sorted):
        rays_of_sub = rays_in(sub)
        cone_facets.append(rays_of_sub)
        if reduce(set.intersection, (set(cfg.subsets[v]) for v in sub)):
            marked.append(rays_of_sub)
    key = _canonical_key(quotient_dim, rays, cones, marked)
    return Germ(
        face, vertex, quotient_dim, rays, cones, tuple(cone_facets), tuple(marked),
        key, _kind(quotient_dim, rays, cones, marked),
    )


def stratum_germs(s: Subdivision) -> List[Germ]:
    """One germ per stratum, anchored at the stratum face's first vertex"""
    return [local_germ(s, stratum.face, stratum.face.vertices[0]) for stratum in strata_poset(s).strata]


@dataclass
class GermClass:
    """Germs sharing a canonical key across a collection of subdivisions"""
    canonical_key: tuple
    kind: str
    multiplicity: int
    representative: Tuple[int, Tuple[int, ...]]


def germ_catalog(subdivisions: Sequence[Subdivision], threads: Optional[int] = None) -> List[GermClass]:
    run = get_run_config()

    def extract(item):
        position, s = item
        return [(position, g) for g in stratum_germs(s)]

    with ThreadPoolExecutor(max_workers=threads or run.threads) as executor:
        batches = list(tqdm(
            executor.map(extract, enumerate(subdivisions)),
            total=len(subdivisions),
            desc="🔍 germs",
            disable=run.quiet,
        ))

    classes: Dict[tuple, GermClass] = {}
    for batch in batches:
        for position, germ in batch:
            witness = (position, germ.face.vertices)
            found = classes.get(germ.canonical_key)
            if found is None:
                classes[germ.canonical_key] = GermClass(germ.canonical_key, germ.kind, 1, witness)
            else:
                found.multiplicity += 1
                found.representative = min(found.representative, witness)
    catalog = sorted(classes.values(), key=lambda c: c.canonical_key)
    logger.info(f"📊 {len(catalog)} germ classes over {len(subdivisions)} subdivisions")
    return catalog


@dataclass
class PointLemmaReport:
    """Outcome of the D_{i_1} ∩ ... ∩ D_{i_(k-1)} checks"""
    checked: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def verify_point_lemma(s: Subdivision) -> PointLemmaReport:
    """Each (k-1)-fold divisor intersection is a point on one component with a simplicial cone"""
    cfg = require_matroid(s)
    poset = faces_of_subdivision(s)
    oracle = geometry(cfg)
    report = PointLemmaReport()
    for chosen in combinations(range(1, cfg.n + 1), cfg.k - 1):
        report.checked += 1
        label = ",".join(map(str, chosen))
        gamma = frozenset(
            cfg.index_of(chosen + (i,)) for i in range(1, cfg.n + 1) if i not in chosen
        )
        if gamma not in poset:
            report.failures.append(f"Γ_{{{label}}} is not a face of the subdivision")
            continue
        stratum_dim = oracle.affine_dim(gamma) - (cfg.n - cfg.k)
        if stratum_dim != 0:
            report.failures.append(f"Γ_{{{label}}} has stratum dimension {stratum_dim}")
        hosts = [cell for cell in s.maximal_cells if gamma <= cell.vertex_set]
        if len(hosts) != 1:
            report.failures.append(f"Γ_{{{label}}} lies in {len(hosts)} components")
            continue
        face = Cell(tuple(sorted(gamma)), oracle.affine_dim(gamma))
        germ = local_germ(s, face, face.vertices[0])
        cone = germ.local_cones()[0]
        if len(cone.generators) != cfg.k - 1 or not cone.is_simplicial():
            report.failures.append(f"Γ_{{{label}}} has a non-simplicial cone with {len(cone.generators)} rays")
    if report.failures:
        logger.warning(f"❌ point lemma: {len(report.failures)} failures, first: {report.failures[0]}")
    return report
