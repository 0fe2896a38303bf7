"""
Exact Geometry Kernel - Rational polyhedral computations on integer point configurations
Lower envelopes, face lattices, secondary cones, coherence certificates and lattice volumes
"""

import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property, lru_cache, reduce
from itertools import combinations
from math import gcd
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_decomp
from sympy.polys.matrices import DomainMatrix
from sympy.solvers.simplex import InfeasibleLPError, UnboundedLPError, linprog

logger = logging.getLogger(__name__)

Vector = Tuple[int, ...]
VertexSet = FrozenSet[int]


class HyperstabError(Exception):
    """Base class for every error raised by hyperstab"""


class DomainMismatchError(HyperstabError):
    """A lifting or point does not live on the configuration it is used with"""


class StructuralError(HyperstabError):
    """Candidate cells do not form a polyhedral subdivision"""


class ParameterError(HyperstabError):
    """Invalid numeric parameters or labels"""


class NotMatroidError(HyperstabError):
    """A stable-pair operation was given a subdivision with a non-matroid cell"""

    def __init__(self, message: str, witness: Optional[Tuple] = None):
        super().__init__(message)
        self.witness = witness


class DegenerateFamilyError(HyperstabError):
    """A Plücker minor of a one-parameter family vanishes identically"""

    def __init__(self, message: str, subset=None):
        super().__init__(message)
        self.subset = subset


class CapExceededError(HyperstabError):
    """Enumeration request is larger than the configured caps"""


class GermSearchBoundError(HyperstabError):
    """Canonical germ search would leave its exhaustive bounds"""


class InternalConsistencyError(HyperstabError):
    """An exact identity that must hold failed"""


def to_fraction(value) -> Fraction:
    """Convert ints, strings, Fractions and sympy/gmpy rationals to Fraction"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    if hasattr(value, "p") and hasattr(value, "q"):
        return Fraction(int(value.p), int(value.q))
    if hasattr(value, "numerator") and hasattr(value, "denominator"):
        return Fraction(int(value.numerator), int(value.denominator))
    raise ParameterError(f"not an exact rational: {value!r}")


def _primitive(vector: Iterable) -> Vector:
    entries = tuple(int(x) for x in vector)
    divisor = 0
    for x in entries:
        divisor = gcd(divisor, x)
    if divisor > 1:
        return tuple(x // divisor for x in entries)
    return entries


def _neg(vector: Sequence) -> tuple:
    return tuple(-x for x in vector)


def _combine(a: Sequence, ca, b: Sequence, cb) -> tuple:
    return tuple(ca * x + cb * y for x, y in zip(a, b))


def _dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def _proportional(a: Sequence[int], b: Sequence[int]) -> bool:
    pivot = next(j for j, x in enumerate(b) if x)
    return all(a[i] * b[pivot] == a[pivot] * b[i] for i in range(len(a)))


@dataclass(frozen=True)
class PointConfig:
    """Ordered list of distinct integer points"""
    points: Tuple[Vector, ...]

    def __post_init__(self):
        if not self.points:
            raise ParameterError("point configuration is empty")
        if len({len(p) for p in self.points}) != 1:
            raise ParameterError("points have different ambient dimensions")
        if len(set(self.points)) != len(self.points):
            raise ParameterError("points of a configuration must be distinct")

    @classmethod
    def of(cls, points: Iterable[Iterable[int]]) -> "PointConfig":
        return cls(tuple(tuple(int(x) for x in p) for p in points))

    @property
    def ambient_dim(self) -> int:
        return len(self.points[0])

    @property
    def affine_dim(self) -> int:
        return geometry(self).affine_dim(range(len(self.points)))

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class Lifting:
    """Rational height for every point of a configuration"""
    values: Tuple[Fraction, ...]

    @classmethod
    def of(cls, values: Iterable) -> "Lifting":
        return cls(tuple(to_fraction(v) for v in values))

    def __len__(self) -> int:
        return len(self.values)

    def __add__(self, other: "Lifting") -> "Lifting":
        if len(other.values) != len(self.values):
            raise DomainMismatchError("cannot add liftings of different lengths")
        return Lifting(tuple(a + b for a, b in zip(self.values, other.values)))

    def scaled(self, factor) -> "Lifting":
        factor = to_fraction(factor)
        return Lifting(tuple(v * factor for v in self.values))

    def plus_affine(self, config: PointConfig, constant, linear: Sequence) -> "Lifting":
        """Add the affine function constant + <linear, p> evaluated at every point"""
        constant = to_fraction(constant)
        linear = [to_fraction(x) for x in linear]
        return Lifting(tuple(
            v + constant + _dot(linear, p) for v, p in zip(self.values, config.points)
        ))


@dataclass(frozen=True, order=True)
class Cell:
    """Polytope given by the indices of the configuration points it contains"""
    vertices: Tuple[int, ...]
    affine_dim: int

    @property
    def vertex_set(self) -> VertexSet:
        return frozenset(self.vertices)

    def __contains__(self, index: int) -> bool:
        return index in self.vertices


@dataclass(frozen=True)
class Subdivision:
    """Maximal cells of a polyhedral subdivision of a configuration"""
    config: PointConfig
    maximal_cells: Tuple[Cell, ...]

    @property
    def key(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(cell.vertices for cell in self.maximal_cells)

    def __len__(self) -> int:
        return len(self.maximal_cells)


@dataclass(frozen=True)
class FacePoset:
    """All faces of a subdivision with their facet covering relation"""
    faces: Tuple[Cell, ...]
    covering_relation: Tuple[Tuple[int, int], ...]

    @cached_property
    def _index(self) -> Dict[VertexSet, int]:
        return {face.vertex_set: i for i, face in enumerate(self.faces)}

    def index_of(self, vertices: Iterable[int]) -> int:
        return self._index[frozenset(vertices)]

    def __contains__(self, vertices) -> bool:
        return frozenset(vertices) in self._index


@dataclass(frozen=True)
class ConeZ:
    """Rational polyhedral cone given by primitive integer generators"""
    generators: Tuple[Vector, ...]

    @property
    def dim(self) -> int:
        if not self.generators:
            return 0
        return DomainMatrix.from_list([list(g) for g in self.generators], ZZ).rank()

    def is_simplicial(self) -> bool:
        return self.dim == len(self.generators)


@dataclass(frozen=True)
class Edge:
    """One-dimensional face with an exact supporting functional"""
    vertices: Tuple[int, int]
    functional: Vector


class ConePosition(str, Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class CoherenceResult:
    """Outcome of the exact coherence linear program"""
    feasible: bool
    lifting: Optional[Lifting]
    margin: Fraction
    constraints: int


class PolyhedralOracle:
    """Memoized exact polyhedral computations on one configuration.

    Points are homogenized as (1, p); affine functions are integer vectors h
    evaluated as <h, (1, p)>. Facets of a point set are found by gift
    wrapping, recursing into ridges, so faces are only ever computed for sets
    that actually occur.
    """

    def __init__(self, config: PointConfig):
        self.config = config
        self.rows: List[Vector] = [(1,) + tuple(p) for p in config.points]
        self.width = len(self.rows[0])
        self.everything: VertexSet = frozenset(range(len(self.rows)))
        self.unit: Vector = (1,) + (0,) * (self.width - 1)
        self._ranks: Dict[VertexSet, int] = {}
        self._facets: Dict[VertexSet, List[Tuple[VertexSet, Vector]]] = {}
        self._faces: Dict[VertexSet, FrozenSet[VertexSet]] = {}
        self._volumes: Dict[VertexSet, int] = {}

    def _matrix(self, indices: Iterable[int], extra: Optional[Sequence[int]] = None) -> DomainMatrix:
        rows = [list(self.rows[i]) for i in sorted(indices)]
        if extra is not None:
            rows.append([int(x) for x in extra])
        return DomainMatrix.from_list(rows, ZZ)

    def rank(self, indices: Iterable[int]) -> int:
        key = frozenset(indices)
        if key not in self._ranks:
            self._ranks[key] = self._matrix(key).rank() if key else 0
        return self._ranks[key]

    def affine_dim(self, indices: Iterable[int]) -> int:
        return self.rank(indices) - 1

    def value(self, functional: Sequence, index: int):
        return _dot(functional, self.rows[index])

    def annihilators(self, indices: Iterable[int]) -> List[Vector]:
        """Integer basis of the affine functions vanishing on the given points"""
        key = frozenset(indices)
        if not key:
            return [tuple(int(i == j) for j in range(self.width)) for i in range(self.width)]
        return [_primitive(v) for v in self._matrix(key).nullspace().to_list()]

    def _nonconstant(self, pts: Sequence[int]) -> Vector:
        for h in self.annihilators([pts[0]]):
            if any(self.value(h, i) for i in pts):
                return h
        raise InternalConsistencyError("point set is a single point")

    def facets(self, indices: Iterable[int]) -> List[Tuple[VertexSet, Vector]]:
        """Facets of conv(points), each with a functional zero on it and positive off it"""
        key = frozenset(indices)
        cached = self._facets.get(key)
        if cached is not None:
            return cached
        dim = self.affine_dim(key)
        if dim <= 0:
            result = []
        elif len(key) == dim + 1:
            result = self._simplex_facets(key)
        elif dim == 1:
            result = self._segment_facets(key)
        else:
            result = self._wrap_facets(key, dim)
        result.sort(key=lambda item: sorted(item[0]))
        self._facets[key] = result
        return result

    def _simplex_facets(self, key: VertexSet) -> List[Tuple[VertexSet, Vector]]:
        result = []
        for v in sorted(key):
            rest = key - {v}
            for h in self.annihilators(rest):
                height = self.value(h, v)
                if height:
                    result.append((rest, h if height > 0 else _neg(h)))
                    break
        return result

    def _segment_facets(self, key: VertexSet) -> List[Tuple[VertexSet, Vector]]:
        pts = sorted(key)
        g = self._nonconstant(pts)
        values = {i: self.value(g, i) for i in pts}
        low, high = min(values.values()), max(values.values())
        lower = frozenset(i for i in pts if values[i] == low)
        upper = frozenset(i for i in pts if values[i] == high)
        return [
            (lower, _primitive(_combine(g, 1, self.unit, -low))),
            (upper, _primitive(_combine(g, -1, self.unit, high))),
        ]

    def _first_facet(self, pts: Sequence[int], dim: int) -> Vector:
        g = self._nonconstant(pts)
        low = min(self.value(g, i) for i in pts)
        h = _combine(g, 1, self.unit, -low)
        while True:
            tight = [i for i in pts if self.value(h, i) == 0]
            if self.rank(tight) == dim:
                return _primitive(h)
            heights = [self.value(h, i) for i in pts]
            for candidate in self.annihilators(tight):
                tilt = [self.value(candidate, i) for i in pts]
                if any(tilt) and not _proportional(tilt, heights):
                    break
            else:
                raise InternalConsistencyError("facet search found no rotation direction")
            if not any(x < 0 for x in tilt):
                candidate, tilt = _neg(candidate), [-x for x in tilt]
            step = min(Fraction(a, -b) for a, b in zip(heights, tilt) if b < 0)
            h = _combine(h, step.denominator, candidate, step.numerator)

    def _wrap_facets(self, key: VertexSet, dim: int) -> List[Tuple[VertexSet, Vector]]:
        pts = sorted(key)
        h = self._first_facet(pts, dim)
        start = frozenset(i for i in pts if self.value(h, i) == 0)
        found: Dict[VertexSet, Vector] = {start: h}
        queue = deque([start])
        while queue:
            facet = queue.popleft()
            normal = found[facet]
            outside = [i for i in pts if i not in facet]
            for _, ridge_normal in self.facets(facet):
                # rotate the supporting hyperplane of `facet` around the ridge until it hits the next point
                alpha = max(
                    Fraction(-self.value(ridge_normal, i), self.value(normal, i)) for i in outside
                )
                g = _primitive(_combine(ridge_normal, alpha.denominator, normal, alpha.numerator))
                neighbour = frozenset(i for i in pts if self.value(g, i) == 0)
                if neighbour not in found:
                    found[neighbour] = g
                    queue.append(neighbour)
        return list(found.items())

    def faces(self, indices: Iterable[int]) -> FrozenSet[VertexSet]:
        """Every nonempty face of conv(points), the set itself included"""
        key = frozenset(indices)
        if key not in self._faces:
            found = {key}
            for facet, _ in self.facets(key):
                found |= self.faces(facet)
            self._faces[key] = frozenset(found)
        return self._faces[key]

    def contains(self, indices: Iterable[int], point: Sequence[int], level: int = 1) -> bool:
        """Whether point / level lies in conv(points)"""
        key = frozenset(indices)
        x = (int(level),) + tuple(int(c) for c in point)
        if self._matrix(key, extra=x).rank() != self.rank(key):
            return False
        return all(_dot(h, x) >= 0 for _, h in self.facets(key))

    def closure(self, indices: Iterable[int]) -> VertexSet:
        """Every configuration point lying in conv(points)"""
        key = frozenset(indices)
        walls = [h for _, h in self.facets(key)]
        full = self.rank(key) == self.rank(self.everything)
        extra = {
            i for i in self.everything - key
            if all(self.value(h, i) >= 0 for h in walls) and (full or self.rank(key | {i}) == self.rank(key))
        }
        return key | extra

    def corners(self, indices: Iterable[int]) -> List[int]:
        """Points of the set that are vertices of its hull"""
        key = frozenset(indices)
        if len(key) == 1:
            return sorted(key)
        walls = [facet for facet, _ in self.facets(key)]
        # a vertex is the only point common to the facets through it
        return [
            i for i in sorted(key)
            if len(reduce(frozenset.__and__, [w for w in walls if i in w], key)) == 1
        ]

    def supporting_functional(self, indices: Iterable[int], face: Iterable[int]) -> Vector:
        """Functional that is zero exactly on `face` and positive on the rest of conv(points)"""
        key, target = frozenset(indices), frozenset(face)
        if target == key:
            return (0,) * self.width
        for facet, h in self.facets(key):
            if target <= facet:
                break
        else:
            raise StructuralError(f"{sorted(target)} is not a face of {sorted(key)}")
        if facet == target:
            return h
        inner = self.supporting_functional(facet, target)
        bounds = [
            Fraction(self.value(h, i), -2 * self.value(inner, i))
            for i in key - facet
            if self.value(inner, i) < 0
        ]
        step = min(bounds + [Fraction(1)])
        return _primitive(_combine(h, step.denominator, inner, step.numerator))

    def placing_triangulation(self, indices: Iterable[int]) -> List[VertexSet]:
        key = frozenset(indices)
        if len(key) == self.affine_dim(key) + 1:
            return [key]
        apex = min(key)
        simplices = []
        for facet, _ in self.facets(key):
            if apex not in facet:
                simplices.extend(simplex | {apex} for simplex in self.placing_triangulation(facet))
        return simplices

    def volume(self, indices: Iterable[int]) -> int:
        """Normalized volume in the lattice of the affine span"""
        key = frozenset(indices)
        if key in self._volumes:
            return self._volumes[key]
        dim = self.affine_dim(key)
        if dim <= 0:
            self._volumes[key] = 1
            return 1
        pts = sorted(key)
        points = self.config.points
        base = points[pts[0]]
        differences = Matrix([[a - b for a, b in zip(points[i], base)] for i in pts[1:]])
        # columns of t beyond the rank give coordinates on the saturated lattice of the span
        _, _, t = smith_normal_decomp(differences, domain=ZZ)
        total = 0
        for simplex in self.placing_triangulation(key):
            corners = sorted(simplex)
            origin = points[corners[0]]
            edges = Matrix([[a - b for a, b in zip(points[i], origin)] for i in corners[1:]])
            coordinates = (edges * t)[:, :dim]
            total += abs(int(coordinates.det(method="bareiss")))
        self._volumes[key] = total
        return total

    def affine_dependency(self, indices: Iterable[int]) -> Dict[int, int]:
        """Integer coefficients of the unique affine dependency of a minimally dependent set"""
        pts = sorted(indices)
        columns = DomainMatrix.from_list(
            [[self.rows[i][r] for i in pts] for r in range(self.width)], ZZ
        )
        kernel = columns.nullspace().to_list()
        if len(kernel) != 1:
            raise InternalConsistencyError(f"points {pts} do not carry a unique affine dependency")
        return dict(zip(pts, _primitive(kernel[0])))


@lru_cache(maxsize=32)
def geometry(config: PointConfig) -> PolyhedralOracle:
    """Shared oracle for a configuration; its caches only ever hold exact, deterministic values"""
    return PolyhedralOracle(config)


def lifting_from_values(config: PointConfig, values: Sequence) -> Lifting:
    lift = Lifting.of(values)
    _check_lifting(config, lift)
    return lift


def point_in_cell(point: Sequence[int], level: int, cell: Cell, config: PointConfig) -> bool:
    """Exact membership of point / level in a cell"""
    if len(point) != config.ambient_dim:
        raise DomainMismatchError(f"point of length {len(point)} in a {config.ambient_dim}-space")
    return geometry(config).contains(cell.vertices, point, level)


def supporting_functional(face: Cell, cell: Cell, config: PointConfig) -> Vector:
    return geometry(config).supporting_functional(cell.vertices, face.vertices)


def make_cell(config: PointConfig, indices: Iterable[int]) -> Cell:
    key = sorted(set(int(i) for i in indices))
    if not key or key[0] < 0 or key[-1] >= len(config):
        raise DomainMismatchError(f"cell indices {key} out of range for {len(config)} points")
    return Cell(tuple(key), geometry(config).affine_dim(key))


def make_subdivision(config: PointConfig, cells: Iterable[Iterable[int]]) -> Subdivision:
    return Subdivision(config, tuple(sorted(make_cell(config, c) for c in cells)))


def affine_basis(config: PointConfig, indices: Iterable[int]) -> List[int]:
    """Lexicographically first affinely independent spanning subsequence"""
    oracle = geometry(config)
    chosen: List[int] = []
    for i in sorted(indices):
        if oracle.rank(chosen + [i]) > len(chosen):
            chosen.append(i)
    return chosen


def _check_lifting(config: PointConfig, lift: Lifting):
    if len(lift.values) != len(config):
        raise DomainMismatchError(
            f"lifting has {len(lift.values)} values for a configuration of {len(config)} points"
        )


def lower_envelope_subdivision(config: PointConfig, lift: Lifting) -> Subdivision:
    """Regular subdivision induced by lift: projections of the lower facets of the lifted points"""
    _check_lifting(config, lift)
    oracle = geometry(config)
    dim = config.affine_dim
    heights = lift.values
    everything = sorted(oracle.everything)
    if dim == 0:
        return Subdivision(config, (Cell(tuple(everything), 0),))

    def slack(affine, i):
        return heights[i] - oracle.value(affine, i)

    def tight_set(affine) -> VertexSet:
        return frozenset(i for i in everything if slack(affine, i) == 0)

    affine = (min(heights),) + (Fraction(0),) * (oracle.width - 1)
    tight = tight_set(affine)
    while oracle.rank(tight) < dim + 1:
        for h in oracle.annihilators(tight):
            tilt = [oracle.value(h, i) for i in everything]
            if any(tilt):
                break
        if not any(x > 0 for x in tilt):
            h, tilt = _neg(h), [-x for x in tilt]
        step = min(slack(affine, i) / x for i, x in zip(everything, tilt) if x > 0)
        affine = _combine(affine, 1, h, step)
        tight = tight_set(affine)

    cells: Dict[VertexSet, tuple] = {tight: affine}
    queue = deque([tight])
    while queue:
        cell = queue.popleft()
        affine = cells[cell]
        for _, normal in oracle.facets(cell):
            beyond = [(i, oracle.value(normal, i)) for i in everything]
            beyond = [(i, x) for i, x in beyond if x < 0]
            if not beyond:
                continue  # ridge on the boundary of the hull
            step = min(slack(affine, i) / -x for i, x in beyond)
            rotated = _combine(affine, 1, normal, -step)
            neighbour = tight_set(rotated)
            if neighbour not in cells:
                cells[neighbour] = rotated
                queue.append(neighbour)

    # points lifted above the envelope still belong to every cell containing them
    closed = sorted({oracle.closure(c) for c in cells}, key=sorted)
    result = Subdivision(config, tuple(sorted(Cell(tuple(sorted(c)), dim) for c in closed)))
    logger.debug(f"🔍 lower envelope: {len(result.maximal_cells)} cells")
    return result


def polytope_edges(cell: Cell, config: PointConfig) -> List[Edge]:
    """One-dimensional faces of a cell, each with a supporting functional"""
    oracle = geometry(config)
    key = cell.vertex_set
    edges = []
    for face in oracle.faces(key):
        if oracle.affine_dim(face) != 1:
            continue
        ends = sorted(min(end) for end, _ in oracle.facets(face))
        edges.append(Edge((ends[0], ends[-1]), oracle.supporting_functional(key, face)))
    return sorted(edges, key=lambda e: e.vertices)


def faces_of_subdivision(s: Subdivision) -> FacePoset:
    oracle = geometry(s.config)
    found = set()
    for cell in s.maximal_cells:
        found |= oracle.faces(cell.vertex_set)
    ordered = sorted(found, key=lambda f: (oracle.affine_dim(f), sorted(f)))
    index = {face: i for i, face in enumerate(ordered)}
    covering = []
    for face in ordered:
        for facet, _ in oracle.facets(face):
            covering.append((index[face], index[facet]))
    faces = tuple(Cell(tuple(sorted(f)), oracle.affine_dim(f)) for f in ordered)
    return FacePoset(faces, tuple(sorted(covering)))


def boundary_facets(config: PointConfig) -> List[VertexSet]:
    """Vertex sets of the facets of the configuration's hull"""
    oracle = geometry(config)
    return [facet for facet, _ in oracle.facets(oracle.everything)]


def interior_faces(s: Subdivision, poset: Optional[FacePoset] = None) -> List[Cell]:
    """Faces of s not contained in the topological boundary of the hull"""
    poset = poset or faces_of_subdivision(s)
    walls = boundary_facets(s.config)
    return [f for f in poset.faces if not any(f.vertex_set <= wall for wall in walls)]


def refines(fine: Subdivision, coarse: Subdivision) -> bool:
    """Whether every cell of `fine` lies inside some cell of `coarse`"""
    if fine.config != coarse.config:
        raise DomainMismatchError("subdivisions live on different configurations")
    oracle = geometry(fine.config)
    points = fine.config.points
    for cell in fine.maximal_cells:
        if not any(
            cell.vertex_set <= big.vertex_set
            or all(oracle.contains(big.vertices, points[i]) for i in cell.vertices)
            for big in coarse.maximal_cells
        ):
            return False
    return True


def in_secondary_cone(lift: Lifting, s: Subdivision) -> ConePosition:
    induced = lower_envelope_subdivision(s.config, lift)
    if induced.maximal_cells == s.maximal_cells:
        return ConePosition.INTERIOR
    if refines(s, induced):
        return ConePosition.BOUNDARY
    return ConePosition.OUTSIDE


def argmin_face(config: PointConfig, lift: Lifting) -> Cell:
    """Face of the induced subdivision on which the lower envelope attains its minimum"""
    _check_lifting(config, lift)
    low = min(lift.values)
    return make_cell(config, [i for i, v in enumerate(lift.values) if v == low])


def normalized_volume(cell: Cell, config: PointConfig) -> int:
    return geometry(config).volume(cell.vertex_set)


def check_subdivision(s: Subdivision):
    """Raise StructuralError unless the maximal cells form a subdivision of the hull"""
    oracle = geometry(s.config)
    dim = s.config.affine_dim
    keys = [cell.vertex_set for cell in s.maximal_cells]
    if not keys:
        raise StructuralError("subdivision has no cells")
    if len(set(keys)) != len(keys):
        raise StructuralError("subdivision lists a cell twice")
    for cell in s.maximal_cells:
        if cell.vertices[0] < 0 or cell.vertices[-1] >= len(s.config):
            raise StructuralError(f"cell {cell.vertices} uses unknown points")
        actual = oracle.affine_dim(cell.vertices)
        if actual != dim:
            raise StructuralError(f"cell {cell.vertices} has dimension {actual}, expected {dim}")
        if cell.affine_dim != actual:
            raise StructuralError(f"cell {cell.vertices} records dimension {cell.affine_dim}")
        missing = sorted(oracle.closure(cell.vertices) - cell.vertex_set)
        if missing:
            raise StructuralError(f"cell {cell.vertices} omits points {missing} lying in its hull")
    for a, b in combinations(keys, 2):
        common = a & b
        if common and (common not in oracle.faces(a) or common not in oracle.faces(b)):
            raise StructuralError(f"cells {sorted(a)} and {sorted(b)} do not meet in a common face")
    covered = sum(oracle.volume(key) for key in keys)
    total = oracle.volume(oracle.everything)
    if covered != total:
        raise StructuralError(f"cell volumes sum to {covered}, hull volume is {total}")


def _strict_row(oracle: PolyhedralOracle, frame: List[int], w: int, size: int) -> List[Fraction]:
    # row of  -(psi(w) - a_frame(w)) + margin <= 0
    dependency = oracle.affine_dependency(frame + [w])
    lead = dependency[w]
    row = [Fraction(0)] * (size + 1)
    for v, coefficient in dependency.items():
        row[v] = -Fraction(coefficient, lead)
    row[size] = Fraction(1)
    return row


def coherence_certificate(candidate: Subdivision) -> CoherenceResult:
    """Exact LP search for a lifting inducing the candidate.

    Heights are affine on every cell and strictly folded across every
    interior ridge; one margin variable carries all strict inequalities and is
    maximized. A positive optimum is verified by recomputing the envelope.
    """
    check_subdivision(candidate)
    config = candidate.config
    oracle = geometry(config)
    size = len(config)
    dim = config.affine_dim
    corners = {cell.vertex_set: oracle.corners(cell.vertices) for cell in candidate.maximal_cells}
    frames = {key: affine_basis(config, c) for key, c in corners.items()}

    rows_ub: List[List[Fraction]] = [[Fraction(0)] * size + [Fraction(1)]]
    rhs_ub: List[Fraction] = [Fraction(1)]
    rows_eq: List[List[Fraction]] = []
    for key, frame in frames.items():
        for u in sorted(set(corners[key]) - set(frame)):
            dependency = oracle.affine_dependency(frame + [u])
            row = [Fraction(0)] * (size + 1)
            for v, coefficient in dependency.items():
                row[v] = Fraction(coefficient)
            rows_eq.append(row)

    for a, b in combinations(frames, 2):
        if oracle.affine_dim(a & b) != dim - 1:
            continue
        for cell, other in ((a, b), (b, a)):
            rows_ub.append(_strict_row(oracle, frames[cell], min(set(corners[other]) - cell), size))
            rhs_ub.append(Fraction(0))

    # non-corner points sit on or above the envelope, without margin
    hull_corners = set().union(*corners.values())
    for v in sorted(oracle.everything - hull_corners):
        host = next(key for key in frames if v in key)
        row = _strict_row(oracle, frames[host], v, size)
        row[size] = Fraction(0)
        rows_ub.append(row)
        rhs_ub.append(Fraction(0))

    for b in affine_basis(config, oracle.everything):
        row = [Fraction(0)] * (size + 1)
        row[b] = Fraction(1)
        rows_eq.append(row)

    objective = [0] * size + [-1]
    bounds = [(None, None)] * (size + 1)
    try:
        optimum, solution = linprog(
            objective, rows_ub, rhs_ub, rows_eq, [0] * len(rows_eq), bounds=bounds
        )
    except (InfeasibleLPError, UnboundedLPError) as e:
        raise InternalConsistencyError(f"coherence LP is malformed: {e}")

    margin = -to_fraction(optimum)
    constraints = len(rows_ub) + len(rows_eq)
    if margin <= 0:
        logger.info(f"⚠️ no strictly convex lifting for {len(candidate)} cells (margin {margin})")
        return CoherenceResult(False, None, margin, constraints)

    lifting = Lifting.of(solution[:size])
    if lower_envelope_subdivision(config, lifting).maximal_cells != candidate.maximal_cells:
        raise InternalConsistencyError("coherence certificate does not reproduce the candidate")
    logger.debug(f"✅ coherence certificate found with margin {margin}")
    return CoherenceResult(True, lifting, margin, constraints)


def affine_circuits(config: PointConfig) -> List[Dict[int, int]]:
    """All minimal affinely dependent subsets with their integer dependencies"""
    oracle = geometry(config)
    dim = config.affine_dim
    independent = {frozenset([i]) for i in oracle.everything}
    circuits = []
    for size in range(2, dim + 3):
        next_independent = set()
        for subset in combinations(sorted(oracle.everything), size):
            key = frozenset(subset)
            if not all(key - {i} in independent for i in key):
                continue
            if oracle.rank(key) == size:
                next_independent.add(key)
            else:
                circuits.append(oracle.affine_dependency(key))
        independent = next_independent
    logger.debug(f"📊 {len(circuits)} affine circuits on {len(config)} points")
    return circuits


def random_lifting(config: PointConfig, rng: np.random.Generator, grid: Sequence[int]) -> Lifting:
    return Lifting.of(int(x) for x in rng.choice(np.asarray(list(grid)), size=len(config)))
