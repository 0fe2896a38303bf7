"""
Homology Lab - Integer cochain complexes over the faces of a subdivision
Vanishing and exactness checks, star-removed complexes and the canonical-basis kernel
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sympy import ZZ
from sympy.polys.matrices import DomainMatrix
from tqdm import tqdm

from config import get_run_config
from exact_geom import (
    DomainMismatchError,
    InternalConsistencyError,
    ParameterError,
    PointConfig,
    Subdivision,
    VertexSet,
    affine_basis,
    geometry,
    interior_faces,
)
from hypersimplex import lattice_points, require_hypersimplex, require_matroid

logger = logging.getLogger(__name__)

FaceKey = Tuple[int, ...]


def rank_of(matrix: np.ndarray) -> int:
    """Exact rank over Q of an integer matrix"""
    if matrix.size == 0:
        return 0
    entries: Dict[int, Dict[int, object]] = {}
    for r, c in zip(*np.nonzero(matrix)):
        entries.setdefault(int(r), {})[int(c)] = ZZ(int(matrix[r, c]))
    if not entries:
        return 0
    return DomainMatrix(entries, matrix.shape, ZZ).rank()


@dataclass(frozen=True)
class CochainComplex:
    """Cochain groups with labelled bases; d^j maps degree j to degree j + 1"""
    bases: Tuple[Tuple[FaceKey, ...], ...]
    differentials: Tuple[np.ndarray, ...]
    start_degree: int = 0

    def __post_init__(self):
        if len(self.differentials) != max(len(self.bases) - 1, 0):
            raise InternalConsistencyError("complex needs one differential between consecutive degrees")
        for j, d in enumerate(self.differentials):
            if d.shape != (len(self.bases[j + 1]), len(self.bases[j])):
                raise InternalConsistencyError(f"differential {j} has shape {d.shape}")

    @property
    def sizes(self) -> List[int]:
        return [len(b) for b in self.bases]

    def check(self):
        for j in range(len(self.differentials) - 1):
            composite = self.differentials[j + 1] @ self.differentials[j]
            if np.any(composite):
                raise InternalConsistencyError(f"d∘d != 0 at degree {j + self.start_degree}")


def cohomology_dims(c: CochainComplex) -> List[int]:
    c.check()
    ranks = [rank_of(d) for d in c.differentials]
    dims = []
    for j, size in enumerate(c.sizes):
        outgoing = ranks[j] if j < len(ranks) else 0
        incoming = ranks[j - 1] if j > 0 else 0
        dims.append(size - outgoing - incoming)
    return dims


def euler_characteristic(c: CochainComplex) -> int:
    return sum((-1) ** (j + c.start_degree) * size for j, size in enumerate(c.sizes))


class _Orientations:
    """Fixed frames of faces and the induced incidence signs"""

    def __init__(self, config: PointConfig, reverse: bool = False):
        self.config = config
        self.oracle = geometry(config)
        self.reverse = reverse
        self._frames: Dict[VertexSet, Tuple[int, List[List[int]], Tuple[int, ...]]] = {}
        everything = self.oracle.everything
        self.top = self.oracle.affine_dim(everything)
        _, self.hull_rows, self.hull_pivots = self.frame(everything)

    def frame(self, face: VertexSet):
        """(origin, direction rows, pivot columns) of the lex-first affine basis"""
        if face not in self._frames:
            basis = affine_basis(self.config, face)
            points = self.config.points
            origin = basis[0]
            rows = [[a - b for a, b in zip(points[v], points[origin])] for v in basis[1:]]
            pivots = tuple(DomainMatrix.from_list(rows, ZZ).rref()[1]) if rows else ()
            self._frames[face] = (origin, rows, pivots)
        return self._frames[face]

    @staticmethod
    def _sign(rows: List[List[int]], columns: Sequence[int]) -> int:
        if not rows:
            return 1
        det = DomainMatrix.from_list([[row[c] for c in columns] for row in rows], ZZ).det()
        return 1 if det > 0 else -1

    def top_sign(self, face: VertexSet) -> int:
        _, rows, _ = self.frame(face)
        sign = self._sign(rows, self.hull_pivots) * self._sign(self.hull_rows, self.hull_pivots)
        return -sign if self.reverse else sign

    def incidence(self, face: VertexSet, facet: VertexSet) -> int:
        """Sign of facet in the boundary of face: outward direction first"""
        _, rows, pivots = self.frame(face)
        origin, facet_rows, _ = self.frame(facet)
        points = self.config.points
        w = min(face - facet)
        outward = [b - a for a, b in zip(points[origin], points[w])]
        outward = [-x for x in outward]
        sign = self._sign([outward] + facet_rows, pivots) * self._sign(rows, pivots)
        if self.oracle.affine_dim(face) == self.top:
            sign *= self.top_sign(face)
        return sign


def _relative_complex(
    config: PointConfig,
    faces: Iterable[VertexSet],
    augment: bool = False,
    reverse: bool = False,
) -> CochainComplex:
    """Cochain complex on an upward-closed family of faces, graded by codimension"""
    orient = _Orientations(config, reverse)
    oracle = orient.oracle
    top = orient.top
    by_codim: List[List[VertexSet]] = [[] for _ in range(top + 1)]
    for face in faces:
        by_codim[top - oracle.affine_dim(face)].append(face)
    while by_codim and not by_codim[-1]:
        by_codim.pop()
    for group in by_codim:
        group.sort(key=sorted)

    differentials = []
    for j in range(len(by_codim) - 1):
        position = {face: r for r, face in enumerate(by_codim[j + 1])}
        d = np.zeros((len(by_codim[j + 1]), len(by_codim[j])), dtype=np.int64)
        for c, face in enumerate(by_codim[j]):
            for facet, _ in oracle.facets(face):
                if facet in position:
                    d[position[facet], c] = orient.incidence(face, facet)
        differentials.append(d)

    bases = [tuple(tuple(sorted(face)) for face in group) for group in by_codim]
    start = 0
    if augment:
        top_count = len(by_codim[0]) if by_codim else 0
        differentials.insert(0, np.ones((top_count, 1), dtype=np.int64))
        bases.insert(0, ((),))
        start = -1
    complex_ = CochainComplex(tuple(bases), tuple(differentials), start)
    complex_.check()
    return complex_


def strata_cochain_complex(s: Subdivision, reverse_orientation: bool = False) -> CochainComplex:
    """Interior faces graded by codimension with signed restriction maps"""
    require_matroid(s)
    faces = [face.vertex_set for face in interior_faces(s)]
    return _relative_complex(s.config, faces, reverse=reverse_orientation)


def rationality_check(s: Subdivision, reverse_orientation: bool = False) -> Tuple[bool, List[int]]:
    dims = cohomology_dims(strata_cochain_complex(s, reverse_orientation))
    return dims == [1] + [0] * (len(dims) - 1), dims


@dataclass(frozen=True)
class SummandReport:
    """Augmented summand at one lattice point and its exactness verdict"""
    point: Tuple[int, ...]
    level: int
    complex: CochainComplex
    dims: List[int]

    @property
    def exact(self) -> bool:
        return all(d == 0 for d in self.dims)


def per_s_summand(s: Subdivision, point: Sequence[int], level: int, reverse_orientation: bool = False) -> SummandReport:
    """0 -> Q -> ⊕ Q over interior faces whose cone contains (point, level) -> ..."""
    oracle = geometry(s.config)
    point = tuple(int(x) for x in point)
    if len(point) != s.config.ambient_dim or not oracle.contains(oracle.everything, point, level):
        raise DomainMismatchError(f"{point} at level {level} is outside the cone over the hull")
    faces = [
        face.vertex_set
        for face in interior_faces(s)
        if oracle.contains(face.vertices, point, level)
    ]
    complex_ = _relative_complex(s.config, faces, augment=True, reverse=reverse_orientation)
    return SummandReport(point, level, complex_, cohomology_dims(complex_))


@dataclass(frozen=True)
class ExactnessSweep:
    """Per-point exactness over every lattice point at the given levels"""
    checked: int
    failures: Tuple[Tuple[int, Tuple[int, ...]], ...]

    @property
    def exact(self) -> bool:
        return not self.failures


def exactness_sweep(s: Subdivision, levels: Iterable[int] = (0, 1, 2), threads: Optional[int] = None) -> ExactnessSweep:
    cfg = require_hypersimplex(s)
    run = get_run_config()
    jobs = [(m, tuple(int(x) for x in p)) for m in levels for p in lattice_points(cfg.k, cfg.n, m)]

    def check(job):
        m, p = job
        return job, per_s_summand(s, p, m).exact

    with ThreadPoolExecutor(max_workers=threads or run.threads) as executor:
        results = list(tqdm(
            executor.map(check, jobs), total=len(jobs), desc=f"🔍 exactness {cfg.name}", disable=run.quiet
        ))
    failures = tuple(sorted(job for job, ok in results if not ok))
    if failures:
        logger.warning(f"❌ {len(failures)} non-exact summands on {len(s)} cells")
    return ExactnessSweep(len(jobs), failures)


@dataclass(frozen=True)
class StarReport:
    vertex: int
    complex: CochainComplex
    dims: List[int]

    @property
    def concentrated(self) -> bool:
        """Homology is a single Q in the top-cell degree"""
        return self.dims[:1] == [1] and all(d == 0 for d in self.dims[1:])


def star_removed_complex(s: Subdivision, vertex: int, reverse_orientation: bool = False) -> StarReport:
    """Relative complex of the subdivision modulo the faces avoiding vertex and the boundary"""
    oracle = geometry(s.config)
    if frozenset([vertex]) not in oracle.faces(oracle.everything):
        raise DomainMismatchError(f"point {vertex} is not a vertex of the hull")
    faces = [face.vertex_set for face in interior_faces(s) if vertex in face.vertex_set]
    complex_ = _relative_complex(s.config, faces, reverse=reverse_orientation)
    return StarReport(vertex, complex_, cohomology_dims(complex_))


def reduced_betti_numbers(simplices: Iterable[Sequence[int]]) -> List[int]:
    """Reduced rational Betti numbers of a simplicial complex given by all its simplices"""
    by_dim: Dict[int, List[Tuple[int, ...]]] = {}
    for simplex in simplices:
        by_dim.setdefault(len(simplex) - 1, []).append(tuple(simplex))
    if not by_dim:
        return []
    top = max(by_dim)
    index = {d: {simplex: i for i, simplex in enumerate(sorted(set(group)))} for d, group in by_dim.items()}
    ranks = {0: 1}
    for d in range(1, top + 1):
        entries: Dict[int, Dict[int, object]] = {}
        for simplex, column in index[d].items():
            for i in range(len(simplex)):
                row = index[d - 1][simplex[:i] + simplex[i + 1:]]
                entries.setdefault(row, {})[column] = ZZ((-1) ** i)
        shape = (len(index[d - 1]), len(index[d]))
        ranks[d] = DomainMatrix(entries, shape, ZZ).rank() if entries else 0
    return [
        len(index[d]) - ranks[d] - ranks.get(d + 1, 0)
        for d in range(top + 1)
    ]


Form = Dict[Tuple[int, ...], int]


def _wedge_one(form: Form, one: Form) -> Form:
    result: Form = {}
    for subset, a in form.items():
        for j, b in one.items():
            if j[0] in subset:
                continue
            sign = (-1) ** sum(1 for x in subset if x > j[0])
            key = tuple(sorted(subset + j))
            result[key] = result.get(key, 0) + sign * a * b
    return {key: v for key, v in result.items() if v}


def contract(form: Form, j: int) -> Form:
    """Interior product with the basis vector e_j"""
    result: Form = {}
    for subset, a in form.items():
        if j in subset:
            position = subset.index(j)
            key = subset[:position] + subset[position + 1:]
            result[key] = result.get(key, 0) + (-1) ** position * a
    return {key: v for key, v in result.items() if v}


@dataclass(frozen=True)
class ExteriorSpace:
    """∧^degree of {x in (Q^n)^∨ : x(e) = 0, x(e_i) = 0 for i in excluded}.

    Basis: wedges of e_j* - e_r* over degree-subsets of the free indices,
    r the largest non-excluded index. A form's coordinates are its
    coefficients on subsets avoiding r.
    """
    n: int
    excluded: FrozenSet[int]
    degree: int

    @property
    def representative(self) -> int:
        return max(i for i in range(1, self.n + 1) if i not in self.excluded)

    @property
    def free(self) -> Tuple[int, ...]:
        r = self.representative
        return tuple(i for i in range(1, self.n + 1) if i not in self.excluded and i != r)

    @property
    def dimension(self) -> int:
        return comb(self.n - 1 - len(self.excluded), self.degree)

    def basis_keys(self) -> List[Tuple[int, ...]]:
        return list(combinations(self.free, self.degree))

    def basis(self) -> List[Form]:
        r = self.representative
        forms = []
        for key in self.basis_keys():
            form: Form = {(): 1}
            for j in key:
                form = _wedge_one(form, {(j,): 1, (r,): -1})
            forms.append(form)
        return forms

    def coordinates(self, form: Form) -> List[int]:
        return [form.get(key, 0) for key in self.basis_keys()]


@dataclass(frozen=True)
class CanonicalKernel:
    """Kernel of ⊕_i ∧^{k-2} h_i^∨ -> ⊕_{i<j} ∧^{k-3} h_ij^∨ and its comparison with ∧^{k-1} h^∨"""
    k: int
    n: int
    dimension: int
    basis: Tuple[Tuple[int, ...], ...]
    image_rank: int
    image_in_kernel: bool

    @property
    def expected(self) -> int:
        return comb(self.n - 1, self.k - 1)

    @property
    def coincides(self) -> bool:
        return self.image_in_kernel and self.image_rank == self.dimension


def canonical_basis_kernel(k: int, n: int) -> CanonicalKernel:
    if k < 3:
        raise ParameterError(f"canonical basis kernel needs k >= 3, got k={k}")
    if n <= k:
        raise ParameterError(f"canonical basis kernel needs n > k, got k={k}, n={n}")
    blocks = [ExteriorSpace(n, frozenset([i]), k - 2) for i in range(1, n + 1)]
    offsets = np.cumsum([0] + [b.dimension for b in blocks])
    targets = list(combinations(range(1, n + 1), k - 3))
    target_index = {key: i for i, key in enumerate(targets)}
    pairs = list(combinations(range(1, n + 1), 2))
    pair_index = {pair: i for i, pair in enumerate(pairs)}

    theta = np.zeros((len(pairs) * len(targets), int(offsets[-1])), dtype=np.int64)
    for i, block in enumerate(blocks, start=1):
        for c, form in enumerate(block.basis()):
            column = int(offsets[i - 1]) + c
            for j in range(1, n + 1):
                if j == i:
                    continue
                block_row = pair_index[(min(i, j), max(i, j))] * len(targets)
                for key, value in contract(form, j).items():
                    theta[block_row + target_index[key], column] += value

    matrix = DomainMatrix.from_list(theta.tolist(), ZZ)
    kernel = [tuple(int(x) for x in row) for row in matrix.nullspace().to_list()]

    top = ExteriorSpace(n, frozenset(), k - 1)
    image = []
    for omega in top.basis():
        vector = []
        for i, block in enumerate(blocks, start=1):
            vector.extend(block.coordinates(contract(omega, i)))
        image.append(vector)
    image_array = np.array(image, dtype=np.int64).reshape(len(image), int(offsets[-1]))
    image_in_kernel = not np.any(theta @ image_array.T)
    result = CanonicalKernel(k, n, len(kernel), tuple(kernel), rank_of(image_array), image_in_kernel)
    logger.info(f"📊 canonical kernel ({k},{n}): dimension {result.dimension}, expected {result.expected}")
    return result
