#!/usr/bin/env python3
"""
Test the exact polyhedral kernel: envelopes, faces, secondary cones, certificates, volumes
"""

import sys
from fractions import Fraction

import numpy as np
import pytest

from exact_geom import (
    Cell,
    ConePosition,
    ConeZ,
    DomainMismatchError,
    Lifting,
    PointConfig,
    StructuralError,
    affine_circuits,
    argmin_face,
    check_subdivision,
    coherence_certificate,
    faces_of_subdivision,
    geometry,
    in_secondary_cone,
    interior_faces,
    lifting_from_values,
    lower_envelope_subdivision,
    make_cell,
    make_subdivision,
    normalized_volume,
    point_in_cell,
    polytope_edges,
    random_lifting,
    refines,
    supporting_functional,
    to_fraction,
)
from hypersimplex import hypersimplex_vertices, trivial_subdivision

# Δ(2,4) vertices in lexicographic order: 12, 13, 14, 23, 24, 34
D24 = hypersimplex_vertices(2, 4)
SPLIT_CELLS = ((0, 1, 2, 3, 4), (1, 2, 3, 4, 5))
SQUARE = frozenset({1, 2, 3, 4})


def split_lift() -> Lifting:
    return Lifting.of([0, 0, 0, 0, 0, 1])


def diagonal_lift() -> Lifting:
    return Lifting.of([0, 1, 1, 1, 1, 0])


def test_linear_lift_gives_one_cell():
    s = lower_envelope_subdivision(D24, Lifting.of([0] * 6))
    assert s.key == ((0, 1, 2, 3, 4, 5),)
    assert s.maximal_cells[0].affine_dim == 3


def test_collinear_points():
    line = PointConfig.of([[0], [1], [2]])
    s = lower_envelope_subdivision(line, Lifting.of([0, 0, 1]))
    assert s.key == ((0, 1), (1, 2))


def test_points_above_the_envelope_stay_in_their_cell():
    line = PointConfig.of([[0], [1], [2]])
    s = lower_envelope_subdivision(line, Lifting.of([0, 5, 0]))
    assert s.key == ((0, 1, 2),)
    check_subdivision(s)
    with pytest.raises(StructuralError):
        check_subdivision(make_subdivision(line, [(0, 2)]))
    result = coherence_certificate(s)
    assert result.feasible
    assert lower_envelope_subdivision(line, result.lifting).key == s.key


def test_raised_center_joins_both_triangles():
    square = PointConfig.of([[0, 0], [2, 0], [0, 2], [2, 2], [1, 1]])
    s = lower_envelope_subdivision(square, Lifting.of([0, 0, 0, 1, 5]))
    assert s.key == ((0, 1, 2, 4), (1, 2, 3, 4))
    check_subdivision(s)
    assert geometry(square).corners((0, 1, 2, 4)) == [0, 1, 2]
    result = coherence_certificate(s)
    assert result.feasible and result.margin > 0
    assert lower_envelope_subdivision(square, result.lifting).key == s.key


def test_split_of_octahedron():
    s = lower_envelope_subdivision(D24, split_lift())
    assert s.key == SPLIT_CELLS
    check_subdivision(s)


def test_lift_domain_mismatch():
    with pytest.raises(DomainMismatchError):
        lower_envelope_subdivision(D24, Lifting.of([0, 1]))
    with pytest.raises(DomainMismatchError):
        lifting_from_values(D24, [0] * 5)


def test_gauge_and_scaling_invariance():
    base = lower_envelope_subdivision(D24, split_lift())
    moved = split_lift().plus_affine(D24, 3, [1, -2, 0, 5])
    assert lower_envelope_subdivision(D24, moved).key == base.key
    assert lower_envelope_subdivision(D24, split_lift().scaled(Fraction(5, 2))).key == base.key


def test_polytope_edges():
    triangle = make_cell(D24, [0, 1, 3])
    assert len(polytope_edges(triangle, D24)) == 3

    square = make_cell(D24, SQUARE)
    edges = polytope_edges(square, D24)
    assert [e.vertices for e in edges] == [(1, 2), (1, 3), (2, 4), (3, 4)]
    oracle = geometry(D24)
    for edge in edges:
        values = {i: oracle.value(edge.functional, i) for i in square.vertices}
        assert all(values[i] == 0 for i in edge.vertices)
        assert all(v > 0 for i, v in values.items() if i not in edge.vertices)

    segment = make_cell(D24, [0, 5])
    assert [e.vertices for e in polytope_edges(segment, D24)] == [(0, 5)]


def test_faces_of_triangle():
    d23 = hypersimplex_vertices(2, 3)
    poset = faces_of_subdivision(trivial_subdivision(d23))
    dims = sorted(face.affine_dim for face in poset.faces)
    assert dims == [0, 0, 0, 1, 1, 1, 2]


def test_split_square_is_shared():
    s = lower_envelope_subdivision(D24, split_lift())
    poset = faces_of_subdivision(s)
    assert sum(1 for f in poset.faces if f.vertex_set == SQUARE) == 1
    square = poset.index_of(SQUARE)
    cells = [poset.index_of(c.vertices) for c in s.maximal_cells]
    assert sorted(big for big, small in poset.covering_relation if small == square) == sorted(cells)


def test_face_poset_closed_under_intersection():
    s = lower_envelope_subdivision(D24, diagonal_lift())
    poset = faces_of_subdivision(s)
    keys = [f.vertex_set for f in poset.faces]
    for a in keys:
        for b in keys:
            common = a & b
            assert not common or common in poset


def test_diagonal_triangulation_shares_segment():
    s = lower_envelope_subdivision(D24, diagonal_lift())
    assert len(s) == 4
    oracle = geometry(D24)
    assert all(frozenset({0, 5}) in oracle.faces(cell.vertex_set) for cell in s.maximal_cells)


def test_secondary_cone_positions():
    trivial = trivial_subdivision(D24)
    split = lower_envelope_subdivision(D24, split_lift())
    zero = Lifting.of([0] * 6)
    assert in_secondary_cone(zero, trivial) is ConePosition.INTERIOR
    assert in_secondary_cone(zero, split) is ConePosition.BOUNDARY
    assert in_secondary_cone(split_lift(), trivial) is ConePosition.OUTSIDE


def test_refinement_order():
    trivial = trivial_subdivision(D24)
    split = lower_envelope_subdivision(D24, split_lift())
    fine = lower_envelope_subdivision(D24, diagonal_lift())
    assert refines(split, trivial)
    assert not refines(trivial, split)
    assert refines(fine, trivial)


def test_argmin_face():
    assert argmin_face(D24, Lifting.of([0] * 6)).vertices == tuple(range(6))
    assert argmin_face(D24, diagonal_lift()).vertices == (0, 5)
    assert argmin_face(D24, split_lift()).vertices == (0, 1, 2, 3, 4)


def test_coherence_certificates():
    for s in (trivial_subdivision(D24), lower_envelope_subdivision(D24, split_lift())):
        result = coherence_certificate(s)
        assert result.feasible
        assert result.margin > 0
        assert lower_envelope_subdivision(D24, result.lifting).key == s.key


def test_coherence_rejects_overlapping_cells():
    overlapping = make_subdivision(D24, [range(6), SPLIT_CELLS[0]])
    with pytest.raises(StructuralError):
        coherence_certificate(overlapping)


def test_normalized_volumes():
    assert normalized_volume(make_cell(D24, range(6)), D24) == 4
    assert normalized_volume(make_cell(D24, [0, 1, 3]), D24) == 1
    for k, n in ((3, 5), (2, 5)):
        cfg = hypersimplex_vertices(k, n)
        assert normalized_volume(make_cell(cfg, range(len(cfg))), cfg) == 11


def test_volume_covering():
    for lift in (split_lift(), diagonal_lift()):
        s = lower_envelope_subdivision(D24, lift)
        assert sum(normalized_volume(c, D24) for c in s.maximal_cells) == 4


def test_point_in_cell_and_functional():
    s = lower_envelope_subdivision(D24, split_lift())
    low, high = s.maximal_cells
    assert point_in_cell((1, 1, 1, 1), 2, low, D24)
    assert point_in_cell((1, 1, 1, 1), 2, high, D24)
    assert not point_in_cell((0, 0, 2, 2), 2, low, D24)
    with pytest.raises(DomainMismatchError):
        point_in_cell((1, 1), 1, low, D24)

    square = make_cell(D24, SQUARE)
    h = supporting_functional(square, low, D24)
    oracle = geometry(D24)
    assert [oracle.value(h, i) for i in square.vertices] == [0, 0, 0, 0]
    assert oracle.value(h, 0) > 0


def test_interior_faces_of_split():
    s = lower_envelope_subdivision(D24, split_lift())
    assert sorted(f.vertices for f in interior_faces(s)) == sorted([SPLIT_CELLS[0], SPLIT_CELLS[1], (1, 2, 3, 4)])


def test_octahedron_circuits():
    circuits = affine_circuits(D24)
    assert len(circuits) == 3
    assert all(sorted(abs(c) for c in circuit.values()) == [1, 1, 1, 1] for circuit in circuits)


def test_cones():
    assert ConeZ(((1, 0), (0, 1))).is_simplicial()
    cone = ConeZ(((1, 0), (0, 1), (1, 1)))
    assert cone.dim == 2 and not cone.is_simplicial()


def test_random_lifting_is_reproducible():
    a = random_lifting(D24, np.random.default_rng(7), (0, 1, 2))
    b = random_lifting(D24, np.random.default_rng(7), (0, 1, 2))
    assert a == b
    assert set(a.values) <= {0, 1, 2}


def test_to_fraction():
    assert to_fraction("3/6") == Fraction(1, 2)
    assert to_fraction(np.int64(4)) == 4
    assert isinstance(Cell((0, 1), 1).vertex_set, frozenset)


def main():
    """Run all tests"""
    print("🚀 TESTING EXACT GEOMETRY KERNEL")
    print("=" * 60)
    tests = [value for name, value in globals().items() if name.startswith("test_") and callable(value)]
    passed = 0
    for test in tests:
        try:
            test()
            passed += 1
            print(f"✅ {test.__name__}")
        except Exception as e:
            print(f"❌ {test.__name__}: {e}")
    print(f"\n🎯 TEST SUMMARY: {passed}/{len(tests)} tests passed")
    return passed == len(tests)


if __name__ == "__main__":
    sys.exit(0 if main() else 1)
