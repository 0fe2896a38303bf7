#!/usr/bin/env python3
"""
Test grid sweeps, sampling, inventories on disk, the tree oracle and the surface census
"""

import sys
import tempfile
from functools import lru_cache
from pathlib import Path

import pytest

from exact_geom import (
    CapExceededError,
    ParameterError,
    coherence_certificate,
    lower_envelope_subdivision,
    normalized_volume,
)
from hypersimplex import is_matroid_subdivision
from stable_pair import check_boundary_skeleton, check_dual_contractible, check_dual_tree, dual_complex
from germs import verify_point_lemma
from homology_lab import rationality_check
from enumeration import (
    boundary_census_of,
    enumerate_regular_subdivisions,
    read_inventory,
    sample_regular_subdivisions,
    surface_type_census,
    transport_inventory,
    tree_bijection,
    tree_oracle,
    verify_certificates,
    write_inventory,
)
from file_formats import InventoryIndex, load_model


@lru_cache(maxsize=None)
def inventory(k: int, n: int, grid=(0, 1, 2)):
    return enumerate_regular_subdivisions(k, n, grid, threads=4)


@lru_cache(maxsize=None)
def sampled_planes(count: int = 100, seed: int = 0):
    return sample_regular_subdivisions(3, 6, count, seed=seed)


def plane_subdivisions():
    """All matroid subdivisions of Δ(3,5) and the sampled ones of Δ(3,6)"""
    entries = inventory(3, 5).matroid_entries() + list(sampled_planes().entries)
    return [e.subdivision for e in entries]


def test_octahedron_sweep():
    inv = inventory(2, 4, (0, 1))
    assert len(inv) == 7
    assert len(inv.matroid_entries()) == 4
    assert inv.entries[0].cells == 1
    assert not verify_certificates(inv)


def test_sweep_is_sorted_and_distinct():
    inv = inventory(2, 4, (0, 1))
    keys = inv.keys()
    assert len(set(keys)) == len(keys)
    assert [e.cells for e in inv.entries] == sorted(e.cells for e in inv.entries)


def test_caps():
    with pytest.raises(CapExceededError):
        enumerate_regular_subdivisions(3, 7)
    with pytest.raises(CapExceededError):
        enumerate_regular_subdivisions(2, 5, (0, 1, 2, 3))
    with pytest.raises(ParameterError):
        enumerate_regular_subdivisions(2, 4, ())


def test_lines_sweep_matches_tree_oracle():
    inv = inventory(2, 5)
    assert len(inv.matroid_entries()) == 26
    report = tree_bijection(inv)
    assert report.matched, report.unmatched
    assert report.inventory_count == report.oracle_count == 26


def test_plane_sweep():
    inv = inventory(3, 5)
    assert len(inv.matroid_entries()) == 26
    assert not verify_certificates(inv)
    assert all(census == {0: 5, 1: 10} for census in boundary_census_of(inv).values())


def test_duality_transports_inventory():
    image = transport_inventory(inventory(2, 5))
    assert (image.k, image.n) == (3, 5)
    assert not verify_certificates(image)
    assert {e.subdivision.key for e in image.matroid_entries()} == {
        e.subdivision.key for e in inventory(3, 5).matroid_entries()
    }


def test_surface_census():
    census = surface_type_census(inventory(3, 5))
    assert census.passed, census.failures
    assert [(c.components, c.multiplicity) for c in census.classes] == [(2, 10), (3, 15)]
    assert census.classes[1].meeting_dims == (0, 1, 1)
    with pytest.raises(ParameterError):
        surface_type_census(inventory(2, 4, (0, 1)))


def test_tree_oracle():
    assert tree_oracle(3).count == 1
    assert tree_oracle(4).count == 4
    oracle = tree_oracle(5)
    assert oracle.count == 26
    assert oracle.census == {0: 1, 1: 10, 2: 15}
    with pytest.raises(ParameterError):
        tree_oracle(2)
    with pytest.raises(ParameterError):
        tree_bijection(inventory(3, 5))


def test_sampling_is_reproducible():
    first = sample_regular_subdivisions(3, 6, 4, seed=0)
    second = sample_regular_subdivisions(3, 6, 4, seed=0)
    assert first.keys() == second.keys()
    assert first.sampled and first.seed == 0
    assert len(first) == 4
    assert all(e.matroid and is_matroid_subdivision(e.subdivision) for e in first.entries)
    assert not verify_certificates(first)


def test_grid_sampling_keeps_matroids():
    inv = sample_regular_subdivisions(2, 4, 2, seed=3, source="grid", grid=(0, 1))
    assert all(e.matroid for e in inv.entries)
    assert 1 <= len(inv) <= 2
    with pytest.raises(ParameterError):
        sample_regular_subdivisions(2, 4, 2, source="dice")
    with pytest.raises(ParameterError):
        sample_regular_subdivisions(2, 4, 0)


def test_point_lemma_on_planes():
    assert len(sampled_planes()) == 100
    reports = [verify_point_lemma(s) for s in plane_subdivisions()]
    assert all(r.passed for r in reports), [r.failures for r in reports if not r.passed]
    # one check per pair of lines: 10 on Δ(3,5), 15 on Δ(3,6)
    assert sum(r.checked for r in reports) == 26 * 10 + 100 * 15


def test_cohomology_vanishes_on_planes():
    for s in plane_subdivisions():
        vanishing, dims = rationality_check(s)
        assert vanishing, (s.key, dims)


def test_dual_complexes_of_inventories():
    for k, n in ((2, 4), (2, 5)):
        for entry in inventory(k, n).matroid_entries():
            assert check_dual_tree(dual_complex(entry.subdivision)), entry.subdivision.key
    for s in plane_subdivisions():
        dc = dual_complex(s)
        assert check_boundary_skeleton(dc), s.key
        assert check_dual_contractible(dc), s.key


def test_volume_additivity():
    for (k, n), total in {(2, 4): 4, (2, 5): 11, (3, 5): 11}.items():
        for entry in inventory(k, n).entries:
            s = entry.subdivision
            assert sum(normalized_volume(c, s.config) for c in s.maximal_cells) == total, s.key


def test_coherence_certificates_of_inventories():
    entries = list(inventory(2, 4).entries) + inventory(2, 5).matroid_entries() + inventory(3, 5).matroid_entries()
    for entry in entries:
        s = entry.subdivision
        result = coherence_certificate(s)
        assert result.feasible and result.margin > 0, s.key
        assert lower_envelope_subdivision(s.config, result.lifting).key == s.key


def test_inventory_on_disk():
    inv = inventory(2, 4, (0, 1))
    with tempfile.TemporaryDirectory() as tmp:
        root = write_inventory(inv, Path(tmp) / "d24")
        assert sorted(p.name for p in root.glob("*.json"))[:2] == ["index.json", "subdivision_0000.json"]
        index = load_model(root / "index.json", InventoryIndex)
        assert index.grid == [0, 1] and not index.sampled
        assert len(index.entries) == 7
        back = read_inventory(root)
    assert back.keys() == inv.keys()
    assert [e.matroid for e in back.entries] == [e.matroid for e in inv.entries]
    assert not verify_certificates(back)


def main():
    """Run all tests"""
    print("🚀 TESTING SUBDIVISION ENUMERATION")
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
