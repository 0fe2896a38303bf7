#!/usr/bin/env python3
"""
Test the per-file invariant suite, directory verification and randomized property trials
"""

import sys
import tempfile
from pathlib import Path

from exact_geom import Lifting, PointConfig, lower_envelope_subdivision, make_subdivision
from hypersimplex import hypersimplex_vertices, trivial_subdivision
from degeneration import concurrent_lines_family, golden_split_family, subdivision_from_matrix
from file_formats import subdivision_to_file, write_model
from verify_suite import (
    gauge_trials,
    property_suite,
    reparametrization_trials,
    restriction_trials,
    run_verify_all,
    verify_file,
    verify_subdivision,
)

D24 = hypersimplex_vertices(2, 4)
STABLE_PAIR_CHECKS = {
    "point_lemma", "rationality", "exactness", "dual_complex", "divisors", "restriction", "graded_dimension",
}


def test_matroid_subdivisions_pass():
    for s in (subdivision_from_matrix(golden_split_family()), subdivision_from_matrix(concurrent_lines_family())):
        report = verify_subdivision(s, levels=(0, 1))
        assert report.matroid
        assert report.passed, (report.checks, report.errors)
        assert STABLE_PAIR_CHECKS <= set(report.checks)


def test_non_matroid_gets_polyhedral_checks_only():
    diagonal = lower_envelope_subdivision(D24, Lifting.of([0, 1, 1, 1, 1, 0]))
    report = verify_subdivision(diagonal)
    assert not report.matroid
    assert set(report.checks) == {"structure", "volume", "coherence"}
    assert report.passed
    assert report.to_dict()["cells"] == 4


def test_broken_subdivision_fails():
    overlapping = make_subdivision(D24, [range(6), (0, 1, 2, 3, 4)])
    report = verify_subdivision(overlapping)
    assert report.checks == {"structure": False}
    assert not report.passed


def test_foreign_configuration_is_reported():
    line = PointConfig.of([[0], [1], [2]])
    report = verify_subdivision(make_subdivision(line, [(0, 1, 2)]))
    assert report.errors and not report.passed


def test_unreadable_file():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "bad.json"
        path.write_text("not json")
        report = verify_file(path, (0,))
    assert not report.passed
    assert report.errors[0].startswith("unreadable")


def test_directory_without_index():
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        write_model(root / "a_split.json", subdivision_to_file(subdivision_from_matrix(golden_split_family())))
        write_model(root / "b_trivial.json", subdivision_to_file(trivial_subdivision(D24)))
        report = run_verify_all(root, levels=(0, 1), threads=2)
    assert report["passed"]
    assert [f["path"] for f in report["files"]] == ["a_split.json", "b_trivial.json"]
    assert report["inventory"] is None
    assert report["levels"] == [0, 1]


def test_empty_directory_does_not_pass():
    with tempfile.TemporaryDirectory() as tmp:
        report = run_verify_all(tmp, levels=(0,))
    assert not report["passed"]
    assert report["files"] == []


def test_gauge_trials():
    report = gauge_trials(2, 4, 10, seed=1)
    assert report.checked == 10
    assert report.passed, report.failures


def test_reparametrization_trials():
    report = reparametrization_trials(2, 4, 5, seed=2)
    assert report.checked == 5
    assert report.passed, report.failures


def test_restriction_trials():
    for k, n in ((2, 5), (3, 5)):
        report = restriction_trials(k, n, 3, seed=5)
        assert report.checked == 3
        assert report.passed, report.failures


def test_property_suite_is_seeded():
    reports = property_suite(trials=4, seed=0)
    assert len(reports) == 5
    assert all(r.passed for r in reports), [r.failures for r in reports]
    again = property_suite(trials=4, seed=0)
    assert [r.checked for r in reports] == [r.checked for r in again]


def test_full_property_suite():
    reports = property_suite()
    assert [r.checked for r in reports] == [200, 200, 50, 50, 50]
    failures = {r.name: r.failures for r in reports if not r.passed}
    assert not failures, failures


def main():
    """Run all tests"""
    print("🚀 TESTING VERIFICATION SUITE")
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
