#!/usr/bin/env python3
"""
Test the hyperstab command line: outputs, report files and exit codes
"""

import io
import json
import sys
import tempfile
from contextlib import redirect_stdout
from pathlib import Path

import pytest

import cli
from exact_geom import Lifting, lower_envelope_subdivision
from hypersimplex import hypersimplex_vertices, trivial_subdivision
from degeneration import TMatrix, golden_split_family, subdivision_from_matrix
from file_formats import matrix_to_file, subdivision_to_file, weights_to_file, write_model

D24 = hypersimplex_vertices(2, 4)


def run_cli(*argv):
    """Run the CLI quietly, returning its exit code and stdout"""
    out = io.StringIO()
    with redirect_stdout(out):
        code = cli.main(["--quiet", "--log-level", "warning", *argv])
    return code, out.getvalue()


def run_json(*argv):
    code, text = run_cli(*argv)
    return code, json.loads(text)


def write_inputs(root: Path) -> dict:
    paths = {
        "split": root / "split.json",
        "diagonal": root / "diagonal.json",
        "line": root / "line.json",
        "weights": root / "weights.json",
        "matrix": root / "matrix.json",
        "degenerate": root / "degenerate.json",
    }
    write_model(paths["split"], subdivision_to_file(subdivision_from_matrix(golden_split_family())))
    diagonal = lower_envelope_subdivision(D24, Lifting.of([0, 1, 1, 1, 1, 0]))
    write_model(paths["diagonal"], subdivision_to_file(diagonal))
    write_model(paths["line"], subdivision_to_file(trivial_subdivision(hypersimplex_vertices(1, 3))))
    write_model(paths["weights"], weights_to_file(D24, Lifting.of([0, 0, 0, 0, 0, 1])))
    write_model(paths["matrix"], matrix_to_file(golden_split_family()))
    write_model(paths["degenerate"], matrix_to_file(TMatrix.of([[1, 0, 1, 1], [0, 1, 1, 1]])))
    return {name: str(path) for name, path in paths.items()}


def test_subdivide():
    with tempfile.TemporaryDirectory() as tmp:
        paths = write_inputs(Path(tmp))
        code, report = run_json("subdivide", "--weights", paths["weights"])
    assert code == cli.EXIT_OK
    assert (report["k"], report["n"]) == (2, 4)
    assert len(report["cells"]) == 2
    assert "seed" not in report


def test_from_matrix():
    with tempfile.TemporaryDirectory() as tmp:
        paths = write_inputs(Path(tmp))
        code, report = run_json("--seed", "9", "from-matrix", paths["matrix"])
        assert code == cli.EXIT_OK
        assert report["seed"] == 9
        assert report["matroid"] and report["general_position"]
        assert report["lifting"]["weights"]["3,4"] == "1"

        code, report = run_json("from-matrix", paths["degenerate"])
        assert code == cli.EXIT_VIOLATION
        assert report["error"] == "degenerate_family"
        assert report["subset"] == [3, 4]


def test_check_matroid():
    with tempfile.TemporaryDirectory() as tmp:
        paths = write_inputs(Path(tmp))
        code, report = run_json("check-matroid", paths["split"])
        assert code == cli.EXIT_OK and report["matroid"]
        code, report = run_json("check-matroid", paths["diagonal"])
    assert code == cli.EXIT_VIOLATION
    assert report["witness"] == [[1, 2], [3, 4]]
    assert [1, 2] in report["cell"] and [3, 4] in report["cell"]


def test_coherence():
    with tempfile.TemporaryDirectory() as tmp:
        paths = write_inputs(Path(tmp))
        code, report = run_json("--seed", "4", "coherence", paths["split"])
    assert code == cli.EXIT_OK
    assert report["feasible"]
    assert report["seed"] == 4
    assert set(report["certificate"]) == {"1,2", "1,3", "1,4", "2,3", "2,4", "3,4"}


def test_strata_and_dot_output():
    with tempfile.TemporaryDirectory() as tmp:
        paths = write_inputs(Path(tmp))
        code, report = run_json("strata", paths["split"])
        assert code == cli.EXIT_OK
        assert len(report["strata"]) == 7

        target = Path(tmp) / "strata.dot"
        code, text = run_cli("--output", str(target), "strata", paths["split"], "--dot")
        assert code == cli.EXIT_OK and text == ""
        assert target.read_text().startswith("digraph strata_2_4 {")


def test_stable_pair_commands_reject_non_matroid():
    with tempfile.TemporaryDirectory() as tmp:
        paths = write_inputs(Path(tmp))
        code, report = run_json("homology", paths["diagonal"])
    assert code == cli.EXIT_VIOLATION
    assert report["error"] == "not_matroid"
    assert report["witness"] == [[1, 2], [3, 4]]


def test_dual_complex():
    with tempfile.TemporaryDirectory() as tmp:
        paths = write_inputs(Path(tmp))
        code, report = run_json("dual-complex", paths["split"])
        assert code == cli.EXIT_OK
        assert report["checks_pass"]
        assert report["reduced_betti"] == [0, 0]
        code, text = run_cli("dual-complex", paths["split"], "--dot")
    assert text.startswith("graph dual_2_4 {")


def test_restrict():
    with tempfile.TemporaryDirectory() as tmp:
        paths = write_inputs(Path(tmp))
        code, report = run_json("restrict", paths["split"], "--facet", "+1")
        assert code == cli.EXIT_OK
        assert (report["k"], report["n"], report["cells"]) == (1, 3, [[[1], [2], [3]]])

        code, report = run_json("restrict", paths["line"], "--facet", "+2")
        assert code == cli.EXIT_OK
        assert report["degenerate"] and report["facet"] == "+2"

        code, report = run_json("restrict", paths["split"], "--facet", "x1")
    assert code == cli.EXIT_INPUT
    assert report["error"] == "ParameterError"


def test_homology_and_exactness():
    with tempfile.TemporaryDirectory() as tmp:
        paths = write_inputs(Path(tmp))
        code, report = run_json("homology", paths["split"])
        assert code == cli.EXIT_OK
        assert report["cohomology"] == [1, 0] and report["vanishing"]
        code, report = run_json("exactness", paths["split"], "--level", "2")
    assert code == cli.EXIT_OK
    assert len(report["points"]) == 19
    assert report["exact"]


def test_canonical_dim():
    code, text = run_cli("canonical-dim", "--k", "3", "--n", "5")
    assert code == cli.EXIT_OK
    assert json.loads(text) == 6
    code, report = run_json("canonical-dim", "--k", "4", "--n", "6", "--basis")
    assert report["dimension"] == report["expected"] == 10
    assert report["coincides"] and len(report["basis"]) == 10
    code, report = run_json("canonical-dim", "--k", "2", "--n", "5")
    assert code == cli.EXIT_INPUT


def test_germs():
    with tempfile.TemporaryDirectory() as tmp:
        paths = write_inputs(Path(tmp))
        code, report = run_json("germs", paths["split"], paths["split"])
    assert code == cli.EXIT_OK
    assert report["count"] == len(report["classes"])
    node = next(c for c in report["classes"] if c["kind"] == "node")
    assert node["multiplicity"] == 2
    assert node["representative"]["file"] == "split.json"


def test_enumerate_then_verify_all():
    with tempfile.TemporaryDirectory() as tmp:
        target = Path(tmp) / "d24"
        code, report = run_json("--output", str(target), "enumerate", "--k", "2", "--n", "4", "--grid", "0,1")
        assert code == cli.EXIT_OK
        assert (report["entries"], report["matroid"]) == (7, 4)
        assert (target / "index.json").exists()

        code, report = run_json("verify-all", str(target), "--levels", "0,1")
    assert code == cli.EXIT_OK
    assert report["passed"]
    assert len(report["files"]) == 7
    assert report["inventory"]["trees"]


def test_enumerate_cap():
    code, report = run_json("enumerate", "--k", "3", "--n", "7")
    assert code == cli.EXIT_INPUT
    assert report["error"] == "CapExceededError"


def test_input_errors():
    with tempfile.TemporaryDirectory() as tmp:
        broken = Path(tmp) / "broken.json"
        broken.write_text('{"k": 2, "n": 4, "cells": [[[1, 5]]]}')
        code, report = run_json("coherence", str(broken))
        assert code == cli.EXIT_INPUT
        assert report["error"] == "ValidationError"
        code, report = run_json("coherence", str(Path(tmp) / "missing.json"))
        assert code == cli.EXIT_INPUT
    with pytest.raises(SystemExit) as raised:
        run_cli("restrict")
    assert raised.value.code == 2


def main():
    """Run all tests"""
    print("🚀 TESTING HYPERSTAB CLI")
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
