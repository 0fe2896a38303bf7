#!/usr/bin/env python3
"""
Test the hyperstab HTTP API
"""

import sys

from fastapi.testclient import TestClient

from main import app
from exact_geom import Lifting, lower_envelope_subdivision
from hypersimplex import hypersimplex_vertices
from degeneration import golden_split_family, subdivision_from_matrix
from file_formats import matrix_to_file, subdivision_to_file, weights_to_file

client = TestClient(app)
D24 = hypersimplex_vertices(2, 4)


def split_payload() -> dict:
    return subdivision_to_file(subdivision_from_matrix(golden_split_family())).model_dump()


def diagonal_payload() -> dict:
    return subdivision_to_file(lower_envelope_subdivision(D24, Lifting.of([0, 1, 1, 1, 1, 0]))).model_dump()


def test_root_and_health():
    assert client.get("/").json()["status"] == "running"
    health = client.get("/health").json()
    assert health["status"] == "healthy"
    assert health["threads"] >= 1


def test_subdivide():
    payload = weights_to_file(D24, Lifting.of([0, 0, 0, 0, 0, 1])).model_dump()
    response = client.post("/api/subdivide", json=payload)
    assert response.status_code == 200
    assert response.json() == split_payload()


def test_subdivide_rejects_missing_weights():
    response = client.post("/api/subdivide", json={"k": 2, "n": 4, "weights": {"1,2": "0"}})
    assert response.status_code == 400


def test_from_matrix():
    response = client.post("/api/from-matrix", json=matrix_to_file(golden_split_family()).model_dump())
    assert response.status_code == 200
    body = response.json()
    assert body["matroid"] and body["general_position"]
    assert body["subdivision"] == split_payload()


def test_from_matrix_degenerate_family():
    payload = {"k": 2, "n": 4, "entries": [[["1"], ["0"], ["1"], ["1"]], [["0"], ["1"], ["1"], ["1"]]]}
    assert client.post("/api/from-matrix", json=payload).status_code == 400


def test_check_matroid():
    assert client.post("/api/check-matroid", json=split_payload()).json() == {
        "matroid": True, "cell": None, "witness": None,
    }
    body = client.post("/api/check-matroid", json=diagonal_payload()).json()
    assert not body["matroid"]
    assert body["witness"] == [[1, 2], [3, 4]]


def test_coherence():
    body = client.post("/api/coherence", json=split_payload()).json()
    assert body["feasible"]
    assert len(body["certificate"]) == 6


def test_strata():
    body = client.post("/api/strata", json=split_payload()).json()
    assert (body["k"], body["n"]) == (2, 4)
    assert len(body["strata"]) == 7
    response = client.post("/api/strata", json=diagonal_payload())
    assert response.status_code == 400
    assert response.json()["detail"]["witness"] == [[1, 2], [3, 4]]


def test_restrict():
    body = client.post("/api/restrict", json={"subdivision": split_payload(), "facet": "-4"}).json()
    assert not body["degenerate"]
    assert body["subdivision"]["cells"] == [[[1, 2], [1, 3], [2, 3]]]
    response = client.post("/api/restrict", json={"subdivision": split_payload(), "facet": "+9"})
    assert response.status_code == 400


def test_homology():
    body = client.post("/api/homology", json=split_payload()).json()
    assert body == {"sizes": [2, 1], "cohomology": [1, 0], "euler": 1, "vanishing": True}


def test_canonical_dim():
    body = client.get("/api/canonical-dim", params={"k": 3, "n": 6}).json()
    assert body["dimension"] == body["expected"] == 10
    assert body["coincides"]
    assert client.get("/api/canonical-dim", params={"k": 2, "n": 6}).status_code == 400


def test_malformed_payload():
    response = client.post("/api/coherence", json={"k": 2, "n": 4, "cells": [[[1, 9]]]})
    assert response.status_code == 422


def main():
    """Run all tests"""
    print("🚀 TESTING HYPERSTAB API")
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
