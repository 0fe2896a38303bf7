"""
Verification Suite - Invariant checks over subdivision files and randomized property trials
Backs the verify-all command; every report is deterministic given inputs and seed
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from config import get_run_config
from exact_geom import (
    DomainMismatchError,
    HyperstabError,
    StructuralError,
    Subdivision,
    check_subdivision,
    coherence_certificate,
    lower_envelope_subdivision,
    normalized_volume,
    random_lifting,
    geometry,
)
from hypersimplex import (
    FacetLabel,
    hypersimplex_vertices,
    is_matroid_subdivision,
    require_hypersimplex,
    restrict_to_facet,
)
from degeneration import (
    TPolynomial,
    add_row_multiple,
    contract_column,
    delete_column,
    generic_random_tmatrix,
    reparametrize,
    restrict_lifting,
    scale_column,
    subdivision_from_matrix,
    valuation_lifting,
)
from stable_pair import (
    check_boundary_skeleton,
    check_dual_contractible,
    check_dual_tree,
    divisor_consistency,
    dual_complex,
    graded_dimension,
    graded_dimension_from_subdivision,
)
from germs import verify_point_lemma
from homology_lab import exactness_sweep, rationality_check
from enumeration import read_inventory, tree_bijection, verify_certificates
from file_formats import SubdivisionFile, load_model, subdivision_from_file

logger = logging.getLogger(__name__)


@dataclass
class FileReport:
    """Check verdicts for one subdivision file"""
    path: str
    k: int = 0
    n: int = 0
    cells: int = 0
    matroid: bool = False
    checks: Dict[str, bool] = field(default_factory=dict)
    errors: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.errors and all(self.checks.values())

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "k": self.k,
            "n": self.n,
            "cells": self.cells,
            "matroid": self.matroid,
            "checks": dict(sorted(self.checks.items())),
            "errors": self.errors,
            "passed": self.passed,
        }


def verify_subdivision(s: Subdivision, levels: Sequence[int] = (0, 1, 2), path: str = "") -> FileReport:
    """Polyhedral checks on every subdivision, stable-pair checks on matroid ones"""
    report = FileReport(path=path, cells=len(s))
    try:
        cfg = require_hypersimplex(s)
    except DomainMismatchError as e:
        report.errors.append(str(e))
        return report
    report.k, report.n = cfg.k, cfg.n

    try:
        check_subdivision(s)
        report.checks["structure"] = True
    except StructuralError as e:
        report.checks["structure"] = False
        report.errors.append(str(e))
        return report
    total = geometry(cfg).volume(geometry(cfg).everything)
    report.checks["volume"] = sum(normalized_volume(c, cfg) for c in s.maximal_cells) == total
    report.checks["coherence"] = coherence_certificate(s).feasible

    report.matroid = is_matroid_subdivision(s)
    if not report.matroid:
        return report
    try:
        report.checks["point_lemma"] = verify_point_lemma(s).passed
        report.checks["rationality"] = rationality_check(s)[0]
        report.checks["exactness"] = exactness_sweep(s, levels, threads=1).exact
        dc = dual_complex(s)
        if cfg.k == 2:
            report.checks["dual_complex"] = check_dual_tree(dc)
        else:
            report.checks["dual_complex"] = check_boundary_skeleton(dc) and check_dual_contractible(dc)
        report.checks["divisors"] = all(divisor_consistency(s, i) for i in range(1, cfg.n + 1))
        report.checks["restriction"] = all(
            r.degenerate or is_matroid_subdivision(r.subdivision)
            for i in range(1, cfg.n + 1)
            for r in (restrict_to_facet(s, FacetLabel.plus(i)), restrict_to_facet(s, FacetLabel.minus(i)))
        )
        report.checks["graded_dimension"] = all(
            graded_dimension_from_subdivision(s, m) == graded_dimension(cfg.k, cfg.n, m) for m in (1, 2)
        )
    except HyperstabError as e:
        report.errors.append(f"{type(e).__name__}: {e}")
    return report


def _collect(directory: Path) -> List[Path]:
    return sorted(p for p in directory.glob("*.json") if p.name != "index.json")


def verify_file(path: Path, levels: Sequence[int]) -> FileReport:
    try:
        s = subdivision_from_file(load_model(path, SubdivisionFile))
    except (HyperstabError, ValueError, OSError) as e:
        return FileReport(path=path.name, errors=[f"unreadable: {e}"])
    return verify_subdivision(s, levels, path=path.name)


def run_verify_all(directory, levels: Sequence[int] = (0, 1, 2), threads: Optional[int] = None) -> dict:
    """Verify every subdivision file of a directory, merging reports by file name"""
    run = get_run_config()
    root = Path(directory)
    paths = _collect(root)
    logger.info(f"🔍 verifying {len(paths)} subdivision files in {root}")
    with ThreadPoolExecutor(max_workers=threads or run.threads) as executor:
        reports = list(tqdm(
            executor.map(lambda p: verify_file(p, levels), paths),
            total=len(paths),
            desc="🔍 verify-all",
            disable=run.quiet,
        ))
    reports.sort(key=lambda r: r.path)

    inventory = None
    if (root / "index.json").exists():
        inv = read_inventory(root)
        certificates = verify_certificates(inv)
        inventory = {"certificates": not certificates, "certificate_failures": certificates}
        if inv.k == 2 and not inv.sampled and inv.n <= 5:
            inventory["trees"] = tree_bijection(inv).matched

    failed = [r.path for r in reports if not r.passed]
    passed = not failed and bool(reports) and (inventory is None or all(
        v for key, v in inventory.items() if key != "certificate_failures"
    ))
    if passed:
        logger.info(f"✅ all {len(reports)} files pass")
    else:
        logger.warning(f"❌ {len(failed)} of {len(reports)} files fail")
    return {
        "directory": root.name,
        "seed": run.seed,
        "levels": list(levels),
        "files": [r.to_dict() for r in reports],
        "failed": failed,
        "inventory": inventory,
        "passed": passed,
    }


@dataclass
class PropertyReport:
    """Randomized trials of one property with the failing trial descriptions"""
    name: str
    checked: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def restriction_trials(k: int, n: int, trials: int, seed: int = 0) -> PropertyReport:
    """Deletion and contraction of random families against facet restriction"""
    rng = np.random.default_rng(seed)
    report = PropertyReport(f"restriction Δ({k},{n})")
    for trial in range(trials):
        m = generic_random_tmatrix(k, n, rng)
        s = subdivision_from_matrix(m)
        cfg = hypersimplex_vertices(k, n)
        lift = valuation_lifting(m)
        i = int(rng.integers(1, n + 1))
        report.checked += 1

        minus = restrict_to_facet(s, FacetLabel.minus(i))
        if n - 1 > k and minus.subdivision.maximal_cells != subdivision_from_matrix(delete_column(m, i)).maximal_cells:
            report.failures.append(f"trial {trial}: deleting column {i} disagrees with Γ_{i}^-")

        plus = restrict_to_facet(s, FacetLabel.plus(i))
        if k >= 2 and not plus.degenerate:
            restricted = restrict_lifting(cfg, lift, FacetLabel.plus(i))
            from_lift = lower_envelope_subdivision(plus.subdivision.config, restricted)
            contracted = subdivision_from_matrix(contract_column(m, i))
            if not plus.subdivision.maximal_cells == from_lift.maximal_cells == contracted.maximal_cells:
                report.failures.append(f"trial {trial}: contracting column {i} disagrees with Γ_{i}^+")
    _log(report)
    return report


def gauge_trials(k: int, n: int, trials: int, seed: int = 0) -> PropertyReport:
    """Affine gauge changes of random liftings leave the envelope unchanged"""
    rng = np.random.default_rng(seed)
    cfg = hypersimplex_vertices(k, n)
    report = PropertyReport(f"gauge Δ({k},{n})")
    for trial in range(trials):
        lift = random_lifting(cfg, rng, (0, 1, 2, 3))
        constant = int(rng.integers(-5, 6))
        linear = [int(x) for x in rng.integers(-3, 4, size=n)]
        report.checked += 1
        base = lower_envelope_subdivision(cfg, lift)
        moved = lower_envelope_subdivision(cfg, lift.plus_affine(cfg, constant, linear))
        if base.maximal_cells != moved.maximal_cells:
            report.failures.append(f"trial {trial}: gauge ({constant}, {linear}) changes the subdivision")
    _log(report)
    return report


def reparametrization_trials(k: int, n: int, trials: int, seed: int = 0) -> PropertyReport:
    """t -> t^2 doubles ψ; unit column scalings and row operations fix it"""
    rng = np.random.default_rng(seed)
    report = PropertyReport(f"reparametrization Δ({k},{n})")
    for trial in range(trials):
        m = generic_random_tmatrix(k, n, rng)
        lift = valuation_lifting(m)
        report.checked += 1
        squared = reparametrize(m, 2)
        if valuation_lifting(squared) != lift.scaled(2):
            report.failures.append(f"trial {trial}: t -> t^2 does not double ψ")
        elif subdivision_from_matrix(squared).maximal_cells != subdivision_from_matrix(m).maximal_cells:
            report.failures.append(f"trial {trial}: t -> t^2 changes the subdivision")

        column = int(rng.integers(1, n + 1))
        unit = int(rng.choice([-3, -2, -1, 1, 2, 3]))
        if valuation_lifting(scale_column(m, column, unit)) != lift:
            report.failures.append(f"trial {trial}: scaling column {column} by {unit} changes ψ")

        if k >= 2:
            target, source = (int(x) for x in rng.choice(k, size=2, replace=False))
            factor = TPolynomial(tuple(int(c) for c in rng.integers(-3, 4, size=2)))
            if valuation_lifting(add_row_multiple(m, target, source, factor)) != lift:
                report.failures.append(f"trial {trial}: row operation by {factor} changes ψ")
    _log(report)
    return report


def _log(report: PropertyReport):
    if report.passed:
        logger.info(f"✅ {report.name}: {report.checked} trials")
    else:
        logger.warning(f"❌ {report.name}: {len(report.failures)} of {report.checked} trials fail")


def property_suite(trials: int = 200, seed: int = 0) -> List[PropertyReport]:
    return [
        gauge_trials(3, 5, trials, seed),
        reparametrization_trials(3, 5, trials, seed),
        *(restriction_trials(k, n, max(1, trials // 4), seed) for k, n in ((2, 5), (3, 5), (3, 6))),
    ]
