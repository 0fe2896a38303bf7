"""
hyperstab CLI - Command-line surface over subdivisions, degenerations and stable pairs
Prints deterministic JSON (or DOT) on stdout, logs on stderr, exits 0 / 1 / 2
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Tuple

from pydantic import ValidationError

from config import RunConfig, _load_config, set_run_config
from exact_geom import (
    CapExceededError,
    DegenerateFamilyError,
    DomainMismatchError,
    GermSearchBoundError,
    InternalConsistencyError,
    NotMatroidError,
    ParameterError,
    StructuralError,
    coherence_certificate,
    lower_envelope_subdivision,
)
from hypersimplex import (
    FacetLabel,
    hypersimplex_vertices,
    is_matroid_subdivision,
    lattice_points,
    matroid_subdivision_witness,
    restrict_to_facet,
)
from degeneration import general_position_check, valuation_lifting
from stable_pair import (
    boundary_label_census,
    check_boundary_skeleton,
    check_dual_tree,
    dual_complex,
    strata_poset,
)
from germs import germ_catalog
from homology_lab import (
    canonical_basis_kernel,
    cohomology_dims,
    euler_characteristic,
    per_s_summand,
    strata_cochain_complex,
)
from enumeration import enumerate_regular_subdivisions, sample_regular_subdivisions, write_inventory
from file_formats import (
    MatrixFile,
    SubdivisionFile,
    WeightsFile,
    dual_complex_dot,
    dump_json,
    lifting_from_file,
    load_model,
    matrix_from_file,
    rational_str,
    strata_dot,
    subdivision_from_file,
    subdivision_to_file,
    weights_to_file,
)
from verify_suite import run_verify_all

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2

Outcome = Tuple[object, int]


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _read_subdivision(path: str):
    return subdivision_from_file(load_model(path, SubdivisionFile))


def _subsets(s, vertices) -> List[List[int]]:
    return [list(s.config.subsets[v].elements) for v in vertices]


def cmd_subdivide(args, run: RunConfig) -> Outcome:
    model = load_model(args.weights, WeightsFile)
    cfg = hypersimplex_vertices(model.k, model.n)
    s = lower_envelope_subdivision(cfg, lifting_from_file(model))
    return subdivision_to_file(s), EXIT_OK


def cmd_from_matrix(args, run: RunConfig) -> Outcome:
    m = matrix_from_file(load_model(args.matrix, MatrixFile))
    lift = valuation_lifting(m)
    cfg = hypersimplex_vertices(m.k, m.n)
    s = lower_envelope_subdivision(cfg, lift)
    matroid = is_matroid_subdivision(s)
    report = {
        "seed": run.seed,
        "lifting": weights_to_file(cfg, lift).model_dump(),
        "subdivision": subdivision_to_file(s).model_dump(),
        "matroid": matroid,
        "general_position": general_position_check(m).general,
    }
    return report, EXIT_OK if matroid else EXIT_VIOLATION


def cmd_check_matroid(args, run: RunConfig) -> Outcome:
    s = _read_subdivision(args.subdivision)
    found = matroid_subdivision_witness(s)
    report = {"seed": run.seed, "matroid": found is None, "cell": None, "witness": None}
    if found is not None:
        cell, (a, b) = found
        report["cell"] = _subsets(s, cell.vertices)
        report["witness"] = [list(a.elements), list(b.elements)]
        logger.warning(f"❌ edge {a.label} - {b.label} is not a root direction")
    return report, EXIT_OK if found is None else EXIT_VIOLATION


def cmd_coherence(args, run: RunConfig) -> Outcome:
    s = _read_subdivision(args.subdivision)
    result = coherence_certificate(s)
    report = {
        "seed": run.seed,
        "feasible": result.feasible,
        "margin": rational_str(result.margin),
        "constraints": result.constraints,
        "certificate": weights_to_file(s.config, result.lifting).weights if result.feasible else None,
    }
    return report, EXIT_OK if result.feasible else EXIT_VIOLATION


def cmd_strata(args, run: RunConfig) -> Outcome:
    s = _read_subdivision(args.subdivision)
    poset = strata_poset(s)
    if args.dot:
        return strata_dot(poset, s.config), EXIT_OK
    return {
        "seed": run.seed,
        "k": poset.k,
        "n": poset.n,
        "strata": [
            {
                "vertices": _subsets(s, stratum.face.vertices),
                "stratum_dim": stratum.stratum_dim,
                "divisor_labels": sorted(stratum.divisor_labels),
            }
            for stratum in poset.strata
        ],
        "covering": [list(pair) for pair in poset.covering],
    }, EXIT_OK


def cmd_dual_complex(args, run: RunConfig) -> Outcome:
    s = _read_subdivision(args.subdivision)
    dc = dual_complex(s)
    if args.dot:
        return dual_complex_dot(dc), EXIT_OK
    ok = check_dual_tree(dc) if dc.k == 2 else check_boundary_skeleton(dc)
    report = {
        "seed": run.seed,
        "k": dc.k,
        "n": dc.n,
        "cells": [
            {"stratum": c.stratum, "dim": c.dim, "boundary": c.boundary, "labels": sorted(c.labels)}
            for c in dc.cells
        ],
        "incidences": [list(pair) for pair in dc.incidences],
        "reduced_betti": dc.reduced_betti(),
        "boundary_reduced_betti": dc.reduced_betti(boundary_only=True),
        "boundary_census": {str(j): count for j, count in boundary_label_census(dc).items()},
        "checks_pass": ok,
    }
    return report, EXIT_OK if ok else EXIT_VIOLATION


def cmd_restrict(args, run: RunConfig) -> Outcome:
    s = _read_subdivision(args.subdivision)
    result = restrict_to_facet(s, FacetLabel.parse(args.facet))
    if result.degenerate:
        target = result.subdivision.config
        return {"seed": run.seed, "degenerate": True, "facet": str(result.label), "k": target.k, "n": target.n}, EXIT_OK
    return subdivision_to_file(result.subdivision), EXIT_OK


def cmd_homology(args, run: RunConfig) -> Outcome:
    s = _read_subdivision(args.subdivision)
    complex_ = strata_cochain_complex(s)
    dims = cohomology_dims(complex_)
    vanishing = dims == [1] + [0] * (len(dims) - 1)
    report = {
        "seed": run.seed,
        "sizes": complex_.sizes,
        "cohomology": dims,
        "euler": euler_characteristic(complex_),
        "vanishing": vanishing,
    }
    return report, EXIT_OK if vanishing else EXIT_VIOLATION


def cmd_exactness(args, run: RunConfig) -> Outcome:
    s = _read_subdivision(args.subdivision)
    cfg = s.config
    points = []
    for p in lattice_points(cfg.k, cfg.n, args.level):
        summand = per_s_summand(s, p, args.level)
        points.append({"point": list(summand.point), "dims": summand.dims, "exact": summand.exact})
    exact = all(p["exact"] for p in points)
    return {"seed": run.seed, "level": args.level, "points": points, "exact": exact}, EXIT_OK if exact else EXIT_VIOLATION


def cmd_canonical_dim(args, run: RunConfig) -> Outcome:
    kernel = canonical_basis_kernel(args.k, args.n)
    if not args.basis:
        return kernel.dimension, EXIT_OK
    return {
        "seed": run.seed,
        "k": kernel.k,
        "n": kernel.n,
        "dimension": kernel.dimension,
        "expected": kernel.expected,
        "coincides": kernel.coincides,
        "basis": [list(row) for row in kernel.basis],
    }, EXIT_OK


def cmd_germs(args, run: RunConfig) -> Outcome:
    paths = sorted(args.subdivisions)
    subdivisions = [_read_subdivision(p) for p in paths]
    catalog = germ_catalog(subdivisions)
    classes = []
    for germ_class in catalog:
        position, face = germ_class.representative
        classes.append({
            "kind": germ_class.kind,
            "multiplicity": germ_class.multiplicity,
            "representative": {"file": Path(paths[position]).name, "face": _subsets(subdivisions[position], face)},
            "key": repr(germ_class.canonical_key),
        })
    return {"seed": run.seed, "count": len(classes), "classes": classes}, EXIT_OK


def cmd_enumerate(args, run: RunConfig) -> Outcome:
    if args.sample:
        inventory = sample_regular_subdivisions(args.k, args.n, args.sample, seed=run.seed, source=args.source, grid=args.grid)
    else:
        inventory = enumerate_regular_subdivisions(args.k, args.n, args.grid)
    directory = Path(run.output_path or f"inventory_{args.k}_{args.n}")
    write_inventory(inventory, directory)
    return {
        "seed": run.seed,
        "k": inventory.k,
        "n": inventory.n,
        "grid": list(inventory.grid),
        "sampled": inventory.sampled,
        "entries": len(inventory),
        "matroid": len(inventory.matroid_entries()),
        "directory": directory.name,
    }, EXIT_OK


def cmd_verify_all(args, run: RunConfig) -> Outcome:
    report = run_verify_all(args.directory, levels=args.levels)
    return report, EXIT_OK if report["passed"] else EXIT_VIOLATION


COMMANDS: Dict[str, Callable[..., Outcome]] = {
    "subdivide": cmd_subdivide,
    "from-matrix": cmd_from_matrix,
    "check-matroid": cmd_check_matroid,
    "coherence": cmd_coherence,
    "strata": cmd_strata,
    "dual-complex": cmd_dual_complex,
    "restrict": cmd_restrict,
    "homology": cmd_homology,
    "exactness": cmd_exactness,
    "canonical-dim": cmd_canonical_dim,
    "germs": cmd_germs,
    "enumerate": cmd_enumerate,
    "verify-all": cmd_verify_all,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyperstab", description="Matroid subdivisions of hypersimplices and their stable pairs")
    parser.add_argument("--seed", type=int, default=None, help="seed for sampling (default HYPERSTAB_SEED)")
    parser.add_argument("--threads", type=int, default=None, help="worker threads (default HYPERSTAB_THREADS)")
    parser.add_argument("--output", default=None, help="output file, or inventory directory for enumerate")
    parser.add_argument("--quiet", action="store_true", default=None, help="disable progress bars")
    parser.add_argument("--log-level", default=None, help="logging level (default HYPERSTAB_LOG_LEVEL)")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("subdivide", help="lower envelope of a weights file")
    sub.add_argument("--weights", required=True)

    sub = commands.add_parser("from-matrix", help="valuation lifting and subdivision of a family")
    sub.add_argument("matrix")

    for name, text in (
        ("check-matroid", "matroid verdict with a witness edge"),
        ("coherence", "coherence certificate or infeasibility"),
        ("homology", "cohomology of the strata cochain complex"),
    ):
        commands.add_parser(name, help=text).add_argument("subdivision")

    for name, text in (("strata", "strata poset"), ("dual-complex", "dual complex Σ and ∂Σ")):
        sub = commands.add_parser(name, help=text)
        sub.add_argument("subdivision")
        sub.add_argument("--dot", action="store_true")

    sub = commands.add_parser("restrict", help="induced subdivision on a facet")
    sub.add_argument("subdivision")
    sub.add_argument("--facet", required=True, help="+i or -i")

    sub = commands.add_parser("exactness", help="per-point exactness at one level")
    sub.add_argument("subdivision")
    sub.add_argument("--level", type=int, required=True)

    sub = commands.add_parser("canonical-dim", help="dimension of the canonical kernel")
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--basis", action="store_true", help="emit the full kernel report")

    sub = commands.add_parser("germs", help="germ catalog over several subdivisions")
    sub.add_argument("subdivisions", nargs="+")

    sub = commands.add_parser("enumerate", help="inventory of regular subdivisions")
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--n", type=int, required=True)
    sub.add_argument("--grid", type=_int_list, default=[0, 1, 2])
    sub.add_argument("--sample", type=int, default=0, help="draw this many distinct subdivisions instead")
    sub.add_argument("--source", choices=["matrix", "grid"], default="matrix")

    sub = commands.add_parser("verify-all", help="invariant suite over a directory")
    sub.add_argument("directory")
    sub.add_argument("--levels", type=_int_list, default=[0, 1, 2])
    return parser


def _emit(payload, run: RunConfig, to_file: bool):
    text = payload if isinstance(payload, str) else dump_json(payload)
    if to_file and run.output_path:
        Path(run.output_path).write_text(text)
        logger.info(f"✅ wrote {run.output_path}")
    else:
        sys.stdout.write(text)


def _inputs(args) -> List[str]:
    found = [getattr(args, name) for name in ("weights", "matrix", "subdivision", "directory") if getattr(args, name, None)]
    return found + list(getattr(args, "subdivisions", None) or [])


def _error(kind: str, e: Exception, **extra) -> dict:
    return {"error": kind, "message": str(e), **extra}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    run = set_run_config(_load_config().with_overrides(
        command=args.command,
        input_paths=_inputs(args) or None,
        seed=args.seed,
        threads=args.threads,
        output_path=args.output,
        quiet=args.quiet,
        log_level=args.log_level.upper() if args.log_level else None,
    ))
    logging.basicConfig(level=run.log_level, stream=sys.stderr)

    to_file = args.command != "enumerate"
    try:
        payload, code = COMMANDS[args.command](args, run)
    except NotMatroidError as e:
        payload, code = _error("not_matroid", e, witness=[list(x) for x in e.witness or ()]), EXIT_VIOLATION
    except DegenerateFamilyError as e:
        payload, code = _error("degenerate_family", e, subset=list(e.subset or ())), EXIT_VIOLATION
    except (GermSearchBoundError, InternalConsistencyError) as e:
        payload, code = _error(type(e).__name__, e), EXIT_VIOLATION
    except (ValidationError, OSError, ValueError, DomainMismatchError, StructuralError, ParameterError, CapExceededError) as e:
        logger.error(f"❌ {args.command} failed: {e}")
        payload, code, to_file = _error(type(e).__name__, e), EXIT_INPUT, False
    _emit(payload, run, to_file)
    return code


if __name__ == "__main__":
    sys.exit(main())
