"""
Subdivision Enumeration - Grid sweeps, random sampling and oracle cross-checks
Inventories of regular matroid subdivisions of small hypersimplices
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import combinations, product
from math import comb
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from tqdm import tqdm

from config import get_run_config
from exact_geom import (
    CapExceededError,
    DegenerateFamilyError,
    Lifting,
    ParameterError,
    Subdivision,
    affine_circuits,
    lower_envelope_subdivision,
    random_lifting,
)
from hypersimplex import (
    HypersimplexConfig,
    complement_subdivision,
    hypersimplex_vertices,
    is_matroid_subdivision,
)
from degeneration import generic_random_tmatrix, valuation_lifting
from stable_pair import (
    boundary_label_census,
    check_boundary_skeleton,
    check_dual_tree,
    component_fingerprint,
    components_meeting,
    dual_complex,
    strata_poset,
    tree_splits,
)
from germs import verify_point_lemma
from file_formats import (
    InventoryIndex,
    InventoryRecord,
    SubdivisionFile,
    WeightsFile,
    load_model,
    subdivision_from_file,
    subdivision_to_file,
    weights_to_file,
    lifting_from_file,
    write_model,
)

logger = logging.getLogger(__name__)

MAX_VERTICES = 20

Split = FrozenSet[FrozenSet[int]]


@dataclass(frozen=True)
class InventoryEntry:
    """One distinct subdivision with the lifting that generated it"""
    subdivision: Subdivision
    cells: int
    matroid: bool
    certificate: Lifting


@dataclass(frozen=True)
class SubdivisionInventory:
    """Distinct subdivisions of Δ(k,n), complete relative to the grid unless sampled"""
    k: int
    n: int
    grid: Tuple[int, ...]
    entries: Tuple[InventoryEntry, ...]
    sampled: bool = False
    seed: Optional[int] = None

    def matroid_entries(self) -> List[InventoryEntry]:
        return [e for e in self.entries if e.matroid]

    def keys(self) -> List[Tuple[Tuple[int, ...], ...]]:
        return [e.subdivision.key for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def _sorted_entries(entries) -> Tuple[InventoryEntry, ...]:
    return tuple(sorted(entries, key=lambda e: (e.cells, e.subdivision.key)))


def _merge(results) -> Tuple[InventoryEntry, ...]:
    found: Dict[tuple, InventoryEntry] = {}
    for s, lift in results:
        if s.key not in found:
            found[s.key] = InventoryEntry(s, len(s), is_matroid_subdivision(s), lift)
    return _sorted_entries(found.values())


def _circuit_forms(cfg: HypersimplexConfig) -> np.ndarray:
    circuits = affine_circuits(cfg)
    forms = np.zeros((len(cfg), len(circuits)), dtype=np.int64)
    for c, dependency in enumerate(circuits):
        for v, coefficient in dependency.items():
            forms[v, c] = coefficient
    return forms


def enumerate_regular_subdivisions(
    k: int,
    n: int,
    weight_grid: Sequence[int] = (0, 1, 2),
    threads: Optional[int] = None,
) -> SubdivisionInventory:
    """Lower envelopes of every grid lifting, one per circuit sign pattern.

    Two liftings with the same sign on every affine circuit induce the same
    subdivision, so only the first lifting of each sign pattern is lifted.
    """
    run = get_run_config()
    cfg = hypersimplex_vertices(k, n)
    if comb(n, k) > MAX_VERTICES:
        raise CapExceededError(f"{cfg.name} has {comb(n, k)} vertices, the sweep cap is {MAX_VERTICES}")
    grid = tuple(sorted({int(g) for g in weight_grid}))
    if not grid:
        raise ParameterError("weight grid is empty")
    total = len(grid) ** len(cfg)
    if total > run.max_liftings:
        raise CapExceededError(
            f"{total} liftings of {cfg.name} over grid {list(grid)} exceed the cap of {run.max_liftings}"
        )

    liftings = np.array(list(product(grid, repeat=len(cfg))), dtype=np.int64)
    signatures = np.sign(liftings @ _circuit_forms(cfg))
    _, first = np.unique(signatures, axis=0, return_index=True)
    representatives = liftings[np.sort(first)]
    logger.info(f"🔍 {cfg.name}: {total} grid liftings, {len(representatives)} circuit sign patterns")

    def envelope(values: np.ndarray):
        lift = Lifting.of(values.tolist())
        return lower_envelope_subdivision(cfg, lift), lift

    with ThreadPoolExecutor(max_workers=threads or run.threads) as executor:
        results = list(tqdm(
            executor.map(envelope, representatives),
            total=len(representatives),
            desc=f"🔍 sweeping {cfg.name}",
            disable=run.quiet,
        ))

    inventory = SubdivisionInventory(k, n, grid, _merge(results))
    logger.info(
        f"📊 {cfg.name}: {len(inventory)} subdivisions, {len(inventory.matroid_entries())} matroid"
    )
    return inventory


def sample_regular_subdivisions(
    k: int,
    n: int,
    count: int,
    seed: Optional[int] = None,
    source: str = "matrix",
    grid: Sequence[int] = (0, 1, 2),
    max_draws: Optional[int] = None,
) -> SubdivisionInventory:
    """Distinct subdivisions from reproducible random draws.

    source="matrix" takes valuation liftings of random monomial families,
    which always give matroid subdivisions; source="grid" takes random grid
    liftings and keeps only the matroid envelopes.
    """
    run = get_run_config()
    seed = run.seed if seed is None else seed
    if source not in ("matrix", "grid"):
        raise ParameterError(f"unknown sample source {source!r}")
    if count < 1:
        raise ParameterError(f"sample count must be positive, got {count}")
    cfg = hypersimplex_vertices(k, n)
    rng = np.random.default_rng(seed)
    max_draws = max_draws or 20 * count
    found: Dict[tuple, InventoryEntry] = {}

    with tqdm(total=count, desc=f"🔍 sampling {cfg.name}", disable=run.quiet) as bar:
        for _ in range(max_draws):
            if len(found) >= count:
                break
            if source == "matrix":
                try:
                    lift = valuation_lifting(generic_random_tmatrix(k, n, rng))
                except DegenerateFamilyError:
                    continue
            else:
                lift = random_lifting(cfg, rng, grid)
            s = lower_envelope_subdivision(cfg, lift)
            if s.key in found:
                continue
            matroid = is_matroid_subdivision(s)
            if source == "grid" and not matroid:
                continue
            found[s.key] = InventoryEntry(s, len(s), matroid, lift)
            bar.update(1)

    if len(found) < count:
        logger.warning(f"⚠️ only {len(found)} of {count} distinct subdivisions after {max_draws} draws")
    logger.info(f"📊 sampled {len(found)} subdivisions of {cfg.name} with seed {seed}")
    return SubdivisionInventory(k, n, tuple(sorted({int(g) for g in grid})), _sorted_entries(found.values()), True, seed)


def verify_certificates(inventory: SubdivisionInventory) -> List[str]:
    """Entries whose certificate no longer reproduces the stored subdivision"""
    failures = []
    for entry in inventory.entries:
        s = entry.subdivision
        if lower_envelope_subdivision(s.config, entry.certificate).maximal_cells != s.maximal_cells:
            failures.append(f"certificate of {s.key} induces a different subdivision")
    return failures


def transport_inventory(inventory: SubdivisionInventory) -> SubdivisionInventory:
    """Image of an inventory of Δ(k,n) under I -> [n] minus I"""
    source = hypersimplex_vertices(inventory.k, inventory.n)
    dual = hypersimplex_vertices(inventory.n - inventory.k, inventory.n)
    entries = []
    for entry in inventory.entries:
        image = complement_subdivision(entry.subdivision)
        # x -> 1 - x is affine, so heights travel with their subsets
        heights = {s.complement(inventory.n): v for s, v in zip(source.subsets, entry.certificate.values)}
        certificate = Lifting(tuple(heights[s] for s in dual.subsets))
        entries.append(InventoryEntry(image, entry.cells, is_matroid_subdivision(image), certificate))
    return replace(inventory, k=dual.k, entries=_sorted_entries(entries))


@dataclass(frozen=True)
class TreeCensus:
    """Leaf-labelled trees without degree-two vertices, as compatible split systems"""
    n: int
    count: int
    census: Dict[int, int]
    split_systems: FrozenSet[FrozenSet[Split]]


def _compatible(a: Split, b: Split) -> bool:
    return any(not (x & y) for x in a for y in b)


def tree_oracle(n: int) -> TreeCensus:
    """Trees with n labelled leaves, keyed by their number of internal edges"""
    if n < 3:
        raise ParameterError(f"tree oracle needs n >= 3, got {n}")
    leaves = frozenset(range(1, n + 1))
    splits = []
    for size in range(2, n - 1):
        for side in map(frozenset, _subsets_without(n, size)):
            splits.append(frozenset([side, leaves - side]))
    graph = nx.Graph()
    graph.add_nodes_from(splits)
    graph.add_edges_from((a, b) for i, a in enumerate(splits) for b in splits[i + 1:] if _compatible(a, b))
    systems = {frozenset()} | {frozenset(clique) for clique in nx.enumerate_all_cliques(graph)}
    census: Dict[int, int] = {}
    for system in systems:
        census[len(system)] = census.get(len(system), 0) + 1
    logger.debug(f"📊 {len(systems)} trees with {n} labelled leaves: {dict(sorted(census.items()))}")
    return TreeCensus(n, len(systems), dict(sorted(census.items())), frozenset(systems))


def _subsets_without(n: int, size: int):
    """Subsets of [n-1] of the given size; the side avoiding n names each split once"""
    return combinations(range(1, n), size)


@dataclass(frozen=True)
class TreeBijectionReport:
    matched: bool
    inventory_count: int
    oracle_count: int
    unmatched: Tuple[str, ...] = ()


def tree_bijection(inventory: SubdivisionInventory) -> TreeBijectionReport:
    """Match the matroid subdivisions of Δ(2,n) with leaf-labelled trees through Σ"""
    if inventory.k != 2:
        raise ParameterError(f"tree bijection needs a Δ(2,n) inventory, got k={inventory.k}")
    oracle = tree_oracle(inventory.n)
    seen = set()
    unmatched = []
    for entry in inventory.matroid_entries():
        dc = dual_complex(entry.subdivision)
        if not check_dual_tree(dc):
            unmatched.append(f"{entry.subdivision.key}: dual complex is not a labelled tree")
            continue
        splits = tree_splits(dc.tree())
        if splits not in oracle.split_systems or splits in seen:
            unmatched.append(f"{entry.subdivision.key}: tree splits do not match a new oracle tree")
        seen.add(splits)
    count = len(inventory.matroid_entries())
    matched = not unmatched and count == oracle.count
    if matched:
        logger.info(f"✅ Δ(2,{inventory.n}) inventory matches all {oracle.count} trees")
    else:
        logger.warning(f"❌ Δ(2,{inventory.n}) inventory: {count} matroid entries vs {oracle.count} trees")
    return TreeBijectionReport(matched, count, oracle.count, tuple(unmatched))


@dataclass
class SurfaceClass:
    """Nontrivial matroid subdivisions sharing a strata poset up to isomorphism"""
    components: int
    multiplicity: int
    representative: Tuple[Tuple[int, ...], ...]
    fingerprints: Tuple[Tuple[int, int, int], ...]
    meeting_dims: Tuple[int, ...]


@dataclass
class SurfaceCensus:
    classes: List[SurfaceClass] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def _strata_graph(s: Subdivision) -> nx.DiGraph:
    graph = strata_poset(s).to_networkx()
    for _, data in graph.nodes(data=True):
        data["tag"] = f"{data['stratum_dim']}:{len(data['labels'])}"
    return graph


def surface_type_census(inventory: SubdivisionInventory) -> SurfaceCensus:
    """Group nontrivial matroid subdivisions of Δ(3,5) into surface types"""
    if (inventory.k, inventory.n) != (3, 5):
        raise ParameterError(f"surface census needs a Δ(3,5) inventory, got Δ({inventory.k},{inventory.n})")
    census = SurfaceCensus()
    buckets: Dict[str, List[Tuple[nx.DiGraph, SurfaceClass]]] = {}
    match = lambda a, b: a["tag"] == b["tag"]

    for entry in inventory.matroid_entries():
        s = entry.subdivision
        if entry.cells == 1:
            continue
        if not verify_point_lemma(s).passed:
            census.failures.append(f"{s.key}: point lemma fails")
        if not check_boundary_skeleton(dual_complex(s)):
            census.failures.append(f"{s.key}: ∂Σ is not the 1-skeleton of the 4-simplex")
        graph = _strata_graph(s)
        bucket = buckets.setdefault(nx.weisfeiler_lehman_graph_hash(graph, node_attr="tag"), [])
        found = next((c for g, c in bucket if nx.is_isomorphic(g, graph, node_match=match)), None)
        if found is not None:
            found.multiplicity += 1
            continue
        surface = SurfaceClass(
            components=entry.cells,
            multiplicity=1,
            representative=s.key,
            fingerprints=tuple(sorted(component_fingerprint(c, s.config) for c in s.maximal_cells)),
            meeting_dims=tuple(sorted(m.stratum_dim for m in components_meeting(s))),
        )
        bucket.append((graph, surface))
        census.classes.append(surface)

    census.classes.sort(key=lambda c: (c.components, c.representative))
    if sorted(c.components for c in census.classes) != [2, 3]:
        census.failures.append(
            f"expected surface types with 2 and 3 components, found {[c.components for c in census.classes]}"
        )
    for surface in census.classes:
        if surface.components == 3 and 0 not in surface.meeting_dims:
            census.failures.append(f"{surface.representative}: end components do not meet in a point")
    if census.passed:
        logger.info(f"✅ surface census: {[(c.components, c.multiplicity) for c in census.classes]}")
    else:
        logger.warning(f"❌ surface census: {census.failures[0]}")
    return census


def boundary_census_of(inventory: SubdivisionInventory) -> Dict[Tuple[Tuple[int, ...], ...], Dict[int, int]]:
    """∂Σ label census per matroid entry"""
    return {e.subdivision.key: boundary_label_census(dual_complex(e.subdivision)) for e in inventory.matroid_entries()}


def write_inventory(inventory: SubdivisionInventory, directory) -> Path:
    """Write subdivision_XXXX.json files and the index.json manifest"""
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    records = []
    for position, entry in enumerate(inventory.entries):
        name = f"subdivision_{position:04d}.json"
        write_model(root / name, subdivision_to_file(entry.subdivision))
        cfg = entry.subdivision.config
        records.append(InventoryRecord(
            file=name,
            cells=entry.cells,
            matroid=entry.matroid,
            certificate=weights_to_file(cfg, entry.certificate).weights,
        ))
    index = InventoryIndex(
        k=inventory.k,
        n=inventory.n,
        grid=list(inventory.grid),
        sampled=inventory.sampled,
        seed=inventory.seed,
        entries=records,
    )
    write_model(root / "index.json", index)
    logger.info(f"✅ wrote {len(records)} subdivisions to {root}")
    return root


def read_inventory(directory) -> SubdivisionInventory:
    root = Path(directory)
    index = load_model(root / "index.json", InventoryIndex)
    entries = []
    for record in index.entries:
        s = subdivision_from_file(load_model(root / record.file, SubdivisionFile))
        certificate = lifting_from_file(WeightsFile(k=index.k, n=index.n, weights=record.certificate))
        entries.append(InventoryEntry(s, len(s), is_matroid_subdivision(s), certificate))
    return SubdivisionInventory(index.k, index.n, tuple(index.grid), tuple(entries), index.sampled, index.seed)
