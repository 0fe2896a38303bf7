"""
Degeneration Pipeline - One-parameter families of arrangements as polynomial matrices in t
Plücker minors, valuation liftings and the induced matroid subdivisions
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from sympy import Matrix, Poly, QQ, Rational, Symbol

from exact_geom import (
    DegenerateFamilyError,
    Lifting,
    ParameterError,
    Subdivision,
    lower_envelope_subdivision,
    to_fraction,
)
from hypersimplex import (
    FacetLabel,
    FacetSign,
    HypersimplexConfig,
    KSubset,
    _build_config,
    hypersimplex_vertices,
)

logger = logging.getLogger(__name__)

T = Symbol("t")


@dataclass(frozen=True)
class TPolynomial:
    """Polynomial in t over Q, coefficients lowest degree first"""
    coefficients: Tuple[Fraction, ...]

    def __post_init__(self):
        coefficients = tuple(to_fraction(c) for c in self.coefficients)
        while coefficients and coefficients[-1] == 0:
            coefficients = coefficients[:-1]
        object.__setattr__(self, "coefficients", coefficients)

    @classmethod
    def of(cls, value) -> "TPolynomial":
        if isinstance(value, TPolynomial):
            return value
        if isinstance(value, (list, tuple)):
            return cls(tuple(value))
        return cls((value,))

    @classmethod
    def monomial(cls, coefficient, degree: int) -> "TPolynomial":
        return cls((0,) * degree + (coefficient,))

    @classmethod
    def from_sympy(cls, expr) -> "TPolynomial":
        coefficients = Poly(expr, T, domain=QQ).all_coeffs()
        return cls(tuple(reversed(coefficients)))

    def to_sympy(self):
        return sum(
            (Rational(c.numerator, c.denominator) * T**i for i, c in enumerate(self.coefficients)),
            Rational(0),
        )

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def valuation(self) -> Optional[int]:
        """Order of vanishing at t = 0; None for the zero polynomial"""
        return next((i for i, c in enumerate(self.coefficients) if c != 0), None)

    def evaluate(self, t0) -> Fraction:
        t0 = to_fraction(t0)
        total = Fraction(0)
        for c in reversed(self.coefficients):
            total = total * t0 + c
        return total

    def substitute_power(self, e: int) -> "TPolynomial":
        """The polynomial p(t^e)"""
        if e < 1:
            raise ParameterError(f"reparametrization exponent must be positive, got {e}")
        spread = [Fraction(0)] * (e * max(self.degree, 0) + 1)
        for i, c in enumerate(self.coefficients):
            spread[e * i] = c
        return TPolynomial(tuple(spread))

    def shift_down(self, v: int) -> "TPolynomial":
        """Divide by t^v; the lowest v coefficients must vanish"""
        if any(self.coefficients[:v]):
            raise ParameterError(f"{self} is not divisible by t^{v}")
        return TPolynomial(self.coefficients[v:])

    def __add__(self, other: "TPolynomial") -> "TPolynomial":
        return TPolynomial.from_sympy(self.to_sympy() + TPolynomial.of(other).to_sympy())

    def __sub__(self, other: "TPolynomial") -> "TPolynomial":
        return TPolynomial.from_sympy(self.to_sympy() - TPolynomial.of(other).to_sympy())

    def __mul__(self, other: "TPolynomial") -> "TPolynomial":
        return TPolynomial.from_sympy(self.to_sympy() * TPolynomial.of(other).to_sympy())

    def __neg__(self) -> "TPolynomial":
        return TPolynomial(tuple(-c for c in self.coefficients))

    def __str__(self) -> str:
        return str(self.to_sympy())


Entry = Union[TPolynomial, int, str, Fraction, Sequence]


@dataclass(frozen=True)
class TMatrix:
    """k×n matrix over Q[t]; columns are the linear forms of the arrangement"""
    k: int
    n: int
    entries: Tuple[Tuple[TPolynomial, ...], ...]

    def __post_init__(self):
        if not (self.n > self.k >= 1):
            raise ParameterError(f"matrix family needs n > k >= 1, got {self.k}x{self.n}")
        if len(self.entries) != self.k or any(len(row) != self.n for row in self.entries):
            raise ParameterError(f"entries do not form a {self.k}x{self.n} array")

    @classmethod
    def of(cls, rows: Iterable[Iterable[Entry]]) -> "TMatrix":
        entries = tuple(tuple(TPolynomial.of(e) for e in row) for row in rows)
        if not entries:
            raise ParameterError("matrix has no rows")
        return cls(len(entries), len(entries[0]), entries)

    def to_sympy(self) -> Matrix:
        return Matrix([[e.to_sympy() for e in row] for row in self.entries])

    def column(self, j: int) -> Tuple[TPolynomial, ...]:
        return tuple(row[j] for row in self.entries)


def plucker_minors(m: TMatrix) -> Dict[KSubset, TPolynomial]:
    """Exact maximal minors P_I, keyed by lexicographically ordered k-subsets"""
    full = m.to_sympy()
    rows = list(range(m.k))
    minors = {}
    for columns in combinations(range(m.n), m.k):
        det = full.extract(rows, list(columns)).det(method="bareiss")
        minors[KSubset(tuple(c + 1 for c in columns))] = TPolynomial.from_sympy(det)
    if all(p.is_zero for p in minors.values()):
        raise ParameterError("every maximal minor of the family vanishes")
    return minors


def valuation_lifting(m: TMatrix) -> Lifting:
    """ψ(I) = order of vanishing of P_I at t = 0"""
    values = []
    for subset, minor in plucker_minors(m).items():
        valuation = minor.valuation()
        if valuation is None:
            raise DegenerateFamilyError(
                f"Plücker minor P_{subset.label} vanishes identically", subset=subset.elements
            )
        values.append(valuation)
    return Lifting.of(values)


@dataclass(frozen=True)
class GeneralPositionReport:
    """Verdict of the general position test with a violating subset"""
    general: bool
    witness: Optional[KSubset]
    at: str


def general_position_check(m: TMatrix, at: Union[str, Fraction, int] = "generic") -> GeneralPositionReport:
    minors = plucker_minors(m)
    if isinstance(at, str) and at == "generic":
        failing = next((s for s, p in minors.items() if p.is_zero), None)
        return GeneralPositionReport(failing is None, failing, "generic")
    t0 = to_fraction(at)
    failing = next((s for s, p in minors.items() if p.evaluate(t0) == 0), None)
    return GeneralPositionReport(failing is None, failing, str(t0))


def subdivision_from_matrix(m: TMatrix) -> Subdivision:
    cfg = hypersimplex_vertices(m.k, m.n)
    result = lower_envelope_subdivision(cfg, valuation_lifting(m))
    logger.debug(f"🔍 {m.k}x{m.n} family degenerates to {len(result)} cells")
    return result


def delete_column(m: TMatrix, i: int) -> TMatrix:
    """Drop column i (1-based)"""
    if not 1 <= i <= m.n:
        raise ParameterError(f"column {i} outside [1, {m.n}]")
    return TMatrix.of([row[: i - 1] + row[i:] for row in m.entries])


def contract_column(m: TMatrix, i: int) -> TMatrix:
    """Family of the arrangement restricted to the i-th hyperplane.

    Column i is normalized to have a unit entry at t = 0, the pivot row
    eliminates the other rows, and both the pivot row and column i are
    dropped. The minors of the result are P_{J ∪ {i}} up to units.
    """
    if not 1 <= i <= m.n:
        raise ParameterError(f"column {i} outside [1, {m.n}]")
    if m.k < 2:
        raise ParameterError("cannot contract a column of a single-row family")
    column = list(m.column(i - 1))
    valuations = [p.valuation() for p in column if not p.is_zero]
    if not valuations:
        raise DegenerateFamilyError(f"column {i} vanishes identically", subset=(i,))
    shift = min(valuations)
    rows = [list(row) for row in m.entries]
    if shift:
        for row in rows:
            row[i - 1] = row[i - 1].shift_down(shift)
    pivot = next(r for r, row in enumerate(rows) if row[i - 1].valuation() == 0)
    lead = rows[pivot][i - 1]
    reduced = []
    for r, row in enumerate(rows):
        if r == pivot:
            continue
        factor = row[i - 1]
        reduced.append([
            lead * entry - factor * rows[pivot][j]
            for j, entry in enumerate(row)
            if j != i - 1
        ])
    return TMatrix.of(reduced)


def reparametrize(m: TMatrix, e: int) -> TMatrix:
    """Substitute t -> t^e in every entry"""
    return TMatrix.of([[p.substitute_power(e) for p in row] for row in m.entries])


def scale_column(m: TMatrix, i: int, factor) -> TMatrix:
    factor = to_fraction(factor)
    if factor == 0:
        raise ParameterError("column scaling factor must be a unit")
    return TMatrix.of([
        [p if j != i - 1 else TPolynomial(tuple(c * factor for c in p.coefficients)) for j, p in enumerate(row)]
        for row in m.entries
    ])


def add_row_multiple(m: TMatrix, target: int, source: int, factor: TPolynomial) -> TMatrix:
    """row_target += factor * row_source, a determinant-one row operation"""
    if target == source:
        raise ParameterError("row operation needs two distinct rows")
    rows = [list(row) for row in m.entries]
    rows[target] = [a + factor * b for a, b in zip(rows[target], rows[source])]
    return TMatrix.of(rows)


def random_tmatrix(
    k: int,
    n: int,
    rng: np.random.Generator,
    degree: int = 2,
    bound: int = 5,
    monomial: bool = True,
) -> TMatrix:
    """Random family; monomial entries c·t^a give tropically generic valuations"""
    choices = np.array([c for c in range(-bound, bound + 1) if c])
    rows = []
    for _ in range(k):
        row = []
        for _ in range(n):
            if monomial:
                row.append(TPolynomial.monomial(int(rng.choice(choices)), int(rng.integers(0, degree + 1))))
            else:
                row.append(TPolynomial(tuple(int(c) for c in rng.integers(-bound, bound + 1, size=degree + 1))))
        rows.append(row)
    return TMatrix.of(rows)


def generic_random_tmatrix(k: int, n: int, rng: np.random.Generator, attempts: int = 100, **kwargs) -> TMatrix:
    """Draw random families until every Plücker minor is a nonzero polynomial"""
    for _ in range(attempts):
        m = random_tmatrix(k, n, rng, **kwargs)
        if general_position_check(m).general:
            return m
    raise DegenerateFamilyError(f"no generic {k}x{n} family in {attempts} draws")


def restrict_lifting(cfg: HypersimplexConfig, lift: Lifting, f: FacetLabel) -> Lifting:
    """ψ restricted to the vertices of a facet, re-coordinatized on the smaller hypersimplex"""
    if f.sign is FacetSign.PLUS:
        target = _build_config(cfg.k - 1, cfg.n - 1)
        kept = {s: v for s, v in zip(cfg.subsets, lift.values) if f.i in s}
    else:
        target = _build_config(cfg.k, cfg.n - 1)
        kept = {s: v for s, v in zip(cfg.subsets, lift.values) if f.i not in s}
    relabelled = {
        KSubset(tuple(j - 1 if j > f.i else j for j in s if j != f.i)): v for s, v in kept.items()
    }
    return Lifting(tuple(relabelled[s] for s in target.subsets))


def golden_split_family() -> TMatrix:
    """Rows (1,0,1,1), (0,1,1,1+t): only P_34 = t vanishes at t = 0"""
    return TMatrix.of([[1, 0, 1, 1], [0, 1, 1, [1, 1]]])


def concurrent_lines_family() -> TMatrix:
    """Five lines in the plane; lines 1, 2, 3 become concurrent at t = 0"""
    return TMatrix.of([
        [1, 0, 1, 1, 1],
        [0, 1, 1, 2, 4],
        [0, 0, [0, 1], 3, 10],
    ])
