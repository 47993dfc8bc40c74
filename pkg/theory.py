"""
Closed-form topology of the musical configuration spaces.

A curated table of the spaces that pitch, chord and rhythm data live in:
the circle of pitch classes, its powers (time-delay tuples), the symmetric
products Symm_n(S^1) of n-note chords, two sub-quotients used as worked
examples, products of chord spaces (time-delay embedded chords) and the
finite-subset spaces exp_n(S^1). For each space the module knows the Betti
numbers, the torsion, the diameter of the natural metric and a few
structural notes, and it can check an empirical barcode against them.

This is a lookup, not a computer algebra system. Anything outside the table
raises TheoryLookupError.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from errors import DomainError, TheoryLookupError
from persistence import Barcode, betti_at

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Space descriptors
# ---------------------------------------------------------------------------

class SpaceDescriptor:
    """Base class of every supported space."""

    def describe(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.describe()


def _check_positive(**params: int) -> None:
    for name, value in params.items():
        if not isinstance(value, int) or value < 1:
            raise TheoryLookupError(f"{name} must be a positive integer, got {value!r}")


@dataclass(frozen=True)
class Circle(SpaceDescriptor):
    """Pitch classes or onsets in one cycle: R/Z."""

    def describe(self) -> str:
        return "S^1"


@dataclass(frozen=True)
class Sphere(SpaceDescriptor):
    n: int

    def __post_init__(self):
        _check_positive(n=self.n)

    def describe(self) -> str:
        return f"S^{self.n}"


@dataclass(frozen=True)
class CirclePower(SpaceDescriptor):
    """(S^1)^d, the space of time-delay tuples of pitch classes."""

    d: int

    def __post_init__(self):
        _check_positive(d=self.d)

    def describe(self) -> str:
        return f"(S^1)^{self.d}"


@dataclass(frozen=True)
class Symm(SpaceDescriptor):
    """Symm_n(S^1), unordered n-note chords of pitch classes."""

    n: int

    def __post_init__(self):
        _check_positive(n=self.n)

    def describe(self) -> str:
        return f"Symm_{self.n}(S^1)"


@dataclass(frozen=True)
class SymmA3_3(SpaceDescriptor):
    """(S^1)^3 modulo the alternating group A_3."""

    def describe(self) -> str:
        return "Symm_3^A3(S^1)"


@dataclass(frozen=True)
class SymmZ4_4(SpaceDescriptor):
    """(S^1)^4 modulo the cyclic group Z/4 acting by rotating coordinates."""

    def describe(self) -> str:
        return "Symm_4^Z4(S^1)"


@dataclass(frozen=True)
class ChordDelayProduct(SpaceDescriptor):
    """(Symm_k(S^1))^j, j consecutive k-note chords."""

    k: int
    j: int

    def __post_init__(self):
        _check_positive(k=self.k, j=self.j)

    def describe(self) -> str:
        return f"(Symm_{self.k}(S^1))^{self.j}"


@dataclass(frozen=True)
class Exp(SpaceDescriptor):
    """exp_n(S^1), non-empty subsets of the circle with at most n points."""

    n: int

    def __post_init__(self):
        _check_positive(n=self.n)

    def describe(self) -> str:
        return f"exp_{self.n}(S^1)"


@dataclass(frozen=True)
class Product(SpaceDescriptor):
    factors: Tuple[SpaceDescriptor, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise TheoryLookupError("a product needs at least one factor")
        object.__setattr__(self, 'factors', factors)

    def describe(self) -> str:
        return " x ".join(f.describe() for f in self.factors)


# ---------------------------------------------------------------------------
# Poincare polynomials and homology
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PoincarePolynomial:
    """Sum of b_k t^k; coefficients indexed by degree, trailing zeros trimmed."""

    coefficients: Tuple[int, ...]

    def __post_init__(self):
        coefficients = list(self.coefficients)
        if any(c < 0 for c in coefficients):
            raise DomainError("Betti numbers are non-negative")
        while coefficients and coefficients[-1] == 0:
            coefficients.pop()
        object.__setattr__(self, 'coefficients', tuple(coefficients))

    def __mul__(self, other: "PoincarePolynomial") -> "PoincarePolynomial":
        if not self.coefficients or not other.coefficients:
            return PoincarePolynomial(())
        product = [0] * (len(self.coefficients) + len(other.coefficients) - 1)
        for i, a in enumerate(self.coefficients):
            for j, b in enumerate(other.coefficients):
                product[i + j] += a * b
        return PoincarePolynomial(tuple(product))

    def __pow__(self, exponent: int) -> "PoincarePolynomial":
        result = PoincarePolynomial((1,))
        for _ in range(exponent):
            result = result * self
        return result

    def betti(self, k: int) -> int:
        return self.coefficients[k] if 0 <= k < len(self.coefficients) else 0

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __str__(self) -> str:
        terms = []
        for k, c in enumerate(self.coefficients):
            if c == 0:
                continue
            power = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
            if k == 0:
                terms.append(str(c))
            else:
                terms.append(power if c == 1 else f"{c}{power}")
        return " + ".join(terms) if terms else "0"


@dataclass(frozen=True)
class HomologyGroup:
    """Z^rank plus cyclic torsion summands."""

    rank: int
    torsion: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.rank < 0:
            raise DomainError("rank must be >= 0")
        if any(t < 2 for t in self.torsion):
            raise DomainError("torsion coefficients must be >= 2")

    def __str__(self) -> str:
        parts = ["Z" if self.rank == 1 else f"Z^{self.rank}"] if self.rank else []
        parts += [f"Z{t}" for t in self.torsion]
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class HomologySummary:
    """Integral homology per dimension, H_0 first."""

    groups: Tuple[HomologyGroup, ...]

    @property
    def ranks(self) -> Tuple[int, ...]:
        return tuple(g.rank for g in self.groups)

    @property
    def has_torsion(self) -> bool:
        return any(g.torsion for g in self.groups)

    def __getitem__(self, k: int) -> HomologyGroup:
        return self.groups[k] if 0 <= k < len(self.groups) else HomologyGroup(0)

    def lines(self) -> List[str]:
        return [f"H{k} = {g}" for k, g in enumerate(self.groups)]


def _sphere_betti(n: int) -> Tuple[int, ...]:
    return (1,) + (0,) * (n - 1) + (1,)


def _exp_sphere_dimension(n: int) -> int:
    return n if n % 2 == 1 else n - 1


def _torus_betti(d: int) -> Tuple[int, ...]:
    return tuple(math.comb(d, k) for k in range(d + 1))


_Z = HomologyGroup(1)
_ZERO = HomologyGroup(0)


def _free(ranks: Sequence[int]) -> HomologySummary:
    return HomologySummary(tuple(HomologyGroup(r) for r in ranks))


def homology_summary(space: SpaceDescriptor) -> HomologySummary:
    """
    Integral homology of a supported space.

    Raises:
        TheoryLookupError: if the space is outside the table, or a product has a
            factor with torsion.
    """
    if isinstance(space, Circle):
        return _free((1, 1))
    if isinstance(space, Sphere):
        return _free(_sphere_betti(space.n))
    if isinstance(space, CirclePower):
        return _free(_torus_betti(space.d))
    if isinstance(space, Symm):
        # disc bundle over the circle
        return _free((1, 1))
    if isinstance(space, SymmA3_3):
        # S^1 x S^2
        return _free((1, 1, 1, 1))
    if isinstance(space, SymmZ4_4):
        return HomologySummary((_Z, _Z, HomologyGroup(1, (2,)), HomologyGroup(1, (2,)), _ZERO))
    if isinstance(space, ChordDelayProduct):
        # homotopy equivalent to the j-torus
        return _free(_torus_betti(space.j))
    if isinstance(space, Exp):
        return _free(_sphere_betti(_exp_sphere_dimension(space.n)))
    if isinstance(space, Product):
        summaries = [homology_summary(f) for f in space.factors]
        if any(s.has_torsion for s in summaries):
            raise TheoryLookupError(
                f"homology of {space.describe()} needs the Tor terms of the Kunneth formula; "
                "only torsion-free factors are supported"
            )
        return _free(poincare_polynomial(space).coefficients)
    raise TheoryLookupError(f"no homology known for {space!r}")


def poincare_polynomial(space: SpaceDescriptor) -> PoincarePolynomial:
    """
    Poincare polynomial of a supported space. Products multiply factor-wise.

    Raises:
        TheoryLookupError: if the space is outside the table.
    """
    if isinstance(space, CirclePower):
        return poincare_polynomial(Circle()) ** space.d
    if isinstance(space, ChordDelayProduct):
        return poincare_polynomial(Symm(space.k)) ** space.j
    if isinstance(space, Product):
        result = PoincarePolynomial((1,))
        for factor in space.factors:
            result = result * poincare_polynomial(factor)
        return result
    return PoincarePolynomial(homology_summary(space).ranks)


def space_diameter(space: SpaceDescriptor) -> float:
    """
    Diameter of a space under the metric the pipeline uses for it.

    Sum metrics are used for tuples and products, the chord-class metric for
    Symm_n and the Hausdorff distance for exp_n.
    """
    if isinstance(space, (Circle, Exp)):
        return 0.5
    if isinstance(space, CirclePower):
        return space.d / 2
    if isinstance(space, Symm):
        return space.n / 2
    if isinstance(space, ChordDelayProduct):
        return space.j * space.k / 2
    if isinstance(space, Product):
        return sum(space_diameter(f) for f in space.factors)
    raise TheoryLookupError(f"no metric diameter recorded for {space.describe()}")


def space_notes(space: SpaceDescriptor) -> List[str]:
    """Structural facts recorded alongside the homology."""
    if isinstance(space, Symm):
        n = space.n
        notes = [
            f"fibre bundle over S^1 with fibre a {n - 1}-simplex; homotopy equivalent to S^1",
            "orientable" if n % 2 == 1 else "non-orientable",
        ]
        if n == 2:
            notes.append("homeomorphic to the Moebius band")
        return notes
    if isinstance(space, SymmZ4_4):
        return ["torsion in H2 and H3 is invisible to Betti numbers; compare GF(2) and GF(3) barcodes"]
    if isinstance(space, SymmA3_3):
        return ["homeomorphic to S^1 x S^2"]
    if isinstance(space, Exp):
        n = space.n
        notes = [f"homotopy equivalent to S^{_exp_sphere_dimension(n)}"]
        if n == 3:
            notes.append("homeomorphic to S^3; exp_1(S^1) sits inside it as a trefoil knot")
        if n % 2 == 0:
            notes.append(f"the inclusion exp_{n - 1} -> exp_{n} induces multiplication by 2 on H{n - 1}")
        return notes
    if isinstance(space, ChordDelayProduct):
        return [f"homotopy equivalent to the {space.j}-torus"]
    if isinstance(space, Product):
        return [note for f in space.factors for note in space_notes(f)]
    return []


# ---------------------------------------------------------------------------
# Barcode comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DimensionComparison:
    dim: int
    expected: int
    observed: Tuple[int, ...]
    computed: bool = True

    @property
    def constant(self) -> bool:
        return len(self.observed) == 1

    @property
    def match(self) -> bool:
        return not self.computed or (self.constant and self.observed[0] == self.expected)


@dataclass(frozen=True)
class BarcodeComparison:
    """Per-dimension agreement of a barcode with a space's Betti numbers on a scale window."""

    space: str
    window: Tuple[float, float]
    dimensions: Tuple[DimensionComparison, ...]
    notes: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def match(self) -> bool:
        return all(d.match for d in self.dimensions)

    @property
    def mismatches(self) -> List[DimensionComparison]:
        return [d for d in self.dimensions if not d.match]

    def to_dict(self) -> dict:
        return {
            "space": self.space,
            "window": list(self.window),
            "match": self.match,
            "dimensions": [
                {
                    "dim": d.dim,
                    "expected": d.expected,
                    "observed": list(d.observed),
                    "computed": d.computed,
                    "match": d.match,
                }
                for d in self.dimensions
            ],
            "notes": list(self.notes),
        }

    def to_text(self) -> str:
        lo, hi = self.window
        lines = [f"Comparison with {self.space} on [{lo:g}, {hi:g}]: {'match' if self.match else 'MISMATCH'}"]
        for d in self.dimensions:
            if not d.computed:
                lines.append(f"  H{d.dim}: expected {d.expected}, not computed")
                continue
            seen = "/".join(str(v) for v in d.observed)
            status = "ok" if d.match else ("varies" if not d.constant else "differs")
            lines.append(f"  H{d.dim}: expected {d.expected}, observed {seen} ({status})")
        lines.extend(f"  note: {n}" for n in self.notes)
        return "\n".join(lines)


def _betti_values(barcode: Barcode, dim: int, lo: float, hi: float) -> Tuple[int, ...]:
    # Betti numbers are right-continuous step functions that only change at bar endpoints
    breakpoints = {lo}
    for bar in barcode.in_dimension(dim):
        for point in (bar.birth, bar.death):
            if lo < point <= hi:
                breakpoints.add(point)
    values: List[int] = []
    for eps in sorted(breakpoints):
        value = betti_at(barcode, eps, dim)
        if value not in values:
            values.append(value)
    return tuple(values)


def compare_barcode(barcode: Barcode, space: SpaceDescriptor,
                    window: Tuple[float, float]) -> BarcodeComparison:
    """
    Check whether each Betti number is constant on the window and equal to
    the space's.

    Dimensions above the barcode's dimension cap are listed as not computed.

    Raises:
        DomainError: if the window is empty.
        TheoryLookupError: if the space is outside the table.
    """
    lo, hi = window
    if not lo < hi:
        raise DomainError(f"window must satisfy lo < hi, got [{lo}, {hi}]")
    polynomial = poincare_polynomial(space)
    top = max(polynomial.degree, barcode.dimensions[-1])
    computed_top = barcode.dimensions[-1]

    rows = []
    for dim in range(top + 1):
        if dim > computed_top:
            rows.append(DimensionComparison(dim, polynomial.betti(dim), (), computed=False))
        else:
            rows.append(DimensionComparison(dim, polynomial.betti(dim),
                                            _betti_values(barcode, dim, lo, hi)))
    report = BarcodeComparison(space.describe(), (lo, hi), tuple(rows), tuple(space_notes(space)))
    logger.debug("%s", report.to_text())
    return report


# ---------------------------------------------------------------------------
# Parsing space names (CLI)
# ---------------------------------------------------------------------------

_NO_ARGS = {
    "circle": Circle,
    "symm-a3-3": SymmA3_3,
    "symm-z4-4": SymmZ4_4,
}

_WITH_ARGS = {
    "sphere": (Sphere, 1),
    "torus": (CirclePower, 1),
    "circle-power": (CirclePower, 1),
    "symm": (Symm, 1),
    "chord-delay": (ChordDelayProduct, 2),
    "exp": (Exp, 1),
}

SPACE_SYNTAX = (
    "circle | sphere:N | torus:D | circle-power:D | symm:N | symm-a3-3 | symm-z4-4 | "
    "chord-delay:K,J | exp:N, joined with ' x ' for products"
)


def _parse_factor(text: str) -> SpaceDescriptor:
    name, _, args = text.strip().lower().partition(":")
    if name in _NO_ARGS and not args:
        return _NO_ARGS[name]()
    if name in _WITH_ARGS:
        cls, arity = _WITH_ARGS[name]
        try:
            values = [int(a) for a in args.split(",")] if args else []
        except ValueError:
            raise TheoryLookupError(f"bad parameters in {text!r}") from None
        if len(values) != arity:
            raise TheoryLookupError(f"{name} takes {arity} parameter(s), got {text!r}")
        return cls(*values)
    raise TheoryLookupError(f"unknown space {text!r}; expected {SPACE_SYNTAX}")


def parse_space(text: str) -> SpaceDescriptor:
    """Parse names such as 'circle', 'symm:3' or 'circle x sphere:2'."""
    parts = [p for p in text.split(" x ")]
    factors = [_parse_factor(p) for p in parts if p.strip()]
    if not factors:
        raise TheoryLookupError("empty space name")
    return factors[0] if len(factors) == 1 else Product(tuple(factors))


def theory_table(space: SpaceDescriptor) -> Dict[str, object]:
    """Everything known about a space, as a JSON-ready dict."""
    summary = homology_summary(space)
    try:
        diameter: Optional[float] = space_diameter(space)
    except TheoryLookupError:
        diameter = None
    return {
        "space": space.describe(),
        "poincare_polynomial": list(poincare_polynomial(space).coefficients),
        "homology": [str(g) for g in summary.groups],
        "diameter": diameter,
        "notes": space_notes(space),
    }
