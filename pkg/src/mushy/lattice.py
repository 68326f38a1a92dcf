"""Exact lattice energetics for sets of Z^2 sites with two bond strengths.

Sites are integer pairs (i1, i2).  An axis bond between adjacent sites is
"strong" when the shared coordinate is odd and "weak" when it is even, so
the even sublattice (2Z)^2 is held together by weak bonds only.  The
perimeter energy charges eps*beta per cut strong bond and eps^2*alpha per
cut weak bond; the movement penalty charges eps^3 per unit of Chebyshev
transport against the previous set.  All values are exact fractions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Optional

Site = tuple[int, int]

_RATIONAL = int | Fraction | str


def _frac(x: _RATIONAL) -> Fraction:
    """Exact conversion; strings accept 'p/q' and decimal literals."""
    return x if isinstance(x, Fraction) else Fraction(x)


class BondKind(Enum):
    STRONG = "strong"
    WEAK = "weak"
    NOT_NEIGHBORS = "not_neighbors"


class EmptyDistanceError(ValueError):
    """Chebyshev distance to the empty set is undefined."""


@dataclass(frozen=True)
class Params:
    """Model parameters; all exact rationals, gamma = tau/eps."""

    alpha: Fraction  # weak bond weight, > 0
    beta: Fraction   # strong bond weight, > 0
    eps: Fraction    # lattice spacing, > 0
    tau: Fraction    # time step, > 0

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "eps", "tau"):
            object.__setattr__(self, name, _frac(getattr(self, name)))
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def gamma(self) -> Fraction:
        return self.tau / self.eps

    @property
    def four_ag(self) -> Fraction:
        """The regime discriminant 4*alpha*gamma."""
        return 4 * self.alpha * self.gamma

    @classmethod
    def from_gamma(cls, alpha: _RATIONAL, beta: _RATIONAL, gamma: _RATIONAL,
                   eps: _RATIONAL) -> "Params":
        eps = _frac(eps)
        return cls(_frac(alpha), _frac(beta), eps, _frac(gamma) * eps)

    @classmethod
    def for_limit(cls, alpha: _RATIONAL, beta: _RATIONAL,
                  gamma: _RATIONAL) -> "Params":
        """Parameters for the continuum flow, where only gamma matters."""
        return cls.from_gamma(alpha, beta, gamma, Fraction(1))


class DiscreteSet:
    """Immutable finite set of lattice sites with O(1) membership."""

    __slots__ = ("_sites", "_bbox")

    def __init__(self, sites: Iterable[Site] = ()) -> None:
        self._sites = frozenset((int(a), int(b)) for a, b in sites)
        self._bbox: Optional[tuple[int, int, int, int]] = None

    @property
    def sites(self) -> frozenset[Site]:
        return self._sites

    def __contains__(self, site: object) -> bool:
        return site in self._sites

    def __len__(self) -> int:
        return len(self._sites)

    def __iter__(self) -> Iterator[Site]:
        return iter(self._sites)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DiscreteSet) and self._sites == other._sites

    def __hash__(self) -> int:
        return hash(self._sites)

    def __repr__(self) -> str:
        return f"DiscreteSet({len(self._sites)} sites)"

    def bbox(self) -> Optional[tuple[int, int, int, int]]:
        """(min1, max1, min2, max2), or None for the empty set."""
        if not self._sites:
            return None
        if self._bbox is None:
            xs = [s[0] for s in self._sites]
            ys = [s[1] for s in self._sites]
            self._bbox = (min(xs), max(xs), min(ys), max(ys))
        return self._bbox

    def union(self, other: "DiscreteSet | Iterable[Site]") -> "DiscreteSet":
        other_sites = other._sites if isinstance(other, DiscreteSet) else other
        return DiscreteSet(self._sites.union(other_sites))

    def difference(self, other: "DiscreteSet | Iterable[Site]") -> "DiscreteSet":
        other_sites = other._sites if isinstance(other, DiscreteSet) else other
        return DiscreteSet(self._sites.difference(other_sites))

    def intersection(self, other: "DiscreteSet | Iterable[Site]") -> "DiscreteSet":
        other_sites = other._sites if isinstance(other, DiscreteSet) else other
        return DiscreteSet(self._sites.intersection(other_sites))

    def translate(self, d1: int, d2: int) -> "DiscreteSet":
        return DiscreteSet((a + d1, b + d2) for a, b in self._sites)

    @classmethod
    def rectangle(cls, x0: int, x1: int, y0: int, y1: int) -> "DiscreteSet":
        """All sites of [x0,x1] x [y0,y1]; empty when the bounds cross."""
        if x1 < x0 or y1 < y0:
            return cls()
        return cls((a, b) for a in range(x0, x1 + 1) for b in range(y0, y1 + 1))

    # -- plain-text and JSON forms ("i1 i2" per line / {"sites": [[i1,i2],...]})

    def to_text(self) -> str:
        return "\n".join(f"{a} {b}" for a, b in sorted(self._sites)) + "\n" if self._sites else ""

    @classmethod
    def from_text(cls, text: str) -> "DiscreteSet":
        sites = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            a, b = line.split()
            sites.append((int(a), int(b)))
        return cls(sites)

    def to_json_obj(self) -> dict:
        return {"sites": [[a, b] for a, b in sorted(self._sites)]}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "DiscreteSet":
        return cls((int(a), int(b)) for a, b in obj["sites"])


@dataclass(frozen=True)
class CoordRect:
    """Coordinate rectangle [x0,x1] x [y0,y1] with all four vertices even."""

    x0: int
    x1: int
    y0: int
    y1: int

    def __post_init__(self) -> None:
        for v in (self.x0, self.x1, self.y0, self.y1):
            if v % 2 != 0:
                raise ValueError("rectangle vertices must be even")
        if self.x1 < self.x0 or self.y1 < self.y0:
            raise ValueError("rectangle bounds must not cross")

    @property
    def extent1(self) -> int:
        return self.x1 - self.x0

    @property
    def extent2(self) -> int:
        return self.y1 - self.y0

    def sites(self) -> DiscreteSet:
        return DiscreteSet.rectangle(self.x0, self.x1, self.y0, self.y1)

    def contains(self, site: Site) -> bool:
        return self.x0 <= site[0] <= self.x1 and self.y0 <= site[1] <= self.y1


@dataclass(frozen=True)
class RectState:
    """A bulk rectangle (possibly absent) plus isolated even-sublattice sites."""

    rect: Optional[CoordRect]
    islands: DiscreteSet = field(default_factory=DiscreteSet)

    def __post_init__(self) -> None:
        for s in self.islands:
            if s[0] % 2 != 0 or s[1] % 2 != 0:
                raise ValueError(f"island {s} is not on the even sublattice")
            if self.rect is not None and self.rect.contains(s):
                raise ValueError(f"island {s} lies inside the rectangle")

    def materialize(self) -> DiscreteSet:
        base = self.rect.sites() if self.rect is not None else DiscreteSet()
        return base.union(self.islands)


@dataclass(frozen=True)
class StructureViolation:
    """Witness that a set is not rectangle-plus-even-islands."""

    witness: Site
    reason: str


_AXIS_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))
_RING_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1),
               (1, 1), (1, -1), (-1, 1), (-1, -1))


def bond_kind(i: Site, j: Site) -> BondKind:
    """Classify the pair: strong/weak axis bond or not neighbors at all."""
    d1, d2 = abs(i[0] - j[0]), abs(i[1] - j[1])
    if max(d1, d2) != 1 or min(d1, d2) != 0:
        return BondKind.NOT_NEIGHBORS
    shared = i[1] if d1 == 1 else i[0]
    return BondKind.STRONG if shared % 2 != 0 else BondKind.WEAK


def cut_bond_counts(I: DiscreteSet) -> tuple[int, int]:
    """(strong, weak) counts of bonds leaving I, each cut bond once."""
    strong = weak = 0
    for a, b in I:
        for da, db in _AXIS_STEPS:
            j = (a + da, b + db)
            if j in I:
                continue
            shared = b if da != 0 else a
            if shared % 2 != 0:
                strong += 1
            else:
                weak += 1
    return strong, weak


def perimeter_energy(I: DiscreteSet, p: Params) -> Fraction:
    """eps*beta*(cut strong bonds) + eps^2*alpha*(cut weak bonds)."""
    strong, weak = cut_bond_counts(I)
    return p.eps * p.beta * strong + p.eps * p.eps * p.alpha * weak


def chebyshev_dist_to_set(site: Site, S: DiscreteSet) -> int:
    """Least Chebyshev distance from site to a member of S, by expanding rings."""
    if len(S) == 0:
        raise EmptyDistanceError("distance to the empty set")
    if site in S:
        return 0
    x0, x1, y0, y1 = S.bbox()
    a, b = site
    # the nearest member is no farther than the far corner of the bbox
    limit = max(abs(a - x0), abs(a - x1), abs(b - y0), abs(b - y1))
    for d in range(1, limit + 1):
        for u in range(a - d, a + d + 1):
            if (u, b - d) in S or (u, b + d) in S:
                return d
        for v in range(b - d + 1, b + d):
            if (a - d, v) in S or (a + d, v) in S:
                return d
    raise AssertionError("unreachable: bbox bound exhausted")


def chebyshev_dist_to_complement(site: Site, S: DiscreteSet) -> int:
    """Least Chebyshev distance from site to a non-member of S (S finite)."""
    if site not in S:
        return 0
    d = 1
    a, b = site
    while True:
        for u in range(a - d, a + d + 1):
            if (u, b - d) not in S or (u, b + d) not in S:
                return d
        for v in range(b - d + 1, b + d):
            if (a - d, v) not in S or (a + d, v) not in S:
                return d
        d += 1


def interior_depth_map(I: DiscreteSet) -> dict[Site, int]:
    """Chebyshev distance to the complement for every site of I, by peeling."""
    depth: dict[Site, int] = {}
    frontier = []
    for s in I:
        a, b = s
        for da, db in _RING_STEPS:
            if (a + da, b + db) not in I:
                depth[s] = 1
                frontier.append(s)
                break
    d = 1
    while frontier:
        nxt = []
        for a, b in frontier:
            for da, db in _RING_STEPS:
                j = (a + da, b + db)
                if j in I._sites and j not in depth:
                    depth[j] = d + 1
                    nxt.append(j)
        frontier = nxt
        d += 1
    return depth


def dissipation_count(I: DiscreteSet, Iprev: DiscreteSet) -> int:
    """Integer transport sum: removed sites weighted by their depth in Iprev,
    added sites by their distance to Iprev."""
    total = 0
    removed = Iprev.sites - I.sites
    added = I.sites - Iprev.sites
    if removed:
        depth = interior_depth_map(Iprev)
        for s in removed:
            total += depth[s]
    for s in added:
        total += chebyshev_dist_to_set(s, Iprev)
    return total


def dissipation(I: DiscreteSet, Iprev: DiscreteSet, p: Params) -> Fraction:
    """eps^3 times the Chebyshev transport count between I and Iprev."""
    return p.eps ** 3 * dissipation_count(I, Iprev)


def step_energy(I: DiscreteSet, Iprev: DiscreteSet, p: Params) -> Fraction:
    """Perimeter of I plus movement penalty against Iprev, scaled by 1/tau."""
    return perimeter_energy(I, p) + dissipation(I, Iprev, p) / p.tau


def connected_components(I: DiscreteSet) -> list[DiscreteSet]:
    """Components under 8-adjacency (unit squares sharing at least a corner),
    sorted by least site for determinism."""
    seen: set[Site] = set()
    comps = []
    for start in I:
        if start in seen:
            continue
        comp = {start}
        seen.add(start)
        stack = [start]
        while stack:
            a, b = stack.pop()
            for da, db in _RING_STEPS:
                j = (a + da, b + db)
                if j in I._sites and j not in seen:
                    seen.add(j)
                    comp.add(j)
                    stack.append(j)
        comps.append(DiscreteSet(comp))
    comps.sort(key=lambda c: min(c.sites))
    return comps


def is_connected(I: DiscreteSet) -> bool:
    """Empty sets count as connected."""
    return len(I) == 0 or len(connected_components(I)) == 1


def decompose(I: DiscreteSet) -> RectState | StructureViolation:
    """Split I into a full even-vertex rectangle plus even-sublattice islands.

    The rectangle is the unique component containing sites off the even
    sublattice (empty when there are none).  Returns a witness when the
    structure fails.
    """
    off_even = [s for s in I if s[0] % 2 != 0 or s[1] % 2 != 0]
    if not off_even:
        return RectState(rect=None, islands=I)

    comps = connected_components(I)
    bulk = None
    for c in comps:
        if any(s[0] % 2 != 0 or s[1] % 2 != 0 for s in c):
            if bulk is not None:
                witness = next(s for s in c if s[0] % 2 != 0 or s[1] % 2 != 0)
                return StructureViolation(witness, "two components carry off-even sites")
            bulk = c

    assert bulk is not None
    x0, x1, y0, y1 = bulk.bbox()
    if x0 % 2 or x1 % 2 or y0 % 2 or y1 % 2:
        return StructureViolation((x0, y0), "bulk component has an odd vertex")
    if len(bulk) != (x1 - x0 + 1) * (y1 - y0 + 1):
        for a in range(x0, x1 + 1):
            for b in range(y0, y1 + 1):
                if (a, b) not in bulk:
                    return StructureViolation((a, b), "bulk component is not a full rectangle")
    rect = CoordRect(x0, x1, y0, y1)
    islands = I.difference(bulk)
    for s in islands:
        if s[0] % 2 != 0 or s[1] % 2 != 0:
            return StructureViolation(s, "residual site off the even sublattice")
    return RectState(rect=rect, islands=islands)
