"""L-polynomials from point counts, Newton polygons and reduction classification.

Everything is exact integer arithmetic; no complex roots are ever computed.
Polynomials are coefficient tuples, least-significant first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .curves import PointCountSequence
from .errors import InexactDivision, WeilViolation
from .splitting import MIXED, ORDINARY, SUPERSINGULAR, maximal_count, ssg_charpoly


@dataclass(frozen=True)
class LPolynomial:
    p: int
    g: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != 2 * self.g + 1:
            raise ValueError(f"expected {2 * self.g + 1} coefficients, got {len(self.coeffs)}")

    def __getitem__(self, i):
        return self.coeffs[i]


def weil_ok(N: int, p: int, k: int, g: int) -> bool:
    """(N - p^k - 1)^2 <= 4 g^2 p^k."""
    return (N - p**k - 1) ** 2 <= 4 * g * g * p**k


def _as_counts(counts) -> tuple[int, Sequence[int]]:
    if isinstance(counts, PointCountSequence):
        return counts.p, counts.counts
    raise TypeError("expected a PointCountSequence")


def lpoly_from_counts(counts: PointCountSequence, g: int) -> LPolynomial:
    """Recover L(t) from N_1..N_g through Newton's identities and the functional equation."""
    p, N = _as_counts(counts)
    if len(N) < g:
        raise ValueError(f"need at least g = {g} counts, got {len(N)}")
    for k, n in enumerate(N[:g], start=1):
        if not weil_ok(n, p, k, g):
            raise WeilViolation(f"N_{k} = {n} violates the Weil bound for g = {g}, p = {p}")
    s = [0] + [p**k + 1 - N[k - 1] for k in range(1, g + 1)]
    e = [1] + [0] * (2 * g)
    for i in range(1, g + 1):
        acc = sum((-1) ** (j - 1) * e[i - j] * s[j] for j in range(1, i + 1))
        if acc % i:
            raise InexactDivision(f"Newton identity step {i}: {acc} not divisible by {i}")
        e[i] = acc // i
    for i in range(g + 1, 2 * g + 1):
        e[i] = p ** (i - g) * e[2 * g - i]
    return LPolynomial(p, g, tuple((-1) ** i * e[i] for i in range(2 * g + 1)))


def power_sums(L: LPolynomial, r: int) -> list[int]:
    """s_1..s_r of the inverse roots of L, by running Newton's identities forward."""
    e = [(-1) ** i * c for i, c in enumerate(L.coeffs)]
    n = 2 * L.g
    s = [0] * (r + 1)
    for k in range(1, r + 1):
        acc = (-1) ** (k - 1) * k * e[k] if k <= n else 0
        for j in range(1, min(k, n + 1)):
            acc += (-1) ** (j - 1) * e[j] * s[k - j]
        s[k] = acc
    return s[1:]


def counts_from_lpoly(L: LPolynomial, r: int) -> list[int]:
    """N_1..N_r predicted by L."""
    return [L.p**k + 1 - s for k, s in enumerate(power_sums(L, r), start=1)]


def charpoly(L: LPolynomial) -> tuple[int, ...]:
    """Phi(t) = t^{2g} L(1/t), least-significant first."""
    return tuple(reversed(L.coeffs))


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class NewtonPolygon:
    segments: tuple[tuple[Fraction, int], ...]

    @property
    def height(self) -> int:
        return sum(m for _, m in self.segments)

    def multiplicity(self, slope) -> int:
        return sum(m for s, m in self.segments if s == Fraction(slope))

    def is_symmetric(self) -> bool:
        return all(self.multiplicity(1 - s) == m for s, m in self.segments)

    def isogeny_factors(self) -> list[str]:
        """Simple p-divisible factors G_{d,c} of slope d/(c+d) read off the polygon."""
        out = []
        for s, w in self.segments:
            d, h = s.numerator, s.denominator
            if w % h == 0:
                out.append(f"G_{{{d},{h - d}}}^{w // h}")
            else:  # pragma: no cover - integer vertices make this unreachable
                out.append(f"segment(slope={s}, length={w})")
        return out

    def to_json(self) -> list:
        return [[str(s), m] for s, m in self.segments]


def newton_polygon(L: LPolynomial) -> NewtonPolygon:
    """Lower convex hull of (i, v_p(c_i)) over nonzero coefficients."""
    pts = [(i, valuation(c, L.p)) for i, c in enumerate(L.coeffs) if c != 0]
    hull: list[tuple[int, int]] = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point unless it lies strictly below the chord
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    segs: dict[Fraction, int] = {}
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        s = Fraction(y2 - y1, x2 - x1)
        segs[s] = segs.get(s, 0) + (x2 - x1)
    return NewtonPolygon(tuple(sorted(segs.items())))


def p_rank(L: LPolynomial) -> int:
    return newton_polygon(L).multiplicity(0)


@dataclass(frozen=True)
class ReductionObservation:
    """What point counts reveal.  Polygon-derived fields are None when too few counts exist."""

    maximal_over_p2: bool
    n2: int
    p_rank: Optional[int] = None
    newton: Optional[NewtonPolygon] = None
    kind: Optional[str] = None
    charpoly_is_ssg: Optional[bool] = None
    charpoly: Optional[tuple[int, ...]] = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {
            "class": self.kind,
            "p_rank": self.p_rank,
            "newton": self.newton.to_json() if self.newton is not None else None,
            "charpoly": list(self.charpoly) if self.charpoly is not None else None,
            "charpoly_is_ssg": self.charpoly_is_ssg,
            "n2": self.n2,
            "maximal_over_p2": self.maximal_over_p2,
        }


def classify(L: LPolynomial, n2: Optional[int] = None) -> ReductionObservation:
    """Ordinary / supersingular / mixed from the Newton polygon, plus F_{p^2} maximality.

    ``n2`` is the observed #C(F_{p^2}); when omitted it is derived from L.
    """
    if n2 is None:
        n2 = counts_from_lpoly(L, 2)[1]
    poly = newton_polygon(L)
    rank = poly.multiplicity(0)
    if rank == L.g:
        kind = ORDINARY
    elif poly.multiplicity(Fraction(1, 2)) == 2 * L.g:
        kind = SUPERSINGULAR
    else:
        kind = MIXED
    phi = charpoly(L)
    return ReductionObservation(
        maximal_over_p2=n2 == maximal_count(L.p, L.g),
        n2=n2,
        p_rank=rank,
        newton=poly,
        kind=kind,
        charpoly_is_ssg=phi == ssg_charpoly(L.p, L.g),
        charpoly=phi,
    )


@dataclass
class ValidationReport:
    failures: list[str] = field(default_factory=list)
    predicted_next: Optional[int] = None

    @property
    def ok(self) -> bool:
        return not self.failures


def validate(L: LPolynomial, counts: PointCountSequence,
             next_count: Optional[int] = None) -> ValidationReport:
    """Functional equation, Weil coefficient bounds and count round-trip.

    ``next_count`` is an independently counted N_{len(counts)+1}; when given it
    is compared against the value L predicts.
    """
    rep = ValidationReport()
    p, g, c = L.p, L.g, L.coeffs
    if c[0] != 1:
        rep.failures.append(f"c_0 = {c[0]} != 1")
    for i in range(g + 1):
        if c[2 * g - i] != p ** (g - i) * c[i]:
            rep.failures.append(f"functional equation fails at i = {i}")
    for i, ci in enumerate(c):
        if ci * ci > math.comb(2 * g, i) ** 2 * p**i:
            rep.failures.append(f"|c_{i}| = {abs(ci)} exceeds the Weil bound")
    _, N = _as_counts(counts)
    r = len(N)
    predicted = counts_from_lpoly(L, r + 1)
    for k in range(r):
        if predicted[k] != N[k]:
            rep.failures.append(f"round trip: L predicts N_{k + 1} = {predicted[k]}, counted {N[k]}")
    rep.predicted_next = predicted[r]
    if next_count is not None and next_count != predicted[r]:
        rep.failures.append(f"fresh count N_{r + 1} = {next_count}, L predicts {predicted[r]}")
    return rep
