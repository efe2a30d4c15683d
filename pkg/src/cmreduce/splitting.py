"""Splitting of unramified primes in abelian CM fields and the reduction-type predictor.

Two field shapes are supported:

* ``Cyclotomic(N)``: K = Q(zeta_N), K0 = Q(zeta_N + zeta_N^-1), Gal(K/Q) = (Z/N)^x.
* ``CompositeReal(M, d)``: K = Q(zeta_M + zeta_M^-1, zeta_d) with d in {3, 4},
  Gal(K/Q) = (Z/M)^x/{+-1} x (Z/d)^x.

In both cases complex conjugation generates Gal(K/K0), so a prime of K0 above p
stays inert in K exactly when complex conjugation lies in the decomposition
group generated by Frobenius at p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from sympy import isprime, totient

from .errors import NotAUnit, RamifiedPrime

INERT = "inert"
SPLIT = "split"

ORDINARY = "ordinary"
SUPERSINGULAR = "supersingular"
MIXED = "mixed"
UNDETERMINED = "undetermined"


def mult_order(a: int, n: int) -> int:
    """Smallest k >= 1 with a^k = 1 mod n."""
    if n < 2:
        raise ValueError("modulus must be >= 2")
    if math.gcd(a, n) != 1:
        raise NotAUnit(f"{a} is not a unit mod {n}")
    a %= n
    x, k = a, 1
    while x != 1 % n:
        x = x * a % n
        k += 1
    return k


def quotient_order(a: int, n: int) -> int:
    """Order of a in (Z/n)^x / {+-1}: smallest k >= 1 with a^k = +-1 mod n."""
    if n < 2:
        raise ValueError("modulus must be >= 2")
    if math.gcd(a, n) != 1:
        raise NotAUnit(f"{a} is not a unit mod {n}")
    a %= n
    x, k = a, 1
    while x != 1 % n and x != (n - 1):
        x = x * a % n
        k += 1
    return k


@dataclass(frozen=True)
class Cyclotomic:
    N: int

    def __post_init__(self):
        if self.N < 3 or self.N % 4 == 2:
            raise ValueError(f"cyclotomic conductor must be >= 3 and not 2 mod 4, got {self.N}")

    @property
    def degree(self) -> int:
        return int(totient(self.N))

    @property
    def genus(self) -> int:
        return self.degree // 2

    def ramified(self, p: int) -> bool:
        return self.N % p == 0

    def __str__(self):
        return f"cyclotomic:{self.N}"


@dataclass(frozen=True)
class CompositeReal:
    M: int
    d: int

    def __post_init__(self):
        if self.M < 5:
            raise ValueError(f"M must be >= 5, got {self.M}")
        if self.d not in (3, 4):
            raise ValueError(f"d must be 3 or 4, got {self.d}")

    @property
    def degree(self) -> int:
        return int(totient(self.M))

    @property
    def genus(self) -> int:
        return self.degree // 2

    def ramified(self, p: int) -> bool:
        return (self.M * self.d) % p == 0

    def __str__(self):
        return f"composite:{self.M}:{self.d}"


AbelianCMField = Union[Cyclotomic, CompositeReal]


def parse_field(text: str) -> AbelianCMField:
    """Parse ``cyclotomic:<N>`` or ``composite:<M>:<d>``."""
    parts = text.strip().split(":")
    try:
        if parts[0] == "cyclotomic" and len(parts) == 2:
            return Cyclotomic(int(parts[1]))
        if parts[0] == "composite" and len(parts) == 3:
            return CompositeReal(int(parts[1]), int(parts[2]))
    except ValueError as exc:
        raise ValueError(f"bad field spec {text!r}: {exc}") from None
    raise ValueError(f"bad field spec {text!r}; expected cyclotomic:<N> or composite:<M>:<d>")


@dataclass(frozen=True)
class PrimeBehavior:
    behavior: str  # INERT or SPLIT
    f_in_K: int


@dataclass(frozen=True)
class SplittingReport:
    p: int
    f0: int
    t: int
    per_prime: tuple[PrimeBehavior, ...]
    g: int

    @property
    def all_inert(self) -> bool:
        return all(b.behavior == INERT for b in self.per_prime)

    @property
    def all_split(self) -> bool:
        return all(b.behavior == SPLIT for b in self.per_prime)

    def count(self, behavior: str) -> int:
        return sum(b.behavior == behavior for b in self.per_prime)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "f0": self.f0,
            "t": self.t,
            "g": self.g,
            "per_prime": [{"behavior": b.behavior, "f_in_K": b.f_in_K} for b in self.per_prime],
        }


def _check_prime(spec: AbelianCMField, p: int) -> None:
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    if spec.ramified(p):
        raise RamifiedPrime(f"{p} ramifies in {spec}")


def splitting(spec: AbelianCMField, p: int) -> SplittingReport:
    _check_prime(spec, p)
    g = spec.genus
    if isinstance(spec, Cyclotomic):
        f = mult_order(p, spec.N)
        f0 = quotient_order(p, spec.N)
        inert = f == 2 * f0
    else:
        f0 = quotient_order(p, spec.M)
        # Frobenius is (p mod +-M, p mod d); conjugation is (1, -1).
        inert = p % spec.d == spec.d - 1 and f0 % 2 == 1
    t = g // f0
    behavior = PrimeBehavior(INERT, 2 * f0) if inert else PrimeBehavior(SPLIT, f0)
    return SplittingReport(p=p, f0=f0, t=t, per_prime=(behavior,) * t, g=g)


# Slope blocks: (slope, multiplicity); slope None marks a block of unknown slopes.
SlopeBlock = tuple[Optional[Fraction], int]


def merge_slopes(blocks) -> tuple[SlopeBlock, ...]:
    """Combine equal slopes; known slopes ascending, unknown block last."""
    known: dict[Fraction, int] = {}
    unknown = 0
    for slope, mult in blocks:
        if slope is None:
            unknown += mult
        else:
            known[Fraction(slope)] = known.get(Fraction(slope), 0) + mult
    out = [(s, known[s]) for s in sorted(known)]
    if unknown:
        out.append((None, unknown))
    return tuple(out)


def slopes_from_report(report: SplittingReport) -> tuple[SlopeBlock, ...]:
    blocks: list[SlopeBlock] = []
    for b in report.per_prime:
        if b.behavior == INERT:
            blocks.append((Fraction(1, 2), 2 * report.f0))
        elif report.f0 == 1:
            blocks += [(Fraction(0), 1), (Fraction(1), 1)]
        else:
            blocks.append((None, 2 * report.f0))
    return merge_slopes(blocks)


def predict_slopes(spec: AbelianCMField, p: int) -> tuple[SlopeBlock, ...]:
    return slopes_from_report(splitting(spec, p))


def ssg_charpoly(p: int, g: int) -> tuple[int, ...]:
    """Coefficients of (t^2 + p)^g, least-significant first."""
    out = [0] * (2 * g + 1)
    for i in range(g + 1):
        out[2 * i] = math.comb(g, i) * p ** (g - i)
    return tuple(out)


def maximal_count(p: int, g: int) -> int:
    """Hasse-Weil upper bound 1 + p^2 + 2gp for curves over F_{p^2}."""
    return 1 + p * p + 2 * g * p


@dataclass(frozen=True)
class ReductionPrediction:
    kind: str
    slopes: tuple[SlopeBlock, ...]
    superspecial: Optional[bool] = None
    a_number: Optional[int] = None
    p_rank: Optional[int] = None
    reason: Optional[str] = None
    charpoly: Optional[tuple[int, ...]] = None
    maximal_count_formula: Optional[int] = None
    splitting: Optional[SplittingReport] = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {
            "class": self.kind,
            "superspecial": self.superspecial,
            "a_number": self.a_number,
            "p_rank": self.p_rank,
            "reason": self.reason,
            "slopes": slopes_to_json(self.slopes),
            "charpoly": list(self.charpoly) if self.charpoly is not None else None,
            "maximal_count_formula": self.maximal_count_formula,
        }


def slopes_to_json(blocks) -> list:
    return [["unknown" if s is None else str(s), m] for s, m in blocks]


def predict_reduction(spec: AbelianCMField, p: int, rationality_ok: bool = True) -> ReductionPrediction:
    """Reduction type of a CM abelian variety at p, read off from splitting data.

    ``rationality_ok`` states that the O_{K0} action is defined over K0 (or the
    O_K action over K); together with superspeciality and p >= 5 it attaches
    the characteristic polynomial (t^2+p)^g and the F_{p^2} point count.
    """
    rep = splitting(spec, p)
    g = rep.g
    slopes = slopes_from_report(rep)
    n_inert, n_split = rep.count(INERT), rep.count(SPLIT)
    if rep.all_inert:
        superspecial = rep.f0 == 1
        charpoly = formula = None
        if superspecial and rationality_ok and p >= 5:
            charpoly, formula = ssg_charpoly(p, g), maximal_count(p, g)
        return ReductionPrediction(SUPERSINGULAR, slopes, superspecial=superspecial,
                                   charpoly=charpoly, maximal_count_formula=formula,
                                   splitting=rep)
    if rep.f0 > 1:
        return ReductionPrediction(
            UNDETERMINED, slopes, splitting=rep,
            reason=f"primes of K0 split in K with inertia degree {rep.f0} > 1; "
                   "splitting data alone does not fix the slopes")
    if rep.all_split:
        return ReductionPrediction(ORDINARY, slopes, p_rank=g, a_number=0, splitting=rep)
    return ReductionPrediction(MIXED, slopes, a_number=n_inert, p_rank=n_split, splitting=rep)
