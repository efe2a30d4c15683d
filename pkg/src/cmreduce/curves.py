"""Curve families and point counts over finite fields.

Superelliptic curves ``c*y^m = f(x)`` with gcd(m, deg f) = 1 have a single
point at infinity on their smooth projective model (the place above x = oo is
totally ramified), so #C(F_q) = 1 + sum_x #{y : y^m = f(x)/c}.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np
from sympy import isprime

from .errors import BadReduction, BudgetExceeded, RangeOverflow
from .finite_field import (
    MAX_FIELD_ORDER,
    FieldContext,
    field,
    is_squarefree_mod_p,
    poly_degree,
    poly_mod_p,
)
from .splitting import AbelianCMField, CompositeReal, Cyclotomic

CHUNK = 1 << 18


def chebyshev_poly(l: int) -> tuple[int, ...]:
    """U_l with U_0 = 2, U_1 = x, U_{n+1} = x U_n - U_{n-1} (least-significant first)."""
    if l < 0:
        raise ValueError("index must be >= 0")
    prev, cur = [2], [0, 1]
    if l == 0:
        return tuple(prev)
    for _ in range(l - 1):
        nxt = [0] + cur
        for i, c in enumerate(prev):
            nxt[i] -= c
        prev, cur = cur, nxt
    return tuple(cur)


def _q_squarefree(f: Sequence[int]) -> bool:
    """gcd(f, f') over Q is constant."""
    a = [Fraction(c) for c in f]
    b = [Fraction(i * c) for i, c in enumerate(f)][1:]
    while b and b[-1] == 0:
        b.pop()
    while b:
        r = a[:]
        while len(r) >= len(b) and r:
            c = r[-1] / b[-1]
            shift = len(r) - len(b)
            for i, bc in enumerate(b):
                r[shift + i] -= c * bc
            r.pop()
            while r and r[-1] == 0:
                r.pop()
        a, b = b, r
    return len(a) == 1


@dataclass(frozen=True)
class SuperellipticCurve:
    """Smooth projective model of ``scale * y^m = f(x)``.

    ``integral_models`` maps a prime to a Q-isomorphic ``(scale, f)`` used for
    reduction at that prime instead of the displayed one.
    """

    m: int
    f: tuple[int, ...]
    scale: int = 1
    family_tag: str = ""
    cm_field: Optional[AbelianCMField] = None
    rationality_ok: bool = False
    integral_models: tuple[tuple[int, int, tuple[int, ...]], ...] = ()

    def __post_init__(self):
        deg = poly_degree(self.f)
        if self.m < 2 or deg < 1:
            raise ValueError("need m >= 2 and deg f >= 1")
        if math.gcd(self.m, deg) != 1:
            raise ValueError(f"gcd(m, deg f) = gcd({self.m}, {deg}) must be 1")
        if self.scale == 0 or self.f[-1] == 0:
            raise ValueError("leading data must be nonzero")
        if not _q_squarefree(self.f):
            raise ValueError("f must be squarefree over Q")

    @property
    def genus(self) -> int:
        return (self.m - 1) * (poly_degree(self.f) - 1) // 2

    def model_at(self, p: int) -> tuple[int, tuple[int, ...]]:
        for prime, scale, f in self.integral_models:
            if prime == p:
                return scale, f
        return self.scale, self.f


@dataclass(frozen=True)
class FermatCurve:
    """Projective X^n + Y^n = Z^n."""

    n: int
    family_tag: str = ""
    cm_field: Optional[AbelianCMField] = None
    rationality_ok: bool = False

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("Fermat exponent must be >= 3")

    @property
    def genus(self) -> int:
        return (self.n - 1) * (self.n - 2) // 2


CurveModel = Union[SuperellipticCurve, FermatCurve]


def _odd_prime(text: str, minimum: int) -> int:
    l = int(text)
    if l < minimum or not isprime(l):
        raise ValueError(f"expected a prime >= {minimum}, got {text}")
    return l


def parse_curve(text: str) -> CurveModel:
    """Build a curve from its DSL string, e.g. ``cl:5`` or ``superelliptic:3:0,1,-1``."""
    tag = text.strip()
    head, _, rest = tag.partition(":")
    try:
        if head == "cl":
            l = _odd_prime(rest, 3)
            return SuperellipticCurve(l, (0, 1, -1), family_tag=tag, cm_field=Cyclotomic(l),
                                      rationality_ok=True)
        if head == "chebyshev":
            l = _odd_prime(rest, 5)
            return SuperellipticCurve(2, chebyshev_poly(l), family_tag=tag,
                                      cm_field=CompositeReal(l, 4), rationality_ok=True)
        if tag == "gk-x":
            return SuperellipticCurve(
                3, (-343, 392, -98, 0, 1), scale=2, family_tag=tag,
                cm_field=CompositeReal(7, 3), rationality_ok=True,
                # x = 1 + 2u, y = 2v: v^3 = u^4 + 2u^3 - 23u^2 + 25u - 3, discriminant 7^8
                integral_models=((2, 1, (-3, 25, -23, 2, 1)),))
        if head == "yl":
            l = int(rest)
            if l < 1:
                raise ValueError("l must be >= 1")
            return SuperellipticCurve(2, (0, 1) + (0,) * (2 * l - 1) + (1,), family_tag=tag)
        if head == "fermat":
            return FermatCurve(int(rest), family_tag=tag)
        if head == "superelliptic":
            m_text, _, coeff_text = rest.partition(":")
            coeffs = tuple(int(c) for c in coeff_text.split(","))
            return SuperellipticCurve(int(m_text), coeffs, family_tag=tag)
    except ValueError as exc:
        raise ValueError(f"bad curve {text!r}: {exc}") from None
    raise ValueError(
        f"unknown curve {text!r}; expected cl:<l>, chebyshev:<l>, gk-x, yl:<l>, "
        "fermat:<n> or superelliptic:<m>:<c0,...,cd>")


class GoodPrime(NamedTuple):
    good: bool
    reason: str

    def __bool__(self):
        return self.good


def good_prime(curve: CurveModel, p: int) -> GoodPrime:
    """Sufficient criterion for nonsingular reduction of the plane model at p."""
    if not isprime(p):
        return GoodPrime(False, f"{p} is not prime")
    if isinstance(curve, FermatCurve):
        if curve.n % p == 0:
            return GoodPrime(False, f"p divides n = {curve.n}")
        return GoodPrime(True, "ok")
    if curve.m % p == 0:
        return GoodPrime(False, f"p divides m = {curve.m}")
    scale, f = curve.model_at(p)
    if scale % p == 0:
        return GoodPrime(False, f"p divides the constant {scale}")
    fp = poly_mod_p(f, p)
    if poly_degree(fp) != poly_degree(f):
        return GoodPrime(False, "degree drops mod p")
    if not is_squarefree_mod_p(fp, p):
        return GoodPrime(False, "f is not squarefree mod p")
    return GoodPrime(True, "ok")


def _reduced_rhs(curve: SuperellipticCurve, p: int) -> list[int]:
    scale, f = curve.model_at(p)
    inv = pow(scale, -1, p)
    return [c * inv % p for c in f]


def _count_chunk(curve: CurveModel, ctx: FieldContext, start: int, stop: int, rhs) -> int:
    xs = ctx.vindices(start, stop)
    if isinstance(curve, FermatCurve):
        vals = ctx.vsub(ctx.vconst(1, xs.shape[0]), ctx.vpow(xs, curve.n))
        return int(ctx.vfiber_count(vals, curve.n).sum())
    return int(ctx.vfiber_count(ctx.vpoly_eval(rhs, xs), curve.m).sum())


def count_points(curve: CurveModel, p: int, k: int = 1, *, max_field_size: Optional[int] = None,
                 workers: int = 1) -> int:
    """#C(F_{p^k}) on the smooth projective model, by fibre counting over x."""
    ok = good_prime(curve, p)
    if not ok:
        raise BadReduction(f"{curve.family_tag or curve} has bad reduction at {p}: {ok.reason}")
    q = p**k
    if q > MAX_FIELD_ORDER:
        raise RangeOverflow(f"field of order {p}^{k} is out of range")
    if max_field_size is not None and q > max_field_size:
        raise BudgetExceeded(f"{p}^{k} = {q} exceeds the element budget {max_field_size}")
    ctx = field(p, k)
    rhs = None if isinstance(curve, FermatCurve) else _reduced_rhs(curve, p)
    bounds = [(s, min(s + CHUNK, q)) for s in range(0, q, CHUNK)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(workers) as pool:
            affine = sum(pool.map(lambda b: _count_chunk(curve, ctx, b[0], b[1], rhs), bounds))
    else:
        affine = sum(_count_chunk(curve, ctx, a, b, rhs) for a, b in bounds)
    if isinstance(curve, FermatCurve):
        minus_one = ctx.vconst(-1, 1)
        return affine + int(ctx.vfiber_count(minus_one, curve.n)[0])
    return affine + 1


@dataclass(frozen=True)
class PointCountSequence:
    p: int
    counts: tuple[int, ...]

    def __len__(self):
        return len(self.counts)

    def __getitem__(self, i):
        return self.counts[i]


def count_sequence(curve: CurveModel, p: int, r: int, *, max_field_size: Optional[int] = None,
                   workers: int = 1) -> PointCountSequence:
    """N_1, ..., N_r, each counted in its own extension field."""
    if max_field_size is not None and p**r > max_field_size:
        raise BudgetExceeded(f"{p}^{r} exceeds the element budget {max_field_size}")
    return PointCountSequence(p, tuple(
        count_points(curve, p, k, max_field_size=max_field_size, workers=workers)
        for k in range(1, r + 1)))


def count_points_naive(curve: CurveModel, p: int, k: int = 1) -> int:
    """Reference count: test the plane equation on every (x, y) in F_q^2.

    Powers and polynomial values use scalar field arithmetic with repeated
    multiplication; only the final pair comparison is vectorised.
    """
    ok = good_prime(curve, p)
    if not ok:
        raise BadReduction(ok.reason)
    ctx = field(p, k)
    elems = list(ctx.elements())

    def power(a, e):
        out = ctx.one
        for _ in range(e):
            out = out * a
        return out

    if isinstance(curve, FermatCurve):
        xn = np.array([power(a, curve.n).index() for a in elems])
        one_minus = np.array([(ctx.one - power(a, curve.n)).index() for a in elems])
        affine = int(np.equal.outer(one_minus, xn).sum())
        minus_one = (-ctx.one).index()
        return affine + int((xn == minus_one).sum())
    rhs = [ctx(c) for c in _reduced_rhs(curve, p)]
    ym = np.array([power(a, curve.m).index() for a in elems])
    fx = []
    for a in elems:
        acc = ctx.zero
        for c in reversed(rhs):
            acc = acc * a + c
        fx.append(acc.index())
    return int(np.equal.outer(np.array(fx), ym).sum()) + 1
