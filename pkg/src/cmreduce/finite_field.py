"""Arithmetic in F_p and F_{p^k} in a polynomial basis.

Elements are coefficient vectors (least-significant first) over Z/p modulo a
monic irreducible polynomial.  Two interfaces are provided:

* :class:`FieldElement` -- scalar values with the usual operators.
* the ``v*`` methods of :class:`FieldContext` -- the same arithmetic on numpy
  arrays of shape ``(n, k)``, used by the point counters.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np
from sympy import isprime, primefactors

from .errors import ContextMismatch, FieldDivisionByZero, RangeOverflow

# Field orders are addressed by int64 indices.
MAX_FIELD_ORDER = 2**62


# ---------------------------------------------------------------------------
# Dense polynomials over F_p, least-significant coefficient first.
# ---------------------------------------------------------------------------

def _trim(f: list[int]) -> list[int]:
    while f and f[-1] == 0:
        f.pop()
    return f


def poly_mod_p(f: Sequence[int], p: int) -> list[int]:
    """Reduce integer coefficients mod p and drop leading zeros."""
    return _trim([c % p for c in f])


def poly_degree(f: Sequence[int]) -> int:
    return len(f) - 1 if f else -1


def poly_sub(f: Sequence[int], g: Sequence[int], p: int) -> list[int]:
    n = max(len(f), len(g))
    out = [((f[i] if i < len(f) else 0) - (g[i] if i < len(g) else 0)) % p for i in range(n)]
    return _trim(out)


def poly_mul(f: Sequence[int], g: Sequence[int], p: int) -> list[int]:
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return poly_mod_p(out, p)


def poly_divmod(f: Sequence[int], g: Sequence[int], p: int) -> tuple[list[int], list[int]]:
    g = poly_mod_p(g, p)
    if not g:
        raise FieldDivisionByZero("polynomial division by zero")
    r = poly_mod_p(f, p)
    dg = len(g) - 1
    inv_lead = pow(g[-1], -1, p)
    q = [0] * max(len(r) - dg, 0)
    while len(r) - 1 >= dg:
        shift = len(r) - 1 - dg
        c = r[-1] * inv_lead % p
        q[shift] = c
        for i, b in enumerate(g):
            r[shift + i] = (r[shift + i] - c * b) % p
        _trim(r)
    return _trim(q), r


def poly_rem(f: Sequence[int], g: Sequence[int], p: int) -> list[int]:
    return poly_divmod(f, g, p)[1]


def poly_gcd(f: Sequence[int], g: Sequence[int], p: int) -> list[int]:
    """Monic gcd over F_p (empty list for gcd(0, 0))."""
    a, b = poly_mod_p(f, p), poly_mod_p(g, p)
    while b:
        a, b = b, poly_rem(a, b, p)
    if not a:
        return a
    inv = pow(a[-1], -1, p)
    return [c * inv % p for c in a]


def poly_derivative(f: Sequence[int], p: int) -> list[int]:
    return poly_mod_p([i * c for i, c in enumerate(f)][1:], p)


def is_squarefree_mod_p(f: Sequence[int], p: int) -> bool:
    fp = poly_mod_p(f, p)
    if poly_degree(fp) <= 0:
        return bool(fp)
    return poly_degree(poly_gcd(fp, poly_derivative(fp, p), p)) == 0


def _x_power_mod(e: int, f: Sequence[int], p: int) -> list[int]:
    """x^e mod f over F_p by square-and-multiply."""
    result: list[int] = [1]
    base = poly_rem([0, 1], f, p)
    while e:
        if e & 1:
            result = poly_rem(poly_mul(result, base, p), f, p)
        base = poly_rem(poly_mul(base, base, p), f, p)
        e >>= 1
    return result


def is_irreducible(f: Sequence[int], p: int) -> bool:
    """Rabin's test: x^{p^k} = x mod f and gcd(x^{p^{k/l}} - x, f) = 1 for primes l | k."""
    f = poly_mod_p(f, p)
    k = poly_degree(f)
    if k < 1:
        return False
    if k == 1:
        return True
    if poly_sub(_x_power_mod(p**k, f, p), [0, 1], p):
        return False
    for ell in primefactors(k):
        h = poly_sub(_x_power_mod(p ** (k // ell), f, p), [0, 1], p)
        if poly_degree(poly_gcd(h, f, p)) != 0:
            return False
    return True


def _check_range(p: int, k: int) -> None:
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    if k < 1:
        raise ValueError(f"extension degree must be >= 1, got {k}")
    if p**k > MAX_FIELD_ORDER or k * (p - 1) ** 2 >= 2**63:
        raise RangeOverflow(f"F_{p}^{k} exceeds the supported range")


@lru_cache(maxsize=None)
def find_irreducible(p: int, k: int) -> tuple[int, ...]:
    """First monic irreducible of degree k, ordered by (c_{k-1}, ..., c_0).

    Returned least-significant first, including the leading 1.
    """
    _check_range(p, k)
    for idx in range(p**k):
        f = [(idx // p**j) % p for j in range(k)] + [1]  # c_{k-1} is the top digit
        if is_irreducible(f, p):
            return tuple(f)
    raise AssertionError("no irreducible polynomial found")  # unreachable


# ---------------------------------------------------------------------------
# Field context and scalar elements
# ---------------------------------------------------------------------------

class FieldContext:
    """The field F_p[x]/(modulus) of order q = p^k.  Immutable."""

    __slots__ = ("p", "k", "q", "modulus", "_neg_mod")

    def __init__(self, p: int, k: int = 1, modulus: Sequence[int] | None = None):
        _check_range(p, k)
        if modulus is None:
            modulus = find_irreducible(p, k)
        else:
            modulus = tuple(c % p for c in modulus)
            if len(modulus) != k + 1 or modulus[-1] != 1:
                raise ValueError("modulus must be monic of degree k")
            if not is_irreducible(modulus, p):
                raise ValueError(f"modulus {modulus} is reducible over F_{p}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "q", p**k)
        object.__setattr__(self, "modulus", tuple(modulus))
        # x^k = -(m_0 + ... + m_{k-1} x^{k-1})
        object.__setattr__(self, "_neg_mod", np.array([(-c) % p for c in modulus[:k]], dtype=np.int64))

    def __setattr__(self, name, value):
        raise AttributeError("FieldContext is immutable")

    def __eq__(self, other):
        return isinstance(other, FieldContext) and (self.p, self.k, self.modulus) == (
            other.p, other.k, other.modulus)

    def __hash__(self):
        return hash((self.p, self.k, self.modulus))

    def __repr__(self):
        return f"FieldContext(p={self.p}, k={self.k}, modulus={self.modulus})"

    # -- scalar interface ---------------------------------------------------

    def __call__(self, value) -> "FieldElement":
        """Coerce an int (embedded from Z) or a coefficient sequence."""
        if isinstance(value, FieldElement):
            if value.ctx != self:
                raise ContextMismatch("element belongs to a different field")
            return value
        if isinstance(value, (int, np.integer)):
            return FieldElement(self, (int(value),))
        return FieldElement(self, tuple(int(c) for c in value))

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(self, ())

    @property
    def one(self) -> "FieldElement":
        return FieldElement(self, (1,))

    @property
    def gen(self) -> "FieldElement":
        return FieldElement(self, (0, 1))

    def element(self, index: int) -> "FieldElement":
        """Element with base-p digits of ``index`` as coefficients (c_0 least significant)."""
        if not 0 <= index < self.q:
            raise IndexError(index)
        return FieldElement(self, tuple((index // self.p**j) % self.p for j in range(self.k)))

    def elements(self) -> Iterator["FieldElement"]:
        """All q elements, each once, in lexicographic coefficient order starting at 0."""
        for i in range(self.q):
            yield self.element(i)

    # -- vectorised interface -----------------------------------------------

    def vindices(self, start: int, stop: int) -> np.ndarray:
        """Array of shape (stop-start, k) holding elements ``start .. stop-1``."""
        idx = np.arange(start, stop, dtype=np.int64)
        out = np.empty((idx.size, self.k), dtype=np.int64)
        for j in range(self.k):
            out[:, j] = idx % self.p
            idx //= self.p
        return out

    def vencode(self, a: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`vindices`: element index of each row."""
        out = np.zeros(a.shape[0], dtype=np.int64)
        for j in range(self.k - 1, -1, -1):
            out = out * self.p + a[:, j]
        return out

    def vconst(self, c: int, n: int) -> np.ndarray:
        out = np.zeros((n, self.k), dtype=np.int64)
        out[:, 0] = c % self.p
        return out

    def vadd(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return (a + b) % self.p

    def vsub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return (a - b) % self.p

    def vmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        p, k = self.p, self.k
        if k == 1:
            return (a * b) % p
        prod = np.zeros((a.shape[0], 2 * k - 1), dtype=np.int64)
        for i in range(k):
            prod[:, i:i + k] += a[:, i:i + 1] * b
        prod %= p
        neg = self._neg_mod
        for d in range(2 * k - 2, k - 1, -1):
            top = prod[:, d:d + 1]
            prod[:, d - k:d] = (prod[:, d - k:d] + top * neg) % p
        return prod[:, :k].copy()

    def vscale(self, a: np.ndarray, c: int) -> np.ndarray:
        return (a * (c % self.p)) % self.p

    def vpow(self, a: np.ndarray, e: int) -> np.ndarray:
        if e < 0:
            raise ValueError("negative exponent")
        result = self.vconst(1, a.shape[0])
        base = a
        while e:
            if e & 1:
                result = self.vmul(result, base)
            e >>= 1
            if e:
                base = self.vmul(base, base)
        return result

    def vis_zero(self, a: np.ndarray) -> np.ndarray:
        return ~a.any(axis=1)

    def vis_one(self, a: np.ndarray) -> np.ndarray:
        return (a[:, 0] == 1) & ~a[:, 1:].any(axis=1)

    def vpoly_eval(self, coeffs: Sequence[int], xs: np.ndarray) -> np.ndarray:
        """Evaluate an integer polynomial (least-significant first) at every row of xs."""
        acc = self.vconst(0, xs.shape[0])
        for c in reversed(coeffs):
            acc = self.vmul(acc, xs)
            acc[:, 0] = (acc[:, 0] + c % self.p) % self.p
        return acc

    def vfiber_count(self, c: np.ndarray, m: int) -> np.ndarray:
        """Vectorised :func:`fiber_count` for every row of c."""
        if m < 2:
            raise ValueError("m must be >= 2")
        d = math.gcd(m, self.q - 1)
        zero = self.vis_zero(c)
        if d == 1:
            return np.ones(c.shape[0], dtype=np.int64)
        hit = self.vis_one(self.vpow(c, (self.q - 1) // d))
        return np.where(zero, 1, np.where(hit, d, 0)).astype(np.int64)


class FieldElement:
    """An element of a :class:`FieldContext`; plain immutable data."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: FieldContext, coeffs: Sequence[int]):
        p, k = ctx.p, ctx.k
        coeffs = [c % p for c in coeffs]
        if len(coeffs) > k:
            coeffs = poly_rem(coeffs, ctx.modulus, p)
        coeffs = coeffs + [0] * (k - len(coeffs))
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "coeffs", tuple(coeffs))

    @classmethod
    def _raw(cls, ctx: FieldContext, coeffs: tuple[int, ...]) -> "FieldElement":
        # coeffs already reduced and of length k
        self = object.__new__(cls)
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "coeffs", coeffs)
        return self

    def __setattr__(self, name, value):
        raise AttributeError("FieldElement is immutable")

    def _other(self, other) -> "FieldElement":
        if type(other) is FieldElement:
            if other.ctx is not self.ctx and other.ctx != self.ctx:
                raise ContextMismatch("operands live in different fields")
            return other
        if isinstance(other, (int, np.integer)):
            return FieldElement(self.ctx, (int(other),))
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        p = self.ctx.p
        return FieldElement._raw(self.ctx, tuple((a + b) % p for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.ctx, [-a for a in self.coeffs])

    def __sub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        p = self.ctx.p
        return FieldElement._raw(self.ctx, tuple((a - b) % p for a, b in zip(self.coeffs, o.coeffs)))

    def __rsub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        ctx = self.ctx
        p, k = ctx.p, ctx.k
        if k == 1:
            return FieldElement._raw(ctx, (self.coeffs[0] * o.coeffs[0] % p,))
        prod = [0] * (2 * k - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    prod[i + j] += a * b
        mod = ctx.modulus
        for d in range(2 * k - 2, k - 1, -1):
            top = prod[d] % p
            if top:
                for j in range(k):
                    prod[d - k + j] -= top * mod[j]
        return FieldElement._raw(ctx, tuple(c % p for c in prod[:k]))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = self.ctx.one
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise FieldDivisionByZero("inverse of zero")
        return self ** (self.ctx.q - 2)

    def __truediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def frobenius(self) -> "FieldElement":
        return self ** self.ctx.p

    def index(self) -> int:
        """Position of this element in :meth:`FieldContext.elements`."""
        out = 0
        for c in reversed(self.coeffs):
            out = out * self.ctx.p + c
        return out

    def __eq__(self, other):
        if isinstance(other, (int, np.integer)):
            other = FieldElement(self.ctx, (int(other),))
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.ctx == other.ctx and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.ctx, self.coeffs))

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
                terms.append(str(c) if i == 0 else (mono if c == 1 else f"{c}*{mono}"))
        return " + ".join(reversed(terms)) if terms else "0"


def fiber_count(c: FieldElement, m: int) -> int:
    """Number of y in F_q with y^m = c."""
    if m < 2:
        raise ValueError("m must be >= 2")
    if c.is_zero():
        return 1
    q = c.ctx.q
    d = math.gcd(m, q - 1)
    return d if c ** ((q - 1) // d) == 1 else 0


@lru_cache(maxsize=64)
def field(p: int, k: int = 1) -> FieldContext:
    """Cached default context for F_{p^k}."""
    return FieldContext(p, k)
