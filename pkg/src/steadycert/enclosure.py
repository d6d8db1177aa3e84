"""Directed-rounding interval arithmetic on machine floats.

An :class:`Enclosure` is a closed interval ``[lo, hi]`` with double
endpoints.  The contract is containment: every operation returns an
interval that contains the exact real result for all real operands drawn
from the input intervals.

Rounding is realized by next-float-out nudging of nearest-rounded
results.  To avoid paying a spurious ulp on exact operations, additions
use the TwoSum error-free transformation and products use the
Dekker/Veltkamp splitting: both recover the exact rounding error of the
nearest-rounded result, so an endpoint is nudged only when the rounding
error has the unsafe sign.  Sums of many terms go through ``math.fsum``
(correctly rounded) with a second fsum recovering the residual; since
every float is an integer multiple of 2^-1074, a zero residual proves
the sum exact.

``exp`` has no error-free transformation; it is evaluated in 80-bit
working precision via mpmath, widened by an explicit 2^-70 relative
safety margin, and rounded outward until the bracket is verified by
exact comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Union

import mpmath

__all__ = [
    "Enclosure",
    "EnclosureError",
    "hull",
    "sup_abs",
    "fsum_down",
    "fsum_up",
    "enclose_sum",
]

_SPLIT = 134217729.0  # 2**27 + 1, Veltkamp splitting constant
_BIG = 2.0**996       # splitting overflows beyond this magnitude
_TINY = 2.0**-960     # below this a product may have entered the subnormal range
_MAX = math.ldexp(2.0 - 2.0**-52, 1022)  # largest finite double
_INF = math.inf

Real = Union[int, float]


class EnclosureError(ArithmeticError):
    """Domain violation: empty/NaN construction, division through zero,
    square root of a negative interval."""


def _down(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def _two_sum_err(a: float, b: float, s: float) -> float:
    # Exact error of s = fl(a+b); valid whenever s is finite.
    bb = s - a
    return (a - (s - bb)) + (b - bb)


def _two_prod_err(a: float, b: float, p: float) -> float:
    # Exact error of p = fl(a*b); valid when |a|,|b| < 2**996 and p is
    # normal (guarded by callers).
    ca = _SPLIT * a
    ah = ca - (ca - a)
    al = a - ah
    cb = _SPLIT * b
    bh = cb - (cb - b)
    bl = b - bh
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _add_down(a: float, b: float) -> float:
    s = a + b
    if not math.isfinite(s):
        return _MAX if s == _INF else s
    e = _two_sum_err(a, b, s)
    return s if e >= 0.0 else _down(s)


def _add_up(a: float, b: float) -> float:
    s = a + b
    if not math.isfinite(s):
        return -_MAX if s == -_INF else s
    e = _two_sum_err(a, b, s)
    return s if e <= 0.0 else _up(s)


def _prod_bounds(a: float, b: float) -> tuple[float, float]:
    """Directed roundings (down, up) of a*b for finite a, b."""
    if a == 0.0 or b == 0.0:
        return 0.0, 0.0
    p = a * b
    if not math.isfinite(p):
        return (_MAX, _INF) if p == _INF else (-_INF, -_MAX)
    if abs(a) < _BIG and abs(b) < _BIG and abs(p) > _TINY:
        e = _two_prod_err(a, b, p)
        return (p if e >= 0.0 else _down(p)), (p if e <= 0.0 else _up(p))
    return _down(p), _up(p)


def _is_pow2(x: float) -> bool:
    if x == 0.0 or not math.isfinite(x):
        return False
    m, _ = math.frexp(x)
    return abs(m) == 0.5


def _quot_bounds(a: float, b: float) -> tuple[float, float]:
    """Directed roundings of a/b for finite a and nonzero finite b."""
    if a == 0.0:
        return 0.0, 0.0
    q = a / b
    if not math.isfinite(q):
        return (_MAX, _INF) if q == _INF else (-_INF, -_MAX)
    if q == 0.0:
        # underflowed: the true quotient is nonzero with known sign
        return (0.0, 5e-324) if (a > 0.0) == (b > 0.0) else (-5e-324, 0.0)
    # division by a power of two is exact outside the extreme ranges
    if _is_pow2(b) and _TINY < abs(q) < _BIG and _TINY < abs(a):
        return q, q
    return _down(q), _up(q)


def fsum_down(xs: Iterable[float]) -> float:
    """Rigorous lower bound of an exact sum of floats; exact when the sum is."""
    xs = [float(x) for x in xs]
    try:
        s = math.fsum(xs)
        if not math.isfinite(s):
            return _MAX if s == _INF else s
        e = math.fsum(xs + [-s])
    except (OverflowError, ValueError):
        return -_INF
    return s if e >= 0.0 else _down(s)


def fsum_up(xs: Iterable[float]) -> float:
    """Rigorous upper bound of an exact sum of floats; exact when the sum is."""
    xs = [float(x) for x in xs]
    try:
        s = math.fsum(xs)
        if not math.isfinite(s):
            return -_MAX if s == -_INF else s
        e = math.fsum(xs + [-s])
    except (OverflowError, ValueError):
        return _INF
    return s if e <= 0.0 else _up(s)


def _coerce(x: "Enclosure | Real") -> "Enclosure":
    if isinstance(x, Enclosure):
        return x
    if isinstance(x, (int, float)):
        return Enclosure(float(x), float(x))
    raise TypeError(f"cannot interpret {type(x).__name__} as an Enclosure")


@dataclass(frozen=True, slots=True)
class Enclosure:
    """Closed interval with outward-rounded arithmetic."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if math.isnan(lo) or math.isnan(hi):
            raise EnclosureError("NaN endpoint")
        if lo > hi:
            raise EnclosureError(f"empty interval [{lo}, {hi}]")

    # -- constructors -------------------------------------------------

    @classmethod
    def point(cls, v: Real) -> "Enclosure":
        return cls(float(v), float(v))

    @classmethod
    def from_hex(cls, text: str) -> "Enclosure":
        lo_s, hi_s = text.split()
        return cls(float.fromhex(lo_s), float.fromhex(hi_s))

    def to_hex(self) -> str:
        return f"{self.lo.hex()} {self.hi.hex()}"

    # -- inspection ---------------------------------------------------

    @property
    def width(self) -> float:
        return _add_up(self.hi, -self.lo)

    @property
    def mid(self) -> float:
        if self.lo == self.hi:
            return self.lo
        m = self.lo + 0.5 * (self.hi - self.lo)
        return min(max(m, self.lo), self.hi)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, other: "Enclosure | Real") -> bool:
        o = _coerce(other)
        return self.lo <= o.lo and o.hi <= self.hi

    def __repr__(self) -> str:
        return f"Enclosure({self.lo!r}, {self.hi!r})"

    # -- arithmetic ---------------------------------------------------

    def __neg__(self) -> "Enclosure":
        return Enclosure(-self.hi, -self.lo)

    def __add__(self, other):
        o = _coerce(other)
        return Enclosure(_add_down(self.lo, o.lo), _add_up(self.hi, o.hi))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        o = _coerce(other)
        d1, u1 = _prod_bounds(self.lo, o.lo)
        d2, u2 = _prod_bounds(self.lo, o.hi)
        d3, u3 = _prod_bounds(self.hi, o.lo)
        d4, u4 = _prod_bounds(self.hi, o.hi)
        return Enclosure(min(d1, d2, d3, d4), max(u1, u2, u3, u4))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if o.lo <= 0.0 <= o.hi:
            raise EnclosureError(f"division by interval containing zero: {o}")
        d1, u1 = _quot_bounds(self.lo, o.lo)
        d2, u2 = _quot_bounds(self.lo, o.hi)
        d3, u3 = _quot_bounds(self.hi, o.lo)
        d4, u4 = _quot_bounds(self.hi, o.hi)
        return Enclosure(min(d1, d2, d3, d4), max(u1, u2, u3, u4))

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __abs__(self) -> "Enclosure":
        if self.lo >= 0.0:
            return self
        if self.hi <= 0.0:
            return -self
        return Enclosure(0.0, max(-self.lo, self.hi))

    def pow_int(self, n: int) -> "Enclosure":
        """n-th power for integer n >= 0, tight on even powers."""
        if n < 0:
            raise EnclosureError("pow_int requires a nonnegative exponent")
        if n == 0:
            return Enclosure(1.0, 1.0)
        base = abs(self) if n % 2 == 0 else self
        out = base
        for _ in range(n - 1):
            out = out * base
        return out

    def sqrt(self) -> "Enclosure":
        if self.lo < 0.0:
            raise EnclosureError(f"sqrt of interval with negative part: {self}")
        return Enclosure(_sqrt_down(self.lo), _sqrt_up(self.hi))

    def exp(self) -> "Enclosure":
        lo, _ = _exp_bounds(self.lo)
        _, hi = _exp_bounds(self.hi)
        return Enclosure(lo, hi)

    def min_with(self, other: "Enclosure | Real") -> "Enclosure":
        o = _coerce(other)
        return Enclosure(min(self.lo, o.lo), min(self.hi, o.hi))

    def max_with(self, other: "Enclosure | Real") -> "Enclosure":
        o = _coerce(other)
        return Enclosure(max(self.lo, o.lo), max(self.hi, o.hi))


def _sqrt_exact(x: float, s: float) -> bool:
    if not (_TINY < s < _BIG):
        return x == 0.0 and s == 0.0
    p = s * s
    if p != x:
        return False
    return _two_prod_err(s, s, p) == 0.0


def _sqrt_down(x: float) -> float:
    s = math.sqrt(x)
    if _sqrt_exact(x, s):
        return s
    return max(0.0, _down(s))


def _sqrt_up(x: float) -> float:
    if x == _INF:
        return _INF
    s = math.sqrt(x)
    if _sqrt_exact(x, s):
        return s
    return _up(s)


def _exp_bounds(x: float) -> tuple[float, float]:
    if x == 0.0:
        return 1.0, 1.0
    if x == -_INF:
        return 0.0, 5e-324
    if x == _INF:
        return _MAX, _INF
    with mpmath.workprec(80):
        y = mpmath.exp(mpmath.mpf(x))
        margin = y * mpmath.mpf(2.0) ** -70
        ylo, yhi = y - margin, y + margin
        lo, hi = float(ylo), float(yhi)
        # float() rounds to nearest; push outward until verified
        while mpmath.mpf(lo) > ylo:
            lo = _down(lo)
        while math.isfinite(hi) and mpmath.mpf(hi) < yhi:
            hi = _up(hi)
    return max(lo, 0.0), hi


def hull(x: "Enclosure | Real", y: "Enclosure | Real") -> Enclosure:
    """Smallest interval containing both arguments."""
    a, b = _coerce(x), _coerce(y)
    return Enclosure(min(a.lo, b.lo), max(a.hi, b.hi))


def sup_abs(x: "Enclosure | Real") -> float:
    """Exact upper bound of |t| over the interval."""
    e = _coerce(x)
    return max(abs(e.lo), abs(e.hi))


def enclose_sum(terms: Iterable["Enclosure | Real"]) -> Enclosure:
    """Enclosure of the sum of finitely many enclosures."""
    los, his = [], []
    for t in terms:
        e = _coerce(t)
        los.append(e.lo)
        his.append(e.hi)
    return Enclosure(fsum_down(los), fsum_up(his))


ZERO = Enclosure(0.0, 0.0)
ONE = Enclosure(1.0, 1.0)
