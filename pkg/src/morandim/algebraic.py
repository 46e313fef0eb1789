"""Exact arithmetic in real quadratic fields Q(sqrt(D)).

Digit recursions are exponentially unstable, so the expansion engines use
exact field arithmetic whenever the inputs allow it (rational x under m-ary
maps, quadratic irrationals under continued fractions, the golden-ratio
base under beta maps).  A value is (p + q*sqrt(D)) / r with integer p, q
and r > 0; all comparisons and floors are decided by integer arithmetic
alone, so they are exact at any magnitude.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt

try:  # big-int heavy loops are noticeably faster on gmpy2 integers
    from gmpy2 import mpz as _int
except ImportError:  # pragma: no cover
    _int = int

from .errors import InvalidInput


def _isqrt(n):
    return isqrt(int(n))


class QuadraticIrrational:
    """(p + q*sqrt(D)) / r with exact integer components, r > 0, D >= 0."""

    __slots__ = ("p", "q", "r", "D")

    def __init__(self, p, q, r, D):
        if r == 0:
            raise InvalidInput("zero denominator")
        if D < 0:
            raise InvalidInput("negative radicand")
        if r < 0:
            p, q, r = -p, -q, -r
        self.p = _int(p)
        self.q = _int(q)
        self.r = _int(r)
        self.D = int(D)

    # ---- construction helpers -------------------------------------------

    @classmethod
    def from_fraction(cls, x, D=0):
        x = Fraction(x)
        return cls(x.numerator, 0, x.denominator, D)

    def _coerce(self, other):
        if isinstance(other, QuadraticIrrational):
            if other.D != self.D and other.q != 0 and self.q != 0:
                raise InvalidInput("mixed radicands")
            return QuadraticIrrational(other.p, other.q, other.r,
                                       self.D if other.q == 0 else other.D)
        if isinstance(other, (int, Fraction)):
            f = Fraction(other)
            return QuadraticIrrational(f.numerator, 0, f.denominator, self.D)
        return NotImplemented

    # ---- ring operations -------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadraticIrrational(self.p * o.r + o.p * self.r,
                                   self.q * o.r + o.q * self.r,
                                   self.r * o.r, self.D)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticIrrational(-self.p, -self.q, self.r, self.D)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadraticIrrational(self.p * o.p + self.q * o.q * self.D,
                                   self.p * o.q + self.q * o.p,
                                   self.r * o.r, self.D)

    __rmul__ = __mul__

    def inverse(self):
        # 1/((p+q√D)/r) = r(p−q√D)/(p²−q²D)
        norm = self.p * self.p - self.q * self.q * self.D
        if norm == 0:
            raise ZeroDivisionError("inverse of zero quadratic value")
        return QuadraticIrrational(self.r * self.p, -self.r * self.q, norm, self.D)

    # ---- order ------------------------------------------------------------

    def sign(self):
        """Exact sign of the value, via integer comparisons only."""
        p, q = self.p, self.q
        if q == 0:
            return (p > 0) - (p < 0)
        if self.D == 0:
            return (p > 0) - (p < 0)
        if q > 0:
            if p >= 0:
                return 1 if (p != 0 or q != 0) else 0
            lhs, rhs = q * q * self.D, p * p
            return (lhs > rhs) - (lhs < rhs)
        # q < 0
        if p <= 0:
            return -1
        lhs, rhs = p * p, q * q * self.D
        return (lhs > rhs) - (lhs < rhs)

    def compare(self, other) -> int:
        diff = self - other
        if diff is NotImplemented:
            raise TypeError(f"cannot compare with {type(other)!r}")
        return diff.sign()

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    def __eq__(self, other):
        try:
            return self.compare(other) == 0
        except (TypeError, InvalidInput):
            return NotImplemented

    def __hash__(self):
        if self.q == 0:
            return hash(Fraction(int(self.p), int(self.r)))
        return hash((int(self.p), int(self.q), int(self.r), self.D))

    def is_zero(self):
        return self.p == 0 and (self.q == 0 or self.D == 0)

    def is_rational(self):
        return self.q == 0 or self.D == 0

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise InvalidInput("value is irrational")
        return Fraction(int(self.p), int(self.r))

    # ---- floor and conversions --------------------------------------------

    def floor(self) -> int:
        """Exact floor.  q*sqrt(D) is bracketed by isqrt(q^2 D), then the
        candidate is corrected by exact comparisons (at most two steps)."""
        p, q, r = self.p, self.q, self.r
        if q >= 0:
            s = _isqrt(q * q * self.D)
            n = (p + s) // r
        else:
            s = _isqrt(q * q * self.D)
            n = (p - s - 1) // r
        while self.compare(int(n) + 1) >= 0:
            n += 1
        while self.compare(int(n)) < 0:
            n -= 1
        return int(n)

    __floor__ = floor

    def fractional_part(self) -> "QuadraticIrrational":
        return self - self.floor()

    def __float__(self):
        # floor(value*2^128)/2^128 survives huge p, q, r without overflow
        shift = 128
        scaled = self._scaled_floor(shift)
        return scaled / (1 << shift)

    def _scaled_floor(self, shift: int) -> int:
        """floor(value * 2^shift) computed exactly."""
        v = QuadraticIrrational(self.p << shift, self.q << shift, self.r, self.D)
        return v.floor()

    def scaled_bounds(self, bits: int) -> tuple[int, int]:
        """Integers (lo, hi) with lo <= value*2^bits <= hi and hi - lo <= 1."""
        lo = self._scaled_floor(bits)
        hi = lo if self.compare(Fraction(lo, 1 << bits)) == 0 else lo + 1
        return lo, hi

    def __repr__(self):
        if self.is_rational():
            return f"QI({Fraction(int(self.p), int(self.r))})"
        return f"QI(({self.p} + {self.q}*sqrt({self.D}))/{self.r})"


def golden_ratio() -> QuadraticIrrational:
    """(1 + sqrt(5)) / 2, the golden base used by exact beta expansions."""
    return QuadraticIrrational(1, 1, 2, 5)


def sqrt2_minus_1() -> QuadraticIrrational:
    """sqrt(2) - 1, the classic periodic continued fraction [2, 2, 2, ...]."""
    return QuadraticIrrational(-1, 1, 1, 2)


NAMED_CONSTANTS = {
    "golden": golden_ratio,
    "sqrt2-1": sqrt2_minus_1,
}


def resolve_constant(text: str):
    """Map a CLI/config literal to an exact value.

    Named constants resolve to quadratic irrationals; decimal or a/b strings
    resolve to Fractions.  Raises InvalidInput for anything else.
    """
    if text in NAMED_CONSTANTS:
        return NAMED_CONSTANTS[text]()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidInput(f"cannot parse constant {text!r}") from exc
