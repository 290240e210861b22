"""Exact dyadic-rational arithmetic for probability products.

Every finite IEEE-754 double is exactly m * 2**e with an odd integer
mantissa m, so any product of float probabilities is a dyadic rational
that can be multiplied, compared, and hashed exactly with big-int
arithmetic.  Guess ranks depend on exact equality of such products:
tie blocks must merge sequences whose probabilities coincide (e.g.
0.4*0.1 == 0.2*0.2 exactly) while rounded float products would also
merge near misses such as 0.01*0.09 versus 0.03*0.03.

Values are kept in canonical form: ``m`` odd and positive, or
``m == 0 and e == 0`` for the zero element.  Canonical form makes
multiplication closed (odd * odd is odd) without any gcd reduction.
"""

from __future__ import annotations

import math
from fractions import Fraction

__all__ = ["Dyadic", "DYADIC_ZERO", "DYADIC_ONE"]

_LN2 = math.log(2.0)


class Dyadic:
    """Nonnegative dyadic rational m * 2**e in canonical form."""

    __slots__ = ("m", "e")

    def __init__(self, m: int, e: int):
        # Callers must pass canonical (m odd, or m == 0 and e == 0).
        self.m = m
        self.e = e

    @classmethod
    def from_float(cls, x: float) -> "Dyadic":
        if not (x >= 0.0) or math.isinf(x):
            raise ValueError(f"dyadic values must be finite and >= 0, got {x!r}")
        if x == 0.0:
            return DYADIC_ZERO
        mant, exp = math.frexp(x)
        m = int(mant * 9007199254740992.0)  # 2**53
        e = exp - 53
        shift = (m & -m).bit_length() - 1
        return cls(m >> shift, e + shift)

    @classmethod
    def from_int(cls, n: int) -> "Dyadic":
        if n < 0:
            raise ValueError("dyadic values must be >= 0")
        if n == 0:
            return DYADIC_ZERO
        shift = (n & -n).bit_length() - 1
        return cls(n >> shift, shift)

    def __mul__(self, other: "Dyadic") -> "Dyadic":
        if self.m == 0 or other.m == 0:
            return DYADIC_ZERO
        return Dyadic(self.m * other.m, self.e + other.e)

    def __pow__(self, k: int) -> "Dyadic":
        if k < 0:
            raise ValueError("negative powers are not closed over dyadics")
        if k == 0:
            return DYADIC_ONE
        if self.m == 0:
            return DYADIC_ZERO
        return Dyadic(self.m ** k, self.e * k)

    def __add__(self, other: "Dyadic") -> "Dyadic":
        if self.m == 0:
            return other
        if other.m == 0:
            return self
        e = min(self.e, other.e)
        m = (self.m << (self.e - e)) + (other.m << (other.e - e))
        shift = (m & -m).bit_length() - 1
        return Dyadic(m >> shift, e + shift)

    def __sub__(self, other: "Dyadic") -> "Dyadic":
        """Exact difference; the result must be nonnegative."""
        if other.m == 0:
            return self
        if self.m == 0 or self._cmp(other) < 0:
            raise ValueError("dyadic subtraction would go negative")
        e = min(self.e, other.e)
        m = (self.m << (self.e - e)) - (other.m << (other.e - e))
        if m == 0:
            return DYADIC_ZERO
        shift = (m & -m).bit_length() - 1
        return Dyadic(m >> shift, e + shift)

    def divide_exact(self, other: "Dyadic") -> "Dyadic | None":
        """self / other when the quotient is dyadic, else None.

        Used by the tie-offset rank search: a required suffix product
        either is an achievable dyadic value or cannot occur at all.
        """
        if other.m == 0:
            raise ZeroDivisionError("dyadic division by zero")
        if self.m == 0:
            return DYADIC_ZERO
        q, r = divmod(self.m, other.m)
        if r != 0:
            return None
        return Dyadic(q, self.e - other.e)  # odd/odd with no remainder is odd

    def _cmp(self, other: "Dyadic") -> int:
        if self.m == 0:
            return -1 if other.m != 0 else 0
        if other.m == 0:
            return 1
        if self.e >= other.e:
            a, b = self.m << (self.e - other.e), other.m
        else:
            a, b = self.m, other.m << (other.e - self.e)
        return (a > b) - (a < b)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self.m == other.m and self.e == other.e

    def __lt__(self, other: "Dyadic") -> bool:
        return self._cmp(other) < 0

    def __le__(self, other: "Dyadic") -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other: "Dyadic") -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other: "Dyadic") -> bool:
        return self._cmp(other) >= 0

    def __hash__(self) -> int:
        return hash((self.m, self.e))

    def __bool__(self) -> bool:
        return self.m != 0

    def is_zero(self) -> bool:
        return self.m == 0

    def log(self) -> float:
        """Natural log; -inf for zero.  math.log on big ints keeps full range."""
        if self.m == 0:
            return float("-inf")
        return math.log(self.m) + self.e * _LN2

    def to_float(self) -> float:
        """Correctly rounded double; 0.0 on underflow, inf on overflow."""
        if self.m == 0:
            return 0.0
        try:
            if self.e >= 0:
                return float(self.m << self.e)
            return self.m / (1 << -self.e)  # big-int division rounds correctly
        except OverflowError:
            return float("inf")

    def as_fraction(self) -> Fraction:
        if self.e >= 0:
            return Fraction(self.m << self.e, 1)
        return Fraction(self.m, 1 << (-self.e))

    def __repr__(self) -> str:
        return f"Dyadic({self.m}, {self.e})"


DYADIC_ZERO = Dyadic(0, 0)
DYADIC_ONE = Dyadic(1, 0)
