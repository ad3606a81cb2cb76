"""Exact coefficient domains: the rationals and prime fields Z/p.

Every domain stores its elements as plain Python values (Fraction for the
rationals, small ints for Z/p) and routes arithmetic through the domain
object, so polynomial code never needs to know which field it is over.
"""

from __future__ import annotations

from fractions import Fraction


class UnsupportedDomainError(TypeError):
    """Raised when an operation needs a field but got something weaker."""


class RationalField:
    is_field = True
    name = "q"

    def convert(self, v):
        return Fraction(v)

    zero = Fraction(0)
    one = Fraction(1)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of 0")
        return 1 / Fraction(a)

    def div(self, a, b):
        return a / b

    def coeff_str(self, a):
        return f"{a.numerator}/{a.denominator}"

    def coeff_from_str(self, s):
        num, den = s.split("/")
        return Fraction(int(num), int(den))

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("q")

    def __repr__(self):
        return "QQ"


class PrimeField:
    is_field = True

    def __init__(self, p: int):
        if p < 2 or any(p % d == 0 for d in range(2, int(p**0.5) + 1)):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.name = f"zp:{p}"
        self.zero = 0
        self.one = 1 % p

    def convert(self, v):
        if isinstance(v, Fraction):
            return self.mul(v.numerator % self.p, self.inv(v.denominator % self.p))
        return int(v) % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError("inverse of 0")
        return pow(a, self.p - 2, self.p)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def coeff_str(self, a):
        return f"{a % self.p} mod {self.p}"

    def coeff_from_str(self, s):
        k, _, p = s.partition(" mod ")
        if int(p) != self.p:
            raise ValueError(f"coefficient {s!r} does not belong to Z/{self.p}")
        return int(k) % self.p

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("zp", self.p))

    def __repr__(self):
        return f"GF({self.p})"


class IntegerDomain:
    """Z, not a field; exists as the negative control for field-only code."""

    is_field = False
    name = "z"
    zero = 0
    one = 1

    def convert(self, v):
        return int(v)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def __eq__(self, other):
        return isinstance(other, IntegerDomain)

    def __hash__(self):
        return hash("z")


QQ = RationalField()
GF101 = PrimeField(101)


def field_from_name(name: str):
    """Parse "q" or "zp:<p>" into a coefficient domain."""
    if name == "q":
        return QQ
    if name.startswith("zp:"):
        return PrimeField(int(name.split(":", 1)[1]))
    raise ValueError(f"unknown coefficient domain {name!r}")
