"""Exact residue arithmetic modulo a prime power.

Everything in this package works over Z/p^N with p an odd prime and N a
runtime parameter.  Values are plain Python ints normalized to [0, m);
the class exists to make the modulus explicit and to centralize unit
tests (invertibility, valuation) that the higher layers rely on.
"""

from __future__ import annotations

from dataclasses import dataclass


def egcd(a: int, b: int) -> tuple[int, int, int]:
    """Extended gcd: returns (g, x, y) with a*x + b*y = g >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def inverse_mod(a: int, m: int) -> int:
    """Inverse of a modulo m.  Raises ValueError when gcd(a, m) != 1."""
    g, x, _ = egcd(a % m, m)
    if g != 1:
        raise ValueError(f"{a} is not a unit modulo {m}")
    return x % m


def p_valuation(a: int, p: int) -> int:
    """v_p(a) for a nonzero integer; raises on a == 0."""
    if a == 0:
        raise ValueError("valuation of zero is undefined")
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v


@dataclass(frozen=True)
class ResidueInt:
    """An element of Z/m, m a prime power p^N.

    >>> a = ResidueInt(7, 3, 2)
    >>> (a * a).value
    4
    >>> a.inverse().value
    4
    """

    value: int
    prime: int
    precision: int

    def __post_init__(self) -> None:
        m = self.prime ** self.precision
        object.__setattr__(self, "value", self.value % m)

    @property
    def modulus(self) -> int:
        return self.prime ** self.precision

    def _coerce(self, other: "ResidueInt | int") -> "ResidueInt":
        if isinstance(other, int):
            return ResidueInt(other, self.prime, self.precision)
        if (other.prime, other.precision) != (self.prime, self.precision):
            raise ValueError("mixed moduli")
        return other

    def __add__(self, other: "ResidueInt | int") -> "ResidueInt":
        o = self._coerce(other)
        return ResidueInt(self.value + o.value, self.prime, self.precision)

    __radd__ = __add__

    def __sub__(self, other: "ResidueInt | int") -> "ResidueInt":
        o = self._coerce(other)
        return ResidueInt(self.value - o.value, self.prime, self.precision)

    def __rsub__(self, other: int) -> "ResidueInt":
        return self._coerce(other) - self

    def __mul__(self, other: "ResidueInt | int") -> "ResidueInt":
        o = self._coerce(other)
        return ResidueInt(self.value * o.value, self.prime, self.precision)

    __rmul__ = __mul__

    def __neg__(self) -> "ResidueInt":
        return ResidueInt(-self.value, self.prime, self.precision)

    def __pow__(self, n: int) -> "ResidueInt":
        if n < 0:
            return self.inverse() ** (-n)
        return ResidueInt(pow(self.value, n, self.modulus), self.prime, self.precision)

    def is_unit(self) -> bool:
        return self.value % self.prime != 0

    def is_zero(self) -> bool:
        return self.value == 0

    def inverse(self) -> "ResidueInt":
        return ResidueInt(inverse_mod(self.value, self.modulus), self.prime, self.precision)

    def valuation(self) -> int:
        """p-adic valuation, capped at N for the zero residue."""
        if self.value == 0:
            return self.precision
        return p_valuation(self.value, self.prime)

    def lift(self) -> int:
        """Canonical integer representative in [0, m)."""
        return self.value
