"""Exact cyclotomic integer arithmetic.

Two element types share one polynomial core:

* ``CyclotomicInt``: an element of Z[zeta_n] on the power basis
  1, zeta, ..., zeta^(phi(n)-1), with exact integer coordinates.  Used
  wherever values are genuine roots of unity (character values, residue
  symbols) or exact norms are taken.

* ``CycloElt``: an element of (Z/p^N)[x]/Phi_n(x), the same power basis
  with coordinates reduced modulo p^N.  This is the coefficient ring of
  group-ring elements once additive-character values (prime-to-p
  conductor) or order-p^r character values enter a computation that
  lives modulo p^N.

Reduction modulo Phi_n is exact polynomial division; nothing here is
numeric.  Conversions between conductors (embedding into a multiple,
recognition inside a divisor) are explicit and checked.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .residue import inverse_mod


@lru_cache(maxsize=None)
def euler_phi(n: int) -> int:
    from sympy import totient

    return int(totient(n))


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Coefficients of Phi_n, ascending degree, exact.

    >>> cyclotomic_polynomial(9)
    (1, 0, 0, 1, 0, 0, 1)
    >>> cyclotomic_polynomial(1)
    (-1, 1)
    """
    from sympy import Poly, cyclotomic_poly
    from sympy.abc import x

    coeffs = Poly(cyclotomic_poly(n, x), x).all_coeffs()
    return tuple(int(c) for c in reversed(coeffs))


def _poly_reduce(coeffs: list[int], n: int, modulus: int = 0) -> tuple[int, ...]:
    """Reduce a polynomial in zeta_n modulo Phi_n (and modulo ``modulus`` if > 0)."""
    phi_n = cyclotomic_polynomial(n)
    deg = len(phi_n) - 1
    work = list(coeffs)
    if len(work) < deg:
        work += [0] * (deg - len(work))
    for k in range(len(work) - 1, deg - 1, -1):
        c = work[k]
        if c:
            work[k] = 0
            for i in range(deg):
                work[k - deg + i] -= c * phi_n[i]
    out = work[:deg]
    if modulus:
        out = [c % modulus for c in out]
    return tuple(out)


def _poly_mul(a: tuple[int, ...], b: tuple[int, ...]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    out[i + j] += ai * bj
    return out


@dataclass(frozen=True)
class CyclotomicInt:
    """Exact element of Z[zeta_n] on the power basis.

    >>> z = CyclotomicInt.root_power(3, 1)
    >>> (z * z + z).coeffs      # zeta_3^2 + zeta_3 = -1
    (-1, 0)
    """

    conductor: int
    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        deg = euler_phi(self.conductor)
        if len(self.coeffs) != deg:
            raise ValueError(f"need {deg} coordinates for conductor {self.conductor}")

    @classmethod
    def from_int(cls, n: int, value: int) -> "CyclotomicInt":
        deg = euler_phi(n)
        return cls(n, (value,) + (0,) * (deg - 1))

    @classmethod
    def zero(cls, n: int) -> "CyclotomicInt":
        return cls.from_int(n, 0)

    @classmethod
    def one(cls, n: int) -> "CyclotomicInt":
        return cls.from_int(n, 1)

    @classmethod
    def root_power(cls, n: int, k: int) -> "CyclotomicInt":
        """zeta_n^k as an exact element."""
        k %= n
        mono = [0] * (k + 1)
        mono[k] = 1
        return cls(n, _poly_reduce(mono, n))

    def _coerce(self, other: "CyclotomicInt | int") -> "CyclotomicInt":
        if isinstance(other, int):
            return CyclotomicInt.from_int(self.conductor, other)
        if other.conductor != self.conductor:
            raise ValueError("mixed conductors; embed explicitly first")
        return other

    def __add__(self, other: "CyclotomicInt | int") -> "CyclotomicInt":
        o = self._coerce(other)
        return CyclotomicInt(self.conductor, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __sub__(self, other: "CyclotomicInt | int") -> "CyclotomicInt":
        o = self._coerce(other)
        return CyclotomicInt(self.conductor, tuple(a - b for a, b in zip(self.coeffs, o.coeffs)))

    def __rsub__(self, other: int) -> "CyclotomicInt":
        return self._coerce(other) - self

    def __neg__(self) -> "CyclotomicInt":
        return CyclotomicInt(self.conductor, tuple(-a for a in self.coeffs))

    def __mul__(self, other: "CyclotomicInt | int") -> "CyclotomicInt":
        if isinstance(other, int):
            return CyclotomicInt(self.conductor, tuple(a * other for a in self.coeffs))
        o = self._coerce(other)
        return CyclotomicInt(self.conductor, _poly_reduce(_poly_mul(self.coeffs, o.coeffs), self.conductor))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "CyclotomicInt":
        if n < 0:
            raise ValueError("negative powers only defined for roots of unity; invert explicitly")
        result = CyclotomicInt.one(self.conductor)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def rational_value(self) -> int:
        if not self.is_rational():
            raise ValueError("not a rational integer")
        return self.coeffs[0]

    def galois(self, a: int) -> "CyclotomicInt":
        """sigma_a: zeta -> zeta^a.  Requires gcd(a, n) = 1."""
        n = self.conductor
        from math import gcd

        if gcd(a, n) != 1:
            raise ValueError(f"{a} not coprime to conductor {n}")
        out = [0] * n
        for k, c in enumerate(self.coeffs):
            if c:
                out[(a * k) % n] += c
        return CyclotomicInt(n, _poly_reduce(out, n))

    def embed(self, m: int) -> "CyclotomicInt":
        """Image in Z[zeta_m] for n | m, via zeta_n = zeta_m^(m/n)."""
        n = self.conductor
        if m % n != 0:
            raise ValueError(f"{n} does not divide {m}")
        step = m // n
        out = [0] * m
        for k, c in enumerate(self.coeffs):
            if c:
                out[(k * step) % m] += c
        return CyclotomicInt(m, _poly_reduce(out, m))

    def descend(self, d: int) -> "CyclotomicInt":
        """Recognize this element inside Z[zeta_d] for d | n.

        Solves the exact linear system expressing the element in the
        embedded power basis of Z[zeta_d]; raises ValueError when the
        element does not lie in the subring.
        """
        n = self.conductor
        if n % d != 0:
            raise ValueError(f"{d} does not divide {n}")
        if d == n:
            return self
        basis = [CyclotomicInt.root_power(d, j).embed(n).coeffs for j in range(euler_phi(d))]
        target = list(self.coeffs)
        sol = _solve_integer_system(basis, target)
        if sol is None:
            raise ValueError("element does not lie in the requested cyclotomic subring")
        return CyclotomicInt(d, tuple(sol))

    def relative_norm(self, d: int) -> "CyclotomicInt":
        """Norm from Q(zeta_n) to Q(zeta_d), d | n: product over the
        Galois conjugates sigma_a with a = 1 mod d.

        >>> CyclotomicInt.root_power(9, 0).relative_norm(3).coeffs
        (1, 0)
        """
        n = self.conductor
        if n % d != 0:
            raise ValueError(f"{d} does not divide {n}")
        from math import gcd

        prod = CyclotomicInt.one(n)
        for a in range(1, n + 1):
            if gcd(a, n) == 1 and a % d == (1 % d):
                prod = prod * self.galois(a)
        return prod.descend(d)

    def norm_to_int(self) -> int:
        """Full norm down to Z (product of all conjugates)."""
        return self.relative_norm(1).rational_value()

    def multiplicative_order(self) -> int | None:
        """Order as a root of unity, or None when it is not one (bounded search to 2n)."""
        if self.is_zero():
            return None
        acc = self
        for k in range(1, 2 * self.conductor + 1):
            if acc == CyclotomicInt.one(self.conductor):
                return k
            acc = acc * self
        return None


def _solve_integer_system(rows: list[tuple[int, ...]], target: list[int]) -> list[int] | None:
    """Solve sum_i x_i * rows[i] = target exactly over Q, return integer x or None.

    Used only for subring recognition; sizes here are at most phi(n) <= 100.
    """
    nrows = len(rows)
    ncols = len(target)
    mat = [[Fraction(rows[i][j]) for i in range(nrows)] for j in range(ncols)]
    vec = [Fraction(t) for t in target]
    piv_cols: list[int] = []
    r = 0
    for c in range(nrows):
        piv = next((i for i in range(r, ncols) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        vec[r], vec[piv] = vec[piv], vec[r]
        inv = 1 / mat[r][c]
        mat[r] = [m * inv for m in mat[r]]
        vec[r] = vec[r] * inv
        for i in range(ncols):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
                vec[i] = vec[i] - f * vec[r]
        piv_cols.append(c)
        r += 1
    sol = [Fraction(0)] * nrows
    for row_idx, c in enumerate(piv_cols):
        sol[c] = vec[row_idx]
    for i in range(r, ncols):
        if vec[i] != 0:
            return None
    for i in range(ncols):
        acc = sum(sol[c] * rows[c][i] for c in range(nrows))
        if acc != target[i]:
            return None
    if any(s.denominator != 1 for s in sol):
        return None
    return [int(s) for s in sol]


@dataclass(frozen=True)
class CycloElt:
    """Element of (Z/p^N)[x]/Phi_n(x): cyclotomic coordinates modulo p^N."""

    conductor: int
    prime: int
    precision: int
    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        deg = euler_phi(self.conductor)
        m = self.modulus
        if len(self.coeffs) != deg:
            raise ValueError(f"need {deg} coordinates for conductor {self.conductor}")
        object.__setattr__(self, "coeffs", tuple(c % m for c in self.coeffs))

    @property
    def modulus(self) -> int:
        return self.prime ** self.precision

    @classmethod
    def from_int(cls, value: int, n: int, p: int, N: int) -> "CycloElt":
        deg = euler_phi(n)
        return cls(n, p, N, (value,) + (0,) * (deg - 1))

    @classmethod
    def zero(cls, n: int, p: int, N: int) -> "CycloElt":
        return cls.from_int(0, n, p, N)

    @classmethod
    def one(cls, n: int, p: int, N: int) -> "CycloElt":
        return cls.from_int(1, n, p, N)

    @classmethod
    def root_power(cls, n: int, k: int, p: int, N: int) -> "CycloElt":
        k %= n
        mono = [0] * (k + 1)
        mono[k] = 1
        return cls(n, p, N, _poly_reduce(mono, n, p ** N))

    @classmethod
    def from_cyclotomic(cls, value: CyclotomicInt, p: int, N: int) -> "CycloElt":
        return cls(value.conductor, p, N, value.coeffs)

    def _coerce(self, other: "CycloElt | int") -> "CycloElt":
        if isinstance(other, int):
            return CycloElt.from_int(other, self.conductor, self.prime, self.precision)
        if (other.conductor, other.prime, other.precision) != (self.conductor, self.prime, self.precision):
            raise ValueError("mixed coefficient rings; promote explicitly first")
        return other

    def __add__(self, other: "CycloElt | int") -> "CycloElt":
        o = self._coerce(other)
        return CycloElt(self.conductor, self.prime, self.precision,
                        tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __sub__(self, other: "CycloElt | int") -> "CycloElt":
        o = self._coerce(other)
        return CycloElt(self.conductor, self.prime, self.precision,
                        tuple(a - b for a, b in zip(self.coeffs, o.coeffs)))

    def __rsub__(self, other: int) -> "CycloElt":
        return self._coerce(other) - self

    def __neg__(self) -> "CycloElt":
        return CycloElt(self.conductor, self.prime, self.precision, tuple(-a for a in self.coeffs))

    def __mul__(self, other: "CycloElt | int") -> "CycloElt":
        if isinstance(other, int):
            return CycloElt(self.conductor, self.prime, self.precision,
                            tuple(a * other for a in self.coeffs))
        o = self._coerce(other)
        prod = _poly_reduce(_poly_mul(self.coeffs, o.coeffs), self.conductor, self.modulus)
        return CycloElt(self.conductor, self.prime, self.precision, prod)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "CycloElt":
        if n < 0:
            return self.inverse() ** (-n)
        result = CycloElt.one(self.conductor, self.prime, self.precision)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def is_rational(self) -> bool:
        """True when all non-constant power-basis coordinates vanish mod p^N."""
        return all(c == 0 for c in self.coeffs[1:])

    def rational_value(self) -> int:
        if not self.is_rational():
            raise ValueError("not in the prime-field line")
        return self.coeffs[0]

    def divisible_by_p(self) -> bool:
        return all(c % self.prime == 0 for c in self.coeffs)

    def divide_by_p(self) -> "CycloElt":
        """Canonical lift-and-divide; requires p | every coordinate."""
        if not self.divisible_by_p():
            raise ValueError("not divisible by p")
        return CycloElt(self.conductor, self.prime, self.precision,
                        tuple(c // self.prime for c in self.coeffs))

    def galois(self, a: int) -> "CycloElt":
        n = self.conductor
        from math import gcd

        if gcd(a, n) != 1:
            raise ValueError(f"{a} not coprime to conductor {n}")
        out = [0] * n
        for k, c in enumerate(self.coeffs):
            if c:
                out[(a * k) % n] += c
        return CycloElt(n, self.prime, self.precision, _poly_reduce(out, n, self.modulus))

    def promote(self, m: int) -> "CycloElt":
        """Explicit coefficient-ring promotion into conductor m (n | m)."""
        n = self.conductor
        if m == n:
            return self
        if m % n != 0:
            raise ValueError(f"{n} does not divide {m}")
        step = m // n
        out = [0] * m
        for k, c in enumerate(self.coeffs):
            if c:
                out[(k * step) % m] += c
        return CycloElt(m, self.prime, self.precision, _poly_reduce(out, m, self.modulus))

    def inverse(self) -> "CycloElt":
        """Inverse via Hensel lifting from an inverse mod p.

        Raises ValueError when the element is not a unit (i.e. not
        invertible modulo the maximal ideals above p).
        """
        inv1 = _invert_mod_p(self.coeffs, self.conductor, self.prime)
        if inv1 is None:
            raise ValueError("not a unit in the cyclotomic residue ring")
        x = CycloElt(self.conductor, self.prime, self.precision, inv1)
        # Newton iteration x -> x(2 - a x), doubling p-adic accuracy each step.
        k = 1
        while k < self.precision:
            x = x * (2 - self * x)
            k *= 2
        assert (self * x - 1).is_zero()
        return x

    def eval_at_root_one(self) -> int:
        """Sum of coordinates mod p^N: image under zeta -> 1.

        For conductor p^r this is reduction modulo the prime above p
        composed with the canonical lift, the residue-extension sense
        used in congruence verdicts.
        """
        return sum(self.coeffs) % self.modulus


def _invert_mod_p(coeffs: tuple[int, ...], n: int, p: int) -> tuple[int, ...] | None:
    """Inverse of a polynomial modulo (p, Phi_n) via extended Euclid over F_p."""
    phi_n = [c % p for c in cyclotomic_polynomial(n)]
    a = [c % p for c in coeffs]

    def pdeg(u: list[int]) -> int:
        for i in range(len(u) - 1, -1, -1):
            if u[i]:
                return i
        return -1

    def pmod(u: list[int], v: list[int]) -> tuple[list[int], list[int]]:
        u = u[:]
        dv = pdeg(v)
        inv_lead = inverse_mod(v[dv], p)
        q = [0] * (max(pdeg(u) - dv + 1, 1))
        while pdeg(u) >= dv:
            du = pdeg(u)
            f = (u[du] * inv_lead) % p
            q[du - dv] = f
            for i in range(dv + 1):
                u[du - dv + i] = (u[du - dv + i] - f * v[i]) % p
        return q, u

    r0, r1 = phi_n, a
    s0, s1 = [0], [1]
    while pdeg(r1) > 0:
        q, r = pmod(r0, r1)
        r0, r1 = r1, r
        prod = [0] * (pdeg(q) + max(pdeg(s1), 0) + 2)
        for i, qi in enumerate(q):
            if qi:
                for j, sj in enumerate(s1):
                    if sj:
                        prod[i + j] = (prod[i + j] + qi * sj) % p
        s0, s1 = s1, [(x - y) % p for x, y in zip(s0 + [0] * len(prod), prod + [0] * len(s0))]
    if pdeg(r1) != 0:
        return None
    c_inv = inverse_mod(r1[0], p)
    inv = [(c_inv * c) % p for c in s1]
    return _poly_reduce(inv, n, p)
