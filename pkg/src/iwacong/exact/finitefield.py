"""Finite fields F_(ell^f) with deterministic construction.

Fields are realized as F_ell[x]/(g) for the first monic irreducible g of
degree f in a fixed enumeration order, so two runs (and two processes)
agree on every coordinate.  Element arithmetic is plain polynomial
arithmetic; nothing random is used anywhere, including the searches for
elements of prescribed multiplicative order and for square roots.

The intended use is locating small root-of-unity subgroups mu_(p^r) and
quadratic irrationalities inside one explicit big field, so the helpers
favor exactness and determinism over asymptotic speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .residue import inverse_mod


def _pmul(a: list[int], b: list[int], ell: int) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    out[i + j] = (out[i + j] + ai * bj) % ell
    return out


def _pmod(a: list[int], g: list[int], ell: int) -> list[int]:
    a = [c % ell for c in a]
    dg = len(g) - 1
    # moduli here are monic in practice; the inverse is only for stray callers
    inv_lead = 1 if g[dg] == 1 else inverse_mod(g[dg], ell)
    for k in range(len(a) - 1, dg - 1, -1):
        c = a[k]
        if c:
            f = c if inv_lead == 1 else (c * inv_lead) % ell
            for i in range(dg + 1):
                a[k - dg + i] = (a[k - dg + i] - f * g[i]) % ell
    out = a[:dg]
    return out + [0] * (dg - len(out))


def _pmulmod_monic(a: list[int], b: list[int], g: list[int], ell: int,
                   gsparse: tuple[tuple[int, int], ...]) -> list[int]:
    """Product of two reduced polynomials modulo a monic g, fused.

    gsparse lists the nonzero (index, coefficient) pairs of g below the
    leading term, so reduction only touches the support of g.
    """
    out = _pmul(a, b, ell)
    dg = len(g) - 1
    for k in range(len(out) - 1, dg - 1, -1):
        c = out[k]
        if c:
            out[k] = 0
            base = k - dg
            for i, gi in gsparse:
                out[base + i] = (out[base + i] - c * gi) % ell
    del out[dg:]
    out.extend([0] * (dg - len(out)))
    return out


def _sparse_pairs(g: list[int] | tuple[int, ...]) -> tuple[tuple[int, int], ...]:
    return tuple((i, gi) for i, gi in enumerate(g[:-1]) if gi)


def _ppowmod(a: list[int], e: int, g: list[int], ell: int) -> list[int]:
    result = [1] + [0] * (len(g) - 2)
    base = _pmod(a, g, ell)
    gs = _sparse_pairs(g) if g[-1] == 1 else None
    if gs is None:
        while e:
            if e & 1:
                result = _pmod(_pmul(result, base, ell), g, ell)
            base = _pmod(_pmul(base, base, ell), g, ell)
            e >>= 1
        return result
    while e:
        if e & 1:
            result = _pmulmod_monic(result, base, g, ell, gs)
        if e > 1:
            base = _pmulmod_monic(base, base, g, ell, gs)
        e >>= 1
    return result


def _pgcd(a: list[int], b: list[int], ell: int) -> list[int]:
    def deg(u: list[int]) -> int:
        for i in range(len(u) - 1, -1, -1):
            if u[i]:
                return i
        return -1

    a, b = a[:], b[:]
    while deg(b) >= 0:
        db = deg(b)
        inv = inverse_mod(b[db], ell)
        while deg(a) >= db:
            da = deg(a)
            f = (a[da] * inv) % ell
            for i in range(db + 1):
                a[da - db + i] = (a[da - db + i] - f * b[i]) % ell
        a, b = b, a
    d = deg(a)
    inv = inverse_mod(a[d], ell)
    return [(c * inv) % ell for c in a[: d + 1]]


def _is_irreducible(g: list[int], ell: int) -> bool:
    f = len(g) - 1
    if f == 1:
        return True
    from sympy import primefactors

    x = _pmod([0, 1], g, ell)
    # one incremental Frobenius chain; gcd rejections at f/q come before
    # the full x^(ell^f) = x equality, so reducibles exit early
    checkpoints = sorted(f // q for q in primefactors(f))
    h = x[:]
    steps = 0
    for stop in checkpoints:
        while steps < stop:
            h = _ppowmod(h, ell, g, ell)
            steps += 1
        diff = [(a - b) % ell for a, b in zip(h, x)]
        d = _pgcd(g, diff + [0], ell)
        if len(d) - 1 != 0:
            return False
    while steps < f:
        h = _ppowmod(h, ell, g, ell)
        steps += 1
    return h == x


@lru_cache(maxsize=None)
def _find_irreducible(ell: int, f: int) -> tuple[int, ...]:
    """First monic irreducible of degree f over F_ell in base-ell counter order."""
    if f == 1:
        return (0, 1)
    k = 0
    while True:
        digits = []
        t = k
        for _ in range(f):
            digits.append(t % ell)
            t //= ell
        g = digits + [1]
        if _is_irreducible(g, ell):
            return tuple(g)
        k += 1


class FiniteField:
    """F_(ell^f) as F_ell[x]/(g) with g the deterministic first irreducible."""

    def __init__(self, ell: int, f: int) -> None:
        if ell < 2 or f < 1:
            raise ValueError("need a prime ell and degree f >= 1")
        self.ell = ell
        self.degree = f
        self.modpoly: tuple[int, ...] = _find_irreducible(ell, f)
        self.order = ell ** f
        self._modlist = list(self.modpoly)
        self._gsparse = _sparse_pairs(self._modlist)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteField):
            return NotImplemented
        return (self.ell, self.modpoly) == (other.ell, other.modpoly)

    def __hash__(self) -> int:
        return hash((self.ell, self.modpoly))

    def __repr__(self) -> str:
        return f"FiniteField({self.ell}^{self.degree})"

    def elt(self, coeffs: list[int] | tuple[int, ...] | int) -> "FFElt":
        if isinstance(coeffs, int):
            coeffs = [coeffs]
        reduced = _pmod(list(coeffs), list(self.modpoly), self.ell)
        return FFElt(self, tuple(reduced))

    def zero(self) -> "FFElt":
        return self.elt(0)

    def one(self) -> "FFElt":
        return self.elt(1)

    def gen(self) -> "FFElt":
        return self.elt([0, 1])

    def elements_iter(self):
        """All field elements in base-ell counter order (use only for small fields)."""
        for k in range(self.order):
            digits = []
            t = k
            for _ in range(self.degree):
                digits.append(t % self.ell)
                t //= self.ell
            yield self.elt(digits)

    def element_of_order(self, n: int) -> "FFElt":
        """Deterministic element of exact multiplicative order n.

        Requires n | ell^f - 1; scans candidates in counter order and
        projects each onto the order-n subgroup.
        """
        m = self.order - 1
        if n <= 0 or m % n != 0:
            raise ValueError(f"{n} does not divide the group order {m}")
        if n == 1:
            return self.one()
        from sympy import primefactors

        qs = primefactors(n)
        for cand in self.elements_iter():
            if cand.is_zero():
                continue
            y = cand ** (m // n)
            if any((y ** (n // q)) == self.one() for q in qs):
                continue
            return y
        raise RuntimeError("unreachable: cyclic group always has the element")

    def sqrt(self, c: "FFElt") -> "FFElt":
        """A square root of c, deterministic; raises ValueError for non-squares."""
        if c.is_zero():
            return c
        m = self.order - 1
        if self.ell == 2:
            return c ** (self.order // 2)
        if c ** (m // 2) != self.one():
            raise ValueError("element is not a square")
        v = 0
        u = m
        while u % 2 == 0:
            u //= 2
            v += 1
        y = c ** ((u + 1) // 2)
        t = c ** u
        z = self.element_of_order(2 ** v)
        # Tonelli-Shanks: maintain y^2 = c * t with ord(t) | 2^(v-1), shrink ord(t).
        while t != self.one():
            k = 0
            tt = t
            while tt != self.one():
                tt = tt * tt
                k += 1
            b = z ** (2 ** (v - k - 1))
            y = y * b
            t = t * b * b
        assert y * y == c
        return y

    def frobenius(self, a: "FFElt", k: int = 1) -> "FFElt":
        out = a
        for _ in range(k % self.degree if self.degree else 0):
            out = out ** self.ell
        return out


@dataclass(frozen=True)
class FFElt:
    field: FiniteField
    coeffs: tuple[int, ...]

    def _coerce(self, other: "FFElt | int") -> "FFElt":
        if isinstance(other, int):
            return self.field.elt(other)
        if other.field != self.field:
            raise ValueError("elements of different fields")
        return other

    def __add__(self, other: "FFElt | int") -> "FFElt":
        o = self._coerce(other)
        return FFElt(self.field, tuple((a + b) % self.field.ell for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __sub__(self, other: "FFElt | int") -> "FFElt":
        o = self._coerce(other)
        return FFElt(self.field, tuple((a - b) % self.field.ell for a, b in zip(self.coeffs, o.coeffs)))

    def __rsub__(self, other: int) -> "FFElt":
        return self._coerce(other) - self

    def __neg__(self) -> "FFElt":
        return FFElt(self.field, tuple((-a) % self.field.ell for a in self.coeffs))

    def __mul__(self, other: "FFElt | int") -> "FFElt":
        o = self._coerce(other)
        fld = self.field
        prod = _pmulmod_monic(list(self.coeffs), list(o.coeffs),
                              fld._modlist, fld.ell, fld._gsparse)
        return FFElt(self.field, tuple(prod))

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "FFElt":
        if e < 0:
            return self.inverse() ** (-e)
        ell = self.field.ell
        if not any(self.coeffs[1:]):
            # constants live in the prime field: native pow, same value
            c = self.coeffs[0] if self.coeffs else 0
            if c == 0:
                v = 1 if e == 0 else 0
            else:
                v = pow(c, e % (ell - 1), ell)
            return FFElt(self.field, (v,) + (0,) * (self.field.degree - 1))
        out = _ppowmod(list(self.coeffs), e, self.field._modlist, ell)
        return FFElt(self.field, tuple(out))

    def inverse(self) -> "FFElt":
        if self.is_zero():
            raise ZeroDivisionError("zero has no inverse")
        return self ** (self.field.order - 2)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def multiplicative_order(self, bound: int) -> int | None:
        """Smallest k in [1, bound] with self^k = 1, or None.  Brute force,
        intended for elements known to live in a small subgroup."""
        acc = self
        one = self.field.one()
        for k in range(1, bound + 1):
            if acc == one:
                return k
            acc = acc * self
        return None
