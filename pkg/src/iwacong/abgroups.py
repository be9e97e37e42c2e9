"""Finite abelian groups, homomorphisms, order-p actions, and G-sets.

Groups are presented by invariant factors d_1 | d_2 | ... | d_k (each
> 1); elements are integer tuples reduced componentwise.  Kernels,
images, and subgroup structure all go through integer Smith normal form
with explicit unimodular transforms: one canonical tool, no per-case
shortcuts.  Generator labels ride along so ingested data (class groups,
Galois groups) can name its generators; structural equality compares
invariant factors and labels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product


# ------------------------------------------------------------ integer SNF


def _identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def smith_normal_form(mat: list[list[int]]) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Smith normal form with transforms: returns (D, U, V) with U*mat*V = D,
    U and V unimodular, D diagonal with d_1 | d_2 | ... (nonnegative)."""
    m = len(mat)
    n = len(mat[0]) if m else 0
    A = [list(row) for row in mat]
    U = _identity(m)
    V = _identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(i, j, c):
        # row_i += c * row_j
        A[i] = [a + c * b for a, b in zip(A[i], A[j])]
        U[i] = [a + c * b for a, b in zip(U[i], U[j])]

    def add_col(i, j, c):
        # col_i += c * col_j
        for row in A:
            row[i] += c * row[j]
        for row in V:
            row[i] += c * row[j]

    def negate_row(i):
        A[i] = [-a for a in A[i]]
        U[i] = [-a for a in U[i]]

    def submatrix_pivot(t):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        return best

    t = 0
    while t < min(m, n):
        pos = submatrix_pivot(t)
        if pos is None:
            break
        while True:
            i, j = pos
            if i != t:
                swap_rows(t, i)
            if j != t:
                swap_cols(t, j)
            dirty = False
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    add_row(i, t, -q)
                    if A[i][t]:
                        dirty = True
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    add_col(j, t, -q)
                    if A[t][j]:
                        dirty = True
            if dirty:
                pos = submatrix_pivot(t)
                continue
            # Pivot isolated; enforce that it divides the rest of the block.
            offender = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i][j] % A[t][t]:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            add_row(t, offender, 1)
            pos = submatrix_pivot(t)
        if A[t][t] < 0:
            negate_row(t)
        t += 1
    D = A
    check = _mat_mul(_mat_mul(U, [list(row) for row in mat]), V)
    assert check == D, "SNF transform bookkeeping broke"
    return D, U, V


def _mat_mul(X: list[list[int]], Y: list[list[int]]) -> list[list[int]]:
    if not X or not Y:
        return []
    return [[sum(X[i][k] * Y[k][j] for k in range(len(Y))) for j in range(len(Y[0]))]
            for i in range(len(X))]


def _unimodular_inverse(M: list[list[int]]) -> list[list[int]]:
    """Exact inverse of a unimodular integer matrix."""
    n = len(M)
    aug = [[Fraction(M[i][j]) for j in range(n)] + [Fraction(1 if j == i else 0) for j in range(n)]
           for i in range(n)]
    for c in range(n):
        piv = next(i for i in range(c, n) if aug[i][c] != 0)
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [x * inv for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    out = [[aug[i][n + j] for j in range(n)] for i in range(n)]
    assert all(x.denominator == 1 for row in out for x in row), "matrix was not unimodular"
    return [[int(x) for x in row] for row in out]


def _integer_kernel_basis(mat: list[list[int]]) -> list[list[int]]:
    """Basis (as column vectors, returned as lists) of the integer kernel of mat."""
    m = len(mat)
    n = len(mat[0]) if m else 0
    if n == 0:
        return []
    if m == 0:
        return [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    D, _U, V = smith_normal_form(mat)
    rank = sum(1 for i in range(min(m, n)) if D[i][i] != 0)
    return [[V[i][j] for i in range(n)] for j in range(rank, n)]


# ------------------------------------------------------------ groups


def _default_labels(k: int) -> tuple[str, ...]:
    return tuple(f"g{i}" for i in range(k))


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """Product of Z/d_i with d_1 | d_2 | ... | d_k, all d_i > 1."""

    invariant_factors: tuple[int, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        d = self.invariant_factors
        for i, x in enumerate(d):
            if x <= 1:
                raise ValueError("invariant factors must exceed 1")
            if i + 1 < len(d) and d[i + 1] % x != 0:
                raise ValueError(f"invariant factors must form a divisibility chain, got {d}")
        if not self.labels:
            object.__setattr__(self, "labels", _default_labels(len(d)))
        elif len(self.labels) != len(d):
            raise ValueError("one label per generator")

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    @property
    def size(self) -> int:
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    @property
    def exponent(self) -> int:
        return self.invariant_factors[-1] if self.invariant_factors else 1

    def zero(self) -> tuple[int, ...]:
        return (0,) * self.rank

    def reduce(self, x) -> tuple[int, ...]:
        if len(x) != self.rank:
            raise ValueError(f"element needs {self.rank} coordinates")
        return tuple(a % d for a, d in zip(x, self.invariant_factors))

    def add(self, x, y) -> tuple[int, ...]:
        return tuple((a + b) % d for a, b, d in zip(x, y, self.invariant_factors))

    def neg(self, x) -> tuple[int, ...]:
        return tuple((-a) % d for a, d in zip(x, self.invariant_factors))

    def sub(self, x, y) -> tuple[int, ...]:
        return self.add(x, self.neg(y))

    def scalar(self, k: int, x) -> tuple[int, ...]:
        return tuple((k * a) % d for a, d in zip(x, self.invariant_factors))

    def generator(self, i: int) -> tuple[int, ...]:
        return tuple(1 if j == i else 0 for j in range(self.rank))

    def elements(self) -> list[tuple[int, ...]]:
        if self.size > 10 ** 6:
            raise ValueError("refusing to enumerate more than 10^6 elements")
        return list(product(*(range(d) for d in self.invariant_factors)))

    def element_order(self, x) -> int:
        from math import gcd, lcm

        out = 1
        for a, d in zip(self.reduce(x), self.invariant_factors):
            out = lcm(out, d // gcd(a, d))
        return out

    def __repr__(self) -> str:
        return "Z(" + " x ".join(f"/{d}" for d in self.invariant_factors) + ")" if self.rank else "Z(trivial)"


TRIVIAL_GROUP = FiniteAbelianGroup(())


@dataclass(frozen=True)
class GroupHom:
    """Homomorphism given on generators: matrix[i] is the image (a target
    tuple) of the i-th source generator."""

    source: FiniteAbelianGroup
    target: FiniteAbelianGroup
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if len(self.matrix) != self.source.rank:
            raise ValueError("one column per source generator")
        cols = tuple(self.target.reduce(col) for col in self.matrix)
        object.__setattr__(self, "matrix", cols)
        for d, col in zip(self.source.invariant_factors, cols):
            if any(x for x in self.target.scalar(d, col)):
                raise ValueError("matrix does not respect source generator orders")

    def __call__(self, x) -> tuple[int, ...]:
        x = self.source.reduce(x)
        out = self.target.zero()
        for a, col in zip(x, self.matrix):
            out = self.target.add(out, self.target.scalar(a, col))
        return out

    def image_elements(self) -> set[tuple[int, ...]]:
        return {self(x) for x in self.source.elements()}

    def is_identity(self) -> bool:
        return (self.source == self.target
                and all(self(self.source.generator(i)) == self.source.generator(i)
                        for i in range(self.source.rank)))


def identity_hom(group: FiniteAbelianGroup) -> GroupHom:
    return GroupHom(group, group, tuple(group.generator(i) for i in range(group.rank)))


def compose_hom(f: GroupHom, g: GroupHom) -> GroupHom:
    """f after g."""
    if g.target != f.source:
        raise ValueError("homs not composable")
    return GroupHom(g.source, f.target, tuple(f(col) for col in g.matrix))


def subgroup_from_generators(ambient: FiniteAbelianGroup, gens) -> tuple[FiniteAbelianGroup, GroupHom]:
    """Subgroup generated by the given tuples, as (group, inclusion hom).

    Works entirely through SNF: the subgroup is the integer column
    lattice of [gens | relations] modulo the relation lattice.
    """
    k = ambient.rank
    gens = [ambient.reduce(g) for g in gens]
    d = ambient.invariant_factors
    if k == 0:
        return TRIVIAL_GROUP, GroupHom(TRIVIAL_GROUP, ambient, ())
    cols = [list(g) for g in gens] + [[d[i] if j == i else 0 for j in range(k)] for i in range(k)]
    N = [[cols[j][i] for j in range(len(cols))] for i in range(k)]
    D1, U1, _V1 = smith_normal_form(N)
    sigma = [D1[i][i] for i in range(k)]
    assert all(s > 0 for s in sigma), "lattice should have full rank (relations included)"
    U1_inv = _unimodular_inverse(U1)
    # Lattice basis H = U1^{-1} * diag(sigma); express relations in it.
    H = [[U1_inv[i][j] * sigma[j] for j in range(k)] for i in range(k)]
    C = [[Fraction(U1[i][jj] * d[jj], sigma[i]) for jj in range(k)] for i in range(k)]
    assert all(x.denominator == 1 for row in C for x in row)
    C = [[int(x) for x in row] for row in C]
    D2, U2, _V2 = smith_normal_form(C)
    U2_inv = _unimodular_inverse(U2)
    invs: list[int] = []
    gens_in_ambient: list[tuple[int, ...]] = []
    for i in range(k):
        s = D2[i][i]
        if s > 1:
            invs.append(s)
            vec = [sum(H[r][j] * U2_inv[j][i] for j in range(k)) for r in range(k)]
            gens_in_ambient.append(ambient.reduce(vec))
    sub = FiniteAbelianGroup(tuple(invs))
    incl = GroupHom(sub, ambient, tuple(gens_in_ambient))
    assert len(incl.image_elements()) == sub.size, "inclusion must be injective"
    return sub, incl


def image(f: GroupHom) -> tuple[FiniteAbelianGroup, GroupHom]:
    return subgroup_from_generators(f.target, list(f.matrix))


def kernel(f: GroupHom) -> tuple[FiniteAbelianGroup, GroupHom]:
    """Kernel subgroup with its inclusion into f.source."""
    k, m = f.source.rank, f.target.rank
    if k == 0:
        return TRIVIAL_GROUP, GroupHom(TRIVIAL_GROUP, f.source, ())
    if m == 0:
        return subgroup_from_generators(f.source, [f.source.generator(i) for i in range(k)])
    # x in Z^k maps into the relation lattice of the target iff (x, y) solves
    # M x - diag(e) y = 0; project integer kernel vectors onto x.
    M = [[f.matrix[j][i] for j in range(k)] + [-f.target.invariant_factors[i] if ii == i else 0
                                               for ii in range(m)]
         for i in range(m)]
    basis = _integer_kernel_basis(M)
    gens = [f.source.reduce(vec[:k]) for vec in basis]
    sub, incl = subgroup_from_generators(f.source, gens)
    assert all(not any(f(incl(x))) for x in sub.elements()[: min(sub.size, 64)])
    return sub, incl


def coset_representatives(ambient: FiniteAbelianGroup, subgroup_elements) -> list[tuple[int, ...]]:
    """Deterministic transversal of ambient / <subgroup_elements>, zero first."""
    sub = set(subgroup_elements)
    if ambient.zero() not in sub:
        raise ValueError("subgroup must contain zero")
    reps: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    for x in ambient.elements():
        if x not in seen:
            reps.append(x)
            for h in sub:
                seen.add(ambient.add(x, h))
    if len(reps) * len(sub) != ambient.size:
        raise ValueError("given elements do not form a subgroup")
    return reps


# ------------------------------------------------------------ actions


@dataclass(frozen=True)
class CyclicAction:
    """Automorphism sigma of a finite abelian group with sigma^p = id."""

    group: FiniteAbelianGroup
    sigma: GroupHom
    order: int

    def __post_init__(self) -> None:
        if self.sigma.source != self.group or self.sigma.target != self.group:
            raise ValueError("sigma must be an endomorphism of the group")
        power = identity_hom(self.group)
        for _ in range(self.order):
            power = compose_hom(self.sigma, power)
        if not power.is_identity():
            raise ValueError(f"sigma^{self.order} is not the identity")

    @classmethod
    def from_matrix(cls, group: FiniteAbelianGroup, matrix, order: int) -> "CyclicAction":
        return cls(group, GroupHom(group, group, tuple(tuple(c) for c in matrix)), order)

    def apply(self, x, k: int = 1) -> tuple[int, ...]:
        out = self.group.reduce(x)
        for _ in range(k % self.order):
            out = self.sigma(out)
        return out

    def is_trivial(self) -> bool:
        return self.sigma.is_identity()

    def as_gset(self) -> "FiniteGSet":
        elems = self.group.elements()
        return FiniteGSet(tuple(elems), {x: self.sigma(x) for x in elems}, self.order)


def fixed_subgroup(act: CyclicAction) -> tuple[FiniteAbelianGroup, GroupHom]:
    """Kernel of (sigma - id), with its inclusion hom."""
    g = act.group
    diff = GroupHom(g, g, tuple(g.sub(act.sigma(g.generator(i)), g.generator(i))
                                for i in range(g.rank)))
    return kernel(diff)


@dataclass(frozen=True)
class FiniteGSet:
    """Finite labeled set with an action of Z/p via one permutation."""

    elements: tuple
    action: dict
    order: int

    def __post_init__(self) -> None:
        if set(self.action) != set(self.elements) or set(self.action.values()) != set(self.elements):
            raise ValueError("action must be a permutation of the elements")

    def act(self, x, k: int = 1):
        for _ in range(k % self.order):
            x = self.action[x]
        return x


def orbit_decomposition(W: FiniteGSet) -> tuple[list, list[list]]:
    """(fixed points, free orbits), in first-encounter order.

    Every orbit must have size 1 or exactly W.order; anything else means
    the permutation order does not divide the (prime) order p.
    """
    fixed: list = []
    free: list[list] = []
    seen = set()
    for x in W.elements:
        if x in seen:
            continue
        orbit = [x]
        y = W.action[x]
        while y != x:
            orbit.append(y)
            y = W.action[y]
            if len(orbit) > W.order:
                raise ValueError("action order does not divide p")
        if len(orbit) == 1:
            fixed.append(x)
        elif len(orbit) == W.order:
            free.append(orbit)
        else:
            raise ValueError("action order does not divide p")
        seen.update(orbit)
    count = len(fixed) + sum(len(o) for o in free)
    assert count == len(W.elements) and len(seen) == len(W.elements)
    return fixed, free


# ------------------------------------------------------------ structure recovery


def abelian_structure_from_table(elements: list, mul) -> tuple[int, ...]:
    """Invariant factors of a finite abelian group given by a multiplication
    callable, via torsion counting at each prime.

    The count of solutions of x^(q^j) = e determines, prime by prime, how
    many cyclic factors have exponent at least j.
    """
    from sympy import factorint

    n = len(elements)
    idem = [x for x in elements if mul(x, x) == x]
    if len(idem) != 1:
        raise ValueError("not a group table: identity not unique")
    e = idem[0]

    def power(x, k: int):
        out = e
        base = x
        while k:
            if k & 1:
                out = mul(out, base)
            base = mul(base, base)
            k >>= 1
        return out

    per_prime: dict[int, list[int]] = {}
    for q, _mult in factorint(n).items():
        counts = [1]
        j = 1
        while True:
            c = sum(1 for x in elements if power(x, q ** j) == e)
            counts.append(c)
            if c == counts[-2]:
                counts.pop()
                break
            j += 1
        ms = []
        for j in range(1, len(counts)):
            ratio = counts[j] // counts[j - 1]
            exp = 0
            while ratio > 1:
                ratio //= q
                exp += 1
            ms.append(exp)  # number of factors with exponent >= j
        exps = []
        for j in range(1, len(ms) + 1):
            exact = ms[j - 1] - (ms[j] if j < len(ms) else 0)
            exps.extend([j] * exact)
        per_prime[q] = sorted(exps)
    width = max((len(v) for v in per_prime.values()), default=0)
    invs = []
    for i in range(width):
        d = 1
        for q, exps in per_prime.items():
            padded = [0] * (width - len(exps)) + exps
            d *= q ** padded[i]
        invs.append(d)
    return tuple(d for d in invs if d > 1)


def abelian_basis_from_table(elements: list, mul):
    """Explicit isomorphism from a multiplication table to its invariant
    factor decomposition.

    Returns (group, to_group, from_group) where group is the
    FiniteAbelianGroup with the table's invariant factors, to_group maps
    each table element to its coordinate tuple, and from_group inverts it.
    Generators are found by the classical basis-extension argument: pick
    a maximal-order coset representative, then correct it by the current
    span so its order drops to the coset order exactly.
    """
    invariants = abelian_structure_from_table(elements, mul)
    idem = [x for x in elements if mul(x, x) == x]
    e = idem[0]

    def power(x, k: int):
        out, base = e, x
        while k:
            if k & 1:
                out = mul(out, base)
            base = mul(base, base)
            k >>= 1
        return out

    exponent = math.lcm(*invariants) if invariants else 1
    divisors = sorted(d for d in range(1, exponent + 1) if exponent % d == 0)
    span = {e: ()}
    gens = []  # elements of descending order, with their orders

    def coset_order(x) -> int:
        for m in divisors:
            if power(x, m) in span:
                return m
        raise AssertionError("element order does not divide the exponent")

    for d in reversed(invariants):
        pick = next(x for x in elements if coset_order(x) == d)
        t = span[power(pick, d)]
        for i, (g, _o) in enumerate(gens):
            # d divides every span coefficient of pick^d (basis extension)
            assert t[i] % d == 0
            pick = mul(pick, power(g, (-(t[i] // d)) % _o))
        new_span = {}
        for y, coeffs in span.items():
            acc = y
            for c in range(d):
                key = coeffs + (c,)
                assert acc not in new_span
                new_span[acc] = key
                acc = mul(acc, pick)
        span = new_span
        gens.append((pick, d))
    assert len(span) == len(elements)
    group = FiniteAbelianGroup(invariants) if invariants else TRIVIAL_GROUP
    k = len(gens)
    to_group = {}
    for x, coeffs in span.items():
        # gens are in descending-order order; group invariants ascend
        to_group[x] = tuple(coeffs[k - 1 - i] for i in range(k))
    from_group = {v: x for x, v in to_group.items()}
    return group, to_group, from_group
