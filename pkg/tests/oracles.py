"""Independent oracles shared by the test suite.

Everything here is implemented from scratch and imports nothing from the
package under test, so a disagreement localizes the bug to the library.
"""

from __future__ import annotations

import cmath
from itertools import product


def integer_hnf(rows: list[list[int]]) -> list[list[int]]:
    """Canonical row Hermite normal form of the lattice spanned by integer rows."""
    def leading(w: list[int]) -> int:
        return next((i for i, x in enumerate(w) if x), -1)

    work = [list(r) for r in rows if any(r)]
    ncols = len(rows[0]) if rows else 0
    basis: list[list[int]] = []
    pivots: list[int] = []
    for col in range(ncols):
        here = [w for w in work if leading(w) == col]
        rest = [w for w in work if any(w) and leading(w) != col]
        if not here:
            work = rest
            continue
        while len(here) > 1:
            here.sort(key=lambda w: abs(w[col]))
            a = here[0]
            new_here = [a]
            for w in here[1:]:
                q = w[col] // a[col]
                r = [x - q * y for x, y in zip(w, a)]
                if any(r):
                    if r[col]:
                        new_here.append(r)
                    else:
                        rest.append(r)
            here = new_here
        piv = here[0]
        if piv[col] < 0:
            piv = [-x for x in piv]
        basis.append(piv)
        pivots.append(col)
        work = rest
    # Canonical reduction: entries above each pivot into [0, pivot).
    for i in range(len(basis) - 2, -1, -1):
        for j in range(i + 1, len(basis)):
            c = pivots[j]
            q = basis[i][c] // basis[j][c]
            if q:
                basis[i] = [x - q * y for x, y in zip(basis[i], basis[j])]
    return basis


def lattice_contains(rows: list[list[int]], vec: list[int]) -> bool:
    """Whether vec lies in the integer row lattice of rows (via HNF reduction)."""
    basis = integer_hnf(rows)
    w = list(vec)
    for row in basis:
        col = next(i for i, x in enumerate(row) if x)
        if w[col] % row[col] == 0:
            q = w[col] // row[col]
            if q:
                w = [x - q * y for x, y in zip(w, row)]
    return not any(w)


def mod_span_contains(gens: list[list[int]], vec: list[int], m: int) -> bool:
    """Membership in the Z/m row span by direct coefficient enumeration.

    Cost m**len(gens); only for tiny cases.
    """
    target = tuple(x % m for x in vec)
    n = len(gens[0])
    for coeffs in product(range(m), repeat=len(gens)):
        acc = [0] * n
        for c, g in zip(coeffs, gens):
            for i in range(n):
                acc[i] = (acc[i] + c * g[i]) % m
        if tuple(acc) == target:
            return True
    return False


def mod_span_membership_via_lattice(gens: list[list[int]], vec: list[int], m: int) -> bool:
    """Membership in the Z/m row span via the integer lattice rows(gens) + m*I."""
    n = len(gens[0])
    rows = [list(g) for g in gens]
    for i in range(n):
        rows.append([m if j == i else 0 for j in range(n)])
    return lattice_contains(rows, [x % m for x in vec])


def cyclo_eval_complex(coeffs, n: int) -> complex:
    """Numeric value of sum coeffs[k] * zeta_n^k."""
    return sum(c * cmath.exp(2j * cmath.pi * k / n) for k, c in enumerate(coeffs))


def poly_mul_int(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def subgroup_closure(zero, add, gens):
    """BFS closure of generators under the group operation (tiny groups only)."""
    seen = {zero}
    frontier = [zero]
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = add(x, g)
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    return seen


def companion_matrix(minpoly):
    """Companion matrix of a monic integer polynomial, ascending coeffs."""
    from sympy import Matrix, zeros
    d = len(minpoly) - 1
    M = zeros(d, d)
    for j in range(d - 1):
        M[j + 1, j] = 1
    for i in range(d):
        M[i, d - 1] = -minpoly[i]
    return M


def charpoly_all_positive(mat) -> bool:
    """For a matrix with all-real spectrum: every eigenvalue positive.

    Equivalent to strict sign alternation of the characteristic
    polynomial, i.e. all elementary symmetric functions of the roots
    positive.
    """
    from sympy import symbols
    coeffs = mat.charpoly(symbols("x")).all_coeffs()
    d = len(coeffs) - 1
    for k in range(1, d + 1):
        if coeffs[k] == 0 or (coeffs[k] > 0) != (k % 2 == 0):
            return False
    return True


from functools import lru_cache as _lru_cache


def fiber_box_oracle(minpoly, target_trace):
    """All totally positive elements of Z[theta] with absolute trace equal
    to target_trace, by an independent route: coordinate bounds from the
    inverse trace form (x_j^2 <= (G^-1)_jj * t^2 by Cauchy-Schwarz and
    Tr(beta^2) <= t^2), exact trace filter, and characteristic-polynomial
    positivity.  Returns sorted coordinate tuples.
    """
    return list(_fiber_box_oracle_cached(tuple(minpoly), target_trace))


@_lru_cache(maxsize=None)
def _fiber_box_oracle_cached(minpoly, target_trace):
    from fractions import Fraction
    from itertools import product as iproduct
    from math import isqrt
    from sympy import Matrix, eye

    d = len(minpoly) - 1
    C = companion_matrix(minpoly)
    powers = [eye(d)]
    for _ in range(2 * d - 2):
        powers.append(C * powers[-1])
    tracevec = [p.trace() for p in powers[:d]]
    G = Matrix(d, d, lambda i, j: powers[i + j].trace())
    Ginv = G.inv()
    t2 = target_trace * target_trace
    bounds = []
    for j in range(d):
        r = Fraction(int(Ginv[j, j].p), int(Ginv[j, j].q)) * t2
        bounds.append(isqrt(int(r)))
    out = []
    for coords in iproduct(*(range(-b, b + 1) for b in bounds)):
        if sum(c * t for c, t in zip(coords, tracevec)) != target_trace:
            continue
        M = sum((c * powers[j] for j, c in enumerate(coords) if c), Matrix.zeros(d, d))
        if charpoly_all_positive(M):
            out.append(coords)
    return tuple(sorted(out))
