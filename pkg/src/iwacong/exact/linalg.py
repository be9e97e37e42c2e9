"""Row-space machinery over the chain ring Z/p^N.

The central object is the Howell basis of a span of row vectors.  Over
Z/p^N every nonzero row scales to a pivot p^e (unit normalization), and
the span is closed under the "shadow" rows p^(N-e) * row whose leading
entry dies mod p^N.  Keeping those shadows is what makes reduction
against the basis a complete membership test, unlike naive echelon form.

The reduced form computed here is canonical for the span: pivot entries
are exact powers of p, entries below a pivot are zero, entries above a
pivot are reduced modulo that pivot.  Two spans are equal iff their
reduced bases are identical, which the tests exercise by recombining
generators at random.
"""

from __future__ import annotations

from .residue import inverse_mod, p_valuation


def vec_mod(v: tuple[int, ...] | list[int], m: int) -> tuple[int, ...]:
    return tuple(x % m for x in v)


def vec_add(a: tuple[int, ...], b: tuple[int, ...], m: int) -> tuple[int, ...]:
    return tuple((x + y) % m for x, y in zip(a, b))

def vec_scale(c: int, a: tuple[int, ...], m: int) -> tuple[int, ...]:
    return tuple((c * x) % m for x in a)


def _leading(v: tuple[int, ...]) -> int:
    """Index of first nonzero entry, or -1 for the zero vector."""
    for i, x in enumerate(v):
        if x:
            return i
    return -1


class HowellBasis:
    """Canonical basis of a row span over Z/p^N with complete reduction."""

    def __init__(self, rows: list[tuple[int, ...]] | list[list[int]],
                 ncols: int, p: int, N: int) -> None:
        self.p = p
        self.N = N
        self.modulus = p ** N
        self.ncols = ncols
        self.rows: list[tuple[int, ...]] = []
        self.pivots: list[tuple[int, int]] = []  # (column, valuation exponent)
        self._build([vec_mod(r, self.modulus) for r in rows])

    def _build(self, work: list[tuple[int, ...]]) -> None:
        m, p, N = self.modulus, self.p, self.N
        pending = [w for w in work if any(w)]
        for col in range(self.ncols):
            here = [w for w in pending if _leading(w) == col]
            rest = [w for w in pending if _leading(w) != col]
            if not here:
                pending = rest
                continue
            # Minimal-valuation entry becomes the pivot; scale it to p^e.
            e, piv = min(((p_valuation(w[col], p), w) for w in here), key=lambda t: t[0])
            unit = piv[col] // (p ** e)
            piv = vec_scale(inverse_mod(unit, m), piv, m)
            new_pending = rest
            for w in here:
                if w is not piv and any(w):
                    q = w[col] // (p ** e)
                    reduced = tuple((x - q * y) % m for x, y in zip(w, piv))
                    if any(reduced):
                        new_pending.append(reduced)
            shadow = vec_scale(p ** (N - e), piv, m)
            if any(shadow):
                new_pending.append(shadow)
            self.rows.append(piv)
            self.pivots.append((col, e))
            pending = new_pending
        self._canonicalize()

    def _canonicalize(self) -> None:
        m, p = self.modulus, self.p
        for i in range(len(self.rows) - 1, -1, -1):
            row = self.rows[i]
            for j in range(i + 1, len(self.rows)):
                col, e = self.pivots[j]
                q = row[col] // (p ** e)
                if q:
                    row = tuple((x - q * y) % m for x, y in zip(row, self.rows[j]))
            self.rows[i] = row

    def reduce(self, v: tuple[int, ...] | list[int]) -> tuple[int, ...]:
        """Remainder of v after reduction; zero iff v lies in the span."""
        m, p = self.modulus, self.p
        w = vec_mod(v, m)
        for row, (col, e) in zip(self.rows, self.pivots):
            c = w[col]
            if c % (p ** e) == 0:
                q = c // (p ** e)
                if q:
                    w = tuple((x - q * y) % m for x, y in zip(w, row))
        return w

    def contains(self, v: tuple[int, ...] | list[int]) -> bool:
        return not any(self.reduce(v))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HowellBasis):
            return NotImplemented
        return (self.p, self.N, self.ncols, self.rows) == (other.p, other.N, other.ncols, other.rows)

    def __repr__(self) -> str:
        return f"HowellBasis(p={self.p}, N={self.N}, ncols={self.ncols}, rank={len(self.rows)})"


def det_mod(rows: list[list[int]] | list[tuple[int, ...]], p: int, N: int) -> int:
    """Determinant of a square integer matrix, reduced mod p^N (exact integer det)."""
    from sympy import Matrix

    return int(Matrix([list(r) for r in rows]).det()) % (p ** N)


def solve_unit_system(rows: list[tuple[int, ...]], target: tuple[int, ...],
                      p: int, N: int) -> tuple[int, ...]:
    """Solve x * M = target over Z/p^N for M with unit determinant.

    Raises ValueError when elimination meets a non-unit pivot (the
    system is then not uniquely solvable this way).
    """
    m = p ** N
    n = len(rows)
    aug = [[rows[i][j] % m for j in range(n)] + [1 if j == i else 0 for j in range(n)]
           for i in range(n)]
    for c in range(n):
        piv = next((i for i in range(c, n) if aug[i][c] % p != 0), None)
        if piv is None:
            raise ValueError("matrix is not invertible over Z/p^N")
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = inverse_mod(aug[c][c], m)
        aug[c] = [(inv * x) % m for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c]:
                f = aug[i][c]
                aug[i] = [(x - f * y) % m for x, y in zip(aug[i], aug[c])]
    minv = [row[n:] for row in aug]
    # x = target * M^{-1}; rows of minv are e_i * M^{-1}.
    return tuple(sum(target[i] * minv[i][j] for i in range(n)) % m for j in range(n))
