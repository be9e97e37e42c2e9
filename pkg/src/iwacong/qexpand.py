"""Totally real field data, certified trace-fiber enumeration, and the
normalized diagonal restriction of formal q-expansions.

Field elements are integer (or rational) coordinate tuples on a power
integral basis.  Real embeddings are certified rational enclosures,
refined by exact bisection on the minimal polynomial; total positivity
is decided only when every enclosure separates from zero, and raised as
PositivityUndecided otherwise, never guessed.

The fiber of the relative trace over p * beta' is enumerated by a box
search whose per-coordinate bounds come from the exact inverse trace
form and enclosure bounds on the dual basis embeddings, which makes the
enumeration provably complete.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product


class PositivityUndecided(Exception):
    """Raised when embedding enclosures cannot separate a value from zero."""


def _poly_eval_fraction(coeffs: list[int], x: Fraction) -> Fraction:
    out = Fraction(0)
    for c in reversed(coeffs):
        out = out * x + c
    return out


def _interval_mul(a: tuple[Fraction, Fraction], b: tuple[Fraction, Fraction]):
    vals = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
    return (min(vals), max(vals))


def _interval_poly(coeffs, iv: tuple[Fraction, Fraction]):
    """Interval enclosure of sum coeffs[j] * x^j over x in iv (Horner)."""
    lo, hi = Fraction(0), Fraction(0)
    for c in reversed(coeffs):
        lo, hi = _interval_mul((lo, hi), iv)
        lo, hi = lo + c, hi + c
    return lo, hi


@dataclass
class _RootEnclosure:
    lo: Fraction
    hi: Fraction

    def refine(self, minpoly: list[int]) -> None:
        if self.lo == self.hi:
            return
        mid = (self.lo + self.hi) / 2
        fm = _poly_eval_fraction(minpoly, mid)
        if fm == 0:
            self.lo = self.hi = mid
            return
        flo = _poly_eval_fraction(minpoly, self.lo)
        if (flo < 0) == (fm < 0):
            self.lo = mid
        else:
            self.hi = mid


class TotallyRealFieldData:
    """Monogenic order Z[theta] of a totally real field, with exact trace
    data and certified embedding enclosures.

    Tower data (subfield, inclusion, relative trace) is optional and is
    validated so that relative trace composed with inclusion multiplies
    by the relative degree, and absolute traces factor through it.
    """

    def __init__(self, minpoly: list[int]) -> None:
        if minpoly[-1] != 1:
            raise ValueError("minimal polynomial must be monic")
        self.minpoly = [int(c) for c in minpoly]
        self.degree = len(minpoly) - 1
        from sympy import Poly
        from sympy.abc import x

        poly = Poly(self.minpoly[::-1], x)
        if self.degree > 1 and not poly.is_irreducible:
            raise ValueError("minimal polynomial must be irreducible")
        self._init_embeddings(poly)
        self._init_traces()
        self.subfield: TotallyRealFieldData | None = None
        self.incl_matrix: list[list[int]] | None = None
        self.rel_trace_matrix: list[list[Fraction]] | None = None
        self.rel_degree: int | None = None

    def _init_embeddings(self, poly) -> None:
        if self.degree == 1:
            root = Fraction(-self.minpoly[0])
            self.embeddings = [_RootEnclosure(root, root)]
            return
        ivs = poly.intervals()
        if len(ivs) != self.degree:
            raise ValueError("polynomial is not totally real")
        self.embeddings = []
        for (a, b), _mult in ivs:
            enc = _RootEnclosure(Fraction(a), Fraction(b))
            # Shrink until the enclosure is strictly sign-changing or exact.
            for _ in range(8):
                enc.refine(self.minpoly)
            self.embeddings.append(enc)

    def _init_traces(self) -> None:
        d = self.degree
        # Tr(a) is the trace of the multiplication-by-a matrix; compute it
        # for the power basis, then all traces are dot products.
        self.trace_vector = []
        for k in range(d):
            theta_k = [0] * d
            theta_k[k] = 1
            tr = 0
            for j in range(d):
                e_j = [0] * d
                e_j[j] = 1
                tr += self.mul(tuple(theta_k), tuple(e_j))[j]
            self.trace_vector.append(tr)
        self.trace_form = [[self._trace_power(i + j) for j in range(d)] for i in range(d)]
        assert self.trace_form[0] == self.trace_vector

    def _trace_power(self, k: int) -> int:
        return sum(c * t for c, t in zip(self.power_basis_coords(k), self.trace_vector))

    def power_basis_coords(self, k: int) -> list[int]:
        """Coordinates of theta^k on the power basis."""
        coords = [0] * self.degree
        if k < self.degree:
            coords[k] = 1
            return coords
        work = [0] * (k + 1)
        work[k] = 1
        for i in range(k, self.degree - 1, -1):
            c = work[i]
            if c:
                work[i] = 0
                for j in range(self.degree):
                    work[i - self.degree + j] -= c * self.minpoly[j]
        return work[: self.degree]

    # -------------------------------------------------- element arithmetic

    def zero(self) -> tuple[int, ...]:
        return (0,) * self.degree

    def one(self) -> tuple[int, ...]:
        return (1,) + (0,) * (self.degree - 1)

    def add(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple(x - y for x, y in zip(a, b))

    def scalar(self, c, a):
        return tuple(c * x for x in a)

    def mul(self, a, b):
        d = self.degree
        conv = [0] * (2 * d - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        conv[i + j] += ai * bj
        out = [0] * d
        for k, c in enumerate(conv):
            if c:
                for j, r in enumerate(self.power_basis_coords(k)):
                    out[j] += c * r
        return tuple(out)

    def trace(self, a):
        return sum(c * t for c, t in zip(a, self.trace_vector))

    def embedding_enclosures(self, a, rounds: int = 0):
        """Certified enclosures of all real embeddings of the element."""
        out = []
        for enc in self.embeddings:
            for _ in range(rounds):
                enc.refine(self.minpoly)
            out.append(_interval_poly(list(a), (enc.lo, enc.hi)))
        return out

    def is_totally_positive(self, a, max_rounds: int = 200) -> bool:
        if not any(a):
            return False
        undecided = list(range(self.degree))
        rounds = 0
        while undecided:
            still = []
            for i in undecided:
                enc = self.embeddings[i]
                lo, hi = _interval_poly(list(a), (enc.lo, enc.hi))
                if lo > 0:
                    continue
                if hi < 0:
                    return False
                still.append(i)
            if not still:
                return True
            if rounds >= max_rounds:
                raise PositivityUndecided(
                    f"embedding enclosures cannot separate {a} from zero")
            for i in still:
                self.embeddings[i].refine(self.minpoly)
            rounds += 1
            undecided = still
        return True

    # -------------------------------------------------- tower

    def attach_subfield(self, sub: "TotallyRealFieldData",
                        incl_matrix, rel_trace_matrix) -> None:
        """Declare sub -> self with inclusion columns and a relative trace.

        incl_matrix[j] = coordinates in self of the j-th subfield basis
        vector; rel_trace_matrix[j] = subfield coordinates of the
        relative trace of the j-th basis vector of self.
        """
        if self.degree % sub.degree:
            raise ValueError("subfield degree must divide the degree")
        rel = self.degree // sub.degree
        incl = [list(col) for col in incl_matrix]
        trm = [[Fraction(x) for x in row] for row in rel_trace_matrix]
        # Relative trace after inclusion multiplies by the relative degree.
        for j in range(sub.degree):
            img = incl[j]
            back = [sum(trm[i][k] * img[i] for i in range(self.degree))
                    for k in range(sub.degree)]
            expected = [rel if k == j else 0 for k in range(sub.degree)]
            if back != expected:
                raise ValueError("relative trace o inclusion is not multiplication by the degree")
        # Absolute traces factor through the relative trace.
        for i in range(self.degree):
            via = sum(trm[i][k] * sub.trace_vector[k] for k in range(sub.degree))
            if via != self.trace_vector[i]:
                raise ValueError("absolute trace does not factor through the relative trace")
        self.subfield = sub
        self.incl_matrix = incl
        self.rel_trace_matrix = trm
        self.rel_degree = rel

    def include_from_subfield(self, a_sub):
        if self.subfield is None:
            raise ValueError("no tower data attached")
        out = [0] * self.degree
        for j, c in enumerate(a_sub):
            for i in range(self.degree):
                out[i] += c * self.incl_matrix[j][i]
        return tuple(out)

    def relative_trace(self, a):
        if self.subfield is None:
            raise ValueError("no tower data attached")
        out = [Fraction(0)] * self.subfield.degree
        for i, c in enumerate(a):
            if c:
                for k in range(self.subfield.degree):
                    out[k] += c * self.rel_trace_matrix[i][k]
        return tuple(out)


def cos_field_data() -> TotallyRealFieldData:
    """The degree-3 field generated by 2cos(2pi/9), over Q, relative degree 3."""
    F = TotallyRealFieldData([1, -3, 0, 1])
    Q = TotallyRealFieldData([0, 1])
    F.attach_subfield(Q, [[1, 0, 0]], [[Fraction(t)] for t in F.trace_vector])
    return F


# ------------------------------------------------------------ fiber search


def enumerate_trace_fiber(F: TotallyRealFieldData, beta_prime, p: int,
                          lattice=None) -> list[tuple[int, ...]]:
    """All totally positive lattice points with relative trace p * beta'.

    Complete by construction: coordinates are bounded through the exact
    inverse trace form and certified dual-basis enclosure bounds; every
    box point is filtered by the exact trace equation and certified
    positivity.
    """
    if F.subfield is None:
        raise ValueError("fiber enumeration needs tower data")
    sub = F.subfield
    if not sub.is_totally_positive(beta_prime):
        raise ValueError("target must be totally positive in the subfield")
    target = tuple(p * Fraction(c) for c in beta_prime)
    t_abs = sub.trace(tuple(target))  # total trace of any fiber member
    if t_abs <= 0:
        return []
    d = F.degree
    ginv = _fraction_inverse([[Fraction(x) for x in row] for row in F.trace_form])
    bounds = []
    for j in range(d):
        dual = [ginv[j][k] for k in range(d)]
        encs = F.embedding_enclosures(dual, rounds=6)
        mag = max(max(abs(lo), abs(hi)) for lo, hi in encs)
        bounds.append(int(t_abs * mag) + 1)
    out = []
    for coords in product(*(range(-b, b + 1) for b in bounds)):
        if F.relative_trace(coords) != target:
            continue
        if lattice is not None and not _in_lattice(coords, lattice):
            continue
        if F.is_totally_positive(coords):
            out.append(tuple(coords))
    return sorted(out)


def _in_lattice(coords, lattice_rows) -> bool:
    """Whether the point is an integer combination of the lattice rows."""
    n = len(coords)
    rows = [list(map(Fraction, r)) for r in lattice_rows]
    rhs = list(map(Fraction, coords))
    # Solve y * rows = rhs by elimination on the transposed system.
    aug = [[rows[i][k] for i in range(len(rows))] + [rhs[k]] for k in range(n)]
    m = len(rows)
    rank_cols = []
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, n) if aug[i][c] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [v * inv for v in aug[r]]
        for i in range(n):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [v - f * w for v, w in zip(aug[i], aug[r])]
        rank_cols.append(c)
        r += 1
    for i in range(r, n):
        if aug[i][m] != 0:
            return False
    return all(aug[i][m].denominator == 1 for i in range(r))


def _fraction_inverse(M: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(M)
    aug = [row[:] + [Fraction(1 if j == i else 0) for j in range(n)]
           for i, row in enumerate(M)]
    for c in range(n):
        piv = next(i for i in range(c, n) if aug[i][c] != 0)
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [x * inv for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return [row[n:] for row in aug]


# ------------------------------------------------------------ q-expansions


@dataclass(frozen=True)
class QExpansion:
    """Formal expansion sum a_beta q^beta truncated by total trace.

    Coefficients are group-ring elements; support points are lattice
    coordinates on the field's integral basis, totally positive or zero.
    The truncation bound participates in equality.
    """

    field: TotallyRealFieldData
    coeffs: dict
    trace_bound: int
    lattice: tuple | None = None

    def __post_init__(self) -> None:
        pruned = {}
        for beta, a in self.coeffs.items():
            beta = tuple(beta)
            if a.is_zero():
                continue
            if any(beta) and not self.field.is_totally_positive(beta):
                raise ValueError(f"support point {beta} is not totally positive")
            if self.field.trace(beta) > self.trace_bound:
                raise ValueError(f"support point {beta} exceeds the trace bound")
            if self.lattice is not None and not _in_lattice(beta, self.lattice):
                raise ValueError(f"support point {beta} is outside the lattice")
            pruned[beta] = a
        object.__setattr__(self, "coeffs", pruned)

    def _require_compatible(self, other: "QExpansion") -> None:
        if (self.field is not other.field or self.trace_bound != other.trace_bound
                or self.lattice != other.lattice):
            raise ValueError("mismatched expansion carriers")

    def __add__(self, other: "QExpansion") -> "QExpansion":
        self._require_compatible(other)
        out = dict(self.coeffs)
        for b, a in other.coeffs.items():
            out[b] = out[b] + a if b in out else a
        return QExpansion(self.field, out, self.trace_bound, self.lattice)

    def __sub__(self, other: "QExpansion") -> "QExpansion":
        self._require_compatible(other)
        out = dict(self.coeffs)
        for b, a in other.coeffs.items():
            out[b] = out[b] - a if b in out else -a
        return QExpansion(self.field, out, self.trace_bound, self.lattice)

    def scale(self, factor) -> "QExpansion":
        """Multiply every coefficient by a group-ring element or scalar."""
        return QExpansion(self.field, {b: a * factor for b, a in self.coeffs.items()},
                          self.trace_bound, self.lattice)

    def coefficient(self, beta):
        return self.coeffs.get(tuple(beta))

    def constant_term(self):
        return self.coeffs.get(self.field.zero())


def diagonal_restrict(f: QExpansion) -> QExpansion:
    """Normalized diagonal restriction: the coefficient at beta' collects
    every a_beta with relative trace p * beta'.

    Support points whose relative trace is not p times a subfield lattice
    point index no output coefficient.  A constant term passes straight
    through; by positivity nothing else can land on beta' = 0, so inputs
    without constant term restrict to outputs without constant term.
    """
    F = f.field
    if F.subfield is None:
        raise ValueError("diagonal restriction needs tower data")
    sub = F.subfield
    p = F.rel_degree
    out: dict = {}

    def add(bp, a):
        out[bp] = out[bp] + a if bp in out else a

    for beta, a in f.coeffs.items():
        if not any(beta):
            add(sub.zero(), a)
            continue
        tr = F.relative_trace(beta)
        bp = [t / p for t in tr]
        if all(x.denominator == 1 for x in bp):
            add(tuple(int(x) for x in bp), a)
    result = QExpansion(sub, out, f.trace_bound // p)
    if f.constant_term() is None:
        assert result.constant_term() is None, "positivity should forbid new constant terms"
    return result
