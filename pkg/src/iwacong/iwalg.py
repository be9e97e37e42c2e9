"""Finite-level group-ring algebra: trace maps, trace ideals, transfer
and norm maps, character integration.

Elements of (Z/p^N)[A] and of R[A] for a cyclotomic residue ring R are
held in one type, GroupRingElt, whose coefficients are always CycloElt
values (conductor 1 recovers plain residues).  Coefficient conductors
never mix silently: binary operations demand equal rings, and
promote_coefficients is the explicit, logged widening step.

The trace ideal of an order-p action is stored as a precomputed Howell
basis of the full ideal generated by the trace image, so each membership
question is a single reduction.  Two sufficiency criteria for membership
are provided: one for decompositions of a measure over a finite G-set
(returning the explicit trace preimage), one for scalar families on
compatible group elements.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import permutations

from .abgroups import (
    CyclicAction,
    FiniteAbelianGroup,
    FiniteGSet,
    GroupHom,
    coset_representatives,
    orbit_decomposition,
)
from .exact.cyclotomic import CycloElt, CyclotomicInt, euler_phi
from .exact.linalg import HowellBasis

logger = logging.getLogger("iwacong.iwalg")


@dataclass(frozen=True)
class CoeffRing:
    """(Z/p^precision)[x]/Phi_conductor; conductor 1 is the plain residue ring."""

    prime: int
    precision: int
    conductor: int = 1

    @property
    def dim(self) -> int:
        return euler_phi(self.conductor)

    @property
    def modulus(self) -> int:
        return self.prime ** self.precision

    def zero(self) -> CycloElt:
        return CycloElt.zero(self.conductor, self.prime, self.precision)

    def one(self) -> CycloElt:
        return CycloElt.one(self.conductor, self.prime, self.precision)

    def coerce(self, x) -> CycloElt:
        if isinstance(x, CycloElt):
            if (x.prime, x.precision) != (self.prime, self.precision):
                raise ValueError("coefficient has wrong residue characteristic")
            if x.conductor == self.conductor:
                return x
            if self.conductor % x.conductor == 0:
                return x.promote(self.conductor)
            raise ValueError(f"cannot place conductor {x.conductor} into {self.conductor}")
        if isinstance(x, CyclotomicInt):
            if self.conductor % x.conductor != 0:
                raise ValueError(f"cannot place conductor {x.conductor} into {self.conductor}")
            return CycloElt.from_cyclotomic(x, self.prime, self.precision).promote(self.conductor)
        if isinstance(x, int):
            return CycloElt.from_int(x, self.conductor, self.prime, self.precision)
        raise TypeError(f"cannot coerce {type(x).__name__} into the coefficient ring")


_INDEX_CACHE: dict[FiniteAbelianGroup, dict[tuple[int, ...], int]] = {}


def _element_index(group: FiniteAbelianGroup) -> dict[tuple[int, ...], int]:
    if group not in _INDEX_CACHE:
        _INDEX_CACHE[group] = {g: i for i, g in enumerate(group.elements())}
    return _INDEX_CACHE[group]


@dataclass(frozen=True)
class GroupRingElt:
    """Element of ring[group]: finite support map from group elements to
    coefficients, zero coefficients pruned."""

    group: FiniteAbelianGroup
    ring: CoeffRing
    support: dict

    def __post_init__(self) -> None:
        pruned = {}
        for g, c in self.support.items():
            cc = self.ring.coerce(c)
            if not cc.is_zero():
                pruned[self.group.reduce(g)] = cc
        object.__setattr__(self, "support", pruned)

    # -------------------------------------------------- constructors

    @classmethod
    def zero(cls, group: FiniteAbelianGroup, ring: CoeffRing) -> "GroupRingElt":
        return cls(group, ring, {})

    @classmethod
    def one(cls, group: FiniteAbelianGroup, ring: CoeffRing) -> "GroupRingElt":
        return cls(group, ring, {group.zero(): ring.one()})

    @classmethod
    def delta(cls, group: FiniteAbelianGroup, ring: CoeffRing, element, coeff=1) -> "GroupRingElt":
        return cls(group, ring, {group.reduce(element): ring.coerce(coeff)})

    # -------------------------------------------------- ring structure

    def _require_same(self, other: "GroupRingElt") -> None:
        if self.group != other.group:
            raise ValueError("group mismatch")
        if self.ring != other.ring:
            raise ValueError("coefficient ring mismatch; promote explicitly first")

    def __add__(self, other: "GroupRingElt") -> "GroupRingElt":
        self._require_same(other)
        out = dict(self.support)
        for g, c in other.support.items():
            out[g] = out[g] + c if g in out else c
        return GroupRingElt(self.group, self.ring, out)

    def __sub__(self, other: "GroupRingElt") -> "GroupRingElt":
        self._require_same(other)
        out = dict(self.support)
        for g, c in other.support.items():
            out[g] = out[g] - c if g in out else -c
        return GroupRingElt(self.group, self.ring, out)

    def __neg__(self) -> "GroupRingElt":
        return GroupRingElt(self.group, self.ring, {g: -c for g, c in self.support.items()})

    def __mul__(self, other) -> "GroupRingElt":
        if isinstance(other, GroupRingElt):
            self._require_same(other)
            out: dict = {}
            for g, c in self.support.items():
                for h, d in other.support.items():
                    k = self.group.add(g, h)
                    cd = c * d
                    out[k] = out[k] + cd if k in out else cd
            return GroupRingElt(self.group, self.ring, out)
        coeff = self.ring.coerce(other)
        return GroupRingElt(self.group, self.ring,
                            {g: c * coeff for g, c in self.support.items()})

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "GroupRingElt":
        if n < 0:
            raise ValueError("no inversion here; use norm/solve machinery")
        out = GroupRingElt.one(self.group, self.ring)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def is_zero(self) -> bool:
        return not self.support

    def coefficient(self, g) -> CycloElt:
        return self.support.get(self.group.reduce(g), self.ring.zero())

    def augmentation(self) -> CycloElt:
        out = self.ring.zero()
        for c in self.support.values():
            out = out + c
        return out

    def is_unit(self) -> bool:
        """Unit test valid because the groups here are p-groups: an element
        is a unit iff its augmentation is invertible in the coefficient ring."""
        try:
            self.augmentation().inverse()
            return True
        except ValueError:
            return False

    def divisible_by_p(self) -> bool:
        return all(c.divisible_by_p() for c in self.support.values())

    def divide_by_p(self) -> "GroupRingElt":
        return GroupRingElt(self.group, self.ring,
                            {g: c.divide_by_p() for g, c in self.support.items()})

    def apply_action(self, act: "CyclicAction | GroupHom") -> "GroupRingElt":
        """Push support through an automorphism/endomorphism of the group."""
        sigma = act.sigma if isinstance(act, CyclicAction) else act
        out: dict = {}
        for g, c in self.support.items():
            k = sigma(g)
            out[k] = out[k] + c if k in out else c
        return GroupRingElt(self.group, self.ring, out)

    def promote_coefficients(self, conductor: int) -> "GroupRingElt":
        """Explicit coefficient-ring widening; the only sanctioned mixing path."""
        if conductor == self.ring.conductor:
            return self
        ring = CoeffRing(self.ring.prime, self.ring.precision, conductor)
        logger.info("promoting coefficients: conductor %d -> %d",
                    self.ring.conductor, conductor)
        return GroupRingElt(self.group, ring,
                            {g: c.promote(conductor) for g, c in self.support.items()})

    # -------------------------------------------------- vector form

    def to_vectors(self) -> list[tuple[int, ...]]:
        """One Z/p^N coordinate vector (indexed by group elements) per
        power-basis coordinate of the coefficient ring."""
        index = _element_index(self.group)
        n = self.group.size
        vecs = [[0] * n for _ in range(self.ring.dim)]
        for g, c in self.support.items():
            i = index[g]
            for k, x in enumerate(c.coeffs):
                vecs[k][i] = x
        return [tuple(v) for v in vecs]

    @classmethod
    def from_vectors(cls, group: FiniteAbelianGroup, ring: CoeffRing,
                     vecs: list[tuple[int, ...]]) -> "GroupRingElt":
        elems = group.elements()
        support = {}
        for i, g in enumerate(elems):
            coeffs = tuple(vecs[k][i] for k in range(ring.dim))
            support[g] = CycloElt(ring.conductor, ring.prime, ring.precision, coeffs)
        return cls(group, ring, support)

    def __repr__(self) -> str:
        if not self.support:
            return "0"
        bits = []
        for g in sorted(self.support):
            c = self.support[g]
            txt = str(c.coeffs[0]) if c.is_rational() else f"({c.coeffs})"
            bits.append(f"{txt}*d{g}")
        return " + ".join(bits)


# ------------------------------------------------------------ trace machinery


def trace_map(lam: GroupRingElt, act: CyclicAction) -> GroupRingElt:
    """Sum of the p translates of lam under the action."""
    if act.group != lam.group:
        raise ValueError("action is not on this group")
    out = lam
    cur = lam
    for _ in range(act.order - 1):
        cur = cur.apply_action(act)
        out = out + cur
    return out


class TraceIdealBasis:
    """Howell basis of the ideal generated by the trace image in (Z/p^N)[A].

    Membership of elements with cyclotomic-residue coefficients is
    coordinatewise: the generators have integer coefficients, so an
    R-combination exists iff each power-basis slice lies in the plain
    Z/p^N ideal.
    """

    def __init__(self, act: CyclicAction, prime: int, precision: int,
                 check_closure: bool = True) -> None:
        self.group = act.group
        self.action = act
        self.prime = prime
        self.precision = precision
        index = _element_index(self.group)
        n = self.group.size
        m = prime ** precision
        fixed, free = orbit_decomposition(act.as_gset())
        gen_rows: set[tuple[int, ...]] = set()
        base_vectors: list[list[int]] = []
        for g in fixed:
            vec = [0] * n
            vec[index[g]] = prime % m
            base_vectors.append(vec)
        for orbit in free:
            vec = [0] * n
            for g in orbit:
                vec[index[g]] = 1
            base_vectors.append(vec)
        elems = self.group.elements()
        for vec in base_vectors:
            for h in elems:
                shifted = [0] * n
                for i, g in enumerate(elems):
                    if vec[i]:
                        shifted[index[self.group.add(g, h)]] = vec[i]
                gen_rows.add(tuple(shifted))
        self.basis = HowellBasis(sorted(gen_rows), n, prime, precision)
        if check_closure:
            self._check_ideal_closure()

    def _check_ideal_closure(self) -> None:
        index = _element_index(self.group)
        elems = self.group.elements()
        gens = [self.group.generator(i) for i in range(self.group.rank)]
        for row in self.basis.rows:
            for h in gens:
                shifted = [0] * len(row)
                for i, g in enumerate(elems):
                    if row[i]:
                        shifted[index[self.group.add(g, h)]] = row[i]
                assert self.basis.contains(tuple(shifted)), \
                    "trace ideal basis not closed under group translation"

    def contains(self, lam: GroupRingElt) -> bool:
        if lam.group != self.group:
            raise ValueError("group mismatch")
        if (lam.ring.prime, lam.ring.precision) != (self.prime, self.precision):
            raise ValueError("modulus mismatch")
        return all(self.basis.contains(v) for v in lam.to_vectors())

    def reduce(self, lam: GroupRingElt) -> GroupRingElt:
        """Remainder of lam against the basis, as a group-ring element."""
        if lam.group != self.group:
            raise ValueError("group mismatch")
        vecs = [self.basis.reduce(v) for v in lam.to_vectors()]
        return GroupRingElt.from_vectors(self.group, lam.ring, vecs)

    def __repr__(self) -> str:
        return (f"TraceIdealBasis(|A|={self.group.size}, p={self.prime}, "
                f"N={self.precision}, rank={len(self.basis.rows)})")


def trace_ideal(act: CyclicAction, prime: int, precision: int,
                check_closure: bool = True) -> TraceIdealBasis:
    return TraceIdealBasis(act, prime, precision, check_closure)


def trace_ideal_contains(lam: GroupRingElt, T: TraceIdealBasis) -> bool:
    return T.contains(lam)


def criterion_4418(components: dict, W: FiniteGSet, act: CyclicAction,
                   ring: CoeffRing) -> tuple[bool, GroupRingElt | None]:
    """Sufficiency test for sum(components) lying in the trace ideal.

    components maps each label of W to a GroupRingElt.  Checks that the
    family is equivariant (acting on a component gives the component at
    the moved label) and that components at fixed labels are divisible
    by p.  On success returns the explicit trace preimage: one component
    per free orbit plus 1/p of each fixed component; trace of the
    preimage is asserted to reproduce the total exactly.
    """
    if set(components) != set(W.elements):
        raise ValueError("need one component per index element")
    if W.order != act.order:
        raise ValueError("index set and action have different orders")
    group = act.group
    for gamma in W.elements:
        lam = components[gamma]
        if lam.group != group or lam.ring != ring:
            raise ValueError("components must share one group ring")
        moved = components[W.action[gamma]]
        if lam.apply_action(act) != moved:
            return False, None
    fixed, free = orbit_decomposition(W)
    for gamma in fixed:
        if not components[gamma].divisible_by_p():
            return False, None
    preimage = GroupRingElt.zero(group, ring)
    for orbit in free:
        preimage = preimage + components[orbit[0]]
    for gamma in fixed:
        preimage = preimage + components[gamma].divide_by_p()
    total = GroupRingElt.zero(group, ring)
    for gamma in W.elements:
        total = total + components[gamma]
    assert trace_map(preimage, act) == total, "preimage does not trace to the sum"
    return True, preimage


def criterion_4424(terms: dict, W: FiniteGSet, act: CyclicAction,
                   ring: CoeffRing, T: TraceIdealBasis | None = None) -> bool:
    """Scalar-family variant: terms maps labels to (a, z) with a a
    coefficient and z a group element.  True when z is equivariant, a is
    orbit-constant off fixed points, and a is p-divisible at fixed
    points; a true verdict is asserted against direct ideal membership.
    """
    if set(terms) != set(W.elements):
        raise ValueError("need one term per index element")
    group = act.group
    for gamma in W.elements:
        a, z = terms[gamma]
        a2, z2 = terms[W.action[gamma]]
        if act.sigma(group.reduce(z)) != group.reduce(z2):
            return False
        if W.action[gamma] != gamma and ring.coerce(a) != ring.coerce(a2):
            return False
        if W.action[gamma] == gamma and not ring.coerce(a).divisible_by_p():
            return False
    if T is None:
        T = trace_ideal(act, ring.prime, ring.precision, check_closure=False)
    total = GroupRingElt.zero(group, ring)
    for a, z in terms.values():
        total = total + GroupRingElt.delta(group, ring, z, a)
    assert T.contains(total), "criterion accepted a sum outside the ideal"
    return True


# ------------------------------------------------------------ transfer / norm


def ver_pushforward(lam: GroupRingElt, v: GroupHom, coeff_twist=None) -> GroupRingElt:
    """Push a measure through a group homomorphism, optionally twisting
    each coefficient (e.g. by Frobenius on an unramified coefficient
    extension; default identity)."""
    if v.source != lam.group:
        raise ValueError("hom source must be the measure's group")
    out: dict = {}
    for g, c in lam.support.items():
        if coeff_twist is not None:
            c = lam.ring.coerce(coeff_twist(c))
        k = v(g)
        out[k] = out[k] + c if k in out else c
    return GroupRingElt(v.target, lam.ring, out)


def norm_map(u: GroupRingElt, subgroup: tuple[FiniteAbelianGroup, GroupHom],
             coset_reps: list | None = None) -> GroupRingElt:
    """Norm of a unit u down to an index-d subgroup: the determinant of
    multiplication by u on the free rank-d module over the subring.

    subgroup is (H, inclusion) as produced by the abgroups machinery.
    Raises ValueError when u is not a unit.
    """
    H, incl = subgroup
    G = u.group
    if incl.target != G:
        raise ValueError("subgroup inclusion must land in the element's group")
    if not u.is_unit():
        raise ValueError("norm is only taken of units")
    sub_elems = incl.image_elements()
    if len(sub_elems) != H.size:
        raise ValueError("inclusion is not injective")
    d = G.size // H.size
    if d > 7:
        raise ValueError("index too large for the permanent-style determinant")
    reps = coset_reps if coset_reps is not None else coset_representatives(G, sub_elems)
    if len(reps) != d:
        raise ValueError(f"need {d} coset representatives")
    pull = {incl(x): x for x in H.elements()}
    rows: list[list[GroupRingElt]] = [[GroupRingElt.zero(H, u.ring) for _ in range(d)]
                                      for _ in range(d)]
    for j, t in enumerate(reps):
        prod = u * GroupRingElt.delta(G, u.ring, t)
        for g, c in prod.support.items():
            hit = None
            for i, s in enumerate(reps):
                h = G.sub(g, s)
                if h in pull:
                    hit = (i, pull[h])
                    break
            assert hit is not None, "coset representatives do not cover the group"
            i, h_elt = hit
            rows[i][j] = rows[i][j] + GroupRingElt.delta(H, u.ring, h_elt, c)
    det = GroupRingElt.zero(H, u.ring)
    for perm in permutations(range(d)):
        sign = _perm_sign(perm)
        term = GroupRingElt.one(H, u.ring)
        for i in range(d):
            term = term * rows[i][perm[i]]
        det = det + term if sign == 1 else det - term
    return det


def _perm_sign(perm: tuple[int, ...]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


# ------------------------------------------------------------ characters


class CharacterData:
    """Character of a finite abelian group with root-of-unity values on
    generators, plus an optional weight twist by a designated unit-valued
    map (the finite-level shadow of a cyclotomic character power)."""

    def __init__(self, group: FiniteAbelianGroup,
                 gen_values: tuple[CyclotomicInt, ...],
                 weight: int = 0, kappa=None) -> None:
        if len(gen_values) != group.rank:
            raise ValueError("one value per generator")
        normalized = []
        for d, val in zip(group.invariant_factors, gen_values):
            k = val.multiplicative_order()
            if k is None:
                raise ValueError("character values must be roots of unity")
            if d % k != 0:
                raise ValueError("character value order must divide the generator order")
            # Minimal cyclotomic home of an order-k root: conductor k,
            # except k = 2 mod 4 where the half conductor already holds it.
            minimal = k // 2 if k % 4 == 2 else k
            normalized.append(val.descend(minimal))
        if weight and kappa is None:
            raise ValueError("weight twist needs its character map")
        self.group = group
        self.gen_values = tuple(normalized)
        self.weight = weight
        self.kappa = kappa

    @property
    def conductor(self) -> int:
        from math import lcm

        out = 1
        for v in self.gen_values:
            out = lcm(out, v.conductor)
        return out

    def root_value(self, x) -> CyclotomicInt:
        """The root-of-unity part of the character at x (no twist)."""
        n = self.conductor
        out = CyclotomicInt.one(n)
        for a, val in zip(self.group.reduce(x), self.gen_values):
            out = out * (val.embed(n) ** a)
        return out

    def value(self, x, ring: CoeffRing) -> CycloElt:
        """Full value at x inside the given coefficient ring, twist included."""
        out = ring.coerce(self.root_value(x))
        if self.weight:
            kap = ring.coerce(self.kappa(x))
            out = out * (kap ** self.weight)
        return out


def integrate_character(lam: GroupRingElt, chi: CharacterData) -> CycloElt:
    """Integral of the character against the measure: sum of coefficient
    times character value, inside the smallest common coefficient ring."""
    if chi.group != lam.group:
        raise ValueError("character is not on the measure's group")
    from math import lcm

    target = CoeffRing(lam.ring.prime, lam.ring.precision,
                       lcm(lam.ring.conductor, chi.conductor))
    out = target.zero()
    for g, c in lam.support.items():
        out = out + target.coerce(c) * chi.value(g, target)
    return out


def pushforward_measure(lam: GroupRingElt, proj: GroupHom,
                        branch: CharacterData) -> GroupRingElt:
    """Branch of a measure along a character: twist coefficients by the
    character, then push the support through the projection.  Satisfies
    integrate(phi, result) = integrate((phi o proj) * branch, lam)."""
    if proj.source != lam.group:
        raise ValueError("projection source must be the measure's group")
    if branch.group != lam.group:
        raise ValueError("branch character is not on the measure's group")
    from math import lcm

    ring = CoeffRing(lam.ring.prime, lam.ring.precision,
                     lcm(lam.ring.conductor, branch.conductor))
    out: dict = {}
    for g, c in lam.support.items():
        k = proj(g)
        val = ring.coerce(c) * branch.value(g, ring)
        out[k] = out[k] + val if k in out else val
    return GroupRingElt(proj.target, ring, out)
