"""Local Fourier coefficients of finite-level Eisenstein measures, their
assembly into measure coefficients, and the coefficient-wise transfer
congruence engine.

Reciprocity values and additive-character values are ingested tables
keyed by labels; nothing in this module computes class field theory.
Ingestion validates the algebraic relations the run will exercise
(multiplicativity of rec on supplied products, additivity of psi on
supplied sums) and computation fails fast on any missing entry.

Key conventions shared with the ingestion format:
  - generic places: rec table keys ("pi_c", j) stand for the j-th
    uniformizer power times the idele component at the place;
  - places dividing the ramified part: rec table keys are the
    representative labels themselves, read as the value at the
    representative shifted by half the theta descriptor; psi table keys
    ("beta_x", beta_label, x_label) give the character value at the
    scaled product, and the key "t_over_2d" gives the constant
    prefactor;
  - psi table values are (conductor, numerator) pairs naming exact
    roots of unity.

Coefficient computations for distinct (beta, a, u) triples are
independent of each other and share only read-only tables and the trace
ideal basis, so they could run concurrently; this implementation runs
them serially.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import gcd, lcm

from .abgroups import (
    CyclicAction,
    FiniteAbelianGroup,
    FiniteGSet,
    GroupHom,
    fixed_subgroup,
    orbit_decomposition,
)
from .exact.cyclotomic import CyclotomicInt
from .iwalg import (
    CoeffRing,
    GroupRingElt,
    TraceIdealBasis,
    criterion_4418,
    ver_pushforward,
)

logger = logging.getLogger("iwacong.eiscoeff")

SPLIT_W = "split-w"
SPLIT_GENERIC = "split-generic"
INERT = "inert"
RAMIFIED = "ramified"
_SPLITTINGS = (SPLIT_W, SPLIT_GENERIC, INERT, RAMIFIED)

PSI_PREFACTOR_KEY = "t_over_2d"


class TableGapError(KeyError):
    """A rec or psi table entry needed by the run is missing."""

    def __init__(self, place: str, table: str, key) -> None:
        super().__init__(key)
        self.place = place
        self.table = table
        self.key = key

    def __str__(self) -> str:
        return f"place {self.place}: {self.table} table has no entry for {self.key!r}"


class StabilityError(RuntimeError):
    """The character sum kept changing up to the largest ingested level."""

    def __init__(self, place: str, levels: list[tuple[int, int]]) -> None:
        super().__init__(
            f"place {place}: coefficient not stable at ingested levels {levels}")
        self.place = place
        self.levels = levels


def _psi_root(pair) -> CyclotomicInt:
    n, k = pair
    return CyclotomicInt.root_power(n, k)


def _root_mul(a: CyclotomicInt, b: CyclotomicInt) -> CyclotomicInt:
    m = lcm(a.conductor, b.conductor)
    return a.embed(m) * b.embed(m)


@dataclass(frozen=True)
class LocalPlaceSpec:
    """One finite place of the base totally real field with every table
    the coefficient formulas consult.

    divides flags: "p" marks places above p (excluded from the away-
    from-p product), "FFc" marks divisors of the split part of the
    conductor, "T" marks divisors of the ramified part (theta ideal
    times relative discriminant).  q is the residue cardinality.  val
    maps beta labels to the valuation of beta times the idele component.
    levels maps a (j0, j1) pair to the tuple of representative labels of
    the corresponding finite quotient; its size must be q**(j0+j1).
    """

    label: str
    splitting: str
    q: int
    divides: frozenset = frozenset()
    over: str | None = None
    val: dict = field(default_factory=dict)
    rec_table: dict = field(default_factory=dict)
    rec_products: tuple = ()
    psi_table: dict = field(default_factory=dict)
    psi_sums: tuple = ()
    levels: dict = field(default_factory=dict)
    default_level: tuple[int, int] = (0, 0)
    swapped_rec_table: dict | None = None

    def __post_init__(self) -> None:
        if self.splitting not in _SPLITTINGS:
            raise ValueError(f"unknown splitting type {self.splitting!r}")
        if self.q < 2:
            raise ValueError("residue cardinality must be at least 2")
        bad = set(self.divides) - {"p", "FFc", "T"}
        if bad:
            raise ValueError(f"unknown divides flags {sorted(bad)}")
        for (j0, j1), reps in self.levels.items():
            if j0 < 0 or j1 < 0:
                raise ValueError("levels must be non-negative")
            if len(set(reps)) != len(reps):
                raise ValueError(f"duplicate representatives at level {(j0, j1)}")
            if len(reps) != self.q ** (j0 + j1):
                raise ValueError(
                    f"level {(j0, j1)} lists {len(reps)} representatives, "
                    f"quotient has {self.q ** (j0 + j1)}")
        for k1, k2, k12 in self.psi_sums:
            for k in (k1, k2, k12):
                if k not in self.psi_table:
                    raise ValueError(f"psi sum relation mentions untabled key {k!r}")
            lhs = _root_mul(_psi_root(self.psi_table[k1]), _psi_root(self.psi_table[k2]))
            rhs = _psi_root(self.psi_table[k12])
            m = lcm(lhs.conductor, rhs.conductor)
            if lhs.embed(m) != rhs.embed(m):
                raise ValueError(
                    f"psi table is not additive on supplied sum {(k1, k2, k12)}")

    def max_level(self) -> tuple[int, int]:
        if not self.levels:
            raise ValueError(f"place {self.label} has no ingested levels")
        return max(self.levels)


def validate_place_spec(spec: LocalPlaceSpec, group: FiniteAbelianGroup,
                        p: int) -> None:
    """Relations the coefficient formulas rely on: every rec value is a
    well-formed element of the target group, rec is multiplicative on
    the supplied products, and away-from-p places have residue
    cardinality prime to p."""
    if "p" not in spec.divides and spec.q % p == 0:
        raise ValueError(
            f"place {spec.label}: residue cardinality {spec.q} is not prime to {p}")
    tables = [("rec", spec.rec_table)]
    if spec.swapped_rec_table is not None:
        tables.append(("swapped rec", spec.swapped_rec_table))
    for name, table in tables:
        for key, value in table.items():
            if len(value) != group.rank:
                raise ValueError(
                    f"place {spec.label}: {name} value at {key!r} has rank "
                    f"{len(value)}, group has rank {group.rank}")
        for k1, k2, k12 in spec.rec_products:
            for k in (k1, k2, k12):
                if k not in table:
                    raise ValueError(
                        f"place {spec.label}: product relation mentions "
                        f"untabled key {k!r}")
            if group.reduce(table[k12]) != group.add(table[k1], table[k2]):
                raise ValueError(
                    f"place {spec.label}: {name} table is not multiplicative "
                    f"on supplied product {(k1, k2, k12)}")


def _rec(spec: LocalPlaceSpec, key, swapped: bool):
    table = spec.rec_table
    name = "rec"
    if swapped:
        if spec.swapped_rec_table is None:
            raise TableGapError(spec.label, "swapped rec", key)
        table = spec.swapped_rec_table
        name = "swapped rec"
    if key not in table:
        raise TableGapError(spec.label, name, key)
    return table[key]


def _psi(spec: LocalPlaceSpec, key) -> CyclotomicInt:
    if key not in spec.psi_table:
        raise TableGapError(spec.label, "psi", key)
    return _psi_root(spec.psi_table[key])


def _val(spec: LocalPlaceSpec, beta_label) -> int:
    if beta_label not in spec.val:
        raise TableGapError(spec.label, "valuation", beta_label)
    return spec.val[beta_label]


# ----------------------------------------------------------- local factors


@dataclass(frozen=True)
class GroupTargetData:
    """Coefficient-group side of a congruence run: the finite quotient
    the reciprocity tables land in, the Galois action on it, the
    transfer map from the subfield-level quotient, and the residue ring
    the scalar factors live in."""

    group: FiniteAbelianGroup
    action: CyclicAction
    ver: GroupHom
    ring: CoeffRing

    def __post_init__(self) -> None:
        if self.action.group != self.group:
            raise ValueError("action must act on the coefficient group")
        if self.ver.target != self.group:
            raise ValueError("ver must land in the coefficient group")
        fixed_incl = fixed_subgroup(self.action)[1]
        fixed_elems = fixed_incl.image_elements()
        for x in self.ver.image_elements():
            if x not in fixed_elems:
                raise ValueError("ver image is not fixed by the action")


def coeff_split_F(beta_label, spec: LocalPlaceSpec,
                  target: GroupTargetData, *, swapped: bool = False) -> GroupRingElt:
    """Coefficient at a place split in the CM field with the
    distinguished factor dividing the conductor: the reciprocity value
    of beta when beta is a local unit, zero otherwise."""
    if spec.splitting != SPLIT_W:
        raise ValueError(f"place {spec.label} is not split with a distinguished factor")
    if "FFc" not in spec.divides:
        raise ValueError(f"place {spec.label} does not divide the split conductor part")
    if _val(spec, beta_label) != 0:
        return GroupRingElt.zero(target.group, target.ring)
    return GroupRingElt.delta(target.group, target.ring,
                              _rec(spec, beta_label, swapped))


def coeff_generic(beta_label, spec: LocalPlaceSpec,
                  target: GroupTargetData) -> GroupRingElt:
    """Coefficient at a finite place away from p, the conductor, and the
    relative discriminant: the valuation-length geometric sum of
    reciprocity values of uniformizer powers weighted by residue
    cardinality powers."""
    if "p" in spec.divides or "T" in spec.divides:
        raise ValueError(f"place {spec.label} is not in the generic case")
    if spec.q % target.ring.prime == 0:
        raise ValueError(f"place {spec.label}: residue cardinality not prime to p")
    n = _val(spec, beta_label)
    if n < 0:
        return GroupRingElt.zero(target.group, target.ring)
    out = GroupRingElt.zero(target.group, target.ring)
    qpow = 1
    for j in range(n + 1):
        # running sum realizes the recurrence A_n = A_{n-1} + q^n rec(pi^n c)
        out = out + GroupRingElt.delta(target.group, target.ring,
                                       _rec(spec, ("pi_c", j), False), qpow)
        qpow = qpow * spec.q % target.ring.modulus
    return out


def character_sum_at_level(beta_label, spec: LocalPlaceSpec,
                           target: GroupTargetData,
                           j0: int, j1: int) -> GroupRingElt:
    """One-level evaluation of the twisted character sum: the psi
    prefactor times the inverted-volume-weighted sum of inverse
    reciprocity values against the additive character, over the
    ingested representatives of the (j0, j1) quotient."""
    if (j0, j1) not in spec.levels:
        raise TableGapError(spec.label, "levels", (j0, j1))
    ring = target.ring
    if spec.q % ring.prime == 0:
        raise ValueError(f"place {spec.label}: residue cardinality not prime to p")
    vol = ring.coerce(spec.q).inverse() ** j1
    prefactor = _psi(spec, PSI_PREFACTOR_KEY)
    out = GroupRingElt.zero(target.group, ring)
    for x in spec.levels[(j0, j1)]:
        rec = _rec(spec, x, False)
        root = _root_mul(prefactor, _psi(spec, ("beta_x", beta_label, x)))
        out = out + GroupRingElt.delta(target.group, ring,
                                       target.group.neg(rec),
                                       ring.coerce(root) * vol)
    return out


def coeff_inert_ramified(beta_label, spec: LocalPlaceSpec,
                         target: GroupTargetData,
                         j0: int | None = None,
                         j1: int | None = None) -> GroupRingElt:
    """Coefficient at a place dividing the ramified part: the stabilized
    character sum.  Starting from the requested (or default) level, the
    sum is recomputed one level up and must agree; on disagreement the
    level is advanced until the ingested tables run out, which raises
    StabilityError rather than accepting an unstable value."""
    if "T" not in spec.divides:
        raise ValueError(f"place {spec.label} does not divide the ramified part")
    if (j0 is None) != (j1 is None):
        raise ValueError("pass both level indices or neither")
    if j0 is None:
        j0, j1 = spec.default_level
    value = character_sum_at_level(beta_label, spec, target, j0, j1)
    tried = [(j0, j1)]
    ever_unstable = False
    while True:
        up = (j0 + 1, j1 + 1)
        if up not in spec.levels:
            if ever_unstable:
                raise StabilityError(spec.label, tried)
            raise TableGapError(spec.label, "levels", up)
        nxt = character_sum_at_level(beta_label, spec, target, *up)
        if nxt == value:
            return value
        ever_unstable = True
        j0, j1 = up
        tried.append(up)
        value = nxt


def local_coefficient(beta_label, spec: LocalPlaceSpec,
                      target: GroupTargetData, *,
                      swapped: bool = False) -> GroupRingElt:
    """Case dispatch for one away-from-p place."""
    if "p" in spec.divides:
        raise ValueError(f"place {spec.label} lies above p")
    if "T" in spec.divides:
        return coeff_inert_ramified(beta_label, spec, target)
    if spec.splitting == SPLIT_W:
        return coeff_split_F(beta_label, spec, target, swapped=swapped)
    return coeff_generic(beta_label, spec, target)


# -------------------------------------------------------------- assembly


@dataclass(frozen=True)
class BetaData:
    """Ingested global data for one totally positive coefficient index:
    the archimedean-part reciprocity value, the reciprocity value at the
    CM-type p-adic places, the inverted norm residue, and the residue
    class of the p-component used by the torsion-unit indicator."""

    label: object
    rec_inf: tuple
    rec_sigma_p: tuple
    norm_inverse: int
    p_unit_class: object


@dataclass(frozen=True)
class TorsionUnitIndex:
    """One torsion-unit coset with the residue class its indicator selects."""

    label: object
    p_unit_class: object


@dataclass(frozen=True)
class ClassRep:
    """One class-group representative: its reciprocity value and the
    local place tables its idele components induce."""

    label: object
    rec: tuple
    specs: tuple[LocalPlaceSpec, ...]

    def __post_init__(self) -> None:
        labels = [s.label for s in self.specs]
        if len(set(labels)) != len(labels):
            raise ValueError(f"rep {self.label}: duplicate place labels")

    def spec(self, place_label: str) -> LocalPlaceSpec:
        for s in self.specs:
            if s.label == place_label:
                return s
        raise KeyError(place_label)


@dataclass(frozen=True)
class ClassRepData:
    """The full representative family with its Galois permutation."""

    reps: tuple[ClassRep, ...]
    action: dict
    order: int

    def __post_init__(self) -> None:
        labels = [r.label for r in self.reps]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate representative labels")
        # permutation check happens via the G-set constructor
        FiniteGSet(tuple(labels), dict(self.action), self.order)

    def as_gset(self) -> FiniteGSet:
        return FiniteGSet(tuple(r.label for r in self.reps),
                          dict(self.action), self.order)

    def rep(self, label) -> ClassRep:
        for r in self.reps:
            if r.label == label:
                return r
        raise KeyError(label)

    def fixed_labels(self) -> list:
        fixed, _ = orbit_decomposition(self.as_gset())
        return fixed


def assemble_A(beta: BetaData, rep: ClassRep, u: TorsionUnitIndex,
               target: GroupTargetData, *, swapped: bool = False) -> GroupRingElt:
    """Full coefficient for one (beta, class rep, torsion unit) triple:
    the torsion-unit indicator, the reciprocity prefactors, the inverted
    norm, and the product of the away-from-p local factors."""
    ring = target.ring
    if beta.norm_inverse % ring.prime == 0:
        raise ValueError(f"beta {beta.label}: norm inverse is not a unit")
    if beta.p_unit_class != u.p_unit_class:
        return GroupRingElt.zero(target.group, ring)
    head = target.group.add(target.group.reduce(beta.rec_inf),
                            target.group.reduce(beta.rec_sigma_p))
    out = GroupRingElt.delta(target.group, ring, head, beta.norm_inverse)
    for spec in sorted(rep.specs, key=lambda s: s.label):
        if "p" in spec.divides:
            continue
        out = out * local_coefficient(beta.label, spec, target, swapped=swapped)
    return out


def modification_factor(target: GroupTargetData,
                        uniformizer_recs) -> GroupRingElt:
    """Product over the p-adic CM-type places of one minus the ratio of
    the reciprocity values of the chosen uniformizer and its conjugate."""
    group, ring = target.group, target.ring
    out = GroupRingElt.one(group, ring)
    one = GroupRingElt.one(group, ring)
    for rw, rwbar in uniformizer_recs:
        if len(rw) != group.rank or len(rwbar) != group.rank:
            raise ValueError("uniformizer rec image has wrong rank")
        ratio = group.sub(group.reduce(rw), group.reduce(rwbar))
        out = out * (one - GroupRingElt.delta(group, ring, ratio))
    return out


def assemble_B(beta: BetaData, reps: ClassRepData,
               units: tuple[TorsionUnitIndex, ...],
               modification: GroupRingElt,
               target: GroupTargetData, *, swapped: bool = False) -> GroupRingElt:
    """Measure-level coefficient: the modification factor times the
    class-representative sum of reciprocity deltas times torsion-unit
    sums of assembled coefficients."""
    acc = GroupRingElt.zero(target.group, target.ring)
    for rep in reps.reps:
        inner = GroupRingElt.zero(target.group, target.ring)
        for u in units:
            inner = inner + assemble_A(beta, rep, u, target, swapped=swapped)
        acc = acc + GroupRingElt.delta(target.group, target.ring, rep.rec) * inner
    return modification * acc


# ------------------------------------------------------ congruence engine


@dataclass(frozen=True)
class CongruenceSide:
    """Everything one side of the transfer congruence needs: the target
    data, the coefficient indices with their Galois permutation, the
    representative family, the torsion units with their permutation, and
    the modification factor."""

    target: GroupTargetData
    betas: tuple[BetaData, ...]
    beta_action: dict
    reps: ClassRepData
    units: tuple[TorsionUnitIndex, ...]
    unit_action: dict
    modification: GroupRingElt

    def __post_init__(self) -> None:
        blabels = [b.label for b in self.betas]
        if len(set(blabels)) != len(blabels):
            raise ValueError("duplicate beta labels")
        ulabels = [u.label for u in self.units]
        if len(set(ulabels)) != len(ulabels):
            raise ValueError("duplicate torsion unit labels")
        order = self.reps.order
        FiniteGSet(tuple(blabels), dict(self.beta_action), order)
        FiniteGSet(tuple(ulabels), dict(self.unit_action), order)
        if self.modification.group != self.target.group:
            raise ValueError("modification factor lives on the wrong group")
        if self.modification.ring != self.target.ring:
            raise ValueError("modification factor has the wrong coefficient ring")

    def beta(self, label) -> BetaData:
        for b in self.betas:
            if b.label == label:
                return b
        raise KeyError(label)

    def fixed_unit_labels(self) -> list:
        gset = FiniteGSet(tuple(u.label for u in self.units),
                          dict(self.unit_action), self.reps.order)
        return orbit_decomposition(gset)[0]

    def unit(self, label) -> TorsionUnitIndex:
        for u in self.units:
            if u.label == label:
                return u
        raise KeyError(label)


@dataclass(frozen=True)
class CongruenceReport:
    verdict: bool
    diagnostics: tuple[str, ...]
    residual: GroupRingElt
    free_witness: GroupRingElt | None
    swapped_verdict: bool | None = None

    @property
    def swap_changed(self) -> bool | None:
        if self.swapped_verdict is None:
            return None
        return self.swapped_verdict != self.verdict


def _validate_sides(side: CongruenceSide, prime_side: CongruenceSide,
                    beta_prime_label, T: TraceIdealBasis) -> None:
    target = side.target
    if target.action.order != target.ring.prime:
        raise ValueError("Galois action order must equal the residue characteristic")
    if T.group != target.group:
        raise ValueError("trace ideal basis is over the wrong group")
    if (T.prime, T.precision) != (target.ring.prime, target.ring.precision):
        raise ValueError("trace ideal basis has the wrong modulus")
    if target.ver.source != prime_side.target.group:
        raise ValueError("ver source must be the subfield coefficient group")
    if (prime_side.target.ring.prime, prime_side.target.ring.precision) != \
            (target.ring.prime, target.ring.precision):
        raise ValueError("the two sides use different residue moduli")
    if [b.label for b in prime_side.betas] != [beta_prime_label]:
        raise ValueError("subfield side must carry exactly the base coefficient index")
    fixed_reps = set(side.reps.fixed_labels())
    prime_reps = {r.label for r in prime_side.reps.reps}
    if fixed_reps != prime_reps:
        raise ValueError(
            "fixed representatives and subfield representatives must coincide: "
            f"{sorted(map(str, fixed_reps))} vs {sorted(map(str, prime_reps))}")
    gset = FiniteGSet(tuple(b.label for b in side.betas),
                      dict(side.beta_action), side.reps.order)
    for label in orbit_decomposition(gset)[0]:
        if label != beta_prime_label:
            raise ValueError(
                f"fixed fiber member {label!r} is not the base coefficient index")
    fixed_units = set(side.fixed_unit_labels())
    prime_units = {u.label for u in prime_side.units}
    if not prime_units <= fixed_units:
        raise ValueError("subfield torsion units must be fixed torsion units")
    for spec in (s for r in prime_side.reps.reps for s in r.specs):
        validate_place_spec(spec, prime_side.target.group, target.ring.prime)
    for spec in (s for r in side.reps.reps for s in r.specs):
        validate_place_spec(spec, target.group, target.ring.prime)


def _relative_place_anchor(side: CongruenceSide, prime_side: CongruenceSide) -> None:
    """For every fixed representative, pair each subfield place with the
    places lying over it and pin the residue cardinalities: one place
    above means inert (q = q'^p, with the Fermat congruence q'^{pj} =
    q'^j mod p asserted for small j), p places above mean split with
    equal residue cardinalities."""
    p = side.target.ring.prime
    for label in side.reps.fixed_labels():
        rep = side.reps.rep(label)
        prime_rep = prime_side.reps.rep(label)
        for pspec in prime_rep.specs:
            above = [s for s in rep.specs if s.over == pspec.label]
            if not above:
                raise ValueError(
                    f"rep {label}: no places lie over subfield place {pspec.label}")
            if "p" in pspec.divides:
                continue
            if len(above) == 1:
                if above[0].q != pspec.q ** p:
                    raise ValueError(
                        f"rep {label}: inert place {above[0].label} has residue "
                        f"cardinality {above[0].q}, expected {pspec.q ** p}")
                for j in range(11):
                    assert pow(pspec.q, p * j, p) == pow(pspec.q, j, p), \
                        "residue cardinality congruence fails"
            elif len(above) == p:
                for s in above:
                    if s.q != pspec.q:
                        raise ValueError(
                            f"rep {label}: split place {s.label} has residue "
                            f"cardinality {s.q}, expected {pspec.q}")
            else:
                raise ValueError(
                    f"rep {label}: {len(above)} places over {pspec.label}, "
                    f"expected 1 or {p}")


def _triple_terms(side: CongruenceSide, *, swapped: bool) -> dict:
    """The reciprocity-weighted assembled coefficient for every
    (beta, rep, unit) triple."""
    target = side.target
    terms = {}
    for b in side.betas:
        for rep in side.reps.reps:
            head = GroupRingElt.delta(target.group, target.ring, rep.rec)
            for u in side.units:
                terms[(b.label, rep.label, u.label)] = \
                    head * assemble_A(b, rep, u, target, swapped=swapped)
    return terms


def _split_place_comparisons(side: CongruenceSide, prime_side: CongruenceSide,
                             beta_prime_label, swapped: bool) -> list[str]:
    """At fixed representatives, the product of split-conductor factors
    over a subfield place must equal the transfer image of the subfield
    factor exactly, not merely modulo the trace ideal."""
    out: list[str] = []
    target = side.target
    for label in side.reps.fixed_labels():
        rep = side.reps.rep(label)
        prime_rep = prime_side.reps.rep(label)
        for pspec in prime_rep.specs:
            if pspec.splitting != SPLIT_W or "p" in pspec.divides:
                continue
            above = [s for s in rep.specs if s.over == pspec.label]
            if len(above) != side.reps.order or \
                    any(s.splitting != SPLIT_W for s in above):
                continue
            product = GroupRingElt.one(target.group, target.ring)
            for s in sorted(above, key=lambda s: s.label):
                product = product * coeff_split_F(
                    beta_prime_label, s, target, swapped=swapped)
            down = coeff_split_F(beta_prime_label, pspec, prime_side.target,
                                 swapped=swapped)
            lifted = ver_pushforward(down, target.ver)
            c = lcm(product.ring.conductor, lifted.ring.conductor)
            if product.promote_coefficients(c) != lifted.promote_coefficients(c):
                out.append(
                    f"split place product is not the exact transfer image: "
                    f"(a={label}, place={pspec.label})")
    return out


def check_transfer_congruence(beta_prime_label, side: CongruenceSide,
                              prime_side: CongruenceSide, T: TraceIdealBasis,
                              *, emit_witness: bool = True,
                              compare_swapped: bool = False) -> CongruenceReport:
    """Decide whether the fiber sum of measure coefficients minus the
    transfer image of the subfield coefficient lies in the trace ideal.

    The verdict is direct ideal membership of the difference.  The
    diagnostics decompose the two sides over the triple index set:
    equivariance of the free part, vanishing of fixed-point terms whose
    torsion unit has no subfield counterpart, and the per-triple
    congruence between matched fixed-point terms and their subfield
    images.  On a true verdict, the free part is additionally fed
    through criterion_4418 to produce an explicit trace preimage.

    With compare_swapped, every split-conductor place with an ingested
    swapped table is recomputed under the other distinguished-factor
    choice and the swapped verdict is reported alongside.
    """
    _validate_sides(side, prime_side, beta_prime_label, T)
    _relative_place_anchor(side, prime_side)
    report = _run_once(beta_prime_label, side, prime_side, T,
                       emit_witness=emit_witness, swapped=False)
    if not compare_swapped:
        return report
    has_swap = any(s.swapped_rec_table is not None
                   for cs in (side, prime_side)
                   for r in cs.reps.reps for s in r.specs)
    if not has_swap:
        raise ValueError("no swapped reciprocity tables were ingested")
    swapped_report = _run_once(beta_prime_label, side, prime_side, T,
                               emit_witness=False, swapped=True)
    if swapped_report.verdict != report.verdict:
        logger.warning("congruence verdict changed under the swapped "
                       "distinguished-factor choice")
    return CongruenceReport(report.verdict, report.diagnostics,
                            report.residual, report.free_witness,
                            swapped_verdict=swapped_report.verdict)


def _run_once(beta_prime_label, side: CongruenceSide,
              prime_side: CongruenceSide, T: TraceIdealBasis,
              *, emit_witness: bool, swapped: bool) -> CongruenceReport:
    target = side.target
    p = target.ring.prime
    terms = _triple_terms(side, swapped=swapped)
    prime_terms = _triple_terms(prime_side, swapped=swapped)

    lhs = GroupRingElt.zero(target.group, target.ring)
    for lam in terms.values():
        lhs = lhs + lam
    lhs = side.modification * lhs
    rhs0 = GroupRingElt.zero(prime_side.target.group, prime_side.target.ring)
    for lam in prime_terms.values():
        rhs0 = rhs0 + lam
    rhs0 = prime_side.modification * rhs0
    rhs = ver_pushforward(rhs0, target.ver)
    c = lcm(lhs.ring.conductor, rhs.ring.conductor)
    diff = lhs.promote_coefficients(c) - rhs.promote_coefficients(c)
    verdict = T.contains(diff)
    residual = T.reduce(diff)

    diagnostics: list[str] = []
    act = lambda triple: (side.beta_action[triple[0]],
                          side.reps.action[triple[1]],
                          side.unit_action[triple[2]])
    fixed_triples = [g for g in terms if act(g) == g]
    free_triples = [g for g in terms if act(g) != g]
    for gamma in free_triples:
        if terms[gamma].apply_action(target.action) != terms[act(gamma)]:
            b, a, u = gamma
            diagnostics.append(
                f"equivariance fails at (beta={b}, a={a}, u={u})")
    prime_unit_labels = {u.label for u in prime_side.units}
    matched_prime = set()
    for gamma in fixed_triples:
        b, a, u = gamma
        if u not in prime_unit_labels:
            if not terms[gamma].is_zero():
                diagnostics.append(
                    f"fixed-point term with a torsion unit outside the "
                    f"subfield family is nonzero: (beta={b}, a={a}, u={u})")
            continue
        matched_prime.add((a, u))
        up = side.modification * terms[gamma]
        down = ver_pushforward(
            prime_side.modification * prime_terms[(beta_prime_label, a, u)],
            target.ver)
        cc = lcm(up.ring.conductor, down.ring.conductor)
        delta = up.promote_coefficients(cc) - down.promote_coefficients(cc)
        if not T.contains(delta):
            diagnostics.append(
                f"fixed-point congruence fails at (beta={b}, a={a}, u={u})")
    for (bp, a, u) in prime_terms:
        if (a, u) in matched_prime:
            continue
        lam = ver_pushforward(prime_side.modification * prime_terms[(bp, a, u)],
                              target.ver)
        if not T.contains(lam):
            diagnostics.append(
                f"subfield term without a fixed counterpart is outside the "
                f"trace ideal: (a'={a}, u'={u})")
    diagnostics.extend(
        _split_place_comparisons(side, prime_side, beta_prime_label, swapped))

    witness = None
    if emit_witness and verdict and free_triples:
        gset = FiniteGSet(tuple(free_triples),
                          {g: act(g) for g in free_triples}, p)
        components = {g: side.modification * terms[g] for g in free_triples}
        ok, witness = criterion_4418(components, gset, target.action, target.ring)
        if not ok:
            witness = None
    return CongruenceReport(verdict, tuple(diagnostics), residual, witness)
