"""Towers of finite abelian quotients and the patching conditions on
measure families living over them.

A tower holds one finite abelian group per level together with the
transfer into each level, the order-p conjugation action of one level
over the one below, a finite generating set for the commutative Galois
action, and the resulting trace ideals.  Families of group-ring
elements over the tower are checked against the three patching
conditions (norm compatibility, Galois fixedness, transfer congruence
modulo the trace ideal), and finite-level L-values are evaluated
against induced characters, with the congruences between neighbouring
levels and between the induced and the trivially induced representation
decided exactly.
"""

from dataclasses import dataclass
from math import lcm

from .abgroups import CyclicAction, FiniteAbelianGroup, GroupHom, fixed_subgroup
from .exact.cyclotomic import CycloElt, CyclotomicInt
from .iwalg import (CharacterData, GroupRingElt, TraceIdealBasis,
                    integrate_character, norm_map, ver_pushforward)

__all__ = [
    "TowerLevel", "TowerData", "MeasureFamily", "PatchVerdict",
    "check_MS1", "check_MS2", "check_MS3", "check_phi_compat",
    "RepDescriptor", "eval_L_value", "character_order",
    "residue_above_p", "check_congruence_5313", "check_congruence_5328",
]


@dataclass(frozen=True)
class TowerLevel:
    """One level of a tower: its group, the order-p action of this level
    over the previous one, the Galois generators acting on it, and the
    transfer from the previous level (None at the bottom)."""

    group: FiniteAbelianGroup
    action: CyclicAction
    gamma: tuple[GroupHom, ...] = ()
    ver: GroupHom | None = None


class TowerData:
    """Validated tower of levels with per-level trace ideals.

    Construction asserts, per level r >= 1: the transfer is injective
    with index-p image, that image lies in the fixed subgroup of the
    level action, and every Galois generator fixes it pointwise.
    """

    def __init__(self, levels: tuple[TowerLevel, ...], prime: int,
                 precision: int) -> None:
        if not levels:
            raise ValueError("a tower needs at least one level")
        if levels[0].ver is not None:
            raise ValueError("level 0 admits no incoming transfer")
        for r, lev in enumerate(levels):
            if lev.action.group != lev.group:
                raise ValueError(f"level {r}: action is not on the level group")
            for i, g in enumerate(lev.gamma):
                if g.source != lev.group or g.target != lev.group:
                    raise ValueError(
                        f"level {r}: Galois generator {i} is not an endomorphism")
            if r == 0:
                continue
            v = lev.ver
            if v is None:
                raise ValueError(f"level {r}: transfer missing")
            prev = levels[r - 1].group
            if v.source != prev or v.target != lev.group:
                raise ValueError(f"level {r}: transfer does not join the levels")
            if lev.group.size != prime * prev.size:
                raise ValueError(f"level {r}: index is not {prime}")
            if lev.action.order != prime:
                raise ValueError(f"level {r}: action order is not {prime}")
            image = v.image_elements()
            if len(image) != prev.size:
                raise ValueError(f"level {r}: transfer is not injective")
            fixed = set(fixed_subgroup(lev.action)[1].image_elements())
            if not set(image) <= fixed:
                raise ValueError(
                    f"level {r}: transfer image is not fixed by the action")
            for i, g in enumerate(lev.gamma):
                for j in range(prev.rank):
                    im = v(prev.generator(j))
                    if g(im) != im:
                        raise ValueError(
                            f"level {r}: Galois generator {i} moves the "
                            "transfer image")
        self.levels = tuple(levels)
        self.prime = prime
        self.precision = precision
        self.trace_ideals = tuple(
            TraceIdealBasis(lev.action, prime, precision) for lev in levels)

    @property
    def top(self) -> int:
        return len(self.levels) - 1

    def group(self, r: int) -> FiniteAbelianGroup:
        return self.levels[r].group

    def ver(self, r: int) -> GroupHom:
        v = self.levels[r].ver
        assert v is not None, "transfer requested at the bottom level"
        return v


class MeasureFamily:
    """One group-ring element per tower level, with unit flags."""

    def __init__(self, x: tuple[GroupRingElt, ...]) -> None:
        self.x = tuple(x)
        self.unit_flags = tuple(m.is_unit() for m in self.x)

    def __len__(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class PatchVerdict:
    ok: bool
    failures: tuple[str, ...] = ()
    witnesses: tuple = ()


def _check_family(fam: MeasureFamily, tower: TowerData) -> None:
    if len(fam) != len(tower.levels):
        raise ValueError("family length does not match the tower")
    for r, m in enumerate(fam.x):
        if m.group != tower.group(r):
            raise ValueError(f"level {r}: element is over the wrong group")
        if (m.ring.prime, m.ring.precision) != (tower.prime, tower.precision):
            raise ValueError(f"level {r}: wrong coefficient ring")


def _promoted_difference(a: GroupRingElt, b: GroupRingElt) -> GroupRingElt:
    c = lcm(a.ring.conductor, b.ring.conductor)
    return a.promote_coefficients(c) - b.promote_coefficients(c)


def check_MS1(fam: MeasureFamily, tower: TowerData) -> PatchVerdict:
    """Norm compatibility: the norm of each level's element down the
    index-p subring equals the element one level below."""
    _check_family(fam, tower)
    failures = []
    for r in range(1, len(tower.levels)):
        down = norm_map(fam.x[r], (tower.group(r - 1), tower.ver(r)))
        if _promoted_difference(down, fam.x[r - 1]).is_zero():
            continue
        failures.append(f"level {r}: norm does not match the element below")
    return PatchVerdict(not failures, tuple(failures))


def check_MS2(fam: MeasureFamily, tower: TowerData) -> PatchVerdict:
    """Galois fixedness, checked against each level's generating set."""
    _check_family(fam, tower)
    failures = []
    for r, lev in enumerate(tower.levels):
        for i, g in enumerate(lev.gamma):
            if fam.x[r].apply_action(g) != fam.x[r]:
                failures.append(f"level {r}: generator {i} moves the element")
    return PatchVerdict(not failures, tuple(failures))


def check_MS3(fam: MeasureFamily, tower: TowerData) -> PatchVerdict:
    """Transfer congruence: x_r minus the transfer of x_{r-1} lies in the
    level-r trace ideal.  Witnesses carry the canonical residual per
    level; a zero residual certifies membership."""
    _check_family(fam, tower)
    failures = []
    witnesses = []
    for r in range(1, len(tower.levels)):
        diff = _promoted_difference(
            fam.x[r], ver_pushforward(fam.x[r - 1], tower.ver(r)))
        residual = tower.trace_ideals[r].reduce(diff)
        witnesses.append((r, residual))
        if not tower.trace_ideals[r].contains(diff):
            failures.append(
                f"level {r}: difference is outside the trace ideal")
    return PatchVerdict(not failures, tuple(failures), tuple(witnesses))


def check_phi_compat(lam0: GroupRingElt, lam1: GroupRingElt,
                     phi0: GroupHom, phi1: GroupHom,
                     unit: object = None) -> PatchVerdict:
    """Equality of the two projections onto the common quotient,
    optionally after scaling the first measure by a supplied unit."""
    if phi0.target != phi1.target:
        raise ValueError("projections must share their target")
    if unit is not None:
        lam0 = lam0 * lam0.ring.coerce(unit)
    im0 = ver_pushforward(lam0, phi0)
    im1 = ver_pushforward(lam1, phi1)
    diff = _promoted_difference(im0, im1)
    if diff.is_zero():
        return PatchVerdict(True)
    return PatchVerdict(False, ("projections disagree",), (diff,))


# -------------------------------------------------------- representations


def character_order(chi: CharacterData) -> int:
    out = 1
    for v in chi.gen_values:
        k = v.multiplicative_order()
        assert k is not None  # CharacterData only admits roots of unity
        out = lcm(out, k)
    return out


@dataclass(frozen=True)
class RepDescriptor:
    """Level-r representation datum: an inducing character of order
    exactly p^r (kind "rho") or the trivial one (kind "sigma"), the
    finite-level unit character table on generators, and an optional
    finite-order twist."""

    r: int
    kind: str
    prime: int
    eta: CharacterData | None = None
    kappa_gen_values: tuple[int, ...] | None = None
    twist: CharacterData | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("rho", "sigma"):
            raise ValueError("kind must be rho or sigma")
        if self.kind == "sigma":
            if self.eta is not None:
                raise ValueError("the sigma kind is induced from the trivial character")
            return
        if self.r == 0:
            if self.eta is not None and character_order(self.eta) != 1:
                raise ValueError("level-0 inducing character must be trivial")
            return
        if self.eta is None:
            raise ValueError("the rho kind needs its inducing character")
        order = character_order(self.eta)
        if order != self.prime ** self.r:
            raise ValueError(
                f"inducing character has order {order}, "
                f"expected {self.prime ** self.r}")


def _induced_character(rep: RepDescriptor, group: FiniteAbelianGroup,
                       weight: int) -> CharacterData:
    if rep.eta is not None and rep.eta.group != group:
        raise ValueError("inducing character is not on the measure's group")
    if rep.eta is not None:
        values = list(rep.eta.gen_values)
    else:
        values = [CyclotomicInt.one(1) for _ in range(group.rank)]
    if rep.twist is not None:
        if rep.twist.group != group:
            raise ValueError("twist is not on the measure's group")
        for i, tv in enumerate(rep.twist.gen_values):
            n = lcm(values[i].conductor, tv.conductor)
            values[i] = values[i].embed(n) * tv.embed(n)
    kappa = None
    if rep.kappa_gen_values is not None and weight:
        if len(rep.kappa_gen_values) != group.rank:
            raise ValueError("one unit character value per generator")
        if any(k % rep.prime == 0 for k in rep.kappa_gen_values):
            raise ValueError("unit character values must be units")
        table = rep.kappa_gen_values

        def kappa(x, _t=table, _g=group):
            out = 1
            for k, a in zip(_t, _g.reduce(x)):
                out *= pow(k, a)
            return out

    effective = weight if kappa is not None else 0
    return CharacterData(group, tuple(values), weight=effective, kappa=kappa)


def eval_L_value(measure: GroupRingElt, rep: RepDescriptor, n: int) -> CycloElt:
    """Finite-level L-value: the integral of the inducing character times
    the n-th power of the unit character against the measure."""
    chi = _induced_character(rep, measure.group, n)
    return integrate_character(measure, chi)


def residue_above_p(val: CycloElt) -> int:
    """Image in the prime field under the unique prime above p, for
    p-power conductors: evaluate at 1 and reduce mod p."""
    n = val.conductor
    while n % val.prime == 0:
        n //= val.prime
    if n != 1:
        raise ValueError(
            "residue above p needs a p-power conductor, got "
            f"{val.conductor}")
    return val.eval_at_root_one() % val.prime


def check_congruence_5313(measure: GroupRingElt, rep: RepDescriptor,
                          n: int) -> PatchVerdict:
    """The induced and the trivially induced L-value are congruent modulo
    the maximal ideal above p."""
    if rep.kind != "rho":
        raise ValueError("comparison starts from the rho kind")
    sigma = RepDescriptor(rep.r, "sigma", rep.prime, None,
                          rep.kappa_gen_values, rep.twist)
    l_rho = eval_L_value(measure, rep, n)
    l_sigma = eval_L_value(measure, sigma, n)
    if measure.ring.conductor == 1 and not l_sigma.is_rational():
        raise ValueError("trivially induced value must be rational here")
    c = lcm(l_rho.conductor, l_sigma.conductor)
    diff = l_rho.promote(c) - l_sigma.promote(c)
    ok = residue_above_p(diff) == 0
    if ok:
        return PatchVerdict(True, (), (diff,))
    return PatchVerdict(False, ("values differ modulo the maximal ideal",),
                        (diff,))


def _pull_character(chi: CharacterData, hom: GroupHom) -> tuple[CyclotomicInt, ...]:
    if chi.group != hom.target:
        raise ValueError("character is not on the hom's target")
    return tuple(chi.root_value(hom(hom.source.generator(i)))
                 for i in range(hom.source.rank))


def check_congruence_5328(fam: MeasureFamily, tower: TowerData,
                          rep: RepDescriptor, n: int) -> PatchVerdict:
    """Level-r versus level-(r-1) L-value congruence modulo p, the lower
    representation being induced from the composition of the inducing
    character with the transfer.

    Preconditions enforced: the family satisfies the transfer congruence
    at level r, and the composed character has order exactly p^{r-1}.
    """
    _check_family(fam, tower)
    r = rep.r
    if rep.kind != "rho" or not 1 <= r <= tower.top:
        raise ValueError("need a rho datum at a positive tower level")
    if rep.eta is None or rep.eta.group != tower.group(r):
        raise ValueError("inducing character is not on the level-r group")
    diff = _promoted_difference(
        fam.x[r], ver_pushforward(fam.x[r - 1], tower.ver(r)))
    if not tower.trace_ideals[r].contains(diff):
        raise ValueError(
            f"transfer congruence fails at level {r}; nothing to compare")
    v = tower.ver(r)
    low_values = _pull_character(rep.eta, v)
    eta_low = CharacterData(tower.group(r - 1), low_values)
    order = character_order(eta_low)
    if order != rep.prime ** (r - 1):
        raise ValueError(
            f"composed character has order {order}, "
            f"expected {rep.prime ** (r - 1)}")
    kappa_low = None
    if rep.kappa_gen_values is not None:
        top_group = tower.group(r)

        def kap(x):
            out = 1
            for k, a in zip(rep.kappa_gen_values, top_group.reduce(x)):
                out *= pow(k, a)
            return out

        kappa_low = tuple(
            kap(v(tower.group(r - 1).generator(i)))
            for i in range(tower.group(r - 1).rank))
    twist_low = None
    if rep.twist is not None:
        twist_low = CharacterData(tower.group(r - 1),
                                  _pull_character(rep.twist, v))
    rep_low = RepDescriptor(r - 1, "rho", rep.prime,
                            eta_low if r > 1 else None,
                            kappa_low, twist_low)
    l_top = eval_L_value(fam.x[r], rep, n)
    l_low = eval_L_value(fam.x[r - 1], rep_low, n)
    c = lcm(l_top.conductor, l_low.conductor)
    value_diff = l_top.promote(c) - l_low.promote(c)
    if value_diff.divisible_by_p():
        return PatchVerdict(True, (), (value_diff,))
    return PatchVerdict(False, (f"L-values differ modulo {rep.prime}",),
                        (value_diff,))
