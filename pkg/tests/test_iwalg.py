"""Group rings, trace ideals, criteria, transfer, norm, characters."""

import random

import pytest

from iwacong.abgroups import (
    CyclicAction,
    FiniteAbelianGroup,
    FiniteGSet,
    GroupHom,
    TRIVIAL_GROUP,
    identity_hom,
    subgroup_from_generators,
)
from iwacong.exact import CyclotomicInt
from iwacong.iwalg import (
    CharacterData,
    CoeffRing,
    GroupRingElt,
    criterion_4418,
    criterion_4424,
    integrate_character,
    norm_map,
    pushforward_measure,
    trace_ideal,
    trace_ideal_contains,
    trace_map,
    ver_pushforward,
)

Z9 = FiniteAbelianGroup((9,))
Z3 = FiniteAbelianGroup((3,))
C333 = FiniteAbelianGroup((3, 3, 3))
R33 = CoeffRing(3, 2)  # Z/9 coefficients
ACT9 = CyclicAction.from_matrix(Z9, ((4,),), 3)
ROT = CyclicAction.from_matrix(C333, ((0, 1, 0), (0, 0, 1), (1, 0, 0)), 3)


def rand_elt(rng, group, ring, size=4):
    out = GroupRingElt.zero(group, ring)
    for _ in range(size):
        g = tuple(rng.randrange(d) for d in group.invariant_factors)
        out = out + GroupRingElt.delta(group, ring, g, rng.randrange(ring.modulus))
    return out


def test_group_ring_basics():
    one = GroupRingElt.one(Z9, R33)
    g = GroupRingElt.delta(Z9, R33, (1,))
    ginv = GroupRingElt.delta(Z9, R33, (8,))
    assert g * ginv == one
    assert (one + g) * (one - g) == one - g * g
    assert (g - g).is_zero()
    assert g.augmentation() == R33.one()


def test_convolution_matches_oracle():
    rng = random.Random(31)
    ring = CoeffRing(3, 2)
    for _ in range(20):
        a = rand_elt(rng, Z3, ring)
        b = rand_elt(rng, Z3, ring)
        expected = {}
        for g, c in a.support.items():
            for h, d in b.support.items():
                k = ((g[0] + h[0]) % 3,)
                expected[k] = (expected.get(k, 0) + c.coeffs[0] * d.coeffs[0]) % 9
        prod = a * b
        for k, v in expected.items():
            assert prod.coefficient(k).coeffs[0] == v % 9


def test_mismatched_rings_refused():
    a = GroupRingElt.one(Z9, CoeffRing(3, 2))
    b = GroupRingElt.one(Z9, CoeffRing(3, 2, 9))
    with pytest.raises(ValueError):
        a + b
    assert a.promote_coefficients(9) + b == b * 2


def test_trace_map_examples():
    lam = GroupRingElt.delta(Z9, R33, (0,))
    assert trace_map(lam, ACT9) == lam * 3

    lam1 = GroupRingElt.delta(Z9, R33, (1,))
    out = trace_map(lam1, ACT9)
    expected = (GroupRingElt.delta(Z9, R33, (1,))
                + GroupRingElt.delta(Z9, R33, (4,))
                + GroupRingElt.delta(Z9, R33, (7,)))
    assert out == expected


def test_trace_map_invariants():
    rng = random.Random(32)
    for _ in range(15):
        lam = rand_elt(rng, Z9, R33)
        t = trace_map(lam, ACT9)
        assert t.apply_action(ACT9) == t
        assert trace_map(lam.apply_action(ACT9), ACT9) == t


def test_trace_ideal_trivial_group():
    act = CyclicAction(TRIVIAL_GROUP, identity_hom(TRIVIAL_GROUP), 3)
    T = trace_ideal(act, 3, 2)
    ring = CoeffRing(3, 2)
    assert T.contains(GroupRingElt.one(TRIVIAL_GROUP, ring) * 3)
    assert not T.contains(GroupRingElt.one(TRIVIAL_GROUP, ring))


def test_trace_ideal_rotation_examples():
    T = trace_ideal(ROT, 3, 1)
    ring = CoeffRing(3, 1)
    orbit_sum = (GroupRingElt.delta(C333, ring, (1, 0, 0))
                 + GroupRingElt.delta(C333, ring, (0, 1, 0))
                 + GroupRingElt.delta(C333, ring, (0, 0, 1)))
    assert trace_ideal_contains(orbit_sum, T)
    diag = GroupRingElt.delta(C333, ring, (1, 1, 1))
    assert not trace_ideal_contains(diag, T)
    assert T.contains(GroupRingElt.zero(C333, ring))


def test_trace_ideal_contains_p_times_fixed():
    T = trace_ideal(ACT9, 3, 2)
    fixed = GroupRingElt.delta(Z9, R33, (3,)) * 3
    assert T.contains(fixed)
    assert not T.contains(GroupRingElt.delta(Z9, R33, (3,)))


def test_trace_ideal_augmentation_invariant():
    rng = random.Random(33)
    for act, group in [(ACT9, Z9), (ROT, C333)]:
        T = trace_ideal(act, 3, 2)
        ring = CoeffRing(3, 2)
        for _ in range(10):
            vec = [0] * group.size
            for row in T.basis.rows:
                c = rng.randrange(9)
                vec = [(x + c * y) % 9 for x, y in zip(vec, row)]
            lam = GroupRingElt.from_vectors(group, ring, [tuple(vec)])
            assert lam.augmentation().coeffs[0] % 3 == 0
            assert T.contains(lam)


def test_trace_image_span_vs_ideal():
    # The ideal is strictly larger than the additive span of the trace
    # image here: p * delta_1 is a translate of p * delta_0 but no plain
    # trace combination, once N >= 2 keeps p nonzero.
    from iwacong.exact import HowellBasis

    index = {g: i for i, g in enumerate(Z9.elements())}
    image_rows = []
    for g in Z9.elements():
        vec = [0] * 9
        orbit = {g, ACT9.apply(g), ACT9.apply(g, 2)}
        for x in orbit:
            vec[index[x]] += 3 if len(orbit) == 1 else 1
        image_rows.append(tuple(v % 9 for v in vec))
    image_span = HowellBasis(image_rows, 9, 3, 2)
    T = trace_ideal(ACT9, 3, 2)
    for row in image_rows:
        assert T.basis.contains(row)
    p_delta1 = [0] * 9
    p_delta1[index[(1,)]] = 3
    assert T.basis.contains(tuple(p_delta1))
    assert not image_span.contains(tuple(p_delta1))


def test_cyclotomic_coefficient_membership():
    T = trace_ideal(ACT9, 3, 2)
    ring9 = CoeffRing(3, 2, 9)
    zeta = CyclotomicInt.root_power(9, 1)
    orbit_sum = (GroupRingElt.delta(Z9, ring9, (1,), zeta)
                 + GroupRingElt.delta(Z9, ring9, (4,), zeta)
                 + GroupRingElt.delta(Z9, ring9, (7,), zeta))
    assert T.contains(orbit_sum)
    assert not T.contains(orbit_sum + GroupRingElt.delta(Z9, ring9, (1,)))
    mixed = orbit_sum * (1 + CyclotomicInt.root_power(9, 2))
    assert T.contains(mixed)


def free_orbit_components(rng, act, ring, labels):
    lam = rand_elt(rng, act.group, ring)
    comps = {labels[0]: lam}
    for i in range(1, len(labels)):
        comps[labels[i]] = comps[labels[i - 1]].apply_action(act)
    return comps


def test_criterion_4418_cases():
    ring = R33
    W = FiniteGSet(("a", "b", "c"), {"a": "b", "b": "c", "c": "a"}, 3)
    zero_comps = {x: GroupRingElt.zero(Z9, ring) for x in W.elements}
    ok, pre = criterion_4418(zero_comps, W, ACT9, ring)
    assert ok and pre.is_zero()

    rng = random.Random(34)
    comps = free_orbit_components(rng, ACT9, ring, ["a", "b", "c"])
    ok, pre = criterion_4418(comps, W, ACT9, ring)
    assert ok
    total = comps["a"] + comps["b"] + comps["c"]
    assert trace_map(pre, ACT9) == total

    Wf = FiniteGSet(("x",), {"x": "x"}, 3)
    bad = {"x": GroupRingElt.delta(Z9, ring, (1,))}
    # delta_1 is not sigma-fixed, and also not p-divisible: verdict false.
    ok, pre = criterion_4418(bad, Wf, ACT9, ring)
    assert not ok and pre is None
    good = {"x": GroupRingElt.delta(Z9, ring, (3,)) * 3}
    ok, pre = criterion_4418(good, Wf, ACT9, ring)
    assert ok and pre == GroupRingElt.delta(Z9, ring, (3,))


def test_criterion_4418_implies_membership():
    rng = random.Random(35)
    T = trace_ideal(ACT9, 3, 2)
    W = FiniteGSet(("a", "b", "c", "x"), {"a": "b", "b": "c", "c": "a", "x": "x"}, 3)
    for _ in range(30):
        comps = free_orbit_components(rng, ACT9, R33, ["a", "b", "c"])
        fixed_lam = trace_map(rand_elt(rng, Z9, R33), ACT9) * 3
        comps["x"] = fixed_lam
        ok, pre = criterion_4418(comps, W, ACT9, R33)
        assert ok
        total = GroupRingElt.zero(Z9, R33)
        for v in comps.values():
            total = total + v
        assert T.contains(total)
        assert trace_map(pre, ACT9) == total


def test_criterion_4424_cases():
    W = FiniteGSet(("a", "b", "c"), {"a": "b", "b": "c", "c": "a"}, 3)
    terms = {"a": (2, (1,)), "b": (2, (4,)), "c": (2, (7,))}
    assert criterion_4424(terms, W, ACT9, R33)

    Wf = FiniteGSet(("x",), {"x": "x"}, 3)
    assert criterion_4424({"x": (3, (0,))}, Wf, ACT9, R33)
    assert not criterion_4424({"x": (1, (0,))}, Wf, ACT9, R33)
    # Broken equivariance of the group elements.
    bad = {"a": (2, (1,)), "b": (2, (4,)), "c": (2, (8,))}
    assert not criterion_4424(bad, W, ACT9, R33)
    # Coefficients unequal along the free orbit.
    bad2 = {"a": (2, (1,)), "b": (5, (4,)), "c": (2, (7,))}
    assert not criterion_4424(bad2, W, ACT9, R33)


def test_ver_pushforward():
    ring = CoeffRing(3, 2)
    diag = GroupHom(Z3, C333, (((1, 1, 1)),))
    lam = GroupRingElt.delta(Z3, ring, (1,))
    assert ver_pushforward(lam, diag) == GroupRingElt.delta(C333, ring, (1, 1, 1))
    one = GroupRingElt.one(Z3, ring)
    assert ver_pushforward(one, diag) == GroupRingElt.one(C333, ring)
    rng = random.Random(36)
    a = rand_elt(rng, Z3, ring)
    b = rand_elt(rng, Z3, ring)
    assert ver_pushforward(a + b, diag) == ver_pushforward(a, diag) + ver_pushforward(b, diag)


def test_ver_pushforward_frobenius_twist():
    ring = CoeffRing(3, 2, 9)
    zeta = CyclotomicInt.root_power(9, 1)
    lam = GroupRingElt.delta(Z3, ring, (1,), zeta)
    twisted = ver_pushforward(lam, identity_hom(Z3), coeff_twist=lambda c: c.galois(4))
    assert twisted == GroupRingElt.delta(Z3, ring, (1,), zeta ** 4)


def test_norm_map_circulant():
    ring = CoeffRing(3, 2)
    triv = subgroup_from_generators(Z3, [])
    rng = random.Random(37)
    hits = 0
    for _ in range(15):
        a, b, c = (rng.randrange(9) for _ in range(3))
        u = (GroupRingElt.delta(Z3, ring, (0,), a)
             + GroupRingElt.delta(Z3, ring, (1,), b)
             + GroupRingElt.delta(Z3, ring, (2,), c))
        if not u.is_unit():
            continue
        nm = norm_map(u, triv)
        expected = (a ** 3 + b ** 3 + c ** 3 - 3 * a * b * c) % 9
        assert nm.coefficient(()).coeffs[0] == expected
        hits += 1
    assert hits >= 5


def test_norm_map_identity_and_delta():
    ring = CoeffRing(3, 2)
    sub = subgroup_from_generators(Z9, [(3,)])
    H, incl = sub
    assert norm_map(GroupRingElt.one(Z9, ring), sub) == GroupRingElt.one(H, ring)
    nm = norm_map(GroupRingElt.delta(Z9, ring, (1,)), sub)
    # The norm sends delta_g to delta_(pg), read inside the subgroup.
    target = {x for x in H.elements() if incl(x) == (3,)}
    assert nm == GroupRingElt.delta(H, ring, target.pop())


def test_norm_map_multiplicative_and_subring_power():
    ring = CoeffRing(3, 2)
    sub = subgroup_from_generators(Z9, [(3,)])
    H, incl = sub
    rng = random.Random(38)
    done = 0
    while done < 8:
        u = rand_elt(rng, Z9, ring)
        w = rand_elt(rng, Z9, ring)
        if not (u.is_unit() and w.is_unit()):
            continue
        assert norm_map(u * w, sub) == norm_map(u, sub) * norm_map(w, sub)
        done += 1
    # Elements already inside the subring get cubed.
    v = GroupRingElt.one(Z9, ring) + GroupRingElt.delta(Z9, ring, (3,))
    nv = norm_map(v, sub)
    vh = GroupRingElt.one(H, ring) + GroupRingElt.delta(H, ring, next(
        x for x in H.elements() if incl(x) == (3,)))
    assert nv == vh ** 3


def test_norm_map_rejects_nonunit():
    ring = CoeffRing(3, 2)
    sub = subgroup_from_generators(Z9, [(3,)])
    u = (GroupRingElt.one(Z9, ring) + GroupRingElt.delta(Z9, ring, (1,))
         + GroupRingElt.delta(Z9, ring, (2,)))
    assert u.augmentation().coeffs[0] == 3
    with pytest.raises(ValueError):
        norm_map(u, sub)


def test_character_data_validation():
    with pytest.raises(ValueError):
        CharacterData(Z3, (CyclotomicInt.root_power(9, 1),))
    with pytest.raises(ValueError):
        CharacterData(Z3, (CyclotomicInt.root_power(3, 1),), weight=2)
    chi = CharacterData(Z3, (CyclotomicInt.root_power(3, 1),))
    assert chi.conductor == 3


def test_integrate_character_examples():
    ring = CoeffRing(3, 2)
    chi = CharacterData(Z3, (CyclotomicInt.root_power(3, 1),))
    g = GroupRingElt.delta(Z3, ring, (1,))
    val = integrate_character(g, chi)
    assert val.coeffs == CyclotomicInt.root_power(3, 1).coeffs
    orth = (GroupRingElt.delta(Z3, ring, (0,)) + GroupRingElt.delta(Z3, ring, (1,))
            + GroupRingElt.delta(Z3, ring, (2,)))
    assert integrate_character(orth, chi).is_zero()


def test_integrate_character_multiplicative():
    rng = random.Random(39)
    ring = CoeffRing(3, 2)
    chi = CharacterData(Z3, (CyclotomicInt.root_power(3, 1),))
    for _ in range(100):
        a = rand_elt(rng, Z3, ring, size=3)
        b = rand_elt(rng, Z3, ring, size=3)
        assert integrate_character(a * b, chi) == integrate_character(a, chi) * integrate_character(b, chi)


def test_integrate_character_weight_twist():
    ring = CoeffRing(3, 2)
    kappa = lambda x: 1 + 3 * x[0]  # multiplicative into 1 + pZ: (1+3)^2 = 7 = 1+3*2 mod 9
    chi = CharacterData(Z3, (CyclotomicInt.one(3),), weight=2, kappa=kappa)
    lam = GroupRingElt.delta(Z3, ring, (1,))
    assert integrate_character(lam, chi).coeffs[0] == pow(4, 2, 9)


def test_pushforward_measure():
    ring = CoeffRing(3, 2)
    triv = CharacterData(Z3, (CyclotomicInt.one(3),))
    lam = (GroupRingElt.delta(Z3, ring, (1,), 2) + GroupRingElt.delta(Z3, ring, (2,), 5))
    assert pushforward_measure(lam, identity_hom(Z3), triv) == lam

    proj = GroupHom(Z9, Z3, ((1,),))
    chi = CharacterData(Z9, (CyclotomicInt.root_power(9, 1),))
    single = GroupRingElt.delta(Z9, CoeffRing(3, 2), (2,))
    out = pushforward_measure(single, proj, chi)
    ring9 = CoeffRing(3, 2, 9)
    assert out == GroupRingElt.delta(Z3, ring9, (2,), CyclotomicInt.root_power(9, 2))


def test_pushforward_then_integrate():
    rng = random.Random(40)
    proj = GroupHom(Z9, Z3, ((1,),))
    chi = CharacterData(Z9, (CyclotomicInt.root_power(3, 1),))
    phi = CharacterData(Z3, (CyclotomicInt.root_power(3, 1),))
    for _ in range(25):
        lam = rand_elt(rng, Z9, CoeffRing(3, 2))
        pushed = pushforward_measure(lam, proj, chi)
        lhs = integrate_character(pushed, phi)
        # phi o proj has value zeta_3 on the generator of Z/9, times the branch.
        combined = CharacterData(Z9, (CyclotomicInt.root_power(3, 2),))
        rhs = integrate_character(lam, combined)
        assert lhs == rhs
