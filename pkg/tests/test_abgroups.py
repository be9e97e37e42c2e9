"""Finite abelian groups: SNF transforms, hom algebra, actions, orbits."""

import random

import pytest
from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from iwacong.abgroups import (
    CyclicAction,
    FiniteAbelianGroup,
    FiniteGSet,
    GroupHom,
    TRIVIAL_GROUP,
    abelian_basis_from_table,
    abelian_structure_from_table,
    compose_hom,
    coset_representatives,
    fixed_subgroup,
    identity_hom,
    image,
    kernel,
    orbit_decomposition,
    smith_normal_form,
    subgroup_from_generators,
)
from oracles import subgroup_closure


def assert_snf_valid(M):
    D, U, V = smith_normal_form(M)
    assert Matrix(U) * Matrix(M) * Matrix(V) == Matrix(D)
    assert abs(Matrix(U).det()) == 1
    assert abs(Matrix(V).det()) == 1
    diag = [D[i][i] for i in range(min(len(D), len(D[0])))]
    oracle = sympy_snf(Matrix(M))
    odiag = [oracle[i, i] for i in range(min(oracle.shape))]
    assert [abs(d) for d in diag] == [abs(int(x)) for x in odiag]
    for a, b in zip(diag, diag[1:]):
        if a and b:
            assert b % a == 0
    return diag


def test_snf_known_example():
    diag = assert_snf_valid([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    assert diag == [2, 6, 12]


def test_snf_random_matrices():
    rng = random.Random(7)
    for _ in range(40):
        m = rng.randrange(1, 5)
        n = rng.randrange(1, 5)
        M = [[rng.randrange(-9, 10) for _ in range(n)] for _ in range(m)]
        assert_snf_valid(M)


def test_group_basics():
    A = FiniteAbelianGroup((3, 9))
    assert A.size == 27
    assert A.rank == 2
    assert A.add((2, 8), (1, 1)) == (0, 0)
    assert A.neg((1, 4)) == (2, 5)
    assert A.element_order((0, 3)) == 3
    assert A.element_order((1, 1)) == 9
    assert len(A.elements()) == 27
    assert TRIVIAL_GROUP.elements() == [()]
    with pytest.raises(ValueError):
        FiniteAbelianGroup((9, 3))
    with pytest.raises(ValueError):
        FiniteAbelianGroup((1, 3))


def test_hom_validation_and_apply():
    A = FiniteAbelianGroup((9,))
    B = FiniteAbelianGroup((3,))
    f = GroupHom(A, B, (((1,)),))
    assert f((7,)) == (1,)
    with pytest.raises(ValueError):
        GroupHom(B, A, ((1,),))  # order-3 generator cannot map to an order-9 element
    GroupHom(B, A, ((3,),))


def test_compose_and_identity():
    A = FiniteAbelianGroup((9,))
    f = GroupHom(A, A, ((4,),))
    assert compose_hom(identity_hom(A), f).matrix == f.matrix
    assert compose_hom(f, identity_hom(A)).matrix == f.matrix
    g = compose_hom(f, f)
    assert g.matrix == ((7,),)


def test_kernel_spec_example():
    A = FiniteAbelianGroup((9,))
    f = GroupHom(A, A, ((3,),))
    K, incl = kernel(f)
    assert K.invariant_factors == (3,)
    assert incl.image_elements() == {(0,), (3,), (6,)}


def test_image_diagonal():
    B = FiniteAbelianGroup((3,))
    C = FiniteAbelianGroup((3, 3, 3))
    f = GroupHom(B, C, (((1, 1, 1)),))
    I, incl = image(f)
    assert I.invariant_factors == (3,)
    assert incl.image_elements() == {(0, 0, 0), (1, 1, 1), (2, 2, 2)}


def test_subgroup_matches_closure_oracle():
    rng = random.Random(21)
    for invs in [(4,), (2, 4), (3, 9), (2, 2, 2), (5, 5)]:
        A = FiniteAbelianGroup(invs)
        elems = A.elements()
        for _ in range(10):
            gens = [rng.choice(elems) for _ in range(rng.randrange(1, 4))]
            S, incl = subgroup_from_generators(A, gens)
            expected = subgroup_closure(A.zero(), A.add, gens)
            assert incl.image_elements() == expected
            assert S.size == len(expected)


def test_kernel_image_counting():
    rng = random.Random(22)
    for _ in range(20):
        A = FiniteAbelianGroup(rng.choice([(4,), (2, 4), (3, 3), (9,), (3, 9)]))
        B = FiniteAbelianGroup(rng.choice([(4,), (2, 8), (3, 9), (9,)]))
        cols = []
        for i in range(A.rank):
            d = A.invariant_factors[i]
            while True:
                cand = tuple(rng.randrange(e) for e in B.invariant_factors)
                if not any(B.scalar(d, cand)):
                    cols.append(cand)
                    break
        f = GroupHom(A, B, tuple(cols))
        K, _ = kernel(f)
        I, _ = image(f)
        assert K.size * I.size == A.size
        brute_kernel = {x for x in A.elements() if not any(f(x))}
        assert K.size == len(brute_kernel)


def test_fixed_subgroup_spec_examples():
    A = FiniteAbelianGroup((9,))
    act = CyclicAction.from_matrix(A, ((4,),), 3)
    F, incl = fixed_subgroup(act)
    assert F.invariant_factors == (3,)
    assert incl.image_elements() == {(0,), (3,), (6,)}

    triv = CyclicAction.from_matrix(A, ((1,),), 3)
    F2, _ = fixed_subgroup(triv)
    assert F2.size == A.size

    C3 = FiniteAbelianGroup((3, 3, 3))
    rot = CyclicAction.from_matrix(
        C3, ((0, 1, 0), (0, 0, 1), (1, 0, 0)), 3)
    F3, incl3 = fixed_subgroup(rot)
    assert F3.invariant_factors == (3,)
    assert incl3.image_elements() == {(0, 0, 0), (1, 1, 1), (2, 2, 2)}


def test_fixed_subgroup_power_invariance():
    A = FiniteAbelianGroup((9,))
    s1 = CyclicAction.from_matrix(A, ((4,),), 3)
    s2 = CyclicAction.from_matrix(A, ((7,),), 3)  # 4^2 mod 9
    F1, i1 = fixed_subgroup(s1)
    F2, i2 = fixed_subgroup(s2)
    assert F1.invariant_factors == F2.invariant_factors
    assert i1.image_elements() == i2.image_elements()


def test_cyclic_action_rejects_wrong_order():
    A = FiniteAbelianGroup((9,))
    with pytest.raises(ValueError):
        CyclicAction.from_matrix(A, ((2,),), 3)  # 2^3 = 8 != 1 mod 9


def test_orbit_decomposition_spec_example():
    A = FiniteAbelianGroup((9,))
    act = CyclicAction.from_matrix(A, ((4,),), 3)
    W = act.as_gset()
    fixed, free = orbit_decomposition(W)
    assert set(fixed) == {(0,), (3,), (6,)}
    assert sorted(sorted(o) for o in free) == [
        [(1,), (4,), (7,)],
        [(2,), (5,), (8,)],
    ]


def test_orbit_decomposition_counts():
    rng = random.Random(23)
    p = 3
    for _ in range(15):
        n_fixed = rng.randrange(0, 4)
        n_free = rng.randrange(0, 4)
        labels = [f"e{i}" for i in range(n_fixed + p * n_free)]
        rng.shuffle(labels)
        action = {}
        for i in range(n_fixed):
            action[labels[i]] = labels[i]
        for k in range(n_free):
            cyc = labels[n_fixed + p * k: n_fixed + p * (k + 1)]
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                action[a] = b
        W = FiniteGSet(tuple(labels), action, p)
        fixed, free = orbit_decomposition(W)
        assert len(fixed) == n_fixed
        assert len(free) == n_free
        assert len(fixed) + p * len(free) == len(W.elements)


def test_orbit_decomposition_rejects_bad_order():
    W = FiniteGSet(("a", "b"), {"a": "b", "b": "a"}, 3)
    with pytest.raises(ValueError):
        orbit_decomposition(W)


def test_coset_representatives():
    A = FiniteAbelianGroup((9,))
    reps = coset_representatives(A, {(0,), (3,), (6,)})
    assert reps == [(0,), (1,), (2,)]
    with pytest.raises(ValueError):
        coset_representatives(A, {(0,), (3,)})


def test_structure_from_table():
    # Units mod 7 under multiplication: cyclic of order 6.
    elems = list(range(1, 7))
    assert abelian_structure_from_table(elems, lambda a, b: a * b % 7) == (6,)
    # XOR on two bits: Klein four group.
    assert abelian_structure_from_table([0, 1, 2, 3], lambda a, b: a ^ b) == (2, 2)
    # Units mod 5: cyclic of order 4, not (2, 2).
    assert abelian_structure_from_table([1, 2, 3, 4], lambda a, b: a * b % 5) == (4,)
    # Units mod 16: Z/2 x Z/4.
    units16 = [k for k in range(16) if k % 2]
    assert abelian_structure_from_table(units16, lambda a, b: a * b % 16) == (2, 4)
    # Additive Z/9.
    assert abelian_structure_from_table(list(range(9)), lambda a, b: (a + b) % 9) == (9,)


def test_structure_from_table_matches_group():
    rng = random.Random(24)
    for invs in [(2,), (4,), (2, 2), (3, 9), (2, 4), (5,), (2, 2, 4)]:
        A = FiniteAbelianGroup(invs)
        elems = A.elements()
        rng.shuffle(elems)
        assert abelian_structure_from_table(elems, A.add) == invs


def test_basis_from_table_is_isomorphism():
    rng = random.Random(31)
    cases = [
        ([k for k in range(16) if k % 2], lambda a, b: a * b % 16),
        (list(range(1, 7)), lambda a, b: a * b % 7),
        ([1, 2, 3, 4], lambda a, b: a * b % 5),
        (list(range(12)), lambda a, b: (a + b) % 12),
    ]
    for elems, mul in cases:
        elems = list(elems)
        rng.shuffle(elems)
        group, to_group, from_group = abelian_basis_from_table(elems, mul)
        assert group.invariant_factors == abelian_structure_from_table(elems, mul)
        assert sorted(to_group) == sorted(elems)
        assert len(set(to_group.values())) == len(elems)
        for a in elems:
            for b in elems:
                assert to_group[mul(a, b)] == group.add(to_group[a], to_group[b])
        assert all(from_group[to_group[a]] == a for a in elems)


def test_basis_from_table_trivial():
    group, to_group, from_group = abelian_basis_from_table(["e"], lambda a, b: "e")
    assert group is TRIVIAL_GROUP
    assert to_group == {"e": ()}


def test_basis_from_table_product_group():
    A = FiniteAbelianGroup((3, 9))
    elems = A.elements()
    random.Random(5).shuffle(elems)
    group, to_group, _ = abelian_basis_from_table(elems, A.add)
    assert group.invariant_factors == (3, 9)
    for a in elems[:20]:
        for b in elems[:20]:
            assert to_group[A.add(a, b)] == group.add(to_group[a], to_group[b])
