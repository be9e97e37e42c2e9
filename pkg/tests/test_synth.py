"""Generator contracts: synthetic towers, family constructions, the
ramified-place model, and coherent congruence workspaces with their
targeted perturbations."""

import random

import pytest

from iwacong.eiscoeff import check_transfer_congruence
from iwacong.iwalg import CoeffRing
from iwacong.k1patch import check_MS1, check_MS2, check_MS3
from iwacong.synth import (FIXED_POINT_DIAGNOSTIC, _PERTURBATION_KINDS,
                           all_pass_family, frac_pair, norm_chain_family,
                           perturb_workspace, perturbed_family,
                           ram_place, random_congruence_workspace,
                           random_unit_measure, synthetic_tower, teichmuller)


def test_teichmuller():
    for p, n in ((3, 2), (5, 2), (7, 3)):
        m = p ** n
        for a in range(1, p):
            w = teichmuller(a, p, n)
            assert pow(w, p, m) == w
            assert w % p == a % p
    assert teichmuller(2, 3, 2) == 8
    with pytest.raises(ValueError, match="not a unit"):
        teichmuller(6, 3, 2)


def test_synthetic_tower_validation():
    with pytest.raises(ValueError, match="at least 0"):
        synthetic_tower(3, 2, -1)
    flat = synthetic_tower(3, 2, 0)
    assert flat.top == 0
    tower = synthetic_tower(3, 2, 2)
    assert tower.ver(1).source == tower.group(0)
    assert len(tower.levels[1].gamma) == 1
    assert tower.levels[0].gamma == ()


def test_random_unit_measure_determinism():
    tower = synthetic_tower(3, 2, 1)
    ring = CoeffRing(3, 2)
    a = random_unit_measure(tower.group(1), ring, random.Random(3))
    b = random_unit_measure(tower.group(1), ring, random.Random(3))
    assert a == b and a.is_unit()


def test_norm_chain_family_p5():
    tower = synthetic_tower(5, 2, 1)
    fam = norm_chain_family(tower, random.Random(8))
    assert check_MS1(fam, tower).ok


def test_all_pass_family_p5():
    tower = synthetic_tower(5, 2, 1)
    fam = all_pass_family(tower, random.Random(8))
    assert check_MS1(fam, tower).ok
    assert check_MS2(fam, tower).ok
    assert check_MS3(fam, tower).ok


def test_perturbed_family_rejects_bad_input():
    tower = synthetic_tower(3, 2, 1)
    with pytest.raises(ValueError, match="name one of the three"):
        perturbed_family(tower, random.Random(0), "MS4")
    with pytest.raises(ValueError, match="at least two levels"):
        perturbed_family(synthetic_tower(3, 2, 0), random.Random(0), "MS1")


def test_frac_pair():
    assert frac_pair(0, 4) == (1, 0)
    assert frac_pair(2, 4) == (2, 1)
    assert frac_pair(6, 4) == (2, 1)
    assert frac_pair(-1, 4) == (4, 3)


def test_ram_place_shape():
    spec = ram_place("t8", "tp", 3, {"b0": 1}, 9)
    assert spec.splitting == "ramified" and spec.q == 8
    assert set(spec.levels) == {(1, 0), (2, 1)}
    assert len(spec.levels[(1, 0)]) == 8
    assert len(spec.levels[(2, 1)]) == 512
    assert spec.psi_table["t_over_2d"] == (1, 0)
    primed = ram_place("tp", None, 1, {"b0": 1}, 3, deg=1)
    assert primed.q == 2
    assert len(primed.levels[(1, 0)]) == 2


def test_workspace_all_pass_grid():
    for seed in range(6):
        side, side_p, ideal = random_congruence_workspace(
            random.Random(seed))
        report = check_transfer_congruence("b0", side, side_p, ideal)
        assert report.verdict and not report.diagnostics
        assert report.free_witness is not None


def test_workspace_determinism():
    a = random_congruence_workspace(random.Random(77))
    b = random_congruence_workspace(random.Random(77))
    assert a[0].betas == b[0].betas
    assert a[0].modification == b[0].modification
    assert [s.label for r in a[0].reps.reps for s in r.specs] == \
        [s.label for r in b[0].reps.reps for s in r.specs]


def test_workspace_options():
    side, side_p, ideal = random_congruence_workspace(
        random.Random(2), with_ramified=True, free_reps=1, extra_unit=True)
    labels = [r.label for r in side.reps.reps]
    assert labels == ["a0", "a1", "a2", "a3"]
    assert any(s.splitting == "ramified"
               for s in side.reps.rep("a0").specs)
    assert {u.label for u in side.units} == {"u0", "ux"}
    report = check_transfer_congruence("b0", side, side_p, ideal)
    assert report.verdict and not report.diagnostics


def test_workspace_p5():
    side, side_p, ideal = random_congruence_workspace(
        random.Random(4), prime=5, split_orbits=2, generic_orbits=2)
    assert len(side.betas) == 6
    assert side.target.group.invariant_factors == (25,)
    report = check_transfer_congruence("b0", side, side_p, ideal)
    assert report.verdict and not report.diagnostics


def test_workspace_ramified_needs_p3():
    with pytest.raises(ValueError, match="only built for p = 3"):
        random_congruence_workspace(random.Random(0), prime=5,
                                    with_ramified=True)


def test_perturbations_each_kind():
    for kind in _PERTURBATION_KINDS:
        side, side_p, ideal, chosen, expect = perturb_workspace(
            random.Random(hash(kind) % 1000), kind=kind, tries=60)
        assert chosen == kind
        assert expect == FIXED_POINT_DIAGNOSTIC
        report = check_transfer_congruence("b0", side, side_p, ideal)
        assert not report.verdict
        assert any(expect in d for d in report.diagnostics)


def test_perturbations_random_mix():
    seen = set()
    for i in range(25):
        side, side_p, ideal, kind, expect = perturb_workspace(
            random.Random(500 + i))
        seen.add(kind)
        report = check_transfer_congruence("b0", side, side_p, ideal)
        assert not report.verdict
        assert any(expect in d for d in report.diagnostics)
    assert len(seen) >= 4


def test_perturbations_p5():
    for i in range(5):
        side, side_p, ideal, kind, expect = perturb_workspace(
            random.Random(900 + i), prime=5)
        report = check_transfer_congruence("b0", side, side_p, ideal)
        assert not report.verdict
        assert any(expect in d for d in report.diagnostics)
